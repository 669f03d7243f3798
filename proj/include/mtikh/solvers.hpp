#pragma once

#include "mtikh/penalties.hpp"
#include "mtikh/types.hpp"

#include <optional>

namespace mtikh {

/// Inner-solver controls. Unset fields take per-solver defaults:
/// proximal gradient tol 1e-10 / 20000 iterations, ADMM tol 1e-8 / 5000
/// iterations with initial rho = eta2.
struct SolverOptions {
    std::optional<double> tol;
    std::optional<int> max_iter;
    std::optional<double> admm_rho;
    bool record_trace = false;

    void validate() const;
};

inline constexpr double kProxGradTol = 1e-10;
inline constexpr int kProxGradMaxIter = 20000;
inline constexpr double kAdmmTol = 1e-8;
inline constexpr int kAdmmMaxIter = 5000;

/// Direct solve of (K'K + eta1 L1'L1 + eta2 L2'L2) u = K'g, i.e. the
/// minimizer of 1/2|Ku - g|^2 + eta1/2 |L1 u|^2 + eta2/2 |L2 u|^2.
/// Throws SingularSystem when the normal matrix is not positive definite.
TikhonovSolution solve_quadratic(const Matrix& K, const Vector& g_obs, const SparseMatrix& L1,
                                 const SparseMatrix& L2, const RegParams& eta);

/// 1/2|Ku - g|^2 + eta1 |u|_1 + eta2/2 |u|^2 by monotone FISTA.
TikhonovSolution solve_elastic_net(const Matrix& K, const Vector& g_obs, const RegParams& eta,
                                   const SolverOptions& opts = {},
                                   const TikhonovSolution* warm = nullptr);

/// 1/2|Ku - g|^2 + eta1 |u|_{H1}^2 + eta2 |u|_TV by ADMM on z = D u.
TikhonovSolution solve_h1tv(const Matrix& K, const Vector& g_obs, const RegParams& eta, double grid_h,
                            const SolverOptions& opts = {}, const TikhonovSolution* warm = nullptr,
                            Shape shape = {});

/// Dispatches on the model and recomputes phi and psi from u.
TikhonovSolution solve_tikhonov(const Problem& problem, const PenaltyModel& model, const RegParams& eta,
                                const SolverOptions& opts = {}, const TikhonovSolution* warm = nullptr);

/// Single-penalty model 1/2|Ku - g|^2 + eta psi(u). psi[0] holds psi(u),
/// psi[1] is zero.
TikhonovSolution solve_single(const Problem& problem, const Penalty& penalty, double eta,
                              const SolverOptions& opts = {}, const TikhonovSolution* warm = nullptr);

/// 1/2 |K u - g|^2.
double fidelity(const Matrix& K, const Vector& g_obs, const Vector& u);

/// Largest eigenvalue of K'K by power iteration to the given relative
/// accuracy.
double gram_spectral_norm(const Matrix& K, double rel_tol = 1e-8);

namespace detail {

// Same solvers with nonnegative weights; a zero weight drops the penalty.
TikhonovSolution quadratic(const Matrix& K, const Vector& g, const SparseMatrix& L1, const SparseMatrix& L2,
                           double w1, double w2);
TikhonovSolution elastic_net(const Matrix& K, const Vector& g, double w1, double w2, const SolverOptions& opts,
                             const TikhonovSolution* warm);
TikhonovSolution h1tv(const Matrix& K, const Vector& g, double w1, double w2, double grid_h, Shape shape,
                      const SolverOptions& opts, const TikhonovSolution* warm);

}  // namespace detail

}  // namespace mtikh
