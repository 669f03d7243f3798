#pragma once

#include "mtikh/penalties.hpp"
#include "mtikh/solvers.hpp"
#include "mtikh/types.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace mtikh {

/// Outer-loop controls shared by the Broyden and fixed-point selectors.
/// Unset optionals resolve per algorithm: outer_tol 1e-6 for both, caps 50
/// (Broyden) and 200 (fixed point), eta0 from default_eta0().
struct SelectionOptions {
    double gamma = 1.0;
    double c_m = 1.0;
    std::optional<RegParams> eta0;
    std::optional<double> outer_tol;
    std::optional<int> outer_max_iter;
    double fd_step = 1e-3;
    double eta_min = 1e-14;
    SolverOptions inner;

    void validate() const;
};

inline constexpr int kBroydenMaxIter = 50;
inline constexpr int kFixedPointMaxIter = 200;
inline constexpr double kOuterTol = 1e-6;

/// Scale-aware starting point: 1e-2 |g_obs|^2 / n in both components.
RegParams default_eta0(const Problem& problem);

/// F(eta) = phi(u) + eta1 psi1(u) + eta2 psi2(u) at the inner minimizer.
double value_function(const Problem& problem, const PenaltyModel& model, const RegParams& eta,
                      const SolverOptions& opts = {});

/// F(eta)^(gamma+2) / (eta1 eta2). Throws DegenerateValue when F = 0.
double phi_gamma(const Problem& problem, const PenaltyModel& model, const RegParams& eta, double gamma,
                 const SolverOptions& opts = {});

/// Same functional from a known F.
double phi_gamma_from_value(double F, const RegParams& eta, double gamma);

/// Balanced-discrepancy residual T(eta) with c = c_m^2 delta^2 / 2:
/// (phi - c + eta2 psi2 - eta1 psi1, phi - c + eta1 psi1 - eta2 psi2).
Eigen::Vector2d residual_bdp(const Problem& problem, const PenaltyModel& model, const RegParams& eta,
                             double delta, double c_m, const SolverOptions& opts = {});

/// T(eta) from an already computed solution at eta.
Eigen::Vector2d residual_bdp(const TikhonovSolution& sol, const RegParams& eta, double delta, double c_m);

/// Thrown by select_broyden when the secant Jacobian becomes singular; the
/// partial trace is kept for diagnosis.
class SelectionFailure : public Error {
public:
    SelectionFailure(const std::string& what, std::vector<TraceEntry> trace)
        : Error(what), trace_(std::move(trace))
    {
    }

    const std::vector<TraceEntry>& trace() const noexcept { return trace_; }

private:
    std::vector<TraceEntry> trace_;
};

/// Balanced discrepancy principle solved by Broyden's method.
SelectionResult select_broyden(const Problem& problem, const PenaltyModel& model, double delta,
                               const SelectionOptions& opts = {});

/// Balancing principle by the fixed-point iteration
/// eta_i <- (phi + eta_{-i} psi_{-i}) / ((1 + gamma) psi_i).
SelectionResult select_fixed_point(const Problem& problem, const PenaltyModel& model, double gamma,
                                   const SelectionOptions& opts = {});

/// Log-spaced parameter grid along one axis.
struct GridAxis {
    double lo = 1e-10;
    double hi = 1.0;
    int count = 25;

    std::vector<double> values() const;
};

struct GridSpec {
    GridAxis eta1;
    GridAxis eta2;

    static GridSpec square(double lo, double hi, int count) { return {{lo, hi, count}, {lo, hi, count}}; }
};

struct OracleResult {
    RegParams eta{1.0, 1.0};
    double error = 0.0;
    TikhonovSolution solution;
};

/// Grid point with the smallest relative error against u_true. Ties go to
/// the smaller eta1, then the smaller eta2. Points whose inner solve throws
/// are skipped.
OracleResult oracle_grid(const Problem& problem, const PenaltyModel& model, const GridSpec& grid = {},
                         const SolverOptions& opts = {});

struct SingleOracleResult {
    double eta = 0.0;
    double error = 0.0;
    TikhonovSolution solution;
};

/// The same search for a single-penalty model over one axis.
SingleOracleResult oracle_grid_single(const Problem& problem, const Penalty& penalty, const GridAxis& axis = {},
                                      const SolverOptions& opts = {});

/// |u - u_true| / |u_true|.
double relative_error(const Vector& u, const Vector& u_true);

}  // namespace mtikh
