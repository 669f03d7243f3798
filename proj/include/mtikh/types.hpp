#pragma once

#include <Eigen/Dense>

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mtikh {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Error vocabulary. Everything thrown by the library derives from Error so
// callers can catch one type; the subclasses tag the failure mode.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

// Normal matrix of the quadratic model is not positive definite.
class SingularSystem : public Error {
public:
    using Error::Error;
};

// F(eta) = 0, so the balancing functional is undefined.
class DegenerateValue : public Error {
public:
    using Error::Error;
};

// A penalty value collapsed to ~0 inside the fixed-point update.
class PenaltyDegenerate : public Error {
public:
    using Error::Error;
};

class MissingTruth : public Error {
public:
    using Error::Error;
};

/// Strictly positive regularization parameter pair.
class RegParams {
public:
    RegParams(double eta1, double eta2);

    double eta1() const noexcept { return eta1_; }
    double eta2() const noexcept { return eta2_; }
    double operator[](int i) const noexcept { return i == 0 ? eta1_ : eta2_; }

    Eigen::Vector2d as_vector() const { return {eta1_, eta2_}; }

    friend bool operator==(const RegParams&, const RegParams&) = default;

private:
    double eta1_;
    double eta2_;
};

/// eta1 / (eta1 + eta2), the relative weight of the first penalty.
double weight_t(const RegParams& eta) noexcept;

struct Grid {
    double a = 0.0;
    double b = 1.0;
    double h = 1.0;
};

// A 1-D signal has rows == n and cols == 1.
struct Shape {
    int rows = 1;
    int cols = 1;

    bool is_image() const noexcept { return cols > 1 && rows > 1; }
    int size() const noexcept { return rows * cols; }

    friend bool operator==(const Shape&, const Shape&) = default;
};

/// Discretized linear inverse problem K u = g with noisy data g_obs.
///
/// Immutable after construction; the constructor enforces the dimension
/// and noise-norm invariants.
class Problem {
public:
    Problem(Matrix K, Vector g_obs, double delta, Grid grid, Shape shape,
            std::optional<Vector> u_true = std::nullopt,
            std::optional<Vector> g_true = std::nullopt);

    const Matrix& K() const noexcept { return K_; }
    const Vector& g_obs() const noexcept { return g_obs_; }
    double delta() const noexcept { return delta_; }
    const Grid& grid() const noexcept { return grid_; }
    const Shape& shape() const noexcept { return shape_; }
    const std::optional<Vector>& u_true() const noexcept { return u_true_; }
    const std::optional<Vector>& g_true() const noexcept { return g_true_; }

    Eigen::Index m() const noexcept { return K_.rows(); }
    Eigen::Index n() const noexcept { return K_.cols(); }

private:
    Matrix K_;
    Vector g_obs_;
    double delta_;
    Grid grid_;
    Shape shape_;
    std::optional<Vector> u_true_;
    std::optional<Vector> g_true_;
};

struct TikhonovSolution {
    Vector u;
    double phi = 0.0;                   // 1/2 |K u - g_obs|^2
    std::array<double, 2> psi{0.0, 0.0};
    int iterations = 0;
    bool converged = false;
    double inner_residual = 0.0;

    // Solver state reusable as a warm start (ADMM: normalized TV subgradient).
    Vector dual;
    // Objective per iteration; filled only when SolverOptions::record_trace.
    std::vector<double> objective_trace;

    double objective(const RegParams& eta) const noexcept
    {
        return phi + eta.eta1() * psi[0] + eta.eta2() * psi[1];
    }
};

enum class Principle { balanced_discrepancy, balancing, oracle };

std::string to_string(Principle p);

struct TraceEntry {
    int iter = 0;
    double eta1 = 0.0;
    double eta2 = 0.0;
    double phi = 0.0;
    double psi1 = 0.0;
    double psi2 = 0.0;
    double residual_norm = 0.0;
};

struct SelectionResult {
    RegParams eta_star{1.0, 1.0};
    TikhonovSolution solution;
    std::vector<TraceEntry> trace;
    Principle principle = Principle::balanced_discrepancy;
    double weight_t = 0.5;
    bool converged = false;
    int iterations = 0;
};

}  // namespace mtikh
