#include "mtikh/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mtikh {

void SelectionOptions::validate() const
{
    if (!(gamma > 0.0)) {
        throw InvalidArgument("gamma must be positive");
    }
    if (!(c_m >= 1.0)) {
        throw InvalidArgument("c_m must be at least 1");
    }
    if (outer_tol && !(*outer_tol > 0.0)) {
        throw InvalidArgument("outer tolerance must be positive");
    }
    if (outer_max_iter && *outer_max_iter < 1) {
        throw InvalidArgument("outer iteration cap must be at least 1");
    }
    if (!(fd_step > 0.0)) {
        throw InvalidArgument("finite-difference step must be positive");
    }
    if (!(eta_min > 0.0)) {
        throw InvalidArgument("eta_min must be positive");
    }
    inner.validate();
}

RegParams default_eta0(const Problem& problem)
{
    const double scale = 1e-2 * problem.g_obs().squaredNorm() / static_cast<double>(std::max<Eigen::Index>(problem.n(), 1));
    const double eta = scale > 0.0 ? scale : 1e-2;
    return {eta, eta};
}

double value_function(const Problem& problem, const PenaltyModel& model, const RegParams& eta,
                      const SolverOptions& opts)
{
    return solve_tikhonov(problem, model, eta, opts).objective(eta);
}

double phi_gamma_from_value(double F, const RegParams& eta, double gamma)
{
    if (!(F > 0.0)) {
        throw DegenerateValue("value function vanishes; the balancing functional is undefined");
    }
    return std::pow(F, gamma + 2.0) / (eta.eta1() * eta.eta2());
}

double phi_gamma(const Problem& problem, const PenaltyModel& model, const RegParams& eta, double gamma,
                 const SolverOptions& opts)
{
    if (!(gamma > 0.0)) {
        throw InvalidArgument("gamma must be positive");
    }
    return phi_gamma_from_value(value_function(problem, model, eta, opts), eta, gamma);
}

Eigen::Vector2d residual_bdp(const TikhonovSolution& sol, const RegParams& eta, double delta, double c_m)
{
    const double c = 0.5 * c_m * c_m * delta * delta;
    const double a = eta.eta1() * sol.psi[0];
    const double b = eta.eta2() * sol.psi[1];
    return {sol.phi - c + b - a, sol.phi - c + a - b};
}

Eigen::Vector2d residual_bdp(const Problem& problem, const PenaltyModel& model, const RegParams& eta,
                             double delta, double c_m, const SolverOptions& opts)
{
    if (!(delta > 0.0)) {
        throw InvalidArgument("noise level must be positive");
    }
    return residual_bdp(solve_tikhonov(problem, model, eta, opts), eta, delta, c_m);
}

namespace {

TraceEntry make_entry(int iter, const RegParams& eta, const TikhonovSolution& sol, double residual)
{
    return {iter, eta.eta1(), eta.eta2(), sol.phi, sol.psi[0], sol.psi[1], residual};
}

SolverOptions tightened(const SolverOptions& inner, const PenaltyModel& model, double outer_tol)
{
    SolverOptions out = inner;
    const double base = inner.tol.value_or(model.id == ModelId::h1_tv ? kAdmmTol : kProxGradTol);
    out.tol = std::min(base, 1e-2 * outer_tol);
    out.record_trace = false;
    return out;
}

SelectionResult finish(Principle principle, const RegParams& eta, TikhonovSolution sol,
                       std::vector<TraceEntry> trace, bool converged, int iterations)
{
    SelectionResult r;
    r.eta_star = eta;
    r.solution = std::move(sol);
    r.trace = std::move(trace);
    r.principle = principle;
    r.weight_t = weight_t(eta);
    r.converged = converged;
    r.iterations = iterations;
    return r;
}

}  // namespace

SelectionResult select_broyden(const Problem& problem, const PenaltyModel& model, double delta,
                               const SelectionOptions& opts)
{
    opts.validate();
    model.validate();
    if (!(delta > 0.0)) {
        throw InvalidArgument("balanced discrepancy needs a positive noise level");
    }
    if (!(opts.c_m * delta < problem.g_obs().norm())) {
        throw InvalidArgument("discrepancy level c_m * delta must be below |g_obs|");
    }

    const double tol = opts.outer_tol.value_or(kOuterTol);
    const int max_iter = opts.outer_max_iter.value_or(kBroydenMaxIter);
    const double target = tol * 0.5 * delta * delta;
    const SolverOptions inner = tightened(opts.inner, model, tol);

    auto evaluate = [&](const RegParams& eta, const TikhonovSolution* warm) {
        TikhonovSolution sol = solve_tikhonov(problem, model, eta, inner, warm);
        Eigen::Vector2d T = residual_bdp(sol, eta, delta, opts.c_m);
        return std::pair{std::move(sol), T};
    };

    auto fd_jacobian = [&](const RegParams& eta, const TikhonovSolution& sol, const Eigen::Vector2d& T) {
        Eigen::Matrix2d J;
        for (int j = 0; j < 2; ++j) {
            const double h = opts.fd_step * eta[j];
            const RegParams shifted = j == 0 ? RegParams(eta.eta1() + h, eta.eta2())
                                             : RegParams(eta.eta1(), eta.eta2() + h);
            const auto [sol_h, T_h] = evaluate(shifted, &sol);
            J.col(j) = (T_h - T) / h;
        }
        return J;
    };

    RegParams eta = opts.eta0.value_or(default_eta0(problem));
    auto [sol, T] = evaluate(eta, nullptr);
    std::vector<TraceEntry> trace{make_entry(0, eta, sol, T.norm())};

    RegParams best_eta = eta;
    TikhonovSolution best_sol = sol;
    double best_norm = T.norm();

    if (T.norm() <= target) {
        return finish(Principle::balanced_discrepancy, eta, std::move(sol), std::move(trace), true, 0);
    }

    Eigen::Matrix2d J = fd_jacobian(eta, sol, T);
    std::vector<double> norms{T.norm()};
    int last_refresh = 0;
    bool converged = false;
    int k = 1;
    for (; k <= max_iter; ++k) {
        const double det = J.determinant();
        if (!std::isfinite(det) || std::abs(det) <= 1e-14 * J.squaredNorm()) {
            throw SelectionFailure("Broyden Jacobian is singular at iteration " + std::to_string(k), trace);
        }
        Eigen::Vector2d step = -J.inverse() * T;
        Eigen::Vector2d next = eta.as_vector() + step;
        for (int halving = 0; halving < 30 && (next.array() <= 0.0).any(); ++halving) {
            step *= 0.5;
            next = eta.as_vector() + step;
        }
        next = next.cwiseMax(opts.eta_min);
        const RegParams eta_next(next(0), next(1));
        const Eigen::Vector2d d_eta = next - eta.as_vector();

        auto [sol_next, T_next] = evaluate(eta_next, &sol);
        const double dn = d_eta.squaredNorm();
        if (dn > 0.0) {
            J += ((T_next - T) - J * d_eta) * d_eta.transpose() / dn;
        }
        eta = eta_next;
        sol = std::move(sol_next);
        T = T_next;
        trace.push_back(make_entry(k, eta, sol, T.norm()));
        norms.push_back(T.norm());

        if (T.norm() < best_norm) {
            best_norm = T.norm();
            best_eta = eta;
            best_sol = sol;
        }
        if (T.norm() <= target) {
            converged = true;
            break;
        }
        // Refresh the secant matrix by finite differences when progress stalls.
        if (k - last_refresh >= 5 && norms[k] > 0.99 * norms[k - 5]) {
            J = fd_jacobian(eta, sol, T);
            last_refresh = k;
        }
    }

    if (converged) {
        return finish(Principle::balanced_discrepancy, eta, std::move(sol), std::move(trace), true, k);
    }
    return finish(Principle::balanced_discrepancy, best_eta, std::move(best_sol), std::move(trace), false,
                  max_iter);
}

SelectionResult select_fixed_point(const Problem& problem, const PenaltyModel& model, double gamma,
                                   const SelectionOptions& opts)
{
    SelectionOptions checked = opts;
    checked.gamma = gamma;
    checked.validate();
    model.validate();

    const double tol = opts.outer_tol.value_or(kOuterTol);
    const int max_iter = opts.outer_max_iter.value_or(kFixedPointMaxIter);
    const SolverOptions inner = tightened(opts.inner, model, tol);
    const double eps = std::numeric_limits<double>::epsilon();

    RegParams eta = opts.eta0.value_or(default_eta0(problem));
    TikhonovSolution sol;
    std::vector<TraceEntry> trace;
    bool converged = false;
    bool have_sol = false;
    int k = 0;
    for (; k < max_iter; ++k) {
        sol = solve_tikhonov(problem, model, eta, inner, have_sol ? &sol : nullptr);
        have_sol = true;
        const double F = sol.objective(eta);
        for (int i = 0; i < 2; ++i) {
            if (!(sol.psi[i] > opts.eta_min * eps * F)) {
                throw PenaltyDegenerate("penalty psi" + std::to_string(i + 1) +
                                        " vanished during the fixed-point iteration");
            }
        }
        const double a = eta.eta1() * sol.psi[0];
        const double b = eta.eta2() * sol.psi[1];
        const double next1 = (sol.phi + b) / ((1.0 + gamma) * sol.psi[0]);
        const double next2 = (sol.phi + a) / ((1.0 + gamma) * sol.psi[1]);
        const double change =
            std::max(std::abs(next1 - eta.eta1()) / eta.eta1(), std::abs(next2 - eta.eta2()) / eta.eta2());
        trace.push_back(make_entry(k, eta, sol, change));
        if (!(next1 > 0.0 && next2 > 0.0) || !std::isfinite(next1) || !std::isfinite(next2)) {
            break;
        }
        eta = RegParams(next1, next2);
        if (change < tol) {
            converged = true;
            ++k;
            break;
        }
    }

    sol = solve_tikhonov(problem, model, eta, inner, have_sol ? &sol : nullptr);
    return finish(Principle::balancing, eta, std::move(sol), std::move(trace), converged, k);
}

std::vector<double> GridAxis::values() const
{
    if (count < 1 || !(lo > 0.0) || !(hi >= lo)) {
        throw InvalidArgument("grid axis needs count >= 1 and 0 < lo <= hi");
    }
    std::vector<double> v(static_cast<std::size_t>(count));
    if (count == 1) {
        v[0] = lo;
        return v;
    }
    const double a = std::log10(lo);
    const double b = std::log10(hi);
    for (int i = 0; i < count; ++i) {
        v[static_cast<std::size_t>(i)] = std::pow(10.0, a + (b - a) * i / (count - 1));
    }
    return v;
}

double relative_error(const Vector& u, const Vector& u_true)
{
    const double denom = u_true.norm();
    if (!(denom > 0.0)) {
        throw InvalidArgument("relative error undefined for a zero reference");
    }
    if (u.size() != u_true.size()) {
        throw InvalidArgument("relative error of vectors with different lengths");
    }
    return (u - u_true).norm() / denom;
}

OracleResult oracle_grid(const Problem& problem, const PenaltyModel& model, const GridSpec& grid,
                         const SolverOptions& opts)
{
    if (!problem.u_true()) {
        throw MissingTruth("oracle grid search needs the exact solution");
    }
    const Vector& u_true = *problem.u_true();
    const auto e1 = grid.eta1.values();
    const auto e2 = grid.eta2.values();

    std::optional<OracleResult> best;
    for (double a : e1) {
        std::optional<TikhonovSolution> warm;
        for (double b : e2) {
            const RegParams eta(a, b);
            try {
                TikhonovSolution sol = solve_tikhonov(problem, model, eta, opts, warm ? &*warm : nullptr);
                const double err = relative_error(sol.u, u_true);
                if (!best || err < best->error) {
                    best = OracleResult{eta, err, sol};
                }
                warm = std::move(sol);
            } catch (const SingularSystem&) {
                continue;
            }
        }
    }
    if (!best) {
        throw SingularSystem("every grid point failed to solve");
    }
    return *best;
}

SingleOracleResult oracle_grid_single(const Problem& problem, const Penalty& penalty, const GridAxis& axis,
                                      const SolverOptions& opts)
{
    if (!problem.u_true()) {
        throw MissingTruth("oracle grid search needs the exact solution");
    }
    const Vector& u_true = *problem.u_true();
    std::optional<SingleOracleResult> best;
    std::optional<TikhonovSolution> warm;
    for (double eta : axis.values()) {
        try {
            TikhonovSolution sol = solve_single(problem, penalty, eta, opts, warm ? &*warm : nullptr);
            const double err = relative_error(sol.u, u_true);
            if (!best || err < best->error) {
                best = SingleOracleResult{eta, err, sol};
            }
            warm = std::move(sol);
        } catch (const SingularSystem&) {
            continue;
        }
    }
    if (!best) {
        throw SingularSystem("every grid point failed to solve");
    }
    return *best;
}

}  // namespace mtikh
