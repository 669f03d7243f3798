#include "mtikh/solvers.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>

namespace mtikh {

void SolverOptions::validate() const
{
    if (tol && !(*tol > 0.0)) {
        throw InvalidArgument("solver tolerance must be positive");
    }
    if (max_iter && *max_iter < 1) {
        throw InvalidArgument("solver iteration cap must be at least 1");
    }
    if (admm_rho && !(*admm_rho > 0.0)) {
        throw InvalidArgument("ADMM penalty parameter must be positive");
    }
}

namespace {

constexpr int kPolishEvery = 50;
// The exact finish refactorizes per swap; beyond this size FISTA alone is used.
constexpr Eigen::Index kPolishMaxSize = 1000;
constexpr Eigen::Index kPolishMaxSupport = 1000;

// K applied either densely or through a sparse copy when K is mostly zero
// (the blur operator of the imaging example).
class Operator {
public:
    explicit Operator(const Matrix& K) : K_(K)
    {
        if (K.size() > 100000) {
            const auto nnz = (K.array() != 0.0).count();
            if (static_cast<double>(nnz) < 0.05 * static_cast<double>(K.size())) {
                sparse_ = K.sparseView();
            }
        }
    }

    bool is_sparse() const noexcept { return sparse_.has_value(); }

    Vector apply(const Vector& u) const { return sparse_ ? Vector(*sparse_ * u) : Vector(K_ * u); }
    Vector adjoint(const Vector& r) const
    {
        return sparse_ ? Vector(sparse_->transpose() * r) : Vector(K_.transpose() * r);
    }

    Matrix gram_dense() const
    {
        Matrix G(K_.cols(), K_.cols());
        G.setZero();
        G.selfadjointView<Eigen::Lower>().rankUpdate(K_.transpose());
        return G.selfadjointView<Eigen::Lower>();
    }

    Eigen::SparseMatrix<double> gram_sparse() const
    {
        Eigen::SparseMatrix<double> Kc = *sparse_;
        return Eigen::SparseMatrix<double>(Kc.transpose() * Kc);
    }

    double spectral_norm(double rel_tol) const
    {
        const Eigen::Index n = K_.cols();
        if (n == 0) {
            return 0.0;
        }
        Vector v(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            v(i) = 1.0 + 0.01 * std::sin(1.0 + static_cast<double>(i));
        }
        v.normalize();
        double lambda = 0.0;
        for (int it = 0; it < 10000; ++it) {
            Vector w = adjoint(apply(v));
            const double next = w.norm();
            if (next == 0.0) {
                return 0.0;
            }
            v = w / next;
            if (std::abs(next - lambda) <= rel_tol * next) {
                return next;
            }
            lambda = next;
        }
        return lambda;
    }

private:
    const Matrix& K_;
    std::optional<Eigen::SparseMatrix<double>> sparse_;
};

Matrix sparse_gram_dense(const SparseMatrix& L)
{
    return Matrix(SparseMatrix(L.transpose() * L));
}

void fill_quadratic_values(TikhonovSolution& sol, const Matrix& K, const Vector& g, const SparseMatrix& L1,
                           const SparseMatrix& L2)
{
    sol.phi = fidelity(K, g, sol.u);
    sol.psi[0] = L1.size() > 0 ? 0.5 * (L1 * sol.u).squaredNorm() : 0.0;
    sol.psi[1] = L2.size() > 0 ? 0.5 * (L2 * sol.u).squaredNorm() : 0.0;
}

// Exact finish for the elastic net. Writing u = p - q with p, q >= 0 turns
// the problem into a bound-constrained QP, solved here by a Lawson-Hanson
// style active-set method in signed form: the working set holds indices
// with a fixed sign, each inner step solves
// (K_S'K_S + w2 I) c = K_S'g - w1 s on the set, and steps back to the
// boundary when a sign flips. Started from a FISTA iterate it usually needs
// only a handful of swaps and terminates at a point satisfying the
// optimality conditions to rounding.
class ActiveSetPolisher {
public:
    ActiveSetPolisher(const Operator& op, const Vector& g, double w1, double w2)
        : op_(op), g_(g), w1_(w1), w2_(w2), Ktg_(op.adjoint(g))
    {
        scale_ = std::max({w1_, Ktg_.cwiseAbs().maxCoeff(), 1e-300});
    }

    std::optional<Vector> polish(const Vector& x)
    {
        const Eigen::Index n = x.size();
        std::vector<signed char> sign(static_cast<std::size_t>(n), 0);
        Vector u = Vector::Zero(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            if (x(i) != 0.0) {
                sign[static_cast<std::size_t>(i)] = x(i) > 0.0 ? 1 : -1;
                u(i) = x(i);
            }
        }
        const double enter_tol = 1e-12 * scale_;
        const int max_outer = static_cast<int>(3 * n + 10);
        Eigen::Index just_added = -1;
        std::vector<char> blocked(static_cast<std::size_t>(n), 0);

        for (int outer = 0; outer < max_outer; ++outer) {
            // Inner loop: move towards the unconstrained minimizer on the
            // working set, dropping indices whose sign would flip.
            for (Eigen::Index guard = 0; guard <= n; ++guard) {
                auto c = solve_on(sign);
                if (!c) {
                    return std::nullopt;
                }
                double alpha = 1.0;
                bool feasible = true;
                for (Eigen::Index i = 0; i < n; ++i) {
                    const int s = sign[static_cast<std::size_t>(i)];
                    if (s != 0 && s * (*c)(i) <= 0.0) {
                        feasible = false;
                        const double ui = s * u(i);
                        const double ci = s * (*c)(i);
                        alpha = std::min(alpha, ui / (ui - ci));
                    }
                }
                if (feasible) {
                    u = std::move(*c);
                    if (just_added >= 0) {
                        std::fill(blocked.begin(), blocked.end(), 0);
                    }
                    break;
                }
                if (just_added >= 0 && alpha <= 0.0 &&
                    sign[static_cast<std::size_t>(just_added)] * (*c)(just_added) <= 0.0) {
                    // Rounding let in a variable that cannot move; keep it
                    // out and try the next candidate.
                    sign[static_cast<std::size_t>(just_added)] = 0;
                    u(just_added) = 0.0;
                    blocked[static_cast<std::size_t>(just_added)] = 1;
                    just_added = -1;
                    continue;
                }
                u += alpha * (*c - u);
                for (Eigen::Index i = 0; i < n; ++i) {
                    const int s = sign[static_cast<std::size_t>(i)];
                    if (s != 0 && s * u(i) <= 0.0) {
                        sign[static_cast<std::size_t>(i)] = 0;
                        u(i) = 0.0;
                    }
                }
                just_added = -1;
            }

            const Vector grad = gradient(u);
            Eigen::Index best = -1;
            double best_excess = enter_tol;
            for (Eigen::Index i = 0; i < n; ++i) {
                if (sign[static_cast<std::size_t>(i)] == 0 && !blocked[static_cast<std::size_t>(i)]) {
                    const double excess = std::abs(grad(i)) - w1_;
                    if (excess > best_excess) {
                        best_excess = excess;
                        best = i;
                    }
                }
            }
            if (best < 0) {
                return finish(u);
            }
            if (static_cast<Eigen::Index>(std::count_if(sign.begin(), sign.end(), [](signed char s) {
                    return s != 0;
                })) >= kPolishMaxSupport) {
                return std::nullopt;
            }
            sign[static_cast<std::size_t>(best)] = grad(best) < 0.0 ? 1 : -1;
            just_added = best;
        }
        return std::nullopt;
    }

    double last_violation() const noexcept { return violation_; }

private:
    Vector gradient(const Vector& u) const { return op_.adjoint(op_.apply(u) - g_) + w2_ * u; }

    // Records the largest violation of the optimality conditions.
    std::optional<Vector> finish(const Vector& u)
    {
        const Vector grad = gradient(u);
        double worst = 0.0;
        for (Eigen::Index i = 0; i < u.size(); ++i) {
            if (u(i) != 0.0) {
                worst = std::max(worst, std::abs(grad(i) + w1_ * (u(i) > 0.0 ? 1.0 : -1.0)));
            } else {
                worst = std::max(worst, std::abs(grad(i)) - w1_);
            }
        }
        violation_ = worst;
        if (worst > 1e-9 * scale_) {
            return std::nullopt;
        }
        return u;
    }

    std::optional<Vector> solve_on(const std::vector<signed char>& sign)
    {
        const auto n = static_cast<Eigen::Index>(sign.size());
        std::vector<Eigen::Index> support;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (sign[static_cast<std::size_t>(i)] != 0) {
                support.push_back(i);
            }
        }
        Vector out = Vector::Zero(n);
        const auto k = static_cast<Eigen::Index>(support.size());
        if (k == 0) {
            return out;
        }
        if (k > kPolishMaxSupport) {
            return std::nullopt;
        }
        Vector rhs(k);
        for (Eigen::Index a = 0; a < k; ++a) {
            const Eigen::Index i = support[static_cast<std::size_t>(a)];
            rhs(a) = Ktg_(i) - w1_ * sign[static_cast<std::size_t>(i)];
        }
        Matrix A = Matrix::Zero(k, k);
        if (op_.is_sparse()) {
            if (!sparse_gram_) {
                sparse_gram_ = op_.gram_sparse();
            }
            std::vector<Eigen::Index> pos(static_cast<std::size_t>(n), -1);
            for (Eigen::Index a = 0; a < k; ++a) {
                pos[static_cast<std::size_t>(support[static_cast<std::size_t>(a)])] = a;
            }
            for (Eigen::Index a = 0; a < k; ++a) {
                const Eigen::Index j = support[static_cast<std::size_t>(a)];
                for (Eigen::SparseMatrix<double>::InnerIterator itr(*sparse_gram_, j); itr; ++itr) {
                    const Eigen::Index b = pos[static_cast<std::size_t>(itr.row())];
                    if (b >= 0) {
                        A(b, a) = itr.value();
                    }
                }
            }
        } else {
            if (!dense_gram_) {
                dense_gram_ = op_.gram_dense();
            }
            for (Eigen::Index a = 0; a < k; ++a) {
                for (Eigen::Index b = 0; b < k; ++b) {
                    A(a, b) =
                        (*dense_gram_)(support[static_cast<std::size_t>(a)], support[static_cast<std::size_t>(b)]);
                }
            }
        }
        A.diagonal().array() += w2_;
        Eigen::LDLT<Matrix> ldlt(A);
        if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
            return std::nullopt;
        }
        const Vector c = ldlt.solve(rhs);
        if (!c.allFinite()) {
            return std::nullopt;
        }
        for (Eigen::Index a = 0; a < k; ++a) {
            out(support[static_cast<std::size_t>(a)]) = c(a);
        }
        return out;
    }

    const Operator& op_;
    const Vector& g_;
    double w1_;
    double w2_;
    Vector Ktg_;
    double scale_ = 1.0;
    std::optional<Matrix> dense_gram_;
    std::optional<Eigen::SparseMatrix<double>> sparse_gram_;
    double violation_ = 0.0;
};

}  // namespace

double fidelity(const Matrix& K, const Vector& g_obs, const Vector& u)
{
    return 0.5 * (K * u - g_obs).squaredNorm();
}

double gram_spectral_norm(const Matrix& K, double rel_tol)
{
    return Operator(K).spectral_norm(rel_tol);
}

namespace detail {

TikhonovSolution quadratic(const Matrix& K, const Vector& g, const SparseMatrix& L1, const SparseMatrix& L2,
                           double w1, double w2)
{
    const Operator op(K);
    const Vector rhs = op.adjoint(g);
    TikhonovSolution sol;

    auto singular = [] {
        return SingularSystem("normal matrix K'K + eta1 L1'L1 + eta2 L2'L2 is not positive definite");
    };
    // An empty factor means the penalty is absent.
    for (const SparseMatrix* L : {&L1, &L2}) {
        if (L->size() > 0 && L->cols() != K.cols()) {
            throw InvalidArgument("penalty factor has the wrong number of columns");
        }
    }
    if (L1.size() == 0) w1 = 0.0;
    if (L2.size() == 0) w2 = 0.0;

    if (op.is_sparse()) {
        Eigen::SparseMatrix<double> A = op.gram_sparse();
        if (w1 > 0.0) A += w1 * Eigen::SparseMatrix<double>(L1.transpose() * L1);
        if (w2 > 0.0) A += w2 * Eigen::SparseMatrix<double>(L2.transpose() * L2);
        Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(A);
        if (llt.info() != Eigen::Success) {
            throw singular();
        }
        sol.u = llt.solve(rhs);
    } else {
        Matrix A = op.gram_dense();
        if (w1 > 0.0) A += w1 * sparse_gram_dense(L1);
        if (w2 > 0.0) A += w2 * sparse_gram_dense(L2);
        const double scale = std::max(A.diagonal().cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
        Eigen::LLT<Matrix> llt(A);
        if (llt.info() != Eigen::Success) {
            throw singular();
        }
        const double min_pivot = Matrix(llt.matrixL()).diagonal().minCoeff();
        if (!(min_pivot * min_pivot > 1e3 * std::numeric_limits<double>::epsilon() * scale)) {
            throw singular();
        }
        sol.u = llt.solve(rhs);
    }
    if (!sol.u.allFinite()) {
        throw singular();
    }
    sol.iterations = 1;
    sol.converged = true;
    fill_quadratic_values(sol, K, g, L1, L2);
    sol.inner_residual = 0.0;
    return sol;
}

TikhonovSolution elastic_net(const Matrix& K, const Vector& g, double w1, double w2, const SolverOptions& opts,
                             const TikhonovSolution* warm)
{
    opts.validate();
    const double tol = opts.tol.value_or(kProxGradTol);
    const int max_iter = opts.max_iter.value_or(kProxGradMaxIter);
    const Eigen::Index n = K.cols();
    const Operator op(K);

    const double lip = (op.spectral_norm(1e-8) + w2) * (1.0 + 1e-6);
    const double step = lip > 0.0 ? 1.0 / lip : 1.0;

    // Objective from a cached K x.
    auto objective = [&](const Vector& x, const Vector& Kx) {
        return 0.5 * (Kx - g).squaredNorm() + w1 * x.lpNorm<1>() + 0.5 * w2 * x.squaredNorm();
    };
    auto gradient = [&](const Vector& x, const Vector& Kx) { return Vector(op.adjoint(Kx - g) + w2 * x); };

    Vector x = warm && warm->u.size() == n ? warm->u : Vector::Zero(n);
    Vector Kx = op.apply(x);
    double J = objective(x, Kx);
    Vector y = x;
    Vector Ky = Kx;
    double t = 1.0;

    TikhonovSolution sol;
    if (opts.record_trace) {
        sol.objective_trace.push_back(J);
    }

    ActiveSetPolisher polisher(op, g, w1, w2);
    auto try_polish = [&]() {
        if (x.size() > kPolishMaxSize) {
            return false;
        }
        auto cand = polisher.polish(x);
        if (!cand) {
            return false;
        }
        Vector Kc = op.apply(*cand);
        const double Jc = objective(*cand, Kc);
        if (Jc > J + 1e-13 * std::abs(J)) {
            return false;
        }
        x = std::move(*cand);
        Kx = std::move(Kc);
        J = Jc;
        if (opts.record_trace) {
            sol.objective_trace.push_back(J);
        }
        return true;
    };

    int it = 0;
    bool exact = false;
    double gap = std::numeric_limits<double>::infinity();
    for (it = 1; it <= max_iter; ++it) {
        Vector z = soft_threshold(y - step * gradient(y, Ky), w1 * step);
        Vector Kz = op.apply(z);
        double Jz = objective(z, Kz);
        if (Jz > J) {
            // Restart momentum and take a plain (monotone) step from x.
            t = 1.0;
            z = soft_threshold(x - step * gradient(x, Kx), w1 * step);
            Kz = op.apply(z);
            Jz = objective(z, Kz);
            if (Jz > J) {
                // Only possible through rounding at the optimum.
                Jz = J;
                z = x;
                Kz = Kx;
            }
        }
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        const double beta = (t - 1.0) / t_next;
        y = z + beta * (z - x);
        Ky = Kz + beta * (Kz - Kx);
        gap = (z - x).norm() * lip;

        const double change = std::abs(J - Jz);
        x = std::move(z);
        Kx = std::move(Kz);
        J = Jz;
        t = t_next;
        if (opts.record_trace) {
            sol.objective_trace.push_back(J);
        }
        if (change <= tol * std::max(std::abs(J), std::numeric_limits<double>::min())) {
            sol.converged = true;
            break;
        }
        if (it % kPolishEvery == 0 && try_polish()) {
            exact = true;
            sol.converged = true;
            break;
        }
    }
    if (!exact && try_polish()) {
        exact = true;
        sol.converged = true;
    }

    sol.u = std::move(x);
    sol.iterations = std::min(it, max_iter);
    sol.inner_residual = exact ? polisher.last_violation() : gap;
    sol.phi = 0.5 * (Kx - g).squaredNorm();
    sol.psi = {sol.u.lpNorm<1>(), 0.5 * sol.u.squaredNorm()};
    return sol;
}

TikhonovSolution h1tv(const Matrix& K, const Vector& g, double w1, double w2, double grid_h, Shape shape,
                      const SolverOptions& opts, const TikhonovSolution* warm)
{
    opts.validate();
    const double tol = opts.tol.value_or(kAdmmTol);
    const int max_iter = opts.max_iter.value_or(kAdmmMaxIter);
    const Eigen::Index n = K.cols();
    if (shape.size() != n) {
        shape = Shape{static_cast<int>(n), 1};
    }
    const SparseMatrix D = difference_operator(shape);
    const SparseMatrix Dt = D.transpose();
    const Matrix DtD = sparse_gram_dense(D);
    const Operator op(K);
    const Matrix base = op.gram_dense() + (2.0 * w1 / grid_h) * DtD;
    const Vector Ktg = op.adjoint(g);

    double rho = opts.admm_rho.value_or(w2 > 0.0 ? w2 : 1.0);
    Eigen::LLT<Matrix> llt;
    auto factor = [&] {
        llt.compute(base + rho * DtD);
        if (llt.info() != Eigen::Success) {
            throw SingularSystem("ADMM system K'K + (2 eta1/h + rho) D'D is not positive definite");
        }
    };
    factor();

    auto objective = [&](const Vector& u) {
        const Vector du = D * u;
        return fidelity(K, g, u) + w1 * du.squaredNorm() / grid_h + w2 * du.lpNorm<1>();
    };

    Vector u;
    Vector z;
    Vector w;  // scaled dual, y / rho
    if (warm && warm->u.size() == n) {
        u = warm->u;
        z = D * u;
        w = warm->dual.size() == D.rows() ? Vector(warm->dual * (w2 / rho)) : Vector::Zero(D.rows());
    } else {
        u = llt.solve(Ktg);
        z = D * u;
        w = Vector::Zero(D.rows());
    }

    TikhonovSolution sol;
    if (opts.record_trace) {
        sol.objective_trace.push_back(objective(u));
    }

    const double p_sqrt = std::sqrt(static_cast<double>(std::max<Eigen::Index>(D.rows(), 1)));
    int it = 0;
    double residual = std::numeric_limits<double>::infinity();
    for (it = 1; it <= max_iter; ++it) {
        u = llt.solve(Ktg + rho * (Dt * (z - w)));
        const Vector du = D * u;
        const Vector z_old = z;
        z = soft_threshold(du + w, w2 / rho);
        w += du - z;

        const double r_pri = (du - z).norm();
        const double r_dual = rho * (Dt * (z - z_old)).norm();
        const double eps_abs = 1e-13 * (1.0 + u.norm()) * p_sqrt;
        const double eps_pri = tol * std::max(du.norm(), z.norm()) + eps_abs;
        const double eps_dual = tol * rho * (Dt * w).norm() + eps_abs;
        residual = std::max(r_pri / std::max(eps_pri / tol, 1e-300), r_dual / std::max(eps_dual / tol, 1e-300));
        if (opts.record_trace) {
            sol.objective_trace.push_back(objective(u));
        }
        if (r_pri <= eps_pri && r_dual <= eps_dual) {
            sol.converged = true;
            break;
        }
        if (it % 10 == 0) {
            if (r_pri > 10.0 * r_dual) {
                rho *= 2.0;
                w *= 0.5;
                factor();
            } else if (r_dual > 10.0 * r_pri) {
                rho *= 0.5;
                w *= 2.0;
                factor();
            }
        }
    }

    sol.u = std::move(u);
    sol.iterations = std::min(it, max_iter);
    sol.inner_residual = residual;
    sol.dual = w2 > 0.0 ? Vector(w * (rho / w2)) : Vector::Zero(D.rows());
    const Vector du = D * sol.u;
    sol.phi = fidelity(K, g, sol.u);
    sol.psi = {du.squaredNorm() / grid_h, du.lpNorm<1>()};
    return sol;
}

}  // namespace detail

TikhonovSolution solve_quadratic(const Matrix& K, const Vector& g_obs, const SparseMatrix& L1,
                                 const SparseMatrix& L2, const RegParams& eta)
{
    return detail::quadratic(K, g_obs, L1, L2, eta.eta1(), eta.eta2());
}

TikhonovSolution solve_elastic_net(const Matrix& K, const Vector& g_obs, const RegParams& eta,
                                   const SolverOptions& opts, const TikhonovSolution* warm)
{
    return detail::elastic_net(K, g_obs, eta.eta1(), eta.eta2(), opts, warm);
}

TikhonovSolution solve_h1tv(const Matrix& K, const Vector& g_obs, const RegParams& eta, double grid_h,
                            const SolverOptions& opts, const TikhonovSolution* warm, Shape shape)
{
    return detail::h1tv(K, g_obs, eta.eta1(), eta.eta2(), grid_h, shape, opts, warm);
}

TikhonovSolution solve_tikhonov(const Problem& problem, const PenaltyModel& model, const RegParams& eta,
                                const SolverOptions& opts, const TikhonovSolution* warm)
{
    model.validate();
    const Matrix& K = problem.K();
    const Vector& g = problem.g_obs();
    TikhonovSolution sol;
    switch (model.id) {
    case ModelId::quad_quad:
        sol = solve_quadratic(K, g, quadratic_factor(model.psi1, problem.n()),
                              quadratic_factor(model.psi2, problem.n()), eta);
        break;
    case ModelId::elastic_net:
        sol = solve_elastic_net(K, g, eta, opts, warm);
        break;
    case ModelId::h1_tv:
        sol = solve_h1tv(K, g, eta, model.psi1.grid_h, opts, warm, effective_shape(model.psi2, problem.n()));
        break;
    }
    sol.phi = fidelity(K, g, sol.u);
    sol.psi = {eval_penalty(model.psi1, sol.u), eval_penalty(model.psi2, sol.u)};
    return sol;
}

TikhonovSolution solve_single(const Problem& problem, const Penalty& penalty, double eta,
                              const SolverOptions& opts, const TikhonovSolution* warm)
{
    if (!(eta > 0.0)) {
        throw InvalidArgument("regularization parameter must be positive");
    }
    const Matrix& K = problem.K();
    const Vector& g = problem.g_obs();
    const SparseMatrix none(0, 0);
    TikhonovSolution sol;
    switch (penalty.kind) {
    case PenaltyKind::sq_l2:
    case PenaltyKind::sq_h1:
        sol = detail::quadratic(K, g, quadratic_factor(penalty, problem.n()), none, eta, 0.0);
        break;
    case PenaltyKind::l1:
        sol = detail::elastic_net(K, g, eta, 0.0, opts, warm);
        break;
    case PenaltyKind::tv:
        sol = detail::h1tv(K, g, 0.0, eta, penalty.grid_h, effective_shape(penalty, problem.n()), opts, warm);
        break;
    }
    sol.phi = fidelity(K, g, sol.u);
    sol.psi = {eval_penalty(penalty, sol.u), 0.0};
    return sol;
}

}  // namespace mtikh
