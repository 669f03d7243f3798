#include "mtikh/penalties.hpp"

#include <cmath>
#include <vector>

namespace mtikh {

std::string to_string(PenaltyKind k)
{
    switch (k) {
    case PenaltyKind::sq_l2: return "sq-l2";
    case PenaltyKind::sq_h1: return "sq-h1";
    case PenaltyKind::tv: return "tv";
    case PenaltyKind::l1: return "l1";
    }
    return "unknown";
}

PenaltyKind parse_penalty_kind(std::string_view s)
{
    if (s == "sq-l2" || s == "l2") return PenaltyKind::sq_l2;
    if (s == "sq-h1" || s == "h1") return PenaltyKind::sq_h1;
    if (s == "tv") return PenaltyKind::tv;
    if (s == "l1") return PenaltyKind::l1;
    throw InvalidArgument("unknown penalty kind: " + std::string(s));
}

std::string to_string(ModelId id)
{
    switch (id) {
    case ModelId::h1_tv: return "h1-tv";
    case ModelId::elastic_net: return "elastic-net";
    case ModelId::quad_quad: return "quad-quad";
    }
    return "unknown";
}

PenaltyModel PenaltyModel::h1_tv(double grid_h, Shape shape)
{
    return {Penalty{PenaltyKind::sq_h1, grid_h, shape, false},
            Penalty{PenaltyKind::tv, grid_h, shape, false}, ModelId::h1_tv};
}

PenaltyModel PenaltyModel::elastic_net()
{
    return {Penalty{PenaltyKind::l1}, Penalty{PenaltyKind::sq_l2}, ModelId::elastic_net};
}

PenaltyModel PenaltyModel::quad_quad(Penalty p1, Penalty p2)
{
    PenaltyModel m{p1, p2, ModelId::quad_quad};
    m.validate();
    return m;
}

void PenaltyModel::validate() const
{
    bool ok = false;
    switch (id) {
    case ModelId::h1_tv:
        ok = psi1.kind == PenaltyKind::sq_h1 && psi2.kind == PenaltyKind::tv;
        break;
    case ModelId::elastic_net:
        ok = psi1.kind == PenaltyKind::l1 && psi2.kind == PenaltyKind::sq_l2;
        break;
    case ModelId::quad_quad:
        ok = psi1.is_quadratic() && psi2.is_quadratic();
        break;
    }
    if (!ok) {
        throw InvalidArgument("penalty kinds (" + to_string(psi1.kind) + ", " + to_string(psi2.kind) +
                              ") are inconsistent with model " + to_string(id));
    }
}

PenaltyModel parse_model(std::string_view s, double grid_h, Shape shape)
{
    if (s == "h1-tv") return PenaltyModel::h1_tv(grid_h, shape);
    if (s == "elastic-net") return PenaltyModel::elastic_net();
    if (s == "quad-quad") return PenaltyModel::quad_quad(Penalty{}, Penalty{});
    throw InvalidArgument("unknown model: " + std::string(s));
}

Shape effective_shape(const Penalty& p, Eigen::Index n)
{
    if (p.shape.is_image() && p.shape.size() == n) {
        return p.shape;
    }
    return Shape{static_cast<int>(n), 1};
}

SparseMatrix difference_operator(const Shape& shape)
{
    std::vector<Eigen::Triplet<double>> entries;
    Eigen::Index row = 0;
    if (!shape.is_image()) {
        const int n = shape.size();
        for (int i = 0; i + 1 < n; ++i, ++row) {
            entries.emplace_back(row, i, -1.0);
            entries.emplace_back(row, i + 1, 1.0);
        }
        SparseMatrix D(std::max(n - 1, 0), n);
        D.setFromTriplets(entries.begin(), entries.end());
        return D;
    }
    const int R = shape.rows;
    const int C = shape.cols;
    auto idx = [C](int r, int c) { return static_cast<Eigen::Index>(r) * C + c; };
    for (int r = 0; r < R; ++r) {
        for (int c = 0; c + 1 < C; ++c, ++row) {
            entries.emplace_back(row, idx(r, c), -1.0);
            entries.emplace_back(row, idx(r, c + 1), 1.0);
        }
    }
    for (int r = 0; r + 1 < R; ++r) {
        for (int c = 0; c < C; ++c, ++row) {
            entries.emplace_back(row, idx(r, c), -1.0);
            entries.emplace_back(row, idx(r + 1, c), 1.0);
        }
    }
    SparseMatrix D(row, shape.size());
    D.setFromTriplets(entries.begin(), entries.end());
    return D;
}

namespace {

double isotropic_tv(const Shape& s, const Vector& u)
{
    double total = 0.0;
    for (int r = 0; r < s.rows; ++r) {
        for (int c = 0; c < s.cols; ++c) {
            const Eigen::Index i = static_cast<Eigen::Index>(r) * s.cols + c;
            const double dx = c + 1 < s.cols ? u(i + 1) - u(i) : 0.0;
            const double dy = r + 1 < s.rows ? u(i + s.cols) - u(i) : 0.0;
            total += std::hypot(dx, dy);
        }
    }
    return total;
}

}  // namespace

double eval_penalty(const Penalty& p, const Vector& u)
{
    if (u.hasNaN()) {
        throw InvalidArgument("penalty evaluated on a vector containing NaN");
    }
    switch (p.kind) {
    case PenaltyKind::sq_l2:
        return 0.5 * u.squaredNorm();
    case PenaltyKind::l1:
        return u.lpNorm<1>();
    case PenaltyKind::sq_h1: {
        const Vector du = difference_operator(effective_shape(p, u.size())) * u;
        return du.squaredNorm() / p.grid_h;
    }
    case PenaltyKind::tv: {
        const Shape s = effective_shape(p, u.size());
        if (s.is_image() && p.isotropic) {
            return isotropic_tv(s, u);
        }
        return (difference_operator(s) * u).lpNorm<1>();
    }
    }
    return 0.0;
}

Vector soft_threshold(const Vector& v, double tau)
{
    if (!(tau >= 0.0)) {
        throw InvalidArgument("soft threshold requires tau >= 0");
    }
    return v.unaryExpr([tau](double x) {
        const double mag = std::abs(x) - tau;
        return mag > 0.0 ? std::copysign(mag, x) : 0.0;
    });
}

SparseMatrix quadratic_factor(const Penalty& p, Eigen::Index n)
{
    if (p.kind == PenaltyKind::sq_l2) {
        SparseMatrix I(n, n);
        I.setIdentity();
        return I;
    }
    if (p.kind == PenaltyKind::sq_h1) {
        // |u|_{H1}^2 = (1/h) |D u|^2 = 1/2 |sqrt(2/h) D u|^2
        return std::sqrt(2.0 / p.grid_h) * difference_operator(effective_shape(p, n));
    }
    throw InvalidArgument("penalty " + to_string(p.kind) + " is not quadratic");
}

}  // namespace mtikh
