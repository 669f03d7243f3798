#pragma once

#include "mtikh/types.hpp"

#include <Eigen/SparseCore>

#include <string>
#include <string_view>

namespace mtikh {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

enum class PenaltyKind {
    sq_l2,  // 1/2 |u|^2
    sq_h1,  // sum ((u_{i+1} - u_i) / h)^2 h
    tv,     // sum |u_{i+1} - u_i|, anisotropic or isotropic on images
    l1,     // sum |u_i|
};

std::string to_string(PenaltyKind k);
PenaltyKind parse_penalty_kind(std::string_view s);

struct Penalty {
    PenaltyKind kind = PenaltyKind::sq_l2;
    double grid_h = 1.0;
    // Differential kinds act on an image when shape.is_image(), else on a
    // 1-D signal of the argument's length.
    Shape shape{};
    bool isotropic = false;

    bool is_quadratic() const noexcept { return kind == PenaltyKind::sq_l2 || kind == PenaltyKind::sq_h1; }
};

enum class ModelId { h1_tv, elastic_net, quad_quad };

std::string to_string(ModelId id);

struct PenaltyModel {
    Penalty psi1;
    Penalty psi2;
    ModelId id = ModelId::quad_quad;

    static PenaltyModel h1_tv(double grid_h, Shape shape = {});
    static PenaltyModel elastic_net();
    static PenaltyModel quad_quad(Penalty p1, Penalty p2);

    /// Throws InvalidArgument if the kinds do not match the model id.
    void validate() const;

    const Penalty& operator[](int i) const noexcept { return i == 0 ? psi1 : psi2; }
};

/// Parses "h1-tv", "elastic-net" or "quad-quad" (sq-l2 + sq-l2) for a
/// problem with the given grid.
PenaltyModel parse_model(std::string_view s, double grid_h, Shape shape);

double eval_penalty(const Penalty& p, const Vector& u);

/// Componentwise sign(v) max(|v| - tau, 0): the proximal map of tau |.|_1.
Vector soft_threshold(const Vector& v, double tau);

/// Forward differences with replicate boundary; the zero rows at the far
/// boundary are dropped. 1-D: (n-1) x n. Image (row-major): horizontal
/// differences stacked over vertical ones.
SparseMatrix difference_operator(const Shape& shape);

/// Shape the penalty's differential operator sees for a vector of length n.
Shape effective_shape(const Penalty& p, Eigen::Index n);

/// L with psi(u) = 1/2 |L u|^2 for the quadratic kinds.
SparseMatrix quadratic_factor(const Penalty& p, Eigen::Index n);

}  // namespace mtikh
