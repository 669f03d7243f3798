#pragma once

#include "mtikh/penalties.hpp"
#include "mtikh/types.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace testing {

// 1x1 problem K = 1 with data g and noise norm delta.
inline mtikh::Problem scalar_problem(double g = 1.0, double delta = 0.5)
{
    return mtikh::Problem(mtikh::Matrix::Identity(1, 1), mtikh::Vector::Constant(1, g), delta,
                          mtikh::Grid{0.0, 1.0, 1.0}, mtikh::Shape{1, 1});
}

inline mtikh::PenaltyModel l2_l2()
{
    return mtikh::PenaltyModel::quad_quad({mtikh::PenaltyKind::sq_l2}, {mtikh::PenaltyKind::sq_l2});
}

inline mtikh::Vector random_vector(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0)
{
    std::normal_distribution<double> nd(0.0, scale);
    mtikh::Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = nd(rng);
    return v;
}

inline mtikh::Matrix random_matrix(std::mt19937_64& rng, Eigen::Index m, Eigen::Index n)
{
    std::normal_distribution<double> nd(0.0, 1.0);
    mtikh::Matrix M(m, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < m; ++i) M(i, j) = nd(rng);
    return M;
}

inline double rel_diff(double a, double b)
{
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

}  // namespace testing
