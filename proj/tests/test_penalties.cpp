#include "helpers.hpp"

#include "mtikh/penalties.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace mtikh;

namespace {

Vector vec(std::initializer_list<double> xs)
{
    Vector v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v(i++) = x;
    return v;
}

}  // namespace

TEST_CASE("penalty values on small vectors")
{
    const Penalty tv{PenaltyKind::tv};
    CHECK(eval_penalty(tv, vec({1, 1, 1})) == 0.0);
    CHECK(eval_penalty(tv, vec({0, 1, 0})) == 2.0);
    CHECK(eval_penalty(Penalty{PenaltyKind::sq_h1, 1.0}, vec({0, 1})) == 1.0);
    CHECK(eval_penalty(Penalty{PenaltyKind::sq_h1, 0.5}, vec({0, 1})) == doctest::Approx(2.0));
    CHECK(eval_penalty(Penalty{PenaltyKind::sq_l2}, vec({3, 4})) == 12.5);
    CHECK(eval_penalty(Penalty{PenaltyKind::l1}, vec({3, -4})) == 7.0);
}

TEST_CASE("NaN input is rejected")
{
    const Vector v = vec({1, std::numeric_limits<double>::quiet_NaN()});
    for (auto k : {PenaltyKind::sq_l2, PenaltyKind::sq_h1, PenaltyKind::tv, PenaltyKind::l1}) {
        CHECK_THROWS_AS(eval_penalty(Penalty{k}, v), InvalidArgument);
    }
}

TEST_CASE("image total variation")
{
    // 2x3 image, row-major
    const Vector u = vec({0, 1, 3, 2, 2, 2});
    const Shape s{2, 3};
    Penalty an{PenaltyKind::tv, 1.0, s};
    // horizontal: |1|+|2| + 0+0 ; vertical: |2|+|1|+|-1|
    CHECK(eval_penalty(an, u) == doctest::Approx(7.0));
    Penalty iso = an;
    iso.isotropic = true;
    // pixel-wise hypot of (dx, dy) with zero differences at the far edges
    const double expect = std::hypot(1.0, 2.0) + std::hypot(2.0, 1.0) + std::hypot(0.0, -1.0);
    CHECK(eval_penalty(iso, u) == doctest::Approx(expect));
    CHECK(eval_penalty(iso, u) <= eval_penalty(an, u));
}

TEST_CASE("difference operator shapes")
{
    CHECK(difference_operator(Shape{5, 1}).rows() == 4);
    CHECK(difference_operator(Shape{5, 1}).cols() == 5);
    const SparseMatrix D = difference_operator(Shape{3, 4});
    CHECK(D.rows() == 3 * 3 + 2 * 4);
    CHECK(D.cols() == 12);
    CHECK((D * Vector::Ones(12)).norm() == 0.0);
}

TEST_CASE("quadratic factor reproduces the penalty")
{
    std::mt19937_64 rng(4);
    for (double h : {1.0, 0.12, 0.01}) {
        const Penalty p{PenaltyKind::sq_h1, h};
        const Vector u = testing::random_vector(rng, 30);
        CHECK(0.5 * (quadratic_factor(p, 30) * u).squaredNorm() == doctest::Approx(eval_penalty(p, u)));
    }
    const Vector u = testing::random_vector(rng, 7);
    CHECK(0.5 * (quadratic_factor(Penalty{}, 7) * u).squaredNorm() == doctest::Approx(eval_penalty(Penalty{}, u)));
    CHECK_THROWS_AS(quadratic_factor(Penalty{PenaltyKind::tv}, 7), InvalidArgument);
}

TEST_CASE("homogeneity and convexity on random vectors")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> cdist(-5.0, 5.0);
    const Penalty kinds[] = {{PenaltyKind::sq_l2}, {PenaltyKind::sq_h1, 0.1}, {PenaltyKind::tv}, {PenaltyKind::l1},
                             {PenaltyKind::tv, 1.0, Shape{4, 5}, true}, {PenaltyKind::sq_h1, 1.0, Shape{4, 5}}};
    for (const auto& p : kinds) {
        const double degree = p.is_quadratic() ? 2.0 : 1.0;
        for (int trial = 0; trial < 50; ++trial) {
            const Vector u = testing::random_vector(rng, 20);
            const Vector v = testing::random_vector(rng, 20);
            const double c = cdist(rng);
            const double pu = eval_penalty(p, u);
            CHECK(pu >= 0.0);
            CHECK(testing::rel_diff(eval_penalty(p, c * u), std::pow(std::abs(c), degree) * pu) <= 1e-12);
            const double mid = eval_penalty(p, 0.5 * (u + v));
            CHECK(mid <= 0.5 * pu + 0.5 * eval_penalty(p, v) + 1e-12 * (pu + 1.0));
        }
    }
}

TEST_CASE("soft threshold")
{
    const Vector s = soft_threshold(vec({3, -0.2, 0}), 0.5);
    CHECK(s == vec({2.5, 0, 0}));
    const Vector v = vec({1.5, -2, 0.25});
    CHECK(soft_threshold(v, 0.0) == v);
    CHECK(soft_threshold(vec({-1.5}), 1.5)(0) == 0.0);
    CHECK_THROWS_AS(soft_threshold(v, -1.0), InvalidArgument);
}

TEST_CASE("soft threshold minimizes the l1 proximal objective")
{
    // The objective separates, so a 1-D grid search per coordinate is a
    // full search over the 5-vector.
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> tdist(0.0, 1.5);
    for (int trial = 0; trial < 20; ++trial) {
        const Vector v = testing::random_vector(rng, 5);
        const double tau = tdist(rng);
        const Vector x = soft_threshold(v, tau);
        for (Eigen::Index i = 0; i < 5; ++i) {
            double best = 0.0, best_val = std::numeric_limits<double>::infinity();
            for (int k = -40000; k <= 40000; ++k) {
                const double y = k * 1e-4;
                const double val = 0.5 * (y - v(i)) * (y - v(i)) + tau * std::abs(y);
                if (val < best_val) {
                    best_val = val;
                    best = y;
                }
            }
            CHECK(std::abs(best - x(i)) <= 1e-3);
        }
    }
}

TEST_CASE("models")
{
    CHECK_NOTHROW(PenaltyModel::h1_tv(0.1).validate());
    CHECK_NOTHROW(PenaltyModel::elastic_net().validate());
    CHECK_THROWS_AS(PenaltyModel::quad_quad(Penalty{PenaltyKind::l1}, Penalty{}), InvalidArgument);
    PenaltyModel bad = PenaltyModel::elastic_net();
    bad.psi1.kind = PenaltyKind::tv;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
    CHECK(parse_model("h1-tv", 0.5, Shape{10, 1}).psi1.grid_h == 0.5);
    CHECK(parse_model("quad-quad", 1.0, Shape{}).id == ModelId::quad_quad);
    CHECK_THROWS_AS(parse_model("ridge", 1.0, Shape{}), InvalidArgument);
    CHECK(parse_penalty_kind("h1") == PenaltyKind::sq_h1);
    CHECK_THROWS_AS(parse_penalty_kind("tv2"), InvalidArgument);
}
