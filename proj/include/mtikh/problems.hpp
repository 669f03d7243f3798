#pragma once

#include "mtikh/types.hpp"

#include <cstdint>
#include <string>
#include <string_view>

namespace mtikh {

enum class KernelId { h1tv_convolution, bump_kernel, gaussian_blur };

std::string to_string(KernelId id);
KernelId parse_kernel_id(std::string_view s);

struct KernelSpec {
    KernelId id = KernelId::bump_kernel;
    double a = 0.0;  // 1-D interval
    double b = 1.0;
    int n = 100;     // grid size (1-D) or image side (2-D)
    double blur_sigma = 1.0;
    int blur_width = 5;
    double subsample = 1.0;  // fraction of retained data rows, 2-D only

    void validate() const;
};

/// Forward operator for the given kernel.
///
/// 1-D kernels use the midpoint rule on t_j = a + (j - 1/2) h with
/// collocation at s_i = t_i, so K_ij = h k(t_i, t_j). The 2-D kernel is a
/// separable, unit-sum Gaussian blur with replicate boundary, followed by
/// the row selection of subsample_mask().
Matrix discretize_kernel(const KernelSpec& spec);

/// Retained pixel indices for a row-major image of `count` pixels. For a
/// fraction f the i-th pixel is kept when floor(i f) advances, so f = 1/2
/// keeps every other pixel starting at 0.
std::vector<Eigen::Index> subsample_mask(Eigen::Index count, double fraction);

/// Unit-sum 1-D Gaussian taps of the given odd width.
Vector gaussian_taps(double sigma, int width);

/// Standard normal stream: mt19937_64(seed), 53-bit uniforms, Box-Muller
/// pairs (cos branch first, then sin). Stable across platforms.
Vector standard_normal(Eigen::Index m, std::uint64_t seed);

struct NoisyData {
    Vector g_obs;
    double delta = 0.0;
};

/// g_obs = g_true + max|g_true| * eps * zeta, zeta ~ standard_normal(seed).
NoisyData add_noise(const Vector& g_true, double eps, std::uint64_t seed);

/// Same rule with an explicit zeta (tests inject it).
NoisyData add_noise(const Vector& g_true, double eps, const Vector& zeta);

enum class Example { ex41, ex42, ex43 };

std::string to_string(Example e);
Example parse_example(std::string_view s);

/// Default size: 100 for the 1-D examples, 50 (50x50 image) for ex43.
int default_size(Example e);

KernelSpec kernel_for(Example e, int n);

/// Exact solution on the example's grid.
Vector phantom(Example e, int n);

/// Builds kernel, phantom, exact data and noisy data. n <= 0 selects the
/// default size.
Problem make_test_problem(Example e, int n, double eps, std::uint64_t seed);

}  // namespace mtikh
