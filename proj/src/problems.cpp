#include "mtikh/problems.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace mtikh {

namespace {

double convolution_kernel(double tau)
{
    // xi(tau) = chi_{|tau| <= 3} (1 + cos(pi tau / 3))
    if (std::abs(tau) > 3.0) {
        return 0.0;
    }
    return 1.0 + std::cos(std::numbers::pi * tau / 3.0);
}

double bump_kernel(double tau)
{
    return 0.25 * std::pow(1.0 / 16.0 + tau * tau, -1.5);
}

Matrix blur_matrix(int side, const Vector& taps)
{
    const int half = static_cast<int>(taps.size()) / 2;
    const Eigen::Index count = static_cast<Eigen::Index>(side) * side;
    Matrix B = Matrix::Zero(count, count);
    auto clamp = [side](int v) { return std::clamp(v, 0, side - 1); };
    for (int r = 0; r < side; ++r) {
        for (int c = 0; c < side; ++c) {
            const Eigen::Index row = static_cast<Eigen::Index>(r) * side + c;
            for (int i = -half; i <= half; ++i) {
                for (int j = -half; j <= half; ++j) {
                    const Eigen::Index col = static_cast<Eigen::Index>(clamp(r + i)) * side + clamp(c + j);
                    B(row, col) += taps(i + half) * taps(j + half);
                }
            }
        }
    }
    return B;
}

}  // namespace

std::string to_string(KernelId id)
{
    switch (id) {
    case KernelId::h1tv_convolution: return "h1tv-convolution";
    case KernelId::bump_kernel: return "bump-kernel";
    case KernelId::gaussian_blur: return "gaussian-blur";
    }
    return "unknown";
}

KernelId parse_kernel_id(std::string_view s)
{
    if (s == "h1tv-convolution") return KernelId::h1tv_convolution;
    if (s == "bump-kernel") return KernelId::bump_kernel;
    if (s == "gaussian-blur") return KernelId::gaussian_blur;
    throw InvalidArgument("unknown kernel id: " + std::string(s));
}

void KernelSpec::validate() const
{
    if (n < 2) {
        throw InvalidArgument("kernel grid size must be at least 2");
    }
    if (id == KernelId::gaussian_blur) {
        if (blur_width < 1 || blur_width % 2 == 0) {
            throw InvalidArgument("blur width must be a positive odd integer");
        }
        if (!(blur_sigma > 0.0)) {
            throw InvalidArgument("blur sigma must be positive");
        }
        if (!(subsample > 0.0 && subsample <= 1.0)) {
            throw InvalidArgument("subsample fraction must lie in (0, 1]");
        }
    } else if (!(b > a)) {
        throw InvalidArgument("kernel interval must satisfy a < b");
    }
}

Vector gaussian_taps(double sigma, int width)
{
    const int half = width / 2;
    Vector taps(width);
    for (int k = -half; k <= half; ++k) {
        taps(k + half) = std::exp(-0.5 * k * k / (sigma * sigma));
    }
    return taps / taps.sum();
}

std::vector<Eigen::Index> subsample_mask(Eigen::Index count, double fraction)
{
    std::vector<Eigen::Index> keep;
    keep.reserve(static_cast<std::size_t>(std::ceil(count * fraction)) + 1);
    for (Eigen::Index i = 0; i < count; ++i) {
        if (i == 0 || std::floor(i * fraction) > std::floor((i - 1) * fraction)) {
            keep.push_back(i);
        }
    }
    return keep;
}

Matrix discretize_kernel(const KernelSpec& spec)
{
    spec.validate();
    if (spec.id == KernelId::gaussian_blur) {
        const Matrix B = blur_matrix(spec.n, gaussian_taps(spec.blur_sigma, spec.blur_width));
        if (spec.subsample >= 1.0) {
            return B;
        }
        const auto keep = subsample_mask(B.rows(), spec.subsample);
        Matrix K(static_cast<Eigen::Index>(keep.size()), B.cols());
        for (std::size_t i = 0; i < keep.size(); ++i) {
            K.row(static_cast<Eigen::Index>(i)) = B.row(keep[i]);
        }
        return K;
    }

    const double h = (spec.b - spec.a) / spec.n;
    Vector t(spec.n);
    for (int j = 0; j < spec.n; ++j) {
        t(j) = spec.a + (j + 0.5) * h;
    }
    auto k = spec.id == KernelId::h1tv_convolution ? convolution_kernel : bump_kernel;
    Matrix K(spec.n, spec.n);
    for (int i = 0; i < spec.n; ++i) {
        for (int j = 0; j < spec.n; ++j) {
            K(i, j) = h * k(t(i) - t(j));
        }
    }
    return K;
}

Vector standard_normal(Eigen::Index m, std::uint64_t seed)
{
    std::mt19937_64 engine(seed);
    auto uniform = [&engine] { return static_cast<double>(engine() >> 11) * 0x1.0p-53; };
    Vector z(m);
    for (Eigen::Index i = 0; i < m; i += 2) {
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        z(i) = r * std::cos(angle);
        if (i + 1 < m) {
            z(i + 1) = r * std::sin(angle);
        }
    }
    return z;
}

NoisyData add_noise(const Vector& g_true, double eps, const Vector& zeta)
{
    if (!(eps >= 0.0)) {
        throw InvalidArgument("relative noise level must be nonnegative");
    }
    if (zeta.size() != g_true.size()) {
        throw InvalidArgument("noise vector length does not match data");
    }
    if (eps == 0.0 || g_true.size() == 0) {
        return {g_true, 0.0};
    }
    const double scale = g_true.cwiseAbs().maxCoeff() * eps;
    NoisyData out{g_true + scale * zeta, 0.0};
    out.delta = (out.g_obs - g_true).norm();
    return out;
}

NoisyData add_noise(const Vector& g_true, double eps, std::uint64_t seed)
{
    return add_noise(g_true, eps, standard_normal(g_true.size(), seed));
}

std::string to_string(Example e)
{
    switch (e) {
    case Example::ex41: return "ex41";
    case Example::ex42: return "ex42";
    case Example::ex43: return "ex43";
    }
    return "unknown";
}

Example parse_example(std::string_view s)
{
    if (s == "ex41") return Example::ex41;
    if (s == "ex42") return Example::ex42;
    if (s == "ex43") return Example::ex43;
    throw InvalidArgument("unknown example: " + std::string(s));
}

int default_size(Example e)
{
    return e == Example::ex43 ? 50 : 100;
}

KernelSpec kernel_for(Example e, int n)
{
    KernelSpec spec;
    spec.n = n;
    switch (e) {
    case Example::ex41:
        spec.id = KernelId::h1tv_convolution;
        spec.a = -6.0;
        spec.b = 6.0;
        break;
    case Example::ex42:
        spec.id = KernelId::bump_kernel;
        spec.a = 0.0;
        spec.b = 1.0;
        break;
    case Example::ex43:
        spec.id = KernelId::gaussian_blur;
        spec.a = 0.0;
        spec.b = n;
        spec.blur_sigma = 1.0;
        spec.blur_width = 5;
        spec.subsample = 0.5;
        break;
    }
    return spec;
}

Vector phantom(Example e, int n)
{
    if (e == Example::ex43) {
        // Two blocks and a plus-shaped cross on a 50x50 reference frame,
        // scaled to the requested side.
        Matrix img = Matrix::Zero(n, n);
        auto fill = [&](int r0, int r1, int c0, int c1) {
            auto s = [n](int v) { return std::clamp(v * n / 50, 0, n); };
            for (int r = s(r0); r < s(r1); ++r) {
                for (int c = s(c0); c < s(c1); ++c) {
                    img(r, c) = 1.0;
                }
            }
        };
        fill(8, 20, 6, 18);
        fill(30, 44, 6, 20);
        fill(15, 34, 34, 38);  // vertical bar
        fill(22, 26, 27, 46);  // horizontal bar
        Vector u(static_cast<Eigen::Index>(n) * n);
        for (int r = 0; r < n; ++r) {
            for (int c = 0; c < n; ++c) {
                u(static_cast<Eigen::Index>(r) * n + c) = img(r, c);
            }
        }
        return u;
    }

    const KernelSpec spec = kernel_for(e, n);
    const double h = (spec.b - spec.a) / n;
    Vector u(n);
    for (int j = 0; j < n; ++j) {
        const double t = spec.a + (j + 0.5) * h;
        if (e == Example::ex41) {
            if (t >= -4.0 && t <= -1.0) {
                u(j) = 1.0;
            } else if (t >= 1.0 && t <= 5.0) {
                const double s = std::sin(std::numbers::pi * (t - 1.0) / 4.0);
                u(j) = s * s;
            } else {
                u(j) = 0.0;
            }
        } else {
            const double w = 2.0 * 0.03 * 0.03;
            u(j) = std::exp(-(t - 0.3) * (t - 0.3) / w) + 0.8 * std::exp(-(t - 0.7) * (t - 0.7) / w);
        }
    }
    return u;
}

Problem make_test_problem(Example e, int n, double eps, std::uint64_t seed)
{
    if (n <= 0) {
        n = default_size(e);
    }
    const KernelSpec spec = kernel_for(e, n);
    Matrix K = discretize_kernel(spec);
    Vector u_true = phantom(e, n);
    Vector g_true = K * u_true;
    NoisyData noisy = add_noise(g_true, eps, seed);

    const bool image = e == Example::ex43;
    const Grid grid{spec.a, spec.b, image ? 1.0 : (spec.b - spec.a) / n};
    const Shape shape = image ? Shape{n, n} : Shape{n, 1};
    return Problem(std::move(K), std::move(noisy.g_obs), noisy.delta, grid, shape,
                   std::move(u_true), std::move(g_true));
}

}  // namespace mtikh
