#include "mtikh/types.hpp"

#include <cmath>

namespace mtikh {

RegParams::RegParams(double eta1, double eta2) : eta1_(eta1), eta2_(eta2)
{
    if (!(eta1 > 0.0) || !(eta2 > 0.0) || !std::isfinite(eta1) || !std::isfinite(eta2)) {
        throw InvalidArgument("regularization parameters must be positive and finite, got (" +
                              std::to_string(eta1) + ", " + std::to_string(eta2) + ")");
    }
}

double weight_t(const RegParams& eta) noexcept
{
    return eta.eta1() / (eta.eta1() + eta.eta2());
}

Problem::Problem(Matrix K, Vector g_obs, double delta, Grid grid, Shape shape,
                 std::optional<Vector> u_true, std::optional<Vector> g_true)
    : K_(std::move(K)),
      g_obs_(std::move(g_obs)),
      delta_(delta),
      grid_(grid),
      shape_(shape),
      u_true_(std::move(u_true)),
      g_true_(std::move(g_true))
{
    if (g_obs_.size() != K_.rows()) {
        throw InvalidArgument("g_obs length does not match rows(K)");
    }
    if (shape_.size() != K_.cols()) {
        throw InvalidArgument("shape does not match cols(K)");
    }
    if (u_true_ && u_true_->size() != K_.cols()) {
        throw InvalidArgument("u_true length does not match cols(K)");
    }
    if (!(delta_ >= 0.0) || !std::isfinite(delta_)) {
        throw InvalidArgument("delta must be a finite nonnegative number");
    }
    if (g_true_) {
        if (g_true_->size() != K_.rows()) {
            throw InvalidArgument("g_true length does not match rows(K)");
        }
        const double realized = (g_obs_ - *g_true_).norm();
        if (std::abs(delta_ - realized) > 1e-12 * (1.0 + g_true_->norm())) {
            throw InvalidArgument("delta disagrees with |g_obs - g_true|");
        }
    }
    if (!K_.allFinite() || !g_obs_.allFinite()) {
        throw InvalidArgument("problem data contains NaN or Inf");
    }
}

std::string to_string(Principle p)
{
    switch (p) {
    case Principle::balanced_discrepancy: return "balanced-discrepancy";
    case Principle::balancing: return "balancing";
    case Principle::oracle: return "oracle";
    }
    return "unknown";
}

}  // namespace mtikh
