#pragma once

// Diagonal-Gaussian actors, the clipped policy-ratio objective and the critic
// regression loss, each with an analytic gradient.

#include "ies/learner/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

namespace ies::learn {

inline constexpr double kLogStdMin = -5.0;
inline constexpr double kLogStdMax = 2.0;
inline constexpr double kLogRatioClamp = 20.0;

inline double half_log_two_pi() { return 0.5 * std::log(2.0 * std::numbers::pi); }

/// Policy head: network mean plus a state-independent log standard deviation.
/// Dimensions with `active[d] == 0` are excluded from the density.
struct GaussianActor {
    Mlp mean_net;
    Vec log_std;
    Vec active;

    GaussianActor() = default;
    GaussianActor(std::vector<int> sizes, double init_log_std)
        : mean_net(std::move(sizes)),
          log_std(Vec::Constant(mean_net.output_dim(), init_log_std)),
          active(Vec::Ones(mean_net.output_dim())) {}

    int action_dim() const { return mean_net.output_dim(); }

    void clamp_log_std() { log_std = log_std.cwiseMax(kLogStdMin).cwiseMin(kLogStdMax); }
};

/// Log-density of `action` under N(mean, diag(exp(2 log_std))) over active dims.
inline double gaussian_log_prob(const Vec& mean, const Vec& log_std, const Vec& action, const Vec& active) {
    double lp = 0.0;
    for (Eigen::Index d = 0; d < mean.size(); ++d) {
        if (active[d] == 0.0) continue;
        const double z = (action[d] - mean[d]) * std::exp(-log_std[d]);
        lp += -0.5 * z * z - log_std[d] - half_log_two_pi();
    }
    return lp;
}

inline double gaussian_log_prob(const Vec& mean, const Vec& log_std, const Vec& action) {
    return gaussian_log_prob(mean, log_std, action, Vec::Ones(mean.size()));
}

/// Draws an action around `mean`; inactive dims are pinned to zero. The log
/// probability is that of the unclamped sample.
template <class Rng>
std::pair<Vec, double> policy_sample(const Vec& mean, const Vec& log_std, const Vec& active, Rng& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vec a(mean.size());
    for (Eigen::Index d = 0; d < mean.size(); ++d) {
        const double eps = gauss(rng);
        a[d] = active[d] == 0.0 ? 0.0 : mean[d] + std::exp(log_std[d]) * eps;
    }
    return {a, gaussian_log_prob(mean, log_std, a, active)};
}

template <class Rng>
std::pair<Vec, double> policy_sample(const Vec& mean, const Vec& log_std, Rng& rng) {
    return policy_sample(mean, log_std, Vec::Ones(mean.size()), rng);
}

/// pi_new / pi_old from log probabilities, exponent clamped to [-20, 20].
inline double prob_ratio(double log_prob_new, double log_prob_old) {
    return std::exp(std::clamp(log_prob_new - log_prob_old, -kLogRatioClamp, kLogRatioClamp));
}

/// Per-sample pessimistic objective min(r A, clip(r, 1-eps, 1+eps) A).
inline double clipped_objective(double ratio, double advantage, double clip_eps) {
    const double clipped = std::clamp(ratio, 1.0 - clip_eps, 1.0 + clip_eps);
    return std::min(ratio * advantage, clipped * advantage);
}

/// Batch-mean clipped surrogate loss (negated objective).
inline double clipped_surrogate(const Vec& ratios, const Vec& advantages, double clip_eps) {
    if (ratios.size() != advantages.size() || ratios.size() == 0)
        throw ContractViolation("clipped_surrogate: ratio and advantage batches must match and be non-empty");
    double sum = 0.0;
    for (Eigen::Index i = 0; i < ratios.size(); ++i) sum += clipped_objective(ratios[i], advantages[i], clip_eps);
    return -sum / static_cast<double>(ratios.size());
}

inline double clipped_surrogate(double ratio, double advantage, double clip_eps) {
    return -clipped_objective(ratio, advantage, clip_eps);
}

struct ActorLoss {
    double loss = 0.0;
    Vec grad_net;
    Vec grad_log_std;
    double clip_fraction = 0.0;
    double approx_kl = 0.0;
};

/// Clipped surrogate (minus entropy bonus) over a batch, with its gradient
/// with respect to the mean-network parameters and the log standard
/// deviations. Columns of `obs` and `actions` are samples.
inline ActorLoss actor_loss_and_grad(const GaussianActor& actor, const Mat& obs, const Mat& actions,
                                     const Vec& old_log_probs, const Vec& advantages, double clip_eps,
                                     double entropy_coef = 0.0) {
    const Eigen::Index batch = obs.cols();
    if (actions.cols() != batch || old_log_probs.size() != batch || advantages.size() != batch)
        throw ContractViolation("actor_loss_and_grad: batch size mismatch");
    Mlp::Trace trace;
    const Mat mean = actor.mean_net.forward(obs, &trace);
    const Eigen::Index dims = mean.rows();
    const Vec inv_var = (-2.0 * actor.log_std).array().exp();

    ActorLoss out;
    Mat d_mean = Mat::Zero(dims, batch);
    out.grad_log_std = Vec::Zero(dims);
    const double inv_b = 1.0 / static_cast<double>(batch);
    double obj_sum = 0.0;
    int clipped = 0;
    for (Eigen::Index b = 0; b < batch; ++b) {
        double lp = 0.0;
        for (Eigen::Index d = 0; d < dims; ++d) {
            if (actor.active[d] == 0.0) continue;
            const double diff = actions(d, b) - mean(d, b);
            lp += -0.5 * diff * diff * inv_var[d] - actor.log_std[d] - half_log_two_pi();
        }
        const double log_ratio = lp - old_log_probs[b];
        const double r = prob_ratio(lp, old_log_probs[b]);
        const double adv = advantages[b];
        const double obj = clipped_objective(r, adv, clip_eps);
        obj_sum += obj;
        out.approx_kl += (r - 1.0) - log_ratio;
        const bool ratio_path = r * adv <= std::clamp(r, 1.0 - clip_eps, 1.0 + clip_eps) * adv;
        if (!ratio_path) ++clipped;
        if (!ratio_path || std::abs(log_ratio) >= kLogRatioClamp) continue;
        // d loss / d log_prob for this sample
        const double g = -r * adv * inv_b;
        for (Eigen::Index d = 0; d < dims; ++d) {
            if (actor.active[d] == 0.0) continue;
            const double diff = actions(d, b) - mean(d, b);
            d_mean(d, b) = g * diff * inv_var[d];
            out.grad_log_std[d] += g * (diff * diff * inv_var[d] - 1.0);
        }
    }
    out.loss = -obj_sum * inv_b;
    if (entropy_coef != 0.0) {
        for (Eigen::Index d = 0; d < dims; ++d) {
            if (actor.active[d] == 0.0) continue;
            out.loss -= entropy_coef * (actor.log_std[d] + 0.5 + half_log_two_pi());
            out.grad_log_std[d] -= entropy_coef;
        }
    }
    out.grad_net = actor.mean_net.backward(trace, d_mean);
    out.clip_fraction = static_cast<double>(clipped) * inv_b;
    out.approx_kl *= inv_b;
    return out;
}

/// Gradient of the summed log-density of a batch with respect to the mean
/// network and the log standard deviations.
inline std::pair<Vec, Vec> log_prob_grad(const GaussianActor& actor, const Mat& obs, const Mat& actions) {
    Mlp::Trace trace;
    const Mat mean = actor.mean_net.forward(obs, &trace);
    const Vec inv_var = (-2.0 * actor.log_std).array().exp();
    Mat d_mean = Mat::Zero(mean.rows(), mean.cols());
    Vec g_std = Vec::Zero(mean.rows());
    for (Eigen::Index b = 0; b < mean.cols(); ++b) {
        for (Eigen::Index d = 0; d < mean.rows(); ++d) {
            if (actor.active[d] == 0.0) continue;
            const double diff = actions(d, b) - mean(d, b);
            d_mean(d, b) = diff * inv_var[d];
            g_std[d] += diff * diff * inv_var[d] - 1.0;
        }
    }
    return {actor.mean_net.backward(trace, d_mean), g_std};
}

struct CriticLoss {
    double loss = 0.0;
    Vec grad;
};

/// 0.5 * mean squared error between the critic output and `targets`.
inline CriticLoss critic_loss_and_grad(const Mlp& critic, const Mat& inputs, const Vec& targets) {
    if (critic.output_dim() != 1) throw ContractViolation("critic_loss_and_grad: critic must have one output");
    if (inputs.cols() != targets.size()) throw ContractViolation("critic_loss_and_grad: batch size mismatch");
    Mlp::Trace trace;
    const Mat v = critic.forward(inputs, &trace);
    const double inv_b = 1.0 / static_cast<double>(targets.size());
    const Eigen::RowVectorXd err = v.row(0) - targets.transpose();
    CriticLoss out;
    out.loss = 0.5 * err.squaredNorm() * inv_b;
    out.grad = critic.backward(trace, err * inv_b);
    return out;
}

}  // namespace ies::learn
