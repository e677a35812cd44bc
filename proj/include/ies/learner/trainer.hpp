#pragma once

// Multi-agent clipped policy-ratio training. In coordinated mode three actors
// share one critic on the global state and all agents learn from the team
// reward. In independent mode each agent owns an actor-critic pair trained on
// its local observation and local reward, with the exchange outputs masked.

#include "ies/env.hpp"
#include "ies/learner/adam.hpp"
#include "ies/learner/gae.hpp"
#include "ies/learner/mlp.hpp"
#include "ies/learner/policy.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <deque>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace ies::learn {

struct TrainConfig {
    double actor_lr = 4e-5;
    double critic_lr = 4e-4;
    int batch = 96;  ///< transitions per update, a whole number of episodes
    int episodes = 25000;
    double clip_eps = 0.2;
    double discount = 0.99;
    double gae_lambda = 0.95;
    int epochs_per_update = 4;
    int minibatch = 0;  ///< 0 = full batch
    std::uint64_t seed = 1;
    std::vector<int> hidden{128, 128};
    double max_grad_norm = 0.5;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    double init_log_std = -0.5;
    double entropy_coef = 0.0;
    bool lr_anneal = false;  ///< linear decay of both learning rates to zero
    bool value_normalization = true;
    int divergence_window = 500;
    int moving_average = 50;

    int episodes_per_update() const { return batch / kSteps; }

    void validate() const {
        if (!(actor_lr >= 0.0) || !(critic_lr >= 0.0)) throw SchemaError("train: learning rates must be >= 0");
        if (batch <= 0 || batch % kSteps != 0) throw SchemaError("train: batch must be a positive multiple of 24");
        if (episodes <= 0) throw SchemaError("train: episodes must be positive");
        if (!(clip_eps > 0.0 && clip_eps < 1.0)) throw SchemaError("train: clip_eps must lie in (0, 1)");
        if (!(discount > 0.0 && discount <= 1.0)) throw SchemaError("train: discount must lie in (0, 1]");
        if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) throw SchemaError("train: gae_lambda must lie in [0, 1]");
        if (epochs_per_update <= 0) throw SchemaError("train: epochs_per_update must be positive");
        if (minibatch < 0 || minibatch > batch) throw SchemaError("train: minibatch must lie in 0..batch");
        if (hidden.empty()) throw SchemaError("train: hidden must list at least one layer");
        for (int h : hidden)
            if (h <= 0) throw SchemaError("train: hidden sizes must be positive");
        if (!(max_grad_norm >= 0.0)) throw SchemaError("train: max_grad_norm must be >= 0");
        if (!(init_log_std >= kLogStdMin && init_log_std <= kLogStdMax))
            throw SchemaError("train: init_log_std must lie in [-5, 2]");
        if (!(entropy_coef >= 0.0)) throw SchemaError("train: entropy_coef must be >= 0");
        if (divergence_window <= 0 || moving_average <= 0) throw SchemaError("train: windows must be positive");
    }
};

/// Everything needed to act greedily or to resume: actors, critics, value
/// normalisers and the state scales the networks were trained on.
struct PolicySet {
    Mode mode = Mode::coordinated;
    Observation observation = Observation::local;
    StateScales scales;
    std::array<GaussianActor, kCommunities> actors;
    std::vector<Mlp> critics;  ///< one shared, or one per agent
    std::vector<RunningMeanStd> value_norms;
    bool value_normalization = true;

    int critic_for(int agent) const { return critics.size() == 1 ? 0 : agent; }

    Vec actor_input(const StateVector& s, int agent) const {
        const std::vector<double> o = observe(s, agent, observation);
        return Eigen::Map<const Vec>(o.data(), static_cast<Eigen::Index>(o.size()));
    }

    Vec critic_input(const StateVector& s, int agent) const {
        if (mode == Mode::coordinated) return Eigen::Map<const Vec>(s.data(), kStateDim);
        return actor_input(s, agent);
    }

    /// Critic estimate in reward units.
    double value(const StateVector& s, int agent) const {
        const int c = critic_for(agent);
        const double raw = critics[static_cast<std::size_t>(c)].forward(critic_input(s, agent))[0];
        return value_normalization ? value_norms[static_cast<std::size_t>(c)].denormalize(raw) : raw;
    }

    /// Deterministic action: the policy mean.
    ActionVector greedy_action(const StateVector& s, int agent) const {
        const GaussianActor& a = actors[static_cast<std::size_t>(agent)];
        const Vec mean = a.mean_net.forward(actor_input(s, agent));
        ActionVector out{};
        for (int d = 0; d < kActionDim; ++d) out[d] = a.active[d] == 0.0 ? 0.0 : mean[d];
        return out;
    }

    std::array<ActionVector, kCommunities> greedy_actions(const StateVector& s) const {
        std::array<ActionVector, kCommunities> out{};
        for (int i = 0; i < kCommunities; ++i) out[i] = greedy_action(s, i);
        return out;
    }
};

/// Fresh networks with orthogonal weights.
inline PolicySet make_policy(Mode mode, Observation obs, const StateScales& scales, const TrainConfig& cfg,
                             std::mt19937_64& rng) {
    PolicySet p;
    p.mode = mode;
    p.observation = obs;
    p.scales = scales;
    p.value_normalization = cfg.value_normalization;
    const double hidden_gain = std::sqrt(2.0);
    for (auto& a : p.actors) {
        a = GaussianActor(layer_sizes(observation_dim(obs), cfg.hidden, kActionDim), cfg.init_log_std);
        a.mean_net.init_orthogonal(rng, hidden_gain, 0.01);
        if (mode == Mode::independent) {
            a.active[kActPExch] = 0.0;
            a.active[kActHExch] = 0.0;
        }
    }
    const int n_critics = mode == Mode::coordinated ? 1 : kCommunities;
    const int critic_in = mode == Mode::coordinated ? kStateDim : observation_dim(obs);
    for (int c = 0; c < n_critics; ++c) {
        Mlp m(layer_sizes(critic_in, cfg.hidden, 1));
        m.init_orthogonal(rng, hidden_gain, 1.0);
        p.critics.push_back(std::move(m));
    }
    p.value_norms.assign(static_cast<std::size_t>(n_critics), RunningMeanStd{});
    return p;
}

struct EpisodeLog {
    int episode = 0;
    double mean_reward = 0.0;  ///< mean per-step team reward
    double total_cost = 0.0;
    double total_penalty = 0.0;
    double curtailment_kwh = 0.0;
};

inline constexpr const char* kTrainLogHeader = "episode,mean_reward,total_cost,total_penalty,curtailment_kwh";

inline std::string format_log_row(const EpisodeLog& e) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%d,%.10g,%.10g,%.10g,%.10g", e.episode, e.mean_reward, e.total_cost,
                  e.total_penalty, e.curtailment_kwh);
    return buf;
}

/// Aborts training when the reward is non-finite, or when its moving average
/// stays more than half its observed range below the best value for
/// `window` consecutive episodes.
class DivergenceDetector {
public:
    DivergenceDetector(int window, int moving_average) : window_(window), ma_len_(moving_average) {}

    void observe(int episode, double mean_reward) {
        if (!std::isfinite(mean_reward)) {
            throw DivergenceError("training diverged at episode " + std::to_string(episode) +
                                  ": mean reward is not finite");
        }
        recent_.push_back(mean_reward);
        sum_ += mean_reward;
        if (static_cast<int>(recent_.size()) > ma_len_) {
            sum_ -= recent_.front();
            recent_.pop_front();
        }
        if (static_cast<int>(recent_.size()) < ma_len_) return;
        const double ma = sum_ / static_cast<double>(ma_len_);
        hi_ = std::max(hi_, ma);
        lo_ = std::min(lo_, ma);
        const double range = hi_ - lo_;
        if (range > 0.0 && ma < hi_ - 0.5 * range)
            ++run_;
        else
            run_ = 0;
        if (run_ >= window_) {
            std::ostringstream os;
            os << "training diverged at episode " << episode << ": " << ma_len_
               << "-episode mean reward " << ma << " stayed below " << (hi_ - 0.5 * range) << " (best " << hi_
               << ", worst " << lo_ << ") for " << window_ << " episodes";
            throw DivergenceError(os.str());
        }
    }

private:
    int window_;
    int ma_len_;
    std::deque<double> recent_;
    double sum_ = 0.0;
    double hi_ = -std::numeric_limits<double>::infinity();
    double lo_ = std::numeric_limits<double>::infinity();
    int run_ = 0;
};

/// Transitions of whole episodes gathered under one policy snapshot.
struct RolloutBuffer {
    std::vector<StateVector> states;
    std::array<std::vector<Vec>, kCommunities> actions;
    std::array<std::vector<double>, kCommunities> log_probs;
    std::vector<double> team_rewards;
    std::array<std::vector<double>, kCommunities> local_rewards;
    std::array<std::vector<double>, kCommunities> values;  ///< per critic; only [0] used when shared
    std::vector<int> episode_starts;

    std::size_t size() const { return states.size(); }

    void clear() { *this = RolloutBuffer{}; }
};

struct TrainResult {
    PolicySet policy;
    std::vector<EpisodeLog> log;
    long updates = 0;
};

using ProgressFn = std::function<void(const EpisodeLog&)>;

class Trainer {
public:
    Trainer(DispatchEnv env, TrainConfig cfg) : env_(std::move(env)), cfg_(std::move(cfg)), rng_(cfg_.seed) {
        cfg_.validate();
        policy_ = make_policy(env_.mode(), env_.config().observation, env_.scales(), cfg_, rng_);
        for (const auto& a : policy_.actors) {
            actor_opt_.emplace_back(a.mean_net.parameter_count() + a.log_std.size(), cfg_.actor_lr, cfg_.adam_beta1,
                                    cfg_.adam_beta2, cfg_.adam_eps);
        }
        for (const auto& c : policy_.critics) {
            critic_opt_.emplace_back(c.parameter_count(), cfg_.critic_lr, cfg_.adam_beta1, cfg_.adam_beta2,
                                     cfg_.adam_eps);
        }
    }

    const PolicySet& policy() const { return policy_; }
    const TrainConfig& config() const { return cfg_; }

    TrainResult run(const ProgressFn& progress = {}) {
        TrainResult result;
        DivergenceDetector detector(cfg_.divergence_window, cfg_.moving_average);
        RolloutBuffer buf;
        const int per_update = cfg_.episodes_per_update();
        for (int ep = 1; ep <= cfg_.episodes; ++ep) {
            const EpisodeLog e = collect_episode(ep, buf);
            result.log.push_back(e);
            if (progress) progress(e);
            detector.observe(ep, e.mean_reward);
            if (ep % per_update == 0) {
                if (cfg_.lr_anneal) {
                    const double frac = 1.0 - static_cast<double>(ep - per_update) / cfg_.episodes;
                    for (auto& o : actor_opt_) o.set_learning_rate(cfg_.actor_lr * frac);
                    for (auto& o : critic_opt_) o.set_learning_rate(cfg_.critic_lr * frac);
                }
                update(buf);
                buf.clear();
                ++result.updates;
            }
        }
        result.policy = policy_;
        return result;
    }

private:
    EpisodeLog collect_episode(int episode, RolloutBuffer& buf) {
        const bool shared = policy_.critics.size() == 1;
        buf.episode_starts.push_back(static_cast<int>(buf.size()));
        StateVector s = env_.reset();
        EpisodeLog e;
        e.episode = episode;
        double reward_sum = 0.0;
        for (int t = 0; t < kSteps; ++t) {
            std::array<ActionVector, kCommunities> acts{};
            buf.states.push_back(s);
            for (int i = 0; i < kCommunities; ++i) {
                const GaussianActor& actor = policy_.actors[static_cast<std::size_t>(i)];
                const Vec mean = actor.mean_net.forward(policy_.actor_input(s, i));
                auto [a, lp] = policy_sample(mean, actor.log_std, actor.active, rng_);
                for (int d = 0; d < kActionDim; ++d) acts[i][d] = a[d];
                buf.actions[i].push_back(std::move(a));
                buf.log_probs[i].push_back(lp);
                if (!shared || i == 0) buf.values[i].push_back(policy_.value(s, i));
            }
            const StepOutcome out = env_.step(acts);
            buf.team_rewards.push_back(out.reward);
            for (int i = 0; i < kCommunities; ++i) buf.local_rewards[i].push_back(out.local_rewards[i]);
            reward_sum += out.reward;
            e.total_cost += out.metrics.cost.total;
            e.total_penalty += out.metrics.total_penalty();
            e.curtailment_kwh += out.metrics.total_curtailed() * env_.system().price.dt;
            s = out.next_state;
        }
        e.mean_reward = reward_sum / kSteps;
        return e;
    }

    /// Advantages and return targets for critic `c`, episode by episode.
    AdvantageEstimate estimate(const RolloutBuffer& buf, int c) const {
        const bool shared = policy_.critics.size() == 1;
        const std::vector<double>& rewards = shared ? buf.team_rewards : buf.local_rewards[c];
        AdvantageEstimate all;
        for (std::size_t k = 0; k < buf.episode_starts.size(); ++k) {
            const auto first = static_cast<std::size_t>(buf.episode_starts[k]);
            const std::size_t last =
                k + 1 < buf.episode_starts.size() ? static_cast<std::size_t>(buf.episode_starts[k + 1]) : buf.size();
            const std::vector<double> r(rewards.begin() + first, rewards.begin() + last);
            const std::vector<double> v(buf.values[c].begin() + first, buf.values[c].begin() + last);
            const AdvantageEstimate part = gae_advantages(r, v, cfg_.discount, cfg_.gae_lambda);
            all.advantages.insert(all.advantages.end(), part.advantages.begin(), part.advantages.end());
            all.returns.insert(all.returns.end(), part.returns.begin(), part.returns.end());
        }
        return all;
    }

    void update(const RolloutBuffer& buf) {
        const auto n = static_cast<Eigen::Index>(buf.size());
        const int n_critics = static_cast<int>(policy_.critics.size());

        std::vector<std::vector<double>> adv(static_cast<std::size_t>(n_critics));
        std::vector<Vec> targets(static_cast<std::size_t>(n_critics));
        std::vector<Mat> critic_in(static_cast<std::size_t>(n_critics));
        for (int c = 0; c < n_critics; ++c) {
            AdvantageEstimate est = estimate(buf, c);
            normalize_in_place(est.advantages);
            adv[c] = std::move(est.advantages);
            RunningMeanStd& norm = policy_.value_norms[static_cast<std::size_t>(c)];
            if (cfg_.value_normalization) norm.update(est.returns);
            targets[c].resize(n);
            critic_in[c].resize(n_critics == 1 ? kStateDim : policy_.critic_input(buf.states[0], c).size(), n);
            for (Eigen::Index k = 0; k < n; ++k) {
                const double r = est.returns[static_cast<std::size_t>(k)];
                targets[c][k] = cfg_.value_normalization ? norm.normalize(r) : r;
                critic_in[c].col(k) = policy_.critic_input(buf.states[static_cast<std::size_t>(k)], c);
            }
        }

        std::array<Mat, kCommunities> obs, acts;
        std::array<Vec, kCommunities> old_lp, agent_adv;
        for (int i = 0; i < kCommunities; ++i) {
            const int c = policy_.critic_for(i);
            obs[i].resize(observation_dim(policy_.observation), n);
            acts[i].resize(kActionDim, n);
            old_lp[i].resize(n);
            agent_adv[i].resize(n);
            for (Eigen::Index k = 0; k < n; ++k) {
                const auto ku = static_cast<std::size_t>(k);
                obs[i].col(k) = policy_.actor_input(buf.states[ku], i);
                acts[i].col(k) = buf.actions[i][ku];
                old_lp[i][k] = buf.log_probs[i][ku];
                agent_adv[i][k] = adv[static_cast<std::size_t>(c)][ku];
            }
        }

        const Eigen::Index mb = cfg_.minibatch > 0 ? cfg_.minibatch : n;
        std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
        for (int epoch = 0; epoch < cfg_.epochs_per_update; ++epoch) {
            std::iota(order.begin(), order.end(), Eigen::Index{0});
            if (mb < n) std::shuffle(order.begin(), order.end(), rng_);
            for (Eigen::Index start = 0; start < n; start += mb) {
                const Eigen::Index len = std::min(mb, n - start);
                const auto idx = [&](Eigen::Index j) { return order[static_cast<std::size_t>(start + j)]; };
                for (int i = 0; i < kCommunities; ++i) {
                    Mat o(obs[i].rows(), len), a(kActionDim, len);
                    Vec lp(len), ad(len);
                    for (Eigen::Index j = 0; j < len; ++j) {
                        o.col(j) = obs[i].col(idx(j));
                        a.col(j) = acts[i].col(idx(j));
                        lp[j] = old_lp[i][idx(j)];
                        ad[j] = agent_adv[i][idx(j)];
                    }
                    step_actor(i, o, a, lp, ad);
                }
                for (int c = 0; c < n_critics; ++c) {
                    Mat x(critic_in[c].rows(), len);
                    Vec y(len);
                    for (Eigen::Index j = 0; j < len; ++j) {
                        x.col(j) = critic_in[c].col(idx(j));
                        y[j] = targets[c][idx(j)];
                    }
                    step_critic(c, x, y);
                }
            }
        }
    }

    void step_actor(int i, const Mat& obs, const Mat& acts, const Vec& old_lp, const Vec& adv) {
        GaussianActor& actor = policy_.actors[static_cast<std::size_t>(i)];
        const ActorLoss loss = actor_loss_and_grad(actor, obs, acts, old_lp, adv, cfg_.clip_eps, cfg_.entropy_coef);
        const Eigen::Index np = actor.mean_net.parameter_count();
        Vec grad(np + actor.log_std.size());
        grad << loss.grad_net, loss.grad_log_std;
        clip_grad_norm(grad, cfg_.max_grad_norm);
        Vec params(grad.size());
        params << actor.mean_net.parameters(), actor.log_std;
        actor_opt_[static_cast<std::size_t>(i)].step(params, grad);
        actor.mean_net.parameters() = params.head(np);
        actor.log_std = params.tail(actor.log_std.size());
        actor.clamp_log_std();
    }

    void step_critic(int c, const Mat& x, const Vec& y) {
        Mlp& critic = policy_.critics[static_cast<std::size_t>(c)];
        CriticLoss loss = critic_loss_and_grad(critic, x, y);
        clip_grad_norm(loss.grad, cfg_.max_grad_norm);
        critic_opt_[static_cast<std::size_t>(c)].step(critic.parameters(), loss.grad);
    }

    DispatchEnv env_;
    TrainConfig cfg_;
    std::mt19937_64 rng_;
    PolicySet policy_;
    std::vector<Adam> actor_opt_;
    std::vector<Adam> critic_opt_;
};

/// Team-reward training with a shared critic on the global state.
inline TrainResult train_mappo(const DispatchEnv& env, const TrainConfig& cfg, const ProgressFn& progress = {}) {
    if (env.mode() != Mode::coordinated) throw ContractViolation("train_mappo: environment must be coordinated");
    return Trainer(env, cfg).run(progress);
}

/// Three separate actor-critic pairs without exchange.
inline TrainResult train_independent(const DispatchEnv& env, const TrainConfig& cfg,
                                     const ProgressFn& progress = {}) {
    if (env.mode() != Mode::independent) throw ContractViolation("train_independent: environment must be independent");
    return Trainer(env, cfg).run(progress);
}

inline TrainResult train(const DispatchEnv& env, const TrainConfig& cfg, const ProgressFn& progress = {}) {
    return env.mode() == Mode::coordinated ? train_mappo(env, cfg, progress) : train_independent(env, cfg, progress);
}

}  // namespace ies::learn
