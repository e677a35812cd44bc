#include "ies/evaluation.hpp"
#include "ies/learner/trainer.hpp"
#include "ies/scenario.hpp"

#include <gtest/gtest.h>

#include <numeric>

using namespace ies;
using namespace ies::learn;

namespace {

TrainConfig quick(int episodes, std::uint64_t seed = 3) {
    TrainConfig c;
    c.episodes = episodes;
    c.seed = seed;
    c.actor_lr = 3e-4;
    c.critic_lr = 1e-3;
    c.minibatch = 24;
    c.epochs_per_update = 10;
    c.discount = 0.5;
    c.gae_lambda = 0.9;
    c.init_log_std = -1.0;
    c.hidden = {32, 32};
    return c;
}

DispatchEnv env(Mode mode) { return DispatchEnv(generate_scenario(GeneratorSpec{}), SystemConfig{}, EnvConfig{}, mode); }

double mean_reward(const std::vector<EpisodeLog>& log, std::size_t from, std::size_t to) {
    double s = 0.0;
    for (std::size_t k = from; k < to; ++k) s += log[k].mean_reward;
    return s / static_cast<double>(to - from);
}

}  // namespace

TEST(Trainer, SmokeRunMakesProgress) {
    const TrainResult r = train_mappo(env(Mode::coordinated), quick(200));
    ASSERT_EQ(r.log.size(), 200u);
    EXPECT_EQ(r.updates, 200 / 4);
    EXPECT_GE(mean_reward(r.log, 150, 200), mean_reward(r.log, 0, 50));
    for (const auto& e : r.log) EXPECT_TRUE(std::isfinite(e.mean_reward));
}

TEST(Trainer, SeedDeterminism) {
    const TrainResult a = train_mappo(env(Mode::coordinated), quick(16, 5));
    const TrainResult b = train_mappo(env(Mode::coordinated), quick(16, 5));
    const TrainResult c = train_mappo(env(Mode::coordinated), quick(16, 6));
    ASSERT_EQ(a.log.size(), b.log.size());
    for (std::size_t k = 0; k < a.log.size(); ++k) EXPECT_EQ(format_log_row(a.log[k]), format_log_row(b.log[k]));
    EXPECT_EQ(a.policy.actors[0].mean_net.parameters(), b.policy.actors[0].mean_net.parameters());
    EXPECT_NE(format_log_row(a.log.back()), format_log_row(c.log.back()));
}

TEST(Trainer, ZeroLearningRateLeavesParameters) {
    TrainConfig cfg = quick(8);
    cfg.actor_lr = 0.0;
    cfg.critic_lr = 0.0;
    std::mt19937_64 rng(cfg.seed);
    const DispatchEnv e = env(Mode::coordinated);
    const PolicySet init = make_policy(Mode::coordinated, EnvConfig{}.observation, e.scales(), cfg, rng);
    const TrainResult r = train_mappo(e, cfg);
    for (int i = 0; i < kCommunities; ++i) {
        EXPECT_EQ(r.policy.actors[i].mean_net.parameters(), init.actors[i].mean_net.parameters());
        EXPECT_EQ(r.policy.actors[i].log_std, init.actors[i].log_std);
    }
    EXPECT_EQ(r.policy.critics[0].parameters(), init.critics[0].parameters());
}

TEST(Trainer, PolicyShapes) {
    std::mt19937_64 rng(1);
    const DispatchEnv e = env(Mode::coordinated);
    const PolicySet shared = make_policy(Mode::coordinated, Observation::local, e.scales(), TrainConfig{}, rng);
    EXPECT_EQ(shared.critics.size(), 1u);
    EXPECT_EQ(shared.critics[0].input_dim(), kStateDim);
    EXPECT_EQ(shared.actors[0].mean_net.sizes(), (std::vector<int>{4, 128, 128, 8}));
    const PolicySet solo = make_policy(Mode::independent, Observation::local, e.scales(), TrainConfig{}, rng);
    EXPECT_EQ(solo.critics.size(), 3u);
    EXPECT_EQ(solo.critics[1].input_dim(), 4);
    EXPECT_EQ(solo.actors[2].active[kActPExch], 0.0);
    EXPECT_EQ(solo.actors[2].active[kActHExch], 0.0);
}

TEST(Trainer, IndependentModeNeverExchanges) {
    const TrainResult r = train_independent(env(Mode::independent), quick(16));
    EXPECT_EQ(r.policy.critics.size(), 3u);
    const Schedule s = greedy_rollout(r.policy, env(Mode::independent));
    for (const auto& m : s)
        for (const auto& d : m.decisions) {
            EXPECT_EQ(d.p_exch, 0.0);
            EXPECT_EQ(d.h_exch, 0.0);
        }
}

TEST(Trainer, ModeMismatchRejected) {
    EXPECT_THROW(train_mappo(env(Mode::independent), quick(4)), ContractViolation);
    EXPECT_THROW(train_independent(env(Mode::coordinated), quick(4)), ContractViolation);
}

TEST(TrainConfig, Validation) {
    TrainConfig c;
    EXPECT_NO_THROW(c.validate());
    EXPECT_EQ(c.episodes_per_update(), 4);
    c.batch = 50;
    EXPECT_THROW(c.validate(), SchemaError);
    c = TrainConfig{};
    c.discount = 0.0;
    EXPECT_THROW(c.validate(), SchemaError);
    c = TrainConfig{};
    c.minibatch = 200;
    EXPECT_THROW(c.validate(), SchemaError);
}

TEST(DivergenceDetector, NonFiniteRewardAborts) {
    DivergenceDetector d(500, 50);
    d.observe(1, 1.0);
    EXPECT_THROW(d.observe(2, std::nan("")), DivergenceError);
}

TEST(DivergenceDetector, SustainedCollapseAborts) {
    DivergenceDetector d(100, 10);
    for (int k = 0; k < 200; ++k) d.observe(k, k < 100 ? 0.01 * k : 1.0);
    int k = 0;
    EXPECT_THROW(
        {
            for (; k < 1000; ++k) d.observe(200 + k, -5.0 - 0.01 * k);
        },
        DivergenceError);
    EXPECT_GE(k, 99);
}

TEST(DivergenceDetector, NoisyPlateauPasses) {
    DivergenceDetector d(500, 50);
    std::mt19937_64 rng(7);
    std::normal_distribution<double> noise(0.0, 0.1);
    for (int k = 0; k < 5000; ++k) EXPECT_NO_THROW(d.observe(k, 5.0 + noise(rng)));
}
