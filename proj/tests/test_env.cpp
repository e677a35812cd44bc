#include "ies/env.hpp"
#include "ies/scenario.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace ies;

namespace {

ActionVector filled(double v) {
    ActionVector a;
    a.fill(v);
    return a;
}

DispatchEnv make_env(Mode mode, const ScenarioData& sc = generate_scenario(GeneratorSpec{})) {
    return DispatchEnv(sc, SystemConfig{}, EnvConfig{}, mode);
}

}  // namespace

TEST(DecodeAction, EndpointsAndMidpoint) {
    const CommunityConfig cfg;
    const DispatchDecision lo = decode_action(filled(-1.0), cfg, 1000.0, 1000.0);
    EXPECT_EQ(lo.p_chp, 1000.0);
    EXPECT_EQ(lo.b_chp, 0.0);
    EXPECT_EQ(lo.p_tp, 0.0);
    EXPECT_EQ(lo.w_rate, 0.0);
    EXPECT_EQ(lo.p_exch, -1000.0);
    const DispatchDecision hi = decode_action(filled(1.0), cfg, 1000.0, 1000.0);
    EXPECT_EQ(hi.p_chp, 5000.0);
    EXPECT_EQ(hi.b_chp, 1.4);
    EXPECT_EQ(hi.p_tp, 5000.0);
    EXPECT_EQ(hi.w_rate, 500.0);
    EXPECT_EQ(hi.p_gt, 3000.0);
    EXPECT_EQ(hi.h_gb, 3000.0);
    EXPECT_EQ(hi.h_exch, 1000.0);
    const DispatchDecision mid = decode_action(filled(0.0), cfg, 1000.0, 1000.0);
    EXPECT_EQ(mid.p_chp, 3000.0);
    EXPECT_EQ(mid.p_gt, 1500.0);
    EXPECT_EQ(mid.p_exch, 0.0);
    // out-of-range actions are clamped
    EXPECT_EQ(decode_action(filled(7.0), cfg, 1000.0, 1000.0), hi);
}

TEST(DecodeAction, AffinePartIsBijective) {
    const CommunityConfig cfg;
    const ActionBounds b = action_bounds(cfg, 1000.0, 1000.0, 1.0);
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 2000; ++k) {
        ActionVector a;
        for (double& x : a) x = u(rng);
        const ActionVector back = encode_affine(decode_affine(a, b), b);
        for (int i = 0; i < kActionDim; ++i) ASSERT_NEAR(back[i], a[i], 1e-12);
    }
}

TEST(StepReward, Examples) {
    const std::array<double, 3> zero{};
    EXPECT_EQ(step_reward(0.0, zero, 1e5, 10.0, 2.0), 10.0);
    // a full-day cost booked step by step
    double sum = 0.0;
    for (int t = 0; t < 24; ++t) sum += step_reward(313388.8 / 24.0, zero, 1e5, 10.0, 2.0);
    EXPECT_NEAR(sum, 240.0 - 3.133888, 1e-9);
    const std::array<double, 3> pen{100.0, 0.0, 50.0};
    EXPECT_NEAR(10.0 - step_reward(1000.0, pen, 2e5, 10.0, 2.0), 0.5 * (10.0 - step_reward(1000.0, pen, 1e5, 10.0, 2.0)), 1e-15);
    EXPECT_THROW(step_reward(0.0, zero, 0.0, 10.0, 2.0), ContractViolation);
}

TEST(StepReward, BoundedByOffset) {
    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> u(0.0, 1e5);
    for (int k = 0; k < 1000; ++k) {
        const std::array<double, 3> pen{u(rng), u(rng), u(rng)};
        EXPECT_LE(step_reward(u(rng), pen, 1e5, 10.0, 2.0), 10.0);
    }
}

TEST(DispatchEnv, EpisodeRunsTwentyFourSteps) {
    DispatchEnv env = make_env(Mode::coordinated);
    env.reset();
    const std::array<ActionVector, 3> acts{filled(0.0), filled(0.0), filled(0.0)};
    for (int t = 0; t < kSteps; ++t) {
        const StepOutcome o = env.step(acts);
        EXPECT_EQ(o.done, t == kSteps - 1);
        EXPECT_EQ(o.metrics.step, t);
        EXPECT_LE(o.reward, 10.0);
    }
    EXPECT_THROW(env.step(acts), ContractViolation);
    env.reset();
    EXPECT_NO_THROW(env.step(acts));
}

TEST(DispatchEnv, RewardMatchesMetrics) {
    DispatchEnv env = make_env(Mode::coordinated);
    env.reset();
    const StepOutcome o = env.step({filled(0.3), filled(-0.2), filled(0.1)});
    const auto& m = o.metrics;
    EXPECT_NEAR(o.reward, 10.0 - (m.cost.total + 2.0 * m.total_penalty()) / 1e5, 1e-12);
    for (int c = 0; c < 3; ++c) {
        EXPECT_NEAR(o.local_rewards[c], 10.0 - (m.cost.community[c] + 2.0 * m.balances[c].penalty) / 1e5, 1e-12);
        EXPECT_EQ(box_violation(m.decisions[c], SystemConfig{}.communities[c]), "");
    }
    EXPECT_EQ(exchange_violation(m.decisions, SystemConfig{}), "");
}

TEST(DispatchEnv, IndependentModeMasksExchanges) {
    DispatchEnv env = make_env(Mode::independent);
    env.reset();
    std::mt19937_64 rng(47);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int t = 0; t < kSteps; ++t) {
        std::array<ActionVector, 3> acts{};
        for (auto& a : acts)
            for (double& x : a) x = u(rng);
        const StepOutcome o = env.step(acts);
        for (const auto& d : o.metrics.decisions) {
            EXPECT_EQ(d.p_exch, 0.0);
            EXPECT_EQ(d.h_exch, 0.0);
        }
    }
}

TEST(DispatchEnv, ExchangesAreProjected) {
    DispatchEnv env = make_env(Mode::coordinated);
    env.reset();
    const StepOutcome o = env.step({filled(1.0), filled(1.0), filled(-1.0)});
    const auto& d = o.metrics.decisions;
    EXPECT_EQ(exchange_violation(d, SystemConfig{}), "");
    EXPECT_GT(d[0].p_exch, 0.0);
    EXPECT_LT(d[2].p_exch, 0.0);
}

TEST(DispatchEnv, Deterministic) {
    DispatchEnv a = make_env(Mode::coordinated), b = make_env(Mode::coordinated);
    a.reset();
    b.reset();
    std::mt19937_64 rng(53);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int t = 0; t < kSteps; ++t) {
        std::array<ActionVector, 3> acts{};
        for (auto& x : acts)
            for (double& v : x) v = u(rng);
        const StepOutcome oa = a.step(acts), ob = b.step(acts);
        EXPECT_EQ(oa.reward, ob.reward);
        EXPECT_EQ(oa.next_state, ob.next_state);
    }
}

TEST(DispatchEnv, SymmetricScenarioGivesSymmetricRewards) {
    ScenarioData sc;
    for (int c = 0; c < 3; ++c)
        for (int t = 0; t < kSteps; ++t) sc.at(c, t) = StepData{3000.0, 1500.0, 60.0, 0.0};
    DispatchEnv env = make_env(Mode::coordinated, sc);
    env.reset();
    const StepOutcome o = env.step({filled(0.2), filled(0.2), filled(0.2)});
    EXPECT_EQ(o.local_rewards[0], o.local_rewards[1]);
    EXPECT_EQ(o.local_rewards[1], o.local_rewards[2]);
    EXPECT_EQ(o.metrics.decisions[0].p_exch, 0.0);
}

TEST(StateEncoding, ScaledLayout) {
    const ScenarioData sc = generate_scenario(GeneratorSpec{});
    const StateScales scales = StateScales::from_scenario(sc);
    const StateVector s = encode_state(sc, 5, scales);
    for (int c = 0; c < 3; ++c) {
        EXPECT_DOUBLE_EQ(s[c * 4 + 0], sc.at(c, 5).p_load / scales.value[c * 4 + 0]);
        EXPECT_DOUBLE_EQ(s[c * 4 + 1], sc.at(c, 5).h_load / scales.value[c * 4 + 1]);
        EXPECT_DOUBLE_EQ(s[c * 4 + 3], sc.at(c, 5).p_wind / scales.value[c * 4 + 3]);
    }
    // no wind anywhere in the industrial community: scale falls back to 1
    EXPECT_EQ(scales.value[3], 1.0);
    for (int t = 0; t < kSteps; ++t)
        for (double v : encode_state(sc, t, scales)) {
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 1.0);
        }
    EXPECT_THROW(encode_state(sc, 24, scales), ContractViolation);
}

TEST(StateEncoding, Observations) {
    StateVector s{};
    for (int i = 0; i < kStateDim; ++i) s[i] = i;
    EXPECT_EQ(observe(s, 1, Observation::local), (std::vector<double>{4, 5, 6, 7}));
    EXPECT_EQ(observe(s, 2, Observation::global).size(), 12u);
    EXPECT_EQ(observation_dim(Observation::local), 4);
    EXPECT_EQ(parse_mode("independent"), Mode::independent);
    EXPECT_THROW(parse_mode("central"), SchemaError);
}
