#include "ies/evaluation.hpp"
#include "ies/oracle.hpp"
#include "ies/scenario.hpp"

#include <gtest/gtest.h>

using namespace ies;

namespace {

double schedule_cost(const Schedule& s) {
    double c = 0.0;
    for (const auto& m : s) c += m.cost.total;
    return c;
}

const ScenarioData& default_scenario() {
    static const ScenarioData sc = generate_scenario(GeneratorSpec{});
    return sc;
}

}  // namespace

TEST(Oracle, ZeroLoadsRunTheForcedMinimum) {
    const SystemConfig sys;
    const OracleResult r = oracle_dispatch({Loads{}, Loads{}, Loads{}}, {0.0, 0.0, 0.0}, sys);
    EXPECT_FALSE(r.feasible);
    for (const auto& d : r.decisions) {
        EXPECT_EQ(d.p_chp, 1000.0);
        EXPECT_EQ(d.h_chp(), 0.0);
        EXPECT_EQ(d.p_gt, 0.0);
        EXPECT_EQ(d.h_gb, 0.0);
        EXPECT_EQ(d.w_rate, 0.0);
    }
    EXPECT_NEAR(r.penalty, 3000.0, 1e-6);
}

TEST(Oracle, IsolatedCommunityUsesChpThenCogeneration) {
    const SystemConfig sys;
    OracleOptions opt;
    opt.allow_exchange = false;
    const OracleResult r =
        oracle_dispatch({Loads{8000.0, 0.0, 0.0}, Loads{1000.0, 0.0, 0.0}, Loads{1000.0, 0.0, 0.0}}, {0.0, 0.0, 0.0}, sys, opt);
    ASSERT_TRUE(r.feasible);
    const DispatchDecision& d = r.decisions[0];
    EXPECT_NEAR(d.p_chp, 5000.0, 1e-6);
    EXPECT_NEAR(d.p_cwp(sys.communities[0].ro), 3000.0, 1e-6);
    EXPECT_NEAR(d.p_gt, 0.0, 1e-6);
    const double expected = gas_cost(5000.0, 0.9, sys.price) + gas_cost(3000.0, 0.4, sys.price);
    EXPECT_NEAR(r.cost.community[0], expected, 1e-6);
}

TEST(Oracle, SymmetricLoadsNeedNoExchange) {
    const SystemConfig sys;
    const Loads l{3000.0, 1500.0, 80.0};
    const OracleResult r = oracle_dispatch({l, l, l}, {0.0, 0.0, 0.0}, sys);
    ASSERT_TRUE(r.feasible);
    for (const auto& d : r.decisions) {
        EXPECT_EQ(d.p_exch, 0.0);
        EXPECT_EQ(d.h_exch, 0.0);
    }
}

TEST(Oracle, NestedGridsNeverIncreaseCost) {
    const SystemConfig sys;
    double prev = std::numeric_limits<double>::infinity();
    for (int n : {3, 5, 9, 17}) {
        OracleOptions opt;
        opt.grid_n = n;
        const double c = schedule_cost(oracle_rollout(default_scenario(), sys, EnvConfig{}, opt));
        EXPECT_LE(c, prev + 1e-6) << "grid " << n;
        prev = c;
    }
}

TEST(Oracle, SwappingTwoCommunitiesPermutesTheDispatch) {
    const SystemConfig sys;
    const ScenarioData& sc = default_scenario();
    for (int t = 0; t < kSteps; ++t) {
        const auto l = sc.loads(t);
        const auto w = sc.wind(t);
        const OracleResult a = oracle_dispatch(l, w, sys);
        const OracleResult b = oracle_dispatch({l[1], l[0], l[2]}, {w[1], w[0], w[2]}, sys);
        EXPECT_NEAR(a.cost.total, b.cost.total, 1e-9 * a.cost.total) << t;
        EXPECT_NEAR(a.cost.community[0], b.cost.community[1], 1e-9 * a.cost.total) << t;
        EXPECT_NEAR(a.decisions[0].p_exch, b.decisions[1].p_exch, 1e-6) << t;
        EXPECT_NEAR(a.decisions[2].p_chp, b.decisions[2].p_chp, 1e-6) << t;
    }
}

TEST(Oracle, DefaultScenarioBalancedWithoutCurtailment) {
    const SystemConfig sys;
    std::vector<int> infeasible;
    const Schedule s = oracle_rollout(default_scenario(), sys, EnvConfig{}, OracleOptions{}, &infeasible);
    EXPECT_TRUE(infeasible.empty());
    double curtailed = 0.0;
    for (const auto& m : s) {
        EXPECT_LE(m.total_penalty(), 1e-6) << m.step;
        EXPECT_EQ(exchange_violation(m.decisions, sys, 1e-6), "") << m.step;
        for (int c = 0; c < kCommunities; ++c) EXPECT_EQ(box_violation(m.decisions[c], sys.communities[c], 1.0, 1e-9), "");
        curtailed += m.total_curtailed();
    }
    EXPECT_LE(curtailed, 1e-6);
}

TEST(Oracle, ExchangeSavesOnTheDefaultScenario) {
    const SystemConfig sys;
    OracleOptions iso;
    iso.allow_exchange = false;
    const Schedule coordinated = oracle_rollout(default_scenario(), sys, EnvConfig{}, OracleOptions{});
    const Schedule isolated = oracle_rollout(default_scenario(), sys, EnvConfig{}, iso);
    double pen = 0.0;
    for (const auto& m : isolated) pen += m.total_penalty();
    // isolation forces surplus at night that has to be curtailed or penalised
    EXPECT_LT(schedule_cost(coordinated), schedule_cost(isolated) + 2.0 * pen);
}

TEST(Oracle, DecoupledScenarioNeedsNoExchange) {
    const SystemConfig sys;
    GeneratorSpec spec;
    spec.profile = "decoupled";
    const ScenarioData sc = generate_scenario(spec);
    OracleOptions iso;
    iso.allow_exchange = false;
    const Schedule with = oracle_rollout(sc, sys, EnvConfig{}, OracleOptions{});
    const Schedule without = oracle_rollout(sc, sys, EnvConfig{}, iso);
    for (const auto& m : with) {
        EXPECT_LE(m.total_penalty(), 1e-6) << m.step;
        for (const auto& d : m.decisions) {
            EXPECT_LE(std::abs(d.p_exch), 1e-6) << m.step;
            EXPECT_LE(std::abs(d.h_exch), 1e-6) << m.step;
        }
    }
    EXPECT_NEAR(schedule_cost(with), schedule_cost(without), 1e-9 * schedule_cost(without));
}

TEST(Oracle, RejectsTinyGrid) {
    OracleOptions opt;
    opt.grid_n = 2;
    EXPECT_THROW(oracle_dispatch({Loads{}, Loads{}, Loads{}}, {0.0, 0.0, 0.0}, SystemConfig{}, opt), ContractViolation);
}
