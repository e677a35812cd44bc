#pragma once

// Episode rollouts (greedy policy or per-step oracle), the schedule table and
// its cost and curtailment summary.

#include "ies/env.hpp"
#include "ies/learner/trainer.hpp"
#include "ies/oracle.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

namespace ies {

using Schedule = std::vector<StepMetrics>;

/// Deterministic rollout with every agent acting on its policy mean.
inline Schedule greedy_rollout(const learn::PolicySet& policy, DispatchEnv env) {
    Schedule out;
    StateVector s = env.reset();
    for (int t = 0; t < kSteps; ++t) {
        const StepOutcome o = env.step(policy.greedy_actions(s));
        out.push_back(o.metrics);
        s = o.next_state;
    }
    return out;
}

/// Runs the oracle independently on every interval. Infeasible intervals are
/// kept (with their residual penalty) and reported through `infeasible_steps`.
inline Schedule oracle_rollout(const ScenarioData& sc, const SystemConfig& sys, const EnvConfig& env,
                               const OracleOptions& opt, std::vector<int>* infeasible_steps = nullptr) {
    Schedule out;
    for (int t = 0; t < kSteps; ++t) {
        const OracleResult r = oracle_dispatch(sc.loads(t), sc.wind(t), sys, opt);
        StepMetrics m;
        m.step = t;
        m.decisions = r.decisions;
        m.balances = r.balances;
        m.wind_avail = sc.wind(t);
        m.cost = r.cost;
        std::array<double, kCommunities> pen{};
        for (int i = 0; i < kCommunities; ++i) {
            pen[i] = r.balances[i].penalty;
            const std::array<double, 1> own = {pen[i]};
            m.local_rewards[i] =
                step_reward(r.cost.community[i], own, env.reward_scale, env.reward_offset, env.penalty_kappa);
        }
        m.reward = step_reward(r.cost.total, pen, env.reward_scale, env.reward_offset, env.penalty_kappa);
        if (!r.feasible && infeasible_steps) infeasible_steps->push_back(t);
        out.push_back(m);
    }
    return out;
}

inline constexpr const char* kScheduleHeader =
    "step,community,p_chp_kw,b_chp,h_chp_kw,p_tp_kw,w_rate_m3h,p_cwp_kw,p_gt_kw,h_gb_kw,p_exch_kw,h_exch_kw,"
    "wind_avail_kw,wind_used_kw,curtailed_kw,d_elec_kw,d_heat_kw,d_water_m3h,penalty_kw,cost";

inline constexpr int kScheduleColumns = 20;

/// Schedule rows, one per interval and community, printed with six decimals.
/// Every row is checked against the device boxes and every interval against
/// the exchange limits before it is written.
inline std::string format_schedule(const Schedule& sched, const SystemConfig& sys) {
    std::ostringstream os;
    os << kScheduleHeader << '\n';
    for (const StepMetrics& m : sched) {
        if (const std::string v = exchange_violation(m.decisions, sys, 1e-6); !v.empty())
            throw LimitViolation(v, "schedule step " + std::to_string(m.step) + " violates " + v);
        for (int i = 0; i < kCommunities; ++i) {
            const DispatchDecision& d = m.decisions[i];
            const CommunityConfig& cfg = sys.communities[i];
            if (const std::string v = box_violation(d, cfg, sys.price.dt, 1e-9); !v.empty()) {
                throw LimitViolation(v, "schedule step " + std::to_string(m.step) + ", community " +
                                            std::to_string(i + 1) + " violates " + v);
            }
            const BalanceResult& b = m.balances[i];
            const double vals[] = {d.p_chp,  d.b_chp,     d.h_chp(),  d.p_tp,      d.w_rate,   d.p_cwp(cfg.ro),
                                   d.p_gt,   d.h_gb,      d.p_exch,   d.h_exch,    m.wind_avail[i], d.wind_used,
                                   b.curtailed, b.d_elec, b.d_heat,   b.d_water,   b.penalty,  m.cost.community[i]};
            os << m.step << ',' << (i + 1);
            char buf[64];
            for (double v : vals) {
                std::snprintf(buf, sizeof buf, ",%.6f", v == 0.0 ? 0.0 : v);
                os << buf;
            }
            os << '\n';
        }
    }
    return os.str();
}

struct ScheduleSummary {
    std::array<double, kCommunities> community_cost{};
    double total_cost = 0.0;
    double curtailed_kwh = 0.0;
    double wind_kwh = 0.0;
    double total_penalty = 0.0;
    double max_abs_exchange = 0.0;

    double curtailment_rate() const { return wind_kwh > 0.0 ? curtailed_kwh / wind_kwh : 0.0; }
};

/// Sums the printed row values of a schedule table, so totals match the
/// table exactly.
inline ScheduleSummary summarize_schedule_csv(const std::string& csv, double dt) {
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line) || line != kScheduleHeader) throw ParseError("schedule header mismatch", 1, 1);
    ScheduleSummary s;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        const std::vector<std::string> cells = scenario_detail::split(line, ',');
        if (cells.size() != static_cast<std::size_t>(kScheduleColumns))
            throw ParseError("expected 20 columns", row, cells.size());
        std::array<double, kScheduleColumns> v{};
        for (std::size_t k = 0; k < cells.size(); ++k) v[k] = std::strtod(cells[k].c_str(), nullptr);
        const int c = static_cast<int>(v[1]) - 1;
        if (c < 0 || c >= kCommunities) throw ParseError("community out of range", row, 2);
        s.community_cost[static_cast<std::size_t>(c)] += v[19];
        s.curtailed_kwh += v[14] * dt;
        s.wind_kwh += v[12] * dt;
        s.total_penalty += v[18];
        s.max_abs_exchange = std::max({s.max_abs_exchange, std::abs(v[10]), std::abs(v[11])});
    }
    s.total_cost = s.community_cost[0] + s.community_cost[1] + s.community_cost[2];
    return s;
}

inline nlohmann::json summary_json(const ScheduleSummary& s) {
    nlohmann::json j;
    j["community_cost"] = {{"industrial", s.community_cost[0]},
                           {"commercial", s.community_cost[1]},
                           {"residential", s.community_cost[2]}};
    j["total_cost"] = s.total_cost;
    j["curtailed_kwh"] = s.curtailed_kwh;
    j["wind_kwh"] = s.wind_kwh;
    j["curtailment_rate"] = s.curtailment_rate();
    j["total_penalty_kw"] = s.total_penalty;
    j["max_abs_exchange_kw"] = s.max_abs_exchange;
    return j;
}

/// Convenience: cost and curtailment of a schedule via its printed table.
inline ScheduleSummary summarize(const Schedule& sched, const SystemConfig& sys) {
    return summarize_schedule_csv(format_schedule(sched, sys), sys.price.dt);
}

}  // namespace ies
