#pragma once

// Day-ahead dispatch as a 24-step episodic decision process shared by three
// agents, one per community.
//
// State (12 entries, community-major): p_load, h_load, w_load, p_wind for
// communities 1, 2, 3, each divided by its normalisation scale.
//
// Action per agent (8 entries in [-1, 1]):
//   0 CHP electric output       4 gas turbine output
//   1 CHP heat-to-power ratio   5 gas boiler output
//   2 cogeneration gross output 6 electric exchange (import positive)
//   3 fresh-water rate          7 heat exchange (import positive)
// CHP heat follows from entries 0 and 1 and the net cogeneration export from
// entries 2 and 3, so the CHP coupling and the thermal-unit limit hold by
// construction. Heat exchange is an extra entry.

#include "ies/scenario.hpp"
#include "ies/system.hpp"

#include <algorithm>
#include <array>
#include <string>
#include <vector>

namespace ies {

inline constexpr int kActionDim = 8;
inline constexpr int kObsPerCommunity = 4;
inline constexpr int kStateDim = kCommunities * kObsPerCommunity;

using StateVector = std::array<double, kStateDim>;
using ActionVector = std::array<double, kActionDim>;

enum ActionIndex : int {
    kActPChp = 0,
    kActB = 1,
    kActPTp = 2,
    kActW = 3,
    kActPGt = 4,
    kActHGb = 5,
    kActPExch = 6,
    kActHExch = 7,
};

enum class Mode { independent, coordinated };

inline std::string to_string(Mode m) { return m == Mode::independent ? "independent" : "coordinated"; }

inline Mode parse_mode(const std::string& s) {
    if (s == "independent") return Mode::independent;
    if (s == "coordinated") return Mode::coordinated;
    throw SchemaError("mode must be 'independent' or 'coordinated', got '" + s + "'");
}

/// What each actor sees: its own community block or the full state.
enum class Observation { local, global };

struct EnvConfig {
    double reward_scale = 1e5;   ///< Z
    double reward_offset = 10.0; ///< U
    double penalty_kappa = 2.0;  ///< currency per kW-equivalent of imbalance
    Observation observation = Observation::local;

    void validate() const {
        if (!(reward_scale > 0.0)) throw SchemaError("env: reward_scale must be positive");
        if (!(penalty_kappa >= 0.0)) throw SchemaError("env: penalty_kappa must be non-negative");
    }
};

/// Per-entry divisors of the state vector.
struct StateScales {
    StateVector value{};

    /// Each entry's maximum over the day; 1 where the maximum is zero.
    static StateScales from_scenario(const ScenarioData& sc) {
        StateScales s;
        s.value.fill(0.0);
        for (int c = 0; c < kCommunities; ++c) {
            for (int t = 0; t < kSteps; ++t) {
                const StepData& d = sc.at(c, t);
                const double v[4] = {d.p_load, d.h_load, d.w_load, d.p_wind};
                for (int k = 0; k < kObsPerCommunity; ++k) {
                    auto& m = s.value[static_cast<std::size_t>(c * kObsPerCommunity + k)];
                    m = std::max(m, v[k]);
                }
            }
        }
        for (double& m : s.value)
            if (m <= 0.0) m = 1.0;
        return s;
    }
};

inline StateVector encode_state(const ScenarioData& sc, int t, const StateScales& scales) {
    if (t < 0 || t >= kSteps) throw ContractViolation("encode_state: step must lie in 0..23");
    StateVector s{};
    for (int c = 0; c < kCommunities; ++c) {
        const StepData& d = sc.at(c, t);
        const double v[4] = {d.p_load, d.h_load, d.w_load, d.p_wind};
        for (int k = 0; k < kObsPerCommunity; ++k) {
            const auto i = static_cast<std::size_t>(c * kObsPerCommunity + k);
            s[i] = v[k] / scales.value[i];
        }
    }
    return s;
}

/// Actor input for `agent` under the given observability.
inline std::vector<double> observe(const StateVector& s, int agent, Observation obs) {
    if (obs == Observation::global) return {s.begin(), s.end()};
    const auto first = s.begin() + agent * kObsPerCommunity;
    return {first, first + kObsPerCommunity};
}

inline int observation_dim(Observation obs) { return obs == Observation::global ? kStateDim : kObsPerCommunity; }

struct ActionBounds {
    std::array<double, kActionDim> lo{}, hi{};
};

inline ActionBounds action_bounds(const CommunityConfig& cfg, double p_exch_max, double h_exch_max, double dt) {
    ActionBounds b;
    b.lo = {cfg.chp.p_min, cfg.chp.b_min, cfg.ro.p_tp_min, 0.0, cfg.gt.out_min, cfg.gb.out_min, -p_exch_max, -h_exch_max};
    b.hi = {cfg.chp.p_max, cfg.chp.b_max, cfg.ro.p_tp_max, max_water_rate(cfg.ro, dt),
            cfg.gt.out_max, cfg.gb.out_max, p_exch_max, h_exch_max};
    return b;
}

inline double clamp_unit(double a) { return std::clamp(a, -1.0, 1.0); }

/// Affine map of the clamped action onto the physical boxes; no clipping of
/// coupled limits.
inline DispatchDecision decode_affine(const ActionVector& a, const ActionBounds& b) {
    std::array<double, kActionDim> x{};
    for (int i = 0; i < kActionDim; ++i) x[i] = b.lo[i] + (clamp_unit(a[i]) + 1.0) * 0.5 * (b.hi[i] - b.lo[i]);
    DispatchDecision d;
    d.p_chp = x[kActPChp];
    d.b_chp = x[kActB];
    d.p_tp = x[kActPTp];
    d.w_rate = x[kActW];
    d.p_gt = x[kActPGt];
    d.h_gb = x[kActHGb];
    d.p_exch = x[kActPExch];
    d.h_exch = x[kActHExch];
    return d;
}

/// Inverse of decode_affine.
inline ActionVector encode_affine(const DispatchDecision& d, const ActionBounds& b) {
    const std::array<double, kActionDim> x = {d.p_chp, d.b_chp, d.p_tp, d.w_rate, d.p_gt, d.h_gb, d.p_exch, d.h_exch};
    ActionVector a{};
    for (int i = 0; i < kActionDim; ++i) {
        const double span = b.hi[i] - b.lo[i];
        a[i] = span > 0.0 ? 2.0 * (x[i] - b.lo[i]) / span - 1.0 : 0.0;
    }
    return a;
}

/// Clamps to [-1, 1], maps affinely and clips device limits. Exchanges are
/// projected jointly by the step function.
inline DispatchDecision decode_action(const ActionVector& a, const CommunityConfig& cfg, double p_exch_max,
                                      double h_exch_max, double dt = 1.0) {
    return clip_to_limits(decode_affine(a, action_bounds(cfg, p_exch_max, h_exch_max, dt)), cfg, dt);
}

/// Team reward: U - (cost + kappa * sum of imbalances) / Z.
template <class Penalties>
double step_reward(double cost, const Penalties& penalties, double z, double u, double kappa) {
    if (!(z > 0.0)) throw ContractViolation("step_reward: scale must be positive");
    double d = 0.0;
    for (double p : penalties) d += p;
    return u - (cost + kappa * d) / z;
}

struct StepMetrics {
    int step = 0;
    std::array<DispatchDecision, kCommunities> decisions{};
    std::array<BalanceResult, kCommunities> balances{};
    std::array<double, kCommunities> wind_avail{};
    CostBreakdown cost;
    double reward = 0.0;
    std::array<double, kCommunities> local_rewards{};

    double total_penalty() const {
        return balances[0].penalty + balances[1].penalty + balances[2].penalty;
    }
    double total_curtailed() const {
        return balances[0].curtailed + balances[1].curtailed + balances[2].curtailed;
    }
};

struct StepOutcome {
    double reward = 0.0;
    std::array<double, kCommunities> local_rewards{};
    StateVector next_state{};
    bool done = false;
    StepMetrics metrics;
};

/// Value-semantics episode engine over a fixed scenario.
class DispatchEnv {
public:
    DispatchEnv(ScenarioData scenario, SystemConfig sys, EnvConfig cfg, Mode mode)
        : DispatchEnv(std::move(scenario), std::move(sys), cfg, mode, StateScales{}) {
        scales_ = StateScales::from_scenario(scenario_);
    }

    DispatchEnv(ScenarioData scenario, SystemConfig sys, EnvConfig cfg, Mode mode, StateScales scales)
        : scenario_(std::move(scenario)), sys_(std::move(sys)), cfg_(cfg), mode_(mode), scales_(scales) {
        sys_.validate();
        cfg_.validate();
    }

    StateVector reset() {
        t_ = 0;
        return encode_state(scenario_, 0, scales_);
    }

    StepOutcome step(const std::array<ActionVector, kCommunities>& actions) {
        if (t_ < 0 || t_ >= kSteps) throw ContractViolation("DispatchEnv::step: episode finished, call reset()");
        StepOutcome out;
        StepMetrics& m = out.metrics;
        m.step = t_;
        const double dt = sys_.price.dt;

        std::array<double, kCommunities> px{}, hx{};
        for (int i = 0; i < kCommunities; ++i) {
            ActionVector a = actions[i];
            if (mode_ == Mode::independent) {
                a[kActPExch] = 0.0;
                a[kActHExch] = 0.0;
            }
            m.decisions[i] = decode_action(a, sys_.communities[i], sys_.p_exch_max, sys_.h_exch_max, dt);
            px[i] = m.decisions[i].p_exch;
            hx[i] = m.decisions[i].h_exch;
        }
        const auto [pp, hh] = project_exchanges(px, hx, sys_.p_exch_max, sys_.h_exch_max);

        std::array<double, kCommunities> penalties{};
        for (int i = 0; i < kCommunities; ++i) {
            DispatchDecision& d = m.decisions[i];
            d.p_exch = pp[i];
            d.h_exch = hh[i];
            const StepData& sd = scenario_.at(i, t_);
            m.wind_avail[i] = sd.p_wind;
            m.balances[i] = power_balance(d, sd.loads(), sd.p_wind, sys_.communities[i], sys_.pipeline_options, dt);
            d.wind_used = sd.p_wind - m.balances[i].curtailed;
            penalties[i] = m.balances[i].penalty;
        }
        m.cost = total_cost(m.decisions, sys_);
        m.reward = step_reward(m.cost.total, penalties, cfg_.reward_scale, cfg_.reward_offset, cfg_.penalty_kappa);
        for (int i = 0; i < kCommunities; ++i) {
            const std::array<double, 1> own = {penalties[i]};
            m.local_rewards[i] = step_reward(m.cost.community[i], own, cfg_.reward_scale, cfg_.reward_offset,
                                             cfg_.penalty_kappa);
        }
        out.reward = m.reward;
        out.local_rewards = m.local_rewards;
        out.done = (t_ == kSteps - 1);
        out.next_state = encode_state(scenario_, out.done ? t_ : t_ + 1, scales_);
        ++t_;
        return out;
    }

    int time() const { return t_; }
    Mode mode() const { return mode_; }
    const ScenarioData& scenario() const { return scenario_; }
    const SystemConfig& system() const { return sys_; }
    const EnvConfig& config() const { return cfg_; }
    const StateScales& scales() const { return scales_; }

private:
    ScenarioData scenario_;
    SystemConfig sys_;
    EnvConfig cfg_;
    Mode mode_;
    StateScales scales_;
    int t_ = 0;
};

}  // namespace ies
