#pragma once

// Exhaustive grid-search dispatch used as a validation baseline.
//
// Free controls per community are the CHP output, the heat-to-power ratio and
// the gross cogeneration output, plus the electric and heat exchanges. The
// remaining setpoints are balancing slacks: the water rate follows the water
// load, the boiler covers the residual heat and the gas turbine the residual
// electricity net of wind. Given the CHP output, the electric and the heat
// sides of a community are independent, so the search over the full grid is
// evaluated per side and recombined exactly.

#include "ies/system.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

namespace ies {

struct OracleResult {
    std::array<DispatchDecision, kCommunities> decisions{};
    std::array<BalanceResult, kCommunities> balances{};
    CostBreakdown cost;
    double penalty = 0.0;
    bool feasible = false;
};

struct OracleOptions {
    int grid_n = 21;
    bool allow_exchange = true;
    bool refine = true;
    double feasibility_tol = 1e-6;  ///< kW-equivalent
};

namespace oracle_detail {

struct Score {
    double pen = 0.0;
    double cost = 0.0;
    double exch_p = 0.0;
    double exch_h = 0.0;
    double output = 0.0;

    Score& operator+=(const Score& o) {
        pen += o.pen;
        cost += o.cost;
        exch_p += o.exch_p;
        exch_h += o.exch_h;
        output += o.output;
        return *this;
    }
    friend Score operator+(Score a, const Score& b) { return a += b; }
};

inline bool near(double a, double b, double rel) {
    return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

// Lexicographic: penalty (zero below tol), cost, |p exchange|, |h exchange|, output.
inline bool better(const Score& a, const Score& b, double tol) {
    const double pa = a.pen > tol ? a.pen : 0.0;
    const double pb = b.pen > tol ? b.pen : 0.0;
    if (!near(pa, pb, 1e-9)) return pa < pb;
    if (!near(a.cost, b.cost, 1e-9)) return a.cost < b.cost;
    if (!near(a.exch_p, b.exch_p, 1e-9)) return a.exch_p < b.exch_p;
    if (!near(a.exch_h, b.exch_h, 1e-9)) return a.exch_h < b.exch_h;
    if (!near(a.output, b.output, 1e-9)) return a.output < b.output;
    return false;
}

inline double grid_value(double lo, double hi, int k, int n) {
    if (n <= 1) return lo;
    if (k == n - 1) return hi;
    return lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
}

// Fills the slack setpoints of a community given its free controls. The
// gridded ratio and cogeneration output act as upper bounds: both are lowered
// when they would over-supply, so surplus is never produced just because the
// grid is coarse.
inline DispatchDecision complete(DispatchDecision d, const Loads& loads, double wind, const CommunityConfig& cfg,
                                 const SystemConfig& sys) {
    const double dt = sys.price.dt;
    d = clip_to_limits(d, cfg, dt);
    d.w_rate = std::clamp(loads.w, 0.0, std::min(max_water_rate(cfg.ro, dt), d.p_tp / cfg.ro.q_coeff));
    const double heat_needed = heat_demand(d, loads.h, cfg, sys.pipeline_options) - d.h_exch;
    if (d.p_chp > 0.0 && d.h_chp() > heat_needed)
        d.b_chp = std::clamp(heat_needed / d.p_chp, cfg.chp.b_min, d.b_chp);
    d.h_gb = std::clamp(heat_needed - d.h_chp(), cfg.gb.out_min, cfg.gb.out_max);
    const double elec_needed = loads.p - d.p_exch - wind;
    const double surplus = d.p_chp + d.p_cwp(cfg.ro) - elec_needed;
    if (surplus > 0.0) {
        const double floor = std::max(cfg.ro.p_tp_min, cfg.ro.q_coeff * d.w_rate);
        d.p_tp = std::max(floor, d.p_tp - surplus);
    }
    d.p_gt = std::clamp(elec_needed - d.p_chp - d.p_cwp(cfg.ro), cfg.gt.out_min, cfg.gt.out_max);
    return d;
}

inline Score electric_score(const DispatchDecision& d, const BalanceResult& bal, const CommunityConfig& cfg,
                            const FuelPrice& price) {
    Score s;
    s.pen = bal.d_elec + cfg.ro.q_coeff * bal.d_water;
    s.cost = gas_cost(d.p_chp, cfg.chp.eta, price)
           + cogen_cost(cfg.ro, std::max(0.0, d.p_cwp(cfg.ro)), d.w_rate, price)
           + gas_unit_cost(cfg.gt, d.p_gt, price);
    s.exch_p = std::abs(d.p_exch);
    s.output = d.p_chp + d.p_tp + d.p_gt;
    return s;
}

inline Score heat_score(const DispatchDecision& d, const BalanceResult& bal, const CommunityConfig& cfg,
                        const FuelPrice& price) {
    Score s;
    s.pen = bal.d_heat;
    s.cost = gas_cost(d.h_chp(), cfg.chp.eta, price) + gas_unit_cost(cfg.gb, d.h_gb, price);
    s.exch_h = std::abs(d.h_exch);
    s.output = d.h_chp() + d.h_gb;
    return s;
}

inline Score full_score(const DispatchDecision& d, const Loads& loads, double wind, const CommunityConfig& cfg,
                        const SystemConfig& sys) {
    const BalanceResult bal = power_balance(d, loads, wind, cfg, sys.pipeline_options, sys.price.dt);
    return electric_score(d, bal, cfg, sys.price) + heat_score(d, bal, cfg, sys.price);
}

struct Controls {
    std::array<double, kCommunities> p_chp{}, b{}, p_tp{}, px{}, hx{};
};

inline std::array<DispatchDecision, kCommunities> build(const Controls& c, const std::array<Loads, kCommunities>& loads,
                                                        const std::array<double, kCommunities>& wind,
                                                        const SystemConfig& sys) {
    std::array<DispatchDecision, kCommunities> out{};
    for (int i = 0; i < kCommunities; ++i) {
        DispatchDecision d;
        d.p_chp = c.p_chp[i];
        d.b_chp = c.b[i];
        d.p_tp = c.p_tp[i];
        d.p_exch = c.px[i];
        d.h_exch = c.hx[i];
        out[i] = complete(d, loads[i], wind[i], sys.communities[i], sys);
    }
    return out;
}

inline Score system_score(const Controls& c, const std::array<Loads, kCommunities>& loads,
                          const std::array<double, kCommunities>& wind, const SystemConfig& sys) {
    const auto ds = build(c, loads, wind, sys);
    Score total;
    for (int i = 0; i < kCommunities; ++i) total += full_score(ds[i], loads[i], wind[i], sys.communities[i], sys);
    return total;
}


/// Sends curtailed wind to other communities that can still ramp down (gas
/// turbine first, then cogeneration, then CHP at constant heat), keeping each
/// transfer only if the score improves.
inline void absorb_curtailment(Controls& ctl, Score& cur, const std::array<Loads, kCommunities>& loads,
                               const std::array<double, kCommunities>& wind, const SystemConfig& sys, double tol) {
    for (int pass = 0; pass < 8; ++pass) {
        for (int e = 0; e < kCommunities; ++e) {
            for (int i = 0; i < kCommunities; ++i) {
                if (i == e) continue;
                const auto ds = build(ctl, loads, wind, sys);
                const BalanceResult be = power_balance(ds[e], loads[e], wind[e], sys.communities[e],
                                                       sys.pipeline_options, sys.price.dt);
                if (be.curtailed <= 0.0) break;
                const CommunityConfig& ci = sys.communities[i];
                const DispatchDecision& di = ds[i];
                const double floor_net = std::max(ci.ro.p_tp_min, ci.ro.q_coeff * di.w_rate) - ci.ro.q_coeff * di.w_rate;
                const double room = (di.p_gt - ci.gt.out_min) + (di.p_cwp(ci.ro) - floor_net) + (di.p_chp - ci.chp.p_min);
                double delta = std::min({be.curtailed, room, sys.p_exch_max - ctl.px[i], sys.p_exch_max + ctl.px[e]});
                if (ctl.px[i] >= 0.0 && ctl.px[e] <= 0.0) {
                    const double sum_abs = std::abs(ctl.px[0]) + std::abs(ctl.px[1]) + std::abs(ctl.px[2]);
                    delta = std::min(delta, 0.5 * (2.0 * sys.p_exch_max - sum_abs));
                }
                for (int k = 0; k < 40 && delta > 1e-9; ++k, delta *= 0.5) {
                    Controls trial = ctl;
                    trial.px[i] += delta;
                    trial.px[e] -= delta;
                    const double sum_abs = std::abs(trial.px[0]) + std::abs(trial.px[1]) + std::abs(trial.px[2]);
                    if (std::abs(trial.px[i]) > sys.p_exch_max + 1e-9 || std::abs(trial.px[e]) > sys.p_exch_max + 1e-9
                        || sum_abs > 2.0 * sys.p_exch_max + 1e-9)
                        continue;
                    const double need = loads[i].p - trial.px[i] - wind[i];
                    const double min_other = floor_net + ci.gt.out_min;
                    if (di.p_chp + min_other > need) {
                        const double h = di.h_chp();
                        trial.p_chp[i] = std::max(ci.chp.p_min, need - min_other);
                        trial.b[i] = std::min(ci.chp.b_max, h / trial.p_chp[i]);
                    }
                    const Score s = system_score(trial, loads, wind, sys);
                    if (better(s, cur, tol)) {
                        ctl = trial;
                        cur = s;
                        break;
                    }
                }
            }
        }
    }
}

/// Replaces transfers by local CHP output where that costs no more. The grid
/// often settles on an exchange that only compensates for the coarse CHP
/// steps; moving the same energy into the importer's CHP is then a tie.
inline void unwind_exchanges(Controls& ctl, Score& cur, const std::array<Loads, kCommunities>& loads,
                             const std::array<double, kCommunities>& wind, const SystemConfig& sys, double tol) {
    for (int pass = 0; pass < 4; ++pass) {
        for (int i = 0; i < kCommunities; ++i) {
            for (int j = 0; j < kCommunities; ++j) {
                if (i == j) continue;
                const CommunityConfig& ci = sys.communities[i];
                const CommunityConfig& cj = sys.communities[j];
                // electric: i imports from j
                double delta = std::min(ctl.px[i], -ctl.px[j]);
                for (int k = 0; k < 30 && delta > 1e-9; ++k, delta *= 0.5) {
                    Controls trial = ctl;
                    trial.px[i] -= delta;
                    trial.px[j] += delta;
                    const double hi_heat = ctl.b[i] * ctl.p_chp[i], hj_heat = ctl.b[j] * ctl.p_chp[j];
                    trial.p_chp[i] = std::min(ci.chp.p_max, ctl.p_chp[i] + delta);
                    trial.p_chp[j] = std::max(cj.chp.p_min, ctl.p_chp[j] - delta);
                    trial.b[i] = std::clamp(hi_heat / trial.p_chp[i], ci.chp.b_min, ci.chp.b_max);
                    trial.b[j] = std::clamp(hj_heat / trial.p_chp[j], cj.chp.b_min, cj.chp.b_max);
                    const Score s = system_score(trial, loads, wind, sys);
                    if (better(s, cur, tol)) {
                        ctl = trial;
                        cur = s;
                        break;
                    }
                }
                // heat: i imports from j
                delta = std::min(ctl.hx[i], -ctl.hx[j]);
                for (int k = 0; k < 30 && delta > 1e-9; ++k, delta *= 0.5) {
                    Controls trial = ctl;
                    trial.hx[i] -= delta;
                    trial.hx[j] += delta;
                    if (ctl.p_chp[i] > 0.0)
                        trial.b[i] = std::clamp(ctl.b[i] + delta / ctl.p_chp[i], ci.chp.b_min, ci.chp.b_max);
                    if (ctl.p_chp[j] > 0.0)
                        trial.b[j] = std::clamp(ctl.b[j] - delta / ctl.p_chp[j], cj.chp.b_min, cj.chp.b_max);
                    const Score s = system_score(trial, loads, wind, sys);
                    if (better(s, cur, tol)) {
                        ctl = trial;
                        cur = s;
                        break;
                    }
                }
            }
        }
    }
}

}  // namespace oracle_detail

/// Cheapest zero-penalty dispatch for one interval on a grid of `grid_n`
/// points per control, followed by one coordinate-descent pass at ten times
/// the resolution. When no grid point balances every community the
/// minimal-penalty point is returned with `feasible == false`.
/// Deterministic; ties go to smaller exchanges, then smaller total output.
inline OracleResult oracle_dispatch(const std::array<Loads, kCommunities>& loads,
                                    const std::array<double, kCommunities>& wind, const SystemConfig& sys,
                                    const OracleOptions& opt = {}) {
    using namespace oracle_detail;
    if (opt.grid_n < 3) throw ContractViolation("oracle_dispatch: grid_n must be at least 3");
    const int n = opt.grid_n;
    const double tol = opt.feasibility_tol;

    // Exchange offsets k in [-K, K]; value k * step, so zero is always on the grid.
    const int K = opt.allow_exchange ? (n - 1 + 1) / 2 : 0;
    const int ne = 2 * K + 1;
    const double p_step = K > 0 ? sys.p_exch_max / K : 0.0;
    const double h_step = K > 0 ? sys.h_exch_max / K : 0.0;

    struct Cell {
        Score score;
        int chp = 0, b = 0, tp = 0;
    };
    // best[c][op][oh]
    std::vector<Cell> best(static_cast<std::size_t>(kCommunities * ne * ne));
    auto cell = [&](int c, int op, int oh) -> Cell& {
        return best[static_cast<std::size_t>((c * ne + op) * ne + oh)];
    };

    for (int c = 0; c < kCommunities; ++c) {
        const CommunityConfig& cfg = sys.communities[c];
        std::vector<Score> elec(static_cast<std::size_t>(ne)), heat(static_cast<std::size_t>(ne));
        std::vector<int> elec_arg(static_cast<std::size_t>(ne)), heat_arg(static_cast<std::size_t>(ne));
        for (int i = 0; i < n; ++i) {
            const double p_chp = grid_value(cfg.chp.p_min, cfg.chp.p_max, i, n);
            for (int o = 0; o < ne; ++o) {
                const double px = (o - K) * p_step;
                const double hx = (o - K) * h_step;
                bool have_e = false, have_h = false;
                for (int j = 0; j < n; ++j) {
                    DispatchDecision d;
                    d.p_chp = p_chp;
                    d.p_tp = grid_value(cfg.ro.p_tp_min, cfg.ro.p_tp_max, j, n);
                    d.p_exch = px;
                    d = complete(d, loads[c], wind[c], cfg, sys);
                    const BalanceResult bal = power_balance(d, loads[c], wind[c], cfg, sys.pipeline_options, sys.price.dt);
                    const Score s = electric_score(d, bal, cfg, sys.price);
                    if (!have_e || better(s, elec[o], tol)) {
                        elec[o] = s;
                        elec_arg[o] = j;
                        have_e = true;
                    }
                }
                for (int j = 0; j < n; ++j) {
                    DispatchDecision d;
                    d.p_chp = p_chp;
                    d.b_chp = grid_value(cfg.chp.b_min, cfg.chp.b_max, j, n);
                    d.h_exch = hx;
                    d = complete(d, loads[c], wind[c], cfg, sys);
                    const BalanceResult bal = power_balance(d, loads[c], wind[c], cfg, sys.pipeline_options, sys.price.dt);
                    const Score s = heat_score(d, bal, cfg, sys.price);
                    if (!have_h || better(s, heat[o], tol)) {
                        heat[o] = s;
                        heat_arg[o] = j;
                        have_h = true;
                    }
                }
            }
            for (int op = 0; op < ne; ++op) {
                for (int oh = 0; oh < ne; ++oh) {
                    const Score s = elec[op] + heat[oh];
                    Cell& target = cell(c, op, oh);
                    if (i == 0 || better(s, target.score, tol)) target = Cell{s, i, heat_arg[oh], elec_arg[op]};
                }
            }
        }
    }

    // Combine communities under conservation and the aggregate limits.
    Score best_total;
    bool have = false;
    std::array<int, kCommunities> bop{}, boh{};
    auto offsets_ok = [&](int a, int b) {
        const int c = -a - b;
        return std::abs(c) <= K && std::abs(a) + std::abs(b) + std::abs(c) <= 2 * K;
    };
    // Visit offsets in order of increasing magnitude so ties resolve toward zero.
    std::vector<int> order;
    order.push_back(0);
    for (int k = 1; k <= K; ++k) {
        order.push_back(-k);
        order.push_back(k);
    }
    for (int p0 : order) {
        for (int p1 : order) {
            if (!offsets_ok(p0, p1)) continue;
            const int p2 = -p0 - p1;
            for (int h0 : order) {
                for (int h1 : order) {
                    if (!offsets_ok(h0, h1)) continue;
                    const int h2 = -h0 - h1;
                    const Score s = cell(0, p0 + K, h0 + K).score + cell(1, p1 + K, h1 + K).score
                                  + cell(2, p2 + K, h2 + K).score;
                    if (!have || better(s, best_total, tol)) {
                        best_total = s;
                        bop = {p0, p1, p2};
                        boh = {h0, h1, h2};
                        have = true;
                    }
                }
            }
        }
    }

    Controls ctl;
    for (int c = 0; c < kCommunities; ++c) {
        const CommunityConfig& cfg = sys.communities[c];
        const Cell& cl = cell(c, bop[c] + K, boh[c] + K);
        ctl.p_chp[c] = grid_value(cfg.chp.p_min, cfg.chp.p_max, cl.chp, n);
        ctl.b[c] = grid_value(cfg.chp.b_min, cfg.chp.b_max, cl.b, n);
        ctl.p_tp[c] = grid_value(cfg.ro.p_tp_min, cfg.ro.p_tp_max, cl.tp, n);
    }
    ctl.px = {bop[0] * p_step, bop[1] * p_step, 0.0};
    ctl.px[2] = -(ctl.px[0] + ctl.px[1]);
    ctl.hx = {boh[0] * h_step, boh[1] * h_step, 0.0};
    ctl.hx[2] = -(ctl.hx[0] + ctl.hx[1]);

    if (opt.refine) {
        Score cur = system_score(ctl, loads, wind, sys);
        const double fine = 1.0 / (10.0 * (n - 1));
        auto try_coordinate = [&](auto&& get_set, double lo, double hi, double step) {
            double& ref = get_set(ctl);
            const double start = ref;
            double best_v = start;
            for (int k = -10; k <= 10; ++k) {
                if (k == 0) continue;
                const double v = start + k * step;
                if (v < lo - 1e-12 || v > hi + 1e-12) continue;
                ref = std::clamp(v, lo, hi);
                const Score s = system_score(ctl, loads, wind, sys);
                if (better(s, cur, tol)) {
                    cur = s;
                    best_v = ref;
                }
            }
            ref = best_v;
        };
        for (int c = 0; c < kCommunities; ++c) {
            const CommunityConfig& cfg = sys.communities[c];
            try_coordinate([c](Controls& x) -> double& { return x.p_chp[c]; }, cfg.chp.p_min, cfg.chp.p_max,
                           (cfg.chp.p_max - cfg.chp.p_min) * fine);
            try_coordinate([c](Controls& x) -> double& { return x.b[c]; }, cfg.chp.b_min, cfg.chp.b_max,
                           (cfg.chp.b_max - cfg.chp.b_min) * fine);
            try_coordinate([c](Controls& x) -> double& { return x.p_tp[c]; }, cfg.ro.p_tp_min, cfg.ro.p_tp_max,
                           (cfg.ro.p_tp_max - cfg.ro.p_tp_min) * fine);
        }
        if (K > 0) {
            auto exchange_coordinate = [&](std::array<double, kCommunities> Controls::*field, int idx, double max_abs,
                                           double step) {
                Controls base = ctl;
                double best_v = (ctl.*field)[idx];
                for (int k = -10; k <= 10; ++k) {
                    if (k == 0) continue;
                    Controls trial = base;
                    auto& x = trial.*field;
                    x[idx] = (base.*field)[idx] + k * step;
                    x[2] = -(x[0] + x[1]);
                    const double sum_abs = std::abs(x[0]) + std::abs(x[1]) + std::abs(x[2]);
                    if (std::abs(x[idx]) > max_abs + 1e-9 || std::abs(x[2]) > max_abs + 1e-9
                        || sum_abs > 2.0 * max_abs + 1e-9)
                        continue;
                    const Score s = system_score(trial, loads, wind, sys);
                    if (better(s, cur, tol)) {
                        cur = s;
                        best_v = x[idx];
                    }
                }
                auto& x = ctl.*field;
                x[idx] = best_v;
                x[2] = -(x[0] + x[1]);
            };
            exchange_coordinate(&Controls::px, 0, sys.p_exch_max, p_step / 10.0);
            exchange_coordinate(&Controls::px, 1, sys.p_exch_max, p_step / 10.0);
            exchange_coordinate(&Controls::hx, 0, sys.h_exch_max, h_step / 10.0);
            exchange_coordinate(&Controls::hx, 1, sys.h_exch_max, h_step / 10.0);
            unwind_exchanges(ctl, cur, loads, wind, sys, tol);
            absorb_curtailment(ctl, cur, loads, wind, sys, tol);
        }
    }

    OracleResult res;
    res.decisions = build(ctl, loads, wind, sys);
    std::array<double, kCommunities> px{}, hx{};
    for (int c = 0; c < kCommunities; ++c) {
        px[c] = res.decisions[c].p_exch;
        hx[c] = res.decisions[c].h_exch;
    }
    const auto [pp, hh] = project_exchanges(px, hx, sys.p_exch_max, sys.h_exch_max);
    for (int c = 0; c < kCommunities; ++c) {
        res.decisions[c].p_exch = pp[c];
        res.decisions[c].h_exch = hh[c];
        res.balances[c] = power_balance(res.decisions[c], loads[c], wind[c], sys.communities[c],
                                        sys.pipeline_options, sys.price.dt);
        res.decisions[c].wind_used = wind[c] - res.balances[c].curtailed;
        res.penalty += res.balances[c].penalty;
    }
    res.cost = total_cost(res.decisions, sys);
    res.feasible = res.penalty <= tol;
    return res;
}

}  // namespace ies
