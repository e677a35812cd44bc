#pragma once

// Three-community aggregation: limit clipping, exchange projection,
// per-community balance residuals with free wind curtailment, and fuel cost.

#include "ies/devices.hpp"
#include "ies/thermal_network.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <utility>

namespace ies {

inline constexpr int kCommunities = 3;

enum class CommunityId : int { industrial = 1, commercial = 2, residential = 3 };

inline std::string community_name(CommunityId id) {
    switch (id) {
        case CommunityId::industrial: return "industrial";
        case CommunityId::commercial: return "commercial";
        case CommunityId::residential: return "residential";
    }
    return "unknown";
}

struct CommunityConfig {
    CommunityId id = CommunityId::industrial;
    ChpParams chp;
    RoCogenParams ro;
    GasUnitParams gt{0.0, 3000.0, 0.35};
    GasUnitParams gb{0.0, 3000.0, 0.90};
    PipelineParams pipeline;

    void validate() const {
        chp.validate();
        ro.validate();
        gt.validate("gas_turbine");
        gb.validate("gas_boiler");
        pipeline.validate();
    }
};

struct PipelineOptions {
    /// Gross heat demand up by the feeder loss and cap delivered heat by the
    /// heat capacity of the delivered water.
    bool strict_cotransmission = false;
    /// Book one feeder loss on a community whenever it exports heat.
    bool exchange_heat_loss = false;
};

struct SystemConfig {
    std::array<CommunityConfig, kCommunities> communities{};
    FuelPrice price;
    double p_exch_max = 1000.0;  ///< kW, per-interval interaction limit
    double h_exch_max = 1000.0;
    PipelineOptions pipeline_options;

    SystemConfig() {
        communities[0].id = CommunityId::industrial;
        communities[1].id = CommunityId::commercial;
        communities[2].id = CommunityId::residential;
    }

    void validate() const {
        std::array<bool, kCommunities> seen{};
        for (const auto& c : communities) {
            const int idx = static_cast<int>(c.id) - 1;
            if (idx < 0 || idx >= kCommunities) throw ContractViolation("system: community id must be 1, 2 or 3");
            if (seen[idx]) throw ContractViolation("system: duplicate community id " + std::to_string(idx + 1));
            seen[idx] = true;
            c.validate();
        }
        price.validate();
        if (!(p_exch_max >= 0.0 && h_exch_max >= 0.0)) throw ContractViolation("system: exchange limits must be non-negative");
    }
};

/// Setpoints of one community for one interval. Compared to the textbook
/// action listing, CHP heat is expressed through the ratio `b_chp`, the
/// cogeneration unit through its gross output `p_tp` (net export follows from
/// the water rate) and heat exchange gets its own variable.
struct DispatchDecision {
    double p_chp = 0.0;
    double b_chp = 0.0;
    double p_tp = 0.0;
    double w_rate = 0.0;
    double p_gt = 0.0;
    double h_gb = 0.0;
    double p_exch = 0.0;  ///< import positive
    double h_exch = 0.0;  ///< import positive
    double wind_used = 0.0;

    double h_chp() const { return b_chp * p_chp; }
    double p_cwp(const RoCogenParams& ro) const { return p_tp - ro.q_coeff * w_rate; }

    friend bool operator==(const DispatchDecision&, const DispatchDecision&) = default;
};

struct Loads {
    double p = 0.0;  ///< kW
    double h = 0.0;  ///< kW
    double w = 0.0;  ///< m3/h
};

struct BalanceResult {
    double d_elec = 0.0;
    double d_heat = 0.0;
    double d_water = 0.0;
    double curtailed = 0.0;
    double penalty = 0.0;  ///< d_elec + d_heat + q * d_water
};

struct CostBreakdown {
    std::array<double, kCommunities> community{};
    double total = 0.0;
};

/// Largest water rate the RO plant may run at, m3/h.
inline double max_water_rate(const RoCogenParams& ro, double dt) { return ro.w_max / dt; }

/// Clamps every device setpoint into its box. The water rate is reduced last
/// so that the RO demand never exceeds the gross thermal-unit output.
/// Exchanges are left to project_exchanges.
inline DispatchDecision clip_to_limits(DispatchDecision d, const CommunityConfig& cfg, double dt = 1.0) {
    d.p_chp = std::clamp(d.p_chp, cfg.chp.p_min, cfg.chp.p_max);
    d.b_chp = std::clamp(d.b_chp, cfg.chp.b_min, cfg.chp.b_max);
    d.p_tp = std::clamp(d.p_tp, cfg.ro.p_tp_min, cfg.ro.p_tp_max);
    const double w_cap = std::min(max_water_rate(cfg.ro, dt), d.p_tp / cfg.ro.q_coeff);
    d.w_rate = std::clamp(d.w_rate, 0.0, w_cap);
    d.p_gt = std::clamp(d.p_gt, cfg.gt.out_min, cfg.gt.out_max);
    d.h_gb = std::clamp(d.h_gb, cfg.gb.out_min, cfg.gb.out_max);
    d.wind_used = std::max(d.wind_used, 0.0);
    return d;
}

namespace detail {

// Zero-sum and sum(|x|) <= limit, with the third entry absorbing rounding so
// that (x0 + x1) + x2 is exactly zero.
inline std::array<double, kCommunities> project_zero_sum(std::array<double, kCommunities> x, double max_abs) {
    const double mean = (x[0] + x[1] + x[2]) / 3.0;
    x[0] -= mean;
    x[1] -= mean;
    x[2] = -(x[0] + x[1]);
    const double limit = 2.0 * max_abs;
    auto sum_abs = [](const std::array<double, kCommunities>& v) {
        return std::abs(v[0]) + std::abs(v[1]) + std::abs(v[2]);
    };
    const double total = sum_abs(x);
    if (total <= limit) return x;
    double s = limit / total;
    std::array<double, kCommunities> y{};
    for (;;) {
        y[0] = x[0] * s;
        y[1] = x[1] * s;
        y[2] = -(y[0] + y[1]);
        if (sum_abs(y) <= limit) return y;
        s = std::nextafter(s, 0.0);
    }
}

}  // namespace detail

/// Projects the requested exchanges onto the feasible set: conservation by
/// mean subtraction, then one uniform scale factor if the total magnitude
/// exceeds twice the interaction limit. Idempotent on feasible input.
inline std::pair<std::array<double, kCommunities>, std::array<double, kCommunities>>
project_exchanges(const std::array<double, kCommunities>& p_exch, const std::array<double, kCommunities>& h_exch,
                  double p_max, double h_max) {
    return {detail::project_zero_sum(p_exch, p_max), detail::project_zero_sum(h_exch, h_max)};
}

/// Heat the community must supply (load plus modelled pipeline losses).
inline double heat_demand(const DispatchDecision& d, double h_load, const CommunityConfig& cfg,
                          const PipelineOptions& opts) {
    double loss = 0.0;
    if (opts.strict_cotransmission) loss += std::max(0.0, pipeline_heat_loss(cfg.pipeline));
    if (opts.exchange_heat_loss && d.h_exch < 0.0) loss += std::max(0.0, pipeline_heat_loss(cfg.pipeline));
    return required_heat_supply(h_load, loss);
}

/// Residual imbalance of one community. Surplus electricity is absorbed by
/// curtailing wind for free, up to the available wind.
inline BalanceResult power_balance(const DispatchDecision& d, const Loads& loads, double wind_avail,
                                   const CommunityConfig& cfg, const PipelineOptions& opts = {},
                                   double dt = 1.0) {
    BalanceResult r;
    const double generation = d.p_chp + d.p_cwp(cfg.ro) + d.p_gt + wind_avail;
    const double surplus = generation + d.p_exch - loads.p;
    r.curtailed = std::min(wind_avail, std::max(0.0, surplus));
    r.d_elec = std::abs(surplus - r.curtailed);

    const double supply = d.h_chp() + d.h_gb + d.h_exch;
    const double demand = heat_demand(d, loads.h, cfg, opts);
    if (opts.strict_cotransmission) {
        const double cap = cotransmission_heat_capacity(cfg.pipeline, loads.w, dt);
        const double delivered = std::min(supply, cap);
        r.d_heat = std::abs(delivered - demand) + (supply - delivered);
    } else {
        r.d_heat = std::abs(supply - demand);
    }

    r.d_water = std::abs(d.w_rate - loads.w);
    r.penalty = r.d_elec + r.d_heat + cfg.ro.q_coeff * r.d_water;
    return r;
}

/// Fuel cost of one community. Exchanged energy carries no price; only
/// primary energy is bought.
inline double community_cost(const DispatchDecision& d, const CommunityConfig& cfg, const FuelPrice& price) {
    return chp_cost(cfg.chp, d.p_chp, d.h_chp(), price)
         + cogen_cost(cfg.ro, std::max(0.0, d.p_cwp(cfg.ro)), d.w_rate, price)
         + gas_unit_cost(cfg.gt, d.p_gt, price)
         + gas_unit_cost(cfg.gb, d.h_gb, price);
}

inline CostBreakdown total_cost(const std::array<DispatchDecision, kCommunities>& decisions, const SystemConfig& sys) {
    CostBreakdown out;
    for (int i = 0; i < kCommunities; ++i) {
        out.community[i] = community_cost(decisions[i], sys.communities[i], sys.price);
        out.total += out.community[i];
    }
    return out;
}

/// Checks a decision against every box constraint; returns the name of the
/// first violated bound or an empty string. `tol` is an absolute slack.
inline std::string box_violation(const DispatchDecision& d, const CommunityConfig& cfg, double dt = 1.0,
                                 double tol = 0.0) {
    if (d.p_chp < cfg.chp.p_min - tol) return "chp.p_min";
    if (d.p_chp > cfg.chp.p_max + tol) return "chp.p_max";
    if (d.b_chp < cfg.chp.b_min - tol) return "chp.b_min";
    if (d.b_chp > cfg.chp.b_max + tol) return "chp.b_max";
    if (d.p_tp < cfg.ro.p_tp_min - tol) return "cogen.p_tp_min";
    if (d.p_tp > cfg.ro.p_tp_max + tol) return "cogen.p_tp_max";
    if (d.w_rate < -tol) return "cogen.w_min";
    if (d.w_rate > max_water_rate(cfg.ro, dt) + tol) return "cogen.w_max";
    if (d.p_cwp(cfg.ro) < -tol) return "cogen.net_power";
    if (d.p_gt < cfg.gt.out_min - tol) return "gas_turbine.out_min";
    if (d.p_gt > cfg.gt.out_max + tol) return "gas_turbine.out_max";
    if (d.h_gb < cfg.gb.out_min - tol) return "gas_boiler.out_min";
    if (d.h_gb > cfg.gb.out_max + tol) return "gas_boiler.out_max";
    if (d.wind_used < -tol) return "wind.used_min";
    return {};
}

/// Checks conservation and the aggregate interaction limits.
inline std::string exchange_violation(const std::array<DispatchDecision, kCommunities>& ds, const SystemConfig& sys,
                                      double sum_tol = 1e-9) {
    double sp = 0.0, sh = 0.0, ap = 0.0, ah = 0.0;
    for (const auto& d : ds) {
        sp += d.p_exch;
        sh += d.h_exch;
        ap += std::abs(d.p_exch);
        ah += std::abs(d.h_exch);
    }
    if (std::abs(sp) > sum_tol) return "exchange.p_conservation";
    if (std::abs(sh) > sum_tol) return "exchange.h_conservation";
    if (ap > 2.0 * sys.p_exch_max + sum_tol) return "exchange.p_limit";
    if (ah > 2.0 * sys.h_exch_max + sum_tol) return "exchange.h_limit";
    return {};
}

}  // namespace ies
