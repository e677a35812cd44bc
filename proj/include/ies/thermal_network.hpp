#pragma once

// Heat carried by the fresh-water delivery stream ("water-heat co-transmission").

#include "ies/error.hpp"

#include <algorithm>
#include <numbers>

namespace ies {

struct PipelineParams {
    double c_water = 4.186;    ///< kJ/(kg K)
    double gamma = 2.0;        ///< average thermal resistance, (m K)/W
    double length = 1000.0;    ///< m
    double t_env = -10.0;      ///< degC
    double t_supply = 90.0;    ///< degC
    double t_return = 40.0;    ///< degC
    double rho_water = 1000.0; ///< kg/m3

    void validate() const {
        if (!(c_water > 0.0)) throw ContractViolation("pipeline: c_water must be positive");
        if (!(gamma > 0.0)) throw ContractViolation("pipeline: gamma must be positive");
        if (!(length >= 0.0)) throw ContractViolation("pipeline: length must be non-negative");
        if (!(t_supply > t_return)) throw ContractViolation("pipeline: t_supply must exceed t_return");
        if (!(rho_water > 0.0)) throw ContractViolation("pipeline: rho_water must be positive");
    }
};

/// Heat delivered by `mass` kg of supply water cooled from t_supply to t_return, kWh.
inline double transported_heat(const PipelineParams& pipe, double mass) {
    if (!(mass >= 0.0)) throw ContractViolation("transported_heat: mass must be non-negative");
    return pipe.c_water * mass * (pipe.t_supply - pipe.t_return) / 3600.0;
}

/// Steady-state loss of a pipeline of the configured length, kW.
inline double pipeline_heat_loss(const PipelineParams& pipe) {
    const double watts = 2.0 * std::numbers::pi * (pipe.t_supply - pipe.t_env) / pipe.gamma * pipe.length;
    return watts / 1000.0;
}

inline double required_heat_supply(double h_load, double loss) {
    if (!(h_load >= 0.0)) throw ContractViolation("required_heat_supply: heat load must be non-negative");
    if (!(loss >= 0.0)) throw ContractViolation("required_heat_supply: loss must be non-negative");
    return h_load + loss;
}

/// Largest heat rate (kW) the water stream `w_rate` m3/h can carry over an
/// interval of `dt` hours.
inline double cotransmission_heat_capacity(const PipelineParams& pipe, double w_rate, double dt) {
    if (!(w_rate >= 0.0)) throw ContractViolation("cotransmission_heat_capacity: water rate must be non-negative");
    const double mass = w_rate * dt * pipe.rho_water;
    return transported_heat(pipe, mass) / dt;
}

}  // namespace ies
