#pragma once

// Output and fuel-cost models of the dispatchable units found in every
// community: back-pressure CHP, the thermal unit coupled to a reverse-osmosis
// desalination plant ("cogeneration" below), gas turbine and gas boiler.
//
// Units: power in kW, water rate in m3/h, energy per volume in MJ/m3,
// osmotic pressure in MPa, money in the currency of FuelPrice::rho_gas.

#include "ies/error.hpp"

#include <cmath>
#include <string>

namespace ies {

struct ChpParams {
    double p_min = 1000.0;  ///< kW
    double p_max = 5000.0;  ///< kW
    double b_min = 0.0;     ///< heat-to-power ratio
    double b_max = 1.4;
    double eta = 0.90;      ///< fuel-to-output efficiency, applied to both heat and power

    void validate() const {
        if (!(0.0 < p_min && p_min < p_max)) throw ContractViolation("chp: require 0 < p_min < p_max");
        if (!(0.0 <= b_min && b_min < b_max)) throw ContractViolation("chp: require 0 <= b_min < b_max");
        if (!(eta > 0.0 && eta <= 1.0)) throw ContractViolation("chp: eta must lie in (0, 1]");
    }
};

/// Thermal generating unit with an attached RO desalination plant. The unit's
/// gross output p_tp feeds the RO pumps first; the rest is exported.
struct RoCogenParams {
    double p_tp_min = 0.0;      ///< kW, gross
    double p_tp_max = 5000.0;   ///< kW, gross
    double lambda_osm = 4.17;   ///< (MPa L)/mol
    double g0 = 0.6;            ///< mol/L
    double q_coeff = 8.0;       ///< kWh per m3 of fresh water
    double w_max = 500.0;       ///< m3 per dispatch interval
    double b_recovery = 0.5;    ///< nominal recovery rate
    double eta = 0.40;

    void validate() const {
        if (!(p_tp_min >= 0.0 && p_tp_min < p_tp_max)) throw ContractViolation("cogen: require 0 <= p_tp_min < p_tp_max");
        if (!(b_recovery > 0.0 && b_recovery < 1.0)) throw ContractViolation("cogen: b_recovery must lie in (0, 1)");
        if (!(q_coeff > 0.0)) throw ContractViolation("cogen: q_coeff must be positive");
        if (!(w_max > 0.0)) throw ContractViolation("cogen: w_max must be positive");
        if (!(lambda_osm > 0.0 && g0 > 0.0)) throw ContractViolation("cogen: lambda_osm and g0 must be positive");
        if (!(eta > 0.0 && eta <= 1.0)) throw ContractViolation("cogen: eta must lie in (0, 1]");
    }
};

/// Gas turbine (electric output) or gas boiler (thermal output).
struct GasUnitParams {
    double out_min = 0.0;     ///< kW
    double out_max = 3000.0;  ///< kW
    double eta = 0.35;

    void validate(const std::string& name) const {
        if (!(0.0 <= out_min && out_min < out_max)) throw ContractViolation(name + ": require 0 <= out_min < out_max");
        if (!(eta > 0.0 && eta <= 1.0)) throw ContractViolation(name + ": eta must lie in (0, 1]");
    }
};

struct FuelPrice {
    double rho_gas = 3.5;  ///< currency per m3 of natural gas
    double hhv = 9.7;      ///< kWh per m3
    double dt = 1.0;       ///< dispatch interval, h

    void validate() const {
        if (!(rho_gas > 0.0 && hhv > 0.0 && dt > 0.0)) throw ContractViolation("fuel: rho_gas, hhv and dt must be positive");
    }
};

/// Osmotic pressure across the membrane at recovery rate `b`, in MPa.
inline double ro_osmotic_pressure(const RoCogenParams& ro, double b) {
    if (!(b >= 0.0 && b < 1.0)) throw DomainError("ro_osmotic_pressure: recovery rate must lie in [0, 1)");
    return ro.lambda_osm * ro.g0 / (1.0 - b);
}

/// Minimum work per unit of fresh water at recovery rate `b`, in MJ/m3.
/// Strictly increasing on (0, 1); tends to lambda*g0 as b -> 0.
inline double ro_specific_energy(const RoCogenParams& ro, double b) {
    if (!(b > 0.0 && b < 1.0)) throw DomainError("ro_specific_energy: recovery rate must lie in (0, 1)");
    // -log1p(-b) == ln(1/(1-b)) without cancellation for small b
    return ro.lambda_osm * ro.g0 * (-std::log1p(-b)) / b;
}

/// Electric power drawn by the RO plant at water production `w_rate` (m3/h).
inline double ro_power_demand(const RoCogenParams& ro, double w_rate) {
    if (!(w_rate >= 0.0)) throw ContractViolation("ro_power_demand: water rate must be non-negative");
    return ro.q_coeff * w_rate;
}

/// Power exported by the cogeneration unit: gross output minus RO demand.
inline double cogen_net_power(const RoCogenParams& ro, double p_thermal_unit, double w_rate) {
    if (p_thermal_unit < ro.p_tp_min)
        throw LimitViolation("cogen.p_tp_min", "cogen_net_power: gross power below p_tp_min");
    if (p_thermal_unit > ro.p_tp_max)
        throw LimitViolation("cogen.p_tp_max", "cogen_net_power: gross power above p_tp_max");
    return p_thermal_unit - ro_power_demand(ro, w_rate);
}

/// Heat produced by the CHP at electric output `p` and heat-to-power ratio `b`.
inline double chp_heat_output(const ChpParams& chp, double p, double b) {
    if (p < chp.p_min) throw LimitViolation("chp.p_min", "chp_heat_output: electric power below p_min");
    if (p > chp.p_max) throw LimitViolation("chp.p_max", "chp_heat_output: electric power above p_max");
    if (b < chp.b_min) throw LimitViolation("chp.b_min", "chp_heat_output: heat-to-power ratio below b_min");
    if (b > chp.b_max) throw LimitViolation("chp.b_max", "chp_heat_output: heat-to-power ratio above b_max");
    return b * p;
}

/// Fuel bill for producing `output` kW over one interval with efficiency `eta`.
inline double gas_cost(double output, double eta, const FuelPrice& price) {
    if (!(output >= 0.0)) throw ContractViolation("gas_cost: output must be non-negative");
    if (!(eta > 0.0 && eta <= 1.0)) throw ContractViolation("gas_cost: eta must lie in (0, 1]");
    return price.rho_gas * (output / (eta * price.hhv)) * price.dt;
}

inline double chp_cost(const ChpParams& chp, double p, double h, const FuelPrice& price) {
    return gas_cost(p, chp.eta, price) + gas_cost(h, chp.eta, price);
}

/// Costs the exported power and the RO pumping power separately, both at the
/// unit efficiency; their sum equals the bill for the gross output.
inline double cogen_cost(const RoCogenParams& ro, double p_net, double w_rate, const FuelPrice& price) {
    return gas_cost(p_net, ro.eta, price) + gas_cost(ro_power_demand(ro, w_rate), ro.eta, price);
}

inline double gas_unit_cost(const GasUnitParams& unit, double out, const FuelPrice& price) {
    return gas_cost(out, unit.eta, price);
}

}  // namespace ies
