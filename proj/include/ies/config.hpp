#pragma once

// Run configuration: a versioned JSON tree holding the system, environment,
// training and scenario settings. Every key is optional and falls back to the
// built-in default; unknown keys are rejected.

#include "ies/env.hpp"
#include "ies/learner/trainer.hpp"
#include "ies/scenario.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <optional>
#include <set>
#include <string>

namespace ies {

using json = nlohmann::json;

inline constexpr int kConfigSchemaVersion = 1;

struct RunConfig {
    SystemConfig system;
    EnvConfig env;
    learn::TrainConfig train;
    std::optional<std::string> scenario_path;
    GeneratorSpec generator;
    std::string output_dir = "out";
    std::uint64_t seed = 1;
    Mode mode = Mode::coordinated;
    int grid_n = 21;
};

namespace config_detail {

/// Reads typed members of one JSON object and remembers which keys were used.
class ObjectReader {
public:
    ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw SchemaError(path_ + ": expected an object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    const json& child(const std::string& key) {
        used_.insert(key);
        return j_.at(key);
    }

    std::string sub(const std::string& key) const { return path_ + "." + key; }

    void number(const std::string& key, double& out) {
        if (!has(key)) return;
        const json& v = child(key);
        if (!v.is_number()) throw SchemaError(sub(key) + ": expected a number");
        out = v.get<double>();
        if (!std::isfinite(out)) throw SchemaError(sub(key) + ": must be finite");
    }

    template <class Int>
    void integer(const std::string& key, Int& out) {
        if (!has(key)) return;
        const json& v = child(key);
        if (!v.is_number_integer()) throw SchemaError(sub(key) + ": expected an integer");
        if constexpr (std::is_unsigned_v<Int>) {
            if (v.get<long long>() < 0) throw SchemaError(sub(key) + ": must be non-negative");
        }
        out = v.get<Int>();
    }

    void boolean(const std::string& key, bool& out) {
        if (!has(key)) return;
        const json& v = child(key);
        if (!v.is_boolean()) throw SchemaError(sub(key) + ": expected true or false");
        out = v.get<bool>();
    }

    void string(const std::string& key, std::string& out) {
        if (!has(key)) return;
        const json& v = child(key);
        if (!v.is_string()) throw SchemaError(sub(key) + ": expected a string");
        out = v.get<std::string>();
    }

    void finish() const {
        for (const auto& [key, _] : j_.items())
            if (!used_.count(key)) throw SchemaError(path_ + ": unknown key '" + key + "'");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

inline int read_count(ObjectReader& r) {
    int n = 1;
    r.integer("count", n);
    if (n < 1) throw SchemaError(r.sub("count") + ": must be at least 1");
    return n;
}

inline void read_chp(const json& j, const std::string& path, ChpParams& p) {
    ObjectReader r(j, path);
    const int n = read_count(r);
    r.number("p_min_kw", p.p_min);
    r.number("p_max_kw", p.p_max);
    r.number("b_min", p.b_min);
    r.number("b_max", p.b_max);
    r.number("efficiency", p.eta);
    r.finish();
    p.p_min *= n;
    p.p_max *= n;
}

inline void read_cogen(const json& j, const std::string& path, RoCogenParams& p) {
    ObjectReader r(j, path);
    const int n = read_count(r);
    r.number("p_tp_min_kw", p.p_tp_min);
    r.number("p_tp_max_kw", p.p_tp_max);
    r.number("osmotic_coefficient", p.lambda_osm);
    r.number("seawater_concentration", p.g0);
    r.number("energy_per_m3_kwh", p.q_coeff);
    r.number("w_max_m3", p.w_max);
    r.number("recovery_rate", p.b_recovery);
    r.number("efficiency", p.eta);
    r.finish();
    p.p_tp_min *= n;
    p.p_tp_max *= n;
    p.w_max *= n;
}

inline void read_gas_unit(const json& j, const std::string& path, GasUnitParams& p) {
    ObjectReader r(j, path);
    const int n = read_count(r);
    r.number("out_min_kw", p.out_min);
    r.number("out_max_kw", p.out_max);
    r.number("efficiency", p.eta);
    r.finish();
    p.out_min *= n;
    p.out_max *= n;
}

inline void read_pipeline(const json& j, const std::string& path, PipelineParams& p) {
    ObjectReader r(j, path);
    r.number("c_water", p.c_water);
    r.number("thermal_resistance", p.gamma);
    r.number("length_m", p.length);
    r.number("t_env", p.t_env);
    r.number("t_supply", p.t_supply);
    r.number("t_return", p.t_return);
    r.number("water_density", p.rho_water);
    r.finish();
}

inline CommunityId parse_community(const json& v, const std::string& path) {
    if (v.is_number_integer()) {
        const int id = v.get<int>();
        if (id >= 1 && id <= kCommunities) return static_cast<CommunityId>(id);
    } else if (v.is_string()) {
        for (int id = 1; id <= kCommunities; ++id)
            if (community_name(static_cast<CommunityId>(id)) == v.get<std::string>()) return static_cast<CommunityId>(id);
    }
    throw SchemaError(path + ": community id must be 1, 2, 3 or its name");
}

inline void read_system(const json& j, SystemConfig& sys) {
    ObjectReader r(j, "system");
    if (r.has("fuel")) {
        ObjectReader f(r.child("fuel"), "system.fuel");
        f.number("gas_price", sys.price.rho_gas);
        f.number("hhv_kwh_per_m3", sys.price.hhv);
        f.number("dt_hours", sys.price.dt);
        f.finish();
    }
    if (r.has("exchange")) {
        ObjectReader e(r.child("exchange"), "system.exchange");
        e.number("p_max_kw", sys.p_exch_max);
        e.number("h_max_kw", sys.h_exch_max);
        e.finish();
    }
    if (r.has("pipeline_options")) {
        ObjectReader o(r.child("pipeline_options"), "system.pipeline_options");
        o.boolean("strict_cotransmission", sys.pipeline_options.strict_cotransmission);
        o.boolean("exchange_heat_loss", sys.pipeline_options.exchange_heat_loss);
        o.finish();
    }
    if (r.has("communities")) {
        const json& arr = r.child("communities");
        if (!arr.is_array()) throw SchemaError("system.communities: expected an array");
        std::set<int> seen;
        for (std::size_t k = 0; k < arr.size(); ++k) {
            const std::string path = "system.communities[" + std::to_string(k) + "]";
            ObjectReader c(arr[k], path);
            if (!c.has("id")) throw SchemaError(path + ": missing 'id'");
            const CommunityId id = parse_community(c.child("id"), c.sub("id"));
            if (!seen.insert(static_cast<int>(id)).second) throw SchemaError(path + ": duplicate community");
            CommunityConfig& cfg = sys.communities[static_cast<std::size_t>(static_cast<int>(id) - 1)];
            if (c.has("chp")) read_chp(c.child("chp"), c.sub("chp"), cfg.chp);
            if (c.has("cogen")) read_cogen(c.child("cogen"), c.sub("cogen"), cfg.ro);
            if (c.has("gas_turbine")) read_gas_unit(c.child("gas_turbine"), c.sub("gas_turbine"), cfg.gt);
            if (c.has("gas_boiler")) read_gas_unit(c.child("gas_boiler"), c.sub("gas_boiler"), cfg.gb);
            if (c.has("pipeline")) read_pipeline(c.child("pipeline"), c.sub("pipeline"), cfg.pipeline);
            c.finish();
        }
    }
    r.finish();
}

inline void read_env(const json& j, EnvConfig& env) {
    ObjectReader r(j, "env");
    r.number("reward_scale", env.reward_scale);
    r.number("reward_offset", env.reward_offset);
    r.number("penalty_kappa", env.penalty_kappa);
    if (r.has("observation")) {
        std::string o;
        r.string("observation", o);
        if (o == "local")
            env.observation = Observation::local;
        else if (o == "global")
            env.observation = Observation::global;
        else
            throw SchemaError("env.observation: expected 'local' or 'global'");
    }
    r.finish();
}

inline void read_train(const json& j, learn::TrainConfig& t) {
    ObjectReader r(j, "train");
    r.number("actor_lr", t.actor_lr);
    r.number("critic_lr", t.critic_lr);
    r.integer("batch", t.batch);
    r.integer("episodes", t.episodes);
    r.number("clip_eps", t.clip_eps);
    r.number("discount", t.discount);
    r.number("gae_lambda", t.gae_lambda);
    r.integer("epochs_per_update", t.epochs_per_update);
    r.integer("minibatch", t.minibatch);
    if (r.has("hidden")) {
        const json& h = r.child("hidden");
        if (!h.is_array()) throw SchemaError("train.hidden: expected an array of integers");
        t.hidden.clear();
        for (const json& v : h) {
            if (!v.is_number_integer()) throw SchemaError("train.hidden: expected an array of integers");
            t.hidden.push_back(v.get<int>());
        }
    }
    r.number("max_grad_norm", t.max_grad_norm);
    r.number("adam_beta1", t.adam_beta1);
    r.number("adam_beta2", t.adam_beta2);
    r.number("adam_eps", t.adam_eps);
    r.number("init_log_std", t.init_log_std);
    r.number("entropy_coef", t.entropy_coef);
    r.boolean("lr_anneal", t.lr_anneal);
    r.boolean("value_normalization", t.value_normalization);
    r.integer("divergence_window", t.divergence_window);
    r.integer("moving_average", t.moving_average);
    r.finish();
}

inline void read_scenario(const json& j, RunConfig& rc) {
    ObjectReader r(j, "scenario");
    if (r.has("path")) {
        std::string p;
        r.string("path", p);
        rc.scenario_path = p;
    }
    if (r.has("generator")) {
        ObjectReader g(r.child("generator"), "scenario.generator");
        g.string("profile", rc.generator.profile);
        g.number("amplitude", rc.generator.amplitude);
        g.number("noise", rc.generator.noise);
        g.integer("seed", rc.generator.seed);
        g.finish();
    }
    r.finish();
}

}  // namespace config_detail

inline void validate(const RunConfig& rc) {
    try {
        rc.system.validate();
    } catch (const ContractViolation& e) {
        throw SchemaError(std::string("system: ") + e.what());
    }
    rc.env.validate();
    rc.train.validate();
    rc.generator.validate();
    if (rc.grid_n < 3) throw SchemaError("grid_n must be at least 3");
}

/// Parses a configuration tree; absent keys keep their defaults.
inline RunConfig parse_config(const json& j) {
    using namespace config_detail;
    RunConfig rc;
    ObjectReader r(j, "config");
    int version = kConfigSchemaVersion;
    r.integer("schema_version", version);
    if (version != kConfigSchemaVersion)
        throw SchemaError("config.schema_version: unsupported version " + std::to_string(version));
    if (r.has("system")) read_system(r.child("system"), rc.system);
    if (r.has("env")) read_env(r.child("env"), rc.env);
    if (r.has("train")) read_train(r.child("train"), rc.train);
    if (r.has("scenario")) read_scenario(r.child("scenario"), rc);
    r.string("output_dir", rc.output_dir);
    r.integer("seed", rc.seed);
    if (r.has("mode")) {
        std::string m;
        r.string("mode", m);
        rc.mode = parse_mode(m);
    }
    r.integer("grid_n", rc.grid_n);
    r.finish();
    rc.train.seed = rc.seed;
    validate(rc);
    return rc;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError("config: cannot open '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw SchemaError("config: " + std::string(e.what()));
    }
    return parse_config(j);
}

// ---------------------------------------------------------------------------
// Canonical output (aggregated device limits, count 1)

inline json to_json(const SystemConfig& sys) {
    json comms = json::array();
    for (const CommunityConfig& c : sys.communities) {
        comms.push_back({
            {"id", static_cast<int>(c.id)},
            {"chp",
             {{"p_min_kw", c.chp.p_min}, {"p_max_kw", c.chp.p_max}, {"b_min", c.chp.b_min}, {"b_max", c.chp.b_max},
              {"efficiency", c.chp.eta}}},
            {"cogen",
             {{"p_tp_min_kw", c.ro.p_tp_min}, {"p_tp_max_kw", c.ro.p_tp_max}, {"osmotic_coefficient", c.ro.lambda_osm},
              {"seawater_concentration", c.ro.g0}, {"energy_per_m3_kwh", c.ro.q_coeff}, {"w_max_m3", c.ro.w_max},
              {"recovery_rate", c.ro.b_recovery}, {"efficiency", c.ro.eta}}},
            {"gas_turbine", {{"out_min_kw", c.gt.out_min}, {"out_max_kw", c.gt.out_max}, {"efficiency", c.gt.eta}}},
            {"gas_boiler", {{"out_min_kw", c.gb.out_min}, {"out_max_kw", c.gb.out_max}, {"efficiency", c.gb.eta}}},
            {"pipeline",
             {{"c_water", c.pipeline.c_water}, {"thermal_resistance", c.pipeline.gamma},
              {"length_m", c.pipeline.length}, {"t_env", c.pipeline.t_env}, {"t_supply", c.pipeline.t_supply},
              {"t_return", c.pipeline.t_return}, {"water_density", c.pipeline.rho_water}}},
        });
    }
    return {
        {"fuel", {{"gas_price", sys.price.rho_gas}, {"hhv_kwh_per_m3", sys.price.hhv}, {"dt_hours", sys.price.dt}}},
        {"exchange", {{"p_max_kw", sys.p_exch_max}, {"h_max_kw", sys.h_exch_max}}},
        {"pipeline_options",
         {{"strict_cotransmission", sys.pipeline_options.strict_cotransmission},
          {"exchange_heat_loss", sys.pipeline_options.exchange_heat_loss}}},
        {"communities", comms},
    };
}

inline json to_json(const EnvConfig& env) {
    return {{"reward_scale", env.reward_scale},
            {"reward_offset", env.reward_offset},
            {"penalty_kappa", env.penalty_kappa},
            {"observation", env.observation == Observation::global ? "global" : "local"}};
}

inline json to_json(const learn::TrainConfig& t) {
    return {{"actor_lr", t.actor_lr},
            {"critic_lr", t.critic_lr},
            {"batch", t.batch},
            {"episodes", t.episodes},
            {"clip_eps", t.clip_eps},
            {"discount", t.discount},
            {"gae_lambda", t.gae_lambda},
            {"epochs_per_update", t.epochs_per_update},
            {"minibatch", t.minibatch},
            {"hidden", t.hidden},
            {"max_grad_norm", t.max_grad_norm},
            {"adam_beta1", t.adam_beta1},
            {"adam_beta2", t.adam_beta2},
            {"adam_eps", t.adam_eps},
            {"init_log_std", t.init_log_std},
            {"entropy_coef", t.entropy_coef},
            {"lr_anneal", t.lr_anneal},
            {"value_normalization", t.value_normalization},
            {"divergence_window", t.divergence_window},
            {"moving_average", t.moving_average}};
}

inline json to_json(const RunConfig& rc) {
    json j = {{"schema_version", kConfigSchemaVersion},
              {"system", to_json(rc.system)},
              {"env", to_json(rc.env)},
              {"train", to_json(rc.train)},
              {"output_dir", rc.output_dir},
              {"seed", rc.seed},
              {"mode", to_string(rc.mode)},
              {"grid_n", rc.grid_n}};
    json sc = {{"generator",
                {{"profile", rc.generator.profile},
                 {"amplitude", rc.generator.amplitude},
                 {"noise", rc.generator.noise},
                 {"seed", rc.generator.seed}}}};
    if (rc.scenario_path) sc["path"] = *rc.scenario_path;
    j["scenario"] = sc;
    return j;
}

/// Fingerprint of everything that changes the meaning of a trained policy:
/// the system model and the reward definition.
inline std::string config_hash(const SystemConfig& sys, const EnvConfig& env) {
    const json j = {{"system", to_json(sys)}, {"env", to_json(env)}};
    return hex64(fnv1a64(j.dump()));
}

}  // namespace ies
