#pragma once

// Text checkpoints: every network parameter, the state scales, the value
// normalisers and the fingerprints of the configuration and scenario the
// policy was trained on.

#include "ies/config.hpp"
#include "ies/learner/trainer.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <string>
#include <vector>

namespace ies::learn {

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
    PolicySet policy;
    std::string config_hash;
    std::string scenario_hash;
    json run_config;  ///< informational copy of the resolved run configuration
};

namespace checkpoint_detail {

inline json vec_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

inline Vec json_vec(const json& j, Eigen::Index expected, const std::string& what) {
    const auto v = j.get<std::vector<double>>();
    if (static_cast<Eigen::Index>(v.size()) != expected)
        throw SchemaError("checkpoint: " + what + " has " + std::to_string(v.size()) + " values, expected " +
                          std::to_string(expected));
    return Eigen::Map<const Vec>(v.data(), expected);
}

inline json mlp_json(const Mlp& m) { return {{"sizes", m.sizes()}, {"parameters", vec_json(m.parameters())}}; }

inline Mlp json_mlp(const json& j, const std::string& what) {
    Mlp m(j.at("sizes").get<std::vector<int>>());
    m.parameters() = json_vec(j.at("parameters"), m.parameter_count(), what);
    return m;
}

}  // namespace checkpoint_detail

inline json checkpoint_json(const Checkpoint& ck) {
    using namespace checkpoint_detail;
    const PolicySet& p = ck.policy;
    json actors = json::array();
    for (const auto& a : p.actors) {
        actors.push_back({{"mean_net", mlp_json(a.mean_net)},
                          {"log_std", vec_json(a.log_std)},
                          {"active", vec_json(a.active)}});
    }
    json critics = json::array();
    for (const auto& c : p.critics) critics.push_back(mlp_json(c));
    json norms = json::array();
    for (const auto& n : p.value_norms) norms.push_back({{"mean", n.mean}, {"var", n.var}, {"count", n.count}});
    return {{"format", "ies-policy"},
            {"version", kCheckpointVersion},
            {"config_hash", ck.config_hash},
            {"scenario_hash", ck.scenario_hash},
            {"mode", to_string(p.mode)},
            {"observation", p.observation == Observation::global ? "global" : "local"},
            {"state_scales", std::vector<double>(p.scales.value.begin(), p.scales.value.end())},
            {"value_normalization", p.value_normalization},
            {"actors", actors},
            {"critics", critics},
            {"value_norms", norms},
            {"run_config", ck.run_config}};
}

inline Checkpoint parse_checkpoint(const json& j) {
    using namespace checkpoint_detail;
    try {
        if (j.at("format") != "ies-policy") throw SchemaError("checkpoint: not a policy checkpoint");
        const int version = j.at("version").get<int>();
        if (version != kCheckpointVersion)
            throw SchemaError("checkpoint: unsupported version " + std::to_string(version));
        Checkpoint ck;
        ck.config_hash = j.at("config_hash").get<std::string>();
        ck.scenario_hash = j.at("scenario_hash").get<std::string>();
        ck.run_config = j.value("run_config", json::object());
        PolicySet& p = ck.policy;
        p.mode = parse_mode(j.at("mode").get<std::string>());
        const std::string obs = j.at("observation").get<std::string>();
        if (obs != "local" && obs != "global") throw SchemaError("checkpoint: bad observation '" + obs + "'");
        p.observation = obs == "global" ? Observation::global : Observation::local;
        const auto scales = j.at("state_scales").get<std::vector<double>>();
        if (scales.size() != static_cast<std::size_t>(kStateDim)) throw SchemaError("checkpoint: state_scales must have 12 entries");
        std::copy(scales.begin(), scales.end(), p.scales.value.begin());
        p.value_normalization = j.at("value_normalization").get<bool>();
        const json& actors = j.at("actors");
        if (actors.size() != static_cast<std::size_t>(kCommunities)) throw SchemaError("checkpoint: expected 3 actors");
        for (std::size_t i = 0; i < actors.size(); ++i) {
            GaussianActor& a = p.actors[i];
            a.mean_net = json_mlp(actors[i].at("mean_net"), "actor mean network");
            if (a.mean_net.output_dim() != kActionDim || a.mean_net.input_dim() != observation_dim(p.observation))
                throw SchemaError("checkpoint: actor network shape does not match the observation and action sizes");
            a.log_std = json_vec(actors[i].at("log_std"), kActionDim, "log_std");
            a.active = json_vec(actors[i].at("active"), kActionDim, "active");
        }
        for (const json& c : j.at("critics")) p.critics.push_back(json_mlp(c, "critic"));
        const std::size_t expected = p.mode == Mode::coordinated ? 1 : kCommunities;
        if (p.critics.size() != expected) throw SchemaError("checkpoint: wrong number of critics for the mode");
        for (const json& n : j.at("value_norms"))
            p.value_norms.push_back({n.at("mean").get<double>(), n.at("var").get<double>(), n.at("count").get<double>()});
        if (p.value_norms.size() != p.critics.size()) throw SchemaError("checkpoint: value_norms do not match critics");
        return ck;
    } catch (const json::exception& e) {
        throw SchemaError(std::string("checkpoint: ") + e.what());
    }
}

inline void save_checkpoint(const std::string& path, const Checkpoint& ck) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SchemaError("checkpoint: cannot write '" + path + "'");
    out << checkpoint_json(ck).dump(1) << '\n';
}

inline Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError("checkpoint: cannot open '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw SchemaError("checkpoint: " + std::string(e.what()));
    }
    return parse_checkpoint(j);
}

}  // namespace ies::learn
