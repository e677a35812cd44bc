#pragma once

// Command implementations behind the command-line verbs. Each reads its
// inputs, validates them before any computation and writes its artefacts to
// an output directory.

#include "ies/config.hpp"
#include "ies/evaluation.hpp"
#include "ies/learner/checkpoint.hpp"
#include "ies/learner/trainer.hpp"
#include "ies/oracle.hpp"
#include "ies/scenario.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

namespace ies {

namespace fs = std::filesystem;

inline void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SchemaError("cannot write '" + path.string() + "'");
    out << text;
}

/// The scenario named by the configuration (file) or generated from its spec.
inline ScenarioData resolve_scenario(const RunConfig& rc) {
    if (rc.scenario_path) {
        if (!fs::exists(*rc.scenario_path)) throw SchemaError("scenario file not found: '" + *rc.scenario_path + "'");
        return load_scenario(*rc.scenario_path);
    }
    return generate_scenario(rc.generator);
}

inline fs::path cmd_generate_scenario(const GeneratorSpec& spec, const fs::path& out) {
    write_text(out, format_scenario(generate_scenario(spec)));
    return out;
}

inline std::string format_train_log(const std::vector<learn::EpisodeLog>& log) {
    std::string s = std::string(learn::kTrainLogHeader) + "\n";
    for (const auto& e : log) s += learn::format_log_row(e) + "\n";
    return s;
}

/// Per-episode mean reward with its trailing moving average.
inline std::string format_reward_curve(const std::vector<learn::EpisodeLog>& log, int window) {
    std::string s = "episode,mean_reward,moving_average\n";
    double sum = 0.0;
    for (std::size_t k = 0; k < log.size(); ++k) {
        sum += log[k].mean_reward;
        if (k >= static_cast<std::size_t>(window)) sum -= log[k - static_cast<std::size_t>(window)].mean_reward;
        const double n = static_cast<double>(std::min<std::size_t>(k + 1, static_cast<std::size_t>(window)));
        char buf[128];
        std::snprintf(buf, sizeof buf, "%d,%.10g,%.10g\n", log[k].episode, log[k].mean_reward, sum / n);
        s += buf;
    }
    return s;
}

struct TrainOutput {
    learn::TrainResult result;
    learn::Checkpoint checkpoint;
    fs::path checkpoint_path;
    fs::path log_path;
    fs::path curve_path;
};

inline TrainOutput cmd_train(const RunConfig& rc, const ScenarioData& sc, const fs::path& out_dir,
                             const learn::ProgressFn& progress = {}) {
    validate(rc);
    learn::TrainConfig tc = rc.train;
    tc.seed = rc.seed;
    const DispatchEnv env(sc, rc.system, rc.env, rc.mode);
    TrainOutput out;
    out.result = learn::train(env, tc, progress);
    out.checkpoint.policy = out.result.policy;
    out.checkpoint.config_hash = config_hash(rc.system, rc.env);
    out.checkpoint.scenario_hash = scenario_hash(sc);
    out.checkpoint.run_config = to_json(rc);
    fs::create_directories(out_dir);
    out.checkpoint_path = out_dir / "checkpoint.json";
    out.log_path = out_dir / "train_log.csv";
    out.curve_path = out_dir / "reward_curve.csv";
    learn::save_checkpoint(out.checkpoint_path.string(), out.checkpoint);
    write_text(out.log_path, format_train_log(out.result.log));
    write_text(out.curve_path, format_reward_curve(out.result.log, tc.moving_average));
    return out;
}

struct Evaluation {
    Schedule schedule;
    std::string schedule_csv;
    ScheduleSummary summary;
    json summary_json;
};

/// Greedy rollout of a checkpoint; the configuration must match the one the
/// policy was trained with.
inline Evaluation evaluate_checkpoint(const learn::Checkpoint& ck, const RunConfig& rc, const ScenarioData& sc) {
    const std::string expected = config_hash(rc.system, rc.env);
    if (ck.config_hash != expected) {
        throw MismatchError("checkpoint was trained with config hash " + ck.config_hash +
                            " but the current configuration hashes to " + expected);
    }
    Evaluation ev;
    ev.schedule = greedy_rollout(ck.policy, DispatchEnv(sc, rc.system, rc.env, ck.policy.mode, ck.policy.scales));
    ev.schedule_csv = format_schedule(ev.schedule, rc.system);
    ev.summary = summarize_schedule_csv(ev.schedule_csv, rc.system.price.dt);
    ev.summary_json = summary_json(ev.summary);
    ev.summary_json["mode"] = to_string(ck.policy.mode);
    ev.summary_json["scenario_hash"] = scenario_hash(sc);
    ev.summary_json["config_hash"] = ck.config_hash;
    return ev;
}

inline Evaluation cmd_evaluate(const fs::path& checkpoint, const RunConfig& rc, const ScenarioData& sc,
                               const fs::path& out_dir) {
    const learn::Checkpoint ck = learn::load_checkpoint(checkpoint.string());
    Evaluation ev = evaluate_checkpoint(ck, rc, sc);
    write_text(out_dir / "schedule.csv", ev.schedule_csv);
    write_text(out_dir / "summary.json", ev.summary_json.dump(2) + "\n");
    return ev;
}

/// Costs and curtailment of two checkpoints on one scenario; deltas are
/// second minus first.
inline json compare_evaluations(const Evaluation& a, const Evaluation& b) {
    json d;
    const char* names[] = {"industrial", "commercial", "residential"};
    for (int i = 0; i < kCommunities; ++i)
        d["community_cost"][names[i]] = b.summary.community_cost[i] - a.summary.community_cost[i];
    const double total = b.summary.total_cost - a.summary.total_cost;
    d["total_cost"] = total;
    d["curtailment_rate"] = b.summary.curtailment_rate() - a.summary.curtailment_rate();
    json j;
    j["first"] = a.summary_json;
    j["second"] = b.summary_json;
    j["delta_second_minus_first"] = d;
    j["total_delta_sign"] = total < 0.0 ? -1 : (total > 0.0 ? 1 : 0);
    j["cheaper"] = total < 0.0 ? "second" : (total > 0.0 ? "first" : "equal");
    return j;
}

inline json cmd_compare(const fs::path& first, const fs::path& second, const RunConfig& rc, const ScenarioData& sc,
                        const fs::path& out_dir) {
    const learn::Checkpoint a = learn::load_checkpoint(first.string());
    const learn::Checkpoint b = learn::load_checkpoint(second.string());
    if (a.scenario_hash != b.scenario_hash) {
        throw MismatchError("checkpoints were trained on different scenarios (" + a.scenario_hash + " vs " +
                            b.scenario_hash + ")");
    }
    const Evaluation ea = evaluate_checkpoint(a, rc, sc);
    const Evaluation eb = evaluate_checkpoint(b, rc, sc);
    json j = compare_evaluations(ea, eb);
    write_text(out_dir / "compare.json", j.dump(2) + "\n");
    return j;
}

struct OracleOutput {
    Schedule schedule;
    std::string schedule_csv;
    ScheduleSummary summary;
    std::vector<int> infeasible_steps;
    json summary_json;
};

inline OracleOutput run_oracle(const RunConfig& rc, const ScenarioData& sc, int grid_n) {
    OracleOptions opt;
    opt.grid_n = grid_n;
    OracleOutput out;
    out.schedule = oracle_rollout(sc, rc.system, rc.env, opt, &out.infeasible_steps);
    out.schedule_csv = format_schedule(out.schedule, rc.system);
    out.summary = summarize_schedule_csv(out.schedule_csv, rc.system.price.dt);
    out.summary_json = summary_json(out.summary);
    out.summary_json["grid_n"] = grid_n;
    out.summary_json["infeasible_steps"] = out.infeasible_steps;
    out.summary_json["scenario_hash"] = scenario_hash(sc);
    return out;
}

inline OracleOutput cmd_oracle(const RunConfig& rc, const ScenarioData& sc, int grid_n, const fs::path& out_dir) {
    OracleOutput out = run_oracle(rc, sc, grid_n);
    write_text(out_dir / "oracle_schedule.csv", out.schedule_csv);
    write_text(out_dir / "oracle_summary.json", out.summary_json.dump(2) + "\n");
    return out;
}

/// Machine-readable error report.
inline json error_json(const std::exception& e) {
    json j;
    if (const auto* err = dynamic_cast<const Error*>(&e)) {
        j["error"] = err->kind();
        if (const auto* lim = dynamic_cast<const LimitViolation*>(&e)) j["bound"] = lim->bound();
    } else {
        j["error"] = "internal_error";
    }
    j["message"] = e.what();
    return j;
}

}  // namespace ies
