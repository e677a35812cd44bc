// Command-line front end: generate-scenario, train, evaluate, compare, oracle.
// Success prints a JSON result on stdout; failure prints a JSON error object
// on stderr and exits with a nonzero status.

#include "ies/commands.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

namespace {

struct Flags {
    std::string config;
    std::string scenario;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::string mode;
    std::optional<int> episodes;
    std::optional<int> grid_n;
    bool quiet = false;
};

ies::RunConfig base_config(const Flags& f) {
    ies::RunConfig rc = f.config.empty() ? ies::RunConfig{} : ies::load_config(f.config);
    if (!f.scenario.empty()) rc.scenario_path = f.scenario;
    if (f.seed) rc.seed = *f.seed;
    if (!f.mode.empty()) rc.mode = ies::parse_mode(f.mode);
    if (f.episodes) rc.train.episodes = *f.episodes;
    if (f.grid_n) rc.grid_n = *f.grid_n;
    if (!f.out.empty()) rc.output_dir = f.out;
    rc.train.seed = rc.seed;
    ies::validate(rc);
    return rc;
}

/// Evaluation falls back to the configuration stored in the checkpoint.
ies::RunConfig config_for_checkpoint(const Flags& f, const std::string& checkpoint) {
    if (!f.config.empty()) return base_config(f);
    const auto ck = ies::learn::load_checkpoint(checkpoint);
    ies::RunConfig rc = ck.run_config.empty() ? ies::RunConfig{} : ies::parse_config(ck.run_config);
    if (!f.scenario.empty()) rc.scenario_path = f.scenario;
    if (!f.out.empty()) rc.output_dir = f.out;
    if (f.grid_n) rc.grid_n = *f.grid_n;
    return rc;
}

void add_common(CLI::App* cmd, Flags& f) {
    cmd->add_option("--config", f.config, "run configuration (JSON)");
    cmd->add_option("--scenario", f.scenario, "scenario CSV; overrides the configuration");
    cmd->add_option("--out", f.out, "output directory");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-community integrated energy system dispatch"};
    app.require_subcommand(1);
    Flags f;

    auto* gen = app.add_subcommand("generate-scenario", "write a synthetic 72-row scenario CSV");
    std::string profile, gen_out = "scenario.csv";
    std::optional<double> amplitude, noise;
    gen->add_option("--config", f.config, "run configuration (JSON); its scenario.generator block is used");
    gen->add_option("--out", gen_out, "output CSV path");
    gen->add_option("--seed", f.seed, "noise seed");
    gen->add_option("--profile", profile, "complementary-winter or decoupled");
    gen->add_option("--amplitude", amplitude, "magnitude multiplier");
    gen->add_option("--noise", noise, "relative noise standard deviation");

    auto* train = app.add_subcommand("train", "train policies and write checkpoint and logs");
    add_common(train, f);
    train->add_option("--seed", f.seed, "training seed");
    train->add_option("--mode", f.mode, "independent or coordinated");
    train->add_option("--episodes", f.episodes, "override the number of training episodes");
    train->add_flag("--quiet", f.quiet, "no progress on stderr");

    auto* eval = app.add_subcommand("evaluate", "greedy rollout of a checkpoint");
    std::string ckpt;
    eval->add_option("checkpoint", ckpt, "checkpoint file")->required();
    add_common(eval, f);

    auto* cmp = app.add_subcommand("compare", "compare two checkpoints on one scenario");
    std::string ck_a, ck_b;
    cmp->add_option("first", ck_a, "first checkpoint")->required();
    cmp->add_option("second", ck_b, "second checkpoint")->required();
    add_common(cmp, f);

    auto* orc = app.add_subcommand("oracle", "per-step grid-search dispatch");
    add_common(orc, f);
    orc->add_option("--grid-n", f.grid_n, "grid points per control");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        nlohmann::json j = {{"error", "usage_error"}, {"message", e.what()}};
        std::cerr << j.dump() << std::endl;
        return 2;
    }

    try {
        nlohmann::json result;
        if (*gen) {
            ies::GeneratorSpec spec = f.config.empty() ? ies::GeneratorSpec{} : ies::load_config(f.config).generator;
            if (f.seed) spec.seed = *f.seed;
            if (!profile.empty()) spec.profile = profile;
            if (amplitude) spec.amplitude = *amplitude;
            if (noise) spec.noise = *noise;
            const auto path = ies::cmd_generate_scenario(spec, gen_out);
            const auto sc = ies::load_scenario(path.string());
            result = {{"scenario", path.string()}, {"scenario_hash", ies::scenario_hash(sc)}};
        } else if (*train) {
            const ies::RunConfig rc = base_config(f);
            const ies::ScenarioData sc = ies::resolve_scenario(rc);
            ies::learn::ProgressFn progress;
            if (!f.quiet) {
                progress = [every = std::max(1, rc.train.episodes / 50)](const ies::learn::EpisodeLog& e) {
                    if (e.episode % every == 0)
                        std::fprintf(stderr, "episode %d  reward %.5f  cost %.1f  penalty %.1f  curtailed %.1f\n",
                                     e.episode, e.mean_reward, e.total_cost, e.total_penalty, e.curtailment_kwh);
                };
            }
            const auto out = ies::cmd_train(rc, sc, rc.output_dir, progress);
            result = {{"checkpoint", out.checkpoint_path.string()},
                      {"train_log", out.log_path.string()},
                      {"reward_curve", out.curve_path.string()},
                      {"episodes", out.result.log.size()},
                      {"final_mean_reward", out.result.log.back().mean_reward}};
        } else if (*eval) {
            const ies::RunConfig rc = config_for_checkpoint(f, ckpt);
            const auto ev = ies::cmd_evaluate(ckpt, rc, ies::resolve_scenario(rc), rc.output_dir);
            result = ev.summary_json;
        } else if (*cmp) {
            const ies::RunConfig rc = config_for_checkpoint(f, ck_a);
            result = ies::cmd_compare(ck_a, ck_b, rc, ies::resolve_scenario(rc), rc.output_dir);
        } else if (*orc) {
            const ies::RunConfig rc = base_config(f);
            result = ies::cmd_oracle(rc, ies::resolve_scenario(rc), rc.grid_n, rc.output_dir).summary_json;
        }
        std::cout << result.dump(2) << std::endl;
        return 0;
    } catch (const std::exception& e) {
        std::cerr << ies::error_json(e).dump() << std::endl;
        return 1;
    }
}
