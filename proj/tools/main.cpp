#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "gazetag/commands.hpp"
#include "gazetag/config.hpp"

namespace {

gazetag::KeyValueConfig resolve_config(const std::string& config_path,
                                       const std::vector<std::string>& overrides) {
    gazetag::KeyValueConfig config;
    if (!config_path.empty()) {
        config = gazetag::KeyValueConfig::from_file(config_path);
    }
    for (const std::string& kv : overrides) {
        const std::size_t eq = kv.find('=');
        if (eq == std::string::npos) {
            throw std::runtime_error("--set expects key=value, got: " + kv);
        }
        config.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gaze-based image pleasantness tagging toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;

    // Common flags, registered on every subcommand.
    const auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("-c,--config", config_path, "key = value config file");
        cmd->add_option("--set", overrides, "override a config key (key=value)");
        cmd->add_option_function<std::string>(
            "--out", [&](const std::string& v) { overrides.push_back("out.dir=" + v); },
            "output directory (out.dir)");
        cmd->add_option_function<std::string>(
            "--seed", [&](const std::string& v) { overrides.push_back("seed=" + v); },
            "root seed (seed)");
        cmd->add_option_function<std::string>(
            "--jobs", [&](const std::string& v) { overrides.push_back("jobs=" + v); },
            "worker thread cap (jobs)");
        cmd->add_option_function<std::string>(
            "--metadata",
            [&](const std::string& v) { overrides.push_back("data.metadata=" + v); },
            "image metadata CSV (data.metadata)");
        cmd->add_option_function<std::string>(
            "--fixations",
            [&](const std::string& v) { overrides.push_back("data.fixations=" + v); },
            "fixation log CSV (data.fixations)");
        cmd->add_option_function<std::string>(
            "--gaze", [&](const std::string& v) { overrides.push_back("data.gaze=" + v); },
            "raw gaze log CSV (data.gaze)");
    };

    CLI::App* features = app.add_subcommand(
        "features", "compute gaze feature channels and write channel CSVs");
    std::vector<std::string> kinds;
    features->add_option("--kinds", kinds,
                         "feature kinds (fdm, fdm_entropy, *_meanstd, *_hist, iovc)")
        ->required()
        ->delimiter(',');
    add_common(features);

    CLI::App* eval = app.add_subcommand(
        "eval", "run the balanced cross-validation protocol on feature channels");
    gazetag::EvalOptions eval_options;
    std::vector<std::string> channel_paths;
    eval->add_option("--channel", channel_paths, "feature channel CSV (repeatable)")
        ->take_all();
    eval->add_option("--scenario", eval_options.scenario,
                     "image subset: s95, s296 or s382");
    eval->add_flag("--fuse", eval_options.fuse, "late-fuse all given channels");
    eval->add_flag("--sweep-observers", eval_options.sweep_observers,
                   "observer-count sweep over the density-map channel");
    eval->add_flag("--classemes", eval_options.classemes,
                   "classeme channel analysis with co-occurrence table");
    add_common(eval);

    CLI::App* stats = app.add_subcommand(
        "stats", "descriptive statistics tables (ANOVA, post-hoc, box plots)");
    add_common(stats);

    CLI::App* synth = app.add_subcommand(
        "synth", "generate a synthetic dataset from synth.* scenario keys");
    add_common(synth);

    CLI::App* validate = app.add_subcommand(
        "ingest-validate", "parse all configured inputs and report row counts");
    add_common(validate);

    CLI11_PARSE(app, argc, argv);

    try {
        const gazetag::KeyValueConfig config = resolve_config(config_path, overrides);
        std::vector<std::filesystem::path> written;
        if (features->parsed()) {
            written = gazetag::cmd_features(config, kinds);
        } else if (eval->parsed()) {
            for (const std::string& p : channel_paths) {
                eval_options.channels.emplace_back(p);
            }
            written = gazetag::cmd_eval(config, eval_options);
        } else if (stats->parsed()) {
            written = gazetag::cmd_stats(config);
        } else if (synth->parsed()) {
            written = gazetag::cmd_synth(config);
        } else if (validate->parsed()) {
            written = gazetag::cmd_ingest_validate(config);
        }
        for (const auto& path : written) {
            std::cout << "wrote " << path.string() << "\n";
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
