#include "gazetag/commands.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "gazetag/core.hpp"
#include "gazetag/errors.hpp"
#include "gazetag/events.hpp"
#include "gazetag/features.hpp"
#include "gazetag/ingest.hpp"
#include "gazetag/learn.hpp"
#include "gazetag/stats.hpp"
#include "gazetag/synth.hpp"

namespace gazetag {

namespace {

std::filesystem::path out_dir(const KeyValueConfig& config) {
    const std::string dir = config.get_string("out.dir");
    if (dir.empty()) throw ValidationError("missing required config key out.dir");
    std::filesystem::create_directories(dir);
    return dir;
}

void require_exists(const std::string& key, const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) {
        throw ValidationError("config key " + key + " points to a missing file: " +
                              path.string());
    }
}

DetectionParams detection_params(const KeyValueConfig& config) {
    DetectionParams params;
    params.dispersion_px = config.get_double("events.dispersion_px", params.dispersion_px);
    params.min_duration_ms =
        config.get_double("events.min_duration_ms", params.min_duration_ms);
    params.max_gap_ms = config.get_double("events.max_gap_ms", params.max_gap_ms);
    return params;
}

FeatureParams feature_params(const KeyValueConfig& config) {
    FeatureParams params;
    params.kernel_sigma_frac =
        config.get_double("features.kernel_sigma_frac", params.kernel_sigma_frac);
    params.hist.duration_max_ms =
        config.get_double("features.hist_duration_max_ms", params.hist.duration_max_ms);
    params.hist.length_max_px =
        config.get_double("features.hist_length_max_px", params.hist.length_max_px);
    params.hist.normalize = config.get_bool("features.hist_normalize", false);
    const std::string mode = config.get_string("features.hist_range_mode", "global");
    if (mode == "dataset") {
        params.hist_range_from_data = true;
    } else if (mode != "global") {
        throw ValidationError("features.hist_range_mode must be global or dataset");
    }
    return params;
}

CVProtocol protocol_from_config(const KeyValueConfig& config) {
    CVProtocol protocol;
    protocol.repetitions = config.get_int("protocol.repetitions", protocol.repetitions);
    protocol.balance = config.get_bool("protocol.balance", protocol.balance);
    protocol.seed = config.get_uint64("seed", 0);
    protocol.jobs = config.get_int("jobs", 1);
    const std::vector<std::string> grid = config.get_list("protocol.c_grid");
    if (!grid.empty()) {
        protocol.c_grid.clear();
        for (const std::string& c : grid) protocol.c_grid.push_back(std::stod(c));
    }
    protocol.validate();
    return protocol;
}

struct LoadedData {
    TrialSet trials;
    std::size_t clamped = 0;
    std::vector<std::string> warnings;
};

LoadedData load_trialset(const KeyValueConfig& config) {
    const std::string metadata_path = config.get_string("data.metadata");
    const std::string fixation_path = config.get_string("data.fixations");
    const std::string gaze_path = config.get_string("data.gaze");

    std::vector<std::string> missing;
    if (metadata_path.empty()) missing.push_back("data.metadata");
    if (fixation_path.empty() && gaze_path.empty()) {
        missing.push_back("data.fixations or data.gaze");
    }
    if (!missing.empty()) {
        std::string msg = "missing inputs:";
        for (const std::string& m : missing) msg += " " + m;
        throw ValidationError(msg);
    }
    require_exists("data.metadata", metadata_path);

    LoadedData out;
    std::vector<ImageRecord> images = parse_metadata(metadata_path);

    for (const char* name : {"s95", "s296", "s382"}) {
        const std::string key = std::string("data.scenario_") + name;
        const std::string path = config.get_string(key);
        if (path.empty()) continue;
        require_exists(key, path);
        const std::vector<std::string> ids = parse_scenario_list(path);
        const std::vector<std::string> unknown =
            apply_scenario(images, scenario_from_string(name), ids);
        for (const std::string& id : unknown) {
            out.warnings.push_back("scenario " + std::string(name) +
                                   " lists unknown image " + id);
        }
    }

    std::vector<Fixation> fixations;
    if (!fixation_path.empty()) {
        require_exists("data.fixations", fixation_path);
        FixationParseResult parsed = parse_fixation_log(fixation_path);
        fixations = std::move(parsed.fixations);
        out.warnings.insert(out.warnings.end(), parsed.warnings.begin(),
                            parsed.warnings.end());
    } else {
        require_exists("data.gaze", gaze_path);
        const std::vector<GazeSample> samples = parse_gaze_log(gaze_path);
        fixations = detect_fixations(samples, detection_params(config));
    }

    out.clamped = clamp_fixations_to_bounds(fixations, images);
    std::vector<Saccade> saccades = derive_saccades(fixations);
    out.trials = build_trial_set(std::move(images), std::move(fixations),
                                 std::move(saccades));
    return out;
}

std::optional<std::vector<std::string>> scenario_subset(const KeyValueConfig& config,
                                                        const std::string& scenario) {
    if (scenario.empty()) return std::nullopt;
    scenario_from_string(scenario);  // validates the name
    const std::string key = "data.scenario_" + scenario;
    const std::string path = config.get_string(key);
    if (path.empty()) {
        throw ValidationError("scenario " + scenario + " requested but " + key +
                              " is not configured");
    }
    require_exists(key, path);
    return parse_scenario_list(path);
}

void log_warnings(std::span<const std::string> warnings) {
    for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path.string());
    out << text;
}

}  // namespace

std::vector<std::filesystem::path> cmd_features(const KeyValueConfig& config,
                                                const std::vector<std::string>& kinds) {
    if (kinds.empty()) throw ValidationError("no feature kinds requested");
    const std::filesystem::path dir = out_dir(config);
    const std::uint64_t seed = config.get_uint64("seed", 0);
    const int jobs = config.get_int("jobs", 1);

    LoadedData data = load_trialset(config);
    log_warnings(data.warnings);
    if (data.clamped > 0) {
        std::cerr << "warning: clamped " << data.clamped
                  << " fixations to image bounds\n";
    }

    const FeatureParams params = feature_params(config);
    const std::vector<std::string> header = output_header(config, seed);

    std::vector<std::filesystem::path> written;
    for (const std::string& kind_name : kinds) {
        const FeatureKind kind = feature_kind_from_string(kind_name);
        ChannelBuildResult built = build_channel(data.trials, kind, params, jobs);
        for (const std::string& id : built.skipped_images) {
            std::cerr << "warning: image " << id << " lacks events for channel "
                      << kind_name << "\n";
        }
        const std::filesystem::path path = dir / (kind_name + ".csv");
        write_feature_channel(path, built.channel, header);
        written.push_back(path);
    }
    return written;
}

namespace {

std::string channel_label(const EvalOptions& options,
                          std::span<const FeatureChannel> channels) {
    std::string label;
    for (const FeatureChannel& ch : channels) {
        if (!label.empty()) label += "+";
        label += ch.name;
    }
    if (options.fuse) label = "fuse_" + label;
    if (!options.scenario.empty()) label += "_" + options.scenario;
    return label;
}

void check_identical_coverage(std::span<const FeatureChannel> channels) {
    std::set<std::string> base(channels[0].image_ids.begin(),
                               channels[0].image_ids.end());
    for (std::size_t i = 1; i < channels.size(); ++i) {
        std::set<std::string> other(channels[i].image_ids.begin(),
                                    channels[i].image_ids.end());
        if (other == base) continue;
        std::vector<std::string> diff;
        std::set_symmetric_difference(base.begin(), base.end(), other.begin(),
                                      other.end(), std::back_inserter(diff));
        std::ostringstream msg;
        msg << "channels '" << channels[0].name << "' and '" << channels[i].name
            << "' cover different image sets; symmetric difference:";
        for (const std::string& id : diff) msg << ' ' << id;
        throw ValidationError(msg.str());
    }
}

}  // namespace

std::vector<std::filesystem::path> cmd_eval(const KeyValueConfig& config,
                                            const EvalOptions& options) {
    const std::filesystem::path dir = out_dir(config);
    const std::uint64_t seed = config.get_uint64("seed", 0);
    const CVProtocol protocol = protocol_from_config(config);

    const std::string metadata_path = config.get_string("data.metadata");
    if (metadata_path.empty()) {
        throw ValidationError("missing inputs: data.metadata");
    }
    require_exists("data.metadata", metadata_path);
    std::vector<ImageRecord> images = parse_metadata(metadata_path);

    const std::optional<std::vector<std::string>> subset =
        scenario_subset(config, options.scenario);

    std::vector<std::filesystem::path> written;
    const std::vector<std::string> header = output_header(config, seed);

    if (options.sweep_observers) {
        LoadedData data = load_trialset(config);
        log_warnings(data.warnings);

        ObserverSweepParams sweep;
        sweep.subsets_per_n = config.get_int("sweep.subsets_per_n", sweep.subsets_per_n);
        sweep.kernel_sigma_frac = feature_params(config).kernel_sigma_frac;
        for (const std::string& n : config.get_list("sweep.n_values")) {
            sweep.n_values.push_back(std::stoi(n));
        }
        if (sweep.n_values.empty()) {
            const int total = static_cast<int>(data.trials.observers.size());
            for (int n : {2, 5, 10, 15}) {
                if (n < total) sweep.n_values.push_back(n);
            }
            sweep.n_values.push_back(total);
        }

        const std::vector<ObserverSweepPoint> curve =
            observer_sweep(data.trials, protocol, sweep);

        std::ostringstream csv;
        for (const std::string& line : header) csv << "# " << line << "\n";
        csv << "n_observers,mean_accuracy_pct,ci95_lo_pct,ci95_hi_pct,subset_draws\n";
        for (const ObserverSweepPoint& p : curve) {
            csv << p.n_observers << ',' << format_double(p.mean_accuracy_pct) << ','
                << format_double(p.ci95_lo_pct) << ',' << format_double(p.ci95_hi_pct)
                << ',' << p.subset_draws << '\n';
        }
        const std::filesystem::path path = dir / "sweep_observers_fdm.csv";
        write_text_file(path, csv.str());
        written.push_back(path);
        return written;
    }

    if (options.channels.empty()) {
        throw ValidationError("missing inputs: at least one --channel file");
    }
    std::vector<FeatureChannel> channels;
    for (const std::filesystem::path& path : options.channels) {
        require_exists("channel", path);
        channels.push_back(load_feature_channel(path));
    }
    if (config.get_bool("eval.l1_normalize", false)) {
        for (FeatureChannel& ch : channels) l1_normalize_rows(ch);
    }

    const std::string label = channel_label(options, channels);
    const std::vector<std::pair<std::string, std::string>> extra = {
        {"gazetag_version", std::string(kVersion)},
        {"seed", std::to_string(seed)},
        {"config_hash", config.hash()},
        {"scenario", options.scenario.empty() ? "all" : options.scenario},
    };

    EvalReport report;
    if (options.classemes) {
        if (channels.size() != 1) {
            throw ValidationError("--classemes expects exactly one channel");
        }
        const AlignedDataset data = align_channel(
            channels[0], images, subset ? &*subset : nullptr);
        const ClassemeAnalysis analysis = classeme_analysis(data.x, data.y, protocol);
        report = analysis.report;
        report.channel_name = label;

        std::ostringstream csv;
        for (const std::string& line : header) csv << "# " << line << "\n";
        csv << "visual_class,unpleasant_share,neutral_share,pleasant_share,"
               "image_count,pleasantness_mean\n";
        for (const ClassemeCooccurrenceRow& row : analysis.cooccurrence) {
            csv << row.visual_class << ',' << format_double(row.emotion_share[0])
                << ',' << format_double(row.emotion_share[1]) << ','
                << format_double(row.emotion_share[2]) << ',' << row.image_count
                << ',' << format_double(row.pleasantness_mean) << '\n';
        }
        const std::filesystem::path cooc = dir / ("cooccurrence_" + label + ".csv");
        write_text_file(cooc, csv.str());
        written.push_back(cooc);
    } else if (channels.size() > 1 || options.fuse) {
        if (channels.size() < 2) {
            throw ValidationError("--fuse needs at least two channels");
        }
        if (!subset) check_identical_coverage(channels);
        std::vector<FeatureMatrix> matrices;
        std::vector<int> labels;
        const std::vector<std::string>* wanted = subset ? &*subset : nullptr;
        std::vector<std::string> base_ids;
        for (std::size_t i = 0; i < channels.size(); ++i) {
            AlignedDataset data = align_channel(channels[i], images, wanted);
            if (i == 0) {
                labels = data.y;
                base_ids = data.image_ids;
            } else if (data.image_ids != base_ids) {
                throw ValidationError("channels disagree on the evaluated image set");
            }
            matrices.push_back(std::move(data.x));
        }
        report = late_fuse(matrices, labels, protocol);
        report.channel_name = label;
    } else {
        const AlignedDataset data = align_channel(
            channels[0], images, subset ? &*subset : nullptr);
        report = run_protocol(data.x, data.y, protocol);
        report.channel_name = label;
    }

    const std::filesystem::path json_path = dir / ("eval_" + label + ".json");
    const std::filesystem::path text_path = dir / ("eval_" + label + ".txt");
    write_text_file(json_path, report_to_json(report, extra));
    write_text_file(text_path, report_to_text(report));
    written.push_back(json_path);
    written.push_back(text_path);
    return written;
}

std::vector<std::filesystem::path> cmd_stats(const KeyValueConfig& config) {
    const std::filesystem::path dir = out_dir(config);
    const std::uint64_t seed = config.get_uint64("seed", 0);
    const std::vector<std::string> header = output_header(config, seed);

    LoadedData data = load_trialset(config);
    log_warnings(data.warnings);

    std::map<std::string, std::string> genders;
    const std::string gender_path = config.get_string("data.genders");
    const bool have_genders = !gender_path.empty();
    if (have_genders) {
        require_exists("data.genders", gender_path);
        genders = parse_observer_genders(gender_path);
    }

    std::vector<std::filesystem::path> written;
    const auto emit = [&](const std::string& name, const std::string& body) {
        std::ostringstream text;
        for (const std::string& line : header) text << "# " << line << "\n";
        text << body;
        const std::filesystem::path path = dir / name;
        write_text_file(path, text.str());
        written.push_back(path);
    };

    {
        const DatasetSummary summary = dataset_summary(data.trials);
        std::ostringstream body;
        body << "class,fixations\n";
        for (EmotionClass c : kClassOrder) {
            body << to_string(c) << ','
                 << summary.fixations_per_class[static_cast<int>(c)] << '\n';
        }
        body << "total," << summary.total_fixations << '\n';
        body << "# observers=" << summary.observer_count
             << " total_gaze_time_ms=" << format_double(summary.total_gaze_time_ms)
             << '\n';
        emit("fixation_counts.csv", body.str());
    }

    const std::vector<Measure> measures = {Measure::fixation_duration,
                                           Measure::saccade_length,
                                           Measure::saccade_slope};

    const auto run_block = [&](GroupBy group_by, const std::string& tag) {
        const std::map<std::string, std::string>* sidecar =
            group_by == GroupBy::gender ? &genders : nullptr;

        std::ostringstream anova_body;
        anova_body << "measure,df_between,df_within,F,p,degenerate\n";

        for (Measure measure : measures) {
            const std::vector<GroupSummary> summary =
                grouped_summary(data.trials, group_by, measure, sidecar);

            std::vector<std::vector<double>> groups;
            for (const GroupSummary& g : summary) groups.push_back(g.per_image_values);

            const AnovaResult anova = one_way_anova(groups);
            anova_body << to_string(measure) << ',' << anova.df_between << ','
                       << anova.df_within << ',' << format_double(anova.F) << ','
                       << format_double(anova.p) << ',' << (anova.degenerate ? 1 : 0)
                       << '\n';

            const TukeyResult tukey = tukey_kramer(groups);
            std::ostringstream tukey_body;
            tukey_body << "group_a,group_b,mean_diff,q,q_critical,significant\n";
            for (const TukeyPair& pair : tukey.pairs) {
                tukey_body << summary[pair.group_a].group << ','
                           << summary[pair.group_b].group << ','
                           << format_double(pair.mean_diff) << ','
                           << format_double(pair.q) << ','
                           << format_double(tukey.q_critical) << ','
                           << (pair.significant ? 1 : 0) << '\n';
            }
            emit("tukey_" + tag + std::string(to_string(measure)) + ".csv",
                 tukey_body.str());

            std::ostringstream grouped_body;
            grouped_body << "group,mean,std,n,min,q1,median,q3,max,"
                            "lower_fence,upper_fence\n";
            for (const GroupSummary& g : summary) {
                grouped_body << g.group << ',' << format_double(g.mean) << ','
                             << format_double(g.stddev) << ',' << g.n << ','
                             << format_double(g.box.min) << ','
                             << format_double(g.box.q1) << ','
                             << format_double(g.box.median) << ','
                             << format_double(g.box.q3) << ','
                             << format_double(g.box.max) << ','
                             << format_double(g.box.lower_fence) << ','
                             << format_double(g.box.upper_fence) << '\n';
            }
            emit("grouped_" + tag + std::string(to_string(measure)) + ".csv",
                 grouped_body.str());
        }
        emit("anova_" + tag.substr(0, tag.size() - 1) + ".csv", anova_body.str());
    };

    run_block(GroupBy::emotion_class, "emotion_");
    if (have_genders) run_block(GroupBy::gender, "gender_");

    return written;
}

std::vector<std::filesystem::path> cmd_synth(const KeyValueConfig& config) {
    const std::filesystem::path dir = out_dir(config);

    SyntheticScenario scenario;
    scenario.seed = config.get_uint64("synth.seed", config.get_uint64("seed", 0));
    scenario.observers = config.get_int("synth.observers", scenario.observers);
    scenario.fixations_per_trial_mean = config.get_double(
        "synth.fixations_per_trial", scenario.fixations_per_trial_mean);
    scenario.image_width = config.get_int("synth.image_width", scenario.image_width);
    scenario.image_height = config.get_int("synth.image_height", scenario.image_height);
    scenario.timeline_jitter_sigma_px = config.get_double(
        "synth.timeline_jitter_px", scenario.timeline_jitter_sigma_px);

    const std::vector<std::string> per_class = config.get_list("synth.images_per_class");
    if (!per_class.empty()) {
        if (per_class.size() != 3) {
            throw ValidationError("synth.images_per_class needs three ';' values");
        }
        for (int c = 0; c < 3; ++c) scenario.images_per_class[c] = std::stoi(per_class[c]);
    }
    const std::string mode = config.get_string("synth.spatial_mode", "walk");
    if (mode == "walk") scenario.spatial_mode = SpatialMode::planted_walk;
    else if (mode == "iid") scenario.spatial_mode = SpatialMode::iid_spatial;
    else throw ValidationError("synth.spatial_mode must be walk or iid");

    for (int c = 0; c < 3; ++c) {
        const std::string prefix =
            "synth." + std::string(to_string(EmotionClass(c))) + ".";
        ClassDistributions& d = scenario.per_class[c];
        d.duration_log_mu = config.get_double(prefix + "duration_log_mu", d.duration_log_mu);
        d.duration_log_sigma =
            config.get_double(prefix + "duration_log_sigma", d.duration_log_sigma);
        d.length_gamma_shape =
            config.get_double(prefix + "length_gamma_shape", d.length_gamma_shape);
        d.length_gamma_scale =
            config.get_double(prefix + "length_gamma_scale", d.length_gamma_scale);
        d.slope_vm_mu_deg = config.get_double(prefix + "slope_vm_mu_deg", d.slope_vm_mu_deg);
        d.slope_vm_kappa = config.get_double(prefix + "slope_vm_kappa", d.slope_vm_kappa);
        d.spatial.mu_x = config.get_double(prefix + "spatial_mu_x", d.spatial.mu_x);
        d.spatial.mu_y = config.get_double(prefix + "spatial_mu_y", d.spatial.mu_y);
        d.spatial.sigma_x = config.get_double(prefix + "spatial_sigma_x", d.spatial.sigma_x);
        d.spatial.sigma_y = config.get_double(prefix + "spatial_sigma_y", d.spatial.sigma_y);
    }

    const SynthResult result = generate(scenario);
    const std::vector<std::string> header = output_header(config, scenario.seed);

    std::vector<std::filesystem::path> written;
    const std::filesystem::path fixation_path = dir / "fixations.csv";
    write_fixation_log(fixation_path, result.trials.fixations, header);
    written.push_back(fixation_path);

    const std::filesystem::path metadata_path = dir / "metadata.csv";
    write_metadata(metadata_path, result.trials.images, header);
    written.push_back(metadata_path);

    nlohmann::json ledger;
    ledger["total_fixations"] = result.ledger.total_fixations;
    ledger["fixations_per_class"] = result.ledger.fixations_per_class;
    ledger["trials"] = nlohmann::json::array();
    for (const TrialTruth& t : result.ledger.trials) {
        ledger["trials"].push_back({{"observer_id", t.observer_id},
                                    {"image_id", t.image_id},
                                    {"fixations", t.planted.size()}});
    }
    const std::filesystem::path ledger_path = dir / "ledger.json";
    write_text_file(ledger_path, ledger.dump(2) + "\n");
    written.push_back(ledger_path);

    if (config.get_bool("synth.timeline", false)) {
        const TimelineResult timeline = generate_trial_timeline(scenario);
        const std::filesystem::path gaze_path = dir / "gaze.csv";
        write_gaze_log(gaze_path, timeline.samples, header);
        written.push_back(gaze_path);
    }
    return written;
}

std::vector<std::filesystem::path> cmd_ingest_validate(const KeyValueConfig& config) {
    bool any = false;

    const std::string gaze_path = config.get_string("data.gaze");
    if (!gaze_path.empty()) {
        require_exists("data.gaze", gaze_path);
        const std::vector<GazeSample> samples = parse_gaze_log(gaze_path);
        std::cout << "ok data.gaze " << gaze_path << " rows=" << samples.size() << "\n";
        any = true;
    }
    const std::string fixation_path = config.get_string("data.fixations");
    if (!fixation_path.empty()) {
        require_exists("data.fixations", fixation_path);
        const FixationParseResult parsed = parse_fixation_log(fixation_path);
        std::cout << "ok data.fixations " << fixation_path
                  << " rows=" << parsed.fixations.size()
                  << " dropped=" << parsed.dropped_rows << "\n";
        any = true;
    }
    const std::string metadata_path = config.get_string("data.metadata");
    if (!metadata_path.empty()) {
        require_exists("data.metadata", metadata_path);
        const std::vector<ImageRecord> images = parse_metadata(metadata_path);
        std::cout << "ok data.metadata " << metadata_path << " rows=" << images.size()
                  << "\n";
        any = true;
    }
    for (const char* name : {"s95", "s296", "s382"}) {
        const std::string key = std::string("data.scenario_") + name;
        const std::string path = config.get_string(key);
        if (path.empty()) continue;
        require_exists(key, path);
        std::cout << "ok " << key << " " << path
                  << " rows=" << parse_scenario_list(path).size() << "\n";
        any = true;
    }
    const std::string gender_path = config.get_string("data.genders");
    if (!gender_path.empty()) {
        require_exists("data.genders", gender_path);
        std::cout << "ok data.genders " << gender_path
                  << " rows=" << parse_observer_genders(gender_path).size() << "\n";
        any = true;
    }
    if (!any) {
        throw ValidationError("missing inputs: nothing to validate (set data.* keys)");
    }
    return {};
}

}  // namespace gazetag
