// Acceptance suite: one line per criterion, nonzero exit on any failure.
// Criterion 8 needs the recorded dataset; it is skipped (not failed) when
// GAZETAG_DATASET_DIR is not set. See README for the expected layout.

#include <chrono>
#include <thread>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gazetag/commands.hpp"
#include "gazetag/core.hpp"
#include "gazetag/events.hpp"
#include "gazetag/features.hpp"
#include "gazetag/ingest.hpp"
#include "gazetag/learn.hpp"
#include "gazetag/stats.hpp"
#include "gazetag/synth.hpp"
#include "oracles.hpp"

using namespace gazetag;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int id, bool pass, const std::string& name, const std::string& detail) {
    std::printf("%s criterion %d: %s (%s)\n", pass ? "PASS" : "FAIL", id,
                name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

void report_skip(int id, const std::string& name, const std::string& why) {
    std::printf("SKIP criterion %d: %s (%s)\n", id, name.c_str(), why.c_str());
    std::fflush(stdout);
}

int worker_jobs() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 2 ? static_cast<int>(hw) : 2;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Fixation fix_at(double x, double y, const std::string& obs = "o") {
    Fixation f;
    f.observer_id = obs;
    f.image_id = "img";
    f.x = x;
    f.y = y;
    f.duration_ms = 150.0;
    return f;
}

// ---- criterion 1: feature oracles ------------------------------------------

void criterion_1() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(1001);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    double worst_l1 = 0.0;
    for (int image = 0; image < 100; ++image) {
        const int w = 400 + static_cast<int>(rng() % 1200);
        const int h = 3 * w / 4;
        // sigma within the regime where cell-center sampling and the exact
        // box average agree to discretization accuracy
        const double cell = std::max(w / 20.0, h / 15.0);
        const double sigma = (2.5 + 1.5 * unit(rng)) * cell;
        const int n = 1 + static_cast<int>(rng() % 80);
        std::vector<Fixation> fixations;
        for (int i = 0; i < n; ++i) {
            fixations.push_back(fix_at(unit(rng) * w, unit(rng) * h));
        }
        const DensityMap map = fixation_density_map(fixations, w, h, sigma);
        const std::vector<double> oracle =
            oracles::fdm_center_eval(fixations, w, h, sigma);
        const std::vector<double> got(map.values.begin(), map.values.end());
        worst_l1 = std::max(worst_l1, oracles::relative_l1(got, oracle));
    }

    double worst_entropy = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        DensityMap map;
        double total = 0.0;
        for (double& v : map.values) {
            v = unit(rng);
            total += v;
        }
        for (double& v : map.values) v /= total;
        const std::vector<double> raw(map.values.begin(), map.values.end());
        worst_entropy = std::max(
            worst_entropy,
            std::fabs(density_entropy(map) - oracles::entropy_direct(raw)));
    }

    bool hist_exact = true;
    {
        std::vector<double> durations, lengths, slopes;
        for (int i = 0; i < 10000; ++i) {
            durations.push_back(unit(rng) * 2400.0);
            lengths.push_back(unit(rng) * 1500.0);
            slopes.push_back(unit(rng) * 179.9999);
        }
        hist_exact =
            histogram_rep(durations, HistogramKind::fixation_duration) ==
                oracles::histogram_scan(durations, 0.0, 2000.0, 60) &&
            histogram_rep(lengths, HistogramKind::saccade_length) ==
                oracles::histogram_scan(lengths, 0.0, 1280.0, 50) &&
            histogram_rep(slopes, HistogramKind::saccade_slope) ==
                oracles::histogram_scan(slopes, 0.0, 180.0, 30);
    }

    const double elapsed = seconds_since(t0);
    std::ostringstream detail;
    detail << "FDM worst rel-L1 " << worst_l1 << " < 0.02 on 100 images; entropy |d| "
           << worst_entropy << " <= 1e-12; histograms exact on 1e4 values: "
           << (hist_exact ? "yes" : "no") << "; " << elapsed << " s < 30 s";
    report(1, worst_l1 < 0.02 && worst_entropy <= 1e-12 && hist_exact && elapsed < 30.0,
           "feature oracle suite", detail.str());
}

// ---- criterion 2: IOVC calibration ------------------------------------------

void criterion_2() {
    std::mt19937_64 rng(2002);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int w = 1024, h = 768;
    const double sigma = 0.02 * w;

    double sum_auc = 0.0;
    const int images = 1000;
    for (int image = 0; image < images; ++image) {
        std::vector<Fixation> fixations;
        for (int obs = 0; obs < 4; ++obs) {
            for (int k = 0; k < 10; ++k) {
                fixations.push_back(
                    fix_at(unit(rng) * w, unit(rng) * h, "obs" + std::to_string(obs)));
            }
        }
        sum_auc += iovc(fixations, w, h, sigma).mean_auc;
    }
    const double mean_auc = sum_auc / images;

    const std::vector<Fixation> same = {fix_at(537.6, 384.0, "a"),
                                        fix_at(537.6, 384.0, "b")};
    const IOVCScore identical = iovc(same, w, h, sigma);

    std::ostringstream detail;
    detail << "uniform Monte-Carlo mean AUC " << mean_auc
           << " in [0.45, 0.55] over 1000 images; identical-fixation AUC "
           << identical.mean_auc << " == 1.0, std " << identical.std_auc << " == 0";
    report(2,
           mean_auc > 0.45 && mean_auc < 0.55 && identical.mean_auc == 1.0 &&
               identical.std_auc == 0.0,
           "IOVC calibration", detail.str());
}

// ---- criterion 3: center-bias recovery --------------------------------------

void criterion_3() {
    SyntheticScenario scenario;
    scenario.images_per_class = {50, 50, 50};
    scenario.observers = 20;
    scenario.fixations_per_trial_mean = 35.0;
    scenario.spatial_mode = SpatialMode::iid_spatial;
    scenario.seed = 3003;
    for (auto& d : scenario.per_class) {
        d.spatial.mu_x = 0.1;
        d.spatial.mu_y = -0.2;
        d.spatial.sigma_x = 0.2;
        d.spatial.sigma_y = 0.3;
    }
    const SynthResult result = generate(scenario);
    const CenterBiasModel model =
        fit_center_bias(result.trials.fixations, result.trials.images);

    const double e_mu_x = std::fabs(model.mu_x - 0.1);
    const double e_mu_y = std::fabs(model.mu_y + 0.2);
    const double e_sg_x = std::fabs(model.sigma_x - 0.2);
    const double e_sg_y = std::fabs(model.sigma_y - 0.3);
    std::ostringstream detail;
    detail << result.trials.fixations.size() << " samples; |mu err| = (" << e_mu_x
           << ", " << e_mu_y << "), |sigma err| = (" << e_sg_x << ", " << e_sg_y
           << "), all < 0.01";
    report(3,
           result.trials.fixations.size() >= 100000 && e_mu_x < 0.01 &&
               e_mu_y < 0.01 && e_sg_x < 0.01 && e_sg_y < 0.01,
           "center-bias recovery", detail.str());
}

// ---- criterion 4: ANOVA oracles ---------------------------------------------

void criterion_4() {
    std::mt19937_64 rng(4004);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, 1.0);

    double worst_f = 0.0, worst_p = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const int k = 2 + static_cast<int>(rng() % 5);
        std::vector<std::vector<double>> groups(k);
        for (int g = 0; g < k; ++g) {
            const int n = 3 + static_cast<int>(rng() % 25);
            const double shift = 2.5 * unit(rng);
            const double scale = 0.5 + 2.0 * unit(rng);
            for (int i = 0; i < n; ++i) {
                groups[g].push_back(shift + scale * noise(rng));
            }
        }
        const AnovaResult res = one_way_anova(groups);
        const oracles::AnovaOracle expect = oracles::anova_direct(groups);
        worst_f = std::max(worst_f, std::fabs(res.F - expect.f) /
                                        std::max(1.0, std::fabs(expect.f)));
        const double p_oracle =
            oracles::f_survival_quadrature(res.F, res.df_between, res.df_within);
        worst_p = std::max(worst_p, std::fabs(res.p - p_oracle));
    }

    const AnovaResult identical =
        one_way_anova({{1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}});

    std::ostringstream detail;
    detail << "100 random group sets: max relative F error " << worst_f
           << " <= 1e-10, max |p| error " << worst_p
           << " <= 1e-6; identical groups F = " << identical.F
           << ", p = " << identical.p;
    report(4,
           worst_f <= 1e-10 && worst_p <= 1e-6 && identical.F == 0.0 &&
               identical.p == 1.0,
           "ANOVA against quadrature oracle", detail.str());
}

// ---- criterion 5: protocol null calibration ---------------------------------

void criterion_5() {
    int pass_count = 0;
    double worst_lo = 100.0, worst_hi = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        std::mt19937_64 rng_y(seed * 7919 + 13), rng_x(seed * 104729 + 7);
        const int n = 300;
        std::vector<int> y;
        for (int i = 0; i < n; ++i) y.push_back(static_cast<int>(rng_y() % 3));
        FeatureMatrix x(n, 10);
        std::normal_distribution<double> noise(0.0, 1.0);
        for (double& v : x.data) v = noise(rng_x);

        CVProtocol protocol;
        protocol.repetitions = 20;
        protocol.seed = seed;
        protocol.jobs = worker_jobs();
        const EvalReport r = run_protocol(x, y, protocol);
        worst_lo = std::min(worst_lo, r.mean_accuracy_pct);
        worst_hi = std::max(worst_hi, r.mean_accuracy_pct);
        if (r.mean_accuracy_pct >= 30.0 && r.mean_accuracy_pct <= 37.0 &&
            r.mcnemar_p > 0.05) {
            ++pass_count;
        }
    }
    std::ostringstream detail;
    detail << pass_count << "/20 seeds inside mA in [30, 37] with p > 0.05 "
           << "(mA range [" << worst_lo << ", " << worst_hi << "]); need >= 18";
    report(5, pass_count >= 18, "protocol null calibration", detail.str());
}

// ---- criterion 6: protocol power --------------------------------------------

void criterion_6() {
    const auto t0 = std::chrono::steady_clock::now();

    // Planted class-conditional saccade lengths: 50 / 150 / 300 px, shape 4.
    SyntheticScenario scenario;
    scenario.images_per_class = {40, 40, 40};
    scenario.observers = 10;
    scenario.fixations_per_trial_mean = 12.0;
    scenario.seed = 6006;
    const double means[3] = {50.0, 150.0, 300.0};
    for (int c = 0; c < 3; ++c) {
        scenario.per_class[c].length_gamma_shape = 4.0;
        scenario.per_class[c].length_gamma_scale = means[c] / 4.0;
    }
    const SynthResult synth = generate(scenario);
    const ChannelBuildResult built =
        build_channel(synth.trials, FeatureKind::saccade_length_hist);
    const AlignedDataset data = align_channel(built.channel, synth.trials.images);

    CVProtocol protocol;
    protocol.repetitions = 20;
    protocol.seed = 6006;
    protocol.jobs = worker_jobs();
    const EvalReport planted = run_protocol(data.x, data.y, protocol);

    // Perfectly separable synthetic channel.
    std::mt19937_64 rng(6007);
    std::normal_distribution<double> noise(0.0, 0.05);
    const double centers[3][2] = {{1.0, 0.0}, {0.0, 1.0}, {-0.7, -0.7}};
    const int per_class = 40;
    FeatureMatrix sep(3 * per_class, 6);
    std::vector<int> sep_y;
    std::size_t row = 0;
    for (int c = 0; c < 3; ++c) {
        for (int i = 0; i < per_class; ++i) {
            sep.row(row)[0] = centers[c][0] + noise(rng);
            sep.row(row)[1] = centers[c][1] + noise(rng);
            for (int d = 2; d < 6; ++d) sep.row(row)[d] = noise(rng);
            sep_y.push_back(c);
            ++row;
        }
    }
    const EvalReport separable = run_protocol(sep, sep_y, protocol);

    const double elapsed = seconds_since(t0);
    std::ostringstream detail;
    detail << "planted saccade-length channel mA " << planted.mean_accuracy_pct
           << "% >= 60 with p " << planted.mcnemar_p << " < 0.001; separable mA "
           << separable.mean_accuracy_pct << "% >= 95; " << elapsed << " s < 300 s";
    report(6,
           planted.mean_accuracy_pct >= 60.0 && planted.mcnemar_p < 0.001 &&
               separable.mean_accuracy_pct >= 95.0 && elapsed < 300.0,
           "protocol power on planted channels", detail.str());
}

// ---- criterion 7: determinism -----------------------------------------------

void criterion_7() {
    const fs::path dir = fs::temp_directory_path() / "gazetag_acceptance" / "determinism";
    fs::remove_all(dir);
    fs::create_directories(dir);

    KeyValueConfig synth_config;
    synth_config.set("out.dir", (dir / "data").string());
    synth_config.set("seed", "777");
    synth_config.set("synth.images_per_class", "12;12;12");
    synth_config.set("synth.observers", "8");
    synth_config.set("synth.fixations_per_trial", "10");
    synth_config.set("synth.unpleasant.length_gamma_scale", "12.5");
    synth_config.set("synth.neutral.length_gamma_scale", "37.5");
    synth_config.set("synth.pleasant.length_gamma_scale", "75");
    cmd_synth(synth_config);

    KeyValueConfig features_config;
    features_config.set("data.fixations", (dir / "data" / "fixations.csv").string());
    features_config.set("data.metadata", (dir / "data" / "metadata.csv").string());
    features_config.set("out.dir", (dir / "features").string());
    features_config.set("seed", "777");
    const auto channels = cmd_features(features_config, {"saccade_length_hist"});

    KeyValueConfig eval_config;
    eval_config.set("data.metadata", (dir / "data" / "metadata.csv").string());
    eval_config.set("out.dir", (dir / "eval").string());
    eval_config.set("seed", "777");
    eval_config.set("protocol.repetitions", "5");
    EvalOptions options;
    options.channels = {channels[0]};

    const auto first = cmd_eval(eval_config, options);
    std::vector<std::string> bytes;
    for (const auto& path : first) {
        std::ifstream in(path, std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        bytes.push_back(buf.str());
    }
    const auto second = cmd_eval(eval_config, options);
    bool identical = first == second;
    for (std::size_t i = 0; identical && i < second.size(); ++i) {
        std::ifstream in(second[i], std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        identical = buf.str() == bytes[i];
    }
    report(7, identical, "cmd_eval determinism",
           identical ? "re-run with identical config+seed rewrote identical bytes"
                     : "outputs differed between identical runs");
}

// ---- criterion 8: conditional reproduction on the released dataset ----------

void criterion_8() {
    const char* env = std::getenv("GAZETAG_DATASET_DIR");
    if (env == nullptr || std::string(env).empty()) {
        report_skip(8, "released-dataset reproduction",
                    "GAZETAG_DATASET_DIR not set; see README for the layout");
        return;
    }
    const fs::path dir(env);
    std::ostringstream detail;
    bool ok = true;

    std::vector<ImageRecord> images = parse_metadata(dir / "metadata.csv");
    std::array<int, 3> split{};
    for (const ImageRecord& rec : images) split[static_cast<int>(rec.emotion)] += 1;
    detail << "class split u/n/p = " << split[0] << "/" << split[1] << "/" << split[2]
           << " (expect 84/164/134); ";
    ok = ok && split[0] == 84 && split[1] == 164 && split[2] == 134;

    FixationParseResult parsed = parse_fixation_log(dir / "fixations.csv");
    detail << "fixations " << parsed.fixations.size() << " (expect 120219); ";
    ok = ok && parsed.fixations.size() == 120219;

    clamp_fixations_to_bounds(parsed.fixations, images);
    std::vector<Saccade> saccades = derive_saccades(parsed.fixations);
    const TrialSet trials = build_trial_set(images, parsed.fixations, saccades);

    const CenterBiasModel bias = fit_center_bias(trials.fixations, trials.images);
    detail << "center bias mu (" << bias.mu_x << ", " << bias.mu_y << ") sigma ("
           << bias.sigma_x << ", " << bias.sigma_y << "); ";
    ok = ok && std::fabs(bias.mu_x - 0.006) < 0.02 &&
         std::fabs(bias.mu_y + 0.046) < 0.02 && std::fabs(bias.sigma_x - 0.23) < 0.03 &&
         std::fabs(bias.sigma_y - 0.26) < 0.03;

    const ChannelBuildResult iovc_channel = build_channel(trials, FeatureKind::iovc);
    double mean_iovc = 0.0;
    for (std::size_t r = 0; r < iovc_channel.channel.image_ids.size(); ++r) {
        mean_iovc += iovc_channel.channel.row(r)[0];
    }
    mean_iovc = 100.0 * mean_iovc / iovc_channel.channel.image_ids.size();
    detail << "mean IOVC " << mean_iovc << "% (expect 95.34 +/- 1.9); ";
    ok = ok && std::fabs(mean_iovc - 95.34) <= 1.9;

    CVProtocol protocol;
    protocol.seed = 8008;
    protocol.jobs = worker_jobs();

    const std::vector<std::string> s296 = parse_scenario_list(dir / "scenario_s296.txt");
    const ChannelBuildResult fdm = build_channel(trials, FeatureKind::fdm);
    const AlignedDataset fdm_data = align_channel(fdm.channel, trials.images, &s296);
    const EvalReport fdm_report = run_protocol(fdm_data.x, fdm_data.y, protocol);
    detail << "FDM s296 mA " << fdm_report.mean_accuracy_pct
           << "% (expect 37.8 +/- 3); ";
    ok = ok && std::fabs(fdm_report.mean_accuracy_pct - 37.8) <= 3.0;

    const ChannelBuildResult slope =
        build_channel(trials, FeatureKind::saccade_slope_hist);
    const AlignedDataset slope_data = align_channel(slope.channel, trials.images);
    const EvalReport slope_report = run_protocol(slope_data.x, slope_data.y, protocol);
    detail << "slope-hist s382 mA " << slope_report.mean_accuracy_pct
           << "% (expect 37.3 +/- 3)";
    ok = ok && std::fabs(slope_report.mean_accuracy_pct - 37.3) <= 3.0;

    report(8, ok, "released-dataset reproduction", detail.str());
}

}  // namespace

int main() {
    std::printf("gazetag acceptance suite\n");
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    if (g_failures == 0) {
        std::printf("all criteria passed\n");
    } else {
        std::printf("%d criteria FAILED\n", g_failures);
    }
    return g_failures;
}
