#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <tuple>

#include "gazetag/errors.hpp"
#include "gazetag/features.hpp"
#include "oracles.hpp"

using namespace gazetag;

namespace {

Fixation fix_at(double x, double y, double onset = 0.0,
                const std::string& obs = "o", const std::string& img = "i") {
    Fixation f;
    f.observer_id = obs;
    f.image_id = img;
    f.x = x;
    f.y = y;
    f.onset_ms = onset;
    f.duration_ms = 150.0;
    return f;
}

ImageRecord image(const std::string& id, double sam, int w = 1024, int h = 768) {
    ImageRecord rec;
    rec.image_id = id;
    rec.sam_all = rec.sam_male = rec.sam_female = sam;
    rec.emotion = label_emotion_class(sam);
    rec.width_px = w;
    rec.height_px = h;
    return rec;
}

}  // namespace

TEST_CASE("density map: a center fixation peaks at cell (10, 7) and sums to 1") {
    const std::vector<Fixation> fixations = {fix_at(512.0, 384.0)};
    const DensityMap map = fixation_density_map(fixations, 1024, 768, 20.48);
    double total = 0.0;
    for (double v : map.values) {
        CHECK(v >= 0.0);
        total += v;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    const int arg = map.argmax_cell();
    CHECK(arg % kDensityCols == 10);
    CHECK(arg / kDensityCols == 7);
}

TEST_CASE("density map: mirrored fixations give a mirrored map") {
    const int w = 1024, h = 768;
    const std::vector<Fixation> fixations = {fix_at(300.25, 200.5),
                                             fix_at(w - 300.25, 200.5)};
    const DensityMap map = fixation_density_map(fixations, w, h, 20.48);
    for (int r = 0; r < kDensityRows; ++r) {
        for (int c = 0; c < kDensityCols; ++c) {
            const double a = map.at(c, r);
            const double b = map.at(kDensityCols - 1 - c, r);
            CHECK(a == doctest::Approx(b).epsilon(1e-9));
        }
    }
}

TEST_CASE("density map matches the cell-center mixture oracle within 2%") {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> width(400, 1600);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 25; ++trial) {
        const int w = width(rng);
        const int h = 3 * w / 4;
        const double cell = std::max(w / 20.0, h / 15.0);
        const double sigma = (2.5 + 1.5 * unit(rng)) * cell;
        const int n = 1 + static_cast<int>(rng() % 50);
        std::vector<Fixation> fixations;
        for (int i = 0; i < n; ++i) {
            fixations.push_back(fix_at(unit(rng) * w, unit(rng) * h));
        }
        const DensityMap map = fixation_density_map(fixations, w, h, sigma);
        const std::vector<double> oracle =
            oracles::fdm_center_eval(fixations, w, h, sigma);
        const std::vector<double> got(map.values.begin(), map.values.end());
        CHECK(oracles::relative_l1(got, oracle) < 0.02);
    }
}

TEST_CASE("density map requires fixations") {
    CHECK_THROWS_AS(fixation_density_map({}, 1024, 768, 20.0), InsufficientDataError);
}

TEST_CASE("entropy: uniform, point mass, and the direct-summation oracle") {
    DensityMap uniform;
    uniform.values.fill(1.0 / kDensityCells);
    CHECK(density_entropy(uniform) ==
          doctest::Approx(std::log2(300.0)).epsilon(1e-12));
    CHECK(density_entropy(uniform) == doctest::Approx(8.228818690495881).epsilon(1e-9));

    DensityMap point;
    point.values.fill(0.0);
    point.values[42] = 1.0;
    CHECK(density_entropy(point) == 0.0);

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    DensityMap random_map;
    double total = 0.0;
    for (double& v : random_map.values) {
        v = unit(rng);
        total += v;
    }
    for (double& v : random_map.values) v /= total;
    const std::vector<double> raw(random_map.values.begin(), random_map.values.end());
    CHECK(density_entropy(random_map) ==
          doctest::Approx(oracles::entropy_direct(raw)).epsilon(1e-12));

    DensityMap bad;
    bad.values.fill(0.5);
    CHECK_THROWS_AS(density_entropy(bad), ContractViolation);
}

TEST_CASE("entropy is invariant under cell permutations") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    DensityMap map;
    double total = 0.0;
    for (double& v : map.values) {
        v = unit(rng);
        total += v;
    }
    for (double& v : map.values) v /= total;
    const double h = density_entropy(map);
    DensityMap shuffled = map;
    std::shuffle(shuffled.values.begin(), shuffled.values.end(), rng);
    CHECK(density_entropy(shuffled) == doctest::Approx(h).epsilon(1e-12));
}

TEST_CASE("summary representation") {
    const std::vector<double> constant = {5.0, 5.0, 5.0};
    auto [m1, s1] = summary_rep(constant);
    CHECK(m1 == 5.0);
    CHECK(s1 == 0.0);

    const std::vector<double> four = {1.0, 2.0, 3.0, 4.0};
    auto [m2, s2] = summary_rep(four);
    CHECK(m2 == doctest::Approx(2.5));
    CHECK(s2 == doctest::Approx(std::sqrt(5.0 / 3.0)).epsilon(1e-12));
    CHECK(s2 == doctest::Approx(1.2910).epsilon(1e-4));

    const std::vector<double> single = {7.0};
    auto [m3, s3] = summary_rep(single);
    CHECK(m3 == 7.0);
    CHECK(s3 == 0.0);

    CHECK_THROWS_AS(summary_rep({}), ContractViolation);
}

TEST_CASE("histograms: bin counts, edges and the clamp rule") {
    SUBCASE("empty input gives zero vectors of the right length") {
        CHECK(histogram_rep({}, HistogramKind::fixation_duration).size() == 60);
        CHECK(histogram_rep({}, HistogramKind::saccade_length).size() == 50);
        CHECK(histogram_rep({}, HistogramKind::saccade_slope).size() == 30);
        for (double v : histogram_rep({}, HistogramKind::saccade_slope)) {
            CHECK(v == 0.0);
        }
    }
    SUBCASE("slope bins are six degrees wide") {
        const std::vector<double> slopes = {0.0, 6.0, 179.0};
        const auto counts = histogram_rep(slopes, HistogramKind::saccade_slope);
        CHECK(counts[0] == 1.0);
        CHECK(counts[1] == 1.0);
        CHECK(counts[29] == 1.0);
        double sum = 0.0;
        for (double v : counts) sum += v;
        CHECK(sum == 3.0);
    }
    SUBCASE("slope outside the domain violates the contract") {
        CHECK_THROWS_AS(histogram_rep(std::vector<double>{180.0},
                                      HistogramKind::saccade_slope),
                        ContractViolation);
        CHECK_THROWS_AS(histogram_rep(std::vector<double>{-1.0},
                                      HistogramKind::saccade_slope),
                        ContractViolation);
    }
    SUBCASE("durations and lengths above the range land in the last bin") {
        const auto dur = histogram_rep(std::vector<double>{2500.0, 2000.0},
                                       HistogramKind::fixation_duration);
        CHECK(dur[59] == 2.0);
        const auto len = histogram_rep(std::vector<double>{5000.0},
                                       HistogramKind::saccade_length);
        CHECK(len[49] == 1.0);
    }
}

TEST_CASE("histograms match the per-value scan oracle") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> dur(0.0, 2300.0);
    std::uniform_real_distribution<double> len(0.0, 1500.0);
    std::uniform_real_distribution<double> slope(0.0, 179.999);

    std::vector<double> durations, lengths, slopes;
    for (int i = 0; i < 3000; ++i) {
        durations.push_back(dur(rng));
        lengths.push_back(len(rng));
        slopes.push_back(slope(rng));
    }
    CHECK(histogram_rep(durations, HistogramKind::fixation_duration) ==
          oracles::histogram_scan(durations, 0.0, 2000.0, 60));
    CHECK(histogram_rep(lengths, HistogramKind::saccade_length) ==
          oracles::histogram_scan(lengths, 0.0, 1280.0, 50));
    CHECK(histogram_rep(slopes, HistogramKind::saccade_slope) ==
          oracles::histogram_scan(slopes, 0.0, 180.0, 30));
}

TEST_CASE("histogram: adding one event increments exactly one bin") {
    std::mt19937_64 rng(78);
    std::uniform_real_distribution<double> len(0.0, 1400.0);
    std::vector<double> values;
    for (int i = 0; i < 200; ++i) values.push_back(len(rng));
    auto before = histogram_rep(values, HistogramKind::saccade_length);
    for (int i = 0; i < 50; ++i) {
        values.push_back(len(rng));
        const auto after = histogram_rep(values, HistogramKind::saccade_length);
        int changed = 0;
        for (std::size_t b = 0; b < after.size(); ++b) {
            if (after[b] != before[b]) {
                ++changed;
                CHECK(after[b] == before[b] + 1.0);
            }
        }
        CHECK(changed == 1);
        before = after;
    }
}

TEST_CASE("IOVC: two observers on the same spot agree perfectly") {
    // Centre of cell (10, 7): strictly inside, so the peak is unambiguous.
    const double x = 537.6, y = 384.0;
    const std::vector<Fixation> fixations = {fix_at(x, y, 0, "a"),
                                             fix_at(x, y, 0, "b")};
    const IOVCScore score = iovc(fixations, 1024, 768, 20.48);
    CHECK(score.mean_auc == 1.0);
    CHECK(score.std_auc == 0.0);
    CHECK(score.observers == 2);
}

TEST_CASE("IOVC needs two observers") {
    const std::vector<Fixation> fixations = {fix_at(10, 10, 0, "a"),
                                             fix_at(20, 20, 200, "a")};
    CHECK_THROWS_AS(iovc(fixations, 1024, 768, 20.0), InsufficientDataError);
}

TEST_CASE("AUC is invariant under strictly monotone transforms of the map") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> unit(0.001, 1.0);
    std::vector<double> map(kDensityCells);
    for (double& v : map) v = unit(rng);
    std::vector<int> positives = {3, 77, 150, 299};

    const double base = roc_auc_cells(map, positives);
    std::vector<double> logged(map.size()), powed(map.size());
    for (std::size_t i = 0; i < map.size(); ++i) {
        logged[i] = std::log(map[i]);
        powed[i] = map[i] * map[i] * map[i];
    }
    CHECK(roc_auc_cells(logged, positives) == doctest::Approx(base).epsilon(1e-12));
    CHECK(roc_auc_cells(powed, positives) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("center bias: degenerate on exact centers, equivariant under shifts") {
    const std::vector<ImageRecord> images = {image("i", 5.0)};
    std::vector<Fixation> fixations = {fix_at(512.0, 384.0, 0),
                                       fix_at(512.0, 384.0, 200)};
    const CenterBiasModel center = fit_center_bias(fixations, images);
    CHECK(center.mu_x == doctest::Approx(0.0));
    CHECK(center.mu_y == doctest::Approx(0.0));
    CHECK(center.sigma_x == 0.0);
    CHECK(center.sigma_y == 0.0);
    CHECK(center.degenerate);

    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> coord(200.0, 800.0);
    fixations.clear();
    for (int i = 0; i < 50; ++i) {
        fixations.push_back(fix_at(coord(rng), coord(rng) * 0.7, i * 200.0));
    }
    const CenterBiasModel base = fit_center_bias(fixations, images);
    std::vector<Fixation> shifted = fixations;
    const double delta = 0.125;  // exact in binary
    for (Fixation& f : shifted) f.x += delta * 512.0;
    const CenterBiasModel moved = fit_center_bias(shifted, images);
    CHECK(moved.mu_x == doctest::Approx(base.mu_x + delta).epsilon(1e-12));
    CHECK(moved.mu_y == doctest::Approx(base.mu_y).epsilon(1e-12));
    CHECK(moved.sigma_x == doctest::Approx(base.sigma_x).epsilon(1e-12));
    CHECK(moved.sigma_y == doctest::Approx(base.sigma_y).epsilon(1e-12));
}

TEST_CASE("build_channel: dimensions, skips and the summary oracle") {
    std::vector<ImageRecord> images = {image("a", 2.0), image("b", 5.0),
                                       image("c", 8.0)};
    std::vector<Fixation> fixations;
    std::mt19937_64 rng(55);
    std::uniform_real_distribution<double> coord(100.0, 900.0);
    std::uniform_real_distribution<double> dur(80.0, 400.0);
    for (const char* img : {"a", "b"}) {
        for (const char* obs : {"o1", "o2"}) {
            double t = 0.0;
            for (int i = 0; i < 6; ++i) {
                Fixation f = fix_at(coord(rng), coord(rng) * 0.7, t, obs, img);
                f.duration_ms = dur(rng);
                t += f.duration_ms + 40.0;
                fixations.push_back(f);
            }
        }
    }
    // image "c" has no events at all
    std::sort(fixations.begin(), fixations.end(), [](const auto& a, const auto& b) {
        return std::tie(a.observer_id, a.image_id, a.onset_ms) <
               std::tie(b.observer_id, b.image_id, b.onset_ms);
    });
    const TrialSet trials = build_trial_set(images, fixations, {});

    SUBCASE("fdm vectors are 300-dim, empty images reported") {
        const ChannelBuildResult built = build_channel(trials, FeatureKind::fdm);
        CHECK(built.channel.dim == 300);
        CHECK(built.channel.image_ids == std::vector<std::string>{"a", "b"});
        CHECK(built.skipped_images == std::vector<std::string>{"c"});
    }
    SUBCASE("iovc vectors are 2-dim") {
        const ChannelBuildResult built = build_channel(trials, FeatureKind::iovc);
        CHECK(built.channel.dim == 2);
        CHECK(built.channel.image_ids.size() == 2);
        for (std::size_t r = 0; r < built.channel.image_ids.size(); ++r) {
            CHECK(built.channel.row(r)[0] >= 0.0);
            CHECK(built.channel.row(r)[0] <= 1.0);
            CHECK(built.channel.row(r)[1] >= 0.0);
            CHECK(built.channel.row(r)[1] <= 0.5);
        }
    }
    SUBCASE("duration mean+std matches per-image summary_rep") {
        const ChannelBuildResult built =
            build_channel(trials, FeatureKind::fixation_duration_meanstd);
        CHECK(built.channel.dim == 2);
        for (std::size_t r = 0; r < built.channel.image_ids.size(); ++r) {
            std::vector<double> durations;
            for (const Fixation& f : trials.fixations) {
                if (f.image_id == built.channel.image_ids[r]) {
                    durations.push_back(f.duration_ms);
                }
            }
            auto [m, s] = summary_rep(durations);
            CHECK(built.channel.row(r)[0] == doctest::Approx(m).epsilon(1e-12));
            CHECK(built.channel.row(r)[1] == doctest::Approx(s).epsilon(1e-12));
        }
    }
    SUBCASE("parallel build merges deterministically") {
        const ChannelBuildResult serial = build_channel(trials, FeatureKind::fdm);
        const ChannelBuildResult parallel =
            build_channel(trials, FeatureKind::fdm, FeatureParams{}, 4);
        CHECK(serial.channel.values == parallel.channel.values);
        CHECK(serial.channel.image_ids == parallel.channel.image_ids);
    }
}

TEST_CASE("l1_normalize_rows scales rows to unit mass") {
    FeatureChannel channel;
    channel.name = "n";
    channel.dim = 3;
    channel.image_ids = {"a", "b"};
    channel.values = {2.0, -1.0, 1.0, 0.0, 0.0, 0.0};
    l1_normalize_rows(channel);
    CHECK(channel.values[0] == doctest::Approx(0.5));
    CHECK(channel.values[1] == doctest::Approx(-0.25));
    CHECK(channel.values[3] == 0.0);  // zero rows stay zero
}
