#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gazetag/core.hpp"
#include "gazetag/ingest.hpp"

namespace gazetag {

/// Dense row-major sample matrix.
struct FeatureMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    FeatureMatrix() = default;
    FeatureMatrix(std::size_t r, std::size_t c)
        : rows(r), cols(c), data(r * c, 0.0) {}

    std::span<const double> row(std::size_t i) const {
        return std::span<const double>(data).subspan(i * cols, cols);
    }
    std::span<double> row(std::size_t i) {
        return std::span<double>(data).subspan(i * cols, cols);
    }
};

struct TrainOptions {
    double C = 1.0;
    double tolerance = 1e-4;
    int max_epochs = 10000;
    double bias_scale = 1.0;  // value of the augmented bias feature
    std::uint64_t seed = 0;   // epoch permutation stream
};

/// One-vs-rest linear hinge-loss classifier for the three emotion classes.
/// Trained by dual coordinate descent; ties in the decision argmax resolve
/// to the first class in the fixed order unpleasant < neutral < pleasant.
struct LinearModel {
    std::size_t dim = 0;
    double bias_scale = 1.0;
    std::array<std::vector<double>, 3> weights;  // per class, length dim
    std::array<double, 3> bias{};                // bias_scale * augmented weight
    double C = 1.0;
    bool margin_violations = false;  // some training point ended inside the margin

    std::array<double, 3> decision(std::span<const double> x) const;
    int predict(std::span<const double> x) const;
};

/// Labels must be 0 (unpleasant), 1 (neutral) or 2 (pleasant); every class
/// present in `y` needs at least one sample. Degenerate inputs still train
/// but come back with margin_violations set.
LinearModel train_linear_svm(const FeatureMatrix& x, std::span<const int> y,
                             const TrainOptions& options = {});

/// Repeated balanced cross-validation protocol. Per repetition the samples
/// are stratified-shuffled into 10 folds of 5% test + 5% validation each
/// (remaining 90% trains); training splits are rebalanced to equal per-class
/// counts by resampling with replacement inside each class; C comes from the
/// validation split over `c_grid`. Identical seed and inputs give a
/// bit-identical report.
struct CVProtocol {
    int n_folds = 10;
    int repetitions = 20;
    double train_ratio = 0.9;
    double val_ratio = 0.05;
    double test_ratio = 0.05;
    std::uint64_t seed = 0;
    bool balance = true;
    std::vector<double> c_grid = {0.01, 0.1, 1.0, 10.0, 100.0};
    int jobs = 1;

    void validate() const;
};

struct EvalReport {
    std::array<std::array<std::size_t, 3>, 3> confusion_counts{};  // [actual][predicted]
    std::array<std::array<double, 3>, 3> confusion_pct{};          // rows sum to 100

    // Accuracy is the mean per-class accuracy (the average of the
    // row-normalized confusion diagonal), computed per repetition and
    // averaged; chance is 33.3% regardless of class priors. The CI is the
    // t-based 95% interval over the repetition values.
    double mean_accuracy_pct = 0.0;
    double ci95_lo_pct = 0.0;
    double ci95_hi_pct = 0.0;
    double mcnemar_p = 1.0;
    std::vector<double> repetition_accuracies_pct;
    std::size_t total_predictions = 0;
    std::string channel_name;
};

EvalReport run_protocol(const FeatureMatrix& x, std::span<const int> y,
                        const CVProtocol& protocol);

/// McNemar test of the model against a seeded uniform-random three-class
/// baseline evaluated on the same items. Continuity-corrected chi-squared on
/// the discordant counts; exact binomial tail when they number fewer than 25.
double mcnemar_vs_chance(const std::vector<bool>& model_correct, std::uint64_t seed);

/// Late fusion: channels are evaluated inside one shared fold structure,
/// per-class decision scores are z-normalized over each test split and
/// averaged across channels before the argmax. Channels must contain
/// identical sample sets (rows aligned). A single channel is permitted as
/// the degenerate case and reproduces that channel's fused predictions.
EvalReport late_fuse(std::span<const FeatureMatrix> channels,
                     std::span<const int> y, const CVProtocol& protocol);

struct ObserverSweepPoint {
    int n_observers = 0;
    double mean_accuracy_pct = 0.0;
    double ci95_lo_pct = 0.0;
    double ci95_hi_pct = 0.0;
    int subset_draws = 0;
};

struct ObserverSweepParams {
    std::vector<int> n_values;
    int subsets_per_n = 5;  // draws for n below the full observer count
    double kernel_sigma_frac = 0.02;
};

/// Rebuilds the density-map channel from random observer subsets of each
/// size and reruns the protocol. n equal to the full observer count uses
/// all observers with the root seed, matching the plain run exactly.
std::vector<ObserverSweepPoint> observer_sweep(const TrialSet& trials,
                                               const CVProtocol& protocol,
                                               const ObserverSweepParams& params);

struct ClassemeCooccurrenceRow {
    std::size_t visual_class = 0;  // argmax index into the classeme vector
    std::array<double, 3> emotion_share{};  // normalized over the row
    std::size_t image_count = 0;
    double pleasantness_mean = 0.0;  // mean emotion ordinal of member images
};

struct ClassemeAnalysis {
    EvalReport report;
    std::vector<ClassemeCooccurrenceRow> cooccurrence;  // sorted by pleasantness
    std::size_t distinct_visual_classes = 0;
};

/// Protocol run on raw classeme scores plus the visual-class / emotion
/// co-occurrence table (argmax class per image). Channel must be 1000-dim.
ClassemeAnalysis classeme_analysis(const FeatureMatrix& x, std::span<const int> y,
                                   const CVProtocol& protocol);

/// Aligns a feature channel with image labels: rows ordered by image_id,
/// labels from the metadata emotion class. Throws when `require_all` and the
/// channel misses any of the requested images (message lists the symmetric
/// difference).
struct AlignedDataset {
    FeatureMatrix x;
    std::vector<int> y;
    std::vector<std::string> image_ids;
};

AlignedDataset align_channel(const FeatureChannel& channel,
                             std::span<const ImageRecord> images,
                             const std::vector<std::string>* subset = nullptr);

/// JSON and aligned-text renderings of a report. Text mirrors the usual
/// figure layout: rows = actual, columns = predicted, class order
/// unpleasant / neutral / pleasant.
std::string report_to_json(const EvalReport& report,
                           const std::vector<std::pair<std::string, std::string>>&
                               extra_fields = {});
std::string report_to_text(const EvalReport& report);

namespace protocol_detail {

struct FoldSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> val;
    std::vector<std::size_t> test;
};

/// The protocol's stratified fold construction for one repetition; exposed
/// so the partition invariants are testable in isolation.
std::vector<FoldSplit> build_folds(std::span<const int> y, const CVProtocol& protocol,
                                   std::uint64_t rep);

/// Training-split rebalancing: keeps every sample and draws the per-class
/// shortfall with replacement until all classes match the largest.
std::vector<std::size_t> rebalance(std::span<const std::size_t> train,
                                   std::span<const int> y, std::uint64_t seed);

}  // namespace protocol_detail

}  // namespace gazetag
