#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "gazetag/core.hpp"
#include "gazetag/ingest.hpp"

namespace gazetag {

inline constexpr int kDensityCols = 20;
inline constexpr int kDensityRows = 15;
inline constexpr int kDensityCells = kDensityCols * kDensityRows;

/// A 20x15 fixation density map. Values are non-negative and sum to 1;
/// vectorization is row-major (cell index = row * 20 + col).
struct DensityMap {
    std::array<double, kDensityCells> values{};
    int source_width = 0;
    int source_height = 0;
    double kernel_sigma = 0.0;

    double at(int col, int row) const { return values[row * kDensityCols + col]; }
    /// Index of the maximal cell; exact ties resolve to the highest index.
    int argmax_cell() const;
};

/// Grid cell containing the pixel position (x, y) of a w x h image.
/// Coordinates are clamped into the image first.
int density_cell_of(double x, double y, int width_px, int height_px);

/// Builds the density map for one image: a unit-mass isotropic Gaussian of
/// `kernel_sigma_px` at every fixation, integrated over each grid cell
/// (the exact box average of the full-resolution kernel sum), then
/// renormalized to total mass 1. Throws InsufficientDataError when no
/// fixation is given.
DensityMap fixation_density_map(std::span<const Fixation> fixations,
                                int width_px, int height_px,
                                double kernel_sigma_px);

/// Shannon entropy of the map in bits, with 0 log 0 = 0. The map must be
/// normalized (ContractViolation otherwise).
double density_entropy(const DensityMap& map);

/// Mean and sample standard deviation (n-1 denominator; 0 when n < 2).
std::pair<double, double> summary_rep(std::span<const double> values);

enum class HistogramKind { fixation_duration, saccade_length, saccade_slope };

/// Fixed global histogram ranges keep vectors comparable across images.
/// Values beyond the duration/length range clamp into the last bin; slopes
/// must already lie in [0, 180). `from_data` switches to per-dataset
/// [min, max] ranges (config flag features.hist_range_mode).
struct HistogramConfig {
    double duration_min_ms = 0.0;
    double duration_max_ms = 2000.0;
    double length_min_px = 0.0;
    double length_max_px = 1280.0;  // diagonal of a 1024x768 stimulus
    bool normalize = false;         // optional L1 normalization of the counts
};

int histogram_bins(HistogramKind kind);  // 60 / 50 / 30

std::vector<double> histogram_rep(std::span<const double> values,
                                  HistogramKind kind,
                                  const HistogramConfig& config = {});

/// Two-dimensional Gaussian center-bias model in normalized image
/// coordinates [-1, 1] x [-1, 1], origin at the image center.
struct CenterBiasModel {
    double mu_x = 0.0, mu_y = 0.0;
    double sigma_x = 0.0, sigma_y = 0.0;
    bool degenerate = false;  // zero spread on either axis
};

/// Fits the center-bias Gaussian: mean and per-axis sample standard
/// deviation of the normalized fixation locations. Needs >= 2 fixations.
CenterBiasModel fit_center_bias(std::span<const Fixation> fixations,
                                std::span<const ImageRecord> images);

struct IOVCScore {
    std::string image_id;
    double mean_auc = 0.0;
    double std_auc = 0.0;
    std::size_t observers = 0;
};

/// ROC AUC of map values scoring the given positive cells against all other
/// cells; trapezoid over all distinct thresholds (ties contribute their
/// diagonal segment). Exposed separately so the rank-invariance property is
/// testable on raw maps.
double roc_auc_cells(std::span<const double> map_values,
                     std::span<const int> positive_cells);

/// Leave-one-observer-out congruency for one image: for every observer,
/// score the cells containing their fixations against the density map built
/// from everyone else, and aggregate the AUCs (mean, sample std). Requires
/// fixations from at least two observers.
IOVCScore iovc(std::span<const Fixation> image_fixations, int width_px,
               int height_px, double kernel_sigma_px);

enum class FeatureKind {
    fdm,
    fdm_entropy,
    fixation_duration_meanstd,
    saccade_length_meanstd,
    saccade_slope_meanstd,
    fixation_duration_hist,
    saccade_length_hist,
    saccade_slope_hist,
    iovc,
};

std::string_view to_string(FeatureKind k);
FeatureKind feature_kind_from_string(std::string_view name);
std::size_t feature_dimension(FeatureKind k);

struct FeatureParams {
    double kernel_sigma_frac = 0.02;  // of image width
    HistogramConfig hist;
    bool hist_range_from_data = false;
};

struct ChannelBuildResult {
    FeatureChannel channel;
    std::vector<std::string> skipped_images;  // images lacking the needed events
};

/// Assembles the per-image channel of one feature kind over a trial set.
/// Images without the events the kind needs (or with a single observer, for
/// IOVC) are skipped and reported. Rows are ordered by image_id. `jobs`
/// caps worker threads; results are merged deterministically.
ChannelBuildResult build_channel(const TrialSet& trials, FeatureKind kind,
                                 const FeatureParams& params = {}, int jobs = 1);

/// Scales every row to unit L1 norm (rows of all zeros stay zero).
void l1_normalize_rows(FeatureChannel& channel);

}  // namespace gazetag
