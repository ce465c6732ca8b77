#pragma once

#include <span>
#include <vector>

#include "gazetag/core.hpp"

namespace gazetag {

/// Dispersion-threshold detection parameters. Defaults suit a ~60 Hz
/// consumer tracker; all three are config-exposed (events.dispersion_px,
/// events.min_duration_ms, events.max_gap_ms).
struct DetectionParams {
    double dispersion_px = 40.0;    // (max_x - min_x) + (max_y - min_y) bound
    double min_duration_ms = 100.0;
    double max_gap_ms = 75.0;       // tolerated gap of invalid/missing samples

    void validate() const;
};

/// Dispersion-based (I-DT) fixation detection over raw gaze samples.
///
/// `samples` may contain several trials; rows must be sorted by
/// (observer, image, t) as produced by parse_gaze_log (ContractViolation
/// otherwise). Invalid samples never join a fixation window: they are skipped
/// while the elapsed time stays within max_gap_ms, and split the window when
/// it does not. A window becomes a fixation once it spans min_duration_ms
/// with dispersion (x-range + y-range) at most dispersion_px; the centroid is
/// the mean of the member samples and the duration the time span between the
/// first and last of them.
std::vector<Fixation> detect_fixations(std::span<const GazeSample> samples,
                                       const DetectionParams& params);

/// One saccade per consecutive fixation pair of each (observer, image) trial.
/// Input must be onset-ordered within each trial. Trials with fewer than two
/// fixations contribute nothing.
std::vector<Saccade> derive_saccades(std::span<const Fixation> fixations);

/// Orientation of the displacement (dx, dy), folded into [0, 180). The fold
/// makes the result independent of the movement direction along the axis.
double fold_slope_deg(double dx, double dy);

}  // namespace gazetag
