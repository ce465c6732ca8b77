#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "gazetag/core.hpp"
#include "gazetag/features.hpp"

namespace gazetag {

/// Planted per-class event distributions. Families were picked for plausible
/// gaze shapes (log-normal durations, gamma jump lengths, folded von Mises
/// orientations) but any family would do for oracle purposes.
struct ClassDistributions {
    double duration_log_mu = 5.3;      // log-normal of the duration in ms
    double duration_log_sigma = 0.35;
    double length_gamma_shape = 4.0;   // saccade length in px
    double length_gamma_scale = 35.0;
    double slope_vm_mu_deg = 90.0;     // folded von Mises orientation
    double slope_vm_kappa = 0.7;
    CenterBiasModel spatial{0.0, 0.0, 0.25, 0.25, false};
};

/// How fixation positions are produced. `planted_walk` chains saccades with
/// the planted length/slope distributions (spatial marginal approximate);
/// `iid_spatial` draws positions i.i.d. from the spatial Gaussian so
/// center-bias recovery is exact (saccade marginals then derive from it).
enum class SpatialMode { planted_walk, iid_spatial };

struct SyntheticScenario {
    std::array<int, 3> images_per_class{10, 10, 10};
    int observers = 10;
    double fixations_per_trial_mean = 8.0;  // Poisson
    std::array<ClassDistributions, 3> per_class;
    SpatialMode spatial_mode = SpatialMode::planted_walk;
    int image_width = 1024;
    int image_height = 768;
    double saccade_gap_ms = 30.0;           // flight time between fixations
    double timeline_jitter_sigma_px = 0.0;  // per-sample noise in timelines
    std::uint64_t seed = 0;

    void validate() const;
};

struct PlantedFixation {
    double x = 0, y = 0;
    double onset_ms = 0, duration_ms = 0;
};

struct TrialTruth {
    std::string observer_id;
    std::string image_id;
    std::vector<PlantedFixation> planted;
};

struct GroundTruthLedger {
    std::array<std::size_t, 3> fixations_per_class{};
    std::size_t total_fixations = 0;
    std::vector<TrialTruth> trials;
};

struct SynthResult {
    TrialSet trials;
    GroundTruthLedger ledger;
};

/// Generates a full trial set with known per-class structure. Image ids are
/// "<class>_NNN" with SAM scores at the class representative values
/// (2.5 / 5.0 / 7.5). Deterministic: each trial draws from an RNG keyed by
/// (seed, observer, image), so generation order does not matter.
SynthResult generate(const SyntheticScenario& scenario);

struct TimelineResult {
    std::vector<GazeSample> samples;
    GroundTruthLedger ledger;
};

/// Raw 60 Hz sample streams over 5-second trials with sample-aligned planted
/// fixations, for exercising the detection module. Consecutive fixations are
/// separated by one transition sample at the jump midpoint.
TimelineResult generate_trial_timeline(const SyntheticScenario& scenario);

inline constexpr double kTimelineTrialMs = 5000.0;
inline constexpr double kTimelineHz = 60.0;

}  // namespace gazetag
