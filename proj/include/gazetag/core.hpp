#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gazetag {

/// Valence category of an image. The numeric order (unpleasant < neutral <
/// pleasant) is the fixed class order used for tie-breaking and report layout.
enum class EmotionClass : int { unpleasant = 0, neutral = 1, pleasant = 2 };

inline constexpr std::array<EmotionClass, 3> kClassOrder = {
    EmotionClass::unpleasant, EmotionClass::neutral, EmotionClass::pleasant};

std::string_view to_string(EmotionClass c);
EmotionClass emotion_from_string(std::string_view name);

/// One raw tracker sample. Timestamps are milliseconds since trial onset and
/// coordinates are image pixels, origin top-left, y growing downwards.
struct GazeSample {
    std::string observer_id;
    std::string image_id;
    double t_ms = 0.0;
    double x = 0.0;
    double y = 0.0;
    bool valid = true;
};

/// A detected (or pre-detected) fixation. (x, y) is the centroid in image
/// pixels; `clamped` marks centroids that were pulled back inside the image
/// bounds during trial-set assembly.
struct Fixation {
    std::string observer_id;
    std::string image_id;
    double x = 0.0;
    double y = 0.0;
    double onset_ms = 0.0;
    double duration_ms = 0.0;
    bool clamped = false;
};

/// A gaze jump between two consecutive fixations of the same trial.
/// `slope_deg` is the orientation folded into [0, 180): direction does not
/// matter, only the axis of the movement. `duration_ms` is the gap between
/// the previous fixation's offset and the next one's onset, floored at 0.
struct Saccade {
    std::string observer_id;
    std::string image_id;
    double length_px = 0.0;
    double slope_deg = 0.0;
    double duration_ms = 0.0;
};

/// Stimulus metadata: identity, valence ratings on the 1..9 scale (all
/// observers plus per-gender means), derived emotion class, image size and
/// scenario membership flags.
struct ImageRecord {
    std::string image_id;
    double sam_all = 5.0;
    double sam_male = 5.0;
    double sam_female = 5.0;
    EmotionClass emotion = EmotionClass::neutral;
    int width_px = 1024;
    int height_px = 768;
    bool in_s95 = false;
    bool in_s296 = false;
    bool in_s382 = false;
};

/// Scenario identifiers for the three image subsets used by the experiments.
enum class Scenario { s95, s296, s382 };
Scenario scenario_from_string(std::string_view name);
std::string_view to_string(Scenario s);

/// One assembled dataset: stimuli plus all oculomotor events referencing
/// them. Immutable after construction; safe to share across readers.
struct TrialSet {
    std::vector<ImageRecord> images;
    std::vector<Fixation> fixations;   // sorted by (observer, image, onset)
    std::vector<Saccade> saccades;     // sorted by (observer, image)
    std::vector<std::string> observers;  // sorted, unique

    const ImageRecord* find_image(std::string_view image_id) const;
};

/// Maps a mean valence score in [1, 9] to its emotion class. The neutral
/// band is the closed interval [4, 6]. Scores outside [1, 9] throw
/// std::domain_error.
EmotionClass label_emotion_class(double sam_mean);

struct DatasetSummary {
    std::array<std::size_t, 3> fixations_per_class{};  // indexed by EmotionClass
    std::size_t total_fixations = 0;
    std::size_t observer_count = 0;
    double total_gaze_time_ms = 0.0;  // sum of fixation durations
};

/// Per-class fixation counts, observer count and total gaze time. The
/// per-class counts always partition the total exactly.
DatasetSummary dataset_summary(const TrialSet& trials);

/// Clamps fixation centroids to [0, w-1] x [0, h-1] of their image and flags
/// the touched rows. Returns the number of fixations that moved. Fixations
/// referencing an unknown image are left alone (build_trial_set rejects them).
std::size_t clamp_fixations_to_bounds(std::vector<Fixation>& fixations,
                                      std::span<const ImageRecord> images);

/// Validates referential integrity and per-trial time order, sorts events
/// into canonical order and collects the observer list. Throws
/// ValidationError on a dangling image reference or out-of-order trial.
TrialSet build_trial_set(std::vector<ImageRecord> images,
                         std::vector<Fixation> fixations,
                         std::vector<Saccade> saccades);

/// Sets the membership flag for `scenario` on every listed image. Unknown
/// ids are returned so callers can warn about them.
std::vector<std::string> apply_scenario(std::vector<ImageRecord>& images,
                                        Scenario scenario,
                                        std::span<const std::string> image_ids);

}  // namespace gazetag
