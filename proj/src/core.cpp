#include "gazetag/core.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <tuple>

#include "gazetag/errors.hpp"

namespace gazetag {

std::string_view to_string(EmotionClass c) {
    switch (c) {
        case EmotionClass::unpleasant: return "unpleasant";
        case EmotionClass::neutral: return "neutral";
        case EmotionClass::pleasant: return "pleasant";
    }
    return "unknown";
}

EmotionClass emotion_from_string(std::string_view name) {
    if (name == "unpleasant") return EmotionClass::unpleasant;
    if (name == "neutral") return EmotionClass::neutral;
    if (name == "pleasant") return EmotionClass::pleasant;
    throw std::invalid_argument("unknown emotion class: " + std::string(name));
}

Scenario scenario_from_string(std::string_view name) {
    if (name == "s95") return Scenario::s95;
    if (name == "s296") return Scenario::s296;
    if (name == "s382") return Scenario::s382;
    throw std::invalid_argument("unknown scenario: " + std::string(name));
}

std::string_view to_string(Scenario s) {
    switch (s) {
        case Scenario::s95: return "s95";
        case Scenario::s296: return "s296";
        case Scenario::s382: return "s382";
    }
    return "unknown";
}

const ImageRecord* TrialSet::find_image(std::string_view image_id) const {
    auto it = std::lower_bound(images.begin(), images.end(), image_id,
                               [](const ImageRecord& rec, std::string_view id) {
                                   return rec.image_id < id;
                               });
    if (it != images.end() && it->image_id == image_id) return &*it;
    return nullptr;
}

EmotionClass label_emotion_class(double sam_mean) {
    if (!(sam_mean >= 1.0 && sam_mean <= 9.0)) {
        throw std::domain_error("SAM mean " + std::to_string(sam_mean) +
                                " outside the valid range [1, 9]");
    }
    if (sam_mean < 4.0) return EmotionClass::unpleasant;
    if (sam_mean > 6.0) return EmotionClass::pleasant;
    return EmotionClass::neutral;
}

DatasetSummary dataset_summary(const TrialSet& trials) {
    if (trials.images.empty() && trials.fixations.empty()) {
        throw ContractViolation("dataset_summary requires a non-empty trial set");
    }
    DatasetSummary out;
    out.observer_count = trials.observers.size();
    for (const Fixation& f : trials.fixations) {
        const ImageRecord* img = trials.find_image(f.image_id);
        // build_trial_set guarantees the reference resolves
        out.fixations_per_class[static_cast<int>(img->emotion)] += 1;
        out.total_fixations += 1;
        out.total_gaze_time_ms += f.duration_ms;
    }
    return out;
}

std::size_t clamp_fixations_to_bounds(std::vector<Fixation>& fixations,
                                      std::span<const ImageRecord> images) {
    std::map<std::string_view, const ImageRecord*> by_id;
    for (const ImageRecord& rec : images) by_id[rec.image_id] = &rec;

    std::size_t moved = 0;
    for (Fixation& f : fixations) {
        auto it = by_id.find(f.image_id);
        if (it == by_id.end()) continue;
        const double max_x = static_cast<double>(it->second->width_px - 1);
        const double max_y = static_cast<double>(it->second->height_px - 1);
        const double cx = std::clamp(f.x, 0.0, max_x);
        const double cy = std::clamp(f.y, 0.0, max_y);
        if (cx != f.x || cy != f.y) {
            f.x = cx;
            f.y = cy;
            f.clamped = true;
            ++moved;
        }
    }
    return moved;
}

TrialSet build_trial_set(std::vector<ImageRecord> images,
                         std::vector<Fixation> fixations,
                         std::vector<Saccade> saccades) {
    std::sort(images.begin(), images.end(),
              [](const ImageRecord& a, const ImageRecord& b) {
                  return a.image_id < b.image_id;
              });
    for (std::size_t i = 1; i < images.size(); ++i) {
        if (images[i].image_id == images[i - 1].image_id) {
            throw ValidationError("duplicate image record: " + images[i].image_id);
        }
    }

    std::set<std::string> known;
    for (const ImageRecord& rec : images) known.insert(rec.image_id);

    for (const Fixation& f : fixations) {
        if (!known.count(f.image_id)) {
            throw ValidationError("fixation references unknown image: " + f.image_id);
        }
        if (!(f.duration_ms > 0.0)) {
            throw ValidationError("fixation with non-positive duration on image " +
                                  f.image_id);
        }
    }
    for (const Saccade& s : saccades) {
        if (!known.count(s.image_id)) {
            throw ValidationError("saccade references unknown image: " + s.image_id);
        }
        if (s.length_px < 0.0 || s.slope_deg < 0.0 || s.slope_deg >= 180.0) {
            throw ValidationError("saccade with invalid geometry on image " +
                                  s.image_id);
        }
    }

    std::stable_sort(fixations.begin(), fixations.end(),
                     [](const Fixation& a, const Fixation& b) {
                         return std::tie(a.observer_id, a.image_id, a.onset_ms) <
                                std::tie(b.observer_id, b.image_id, b.onset_ms);
                     });
    for (std::size_t i = 1; i < fixations.size(); ++i) {
        const Fixation& prev = fixations[i - 1];
        const Fixation& cur = fixations[i];
        if (prev.observer_id == cur.observer_id && prev.image_id == cur.image_id &&
            cur.onset_ms < prev.onset_ms + prev.duration_ms) {
            throw ValidationError("overlapping fixations for observer " +
                                  cur.observer_id + " on image " + cur.image_id);
        }
    }

    std::stable_sort(saccades.begin(), saccades.end(),
                     [](const Saccade& a, const Saccade& b) {
                         return std::tie(a.observer_id, a.image_id) <
                                std::tie(b.observer_id, b.image_id);
                     });

    std::set<std::string> observer_set;
    for (const Fixation& f : fixations) observer_set.insert(f.observer_id);
    for (const Saccade& s : saccades) observer_set.insert(s.observer_id);

    TrialSet out;
    out.images = std::move(images);
    out.fixations = std::move(fixations);
    out.saccades = std::move(saccades);
    out.observers.assign(observer_set.begin(), observer_set.end());
    return out;
}

std::vector<std::string> apply_scenario(std::vector<ImageRecord>& images,
                                        Scenario scenario,
                                        std::span<const std::string> image_ids) {
    std::map<std::string_view, ImageRecord*> by_id;
    for (ImageRecord& rec : images) by_id[rec.image_id] = &rec;

    std::vector<std::string> unknown;
    for (const std::string& id : image_ids) {
        auto it = by_id.find(id);
        if (it == by_id.end()) {
            unknown.push_back(id);
            continue;
        }
        switch (scenario) {
            case Scenario::s95: it->second->in_s95 = true; break;
            case Scenario::s296: it->second->in_s296 = true; break;
            case Scenario::s382: it->second->in_s382 = true; break;
        }
    }
    return unknown;
}

}  // namespace gazetag
