#include "gazetag/events.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <tuple>

#include "gazetag/errors.hpp"

namespace gazetag {

void DetectionParams::validate() const {
    if (!(dispersion_px > 0.0) || !(min_duration_ms > 0.0) || !(max_gap_ms > 0.0)) {
        throw ContractViolation("detection parameters must be strictly positive");
    }
}

namespace {

struct Window {
    double min_x = 0, max_x = 0, min_y = 0, max_y = 0;
    double sum_x = 0, sum_y = 0;
    double t_first = 0, t_last = 0;
    std::size_t count = 0;

    void add(const GazeSample& s) {
        if (count == 0) {
            min_x = max_x = s.x;
            min_y = max_y = s.y;
            t_first = s.t_ms;
        } else {
            min_x = std::min(min_x, s.x);
            max_x = std::max(max_x, s.x);
            min_y = std::min(min_y, s.y);
            max_y = std::max(max_y, s.y);
        }
        sum_x += s.x;
        sum_y += s.y;
        t_last = s.t_ms;
        ++count;
    }

    double dispersion_with(const GazeSample& s) const {
        const double lo_x = std::min(min_x, s.x), hi_x = std::max(max_x, s.x);
        const double lo_y = std::min(min_y, s.y), hi_y = std::max(max_y, s.y);
        return (hi_x - lo_x) + (hi_y - lo_y);
    }

    double span_ms() const { return t_last - t_first; }
};

// Runs I-DT over the valid samples of one trial.
void detect_in_trial(std::span<const GazeSample* const> valid,
                     const DetectionParams& params, std::vector<Fixation>& out) {
    const std::size_t n = valid.size();
    std::size_t start = 0;
    while (start < n) {
        // Grow an initial window until it covers min_duration_ms. A gap
        // larger than max_gap_ms between consecutive valid samples ends the
        // attempt early.
        Window win;
        std::size_t end = start;
        bool gap_break = false;
        while (end < n) {
            if (win.count > 0 && valid[end]->t_ms - win.t_last > params.max_gap_ms) {
                gap_break = true;
                break;
            }
            if (win.count > 0 && win.dispersion_with(*valid[end]) > params.dispersion_px) {
                break;
            }
            win.add(*valid[end]);
            ++end;
            if (win.span_ms() >= params.min_duration_ms) break;
        }

        if (win.count == 0 || win.span_ms() < params.min_duration_ms) {
            // No fixation can start here; slide the window start forward.
            // After a gap the candidate restarts at the far side of it.
            start = gap_break ? end : start + 1;
            if (!gap_break && end == n && win.span_ms() < params.min_duration_ms) {
                // Tail too short to ever reach min duration.
                break;
            }
            continue;
        }

        // Extend while the dispersion and gap constraints hold.
        while (end < n && valid[end]->t_ms - win.t_last <= params.max_gap_ms &&
               win.dispersion_with(*valid[end]) <= params.dispersion_px) {
            win.add(*valid[end]);
            ++end;
        }

        Fixation f;
        f.observer_id = valid[start]->observer_id;
        f.image_id = valid[start]->image_id;
        f.x = win.sum_x / static_cast<double>(win.count);
        f.y = win.sum_y / static_cast<double>(win.count);
        f.onset_ms = win.t_first;
        f.duration_ms = win.span_ms();
        out.push_back(std::move(f));

        start = end;
    }
}

}  // namespace

std::vector<Fixation> detect_fixations(std::span<const GazeSample> samples,
                                       const DetectionParams& params) {
    params.validate();

    std::vector<Fixation> out;
    std::size_t i = 0;
    while (i < samples.size()) {
        std::size_t j = i;
        while (j < samples.size() && samples[j].observer_id == samples[i].observer_id &&
               samples[j].image_id == samples[i].image_id) {
            if (j > i && samples[j].t_ms < samples[j - 1].t_ms) {
                throw ContractViolation("gaze samples not time-sorted for observer " +
                                        samples[i].observer_id + " on image " +
                                        samples[i].image_id);
            }
            ++j;
        }
        std::vector<const GazeSample*> valid;
        valid.reserve(j - i);
        for (std::size_t k = i; k < j; ++k) {
            if (samples[k].valid) valid.push_back(&samples[k]);
        }
        detect_in_trial(valid, params, out);
        i = j;
    }

    std::stable_sort(out.begin(), out.end(), [](const Fixation& a, const Fixation& b) {
        return std::tie(a.observer_id, a.image_id, a.onset_ms) <
               std::tie(b.observer_id, b.image_id, b.onset_ms);
    });
    return out;
}

double fold_slope_deg(double dx, double dy) {
    double deg = std::atan2(dy, dx) * 180.0 / std::numbers::pi;
    deg = std::fmod(deg, 180.0);
    if (deg < 0.0) deg += 180.0;
    if (deg >= 180.0) deg = 0.0;  // fmod rounding guard
    return deg;
}

std::vector<Saccade> derive_saccades(std::span<const Fixation> fixations) {
    std::vector<Saccade> out;
    std::size_t i = 0;
    while (i < fixations.size()) {
        std::size_t j = i;
        while (j < fixations.size() &&
               fixations[j].observer_id == fixations[i].observer_id &&
               fixations[j].image_id == fixations[i].image_id) {
            if (j > i && fixations[j].onset_ms < fixations[j - 1].onset_ms) {
                throw ContractViolation("fixations not onset-ordered for observer " +
                                        fixations[i].observer_id + " on image " +
                                        fixations[i].image_id);
            }
            ++j;
        }
        for (std::size_t k = i + 1; k < j; ++k) {
            const Fixation& prev = fixations[k - 1];
            const Fixation& next = fixations[k];
            Saccade s;
            s.observer_id = prev.observer_id;
            s.image_id = prev.image_id;
            s.length_px = std::hypot(next.x - prev.x, next.y - prev.y);
            s.slope_deg = fold_slope_deg(next.x - prev.x, next.y - prev.y);
            s.duration_ms = std::max(0.0, next.onset_ms - (prev.onset_ms + prev.duration_ms));
            out.push_back(std::move(s));
        }
        i = j;
    }
    return out;
}

}  // namespace gazetag
