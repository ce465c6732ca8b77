#include "gazetag/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <tuple>

#include "gazetag/errors.hpp"
#include "gazetag/events.hpp"
#include "gazetag/rng.hpp"

namespace gazetag {

void SyntheticScenario::validate() const {
    if (observers < 1) throw ContractViolation("scenario needs >= 1 observer");
    for (int n : images_per_class) {
        if (n < 0) throw ContractViolation("negative image count");
    }
    if (!(fixations_per_trial_mean > 0.0)) {
        throw ContractViolation("fixations_per_trial_mean must be positive");
    }
    if (image_width <= 0 || image_height <= 0) {
        throw ContractViolation("image size must be positive");
    }
    if (timeline_jitter_sigma_px < 0.0 || saccade_gap_ms < 0.0) {
        throw ContractViolation("negative noise parameters");
    }
    for (const ClassDistributions& d : per_class) {
        if (!(d.duration_log_sigma > 0.0) || !(d.length_gamma_shape > 0.0) ||
            !(d.length_gamma_scale > 0.0) || !(d.slope_vm_kappa >= 0.0) ||
            !(d.spatial.sigma_x > 0.0) || !(d.spatial.sigma_y > 0.0)) {
            throw ContractViolation("class distribution parameters out of range");
        }
    }
}

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// Best-Fisher von Mises sampler (circular, radians around mu).
double sample_von_mises(double mu, double kappa, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    if (kappa < 1e-8) {
        return mu + (unit(rng) * 2.0 - 1.0) * std::numbers::pi;
    }
    const double a = 1.0 + std::sqrt(1.0 + 4.0 * kappa * kappa);
    const double b = (a - std::sqrt(2.0 * a)) / (2.0 * kappa);
    const double r = (1.0 + b * b) / (2.0 * b);
    while (true) {
        const double u1 = unit(rng), u2 = unit(rng), u3 = unit(rng);
        const double z = std::cos(std::numbers::pi * u1);
        const double f = (1.0 + r * z) / (r + z);
        const double c = kappa * (r - f);
        if (c * (2.0 - c) - u2 > 0.0 || std::log(c / u2) + 1.0 - c >= 0.0) {
            return mu + (u3 < 0.5 ? -1.0 : 1.0) * std::acos(std::clamp(f, -1.0, 1.0));
        }
    }
}

// Axial orientation in [0, 180): half of a von Mises draw around 2*mu.
double sample_folded_slope_deg(double mu_deg, double kappa, std::mt19937_64& rng) {
    const double phi = sample_von_mises(2.0 * mu_deg * kDeg, kappa, rng);
    double deg = phi / (2.0 * kDeg);
    deg = std::fmod(deg, 180.0);
    if (deg < 0.0) deg += 180.0;
    if (deg >= 180.0) deg = 0.0;
    return deg;
}

struct TrialSampler {
    const SyntheticScenario& scenario;
    const ClassDistributions& dist;
    std::mt19937_64& rng;

    double duration() {
        std::lognormal_distribution<double> d(dist.duration_log_mu,
                                              dist.duration_log_sigma);
        return d(rng);
    }

    std::pair<double, double> spatial_point() {
        std::normal_distribution<double> nx(dist.spatial.mu_x, dist.spatial.sigma_x);
        std::normal_distribution<double> ny(dist.spatial.mu_y, dist.spatial.sigma_y);
        const double w = scenario.image_width, h = scenario.image_height;
        const double x = (nx(rng) + 1.0) * 0.5 * w;
        const double y = (ny(rng) + 1.0) * 0.5 * h;
        return {std::clamp(x, 0.0, w - 1.0), std::clamp(y, 0.0, h - 1.0)};
    }

    // Next fixation position. planted_walk chains a gamma-length jump along a
    // von Mises axis (random direction along it), retrying draws that leave
    // the image before falling back to a clamp.
    std::pair<double, double> next_point(double prev_x, double prev_y) {
        if (scenario.spatial_mode == SpatialMode::iid_spatial) {
            return spatial_point();
        }
        const double w = scenario.image_width, h = scenario.image_height;
        std::gamma_distribution<double> length(dist.length_gamma_shape,
                                               dist.length_gamma_scale);
        std::uniform_int_distribution<int> coin(0, 1);
        double x = prev_x, y = prev_y;
        for (int attempt = 0; attempt < 20; ++attempt) {
            const double len = length(rng);
            const double slope =
                sample_folded_slope_deg(dist.slope_vm_mu_deg, dist.slope_vm_kappa, rng);
            const double sign = coin(rng) == 0 ? 1.0 : -1.0;
            x = prev_x + sign * len * std::cos(slope * kDeg);
            y = prev_y + sign * len * std::sin(slope * kDeg);
            if (x >= 0.0 && x <= w - 1.0 && y >= 0.0 && y <= h - 1.0) return {x, y};
        }
        return {std::clamp(x, 0.0, w - 1.0), std::clamp(y, 0.0, h - 1.0)};
    }
};

std::string observer_name(int index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "obs%03d", index);
    return buf;
}

std::vector<ImageRecord> scenario_images(const SyntheticScenario& scenario) {
    constexpr double kClassSam[3] = {2.5, 5.0, 7.5};
    std::vector<ImageRecord> images;
    for (int c = 0; c < 3; ++c) {
        for (int i = 0; i < scenario.images_per_class[c]; ++i) {
            ImageRecord rec;
            char buf[48];
            std::snprintf(buf, sizeof(buf), "%s_%03d",
                          std::string(to_string(EmotionClass(c))).c_str(), i);
            rec.image_id = buf;
            rec.sam_all = rec.sam_male = rec.sam_female = kClassSam[c];
            rec.emotion = label_emotion_class(rec.sam_all);
            rec.width_px = scenario.image_width;
            rec.height_px = scenario.image_height;
            images.push_back(std::move(rec));
        }
    }
    return images;
}

}  // namespace

SynthResult generate(const SyntheticScenario& scenario) {
    scenario.validate();
    std::vector<ImageRecord> images = scenario_images(scenario);

    SynthResult result;
    std::vector<Fixation> fixations;

    for (int o = 0; o < scenario.observers; ++o) {
        const std::string observer = observer_name(o);
        for (const ImageRecord& rec : images) {
            auto rng = make_rng(scenario.seed, "trial", hash_str(observer),
                                hash_str(rec.image_id));
            const int cls = static_cast<int>(rec.emotion);
            TrialSampler sampler{scenario, scenario.per_class[cls], rng};

            std::poisson_distribution<int> count(scenario.fixations_per_trial_mean);
            const int n_fix = count(rng);

            TrialTruth truth;
            truth.observer_id = observer;
            truth.image_id = rec.image_id;

            double t = 0.0;
            double x = 0.0, y = 0.0;
            for (int i = 0; i < n_fix; ++i) {
                std::tie(x, y) = i == 0 ? sampler.spatial_point()
                                        : sampler.next_point(x, y);
                const double dur = sampler.duration();

                Fixation f;
                f.observer_id = observer;
                f.image_id = rec.image_id;
                f.x = x;
                f.y = y;
                f.onset_ms = t;
                f.duration_ms = dur;
                fixations.push_back(std::move(f));
                truth.planted.push_back({x, y, t, dur});

                result.ledger.fixations_per_class[cls] += 1;
                result.ledger.total_fixations += 1;
                t += dur + scenario.saccade_gap_ms;
            }
            result.ledger.trials.push_back(std::move(truth));
        }
    }

    std::sort(fixations.begin(), fixations.end(),
              [](const Fixation& a, const Fixation& b) {
                  return std::tie(a.observer_id, a.image_id, a.onset_ms) <
                         std::tie(b.observer_id, b.image_id, b.onset_ms);
              });
    std::sort(result.ledger.trials.begin(), result.ledger.trials.end(),
              [](const TrialTruth& a, const TrialTruth& b) {
                  return std::tie(a.observer_id, a.image_id) <
                         std::tie(b.observer_id, b.image_id);
              });
    std::vector<Saccade> saccades = derive_saccades(fixations);
    result.trials =
        build_trial_set(std::move(images), std::move(fixations), std::move(saccades));
    return result;
}

TimelineResult generate_trial_timeline(const SyntheticScenario& scenario) {
    scenario.validate();
    const std::vector<ImageRecord> images = scenario_images(scenario);

    const double period = 1000.0 / kTimelineHz;
    const int samples_per_trial = static_cast<int>(kTimelineTrialMs / period);  // 300
    const int min_fix_samples = 8;  // (8 - 1) * period > 100 ms, detectable

    TimelineResult result;

    for (int o = 0; o < scenario.observers; ++o) {
        const std::string observer = observer_name(o);
        for (const ImageRecord& rec : images) {
            auto rng = make_rng(scenario.seed, "timeline", hash_str(observer),
                                hash_str(rec.image_id));
            const int cls = static_cast<int>(rec.emotion);
            TrialSampler sampler{scenario, scenario.per_class[cls], rng};
            std::normal_distribution<double> jitter(0.0,
                                                    scenario.timeline_jitter_sigma_px);

            // Lay out sample-aligned fixation segments separated by one
            // transition sample each.
            struct Segment {
                double x, y;
                int first_sample, sample_count;
            };
            std::vector<Segment> segments;
            int k = 0;
            double x = 0.0, y = 0.0;
            while (k + min_fix_samples <= samples_per_trial) {
                std::tie(x, y) = segments.empty() ? sampler.spatial_point()
                                                  : sampler.next_point(x, y);
                const double wanted = sampler.duration();
                int m = static_cast<int>(std::lround(wanted / period)) + 1;
                m = std::clamp(m, min_fix_samples, samples_per_trial - k);
                segments.push_back({x, y, k, m});
                k += m + 1;  // +1 transition sample
            }
            if (!segments.empty()) {
                // The trailing samples stay on the last position anyway;
                // fold them into the last segment so planted and detectable
                // durations agree exactly.
                Segment& last = segments.back();
                last.sample_count = samples_per_trial - last.first_sample;
            }

            TrialTruth truth;
            truth.observer_id = observer;
            truth.image_id = rec.image_id;

            std::vector<GazeSample> trial(samples_per_trial);
            for (int s = 0; s < samples_per_trial; ++s) {
                trial[s].observer_id = observer;
                trial[s].image_id = rec.image_id;
                trial[s].t_ms = s * period;
                trial[s].valid = true;
            }

            for (std::size_t si = 0; si < segments.size(); ++si) {
                const Segment& seg = segments[si];
                for (int s = seg.first_sample; s < seg.first_sample + seg.sample_count;
                     ++s) {
                    trial[s].x = seg.x + (scenario.timeline_jitter_sigma_px > 0.0
                                              ? jitter(rng)
                                              : 0.0);
                    trial[s].y = seg.y + (scenario.timeline_jitter_sigma_px > 0.0
                                              ? jitter(rng)
                                              : 0.0);
                }
                truth.planted.push_back({seg.x, seg.y, seg.first_sample * period,
                                         (seg.sample_count - 1) * period});
                result.ledger.fixations_per_class[cls] += 1;
                result.ledger.total_fixations += 1;

                // Transition sample towards the next segment.
                const int gap = seg.first_sample + seg.sample_count;
                if (gap < samples_per_trial && si + 1 < segments.size()) {
                    trial[gap].x = 0.5 * (seg.x + segments[si + 1].x);
                    trial[gap].y = 0.5 * (seg.y + segments[si + 1].y);
                }
            }

            result.ledger.trials.push_back(std::move(truth));
            result.samples.insert(result.samples.end(),
                                  std::make_move_iterator(trial.begin()),
                                  std::make_move_iterator(trial.end()));
        }
    }

    std::stable_sort(result.samples.begin(), result.samples.end(),
                     [](const GazeSample& a, const GazeSample& b) {
                         return std::tie(a.observer_id, a.image_id, a.t_ms) <
                                std::tie(b.observer_id, b.image_id, b.t_ms);
                     });
    std::sort(result.ledger.trials.begin(), result.ledger.trials.end(),
              [](const TrialTruth& a, const TrialTruth& b) {
                  return std::tie(a.observer_id, a.image_id) <
                         std::tie(b.observer_id, b.image_id);
              });
    return result;
}

}  // namespace gazetag
