#include "gazetag/features.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <numeric>
#include <optional>
#include <set>
#include <stdexcept>

#include "gazetag/errors.hpp"
#include "gazetag/parallel.hpp"

namespace gazetag {

int DensityMap::argmax_cell() const {
    int best = 0;
    for (int i = 1; i < kDensityCells; ++i) {
        if (values[i] >= values[best]) best = i;
    }
    return best;
}

int density_cell_of(double x, double y, int width_px, int height_px) {
    const double cx = std::clamp(x, 0.0, static_cast<double>(width_px));
    const double cy = std::clamp(y, 0.0, static_cast<double>(height_px));
    int col = static_cast<int>(cx * kDensityCols / width_px);
    int row = static_cast<int>(cy * kDensityRows / height_px);
    col = std::clamp(col, 0, kDensityCols - 1);
    row = std::clamp(row, 0, kDensityRows - 1);
    return row * kDensityCols + col;
}

namespace {

// Mass of a unit Gaussian centered at `center` over the interval
// [edge, edge + 1), both in grid coordinates with spread `sigma`.
inline double interval_mass(double edge, double center, double sigma) {
    const double inv = 1.0 / (sigma * std::numbers::sqrt2);
    return 0.5 * (std::erf((edge + 1.0 - center) * inv) -
                  std::erf((edge - center) * inv));
}

}  // namespace

DensityMap fixation_density_map(std::span<const Fixation> fixations,
                                int width_px, int height_px,
                                double kernel_sigma_px) {
    if (fixations.empty()) {
        throw InsufficientDataError(
            "fixation_density_map requires at least one fixation");
    }
    if (!(kernel_sigma_px > 0.0) || width_px <= 0 || height_px <= 0) {
        throw ContractViolation("density map needs positive sigma and image size");
    }

    DensityMap map;
    map.source_width = width_px;
    map.source_height = height_px;
    map.kernel_sigma = kernel_sigma_px;

    const double sigma_col = kernel_sigma_px * kDensityCols / width_px;
    const double sigma_row = kernel_sigma_px * kDensityRows / height_px;

    double col_mass[kDensityCols];
    double row_mass[kDensityRows];
    for (const Fixation& f : fixations) {
        const double fc = f.x * kDensityCols / width_px;
        const double fr = f.y * kDensityRows / height_px;
        for (int c = 0; c < kDensityCols; ++c) {
            col_mass[c] = interval_mass(static_cast<double>(c), fc, sigma_col);
        }
        for (int r = 0; r < kDensityRows; ++r) {
            row_mass[r] = interval_mass(static_cast<double>(r), fr, sigma_row);
        }
        for (int r = 0; r < kDensityRows; ++r) {
            for (int c = 0; c < kDensityCols; ++c) {
                map.values[r * kDensityCols + c] += row_mass[r] * col_mass[c];
            }
        }
    }

    double total = 0.0;
    for (double v : map.values) total += v;
    if (!(total > 0.0)) {
        throw ContractViolation("density map collapsed to zero mass");
    }
    for (double& v : map.values) v /= total;
    return map;
}

double density_entropy(const DensityMap& map) {
    double total = 0.0;
    for (double v : map.values) {
        if (v < 0.0) throw ContractViolation("density map has negative cells");
        total += v;
    }
    if (std::fabs(total - 1.0) > 1e-6) {
        throw ContractViolation("density map is not normalized");
    }
    double h = 0.0;
    for (double v : map.values) {
        if (v > 0.0) h -= v * std::log2(v);
    }
    return h;
}

std::pair<double, double> summary_rep(std::span<const double> values) {
    if (values.empty()) {
        throw ContractViolation("summary_rep requires at least one value");
    }
    double sum = 0.0;
    for (double v : values) sum += v;
    const double mean = sum / static_cast<double>(values.size());
    if (values.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / static_cast<double>(values.size() - 1))};
}

int histogram_bins(HistogramKind kind) {
    switch (kind) {
        case HistogramKind::fixation_duration: return 60;
        case HistogramKind::saccade_length: return 50;
        case HistogramKind::saccade_slope: return 30;
    }
    return 0;
}

std::vector<double> histogram_rep(std::span<const double> values,
                                  HistogramKind kind,
                                  const HistogramConfig& config) {
    const int bins = histogram_bins(kind);
    double lo = 0.0, hi = 0.0;
    switch (kind) {
        case HistogramKind::fixation_duration:
            lo = config.duration_min_ms;
            hi = config.duration_max_ms;
            break;
        case HistogramKind::saccade_length:
            lo = config.length_min_px;
            hi = config.length_max_px;
            break;
        case HistogramKind::saccade_slope:
            lo = 0.0;
            hi = 180.0;
            break;
    }
    if (!(hi > lo)) throw ContractViolation("histogram range is empty");

    std::vector<double> counts(bins, 0.0);
    const double width = (hi - lo) / bins;
    for (double v : values) {
        if (kind == HistogramKind::saccade_slope && !(v >= 0.0 && v < 180.0)) {
            throw ContractViolation("saccade slope outside [0, 180)");
        }
        int bin = static_cast<int>(std::floor((v - lo) / width));
        bin = std::clamp(bin, 0, bins - 1);  // final bin right-closed
        counts[bin] += 1.0;
    }

    if (config.normalize && !values.empty()) {
        for (double& c : counts) c /= static_cast<double>(values.size());
    }
    return counts;
}

CenterBiasModel fit_center_bias(std::span<const Fixation> fixations,
                                std::span<const ImageRecord> images) {
    if (fixations.size() < 2) {
        throw InsufficientDataError("fit_center_bias requires at least two fixations");
    }
    std::map<std::string_view, const ImageRecord*> by_id;
    for (const ImageRecord& rec : images) by_id[rec.image_id] = &rec;

    double sx = 0.0, sy = 0.0;
    std::vector<std::pair<double, double>> pts;
    pts.reserve(fixations.size());
    for (const Fixation& f : fixations) {
        auto it = by_id.find(f.image_id);
        if (it == by_id.end()) {
            throw ValidationError("fixation references unknown image: " + f.image_id);
        }
        const double nx = 2.0 * f.x / it->second->width_px - 1.0;
        const double ny = 2.0 * f.y / it->second->height_px - 1.0;
        pts.emplace_back(nx, ny);
        sx += nx;
        sy += ny;
    }
    const double n = static_cast<double>(pts.size());

    CenterBiasModel model;
    model.mu_x = sx / n;
    model.mu_y = sy / n;
    double vx = 0.0, vy = 0.0;
    for (const auto& [nx, ny] : pts) {
        vx += (nx - model.mu_x) * (nx - model.mu_x);
        vy += (ny - model.mu_y) * (ny - model.mu_y);
    }
    model.sigma_x = std::sqrt(vx / (n - 1.0));
    model.sigma_y = std::sqrt(vy / (n - 1.0));
    model.degenerate = model.sigma_x == 0.0 || model.sigma_y == 0.0;
    return model;
}

double roc_auc_cells(std::span<const double> map_values,
                     std::span<const int> positive_cells) {
    const std::size_t n = map_values.size();
    std::vector<bool> positive(n, false);
    for (int cell : positive_cells) {
        if (cell < 0 || static_cast<std::size_t>(cell) >= n) {
            throw ContractViolation("positive cell index out of range");
        }
        positive[cell] = true;
    }
    std::size_t p = 0;
    for (bool b : positive) p += b ? 1 : 0;
    const std::size_t neg = n - p;
    if (p == 0 || neg == 0) {
        throw ContractViolation("AUC needs both positive and negative cells");
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return map_values[a] > map_values[b];
    });

    double auc = 0.0;
    double prev_tpr = 0.0, prev_fpr = 0.0;
    std::size_t tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && map_values[order[j]] == map_values[order[i]]) {
            if (positive[order[j]]) ++tp;
            else ++fp;
            ++j;
        }
        const double tpr = static_cast<double>(tp) / static_cast<double>(p);
        const double fpr = static_cast<double>(fp) / static_cast<double>(neg);
        auc += (fpr - prev_fpr) * (tpr + prev_tpr) * 0.5;
        prev_tpr = tpr;
        prev_fpr = fpr;
        i = j;
    }
    return auc;
}

IOVCScore iovc(std::span<const Fixation> image_fixations, int width_px,
               int height_px, double kernel_sigma_px) {
    std::map<std::string, std::vector<const Fixation*>> by_observer;
    for (const Fixation& f : image_fixations) {
        by_observer[f.observer_id].push_back(&f);
    }
    if (by_observer.size() < 2) {
        throw InsufficientDataError("IOVC requires fixations from >= 2 observers");
    }

    std::vector<double> aucs;
    aucs.reserve(by_observer.size());
    for (const auto& [observer, own] : by_observer) {
        std::vector<Fixation> others;
        others.reserve(image_fixations.size() - own.size());
        for (const Fixation& f : image_fixations) {
            if (f.observer_id != observer) others.push_back(f);
        }
        const DensityMap map =
            fixation_density_map(others, width_px, height_px, kernel_sigma_px);

        std::vector<int> cells;
        cells.reserve(own.size());
        for (const Fixation* f : own) {
            cells.push_back(density_cell_of(f->x, f->y, width_px, height_px));
        }
        std::sort(cells.begin(), cells.end());
        cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
        if (static_cast<int>(cells.size()) == kDensityCells) {
            // Every cell fixated: congruency is not measurable; count as 1.
            aucs.push_back(1.0);
            continue;
        }
        aucs.push_back(roc_auc_cells(map.values, cells));
    }

    IOVCScore score;
    score.observers = aucs.size();
    double sum = 0.0;
    for (double a : aucs) sum += a;
    score.mean_auc = sum / static_cast<double>(aucs.size());
    // population deviation keeps the score inside [0, 0.5] for AUCs in [0, 1]
    double ss = 0.0;
    for (double a : aucs) ss += (a - score.mean_auc) * (a - score.mean_auc);
    score.std_auc = std::sqrt(ss / static_cast<double>(aucs.size()));
    return score;
}

std::string_view to_string(FeatureKind k) {
    switch (k) {
        case FeatureKind::fdm: return "fdm";
        case FeatureKind::fdm_entropy: return "fdm_entropy";
        case FeatureKind::fixation_duration_meanstd: return "fixation_duration_meanstd";
        case FeatureKind::saccade_length_meanstd: return "saccade_length_meanstd";
        case FeatureKind::saccade_slope_meanstd: return "saccade_slope_meanstd";
        case FeatureKind::fixation_duration_hist: return "fixation_duration_hist";
        case FeatureKind::saccade_length_hist: return "saccade_length_hist";
        case FeatureKind::saccade_slope_hist: return "saccade_slope_hist";
        case FeatureKind::iovc: return "iovc";
    }
    return "unknown";
}

FeatureKind feature_kind_from_string(std::string_view name) {
    for (FeatureKind k : {FeatureKind::fdm, FeatureKind::fdm_entropy,
                          FeatureKind::fixation_duration_meanstd,
                          FeatureKind::saccade_length_meanstd,
                          FeatureKind::saccade_slope_meanstd,
                          FeatureKind::fixation_duration_hist,
                          FeatureKind::saccade_length_hist,
                          FeatureKind::saccade_slope_hist, FeatureKind::iovc}) {
        if (to_string(k) == name) return k;
    }
    throw std::invalid_argument("unknown feature kind: " + std::string(name));
}

std::size_t feature_dimension(FeatureKind k) {
    switch (k) {
        case FeatureKind::fdm: return kDensityCells;
        case FeatureKind::fdm_entropy: return 1;
        case FeatureKind::fixation_duration_meanstd:
        case FeatureKind::saccade_length_meanstd:
        case FeatureKind::saccade_slope_meanstd:
        case FeatureKind::iovc:
            return 2;
        case FeatureKind::fixation_duration_hist: return 60;
        case FeatureKind::saccade_length_hist: return 50;
        case FeatureKind::saccade_slope_hist: return 30;
    }
    return 0;
}

namespace {

struct ImageEvents {
    const ImageRecord* record = nullptr;
    std::vector<Fixation> fixations;
    std::vector<double> durations;
    std::vector<double> lengths;
    std::vector<double> slopes;
};

}  // namespace

ChannelBuildResult build_channel(const TrialSet& trials, FeatureKind kind,
                                 const FeatureParams& params, int jobs) {
    std::map<std::string, ImageEvents> by_image;
    for (const ImageRecord& rec : trials.images) {
        by_image[rec.image_id].record = &rec;
    }
    for (const Fixation& f : trials.fixations) {
        auto& ev = by_image.at(f.image_id);
        ev.fixations.push_back(f);
        ev.durations.push_back(f.duration_ms);
    }
    for (const Saccade& s : trials.saccades) {
        auto& ev = by_image.at(s.image_id);
        ev.lengths.push_back(s.length_px);
        ev.slopes.push_back(s.slope_deg);
    }

    HistogramConfig hist = params.hist;
    if (params.hist_range_from_data) {
        double dur_lo = 0, dur_hi = 0, len_lo = 0, len_hi = 0;
        bool have_dur = false, have_len = false;
        for (const Fixation& f : trials.fixations) {
            if (!have_dur) { dur_lo = dur_hi = f.duration_ms; have_dur = true; }
            dur_lo = std::min(dur_lo, f.duration_ms);
            dur_hi = std::max(dur_hi, f.duration_ms);
        }
        for (const Saccade& s : trials.saccades) {
            if (!have_len) { len_lo = len_hi = s.length_px; have_len = true; }
            len_lo = std::min(len_lo, s.length_px);
            len_hi = std::max(len_hi, s.length_px);
        }
        if (have_dur && dur_hi > dur_lo) {
            hist.duration_min_ms = dur_lo;
            hist.duration_max_ms = dur_hi;
        }
        if (have_len && len_hi > len_lo) {
            hist.length_min_px = len_lo;
            hist.length_max_px = len_hi;
        }
    }

    std::vector<const ImageEvents*> order;
    order.reserve(by_image.size());
    for (const auto& [id, ev] : by_image) order.push_back(&ev);

    const std::size_t dim = feature_dimension(kind);
    std::vector<std::optional<std::vector<double>>> rows(order.size());

    parallel_for(order.size(), jobs, [&](std::size_t i) {
        const ImageEvents& ev = *order[i];
        const ImageRecord& rec = *ev.record;
        const double sigma = params.kernel_sigma_frac * rec.width_px;
        std::optional<std::vector<double>> row;
        switch (kind) {
            case FeatureKind::fdm: {
                if (ev.fixations.empty()) break;
                const DensityMap map = fixation_density_map(
                    ev.fixations, rec.width_px, rec.height_px, sigma);
                row.emplace(map.values.begin(), map.values.end());
                break;
            }
            case FeatureKind::fdm_entropy: {
                if (ev.fixations.empty()) break;
                const DensityMap map = fixation_density_map(
                    ev.fixations, rec.width_px, rec.height_px, sigma);
                row.emplace(std::vector<double>{density_entropy(map)});
                break;
            }
            case FeatureKind::fixation_duration_meanstd: {
                if (ev.durations.empty()) break;
                auto [m, s] = summary_rep(ev.durations);
                row.emplace(std::vector<double>{m, s});
                break;
            }
            case FeatureKind::saccade_length_meanstd: {
                if (ev.lengths.empty()) break;
                auto [m, s] = summary_rep(ev.lengths);
                row.emplace(std::vector<double>{m, s});
                break;
            }
            case FeatureKind::saccade_slope_meanstd: {
                if (ev.slopes.empty()) break;
                auto [m, s] = summary_rep(ev.slopes);
                row.emplace(std::vector<double>{m, s});
                break;
            }
            case FeatureKind::fixation_duration_hist: {
                if (ev.durations.empty()) break;
                row = histogram_rep(ev.durations, HistogramKind::fixation_duration, hist);
                break;
            }
            case FeatureKind::saccade_length_hist: {
                if (ev.lengths.empty()) break;
                row = histogram_rep(ev.lengths, HistogramKind::saccade_length, hist);
                break;
            }
            case FeatureKind::saccade_slope_hist: {
                if (ev.slopes.empty()) break;
                row = histogram_rep(ev.slopes, HistogramKind::saccade_slope, hist);
                break;
            }
            case FeatureKind::iovc: {
                std::set<std::string_view> observers;
                for (const Fixation& f : ev.fixations) observers.insert(f.observer_id);
                if (observers.size() < 2) break;
                const IOVCScore score =
                    iovc(ev.fixations, rec.width_px, rec.height_px, sigma);
                row.emplace(std::vector<double>{score.mean_auc, score.std_auc});
                break;
            }
        }
        rows[i] = std::move(row);
    });

    ChannelBuildResult result;
    result.channel.name = std::string(to_string(kind));
    result.channel.dim = dim;
    for (std::size_t i = 0; i < order.size(); ++i) {
        const std::string& id = order[i]->record->image_id;
        if (!rows[i].has_value()) {
            result.skipped_images.push_back(id);
            continue;
        }
        result.channel.image_ids.push_back(id);
        result.channel.values.insert(result.channel.values.end(), rows[i]->begin(),
                                     rows[i]->end());
    }
    return result;
}

void l1_normalize_rows(FeatureChannel& channel) {
    for (std::size_t r = 0; r < channel.image_ids.size(); ++r) {
        double norm = 0.0;
        for (std::size_t c = 0; c < channel.dim; ++c) {
            norm += std::fabs(channel.values[r * channel.dim + c]);
        }
        if (norm == 0.0) continue;
        for (std::size_t c = 0; c < channel.dim; ++c) {
            channel.values[r * channel.dim + c] /= norm;
        }
    }
}

}  // namespace gazetag
