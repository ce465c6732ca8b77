#include "gazetag/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include "gazetag/errors.hpp"
#include "gazetag/special_functions.hpp"

namespace gazetag {

namespace {

void check_anova_preconditions(const std::vector<std::vector<double>>& groups) {
    if (groups.size() < 2) {
        throw ContractViolation("ANOVA requires at least two groups");
    }
    std::size_t total = 0;
    for (const auto& g : groups) {
        if (g.size() < 2) {
            throw ContractViolation("every ANOVA group needs at least two values");
        }
        total += g.size();
    }
    if (total <= groups.size()) {
        throw ContractViolation("ANOVA requires more observations than groups");
    }
}

double group_mean(const std::vector<double>& g) {
    double s = 0.0;
    for (double v : g) s += v;
    return s / static_cast<double>(g.size());
}

}  // namespace

AnovaResult one_way_anova(const std::vector<std::vector<double>>& groups) {
    check_anova_preconditions(groups);

    const std::size_t k = groups.size();
    std::size_t n_total = 0;
    double grand_sum = 0.0;
    std::vector<double> means(k);
    for (std::size_t i = 0; i < k; ++i) {
        means[i] = group_mean(groups[i]);
        n_total += groups[i].size();
        for (double v : groups[i]) grand_sum += v;
    }
    const double grand_mean = grand_sum / static_cast<double>(n_total);

    double ss_between = 0.0;
    double ss_within = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const double d = means[i] - grand_mean;
        ss_between += static_cast<double>(groups[i].size()) * d * d;
        for (double v : groups[i]) {
            const double e = v - means[i];
            ss_within += e * e;
        }
    }

    AnovaResult res;
    res.df_between = static_cast<int>(k) - 1;
    res.df_within = static_cast<int>(n_total - k);

    const double ms_between = ss_between / res.df_between;
    const double ms_within = ss_within / res.df_within;

    if (ms_within == 0.0 && ms_between == 0.0) {
        res.F = 0.0;
        res.p = 1.0;
        res.degenerate = true;
        return res;
    }
    if (ms_within == 0.0) {
        res.F = std::numeric_limits<double>::infinity();
        res.p = 0.0;
        res.degenerate = true;
        return res;
    }

    res.F = ms_between / ms_within;
    res.p = f_survival(res.F, res.df_between, res.df_within);
    return res;
}

namespace {

// Upper 5% points of the studentized range q(k, df), k = 2..10.
constexpr int kTableK = 9;
constexpr double kQTableDf[] = {1,  2,  3,  4,  5,  6,  7,  8,  9,  10, 11, 12,
                                13, 14, 15, 16, 17, 18, 19, 20, 24, 30, 40, 60, 120};
constexpr double kQTable[][kTableK] = {
    {17.97, 26.98, 32.82, 37.08, 40.41, 43.12, 45.40, 47.36, 49.07},  // df = 1
    {6.08, 8.33, 9.80, 10.88, 11.74, 12.44, 13.03, 13.54, 13.99},
    {4.50, 5.91, 6.82, 7.50, 8.04, 8.48, 8.85, 9.18, 9.46},
    {3.93, 5.04, 5.76, 6.29, 6.71, 7.05, 7.35, 7.60, 7.83},
    {3.64, 4.60, 5.22, 5.67, 6.03, 6.33, 6.58, 6.80, 6.99},
    {3.46, 4.34, 4.90, 5.30, 5.63, 5.90, 6.12, 6.32, 6.49},
    {3.34, 4.16, 4.68, 5.06, 5.36, 5.61, 5.82, 6.00, 6.16},
    {3.26, 4.04, 4.53, 4.89, 5.17, 5.40, 5.60, 5.77, 5.92},
    {3.20, 3.95, 4.41, 4.76, 5.02, 5.24, 5.43, 5.59, 5.74},
    {3.15, 3.88, 4.33, 4.65, 4.91, 5.12, 5.30, 5.46, 5.60},  // df = 10
    {3.11, 3.82, 4.26, 4.57, 4.82, 5.03, 5.20, 5.35, 5.49},
    {3.08, 3.77, 4.20, 4.51, 4.75, 4.95, 5.12, 5.27, 5.39},
    {3.06, 3.73, 4.15, 4.45, 4.69, 4.88, 5.05, 5.19, 5.32},
    {3.03, 3.70, 4.11, 4.41, 4.64, 4.83, 4.99, 5.13, 5.25},
    {3.01, 3.67, 4.08, 4.37, 4.59, 4.78, 4.94, 5.08, 5.20},
    {3.00, 3.65, 4.05, 4.33, 4.56, 4.74, 4.90, 5.03, 5.15},
    {2.98, 3.63, 4.02, 4.30, 4.52, 4.70, 4.86, 4.99, 5.11},
    {2.97, 3.61, 4.00, 4.28, 4.49, 4.67, 4.82, 4.96, 5.07},
    {2.96, 3.59, 3.98, 4.25, 4.47, 4.65, 4.79, 4.92, 5.04},
    {2.95, 3.58, 3.96, 4.23, 4.45, 4.62, 4.77, 4.90, 5.01},  // df = 20
    {2.92, 3.53, 3.90, 4.17, 4.37, 4.54, 4.68, 4.81, 4.92},
    {2.89, 3.49, 3.85, 4.10, 4.30, 4.46, 4.60, 4.72, 4.82},
    {2.86, 3.44, 3.79, 4.04, 4.23, 4.39, 4.52, 4.63, 4.73},
    {2.83, 3.40, 3.74, 3.98, 4.16, 4.31, 4.44, 4.55, 4.65},
    {2.80, 3.36, 3.68, 3.92, 4.10, 4.24, 4.36, 4.47, 4.56},  // df = 120
};
constexpr double kQTableInf[kTableK] = {2.77, 3.31, 3.63, 3.86, 4.03,
                                        4.17, 4.29, 4.39, 4.47};
constexpr int kQTableRows = static_cast<int>(sizeof(kQTableDf) / sizeof(double));

}  // namespace

double studentized_range_critical(int k, double df) {
    if (k < 2 || k > 10) {
        throw ContractViolation("studentized range table covers 2 <= k <= 10");
    }
    if (!(df >= 1.0)) {
        throw ContractViolation("studentized range requires df >= 1");
    }
    const int col = k - 2;
    if (df >= kQTableDf[kQTableRows - 1]) {
        // Beyond df = 120 interpolate linearly in 1/df towards the asymptote.
        const double w = 120.0 / df;  // 1 at df = 120, 0 at infinity
        return kQTableInf[col] + w * (kQTable[kQTableRows - 1][col] - kQTableInf[col]);
    }
    int row = 0;
    while (row + 1 < kQTableRows && kQTableDf[row + 1] <= df) ++row;
    if (kQTableDf[row] == df || row + 1 == kQTableRows) {
        return kQTable[row][col];
    }
    const double d0 = kQTableDf[row], d1 = kQTableDf[row + 1];
    const double w = (df - d0) / (d1 - d0);
    return kQTable[row][col] * (1.0 - w) + kQTable[row + 1][col] * w;
}

TukeyResult tukey_kramer(const std::vector<std::vector<double>>& groups) {
    check_anova_preconditions(groups);
    const std::size_t k = groups.size();

    std::size_t n_total = 0;
    std::vector<double> means(k);
    for (std::size_t i = 0; i < k; ++i) {
        means[i] = group_mean(groups[i]);
        n_total += groups[i].size();
    }
    double ss_within = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        for (double v : groups[i]) {
            const double e = v - means[i];
            ss_within += e * e;
        }
    }

    TukeyResult res;
    res.df_within = static_cast<int>(n_total - k);
    res.ms_within = ss_within / res.df_within;
    res.q_critical = studentized_range_critical(static_cast<int>(k),
                                                static_cast<double>(res.df_within));

    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = a + 1; b < k; ++b) {
            TukeyPair pair;
            pair.group_a = a;
            pair.group_b = b;
            pair.mean_diff = means[a] - means[b];
            const double se = std::sqrt(
                (res.ms_within / 2.0) * (1.0 / groups[a].size() + 1.0 / groups[b].size()));
            if (se == 0.0) {
                pair.q = pair.mean_diff == 0.0
                             ? 0.0
                             : std::numeric_limits<double>::infinity();
            } else {
                pair.q = std::fabs(pair.mean_diff) / se;
            }
            pair.significant = pair.q > res.q_critical;
            res.pairs.push_back(pair);
        }
    }
    return res;
}

BoxStats box_stats(std::vector<double> values) {
    if (values.empty()) throw ContractViolation("box_stats requires values");
    std::sort(values.begin(), values.end());
    const auto quantile = [&](double q) {
        const double pos = q * static_cast<double>(values.size() - 1);
        const std::size_t lo = static_cast<std::size_t>(pos);
        const std::size_t hi = std::min(lo + 1, values.size() - 1);
        const double w = pos - static_cast<double>(lo);
        return values[lo] * (1.0 - w) + values[hi] * w;
    };
    BoxStats box;
    box.min = values.front();
    box.max = values.back();
    box.q1 = quantile(0.25);
    box.median = quantile(0.5);
    box.q3 = quantile(0.75);
    const double iqr = box.q3 - box.q1;
    box.lower_fence = box.q1 - 1.5 * iqr;
    box.upper_fence = box.q3 + 1.5 * iqr;
    return box;
}

std::string_view to_string(Measure m) {
    switch (m) {
        case Measure::fixation_duration: return "fixation_duration";
        case Measure::saccade_length: return "saccade_length";
        case Measure::saccade_slope: return "saccade_slope";
    }
    return "unknown";
}

Measure measure_from_string(std::string_view name) {
    if (name == "fixation_duration") return Measure::fixation_duration;
    if (name == "saccade_length") return Measure::saccade_length;
    if (name == "saccade_slope") return Measure::saccade_slope;
    throw std::invalid_argument("unknown measure: " + std::string(name));
}

namespace {

struct Accum {
    double sum = 0.0;
    std::size_t n = 0;
};

// Per-image (or per image x gender pool) averages of the requested measure.
template <typename Event, typename ValueFn, typename PoolFn>
std::map<std::pair<std::string, std::string>, Accum> pool_events(
    const std::vector<Event>& events, ValueFn value_of, PoolFn pool_of) {
    std::map<std::pair<std::string, std::string>, Accum> pools;
    for (const Event& e : events) {
        auto pool = pool_of(e);
        if (!pool) continue;
        Accum& acc = pools[{e.image_id, *pool}];
        acc.sum += value_of(e);
        acc.n += 1;
    }
    return pools;
}

}  // namespace

std::vector<GroupSummary> grouped_summary(
    const TrialSet& trials, GroupBy group_by, Measure measure,
    const std::map<std::string, std::string>* observer_genders) {
    if (group_by == GroupBy::gender && observer_genders == nullptr) {
        throw ContractViolation("gender grouping requires the observer gender sidecar");
    }

    const auto pool_of = [&](const auto& event) -> std::optional<std::string> {
        if (group_by == GroupBy::emotion_class) {
            return std::string();  // one pool per image
        }
        auto it = observer_genders->find(event.observer_id);
        if (it == observer_genders->end()) return std::nullopt;
        return it->second;
    };

    std::map<std::pair<std::string, std::string>, Accum> pools;
    if (measure == Measure::fixation_duration) {
        pools = pool_events(trials.fixations,
                            [](const Fixation& f) { return f.duration_ms; }, pool_of);
    } else if (measure == Measure::saccade_length) {
        pools = pool_events(trials.saccades,
                            [](const Saccade& s) { return s.length_px; }, pool_of);
    } else {
        pools = pool_events(trials.saccades,
                            [](const Saccade& s) { return s.slope_deg; }, pool_of);
    }

    // Pool key -> group label.
    std::map<std::string, std::vector<double>> grouped;
    for (const auto& [key, acc] : pools) {
        const auto& [image_id, pool_label] = key;
        std::string group;
        if (group_by == GroupBy::emotion_class) {
            const ImageRecord* rec = trials.find_image(image_id);
            if (rec == nullptr) continue;
            group = std::string(to_string(rec->emotion));
        } else {
            group = pool_label;
        }
        grouped[group].push_back(acc.sum / static_cast<double>(acc.n));
    }

    std::vector<GroupSummary> out;
    for (auto& [group, values] : grouped) {
        GroupSummary s;
        s.group = group;
        s.n = values.size();
        double sum = 0.0;
        for (double v : values) sum += v;
        s.mean = sum / static_cast<double>(values.size());
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.stddev = values.size() > 1
                       ? std::sqrt(ss / static_cast<double>(values.size() - 1))
                       : 0.0;
        s.box = box_stats(values);
        s.per_image_values = std::move(values);
        out.push_back(std::move(s));
    }

    // Emotion groups in class order, gender groups alphabetical.
    if (group_by == GroupBy::emotion_class) {
        std::sort(out.begin(), out.end(), [](const GroupSummary& a, const GroupSummary& b) {
            return static_cast<int>(emotion_from_string(a.group)) <
                   static_cast<int>(emotion_from_string(b.group));
        });
    }
    return out;
}

}  // namespace gazetag
