#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "gazetag/core.hpp"

namespace gazetag {

struct AnovaResult {
    int df_between = 0;
    int df_within = 0;
    double F = 0.0;
    double p = 1.0;
    bool degenerate = false;  // zero between- and within-group variance
};

/// One-way fixed-effects ANOVA. Every group needs at least two values and
/// the total count must exceed the group count. When both variance
/// components vanish, F is defined as 0 with the degenerate flag set; when
/// only the within-group variance vanishes, F is +infinity and p is 0.
AnovaResult one_way_anova(const std::vector<std::vector<double>>& groups);

struct TukeyPair {
    std::size_t group_a = 0;
    std::size_t group_b = 0;  // group_a < group_b; each unordered pair listed once
    double mean_diff = 0.0;   // mean(a) - mean(b)
    double q = 0.0;           // studentized-range statistic
    bool significant = false; // at alpha = 0.05
};

struct TukeyResult {
    std::vector<TukeyPair> pairs;
    double ms_within = 0.0;
    int df_within = 0;
    double q_critical = 0.0;
};

/// Tukey-Kramer post-hoc comparison of all group pairs with the unequal-n
/// standard error. Significance uses the embedded alpha=0.05 studentized
/// range table (k <= 10), interpolating between tabulated df rows.
TukeyResult tukey_kramer(const std::vector<std::vector<double>>& groups);

/// Upper 5% critical value of the studentized range for k groups and df
/// within-group degrees of freedom.
double studentized_range_critical(int k, double df);

struct BoxStats {
    double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
    double lower_fence = 0, upper_fence = 0;  // q1/q3 -/+ 1.5 IQR
};

BoxStats box_stats(std::vector<double> values);

enum class GroupBy { emotion_class, gender };
enum class Measure { fixation_duration, saccade_length, saccade_slope };

std::string_view to_string(Measure m);
Measure measure_from_string(std::string_view name);

struct GroupSummary {
    std::string group;
    double mean = 0.0;
    double stddev = 0.0;
    std::size_t n = 0;
    BoxStats box;
    std::vector<double> per_image_values;  // the grouped observations
};

/// Grouped descriptive statistics of one oculomotor measure. Observations
/// are per-image averages (all observers pooled for emotion grouping;
/// per-gender pools for gender grouping), matching how the dataset-level
/// comparisons are run. Gender grouping requires the observer sidecar.
std::vector<GroupSummary> grouped_summary(
    const TrialSet& trials, GroupBy group_by, Measure measure,
    const std::map<std::string, std::string>* observer_genders = nullptr);

}  // namespace gazetag
