#include "gazetag/learn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "gazetag/errors.hpp"
#include "gazetag/features.hpp"
#include "gazetag/parallel.hpp"
#include "gazetag/rng.hpp"
#include "gazetag/special_functions.hpp"

namespace gazetag {

namespace {

constexpr int kClasses = 3;

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Dual coordinate descent for the binary L1-hinge linear SVM
//   min_w 1/2 ||w||^2 + C sum_i max(0, 1 - y_i w.x_i)
// with the bias folded in as an augmented feature of value `bias_scale`.
// Uses the usual shrinking of bound-saturated variables with a final
// unshrunk verification pass. Returns the augmented weights (length cols+1).
std::vector<double> solve_binary_hinge(const FeatureMatrix& x,
                                       std::span<const signed char> y_bin,
                                       double c, double tolerance, int max_epochs,
                                       double bias_scale, std::mt19937_64 rng) {
    const std::size_t n = x.rows;
    const std::size_t d = x.cols;
    std::vector<double> w(d + 1, 0.0);
    std::vector<double> alpha(n, 0.0);
    std::vector<double> q_diag(n);
    for (std::size_t i = 0; i < n; ++i) {
        q_diag[i] = dot(x.row(i), x.row(i)) + bias_scale * bias_scale;
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::size_t active = n;

    constexpr double kInf = std::numeric_limits<double>::infinity();
    double pg_max_old = kInf;
    double pg_min_old = -kInf;

    for (int epoch = 0; epoch < max_epochs; ++epoch) {
        std::shuffle(order.begin(), order.begin() + active, rng);
        double pg_max = -kInf;
        double pg_min = kInf;

        for (std::size_t pos = 0; pos < active; ++pos) {
            const std::size_t i = order[pos];
            if (q_diag[i] == 0.0) continue;  // all-zero sample, gradient fixed
            const std::span<const double> xi = x.row(i);
            const double yi = static_cast<double>(y_bin[i]);
            const double g = yi * (dot(std::span<const double>(w).first(d), xi) +
                                   w[d] * bias_scale) -
                             1.0;

            double pg = g;
            if (alpha[i] == 0.0) {
                if (g > pg_max_old) {  // stuck at the lower bound: shrink
                    --active;
                    std::swap(order[pos], order[active]);
                    --pos;
                    continue;
                }
                pg = std::min(g, 0.0);
            } else if (alpha[i] == c) {
                if (g < pg_min_old) {
                    --active;
                    std::swap(order[pos], order[active]);
                    --pos;
                    continue;
                }
                pg = std::max(g, 0.0);
            }
            pg_max = std::max(pg_max, pg);
            pg_min = std::min(pg_min, pg);
            if (std::fabs(pg) < 1e-12) continue;

            const double updated = std::clamp(alpha[i] - g / q_diag[i], 0.0, c);
            const double delta = (updated - alpha[i]) * yi;
            alpha[i] = updated;
            for (std::size_t k = 0; k < d; ++k) w[k] += delta * xi[k];
            w[d] += delta * bias_scale;
        }

        if (pg_max - pg_min <= tolerance) {
            if (active == n) break;
            // Optimal on the active set: bring everything back and verify.
            active = n;
            pg_max_old = kInf;
            pg_min_old = -kInf;
            continue;
        }
        pg_max_old = pg_max > 0.0 ? pg_max : kInf;
        pg_min_old = pg_min < 0.0 ? pg_min : -kInf;
    }
    return w;
}

}  // namespace

std::array<double, 3> LinearModel::decision(std::span<const double> x) const {
    std::array<double, 3> d{};
    for (int c = 0; c < kClasses; ++c) {
        d[c] = dot(weights[c], x) + bias[c];
    }
    return d;
}

int LinearModel::predict(std::span<const double> x) const {
    const std::array<double, 3> d = decision(x);
    int best = 0;
    for (int c = 1; c < kClasses; ++c) {
        if (d[c] > d[best]) best = c;  // ties keep the lower class
    }
    return best;
}

LinearModel train_linear_svm(const FeatureMatrix& x, std::span<const int> y,
                             const TrainOptions& options) {
    if (x.rows == 0 || x.rows != y.size()) {
        throw ContractViolation("training matrix and labels disagree");
    }
    if (!(options.C > 0.0)) throw ContractViolation("C must be positive");
    for (int label : y) {
        if (label < 0 || label >= kClasses) {
            throw ContractViolation("labels must be 0, 1 or 2");
        }
    }

    LinearModel model;
    model.dim = x.cols;
    model.C = options.C;
    model.bias_scale = options.bias_scale;

    std::vector<signed char> y_bin(x.rows);
    for (int c = 0; c < kClasses; ++c) {
        for (std::size_t i = 0; i < x.rows; ++i) {
            y_bin[i] = y[i] == c ? 1 : -1;
        }
        std::vector<double> w = solve_binary_hinge(
            x, y_bin, options.C, options.tolerance, options.max_epochs,
            options.bias_scale, make_rng(options.seed, "svm-epochs", c));
        model.bias[c] = w.back() * options.bias_scale;
        w.pop_back();
        model.weights[c] = std::move(w);
    }

    for (std::size_t i = 0; i < x.rows; ++i) {
        if (model.predict(x.row(i)) != y[i]) {
            model.margin_violations = true;
            break;
        }
    }
    return model;
}

void CVProtocol::validate() const {
    if (n_folds != 10) {
        throw ContractViolation("the protocol is defined for 10 folds");
    }
    if (repetitions < 1) throw ContractViolation("repetitions must be >= 1");
    if (std::fabs(train_ratio + val_ratio + test_ratio - 1.0) > 1e-9) {
        throw ContractViolation("split ratios must sum to 1");
    }
    if (c_grid.empty()) throw ContractViolation("C grid must not be empty");
}

namespace protocol_detail {

// Stratified fold construction: per class the shuffled indices are cut into
// 2 * n_folds slices of test_ratio each; fold f tests on slice 2f and
// validates on slice 2f+1, so every sample is tested exactly once per
// repetition.
std::vector<FoldSplit> build_folds(std::span<const int> y, const CVProtocol& protocol,
                                   std::uint64_t rep) {
    std::array<std::vector<std::size_t>, kClasses> per_class;
    for (std::size_t i = 0; i < y.size(); ++i) {
        per_class[y[i]].push_back(i);
    }
    for (int c = 0; c < kClasses; ++c) {
        if (per_class[c].size() < 10) {
            throw ProtocolError("class '" + std::string(to_string(EmotionClass(c))) +
                                "' has " + std::to_string(per_class[c].size()) +
                                " samples; the protocol needs at least 10 per class");
        }
        auto rng = make_rng(protocol.seed, "stratified-shuffle", rep, c);
        std::shuffle(per_class[c].begin(), per_class[c].end(), rng);
    }

    const int slices = 2 * protocol.n_folds;
    std::vector<FoldSplit> folds(protocol.n_folds);
    for (int c = 0; c < kClasses; ++c) {
        const std::size_t n = per_class[c].size();
        const auto boundary = [&](int j) {
            return static_cast<std::size_t>(
                std::llround(static_cast<double>(j) * n / slices));
        };
        for (int f = 0; f < protocol.n_folds; ++f) {
            const std::size_t t0 = boundary(2 * f), t1 = boundary(2 * f + 1);
            const std::size_t v1 = boundary(2 * f + 2);
            for (std::size_t k = 0; k < n; ++k) {
                const std::size_t idx = per_class[c][k];
                if (k >= t0 && k < t1) folds[f].test.push_back(idx);
                else if (k >= t1 && k < v1) folds[f].val.push_back(idx);
                else folds[f].train.push_back(idx);
            }
        }
    }
    return folds;
}

// Equalizes per-class counts by keeping every training sample and drawing
// the shortfall with replacement inside each class partition.
std::vector<std::size_t> rebalance(std::span<const std::size_t> train,
                                   std::span<const int> y, std::uint64_t seed) {
    auto rng = std::mt19937_64(seed);
    std::array<std::vector<std::size_t>, kClasses> per_class;
    for (std::size_t idx : train) per_class[y[idx]].push_back(idx);
    std::size_t target = 0;
    for (const auto& cls : per_class) target = std::max(target, cls.size());

    std::vector<std::size_t> out;
    for (auto& cls : per_class) {
        if (cls.empty()) continue;
        out.insert(out.end(), cls.begin(), cls.end());
        std::uniform_int_distribution<std::size_t> pick(0, cls.size() - 1);
        for (std::size_t extra = cls.size(); extra < target; ++extra) {
            out.push_back(cls[pick(rng)]);
        }
    }
    return out;
}

}  // namespace protocol_detail

namespace {

using protocol_detail::FoldSplit;

FeatureMatrix gather_rows(const FeatureMatrix& x, std::span<const std::size_t> rows) {
    FeatureMatrix out(rows.size(), x.cols);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto src = x.row(rows[r]);
        std::copy(src.begin(), src.end(), out.row(r).begin());
    }
    return out;
}

double accuracy_on(const LinearModel& model, const FeatureMatrix& x,
                   std::span<const int> y, std::span<const std::size_t> idx) {
    if (idx.empty()) return 0.0;
    std::size_t correct = 0;
    for (std::size_t i : idx) {
        if (model.predict(x.row(i)) == y[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(idx.size());
}

struct RepetitionOutcome {
    std::array<std::array<std::size_t, 3>, 3> confusion{};
    std::vector<bool> correct;  // ordered by (fold, position in test split)
    std::size_t predictions = 0;

    // Mean per-class accuracy of the repetition's pooled test predictions
    // (the average of the row-normalized confusion diagonal). Chance sits at
    // exactly 33.3% however imbalanced the class priors are.
    double mean_class_accuracy_pct() const {
        double sum = 0.0;
        int present = 0;
        for (int c = 0; c < kClasses; ++c) {
            std::size_t row_total = 0;
            for (int p = 0; p < kClasses; ++p) row_total += confusion[c][p];
            if (row_total == 0) continue;
            sum += static_cast<double>(confusion[c][c]) / row_total;
            ++present;
        }
        return present > 0 ? 100.0 * sum / present : 0.0;
    }
};

// One repetition of the shared protocol over k channels. Single channel
// predicts by the raw decision argmax; multiple channels z-normalize each
// channel's per-class scores over the fold's test split and average them.
RepetitionOutcome run_repetition(std::span<const FeatureMatrix> channels,
                                 std::span<const int> y, const CVProtocol& protocol,
                                 std::uint64_t rep, bool fuse) {
    const std::size_t k = channels.size();
    RepetitionOutcome outcome;
    const std::vector<FoldSplit> folds = protocol_detail::build_folds(y, protocol, rep);

    for (int f = 0; f < protocol.n_folds; ++f) {
        const FoldSplit& fold = folds[f];
        if (fold.test.empty()) continue;

        std::vector<std::size_t> train_idx = fold.train;
        if (protocol.balance) {
            train_idx = protocol_detail::rebalance(
                train_idx, y, derive_seed(protocol.seed, "rebalance", rep, f));
        }
        std::vector<int> train_y(train_idx.size());
        for (std::size_t i = 0; i < train_idx.size(); ++i) train_y[i] = y[train_idx[i]];

        // Per channel: pick C on the validation split, keep the winner.
        std::vector<LinearModel> models;
        models.reserve(k);
        for (std::size_t ch = 0; ch < k; ++ch) {
            const FeatureMatrix train_x = gather_rows(channels[ch], train_idx);
            LinearModel best;
            double best_acc = -1.0;
            for (double c : protocol.c_grid) {
                TrainOptions options;
                options.C = c;
                options.seed = derive_seed(protocol.seed, "train", rep, f);
                LinearModel model = train_linear_svm(train_x, train_y, options);
                const double acc = accuracy_on(model, channels[ch], y, fold.val);
                if (acc > best_acc) {
                    best_acc = acc;
                    best = std::move(model);
                }
            }
            models.push_back(std::move(best));
        }

        // Decision scores for the test split.
        std::vector<int> predicted(fold.test.size());
        if (!fuse) {
            for (std::size_t t = 0; t < fold.test.size(); ++t) {
                predicted[t] = models[0].predict(channels[0].row(fold.test[t]));
            }
        } else {
            // scores[ch][class][item]
            std::vector<std::array<std::vector<double>, 3>> scores(k);
            for (std::size_t ch = 0; ch < k; ++ch) {
                for (int c = 0; c < kClasses; ++c) {
                    scores[ch][c].resize(fold.test.size());
                }
                for (std::size_t t = 0; t < fold.test.size(); ++t) {
                    const auto d = models[ch].decision(channels[ch].row(fold.test[t]));
                    for (int c = 0; c < kClasses; ++c) scores[ch][c][t] = d[c];
                }
                for (int c = 0; c < kClasses; ++c) {
                    auto [mean, stddev] = summary_rep(scores[ch][c]);
                    for (double& v : scores[ch][c]) {
                        v = stddev > 0.0 ? (v - mean) / stddev : 0.0;
                    }
                }
            }
            for (std::size_t t = 0; t < fold.test.size(); ++t) {
                std::array<double, 3> fused{};
                for (int c = 0; c < kClasses; ++c) {
                    for (std::size_t ch = 0; ch < k; ++ch) fused[c] += scores[ch][c][t];
                    fused[c] /= static_cast<double>(k);
                }
                int best = 0;
                for (int c = 1; c < kClasses; ++c) {
                    if (fused[c] > fused[best]) best = c;
                }
                predicted[t] = best;
            }
        }

        for (std::size_t t = 0; t < fold.test.size(); ++t) {
            const int actual = y[fold.test[t]];
            outcome.confusion[actual][predicted[t]] += 1;
            const bool hit = predicted[t] == actual;
            outcome.correct.push_back(hit);
            outcome.predictions += 1;
        }
    }
    return outcome;
}

EvalReport run_cv(std::span<const FeatureMatrix> channels, std::span<const int> y,
                  const CVProtocol& protocol, bool fuse) {
    protocol.validate();
    if (channels.empty()) throw ContractViolation("no channels given");
    for (const FeatureMatrix& ch : channels) {
        if (ch.rows != y.size()) {
            throw ContractViolation("channel rows do not match label count");
        }
    }

    std::vector<RepetitionOutcome> outcomes(protocol.repetitions);
    parallel_for(static_cast<std::size_t>(protocol.repetitions), protocol.jobs,
                 [&](std::size_t rep) {
                     outcomes[rep] = run_repetition(channels, y, protocol, rep, fuse);
                 });

    EvalReport report;
    std::vector<double> rep_pvalues;
    for (std::size_t rep = 0; rep < outcomes.size(); ++rep) {
        const RepetitionOutcome& outcome = outcomes[rep];
        for (int a = 0; a < kClasses; ++a) {
            for (int p = 0; p < kClasses; ++p) {
                report.confusion_counts[a][p] += outcome.confusion[a][p];
            }
        }
        report.total_predictions += outcome.predictions;
        report.repetition_accuracies_pct.push_back(outcome.mean_class_accuracy_pct());
        if (!outcome.correct.empty()) {
            rep_pvalues.push_back(mcnemar_vs_chance(
                outcome.correct, derive_seed(protocol.seed, "mcnemar", rep)));
        }
    }

    for (int a = 0; a < kClasses; ++a) {
        std::size_t row_total = 0;
        for (int p = 0; p < kClasses; ++p) row_total += report.confusion_counts[a][p];
        for (int p = 0; p < kClasses; ++p) {
            report.confusion_pct[a][p] =
                row_total > 0
                    ? 100.0 * static_cast<double>(report.confusion_counts[a][p]) / row_total
                    : 0.0;
        }
    }

    auto [mean, stddev] = summary_rep(report.repetition_accuracies_pct);
    report.mean_accuracy_pct = mean;
    const std::size_t r = report.repetition_accuracies_pct.size();
    if (r > 1 && stddev > 0.0) {
        const double t = t_quantile(0.975, static_cast<double>(r - 1));
        const double half = t * stddev / std::sqrt(static_cast<double>(r));
        report.ci95_lo_pct = mean - half;
        report.ci95_hi_pct = mean + half;
    } else {
        report.ci95_lo_pct = mean;
        report.ci95_hi_pct = mean;
    }

    // Repetitions re-test the same items with correlated models, so pooling
    // them into one McNemar table overstates the evidence. The test runs per
    // repetition (independent pairs there) and the median p is reported.
    if (rep_pvalues.empty()) {
        report.mcnemar_p = 1.0;
    } else {
        std::sort(rep_pvalues.begin(), rep_pvalues.end());
        const std::size_t m = rep_pvalues.size();
        report.mcnemar_p = m % 2 == 1
                               ? rep_pvalues[m / 2]
                               : 0.5 * (rep_pvalues[m / 2 - 1] + rep_pvalues[m / 2]);
    }
    return report;
}

}  // namespace

EvalReport run_protocol(const FeatureMatrix& x, std::span<const int> y,
                        const CVProtocol& protocol) {
    return run_cv(std::span<const FeatureMatrix>(&x, 1), y, protocol, false);
}

double mcnemar_vs_chance(const std::vector<bool>& model_correct, std::uint64_t seed) {
    if (model_correct.empty()) {
        throw ContractViolation("mcnemar_vs_chance requires at least one item");
    }
    auto rng = make_rng(seed, "mcnemar-baseline");
    std::uniform_int_distribution<int> pick(0, 2);
    std::size_t model_only = 0, baseline_only = 0;
    for (bool hit : model_correct) {
        const bool baseline_hit = pick(rng) == 0;  // uniform guess over 3 classes
        if (hit && !baseline_hit) ++model_only;
        if (!hit && baseline_hit) ++baseline_only;
    }
    const std::size_t discordant = model_only + baseline_only;
    if (discordant == 0) return 1.0;
    if (discordant < 25) {
        const int worse = static_cast<int>(std::max(model_only, baseline_only));
        return binom_tail_geq_half(worse, static_cast<int>(discordant));
    }
    const double diff = std::fabs(static_cast<double>(model_only) -
                                  static_cast<double>(baseline_only));
    const double corrected = std::max(0.0, diff - 1.0);
    const double stat = corrected * corrected / static_cast<double>(discordant);
    return chi2_sf_1df(stat);
}

EvalReport late_fuse(std::span<const FeatureMatrix> channels,
                     std::span<const int> y, const CVProtocol& protocol) {
    if (channels.empty()) throw ContractViolation("late_fuse requires channels");
    return run_cv(channels, y, protocol, true);
}

std::vector<ObserverSweepPoint> observer_sweep(const TrialSet& trials,
                                               const CVProtocol& protocol,
                                               const ObserverSweepParams& params) {
    const int total = static_cast<int>(trials.observers.size());
    std::vector<ObserverSweepPoint> curve;

    for (int n : params.n_values) {
        if (n < 1 || n > total) {
            throw ContractViolation("observer subset size " + std::to_string(n) +
                                    " outside 1.." + std::to_string(total));
        }
        const int draws = n == total ? 1 : params.subsets_per_n;
        std::vector<double> pooled_rep_accuracies;

        for (int draw = 0; draw < draws; ++draw) {
            std::vector<std::string> subset = trials.observers;
            if (n < total) {
                auto rng = make_rng(protocol.seed, "observer-subset",
                                    static_cast<std::uint64_t>(n), draw);
                std::shuffle(subset.begin(), subset.end(), rng);
                subset.resize(n);
                std::sort(subset.begin(), subset.end());
            }
            const std::set<std::string> keep(subset.begin(), subset.end());

            std::vector<Fixation> fixations;
            for (const Fixation& f : trials.fixations) {
                if (keep.count(f.observer_id)) fixations.push_back(f);
            }
            TrialSet reduced = build_trial_set(trials.images, std::move(fixations), {});

            FeatureParams feature_params;
            feature_params.kernel_sigma_frac = params.kernel_sigma_frac;
            const ChannelBuildResult built =
                build_channel(reduced, FeatureKind::fdm, feature_params, protocol.jobs);
            const AlignedDataset data = align_channel(built.channel, trials.images);

            CVProtocol sub_protocol = protocol;
            if (n < total) {
                sub_protocol.seed = derive_seed(protocol.seed, "sweep-protocol",
                                                static_cast<std::uint64_t>(n), draw);
            }
            const EvalReport report = run_protocol(data.x, data.y, sub_protocol);
            pooled_rep_accuracies.insert(pooled_rep_accuracies.end(),
                                         report.repetition_accuracies_pct.begin(),
                                         report.repetition_accuracies_pct.end());
        }

        ObserverSweepPoint point;
        point.n_observers = n;
        point.subset_draws = draws;
        auto [mean, stddev] = summary_rep(pooled_rep_accuracies);
        point.mean_accuracy_pct = mean;
        const std::size_t m = pooled_rep_accuracies.size();
        if (m > 1 && stddev > 0.0) {
            const double t = t_quantile(0.975, static_cast<double>(m - 1));
            const double half = t * stddev / std::sqrt(static_cast<double>(m));
            point.ci95_lo_pct = mean - half;
            point.ci95_hi_pct = mean + half;
        } else {
            point.ci95_lo_pct = point.ci95_hi_pct = mean;
        }
        curve.push_back(point);
    }
    return curve;
}

ClassemeAnalysis classeme_analysis(const FeatureMatrix& x, std::span<const int> y,
                                   const CVProtocol& protocol) {
    if (x.cols != 1000) {
        throw ContractViolation("classeme channel must have dimension 1000");
    }
    ClassemeAnalysis analysis;
    analysis.report = run_protocol(x, y, protocol);

    std::map<std::size_t, std::array<std::size_t, 3>> counts;
    for (std::size_t i = 0; i < x.rows; ++i) {
        const auto row = x.row(i);
        std::size_t arg = 0;
        for (std::size_t j = 1; j < row.size(); ++j) {
            if (row[j] > row[arg]) arg = j;
        }
        counts[arg][y[i]] += 1;
    }
    analysis.distinct_visual_classes = counts.size();

    for (const auto& [visual_class, per_emotion] : counts) {
        ClassemeCooccurrenceRow row;
        row.visual_class = visual_class;
        std::size_t total = 0;
        double ordinal_sum = 0.0;
        for (int c = 0; c < kClasses; ++c) {
            total += per_emotion[c];
            ordinal_sum += static_cast<double>(c) * per_emotion[c];
        }
        row.image_count = total;
        for (int c = 0; c < kClasses; ++c) {
            row.emotion_share[c] = static_cast<double>(per_emotion[c]) / total;
        }
        row.pleasantness_mean = ordinal_sum / total;
        analysis.cooccurrence.push_back(row);
    }
    std::sort(analysis.cooccurrence.begin(), analysis.cooccurrence.end(),
              [](const ClassemeCooccurrenceRow& a, const ClassemeCooccurrenceRow& b) {
                  if (a.pleasantness_mean != b.pleasantness_mean) {
                      return a.pleasantness_mean < b.pleasantness_mean;
                  }
                  return a.visual_class < b.visual_class;
              });
    return analysis;
}

AlignedDataset align_channel(const FeatureChannel& channel,
                             std::span<const ImageRecord> images,
                             const std::vector<std::string>* subset) {
    std::map<std::string_view, const ImageRecord*> by_id;
    for (const ImageRecord& rec : images) by_id[rec.image_id] = &rec;

    std::vector<std::string> wanted;
    if (subset != nullptr) {
        wanted = *subset;
    } else {
        wanted = channel.image_ids;
    }
    std::sort(wanted.begin(), wanted.end());
    wanted.erase(std::unique(wanted.begin(), wanted.end()), wanted.end());

    std::vector<std::string> missing_in_channel;
    std::vector<std::string> missing_metadata;
    std::vector<std::pair<std::size_t, const ImageRecord*>> rows;
    for (const std::string& id : wanted) {
        const auto idx = channel.row_index(id);
        if (!idx) {
            missing_in_channel.push_back(id);
            continue;
        }
        const auto meta = by_id.find(id);
        if (meta == by_id.end()) {
            missing_metadata.push_back(id);
            continue;
        }
        rows.emplace_back(*idx, meta->second);
    }
    if (!missing_in_channel.empty() || !missing_metadata.empty()) {
        std::ostringstream msg;
        msg << "channel '" << channel.name << "' coverage mismatch;";
        if (!missing_in_channel.empty()) {
            msg << " missing from channel:";
            for (const auto& id : missing_in_channel) msg << ' ' << id;
            msg << ';';
        }
        if (!missing_metadata.empty()) {
            msg << " missing metadata:";
            for (const auto& id : missing_metadata) msg << ' ' << id;
        }
        throw ValidationError(msg.str());
    }

    AlignedDataset out;
    out.x = FeatureMatrix(rows.size(), channel.dim);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto src = channel.row(rows[r].first);
        std::copy(src.begin(), src.end(), out.x.row(r).begin());
        out.y.push_back(static_cast<int>(rows[r].second->emotion));
        out.image_ids.push_back(rows[r].second->image_id);
    }
    return out;
}

std::string report_to_json(
    const EvalReport& report,
    const std::vector<std::pair<std::string, std::string>>& extra_fields) {
    nlohmann::json j;
    for (const auto& [key, value] : extra_fields) j[key] = value;
    j["channel"] = report.channel_name;
    j["class_order"] = {"unpleasant", "neutral", "pleasant"};
    j["confusion_counts"] = report.confusion_counts;
    j["confusion_pct"] = report.confusion_pct;
    j["mean_accuracy_pct"] = report.mean_accuracy_pct;
    j["ci95_pct"] = {report.ci95_lo_pct, report.ci95_hi_pct};
    j["mcnemar_p"] = report.mcnemar_p;
    j["repetition_accuracies_pct"] = report.repetition_accuracies_pct;
    j["total_predictions"] = report.total_predictions;
    return j.dump(2) + "\n";
}

std::string report_to_text(const EvalReport& report) {
    static constexpr const char* kNames[3] = {"unpleasant", "neutral", "pleasant"};
    std::ostringstream out;
    out << "channel: " << report.channel_name << "\n\n";
    out << "                    predicted\n";
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-12s %10s %10s %10s\n", "actual", kNames[0],
                  kNames[1], kNames[2]);
    out << buf;
    for (int a = 0; a < kClasses; ++a) {
        std::snprintf(buf, sizeof(buf), "%-12s %10.2f %10.2f %10.2f\n", kNames[a],
                      report.confusion_pct[a][0], report.confusion_pct[a][1],
                      report.confusion_pct[a][2]);
        out << buf;
    }
    std::snprintf(buf, sizeof(buf),
                  "\nmA = %.2f%%  (95%% CI %.2f - %.2f, McNemar p = %.4g, n = %zu)\n",
                  report.mean_accuracy_pct, report.ci95_lo_pct, report.ci95_hi_pct,
                  report.mcnemar_p, report.total_predictions);
    out << buf;
    return out.str();
}

}  // namespace gazetag
