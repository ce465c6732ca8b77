#pragma once

// Independent reference computations for the test suites. Everything here is
// deliberately written along a different route than the library code it
// checks: density maps by direct kernel evaluation at cell centers, ANOVA by
// the textbook sum-of-squares identities, p-values by adaptive quadrature of
// the density, and distribution CDFs by series/continued fractions that the
// library does not contain.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "gazetag/core.hpp"

namespace oracles {

constexpr int kCols = 20;
constexpr int kRows = 15;

// Gaussian mixture evaluated at the 20x15 cell centers, normalized.
inline std::vector<double> fdm_center_eval(
    const std::vector<gazetag::Fixation>& fixations, int width, int height,
    double sigma) {
    std::vector<double> map(kCols * kRows, 0.0);
    const double cw = static_cast<double>(width) / kCols;
    const double ch = static_cast<double>(height) / kRows;
    for (const gazetag::Fixation& f : fixations) {
        for (int r = 0; r < kRows; ++r) {
            for (int c = 0; c < kCols; ++c) {
                const double cx = (c + 0.5) * cw;
                const double cy = (r + 0.5) * ch;
                const double d2 = (cx - f.x) * (cx - f.x) + (cy - f.y) * (cy - f.y);
                map[r * kCols + c] += std::exp(-d2 / (2.0 * sigma * sigma));
            }
        }
    }
    double total = 0.0;
    for (double v : map) total += v;
    for (double& v : map) v /= total;
    return map;
}

inline double relative_l1(const std::vector<double>& a, const std::vector<double>& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += std::fabs(a[i] - b[i]);
        den += std::fabs(b[i]);
    }
    return num / den;
}

// Entropy by direct summation over a raw value array.
inline double entropy_direct(const std::vector<double>& values) {
    double h = 0.0;
    for (double v : values) {
        if (v > 0.0) h -= v * std::log2(v);
    }
    return h;
}

// Histogram by per-value linear scan over explicit bin edges.
inline std::vector<double> histogram_scan(const std::vector<double>& values,
                                          double lo, double hi, int bins) {
    std::vector<double> counts(bins, 0.0);
    for (double v : values) {
        int hit = -1;
        for (int b = 0; b < bins; ++b) {
            const double left = lo + (hi - lo) * b / bins;
            const double right = lo + (hi - lo) * (b + 1) / bins;
            const bool last = b == bins - 1;
            if (v >= left && (v < right || (last && v <= right))) {
                hit = b;
                break;
            }
        }
        if (hit < 0) hit = v < lo ? 0 : bins - 1;  // clamp rule
        counts[hit] += 1.0;
    }
    return counts;
}

// ANOVA F by the computational (uncentered) sum-of-squares identities.
struct AnovaOracle {
    double f = 0.0;
    int df_between = 0;
    int df_within = 0;
};

inline AnovaOracle anova_direct(const std::vector<std::vector<double>>& groups) {
    long double grand = 0.0L, grand_sq = 0.0L;
    long double between = 0.0L;
    std::size_t n = 0;
    for (const auto& g : groups) {
        long double t = 0.0L;
        for (double v : g) {
            t += v;
            grand_sq += static_cast<long double>(v) * v;
        }
        grand += t;
        between += t * t / g.size();
        n += g.size();
    }
    const long double correction = grand * grand / n;
    const long double ss_between = between - correction;
    const long double ss_total = grand_sq - correction;
    const long double ss_within = ss_total - ss_between;

    AnovaOracle out;
    out.df_between = static_cast<int>(groups.size()) - 1;
    out.df_within = static_cast<int>(n - groups.size());
    out.f = static_cast<double>((ss_between / out.df_between) /
                                (ss_within / out.df_within));
    return out;
}

// Adaptive Simpson integration.
inline double adaptive_simpson(const std::function<double(double)>& f, double a,
                               double b, double eps, int depth = 24) {
    const auto simpson = [&](double lo, double hi) {
        return (hi - lo) / 6.0 * (f(lo) + 4.0 * f(0.5 * (lo + hi)) + f(hi));
    };
    std::function<double(double, double, double, double, int)> go =
        [&](double lo, double hi, double whole, double tol, int d) -> double {
        const double mid = 0.5 * (lo + hi);
        const double left = simpson(lo, mid);
        const double right = simpson(mid, hi);
        if (d <= 0 || std::fabs(left + right - whole) < 15.0 * tol) {
            return left + right + (left + right - whole) / 15.0;
        }
        return go(lo, mid, left, tol / 2.0, d - 1) +
               go(mid, hi, right, tol / 2.0, d - 1);
    };
    return go(a, b, simpson(a, b), eps, depth);
}

// P(F_{d1,d2} > f) by quadrature of the density. The substitution x = u^2
// removes the x^{d1/2 - 1} endpoint singularity for d1 = 1.
inline double f_survival_quadrature(double f, double d1, double d2) {
    if (f <= 0.0) return 1.0;
    const double log_norm = std::lgamma((d1 + d2) / 2.0) - std::lgamma(d1 / 2.0) -
                            std::lgamma(d2 / 2.0) + (d1 / 2.0) * std::log(d1 / d2);
    const auto pdf = [&](double x) {
        if (x <= 0.0) return 0.0;
        const double lg = log_norm + (d1 / 2.0 - 1.0) * std::log(x) -
                          ((d1 + d2) / 2.0) * std::log1p(d1 * x / d2);
        return std::exp(lg);
    };
    const auto integrand = [&](double u) { return pdf(u * u) * 2.0 * u; };
    const double cdf = adaptive_simpson(integrand, 0.0, std::sqrt(f), 1e-12);
    return 1.0 - cdf;
}

// Lognormal CDF.
inline double lognormal_cdf(double x, double mu_log, double sigma_log) {
    if (x <= 0.0) return 0.0;
    return 0.5 * std::erfc(-(std::log(x) - mu_log) / (sigma_log * std::numbers::sqrt2));
}

// Regularized lower incomplete gamma by series / continued fraction.
inline double gamma_p(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_p domain");
    if (x == 0.0) return 0.0;
    const double lg = std::lgamma(a);
    if (x < a + 1.0) {
        double term = 1.0 / a, sum = term, ap = a;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
        }
        return sum * std::exp(-x + a * std::log(x) - lg);
    }
    double b = x + 1.0 - a, c = 1e300, d = 1.0 / b, h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < 1e-300) d = 1e-300;
        c = b + an / c;
        if (std::fabs(c) < 1e-300) c = 1e-300;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16) break;
    }
    return 1.0 - std::exp(-x + a * std::log(x) - lg) * h;
}

inline double gamma_cdf(double x, double shape, double scale) {
    return gamma_p(shape, x / scale);
}

// Folded von Mises CDF on [0, 180) degrees: axial density from a circular
// von Mises around 2*mu with concentration kappa.
inline double folded_vm_cdf(double theta_deg, double mu_deg, double kappa) {
    // I0 by its power series.
    double i0 = 1.0, term = 1.0;
    for (int k = 1; k < 200; ++k) {
        term *= (kappa * kappa / 4.0) / (k * k);
        i0 += term;
        if (term < i0 * 1e-17) break;
    }
    const double rad = std::numbers::pi / 180.0;
    const auto pdf = [&](double t_deg) {
        return 2.0 * rad * std::exp(kappa * std::cos(2.0 * rad * (t_deg - mu_deg))) /
               (2.0 * std::numbers::pi * i0);
    };
    return adaptive_simpson(pdf, 0.0, theta_deg, 1e-10);
}

// Two-sided one-sample Kolmogorov-Smirnov distance.
inline double ks_distance(std::vector<double> values,
                          const std::function<double(double)>& cdf) {
    std::sort(values.begin(), values.end());
    const double n = static_cast<double>(values.size());
    double d = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double c = cdf(values[i]);
        d = std::max(d, std::fabs((i + 1) / n - c));
        d = std::max(d, std::fabs(i / n - c));
    }
    return d;
}

// Exact one-sided binomial tail P(X >= k), p = 1/2, by direct accumulation
// over rationals (safe for the small n the exact branch covers).
inline double binom_tail_exact(int k, int n) {
    double sum = 0.0;
    for (int i = std::max(k, 0); i <= n; ++i) {
        double choose = 1.0;
        for (int j = 0; j < i; ++j) {
            choose = choose * (n - j) / (j + 1);
        }
        sum += choose;
    }
    return sum * std::pow(0.5, n);
}

}  // namespace oracles
