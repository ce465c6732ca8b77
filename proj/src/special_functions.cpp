#include "gazetag/special_functions.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace gazetag {

double log_beta(double a, double b) {
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

namespace {

// Continued fraction for the incomplete beta, modified Lentz method.
// Converges quickly for x < (a + 1) / (a + b + 2).
double ibeta_cf(double a, double b, double x) {
    constexpr int kMaxIter = 500;
    constexpr double kEps = 1e-16;
    constexpr double kTiny = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;

    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;

    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;

        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

}  // namespace

double ibeta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) {
        throw std::invalid_argument("ibeta requires positive shape parameters");
    }
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;

    const double ln_front = a * std::log(x) + b * std::log1p(-x) - log_beta(a, b);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * ibeta_cf(a, b, x) / a;
    }
    return 1.0 - front * ibeta_cf(b, a, 1.0 - x) / b;
}

double f_survival(double f, double d1, double d2) {
    if (!(d1 > 0.0) || !(d2 > 0.0)) {
        throw std::invalid_argument("f_survival requires positive degrees of freedom");
    }
    if (f <= 0.0) return 1.0;
    if (std::isinf(f)) return 0.0;
    // P(F > f) = I_{d2 / (d2 + d1 f)}(d2/2, d1/2)
    const double x = d2 / (d2 + d1 * f);
    return ibeta(d2 / 2.0, d1 / 2.0, x);
}

double t_cdf(double t, double df) {
    if (!(df > 0.0)) throw std::invalid_argument("t_cdf requires positive df");
    if (t == 0.0) return 0.5;
    const double x = df / (df + t * t);
    const double tail = 0.5 * ibeta(df / 2.0, 0.5, x);
    return t > 0.0 ? 1.0 - tail : tail;
}

double t_quantile(double p, double df) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::invalid_argument("t_quantile requires p in (0, 1)");
    }
    double lo = -1.0, hi = 1.0;
    while (t_cdf(lo, df) > p) lo *= 2.0;
    while (t_cdf(hi, df) < p) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (hi - lo < 1e-12) break;
        if (t_cdf(mid, df) < p) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

double chi2_sf_1df(double x) {
    if (x <= 0.0) return 1.0;
    return std::erfc(std::sqrt(x / 2.0));
}

double binom_tail_geq_half(int k, int n) {
    if (n < 0) throw std::invalid_argument("binom_tail_geq_half requires n >= 0");
    if (k <= 0) return 1.0;
    if (k > n) return 0.0;
    const double ln_half_n = -n * std::numbers::ln2;
    double sum = 0.0;
    for (int i = k; i <= n; ++i) {
        const double ln_choose =
            std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0);
        sum += std::exp(ln_choose + ln_half_n);
    }
    return std::min(1.0, sum);
}

}  // namespace gazetag
