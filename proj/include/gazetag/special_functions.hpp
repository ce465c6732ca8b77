#pragma once

namespace gazetag {

// Small self-contained distribution kernel used by the statistics and
// evaluation modules. Accuracy targets: ibeta to ~1e-14 relative, which
// carries the F survival function comfortably past the 1e-10 mark.

/// Natural log of the beta function B(a, b).
double log_beta(double a, double b);

/// Regularized incomplete beta I_x(a, b), a, b > 0, x in [0, 1].
/// Continued-fraction evaluation (Lentz) with the symmetry fallback.
double ibeta(double a, double b, double x);

/// Survival function of the F distribution: P(F_{d1,d2} > f).
double f_survival(double f, double d1, double d2);

/// Two-sided Student-t CDF helpers. `t_cdf` is P(T_df <= t);
/// `t_quantile(p, df)` inverts it by bisection (1e-12 absolute).
double t_cdf(double t, double df);
double t_quantile(double p, double df);

/// Survival function of chi-squared with one degree of freedom.
double chi2_sf_1df(double x);

/// P(X >= k) for X ~ Binomial(n, 1/2), evaluated in log space.
double binom_tail_geq_half(int k, int n);

}  // namespace gazetag
