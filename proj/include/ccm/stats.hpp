#ifndef CCM_STATS_HPP
#define CCM_STATS_HPP

#include <cstddef>
#include <vector>

namespace ccm {

struct WilsonInterval {
    double rate;
    double lo;
    double hi;
};

// Wilson score interval at 95% confidence (z = 1.96).
WilsonInterval wilson_interval(std::size_t successes, std::size_t trials);

// Standard normal CDF and its inverse (Acklam's rational approximation with
// one Halley refinement; absolute error < 1e-13).
double normal_cdf(double x);
double normal_quantile(double p);

// Regularized incomplete gamma functions P(a,x), Q(a,x).
double gamma_p(double a, double x);
double gamma_q(double a, double x);

// Survival function of the chi-squared distribution with k dof.
double chi2_sf(double x, double k);

// Pearson chi-squared test of observed counts vs expected probabilities.
// Returns the p-value; bins with expected count < 1e-12 must have zero
// observations.
double chi2_test(const std::vector<std::size_t>& observed,
                 const std::vector<double>& expected_probs);

// Two-sided one-sample Kolmogorov-Smirnov statistic of sorted samples vs a
// CDF evaluated at those samples, and the asymptotic p-value.
double ks_statistic_sorted(const std::vector<double>& sorted_cdf_values);
double ks_pvalue(double d, std::size_t m);

// Pr[Binomial(m, p) >= k], exact to long-double DP accuracy.
double binomial_tail_ge(std::size_t m, double p, long long k);

// Regularized incomplete beta I_x(a, b) (continued fraction), used as an
// independent cross-check of the binomial tail.
double incomplete_beta(double a, double b, double x);

// Sample mean and (unbiased) standard deviation.
double mean_of(const std::vector<double>& xs);
double stddev_of(const std::vector<double>& xs);
double quantile_of(std::vector<double> xs, double q);

}  // namespace ccm

#endif
