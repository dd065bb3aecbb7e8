#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

// Statistical kernels behind the feature catalog. Every test returns
// std::nullopt when its sample-size or variance requirements are not met;
// callers turn that into a missing feature value.
namespace llm4vis::stats {

struct TestResult {
    double statistic;
    double p;
};

struct LinregressResult {
    double slope;
    double intercept;
    double r;
    double p;
};

struct Moments {
    double mean;
    double variance;  // population
    double skewness;  // m3 / m2^1.5, 0 for a constant sample
    double kurtosis;  // m4 / m2^2 - 3, -3 for a constant sample
};

/// Requires a nonempty sample.
Moments moments(std::span<const double> xs);

/// Linear-interpolation quantile of a sorted sample, q in [0,1].
double quantile_sorted(std::span<const double> sorted, double q);

/// Most frequent value; ties go to the smallest value.
double mode(std::span<const double> xs);

/// Gini coefficient after shifting values by -min when min < 0. A sample
/// summing to zero has coefficient 0.
double gini(std::span<const double> xs);

/// Shannon entropy (natural log) of nonnegative weights normalized to sum 1.
double shannon_entropy(std::span<const double> weights);

/// Entropy of a 10-bin equal-width histogram.
double histogram_entropy(std::span<const double> xs, int bins = 10);

/// Pearson r over paired samples; needs n >= 3 and nonzero variance in both.
std::optional<TestResult> pearson(std::span<const double> xs, std::span<const double> ys);

std::optional<LinregressResult> linregress(std::span<const double> xs, std::span<const double> ys);

/// Two-sample Kolmogorov-Smirnov statistic with the asymptotic Kolmogorov
/// p-value at sqrt(n*m/(n+m)) * D.
std::optional<TestResult> two_sample_ks(std::span<const double> xs, std::span<const double> ys);

/// Pearson chi-square test of independence on the contingency table of
/// paired categories (no continuity correction). Needs at least two distinct
/// values on each side.
std::optional<TestResult> chi2_independence(std::span<const std::string> a, std::span<const std::string> b);

/// One-way ANOVA F test; needs >= 2 nonempty groups, N > groups, and
/// nonzero within-group variance.
std::optional<TestResult> one_way_anova(std::span<const std::vector<double>> groups);

/// D'Agostino-Pearson K^2 omnibus test; needs n >= 8 and nonzero variance.
std::optional<TestResult> dagostino_normality(std::span<const double> xs);

// Distribution tails used by the tests above.
double student_t_two_sided_p(double t, double df);
double f_survival(double f, double df_num, double df_den);
double chi2_survival(double x, double df);
/// Survival function of the limiting Kolmogorov distribution.
double kolmogorov_survival(double lambda);

}  // namespace llm4vis::stats
