#include "llm4vis/stats.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>

namespace llm4vis::stats {

namespace {

double clamp01(double p) { return std::clamp(p, 0.0, 1.0); }

bool is_constant(std::span<const double> xs) {
    return std::adjacent_find(xs.begin(), xs.end(), std::not_equal_to<>()) == xs.end();
}

double mean_of(std::span<const double> xs) {
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

struct CenteredSums {
    double sxx = 0.0;
    double syy = 0.0;
    double sxy = 0.0;
    double mx = 0.0;
    double my = 0.0;
};

CenteredSums centered_sums(std::span<const double> xs, std::span<const double> ys) {
    CenteredSums s;
    s.mx = mean_of(xs);
    s.my = mean_of(ys);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - s.mx;
        const double dy = ys[i] - s.my;
        s.sxx += dx * dx;
        s.syy += dy * dy;
        s.sxy += dx * dy;
    }
    return s;
}

double correlation_p(double r, std::size_t n) {
    const double df = static_cast<double>(n) - 2.0;
    if (std::fabs(r) >= 1.0) return 0.0;
    const double t = r * std::sqrt(df / ((1.0 - r) * (1.0 + r)));
    return student_t_two_sided_p(t, df);
}

}  // namespace

Moments moments(std::span<const double> xs) {
    if (is_constant(xs)) return {xs.front(), 0.0, 0.0, -3.0};
    const double n = static_cast<double>(xs.size());
    const double mu = mean_of(xs);
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double x : xs) {
        const double d = x - mu;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    if (m2 == 0.0) return {mu, 0.0, 0.0, -3.0};
    return {mu, m2, m3 / std::pow(m2, 1.5), m4 / (m2 * m2) - 3.0};
}

double quantile_sorted(std::span<const double> sorted, double q) {
    const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double mode(std::span<const double> xs) {
    std::map<double, std::size_t> counts;
    for (double x : xs) ++counts[x];
    double best = counts.begin()->first;
    std::size_t best_count = 0;
    for (const auto& [v, c] : counts) {
        if (c > best_count) {
            best = v;
            best_count = c;
        }
    }
    return best;
}

double gini(std::span<const double> xs) {
    std::vector<double> v(xs.begin(), xs.end());
    std::sort(v.begin(), v.end());
    if (v.empty()) return 0.0;
    if (v.front() < 0.0) {
        const double shift = v.front();
        for (double& x : v) x -= shift;
    }
    const double total = std::accumulate(v.begin(), v.end(), 0.0);
    if (total <= 0.0) return 0.0;
    const double n = static_cast<double>(v.size());
    double weighted = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        weighted += (2.0 * static_cast<double>(i + 1) - n - 1.0) * v[i];
    }
    return weighted / (n * total);
}

double shannon_entropy(std::span<const double> weights) {
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (total <= 0.0) return 0.0;
    double h = 0.0;
    for (double w : weights) {
        if (w <= 0.0) continue;
        const double p = w / total;
        h -= p * std::log(p);
    }
    return h;
}

double histogram_entropy(std::span<const double> xs, int bins) {
    if (xs.empty()) return 0.0;
    const auto [lo_it, hi_it] = std::minmax_element(xs.begin(), xs.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    if (hi == lo) return 0.0;
    std::vector<double> counts(static_cast<std::size_t>(bins), 0.0);
    const double width = (hi - lo) / bins;
    for (double x : xs) {
        auto b = static_cast<long>(std::floor((x - lo) / width));
        b = std::clamp(b, 0L, static_cast<long>(bins - 1));
        counts[static_cast<std::size_t>(b)] += 1.0;
    }
    return shannon_entropy(counts);
}

std::optional<TestResult> pearson(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size() || xs.size() < 3) return std::nullopt;
    if (is_constant(xs) || is_constant(ys)) return std::nullopt;
    const auto s = centered_sums(xs, ys);
    if (s.sxx <= 0.0 || s.syy <= 0.0) return std::nullopt;
    const double r = std::clamp(s.sxy / std::sqrt(s.sxx * s.syy), -1.0, 1.0);
    return TestResult{r, correlation_p(r, xs.size())};
}

std::optional<LinregressResult> linregress(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size() || xs.size() < 3) return std::nullopt;
    if (is_constant(xs) || is_constant(ys)) return std::nullopt;
    const auto s = centered_sums(xs, ys);
    if (s.sxx <= 0.0 || s.syy <= 0.0) return std::nullopt;
    const double slope = s.sxy / s.sxx;
    const double r = std::clamp(s.sxy / std::sqrt(s.sxx * s.syy), -1.0, 1.0);
    return LinregressResult{slope, s.my - slope * s.mx, r, correlation_p(r, xs.size())};
}

std::optional<TestResult> two_sample_ks(std::span<const double> xs, std::span<const double> ys) {
    if (xs.empty() || ys.empty()) return std::nullopt;
    std::vector<double> a(xs.begin(), xs.end());
    std::vector<double> b(ys.begin(), ys.end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == v) ++i;
        while (j < b.size() && b[j] == v) ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    const double en = std::sqrt(na * nb / (na + nb));
    return TestResult{d, kolmogorov_survival(en * d)};
}

std::optional<TestResult> chi2_independence(std::span<const std::string> a, std::span<const std::string> b) {
    if (a.size() != b.size() || a.empty()) return std::nullopt;
    std::map<std::string, std::size_t> rows, cols;
    for (const auto& s : a) rows.try_emplace(s, rows.size());
    for (const auto& s : b) cols.try_emplace(s, cols.size());
    if (rows.size() < 2 || cols.size() < 2) return std::nullopt;
    std::vector<double> observed(rows.size() * cols.size(), 0.0);
    std::vector<double> row_tot(rows.size(), 0.0), col_tot(cols.size(), 0.0);
    for (std::size_t k = 0; k < a.size(); ++k) {
        const std::size_t r = rows.at(a[k]);
        const std::size_t c = cols.at(b[k]);
        observed[r * cols.size() + c] += 1.0;
        row_tot[r] += 1.0;
        col_tot[c] += 1.0;
    }
    const double n = static_cast<double>(a.size());
    double chi2 = 0.0;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < cols.size(); ++c) {
            const double e = row_tot[r] * col_tot[c] / n;
            const double diff = observed[r * cols.size() + c] - e;
            chi2 += diff * diff / e;
        }
    }
    const double dof = static_cast<double>((rows.size() - 1) * (cols.size() - 1));
    return TestResult{chi2, chi2_survival(chi2, dof)};
}

std::optional<TestResult> one_way_anova(std::span<const std::vector<double>> groups) {
    std::size_t k = 0;
    std::size_t total_n = 0;
    double grand = 0.0;
    for (const auto& g : groups) {
        if (g.empty()) continue;
        ++k;
        total_n += g.size();
        grand += std::accumulate(g.begin(), g.end(), 0.0);
    }
    if (k < 2 || total_n <= k) return std::nullopt;
    grand /= static_cast<double>(total_n);
    double ssb = 0.0, ssw = 0.0;
    for (const auto& g : groups) {
        if (g.empty()) continue;
        const double m = mean_of(g);
        ssb += static_cast<double>(g.size()) * (m - grand) * (m - grand);
        for (double x : g) ssw += (x - m) * (x - m);
    }
    if (ssw <= 0.0) return std::nullopt;
    const double df_b = static_cast<double>(k - 1);
    const double df_w = static_cast<double>(total_n - k);
    const double f = (ssb / df_b) / (ssw / df_w);
    return TestResult{f, f_survival(f, df_b, df_w)};
}

std::optional<TestResult> dagostino_normality(std::span<const double> xs) {
    if (xs.size() < 8 || is_constant(xs)) return std::nullopt;
    const auto m = moments(xs);
    if (m.variance <= 0.0) return std::nullopt;
    const double n = static_cast<double>(xs.size());

    // Skewness transform.
    const double y = m.skewness * std::sqrt((n + 1.0) * (n + 3.0) / (6.0 * (n - 2.0)));
    const double beta2 = 3.0 * (n * n + 27.0 * n - 70.0) * (n + 1.0) * (n + 3.0) /
                         ((n - 2.0) * (n + 5.0) * (n + 7.0) * (n + 9.0));
    const double w2 = -1.0 + std::sqrt(2.0 * (beta2 - 1.0));
    const double delta = 1.0 / std::sqrt(0.5 * std::log(w2));
    const double alpha = std::sqrt(2.0 / (w2 - 1.0));
    const double z_skew = delta * std::asinh(y / alpha);

    // Kurtosis transform (Anscombe-Glynn).
    const double b2 = m.kurtosis + 3.0;
    const double expected = 3.0 * (n - 1.0) / (n + 1.0);
    const double var_b2 = 24.0 * n * (n - 2.0) * (n - 3.0) / ((n + 1.0) * (n + 1.0) * (n + 3.0) * (n + 5.0));
    const double x = (b2 - expected) / std::sqrt(var_b2);
    const double sqrt_beta1 = 6.0 * (n * n - 5.0 * n + 2.0) / ((n + 7.0) * (n + 9.0)) *
                              std::sqrt(6.0 * (n + 3.0) * (n + 5.0) / (n * (n - 2.0) * (n - 3.0)));
    const double a = 6.0 + 8.0 / sqrt_beta1 * (2.0 / sqrt_beta1 + std::sqrt(1.0 + 4.0 / (sqrt_beta1 * sqrt_beta1)));
    const double term1 = 1.0 - 2.0 / (9.0 * a);
    const double denom = 1.0 + x * std::sqrt(2.0 / (a - 4.0));
    if (denom == 0.0) return std::nullopt;
    const double term2 = std::copysign(std::cbrt((1.0 - 2.0 / a) / std::fabs(denom)), denom);
    const double z_kurt = (term1 - term2) / std::sqrt(2.0 / (9.0 * a));

    const double k2 = z_skew * z_skew + z_kurt * z_kurt;
    if (!std::isfinite(k2)) return std::nullopt;
    return TestResult{k2, chi2_survival(k2, 2.0)};
}

double student_t_two_sided_p(double t, double df) {
    if (!std::isfinite(t)) return 0.0;
    return clamp01(boost::math::ibeta(0.5 * df, 0.5, df / (df + t * t)));
}

double f_survival(double f, double df_num, double df_den) {
    if (f <= 0.0) return 1.0;
    if (!std::isfinite(f)) return 0.0;
    return clamp01(boost::math::ibeta(0.5 * df_den, 0.5 * df_num, df_den / (df_den + df_num * f)));
}

double chi2_survival(double x, double df) {
    if (x <= 0.0) return 1.0;
    if (!std::isfinite(x)) return 0.0;
    return clamp01(boost::math::gamma_q(0.5 * df, 0.5 * x));
}

double kolmogorov_survival(double lambda) {
    if (lambda <= 0.0) return 1.0;
    constexpr double pi = std::numbers::pi;
    if (lambda < 1.0) {
        // Jacobi-theta form converges fast for small lambda.
        double sum = 0.0;
        for (int k = 1; k <= 100; ++k) {
            const double odd = 2.0 * k - 1.0;
            const double term = std::exp(-odd * odd * pi * pi / (8.0 * lambda * lambda));
            sum += term;
            if (term < 1e-300 || term < sum * 1e-17) break;
        }
        return clamp01(1.0 - std::sqrt(2.0 * pi) / lambda * sum);
    }
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += sign * term;
        sign = -sign;
        if (term < 1e-300 || term < std::fabs(sum) * 1e-17) break;
    }
    return clamp01(2.0 * sum);
}

}  // namespace llm4vis::stats
