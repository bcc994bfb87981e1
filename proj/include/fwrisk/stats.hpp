#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fwrisk::stats {

struct StatSummary {
    std::size_t n = 0;
    double mean = 0.0;
    double stddev = 0.0;  // sample, n-1 denominator
    double iqr = 0.0;
    double min = 0.0;
    double max = 0.0;
    // Population-form third/fourth standardized moments computed with the
    // sample stddev; absent for constant samples (and kurtosis for n < 4).
    std::optional<double> skewness;
    std::optional<double> kurtosis_excess;
};

enum class TestKind { WelchT, AnovaF, PearsonR, SpearmanR };

struct TestResult {
    TestKind kind = TestKind::WelchT;
    double statistic = 0.0;
    double df = 0.0;   // Welch: fractional; ANOVA: between df (within in df2)
    double df2 = 0.0;  // ANOVA only
    double p_value = 1.0;
    double effect = 0.0;  // correlation tests: r itself
};

// ---- special functions (internal implementations, oracle-tested) ----

/// Error function via Cody's rational Chebyshev approximations.
double erf(double x);
double erfc(double x);

/// Regularized incomplete beta I_x(a,b), continued fraction evaluated with
/// the modified Lentz method to 1e-12.
double regularized_incomplete_beta(double a, double b, double x);

/// Two-sided p-values.
double t_two_sided_p(double t, double df);
double f_upper_p(double f, double df1, double df2);
double normal_two_sided_p(double z);

// ---- descriptive statistics ----

double mean(std::span<const double> xs);
double sample_variance(std::span<const double> xs);

/// Linear-interpolation quantile between order statistics (the common
/// "type 7" rule); q in [0,1].
double quantile(std::span<const double> xs, double q);

StatSummary summarize(std::span<const double> xs);

// ---- tests ----

TestResult welch_t(std::span<const double> x, std::span<const double> y);
TestResult pearson(std::span<const double> x, std::span<const double> y);
TestResult spearman(std::span<const double> x, std::span<const double> y);
TestResult anova_oneway(const std::vector<std::vector<double>>& groups);

/// Average ranks, ties get the mean rank; 1-based.
std::vector<double> average_ranks(std::span<const double> xs);

// ---- kernel density estimation ----

/// Silverman's rule 0.9 * min(sigma, IQR/1.34) * n^(-1/5). Returns the
/// fallback 1e-3 * range when the rule degenerates to zero on a sample
/// with positive range; throws for an all-constant sample.
double silverman_bandwidth(std::span<const double> xs);

/// Gaussian-kernel density at each grid point. Without an explicit
/// bandwidth requires n >= 2; n == 1 is allowed only with a bandwidth.
std::vector<double> kde(std::span<const double> xs,
                        std::span<const double> grid,
                        std::optional<double> bandwidth = std::nullopt);

/// Evenly spaced grid spanning [min - pad*h, max + pad*h].
std::vector<double> kde_grid(std::span<const double> xs, double bandwidth,
                             std::size_t points = 256, double pad = 5.0);

}  // namespace fwrisk::stats
