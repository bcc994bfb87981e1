#include "fwrisk/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fwrisk::stats {

// ---------------------------------------------------------------- erf ----
// W. J. Cody, "Rational Chebyshev approximation for the error function",
// Math. Comp. 23 (1969). Three regimes as in the classic CALERF routine.

namespace {

double erf_small(double x) {
    // |x| <= 0.46875
    static const double a[5] = {3.16112374387056560e0, 1.13864154151050156e2,
                                3.77485237685302021e2, 3.20937758913846947e3,
                                1.85777706184603153e-1};
    static const double b[4] = {2.36012909523441209e1, 2.44024637934444173e2,
                                1.28261652607737228e3, 2.84423683343917062e3};
    const double z = x * x;
    double num = a[4] * z;
    double den = z;
    for (int i = 0; i < 3; ++i) {
        num = (num + a[i]) * z;
        den = (den + b[i]) * z;
    }
    return x * (num + a[3]) / (den + b[3]);
}

double erfc_mid(double x) {
    // 0.46875 <= x <= 4
    static const double c[9] = {5.64188496988670089e-1, 8.88314979438837594e0,
                                6.61191906371416295e1,  2.98635138197400131e2,
                                8.81952221241769090e2,  1.71204761263407058e3,
                                2.05107837782607147e3,  1.23033935479799725e3,
                                2.15311535474403846e-8};
    static const double d[8] = {1.57449261107098347e1, 1.17693950891312499e2,
                                5.37181101862009858e2, 1.62138957456669019e3,
                                3.29079923573345963e3, 4.36261909014324716e3,
                                3.43936767414372164e3, 1.23033935480374942e3};
    double num = c[8] * x;
    double den = x;
    for (int i = 0; i < 7; ++i) {
        num = (num + c[i]) * x;
        den = (den + d[i]) * x;
    }
    const double ratio = (num + c[7]) / (den + d[7]);
    const double z = std::floor(x * 16.0) / 16.0;
    return std::exp(-z * z) * std::exp(-(x - z) * (x + z)) * ratio;
}

double erfc_large(double x) {
    // x > 4
    static const double p[6] = {3.05326634961232344e-1, 3.60344899949804439e-1,
                                1.25781726111229246e-1, 1.60837851487422766e-2,
                                6.58749161529837803e-4, 1.63153871373020978e-2};
    static const double q[5] = {2.56852019228982242e0, 1.87295284992346047e0,
                                5.27905102951428412e-1, 6.05183413124413191e-2,
                                2.33520497626869185e-3};
    const double inv_sqrt_pi = 5.6418958354775628695e-1;
    const double z = 1.0 / (x * x);
    double num = p[5] * z;
    double den = z;
    for (int i = 0; i < 4; ++i) {
        num = (num + p[i]) * z;
        den = (den + q[i]) * z;
    }
    double ratio = z * (num + p[4]) / (den + q[4]);
    ratio = (inv_sqrt_pi - ratio) / x;
    const double zz = std::floor(x * 16.0) / 16.0;
    return std::exp(-zz * zz) * std::exp(-(x - zz) * (x + zz)) * ratio;
}

}  // namespace

double erf(double x) {
    const double ax = std::abs(x);
    if (ax <= 0.46875) return erf_small(x);
    double ec = (ax <= 4.0) ? erfc_mid(ax) : erfc_large(ax);
    return x > 0 ? 1.0 - ec : ec - 1.0;
}

double erfc(double x) {
    const double ax = std::abs(x);
    if (ax <= 0.46875) return 1.0 - erf_small(x);
    double ec;
    if (ax <= 4.0)
        ec = erfc_mid(ax);
    else if (ax < 26.6)
        ec = erfc_large(ax);
    else
        ec = 0.0;
    return x > 0 ? ec : 2.0 - ec;
}

// ----------------------------------------------- incomplete beta ---------

namespace {

/// Continued fraction for I_x(a,b), modified Lentz method.
double beta_cf(double a, double b, double x) {
    constexpr double tol = 1e-12;
    constexpr double tiny = 1e-300;
    constexpr int max_iter = 500;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < tol) return h;
    }
    throw std::runtime_error("incomplete beta: continued fraction diverged");
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
    if (a <= 0.0 || b <= 0.0)
        throw std::invalid_argument("incomplete beta: a, b must be positive");
    if (x < 0.0 || x > 1.0)
        throw std::invalid_argument("incomplete beta: x must be in [0,1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double log_front = a * std::log(x) + b * std::log1p(-x) -
                             (std::lgamma(a) + std::lgamma(b) -
                              std::lgamma(a + b));
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * beta_cf(a, b, x) / a;
    }
    return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double t_two_sided_p(double t, double df) {
    if (df <= 0.0) throw std::invalid_argument("t p-value: df must be > 0");
    if (!std::isfinite(t)) return 0.0;
    const double x = df / (df + t * t);
    return regularized_incomplete_beta(df / 2.0, 0.5, x);
}

double f_upper_p(double f, double df1, double df2) {
    if (df1 <= 0.0 || df2 <= 0.0)
        throw std::invalid_argument("F p-value: dfs must be > 0");
    if (f <= 0.0) return 1.0;
    if (!std::isfinite(f)) return 0.0;
    const double x = df2 / (df2 + df1 * f);
    return regularized_incomplete_beta(df2 / 2.0, df1 / 2.0, x);
}

double normal_two_sided_p(double z) {
    return erfc(std::abs(z) / std::sqrt(2.0));
}

// --------------------------------------------------- descriptive ---------

double mean(std::span<const double> xs) {
    if (xs.empty()) throw std::invalid_argument("mean: empty sample");
    return std::accumulate(xs.begin(), xs.end(), 0.0) /
           static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
    if (xs.size() < 2)
        throw std::invalid_argument("variance: need at least 2 observations");
    const double m = mean(xs);
    double acc = 0.0;
    for (double x : xs) acc += (x - m) * (x - m);
    return acc / static_cast<double>(xs.size() - 1);
}

double quantile(std::span<const double> xs, double q) {
    if (xs.empty()) throw std::invalid_argument("quantile: empty sample");
    if (q < 0.0 || q > 1.0)
        throw std::invalid_argument("quantile: q must be in [0,1]");
    std::vector<double> sorted(xs.begin(), xs.end());
    std::sort(sorted.begin(), sorted.end());
    const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = h - std::floor(h);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

StatSummary summarize(std::span<const double> xs) {
    if (xs.size() < 2)
        throw std::invalid_argument("summarize: need at least 2 observations");
    StatSummary s;
    s.n = xs.size();
    s.mean = mean(xs);
    s.stddev = std::sqrt(sample_variance(xs));
    auto [mn, mx] = std::minmax_element(xs.begin(), xs.end());
    s.min = *mn;
    s.max = *mx;
    s.iqr = quantile(xs, 0.75) - quantile(xs, 0.25);
    if (s.stddev > 0.0) {
        double m3 = 0.0, m4 = 0.0;
        for (double x : xs) {
            const double z = (x - s.mean) / s.stddev;
            m3 += z * z * z;
            m4 += z * z * z * z;
        }
        const double n = static_cast<double>(s.n);
        s.skewness = m3 / n;
        if (s.n >= 4) s.kurtosis_excess = m4 / n - 3.0;
    }
    return s;
}

// --------------------------------------------------------- tests ---------

TestResult welch_t(std::span<const double> x, std::span<const double> y) {
    if (x.size() < 2 || y.size() < 2)
        throw std::invalid_argument("welch_t: need >= 2 observations per side");
    const double vx = sample_variance(x);
    const double vy = sample_variance(y);
    if (vx <= 0.0 && vy <= 0.0) {
        // Degenerate pair: identical constants are indistinguishable.
        if (mean(x) == mean(y))
            return {TestKind::WelchT, 0.0,
                    static_cast<double>(x.size() + y.size() - 2), 0.0, 1.0};
        throw std::invalid_argument("welch_t: both samples are constant");
    }
    const double nx = static_cast<double>(x.size());
    const double ny = static_cast<double>(y.size());
    const double se2 = vx / nx + vy / ny;
    const double t = (mean(x) - mean(y)) / std::sqrt(se2);
    const double df =
        se2 * se2 /
        ((vx / nx) * (vx / nx) / (nx - 1.0) + (vy / ny) * (vy / ny) / (ny - 1.0));
    TestResult res;
    res.kind = TestKind::WelchT;
    res.statistic = t;
    res.df = df;
    res.p_value = t == 0.0 ? 1.0 : t_two_sided_p(t, df);
    return res;
}

TestResult pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        throw std::invalid_argument("pearson: length mismatch");
    if (x.size() < 3)
        throw std::invalid_argument("pearson: need at least 3 pairs");
    const double mx = mean(x), my = mean(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0)
        throw std::invalid_argument("pearson: constant input");
    double r = sxy / std::sqrt(sxx * syy);
    r = std::clamp(r, -1.0, 1.0);

    TestResult res;
    res.kind = TestKind::PearsonR;
    res.statistic = r;
    res.effect = r;
    res.df = static_cast<double>(x.size());
    if (std::abs(r) >= 1.0) {
        res.p_value = 0.0;
    } else {
        // Fisher z with sigma_z = 1/sqrt(n-3).
        const double z = 0.5 * std::log((1.0 + r) / (1.0 - r));
        res.p_value =
            normal_two_sided_p(z * std::sqrt(static_cast<double>(x.size()) - 3.0));
    }
    return res;
}

std::vector<double> average_ranks(std::span<const double> xs) {
    const std::size_t n = xs.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && xs[order[j + 1]] == xs[order[i]]) ++j;
        const double avg = (static_cast<double>(i + 1) +
                            static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

TestResult spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        throw std::invalid_argument("spearman: length mismatch");
    auto rx = average_ranks(x);
    auto ry = average_ranks(y);
    TestResult res = pearson(rx, ry);
    res.kind = TestKind::SpearmanR;
    return res;
}

TestResult anova_oneway(const std::vector<std::vector<double>>& groups) {
    if (groups.size() < 2)
        throw std::invalid_argument("anova: need at least 2 groups");
    std::size_t total_n = 0;
    double grand_sum = 0.0;
    for (const auto& g : groups) {
        if (g.size() < 2)
            throw std::invalid_argument("anova: each group needs >= 2 values");
        total_n += g.size();
        grand_sum += std::accumulate(g.begin(), g.end(), 0.0);
    }
    const double grand_mean = grand_sum / static_cast<double>(total_n);
    double ss_between = 0.0, ss_within = 0.0;
    for (const auto& g : groups) {
        const double gm = mean(g);
        ss_between += static_cast<double>(g.size()) * (gm - grand_mean) *
                      (gm - grand_mean);
        for (double v : g) ss_within += (v - gm) * (v - gm);
    }
    const double df1 = static_cast<double>(groups.size()) - 1.0;
    const double df2 = static_cast<double>(total_n - groups.size());
    TestResult res;
    res.kind = TestKind::AnovaF;
    res.df = df1;
    res.df2 = df2;
    if (ss_within <= 0.0) {
        if (ss_between <= 0.0) {
            res.statistic = 0.0;
            res.p_value = 1.0;
            return res;
        }
        throw std::invalid_argument("anova: zero within-group variance");
    }
    res.statistic = (ss_between / df1) / (ss_within / df2);
    res.p_value =
        res.statistic == 0.0 ? 1.0 : f_upper_p(res.statistic, df1, df2);
    return res;
}

// ----------------------------------------------------------- kde ---------

double silverman_bandwidth(std::span<const double> xs) {
    if (xs.size() < 2)
        throw std::invalid_argument(
            "kde: default bandwidth needs at least 2 observations");
    const double sd = std::sqrt(sample_variance(xs));
    const double iqr = quantile(xs, 0.75) - quantile(xs, 0.25);
    const double spread = std::min(sd, iqr / 1.34);
    const double h =
        0.9 * spread * std::pow(static_cast<double>(xs.size()), -0.2);
    if (h > 0.0) return h;
    auto [mn, mx] = std::minmax_element(xs.begin(), xs.end());
    const double range = *mx - *mn;
    if (range <= 0.0)
        throw std::invalid_argument("kde: constant sample has no bandwidth");
    return 1e-3 * range;
}

std::vector<double> kde(std::span<const double> xs,
                        std::span<const double> grid,
                        std::optional<double> bandwidth) {
    if (xs.empty()) throw std::invalid_argument("kde: empty sample");
    double h;
    if (bandwidth) {
        if (*bandwidth <= 0.0)
            throw std::invalid_argument("kde: bandwidth must be positive");
        h = *bandwidth;
    } else {
        h = silverman_bandwidth(xs);
    }
    const double norm = 1.0 / (static_cast<double>(xs.size()) * h *
                               std::sqrt(2.0 * std::acos(-1.0)));
    std::vector<double> density(grid.size(), 0.0);
    for (std::size_t g = 0; g < grid.size(); ++g) {
        double acc = 0.0;
        for (double x : xs) {
            const double z = (grid[g] - x) / h;
            acc += std::exp(-0.5 * z * z);
        }
        density[g] = norm * acc;
    }
    return density;
}

std::vector<double> kde_grid(std::span<const double> xs, double bandwidth,
                             std::size_t points, double pad) {
    if (xs.empty() || points < 2)
        throw std::invalid_argument("kde_grid: bad arguments");
    auto [mn, mx] = std::minmax_element(xs.begin(), xs.end());
    const double lo = *mn - pad * bandwidth;
    const double hi = *mx + pad * bandwidth;
    std::vector<double> grid(points);
    for (std::size_t i = 0; i < points; ++i)
        grid[i] = lo + (hi - lo) * static_cast<double>(i) /
                           static_cast<double>(points - 1);
    return grid;
}

}  // namespace fwrisk::stats
