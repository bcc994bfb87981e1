#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "fwrisk/rng.hpp"
#include "fwrisk/stats.hpp"

namespace st = fwrisk::stats;
using fwrisk::SeedStream;
using fwrisk::StreamPurpose;

namespace {

// Frozen 40-digit-arithmetic oracle values (independent numerical
// integration / series evaluation, generated once before the build).
struct BetaPoint {
    double a, b, x, value;
};
const BetaPoint kBetaGrid[] = {
    {0.5, 0.5, 0.001, 0.020135041633377491},
    {0.5, 0.5, 0.1, 0.20483276469913346},
    {0.5, 0.5, 0.25, 0.33333333333333333},
    {0.5, 0.5, 0.5, 0.5},
    {0.5, 0.5, 0.75, 0.66666666666666667},
    {0.5, 0.5, 0.9, 0.79516723530086657},
    {0.5, 0.5, 0.999, 0.9798649583666225},
    {1, 3, 0.001, 0.0029970010000000001},
    {1, 3, 0.1, 0.27100000000000001},
    {1, 3, 0.25, 0.578125},
    {1, 3, 0.5, 0.875},
    {1, 3, 0.75, 0.984375},
    {1, 3, 0.9, 0.999},
    {1, 3, 0.999, 0.999999999},
    {1.470588235294118, 0.5, 0.001, 1.6586857348899284e-5},
    {1.470588235294118, 0.5, 0.1, 0.01493703360909092},
    {1.470588235294118, 0.5, 0.25, 0.060529341504179771},
    {1.470588235294118, 0.5, 0.5, 0.18668240525974361},
    {1.470588235294118, 0.5, 0.75, 0.39641469578975169},
    {1.470588235294118, 0.5, 0.9, 0.60831225254356109},
    {1.470588235294118, 0.5, 0.999, 0.96020280586935419},
    {2, 2, 0.001, 2.9980000000000001e-6},
    {2, 2, 0.1, 0.028000000000000003},
    {2, 2, 0.25, 0.15625},
    {2, 2, 0.5, 0.5},
    {2, 2, 0.75, 0.84375},
    {2, 2, 0.9, 0.97200000000000001},
    {2, 2, 0.999, 0.999997002},
    {2, 0.5, 0.001, 3.7512507035940922e-7},
    {2, 0.5, 0.1, 0.0038825370469605109},
    {2, 0.5, 0.25, 0.025721420742506522},
    {2, 0.5, 0.5, 0.11611652351681559},
    {2, 0.5, 0.75, 0.3125},
    {2, 0.5, 0.9, 0.54146973927558504},
    {2, 0.5, 0.999, 0.95258164648577513},
    {5, 5, 0.001, 1.2558053968507001e-13},
    {5, 5, 0.1, 0.00089092000000000023},
    {5, 5, 0.25, 0.04892730712890625},
    {5, 5, 0.5, 0.5},
    {5, 5, 0.75, 0.95107269287109375},
    {5, 5, 0.9, 0.99910908},
    {5, 5, 0.999, 0.99999999999987442},
    {25, 2.5, 0.5, 1.1285063102906262e-6},
    {25, 2.5, 0.75, 0.011250102960849286},
    {25, 2.5, 0.9, 0.36647550647488419},
    {25, 2.5, 0.999, 0.99996855393815842},
    {0.5, 25, 0.001, 0.17611220219369675},
    {0.5, 25, 0.1, 0.97762097838579666},
    {0.5, 25, 0.25, 0.99983946504339967},
    {0.5, 25, 0.5, 0.99999999535430444},
    {250, 250, 0.5, 0.5},
};

struct ErfPoint {
    double x, value;
};
const ErfPoint kErfGrid[] = {
    {0, 0.0},
    {0.01, 0.011283415555849617},
    {0.1, 0.1124629160182849},
    {0.25, 0.27632639016823693},
    {0.46875, 0.49261347321793799},
    {0.5, 0.52049987781304654},
    {1, 0.84270079294971487},
    {1.5, 0.96610514647531073},
    {2, 0.99532226501895273},
    {3, 0.99997790950300141},
    {4, 0.9999999845827421},
    {5, 0.99999999999846254},
    {6, 0.99999999999999998},
};

struct TPoint {
    double t, df, p;
};
const TPoint kTGrid[] = {
    {1.549193338482967, 2.941176470588236, 0.22088084049409591},
    {0.5, 10, 0.62789360574297294},
    {2, 5, 0.10193947882985836},
    {3.5, 30, 0.0014768074376442531},
    {28, 1998, 8.0942523925275542e-146},
};

struct FPoint {
    double f, d1, d2, p;
};
const FPoint kFGrid[] = {
    {13.5, 1, 4, 0.021311641128756726},
    {2.5, 2, 2997, 0.082256168285092311},
    {1, 3, 20, 0.41325191406246002},
};

struct ZPoint {
    double z, p;
};
const ZPoint kZGrid[] = {
    {0.5, 0.61707507745197379},
    {1, 0.3173105078629141},
    {1.96, 0.049995790296440872},
    {2.5758, 0.010000847475557363},
    {5, 5.7330314375838782e-7},
};

}  // namespace

TEST_CASE("error function matches the frozen oracle to 1e-8") {
    for (const auto& pt : kErfGrid) {
        CHECK(std::abs(st::erf(pt.x) - pt.value) < 1e-8);
        CHECK(std::abs(st::erf(-pt.x) + pt.value) < 1e-8);
        CHECK(std::abs(st::erfc(pt.x) - (1.0 - pt.value)) < 1e-8);
    }
}

TEST_CASE("regularized incomplete beta matches the frozen oracle to 1e-8") {
    for (const auto& pt : kBetaGrid) {
        CHECK(std::abs(st::regularized_incomplete_beta(pt.a, pt.b, pt.x) -
                       pt.value) < 1e-8);
    }
    CHECK(st::regularized_incomplete_beta(2, 3, 0.0) == 0.0);
    CHECK(st::regularized_incomplete_beta(2, 3, 1.0) == 1.0);
    CHECK_THROWS_AS(st::regularized_incomplete_beta(-1, 1, 0.5),
                    std::invalid_argument);
}

TEST_CASE("p-values match frozen oracles to 1e-6") {
    for (const auto& pt : kTGrid)
        CHECK(st::t_two_sided_p(pt.t, pt.df) ==
              doctest::Approx(pt.p).epsilon(1e-6));
    for (const auto& pt : kFGrid)
        CHECK(st::f_upper_p(pt.f, pt.d1, pt.d2) ==
              doctest::Approx(pt.p).epsilon(1e-6));
    for (const auto& pt : kZGrid)
        CHECK(st::normal_two_sided_p(pt.z) ==
              doctest::Approx(pt.p).epsilon(1e-6));
}

TEST_CASE("p-values decrease as the statistic grows") {
    double prev = 1.0;
    for (double t : {0.0, 0.5, 1.0, 2.0, 4.0, 8.0}) {
        const double p = st::t_two_sided_p(t, 7.3);
        CHECK(p <= prev + 1e-15);
        prev = p;
    }
    prev = 1.0;
    for (double f : {0.0, 0.5, 1.0, 3.0, 9.0}) {
        const double p = st::f_upper_p(f, 2, 14);
        CHECK(p <= prev + 1e-15);
        prev = p;
    }
}

TEST_CASE("summarize: symmetric sample") {
    std::vector<double> xs = {1, 2, 3};
    auto s = st::summarize(xs);
    CHECK(s.mean == doctest::Approx(2.0));
    CHECK(s.stddev == doctest::Approx(1.0));
    CHECK(s.min == 1.0);
    CHECK(s.max == 3.0);
    REQUIRE(s.skewness.has_value());
    CHECK(*s.skewness == doctest::Approx(0.0));
    CHECK_FALSE(s.kurtosis_excess.has_value());  // n < 4
}

TEST_CASE("summarize: skewness uses the 1/n form with the sample stddev") {
    // sample (0,0,0,1): mean 1/4, sample std 1/2,
    // skew = (1/4) * [3*(-1/2)^3 + (3/2)^3] = 0.75
    std::vector<double> xs = {0, 0, 0, 1};
    auto s = st::summarize(xs);
    CHECK(s.stddev == doctest::Approx(0.5));
    REQUIRE(s.skewness.has_value());
    CHECK(*s.skewness == doctest::Approx(0.75).epsilon(1e-12));
    REQUIRE(s.kurtosis_excess.has_value());
    // z-scores are three -1/2 and one 3/2:
    // kurt = (1/4)*(3*0.0625 + 5.0625) - 3 = 1.3125 - 3
    CHECK(*s.kurtosis_excess == doctest::Approx(-1.6875).epsilon(1e-12));
}

TEST_CASE("quantiles interpolate linearly between order statistics") {
    std::vector<double> xs = {1, 2, 3, 4};
    CHECK(st::quantile(xs, 0.25) == doctest::Approx(1.75));
    CHECK(st::quantile(xs, 0.75) == doctest::Approx(3.25));
    auto s = st::summarize(xs);
    CHECK(s.iqr == doctest::Approx(1.5));
}

TEST_CASE("constant sample reports absent moments") {
    std::vector<double> xs = {2, 2, 2, 2};
    auto s = st::summarize(xs);
    CHECK(s.stddev == 0.0);
    CHECK_FALSE(s.skewness.has_value());
    CHECK_FALSE(s.kurtosis_excess.has_value());
}

TEST_CASE("welch: identical samples give t = 0, p = 1") {
    std::vector<double> xs = {1, 2, 3, 4};
    auto res = st::welch_t(xs, xs);
    CHECK(res.statistic == 0.0);
    CHECK(res.p_value == 1.0);
}

TEST_CASE("welch: hand-derived statistic, df, and oracle p") {
    std::vector<double> x = {1, 2, 3};
    std::vector<double> y = {2, 4, 6};
    auto res = st::welch_t(x, y);
    CHECK(std::abs(res.statistic) ==
          doctest::Approx(1.5491933384829668).epsilon(1e-12));
    CHECK(res.df == doctest::Approx(2.9411764705882353).epsilon(1e-12));
    CHECK(res.p_value ==
          doctest::Approx(0.22088084049409593).epsilon(1e-6));
}

TEST_CASE("welch is invariant under a common shift") {
    SeedStream s(157, 0, StreamPurpose::ConfigSample);
    std::vector<double> x(20), y(25);
    for (auto& v : x) v = s.next_normal();
    for (auto& v : y) v = 0.4 + s.next_normal();
    auto base = st::welch_t(x, y);
    for (auto& v : x) v += 17.5;
    for (auto& v : y) v += 17.5;
    auto shifted = st::welch_t(x, y);
    CHECK(shifted.statistic == doctest::Approx(base.statistic).epsilon(1e-9));
    CHECK(shifted.p_value == doctest::Approx(base.p_value).epsilon(1e-9));
}

TEST_CASE("pearson and spearman hand cases") {
    std::vector<double> x = {1, 2, 3};
    SUBCASE("perfect correlation") {
        auto res = st::pearson(x, x);
        CHECK(res.statistic == doctest::Approx(1.0));
        CHECK(res.p_value == 0.0);
    }
    SUBCASE("hand case r = -0.5 on both tests") {
        std::vector<double> y = {6, 4, 5};
        CHECK(st::pearson(x, y).statistic == doctest::Approx(-0.5));
        CHECK(st::spearman(x, y).statistic == doctest::Approx(-0.5));
    }
    SUBCASE("errors") {
        std::vector<double> constant = {1, 1, 1};
        CHECK_THROWS_AS(st::pearson(x, constant), std::invalid_argument);
        std::vector<double> shorter = {1, 2};
        CHECK_THROWS_AS(st::pearson(x, shorter), std::invalid_argument);
    }
}

TEST_CASE("pearson is invariant under positive affine maps") {
    SeedStream s(163, 0, StreamPurpose::ConfigSample);
    std::vector<double> x(40), y(40);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = s.next_normal();
        y[i] = 0.7 * x[i] + 0.5 * s.next_normal();
    }
    auto base = st::pearson(x, y);
    std::vector<double> xs(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) xs[i] = 3.0 * x[i] - 11.0;
    auto mapped = st::pearson(xs, y);
    CHECK(mapped.statistic == doctest::Approx(base.statistic).epsilon(1e-12));
    CHECK(mapped.p_value == doctest::Approx(base.p_value).epsilon(1e-9));
}

TEST_CASE("spearman equals pearson on pre-ranked tie-free data") {
    SeedStream s(167, 0, StreamPurpose::ConfigSample);
    std::vector<double> x(30), y(30);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = static_cast<double>(i) + 1.0;
        y[i] = s.next_normal();
    }
    auto ranks_y = st::average_ranks(y);
    auto sp = st::spearman(x, y);
    auto pe = st::pearson(x, ranks_y);
    CHECK(sp.statistic == doctest::Approx(pe.statistic).epsilon(1e-12));
}

TEST_CASE("average ranks give ties the mean rank") {
    std::vector<double> xs = {10, 20, 20, 30};
    auto r = st::average_ranks(xs);
    CHECK(r[0] == doctest::Approx(1.0));
    CHECK(r[1] == doctest::Approx(2.5));
    CHECK(r[2] == doctest::Approx(2.5));
    CHECK(r[3] == doctest::Approx(4.0));
}

TEST_CASE("anova: identical groups, hand case with oracle p") {
    std::vector<std::vector<double>> same = {{1, 2, 3}, {1, 2, 3}};
    auto res = st::anova_oneway(same);
    CHECK(res.statistic == 0.0);
    CHECK(res.p_value == 1.0);

    std::vector<std::vector<double>> groups = {{1, 2, 3}, {4, 5, 6}};
    res = st::anova_oneway(groups);
    CHECK(res.statistic == doctest::Approx(13.5).epsilon(1e-12));
    CHECK(res.df == doctest::Approx(1.0));
    CHECK(res.df2 == doctest::Approx(4.0));
    CHECK(res.p_value ==
          doctest::Approx(0.021311641128756726).epsilon(1e-6));

    CHECK_THROWS_AS(st::anova_oneway({{1.0, 2.0}}), std::invalid_argument);
}

TEST_CASE("anova F is invariant under global affine maps") {
    SeedStream s(173, 0, StreamPurpose::ConfigSample);
    std::vector<std::vector<double>> groups(3);
    for (std::size_t g = 0; g < 3; ++g) {
        groups[g].resize(12);
        for (auto& v : groups[g])
            v = static_cast<double>(g) * 0.4 + s.next_normal();
    }
    auto base = st::anova_oneway(groups);
    for (auto& g : groups)
        for (auto& v : g) v = -2.5 * v + 7.0;
    auto mapped = st::anova_oneway(groups);
    CHECK(mapped.statistic ==
          doctest::Approx(base.statistic).epsilon(1e-9));
}

TEST_CASE("kde: hand value, mass normalization, degenerate contracts") {
    SUBCASE("single point with forced bandwidth") {
        std::vector<double> xs = {0.0};
        std::vector<double> grid = {0.0};
        auto d = st::kde(xs, grid, 1.0);
        CHECK(d[0] == doctest::Approx(0.39894228040143268).epsilon(1e-12));
    }
    SUBCASE("trapezoid mass is 1 within 1 percent") {
        SeedStream s(179, 0, StreamPurpose::ConfigSample);
        std::vector<double> xs(200);
        for (auto& v : xs) v = 3.0 + 2.0 * s.next_normal();
        const double h = st::silverman_bandwidth(xs);
        auto grid = st::kde_grid(xs, h, 1024);
        auto density = st::kde(xs, grid);
        double mass = 0.0;
        for (std::size_t i = 1; i < grid.size(); ++i)
            mass += 0.5 * (density[i] + density[i - 1]) *
                    (grid[i] - grid[i - 1]);
        CHECK(mass == doctest::Approx(1.0).epsilon(0.01));
    }
    SUBCASE("constant sample is rejected for the default bandwidth") {
        std::vector<double> xs = {5, 5, 5};
        CHECK_THROWS_AS(st::silverman_bandwidth(xs), std::invalid_argument);
        std::vector<double> grid = {5.0};
        CHECK_THROWS_AS(st::kde(xs, grid), std::invalid_argument);
        // explicit bandwidth is fine
        auto d = st::kde(xs, grid, 0.5);
        CHECK(d[0] > 0.0);
    }
    SUBCASE("zero-IQR sample with positive range falls back") {
        std::vector<double> xs = {0, 0, 0, 0, 0, 0, 0, 1};
        const double h = st::silverman_bandwidth(xs);
        CHECK(h == doctest::Approx(1e-3));
    }
    SUBCASE("single point without bandwidth is rejected") {
        std::vector<double> xs = {1.0};
        std::vector<double> grid = {1.0};
        CHECK_THROWS_AS(st::kde(xs, grid), std::invalid_argument);
    }
}

TEST_CASE("silverman bandwidth formula") {
    SeedStream s(181, 0, StreamPurpose::ConfigSample);
    std::vector<double> xs(500);
    for (auto& v : xs) v = s.next_normal();
    const double sd = std::sqrt(st::sample_variance(xs));
    const double iqr = st::quantile(xs, 0.75) - st::quantile(xs, 0.25);
    const double expected =
        0.9 * std::min(sd, iqr / 1.34) * std::pow(500.0, -0.2);
    CHECK(st::silverman_bandwidth(xs) ==
          doctest::Approx(expected).epsilon(1e-12));
}
