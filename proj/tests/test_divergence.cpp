#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "crowdsim/divergence.hpp"
#include "crowdsim/rng.hpp"

using namespace crowd;
using namespace crowd::stats;

namespace {

constexpr double kLn2 = std::numbers::ln2;

std::vector<double> random_pmf(Rng& rng, std::size_t n, double zero_fraction) {
    std::vector<double> p(n);
    double s = 0.0;
    for (auto& v : p) {
        v = rng.uniform() < zero_fraction ? 0.0 : rng.uniform();
        s += v;
    }
    if (s == 0.0) {
        p[0] = s = 1.0;
    }
    for (auto& v : p) {
        v /= s;
    }
    return p;
}

// Direct evaluation of H[(f+g)/2] - H[f]/2 - H[g]/2.
double naive_js(const std::vector<double>& f, const std::vector<double>& g) {
    auto H = [](const std::vector<double>& p) {
        double h = 0.0;
        for (const double v : p) {
            if (v > 0) {
                h -= v * std::log(v);
            }
        }
        return h;
    };
    std::vector<double> m(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        m[i] = 0.5 * (f[i] + g[i]);
    }
    return H(m) - 0.5 * H(f) - 0.5 * H(g);
}

std::vector<double> naive_bins(const std::vector<double>& x, double lo, double hi, std::size_t n) {
    std::vector<double> c(n, 0.0);
    for (const double v : x) {
        auto b = static_cast<std::size_t>((v - lo) / (hi - lo) * n);
        c[std::min(b, n - 1)] += 1.0;
    }
    for (auto& v : c) {
        v /= static_cast<double>(x.size());
    }
    return c;
}

}  // namespace

TEST(CommonHistogram, IdenticalSamplesGiveIdenticalHistograms) {
    const std::vector<double> a{1, 2, 2, 3, 7.5};
    const auto [f, g] = common_histogram(a, a, 10);
    EXPECT_EQ(f.mass, g.mass);
    EXPECT_EQ(f.edges, g.edges);
    EXPECT_EQ(f.edges.front(), 1.0);
    EXPECT_EQ(f.edges.back(), 7.5);
}

TEST(CommonHistogram, DisjointRangesHaveDisjointSupport) {
    const std::vector<double> a{0.0, 0.5, 1.0};
    const std::vector<double> b{5.0, 6.0, 7.0};
    const auto [f, g] = common_histogram(a, b, 20);
    for (std::size_t i = 0; i < f.bins(); ++i) {
        EXPECT_FALSE(f.mass[i] > 0 && g.mass[i] > 0);
    }
}

TEST(CommonHistogram, UniformSamplesFillBinsEvenly) {
    Rng rng(1);
    std::vector<double> x(10000);
    for (auto& v : x) {
        v = rng.uniform();
    }
    const auto [f, g] = common_histogram(x, x, 100);
    double total = 0.0;
    for (const double m : f.mass) {
        EXPECT_NEAR(m, 0.01, 0.003);
        total += m;
    }
    EXPECT_NEAR(total, 1.0, 1e-9);
    for (std::size_t i = 1; i < f.edges.size(); ++i) {
        EXPECT_GT(f.edges[i], f.edges[i - 1]);
    }
}

TEST(CommonHistogram, RejectsEmptyInput) {
    const std::vector<double> a{1.0};
    EXPECT_THROW(common_histogram(a, {}, 10), std::invalid_argument);
    EXPECT_THROW(common_histogram(a, a, 0), std::invalid_argument);
}

TEST(CommonHistogram, ConstantSamplesUseUnitWideRange) {
    const std::vector<double> a{2.0, 2.0};
    const auto [f, g] = common_histogram(a, a, 4);
    EXPECT_EQ(f.edges.front(), 1.5);
    EXPECT_EQ(f.edges.back(), 2.5);
}

TEST(ShannonEntropy, KnownValues) {
    EXPECT_EQ(shannon_entropy(std::vector<double>{0, 1, 0}), 0.0);
    EXPECT_NEAR(shannon_entropy(std::vector<double>(8, 0.125)), std::log(8.0), 1e-15);
    EXPECT_NEAR(shannon_entropy(std::vector<double>{0.75, 0.25}), 0.5623, 5e-5);
}

TEST(ShannonEntropy, BoundedByLogBins) {
    Rng rng(2);
    for (int k = 0; k < 500; ++k) {
        const std::size_t n = 1 + rng.below(60);
        const auto p = random_pmf(rng, n, 0.3);
        const double h = shannon_entropy(p);
        EXPECT_GE(h, -1e-15);
        EXPECT_LE(h, std::log(static_cast<double>(n)) + 1e-12);
    }
}

TEST(JsDivergence, KnownValues) {
    const std::vector<double> f{1, 0};
    const std::vector<double> g{0.5, 0.5};
    EXPECT_EQ(js_divergence(f, f), 0.0);
    EXPECT_NEAR(js_divergence(f, std::vector<double>{0, 1}), kLn2, 1e-15);
    EXPECT_NEAR(js_divergence(f, g), 0.2157, 1e-4);
    EXPECT_NEAR(js_divergence(f, g), 0.5623351446188083 - 0.5 * kLn2, 1e-12);
}

TEST(JsDivergence, MisalignedBinsAreAnError) {
    EXPECT_THROW(js_divergence(std::vector<double>{1.0}, std::vector<double>{0.5, 0.5}),
                 MisalignedBins);
    const Histogram a{{0, 1, 2}, {0.5, 0.5}};
    const Histogram b{{0, 1.5, 2}, {0.5, 0.5}};
    EXPECT_THROW(js_divergence(a, b), MisalignedBins);
}

TEST(JsDivergence, RandomizedProperties) {
    Rng rng(3);
    for (int k = 0; k < 1000; ++k) {
        const std::size_t n = 1 + rng.below(100);
        const auto f = random_pmf(rng, n, 0.4);
        const auto g = random_pmf(rng, n, 0.4);
        const double d = js_divergence(f, g);
        ASSERT_GE(d, 0.0);
        ASSERT_LE(d, kLn2 + 1e-9);
        ASSERT_NEAR(d, js_divergence(g, f), 1e-9);
        ASSERT_NEAR(js_divergence(f, f), 0.0, 1e-9);
        ASSERT_NEAR(d, naive_js(f, g), 1e-9);

        // disjoint supports: interleave f on even bins and g on odd bins
        std::vector<double> fe(2 * n, 0.0);
        std::vector<double> go(2 * n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            fe[2 * i] = f[i];
            go[2 * i + 1] = g[i];
        }
        ASSERT_NEAR(js_divergence(fe, go), kLn2, 1e-9);
    }
}

TEST(JsDivergence, NonNegativeAtEveryResolution) {
    Rng rng(4);
    std::vector<double> a(300);
    std::vector<double> b(300);
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = rng.uniform(0, 1);
        b[i] = rng.uniform(0.3, 1.4);
    }
    for (std::size_t bins = 1; bins <= 256; bins *= 2) {
        const auto [f, g] = common_histogram(a, b, bins);
        EXPECT_GE(js_divergence(f, g), 0.0);
    }
}

TEST(DistanceMatrix, IdenticalSetsGiveZeroMatrix) {
    Rng rng(5);
    std::vector<double> x(500);
    for (auto& v : x) {
        v = rng.uniform(0, 50);
    }
    const std::vector<std::vector<double>> sets{x, x, x};
    const auto d = distance_matrix("t", {"a", "b", "c"}, sets, 100);
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            EXPECT_EQ(d.values(i, j), 0.0);
        }
    }
}

TEST(DistanceMatrix, MatchesNaiveDoubleLoop) {
    Rng rng(6);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<std::vector<double>> sets(3);
        for (std::size_t m = 0; m < sets.size(); ++m) {
            sets[m].resize(200 + rng.below(300));
            const double shift = rng.uniform(0, 3);
            for (auto& v : sets[m]) {
                v = shift + rng.uniform(0, 5) * rng.uniform(0, 1);
            }
        }
        const auto d = distance_matrix("t", {"a", "b", "c"}, sets, 100);
        for (std::size_t i = 0; i < 3; ++i) {
            EXPECT_EQ(d.values(i, i), 0.0);
            for (std::size_t j = 0; j < 3; ++j) {
                EXPECT_EQ(d.values(i, j), d.values(j, i));
                if (i == j) {
                    continue;
                }
                const double lo = std::min(*std::min_element(sets[i].begin(), sets[i].end()),
                                           *std::min_element(sets[j].begin(), sets[j].end()));
                const double hi = std::max(*std::max_element(sets[i].begin(), sets[i].end()),
                                           *std::max_element(sets[j].begin(), sets[j].end()));
                const double ref = naive_js(naive_bins(sets[i], lo, hi, 100),
                                            naive_bins(sets[j], lo, hi, 100));
                EXPECT_NEAR(d.values(i, j), ref, 1e-12);
                EXPECT_LE(d.values(i, j), kLn2 + 1e-9);
            }
        }
    }
}

TEST(DistanceMatrix, DistributionsOverCommonSupport) {
    const std::vector<std::vector<double>> pmfs{{1, 0, 0}, {0, 1, 0}, {0.5, 0.5, 0}};
    const auto d = distance_matrix_from_distributions("density", {"a", "b", "c"}, pmfs);
    EXPECT_NEAR(d.values(0, 1), kLn2, 1e-15);
    EXPECT_NEAR(d.values(0, 2), 0.5623351446188083 - 0.5 * kLn2, 1e-12);
    EXPECT_THROW(distance_matrix_from_distributions("x", {"a"}, pmfs), std::invalid_argument);
}

TEST(ZonedDistance, EmptyZoneRules) {
    const std::vector<double> a{1, 2, 3};
    EXPECT_FALSE(zone_divergence({}, {}, 10));
    EXPECT_EQ(*zone_divergence(a, {}, 10), kLn2);
    EXPECT_EQ(*zone_divergence(a, a, 10), 0.0);
}

TEST(ZonedDistance, MeanOverPopulatedZones) {
    const std::vector<double> lo{0, 1, 2};
    const std::vector<double> hi{10, 11, 12};
    // zone 1 identical, zone 2 disjoint, zone 3 empty on both sides
    const std::vector<std::vector<std::vector<double>>> zones{{lo, lo, {}}, {lo, hi, {}}};
    const auto d = zoned_distance_matrix("zoned", {"a", "b"}, zones, 10);
    EXPECT_NEAR(d.values(0, 1), 0.5 * kLn2, 1e-15);
}
