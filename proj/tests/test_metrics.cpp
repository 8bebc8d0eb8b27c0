#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hybridwind/errors.hpp"
#include "hybridwind/metrics.hpp"

using namespace hybridwind;
using namespace hybridwind::metrics;

namespace {

struct Cloud {
    std::vector<double> v, p;
};

Cloud draw(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::weibull_distribution<double> wind(2.0, 8.0);
    std::normal_distribution<double> noise(0.0, 3.0);
    Cloud c;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = std::min(wind(rng), 25.0);
        const double p = std::clamp(100.0 / (1.0 + std::exp(-(v - 9.0))) + noise(rng), 0.0, 100.0);
        c.v.push_back(v);
        c.p.push_back(p);
    }
    return c;
}

}  // namespace

TEST(Rmse, HandExample) {
    EXPECT_DOUBLE_EQ(rmse(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 3}), 0.0);
    // Errors 1, -2, 1, 4, 4: mean square 38/5.
    EXPECT_DOUBLE_EQ(rmse(std::vector<double>{2, 0, 4, 8, 9}, std::vector<double>{1, 2, 3, 4, 5}),
                     std::sqrt(38.0 / 5.0));
    EXPECT_DOUBLE_EQ(rmse(std::vector<double>{3, 1}, std::vector<double>{1, 2}), std::sqrt(2.5));
}

TEST(Rmse, Sizes) {
    EXPECT_THROW(rmse(std::vector<double>{}, std::vector<double>{}), SizeError);
    EXPECT_THROW(rmse(std::vector<double>{1}, std::vector<double>{1, 2}), SizeError);
}

TEST(CrossCorrelation, Identities) {
    const std::vector<double> x = {1, 2, 3, 4, 5};
    std::vector<double> y = x, z = x;
    for (double& a : y) a = 3 * a - 7;
    for (double& a : z) a = -a;
    EXPECT_NEAR(cross_correlation(x, x), 1.0, 1e-15);
    EXPECT_NEAR(cross_correlation(x, y), 1.0, 1e-15);
    EXPECT_NEAR(cross_correlation(x, z), -1.0, 1e-15);
    EXPECT_DOUBLE_EQ(cross_correlation(std::vector<double>{1, 2, 3}, std::vector<double>{1, 3, 2}), 0.5);
}

TEST(CrossCorrelation, Undefined) {
    EXPECT_THROW(cross_correlation(std::vector<double>{2, 2, 2}, std::vector<double>{1, 2, 3}), UndefinedMetricError);
    EXPECT_THROW(cross_correlation(std::vector<double>{1}, std::vector<double>{1}), SizeError);
    EXPECT_THROW(cross_correlation(std::vector<double>{1, 2}, std::vector<double>{1, 2, 3}), SizeError);
}

TEST(JointDensity, UnitMassAndEdges) {
    BinEdges e;
    e.wind = {0, 1, 2};
    e.power = {0, 5, 10};
    const auto d = joint_density(std::vector<double>{0.5, 2.0, 1.5, -3.0}, std::vector<double>{1, 10, 6, 2}, e);
    double total = 0.0;
    for (double m : d.mass) total += m;
    EXPECT_DOUBLE_EQ(total, 1.0);
    EXPECT_DOUBLE_EQ(d.at(0, 0), 0.5);  // 0.5 and the clamped -3
    EXPECT_DOUBLE_EQ(d.at(1, 1), 0.5);  // upper edge goes to the last bin
}

TEST(Similarity, IdenticalIsOne) {
    const auto c = draw(5000, 1);
    EXPECT_NEAR(power_curve_similarity(c.v, c.p, c.v, c.p), 1.0, 1e-12);
}

TEST(Similarity, DisjointIsZero) {
    const std::vector<double> v1(100, 1.0), p1(100, 1.0), v2(100, 9.0), p2(100, 9.0);
    EXPECT_NEAR(power_curve_similarity(v1, p1, v2, p2), 0.0, 1e-12);
}

TEST(Similarity, SameProcessIsHigh) {
    const auto a = draw(20000, 2);
    const auto b = draw(20000, 3);
    EXPECT_GT(power_curve_similarity(a.v, a.p, b.v, b.p), 0.9);
}

TEST(Similarity, Symmetric) {
    const auto a = draw(3000, 4);
    auto b = draw(3000, 5);
    for (double& p : b.p) p *= 0.7;
    EXPECT_NEAR(power_curve_similarity(a.v, a.p, b.v, b.p), power_curve_similarity(b.v, b.p, a.v, a.p), 1e-12);
}

TEST(Similarity, BinCountsValidated) {
    const auto a = draw(100, 6);
    EXPECT_THROW(union_edges(a.v, a.p, a.v, a.p, 1, 30), ConfigError);
    EXPECT_EQ(union_edges(a.v, a.p, a.v, a.p).wind_bins(), 30u);
}
