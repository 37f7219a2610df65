#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "oracle.hpp"
#include "varith/harness.hpp"

using namespace varith;

TEST(ErrorStats, AllZeroErrors) {
    const std::vector<double> e(10, 0.0), u(10, 0.3);
    const auto s = error_stats(e, u);
    EXPECT_EQ(s.errorDeviation, 0.0);
    EXPECT_TRUE(s.isDelta());
    EXPECT_EQ(s.coverage, Coverage::None);
    EXPECT_EQ(s.histogram[1 + 32], 10u);
}

TEST(ErrorStats, ConstantTenfold) {
    const std::vector<double> u{0.1, 0.2, 0.5, 1.0};
    std::vector<double> e;
    for (double x : u) e.push_back(10 * x);
    const auto s = error_stats(e, u);
    EXPECT_DOUBLE_EQ(s.errorDeviation, 10.0);
    EXPECT_DOUBLE_EQ(s.errorMean, 10.0);
    EXPECT_EQ(s.coverage, Coverage::Proper);
    EXPECT_EQ(classify(10.5), Coverage::None);
    EXPECT_EQ(classify(1.05), Coverage::Ideal);
    EXPECT_EQ(classify(1.05, {0.98, 1.02, 0.1, 10}), Coverage::Proper);
}

TEST(ErrorStats, MatchedNormalNoise) {
    std::mt19937_64 eng(3);
    std::normal_distribution<double> g;
    const std::size_t n = 40000;
    std::vector<double> e(n), u(n);
    for (std::size_t i = 0; i < n; ++i) {
        u[i] = 0.5 + static_cast<double>(i % 7);
        e[i] = u[i] * g(eng);
    }
    const auto s = error_stats(e, u);
    EXPECT_NEAR(s.errorDeviation, 1.0, 3.0 / std::sqrt(static_cast<double>(n)));
    EXPECT_EQ(s.coverage, Coverage::Ideal);
    std::size_t mass = 0;
    for (auto h : s.histogram) mass += h;
    EXPECT_EQ(mass, s.sampleCount);
}

TEST(ErrorStats, ZeroUncertaintyKeptApart) {
    const std::vector<double> e{1.0, 0.5, -2.0}, u{1.0, 0.0, 0.0};
    const auto s = error_stats(e, u);
    EXPECT_EQ(s.sampleCount, 1u);
    EXPECT_EQ(s.zeroUncertaintyCount, 2u);
    EXPECT_EQ(s.zeroUncertaintyMaxError, 2.0);
    EXPECT_EQ(s.errorDeviation, 1.0);
    const std::vector<double> shorter{1.0};
    EXPECT_THROW(error_stats(e, shorter), Error);
    const std::vector<double> neg{-1.0, 1.0, 1.0};
    EXPECT_THROW(error_stats(e, neg), Error);
}

TEST(Noise, DeterministicAndTruncated) {
    const NoiseSpec spec{DistributionKind::Gaussian, 2.0, 77};
    NoiseStream a(spec, 0, 1.0), b(spec, 0, 1.0), c(spec, 1, 1.0);
    bool differs = false;
    for (int i = 0; i < 10000; ++i) {
        const double x = a.next();
        EXPECT_EQ(x, b.next());
        EXPECT_LE(std::abs(x), 2.0);
        differs = differs || x != c.next();
    }
    EXPECT_TRUE(differs);
}

TEST(Noise, UniformRangeAndDeviation) {
    NoiseStream r({DistributionKind::Uniform, 0.5, 4});
    const auto m = oracle::sample(200000, [&] {
        const double x = r.next();
        EXPECT_LE(std::abs(x), 0.5 * std::numbers::sqrt3);
        return x;
    });
    EXPECT_NEAR(std::sqrt(m.variance), 0.5, 0.005);
    EXPECT_THROW(NoiseStream({DistributionKind::Gaussian, -1.0, 1}), Error);
    EXPECT_EQ(NoiseStream({DistributionKind::Gaussian, 0.0, 1}).next(), 0.0);
}

TEST(Coverage, ExpIsIdeal) {
    for (double x : {-5.0, 0.0, 3.0}) {
        const auto r = function_coverage(FunctionKind::Exp, x, 0.1, {DistributionKind::Gaussian, 0.0, 5}, 10000);
        EXPECT_EQ(r.summary.coverage, Coverage::Ideal) << x << " " << r.summary.errorDeviation;
    }
}

TEST(Coverage, SinPeakWithTinyNoiseIsNotIdeal) {
    const auto r = function_coverage(FunctionKind::Sin, std::numbers::pi / 2, 1e-9, {DistributionKind::Gaussian, 0.0, 5}, 2000);
    EXPECT_LT(r.summary.errorDeviation, 0.5);
}

TEST(Coverage, LogRejectedPastBoundary) {
    try {
        function_coverage(FunctionKind::Log, 1.0, 0.25, {DistributionKind::Gaussian, 0.0, 5}, 100);
        FAIL();
    } catch (const ExpansionError& e) {
        EXPECT_EQ(e.status(), ExpansionStatus::NotMonotonic);
    }
}

TEST(Bounding, UniformHundred) {
    const auto m = measure_bounding(100, std::numbers::sqrt3, DistributionKind::Uniform, 1000, 2);
    EXPECT_GE(m.measuredLeakage, 2e-2);
    EXPECT_LE(m.measuredLeakage, 5e-2);
}

TEST(Bounding, GaussianApproachesLimit) {
    const auto small = measure_bounding(10, 5.0, DistributionKind::Gaussian, 1000, 3);
    const auto big = measure_bounding(10000, 5.0, DistributionKind::Gaussian, 200, 3);
    EXPECT_GT(small.measuredLeakage, big.measuredLeakage);
    EXPECT_GT(big.measuredLeakage, bounding_leakage(5.0));
    EXPECT_LT(big.measuredLeakage, 1.2 * bounding_leakage(5.0));
    EXPECT_LT(small.measuredKappa, big.measuredKappa);
    EXPECT_THROW(measure_bounding(1, 5.0, DistributionKind::Gaussian, 1), Error);
}

TEST(SpecialDeterminant, NoNoise) {
    const auto r = special_determinant_check(1, 2, 3, 0, 0, 0, 0);
    EXPECT_EQ(r.bias, 0.0);
    EXPECT_EQ(r.variance, 0.0);
}

TEST(SpecialDeterminant, BiasAtOnes) {
    const auto& t = *default_moment_table();
    const auto r = special_determinant_check(1, 1, 1, 0.01, 0.01, 0.01, 400000, 5);
    // each cube contributes -3 x zeta(2) d^2
    EXPECT_NEAR(r.bias, -9e-4 * t.zeta(2), 1e-12);
    EXPECT_NEAR(r.sampledBias, r.bias, 3e-5);
    EXPECT_NEAR(r.sampledVariance / r.variance, 1.0, 0.02);
}

TEST(SpecialDeterminant, SingleVariableVariance) {
    const auto& t = *default_moment_table();
    const double d = 0.01;
    // det = -(1 + e)^3 = -(1 + 3e + 3e^2 + e^3)
    const auto m = [&](int k) { return t.zeta(k) * std::pow(d, k); };
    const double mean = 3 * m(2);
    const double second = 9 * m(2) + 15 * m(4) + m(6); // odd powers vanish
    const auto r = special_determinant_check(1, 0, 0, d, 0, 0, 200000, 6);
    EXPECT_NEAR(r.variance, second - mean * mean, 1e-15);
    EXPECT_NEAR(r.variance, 9.0035e-4, 1e-7);
    EXPECT_NEAR(r.sampledVariance / r.variance, 1.0, 0.02);
}

TEST(SinCos, SymmetryPoint) {
    const auto r = sincos_recursion(1);
    ASSERT_EQ(r.table.size(), 3u);
    EXPECT_TRUE(identical(r.table[1].sin, r.table[1].cos));
    EXPECT_NEAR(r.table[1].sin.value(), std::sqrt(0.5), 1e-16);
    EXPECT_THROW(sincos_recursion(0), Error);
}

TEST(SinCos, IdentityCoverage) {
    const auto r = sincos_recursion(8);
    EXPECT_EQ(r.table.size(), 257u);
    EXPECT_GE(r.identity.errorDeviation, 0.2);
    EXPECT_LE(r.identity.errorDeviation, 5.0);
    const std::size_t q = r.table.size() / 2;
    EXPECT_TRUE(identical(r.table[q].sin, r.table[q].cos));
    // generated values stay within a few LSV of the platform sine
    EXPECT_LT(r.identityValueDeviation, 1e-15);
}

TEST(Geometric, ExactAtZeroAndRoundingElsewhere) {
    const auto z = geometric_series_residual(0.0);
    EXPECT_EQ(z.residual.value(), 0.0);
    const auto h = geometric_series_residual(0.5);
    EXPECT_LE(std::abs(h.residual.value()), 4 * lsv(2.0));
    EXPECT_THROW(geometric_series_residual(1.0), Error);
}

TEST(Geometric, TruncationNearOne) {
    const auto r = geometric_series_residual(0.98);
    // the sum stops at x^224, so the residual is -x^225 / (1 - x)
    EXPECT_NEAR(r.residual.value(), -std::pow(0.98, 225) / 0.02, 1e-9);
}

TEST(Identities, Grid) {
    IdentityGrid g;
    g.xStep = 0.5;
    g.pStep = 0.5;
    g.logStep = 0.05;
    const auto reports = function_identity_checks(g);
    ASSERT_EQ(reports.size(), 3u);
    EXPECT_GE(reports[0].summary.errorDeviation, 0.2);
    EXPECT_LE(reports[0].summary.errorDeviation, 2.0);
    const auto le = log_u(exp_u(UncertainValue::precise(0.0)).result()).result();
    EXPECT_EQ(le.value(), 0.0);
    EXPECT_EQ(le.variance(), 0.0);
}
