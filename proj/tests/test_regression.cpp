#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "varith/regression.hpp"

using namespace varith;

namespace {

std::vector<UncertainValue> constant_series(std::size_t n, double v, double d) {
    return std::vector<UncertainValue>(n, UncertainValue::withDeviation(v, d));
}

std::vector<UncertainValue> random_series(std::size_t n, unsigned seed) {
    std::mt19937 eng(seed);
    std::uniform_real_distribution<double> d(-100.0, 100.0);
    std::vector<UncertainValue> y;
    for (std::size_t i = 0; i < n; ++i) y.push_back(UncertainValue::withDeviation(d(eng), 0.5 + 0.001 * i));
    return y;
}

} // namespace

TEST(Regression, ClosedFormsForConstantNoise) {
    const auto fits = moving_fit(constant_series(20, 1.0, 0.2), 2);
    ASSERT_EQ(fits.size(), 16u);
    for (const auto& f : fits) {
        EXPECT_NEAR(f.alpha.value(), 1.0, 1e-15);
        EXPECT_NEAR(f.beta.value(), 0.0, 1e-15);
        EXPECT_NEAR(f.alpha.deviation(), 0.2 / std::sqrt(5.0), 1e-12);
        EXPECT_NEAR(f.beta.deviation(), 0.2 * std::sqrt(3.0 / 30.0), 1e-12);
    }
    EXPECT_NEAR(fits[0].alpha.deviation(), 0.08944, 1e-5);
    EXPECT_NEAR(fits[0].beta.deviation(), 0.06325, 1e-5);
}

TEST(Regression, PreciseRamp) {
    std::vector<UncertainValue> y;
    for (int k = 0; k < 50; ++k) y.push_back(UncertainValue::precise(k));
    for (const auto& f : moving_fit(y, 3)) {
        EXPECT_EQ(f.beta.value(), 1.0);
        EXPECT_EQ(f.beta.variance(), 0.0);
        EXPECT_EQ(f.alpha.value(), static_cast<double>(f.index));
    }
}

TEST(Regression, ProgressiveMatchesDirect) {
    const auto y = random_series(1100, 5);
    for (int H : {1, 4, 7}) {
        const auto p = moving_fit(y, H);
        const auto d = direct_fit(y, H);
        ASSERT_EQ(p.size(), d.size());
        double scale = 0.0;
        for (const auto& f : d) scale = std::max({scale, std::abs(f.alphaRaw.value()), std::abs(f.betaRaw.value())});
        for (std::size_t i = 0; i < p.size(); ++i) {
            EXPECT_EQ(p[i].index, d[i].index);
            EXPECT_LE(std::abs(p[i].alphaRaw.value() - d[i].alphaRaw.value()), 1e-12 * scale);
            EXPECT_LE(std::abs(p[i].betaRaw.value() - d[i].betaRaw.value()), 1e-12 * scale);
            EXPECT_DOUBLE_EQ(p[i].alpha.variance(), d[i].alpha.variance());
            EXPECT_DOUBLE_EQ(p[i].beta.variance(), d[i].beta.variance());
        }
    }
}

TEST(Regression, NaiveRecurrenceInflatesVariance) {
    const int H = 4;
    const auto y = constant_series(200, 3.0, 0.1);
    const auto naive = moving_fit_naive(y, H);
    const auto good = moving_fit(y, H);
    const std::size_t step = 100;
    EXPECT_GT(naive[step].beta.variance() / good[step].beta.variance(), 10.0);
    // the first window has no reuse yet
    EXPECT_NEAR(naive[0].alpha.variance() / good[0].alpha.variance(), 1.0, 1e-3);
}

TEST(Regression, Errors) {
    try {
        moving_fit(constant_series(4, 1, 1), 2);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::SeriesTooShort);
    }
    EXPECT_THROW(moving_fit(constant_series(10, 1, 1), 0), Error);
    EXPECT_THROW(direct_fit(constant_series(10, 1, 1), 0), Error);
}

TEST(Regression, CsvRoundTrip) {
    const auto y = random_series(30, 8);
    std::stringstream ss;
    write_series_csv(ss, y);
    const auto back = read_series_csv(ss);
    ASSERT_EQ(back.size(), y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        EXPECT_EQ(back[i].value(), y[i].value());
        EXPECT_EQ(back[i].deviation(), y[i].deviation());
    }
    std::stringstream fits;
    write_fits_csv(fits, moving_fit(y, 2));
    std::string head;
    std::getline(fits, head);
    EXPECT_EQ(head, "index,alpha,dalpha,beta,dbeta");
    std::stringstream bad("i,y,dy\n0,1,2\n");
    EXPECT_THROW(read_series_csv(bad), Error);
}
