#include <cmath>
#include <cstdint>
#include <limits>

#include <gtest/gtest.h>

#include "oracle.hpp"
#include "varith/uncertain.hpp"

using namespace varith;

namespace {
const double z2 = default_context().zeta2();
}

TEST(FromFloat, ExactValues) {
    EXPECT_EQ(from_float(0.5).variance(), 0.0);
    EXPECT_EQ(from_float(3.0).variance(), 0.0);
    EXPECT_EQ(from_float(0.0).variance(), 0.0);
}

TEST(FromFloat, RoundedValue) {
    EXPECT_EQ(lsv(0.1), std::ldexp(1.0, -56));
    const double d = std::ldexp(1.0, -56) / std::sqrt(3.0);
    EXPECT_DOUBLE_EQ(from_float(0.1).variance(), d * d);
    EXPECT_NEAR(from_float(0.1).variance(), 6.42e-35, 0.01e-35);
    EXPECT_THROW(from_float(std::numeric_limits<double>::infinity()), Error);
}

TEST(FromInt, Limits) {
    EXPECT_EQ(from_int(7).variance(), 0.0);
    const std::int64_t top = (std::int64_t{1} << 53) - 1;
    EXPECT_EQ(from_int(top).value(), 9007199254740991.0);
    EXPECT_EQ(from_int(top).variance(), 0.0);
    const auto over = from_int(top + 2);
    EXPECT_EQ(over.value(), 9007199254740992.0);
    EXPECT_EQ(over.variance(), from_float(9007199254740992.0).variance());
}

TEST(Construct, Rejects) {
    EXPECT_THROW(UncertainValue(std::nan(""), 0.0), Error);
    EXPECT_THROW(UncertainValue(1.0, -1.0), Error);
    try {
        add(UncertainValue::precise(1e308), UncertainValue::precise(1e308));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::OverflowToNonFinite);
    }
}

TEST(Add, MonteCarlo) {
    const auto r = add(UncertainValue::withDeviation(1, 0.1), UncertainValue::withDeviation(2, 0.2));
    EXPECT_EQ(r.value(), 3.0);
    EXPECT_NEAR(r.deviation(), std::sqrt(0.05 * z2), 1e-15);
    EXPECT_NEAR(r.deviation(), 0.22359, 2e-5);
    oracle::TruncatedGaussian g(11);
    const auto mc = oracle::sample(1000000, [&] { return 1 + g(0.1) + 2 + g(0.2); });
    EXPECT_NEAR(mc.variance / r.variance(), 1.0, 0.01);
}

TEST(Add, PreciseZeroIsIdentity) {
    const auto x = UncertainValue::withDeviation(1.5, 0.3);
    EXPECT_TRUE(identical(add(x, UncertainValue::precise(0.0), ideal_context()), x));
    const auto y = add(x, UncertainValue::precise(0.0));
    EXPECT_EQ(y.value(), x.value());
    EXPECT_NEAR(y.variance() / x.variance(), 1.0, 2e-5);
}

TEST(Sub, IndependentOperands) {
    const auto a = UncertainValue::withDeviation(1, 0.1);
    const auto d = sub(a, a);
    EXPECT_EQ(d.value(), 0.0);
    EXPECT_DOUBLE_EQ(d.variance(), 2 * 0.01 * z2);
}

TEST(Mul, MonteCarlo) {
    const auto r = mul(UncertainValue::withDeviation(2, 0.1), UncertainValue::withDeviation(3, 0.2));
    EXPECT_EQ(r.value(), 6.0);
    EXPECT_NEAR(r.variance(), 0.2504, 1e-4);
    oracle::TruncatedGaussian g(12);
    const auto mc = oracle::sample(1000000, [&] { return (2 + g(0.1)) * (3 + g(0.2)); });
    EXPECT_NEAR(mc.variance / r.variance(), 1.0, 0.01);
}

TEST(Mul, ZeroMeans) {
    const auto r = mul(UncertainValue::withDeviation(0, 0.1), UncertainValue::withDeviation(0, 0.1));
    EXPECT_EQ(r.value(), 0.0);
    EXPECT_DOUBLE_EQ(r.variance(), z2 * z2 * 1e-4);
}

TEST(Mul, PreciseUnit) {
    const auto x = UncertainValue::withDeviation(-4, 0.5);
    EXPECT_TRUE(identical(mul(x, UncertainValue::precise(1.0), ideal_context()), x));
    EXPECT_TRUE(identical(scale(x, 1.0), x));
    EXPECT_DOUBLE_EQ(scale(x, -3.0).variance(), 9 * 0.25);
}

TEST(Compare, NotEqualProbability) {
    const auto c = compare(UncertainValue::withDeviation(1.002, 0.001), UncertainValue::withDeviation(1.000, 0.002));
    EXPECT_EQ(c.ordering, Ordering::Greater);
    EXPECT_NEAR(c.notEqualProbability, 0.628, 1e-3);
}

TEST(Compare, EqualAndLess) {
    const auto a = UncertainValue::withDeviation(1, 0.1);
    EXPECT_EQ(compare(a, a).ordering, Ordering::Equal);
    EXPECT_EQ(compare(a, a).notEqualProbability, 0.0);
    const auto c = compare(UncertainValue::withDeviation(0, 1), UncertainValue::withDeviation(10, 1));
    EXPECT_EQ(c.ordering, Ordering::Less);
    EXPECT_GT(c.notEqualProbability, 0.999999);
    // within half a deviation counts as equal
    EXPECT_EQ(compare(UncertainValue::withDeviation(1.0, 1), UncertainValue::withDeviation(1.5, 1)).ordering, Ordering::Equal);
}

TEST(Text, RoundTrips) {
    const auto x = parse_uncertain("1.25±0.5");
    EXPECT_EQ(x.value(), 1.25);
    EXPECT_EQ(x.deviation(), 0.5);
    EXPECT_TRUE(identical(parse_uncertain("1.25+-0.5"), x));
    EXPECT_TRUE(identical(parse_uncertain(to_string(x)), x));
    EXPECT_TRUE(parse_uncertain("7").isPrecise());
    EXPECT_THROW(parse_uncertain("abc"), Error);
    EXPECT_THROW(parse_uncertain("1±x"), Error);
    EXPECT_THROW(parse_uncertain("1±-2"), Error);

    const auto y = UncertainValue(0.1, from_float(0.1).variance());
    EXPECT_TRUE(identical(from_hex(to_hex(y)), y));
}
