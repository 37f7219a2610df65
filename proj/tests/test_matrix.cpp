#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "oracle.hpp"
#include "varith/matrix.hpp"

using namespace varith;

namespace {

UncertainValue u(double v, double d) { return UncertainValue::withDeviation(v, d); }

UncertainMatrix integer_matrix(std::size_t n, unsigned seed, double precision = 0.0) {
    std::mt19937 eng(seed);
    std::uniform_int_distribution<int> d(-256, 256);
    UncertainMatrix m(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double v = d(eng);
            m(i, j) = u(v, precision * 256.0);
        }
    return m;
}

// Plain Gaussian elimination with partial pivoting.
double lu_det(std::vector<double> a, std::size_t n) {
    double det = 1.0;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(a[r * n + c]) > std::abs(a[p * n + c])) p = r;
        if (a[p * n + c] == 0.0) return 0.0;
        if (p != c) {
            for (std::size_t k = 0; k < n; ++k) std::swap(a[p * n + k], a[c * n + k]);
            det = -det;
        }
        det *= a[c * n + c];
        for (std::size_t r = c + 1; r < n; ++r) {
            const double f = a[r * n + c] / a[c * n + c];
            for (std::size_t k = c; k < n; ++k) a[r * n + k] -= f * a[c * n + k];
        }
    }
    return det;
}

} // namespace

TEST(Determinant, TwoByTwoFormula) {
    UncertainMatrix m(2);
    m(0, 0) = u(1, 0.1);
    m(0, 1) = u(2, 0.2);
    m(1, 0) = u(3, 0.3);
    m(1, 1) = u(4, 0.4);
    const auto d = determinant(m, ideal_context());
    EXPECT_EQ(d.value(), -2.0);
    const double da = 0.01, db = 0.04, dc = 0.09, dd = 0.16;
    EXPECT_NEAR(d.variance(), da * 16 + 1 * dd + db * 9 + 4 * dc + da * dd + db * dc, 1e-14);
}

TEST(Determinant, PreciseIdentity) {
    const auto d = determinant(UncertainMatrix::identity(5));
    EXPECT_EQ(d.value(), 1.0);
    EXPECT_EQ(d.variance(), 0.0);
}

TEST(Determinant, ValueMatchesElimination) {
    for (std::size_t n = 2; n <= 6; ++n) {
        const auto m = integer_matrix(n, 100 + n);
        std::vector<double> a(n * n);
        for (std::size_t i = 0; i < n * n; ++i) a[i] = m(i / n, i % n).value();
        const double ref = lu_det(a, n);
        EXPECT_NEAR(determinant(m).value(), ref, 1e-9 * std::abs(ref)) << n;
    }
}

TEST(Determinant, VarianceMatchesSampling) {
    // determinant is multilinear, so only second moments enter: plain
    // Gaussian noise against the zeta(2) = 1 variant is exact
    const std::size_t n = 4;
    const auto m = integer_matrix(n, 7, 1e-2);
    const auto d = determinant(m, ideal_context());
    std::mt19937_64 eng(99);
    std::normal_distribution<double> g;
    std::vector<double> a(n * n);
    const auto mc = oracle::sample(200000, [&] {
        for (std::size_t i = 0; i < n * n; ++i) a[i] = m(i / n, i % n).value() + m(i / n, i % n).deviation() * g(eng);
        return lu_det(a, n);
    });
    EXPECT_NEAR(mc.variance / d.variance(), 1.0, 0.015);
    EXPECT_NEAR(mc.mean, d.value(), 4 * std::sqrt(d.variance() / 200000));
}

TEST(FirstOrder, SingleSource) {
    UncertainMatrix m(2);
    m(0, 0) = u(2, 0.1);
    m(0, 1) = u(3, 0);
    m(1, 0) = u(5, 0);
    m(1, 1) = u(7, 0);
    EXPECT_DOUBLE_EQ(determinant_first_order(m, ideal_context()).variance(), 49 * 0.01);
    EXPECT_DOUBLE_EQ(determinant(m, ideal_context()).variance(), 49 * 0.01);
}

TEST(FirstOrder, CloseToExactAtSmallNoise) {
    for (std::size_t n = 4; n <= 6; ++n) {
        const auto m = integer_matrix(n, 200 + n, 1e-4);
        const double ratio = determinant_first_order(m).variance() / determinant(m).variance();
        EXPECT_LE(ratio, 1.0);
        EXPECT_GE(ratio, 1.0 - 1e-3);
    }
    EXPECT_EQ(determinant_first_order(integer_matrix(4, 3)).variance(), 0.0);
}

TEST(Adjugate, TwoByTwo) {
    UncertainMatrix m(2);
    m(0, 0) = u(1, 0.1);
    m(0, 1) = u(2, 0.2);
    m(1, 0) = u(3, 0.3);
    m(1, 1) = u(4, 0.4);
    const auto a = adjugate(m, ideal_context());
    EXPECT_EQ(a(0, 0).value(), 4.0);
    EXPECT_EQ(a(0, 1).value(), -2.0);
    EXPECT_EQ(a(1, 0).value(), -3.0);
    EXPECT_EQ(a(1, 1).value(), 1.0);
    EXPECT_DOUBLE_EQ(a(0, 0).variance(), 0.16);
    EXPECT_DOUBLE_EQ(a(0, 1).variance(), 0.04);
    EXPECT_DOUBLE_EQ(a(1, 0).variance(), 0.09);
    EXPECT_DOUBLE_EQ(a(1, 1).variance(), 0.01);
}

TEST(Adjugate, ForwardIdentityIsExact) {
    for (std::size_t n = 4; n <= 6; ++n) {
        const auto m = integer_matrix(n, 300 + n);
        const auto adj = adjugate(m);
        const double det = determinant(m).value();
        const auto p = multiply(m, adj);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                EXPECT_EQ(adj(i, j).variance(), 0.0);
                EXPECT_EQ(adj(i, j).value(), std::round(adj(i, j).value()));
                EXPECT_EQ(p(i, j).value(), i == j ? det : 0.0);
                EXPECT_EQ(p(i, j).variance(), 0.0);
            }
    }
}

TEST(Inverse, Diagonal) {
    UncertainMatrix m(2);
    m(0, 0) = u(2, 0.2);
    m(1, 1) = u(4, 0.4);
    m(0, 1) = m(1, 0) = UncertainValue::precise(0.0);
    const auto inv = inverse_first_order(m, ideal_context());
    EXPECT_DOUBLE_EQ(inv(0, 0).value(), 0.5);
    EXPECT_DOUBLE_EQ(inv(1, 1).value(), 0.25);
    EXPECT_DOUBLE_EQ(inv(0, 0).deviation(), 0.05);
    EXPECT_DOUBLE_EQ(inv(1, 1).deviation(), 0.025);
    EXPECT_EQ(inv(0, 1).value(), 0.0);
}

TEST(Inverse, PreciseValues) {
    UncertainMatrix m(2);
    m(0, 0) = u(1, 0);
    m(0, 1) = u(2, 0);
    m(1, 0) = u(3, 0);
    m(1, 1) = u(4, 0);
    const auto inv = inverse_first_order(m);
    EXPECT_DOUBLE_EQ(inv(0, 0).value(), -2.0);
    EXPECT_DOUBLE_EQ(inv(0, 1).value(), 1.0);
    EXPECT_DOUBLE_EQ(inv(1, 0).value(), 1.5);
    EXPECT_DOUBLE_EQ(inv(1, 1).value(), -0.5);
    const auto id = inverse_first_order(UncertainMatrix::identity(3));
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
            EXPECT_EQ(id(i, j).value(), i == j ? 1.0 : 0.0);
            EXPECT_EQ(id(i, j).variance(), 0.0);
        }
}

TEST(Inverse, Errors) {
    UncertainMatrix s(2);
    s(0, 0) = u(1, 0);
    s(0, 1) = u(2, 0);
    s(1, 0) = u(2, 0);
    s(1, 1) = u(4, 0);
    try {
        inverse_first_order(s);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::SingularMatrix);
    }
    UncertainMatrix w(2);
    w(0, 0) = u(1, 0.3);
    w(1, 1) = u(1, 0.3);
    w(0, 1) = w(1, 0) = u(0, 0);
    try {
        inverse_first_order(w);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::IllConditioned);
    }
    try {
        determinant(UncertainMatrix(kMaxMatrixDimension + 1));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::DimensionTooLarge);
    }
}

TEST(MatrixText, RoundTrip) {
    UncertainMatrix m(2);
    m(0, 0) = u(1.5, 0.25);
    m(0, 1) = u(-2, 0);
    m(1, 0) = u(3, 0.5);
    m(1, 1) = u(4.75, 0.125);
    std::stringstream ss;
    write_matrix(ss, m);
    const auto back = read_matrix(ss);
    ASSERT_EQ(back.size(), 2u);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) EXPECT_TRUE(identical(back(i, j), m(i, j)));
    std::stringstream bad("1 2\n3\n");
    EXPECT_THROW(read_matrix(bad), Error);
}
