#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"
#include "uncertain.hpp"

namespace varith {

class UncertainMatrix {
public:
    UncertainMatrix() = default;
    explicit UncertainMatrix(std::size_t n) : n_(n), a_(n * n) {}

    static UncertainMatrix identity(std::size_t n) {
        UncertainMatrix m(n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = UncertainValue::precise(1.0);
        return m;
    }

    std::size_t size() const { return n_; }
    UncertainValue& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
    const UncertainValue& operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }

    UncertainMatrix transposed() const {
        UncertainMatrix t(n_);
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < n_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

private:
    std::size_t n_ = 0;
    std::vector<UncertainValue> a_;
};

inline constexpr std::size_t kMaxMatrixDimension = 8;

namespace detail {

// Determinants and variance permanents of every square submatrix, keyed by
// (row mask, column mask) and filled on demand by Laplace expansion along the
// first row. No pivoting anywhere, so each value is path independent.
class MinorCache {
public:
    MinorCache(const UncertainMatrix& m, const Context& ctx) : n_(m.size()) {
        if (n_ > kMaxMatrixDimension) throw Error(Errc::DimensionTooLarge, "matrix dimension above 8");
        const double z2 = ctx.zeta2();
        x_.resize(n_ * n_);
        v_.resize(n_ * n_);
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < n_; ++j) {
                x_[i * n_ + j] = m(i, j).value();
                v_[i * n_ + j] = z2 * m(i, j).variance();
            }
        const std::size_t cells = std::size_t{1} << (2 * n_);
        det_.assign(cells, std::numeric_limits<double>::quiet_NaN());
        perm_.assign(cells, std::numeric_limits<double>::quiet_NaN());
    }

    std::size_t size() const { return n_; }
    unsigned full() const { return (1u << n_) - 1u; }

    double det(unsigned rows, unsigned cols) {
        if (rows == 0) return 1.0;
        double& slot = det_[key(rows, cols)];
        if (!std::isnan(slot)) return slot;
        const int r0 = std::countr_zero(rows);
        const unsigned restRows = rows & (rows - 1);
        double s = 0.0;
        int k = 0;
        for (unsigned c = cols; c; c &= c - 1, ++k) {
            const int col = std::countr_zero(c);
            const double x = x_[r0 * n_ + col];
            if (x == 0.0) continue;
            const double minor = det(restRows, cols & ~(1u << col));
            s += (k & 1) ? -x * minor : x * minor;
        }
        return slot = s;
    }

    // permanent of the (effective) variance submatrix
    double perm(unsigned rows, unsigned cols) {
        if (rows == 0) return 1.0;
        double& slot = perm_[key(rows, cols)];
        if (!std::isnan(slot)) return slot;
        const int r0 = std::countr_zero(rows);
        const unsigned restRows = rows & (rows - 1);
        double s = 0.0;
        for (unsigned c = cols; c; c &= c - 1) {
            const int col = std::countr_zero(c);
            const double v = v_[r0 * n_ + col];
            if (v == 0.0) continue;
            s += v * perm(restRows, cols & ~(1u << col));
        }
        return slot = s;
    }

    // Variance of det(rows, cols) with independent elements: every choice of
    // perturbed rows I and columns J contributes the squared complementary
    // minor times the permanent of the variances on I x J.
    double detVariance(unsigned rows, unsigned cols) {
        double total = 0.0;
        for (unsigned I = rows; I; I = (I - 1) & rows) {
            const int m = std::popcount(I);
            for (unsigned J = cols; J; J = (J - 1) & cols) {
                if (std::popcount(J) != m) continue;
                const double p = perm(I, J);
                if (p == 0.0) continue;
                const double minor = det(rows & ~I, cols & ~J);
                total += minor * minor * p;
            }
        }
        return total;
    }

    double value(std::size_t i, std::size_t j) const { return x_[i * n_ + j]; }
    double variance(std::size_t i, std::size_t j) const { return v_[i * n_ + j]; }

private:
    std::size_t key(unsigned rows, unsigned cols) const { return (std::size_t{rows} << n_) | cols; }
    std::size_t n_;
    std::vector<double> x_, v_, det_, perm_;
};

} // namespace detail

inline UncertainValue determinant(const UncertainMatrix& m, const Context& ctx = default_context()) {
    if (m.size() == 0) return UncertainValue::precise(1.0);
    detail::MinorCache cache(m, ctx);
    const unsigned all = cache.full();
    return detail::checked(cache.det(all, all), cache.detVariance(all, all));
}

// Variance from the first cofactors only.
inline UncertainValue determinant_first_order(const UncertainMatrix& m, const Context& ctx = default_context()) {
    if (m.size() == 0) return UncertainValue::precise(1.0);
    detail::MinorCache cache(m, ctx);
    const unsigned all = cache.full();
    double var = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = 0; j < m.size(); ++j) {
            const double v = cache.variance(i, j);
            if (v == 0.0) continue;
            const double c = cache.det(all & ~(1u << i), all & ~(1u << j));
            var += c * c * v;
        }
    return detail::checked(cache.det(all, all), var);
}

inline UncertainMatrix adjugate(const UncertainMatrix& m, const Context& ctx = default_context()) {
    const std::size_t n = m.size();
    UncertainMatrix adj(n);
    if (n == 0) return adj;
    if (n == 1) {
        adj(0, 0) = UncertainValue::precise(1.0);
        return adj;
    }
    detail::MinorCache cache(m, ctx);
    const unsigned all = cache.full();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const unsigned rows = all & ~(1u << i), cols = all & ~(1u << j);
            const double d = cache.det(rows, cols);
            adj(j, i) = detail::checked(((i + j) & 1) ? -d : d, cache.detVariance(rows, cols));
        }
    return adj;
}

inline constexpr double kIllConditionedPrecision = 0.2;

// First-order inverse: dV = -V dM V, so element (a, b) collects
// (V(a,k) V(l,b))^2 var(k,l).
inline UncertainMatrix inverse_first_order(const UncertainMatrix& m, const Context& ctx = default_context()) {
    const std::size_t n = m.size();
    const UncertainValue det = determinant(m, ctx);
    if (det.value() == 0.0) throw Error(Errc::SingularMatrix, "determinant is zero");
    if (!(det.precision() < kIllConditionedPrecision))
        throw Error(Errc::IllConditioned, "determinant precision " + std::to_string(det.precision()));
    const UncertainMatrix adj = adjugate(m, ctx);
    std::vector<double> V(n * n);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) V[a * n + b] = adj(a, b).value() / det.value();
    const double z2 = ctx.zeta2();
    UncertainMatrix inv(n);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
            double var = 0.0;
            for (std::size_t k = 0; k < n; ++k)
                for (std::size_t l = 0; l < n; ++l) {
                    const double w = V[a * n + k] * V[l * n + b];
                    var += w * w * z2 * m(k, l).variance();
                }
            inv(a, b) = detail::checked(V[a * n + b], var);
        }
    return inv;
}

inline UncertainMatrix multiply(const UncertainMatrix& a, const UncertainMatrix& b, const Context& ctx = default_context()) {
    if (a.size() != b.size()) throw Error(Errc::LengthMismatch, "matrix sizes differ");
    const std::size_t n = a.size();
    UncertainMatrix r(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            UncertainValue s = UncertainValue::precise(0.0);
            for (std::size_t k = 0; k < n; ++k) s = add(s, mul(a(i, k), b(k, j), ctx), ctx);
            r(i, j) = s;
        }
    return r;
}

// Rows on separate lines, entries "value±deviation" separated by whitespace.
inline void write_matrix(std::ostream& os, const UncertainMatrix& m) {
    for (std::size_t i = 0; i < m.size(); ++i) {
        for (std::size_t j = 0; j < m.size(); ++j) {
            if (j) os << ' ';
            os << to_string(m(i, j));
        }
        os << '\n';
    }
}

inline UncertainMatrix read_matrix(std::istream& is) {
    std::vector<std::vector<UncertainValue>> rows;
    std::string line;
    while (std::getline(is, line)) {
        std::istringstream ls(line);
        std::vector<UncertainValue> row;
        std::string tok;
        while (ls >> tok) row.push_back(parse_uncertain(tok));
        if (!row.empty()) rows.push_back(std::move(row));
    }
    const std::size_t n = rows.size();
    UncertainMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (rows[i].size() != n) throw Error(Errc::ParseError, "matrix grid is not square");
        for (std::size_t j = 0; j < n; ++j) m(i, j) = rows[i][j];
    }
    return m;
}

} // namespace varith
