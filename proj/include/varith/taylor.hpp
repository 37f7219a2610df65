#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "moments.hpp"
#include "uncertain.hpp"

namespace varith {

enum class ExpansionStatus { Accepted, NotFinite, NotMonotonic, NotStable, NotPositive, NotReliable };

inline const char* status_name(ExpansionStatus s) {
    switch (s) {
    case ExpansionStatus::Accepted: return "Accepted";
    case ExpansionStatus::NotFinite: return "NotFinite";
    case ExpansionStatus::NotMonotonic: return "NotMonotonic";
    case ExpansionStatus::NotStable: return "NotStable";
    case ExpansionStatus::NotPositive: return "NotPositive";
    case ExpansionStatus::NotReliable: return "NotReliable";
    }
    return "Unknown";
}

class ExpansionError : public Error {
public:
    explicit ExpansionError(ExpansionStatus s)
        : Error(Errc::ExpansionRejected, status_name(s)), status_(s) {}
    ExpansionStatus status() const noexcept { return status_; }

private:
    ExpansionStatus status_;
};

struct ExpansionOutcome {
    ExpansionStatus status = ExpansionStatus::Accepted;
    double mean = 0.0;
    double variance = 0.0;
    int termsUsed = 0;

    bool accepted() const { return status == ExpansionStatus::Accepted; }
    UncertainValue result() const {
        if (!accepted()) throw ExpansionError(status);
        return UncertainValue(mean, variance);
    }
};

// Taylor stream of f around x. fill(u, out) writes out[n] = a_n * u^n for
// n = 1..out.size()-1, where a_n is the n-th coefficient in the natural
// expansion variable (sigma or the precision P) and u = variable * kappa.
// The engine pairs out[n] with zeta(n)/kappa^n, so nothing is formed at raw
// scale. Results are scale * (value + sum) and scale^2 * variance.
struct TaylorCoefficients {
    double value = 0.0;
    double scale = 1.0;
    double variable = 0.0;
    int maxOrder = -1; // -1: unbounded
    std::function<void(double, std::span<double>)> fill;
};

inline constexpr int kMonotonicWindow = 20;

namespace detail {

inline bool strictly_decreasing_tail(const std::vector<double>& h, int window) {
    const std::size_t n = h.size();
    const std::size_t start = n > static_cast<std::size_t>(window) ? n - window : 0;
    for (std::size_t i = start + 1; i < n; ++i)
        if (!(h[i] < h[i - 1])) return false;
    return true;
}

} // namespace detail

// Mean and variance of f(x +- sigma) from its Taylor stream.
//
// Orders are accumulated two at a time (odd moments vanish) up to the usable
// moment order. Finite streams stop once every product term is exhausted and
// are exact. Unbounded streams run to the order limit, or until the terms
// underflow to zero, and must then pass the monotonic, stable and reliable
// rules; finite and positive are checked at every order.
inline ExpansionOutcome expand_1d(const TaylorCoefficients& c, const Context& ctx = default_context()) {
    ExpansionOutcome out;
    if (c.variable == 0.0) {
        out.mean = c.scale * c.value;
        if (!std::isfinite(out.mean)) out.status = ExpansionStatus::NotFinite;
        return out;
    }
    const MomentTable& table = *ctx.table;
    const double kappa = table.kappa();
    const int M = ctx.expansionOrder();
    const bool bounded = c.maxOrder >= 0 && 2 * c.maxOrder <= M;
    const int L = c.maxOrder >= 0 ? std::min(c.maxOrder, M) : M;

    std::vector<double> T(static_cast<std::size_t>(L) + 1, 0.0);
    c.fill(c.variable * kappa, std::span<double>(T));
    T[0] = 0.0;
    int lastNonZero = 0;
    for (int n = 1; n <= L; ++n) {
        if (!std::isfinite(T[n])) {
            out.status = ExpansionStatus::NotFinite;
            out.termsUsed = n;
            return out;
        }
        if (T[n] != 0.0) lastNonZero = n;
    }

    constexpr double eps = std::numeric_limits<double>::epsilon();
    constexpr double tiny = std::numeric_limits<double>::min();
    double mean = 0.0, var = 0.0, roundErr = 0.0, lastMeanTerm = 0.0;
    std::vector<double> varHist, meanHist;
    int n = 2;
    for (; n <= M; n += 2) {
        if (n > 2 * lastNonZero) break;
        const double zn = table.scaledZetaFast(n);
        const double mt = (n <= L ? T[n] : 0.0) * zn;
        double vt = 0.0, va = 0.0;
        const int jlo = std::max(1, n - L);
        const int jhi = std::min(n - 1, L);
        for (int j = jlo; j <= jhi; ++j) {
            const double term = T[j] * T[n - j] * (zn - table.scaledZetaFast(j) * table.scaledZetaFast(n - j));
            vt += term;
            va += std::abs(term);
        }
        mean += mt;
        var += vt;
        roundErr += 4.0 * eps * va + eps * std::abs(var);
        lastMeanTerm = mt;
        out.termsUsed = n;
        if (!std::isfinite(mean) || !std::isfinite(var)) {
            out.status = ExpansionStatus::NotFinite;
            return out;
        }
        if (var < 0.0) {
            out.status = ExpansionStatus::NotPositive;
            return out;
        }
        if (va >= tiny) varHist.push_back(va);
        if (std::abs(mt) >= tiny) meanHist.push_back(std::abs(mt));
    }
    if (!bounded) {
        // a stream that underflowed to zero before the order limit has converged;
        // its short history may still hold the rising start of the series
        const bool ranToLimit = n > M;
        if (ranToLimit && (!detail::strictly_decreasing_tail(varHist, kMonotonicWindow) ||
                           !detail::strictly_decreasing_tail(meanHist, kMonotonicWindow))) {
            out.status = ExpansionStatus::NotMonotonic;
            return out;
        }
        // an early break means the remaining terms are exactly zero
        const double last = ranToLimit ? lastMeanTerm : 0.0;
        const double limit = ctx.stableLeakage;
        if (!(std::abs(last) <= limit * std::sqrt(var) && std::abs(last) <= limit * std::abs(c.value + mean))) {
            out.status = ExpansionStatus::NotStable;
            return out;
        }
        if (var > 0.0 && !(roundErr < var / kappa)) {
            out.status = ExpansionStatus::NotReliable;
            return out;
        }
    }
    out.mean = c.scale * (c.value + mean);
    out.variance = c.scale * c.scale * var;
    if (!std::isfinite(out.mean) || !std::isfinite(out.variance)) {
        out.status = ExpansionStatus::NotFinite;
        out.mean = out.variance = 0.0;
    }
    return out;
}

// ---- function streams ----

inline TaylorCoefficients exp_stream(const UncertainValue& x) {
    TaylorCoefficients c;
    c.value = 1.0;
    c.scale = std::exp(x.value());
    c.variable = x.deviation();
    c.fill = [](double u, std::span<double> out) {
        double r = 1.0;
        for (std::size_t n = 1; n < out.size(); ++n) out[n] = r *= u / static_cast<double>(n);
    };
    return c;
}

inline TaylorCoefficients log_stream(const UncertainValue& x) {
    if (!(x.value() > 0.0)) throw Error(Errc::NonPositiveValue, "log of a non-positive value");
    TaylorCoefficients c;
    c.value = std::log(x.value());
    c.variable = x.deviation() / x.value();
    c.fill = [](double u, std::span<double> out) {
        double r = 1.0;
        for (std::size_t n = 1; n < out.size(); ++n) {
            r *= u;
            out[n] = (n & 1 ? r : -r) / static_cast<double>(n);
        }
    };
    return c;
}

// phase 0 gives sin, phase 1 gives cos: the derivative cycle shifted by one
inline TaylorCoefficients sin_stream(const UncertainValue& x, int phase = 0) {
    const double s = std::sin(x.value()), co = std::cos(x.value());
    const double cycle[4] = {s, co, -s, -co};
    TaylorCoefficients c;
    c.value = cycle[phase & 3];
    c.variable = x.deviation();
    c.fill = [s, co, phase](double u, std::span<double> out) {
        const double cyc[4] = {s, co, -s, -co};
        double r = 1.0;
        for (std::size_t n = 1; n < out.size(); ++n) {
            r *= u / static_cast<double>(n);
            out[n] = cyc[(n + phase) & 3] * r;
        }
    };
    return c;
}

inline bool is_natural(double c) { return c >= 0.0 && c == std::floor(c) && c < 1e9; }

inline TaylorCoefficients pow_stream(const UncertainValue& x, double cexp) {
    TaylorCoefficients c;
    const double xv = x.value();
    const bool natural = is_natural(cexp);
    if (xv == 0.0) {
        if (!natural) throw Error(Errc::ZeroBaseNonNatural, "zero base needs a natural exponent");
        const int k = static_cast<int>(cexp);
        c.value = k == 0 ? 1.0 : 0.0;
        c.variable = k == 0 ? 0.0 : x.deviation();
        c.maxOrder = k;
        c.fill = [k](double u, std::span<double> out) {
            for (std::size_t n = 1; n < out.size(); ++n) out[n] = 0.0;
            if (static_cast<std::size_t>(k) < out.size()) out[k] = std::pow(u, k);
        };
        return c;
    }
    if (xv < 0.0 && cexp != std::floor(cexp))
        throw Error(Errc::NonPositiveValue, "fractional power of a negative value");
    c.value = 1.0;
    c.scale = std::pow(xv, cexp);
    c.variable = x.deviation() / std::abs(xv);
    if (natural) c.maxOrder = static_cast<int>(cexp);
    if (cexp == 0.0) c.variable = 0.0;
    c.fill = [cexp](double u, std::span<double> out) {
        double r = 1.0;
        for (std::size_t n = 1; n < out.size(); ++n) {
            r *= (cexp - static_cast<double>(n - 1)) / static_cast<double>(n) * u;
            out[n] = r;
        }
    };
    return c;
}

// Taylor shift: s_k = sum_j c_j C(j, k) x^(j-k), via repeated synthetic division.
inline std::vector<double> taylor_shift(std::span<const double> coeffs, double x) {
    std::vector<double> b(coeffs.begin(), coeffs.end());
    const std::size_t N = b.size();
    for (std::size_t k = 0; k + 1 < N; ++k)
        for (std::size_t j = N - 1; j > k; --j) b[j - 1] += x * b[j];
    return b;
}

inline TaylorCoefficients polynomial_stream(std::span<const double> coeffs, const UncertainValue& x,
                                            const Context& ctx = default_context()) {
    const int degree = static_cast<int>(coeffs.size()) - 1;
    if (degree < 0) throw Error(Errc::DomainError, "empty polynomial");
    if (2 * degree > ctx.table->maxUsableOrder())
        throw Error(Errc::DegreeExceeded, "variance needs moments of order 2N");
    auto s = std::make_shared<std::vector<double>>(taylor_shift(coeffs, x.value()));
    TaylorCoefficients c;
    c.value = (*s)[0];
    c.variable = x.deviation();
    c.maxOrder = degree;
    c.fill = [s](double u, std::span<double> out) {
        double r = 1.0;
        for (std::size_t n = 1; n < out.size(); ++n) {
            r *= u;
            out[n] = n < s->size() ? (*s)[n] * r : 0.0;
        }
    };
    return c;
}

inline ExpansionOutcome exp_u(const UncertainValue& x, const Context& ctx = default_context()) {
    return expand_1d(exp_stream(x), ctx);
}
inline ExpansionOutcome log_u(const UncertainValue& x, const Context& ctx = default_context()) {
    return expand_1d(log_stream(x), ctx);
}
inline ExpansionOutcome sin_u(const UncertainValue& x, const Context& ctx = default_context()) {
    return expand_1d(sin_stream(x, 0), ctx);
}
inline ExpansionOutcome cos_u(const UncertainValue& x, const Context& ctx = default_context()) {
    return expand_1d(sin_stream(x, 1), ctx);
}
inline ExpansionOutcome pow_u(const UncertainValue& x, double c, const Context& ctx = default_context()) {
    return expand_1d(pow_stream(x, c), ctx);
}
inline ExpansionOutcome polynomial_u(std::span<const double> coeffs, const UncertainValue& x,
                                     const Context& ctx = default_context()) {
    return expand_1d(polynomial_stream(coeffs, x, ctx), ctx);
}

// a / b as a times b^-1; throws ExpansionError when b is too coarse.
inline UncertainValue div(const UncertainValue& a, const UncertainValue& b, const Context& ctx = default_context()) {
    if (b.value() == 0.0) throw Error(Errc::DomainError, "division by zero");
    return mul(a, pow_u(b, -1.0, ctx).result(), ctx);
}

inline UncertainValue operator/(const UncertainValue& a, const UncertainValue& b) { return div(a, b); }

} // namespace varith
