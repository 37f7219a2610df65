#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include <boost/math/special_functions/erf.hpp>

#include "error.hpp"
#include "matrix.hpp"
#include "moments.hpp"
#include "stats.hpp"
#include "taylor.hpp"
#include "uncertain.hpp"

namespace varith {

// ---- library function coverage ----

enum class FunctionKind { Exp, Log, Sin, Pow };

inline const char* function_name(FunctionKind f) {
    switch (f) {
    case FunctionKind::Exp: return "exp";
    case FunctionKind::Log: return "log";
    case FunctionKind::Sin: return "sin";
    case FunctionKind::Pow: return "pow";
    }
    return "?";
}

inline double apply_library(FunctionKind f, double x, double c) {
    switch (f) {
    case FunctionKind::Exp: return std::exp(x);
    case FunctionKind::Log: return std::log(x);
    case FunctionKind::Sin: return std::sin(x);
    case FunctionKind::Pow: return std::pow(x, c);
    }
    return 0.0;
}

inline ExpansionOutcome apply_engine(FunctionKind f, const UncertainValue& x, double c, const Context& ctx) {
    switch (f) {
    case FunctionKind::Exp: return exp_u(x, ctx);
    case FunctionKind::Log: return log_u(x, ctx);
    case FunctionKind::Sin: return sin_u(x, ctx);
    case FunctionKind::Pow: return pow_u(x, c, ctx);
    }
    return {};
}

struct CoverageResult {
    UncertainValue engine;
    StatSummary summary;
};

// Sample x + noise, evaluate the library function, and normalize f(x~) - f(x)
// by the engine's uncertainty. Throws ExpansionError when the engine rejects.
inline CoverageResult function_coverage(FunctionKind f, double x, double delta, const NoiseSpec& noise,
                                        std::size_t samples, double c = 1.0, const Context& ctx = default_context()) {
    const UncertainValue in = UncertainValue::withDeviation(x, delta);
    const UncertainValue out = apply_engine(f, in, c, ctx).result();
    NoiseSpec ns = noise;
    ns.deviation = delta;
    NoiseStream rng(ns, 0, ctx.kappa());
    const double center = apply_library(f, x, c);
    std::vector<double> err(samples), unc(samples, out.deviation());
    for (auto& e : err) e = apply_library(f, x + rng.next(), c) - center;
    return {out, error_stats(err, unc)};
}

// ---- bounding range measurement ----

struct BoundingMeasurement {
    double measuredKappa = 0.0;
    double measuredLeakage = 0.0;
};

// Leakage of the true distribution outside mean +- kappaS * deviation of N
// samples, averaged over trials. Gaussian: N(0, 1); uniform: on +-sqrt(3).
inline BoundingMeasurement measure_bounding(std::size_t N, double kappaS, DistributionKind kind, std::size_t trials,
                                            std::uint64_t seed = 1) {
    if (N < 2) throw Error(Errc::DomainError, "need at least two samples");
    if (!(kappaS > 0.0)) throw Error(Errc::NonPositiveKappa, "measuring range must be positive");
    const double r3 = std::numbers::sqrt3;
    double total = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
        NoiseStream rng({kind, 1.0, seed}, t, 1e300);
        double s = 0.0, s2 = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double v = rng.next();
            s += v;
            s2 += v * v;
        }
        const double n = static_cast<double>(N);
        const double mean = s / n;
        const double dev = std::sqrt(std::max(0.0, (s2 - n * mean * mean) / (n - 1.0)));
        const double lo = mean - kappaS * dev, hi = mean + kappaS * dev;
        double leak;
        if (kind == DistributionKind::Gaussian) {
            leak = 0.5 * std::erfc(-lo / std::numbers::sqrt2) + 0.5 * std::erfc(hi / std::numbers::sqrt2);
        } else {
            const double overlap = std::max(0.0, std::min(hi, r3) - std::max(lo, -r3));
            leak = 1.0 - overlap / (2.0 * r3);
        }
        total += leak;
    }
    BoundingMeasurement m;
    m.measuredLeakage = total / static_cast<double>(trials);
    if (kind == DistributionKind::Gaussian)
        m.measuredKappa = m.measuredLeakage > 0.0 ? std::numbers::sqrt2 * boost::math::erfc_inv(m.measuredLeakage)
                                                  : std::numeric_limits<double>::infinity();
    else
        m.measuredKappa = r3 * (1.0 - m.measuredLeakage);
    return m;
}

// ---- special determinant with shared variables ----

namespace detail {

// Polynomial in three perturbations (a, b, c), keyed by exponents.
using Poly3 = std::map<std::array<int, 3>, double>;

inline Poly3 poly_mul(const Poly3& p, const Poly3& q) {
    Poly3 r;
    for (const auto& [ea, ca] : p)
        for (const auto& [eb, cb] : q) r[{ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]}] += ca * cb;
    return r;
}

inline Poly3 poly_add(Poly3 p, const Poly3& q, double s = 1.0) {
    for (const auto& [e, c] : q) p[e] += s * c;
    return p;
}

inline double poly_expect(const Poly3& p, const std::array<double, 3>& d, const MomentTable& t) {
    double s = 0.0;
    for (const auto& [e, c] : p) {
        double m = c;
        for (int k = 0; k < 3; ++k) m *= e[k] == 0 ? 1.0 : (e[k] & 1 ? 0.0 : t.zeta(e[k]) * std::pow(d[k], e[k]));
        s += m;
    }
    return s;
}

// 3xyz - x^3 - y^3 - z^3 at (x+a, y+b, z+c)
inline Poly3 special_det_poly(double x, double y, double z) {
    const Poly3 X{{{0, 0, 0}, x}, {{1, 0, 0}, 1.0}};
    const Poly3 Y{{{0, 0, 0}, y}, {{0, 1, 0}, 1.0}};
    const Poly3 Z{{{0, 0, 0}, z}, {{0, 0, 1}, 1.0}};
    Poly3 f = poly_mul(poly_mul(X, Y), Z);
    for (auto& [e, c] : f) c *= 3.0;
    f = poly_add(f, poly_mul(poly_mul(X, X), X), -1.0);
    f = poly_add(f, poly_mul(poly_mul(Y, Y), Y), -1.0);
    f = poly_add(f, poly_mul(poly_mul(Z, Z), Z), -1.0);
    return f;
}

} // namespace detail

inline double special_det(double x, double y, double z) { return 3.0 * x * y * z - x * x * x - y * y * y - z * z * z; }

// The matrix whose determinant is special_det; each variable appears three times.
inline UncertainMatrix special_matrix(const UncertainValue& x, const UncertainValue& y, const UncertainValue& z) {
    UncertainMatrix m(3);
    m(0, 0) = x, m(0, 1) = y, m(0, 2) = z;
    m(1, 0) = y, m(1, 1) = z, m(1, 2) = x;
    m(2, 0) = z, m(2, 1) = x, m(2, 2) = y;
    return m;
}

struct SpecialDeterminantReport {
    double bias = 0.0;     // exact E[det] - det(x, y, z)
    double variance = 0.0; // exact, dependency traced
    double sampledBias = 0.0;
    double sampledVariance = 0.0;
    UncertainValue matrixResult; // the same determinant with the nine entries taken as independent
    StatSummary summary;   // sampled det minus exact mean, over the exact deviation
};

// Exact moments from the expanded polynomial with the context's bounded
// moments, against truncated-Gaussian sampling at the same kappa.
inline SpecialDeterminantReport special_determinant_check(double x, double y, double z, double dx, double dy, double dz,
                                                          std::size_t samples, std::uint64_t seed = 1,
                                                          const Context& ctx = default_context()) {
    const detail::Poly3 f = detail::special_det_poly(x, y, z);
    const std::array<double, 3> d{dx, dy, dz};
    const double mean = detail::poly_expect(f, d, *ctx.table);
    const double second = detail::poly_expect(detail::poly_mul(f, f), d, *ctx.table);
    SpecialDeterminantReport r;
    r.bias = mean - special_det(x, y, z);
    r.variance = std::max(0.0, second - mean * mean);
    r.matrixResult = determinant(special_matrix(UncertainValue::withDeviation(x, dx), UncertainValue::withDeviation(y, dy),
                                                UncertainValue::withDeviation(z, dz)),
                                 ctx);
    if (samples == 0) return r;
    NoiseStream nx({DistributionKind::Gaussian, dx, seed}, 0, ctx.kappa());
    NoiseStream ny({DistributionKind::Gaussian, dy, seed}, 1, ctx.kappa());
    NoiseStream nz({DistributionKind::Gaussian, dz, seed}, 2, ctx.kappa());
    std::vector<double> err(samples), unc(samples, std::sqrt(r.variance));
    double s = 0.0, s2 = 0.0;
    for (auto& e : err) {
        e = special_det(x + nx.next(), y + ny.next(), z + nz.next()) - mean;
        s += e;
        s2 += e * e;
    }
    const double n = static_cast<double>(samples);
    r.sampledBias = s / n + r.bias;
    r.sampledVariance = s2 / n - (s / n) * (s / n);
    r.summary = error_stats(err, unc);
    return r;
}

// ---- regressive sin/cos ----

struct SinCosEntry {
    UncertainValue sin;
    UncertainValue cos;
};

namespace detail {
// Every stored intermediate is a rounded double; add its rounding variance.
inline UncertainValue rounded(const UncertainValue& v) {
    return UncertainValue(v.value(), v.variance() + from_float(v.value()).variance());
}
} // namespace detail

struct SinCosReport {
    std::vector<SinCosEntry> table; // angle j pi / 2^(order+1), j = 0..2^order
    StatSummary identity;           // sin^2 + cos^2 - 1 over its uncertainty
    StatSummary librarySin;         // generated sin minus library sin, over the generated uncertainty
    double identityValueDeviation = 0.0;
    double libraryIdentityValueDeviation = 0.0;
};

// Half-angle recursion between neighbouring angles, from sin(0) = 0 and
// sin(pi/2) = 1 exactly.
inline SinCosReport sincos_recursion(int order, const Context& ctx = default_context()) {
    if (order < 1 || order > 18) throw Error(Errc::OrderOutOfRange, "recursion order must be in [1, 18]");
    const UncertainValue one = UncertainValue::precise(1.0);
    std::vector<SinCosEntry> t{{UncertainValue::precise(0.0), one}, {one, UncertainValue::precise(0.0)}};
    for (int k = 0; k < order; ++k) {
        std::vector<SinCosEntry> next;
        next.reserve(2 * t.size() - 1);
        for (std::size_t j = 0; j + 1 < t.size(); ++j) {
            const auto& a = t[j];
            const auto& b = t[j + 1];
            next.push_back(a);
            const UncertainValue cc = detail::rounded(mul(a.cos, b.cos, ctx));
            const UncertainValue ss = detail::rounded(mul(a.sin, b.sin, ctx));
            const UncertainValue cosSum = detail::rounded(sub(cc, ss, ctx));
            const UncertainValue sHalf = detail::rounded(scale(sub(one, cosSum, ctx), 0.5));
            const UncertainValue cHalf = detail::rounded(scale(add(one, cosSum, ctx), 0.5));
            next.push_back({detail::rounded(pow_u(sHalf, 0.5, ctx).result()), detail::rounded(pow_u(cHalf, 0.5, ctx).result())});
        }
        next.push_back(t.back());
        t = std::move(next);
    }
    SinCosReport r;
    std::vector<double> err, unc, lerr, lunc;
    double sumV = 0.0, sumL = 0.0;
    const double step = std::numbers::pi / std::ldexp(2.0, order);
    for (std::size_t j = 0; j < t.size(); ++j) {
        const UncertainValue id = sub(add(pow_u(t[j].sin, 2.0, ctx).result(), pow_u(t[j].cos, 2.0, ctx).result(), ctx), one, ctx);
        err.push_back(id.value());
        unc.push_back(id.deviation());
        sumV += id.value() * id.value();
        const double a = step * static_cast<double>(j);
        const double ls = std::sin(a), lc = std::cos(a);
        const double lid = ls * ls + lc * lc - 1.0;
        sumL += lid * lid;
        lerr.push_back(t[j].sin.value() - ls);
        lunc.push_back(t[j].sin.deviation());
    }
    r.table = std::move(t);
    r.identity = error_stats(err, unc);
    r.librarySin = error_stats(lerr, lunc);
    r.identityValueDeviation = std::sqrt(sumV / static_cast<double>(err.size()));
    r.libraryIdentityValueDeviation = std::sqrt(sumL / static_cast<double>(err.size()));
    return r;
}

// ---- geometric series ----

struct GeometricResidual {
    UncertainValue residual;
    int termsNeeded = 0; // smallest n with |x|^(n+1) / (1-x) below one LSV of 1/(1-x)
    double lsvOfLimit = 0.0;
};

inline constexpr int kGeometricDegree = 224;

// sum_{j<=maxDegree} x^j - 1/(1-x), both sides in variance arithmetic and
// each carrying the rounding of its stored result.
inline GeometricResidual geometric_series_residual(double x, int maxDegree = kGeometricDegree,
                                                   const Context& ctx = default_context()) {
    if (!(std::abs(x) < 1.0)) throw Error(Errc::DomainError, "|x| must be below 1");
    const UncertainValue X = from_float(x);
    const std::vector<double> ones(static_cast<std::size_t>(maxDegree) + 1, 1.0);
    const UncertainValue series = polynomial_u(ones, X, ctx).result();
    const UncertainValue oneMinus = sub(UncertainValue::precise(1.0), X, ctx);
    const UncertainValue limit = pow_u(oneMinus, -1.0, ctx).result();
    GeometricResidual r;
    r.residual = sub(detail::rounded(series), detail::rounded(limit), ctx);
    const double target = 1.0 / (1.0 - x);
    r.lsvOfLimit = lsv(target);
    if (x == 0.0) {
        r.termsNeeded = 0;
    } else {
        const double n = std::log(r.lsvOfLimit / target) / std::log(std::abs(x));
        r.termsNeeded = static_cast<int>(std::ceil(std::max(0.0, n - 1.0)));
    }
    return r;
}

// ---- identities ----

struct IdentityReport {
    std::string name;
    StatSummary summary;
    double meanAbsNormalizedError = 0.0;
    std::size_t rejected = 0;
};

namespace detail {
inline IdentityReport identity_report(std::string name, const std::vector<double>& err, const std::vector<double>& unc,
                                      std::size_t rejected) {
    IdentityReport r{std::move(name), error_stats(err, unc), 0.0, rejected};
    double s = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < err.size(); ++i)
        if (unc[i] > 0.0) {
            s += std::abs(err[i] / unc[i]);
            ++n;
        }
    r.meanAbsNormalizedError = n ? s / static_cast<double>(n) : 0.0;
    return r;
}
} // namespace detail

struct IdentityGrid {
    double xLow = 0.1, xHigh = 10.0, xStep = 0.1;
    double pLow = -3.0, pHigh = 3.0, pStep = 0.1;
    double logLow = -1.0, logHigh = 1.0, logStep = 0.01;
};

// (x^p)^(1/p) - x, log(e^x) - x and e^(log x) - x; the only error source is
// floating-point rounding, carried as from_float variance on each stored result.
inline std::vector<IdentityReport> function_identity_checks(const IdentityGrid& g = {},
                                                            const Context& ctx = default_context()) {
    std::vector<IdentityReport> out;
    auto grid = [](double lo, double hi, double step) {
        std::vector<double> v;
        const int n = static_cast<int>(std::floor((hi - lo) / step + 0.5));
        for (int i = 0; i <= n; ++i) v.push_back(lo + step * i);
        return v;
    };
    {
        std::vector<double> err, unc;
        std::size_t rejected = 0;
        for (double p : grid(g.pLow, g.pHigh, g.pStep)) {
            if (std::abs(p) < 1e-9) continue;
            for (double x : grid(g.xLow, g.xHigh, g.xStep)) {
                const UncertainValue X = from_float(x);
                const ExpansionOutcome y = pow_u(X, p, ctx);
                if (!y.accepted()) { ++rejected; continue; }
                const ExpansionOutcome z = pow_u(detail::rounded(y.result()), 1.0 / p, ctx);
                if (!z.accepted()) { ++rejected; continue; }
                const UncertainValue d = sub(detail::rounded(z.result()), X, ctx);
                err.push_back(d.value());
                unc.push_back(d.deviation());
            }
        }
        out.push_back(detail::identity_report("pow_inverse", err, unc, rejected));
    }
    {
        std::vector<double> err, unc;
        std::size_t rejected = 0;
        for (double x : grid(g.logLow, g.logHigh, g.logStep)) {
            const UncertainValue X = from_float(x);
            const ExpansionOutcome e = exp_u(X, ctx);
            if (!e.accepted()) { ++rejected; continue; }
            const ExpansionOutcome l = log_u(detail::rounded(e.result()), ctx);
            if (!l.accepted()) { ++rejected; continue; }
            const UncertainValue d = sub(detail::rounded(l.result()), X, ctx);
            err.push_back(d.value());
            unc.push_back(d.deviation());
        }
        out.push_back(detail::identity_report("log_exp", err, unc, rejected));
    }
    {
        std::vector<double> err, unc;
        std::size_t rejected = 0;
        for (double x : grid(g.xLow, g.xHigh, g.xStep)) {
            const UncertainValue X = from_float(x);
            const ExpansionOutcome l = log_u(X, ctx);
            if (!l.accepted()) { ++rejected; continue; }
            const ExpansionOutcome e = exp_u(detail::rounded(l.result()), ctx);
            if (!e.accepted()) { ++rejected; continue; }
            const UncertainValue d = sub(detail::rounded(e.result()), X, ctx);
            err.push_back(d.value());
            unc.push_back(d.deviation());
        }
        out.push_back(detail::identity_report("exp_log", err, unc, rejected));
    }
    return out;
}

} // namespace varith
