#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <memory>
#include <numbers>
#include <ostream>
#include <string>
#include <string_view>

#include "error.hpp"
#include "moments.hpp"

namespace varith {

// Settings shared by every operation of one run.
struct Context {
    std::shared_ptr<const MomentTable> table = default_moment_table();
    // zeta(2) taken as 1 in the binary operations; used for oracle comparisons
    bool idealVariance = false;
    // threshold of the stable rule, fixed to the kappa = 5 leakage unless overridden
    double stableLeakage = kStableLeakage;
    // 0 means the table's maxUsableOrder
    int maxExpansionOrder = 0;

    double kappa() const { return table->kappa(); }
    double zeta2() const { return idealVariance ? 1.0 : table->zeta(2); }
    int expansionOrder() const {
        const int m = table->maxUsableOrder();
        return maxExpansionOrder > 0 && maxExpansionOrder < m ? maxExpansionOrder : m;
    }
};

inline const Context& default_context() {
    static const Context ctx{};
    return ctx;
}

inline Context ideal_context() {
    Context c;
    c.idealVariance = true;
    return c;
}

class UncertainValue {
public:
    UncertainValue() = default;
    UncertainValue(double value, double variance) : value_(value), variance_(variance) {
        if (!std::isfinite(value) || !std::isfinite(variance))
            throw Error(Errc::NonFiniteInput, "value and variance must be finite");
        if (variance < 0.0) throw Error(Errc::DomainError, "negative variance");
    }
    static UncertainValue precise(double v) { return UncertainValue(v, 0.0); }
    static UncertainValue withDeviation(double v, double dev) { return UncertainValue(v, dev * dev); }

    double value() const { return value_; }
    double variance() const { return variance_; }
    double deviation() const { return std::sqrt(variance_); }
    double precision() const { return deviation() / std::abs(value_); }
    bool isPrecise() const { return variance_ == 0.0; }

    friend bool identical(const UncertainValue& a, const UncertainValue& b) {
        return a.value_ == b.value_ && a.variance_ == b.variance_;
    }

private:
    double value_ = 0.0;
    double variance_ = 0.0;
};

// Value of one unit in the last significand place of v.
inline double lsv(double v) {
    if (v == 0.0 || !std::isfinite(v)) return std::numeric_limits<double>::denorm_min();
    int e = 0;
    std::frexp(v, &e);
    return std::ldexp(1.0, std::max(e - 53, -1074));
}

inline constexpr std::uint64_t kLowSignificandMask = (std::uint64_t{1} << 20) - 1;

// A float whose last 20 significand bits are clear is taken as exact, anything
// else carries a uniform rounding error of one LSV.
inline UncertainValue from_float(double v) {
    if (!std::isfinite(v)) throw Error(Errc::NonFiniteInput, "from_float");
    const auto bits = std::bit_cast<std::uint64_t>(v);
    if ((bits & kLowSignificandMask) == 0) return UncertainValue(v, 0.0);
    const double d = lsv(v) / std::numbers::sqrt3;
    return UncertainValue(v, d * d);
}

inline UncertainValue from_int(std::int64_t i) {
    constexpr std::int64_t exactLimit = (std::int64_t{1} << 53) - 1;
    if (i <= exactLimit && i >= -exactLimit) return UncertainValue(static_cast<double>(i), 0.0);
    return from_float(static_cast<double>(i));
}

namespace detail {
inline UncertainValue checked(double v, double var) {
    if (!std::isfinite(v) || !std::isfinite(var)) throw Error(Errc::OverflowToNonFinite, "arithmetic overflow");
    return UncertainValue(v, var);
}
} // namespace detail

// The binary operations treat their operands as independent. x - x or x * x
// written this way are not x - x and x^2; route those through the expansions.
inline UncertainValue add(const UncertainValue& a, const UncertainValue& b, const Context& ctx = default_context()) {
    const double z2 = ctx.zeta2();
    return detail::checked(a.value() + b.value(), z2 * a.variance() + z2 * b.variance());
}

inline UncertainValue sub(const UncertainValue& a, const UncertainValue& b, const Context& ctx = default_context()) {
    const double z2 = ctx.zeta2();
    return detail::checked(a.value() - b.value(), z2 * a.variance() + z2 * b.variance());
}

inline UncertainValue negate(const UncertainValue& a) { return UncertainValue(-a.value(), a.variance()); }

inline UncertainValue mul(const UncertainValue& a, const UncertainValue& b, const Context& ctx = default_context()) {
    const double z2 = ctx.zeta2();
    const double av = a.value(), bv = b.value();
    const double var = z2 * a.variance() * bv * bv + av * av * z2 * b.variance() + z2 * z2 * a.variance() * b.variance();
    return detail::checked(av * bv, var);
}

// Multiplication by a precise constant: variance scales by exactly c^2.
inline UncertainValue scale(const UncertainValue& a, double c) {
    return detail::checked(a.value() * c, a.variance() * c * c);
}

inline UncertainValue operator+(const UncertainValue& a, const UncertainValue& b) { return add(a, b); }
inline UncertainValue operator-(const UncertainValue& a, const UncertainValue& b) { return sub(a, b); }
inline UncertainValue operator-(const UncertainValue& a) { return negate(a); }
inline UncertainValue operator*(const UncertainValue& a, const UncertainValue& b) { return mul(a, b); }

enum class Ordering { Less, Equal, Greater };

struct ComparisonResult {
    Ordering ordering = Ordering::Equal;
    double notEqualProbability = 0.0;
};

// 50% quantile of |z| for a standard normal
inline constexpr double kDefaultZThreshold = 0.67448975;

inline ComparisonResult compare(const UncertainValue& a, const UncertainValue& b,
                                double zThreshold = kDefaultZThreshold, const Context& ctx = default_context()) {
    const UncertainValue d = sub(a, b, ctx);
    if (d.value() == 0.0) return {Ordering::Equal, 0.0};
    const Ordering sign = d.value() < 0.0 ? Ordering::Less : Ordering::Greater;
    if (d.variance() == 0.0) return {sign, 1.0};
    const double z = d.value() / std::sqrt(d.variance());
    const double p = std::erf(std::abs(z) / std::numbers::sqrt2);
    return {std::abs(z) <= zThreshold ? Ordering::Equal : sign, p};
}

// "v±d" with six significant digits
inline std::string to_string(const UncertainValue& x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g±%.6g", x.value(), x.deviation());
    return buf;
}

inline std::ostream& operator<<(std::ostream& os, const UncertainValue& x) { return os << to_string(x); }

// Accepts "v±d", "v+-d" or a bare "v" (precise).
inline UncertainValue parse_uncertain(std::string_view text) {
    std::string s(text);
    std::size_t pos = s.find("±");
    std::size_t skip = 2;
    if (pos == std::string::npos) {
        pos = s.find("+-");
        skip = 2;
    }
    char* end = nullptr;
    const std::string head = s.substr(0, pos);
    const double v = std::strtod(head.c_str(), &end);
    if (end == head.c_str() || *end != '\0') throw Error(Errc::ParseError, "bad value '" + head + "'");
    double d = 0.0;
    if (pos != std::string::npos) {
        const std::string tail = s.substr(pos + skip);
        d = std::strtod(tail.c_str(), &end);
        if (end == tail.c_str() || *end != '\0' || d < 0.0) throw Error(Errc::ParseError, "bad deviation '" + tail + "'");
    }
    return UncertainValue::withDeviation(v, d);
}

// Exact round trip: value and variance as hex floats separated by one space.
inline std::string to_hex(const UncertainValue& x) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%a %a", x.value(), x.variance());
    return buf;
}

inline UncertainValue from_hex(std::string_view text) {
    std::string s(text);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str()) throw Error(Errc::ParseError, "bad hex value");
    char* end2 = nullptr;
    const double var = std::strtod(end, &end2);
    if (end2 == end) throw Error(Errc::ParseError, "bad hex variance");
    return UncertainValue(v, var);
}

} // namespace varith
