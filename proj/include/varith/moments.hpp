#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <numbers>
#include <vector>

#include "error.hpp"

namespace varith {

enum class DistributionKind { Gaussian, Uniform };

inline const char* kind_name(DistributionKind k) {
    return k == DistributionKind::Gaussian ? "Gaussian" : "Uniform";
}

inline double normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

// Two-sided Gaussian tail mass outside +-kappa.
inline double bounding_leakage(double kappa) {
    if (!(kappa > 0.0)) throw Error(Errc::NonPositiveKappa, "bounding_leakage");
    return std::erfc(kappa / std::numbers::sqrt2);
}

inline constexpr double kStableLeakage = 5.733031437583878e-07; // bounding_leakage(5)

// Bounded even moments zeta(2n, kappa), normalized so zeta(0) == 1.
//
// Besides the plain moments the table keeps zeta(2n)/kappa^(2n). The expansion
// engine works with those so that the series terms never overflow or underflow
// before the moments themselves do.
class MomentTable {
public:
    DistributionKind kind() const { return kind_; }
    double kappa() const { return kappa_; }
    int maxUsableOrder() const { return 2 * (static_cast<int>(even_.size()) - 1); }

    // zeta(2n) for n = 0..maxUsableOrder/2
    const std::vector<double>& evenMoments() const { return even_; }
    const std::vector<double>& scaledEvenMoments() const { return scaled_; }

    double zeta(int n) const {
        if (n < 0 || n > maxUsableOrder()) throw Error(Errc::OrderExceeded, "moment order");
        return (n & 1) ? 0.0 : even_[n / 2];
    }
    double scaledZeta(int n) const {
        if (n < 0 || n > maxUsableOrder()) throw Error(Errc::OrderExceeded, "moment order");
        return (n & 1) ? 0.0 : scaled_[n / 2];
    }
    // unchecked, for the inner loops
    double scaledZetaFast(int n) const { return (n & 1) ? 0.0 : scaled_[n >> 1]; }

private:
    friend MomentTable build_moment_table(DistributionKind, double, int);
    DistributionKind kind_ = DistributionKind::Gaussian;
    double kappa_ = 5.0;
    std::vector<double> even_;
    std::vector<double> scaled_;
};

namespace detail {

// log of sum_{j>=1} kappa^(2j-1) (2n-1)!!/(2n-1+2j)!!, all terms positive
inline double log_gauss_tail_sum(int n, double kappa) {
    const double k2 = kappa * kappa;
    double term = kappa / (2.0 * n + 1.0);
    double sum = 0.0;
    double logScale = 0.0;
    for (int j = 1; j < 1000000; ++j) {
        sum += term;
        term *= k2 / (2.0 * n + 2.0 * j + 1.0);
        if (sum > 1e250) {
            sum *= 1e-250;
            term *= 1e-250;
            logScale += 250.0 * std::log(10.0);
        }
        if (term < sum * 1e-18 && 2.0 * n + 2.0 * j + 1.0 > k2) break;
    }
    return std::log(sum) + logScale;
}

} // namespace detail

// Generation walks n upward and stops at the first moment that is not finite
// or not positive; requestedMaxN only caps the walk.
inline MomentTable build_moment_table(DistributionKind kind, double kappa, int requestedMaxN = 4096) {
    if (!(kappa > 0.0) || !std::isfinite(kappa)) throw Error(Errc::NonPositiveKappa, "kappa must be positive");
    MomentTable t;
    t.kind_ = kind;
    t.kappa_ = kappa;
    t.even_.push_back(1.0);
    t.scaled_.push_back(1.0);
    if (kind == DistributionKind::Uniform) {
        if (std::abs(kappa - std::numbers::sqrt3) > 1e-12 * std::numbers::sqrt3)
            throw Error(Errc::UniformKappaMismatch, "uniform bounding requires kappa = sqrt(3)");
        double p = 1.0;
        for (int n = 1; n <= requestedMaxN; ++n) {
            p *= 3.0;
            const double z = p / (2.0 * n + 1.0);
            if (!std::isfinite(z) || !(z > 0.0)) break;
            t.even_.push_back(z);
            t.scaled_.push_back(1.0 / (2.0 * n + 1.0));
        }
        return t;
    }

    const double mass = std::erf(kappa / std::numbers::sqrt2);
    const double log2N = std::log(2.0) - 0.5 * kappa * kappa - 0.5 * std::log(2.0 * std::numbers::pi);
    const double logK = std::log(kappa);
    for (int n = 1; n <= requestedMaxN; ++n) {
        const double logScaled = log2N + detail::log_gauss_tail_sum(n, kappa) - std::log(mass);
        const double scaled = std::exp(logScaled);
        const double z = std::exp(logScaled + 2.0 * n * logK);
        if (!std::isfinite(z) || !(z > 0.0) || !(scaled > 0.0)) break;
        t.even_.push_back(z);
        t.scaled_.push_back(scaled);
    }
    return t;
}

inline double zeta(const MomentTable& table, int n) { return table.zeta(n); }

// Correlation left between two signals once their precision is P.
inline double precision_correlation(double gamma, double p) {
    if (!(gamma > 0.0 && gamma < 1.0) || !(p > 0.0 && p < 1.0))
        throw Error(Errc::DomainError, "precision_correlation needs 0 < gamma, P < 1");
    return 1.0 / (1.0 + (1.0 / gamma - 1.0) / (p * p));
}

// Shared Gaussian kappa = 5 table.
inline std::shared_ptr<const MomentTable> default_moment_table() {
    static const auto table =
        std::make_shared<const MomentTable>(build_moment_table(DistributionKind::Gaussian, 5.0));
    return table;
}

} // namespace varith
