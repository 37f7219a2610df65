#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "error.hpp"
#include "moments.hpp"

namespace varith {

struct NoiseSpec {
    DistributionKind kind = DistributionKind::Gaussian;
    double deviation = 0.0;
    std::uint64_t seed = 1;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Zero-mean noise of the given deviation, bounded to kappa deviations.
// Independent streams of one seed are selected by `stream`.
class NoiseStream {
public:
    explicit NoiseStream(const NoiseSpec& spec, std::uint64_t stream = 0, double kappa = 5.0)
        : spec_(spec), kappa_(kappa), eng_(splitmix64(spec.seed ^ splitmix64(stream + 0x5851f42d4c957f2dULL))) {
        if (!std::isfinite(spec.deviation) || spec.deviation < 0.0)
            throw Error(Errc::DomainError, "noise deviation must be finite and non-negative");
        if (!(kappa > 0.0)) throw Error(Errc::NonPositiveKappa, "kappa must be positive");
    }

    double next() {
        if (spec_.deviation == 0.0) return 0.0;
        if (spec_.kind == DistributionKind::Uniform) {
            std::uniform_real_distribution<double> u(-std::numbers::sqrt3, std::numbers::sqrt3);
            return spec_.deviation * u(eng_);
        }
        std::normal_distribution<double> g;
        double z;
        do z = g(eng_);
        while (std::abs(z) > kappa_);
        return spec_.deviation * z;
    }

    double uniform01() { return std::uniform_real_distribution<double>(0.0, 1.0)(eng_); }
    std::mt19937_64& engine() { return eng_; }

private:
    NoiseSpec spec_;
    double kappa_;
    std::mt19937_64 eng_;
};

enum class Coverage { Ideal, Proper, None };

inline const char* coverage_name(Coverage c) {
    switch (c) {
    case Coverage::Ideal: return "ideal";
    case Coverage::Proper: return "proper";
    case Coverage::None: return "none";
    }
    return "?";
}

struct CoverageBounds {
    double idealLow = 0.9, idealHigh = 1.1;
    double properLow = 0.1, properHigh = 10.0;
};

inline Coverage classify(double errorDeviation, const CoverageBounds& b = {}) {
    if (errorDeviation >= b.idealLow && errorDeviation <= b.idealHigh) return Coverage::Ideal;
    if (errorDeviation >= b.properLow && errorDeviation <= b.properHigh) return Coverage::Proper;
    return Coverage::None;
}

inline constexpr double kHistogramLimit = 8.0;
inline constexpr double kHistogramWidth = 0.25;
inline constexpr std::size_t kHistogramBins = 64; // plus one overflow bin on each side

struct StatSummary {
    // root mean square of the normalized errors
    double errorDeviation = 0.0;
    double errorMean = 0.0;
    // root mean square of the raw value errors
    double valueDeviation = 0.0;
    double uncertaintyMean = 0.0;
    double uncertaintyDeviation = 0.0;
    // [0] below -8, [1..64] the bins, [65] at or above 8
    std::array<std::size_t, kHistogramBins + 2> histogram{};
    std::size_t sampleCount = 0;
    // entries with zero uncertainty are kept out of the normalized statistics
    std::size_t zeroUncertaintyCount = 0;
    double zeroUncertaintyMaxError = 0.0;
    Coverage coverage = Coverage::None;

    // every normalized error is zero: the Delta-distribution case
    bool isDelta() const { return sampleCount > 0 && errorDeviation == 0.0; }
};

inline StatSummary error_stats(std::span<const double> valueErrors, std::span<const double> uncertainties,
                               const CoverageBounds& bounds = {}) {
    if (valueErrors.size() != uncertainties.size()) throw Error(Errc::LengthMismatch, "error_stats lengths differ");
    StatSummary s;
    double sumZ = 0.0, sumZ2 = 0.0, sumU = 0.0, sumU2 = 0.0, sumE2 = 0.0;
    for (std::size_t i = 0; i < valueErrors.size(); ++i) {
        const double e = valueErrors[i], u = uncertainties[i];
        if (u < 0.0 || !std::isfinite(u) || !std::isfinite(e))
            throw Error(Errc::DomainError, "error_stats needs finite errors and non-negative uncertainties");
        if (u == 0.0) {
            ++s.zeroUncertaintyCount;
            s.zeroUncertaintyMaxError = std::max(s.zeroUncertaintyMaxError, std::abs(e));
            continue;
        }
        const double z = e / u;
        ++s.sampleCount;
        sumZ += z;
        sumZ2 += z * z;
        sumU += u;
        sumU2 += u * u;
        sumE2 += e * e;
        std::size_t bin;
        if (z < -kHistogramLimit) bin = 0;
        else if (z >= kHistogramLimit) bin = kHistogramBins + 1;
        else bin = 1 + std::min(kHistogramBins - 1, static_cast<std::size_t>((z + kHistogramLimit) / kHistogramWidth));
        ++s.histogram[bin];
    }
    if (s.sampleCount > 0) {
        const double n = static_cast<double>(s.sampleCount);
        s.errorMean = sumZ / n;
        s.errorDeviation = std::sqrt(sumZ2 / n);
        s.valueDeviation = std::sqrt(sumE2 / n);
        s.uncertaintyMean = sumU / n;
        s.uncertaintyDeviation = std::sqrt(std::max(0.0, sumU2 / n - s.uncertaintyMean * s.uncertaintyMean));
    }
    s.coverage = s.sampleCount > 0 ? classify(s.errorDeviation, bounds) : Coverage::None;
    return s;
}

} // namespace varith
