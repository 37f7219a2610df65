#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <ostream>
#include <utility>
#include <vector>

#include "csv.hpp"
#include "error.hpp"
#include "stats.hpp"
#include "uncertain.hpp"

namespace varith {

struct UncertainComplex {
    UncertainValue re;
    UncertainValue im;
};

inline UncertainComplex cadd(const UncertainComplex& a, const UncertainComplex& b, const Context& ctx) {
    return {add(a.re, b.re, ctx), add(a.im, b.im, ctx)};
}

inline UncertainComplex csub(const UncertainComplex& a, const UncertainComplex& b, const Context& ctx) {
    return {sub(a.re, b.re, ctx), sub(a.im, b.im, ctx)};
}

inline UncertainComplex cmul(const UncertainComplex& a, const UncertainComplex& b, const Context& ctx) {
    return {sub(mul(a.re, b.re, ctx), mul(a.im, b.im, ctx), ctx), add(mul(a.re, b.im, ctx), mul(a.im, b.re, ctx), ctx)};
}

inline constexpr int kMaxFftOrder = 24;

// sin(2 pi j / N) for j in [0, N), N = 2^L.
class IndexedSineTable {
public:
    int order() const { return L_; }
    std::size_t size() const { return s_.size(); }
    double sin(std::size_t j) const { return s_[j & (s_.size() - 1)]; }
    double cos(std::size_t j) const {
        if (s_.size() == 2) return (j & 1) ? -1.0 : 1.0; // no quarter index when N = 2
        return sin(j + s_.size() / 4);
    }

    // Platform sine on the first octant only, everything else by symmetry.
    static IndexedSineTable indexed(int L) {
        IndexedSineTable t(L);
        const std::size_t N = t.s_.size();
        if (N >= 4) {
            const std::size_t q = N / 4, e = N / 8;
            std::vector<double> bs(e + 1), bc(e + 1);
            for (std::size_t j = 0; j <= e; ++j) {
                const double a = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(N);
                bs[j] = std::sin(a);
                bc[j] = std::cos(a);
            }
            bs[0] = 0.0;
            bc[0] = 1.0;
            if (e > 0) bc[e] = bs[e];
            for (std::size_t j = 0; j <= q; ++j) t.s_[j] = j <= e ? bs[j] : bc[q - j];
            for (std::size_t j = q + 1; j < 2 * q; ++j) t.s_[j] = t.s_[2 * q - j];
            t.s_[2 * q] = 0.0;
            for (std::size_t j = 2 * q + 1; j < N; ++j) t.s_[j] = -t.s_[j - 2 * q];
        }
        return t;
    }

    // Platform sine for every index; the comparison table.
    static IndexedSineTable library(int L) {
        IndexedSineTable t(L);
        const std::size_t N = t.s_.size();
        for (std::size_t j = 0; j < N; ++j)
            t.s_[j] = std::sin(2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(N));
        return t;
    }

private:
    explicit IndexedSineTable(int L) : L_(L) {
        if (L < 1 || L > kMaxFftOrder) throw Error(Errc::OrderOutOfRange, "FFT order must be in [1, 24]");
        s_.assign(std::size_t{1} << L, 0.0);
    }
    int L_;
    std::vector<double> s_;
};

inline IndexedSineTable build_indexed_sine(int L) { return IndexedSineTable::indexed(L); }
inline IndexedSineTable build_library_sine(int L) { return IndexedSineTable::library(L); }

enum class FftDirection { Forward, Reverse };

namespace detail {
inline std::size_t bit_reverse(std::size_t x, int bits) {
    std::size_t r = 0;
    for (int b = 0; b < bits; ++b, x >>= 1) r = (r << 1) | (x & 1);
    return r;
}
} // namespace detail

// Forward: H[n] = sum h[k] e^{+2 pi i nk/N}. Reverse uses e^{-...} and divides by N.
inline std::vector<UncertainComplex> fft(std::vector<UncertainComplex> x, FftDirection dir, const IndexedSineTable& sines,
                                         const Context& ctx = default_context()) {
    const std::size_t N = sines.size();
    const int L = sines.order();
    if (x.size() != N) throw Error(Errc::LengthMismatch, "signal length does not match the sine table");
    for (std::size_t i = 0; i < N; ++i) {
        const std::size_t r = detail::bit_reverse(i, L);
        if (r > i) std::swap(x[i], x[r]);
    }
    const double sign = dir == FftDirection::Forward ? 1.0 : -1.0;
    for (std::size_t m = 2; m <= N; m <<= 1) {
        const std::size_t half = m / 2, step = N / m;
        std::vector<UncertainComplex> w(half);
        for (std::size_t k = 0; k < half; ++k)
            w[k] = {from_float(sines.cos(k * step)), from_float(sign * sines.sin(k * step))};
        for (std::size_t s = 0; s < N; s += m)
            for (std::size_t k = 0; k < half; ++k) {
                const UncertainComplex t = cmul(w[k], x[s + k + half], ctx);
                const UncertainComplex u = x[s + k];
                x[s + k] = cadd(u, t, ctx);
                x[s + k + half] = csub(u, t, ctx);
            }
    }
    if (dir == FftDirection::Reverse) {
        const double inv = 1.0 / static_cast<double>(N);
        for (auto& c : x) c = {scale(c.re, inv), scale(c.im, inv)};
    }
    return x;
}

enum class SignalKind { Sin, Cos, Linear };

inline const char* signal_name(SignalKind k) {
    switch (k) {
    case SignalKind::Sin: return "sin";
    case SignalKind::Cos: return "cos";
    case SignalKind::Linear: return "linear";
    }
    return "?";
}

// Signal in the real parts. Noise, when given, goes on both parts so that
// every spectral component sees the same input variance.
inline std::vector<UncertainComplex> make_signal(SignalKind kind, int f, const IndexedSineTable& sines,
                                                 const std::optional<NoiseSpec>& noise = std::nullopt,
                                                 double kappa = 5.0) {
    const std::size_t N = sines.size();
    if (kind != SignalKind::Linear && (f < 1 || static_cast<std::size_t>(f) > N / 2 - 1))
        throw Error(Errc::FrequencyOutOfRange, "frequency must be in [1, N/2 - 1]");
    std::optional<NoiseStream> rng;
    double d2 = 0.0;
    if (noise) {
        rng.emplace(*noise, 0, kappa);
        d2 = noise->deviation * noise->deviation;
    }
    std::vector<UncertainComplex> h(N);
    for (std::size_t k = 0; k < N; ++k) {
        double v;
        switch (kind) {
        case SignalKind::Sin: v = sines.sin(static_cast<std::size_t>(f) * k); break;
        case SignalKind::Cos: v = sines.cos(static_cast<std::size_t>(f) * k); break;
        default: v = static_cast<double>(k); break;
        }
        UncertainValue re = kind == SignalKind::Linear ? UncertainValue::precise(v) : from_float(v);
        UncertainValue im = UncertainValue::precise(0.0);
        if (rng) {
            re = UncertainValue(re.value() + rng->next(), re.variance() + d2);
            im = UncertainValue(rng->next(), d2);
        }
        h[k] = {re, im};
    }
    return h;
}

// Exact spectrum of h[k] = k: H[0] = N(N-1)/2, H[n] = -N/2 (1 + i cot(n pi / N)).
// The cotangent comes from the order L+1 table, where n pi / N is index n.
inline std::vector<std::complex<double>> linear_spectrum_oracle(int L) {
    if (L < 1 || L >= kMaxFftOrder) throw Error(Errc::OrderOutOfRange, "FFT order must be in [1, 23]");
    const std::size_t N = std::size_t{1} << L;
    const IndexedSineTable fine = IndexedSineTable::indexed(L + 1);
    std::vector<std::complex<double>> H(N);
    const double n2 = static_cast<double>(N) / 2.0;
    H[0] = {n2 * static_cast<double>(N - 1), 0.0};
    for (std::size_t n = 1; n < N; ++n) H[n] = {-n2, -n2 * fine.cos(n) / fine.sin(n)};
    return H;
}

// bin,re,dre,im,dim
inline void write_spectrum_csv(std::ostream& os, const std::vector<UncertainComplex>& s) {
    csv::Writer w(os);
    w.header({"bin", "re", "dre", "im", "dim"});
    for (std::size_t i = 0; i < s.size(); ++i) w.row(i, s[i].re.value(), s[i].re.deviation(), s[i].im.value(), s[i].im.deviation());
}

} // namespace varith
