#pragma once

#include <cmath>
#include <istream>
#include <ostream>
#include <vector>

#include "csv.hpp"
#include "error.hpp"
#include "uncertain.hpp"

namespace varith {

// Least-squares line over the window Y[c-H .. c+H] with abscissas -H..H.
struct WindowFit {
    long long index = 0; // window center
    UncertainValue alphaRaw; // sum Y
    UncertainValue betaRaw;  // sum X Y
    UncertainValue alpha;    // intercept at the center
    UncertainValue beta;     // slope
};

inline double alpha_scale(int H) { return 2.0 * H + 1.0; }
inline double beta_scale(int H) { return static_cast<double>(H) * (H + 1.0) * (2.0 * H + 1.0) / 3.0; }

namespace detail {
inline void descale(WindowFit& f, int H) {
    const double a = alpha_scale(H), b = beta_scale(H);
    f.alpha = UncertainValue(f.alphaRaw.value() / a, f.alphaRaw.variance() / (a * a));
    f.beta = UncertainValue(f.betaRaw.value() / b, f.betaRaw.variance() / (b * b));
}
} // namespace detail

// Values move progressively from window to window; variances are summed over
// each window afresh because every input is reused by 2H+1 windows and the
// progressive form would count it as independent each time.
inline std::vector<WindowFit> moving_fit(const std::vector<UncertainValue>& y, int H) {
    if (H < 1) throw Error(Errc::DomainError, "H must be positive");
    const std::size_t w = 2 * static_cast<std::size_t>(H) + 1;
    if (y.size() < w) throw Error(Errc::SeriesTooShort, "series shorter than 2H+1");
    std::vector<WindowFit> out;
    out.reserve(y.size() - w + 1);
    double alpha = 0.0, beta = 0.0;
    for (int k = -H; k <= H; ++k) {
        alpha += y[H + k].value();
        beta += k * y[H + k].value();
    }
    for (std::size_t c = H; c + H < y.size(); ++c) {
        if (c > static_cast<std::size_t>(H)) {
            const double old = y[c - H - 1].value(), add = y[c + H].value();
            beta = beta - alpha + (H + 1.0) * old + H * add;
            alpha = alpha - old + add;
        }
        double va = 0.0, vb = 0.0;
        for (int k = -H; k <= H; ++k) {
            const double v = y[c + k].variance();
            va += v;
            vb += static_cast<double>(k) * k * v;
        }
        WindowFit f;
        f.index = static_cast<long long>(c);
        f.alphaRaw = detail::checked(alpha, va);
        f.betaRaw = detail::checked(beta, vb);
        detail::descale(f, H);
        out.push_back(f);
    }
    return out;
}

// Direct window sums, no recurrence; the reference for the progressive values.
inline std::vector<WindowFit> direct_fit(const std::vector<UncertainValue>& y, int H) {
    const std::size_t w = 2 * static_cast<std::size_t>(H) + 1;
    if (H < 1) throw Error(Errc::DomainError, "H must be positive");
    if (y.size() < w) throw Error(Errc::SeriesTooShort, "series shorter than 2H+1");
    std::vector<WindowFit> out;
    for (std::size_t c = H; c + H < y.size(); ++c) {
        double a = 0.0, b = 0.0, va = 0.0, vb = 0.0;
        for (int k = -H; k <= H; ++k) {
            a += y[c + k].value();
            b += k * y[c + k].value();
            va += y[c + k].variance();
            vb += static_cast<double>(k) * k * y[c + k].variance();
        }
        WindowFit f;
        f.index = static_cast<long long>(c);
        f.alphaRaw = UncertainValue(a, va);
        f.betaRaw = UncertainValue(b, vb);
        detail::descale(f, H);
        out.push_back(f);
    }
    return out;
}

// The recurrences evaluated in variance arithmetic as if every operand were
// independent. Shows how reusing inputs inflates the variance.
inline std::vector<WindowFit> moving_fit_naive(const std::vector<UncertainValue>& y, int H,
                                               const Context& ctx = default_context()) {
    const std::size_t w = 2 * static_cast<std::size_t>(H) + 1;
    if (H < 1) throw Error(Errc::DomainError, "H must be positive");
    if (y.size() < w) throw Error(Errc::SeriesTooShort, "series shorter than 2H+1");
    std::vector<WindowFit> out;
    UncertainValue alpha = UncertainValue::precise(0.0), beta = UncertainValue::precise(0.0);
    for (int k = -H; k <= H; ++k) {
        alpha = add(alpha, y[H + k], ctx);
        beta = add(beta, scale(y[H + k], k), ctx);
    }
    for (std::size_t c = H; c + H < y.size(); ++c) {
        if (c > static_cast<std::size_t>(H)) {
            const UncertainValue& old = y[c - H - 1];
            const UncertainValue& nw = y[c + H];
            beta = add(add(sub(beta, alpha, ctx), scale(old, H + 1.0), ctx), scale(nw, H), ctx);
            alpha = add(sub(alpha, old, ctx), nw, ctx);
        }
        WindowFit f;
        f.index = static_cast<long long>(c);
        f.alphaRaw = alpha;
        f.betaRaw = beta;
        detail::descale(f, H);
        out.push_back(f);
    }
    return out;
}

// index,y,dy
inline std::vector<UncertainValue> read_series_csv(std::istream& is) {
    std::vector<UncertainValue> y;
    for (const auto& r : csv::read(is, {"index", "y", "dy"}))
        y.push_back(UncertainValue::withDeviation(csv::to_double(r[1]), csv::to_double(r[2])));
    return y;
}

inline void write_series_csv(std::ostream& os, const std::vector<UncertainValue>& y) {
    csv::Writer w(os);
    w.header({"index", "y", "dy"});
    for (std::size_t i = 0; i < y.size(); ++i) w.row(i, y[i].value(), y[i].deviation());
}

// index,alpha,dalpha,beta,dbeta
inline void write_fits_csv(std::ostream& os, const std::vector<WindowFit>& fits) {
    csv::Writer w(os);
    w.header({"index", "alpha", "dalpha", "beta", "dbeta"});
    for (const auto& f : fits)
        w.row(f.index, f.alpha.value(), f.alpha.deviation(), f.beta.value(), f.beta.deviation());
}

} // namespace varith
