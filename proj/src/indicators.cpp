#include "ffdlab/indicators.hpp"

#include "ffdlab/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ffdlab::indicators {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_period(int n) {
    if (n < 1) throw Error(ErrorCode::InvalidArgument, "indicator period must be >= 1");
}

void require_same(std::size_t a, std::size_t b) {
    if (a != b) throw Error(ErrorCode::LengthMismatch, "indicator inputs differ in length");
}

std::size_t first_finite(std::span<const double> x) {
    std::size_t i = 0;
    while (i < x.size() && std::isnan(x[i])) ++i;
    return i;
}

}  // namespace

std::vector<double> sma(std::span<const double> x, int n) {
    require_period(n);
    std::vector<double> out(x.size(), kNaN);
    const auto w = static_cast<std::size_t>(n);
    const std::size_t start = first_finite(x);
    for (std::size_t t = start + w - 1; t < x.size(); ++t) {
        double s = 0.0;
        for (std::size_t k = t + 1 - w; k <= t; ++k) s += x[k];
        out[t] = s / static_cast<double>(n);
    }
    return out;
}

std::vector<double> ema(std::span<const double> x, int n) {
    require_period(n);
    std::vector<double> out(x.size(), kNaN);
    const auto w = static_cast<std::size_t>(n);
    const std::size_t start = first_finite(x);
    if (start + w > x.size()) return out;
    double seed = 0.0;
    for (std::size_t k = start; k < start + w; ++k) seed += x[k];
    double e = seed / static_cast<double>(n);
    out[start + w - 1] = e;
    const double alpha = 2.0 / (static_cast<double>(n) + 1.0);
    for (std::size_t t = start + w; t < x.size(); ++t) {
        e = alpha * x[t] + (1.0 - alpha) * e;
        out[t] = e;
    }
    return out;
}

Macd macd(std::span<const double> close, int fast, int slow, int signal) {
    const auto ef = ema(close, fast);
    const auto es = ema(close, slow);
    Macd m;
    m.line.assign(close.size(), kNaN);
    for (std::size_t t = 0; t < close.size(); ++t) {
        if (!std::isnan(ef[t]) && !std::isnan(es[t])) m.line[t] = ef[t] - es[t];
    }
    m.signal = ema(m.line, signal);
    m.histogram.assign(close.size(), kNaN);
    for (std::size_t t = 0; t < close.size(); ++t) {
        if (!std::isnan(m.signal[t])) m.histogram[t] = m.line[t] - m.signal[t];
    }
    return m;
}

std::vector<double> rsi(std::span<const double> close, int n) {
    require_period(n);
    std::vector<double> out(close.size(), kNaN);
    const auto w = static_cast<std::size_t>(n);
    if (close.size() <= w) return out;
    double gain = 0.0, loss = 0.0;
    for (std::size_t t = 1; t <= w; ++t) {
        const double d = close[t] - close[t - 1];
        gain += std::max(d, 0.0);
        loss += std::max(-d, 0.0);
    }
    gain /= static_cast<double>(n);
    loss /= static_cast<double>(n);
    auto value = [](double g, double l) {
        if (g + l == 0.0) return 50.0;
        if (l == 0.0) return 100.0;
        return 100.0 - 100.0 / (1.0 + g / l);
    };
    out[w] = value(gain, loss);
    for (std::size_t t = w + 1; t < close.size(); ++t) {
        const double d = close[t] - close[t - 1];
        gain = (gain * (n - 1) + std::max(d, 0.0)) / n;
        loss = (loss * (n - 1) + std::max(-d, 0.0)) / n;
        out[t] = value(gain, loss);
    }
    return out;
}

Stochastic stochastic(std::span<const double> high, std::span<const double> low, std::span<const double> close,
                      int k_period, int d_period) {
    require_period(k_period);
    require_same(high.size(), close.size());
    require_same(low.size(), close.size());
    Stochastic s;
    s.k.assign(close.size(), kNaN);
    const auto w = static_cast<std::size_t>(k_period);
    for (std::size_t t = w - 1; t < close.size(); ++t) {
        double hh = high[t], ll = low[t];
        for (std::size_t k = t + 1 - w; k <= t; ++k) {
            hh = std::max(hh, high[k]);
            ll = std::min(ll, low[k]);
        }
        s.k[t] = hh > ll ? 100.0 * (close[t] - ll) / (hh - ll) : 50.0;
    }
    s.d = sma(s.k, d_period);
    return s;
}

Bollinger bollinger(std::span<const double> close, int n, double width) {
    require_period(n);
    Bollinger b;
    b.upper.assign(close.size(), kNaN);
    b.middle.assign(close.size(), kNaN);
    b.lower.assign(close.size(), kNaN);
    const auto w = static_cast<std::size_t>(n);
    for (std::size_t t = w - 1; t < close.size(); ++t) {
        const auto window = close.subspan(t + 1 - w, w);
        const auto [lo, hi] = std::minmax_element(window.begin(), window.end());
        if (*lo == *hi) {
            b.upper[t] = b.middle[t] = b.lower[t] = *lo;
            continue;
        }
        double m = 0.0;
        for (double v : window) m += v;
        m /= static_cast<double>(n);
        double ss = 0.0;
        for (double v : window) ss += (v - m) * (v - m);
        const double sd = std::sqrt(ss / static_cast<double>(n));
        b.middle[t] = m;
        b.upper[t] = m + width * sd;
        b.lower[t] = m - width * sd;
    }
    return b;
}

std::vector<double> atr(std::span<const double> high, std::span<const double> low, std::span<const double> close,
                        int n) {
    require_period(n);
    require_same(high.size(), close.size());
    require_same(low.size(), close.size());
    std::vector<double> out(close.size(), kNaN);
    const auto w = static_cast<std::size_t>(n);
    if (close.size() <= w) return out;
    auto tr = [&](std::size_t t) {
        return std::max({high[t] - low[t], std::abs(high[t] - close[t - 1]), std::abs(low[t] - close[t - 1])});
    };
    double a = 0.0;
    for (std::size_t t = 1; t <= w; ++t) a += tr(t);
    a /= static_cast<double>(n);
    out[w] = a;
    for (std::size_t t = w + 1; t < close.size(); ++t) {
        a = (a * (n - 1) + tr(t)) / n;
        out[t] = a;
    }
    return out;
}

std::vector<double> roc(std::span<const double> close, int n) {
    require_period(n);
    std::vector<double> out(close.size(), kNaN);
    for (std::size_t t = static_cast<std::size_t>(n); t < close.size(); ++t) {
        out[t] = 100.0 * (close[t] / close[t - static_cast<std::size_t>(n)] - 1.0);
    }
    return out;
}

std::vector<double> obv(std::span<const double> close, std::span<const double> volume) {
    require_same(close.size(), volume.size());
    std::vector<double> out(close.size(), kNaN);
    if (close.empty()) return out;
    double acc = 0.0;
    out[0] = 0.0;
    for (std::size_t t = 1; t < close.size(); ++t) {
        if (close[t] > close[t - 1]) acc += volume[t];
        else if (close[t] < close[t - 1]) acc -= volume[t];
        out[t] = acc;
    }
    return out;
}

std::vector<double> cci(std::span<const double> high, std::span<const double> low, std::span<const double> close,
                        int n) {
    require_period(n);
    require_same(high.size(), close.size());
    require_same(low.size(), close.size());
    std::vector<double> tp(close.size());
    for (std::size_t t = 0; t < close.size(); ++t) tp[t] = (high[t] + low[t] + close[t]) / 3.0;
    std::vector<double> out(close.size(), kNaN);
    const auto w = static_cast<std::size_t>(n);
    for (std::size_t t = w - 1; t < close.size(); ++t) {
        double m = 0.0;
        for (std::size_t k = t + 1 - w; k <= t; ++k) m += tp[k];
        m /= static_cast<double>(n);
        double md = 0.0;
        for (std::size_t k = t + 1 - w; k <= t; ++k) md += std::abs(tp[k] - m);
        md /= static_cast<double>(n);
        out[t] = md > 0.0 ? (tp[t] - m) / (0.015 * md) : 0.0;
    }
    return out;
}

std::vector<double> williams_r(std::span<const double> high, std::span<const double> low,
                               std::span<const double> close, int n) {
    require_period(n);
    require_same(high.size(), close.size());
    require_same(low.size(), close.size());
    std::vector<double> out(close.size(), kNaN);
    const auto w = static_cast<std::size_t>(n);
    for (std::size_t t = w - 1; t < close.size(); ++t) {
        double hh = high[t], ll = low[t];
        for (std::size_t k = t + 1 - w; k <= t; ++k) {
            hh = std::max(hh, high[k]);
            ll = std::min(ll, low[k]);
        }
        out[t] = hh > ll ? -100.0 * (hh - close[t]) / (hh - ll) : -50.0;
    }
    return out;
}

}  // namespace ffdlab::indicators
