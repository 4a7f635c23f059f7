#include "ffdlab/synthetic.hpp"

#include "ffdlab/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace ffdlab {

SyntheticKind parse_synthetic_kind(std::string_view name) {
    if (name == "random_walk") return SyntheticKind::random_walk;
    if (name == "gbm") return SyntheticKind::gbm;
    if (name == "ar1") return SyntheticKind::ar1;
    throw Error(ErrorCode::InvalidParams, "unknown synthetic kind '" + std::string(name) + "'");
}

std::string_view to_string(SyntheticKind kind) {
    switch (kind) {
        case SyntheticKind::random_walk: return "random_walk";
        case SyntheticKind::gbm: return "gbm";
        case SyntheticKind::ar1: return "ar1";
    }
    return "unknown";
}

BarSeries generate_synthetic(SyntheticKind kind, std::size_t length, std::uint64_t seed, const SyntheticParams& p) {
    if (length < 100) throw Error(ErrorCode::InvalidParams, "synthetic series need length >= 100");
    if (!(p.start_price > 0.0) || !(p.volatility >= 0.0) || !(p.range_fraction >= 0.0) || !(p.volume_mean > 0.0) ||
        p.period_minutes < 1) {
        throw Error(ErrorCode::InvalidParams, "synthetic parameters out of range");
    }
    if (kind == SyntheticKind::ar1 && !(std::abs(p.ar_coefficient) < 1.0)) {
        throw Error(ErrorCode::InvalidParams, "ar1 coefficient must satisfy |phi| < 1");
    }

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const double abs_sd = p.volatility * p.start_price;
    BarSeries s;
    s.symbol = std::string(to_string(kind));
    s.period_minutes = p.period_minutes;
    s.bars.reserve(length);
    double prev = p.start_price;
    for (std::size_t t = 0; t < length; ++t) {
        const double e = gauss(rng);
        double close = 0.0;
        switch (kind) {
            case SyntheticKind::random_walk: close = prev + p.drift + abs_sd * e; break;
            case SyntheticKind::gbm:
                close = prev * std::exp(p.drift - 0.5 * p.volatility * p.volatility + p.volatility * e);
                break;
            case SyntheticKind::ar1: close = p.start_price + p.ar_coefficient * (prev - p.start_price) + abs_sd * e; break;
        }
        // The intra-bar scale tracks the current price level for gbm.
        const double unit_range = p.range_fraction * (kind == SyntheticKind::gbm ? p.volatility * prev : abs_sd);
        const double up = unit_range * (0.1 + unit(rng));
        const double down = unit_range * (0.1 + unit(rng));
        const double volume = p.volume_mean * std::exp(0.5 * gauss(rng) - 0.125);

        Bar b;
        b.timestamp_ms = p.start_ms + static_cast<std::int64_t>(t) * p.period_minutes * kMillisPerMinute;
        b.open = prev;
        b.close = close;
        b.high = std::max(prev, close) + up;
        b.low = std::min(prev, close) - down;
        b.volume = volume;
        if (!(b.low > 0.0) || !std::isfinite(b.high)) {
            throw Error(ErrorCode::InvalidParams, "generated a non-positive price at bar " + std::to_string(t) +
                                                      "; raise start_price or lower volatility");
        }
        s.bars.push_back(b);
        prev = close;
    }
    return s;
}

}  // namespace ffdlab
