#pragma once

#include "ffdlab/market_data.hpp"

#include <cstdint>
#include <string>
#include <string_view>

namespace ffdlab {

enum class SyntheticKind { random_walk, gbm, ar1 };

SyntheticKind parse_synthetic_kind(std::string_view name);
std::string_view to_string(SyntheticKind kind);

struct SyntheticParams {
    double start_price = 1000.0;
    double drift = 0.0;         // gbm: per-bar log drift; random_walk: per-bar increment
    double volatility = 1e-3;   // gbm: per-bar log sd; random_walk and ar1: sd as a fraction of start_price
    double ar_coefficient = 0.8;
    double range_fraction = 0.5;  // intra-bar range scale relative to the per-bar sd
    double volume_mean = 100.0;
    int period_minutes = 1;
    std::int64_t start_ms = 1577923200000;  // 2020-01-02T00:00:00Z
};

// Closes follow the chosen process:
//   random_walk  c_t = c_{t-1} + drift + v p0 e_t
//   gbm          c_t = c_{t-1} exp(drift - v^2 / 2 + v e_t)
//   ar1          c_t = p0 + phi (c_{t-1} - p0) + v p0 e_t
// with e_t standard normal and c_{-1} = p0. open = previous close, high and low
// extend max/min(open, close) by seeded positive amounts, volume is positive.
BarSeries generate_synthetic(SyntheticKind kind, std::size_t length, std::uint64_t seed,
                             const SyntheticParams& params = {});

}  // namespace ffdlab
