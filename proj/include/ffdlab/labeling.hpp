#pragma once

#include "ffdlab/market_data.hpp"

#include <cstddef>
#include <ostream>
#include <span>
#include <vector>

namespace ffdlab {

// Exponentially weighted standard deviation of one-bar close-to-close log
// returns, aligned to the bars. values[t] is NaN for the warm-up prefix t < span.
struct VolatilityEstimate {
    int span = 20;
    std::vector<double> values;

    bool defined(std::size_t t) const;
    double at(std::size_t t) const;  // throws if undefined
    std::size_t size() const noexcept { return values.size(); }
};

// alpha = 2 / (span + 1). Mean and variance follow the incremental weighted
// recursion m_t = m + a (r - m), S_t = (1 - a)(S + a (r - m)^2), seeded with
// m_1 = r_1, S_1 = 0.
VolatilityEstimate ema_volatility(const BarSeries& series, int span = 20);
VolatilityEstimate ema_volatility(std::span<const double> closes, int span = 20);

struct TripleBarrierConfig {
    int h = 12;
    double upfactor = 3.0;
    double lowerfactor = -3.0;  // negative: lower = close (1 + sigma * lowerfactor)
    int vol_span = 20;

    void validate() const;
};

enum class BarrierHit { upper, lower, vertical, ambiguous };

struct LabelEvent {
    std::size_t entry_index = 0;
    double upper_barrier = 0.0;
    double lower_barrier = 0.0;
    std::size_t vertical_index = 0;
    std::size_t touch_index = 0;
    int label = 0;  // -1, 0, +1
    BarrierHit hit = BarrierHit::vertical;

    bool operator==(const LabelEvent&) const = default;
};

struct LabelingResult {
    std::vector<LabelEvent> events;
    std::size_t skipped_zero_volatility = 0;  // DegenerateBarrier entries
    std::size_t ambiguous_ties = 0;
    int vol_span = 20;
};

// First touch of explicit barriers over bars entry+1..entry+h using bar
// high/low. When one bar crosses both barriers the one nearer that bar's open
// wins; equidistant crossings yield label 0 at that bar (hit = ambiguous).
// Requires entry + h < series.size().
LabelEvent first_touch(std::span<const Bar> bars, std::size_t entry, double upper, double lower, int h);

// Events for every t >= vol_span with t + h inside the series. Entries with
// zero volatility are skipped and counted.
LabelingResult triple_barrier_labels(const BarSeries& series, const TripleBarrierConfig& cfg);

// Same, with a precomputed volatility estimate aligned to `series`.
LabelingResult triple_barrier_labels(const BarSeries& series, const TripleBarrierConfig& cfg,
                                     const VolatilityEstimate& vol);

// r = close[t+h] / close[t] - 1 for t = 0..n-1-h mapped to {-1, 0, +1}.
std::vector<int> fixed_horizon_labels(const BarSeries& series, int h, double threshold);

void write_events_csv(std::ostream& out, const BarSeries& series, const LabelingResult& result);

}  // namespace ffdlab
