#include "ffdlab/labeling.hpp"

#include "ffdlab/csv.hpp"
#include "ffdlab/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ffdlab {

bool VolatilityEstimate::defined(std::size_t t) const { return t < values.size() && !std::isnan(values[t]); }

double VolatilityEstimate::at(std::size_t t) const {
    if (!defined(t)) throw Error(ErrorCode::InvalidArgument, "volatility undefined at index " + std::to_string(t));
    return values[t];
}

VolatilityEstimate ema_volatility(std::span<const double> closes, int span) {
    if (span < 1) throw Error(ErrorCode::InvalidArgument, "span must be positive");
    if (closes.size() <= static_cast<std::size_t>(span)) {
        throw Error(ErrorCode::SeriesTooShort, "series length must exceed the volatility span");
    }
    VolatilityEstimate out;
    out.span = span;
    out.values.assign(closes.size(), std::numeric_limits<double>::quiet_NaN());

    const double alpha = 2.0 / (static_cast<double>(span) + 1.0);
    double mean = 0.0;
    double var = 0.0;
    for (std::size_t t = 1; t < closes.size(); ++t) {
        if (!(closes[t] > 0.0) || !(closes[t - 1] > 0.0)) {
            throw Error(ErrorCode::DegenerateInput, "log returns need positive closes");
        }
        const double r = std::log(closes[t] / closes[t - 1]);
        if (t == 1) {
            mean = r;
            var = 0.0;
        } else {
            const double diff = r - mean;
            mean += alpha * diff;
            var = (1.0 - alpha) * (var + alpha * diff * diff);
        }
        if (t >= static_cast<std::size_t>(span)) out.values[t] = std::sqrt(var);
    }
    return out;
}

VolatilityEstimate ema_volatility(const BarSeries& series, int span) { return ema_volatility(series.closes(), span); }

void TripleBarrierConfig::validate() const {
    if (h < 1) throw Error(ErrorCode::InvalidArgument, "h must be >= 1");
    if (!(upfactor > 0.0)) throw Error(ErrorCode::InvalidArgument, "upfactor must be > 0");
    if (!(lowerfactor < 0.0)) throw Error(ErrorCode::InvalidArgument, "lowerfactor must be < 0");
    if (vol_span < 1) throw Error(ErrorCode::InvalidArgument, "vol_span must be >= 1");
}

LabelEvent first_touch(std::span<const Bar> bars, std::size_t entry, double upper, double lower, int h) {
    if (h < 1) throw Error(ErrorCode::InvalidArgument, "h must be >= 1");
    const std::size_t vertical = entry + static_cast<std::size_t>(h);
    if (vertical >= bars.size()) throw Error(ErrorCode::SeriesTooShort, "vertical barrier beyond series end");

    LabelEvent ev;
    ev.entry_index = entry;
    ev.upper_barrier = upper;
    ev.lower_barrier = lower;
    ev.vertical_index = vertical;
    ev.touch_index = vertical;
    ev.label = 0;
    ev.hit = BarrierHit::vertical;

    for (std::size_t t = entry + 1; t <= vertical; ++t) {
        const Bar& b = bars[t];
        const bool up = b.high >= upper;
        const bool down = b.low <= lower;
        if (!up && !down) continue;
        ev.touch_index = t;
        if (up && down) {
            const double up_dist = std::max(0.0, upper - b.open);
            const double down_dist = std::max(0.0, b.open - lower);
            if (up_dist < down_dist) {
                ev.label = 1;
                ev.hit = BarrierHit::upper;
            } else if (down_dist < up_dist) {
                ev.label = -1;
                ev.hit = BarrierHit::lower;
            } else {
                ev.label = 0;
                ev.hit = BarrierHit::ambiguous;
            }
        } else if (up) {
            ev.label = 1;
            ev.hit = BarrierHit::upper;
        } else {
            ev.label = -1;
            ev.hit = BarrierHit::lower;
        }
        return ev;
    }
    return ev;
}

LabelingResult triple_barrier_labels(const BarSeries& series, const TripleBarrierConfig& cfg,
                                     const VolatilityEstimate& vol) {
    cfg.validate();
    const std::size_t n = series.size();
    if (n <= static_cast<std::size_t>(cfg.vol_span + cfg.h)) {
        throw Error(ErrorCode::SeriesTooShort, "series length must exceed vol_span + h");
    }
    if (vol.size() != n) throw Error(ErrorCode::AlignmentMismatch, "volatility not aligned to series");

    LabelingResult result;
    result.vol_span = vol.span;
    for (std::size_t t = 0; t + static_cast<std::size_t>(cfg.h) < n; ++t) {
        if (!vol.defined(t)) continue;
        const double sigma = vol.values[t];
        if (!(sigma > 0.0)) {
            ++result.skipped_zero_volatility;
            continue;
        }
        const double close = series.bars[t].close;
        const double upper = close * (1.0 + sigma * cfg.upfactor);
        const double lower = close * (1.0 + sigma * cfg.lowerfactor);
        auto ev = first_touch(series.bars, t, upper, lower, cfg.h);
        if (ev.hit == BarrierHit::ambiguous) ++result.ambiguous_ties;
        result.events.push_back(ev);
    }
    return result;
}

LabelingResult triple_barrier_labels(const BarSeries& series, const TripleBarrierConfig& cfg) {
    cfg.validate();
    if (series.size() <= static_cast<std::size_t>(cfg.vol_span + cfg.h)) {
        throw Error(ErrorCode::SeriesTooShort, "series length must exceed vol_span + h");
    }
    return triple_barrier_labels(series, cfg, ema_volatility(series, cfg.vol_span));
}

std::vector<int> fixed_horizon_labels(const BarSeries& series, int h, double threshold) {
    if (h < 1) throw Error(ErrorCode::InvalidArgument, "h must be >= 1");
    if (!(threshold > 0.0)) throw Error(ErrorCode::InvalidArgument, "threshold must be > 0");
    const std::size_t n = series.size();
    if (n <= static_cast<std::size_t>(h)) throw Error(ErrorCode::SeriesTooShort, "series length must exceed h");
    std::vector<int> labels(n - static_cast<std::size_t>(h));
    for (std::size_t t = 0; t < labels.size(); ++t) {
        const double r = series.bars[t + static_cast<std::size_t>(h)].close / series.bars[t].close - 1.0;
        labels[t] = r > threshold ? 1 : (r < -threshold ? -1 : 0);
    }
    return labels;
}

void write_events_csv(std::ostream& out, const BarSeries& series, const LabelingResult& result) {
    out << "entry_timestamp,label,touch_timestamp,upper,lower\n";
    for (const auto& ev : result.events) {
        out << series.bars[ev.entry_index].timestamp_ms << ',' << ev.label << ','
            << series.bars[ev.touch_index].timestamp_ms << ',' << csv::format_double(ev.upper_barrier) << ','
            << csv::format_double(ev.lower_barrier) << '\n';
    }
}

}  // namespace ffdlab
