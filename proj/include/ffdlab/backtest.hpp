#pragma once

#include "ffdlab/labeling.hpp"
#include "ffdlab/market_data.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace ffdlab {

// Take-profit / stop-loss multipliers of the volatility, applied to the close
// of the bar on which the entry decision is made:
//   long  TP = c (1 + pa s), SL = c (1 - pb s)
//   short TP = c (1 - pc s), SL = c (1 + pd s)
struct StrategyParams {
    double pa = 5.0;
    double pb = 2.0;
    double pc = 5.0;
    double pd = 2.0;
    double lot_size = 1.0;
    double contract_multiplier = 1.0;
    bool exit_on_neutral = false;  // close an open position at the next open after a label-1 bar

    void validate() const;
    std::array<double, 4> multipliers() const { return {pa, pb, pc, pd}; }
    StrategyParams with_multipliers(std::span<const double> m) const;
};

struct CostModel {
    double commission_rate = 0.00005;  // fraction of notional, per side
    double slippage = 1.0;             // price points, per side
    double initial_capital = 200000.0;

    void validate() const;
};

enum class Direction { long_position, short_position };
enum class ExitReason { take_profit, stop_loss, signal_flat, end_of_data };

std::string_view to_string(Direction d);
std::string_view to_string(ExitReason r);

struct TradeRecord {
    Direction direction = Direction::long_position;
    std::size_t decision_index = 0;
    std::size_t entry_index = 0;
    std::size_t exit_index = 0;
    double entry_price = 0.0;  // slippage-adjusted fills
    double exit_price = 0.0;
    double take_profit = 0.0;
    double stop_loss = 0.0;
    ExitReason exit_reason = ExitReason::end_of_data;
    double commission = 0.0;  // both sides
    double pnl = 0.0;         // net of commission

    int sign() const noexcept { return direction == Direction::long_position ? 1 : -1; }
};

struct PerformanceStats {
    double total_return = 0.0;
    double annualized_return = 0.0;
    std::optional<double> sharpe;  // absent with fewer than two days or zero daily variance
    double max_drawdown = 0.0;
    std::size_t trading_days = 0;
    std::size_t profitable_days = 0;
    std::size_t losing_days = 0;
    double trades_per_day = 0.0;
    std::vector<std::int64_t> day_start_ms;
    std::vector<double> daily_returns;
};

inline constexpr double kTradingDaysPerYear = 252.0;

// Daily returns use the last equity of each UTC calendar day, with the first
// day measured against equity_curve[0]. Returns are relative to equity_curve[0].
PerformanceStats performance_stats(std::span<const double> equity_curve, std::span<const std::int64_t> timestamps,
                                   std::size_t trade_count);

struct BacktestReport {
    std::vector<TradeRecord> trades;
    std::vector<double> equity_curve;  // marked to close, one value per bar
    PerformanceStats stats;
    std::size_t skipped_entries = 0;  // signals with undefined or non-positive volatility
    double initial_capital = 0.0;
};

// Single-position state machine. A label of 2 (0) at bar t opens a long (short)
// at bar t+1's open, provided at least one bar follows the fill. Exits are
// checked from the bar after the fill: stop-loss before take-profit, each
// filled at its barrier price with slippage against the trade. A position still
// open at the last bar is closed at that bar's close.
BacktestReport run_backtest(const BarSeries& series, std::span<const int> labels, const VolatilityEstimate& vol,
                            const StrategyParams& params, const CostModel& costs);

nlohmann::json to_json(const StrategyParams& p);
nlohmann::json to_json(const CostModel& c);
nlohmann::json to_json(const PerformanceStats& s);
nlohmann::json to_json(const BacktestReport& r);

void write_trades_csv(std::ostream& out, const BarSeries& series, const BacktestReport& report);
// timestamp,equity,drawdown
void write_equity_csv(std::ostream& out, const BarSeries& series, const BacktestReport& report);

}  // namespace ffdlab
