#include "ffdlab/backtest.hpp"

#include "ffdlab/csv.hpp"
#include "ffdlab/error.hpp"

#include <algorithm>
#include <cmath>

namespace ffdlab {

void StrategyParams::validate() const {
    for (double m : multipliers()) {
        if (!(m > 0.0) || !std::isfinite(m)) throw Error(ErrorCode::InvalidParams, "TP/SL multipliers must be positive");
    }
    if (!(lot_size > 0.0) || !(contract_multiplier > 0.0)) {
        throw Error(ErrorCode::InvalidParams, "lot_size and contract_multiplier must be positive");
    }
}

StrategyParams StrategyParams::with_multipliers(std::span<const double> m) const {
    if (m.size() != 4) throw Error(ErrorCode::InvalidParams, "expected four multipliers pa,pb,pc,pd");
    StrategyParams p = *this;
    p.pa = m[0];
    p.pb = m[1];
    p.pc = m[2];
    p.pd = m[3];
    return p;
}

void CostModel::validate() const {
    if (!(commission_rate >= 0.0) || !(slippage >= 0.0) || !(initial_capital > 0.0)) {
        throw Error(ErrorCode::InvalidParams, "costs need commission_rate >= 0, slippage >= 0, initial_capital > 0");
    }
}

std::string_view to_string(Direction d) { return d == Direction::long_position ? "long" : "short"; }

std::string_view to_string(ExitReason r) {
    switch (r) {
        case ExitReason::take_profit: return "take_profit";
        case ExitReason::stop_loss: return "stop_loss";
        case ExitReason::signal_flat: return "signal_flat";
        case ExitReason::end_of_data: return "end_of_data";
    }
    return "unknown";
}

PerformanceStats performance_stats(std::span<const double> equity, std::span<const std::int64_t> timestamps,
                                   std::size_t trade_count) {
    if (equity.empty()) throw Error(ErrorCode::EmptyInput, "equity curve is empty");
    if (equity.size() != timestamps.size()) throw Error(ErrorCode::LengthMismatch, "equity and timestamps differ in length");
    PerformanceStats s;
    const double base = equity.front();
    s.total_return = equity.back() / base - 1.0;

    double peak = equity.front();
    for (double e : equity) {
        peak = std::max(peak, e);
        s.max_drawdown = std::min(s.max_drawdown, e / peak - 1.0);
    }

    std::vector<double> day_close;
    for (std::size_t t = 0; t < equity.size(); ++t) {
        const std::int64_t day = timestamps[t] - ((timestamps[t] % kMillisPerDay) + kMillisPerDay) % kMillisPerDay;
        if (s.day_start_ms.empty() || s.day_start_ms.back() != day) {
            s.day_start_ms.push_back(day);
            day_close.push_back(equity[t]);
        } else {
            day_close.back() = equity[t];
        }
    }
    s.trading_days = day_close.size();
    double prev = base;
    for (double e : day_close) {
        s.daily_returns.push_back(e / prev - 1.0);
        if (e > prev) ++s.profitable_days;
        else if (e < prev) ++s.losing_days;
        prev = e;
    }
    s.annualized_return = s.total_return * kTradingDaysPerYear / static_cast<double>(s.trading_days);
    s.trades_per_day = static_cast<double>(trade_count) / static_cast<double>(s.trading_days);

    if (s.daily_returns.size() >= 2) {
        const double n = static_cast<double>(s.daily_returns.size());
        double mean = 0.0;
        for (double r : s.daily_returns) mean += r;
        mean /= n;
        double ss = 0.0;
        for (double r : s.daily_returns) ss += (r - mean) * (r - mean);
        const double sd = std::sqrt(ss / (n - 1.0));
        if (sd > 0.0) s.sharpe = mean / sd * std::sqrt(kTradingDaysPerYear);
    }
    return s;
}

namespace {

struct OpenPosition {
    TradeRecord trade;
    double entry_commission = 0.0;
};

}  // namespace

BacktestReport run_backtest(const BarSeries& series, std::span<const int> labels, const VolatilityEstimate& vol,
                            const StrategyParams& params, const CostModel& costs) {
    params.validate();
    costs.validate();
    const std::size_t n = series.size();
    if (labels.size() != n || vol.size() != n) {
        throw Error(ErrorCode::AlignmentMismatch, "labels (" + std::to_string(labels.size()) + ") and volatility (" +
                                                      std::to_string(vol.size()) + ") must match " +
                                                      std::to_string(n) + " bars");
    }
    if (n < 2) throw Error(ErrorCode::SeriesTooShort, "backtest needs at least two bars");
    for (int l : labels) {
        if (l < 0 || l > 2) throw Error(ErrorCode::InvalidArgument, "labels must lie in {0, 1, 2}");
    }

    BacktestReport rep;
    rep.initial_capital = costs.initial_capital;
    rep.equity_curve.reserve(n);
    const double scale = params.contract_multiplier * params.lot_size;
    double cash = costs.initial_capital;
    std::optional<OpenPosition> pos;
    TradeRecord pending_trade;
    bool pending_entry = false;
    bool pending_exit = false;

    auto commission = [&](double price) { return std::abs(price) * scale * costs.commission_rate; };
    auto close_position = [&](std::size_t t, double price, ExitReason why) {
        auto& tr = pos->trade;
        tr.exit_index = t;
        tr.exit_price = price;
        tr.exit_reason = why;
        const double exit_commission = commission(price);
        const double gross = tr.sign() * (price - tr.entry_price) * scale;
        tr.commission = pos->entry_commission + exit_commission;
        tr.pnl = gross - tr.commission;
        cash += gross - exit_commission;
        rep.trades.push_back(tr);
        pos.reset();
    };

    for (std::size_t t = 0; t < n; ++t) {
        const Bar& bar = series.bars[t];
        if (pending_exit && pos) {
            close_position(t, bar.open - pos->trade.sign() * costs.slippage, ExitReason::signal_flat);
        }
        pending_exit = false;
        if (pending_entry) {
            OpenPosition p;
            p.trade = pending_trade;
            p.trade.entry_index = t;
            p.trade.entry_price = bar.open + p.trade.sign() * costs.slippage;
            p.entry_commission = commission(p.trade.entry_price);
            cash -= p.entry_commission;
            pos = p;
            pending_entry = false;
        }
        if (pos && t > pos->trade.entry_index) {
            const auto& tr = pos->trade;
            if (tr.direction == Direction::long_position) {
                if (bar.low <= tr.stop_loss) close_position(t, tr.stop_loss - costs.slippage, ExitReason::stop_loss);
                else if (bar.high >= tr.take_profit) close_position(t, tr.take_profit - costs.slippage, ExitReason::take_profit);
            } else {
                if (bar.high >= tr.stop_loss) close_position(t, tr.stop_loss + costs.slippage, ExitReason::stop_loss);
                else if (bar.low <= tr.take_profit) close_position(t, tr.take_profit + costs.slippage, ExitReason::take_profit);
            }
        }
        if (pos && t + 1 == n) {
            close_position(t, bar.close - pos->trade.sign() * costs.slippage, ExitReason::end_of_data);
        }

        if (!pos && t + 2 < n && labels[t] != 1) {
            if (!vol.defined(t) || !(vol.values[t] > 0.0)) {
                ++rep.skipped_entries;
            } else {
                const double sigma = vol.values[t];
                TradeRecord tr;
                tr.decision_index = t;
                if (labels[t] == 2) {
                    tr.direction = Direction::long_position;
                    tr.take_profit = bar.close * (1.0 + params.pa * sigma);
                    tr.stop_loss = bar.close * (1.0 - params.pb * sigma);
                } else {
                    tr.direction = Direction::short_position;
                    tr.take_profit = bar.close * (1.0 - params.pc * sigma);
                    tr.stop_loss = bar.close * (1.0 + params.pd * sigma);
                }
                pending_trade = tr;
                pending_entry = true;
            }
        } else if (pos && params.exit_on_neutral && labels[t] == 1 && t + 1 < n) {
            pending_exit = true;
        }

        double equity = cash;
        if (pos) equity += pos->trade.sign() * (bar.close - pos->trade.entry_price) * scale;
        rep.equity_curve.push_back(equity);
    }

    rep.stats = performance_stats(rep.equity_curve, series.timestamps(), rep.trades.size());
    return rep;
}

nlohmann::json to_json(const StrategyParams& p) {
    return {{"pa", p.pa},
            {"pb", p.pb},
            {"pc", p.pc},
            {"pd", p.pd},
            {"lot_size", p.lot_size},
            {"contract_multiplier", p.contract_multiplier},
            {"exit_on_neutral", p.exit_on_neutral}};
}

nlohmann::json to_json(const CostModel& c) {
    return {{"commission_rate", c.commission_rate}, {"slippage", c.slippage}, {"initial_capital", c.initial_capital}};
}

nlohmann::json to_json(const PerformanceStats& s) {
    nlohmann::json j = {{"total_return", s.total_return},
                        {"annualized_return", s.annualized_return},
                        {"max_drawdown", s.max_drawdown},
                        {"trading_days", s.trading_days},
                        {"profitable_days", s.profitable_days},
                        {"losing_days", s.losing_days},
                        {"trades_per_day", s.trades_per_day}};
    j["sharpe"] = s.sharpe ? nlohmann::json(*s.sharpe) : nlohmann::json(nullptr);
    return j;
}

nlohmann::json to_json(const BacktestReport& r) {
    nlohmann::json j = to_json(r.stats);
    j["initial_capital"] = r.initial_capital;
    j["final_equity"] = r.equity_curve.empty() ? r.initial_capital : r.equity_curve.back();
    j["trade_count"] = r.trades.size();
    j["skipped_entries"] = r.skipped_entries;
    std::size_t wins = 0;
    double pnl = 0.0;
    for (const auto& t : r.trades) {
        pnl += t.pnl;
        if (t.pnl > 0.0) ++wins;
    }
    j["total_pnl"] = pnl;
    j["winning_trades"] = wins;
    return j;
}

void write_trades_csv(std::ostream& out, const BarSeries& series, const BacktestReport& report) {
    using csv::format_double;
    out << "direction,decision_timestamp,entry_timestamp,exit_timestamp,entry_index,exit_index,entry_price,exit_price,"
           "take_profit,stop_loss,exit_reason,commission,pnl\n";
    for (const auto& t : report.trades) {
        out << to_string(t.direction) << ',' << series.bars[t.decision_index].timestamp_ms << ','
            << series.bars[t.entry_index].timestamp_ms << ',' << series.bars[t.exit_index].timestamp_ms << ','
            << t.entry_index << ',' << t.exit_index << ',' << format_double(t.entry_price) << ','
            << format_double(t.exit_price) << ',' << format_double(t.take_profit) << ','
            << format_double(t.stop_loss) << ',' << to_string(t.exit_reason) << ',' << format_double(t.commission)
            << ',' << format_double(t.pnl) << '\n';
    }
}

void write_equity_csv(std::ostream& out, const BarSeries& series, const BacktestReport& report) {
    using csv::format_double;
    out << "timestamp,equity,drawdown\n";
    double peak = report.equity_curve.empty() ? 0.0 : report.equity_curve.front();
    for (std::size_t t = 0; t < report.equity_curve.size(); ++t) {
        const double e = report.equity_curve[t];
        peak = std::max(peak, e);
        out << series.bars[t].timestamp_ms << ',' << format_double(e) << ',' << format_double(e / peak - 1.0) << '\n';
    }
}

}  // namespace ffdlab
