#include "ffdlab/backtest.hpp"
#include "ffdlab/error.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

using namespace ffdlab;

namespace {

constexpr std::int64_t kDay0 = 1'700'006'400'000;  // a UTC midnight

struct Ohlc {
    double o, h, l, c;
};

BarSeries daily_bars(const std::vector<Ohlc>& rows) {
    BarSeries s;
    s.period_minutes = 1440;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        Bar b;
        b.timestamp_ms = kDay0 + static_cast<std::int64_t>(i) * kMillisPerDay;
        b.open = rows[i].o;
        b.high = rows[i].h;
        b.low = rows[i].l;
        b.close = rows[i].c;
        b.volume = 1.0;
        s.bars.push_back(b);
    }
    return s;
}

VolatilityEstimate constant_vol(std::size_t n, double sigma) {
    VolatilityEstimate v;
    v.values.assign(n, sigma);
    return v;
}

StrategyParams hand_params() {
    StrategyParams p;
    p.contract_multiplier = 10.0;
    return p;
}

CostModel hand_costs() {
    CostModel c;
    c.commission_rate = 0.001;
    c.slippage = 1.0;
    c.initial_capital = 200000.0;
    return c;
}

double sum_pnl(const BacktestReport& r) {
    double s = 0.0;
    for (const auto& t : r.trades) s += t.pnl;
    return s;
}

}  // namespace

TEST_CASE("all-neutral labels never trade") {
    const auto s = daily_bars({{100, 101, 99, 100}, {100, 102, 98, 101}, {101, 103, 99, 100}, {100, 101, 99, 100}});
    const std::vector<int> labels(4, 1);
    const auto r = run_backtest(s, labels, constant_vol(4, 0.01), hand_params(), hand_costs());
    CHECK(r.trades.empty());
    for (double e : r.equity_curve) CHECK(e == 200000.0);
    CHECK(r.stats.total_return == 0.0);
    CHECK(r.stats.max_drawdown == 0.0);
    CHECK_FALSE(r.stats.sharpe.has_value());
}

TEST_CASE("hand-traced long take-profit") {
    const auto s = daily_bars({{100, 100, 100, 100}, {101, 102, 100, 101}, {101, 106, 100, 104}, {104, 104, 103, 103}});
    const std::vector<int> labels{2, 1, 1, 1};
    const auto r = run_backtest(s, labels, constant_vol(4, 0.01), hand_params(), hand_costs());
    REQUIRE(r.trades.size() == 1);
    const auto& t = r.trades[0];
    CHECK(t.direction == Direction::long_position);
    CHECK(t.take_profit == doctest::Approx(105.0));
    CHECK(t.stop_loss == doctest::Approx(98.0));
    CHECK(t.decision_index == 0);
    CHECK(t.entry_index == 1);
    CHECK(t.exit_index == 2);
    CHECK(t.entry_price == 102.0);
    CHECK(t.exit_price == doctest::Approx(104.0));
    CHECK(t.exit_reason == ExitReason::take_profit);
    CHECK(t.commission == doctest::Approx(1.02 + 1.04));
    CHECK(t.pnl == doctest::Approx(20.0 - 2.06));
    CHECK(r.equity_curve[0] == 200000.0);
    CHECK(r.equity_curve[1] == doctest::Approx(200000.0 - 1.02 - 10.0));
    CHECK(r.equity_curve[2] == doctest::Approx(200017.94));
    CHECK(r.equity_curve[3] == doctest::Approx(200017.94));
}

TEST_CASE("a bar spanning both barriers fills the stop first") {
    const auto s = daily_bars({{100, 100, 100, 100}, {101, 102, 100, 101}, {101, 106, 97, 104}, {104, 104, 103, 103}});
    const std::vector<int> labels{2, 1, 1, 1};
    const auto r = run_backtest(s, labels, constant_vol(4, 0.01), hand_params(), hand_costs());
    REQUIRE(r.trades.size() == 1);
    CHECK(r.trades[0].exit_reason == ExitReason::stop_loss);
    CHECK(r.trades[0].exit_price == doctest::Approx(97.0));
    CHECK(r.trades[0].pnl == doctest::Approx(-50.0 - 1.02 - 0.97));
}

TEST_CASE("short stop, then a position closed at the end of data") {
    // Short decided at bar 0: TP = 100 (1 - 5 0.01) = 95, SL = 100 (1 + 2 0.01) = 102.
    const auto s = daily_bars({{100, 100, 100, 100},
                               {100, 101, 99, 100},
                               {100, 103, 99, 101},
                               {101, 101, 100, 100},
                               {100, 101, 99, 100},
                               {100, 101, 99, 100}});
    const std::vector<int> labels{0, 1, 1, 2, 1, 1};
    const auto r = run_backtest(s, labels, constant_vol(6, 0.01), hand_params(), hand_costs());
    REQUIRE(r.trades.size() == 2);
    const auto& a = r.trades[0];
    CHECK(a.direction == Direction::short_position);
    CHECK(a.entry_price == 99.0);
    CHECK(a.exit_index == 2);
    CHECK(a.exit_reason == ExitReason::stop_loss);
    CHECK(a.exit_price == doctest::Approx(103.0));
    CHECK(a.pnl == doctest::Approx(-40.0 - 0.99 - 1.03));
    const auto& b = r.trades[1];
    CHECK(b.direction == Direction::long_position);
    CHECK(b.entry_index == 4);
    CHECK(b.exit_index == 5);
    CHECK(b.exit_reason == ExitReason::end_of_data);
    CHECK(b.exit_price == 99.0);
    CHECK(b.pnl == doctest::Approx(-20.0 - 1.01 - 0.99));
    CHECK(r.equity_curve.back() == doctest::Approx(200000.0 + a.pnl + b.pnl));
    CHECK(r.stats.trading_days == 6);
}

TEST_CASE("signals on the last two bars are ignored and missing volatility skips entries") {
    const auto s = daily_bars({{100, 100, 100, 100}, {100, 101, 99, 100}, {100, 101, 99, 100}, {100, 101, 99, 100}});
    const std::vector<int> late{1, 1, 2, 0};
    CHECK(run_backtest(s, late, constant_vol(4, 0.01), hand_params(), hand_costs()).trades.empty());

    auto vol = constant_vol(4, 0.01);
    vol.values[0] = std::nan("");
    vol.values[1] = 0.0;
    const std::vector<int> early{2, 0, 1, 1};
    const auto r = run_backtest(s, early, vol, hand_params(), hand_costs());
    CHECK(r.trades.empty());
    CHECK(r.skipped_entries == 2);
}

TEST_CASE("exit on neutral closes at the next open") {
    const auto s = daily_bars({{100, 100, 100, 100}, {100, 101, 99, 100}, {100, 101, 99, 101}, {102, 103, 101, 102}, {102, 102, 102, 102}});
    const std::vector<int> labels{2, 2, 1, 1, 1};
    auto p = hand_params();
    p.exit_on_neutral = true;
    const auto r = run_backtest(s, labels, constant_vol(5, 0.01), p, hand_costs());
    REQUIRE(r.trades.size() == 1);
    CHECK(r.trades[0].exit_reason == ExitReason::signal_flat);
    CHECK(r.trades[0].exit_index == 3);
    CHECK(r.trades[0].exit_price == 101.0);
}

TEST_CASE("accounting identity, zero-cost pnl and lot linearity on random runs") {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const auto closes = oracle::random_walk(400, seed, 1000.0, 3.0);
        const auto s = oracle::bars_from_closes(closes, seed, 2.0);
        std::mt19937_64 rng(seed);
        std::uniform_int_distribution<int> u(0, 2);
        std::vector<int> labels(s.size());
        for (auto& l : labels) l = u(rng);
        auto vol = constant_vol(s.size(), 0.002);
        vol.values[0] = std::nan("");

        const auto r = run_backtest(s, labels, vol, hand_params(), hand_costs());
        CHECK(std::abs(r.equity_curve.back() - 200000.0 - sum_pnl(r)) < 1e-6);
        CHECK(r.stats.max_drawdown <= 0.0);
        for (const auto& t : r.trades) {
            CHECK(t.entry_index < t.exit_index);
            CHECK(t.entry_index == t.decision_index + 1);
            const double gross = t.sign() * (t.exit_price - t.entry_price) * 10.0;
            CHECK(t.pnl == doctest::Approx(gross - t.commission));
        }

        CostModel free = hand_costs();
        free.commission_rate = 0.0;
        free.slippage = 0.0;
        const auto z = run_backtest(s, labels, vol, hand_params(), free);
        double signed_moves = 0.0;
        for (const auto& t : z.trades) signed_moves += t.sign() * (t.exit_price - t.entry_price) * 10.0;
        CHECK(sum_pnl(z) == signed_moves);

        auto two = hand_params();
        two.lot_size = 2.0;
        const auto d = run_backtest(s, labels, vol, two, free);
        REQUIRE(d.trades.size() == z.trades.size());
        for (std::size_t i = 0; i < z.trades.size(); ++i) CHECK(d.trades[i].pnl == 2.0 * z.trades[i].pnl);
        for (std::size_t i = 0; i < z.equity_curve.size(); ++i) {
            CHECK(std::abs((d.equity_curve[i] - 200000.0) - 2.0 * (z.equity_curve[i] - 200000.0)) < 1e-6);
        }
    }
}

TEST_CASE("fills do not depend on later bars") {
    const auto closes = oracle::random_walk(300, 5, 1000.0, 3.0);
    const auto s = oracle::bars_from_closes(closes, 5, 2.0);
    std::mt19937_64 rng(5);
    std::vector<int> labels(s.size());
    for (auto& l : labels) l = static_cast<int>(rng() % 3);
    const auto vol = constant_vol(s.size(), 0.002);
    const auto full = run_backtest(s, labels, vol, hand_params(), hand_costs());
    const std::size_t m = 200;
    BarSeries cut = s;
    cut.bars.resize(m);
    const std::vector<int> cut_labels(labels.begin(), labels.begin() + m);
    VolatilityEstimate cut_vol = vol;
    cut_vol.values.resize(m);
    const auto part = run_backtest(cut, cut_labels, cut_vol, hand_params(), hand_costs());
    for (std::size_t t = 0; t + 1 < m; ++t) CHECK(part.equity_curve[t] == full.equity_curve[t]);
    for (const auto& tr : part.trades) {
        if (tr.exit_reason == ExitReason::end_of_data) continue;
        bool found = false;
        for (const auto& f : full.trades) found = found || (f.entry_index == tr.entry_index && f.exit_index == tr.exit_index);
        CHECK(found);
    }
}

TEST_CASE("backtest input errors") {
    const auto s = daily_bars({{100, 100, 100, 100}, {100, 101, 99, 100}, {100, 101, 99, 100}});
    const std::vector<int> two_labels{1, 1};
    try {
        run_backtest(s, two_labels, constant_vol(3, 0.01), hand_params(), hand_costs());
        FAIL("expected AlignmentMismatch");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::AlignmentMismatch);
    }
    const std::vector<int> bad{1, 5, 1};
    CHECK_THROWS_AS(run_backtest(s, bad, constant_vol(3, 0.01), hand_params(), hand_costs()), Error);
    auto p = hand_params();
    p.pb = 0.0;
    CHECK_THROWS_AS(p.validate(), Error);
    auto c = hand_costs();
    c.initial_capital = 0.0;
    CHECK_THROWS_AS(c.validate(), Error);
    c = hand_costs();
    c.slippage = -1.0;
    CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("performance statistics by hand") {
    const std::vector<std::int64_t> ts{kDay0, kDay0 + kMillisPerDay, kDay0 + 2 * kMillisPerDay};
    const std::vector<double> eq{100, 110, 99};
    const auto s = performance_stats(eq, ts, 3);
    CHECK(s.total_return == doctest::Approx(-0.01));
    CHECK(s.max_drawdown == doctest::Approx(99.0 / 110.0 - 1.0));
    CHECK(s.trading_days == 3);
    CHECK(s.profitable_days == 1);
    CHECK(s.losing_days == 1);
    CHECK(s.trades_per_day == doctest::Approx(1.0));
    CHECK(s.annualized_return == doctest::Approx(-0.01 * 252.0 / 3.0));
    REQUIRE(s.daily_returns.size() == 3);
    CHECK(s.daily_returns[0] == 0.0);
    CHECK(s.daily_returns[1] == doctest::Approx(0.1));
    CHECK(s.daily_returns[2] == doctest::Approx(-0.1));
    const double mean = (0.0 + 0.1 - 0.1) / 3.0;
    double var = 0.0;
    for (double r : s.daily_returns) var += (r - mean) * (r - mean);
    var /= 2.0;
    REQUIRE(s.sharpe.has_value());
    CHECK(*s.sharpe == doctest::Approx(mean / std::sqrt(var) * std::sqrt(252.0)));

    const std::vector<double> flat{5, 5, 5};
    const auto f = performance_stats(flat, ts, 0);
    CHECK(f.total_return == 0.0);
    CHECK(f.max_drawdown == 0.0);
    CHECK_FALSE(f.sharpe.has_value());

    const std::vector<double> up{1, 2, 4};
    CHECK(performance_stats(up, ts, 0).max_drawdown == 0.0);

    // Several bars on one day collapse to that day's last equity.
    const std::vector<std::int64_t> intraday{kDay0, kDay0 + 60000, kDay0 + kMillisPerDay, kDay0 + kMillisPerDay + 60000};
    const std::vector<double> e4{100, 105, 90, 102};
    const auto d = performance_stats(e4, intraday, 0);
    CHECK(d.trading_days == 2);
    CHECK(d.daily_returns[0] == doctest::Approx(0.05));
    CHECK(d.daily_returns[1] == doctest::Approx(102.0 / 105.0 - 1.0));
    CHECK(d.max_drawdown == doctest::Approx(90.0 / 105.0 - 1.0));

    const std::vector<double> empty;
    const std::vector<std::int64_t> none;
    CHECK_THROWS_AS(performance_stats(empty, none, 0), Error);
    CHECK_THROWS_AS(performance_stats(eq, intraday, 0), Error);
}

TEST_CASE("reports serialize") {
    const auto s = daily_bars({{100, 100, 100, 100}, {101, 102, 100, 101}, {101, 106, 100, 104}, {104, 104, 103, 103}});
    const std::vector<int> labels{2, 1, 1, 1};
    const auto r = run_backtest(s, labels, constant_vol(4, 0.01), hand_params(), hand_costs());
    const auto j = to_json(r);
    CHECK(j["trade_count"] == 1);
    CHECK(j["total_pnl"].get<double>() == doctest::Approx(r.trades[0].pnl));
    CHECK(j["final_equity"].get<double>() == doctest::Approx(r.equity_curve.back()));
    std::ostringstream trades, equity;
    write_trades_csv(trades, s, r);
    write_equity_csv(equity, s, r);
    CHECK(trades.str().find("take_profit") != std::string::npos);
    CHECK(equity.str().rfind("timestamp,equity,drawdown", 0) == 0);
    CHECK(to_string(Direction::short_position) == "short");
}
