#include "ffdlab/error.hpp"
#include "ffdlab/labeling.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace ffdlab;

namespace {

BarSeries exact_bars(const std::vector<double>& closes) { return oracle::bars_from_closes(closes, 0, 0.0); }

BarSeries gbm_bars(std::size_t n, std::uint64_t seed, double sigma) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, sigma);
    std::vector<double> c{100.0};
    while (c.size() < n) c.push_back(c.back() * std::exp(g(rng)));
    return oracle::bars_from_closes(c, seed + 1, 0.05);
}

}  // namespace

TEST_CASE("first touch hand traces") {
    const auto up = exact_bars({100, 101, 103, 99});
    const auto e = first_touch(up.bars, 0, 102.0, 98.0, 3);
    CHECK(e.label == 1);
    CHECK(e.touch_index == 2);
    CHECK(e.vertical_index == 3);
    CHECK(e.hit == BarrierHit::upper);

    const auto flat = exact_bars({100, 100, 100, 100});
    const auto f = first_touch(flat.bars, 0, 101.0, 99.0, 3);
    CHECK(f.label == 0);
    CHECK(f.touch_index == 3);
    CHECK(f.hit == BarrierHit::vertical);

    const auto dn = exact_bars({100, 97, 105});
    const auto d = first_touch(dn.bars, 0, 102.0, 98.0, 2);
    CHECK(d.label == -1);
    CHECK(d.touch_index == 1);

    CHECK_THROWS_AS(first_touch(dn.bars, 0, 102.0, 98.0, 3), Error);
}

TEST_CASE("a bar crossing both barriers goes to the one nearer its open") {
    BarSeries s = exact_bars({100, 100});
    s.bars[1] = Bar{s.bars[1].timestamp_ms, 101.0, 103.0, 97.0, 100.0, 1.0};
    auto e = first_touch(s.bars, 0, 102.0, 98.0, 1);
    CHECK(e.label == 1);
    CHECK(e.touch_index == 1);

    s.bars[1].open = 99.0;
    e = first_touch(s.bars, 0, 102.0, 98.0, 1);
    CHECK(e.label == -1);

    s.bars[1].open = 100.0;
    e = first_touch(s.bars, 0, 102.0, 98.0, 1);
    CHECK(e.label == 0);
    CHECK(e.hit == BarrierHit::ambiguous);
    CHECK(e.touch_index == 1);
}

TEST_CASE("volatility matches the explicit weighted oracle") {
    const auto s = gbm_bars(300, 3, 0.01);
    for (int span : {1, 5, 20}) {
        const auto v = ema_volatility(s, span);
        const auto o = oracle::ew_volatility(s.closes(), span);
        REQUIRE(v.size() == s.size());
        for (std::size_t t = 0; t < s.size(); ++t) {
            if (t < static_cast<std::size_t>(span)) {
                CHECK_FALSE(v.defined(t));
            } else {
                REQUIRE(v.defined(t));
                CHECK(v.at(t) == doctest::Approx(o[t]).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("volatility hand cases") {
    const std::vector<double> flat(50, 100.0);
    const auto vf = ema_volatility(flat, 10);
    for (std::size_t t = 10; t < flat.size(); ++t) CHECK(vf.at(t) == 0.0);

    std::vector<double> alt;
    for (int i = 0; i < 400; ++i) alt.push_back(i % 2 == 0 ? 100.0 : 110.0);
    const auto va = ema_volatility(alt, 10);
    CHECK(va.at(399) == doctest::Approx(std::log(1.1)).epsilon(1e-3));

    const auto g = gbm_bars(20000, 9, 0.01);
    const auto vg = ema_volatility(g, 20);
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t t = 20; t < vg.size(); ++t, ++n) sum += vg.at(t);
    CHECK(std::abs(sum / static_cast<double>(n) - 0.01) < 0.0015);

    CHECK_THROWS_AS(ema_volatility(std::vector<double>{1, 2, 3}, 5), Error);
    CHECK_THROWS_AS(vf.at(3), Error);
}

TEST_CASE("triple barrier agrees with the naive full-scan oracle") {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        const auto s = gbm_bars(300, 100 + seed, 0.004);
        TripleBarrierConfig cfg;
        cfg.h = 3 + static_cast<int>(seed % 10);
        cfg.upfactor = 1.0 + 0.25 * static_cast<double>(seed % 5);
        cfg.lowerfactor = -(0.5 + 0.5 * static_cast<double>(seed % 4));
        cfg.vol_span = 5 + static_cast<int>(seed % 7);
        const auto res = triple_barrier_labels(s, cfg);
        const auto naive = oracle::naive_triple_barrier(s, cfg.h, cfg.upfactor, -cfg.lowerfactor, cfg.vol_span);
        REQUIRE(res.events.size() == naive.size());
        for (std::size_t i = 0; i < naive.size(); ++i) {
            const auto& e = res.events[i];
            CHECK(e.entry_index == naive[i].entry);
            CHECK(e.touch_index == naive[i].touch);
            CHECK(e.label == naive[i].label);
            CHECK(e.entry_index < e.touch_index);
            CHECK(e.touch_index <= e.vertical_index);
            CHECK(e.vertical_index == e.entry_index + static_cast<std::size_t>(cfg.h));
            if (e.label == 1) CHECK(s.bars[e.touch_index].high >= e.upper_barrier);
            if (e.label == -1) CHECK(s.bars[e.touch_index].low <= e.lower_barrier);
            if (e.label == 0 && e.hit != BarrierHit::ambiguous) CHECK(e.touch_index == e.vertical_index);
        }
    }
}

TEST_CASE("labels are scale invariant") {
    const auto s = gbm_bars(400, 31, 0.005);
    BarSeries scaled = s;
    for (auto& b : scaled.bars) {
        b.open *= 8.0;
        b.high *= 8.0;
        b.low *= 8.0;
        b.close *= 8.0;
    }
    TripleBarrierConfig cfg;
    cfg.h = 6;
    cfg.upfactor = 1.5;
    cfg.lowerfactor = -1.5;
    const auto a = triple_barrier_labels(s, cfg);
    const auto b = triple_barrier_labels(scaled, cfg);
    REQUIRE(a.events.size() == b.events.size());
    for (std::size_t i = 0; i < a.events.size(); ++i) {
        CHECK(a.events[i].label == b.events[i].label);
        CHECK(a.events[i].touch_index == b.events[i].touch_index);
    }
}

TEST_CASE("huge barriers leave only vertical labels") {
    const auto s = gbm_bars(300, 2, 0.01);
    TripleBarrierConfig cfg;
    cfg.upfactor = 1e9;
    cfg.lowerfactor = -1e9;
    for (const auto& e : triple_barrier_labels(s, cfg).events) {
        CHECK(e.label == 0);
        CHECK(e.touch_index == e.vertical_index);
    }
}

TEST_CASE("events do not look past the vertical barrier") {
    const auto s = gbm_bars(300, 44, 0.006);
    TripleBarrierConfig cfg;
    cfg.h = 8;
    cfg.upfactor = 1.0;
    cfg.lowerfactor = -1.0;
    const auto full = triple_barrier_labels(s, cfg);
    const std::size_t t = 150;
    BarSeries cut = s;
    cut.bars.resize(t + static_cast<std::size_t>(cfg.h) + 1);
    const auto partial = triple_barrier_labels(cut, cfg);
    const auto find = [t](const LabelingResult& r) {
        for (const auto& e : r.events)
            if (e.entry_index == t) return e;
        FAIL("missing event");
        return LabelEvent{};
    };
    CHECK(find(full) == find(partial));
}

TEST_CASE("zero volatility entries are skipped and counted") {
    std::vector<double> c(40, 100.0);
    for (std::size_t i = 30; i < c.size(); ++i) c[i] = 100.0 + static_cast<double>(i - 29);
    const auto s = exact_bars(c);
    TripleBarrierConfig cfg;
    cfg.h = 3;
    cfg.vol_span = 5;
    const auto r = triple_barrier_labels(s, cfg);
    CHECK(r.skipped_zero_volatility > 0);
    for (const auto& e : r.events) CHECK(e.upper_barrier > e.lower_barrier);
    CHECK(r.events.size() + r.skipped_zero_volatility == c.size() - 5 - 3);
}

TEST_CASE("labeling config and length errors") {
    TripleBarrierConfig cfg;
    cfg.lowerfactor = 3.0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = {};
    cfg.upfactor = 0.0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = {};
    cfg.h = 0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    const auto s = gbm_bars(30, 1, 0.01);
    try {
        triple_barrier_labels(s, TripleBarrierConfig{});
        FAIL("expected SeriesTooShort");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SeriesTooShort);
    }
}

TEST_CASE("fixed horizon labels") {
    CHECK(fixed_horizon_labels(exact_bars({100, 103}), 1, 0.02) == std::vector<int>{1});
    CHECK(fixed_horizon_labels(exact_bars({100, 97}), 1, 0.02) == std::vector<int>{-1});
    CHECK(fixed_horizon_labels(exact_bars({100, 100}), 1, 0.02) == std::vector<int>{0});
    CHECK(fixed_horizon_labels(exact_bars({100, 101, 103, 97}), 2, 0.02) == std::vector<int>{1, -1});
    const auto g = gbm_bars(200, 3, 0.02);
    for (int l : fixed_horizon_labels(g, 5, 1e9)) CHECK(l == 0);
    CHECK_THROWS_AS(fixed_horizon_labels(exact_bars({100, 101}), 2, 0.02), Error);
    CHECK_THROWS_AS(fixed_horizon_labels(g, 2, 0.0), Error);
}

TEST_CASE("events csv has one line per event") {
    const auto s = gbm_bars(100, 5, 0.01);
    const auto r = triple_barrier_labels(s, TripleBarrierConfig{});
    std::ostringstream out;
    write_events_csv(out, s, r);
    std::size_t lines = 0;
    for (char ch : out.str()) lines += ch == '\n';
    CHECK(lines >= r.events.size() + 1);
    CHECK(out.str().find("label") != std::string::npos);
}
