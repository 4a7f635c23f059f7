#include "ffdlab/error.hpp"
#include "ffdlab/hashing.hpp"
#include "ffdlab/stationarity.hpp"
#include "ffdlab/synthetic.hpp"

#include <doctest.h>

#include <cmath>

using namespace ffdlab;

TEST_CASE("same seed gives the same series, different seeds differ") {
    for (auto kind : {SyntheticKind::random_walk, SyntheticKind::gbm, SyntheticKind::ar1}) {
        const auto a = generate_synthetic(kind, 500, 9);
        const auto b = generate_synthetic(kind, 500, 9);
        const auto c = generate_synthetic(kind, 500, 10);
        CHECK(a == b);
        CHECK_FALSE(a == c);
        CHECK(a.size() == 500);
        CHECK_NOTHROW(validate(a));
        for (std::size_t t = 1; t < a.size(); ++t) {
            CHECK(a.bars[t].open == a.bars[t - 1].close);
            CHECK(a.bars[t].volume > 0.0);
            CHECK(a.bars[t].high >= std::max(a.bars[t].open, a.bars[t].close));
            CHECK(a.bars[t].low <= std::min(a.bars[t].open, a.bars[t].close));
        }
    }
}

TEST_CASE("gbm without volatility follows the exponential drift") {
    SyntheticParams p;
    p.volatility = 0.0;
    p.drift = 1e-4;
    const auto s = generate_synthetic(SyntheticKind::gbm, 200, 1, p);
    for (std::size_t t = 0; t < s.size(); ++t) {
        CHECK(s.bars[t].close == doctest::Approx(p.start_price * std::exp(p.drift * static_cast<double>(t + 1))).epsilon(1e-12));
    }
    for (std::size_t t = 2; t < s.size(); ++t) {
        const double r1 = std::log(s.bars[t].close / s.bars[t - 1].close);
        CHECK(r1 == doctest::Approx(p.drift).epsilon(1e-9));
    }
}

TEST_CASE("ar1 closes have the expected lag-one autocorrelation") {
    SyntheticParams p;
    p.ar_coefficient = 0.8;
    const auto s = generate_synthetic(SyntheticKind::ar1, 5000, 17, p);
    const auto [acf, pacf] = acf_pacf(s.closes(), 2);
    CHECK(std::abs(acf[1] - 0.8) < 0.05);
}

TEST_CASE("timestamps follow the requested period") {
    SyntheticParams p;
    p.period_minutes = 5;
    const auto s = generate_synthetic(SyntheticKind::random_walk, 100, 2, p);
    CHECK(s.period_minutes == 5);
    CHECK(s.bars[0].timestamp_ms == p.start_ms);
    CHECK(s.bars[1].timestamp_ms - s.bars[0].timestamp_ms == 5 * kMillisPerMinute);
}

TEST_CASE("synthetic parameter errors") {
    const auto code_of = [](auto&& fn) {
        try {
            fn();
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::InvalidArgument;
    };
    CHECK(code_of([] { generate_synthetic(SyntheticKind::gbm, 99, 1); }) == ErrorCode::InvalidParams);
    SyntheticParams p;
    p.ar_coefficient = 1.0;
    CHECK(code_of([&] { generate_synthetic(SyntheticKind::ar1, 200, 1, p); }) == ErrorCode::InvalidParams);
    SyntheticParams wild;
    wild.volatility = 1.0;
    CHECK(code_of([&] { generate_synthetic(SyntheticKind::random_walk, 5000, 1, wild); }) == ErrorCode::InvalidParams);
    CHECK(parse_synthetic_kind("gbm") == SyntheticKind::gbm);
    CHECK(to_string(SyntheticKind::random_walk) == "random_walk");
    CHECK_THROWS_AS(parse_synthetic_kind("brownian"), Error);
}

TEST_CASE("hashing helpers") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(splitmix64(0) == 0xe220a8397b1dcdafULL);
    CHECK(stage_seed(5, 2) == splitmix64(7));
    CHECK(stage_seed(5, 2) != stage_seed(5, 3));
}
