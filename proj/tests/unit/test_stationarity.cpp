#include "ffdlab/error.hpp"
#include "ffdlab/stationarity.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace ffdlab;

TEST_CASE("random walk fails to reject, white noise strongly rejects") {
    const auto rw = oracle::random_walk(2000, 2024);
    const auto a = adf_test(rw);
    CHECK(a.statistic > -2.8618);
    CHECK_FALSE(a.reject_unit_root);
    CHECK(a.max_lags == schwert_max_lags(2000));

    const auto wn = oracle::white_noise(2000, 2025);
    const auto b = adf_test(wn);
    CHECK(b.statistic < -10.0);
    CHECK(b.reject_unit_root);
}

TEST_CASE("fixed zero-lag statistic equals the closed-form OLS t-ratio") {
    const std::vector<double> y{1, 3, 2, 5, 4, 4, 6, 5, 8, 7, 9, 8};
    const auto r = adf_test_fixed_lag(y, 0);
    CHECK(r.lags == 0);
    CHECK(r.n_obs == y.size() - 1);
    CHECK(r.statistic == doctest::Approx(oracle::ols_t_ratio_p0(y)).epsilon(1e-10));

    const auto wn = oracle::white_noise(300, 8);
    CHECK(adf_test_fixed_lag(wn, 0).statistic == doctest::Approx(oracle::ols_t_ratio_p0(wn)).epsilon(1e-10));
}

TEST_CASE("alternating series is a perfect fit") {
    const std::vector<double> y{1, 2, 1, 2, 1, 2, 1, 2, 1, 2};
    const auto r = adf_test_fixed_lag(y, 0);
    CHECK(std::isinf(r.statistic));
    CHECK(r.statistic < 0.0);
    CHECK(r.reject_unit_root);
}

TEST_CASE("reject flag agrees with the critical value") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto x = oracle::ar1(400, seed, 0.9);
        const auto r = adf_test(x);
        CHECK(r.reject_unit_root == (r.statistic < r.critical_95));
        CHECK(r.lags <= r.max_lags);
    }
}

TEST_CASE("statistic is invariant to affine transforms") {
    const auto x = oracle::ar1(800, 77, 0.95);
    const auto base = adf_test(x);
    for (auto [a, b] : {std::pair{3.0, 10.0}, std::pair{-0.5, 2.0}, std::pair{1e3, -7.0}}) {
        std::vector<double> y(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) y[i] = a * x[i] + b;
        const auto r = adf_test(y);
        CHECK(r.lags == base.lags);
        CHECK(r.statistic == doctest::Approx(base.statistic).epsilon(1e-8));
    }
}

TEST_CASE("critical value approaches the asymptotic constant") {
    CHECK(std::abs(mackinnon_critical_95(1'000'000) - (-2.8618)) < 0.01);
    CHECK(mackinnon_critical_95(100) < mackinnon_critical_95(10000));
    CHECK(schwert_max_lags(100) == 12);
    CHECK(schwert_max_lags(2000) == 25);
}

TEST_CASE("adf input errors") {
    const std::vector<double> flat(50, 3.0);
    try {
        adf_test(flat);
        FAIL("expected DegenerateInput");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DegenerateInput);
    }
    const std::vector<double> tiny{1, 2, 3};
    CHECK_THROWS_AS(adf_test(tiny), Error);
    const auto x = oracle::white_noise(30, 1);
    CHECK_THROWS_AS(adf_test(x, 25), Error);
}

TEST_CASE("d sweep on a random walk") {
    const auto rw = oracle::random_walk(2000, 2024);
    SweepOptions opt;
    opt.log_prices = false;
    const std::vector<double> two{0.0, 1.0};
    const auto rows = d_sweep(rw, two, 1e-4, opt);
    REQUIRE(rows.size() == 2);
    CHECK_FALSE(rows[0].passes);
    CHECK(rows[1].passes);
    CHECK(rows[0].correlation == 1.0);
    for (const auto& r : rows) CHECK(r.passes == (r.adf_statistic < r.critical_95));

    const auto grid = default_d_grid();
    const auto full = d_sweep(rw, grid, 1e-4, opt);
    REQUIRE(full.size() == 11);
    for (std::size_t i = 0; i < full.size(); ++i) CHECK(full[i].d == grid[i]);
    for (std::size_t i = 1; i < full.size(); ++i) CHECK(full[i].correlation <= full[i - 1].correlation + 1e-12);

    double first_pass = -1.0;
    for (const auto& r : full) {
        if (r.passes) {
            first_pass = r.d;
            break;
        }
    }
    REQUIRE(first_pass > 0.0);
    CHECK(minimal_d(rw, 1e-4, 0.1, opt) == first_pass);
}

TEST_CASE("minimal d edge cases") {
    SweepOptions opt;
    opt.log_prices = false;
    const auto wn = oracle::white_noise(2000, 4);
    CHECK(minimal_d(wn, 1e-4, 0.1, opt) == 0.0);
    const auto rw = oracle::random_walk(2000, 5);
    const double d = minimal_d(rw, 1e-4, 1.0, opt);
    CHECK((d == 0.0 || d == 1.0));
    CHECK_THROWS_AS(minimal_d(rw, 1e-4, 0.0, opt), Error);
}

TEST_CASE("sweep errors carry the failing d") {
    const auto rw = oracle::random_walk(200, 6);
    SweepOptions opt;
    opt.log_prices = false;
    const std::vector<double> grid{0.0, 0.2};
    try {
        d_sweep(rw, grid, 1e-6, opt);
        FAIL("expected a sweep error");
    } catch (const SweepError& e) {
        CHECK(e.d() == 0.2);
        CHECK(e.code() == ErrorCode::SeriesTooShort);
    }
    const std::vector<double> unsorted{0.5, 0.2};
    CHECK_THROWS_AS(d_sweep(rw, unsorted, 1e-4, opt), Error);
    std::vector<double> negative(100, 1.0);
    negative[3] = -1.0;
    CHECK_THROWS_AS(d_sweep(negative, grid, 1e-4), Error);
}

TEST_CASE("grid construction") {
    const auto g = make_d_grid(0.0, 1.0, 0.25);
    CHECK(g == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
    const auto dg = default_d_grid();
    REQUIRE(dg.size() == 11);
    CHECK(dg[3] == 0.3);
}

TEST_CASE("acf and pacf") {
    const auto x = oracle::ar1(5000, 12, 0.8);
    const auto [acf, pacf] = acf_pacf(x, 10);
    REQUIRE(acf.size() == 11);
    REQUIRE(pacf.size() == 11);
    CHECK(acf[0] == 1.0);
    CHECK(pacf[0] == 1.0);
    CHECK(std::abs(acf[1] - 0.8) < 0.05);
    CHECK(std::abs(pacf[1] - acf[1]) < 1e-12);
    CHECK(std::abs(pacf[2]) < 0.05);

    const auto wn = oracle::white_noise(3000, 13);
    const auto [wacf, wpacf] = acf_pacf(wn, 20);
    for (std::size_t k = 1; k < wacf.size(); ++k) CHECK(std::abs(wacf[k]) < 3.0 / std::sqrt(3000.0));

    const std::vector<double> flat(30, 1.0);
    CHECK_THROWS_AS(acf_pacf(flat, 5), Error);
    CHECK_THROWS_AS(acf_pacf(wn, 3000), Error);
}
