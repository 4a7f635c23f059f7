#pragma once

// Independent reference implementations used only by the tests. They favour
// direct, slow formulas over the library's incremental ones.

#include "ffdlab/market_data.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace oracle {

// Seeded fixtures built straight from the standard library RNG.
std::vector<double> random_walk(std::size_t n, std::uint64_t seed, double start = 0.0, double step_sd = 1.0);
std::vector<double> white_noise(std::size_t n, std::uint64_t seed, double sd = 1.0);
std::vector<double> ar1(std::size_t n, std::uint64_t seed, double phi);

// Bars whose closes follow `closes`; open = previous close, high/low pad the
// body by seeded amounts, one-minute spacing.
ffdlab::BarSeries bars_from_closes(std::span<const double> closes, std::uint64_t seed, double pad = 0.2);

// Untruncated binomial weights of (1 - B)^d, k = 0..n-1.
std::vector<double> full_weights(double d, std::size_t n);

// Weights from the Gamma-function closed form Gamma(k - d) / (Gamma(-d) Gamma(k + 1)), d not an integer.
double gamma_weight(double d, std::size_t k);

// Expanding-window fracdiff: at each t >= min_periods - 1 applies all t + 1 weights.
// out[i] corresponds to t = min_periods - 1 + i.
std::vector<double> expanding_fracdiff(std::span<const double> x, double d, std::size_t min_periods);

// Exponentially weighted std of log returns written as an explicit weighted
// sum: weight (1-a)^{t-1} on r_1 and a (1-a)^{t-k} on r_k, k >= 2. NaN for t < span.
std::vector<double> ew_volatility(std::span<const double> closes, int span);

struct NaiveEvent {
    std::size_t entry = 0;
    std::size_t touch = 0;
    int label = 0;
};

// Scans every bar of the horizon, collects all barrier crossings, then picks
// the earliest; same-bar double crossings go to the barrier nearer the open.
NaiveEvent naive_first_touch(const ffdlab::BarSeries& s, std::size_t entry, double upper, double lower, int h);
std::vector<NaiveEvent> naive_triple_barrier(const ffdlab::BarSeries& s, int h, double up, double down, int span);

// Closed-form two-regressor OLS t-ratio of g in dy_t = a + g y_{t-1} + e_t.
double ols_t_ratio_p0(std::span<const double> y);

// Cyclic Jacobi eigenvalues of a symmetric matrix, sorted descending.
std::vector<double> jacobi_eigenvalues(Eigen::MatrixXd a);

struct Counts {
    std::array<std::size_t, 3> tp{}, fp{}, fn{}, support{};
};
Counts brute_force_counts(std::span<const int> y_true, std::span<const int> y_pred);

}  // namespace oracle
