#pragma once

#include <span>
#include <vector>

// Technical indicators over aligned price vectors. Each function returns a
// vector the length of its input with NaN over the warm-up prefix; every
// value at index t depends only on inputs at indices <= t.
namespace ffdlab::indicators {

std::vector<double> sma(std::span<const double> x, int n);

// Seeded with the SMA of the first n finite inputs, then x_t a + e_{t-1} (1 - a), a = 2 / (n + 1).
std::vector<double> ema(std::span<const double> x, int n);

struct Macd {
    std::vector<double> line;
    std::vector<double> signal;
    std::vector<double> histogram;
};
Macd macd(std::span<const double> close, int fast = 12, int slow = 26, int signal = 9);

// Wilder smoothing. Windows with no movement give 50.
std::vector<double> rsi(std::span<const double> close, int n = 14);

struct Stochastic {
    std::vector<double> k;
    std::vector<double> d;
};
// %K = 100 (C - LL) / (HH - LL), 50 on a zero range; %D = SMA of %K.
Stochastic stochastic(std::span<const double> high, std::span<const double> low, std::span<const double> close,
                      int k_period = 14, int d_period = 3);

struct Bollinger {
    std::vector<double> upper;
    std::vector<double> middle;
    std::vector<double> lower;
};
// Population standard deviation over the window.
Bollinger bollinger(std::span<const double> close, int n = 20, double width = 2.0);

std::vector<double> atr(std::span<const double> high, std::span<const double> low, std::span<const double> close,
                        int n = 14);

std::vector<double> roc(std::span<const double> close, int n = 10);

// Starts at 0 on the first bar.
std::vector<double> obv(std::span<const double> close, std::span<const double> volume);

// 0 when the mean absolute deviation is zero.
std::vector<double> cci(std::span<const double> high, std::span<const double> low, std::span<const double> close,
                        int n = 20);

// -50 on a zero range.
std::vector<double> williams_r(std::span<const double> high, std::span<const double> low,
                               std::span<const double> close, int n = 14);

}  // namespace ffdlab::indicators
