#pragma once

#include <cstddef>
#include <ostream>
#include <span>
#include <vector>

namespace ffdlab {

inline constexpr double kDefaultTau = 1e-5;
inline constexpr std::size_t kDefaultMaxWeights = 1'000'000;

// Truncated weights of (1 - B)^d. weights[0] == 1 and every retained weight has
// modulus >= tau; the first dropped weight has modulus < tau.
struct FracdiffWeights {
    double d = 0.0;
    double tau = kDefaultTau;
    std::vector<double> weights;

    // l*: index of the last retained weight, i.e. the window length minus one.
    std::size_t cutoff() const noexcept { return weights.size() - 1; }
};

// Output of the fixed-width window transform. values[i] corresponds to source
// index start_index + i.
struct FracdiffSeries {
    std::size_t source_length = 0;
    double d = 0.0;
    double tau = kDefaultTau;
    std::size_t start_index = 0;
    std::vector<double> values;
};

// w_0 = 1, w_k = -w_{k-1} (d - k + 1) / k, stopping before the first |w_k| < tau.
// Throws NonConvergence if weight index `max_len` would still be retained.
FracdiffWeights generate_weights(double d, double tau = kDefaultTau, std::size_t max_len = kDefaultMaxWeights);

// values[t - l*] = sum_{k=0}^{l*} w_k series[t - k] for t = l*..T-1. The inner
// sum always runs k = 0..l* so results are bit-stable.
FracdiffSeries ffd_transform(std::span<const double> series, const FracdiffWeights& weights);

// Pearson correlation between original[l*..T-1] and the transformed values.
double memory_correlation(std::span<const double> original, const FracdiffSeries& transformed);

// Pearson correlation of two equal-length vectors; DegenerateVariance if either is constant.
double pearson(std::span<const double> a, std::span<const double> b);

void write_weights_csv(std::ostream& out, const FracdiffWeights& weights);

}  // namespace ffdlab
