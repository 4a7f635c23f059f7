#pragma once

#include "ffdlab/error.hpp"
#include "ffdlab/fracdiff.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace ffdlab {

// Augmented Dickey-Fuller with a constant and no trend.
struct AdfResult {
    double statistic = 0.0;
    std::size_t lags = 0;
    std::size_t max_lags = 0;
    std::size_t n_obs = 0;
    double critical_95 = 0.0;
    bool reject_unit_root = false;
};

// Schwert rule: floor(12 (n / 100)^{1/4}).
std::size_t schwert_max_lags(std::size_t n);

// MacKinnon (2010) response surface, constant-only model, 5% level.
double mackinnon_critical_95(std::size_t n_obs);

// Fits dy_t = a + g y_{t-1} + sum_i b_i dy_{t-i} by OLS. With `max_lags` unset the
// Schwert bound is used; the lag order is picked by AIC on a common sample and
// the chosen model is refit on all usable observations. A perfect fit yields an
// infinite statistic with the sign of g.
AdfResult adf_test(std::span<const double> series, std::optional<std::size_t> max_lags = std::nullopt);

// Same regression at a fixed lag order (no AIC search).
AdfResult adf_test_fixed_lag(std::span<const double> series, std::size_t lags);

struct DSweepRow {
    double d = 0.0;
    std::size_t cutoff = 0;
    double adf_statistic = 0.0;
    double critical_95 = 0.0;
    std::size_t adf_lags = 0;
    double correlation = 0.0;
    bool passes = false;
};

struct SweepOptions {
    bool log_prices = true;
    std::optional<std::size_t> max_lags;
    std::size_t max_weights = kDefaultMaxWeights;
};

// Error raised from inside a sweep; carries the grid value that failed.
class SweepError : public Error {
public:
    SweepError(const Error& cause, double d);
    double d() const noexcept { return d_; }

private:
    double d_;
};

std::vector<double> default_d_grid();
std::vector<double> make_d_grid(double start, double stop, double step);

std::vector<DSweepRow> d_sweep(std::span<const double> series, std::span<const double> d_grid, double tau = kDefaultTau,
                               const SweepOptions& options = {});

// Smallest d on {0, step, 2 step, ..., 1} whose transformed series rejects the unit root.
double minimal_d(std::span<const double> series, double tau = kDefaultTau, double grid_step = 0.1,
                 const SweepOptions& options = {});

// ACF from biased sample autocovariances; PACF by Durbin-Levinson. Both have
// n_lags + 1 entries with element 0 equal to 1.
std::pair<std::vector<double>, std::vector<double>> acf_pacf(std::span<const double> series, std::size_t n_lags);

}  // namespace ffdlab
