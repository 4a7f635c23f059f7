#include "ffdlab/stationarity.hpp"

#include "ffdlab/csv.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <string>

namespace ffdlab {

namespace {

struct OlsFit {
    double gamma = 0.0;
    double se_gamma = 0.0;
    double ssr = 0.0;
    std::size_t nobs = 0;
    std::size_t n_params = 0;
};

// Regresses dy[j] on (1, y[j], dy[j-1], ..., dy[j-lags]) for j = first..dy.size()-1.
OlsFit fit_adf_regression(std::span<const double> y, const std::vector<double>& dy, std::size_t first,
                          std::size_t lags) {
    const std::size_t nobs = dy.size() - first;
    const std::size_t k = 2 + lags;
    if (nobs <= k) throw Error(ErrorCode::DegenerateInput, "too few observations for ADF regression");

    Eigen::MatrixXd x(nobs, k);
    Eigen::VectorXd z(nobs);
    for (std::size_t r = 0; r < nobs; ++r) {
        const std::size_t j = first + r;
        z(r) = dy[j];
        x(r, 0) = 1.0;
        x(r, 1) = y[j];
        for (std::size_t i = 1; i <= lags; ++i) x(r, 1 + i) = dy[j - i];
    }

    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    if (qr.rank() < static_cast<Eigen::Index>(k)) {
        throw Error(ErrorCode::SingularRegression, "ADF design matrix is rank deficient");
    }
    const Eigen::VectorXd beta = qr.solve(z);
    const Eigen::VectorXd resid = z - x * beta;

    OlsFit fit;
    fit.gamma = beta(1);
    fit.ssr = resid.squaredNorm();
    fit.nobs = nobs;
    fit.n_params = k;

    // (X'X)^{-1} = P R^{-1} R^{-T} P'; only the gamma entry is needed.
    const Eigen::MatrixXd r = qr.matrixR().topLeftCorner(k, k).template triangularView<Eigen::Upper>();
    const Eigen::MatrixXd r_inv =
        r.template triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(k),
                                                                                   static_cast<Eigen::Index>(k)));
    const Eigen::MatrixXd xtx_inv_perm = r_inv * r_inv.transpose();
    Eigen::Index pos = 0;
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(k); ++i) {
        if (qr.colsPermutation().indices()(i) == 1) pos = i;
    }
    const double sigma2 = fit.ssr / static_cast<double>(nobs - k);
    fit.se_gamma = std::sqrt(sigma2 * xtx_inv_perm(pos, pos));
    return fit;
}

double t_ratio(const OlsFit& fit, const std::vector<double>& dy, std::size_t first) {
    double mean = 0.0;
    for (std::size_t j = first; j < dy.size(); ++j) mean += dy[j];
    mean /= static_cast<double>(dy.size() - first);
    double sst = 0.0;
    for (std::size_t j = first; j < dy.size(); ++j) sst += (dy[j] - mean) * (dy[j] - mean);
    constexpr double kPerfectFit = 1e-26;
    if (fit.ssr <= kPerfectFit * sst || fit.se_gamma == 0.0) {
        return std::copysign(std::numeric_limits<double>::infinity(), fit.gamma);
    }
    return fit.gamma / fit.se_gamma;
}

void check_input(std::span<const double> series, std::size_t max_lags) {
    if (series.size() < max_lags + 10) {
        throw Error(ErrorCode::DegenerateInput, "series length " + std::to_string(series.size()) +
                                                    " is below max_lags + 10");
    }
    bool constant = true;
    for (double v : series) {
        if (!std::isfinite(v)) throw Error(ErrorCode::DegenerateInput, "non-finite value in series");
        if (v != series.front()) constant = false;
    }
    if (constant) throw Error(ErrorCode::DegenerateInput, "constant series");
}

std::vector<double> differences(std::span<const double> y) {
    std::vector<double> dy(y.size() - 1);
    for (std::size_t i = 0; i + 1 < y.size(); ++i) dy[i] = y[i + 1] - y[i];
    return dy;
}

AdfResult finish(const OlsFit& fit, const std::vector<double>& dy, std::size_t first, std::size_t lags,
                 std::size_t max_lags) {
    AdfResult out;
    out.statistic = t_ratio(fit, dy, first);
    out.lags = lags;
    out.max_lags = max_lags;
    out.n_obs = fit.nobs;
    out.critical_95 = mackinnon_critical_95(fit.nobs);
    out.reject_unit_root = out.statistic < out.critical_95;
    return out;
}

}  // namespace

std::size_t schwert_max_lags(std::size_t n) {
    return static_cast<std::size_t>(std::floor(12.0 * std::pow(static_cast<double>(n) / 100.0, 0.25)));
}

double mackinnon_critical_95(std::size_t n_obs) {
    const double inv = 1.0 / static_cast<double>(n_obs);
    return -2.86154 - 2.8903 * inv - 4.234 * inv * inv - 40.040 * inv * inv * inv;
}

AdfResult adf_test_fixed_lag(std::span<const double> series, std::size_t lags) {
    check_input(series, lags);
    const auto dy = differences(series);
    const auto fit = fit_adf_regression(series, dy, lags, lags);
    return finish(fit, dy, lags, lags, lags);
}

AdfResult adf_test(std::span<const double> series, std::optional<std::size_t> max_lags) {
    if (series.size() < 10) throw Error(ErrorCode::DegenerateInput, "series shorter than 10 points");
    std::size_t max_p = max_lags.value_or(schwert_max_lags(series.size()));
    check_input(series, max_p);
    const auto dy = differences(series);

    // AIC over a common sample; constants shared across candidates are omitted.
    std::size_t best_p = 0;
    double best_aic = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p <= max_p; ++p) {
        const auto fit = fit_adf_regression(series, dy, max_p, p);
        const double n = static_cast<double>(fit.nobs);
        const double aic = n * std::log(std::max(fit.ssr, std::numeric_limits<double>::min()) / n) +
                           2.0 * static_cast<double>(fit.n_params);
        if (aic < best_aic) {
            best_aic = aic;
            best_p = p;
        }
    }
    const auto fit = fit_adf_regression(series, dy, best_p, best_p);
    return finish(fit, dy, best_p, best_p, max_p);
}

SweepError::SweepError(const Error& cause, double d)
    : Error(cause.code(), std::string("d=") + csv::format_double(d) + ": " + cause.what(), cause.line()), d_(d) {}

std::vector<double> make_d_grid(double start, double stop, double step) {
    if (!(step > 0.0) || stop < start) throw Error(ErrorCode::InvalidArgument, "invalid d grid");
    std::vector<double> grid;
    const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9));
    for (std::size_t i = 0; i <= count; ++i) grid.push_back(start + static_cast<double>(i) * step);
    if (stop - grid.back() > 1e-9) grid.push_back(stop);
    // Snap accumulated rounding so 0.30000000000000004 prints as 0.3.
    for (auto& d : grid) d = std::round(d * 1e9) / 1e9;
    return grid;
}

std::vector<double> default_d_grid() { return make_d_grid(0.0, 1.0, 0.1); }

namespace {

std::vector<double> prepared(std::span<const double> series, bool log_prices) {
    std::vector<double> out(series.begin(), series.end());
    if (log_prices) {
        for (auto& v : out) {
            if (!(v > 0.0)) throw Error(ErrorCode::DegenerateInput, "log transform needs positive prices");
            v = std::log(v);
        }
    }
    return out;
}

DSweepRow sweep_row(std::span<const double> y, double d, double tau, const SweepOptions& options, bool with_corr) {
    try {
        const auto w = generate_weights(d, tau, options.max_weights);
        const auto fd = ffd_transform(y, w);
        const auto adf = adf_test(fd.values, options.max_lags);
        DSweepRow row;
        row.d = d;
        row.cutoff = w.cutoff();
        row.adf_statistic = adf.statistic;
        row.critical_95 = adf.critical_95;
        row.adf_lags = adf.lags;
        row.passes = adf.reject_unit_root;
        if (with_corr) row.correlation = memory_correlation(y, fd);
        return row;
    } catch (const SweepError&) {
        throw;
    } catch (const Error& e) {
        throw SweepError(e, d);
    }
}

}  // namespace

std::vector<DSweepRow> d_sweep(std::span<const double> series, std::span<const double> d_grid, double tau,
                               const SweepOptions& options) {
    for (std::size_t i = 0; i < d_grid.size(); ++i) {
        if (d_grid[i] < 0.0 || d_grid[i] > 1.0) throw Error(ErrorCode::InvalidArgument, "d grid values must lie in [0,1]");
        if (i > 0 && d_grid[i] <= d_grid[i - 1]) throw Error(ErrorCode::InvalidArgument, "d grid must be ascending");
    }
    const auto y = prepared(series, options.log_prices);
    std::vector<DSweepRow> rows;
    rows.reserve(d_grid.size());
    for (double d : d_grid) rows.push_back(sweep_row(y, d, tau, options, true));
    return rows;
}

double minimal_d(std::span<const double> series, double tau, double grid_step, const SweepOptions& options) {
    if (!(grid_step > 0.0) || grid_step > 1.0) throw Error(ErrorCode::InvalidArgument, "grid_step must lie in (0, 1]");
    const auto y = prepared(series, options.log_prices);
    for (double d : make_d_grid(0.0, 1.0, grid_step)) {
        if (sweep_row(y, d, tau, options, false).passes) return d;
    }
    throw Error(ErrorCode::NoPassingD, "no d in [0,1] rejects the unit root");
}

std::pair<std::vector<double>, std::vector<double>> acf_pacf(std::span<const double> series, std::size_t n_lags) {
    const std::size_t n = series.size();
    if (n <= n_lags + 1) throw Error(ErrorCode::DegenerateInput, "series too short for requested lags");
    double mean = 0.0;
    for (double v : series) mean += v;
    mean /= static_cast<double>(n);
    std::vector<double> acov(n_lags + 1, 0.0);
    for (std::size_t k = 0; k <= n_lags; ++k) {
        double s = 0.0;
        for (std::size_t t = k; t < n; ++t) s += (series[t] - mean) * (series[t - k] - mean);
        acov[k] = s / static_cast<double>(n);
    }
    if (!(acov[0] > 0.0)) throw Error(ErrorCode::DegenerateInput, "zero-variance series");

    std::vector<double> acf(n_lags + 1);
    for (std::size_t k = 0; k <= n_lags; ++k) acf[k] = acov[k] / acov[0];

    std::vector<double> pacf(n_lags + 1, 0.0);
    pacf[0] = 1.0;
    std::vector<double> phi(n_lags + 1, 0.0), prev(n_lags + 1, 0.0);
    double v = 1.0;
    for (std::size_t k = 1; k <= n_lags; ++k) {
        double num = acf[k];
        for (std::size_t j = 1; j < k; ++j) num -= prev[j] * acf[k - j];
        const double phikk = v > 0.0 ? num / v : 0.0;
        phi[k] = phikk;
        for (std::size_t j = 1; j < k; ++j) phi[j] = prev[j] - phikk * prev[k - j];
        v *= (1.0 - phikk * phikk);
        pacf[k] = phikk;
        prev = phi;
    }
    return {acf, pacf};
}

}  // namespace ffdlab
