#include "ffdlab/features.hpp"

#include "ffdlab/csv.hpp"
#include "ffdlab/error.hpp"
#include "ffdlab/indicators.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

namespace ffdlab {

const std::vector<std::string>& default_feature_columns() {
    static const std::vector<std::string> names = {
        "open",       "high",         "low",          "close",        "volume",       "ffd_close",
        "sma_10",     "ema_10",       "macd",         "macd_signal",  "macd_hist",    "rsi_14",
        "stoch_k_14", "stoch_d_3",    "bb_upper_20",  "bb_middle_20", "bb_lower_20",  "atr_14",
        "roc_10",     "obv",          "cci_20",       "willr_14"};
    return names;
}

FeatureMatrix compute_indicators(const BarSeries& series, const FracdiffSeries& ffd_close,
                                 std::span<const CustomColumn> custom) {
    const std::size_t n = series.size();
    if (ffd_close.source_length != n) {
        throw Error(ErrorCode::AlignmentMismatch, "fracdiff series was computed on a different series length");
    }
    std::vector<double> open(n), high(n), low(n), close(n), volume(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& b = series.bars[i];
        open[i] = b.open;
        high[i] = b.high;
        low[i] = b.low;
        close[i] = b.close;
        volume[i] = b.volume;
    }
    std::vector<double> ffd(n, std::numeric_limits<double>::quiet_NaN());
    std::copy(ffd_close.values.begin(), ffd_close.values.end(), ffd.begin() + static_cast<std::ptrdiff_t>(ffd_close.start_index));

    namespace ind = indicators;
    const auto m = ind::macd(close);
    const auto st = ind::stochastic(high, low, close, 14, 3);
    const auto bb = ind::bollinger(close, 20, 2.0);

    std::vector<std::vector<double>> cols = {
        open,       high,       low,          close,        volume,       ffd,
        ind::sma(close, 10),    ind::ema(close, 10),        m.line,       m.signal,
        m.histogram,            ind::rsi(close, 14),        st.k,         st.d,
        bb.upper,   bb.middle,  bb.lower,     ind::atr(high, low, close, 14),
        ind::roc(close, 10),    ind::obv(close, volume),    ind::cci(high, low, close, 20),
        ind::williams_r(high, low, close, 14)};
    std::vector<std::string> names = default_feature_columns();
    for (const auto& c : custom) {
        auto values = c.compute(series);
        if (values.size() != n) throw Error(ErrorCode::LengthMismatch, "custom column '" + c.name + "' has wrong length");
        cols.push_back(std::move(values));
        names.push_back(c.name);
    }

    std::size_t first = 0;
    for (const auto& c : cols) {
        std::size_t i = 0;
        while (i < n && !std::isfinite(c[i])) ++i;
        first = std::max(first, i);
    }
    if (first >= n) throw Error(ErrorCode::SeriesTooShort, "series shorter than the longest indicator warm-up");
    for (const auto& c : cols) {
        for (std::size_t i = first; i < n; ++i) {
            if (!std::isfinite(c[i])) throw Error(ErrorCode::DegenerateInput, "non-finite feature after warm-up");
        }
    }

    FeatureMatrix fm;
    fm.column_names = std::move(names);
    fm.values.resize(static_cast<Eigen::Index>(n - first), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t r = first; r < n; ++r) {
        fm.bar_index.push_back(r);
        for (std::size_t c = 0; c < cols.size(); ++c) {
            fm.values(static_cast<Eigen::Index>(r - first), static_cast<Eigen::Index>(c)) = cols[c][r];
        }
    }
    return fm;
}

namespace {

void check_range(const FeatureMatrix& m, RowRange r) {
    if (r.begin >= r.end || r.end > m.rows()) throw Error(ErrorCode::InvalidArgument, "fit row range is empty or out of bounds");
}

}  // namespace

std::pair<FeatureMatrix, NormalizationParams> normalize(const FeatureMatrix& matrix, RowRange fit_rows) {
    check_range(matrix, fit_rows);
    NormalizationParams p;
    p.fit_rows = fit_rows;
    const auto b = static_cast<Eigen::Index>(fit_rows.begin);
    const auto len = static_cast<Eigen::Index>(fit_rows.size());
    for (std::size_t c = 0; c < matrix.cols(); ++c) {
        const auto col = matrix.values.col(static_cast<Eigen::Index>(c)).segment(b, len);
        const bool constant = (col.array() == col(0)).all();
        if (constant) {
            p.dropped.push_back(matrix.column_names[c]);
            continue;
        }
        const double mean = col.mean();
        const double sd = std::sqrt((col.array() - mean).square().mean());
        p.columns.push_back(matrix.column_names[c]);
        p.means.push_back(mean);
        p.stds.push_back(sd);
    }
    if (p.columns.empty()) throw Error(ErrorCode::ConstantColumn, "every column is constant over the fit rows");
    return {apply_normalization(matrix, p), p};
}

FeatureMatrix apply_normalization(const FeatureMatrix& matrix, const NormalizationParams& params) {
    FeatureMatrix out;
    out.column_names = params.columns;
    out.bar_index = matrix.bar_index;
    out.values.resize(matrix.values.rows(), static_cast<Eigen::Index>(params.columns.size()));
    for (std::size_t j = 0; j < params.columns.size(); ++j) {
        const auto it = std::find(matrix.column_names.begin(), matrix.column_names.end(), params.columns[j]);
        if (it == matrix.column_names.end()) throw Error(ErrorCode::MissingColumn, "column '" + params.columns[j] + "' missing");
        const auto src = static_cast<Eigen::Index>(it - matrix.column_names.begin());
        out.values.col(static_cast<Eigen::Index>(j)) =
            (matrix.values.col(src).array() - params.means[j]) / params.stds[j];
    }
    return out;
}

std::pair<FeatureMatrix, PcaParams> pca_fit_transform(const FeatureMatrix& matrix, RowRange fit_rows,
                                                      std::size_t n_components) {
    check_range(matrix, fit_rows);
    const std::size_t p = matrix.cols();
    if (n_components < 1 || n_components > std::min(fit_rows.size() - 1, p)) {
        throw Error(ErrorCode::InvalidArgument, "n_components must lie in [1, min(fit rows - 1, columns)]");
    }
    const auto fit = matrix.values.middleRows(static_cast<Eigen::Index>(fit_rows.begin),
                                              static_cast<Eigen::Index>(fit_rows.size()));
    PcaParams params;
    params.input_columns = matrix.column_names;
    params.fit_rows = fit_rows;
    params.means = fit.colwise().mean().transpose();
    const Eigen::MatrixXd centered = fit.rowwise() - params.means.transpose();
    const Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(fit_rows.size() - 1);

    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) throw Error(ErrorCode::RankDeficient, "covariance eigendecomposition failed");
    const auto ip = static_cast<Eigen::Index>(p);
    params.eigenvalues = solver.eigenvalues().reverse().cwiseMax(0.0);
    const Eigen::MatrixXd vectors = solver.eigenvectors().rowwise().reverse();

    const double total = params.eigenvalues.sum();
    const double tol = std::max(1e-12 * params.eigenvalues(0), std::numeric_limits<double>::min());
    Eigen::Index rank = 0;
    while (rank < ip && params.eigenvalues(rank) > tol) ++rank;
    if (static_cast<Eigen::Index>(n_components) > rank) {
        throw Error(ErrorCode::RankDeficient, "requested " + std::to_string(n_components) +
                                                  " components but covariance rank is " + std::to_string(rank));
    }
    const auto k = static_cast<Eigen::Index>(n_components);
    params.components = vectors.leftCols(k);
    for (Eigen::Index j = 0; j < k; ++j) {
        Eigen::Index arg = 0;
        params.components.col(j).cwiseAbs().maxCoeff(&arg);
        if (params.components(arg, j) < 0.0) params.components.col(j) *= -1.0;
    }
    params.explained_variance_ratio = params.eigenvalues.head(k) / total;
    return {apply_pca(matrix, params), params};
}

FeatureMatrix apply_pca(const FeatureMatrix& matrix, const PcaParams& params) {
    if (matrix.column_names != params.input_columns) {
        throw Error(ErrorCode::DimensionMismatch, "PCA input columns differ from the fitted columns");
    }
    FeatureMatrix out;
    out.bar_index = matrix.bar_index;
    out.values = (matrix.values.rowwise() - params.means.transpose()) * params.components;
    for (Eigen::Index j = 0; j < params.components.cols(); ++j) out.column_names.push_back("pc" + std::to_string(j + 1));
    return out;
}

namespace {

Eigen::MatrixXd rows_of(const FeatureMatrix& m, std::size_t begin, std::size_t end) {
    return m.values.middleRows(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(end - begin));
}

}  // namespace

Eigen::MatrixXd Dataset::train_x() const { return rows_of(features, 0, split_index); }
Eigen::MatrixXd Dataset::test_x() const { return rows_of(features, split_index, rows()); }
std::vector<int> Dataset::train_y() const { return {labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(split_index)}; }
std::vector<int> Dataset::test_y() const { return {labels.begin() + static_cast<std::ptrdiff_t>(split_index), labels.end()}; }

Dataset assemble_dataset(const FeatureMatrix& features, std::span<const LabelEvent> events, const DatasetOptions& options) {
    if (!(options.split_fraction > 0.0 && options.split_fraction < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "split_fraction must lie in (0, 1)");
    }
    std::map<std::size_t, int> label_at;
    for (const auto& ev : events) {
        if (!label_at.emplace(ev.entry_index, ev.label).second) {
            throw Error(ErrorCode::AlignmentMismatch, "duplicate event entry index " + std::to_string(ev.entry_index));
        }
    }

    // Feature rows are in bar order; keep those with a label.
    std::vector<std::size_t> rows;
    std::vector<int> labels;
    for (std::size_t r = 0; r < features.rows(); ++r) {
        const auto it = label_at.find(features.bar_index[r]);
        if (it == label_at.end()) continue;
        rows.push_back(r);
        labels.push_back(remap_label(it->second));
    }
    if (rows.size() < 2) throw Error(ErrorCode::AlignmentMismatch, "fewer than two events align with feature rows");

    const std::size_t n = rows.size();
    const auto split = static_cast<std::size_t>(std::floor(options.split_fraction * static_cast<double>(n)));
    if (split < 2 || split >= n) throw Error(ErrorCode::InvalidArgument, "split leaves an empty train or test set");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    if (options.split == SplitMode::random) {
        std::mt19937_64 rng(options.seed);
        std::shuffle(order.begin(), order.end(), rng);
        std::sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(split));
        std::sort(order.begin() + static_cast<std::ptrdiff_t>(split), order.end());
    }

    FeatureMatrix aligned;
    aligned.column_names = features.column_names;
    aligned.values.resize(static_cast<Eigen::Index>(n), features.values.cols());
    Dataset ds;
    ds.options = options;
    ds.split_index = split;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t r = rows[order[i]];
        aligned.bar_index.push_back(features.bar_index[r]);
        aligned.values.row(static_cast<Eigen::Index>(i)) = features.values.row(static_cast<Eigen::Index>(r));
        ds.labels.push_back(labels[order[i]]);
    }

    const RowRange train{0, split};
    auto [normed, norm_params] = normalize(aligned, train);
    const std::size_t k = std::min(options.n_components, normed.cols());
    auto [reduced, pca_params] = pca_fit_transform(normed, train, k);
    ds.features = std::move(reduced);
    ds.normalization = std::move(norm_params);
    ds.pca = std::move(pca_params);
    return ds;
}

nlohmann::json to_json(const NormalizationParams& p) {
    nlohmann::json j;
    j["columns"] = p.columns;
    j["means"] = p.means;
    j["stds"] = p.stds;
    j["dropped_constant_columns"] = p.dropped;
    j["fit_rows"] = {p.fit_rows.begin, p.fit_rows.end};
    j["std_kind"] = "population";
    return j;
}

nlohmann::json to_json(const PcaParams& p) {
    nlohmann::json j;
    j["input_columns"] = p.input_columns;
    j["means"] = std::vector<double>(p.means.data(), p.means.data() + p.means.size());
    std::vector<std::vector<double>> comps;
    for (Eigen::Index c = 0; c < p.components.cols(); ++c) {
        comps.emplace_back(p.components.col(c).data(), p.components.col(c).data() + p.components.rows());
    }
    j["components"] = comps;
    j["eigenvalues"] = std::vector<double>(p.eigenvalues.data(), p.eigenvalues.data() + p.eigenvalues.size());
    j["explained_variance_ratio"] = std::vector<double>(
        p.explained_variance_ratio.data(), p.explained_variance_ratio.data() + p.explained_variance_ratio.size());
    j["fit_rows"] = {p.fit_rows.begin, p.fit_rows.end};
    j["fit_on"] = "train_rows_only";
    return j;
}

void write_dataset_csv(std::ostream& out, const Dataset& ds, std::span<const std::int64_t> bar_timestamps) {
    out << "bar_index,timestamp,label,split";
    for (const auto& name : ds.features.column_names) out << ',' << name;
    out << '\n';
    for (std::size_t i = 0; i < ds.rows(); ++i) {
        const auto bar = ds.features.bar_index[i];
        out << bar << ',' << bar_timestamps[bar] << ',' << ds.labels[i] << ','
            << (i < ds.split_index ? "train" : "test");
        for (Eigen::Index c = 0; c < ds.features.values.cols(); ++c) {
            out << ',' << csv::format_double(ds.features.values(static_cast<Eigen::Index>(i), c));
        }
        out << '\n';
    }
}

DatasetTable read_dataset_csv(std::istream& in) {
    const auto table = csv::read(in);
    const auto c_bar = table.require_column("bar_index");
    const auto c_ts = table.require_column("timestamp");
    const auto c_label = table.require_column("label");
    const auto c_split = table.require_column("split");
    std::vector<std::size_t> feature_cols;
    DatasetTable out;
    for (std::size_t c = 0; c < table.header.size(); ++c) {
        if (c == c_bar || c == c_ts || c == c_label || c == c_split) continue;
        feature_cols.push_back(c);
        out.column_names.push_back(table.header[c]);
    }
    out.values.resize(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(feature_cols.size()));
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& f = table.rows[r];
        if (f.size() != table.header.size()) throw Error(ErrorCode::UnparseableRow, "wrong field count", r + 1);
        out.bar_index.push_back(static_cast<std::size_t>(csv::parse_int(f[c_bar], r + 1)));
        out.timestamps.push_back(csv::parse_int(f[c_ts], r + 1));
        out.labels.push_back(static_cast<int>(csv::parse_int(f[c_label], r + 1)));
        out.is_train.push_back(f[c_split] == "train");
        for (std::size_t j = 0; j < feature_cols.size(); ++j) {
            out.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) =
                csv::parse_double(f[feature_cols[j]], r + 1);
        }
    }
    return out;
}

}  // namespace ffdlab
