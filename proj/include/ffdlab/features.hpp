#pragma once

#include "ffdlab/fracdiff.hpp"
#include "ffdlab/labeling.hpp"
#include "ffdlab/market_data.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <functional>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace ffdlab {

// Rows are observations keyed by the bar index they describe.
struct FeatureMatrix {
    std::vector<std::string> column_names;
    std::vector<std::size_t> bar_index;
    Eigen::MatrixXd values;

    std::size_t rows() const noexcept { return static_cast<std::size_t>(values.rows()); }
    std::size_t cols() const noexcept { return static_cast<std::size_t>(values.cols()); }
};

// Half-open row range [begin, end).
struct RowRange {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t size() const noexcept { return end - begin; }
};

// A user-supplied column: returns one value per bar, NaN during warm-up.
struct CustomColumn {
    std::string name;
    std::function<std::vector<double>(const BarSeries&)> compute;
};

// Column order of the built-in featurizer ("default16" plus raw OHLCV and the FFD close).
const std::vector<std::string>& default_feature_columns();

// Emits raw OHLCV, the FFD close and the 16 default indicators, followed by any
// custom columns. Rows before every column is finite are dropped.
FeatureMatrix compute_indicators(const BarSeries& series, const FracdiffSeries& ffd_close,
                                 std::span<const CustomColumn> custom = {});

struct NormalizationParams {
    std::vector<std::string> columns;  // kept columns, in output order
    std::vector<double> means;
    std::vector<double> stds;          // population standard deviation
    std::vector<std::string> dropped;  // constant over the fit rows
    RowRange fit_rows;
};

// Z-scores each column with statistics from `fit_rows` only. Columns that are
// constant over the fit rows are dropped and listed in params.dropped.
std::pair<FeatureMatrix, NormalizationParams> normalize(const FeatureMatrix& matrix, RowRange fit_rows);
FeatureMatrix apply_normalization(const FeatureMatrix& matrix, const NormalizationParams& params);

struct PcaParams {
    std::vector<std::string> input_columns;
    Eigen::VectorXd means;
    Eigen::MatrixXd components;               // inputs x n_components, orthonormal columns
    Eigen::VectorXd eigenvalues;              // all eigenvalues, descending
    Eigen::VectorXd explained_variance_ratio; // first n_components entries
    RowRange fit_rows;
};

// Eigenvectors of the fit-rows covariance (n - 1 denominator), descending by
// eigenvalue. Each component's largest-magnitude loading is made positive.
std::pair<FeatureMatrix, PcaParams> pca_fit_transform(const FeatureMatrix& matrix, RowRange fit_rows,
                                                      std::size_t n_components);
FeatureMatrix apply_pca(const FeatureMatrix& matrix, const PcaParams& params);

enum class SplitMode { chronological, random };

struct DatasetOptions {
    double split_fraction = 0.8;
    std::size_t n_components = 16;
    SplitMode split = SplitMode::chronological;
    std::uint64_t seed = 0;
};

// Rows [0, split_index) are training rows, the rest test rows. In chronological
// mode rows are in time order; in random mode the train rows come first, each
// group sorted by time.
struct Dataset {
    FeatureMatrix features;
    std::vector<int> labels;  // {0, 1, 2}
    std::size_t split_index = 0;
    NormalizationParams normalization;
    PcaParams pca;
    DatasetOptions options;

    std::size_t rows() const noexcept { return labels.size(); }
    Eigen::MatrixXd train_x() const;
    Eigen::MatrixXd test_x() const;
    std::vector<int> train_y() const;
    std::vector<int> test_y() const;
};

inline int remap_label(int label) { return label + 1; }

// Aligns events to feature rows by bar index (input order does not matter),
// remaps labels, splits, then fits normalization and PCA on the train rows.
Dataset assemble_dataset(const FeatureMatrix& features, std::span<const LabelEvent> events,
                         const DatasetOptions& options = {});

nlohmann::json to_json(const NormalizationParams& p);
nlohmann::json to_json(const PcaParams& p);

// CSV: bar_index,timestamp,label,split,<feature columns>.
void write_dataset_csv(std::ostream& out, const Dataset& ds, std::span<const std::int64_t> bar_timestamps);

struct DatasetTable {
    std::vector<std::size_t> bar_index;
    std::vector<std::int64_t> timestamps;
    std::vector<int> labels;
    std::vector<bool> is_train;
    std::vector<std::string> column_names;
    Eigen::MatrixXd values;
};
DatasetTable read_dataset_csv(std::istream& in);

}  // namespace ffdlab
