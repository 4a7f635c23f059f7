#pragma once

#include "ffdlab/backtest.hpp"
#include "ffdlab/error.hpp"
#include "ffdlab/features.hpp"
#include "ffdlab/labeling.hpp"
#include "ffdlab/market_data.hpp"
#include "ffdlab/model.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace ffdlab {

inline constexpr std::string_view kVersion = "0.1.0";

// Defaults follow the reference configuration: 10-minute bars, h = 12,
// barrier factors 3, PCA to 16 components, 80/20 split, commission 0.00005,
// slippage 1.0 point, capital 200,000. Key tree (JSON):
//
//   input.{path, period_minutes, symbol, schema.{timestamp, open, ...}}
//   resample_minutes
//   fracdiff.{d ("auto" or number), tau, grid_step, log_prices}
//   labeling.{h, up, down, vol_span}
//   features.{indicator_set, pca_components, split, split_mode}
//   model.{hidden_dim, n_residual_blocks, activation, learning_rate, beta1, beta2,
//          epsilon, epochs, batch_size}
//   backtest.{pa, pb, pc, pd, lot_size, contract_multiplier, exit_on_neutral,
//             commission_rate, slippage, initial_capital}
//   seed
struct PipelineConfig {
    std::filesystem::path input_path;
    CsvSchema schema;
    int input_period_minutes = 1;
    std::string symbol;
    int resample_minutes = 10;

    std::optional<double> d;  // nullopt selects the smallest passing d
    double tau = 1e-5;
    double d_grid_step = 0.1;
    bool log_prices = true;

    TripleBarrierConfig labeling;
    std::string indicator_set = "default16";
    DatasetOptions dataset;
    MlpConfig model;
    StrategyParams strategy;
    CostModel costs;
    std::uint64_t seed = 0;

    PipelineConfig();
    void validate() const;
};

// Unknown keys are rejected so typos do not silently fall back to defaults.
PipelineConfig pipeline_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PipelineConfig& cfg);

// SHA-256 of the canonical (sorted-key, compact) JSON form of the config.
std::string config_hash(const PipelineConfig& cfg);

// Stage indices used for seed derivation.
enum class Stage : int { resample = 0, fracdiff, label, featurize, train, predict, report, backtest };
std::string_view to_string(Stage s);

// Error raised by a pipeline stage; keeps the original code and names the stage.
class StageError : public Error {
public:
    StageError(Stage stage, const Error& cause);
    Stage stage() const noexcept { return stage_; }

private:
    Stage stage_;
};

struct StageArtifact {
    std::string stage;
    std::vector<std::string> files;  // relative to the run directory
};

struct PipelineResult {
    std::filesystem::path run_dir;
    std::string config_hash;
    double chosen_d = 0.0;
    std::vector<StageArtifact> stages;
    ClassificationReport report;
    BacktestReport backtest;
    nlohmann::json manifest;
};

// Runs resample, fracdiff, label, featurize, train, predict, report and
// backtest, writing each stage's artifacts plus manifest.json into `run_dir`.
// On failure the files written so far are kept and manifest.json records the
// failing stage before the StageError propagates.
PipelineResult run_pipeline(const PipelineConfig& cfg, const std::filesystem::path& run_dir);

}  // namespace ffdlab
