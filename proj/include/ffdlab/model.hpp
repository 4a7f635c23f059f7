#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace ffdlab {

struct Dataset;

enum class Activation { relu, leaky_relu };

struct MlpConfig {
    std::size_t input_dim = 16;
    std::size_t hidden_dim = 64;
    std::size_t n_residual_blocks = 2;
    std::size_t n_classes = 3;
    Activation activation = Activation::relu;
    double leaky_slope = 0.01;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::size_t epochs = 100;
    std::size_t batch_size = 64;
    std::uint64_t seed = 0;

    void validate() const;
};

nlohmann::json to_json(const MlpConfig& cfg);
MlpConfig mlp_config_from_json(const nlohmann::json& j);

// Affine layer y = x W + b with x as a row batch. W is in x out, b is 1 x out.
struct Affine {
    Eigen::MatrixXd weight;
    Eigen::MatrixXd bias;
};

// x + act(act(x A + a) B + b).
struct ResidualBlock {
    Affine first;
    Affine second;
};

// Input block (affine, activation, affine), residual blocks, then an affine
// map to class logits.
struct MlpModel {
    MlpConfig config;
    Affine input_first;
    Affine input_second;
    std::vector<ResidualBlock> blocks;
    Affine output;
    std::vector<double> loss_history;  // mean train cross-entropy after each epoch

    // He-uniform weights (limit sqrt(6 / fan_in)) from config.seed; zero biases.
    static MlpModel initialize(const MlpConfig& cfg);

    // Parameter tensors in a fixed order: input block, residual blocks, output;
    // weight before bias within each layer.
    std::vector<Eigen::MatrixXd*> tensors();
    std::vector<const Eigen::MatrixXd*> tensors() const;
    std::size_t parameter_count() const;
};

struct ForwardResult {
    Eigen::MatrixXd logits;
    Eigen::MatrixXd probabilities;
};

ForwardResult forward(const MlpModel& model, const Eigen::MatrixXd& batch);

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits);

// Mean cross-entropy of softmax(logits) against integer class labels.
double cross_entropy(const Eigen::MatrixXd& logits, std::span<const int> labels);

struct LossAndGradients {
    double loss = 0.0;
    std::vector<Eigen::MatrixXd> gradients;  // same order and shapes as tensors()
};

LossAndGradients loss_and_gradients(const MlpModel& model, const Eigen::MatrixXd& batch, std::span<const int> labels);

// Mini-batch Adam on mean cross-entropy. Fully determined by cfg.seed.
MlpModel train(const Eigen::MatrixXd& x, std::span<const int> labels, const MlpConfig& cfg);
MlpModel train(const Dataset& dataset, const MlpConfig& cfg);

// Row-wise argmax; ties resolve to the lowest class index.
std::vector<int> argmax_rows(const Eigen::MatrixXd& logits);
std::vector<int> predict(const MlpModel& model, const Eigen::MatrixXd& features);

nlohmann::json to_json(const MlpModel& model);
MlpModel model_from_json(const nlohmann::json& j);
void save_model(const MlpModel& model, const std::filesystem::path& path);
MlpModel load_model(const std::filesystem::path& path);

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct ClassificationReport {
    static constexpr std::size_t kClasses = 3;
    std::array<ClassMetrics, kClasses> per_class{};
    std::array<std::size_t, kClasses> support{};
    std::array<bool, kClasses> precision_zero_division{};
    std::array<bool, kClasses> recall_zero_division{};
    ClassMetrics macro_avg;
    ClassMetrics weighted_avg;
    double accuracy = 0.0;
    std::array<std::array<std::size_t, kClasses>, kClasses> confusion{};  // [true][predicted]
    std::size_t total = 0;
};

// Undefined ratios (0/0) are reported as 0 and flagged.
ClassificationReport classification_report(std::span<const int> y_true, std::span<const int> y_pred);

nlohmann::json to_json(const ClassificationReport& report);

// Aligned text table: per-class rows, accuracy, macro avg, weighted avg.
std::string format_report(const ClassificationReport& report);

}  // namespace ffdlab
