#include "ffdlab/model.hpp"

#include "ffdlab/error.hpp"
#include "ffdlab/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

namespace ffdlab {

void MlpConfig::validate() const {
    if (input_dim == 0 || hidden_dim == 0 || n_classes < 2) throw Error(ErrorCode::InvalidArgument, "MLP dimensions must be positive");
    if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "Adam betas must lie in (0, 1)");
    }
    if (!(epsilon > 0.0) || learning_rate < 0.0) throw Error(ErrorCode::InvalidArgument, "invalid Adam scalars");
    if (epochs == 0 || batch_size == 0) throw Error(ErrorCode::InvalidArgument, "epochs and batch_size must be positive");
}

nlohmann::json to_json(const MlpConfig& c) {
    return {{"input_dim", c.input_dim},
            {"hidden_dim", c.hidden_dim},
            {"n_residual_blocks", c.n_residual_blocks},
            {"n_classes", c.n_classes},
            {"activation", c.activation == Activation::relu ? "relu" : "leaky_relu"},
            {"leaky_slope", c.leaky_slope},
            {"learning_rate", c.learning_rate},
            {"beta1", c.beta1},
            {"beta2", c.beta2},
            {"epsilon", c.epsilon},
            {"epochs", c.epochs},
            {"batch_size", c.batch_size},
            {"seed", c.seed}};
}

MlpConfig mlp_config_from_json(const nlohmann::json& j) {
    MlpConfig c;
    c.input_dim = j.value("input_dim", c.input_dim);
    c.hidden_dim = j.value("hidden_dim", c.hidden_dim);
    c.n_residual_blocks = j.value("n_residual_blocks", c.n_residual_blocks);
    c.n_classes = j.value("n_classes", c.n_classes);
    const auto act = j.value("activation", std::string("relu"));
    if (act == "relu") c.activation = Activation::relu;
    else if (act == "leaky_relu") c.activation = Activation::leaky_relu;
    else throw Error(ErrorCode::InvalidArgument, "unknown activation '" + act + "'");
    c.leaky_slope = j.value("leaky_slope", c.leaky_slope);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.beta1 = j.value("beta1", c.beta1);
    c.beta2 = j.value("beta2", c.beta2);
    c.epsilon = j.value("epsilon", c.epsilon);
    c.epochs = j.value("epochs", c.epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.seed = j.value("seed", c.seed);
    return c;
}

namespace {

Affine make_affine(std::size_t in, std::size_t out, std::mt19937_64& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(in));
    std::uniform_real_distribution<double> dist(-limit, limit);
    Affine a;
    a.weight.resize(static_cast<Eigen::Index>(in), static_cast<Eigen::Index>(out));
    for (Eigen::Index r = 0; r < a.weight.rows(); ++r) {
        for (Eigen::Index c = 0; c < a.weight.cols(); ++c) a.weight(r, c) = dist(rng);
    }
    a.bias = Eigen::MatrixXd::Zero(1, static_cast<Eigen::Index>(out));
    return a;
}

Eigen::MatrixXd apply(const Affine& a, const Eigen::MatrixXd& x) {
    return (x * a.weight).rowwise() + a.bias.row(0);
}

Eigen::MatrixXd activate(const MlpConfig& c, const Eigen::MatrixXd& x) {
    if (c.activation == Activation::relu) return x.cwiseMax(0.0);
    const double s = c.leaky_slope;
    return x.unaryExpr([s](double v) { return v > 0.0 ? v : s * v; });
}

// Multiplies `upstream` by the activation derivative evaluated at pre-activation `x`.
Eigen::MatrixXd activate_backward(const MlpConfig& c, const Eigen::MatrixXd& x, const Eigen::MatrixXd& upstream) {
    const double s = c.activation == Activation::relu ? 0.0 : c.leaky_slope;
    return upstream.binaryExpr(x, [s](double g, double v) { return v > 0.0 ? g : s * g; });
}

struct BlockCache {
    Eigen::MatrixXd input, pre_first, hidden, pre_second;
};

struct Cache {
    Eigen::MatrixXd pre_input, input_hidden;
    std::vector<BlockCache> blocks;
    Eigen::MatrixXd last_hidden;
    Eigen::MatrixXd logits;
};

Cache run_forward(const MlpModel& m, const Eigen::MatrixXd& x) {
    if (static_cast<std::size_t>(x.cols()) != m.config.input_dim) {
        throw Error(ErrorCode::DimensionMismatch, "batch has " + std::to_string(x.cols()) + " columns, model expects " +
                                                      std::to_string(m.config.input_dim));
    }
    Cache c;
    c.pre_input = apply(m.input_first, x);
    c.input_hidden = activate(m.config, c.pre_input);
    Eigen::MatrixXd h = apply(m.input_second, c.input_hidden);
    for (const auto& block : m.blocks) {
        BlockCache bc;
        bc.input = h;
        bc.pre_first = apply(block.first, h);
        bc.hidden = activate(m.config, bc.pre_first);
        bc.pre_second = apply(block.second, bc.hidden);
        h = h + activate(m.config, bc.pre_second);
        c.blocks.push_back(std::move(bc));
    }
    c.last_hidden = h;
    c.logits = apply(m.output, h);
    return c;
}

void check_labels(std::span<const int> labels, Eigen::Index rows, std::size_t n_classes) {
    if (static_cast<Eigen::Index>(labels.size()) != rows) throw Error(ErrorCode::LengthMismatch, "labels and batch rows differ");
    for (int y : labels) {
        if (y < 0 || static_cast<std::size_t>(y) >= n_classes) throw Error(ErrorCode::InvalidArgument, "label out of range");
    }
}

}  // namespace

MlpModel MlpModel::initialize(const MlpConfig& cfg) {
    cfg.validate();
    std::mt19937_64 rng(cfg.seed);
    MlpModel m;
    m.config = cfg;
    m.input_first = make_affine(cfg.input_dim, cfg.hidden_dim, rng);
    m.input_second = make_affine(cfg.hidden_dim, cfg.hidden_dim, rng);
    for (std::size_t i = 0; i < cfg.n_residual_blocks; ++i) {
        ResidualBlock b;
        b.first = make_affine(cfg.hidden_dim, cfg.hidden_dim, rng);
        b.second = make_affine(cfg.hidden_dim, cfg.hidden_dim, rng);
        m.blocks.push_back(std::move(b));
    }
    m.output = make_affine(cfg.hidden_dim, cfg.n_classes, rng);
    return m;
}

std::vector<Eigen::MatrixXd*> MlpModel::tensors() {
    std::vector<Eigen::MatrixXd*> out = {&input_first.weight, &input_first.bias, &input_second.weight, &input_second.bias};
    for (auto& b : blocks) {
        out.insert(out.end(), {&b.first.weight, &b.first.bias, &b.second.weight, &b.second.bias});
    }
    out.insert(out.end(), {&output.weight, &output.bias});
    return out;
}

std::vector<const Eigen::MatrixXd*> MlpModel::tensors() const {
    auto mut = const_cast<MlpModel*>(this)->tensors();
    return {mut.begin(), mut.end()};
}

std::size_t MlpModel::parameter_count() const {
    std::size_t n = 0;
    for (const auto* t : tensors()) n += static_cast<std::size_t>(t->size());
    return n;
}

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
    Eigen::MatrixXd p(logits.rows(), logits.cols());
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
        const double mx = logits.row(r).maxCoeff();
        const Eigen::RowVectorXd e = (logits.row(r).array() - mx).exp();
        p.row(r) = e / e.sum();
    }
    return p;
}

double cross_entropy(const Eigen::MatrixXd& logits, std::span<const int> labels) {
    if (static_cast<Eigen::Index>(labels.size()) != logits.rows() || labels.empty()) {
        throw Error(ErrorCode::LengthMismatch, "labels and logits rows differ");
    }
    double total = 0.0;
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
        const double mx = logits.row(r).maxCoeff();
        const double lse = mx + std::log((logits.row(r).array() - mx).exp().sum());
        total += lse - logits(r, labels[static_cast<std::size_t>(r)]);
    }
    return total / static_cast<double>(logits.rows());
}

ForwardResult forward(const MlpModel& model, const Eigen::MatrixXd& batch) {
    auto cache = run_forward(model, batch);
    ForwardResult out;
    out.probabilities = softmax_rows(cache.logits);
    out.logits = std::move(cache.logits);
    return out;
}

LossAndGradients loss_and_gradients(const MlpModel& m, const Eigen::MatrixXd& x, std::span<const int> labels) {
    check_labels(labels, x.rows(), m.config.n_classes);
    const auto c = run_forward(m, x);
    LossAndGradients out;
    out.loss = cross_entropy(c.logits, labels);

    const double inv_n = 1.0 / static_cast<double>(x.rows());
    Eigen::MatrixXd d_logits = softmax_rows(c.logits);
    for (Eigen::Index r = 0; r < x.rows(); ++r) d_logits(r, labels[static_cast<std::size_t>(r)]) -= 1.0;
    d_logits *= inv_n;

    const std::size_t nb = m.blocks.size();
    std::vector<Eigen::MatrixXd> g(4 + 4 * nb + 2);
    g[4 + 4 * nb] = c.last_hidden.transpose() * d_logits;
    g[4 + 4 * nb + 1] = d_logits.colwise().sum();
    Eigen::MatrixXd dh = d_logits * m.output.weight.transpose();

    for (std::size_t i = nb; i-- > 0;) {
        const auto& block = m.blocks[i];
        const auto& bc = c.blocks[i];
        const Eigen::MatrixXd d_pre_second = activate_backward(m.config, bc.pre_second, dh);
        g[4 + 4 * i + 2] = bc.hidden.transpose() * d_pre_second;
        g[4 + 4 * i + 3] = d_pre_second.colwise().sum();
        const Eigen::MatrixXd d_hidden = d_pre_second * block.second.weight.transpose();
        const Eigen::MatrixXd d_pre_first = activate_backward(m.config, bc.pre_first, d_hidden);
        g[4 + 4 * i + 0] = bc.input.transpose() * d_pre_first;
        g[4 + 4 * i + 1] = d_pre_first.colwise().sum();
        dh = dh + d_pre_first * block.first.weight.transpose();
    }

    g[2] = c.input_hidden.transpose() * dh;
    g[3] = dh.colwise().sum();
    const Eigen::MatrixXd d_input_hidden = dh * m.input_second.weight.transpose();
    const Eigen::MatrixXd d_pre_input = activate_backward(m.config, c.pre_input, d_input_hidden);
    g[0] = x.transpose() * d_pre_input;
    g[1] = d_pre_input.colwise().sum();
    out.gradients = std::move(g);
    return out;
}

MlpModel train(const Eigen::MatrixXd& x, std::span<const int> labels, const MlpConfig& cfg) {
    cfg.validate();
    if (static_cast<std::size_t>(x.cols()) != cfg.input_dim) {
        throw Error(ErrorCode::DimensionMismatch, "training matrix width differs from input_dim");
    }
    check_labels(labels, x.rows(), cfg.n_classes);
    const auto n = static_cast<std::size_t>(x.rows());
    if (n < cfg.batch_size) throw Error(ErrorCode::InvalidArgument, "fewer training rows than batch_size");

    MlpModel model = MlpModel::initialize(cfg);
    auto params = model.tensors();
    std::vector<Eigen::MatrixXd> m1, m2;
    for (const auto* p : params) {
        m1.push_back(Eigen::MatrixXd::Zero(p->rows(), p->cols()));
        m2.push_back(Eigen::MatrixXd::Zero(p->rows(), p->cols()));
    }

    std::mt19937_64 shuffle_rng(cfg.seed ^ 0x9E3779B97F4A7C15ULL);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::size_t step = 0;
    Eigen::MatrixXd batch;
    std::vector<int> batch_y;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        for (std::size_t start = 0; start < n; start += cfg.batch_size) {
            const std::size_t len = std::min(cfg.batch_size, n - start);
            batch.resize(static_cast<Eigen::Index>(len), x.cols());
            batch_y.resize(len);
            for (std::size_t i = 0; i < len; ++i) {
                batch.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(order[start + i]));
                batch_y[i] = labels[order[start + i]];
            }
            const auto lg = loss_and_gradients(model, batch, batch_y);
            if (!std::isfinite(lg.loss)) {
                throw Error(ErrorCode::NonFiniteLoss, "loss diverged at epoch " + std::to_string(epoch + 1) +
                                                          " with learning rate " + std::to_string(cfg.learning_rate));
            }
            ++step;
            const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
            const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
            for (std::size_t k = 0; k < params.size(); ++k) {
                const auto& g = lg.gradients[k];
                m1[k] = cfg.beta1 * m1[k] + (1.0 - cfg.beta1) * g;
                m2[k] = cfg.beta2 * m2[k] + (1.0 - cfg.beta2) * g.cwiseProduct(g);
                const auto update = (m1[k].array() / bc1) / ((m2[k].array() / bc2).sqrt() + cfg.epsilon);
                *params[k] -= (cfg.learning_rate * update).matrix();
            }
        }
        const double epoch_loss = cross_entropy(run_forward(model, x).logits, labels);
        if (!std::isfinite(epoch_loss)) {
            throw Error(ErrorCode::NonFiniteLoss, "loss diverged at epoch " + std::to_string(epoch + 1) +
                                                      " with learning rate " + std::to_string(cfg.learning_rate));
        }
        model.loss_history.push_back(epoch_loss);
    }
    return model;
}

MlpModel train(const Dataset& dataset, const MlpConfig& cfg) {
    const auto y = dataset.train_y();
    return train(dataset.train_x(), y, cfg);
}

std::vector<int> argmax_rows(const Eigen::MatrixXd& logits) {
    std::vector<int> out(static_cast<std::size_t>(logits.rows()));
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
        Eigen::Index best = 0;
        for (Eigen::Index c = 1; c < logits.cols(); ++c) {
            if (logits(r, c) > logits(r, best)) best = c;
        }
        out[static_cast<std::size_t>(r)] = static_cast<int>(best);
    }
    return out;
}

std::vector<int> predict(const MlpModel& model, const Eigen::MatrixXd& features) {
    return argmax_rows(run_forward(model, features).logits);
}

namespace {

nlohmann::json tensor_json(const std::string& name, const Eigen::MatrixXd& t) {
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(t.size()));
    for (Eigen::Index r = 0; r < t.rows(); ++r) {
        for (Eigen::Index c = 0; c < t.cols(); ++c) data.push_back(t(r, c));
    }
    return {{"name", name}, {"rows", t.rows()}, {"cols", t.cols()}, {"data", data}};
}

std::vector<std::string> tensor_names(std::size_t blocks) {
    std::vector<std::string> names = {"input.0.weight", "input.0.bias", "input.1.weight", "input.1.bias"};
    for (std::size_t i = 0; i < blocks; ++i) {
        const auto p = "residual." + std::to_string(i);
        names.insert(names.end(), {p + ".0.weight", p + ".0.bias", p + ".1.weight", p + ".1.bias"});
    }
    names.insert(names.end(), {"output.weight", "output.bias"});
    return names;
}

}  // namespace

nlohmann::json to_json(const MlpModel& model) {
    nlohmann::json j;
    j["format"] = "ffdlab-mlp";
    j["version"] = 1;
    j["config"] = to_json(model.config);
    const auto names = tensor_names(model.blocks.size());
    const auto ts = model.tensors();
    j["tensors"] = nlohmann::json::array();
    for (std::size_t i = 0; i < ts.size(); ++i) j["tensors"].push_back(tensor_json(names[i], *ts[i]));
    j["loss_history"] = model.loss_history;
    return j;
}

MlpModel model_from_json(const nlohmann::json& j) {
    if (j.value("format", std::string{}) != "ffdlab-mlp" || j.value("version", 0) != 1) {
        throw Error(ErrorCode::InvalidArgument, "not an ffdlab-mlp v1 model");
    }
    const auto cfg = mlp_config_from_json(j.at("config"));
    MlpModel m = MlpModel::initialize(cfg);
    auto ts = m.tensors();
    const auto& arr = j.at("tensors");
    if (arr.size() != ts.size()) throw Error(ErrorCode::DimensionMismatch, "tensor count mismatch in model file");
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const auto rows = arr[i].at("rows").get<Eigen::Index>();
        const auto cols = arr[i].at("cols").get<Eigen::Index>();
        const auto data = arr[i].at("data").get<std::vector<double>>();
        if (rows != ts[i]->rows() || cols != ts[i]->cols() || static_cast<Eigen::Index>(data.size()) != rows * cols) {
            throw Error(ErrorCode::DimensionMismatch, "tensor shape mismatch in model file");
        }
        for (Eigen::Index r = 0; r < rows; ++r) {
            for (Eigen::Index c = 0; c < cols; ++c) (*ts[i])(r, c) = data[static_cast<std::size_t>(r * cols + c)];
        }
    }
    m.loss_history = j.value("loss_history", std::vector<double>{});
    return m;
}

void save_model(const MlpModel& model, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    out << to_json(model).dump(1) << '\n';
}

MlpModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    return model_from_json(nlohmann::json::parse(in));
}

ClassificationReport classification_report(std::span<const int> y_true, std::span<const int> y_pred) {
    if (y_true.size() != y_pred.size()) throw Error(ErrorCode::LengthMismatch, "y_true and y_pred differ in length");
    if (y_true.empty()) throw Error(ErrorCode::EmptyInput, "no samples");
    constexpr std::size_t K = ClassificationReport::kClasses;
    ClassificationReport rep;
    rep.total = y_true.size();
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const int t = y_true[i], p = y_pred[i];
        if (t < 0 || t >= static_cast<int>(K) || p < 0 || p >= static_cast<int>(K)) {
            throw Error(ErrorCode::InvalidArgument, "class labels must lie in {0, 1, 2}");
        }
        ++rep.confusion[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
    }
    std::size_t correct = 0;
    for (std::size_t c = 0; c < K; ++c) {
        const std::size_t tp = rep.confusion[c][c];
        std::size_t predicted = 0, actual = 0;
        for (std::size_t o = 0; o < K; ++o) {
            predicted += rep.confusion[o][c];
            actual += rep.confusion[c][o];
        }
        rep.support[c] = actual;
        correct += tp;
        auto& m = rep.per_class[c];
        rep.precision_zero_division[c] = predicted == 0;
        rep.recall_zero_division[c] = actual == 0;
        m.precision = predicted == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(predicted);
        m.recall = actual == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(actual);
        m.f1 = (m.precision + m.recall) == 0.0 ? 0.0 : 2.0 * m.precision * m.recall / (m.precision + m.recall);
    }
    rep.accuracy = static_cast<double>(correct) / static_cast<double>(rep.total);
    for (std::size_t c = 0; c < K; ++c) {
        const auto& m = rep.per_class[c];
        const double w = static_cast<double>(rep.support[c]) / static_cast<double>(rep.total);
        rep.macro_avg.precision += m.precision / K;
        rep.macro_avg.recall += m.recall / K;
        rep.macro_avg.f1 += m.f1 / K;
        rep.weighted_avg.precision += w * m.precision;
        rep.weighted_avg.recall += w * m.recall;
        rep.weighted_avg.f1 += w * m.f1;
    }
    return rep;
}

nlohmann::json to_json(const ClassificationReport& r) {
    auto metrics = [](const ClassMetrics& m) {
        return nlohmann::json{{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}};
    };
    nlohmann::json j;
    for (std::size_t c = 0; c < ClassificationReport::kClasses; ++c) {
        auto entry = metrics(r.per_class[c]);
        entry["support"] = r.support[c];
        entry["precision_zero_division"] = r.precision_zero_division[c];
        entry["recall_zero_division"] = r.recall_zero_division[c];
        j["classes"][std::to_string(c)] = entry;
    }
    j["macro_avg"] = metrics(r.macro_avg);
    j["weighted_avg"] = metrics(r.weighted_avg);
    j["accuracy"] = r.accuracy;
    j["support_total"] = r.total;
    j["confusion_matrix"] = r.confusion;
    return j;
}

std::string format_report(const ClassificationReport& r) {
    std::ostringstream os;
    char line[128];
    std::snprintf(line, sizeof(line), "%14s %10s %10s %10s %10s\n", "", "precision", "recall", "f1-score", "support");
    os << line << '\n';
    for (std::size_t c = 0; c < ClassificationReport::kClasses; ++c) {
        const auto& m = r.per_class[c];
        std::snprintf(line, sizeof(line), "%14zu %10.2f %10.2f %10.2f %10zu\n", c, m.precision, m.recall, m.f1,
                      r.support[c]);
        os << line;
    }
    os << '\n';
    std::snprintf(line, sizeof(line), "%14s %10s %10s %10.2f %10zu\n", "accuracy", "", "", r.accuracy, r.total);
    os << line;
    std::snprintf(line, sizeof(line), "%14s %10.2f %10.2f %10.2f %10zu\n", "macro avg", r.macro_avg.precision,
                  r.macro_avg.recall, r.macro_avg.f1, r.total);
    os << line;
    std::snprintf(line, sizeof(line), "%14s %10.2f %10.2f %10.2f %10zu\n", "weighted avg", r.weighted_avg.precision,
                  r.weighted_avg.recall, r.weighted_avg.f1, r.total);
    os << line;
    return os.str();
}

}  // namespace ffdlab
