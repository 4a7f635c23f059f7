#include "ffdlab/pipeline.hpp"

#include "ffdlab/csv.hpp"
#include "ffdlab/fracdiff.hpp"
#include "ffdlab/hashing.hpp"
#include "ffdlab/stationarity.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

namespace ffdlab {

PipelineConfig::PipelineConfig() { strategy.contract_multiplier = 10.0; }

void PipelineConfig::validate() const {
    if (input_path.empty()) throw Error(ErrorCode::InvalidArgument, "input.path is required");
    if (input_period_minutes < 1 || resample_minutes < 1) throw Error(ErrorCode::InvalidArgument, "periods must be positive");
    if (d && (*d < 0.0 || *d > 1.0)) throw Error(ErrorCode::InvalidArgument, "fracdiff.d must lie in [0, 1]");
    if (!(tau > 0.0 && tau < 1.0)) throw Error(ErrorCode::InvalidArgument, "fracdiff.tau must lie in (0, 1)");
    if (indicator_set != "default16") throw Error(ErrorCode::InvalidArgument, "unknown indicator set '" + indicator_set + "'");
    labeling.validate();
    strategy.validate();
    costs.validate();
}

namespace {

void reject_unknown(const nlohmann::json& obj, std::initializer_list<std::string_view> allowed, const std::string& where) {
    if (!obj.is_object()) throw Error(ErrorCode::InvalidArgument, "config section '" + where + "' must be an object");
    const std::set<std::string_view> keys(allowed);
    for (const auto& [k, v] : obj.items()) {
        if (!keys.count(k)) throw Error(ErrorCode::InvalidArgument, "unknown config key '" + where + k + "'");
    }
}

template <typename T>
void read(const nlohmann::json& obj, const char* key, T& target) {
    if (obj.contains(key)) target = obj.at(key).get<T>();
}

}  // namespace

PipelineConfig pipeline_config_from_json(const nlohmann::json& j) {
    PipelineConfig c;
    reject_unknown(j, {"input", "resample_minutes", "fracdiff", "labeling", "features", "model", "backtest", "seed"}, "");
    try {
        if (j.contains("input")) {
            const auto& in = j["input"];
            reject_unknown(in, {"path", "period_minutes", "symbol", "schema"}, "input.");
            if (in.contains("path")) c.input_path = in["path"].get<std::string>();
            read(in, "period_minutes", c.input_period_minutes);
            read(in, "symbol", c.symbol);
            if (in.contains("schema")) {
                const auto& s = in["schema"];
                reject_unknown(s, {"timestamp", "open", "high", "low", "close", "volume"}, "input.schema.");
                read(s, "timestamp", c.schema.timestamp);
                read(s, "open", c.schema.open);
                read(s, "high", c.schema.high);
                read(s, "low", c.schema.low);
                read(s, "close", c.schema.close);
                read(s, "volume", c.schema.volume);
            }
        }
        read(j, "resample_minutes", c.resample_minutes);
        if (j.contains("fracdiff")) {
            const auto& f = j["fracdiff"];
            reject_unknown(f, {"d", "tau", "grid_step", "log_prices"}, "fracdiff.");
            if (f.contains("d")) {
                if (f["d"].is_string()) {
                    if (f["d"].get<std::string>() != "auto") throw Error(ErrorCode::InvalidArgument, "fracdiff.d must be a number or \"auto\"");
                    c.d.reset();
                } else {
                    c.d = f["d"].get<double>();
                }
            }
            read(f, "tau", c.tau);
            read(f, "grid_step", c.d_grid_step);
            read(f, "log_prices", c.log_prices);
        }
        if (j.contains("labeling")) {
            const auto& l = j["labeling"];
            reject_unknown(l, {"h", "up", "down", "vol_span"}, "labeling.");
            read(l, "h", c.labeling.h);
            read(l, "up", c.labeling.upfactor);
            if (l.contains("down")) c.labeling.lowerfactor = -l["down"].get<double>();
            read(l, "vol_span", c.labeling.vol_span);
        }
        if (j.contains("features")) {
            const auto& f = j["features"];
            reject_unknown(f, {"indicator_set", "pca_components", "split", "split_mode"}, "features.");
            read(f, "indicator_set", c.indicator_set);
            read(f, "pca_components", c.dataset.n_components);
            read(f, "split", c.dataset.split_fraction);
            if (f.contains("split_mode")) {
                const auto m = f["split_mode"].get<std::string>();
                if (m == "chronological") c.dataset.split = SplitMode::chronological;
                else if (m == "random") c.dataset.split = SplitMode::random;
                else throw Error(ErrorCode::InvalidArgument, "features.split_mode must be chronological or random");
            }
        }
        if (j.contains("model")) {
            const auto& m = j["model"];
            reject_unknown(m, {"hidden_dim", "n_residual_blocks", "activation", "leaky_slope", "learning_rate", "beta1",
                               "beta2", "epsilon", "epochs", "batch_size"},
                           "model.");
            auto merged = to_json(c.model);
            merged.update(m);
            c.model = mlp_config_from_json(merged);
        }
        if (j.contains("backtest")) {
            const auto& b = j["backtest"];
            reject_unknown(b, {"pa", "pb", "pc", "pd", "lot_size", "contract_multiplier", "exit_on_neutral",
                               "commission_rate", "slippage", "initial_capital"},
                           "backtest.");
            read(b, "pa", c.strategy.pa);
            read(b, "pb", c.strategy.pb);
            read(b, "pc", c.strategy.pc);
            read(b, "pd", c.strategy.pd);
            read(b, "lot_size", c.strategy.lot_size);
            read(b, "contract_multiplier", c.strategy.contract_multiplier);
            read(b, "exit_on_neutral", c.strategy.exit_on_neutral);
            read(b, "commission_rate", c.costs.commission_rate);
            read(b, "slippage", c.costs.slippage);
            read(b, "initial_capital", c.costs.initial_capital);
        }
        read(j, "seed", c.seed);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, std::string("config: ") + e.what());
    }
    return c;
}

nlohmann::json to_json(const PipelineConfig& c) {
    nlohmann::json j;
    j["input"] = {{"path", c.input_path.generic_string()},
                  {"period_minutes", c.input_period_minutes},
                  {"symbol", c.symbol},
                  {"schema",
                   {{"timestamp", c.schema.timestamp},
                    {"open", c.schema.open},
                    {"high", c.schema.high},
                    {"low", c.schema.low},
                    {"close", c.schema.close},
                    {"volume", c.schema.volume}}}};
    j["resample_minutes"] = c.resample_minutes;
    j["fracdiff"] = {{"d", c.d ? nlohmann::json(*c.d) : nlohmann::json("auto")},
                     {"tau", c.tau},
                     {"grid_step", c.d_grid_step},
                     {"log_prices", c.log_prices}};
    j["labeling"] = {{"h", c.labeling.h},
                     {"up", c.labeling.upfactor},
                     {"down", -c.labeling.lowerfactor},
                     {"vol_span", c.labeling.vol_span}};
    j["features"] = {{"indicator_set", c.indicator_set},
                     {"pca_components", c.dataset.n_components},
                     {"split", c.dataset.split_fraction},
                     {"split_mode", c.dataset.split == SplitMode::random ? "random" : "chronological"}};
    auto model = to_json(c.model);
    model.erase("input_dim");
    model.erase("n_classes");
    model.erase("seed");
    j["model"] = model;
    auto bt = to_json(c.strategy);
    bt.update(to_json(c.costs));
    j["backtest"] = bt;
    j["seed"] = c.seed;
    return j;
}

std::string config_hash(const PipelineConfig& cfg) { return sha256_hex(to_json(cfg).dump()); }

std::string_view to_string(Stage s) {
    switch (s) {
        case Stage::resample: return "resample";
        case Stage::fracdiff: return "fracdiff";
        case Stage::label: return "label";
        case Stage::featurize: return "featurize";
        case Stage::train: return "train";
        case Stage::predict: return "predict";
        case Stage::report: return "report";
        case Stage::backtest: return "backtest";
    }
    return "unknown";
}

StageError::StageError(Stage stage, const Error& cause)
    : Error(cause.code(), "stage '" + std::string(to_string(stage)) + "': " + cause.what(), cause.line()), stage_(stage) {}

namespace {

class RunWriter {
public:
    RunWriter(std::filesystem::path dir, std::string hash) : dir_(std::move(dir)), hash_(std::move(hash)) {}

    std::ofstream csv(Stage stage, const std::string& name) {
        auto out = open(stage, name);
        out << "# ffdlab stage=" << to_string(stage) << " config_hash=" << hash_ << '\n';
        return out;
    }

    void json(Stage stage, const std::string& name, nlohmann::json j) {
        j["config_hash"] = hash_;
        auto out = open(stage, name);
        out << j.dump(1) << '\n';
    }

    void text(Stage stage, const std::string& name, const std::string& body) {
        auto out = open(stage, name);
        out << "# ffdlab stage=" << to_string(stage) << " config_hash=" << hash_ << '\n' << body;
    }

    std::vector<StageArtifact>& stages() { return stages_; }
    const std::filesystem::path& dir() const { return dir_; }

private:
    std::ofstream open(Stage stage, const std::string& name) {
        const std::string sname(to_string(stage));
        if (stages_.empty() || stages_.back().stage != sname) stages_.push_back({sname, {}});
        stages_.back().files.push_back(name);
        std::ofstream out(dir_ / name, std::ios::binary);
        if (!out) throw Error(ErrorCode::Io, "cannot write " + (dir_ / name).string());
        out.precision(17);
        return out;
    }

    std::filesystem::path dir_;
    std::string hash_;
    std::vector<StageArtifact> stages_;
};

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& cfg, const std::filesystem::path& run_dir) {
    cfg.validate();
    std::filesystem::create_directories(run_dir);
    PipelineResult result;
    result.run_dir = run_dir;
    result.config_hash = config_hash(cfg);
    RunWriter w(run_dir, result.config_hash);

    nlohmann::json manifest;
    manifest["format"] = "ffdlab-run";
    manifest["version"] = 1;
    manifest["ffdlab_version"] = kVersion;
    manifest["dependencies"] = {
        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION)},
        {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) +
                              "." + std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
    manifest["config"] = to_json(cfg);
    manifest["config_hash"] = result.config_hash;
    manifest["seed"] = cfg.seed;
    manifest["seed_derivation"] = "splitmix64(seed + stage_index)";
    nlohmann::json stage_seeds;
    for (int s = 0; s <= static_cast<int>(Stage::backtest); ++s) {
        stage_seeds[std::string(to_string(static_cast<Stage>(s)))] = stage_seed(cfg.seed, static_cast<std::uint64_t>(s));
    }
    manifest["stage_seeds"] = stage_seeds;
    manifest["defaults"] = {{"resample_minutes", cfg.resample_minutes},
                            {"h", cfg.labeling.h},
                            {"up", cfg.labeling.upfactor},
                            {"down", -cfg.labeling.lowerfactor},
                            {"vol_span", cfg.labeling.vol_span},
                            {"pca_components", cfg.dataset.n_components},
                            {"split", cfg.dataset.split_fraction},
                            {"pa", cfg.strategy.pa},
                            {"pb", cfg.strategy.pb},
                            {"pc", cfg.strategy.pc},
                            {"pd", cfg.strategy.pd},
                            {"commission_rate", cfg.costs.commission_rate},
                            {"slippage", cfg.costs.slippage},
                            {"initial_capital", cfg.costs.initial_capital}};

    auto write_manifest = [&](const std::string& status) {
        nlohmann::json stages = nlohmann::json::array();
        for (const auto& st : w.stages()) {
            nlohmann::json files = nlohmann::json::array();
            for (const auto& f : st.files) files.push_back({{"path", f}, {"sha256", sha256_file(run_dir / f)}});
            stages.push_back({{"stage", st.stage}, {"files", files}});
        }
        manifest["stages"] = stages;
        manifest["status"] = status;
        std::ofstream out(run_dir / "manifest.json", std::ios::binary);
        out << manifest.dump(1) << '\n';
    };

    Stage current = Stage::resample;
    try {
        // resample
        const auto raw = load_csv(cfg.input_path, cfg.schema, cfg.input_period_minutes, cfg.symbol);
        const BarSeries bars = resample(raw, cfg.resample_minutes);
        {
            auto out = w.csv(current, "bars.csv");
            write_csv(out, bars);
        }

        // fracdiff
        current = Stage::fracdiff;
        auto y = bars.closes();
        if (cfg.log_prices) {
            for (double& v : y) v = std::log(v);
        }
        SweepOptions sweep_opts;
        sweep_opts.log_prices = false;
        double d = 0.0;
        if (cfg.d) {
            d = *cfg.d;
        } else {
            auto out = w.csv(current, "d_sweep.csv");
            out << "d,cutoff,adf_statistic,critical_95,adf_lags,correlation,passes\n";
            bool found = false;
            for (double cand : make_d_grid(0.0, 1.0, cfg.d_grid_step)) {
                const double grid[] = {cand};
                const auto row = d_sweep(y, grid, cfg.tau, sweep_opts).front();
                out << csv::format_double(row.d) << ',' << row.cutoff << ',' << csv::format_double(row.adf_statistic)
                    << ',' << csv::format_double(row.critical_95) << ',' << row.adf_lags << ','
                    << csv::format_double(row.correlation) << ',' << (row.passes ? 1 : 0) << '\n';
                if (row.passes) {
                    d = row.d;
                    found = true;
                    break;
                }
            }
            if (!found) throw Error(ErrorCode::NoPassingD, "no d in [0,1] rejects the unit root");
        }
        result.chosen_d = d;
        const auto weights = generate_weights(d, cfg.tau);
        const auto ffd = ffd_transform(y, weights);
        const auto adf = adf_test(ffd.values);
        manifest["fracdiff"] = {{"mode", cfg.d ? "fixed" : "auto"},
                                {"chosen_d", d},
                                {"tau", cfg.tau},
                                {"cutoff", weights.cutoff()},
                                {"adf_statistic", adf.statistic},
                                {"adf_critical_95", adf.critical_95}};
        {
            auto out = w.csv(current, "fracdiff.csv");
            out << "timestamp,ffd_close\n";
            for (std::size_t i = 0; i < ffd.values.size(); ++i) {
                out << bars.bars[ffd.start_index + i].timestamp_ms << ',' << csv::format_double(ffd.values[i]) << '\n';
            }
        }

        // label
        current = Stage::label;
        const auto vol = ema_volatility(bars, cfg.labeling.vol_span);
        const auto labels = triple_barrier_labels(bars, cfg.labeling, vol);
        {
            auto out = w.csv(current, "labels.csv");
            write_events_csv(out, bars, labels);
        }

        // featurize
        current = Stage::featurize;
        const auto features = compute_indicators(bars, ffd);
        DatasetOptions dopts = cfg.dataset;
        dopts.seed = stage_seed(cfg.seed, static_cast<std::uint64_t>(Stage::featurize));
        const Dataset ds = assemble_dataset(features, labels.events, dopts);
        {
            auto out = w.csv(current, "dataset.csv");
            write_dataset_csv(out, ds, bars.timestamps());
        }
        w.json(current, "preprocessing.json", {{"normalization", to_json(ds.normalization)}, {"pca", to_json(ds.pca)}});

        // train
        current = Stage::train;
        MlpConfig mcfg = cfg.model;
        mcfg.input_dim = ds.features.cols();
        mcfg.seed = stage_seed(cfg.seed, static_cast<std::uint64_t>(Stage::train));
        const MlpModel model = train(ds, mcfg);
        w.json(current, "model.json", to_json(model));

        // predict
        current = Stage::predict;
        const auto pred = predict(model, ds.test_x());
        const auto truth = ds.test_y();
        {
            auto out = w.csv(current, "predictions.csv");
            out << "bar_index,timestamp,label,predicted\n";
            for (std::size_t i = 0; i < pred.size(); ++i) {
                const std::size_t b = ds.features.bar_index[ds.split_index + i];
                out << b << ',' << bars.bars[b].timestamp_ms << ',' << truth[i] << ',' << pred[i] << '\n';
            }
        }

        // report
        current = Stage::report;
        result.report = classification_report(truth, pred);
        auto rep_json = to_json(result.report);
        rep_json["text"] = format_report(result.report);
        w.json(current, "report.json", rep_json);

        // backtest
        current = Stage::backtest;
        std::size_t first = bars.size();
        for (std::size_t i = ds.split_index; i < ds.rows(); ++i) first = std::min(first, ds.features.bar_index[i]);
        BarSeries span;
        span.symbol = bars.symbol;
        span.period_minutes = bars.period_minutes;
        span.bars.assign(bars.bars.begin() + static_cast<std::ptrdiff_t>(first), bars.bars.end());
        VolatilityEstimate span_vol;
        span_vol.span = vol.span;
        span_vol.values.assign(vol.values.begin() + static_cast<std::ptrdiff_t>(first), vol.values.end());
        std::vector<int> signal(span.size(), 1);
        for (std::size_t i = 0; i < pred.size(); ++i) signal[ds.features.bar_index[ds.split_index + i] - first] = pred[i];
        result.backtest = run_backtest(span, signal, span_vol, cfg.strategy, cfg.costs);
        auto bt_json = to_json(result.backtest);
        bt_json["strategy"] = to_json(cfg.strategy);
        bt_json["costs"] = to_json(cfg.costs);
        bt_json["span"] = {{"first_timestamp", span.bars.front().timestamp_ms},
                           {"last_timestamp", span.bars.back().timestamp_ms},
                           {"bars", span.size()}};
        w.json(current, "backtest.json", bt_json);
        {
            auto out = w.csv(current, "trades.csv");
            write_trades_csv(out, span, result.backtest);
        }
        {
            auto out = w.csv(current, "equity.csv");
            write_equity_csv(out, span, result.backtest);
        }

        manifest["counts"] = {{"input_bars", raw.size()},
                              {"bars", bars.size()},
                              {"events", labels.events.size()},
                              {"train_rows", ds.split_index},
                              {"test_rows", ds.rows() - ds.split_index},
                              {"trades", result.backtest.trades.size()}};
    } catch (const Error& e) {
        manifest["failed_stage"] = to_string(current);
        manifest["error"] = e.what();
        write_manifest("failed");
        throw StageError(current, e);
    }
    write_manifest("ok");
    result.stages = w.stages();
    result.manifest = manifest;
    return result;
}

}  // namespace ffdlab
