// ffdlab command-line front end. Each verb reads and writes CSV/JSON files so the
// stages can be chained by hand; `run` executes the whole pipeline.

#include "ffdlab/backtest.hpp"
#include "ffdlab/csv.hpp"
#include "ffdlab/error.hpp"
#include "ffdlab/features.hpp"
#include "ffdlab/fracdiff.hpp"
#include "ffdlab/ga.hpp"
#include "ffdlab/labeling.hpp"
#include "ffdlab/market_data.hpp"
#include "ffdlab/model.hpp"
#include "ffdlab/pipeline.hpp"
#include "ffdlab/stationarity.hpp"
#include "ffdlab/synthetic.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

using namespace ffdlab;
namespace fs = std::filesystem;

namespace {

struct InputOptions {
    std::string path;
    std::string schema;
    int period = 1;

    void add(CLI::App* app) {
        app->add_option("--input,-i", path, "OHLCV CSV file")->required()->check(CLI::ExistingFile);
        app->add_option("--schema", schema, "JSON file mapping timestamp/open/high/low/close/volume to column names");
        app->add_option("--period", period, "Bar period of the input in minutes")->capture_default_str();
    }

    BarSeries load() const {
        const CsvSchema s = schema.empty() ? CsvSchema{} : CsvSchema::from_json_file(schema);
        return load_csv(path, s, period);
    }
};

std::ofstream open_out(const std::string& path) {
    if (const auto parent = fs::path(path).parent_path(); !parent.empty()) fs::create_directories(parent);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
    return out;
}

void write_json(const std::string& path, const nlohmann::json& j) { open_out(path) << j.dump(1) << '\n'; }

std::vector<double> column_values(const BarSeries& s, const std::string& column, bool use_log) {
    std::vector<double> y;
    for (const auto& b : s.bars) {
        if (column == "close") y.push_back(b.close);
        else if (column == "open") y.push_back(b.open);
        else if (column == "high") y.push_back(b.high);
        else if (column == "low") y.push_back(b.low);
        else throw Error(ErrorCode::InvalidArgument, "--column must be open, high, low or close");
    }
    if (use_log) {
        for (double& v : y) v = std::log(v);
    }
    return y;
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    for (const auto& f : csv::split_line(text)) out.push_back(csv::parse_double(f, 0));
    return out;
}

// "lo:hi" or four comma-separated "lo:hi" ranges.
std::vector<ParamBounds> parse_bounds(const std::string& text) {
    std::vector<ParamBounds> out;
    for (const auto& f : csv::split_line(text)) {
        const auto colon = f.find(':');
        if (colon == std::string::npos) throw Error(ErrorCode::InvalidBounds, "bounds must look like lo:hi");
        out.push_back({csv::parse_double(f.substr(0, colon), 0), csv::parse_double(f.substr(colon + 1), 0)});
    }
    return out;
}

// bar timestamp -> class label in {0,1,2} read from a predictions CSV.
std::map<std::int64_t, int> read_predictions(const std::string& path) {
    const auto table = csv::read_file(path);
    const auto c_ts = table.require_column("timestamp");
    const auto c_pred = table.require_column("predicted");
    std::map<std::int64_t, int> out;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        out[csv::parse_int(table.rows[r][c_ts], r + 1)] = static_cast<int>(csv::parse_int(table.rows[r][c_pred], r + 1));
    }
    return out;
}

struct SignalSpan {
    BarSeries bars;
    VolatilityEstimate vol;
    std::vector<int> labels;
};

// Restricts the series to the bars from the first prediction onward; bars
// without a prediction carry the neutral label.
SignalSpan make_span(const BarSeries& bars, const std::map<std::int64_t, int>& predictions, int vol_span) {
    if (predictions.empty()) throw Error(ErrorCode::EmptyInput, "no predictions");
    const auto vol = ema_volatility(bars, vol_span);
    std::size_t first = bars.size();
    for (std::size_t t = 0; t < bars.size(); ++t) {
        if (predictions.count(bars.bars[t].timestamp_ms)) {
            first = t;
            break;
        }
    }
    if (first == bars.size()) throw Error(ErrorCode::AlignmentMismatch, "no prediction timestamp matches a bar");
    SignalSpan s;
    s.bars.symbol = bars.symbol;
    s.bars.period_minutes = bars.period_minutes;
    s.bars.bars.assign(bars.bars.begin() + static_cast<std::ptrdiff_t>(first), bars.bars.end());
    s.vol.span = vol.span;
    s.vol.values.assign(vol.values.begin() + static_cast<std::ptrdiff_t>(first), vol.values.end());
    s.labels.assign(s.bars.size(), 1);
    std::size_t matched = 0;
    for (std::size_t t = 0; t < s.bars.size(); ++t) {
        if (auto it = predictions.find(s.bars.bars[t].timestamp_ms); it != predictions.end()) {
            s.labels[t] = it->second;
            ++matched;
        }
    }
    if (matched != predictions.size()) throw Error(ErrorCode::AlignmentMismatch, "some prediction timestamps match no bar");
    return s;
}

struct BacktestOptions {
    std::string params = "5,2,5,2";
    double capital = 200000.0;
    double commission = 0.00005;
    double slippage = 1.0;
    double multiplier = 10.0;
    double lots = 1.0;
    int vol_span = 20;
    bool exit_on_neutral = false;

    void add(CLI::App* app) {
        app->add_option("--params", params, "pa,pb,pc,pd")->capture_default_str();
        app->add_option("--capital", capital)->capture_default_str();
        app->add_option("--commission", commission, "Commission rate per side")->capture_default_str();
        app->add_option("--slippage", slippage, "Price points per side")->capture_default_str();
        app->add_option("--multiplier", multiplier, "Currency per point per contract")->capture_default_str();
        app->add_option("--lots", lots, "Contracts per entry")->capture_default_str();
        app->add_option("--vol-span", vol_span, "EMA volatility span")->capture_default_str();
        app->add_flag("--exit-on-neutral", exit_on_neutral, "Close positions after a neutral prediction");
    }

    StrategyParams strategy() const {
        StrategyParams p;
        p = p.with_multipliers(parse_list(params));
        p.contract_multiplier = multiplier;
        p.lot_size = lots;
        p.exit_on_neutral = exit_on_neutral;
        return p;
    }
    CostModel costs() const { return {commission, slippage, capital}; }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ffdlab: fractional differentiation, triple-barrier labeling, MLP classification and backtesting"};
    app.set_help_flag("--help", "Print this help message and exit");
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a seeded synthetic OHLCV series");
    std::string synth_kind = "gbm", synth_out;
    std::size_t synth_len = 10000;
    std::uint64_t synth_seed = 0;
    SyntheticParams sp;
    synth->add_option("--kind", synth_kind, "random_walk, gbm or ar1")->capture_default_str();
    synth->add_option("--length", synth_len)->capture_default_str();
    synth->add_option("--seed", synth_seed)->capture_default_str();
    synth->add_option("--start-price", sp.start_price)->capture_default_str();
    synth->add_option("--drift", sp.drift)->capture_default_str();
    synth->add_option("--vol", sp.volatility, "Per-bar volatility")->capture_default_str();
    synth->add_option("--phi", sp.ar_coefficient, "AR(1) coefficient")->capture_default_str();
    synth->add_option("--period", sp.period_minutes)->capture_default_str();
    synth->add_option("--out,-o", synth_out)->required();

    // resample
    auto* res = app.add_subcommand("resample", "Aggregate bars into N-minute bars");
    InputOptions res_in;
    res_in.add(res);
    int res_target = 10;
    std::string res_out;
    res->add_option("--target", res_target, "Target period in minutes")->capture_default_str();
    res->add_option("--out,-o", res_out)->required();

    // fracdiff
    auto* fd = app.add_subcommand("fracdiff", "Fixed-window fractional differentiation of closes");
    InputOptions fd_in;
    fd_in.add(fd);
    double fd_d = 0.4, fd_tau = kDefaultTau;
    bool fd_raw = false;
    std::string fd_out, fd_weights;
    fd->add_option("--d", fd_d)->capture_default_str();
    fd->add_option("--tau", fd_tau)->capture_default_str();
    bool fd_log = false;
    std::string fd_column = "close";
    fd->add_flag("--log", fd_log, "Difference log prices (the default)");
    fd->add_flag("--raw-prices", fd_raw, "Difference prices instead of log prices")->excludes("--log");
    fd->add_option("--column", fd_column, "open, high, low or close")->capture_default_str();
    fd->add_option("--out,-o", fd_out)->required();
    fd->add_option("--weights-out", fd_weights, "Also write the weight vector");

    // adf-sweep
    auto* sw = app.add_subcommand("adf-sweep", "ADF statistic and memory correlation across d");
    InputOptions sw_in;
    sw_in.add(sw);
    double sw_tau = kDefaultTau, sw_step = 0.1;
    bool sw_raw = false;
    std::string sw_out, sw_acf;
    std::size_t sw_lags = 40;
    sw->add_option("--tau", sw_tau)->capture_default_str();
    std::string sw_grid, sw_column = "close";
    bool sw_log = false;
    sw->add_option("--step", sw_step, "Grid step over [0,1]")->capture_default_str();
    sw->add_option("--grid", sw_grid, "start:stop:step (overrides --step)");
    sw->add_option("--column", sw_column, "open, high, low or close")->capture_default_str();
    sw->add_flag("--log", sw_log, "Test log prices (the default)");
    sw->add_flag("--raw-prices", sw_raw)->excludes("--log");
    sw->add_option("--out,-o", sw_out)->required();
    sw->add_option("--acf-out", sw_acf, "Also write ACF/PACF of the series");
    sw->add_option("--acf-lags", sw_lags)->capture_default_str();

    // label
    auto* lab = app.add_subcommand("label", "Triple-barrier (or fixed-horizon) labels");
    InputOptions lab_in;
    lab_in.add(lab);
    TripleBarrierConfig tb;
    double lab_down = 3.0;
    std::string lab_method = "triple-barrier", lab_out;
    double lab_threshold = 0.0;
    lab->add_option("--h,--horizon", tb.h, "Vertical barrier in bars")->capture_default_str();
    lab->add_option("--up", tb.upfactor)->capture_default_str();
    lab->add_option("--down", lab_down, "Lower barrier factor (positive)")->capture_default_str();
    lab->add_option("--vol-span", tb.vol_span)->capture_default_str();
    lab->add_option("--method", lab_method, "triple-barrier or fixed-horizon")->capture_default_str();
    lab->add_option("--threshold", lab_threshold, "Fixed-horizon return threshold")->capture_default_str();
    lab->add_option("--out,-o", lab_out)->required();

    // featurize
    auto* feat = app.add_subcommand("featurize", "Indicators, normalization, PCA and split");
    InputOptions feat_in;
    feat_in.add(feat);
    std::string feat_labels, feat_out, feat_params, feat_split = "chronological";
    double feat_d = 0.4, feat_tau = kDefaultTau;
    DatasetOptions dopts;
    feat->add_option("--labels", feat_labels, "Events CSV from `label`")->required()->check(CLI::ExistingFile);
    feat->add_option("--d", feat_d)->capture_default_str();
    feat->add_option("--tau", feat_tau)->capture_default_str();
    std::string feat_indicators = "default16";
    feat->add_option("--indicators", feat_indicators, "Indicator set")->capture_default_str()->check(CLI::IsMember({"default16"}));
    feat->add_option("--pca", dopts.n_components)->capture_default_str();
    feat->add_option("--split", dopts.split_fraction)->capture_default_str();
    feat->add_option("--split-mode", feat_split, "chronological or random")->capture_default_str();
    feat->add_option("--seed", dopts.seed)->capture_default_str();
    feat->add_option("--out,-o", feat_out)->required();
    feat->add_option("--params-out", feat_params, "Normalization and PCA parameters (JSON)");

    // train
    auto* tr = app.add_subcommand("train", "Train the residual MLP on a dataset CSV");
    std::string tr_data, tr_out, tr_act = "relu";
    MlpConfig mcfg;
    tr->add_option("--dataset", tr_data)->required()->check(CLI::ExistingFile);
    tr->add_option("--epochs", mcfg.epochs)->capture_default_str();
    tr->add_option("--lr", mcfg.learning_rate)->capture_default_str();
    tr->add_option("--batch", mcfg.batch_size)->capture_default_str();
    tr->add_option("--hidden", mcfg.hidden_dim)->capture_default_str();
    tr->add_option("--blocks", mcfg.n_residual_blocks)->capture_default_str();
    tr->add_option("--activation", tr_act, "relu or leaky_relu")->capture_default_str();
    tr->add_option("--seed", mcfg.seed)->capture_default_str();
    tr->add_option("--out,-o", tr_out)->required();

    // predict
    auto* pr = app.add_subcommand("predict", "Predict classes for dataset rows");
    std::string pr_model, pr_data, pr_out, pr_report;
    bool pr_all = false;
    pr->add_option("--model", pr_model)->required()->check(CLI::ExistingFile);
    pr->add_option("--dataset", pr_data)->required()->check(CLI::ExistingFile);
    pr->add_flag("--all", pr_all, "Predict train rows too");
    pr->add_option("--out,-o", pr_out)->required();
    pr->add_option("--report", pr_report, "Classification report JSON");

    // backtest
    auto* bt = app.add_subcommand("backtest", "Backtest predictions on bars");
    InputOptions bt_in;
    bt_in.add(bt);
    std::string bt_pred, bt_dir;
    BacktestOptions bto;
    bt->add_option("--predictions", bt_pred)->required()->check(CLI::ExistingFile);
    bto.add(bt);
    bt->add_option("--out-dir", bt_dir)->required();

    // optimize
    auto* op = app.add_subcommand("optimize", "Genetic search over the TP/SL multipliers");
    InputOptions op_in;
    op_in.add(op);
    std::string op_pred, op_bounds = "0:10", op_out, op_objective = "sharpe";
    BacktestOptions opo;
    GaConfig ga;
    ga.seed = 7;
    op->add_option("--predictions", op_pred)->required()->check(CLI::ExistingFile);
    opo.add(op);
    op->add_option("--bounds", op_bounds, "lo:hi for all four, or four comma-separated ranges")->capture_default_str();
    op->add_option("--pop", ga.population)->capture_default_str();
    op->add_option("--gens", ga.generations)->capture_default_str();
    op->add_option("--elite", ga.elite_count)->capture_default_str();
    op->add_option("--crossover", ga.crossover_rate)->capture_default_str();
    op->add_option("--mutation", ga.mutation_rate)->capture_default_str();
    op->add_option("--seed", ga.seed)->capture_default_str();
    op->add_option("--objective", op_objective, "sharpe or total_return")->capture_default_str();
    op->add_option("--out,-o", op_out)->required();

    // run
    auto* run = app.add_subcommand("run", "Run the full pipeline from a JSON config");
    std::string run_cfg, run_dir, run_input, run_d;
    std::optional<std::uint64_t> run_seed;
    std::optional<int> run_period, run_resample;
    run->add_option("--config,-c", run_cfg, "JSON config (flags override it)")->check(CLI::ExistingFile);
    run->add_option("--out,-o", run_dir, "Run directory")->required();
    run->add_option("--input,-i", run_input);
    run->add_option("--period", run_period, "Input bar period in minutes");
    run->add_option("--resample", run_resample, "Target bar period in minutes");
    run->add_option("--d", run_d, "Fractional order or \"auto\"");
    run->add_option("--seed", run_seed);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*synth) {
            const auto s = generate_synthetic(parse_synthetic_kind(synth_kind), synth_len, synth_seed, sp);
            auto out = open_out(synth_out);
            write_csv(out, s);
            std::cout << "wrote " << s.size() << " bars to " << synth_out << '\n';
        } else if (*res) {
            const auto s = resample(res_in.load(), res_target);
            auto out = open_out(res_out);
            write_csv(out, s);
            std::cout << "wrote " << s.size() << " bars to " << res_out << '\n';
        } else if (*fd) {
            const auto s = fd_in.load();
            const auto w = generate_weights(fd_d, fd_tau);
            const auto y = column_values(s, fd_column, !fd_raw);
            const auto f = ffd_transform(y, w);
            auto out = open_out(fd_out);
            out << "timestamp,value,ffd\n";
            for (std::size_t i = 0; i < f.values.size(); ++i) {
                const std::size_t t = f.start_index + i;
                out << s.bars[t].timestamp_ms << ',' << csv::format_double(y[t]) << ','
                    << csv::format_double(f.values[i]) << '\n';
            }
            if (!fd_weights.empty()) {
                auto wo = open_out(fd_weights);
                write_weights_csv(wo, w);
            }
            const auto adf = adf_test(f.values);
            std::cout << "d=" << fd_d << " window=" << w.weights.size() << " adf=" << adf.statistic
                      << " critical_95=" << adf.critical_95 << " correlation=" << memory_correlation(y, f) << '\n';
        } else if (*sw) {
            const auto s = sw_in.load();
            SweepOptions so;
            so.log_prices = false;
            std::vector<double> grid;
            if (sw_grid.empty()) {
                grid = make_d_grid(0.0, 1.0, sw_step);
            } else {
                std::string spec = sw_grid;
                std::replace(spec.begin(), spec.end(), ':', ',');
                const auto g = parse_list(spec);
                if (g.size() != 3) throw Error(ErrorCode::InvalidArgument, "--grid must look like start:stop:step");
                grid = make_d_grid(g[0], g[1], g[2]);
            }
            const auto values = column_values(s, sw_column, !sw_raw);
            const auto rows = d_sweep(values, grid, sw_tau, so);
            auto out = open_out(sw_out);
            out << "d,cutoff,adf_statistic,critical_95,adf_lags,correlation,passes\n";
            std::optional<double> dmin;
            for (const auto& r : rows) {
                out << csv::format_double(r.d) << ',' << r.cutoff << ',' << csv::format_double(r.adf_statistic) << ','
                    << csv::format_double(r.critical_95) << ',' << r.adf_lags << ',' << csv::format_double(r.correlation)
                    << ',' << (r.passes ? 1 : 0) << '\n';
                if (r.passes && !dmin) dmin = r.d;
            }
            if (!sw_acf.empty()) {
                const auto [acf, pacf] = acf_pacf(values, sw_lags);
                auto ao = open_out(sw_acf);
                ao << "lag,acf,pacf\n";
                for (std::size_t k = 0; k < acf.size(); ++k) {
                    ao << k << ',' << csv::format_double(acf[k]) << ',' << csv::format_double(pacf[k]) << '\n';
                }
            }
            if (dmin) std::cout << "minimal d = " << *dmin << '\n';
            else std::cout << "no d in the grid rejects the unit root\n";
        } else if (*lab) {
            const auto s = lab_in.load();
            auto out = open_out(lab_out);
            if (lab_method == "fixed-horizon" || lab_method == "fixed") {
                const auto l = fixed_horizon_labels(s, tb.h, lab_threshold);
                out << "entry_timestamp,label\n";
                for (std::size_t t = 0; t < l.size(); ++t) out << s.bars[t].timestamp_ms << ',' << l[t] << '\n';
                std::cout << "wrote " << l.size() << " fixed-horizon labels\n";
            } else if (lab_method == "triple-barrier" || lab_method == "triple") {
                tb.lowerfactor = -lab_down;
                const auto r = triple_barrier_labels(s, tb);
                write_events_csv(out, s, r);
                std::cout << "wrote " << r.events.size() << " events (" << r.skipped_zero_volatility
                          << " skipped for zero volatility, " << r.ambiguous_ties << " ambiguous)\n";
            } else {
                throw Error(ErrorCode::InvalidArgument, "--method must be triple-barrier or fixed-horizon");
            }
        } else if (*feat) {
            const auto s = feat_in.load();
            if (feat_split == "random") dopts.split = SplitMode::random;
            else if (feat_split != "chronological") throw Error(ErrorCode::InvalidArgument, "--split-mode must be chronological or random");
            const auto table = csv::read_file(feat_labels);
            const auto c_ts = table.require_column("entry_timestamp");
            const auto c_label = table.require_column("label");
            std::map<std::int64_t, std::size_t> index;
            for (std::size_t t = 0; t < s.size(); ++t) index[s.bars[t].timestamp_ms] = t;
            std::vector<LabelEvent> events;
            for (std::size_t r = 0; r < table.rows.size(); ++r) {
                const auto ts = csv::parse_int(table.rows[r][c_ts], r + 1);
                const auto it = index.find(ts);
                if (it == index.end()) throw Error(ErrorCode::AlignmentMismatch, "label timestamp matches no bar", r + 1);
                LabelEvent ev;
                ev.entry_index = it->second;
                ev.label = static_cast<int>(csv::parse_int(table.rows[r][c_label], r + 1));
                events.push_back(ev);
            }
            const auto ffd = ffd_transform(column_values(s, "close", true), generate_weights(feat_d, feat_tau));
            const auto fm = compute_indicators(s, ffd);
            const auto ds = assemble_dataset(fm, events, dopts);
            auto out = open_out(feat_out);
            write_dataset_csv(out, ds, s.timestamps());
            if (!feat_params.empty()) {
                write_json(feat_params, {{"normalization", to_json(ds.normalization)}, {"pca", to_json(ds.pca)}});
            }
            std::cout << "dataset: " << ds.rows() << " rows (" << ds.split_index << " train), "
                      << ds.features.cols() << " components\n";
        } else if (*tr) {
            std::ifstream in(tr_data);
            const auto t = read_dataset_csv(in);
            std::vector<Eigen::Index> rows;
            std::vector<int> y;
            for (std::size_t r = 0; r < t.labels.size(); ++r) {
                if (t.is_train[r]) {
                    rows.push_back(static_cast<Eigen::Index>(r));
                    y.push_back(t.labels[r]);
                }
            }
            Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), t.values.cols());
            for (std::size_t i = 0; i < rows.size(); ++i) x.row(static_cast<Eigen::Index>(i)) = t.values.row(rows[i]);
            mcfg.input_dim = static_cast<std::size_t>(t.values.cols());
            if (tr_act == "leaky_relu") mcfg.activation = Activation::leaky_relu;
            else if (tr_act != "relu") throw Error(ErrorCode::InvalidArgument, "--activation must be relu or leaky_relu");
            const auto model = train(x, y, mcfg);
            save_model(model, tr_out);
            const auto pred = predict(model, x);
            std::size_t hits = 0;
            for (std::size_t i = 0; i < y.size(); ++i) hits += pred[i] == y[i];
            std::cout << "final loss " << model.loss_history.back() << ", train accuracy "
                      << static_cast<double>(hits) / static_cast<double>(y.size()) << '\n';
        } else if (*pr) {
            const auto model = load_model(pr_model);
            std::ifstream in(pr_data);
            const auto t = read_dataset_csv(in);
            std::vector<std::size_t> rows;
            for (std::size_t r = 0; r < t.labels.size(); ++r) {
                if (pr_all || !t.is_train[r]) rows.push_back(r);
            }
            Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), t.values.cols());
            std::vector<int> truth;
            for (std::size_t i = 0; i < rows.size(); ++i) {
                x.row(static_cast<Eigen::Index>(i)) = t.values.row(static_cast<Eigen::Index>(rows[i]));
                truth.push_back(t.labels[rows[i]]);
            }
            const auto pred = predict(model, x);
            auto out = open_out(pr_out);
            out << "bar_index,timestamp,label,predicted\n";
            for (std::size_t i = 0; i < rows.size(); ++i) {
                out << t.bar_index[rows[i]] << ',' << t.timestamps[rows[i]] << ',' << truth[i] << ',' << pred[i] << '\n';
            }
            const auto rep = classification_report(truth, pred);
            std::cout << format_report(rep);
            if (!pr_report.empty()) write_json(pr_report, to_json(rep));
        } else if (*bt) {
            const auto span = make_span(bt_in.load(), read_predictions(bt_pred), bto.vol_span);
            const auto rep = run_backtest(span.bars, span.labels, span.vol, bto.strategy(), bto.costs());
            fs::create_directories(bt_dir);
            auto j = to_json(rep);
            j["strategy"] = to_json(bto.strategy());
            j["costs"] = to_json(bto.costs());
            write_json((fs::path(bt_dir) / "backtest.json").string(), j);
            auto trades = open_out((fs::path(bt_dir) / "trades.csv").string());
            write_trades_csv(trades, span.bars, rep);
            auto equity = open_out((fs::path(bt_dir) / "equity.csv").string());
            write_equity_csv(equity, span.bars, rep);
            std::cout << j.dump(1) << '\n';
        } else if (*op) {
            const auto span = make_span(op_in.load(), read_predictions(op_pred), opo.vol_span);
            auto bounds = parse_bounds(op_bounds);
            // Multipliers must be positive, so a zero lower bound is raised to 1e-3.
            for (auto& b : bounds) b.lower = std::max(b.lower, 1e-3);
            BacktestObjective objective;
            if (op_objective == "sharpe") objective = BacktestObjective::sharpe;
            else if (op_objective == "total_return") objective = BacktestObjective::total_return;
            else throw Error(ErrorCode::InvalidArgument, "--objective must be sharpe or total_return");
            const auto costs = opo.costs();
            const auto r = ga_optimize(
                [&](const StrategyParams& p) {
                    return backtest_fitness(run_backtest(span.bars, span.labels, span.vol, p, costs), objective);
                },
                bounds, ga, opo.strategy());
            nlohmann::json j = {{"best_params", to_json(r.best_params)},
                                {"best_fitness", r.best_fitness},
                                {"objective", op_objective},
                                {"history", r.history},
                                {"population", ga.population},
                                {"generations", ga.generations},
                                {"seed", ga.seed}};
            write_json(op_out, j);
            std::cout << "best pa,pb,pc,pd = " << r.best_params.pa << ',' << r.best_params.pb << ','
                      << r.best_params.pc << ',' << r.best_params.pd << " fitness " << r.best_fitness << '\n';
        } else if (*run) {
            nlohmann::json j = nlohmann::json::object();
            if (!run_cfg.empty()) {
                std::ifstream in(run_cfg);
                j = nlohmann::json::parse(in);
            }
            if (!run_input.empty()) j["input"]["path"] = run_input;
            if (run_period) j["input"]["period_minutes"] = *run_period;
            if (run_resample) j["resample_minutes"] = *run_resample;
            if (!run_d.empty()) {
                j["fracdiff"]["d"] = run_d == "auto" ? nlohmann::json("auto") : nlohmann::json(csv::parse_double(run_d, 0));
            }
            if (run_seed) j["seed"] = *run_seed;
            const auto cfg = pipeline_config_from_json(j);
            const auto result = run_pipeline(cfg, run_dir);
            std::cout << "run complete: d=" << result.chosen_d << " config_hash=" << result.config_hash << '\n'
                      << format_report(result.report) << to_json(result.backtest).dump(1) << '\n';
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
