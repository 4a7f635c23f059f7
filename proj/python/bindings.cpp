#include "ffdlab/backtest.hpp"
#include "ffdlab/error.hpp"
#include "ffdlab/fracdiff.hpp"
#include "ffdlab/ga.hpp"
#include "ffdlab/labeling.hpp"
#include "ffdlab/market_data.hpp"
#include "ffdlab/model.hpp"
#include "ffdlab/pipeline.hpp"
#include "ffdlab/stationarity.hpp"
#include "ffdlab/synthetic.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace ffdlab;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<double> to_vec(const Array& a) { return {a.data(), a.data() + a.size()}; }

BarSeries make_series(const py::array_t<std::int64_t>& ts, const Array& open, const Array& high, const Array& low,
                      const Array& close, const Array& volume, int period_minutes) {
    const auto n = static_cast<std::size_t>(ts.size());
    if (open.size() != ts.size() || high.size() != ts.size() || low.size() != ts.size() || close.size() != ts.size() ||
        volume.size() != ts.size()) {
        throw Error(ErrorCode::LengthMismatch, "OHLCV arrays differ in length");
    }
    BarSeries s;
    s.period_minutes = period_minutes;
    for (std::size_t i = 0; i < n; ++i) {
        s.bars.push_back({ts.at(i), open.at(i), high.at(i), low.at(i), close.at(i), volume.at(i)});
    }
    validate(s);
    return s;
}

py::dict series_dict(const BarSeries& s) {
    std::vector<std::int64_t> ts;
    std::vector<double> o, h, l, c, v;
    for (const auto& b : s.bars) {
        ts.push_back(b.timestamp_ms);
        o.push_back(b.open);
        h.push_back(b.high);
        l.push_back(b.low);
        c.push_back(b.close);
        v.push_back(b.volume);
    }
    py::dict d;
    d["timestamp"] = py::array(py::cast(ts));
    d["open"] = py::array(py::cast(o));
    d["high"] = py::array(py::cast(h));
    d["low"] = py::array(py::cast(l));
    d["close"] = py::array(py::cast(c));
    d["volume"] = py::array(py::cast(v));
    d["period_minutes"] = s.period_minutes;
    return d;
}

}  // namespace

PYBIND11_MODULE(_ffdlab, m) {
    m.doc() = "Bindings for the ffdlab C++ core";
    m.attr("__version__") = std::string(kVersion);

    static py::exception<Error> exc(m, "FfdlabError", PyExc_RuntimeError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object err = exc;
            PyErr_SetObject(err.ptr(), py::make_tuple(std::string(to_string(e.code())), e.what()).ptr());
        }
    });

    m.def("generate_weights",
          [](double d, double tau) { return generate_weights(d, tau).weights; },
          py::arg("d"), py::arg("tau") = kDefaultTau);

    m.def(
        "ffd_transform",
        [](const Array& x, double d, double tau) {
            const auto v = to_vec(x);
            const auto f = ffd_transform(v, generate_weights(d, tau));
            return py::make_tuple(f.start_index, py::array(py::cast(f.values)));
        },
        py::arg("series"), py::arg("d"), py::arg("tau") = kDefaultTau,
        "Returns (start_index, values); values[i] belongs to series index start_index + i.");

    m.def(
        "adf_test",
        [](const Array& x, std::optional<std::size_t> max_lags) {
            const auto r = adf_test(to_vec(x), max_lags);
            py::dict d;
            d["statistic"] = r.statistic;
            d["lags"] = r.lags;
            d["n_obs"] = r.n_obs;
            d["critical_95"] = r.critical_95;
            d["reject_unit_root"] = r.reject_unit_root;
            return d;
        },
        py::arg("series"), py::arg("max_lags") = py::none());

    m.def(
        "d_sweep",
        [](const Array& x, std::vector<double> grid, double tau, bool log_prices) {
            SweepOptions o;
            o.log_prices = log_prices;
            py::list rows;
            for (const auto& r : d_sweep(to_vec(x), grid, tau, o)) {
                py::dict d;
                d["d"] = r.d;
                d["adf_statistic"] = r.adf_statistic;
                d["correlation"] = r.correlation;
                d["passes"] = r.passes;
                rows.append(d);
            }
            return rows;
        },
        py::arg("series"), py::arg("grid"), py::arg("tau") = kDefaultTau, py::arg("log_prices") = true);

    m.def(
        "minimal_d",
        [](const Array& x, double tau, double step, bool log_prices) {
            SweepOptions o;
            o.log_prices = log_prices;
            return minimal_d(to_vec(x), tau, step, o);
        },
        py::arg("series"), py::arg("tau") = kDefaultTau, py::arg("step") = 0.1, py::arg("log_prices") = true);

    m.def(
        "ema_volatility", [](const Array& closes, int span) { return ema_volatility(to_vec(closes), span).values; },
        py::arg("closes"), py::arg("span") = 20);

    m.def(
        "generate_synthetic",
        [](const std::string& kind, std::size_t length, std::uint64_t seed, double volatility, double drift,
           double ar_coefficient, double start_price) {
            SyntheticParams p;
            p.volatility = volatility;
            p.drift = drift;
            p.ar_coefficient = ar_coefficient;
            p.start_price = start_price;
            return series_dict(generate_synthetic(parse_synthetic_kind(kind), length, seed, p));
        },
        py::arg("kind"), py::arg("length"), py::arg("seed"), py::arg("volatility") = 1e-3, py::arg("drift") = 0.0,
        py::arg("ar_coefficient") = 0.8, py::arg("start_price") = 1000.0);

    m.def(
        "triple_barrier_labels",
        [](const py::array_t<std::int64_t>& ts, const Array& open, const Array& high, const Array& low,
           const Array& close, const Array& volume, int h, double up, double down, int vol_span) {
            const auto s = make_series(ts, open, high, low, close, volume, 1);
            TripleBarrierConfig cfg;
            cfg.h = h;
            cfg.upfactor = up;
            cfg.lowerfactor = -down;
            cfg.vol_span = vol_span;
            const auto r = triple_barrier_labels(s, cfg);
            std::vector<std::size_t> entry, touch;
            std::vector<int> label;
            for (const auto& e : r.events) {
                entry.push_back(e.entry_index);
                touch.push_back(e.touch_index);
                label.push_back(e.label);
            }
            py::dict d;
            d["entry_index"] = entry;
            d["touch_index"] = touch;
            d["label"] = label;
            return d;
        },
        py::arg("timestamp"), py::arg("open"), py::arg("high"), py::arg("low"), py::arg("close"), py::arg("volume"),
        py::arg("h") = 12, py::arg("up") = 3.0, py::arg("down") = 3.0, py::arg("vol_span") = 20);

    m.def(
        "classification_report",
        [](std::vector<int> y_true, std::vector<int> y_pred) {
            return to_json(classification_report(y_true, y_pred)).dump();
        },
        py::arg("y_true"), py::arg("y_pred"), "Returns the report as a JSON string.");

    m.def(
        "train_and_predict",
        [](const Eigen::MatrixXd& x_train, std::vector<int> y_train, const Eigen::MatrixXd& x_test, std::size_t epochs,
           std::uint64_t seed) {
            MlpConfig cfg;
            cfg.input_dim = static_cast<std::size_t>(x_train.cols());
            cfg.epochs = epochs;
            cfg.seed = seed;
            const auto model = train(x_train, y_train, cfg);
            return py::make_tuple(predict(model, x_test), model.loss_history);
        },
        py::arg("x_train"), py::arg("y_train"), py::arg("x_test"), py::arg("epochs") = 100, py::arg("seed") = 0);

    m.def(
        "performance_stats",
        [](std::vector<double> equity, std::vector<std::int64_t> ts, std::size_t trades) {
            return to_json(performance_stats(equity, ts, trades)).dump();
        },
        py::arg("equity"), py::arg("timestamps"), py::arg("trade_count") = 0, "Returns the statistics as a JSON string.");

    m.def(
        "ga_optimize",
        [](const std::function<double(std::vector<double>)>& f, std::vector<std::pair<double, double>> bounds,
           std::size_t population, std::size_t generations, std::uint64_t seed) {
            std::vector<ParamBounds> b;
            for (const auto& [lo, hi] : bounds) b.push_back({lo, hi});
            GaConfig cfg;
            cfg.population = population;
            cfg.generations = generations;
            cfg.seed = seed;
            const auto r = ga_optimize([&](std::span<const double> x) { return f({x.begin(), x.end()}); }, b, cfg);
            return py::make_tuple(r.best, r.best_fitness, r.history);
        },
        py::arg("objective"), py::arg("bounds"), py::arg("population") = 32, py::arg("generations") = 50,
        py::arg("seed") = 0);

    m.def(
        "run_pipeline",
        [](const std::string& config_json, const std::string& run_dir) {
            const auto cfg = pipeline_config_from_json(nlohmann::json::parse(config_json));
            return run_pipeline(cfg, run_dir).manifest.dump();
        },
        py::arg("config_json"), py::arg("run_dir"), "Runs the pipeline; returns the manifest as a JSON string.");
}
