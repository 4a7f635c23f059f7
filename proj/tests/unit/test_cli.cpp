#include <doctest.h>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

const fs::path kTmp{FFDLAB_TEST_TMP};

int ffdlab(const std::string& args) {
    fs::create_directories(kTmp);
    const std::string cmd = std::string("\"") + FFDLAB_BIN + "\" " + args + " > \"" + (kTmp / "last.log").string() +
                            "\" 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string at(const std::string& name) { return "\"" + (kTmp / name).string() + "\""; }

}  // namespace

TEST_CASE("verbs chain from synthetic bars to a backtest") {
    REQUIRE(ffdlab("synth --kind gbm --length 15000 --seed 3 --out " + at("raw.csv")) == 0);
    REQUIRE(ffdlab("resample -i " + at("raw.csv") + " --target 10 --out " + at("bars.csv")) == 0);
    CHECK(slurp(kTmp / "last.log").find("wrote 1500 bars") != std::string::npos);

    REQUIRE(ffdlab("fracdiff -i " + at("bars.csv") + " --period 10 --d 0.4 --tau 1e-3 --out " + at("ffd.csv") +
                   " --weights-out " + at("weights.csv")) == 0);
    CHECK(fs::file_size(kTmp / "ffd.csv") > 0);
    CHECK(fs::file_size(kTmp / "weights.csv") > 0);

    REQUIRE(ffdlab("adf-sweep -i " + at("bars.csv") + " --period 10 --tau 1e-3 --step 0.25 --out " + at("sweep.csv") +
                   " --acf-out " + at("acf.csv")) == 0);
    CHECK(fs::exists(kTmp / "sweep.csv"));
    CHECK(fs::exists(kTmp / "acf.csv"));

    REQUIRE(ffdlab("label -i " + at("bars.csv") + " --period 10 --out " + at("events.csv")) == 0);
    REQUIRE(ffdlab("label -i " + at("bars.csv") + " --period 10 --method fixed-horizon --threshold 0.002 --out " +
                   at("fixed.csv")) == 0);

    REQUIRE(ffdlab("featurize -i " + at("bars.csv") + " --period 10 --labels " + at("events.csv") +
                   " --d 0.4 --tau 1e-3 --out " + at("dataset.csv") + " --params-out " + at("prep.json")) == 0);
    const auto prep = nlohmann::json::parse(slurp(kTmp / "prep.json"));
    CHECK(prep.contains("normalization"));
    CHECK(prep.contains("pca"));

    REQUIRE(ffdlab("train --dataset " + at("dataset.csv") + " --epochs 3 --hidden 16 --out " + at("model.json")) == 0);
    REQUIRE(ffdlab("predict --model " + at("model.json") + " --dataset " + at("dataset.csv") + " --out " +
                   at("pred.csv") + " --report " + at("report.json")) == 0);
    const auto report = nlohmann::json::parse(slurp(kTmp / "report.json"));
    CHECK(report.contains("accuracy"));

    REQUIRE(ffdlab("backtest -i " + at("bars.csv") + " --period 10 --predictions " + at("pred.csv") + " --out-dir " +
                   at("bt")) == 0);
    const auto bt = nlohmann::json::parse(slurp(kTmp / "bt" / "backtest.json"));
    CHECK(bt["initial_capital"] == 200000.0);
    CHECK(fs::exists(kTmp / "bt" / "trades.csv"));
    CHECK(fs::exists(kTmp / "bt" / "equity.csv"));

    REQUIRE(ffdlab("optimize -i " + at("bars.csv") + " --period 10 --predictions " + at("pred.csv") +
                   " --bounds 0.5:8 --pop 8 --gens 3 --objective total_return --out " + at("opt.json")) == 0);
    const auto opt = nlohmann::json::parse(slurp(kTmp / "opt.json"));
    CHECK(opt.dump().find("pa") != std::string::npos);
}

TEST_CASE("run writes a manifest and honours flag overrides") {
    REQUIRE(ffdlab("synth --kind gbm --length 12000 --seed 4 --out " + at("run_raw.csv")) == 0);
    {
        std::ofstream cfg(kTmp / "cfg.json");
        cfg << R"({"fracdiff": {"d": 0.3, "tau": 0.001}, "model": {"epochs": 3, "hidden_dim": 16}, "seed": 1})";
    }
    REQUIRE(ffdlab("run -c " + at("cfg.json") + " -i " + at("run_raw.csv") + " --seed 9 --out " + at("run")) == 0);
    const auto manifest = nlohmann::json::parse(slurp(kTmp / "run" / "manifest.json"));
    CHECK(manifest["status"] == "ok");
    CHECK(manifest["seed"] == 9);
    CHECK(manifest["fracdiff"]["chosen_d"] == 0.3);
    CHECK(manifest["stages"].size() == 8);
}

TEST_CASE("failures print an error and exit with status 2") {
    {
        std::ofstream bad(kTmp / "bad.csv");
        bad << "timestamp,open,high,low,close,volume\n2020-01-02T00:00:00Z,10,9,8,9,1\n";
    }
    CHECK(ffdlab("resample -i " + at("bad.csv") + " --target 10 --out " + at("never.csv")) == 2);
    CHECK(slurp(kTmp / "last.log").rfind("error: ", 0) == 0);
    CHECK_FALSE(fs::exists(kTmp / "never.csv"));

    CHECK(ffdlab("synth --kind brownian --out " + at("x.csv")) == 2);
    CHECK(ffdlab("resample --target 10 --out " + at("y.csv")) != 0);
    CHECK(ffdlab("--help") == 0);
}
