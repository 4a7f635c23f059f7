#pragma once

#include "ffdlab/backtest.hpp"
#include "ffdlab/error.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace ffdlab {

struct ParamBounds {
    double lower = 0.0;
    double upper = 1.0;
};

struct GaConfig {
    std::size_t population = 32;
    std::size_t generations = 50;  // the initial population is generation 1
    double crossover_rate = 0.9;
    double mutation_rate = 0.25;   // per gene
    std::size_t elite_count = 2;
    std::size_t tournament_size = 3;
    double initial_sigma = 0.1;    // mutation step as a fraction of each range
    double final_sigma = 0.002;
    std::uint64_t seed = 0;

    void validate() const;
};

struct GaResult {
    std::vector<double> best;
    double best_fitness = 0.0;
    std::vector<double> history;  // best fitness per generation
    std::size_t evaluations = 0;
};

// Raised when the objective throws or returns NaN; carries the failing candidate.
class ObjectiveFailureError : public Error {
public:
    ObjectiveFailureError(std::vector<double> candidate, const std::string& what);
    const std::vector<double>& candidate() const noexcept { return candidate_; }

private:
    std::vector<double> candidate_;
};

using Objective = std::function<double(std::span<const double>)>;

// Maximizes `objective` with a real-coded GA: tournament selection, uniform
// crossover, Gaussian mutation clipped to the bounds with a geometrically
// annealed step, and elitism. Fully determined by cfg.seed.
GaResult ga_optimize(const Objective& objective, std::span<const ParamBounds> bounds, const GaConfig& cfg);

struct StrategyGaResult {
    StrategyParams best_params;
    double best_fitness = 0.0;
    std::vector<double> history;
};

// Searches (pa, pb, pc, pd) within `bounds` (one entry, or four); the other
// fields are taken from `base`.
StrategyGaResult ga_optimize(const std::function<double(const StrategyParams&)>& objective,
                             std::span<const ParamBounds> bounds, const GaConfig& cfg, const StrategyParams& base = {});

enum class BacktestObjective { sharpe, total_return };

// Fitness of one backtest: Sharpe (lowest double when undefined) or total return.
double backtest_fitness(const BacktestReport& report, BacktestObjective objective);

}  // namespace ffdlab
