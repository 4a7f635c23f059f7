#include "ffdlab/ga.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

namespace ffdlab {

void GaConfig::validate() const {
    if (population < 4) throw Error(ErrorCode::InvalidArgument, "population must be at least 4");
    if (elite_count < 1 || elite_count >= population) {
        throw Error(ErrorCode::InvalidArgument, "elite_count must be in [1, population)");
    }
    if (generations < 1 || tournament_size < 1) throw Error(ErrorCode::InvalidArgument, "generations and tournament_size must be positive");
    if (crossover_rate < 0.0 || crossover_rate > 1.0 || mutation_rate < 0.0 || mutation_rate > 1.0) {
        throw Error(ErrorCode::InvalidArgument, "crossover_rate and mutation_rate must be probabilities");
    }
    if (!(initial_sigma > 0.0) || !(final_sigma > 0.0)) throw Error(ErrorCode::InvalidArgument, "mutation sigmas must be positive");
}

namespace {

std::string describe(std::span<const double> x) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
    os << ']';
    return os.str();
}

}  // namespace

ObjectiveFailureError::ObjectiveFailureError(std::vector<double> candidate, const std::string& what)
    : Error(ErrorCode::ObjectiveFailure, "objective failed at " + describe(candidate) + ": " + what),
      candidate_(std::move(candidate)) {}

GaResult ga_optimize(const Objective& objective, std::span<const ParamBounds> bounds, const GaConfig& cfg) {
    cfg.validate();
    if (bounds.empty()) throw Error(ErrorCode::InvalidBounds, "no parameters to optimize");
    for (const auto& b : bounds) {
        if (!std::isfinite(b.lower) || !std::isfinite(b.upper) || b.lower > b.upper) {
            throw Error(ErrorCode::InvalidBounds, "each bound needs finite lower <= upper");
        }
    }
    const std::size_t dim = bounds.size();
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    GaResult res;
    auto evaluate = [&](const std::vector<double>& x) {
        double f = 0.0;
        try {
            f = objective(x);
        } catch (const std::exception& e) {
            throw ObjectiveFailureError(x, e.what());
        }
        if (std::isnan(f)) throw ObjectiveFailureError(x, "objective returned NaN");
        ++res.evaluations;
        return f;
    };

    std::vector<std::vector<double>> pop(cfg.population, std::vector<double>(dim));
    for (auto& x : pop) {
        for (std::size_t j = 0; j < dim; ++j) x[j] = bounds[j].lower + unit(rng) * (bounds[j].upper - bounds[j].lower);
    }
    std::vector<double> fit(cfg.population);
    for (std::size_t i = 0; i < pop.size(); ++i) fit[i] = evaluate(pop[i]);

    std::vector<std::size_t> order(cfg.population);
    auto rank = [&] {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fit[a] > fit[b]; });
    };
    rank();
    res.history.push_back(fit[order[0]]);

    std::uniform_int_distribution<std::size_t> pick(0, cfg.population - 1);
    auto tournament = [&]() -> const std::vector<double>& {
        std::size_t best = pick(rng);
        for (std::size_t k = 1; k < cfg.tournament_size; ++k) {
            const std::size_t c = pick(rng);
            if (fit[c] > fit[best]) best = c;
        }
        return pop[best];
    };

    for (std::size_t g = 1; g < cfg.generations; ++g) {
        const double progress = cfg.generations > 1 ? static_cast<double>(g) / static_cast<double>(cfg.generations - 1) : 1.0;
        const double sigma = cfg.initial_sigma * std::pow(cfg.final_sigma / cfg.initial_sigma, progress);

        std::vector<std::vector<double>> next;
        std::vector<double> next_fit;
        next.reserve(cfg.population);
        for (std::size_t e = 0; e < cfg.elite_count; ++e) {
            next.push_back(pop[order[e]]);
            next_fit.push_back(fit[order[e]]);
        }
        std::vector<std::vector<double>> children;
        while (next.size() + children.size() < cfg.population) {
            const auto& a = tournament();
            const auto& b = tournament();
            std::vector<double> child = a;
            if (unit(rng) < cfg.crossover_rate) {
                for (std::size_t j = 0; j < dim; ++j) {
                    if (unit(rng) < 0.5) child[j] = b[j];
                }
            }
            for (std::size_t j = 0; j < dim; ++j) {
                if (unit(rng) < cfg.mutation_rate) {
                    const double range = bounds[j].upper - bounds[j].lower;
                    child[j] = std::clamp(child[j] + gauss(rng) * sigma * range, bounds[j].lower, bounds[j].upper);
                }
            }
            children.push_back(std::move(child));
        }
        // Evaluation happens after all random draws, so results do not depend on evaluation order.
        for (auto& c : children) {
            next_fit.push_back(evaluate(c));
            next.push_back(std::move(c));
        }
        pop = std::move(next);
        fit = std::move(next_fit);
        rank();
        res.history.push_back(fit[order[0]]);
    }
    res.best = pop[order[0]];
    res.best_fitness = fit[order[0]];
    return res;
}

StrategyGaResult ga_optimize(const std::function<double(const StrategyParams&)>& objective,
                             std::span<const ParamBounds> bounds, const GaConfig& cfg, const StrategyParams& base) {
    std::vector<ParamBounds> b4;
    if (bounds.size() == 1) b4.assign(4, bounds[0]);
    else if (bounds.size() == 4) b4.assign(bounds.begin(), bounds.end());
    else throw Error(ErrorCode::InvalidBounds, "expected one bound for all multipliers or four bounds");
    const auto r = ga_optimize([&](std::span<const double> x) { return objective(base.with_multipliers(x)); }, b4, cfg);
    return {base.with_multipliers(r.best), r.best_fitness, r.history};
}

double backtest_fitness(const BacktestReport& report, BacktestObjective objective) {
    if (objective == BacktestObjective::total_return) return report.stats.total_return;
    return report.stats.sharpe.value_or(std::numeric_limits<double>::lowest());
}

}  // namespace ffdlab
