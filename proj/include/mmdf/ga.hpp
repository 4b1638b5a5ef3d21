#pragma once

#include "mmdf/analysis.hpp"
#include "mmdf/mapping.hpp"
#include "mmdf/model.hpp"
#include "mmdf/scheduler.hpp"

#include <algorithm>
#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace mmdf {

using Rng = std::mt19937_64;

/// Evolution parameters. Defaults are the desk-scale setting; large_scale()
/// gives population 100 and 30000 generations.
struct GaConfig {
    std::size_t population_size = 40;
    std::size_t mu = 40;
    std::size_t lambda = 40;
    double crossover_probability = 0.9;
    double mutation_probability = 0.9;
    std::size_t max_generations = 500;
    std::uint64_t seed = 0;
    std::int64_t unroll = kDefaultUnroll;

    static GaConfig large_scale();
    /// Throws std::invalid_argument on out-of-range fields.
    void validate() const;
};

struct Fitness {
    bool feasible = false;
    std::size_t processors = 0;
    Time mig_cost_total = 0;
    Rational shortfall{0};

    bool operator==(const Fitness&) const = default;
};

/// Strict "a ranks ahead of b". Feasible first; feasible candidates by
/// (processors, migration cost); infeasible ones by (shortfall, processors,
/// migration cost).
bool ranks_ahead(const Fitness& a, const Fitness& b);

std::string describe(const Fitness& f);

/// |Map(cm, pi) ∩ Map(nm, pj)|.
std::size_t similarity(const Spec& spec, const MappingSolution& candidate, ModeIndex cm, ProcessorId pi,
                       ModeIndex nm, ProcessorId pj);

/// Greedy processor renaming. For every transition the next mode's processor
/// labels are permuted so that current processor cId (ascending) takes the
/// unclaimed next-mode processor of maximum similarity (ties: lowest id). A
/// relabeling is kept only if it does not increase the total migration cost.
MappingSolution rename_processors(const Spec& spec, const MappingSolution& candidate);

/// Uniform crossover: with probability `probability`, each gene is swapped
/// between the two children with probability 1/2.
std::pair<MappingSolution, MappingSolution> crossover(const MappingSolution& a, const MappingSolution& b,
                                                      double probability, Rng& rng);

/// With probability `probability`, re-draws one gene uniformly over [0, pool).
MappingSolution mutate(const MappingSolution& candidate, std::size_t pool, double probability, Rng& rng);

/// Evaluates candidates of one spec, caching per-mode schedules.
class Evaluator {
public:
    Evaluator(const Spec& spec, std::int64_t unroll = kDefaultUnroll);

    const Spec& spec() const { return spec_; }
    const std::vector<GeneLayout>& layouts() const { return layouts_; }

    /// Latency and interval of one mode under `genes` (cached).
    std::pair<Time, Rational> mode_metrics(ModeIndex mode, const ModeMapping& genes);

    Fitness evaluate(const MappingSolution& candidate);
    AnalysisResult analyze(const MappingSolution& candidate) const;

private:
    const Spec& spec_;
    std::int64_t unroll_;
    std::vector<GeneLayout> layouts_;
    std::vector<ModeScheduler> schedulers_;
    std::vector<std::map<ModeMapping, std::pair<Time, Rational>>> cache_;
};

Fitness evaluate(const Spec& spec, const MappingSolution& candidate, std::int64_t unroll = kDefaultUnroll);

/// Concatenated genome of all modes <-> MappingSolution.
std::vector<ProcessorId> flatten(const MappingSolution& solution);
MappingSolution unflatten(const std::vector<ProcessorId>& genome, const std::vector<GeneLayout>& layouts);

template <typename Score>
struct GenerationStats {
    std::size_t generation = 0;
    Score best;
    Score median;
};

template <typename Score>
struct GaOutcome {
    std::vector<ProcessorId> best;
    Score score;
    std::vector<GenerationStats<Score>> log;
};

/// Problem definition for the generic engine: genomes are flat vectors over
/// [0, alleles); `better(a, b)` is a strict ranking.
template <typename Score>
struct GaProblem {
    std::size_t genes = 0;
    std::size_t alleles = 1;
    std::function<Score(const std::vector<ProcessorId>&)> score;
    std::function<bool(const Score&, const Score&)> better;
    /// Optional initial genome for population slot `index`; `limit` is a
    /// processor count drawn uniformly from [1, alleles].
    std::function<std::vector<ProcessorId>(Rng& rng, std::size_t index, std::size_t limit)> initial;
    /// Optional local optimisation applied to every new genome before scoring.
    std::function<std::vector<ProcessorId>(const std::vector<ProcessorId>&)> local;
};

/// (mu + lambda) evolution: random initial population, size-2 tournament
/// selection, uniform crossover, single-gene mutation, local optimisation,
/// evaluation and elitist replacement. Deterministic for a given seed.
template <typename Score>
GaOutcome<Score> run_ga(const GaProblem<Score>& problem, const GaConfig& config) {
    config.validate();
    struct Member {
        std::vector<ProcessorId> genome;
        Score score;
    };
    Rng rng(config.seed);
    std::uniform_int_distribution<std::size_t> allele(0, problem.alleles - 1);
    std::uniform_real_distribution<double> coin(0.0, 1.0);

    auto finish = [&](std::vector<ProcessorId> genome) {
        if (problem.local) {
            genome = problem.local(genome);
        }
        Score s = problem.score(genome);
        return Member{std::move(genome), std::move(s)};
    };
    auto rank = [&](std::vector<Member>& members) {
        std::stable_sort(members.begin(), members.end(),
                         [&](const Member& a, const Member& b) { return problem.better(a.score, b.score); });
    };

    // Initial genomes draw a processor count k first and then genes in
    // [0, k), so small processor counts are represented from the start.
    std::vector<Member> population;
    for (std::size_t i = 0; i < config.population_size; ++i) {
        const std::size_t limit = allele(rng) + 1;
        std::vector<ProcessorId> genome;
        if (problem.initial) {
            genome = problem.initial(rng, i, limit);
        } else {
            std::uniform_int_distribution<std::size_t> limited(0, limit - 1);
            genome.resize(problem.genes);
            for (auto& g : genome) {
                g = static_cast<ProcessorId>(limited(rng));
            }
        }
        population.push_back(finish(std::move(genome)));
    }
    rank(population);
    if (population.size() > config.mu) {
        population.resize(config.mu);
    }

    GaOutcome<Score> outcome;
    auto record = [&](std::size_t generation) {
        outcome.log.push_back({generation, population.front().score, population[population.size() / 2].score});
    };
    record(0);

    std::uniform_int_distribution<std::size_t> gene_index(0, problem.genes == 0 ? 0 : problem.genes - 1);
    for (std::size_t gen = 1; gen <= config.max_generations; ++gen) {
        std::uniform_int_distribution<std::size_t> pick(0, population.size() - 1);
        auto tournament = [&]() -> const Member& {
            const Member& a = population[pick(rng)];
            const Member& b = population[pick(rng)];
            return problem.better(b.score, a.score) ? b : a;
        };
        std::vector<Member> offspring;
        while (offspring.size() < config.lambda) {
            std::vector<ProcessorId> a = tournament().genome;
            std::vector<ProcessorId> b = tournament().genome;
            if (coin(rng) < config.crossover_probability) {
                for (std::size_t i = 0; i < a.size(); ++i) {
                    if (coin(rng) < 0.5) {
                        std::swap(a[i], b[i]);
                    }
                }
            }
            for (auto* child : {&a, &b}) {
                if (problem.genes > 0 && coin(rng) < config.mutation_probability) {
                    (*child)[gene_index(rng)] = static_cast<ProcessorId>(allele(rng));
                }
            }
            offspring.push_back(finish(std::move(a)));
            if (offspring.size() < config.lambda) {
                offspring.push_back(finish(std::move(b)));
            }
        }
        for (auto& child : offspring) {
            population.push_back(std::move(child));
        }
        rank(population);
        population.resize(config.mu);
        record(gen);
    }
    outcome.best = population.front().genome;
    outcome.score = population.front().score;
    return outcome;
}

struct StrategyResult {
    std::string strategy;
    MappingSolution solution;
    Fitness fitness;
    AnalysisResult analysis;
    std::vector<GenerationStats<Fitness>> log;
    /// Empty when feasible; otherwise why no feasible solution was found.
    std::string infeasibility;
};

/// Joint search over all modes with migration allowed.
StrategyResult evolve(const Spec& spec, const GaConfig& config);

/// Reason string for an infeasible analysis ("" when feasible).
std::string infeasibility_reason(const Spec& spec, const TransitionAnalysisReport& report);

} // namespace mmdf
