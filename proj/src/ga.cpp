#include "mmdf/ga.hpp"

#include <numeric>
#include <sstream>
#include <stdexcept>

namespace mmdf {

GaConfig GaConfig::large_scale() {
    GaConfig c;
    c.population_size = 100;
    c.mu = 100;
    c.lambda = 100;
    c.crossover_probability = 0.9;
    c.mutation_probability = 0.9;
    c.max_generations = 30000;
    return c;
}

void GaConfig::validate() const {
    if (population_size == 0 || mu == 0 || lambda == 0) {
        throw std::invalid_argument("GA population, mu and lambda must be positive");
    }
    if (crossover_probability < 0 || crossover_probability > 1 || mutation_probability < 0 ||
        mutation_probability > 1) {
        throw std::invalid_argument("GA probabilities must lie in [0, 1]");
    }
    if (unroll < 2) {
        throw std::invalid_argument("unroll depth must be at least 2");
    }
}

bool ranks_ahead(const Fitness& a, const Fitness& b) {
    if (a.feasible != b.feasible) {
        return a.feasible;
    }
    if (a.feasible) {
        return std::tie(a.processors, a.mig_cost_total) < std::tie(b.processors, b.mig_cost_total);
    }
    if (a.shortfall != b.shortfall) {
        return a.shortfall < b.shortfall;
    }
    return std::tie(a.processors, a.mig_cost_total) < std::tie(b.processors, b.mig_cost_total);
}

std::string describe(const Fitness& f) {
    std::ostringstream os;
    os << (f.feasible ? "feasible" : "infeasible") << " processors=" << f.processors
       << " mig=" << f.mig_cost_total;
    if (!f.feasible) {
        os << " shortfall=" << to_string(f.shortfall);
    }
    return os.str();
}

std::size_t similarity(const Spec& spec, const MappingSolution& candidate, ModeIndex cm, ProcessorId pi,
                       ModeIndex nm, ProcessorId pj) {
    const auto cur = processor_task_sets(gene_layout(spec, cm), candidate.modes.at(cm), spec.processor_pool);
    const auto next = processor_task_sets(gene_layout(spec, nm), candidate.modes.at(nm), spec.processor_pool);
    std::size_t n = 0;
    for (TaskIndex t : cur.at(pi)) {
        n += next.at(pj).count(t);
    }
    return n;
}

MappingSolution rename_processors(const Spec& spec, const MappingSolution& candidate) {
    const auto layouts = gene_layouts(spec);
    const std::size_t pool = spec.processor_pool;
    MappingSolution sol = candidate;
    Time cost = mig_cost_total(spec, sol);
    for (const auto& tr : spec.mtg.transitions) {
        const auto cur = processor_task_sets(layouts[tr.from], sol.modes[tr.from], pool);
        const auto next = processor_task_sets(layouts[tr.to], sol.modes[tr.to], pool);
        std::vector<bool> claimed(pool, false);
        std::vector<ProcessorId> relabel(pool, 0);
        for (std::size_t c = 0; c < pool; ++c) {
            std::size_t best = pool;
            std::size_t best_sim = 0;
            for (std::size_t n = 0; n < pool; ++n) {
                if (claimed[n]) {
                    continue;
                }
                std::size_t sim = 0;
                for (TaskIndex t : cur[c]) {
                    sim += next[n].count(t);
                }
                if (best == pool || sim > best_sim) {
                    best = n;
                    best_sim = sim;
                }
            }
            claimed[best] = true;
            relabel[best] = static_cast<ProcessorId>(c);
        }
        MappingSolution trial = sol;
        for (auto& g : trial.modes[tr.to]) {
            g = relabel[g];
        }
        const Time trial_cost = mig_cost_total(spec, trial);
        if (trial_cost <= cost) {
            sol = std::move(trial);
            cost = trial_cost;
        }
    }
    return sol;
}

std::vector<ProcessorId> flatten(const MappingSolution& solution) {
    std::vector<ProcessorId> out;
    for (const auto& m : solution.modes) {
        out.insert(out.end(), m.begin(), m.end());
    }
    return out;
}

MappingSolution unflatten(const std::vector<ProcessorId>& genome, const std::vector<GeneLayout>& layouts) {
    MappingSolution sol;
    std::size_t at = 0;
    for (const auto& layout : layouts) {
        if (at + layout.size > genome.size()) {
            throw std::invalid_argument("genome shorter than the gene layout");
        }
        sol.modes.emplace_back(genome.begin() + static_cast<std::ptrdiff_t>(at),
                               genome.begin() + static_cast<std::ptrdiff_t>(at + layout.size));
        at += layout.size;
    }
    if (at != genome.size()) {
        throw std::invalid_argument("genome longer than the gene layout");
    }
    return sol;
}

std::pair<MappingSolution, MappingSolution> crossover(const MappingSolution& a, const MappingSolution& b,
                                                      double probability, Rng& rng) {
    if (a.modes.size() != b.modes.size()) {
        throw std::invalid_argument("crossover: parents differ in shape");
    }
    std::pair<MappingSolution, MappingSolution> out{a, b};
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (!(coin(rng) < probability)) {
        return out;
    }
    for (std::size_t m = 0; m < a.modes.size(); ++m) {
        if (a.modes[m].size() != b.modes[m].size()) {
            throw std::invalid_argument("crossover: parents differ in shape");
        }
        for (std::size_t i = 0; i < a.modes[m].size(); ++i) {
            if (coin(rng) < 0.5) {
                std::swap(out.first.modes[m][i], out.second.modes[m][i]);
            }
        }
    }
    return out;
}

MappingSolution mutate(const MappingSolution& candidate, std::size_t pool, double probability, Rng& rng) {
    MappingSolution out = candidate;
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    std::size_t genes = 0;
    for (const auto& m : out.modes) {
        genes += m.size();
    }
    if (genes == 0 || pool == 0 || !(coin(rng) < probability)) {
        return out;
    }
    std::size_t pick = std::uniform_int_distribution<std::size_t>(0, genes - 1)(rng);
    const auto value = static_cast<ProcessorId>(std::uniform_int_distribution<std::size_t>(0, pool - 1)(rng));
    for (auto& m : out.modes) {
        if (pick < m.size()) {
            m[pick] = value;
            break;
        }
        pick -= m.size();
    }
    return out;
}

namespace {

// Relabels processors by first occurrence so that mappings equal up to a
// permutation of processors share one cache entry.
ModeMapping canonical(const ModeMapping& genes) {
    std::map<ProcessorId, ProcessorId> seen;
    ModeMapping out;
    out.reserve(genes.size());
    for (ProcessorId p : genes) {
        auto [it, inserted] = seen.try_emplace(p, static_cast<ProcessorId>(seen.size()));
        out.push_back(it->second);
    }
    return out;
}

} // namespace

Evaluator::Evaluator(const Spec& spec, std::int64_t unroll)
    : spec_(spec), unroll_(unroll), layouts_(gene_layouts(spec)), cache_(spec.mode_count()) {
    for (ModeIndex m = 0; m < spec.mode_count(); ++m) {
        schedulers_.emplace_back(spec, m);
    }
}

std::pair<Time, Rational> Evaluator::mode_metrics(ModeIndex mode, const ModeMapping& genes) {
    ModeMapping key = canonical(genes);
    auto it = cache_[mode].find(key);
    if (it == cache_[mode].end()) {
        const ModeSchedule s = schedulers_[mode].schedule(key, layouts_[mode], unroll_);
        it = cache_[mode].emplace(std::move(key), std::make_pair(s.latency, s.initiation_interval)).first;
    }
    return it->second;
}

Fitness Evaluator::evaluate(const MappingSolution& candidate) {
    std::vector<ModeSchedule> schedules(spec_.mode_count());
    for (ModeIndex m = 0; m < spec_.mode_count(); ++m) {
        auto [latency, ii] = mode_metrics(m, candidate.modes.at(m));
        schedules[m].mode = m;
        schedules[m].latency = latency;
        schedules[m].initiation_interval = ii;
    }
    const auto report = analyze_transitions(spec_, candidate, schedules);
    Fitness f;
    f.feasible = report.feasible;
    f.processors = report.processors;
    f.mig_cost_total = report.mig_cost_total;
    f.shortfall = report.shortfall;
    return f;
}

AnalysisResult Evaluator::analyze(const MappingSolution& candidate) const {
    return mmdf::analyze(spec_, candidate, unroll_);
}

Fitness evaluate(const Spec& spec, const MappingSolution& candidate, std::int64_t unroll) {
    check_mapping(spec, candidate);
    return Evaluator(spec, unroll).evaluate(candidate);
}

std::string infeasibility_reason(const Spec& spec, const TransitionAnalysisReport& report) {
    if (report.feasible) {
        return "";
    }
    for (const auto& m : report.modes) {
        if (!m.thr_require) {
            return "mode '" + spec.mtg.modes[m.mode].name + "': incoming transition delay " +
                   to_string(m.max_trans_delay) + " leaves no throughput budget (MRC - delay*ThrConst <= 0)";
        }
    }
    std::ostringstream os;
    os << "processor pool of " << spec.processor_pool << " exhausted; interval above requirement in";
    for (const auto& m : report.modes) {
        if (!m.meets_requirement) {
            os << " " << spec.mtg.modes[m.mode].name << " (II " << to_string(m.initiation_interval) << " > "
               << to_string(m.allowed_interval) << ")";
        }
    }
    return os.str();
}

StrategyResult evolve(const Spec& spec, const GaConfig& config) {
    config.validate();
    Evaluator evaluator(spec, config.unroll);
    const auto& layouts = evaluator.layouts();
    GaProblem<Fitness> problem;
    problem.genes = std::accumulate(layouts.begin(), layouts.end(), std::size_t{0},
                                    [](std::size_t n, const GeneLayout& l) { return n + l.size; });
    problem.alleles = spec.processor_pool;
    problem.better = ranks_ahead;
    // Half of the initial population is migration-free: one processor per
    // task, shared by every mode.
    problem.initial = [&](Rng& rng, std::size_t index, std::size_t limit) {
        std::uniform_int_distribution<std::size_t> draw(0, limit - 1);
        std::vector<ProcessorId> genome;
        if (index % 2 == 1) {
            std::vector<ProcessorId> task(spec.tasks.size());
            for (auto& g : task) {
                g = static_cast<ProcessorId>(draw(rng));
            }
            for (const auto& layout : layouts) {
                for (TaskIndex t = 0; t < spec.tasks.size(); ++t) {
                    genome.insert(genome.end(), layout.count[t], task[t]);
                }
            }
        } else {
            genome.resize(problem.genes);
            for (auto& g : genome) {
                g = static_cast<ProcessorId>(draw(rng));
            }
        }
        return genome;
    };
    problem.local = [&](const std::vector<ProcessorId>& genome) {
        return flatten(rename_processors(spec, unflatten(genome, layouts)));
    };
    problem.score = [&](const std::vector<ProcessorId>& genome) {
        return evaluator.evaluate(unflatten(genome, layouts));
    };
    auto outcome = run_ga(problem, config);

    StrategyResult result;
    result.strategy = "proposed";
    result.solution = unflatten(outcome.best, layouts);
    result.fitness = outcome.score;
    result.analysis = evaluator.analyze(result.solution);
    result.log = std::move(outcome.log);
    result.infeasibility = infeasibility_reason(spec, result.analysis.report);
    return result;
}

} // namespace mmdf
