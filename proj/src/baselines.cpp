#include "mmdf/baselines.hpp"

#include <tuple>

namespace mmdf {

StrategyResult run_fixed(const Spec& spec, const GaConfig& config) {
    config.validate();
    Evaluator evaluator(spec, config.unroll);
    const auto& layouts = evaluator.layouts();
    auto expand = [&](const std::vector<ProcessorId>& genome) {
        MappingSolution sol;
        for (const auto& layout : layouts) {
            ModeMapping genes(layout.size);
            for (TaskIndex t = 0; t < spec.tasks.size(); ++t) {
                for (std::size_t i = 0; i < layout.count[t]; ++i) {
                    genes[layout.offset[t] + i] = genome[t];
                }
            }
            sol.modes.push_back(std::move(genes));
        }
        return sol;
    };
    GaProblem<Fitness> problem;
    problem.genes = spec.tasks.size();
    problem.alleles = spec.processor_pool;
    problem.better = ranks_ahead;
    problem.score = [&](const std::vector<ProcessorId>& genome) { return evaluator.evaluate(expand(genome)); };
    auto outcome = run_ga(problem, config);

    StrategyResult result;
    result.strategy = "fixed";
    result.solution = expand(outcome.best);
    result.fitness = outcome.score;
    result.analysis = evaluator.analyze(result.solution);
    result.log = std::move(outcome.log);
    result.infeasibility = infeasibility_reason(spec, result.analysis.report);
    return result;
}

namespace {

struct ModeScore {
    Time latency = 0;
    Rational initiation_interval{1};
};

bool point_better(const ModePoint& a, const ModePoint& b) {
    return std::tie(a.initiation_interval, a.latency, a.genes) < std::tie(b.initiation_interval, b.latency, b.genes);
}

} // namespace

std::vector<ModeFront> mode_fronts(const Spec& spec, const GaConfig& config) {
    config.validate();
    Evaluator evaluator(spec, config.unroll);
    std::vector<ModeFront> fronts(spec.mode_count());
    for (ModeIndex m = 0; m < spec.mode_count(); ++m) {
        auto& front = fronts[m];
        auto offer = [&](const ModeMapping& genes, const ModeScore& s) {
            ModePoint p{used_processor_count(genes), genes, s.latency, s.initiation_interval};
            auto it = front.find(p.processors);
            if (it == front.end()) {
                front.emplace(p.processors, std::move(p));
            } else if (point_better(p, it->second)) {
                it->second = std::move(p);
            }
        };
        const std::size_t genes = evaluator.layouts()[m].size;
        for (std::size_t k = 1; k <= spec.processor_pool; ++k) {
            GaProblem<ModeScore> problem;
            problem.genes = genes;
            problem.alleles = k;
            problem.better = [](const ModeScore& a, const ModeScore& b) {
                return std::tie(a.initiation_interval, a.latency) < std::tie(b.initiation_interval, b.latency);
            };
            problem.score = [&](const std::vector<ProcessorId>& g) {
                auto [latency, ii] = evaluator.mode_metrics(m, g);
                ModeScore s{latency, ii};
                offer(g, s);
                return s;
            };
            if (k == 1) {
                problem.score(std::vector<ProcessorId>(genes, 0));
                continue;
            }
            GaConfig c = config;
            c.seed = config.seed + 1000003ULL * m + k;
            run_ga(problem, c);
        }
    }
    return fronts;
}

BaseResult run_base(const Spec& spec, const GaConfig& config) {
    BaseResult base;
    base.fronts = mode_fronts(spec, config);
    base.result.strategy = "base";
    const Rational budget = Rational(1) / spec.throughput_constraint;

    // Initial choice: fewest processors meeting ThrConst on its own.
    std::vector<std::size_t> chosen(spec.mode_count());
    for (ModeIndex m = 0; m < spec.mode_count(); ++m) {
        const auto& front = base.fronts[m];
        auto it = front.begin();
        while (it != front.end() && it->second.initiation_interval > budget) {
            ++it;
        }
        if (it == front.end()) {
            it = std::prev(front.end());
        }
        chosen[m] = it->first;
    }

    for (;;) {
        ++base.rounds;
        MappingSolution joint;
        for (ModeIndex m = 0; m < spec.mode_count(); ++m) {
            joint.modes.push_back(base.fronts[m].at(chosen[m]).genes);
        }
        joint = rename_processors(spec, joint);
        base.result.solution = joint;
        base.result.analysis = analyze(spec, joint, config.unroll);
        const auto& report = base.result.analysis.report;
        base.result.fitness = Fitness{report.feasible, report.processors, report.mig_cost_total, report.shortfall};
        if (report.feasible) {
            base.result.infeasibility.clear();
            return base;
        }
        bool upgraded = false;
        for (const auto& entry : report.modes) {
            if (entry.meets_requirement) {
                continue;
            }
            const auto& front = base.fronts[entry.mode];
            auto next = front.upper_bound(chosen[entry.mode]);
            if (next != front.end()) {
                chosen[entry.mode] = next->first;
                upgraded = true;
            }
        }
        if (!upgraded) {
            base.result.infeasibility = infeasibility_reason(spec, report);
            return base;
        }
    }
}

} // namespace mmdf
