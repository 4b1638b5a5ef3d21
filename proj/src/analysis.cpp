#include "mmdf/analysis.hpp"

#include "mmdf/errors.hpp"

#include <algorithm>
#include <stdexcept>

namespace mmdf {

Time mig_cost(const Spec& spec, const MappingSolution& mapping, ModeIndex cm, ModeIndex nm) {
    const auto current = processor_task_sets(gene_layout(spec, cm), mapping.modes.at(cm), spec.processor_pool);
    const auto next = processor_task_sets(gene_layout(spec, nm), mapping.modes.at(nm), spec.processor_pool);
    Time cost = 0;
    for (std::size_t p = 0; p < spec.processor_pool; ++p) {
        for (TaskIndex t : next[p]) {
            if (!current[p].contains(t)) {
                cost += spec.tasks[t].migration_cost;
            }
        }
    }
    return cost;
}

Time mig_cost_total(const Spec& spec, const MappingSolution& mapping) {
    Time total = 0;
    for (const auto& tr : spec.mtg.transitions) {
        total += mig_cost(spec, mapping, tr.from, tr.to);
    }
    return total;
}

Rational trans_delay(Time mig, const ModeSchedule& next) {
    if (next.initiation_interval > next.latency) {
        throw std::logic_error("schedule violates latency >= initiation interval");
    }
    return Rational(mig) + Rational(next.latency) - next.initiation_interval;
}

Rational max_trans_delay(const Spec& spec, const std::vector<Rational>& delays, ModeIndex mode) {
    Rational worst(0);
    for (std::size_t i = 0; i < spec.mtg.transitions.size(); ++i) {
        if (spec.mtg.transitions[i].to == mode) {
            worst = std::max(worst, delays.at(i));
        }
    }
    return worst;
}

std::optional<Rational> try_thr_require(const Spec& spec, ModeIndex mode, const Rational& max_delay) {
    const Rational thr = spec.throughput_constraint;
    const Rational mrc(spec.mtg.modes.at(mode).mrc);
    const Rational denominator = mrc - max_delay * thr;
    if (denominator <= 0) {
        return std::nullopt;
    }
    return thr * mrc / denominator;
}

Rational thr_require(const Spec& spec, ModeIndex mode, const Rational& max_delay) {
    auto r = try_thr_require(spec, mode, max_delay);
    if (!r) {
        throw InfeasibleError("mode '" + spec.mtg.modes.at(mode).name + "': transition delay " +
                              to_string(max_delay) + " consumes the whole throughput budget (MRC - delay*ThrConst <= 0)");
    }
    return *r;
}

Rational allowed_interval(const Spec& spec, ModeIndex mode, const Rational& max_delay) {
    return Rational(1) / spec.throughput_constraint - max_delay / Rational(spec.mtg.modes.at(mode).mrc);
}

Rational max_interval_overall(const Spec& spec, const std::vector<ModeSchedule>& schedules,
                              const std::vector<Rational>& delays) {
    Rational worst(0);
    if (spec.mtg.transitions.empty()) {
        for (const auto& s : schedules) {
            worst = std::max(worst, s.initiation_interval);
        }
        return worst;
    }
    for (std::size_t i = 0; i < spec.mtg.transitions.size(); ++i) {
        const auto& tr = spec.mtg.transitions[i];
        worst = std::max(worst, delays.at(i) + schedules.at(tr.to).initiation_interval);
    }
    return worst;
}

std::int64_t buffer_size(const Spec& spec, const std::vector<ModeSchedule>& schedules,
                         const std::vector<Rational>& delays) {
    return std::max<std::int64_t>(1, ceil(max_interval_overall(spec, schedules, delays) * spec.throughput_constraint));
}

std::vector<Rational> TransitionAnalysisReport::delays() const {
    std::vector<Rational> out;
    for (const auto& t : transitions) {
        out.push_back(t.trans_delay);
    }
    return out;
}

TransitionAnalysisReport analyze_transitions(const Spec& spec, const MappingSolution& mapping,
                                             const std::vector<ModeSchedule>& schedules) {
    TransitionAnalysisReport report;
    std::vector<Rational> delays;
    for (const auto& tr : spec.mtg.transitions) {
        TransitionEntry entry;
        entry.from = tr.from;
        entry.to = tr.to;
        entry.mig_cost = mig_cost(spec, mapping, tr.from, tr.to);
        entry.trans_delay = trans_delay(entry.mig_cost, schedules.at(tr.to));
        report.mig_cost_total += entry.mig_cost;
        delays.push_back(entry.trans_delay);
        report.transitions.push_back(entry);
    }
    report.feasible = true;
    for (ModeIndex m = 0; m < spec.mode_count(); ++m) {
        ModeEntry entry;
        entry.mode = m;
        entry.processors = used_processor_count(mapping.modes.at(m));
        entry.latency = schedules.at(m).latency;
        entry.initiation_interval = schedules.at(m).initiation_interval;
        entry.max_trans_delay = max_trans_delay(spec, delays, m);
        entry.thr_require = try_thr_require(spec, m, entry.max_trans_delay);
        entry.allowed_interval = allowed_interval(spec, m, entry.max_trans_delay);
        // 1/II >= ThrRequire  <=>  II <= allowed interval (when ThrRequire exists).
        entry.meets_requirement = entry.thr_require.has_value() && entry.initiation_interval <= entry.allowed_interval;
        if (!entry.meets_requirement) {
            report.feasible = false;
            report.shortfall += entry.initiation_interval - entry.allowed_interval;
        }
        report.processors = std::max(report.processors, entry.processors);
        report.modes.push_back(entry);
    }
    report.max_interval_overall = max_interval_overall(spec, schedules, delays);
    report.output_buffer_size = buffer_size(spec, schedules, delays);
    return report;
}

AnalysisResult analyze(const Spec& spec, const MappingSolution& mapping, std::int64_t unroll) {
    check_mapping(spec, mapping);
    AnalysisResult result;
    for (ModeIndex m = 0; m < spec.mode_count(); ++m) {
        result.schedules.push_back(ModeScheduler(spec, m).schedule(mapping.modes[m], gene_layout(spec, m), unroll));
    }
    result.report = analyze_transitions(spec, mapping, result.schedules);
    return result;
}

ArrivalCurves arrival_curves(const Spec& spec, ModeIndex mode, const Rational& max_delay, const Rational& thr,
                             std::int64_t periods) {
    if (thr <= 0) {
        throw std::invalid_argument("arrival_curves: throughput must be positive");
    }
    const Rational interval = Rational(1) / thr;
    const std::int64_t mrc = spec.mtg.modes.at(mode).mrc;
    const Rational stay = max_delay + interval * mrc;

    ArrivalCurves curves;
    curves.horizon = stay * periods;
    curves.input.push_back({Rational(0), 0});
    std::int64_t produced = 0;
    for (std::int64_t q = 0; q < periods; ++q) {
        for (std::int64_t j = 1; j <= mrc; ++j) {
            curves.input.push_back({stay * q + max_delay + interval * j, ++produced});
        }
    }

    const Rational thr_const = spec.throughput_constraint;
    const std::int64_t last = floor(curves.horizon * thr_const);
    for (std::int64_t k = 0; k <= last; ++k) {
        curves.output.push_back({Rational(k) / thr_const, k + 1});
    }
    return curves;
}

std::int64_t curve_value(const std::vector<Breakpoint>& curve, const Rational& delta) {
    std::int64_t value = 0;
    for (const auto& bp : curve) {
        if (bp.delta > delta) {
            break;
        }
        value = bp.count;
    }
    return value;
}

std::int64_t curve_value_before(const std::vector<Breakpoint>& curve, const Rational& delta) {
    std::int64_t value = 0;
    for (const auto& bp : curve) {
        if (bp.delta >= delta) {
            break;
        }
        value = bp.count;
    }
    return value;
}

namespace {

template <typename Pick>
std::int64_t scan_gap(const ArrivalCurves& curves, Pick pick) {
    // Both curves are right-continuous steps; extremes of their difference sit
    // at breakpoints or immediately before them.
    std::vector<Rational> points;
    for (const auto* curve : {&curves.input, &curves.output}) {
        for (const auto& bp : *curve) {
            if (bp.delta <= curves.horizon) {
                points.push_back(bp.delta);
            }
        }
    }
    points.push_back(curves.horizon);
    std::optional<std::int64_t> best;
    for (const auto& x : points) {
        best = pick(best, curve_value(curves.output, x) - curve_value(curves.input, x));
        if (x > 0) {
            best = pick(best, curve_value_before(curves.output, x) - curve_value_before(curves.input, x));
        }
    }
    return *best;
}

} // namespace

std::int64_t max_vertical_gap(const ArrivalCurves& curves) {
    return scan_gap(curves, [](std::optional<std::int64_t> a, std::int64_t b) { return a ? std::max(*a, b) : b; });
}

std::int64_t min_vertical_gap(const ArrivalCurves& curves) {
    return scan_gap(curves, [](std::optional<std::int64_t> a, std::int64_t b) { return a ? std::min(*a, b) : b; });
}

} // namespace mmdf
