#pragma once

#include "mmdf/mapping.hpp"
#include "mmdf/model.hpp"
#include "mmdf/rational.hpp"
#include "mmdf/scheduler.hpp"

#include <optional>
#include <vector>

namespace mmdf {

/// Sum of MC(t) over t in Map(nm, p) - Map(cm, p), for every processor p.
Time mig_cost(const Spec& spec, const MappingSolution& mapping, ModeIndex cm, ModeIndex nm);

/// mig_cost summed over every transition of the MTG.
Time mig_cost_total(const Spec& spec, const MappingSolution& mapping);

/// mig + Latency(nm) - InitiationInterval(nm).
Rational trans_delay(Time mig, const ModeSchedule& next);

/// Largest delay over transitions entering `mode`; 0 when none enter it.
/// `delays` is indexed like spec.mtg.transitions.
Rational max_trans_delay(const Spec& spec, const std::vector<Rational>& delays, ModeIndex mode);

/// ThrConst * MRC / (MRC - max_delay * ThrConst). Throws InfeasibleError when
/// the denominator is not positive.
Rational thr_require(const Spec& spec, ModeIndex mode, const Rational& max_delay);
std::optional<Rational> try_thr_require(const Spec& spec, ModeIndex mode, const Rational& max_delay);

/// Largest initiation interval that still meets the requirement of `mode`:
/// 1/ThrConst - max_delay/MRC. Nonpositive when the mode is infeasible.
Rational allowed_interval(const Spec& spec, ModeIndex mode, const Rational& max_delay);

/// max over transitions of TransDelay(cm,nm) + II(nm); max II without transitions.
Rational max_interval_overall(const Spec& spec, const std::vector<ModeSchedule>& schedules,
                              const std::vector<Rational>& delays);

/// ceil(MaxInterval_overall * ThrConst), at least 1.
std::int64_t buffer_size(const Spec& spec, const std::vector<ModeSchedule>& schedules,
                         const std::vector<Rational>& delays);

struct TransitionEntry {
    ModeIndex from = 0;
    ModeIndex to = 0;
    Time mig_cost = 0;
    Rational trans_delay{0};
};

struct ModeEntry {
    ModeIndex mode = 0;
    std::size_t processors = 0;
    Time latency = 0;
    Rational initiation_interval{1};
    Rational max_trans_delay{0};
    std::optional<Rational> thr_require; // empty when infeasible at any schedule
    Rational allowed_interval{0};
    bool meets_requirement = false;
};

struct TransitionAnalysisReport {
    std::vector<TransitionEntry> transitions; // same order as spec.mtg.transitions
    std::vector<ModeEntry> modes;
    Time mig_cost_total = 0;
    Rational max_interval_overall{0};
    std::int64_t output_buffer_size = 1;
    std::size_t processors = 0;
    bool feasible = false;
    /// Sum over modes of max(0, II - allowed interval).
    Rational shortfall{0};

    std::vector<Rational> delays() const;
};

TransitionAnalysisReport analyze_transitions(const Spec& spec, const MappingSolution& mapping,
                                             const std::vector<ModeSchedule>& schedules);

struct AnalysisResult {
    std::vector<ModeSchedule> schedules;
    TransitionAnalysisReport report;
};

/// Schedules every mode under `mapping` and runs the transition analysis.
AnalysisResult analyze(const Spec& spec, const MappingSolution& mapping, std::int64_t unroll = kDefaultUnroll);

/// Step of a piecewise-constant curve: `count` holds from `delta` up to the next breakpoint.
struct Breakpoint {
    Rational delta{0};
    std::int64_t count = 0;

    bool operator==(const Breakpoint&) const = default;
};

struct ArrivalCurves {
    std::vector<Breakpoint> input;  // minimum arrivals into the output buffer
    std::vector<Breakpoint> output; // maximum departures to the periodic consumer
    Rational horizon{0};
};

/// Minimum input curve of `mode` (one sample per iteration every 1/thr,
/// MRC samples per stay, each stay preceded by max_delay of silence) and
/// maximum output curve floor(dt*ThrConst)+1, both up to `periods` stays.
ArrivalCurves arrival_curves(const Spec& spec, ModeIndex mode, const Rational& max_delay, const Rational& thr,
                             std::int64_t periods = 3);

/// Value of a breakpoint curve at `delta` (right-continuous).
std::int64_t curve_value(const std::vector<Breakpoint>& curve, const Rational& delta);
/// Left limit of a breakpoint curve at `delta`.
std::int64_t curve_value_before(const std::vector<Breakpoint>& curve, const Rational& delta);

/// Largest output-minus-input difference over [0, horizon].
std::int64_t max_vertical_gap(const ArrivalCurves& curves);
/// Smallest output-minus-input difference over [0, horizon].
std::int64_t min_vertical_gap(const ArrivalCurves& curves);

} // namespace mmdf
