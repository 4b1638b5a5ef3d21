#pragma once

#include "mmdf/mapping.hpp"
#include "mmdf/model.hpp"
#include "mmdf/rational.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace mmdf {

inline constexpr std::int64_t kDefaultUnroll = 20;

/// One firing of a task inside an iteration.
struct Firing {
    TaskIndex task = 0;
    std::int64_t instance = 0;
    Time wcet = 0;
};

/// Firing `producer` of iteration (i + iteration_offset) must finish before
/// the dependent firing of iteration i starts. Offsets are never positive;
/// negative offsets come from initial tokens.
struct Dependency {
    std::size_t producer = 0;
    std::int64_t iteration_offset = 0;

    bool operator==(const Dependency&) const = default;
    auto operator<=>(const Dependency&) const = default;
};

/// Firing-level precedence structure of one mode, independent of the mapping.
struct ModeGraph {
    ModeIndex mode = 0;
    RepetitionVector reps;
    std::vector<Firing> firings;
    std::vector<std::vector<Dependency>> deps; // indexed by consumer firing
    std::vector<std::size_t> first_firing;     // indexed by task
    /// Static priority (upward rank) of every firing; larger runs first.
    std::vector<Time> rank;
    /// Position of each firing when sorted by (task name, instance); breaks rank ties.
    std::vector<std::size_t> name_order;
    /// Number of past iterations the state of an iteration depends on (>= 1).
    std::int64_t lookback = 1;
};

/// Throws DeadlockError if the intra-iteration precedence graph has a cycle.
ModeGraph build_mode_graph(const Spec& spec, ModeIndex mode);

struct Placement {
    TaskIndex task = 0;
    std::int64_t instance = 0;
    std::int64_t iteration = 0;
    Time start = 0;
    Time finish = 0;

    bool operator==(const Placement&) const = default;
};

/// Static schedule of one mode under a fixed mapping.
struct ModeSchedule {
    ModeIndex mode = 0;
    /// placements[p]: firings on processor p ordered by start time.
    std::vector<std::vector<Placement>> placements;
    Time latency = 0;
    Rational initiation_interval{1};
    std::vector<ProcessorId> used_processors;
    /// False when the interval is a conservative upper bound rather than exact.
    bool steady_state_found = false;

    bool operator==(const ModeSchedule&) const = default;
};

/// Self-timed repetition of a fixed per-processor firing order.
struct SteadyState {
    Time latency = 0;
    Rational initiation_interval{1};
    bool periodic = false;
    std::int64_t transient = 0; // first iteration of the detected cycle
    std::int64_t period = 0;    // cycle length in iterations
    /// Maximum cycle ratio of the folded precedence and processor-order graph.
    Rational cycle_ratio{0};
    /// True when the interval is the exact supremum of (c_j - c_0)/j rather than an upper bound.
    bool exact = false;
    std::vector<Time> completions; // completion instant of each simulated iteration
};

/// Builds schedules for many mappings of one mode without rebuilding the graph.
class ModeScheduler {
public:
    ModeScheduler(const Spec& spec, ModeIndex mode);
    explicit ModeScheduler(ModeGraph graph, std::size_t pool);

    const ModeGraph& graph() const { return graph_; }

    /// Event-driven list schedule of iteration 0 followed by steady-state
    /// analysis over `unroll` self-timed iterations.
    ModeSchedule schedule(const ModeMapping& genes, const GeneLayout& layout,
                          std::int64_t unroll = kDefaultUnroll) const;

    /// Per-processor firing order of iteration 0 (firing indices).
    std::vector<std::vector<std::size_t>> firing_order(const ModeMapping& genes, const GeneLayout& layout) const;

    SteadyState steady_state(const ModeMapping& genes, const GeneLayout& layout, std::int64_t unroll) const;

    /// Placements of the first `iterations` self-timed iterations.
    ModeSchedule unrolled(const ModeMapping& genes, const GeneLayout& layout, std::int64_t iterations,
                          std::int64_t unroll = kDefaultUnroll) const;

private:
    struct ListResult {
        std::vector<Time> start;
        std::vector<Time> finish;
        std::vector<std::vector<std::size_t>> order; // per processor
    };
    ListResult list_iteration(const std::vector<ProcessorId>& proc) const;
    std::vector<ProcessorId> processors_of(const ModeMapping& genes, const GeneLayout& layout) const;

    struct Replay {
        std::vector<std::vector<Time>> start;  // [iteration][firing]
        std::vector<std::vector<Time>> finish; // [iteration][firing]
    };
    Replay replay(const ListResult& first, const std::vector<ProcessorId>& proc, std::int64_t iterations) const;
    SteadyState analyse(const Replay& run, const ListResult& first, const std::vector<ProcessorId>& proc) const;

    ModeGraph graph_;
    std::size_t pool_;
};

/// list_schedule: static schedule of `mode` honoring `genes`.
ModeSchedule list_schedule(const Spec& spec, ModeIndex mode, const ModeMapping& genes,
                           std::int64_t unroll = kDefaultUnroll);

/// (latency, initiation interval) of the self-timed repetition; unroll >= 2.
std::pair<Time, Rational> steady_state_metrics(const Spec& spec, ModeIndex mode, const ModeMapping& genes,
                                               std::int64_t unroll = kDefaultUnroll);

/// Plain-text Gantt chart, one row per used processor.
std::string gantt_text(const Spec& spec, const ModeSchedule& schedule);

/// SVG Gantt chart, one row per used processor.
std::string gantt_svg(const Spec& spec, const ModeSchedule& schedule);

} // namespace mmdf
