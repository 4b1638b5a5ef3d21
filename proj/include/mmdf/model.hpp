#pragma once

#include "mmdf/rational.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mmdf {

using TaskIndex = std::size_t;
using ModeIndex = std::size_t;
using ChannelIndex = std::size_t;

enum class PortDirection { input, output };

struct Port {
    std::string name;
    PortDirection direction = PortDirection::input;
    std::vector<std::int64_t> rate; // indexed by mode

    bool operator==(const Port&) const = default;
};

struct Task {
    std::string name;
    std::vector<Port> ports;
    std::vector<Time> wcet; // indexed by mode
    Time migration_cost = 0;

    bool operator==(const Task&) const = default;
};

struct PortRef {
    TaskIndex task = 0;
    std::size_t port = 0;

    bool operator==(const PortRef&) const = default;
};

struct Channel {
    PortRef src;
    PortRef dst;
    std::vector<std::int64_t> initial_tokens; // indexed by mode

    bool operator==(const Channel&) const = default;
};

struct Mode {
    std::string name;
    std::int64_t mrc = 1; // minimum repetition count

    bool operator==(const Mode&) const = default;
};

struct Transition {
    ModeIndex from = 0;
    ModeIndex to = 0;

    bool operator==(const Transition&) const = default;
};

struct ModeTransitionGraph {
    std::vector<Mode> modes;
    std::vector<Transition> transitions;
    ModeIndex initial_mode = 0;

    bool operator==(const ModeTransitionGraph&) const = default;
};

/// Multi-mode dataflow application plus its platform bound.
///
/// A plain value: construct it (usually through load_spec), run validate()
/// once, and share it read-only afterwards. Per-mode quantities (rates,
/// WCETs, initial tokens) are vectors indexed by ModeIndex.
struct Spec {
    std::vector<Task> tasks;
    std::vector<Channel> channels;
    ModeTransitionGraph mtg;
    Rational throughput_constraint{1};
    std::size_t processor_pool = 1;
    /// When set, every firing of a task inside one iteration carries its own gene.
    bool instance_mapping = false;

    std::size_t mode_count() const { return mtg.modes.size(); }
    std::size_t task_count() const { return tasks.size(); }
    std::optional<ModeIndex> find_mode(std::string_view name) const;
    std::optional<TaskIndex> find_task(std::string_view name) const;

    const Port& port(const PortRef& ref) const { return tasks[ref.task].ports[ref.port]; }
    std::int64_t production(ChannelIndex c, ModeIndex m) const { return port(channels[c].src).rate[m]; }
    std::int64_t consumption(ChannelIndex c, ModeIndex m) const { return port(channels[c].dst).rate[m]; }

    bool operator==(const Spec&) const = default;
};

/// Firings per task in one iteration of a mode.
struct RepetitionVector {
    std::vector<std::int64_t> firings; // indexed by task

    std::int64_t operator[](TaskIndex t) const { return firings[t]; }
    std::int64_t total() const;
    bool operator==(const RepetitionVector&) const = default;
};

/// Smallest positive integer solution of the balance equations of `mode`.
/// Each weakly connected component is normalised independently.
RepetitionVector repetition_vector(const Spec& spec, ModeIndex mode);

/// Checks every model invariant, including per-mode consistency and
/// deadlock freedom. Throws ValidationError (or a subclass) naming the
/// violated invariant and the offending entity.
void validate(const Spec& spec);

/// Parses and validates a graph document (JSON).
Spec load_spec(std::string_view document);
Spec load_spec_file(const std::filesystem::path& path);

/// Inverse of load_spec: emits the canonical document form.
std::string serialize(const Spec& spec);

/// Copy of `spec` with MC(t) replaced for every task.
Spec with_uniform_migration_cost(const Spec& spec, Time cost);
/// Copy of `spec` with MC(t) multiplied by `factor` for every task.
Spec with_scaled_migration_cost(const Spec& spec, std::int64_t factor);

std::string read_text_file(const std::filesystem::path& path);

} // namespace mmdf
