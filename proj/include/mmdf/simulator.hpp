#pragma once

#include "mmdf/analysis.hpp"
#include "mmdf/model.hpp"
#include "mmdf/rational.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mmdf {

struct ModeStay {
    ModeIndex mode = 0;
    std::int64_t iterations = 0;

    bool operator==(const ModeStay&) const = default;
};

/// Sequence of stays; consecutive modes must be MTG edges and every stay
/// must last at least MRC iterations.
using ModeTrace = std::vector<ModeStay>;

/// Throws ValidationError when the trace is empty, names an unknown mode,
/// stays shorter than MRC or follows a missing MTG edge.
void validate_trace(const Spec& spec, const ModeTrace& trace);

enum class SimEventKind { produce, consume, transition_start, transition_end };

const char* to_string(SimEventKind kind);

struct SimEvent {
    Rational time{0};
    SimEventKind kind = SimEventKind::produce;
    std::int64_t occupancy = 0; // after the event
};

enum class ConsumerStart {
    primed,    // first dequeue when occupancy first reaches the buffer size
    immediate, // first dequeue at the first production
};

struct SimOptions {
    ConsumerStart start = ConsumerStart::primed;
    /// When set the buffer holds at most `buffer` samples and a completed
    /// iteration waits for a free slot before its sample is written.
    bool bounded = true;
};

struct SimTrace {
    std::vector<SimEvent> events;
    bool passed = true;
    std::optional<Rational> underflow_time;
    std::int64_t produced = 0;
    std::int64_t consumed = 0;
    std::int64_t max_occupancy = 0;
    Rational end_time{0};
};

/// Replays `trace` under the blocking protocol. The first sample of a stay
/// is written Latency after the stay starts (II after the transition delay
/// for later stays) and each further sample II after the previous write.
/// A boundary starts at the last write of a stay and lasts the transition
/// delay. The consumer removes one sample every 1/ThrConst; consumption is
/// checked up to the last write and the run fails at the first dequeue from
/// an empty buffer. At equal instants a write precedes a dequeue unless the
/// buffer is full.
SimTrace simulate(const Spec& spec, const AnalysisResult& analysis, const ModeTrace& trace, std::int64_t buffer,
                  SimOptions options = {});

/// Walk from the initial mode with every stay lasting exactly MRC that
/// maximises the summed transition delay over `length` stays (shorter when
/// every walk reaches a mode without outgoing transitions). `delays` is
/// indexed like spec.mtg.transitions. Ties prefer lower mode indices.
ModeTrace worst_case_trace(const Spec& spec, const std::vector<Rational>& delays, std::size_t length);

/// Summed transition delay along a trace.
Rational trace_delay(const Spec& spec, const std::vector<Rational>& delays, const ModeTrace& trace);

} // namespace mmdf
