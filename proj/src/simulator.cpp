#include "mmdf/simulator.hpp"

#include "mmdf/errors.hpp"

#include <algorithm>
#include <stdexcept>

namespace mmdf {

namespace {

std::optional<std::size_t> edge_index(const Spec& spec, ModeIndex from, ModeIndex to) {
    for (std::size_t i = 0; i < spec.mtg.transitions.size(); ++i) {
        if (spec.mtg.transitions[i].from == from && spec.mtg.transitions[i].to == to) {
            return i;
        }
    }
    return std::nullopt;
}

} // namespace

void validate_trace(const Spec& spec, const ModeTrace& trace) {
    if (trace.empty()) {
        throw ValidationError("mode trace is empty");
    }
    for (std::size_t i = 0; i < trace.size(); ++i) {
        const auto& stay = trace[i];
        if (stay.mode >= spec.mode_count()) {
            throw ValidationError("mode trace entry " + std::to_string(i) + " names an unknown mode");
        }
        const auto& mode = spec.mtg.modes[stay.mode];
        if (stay.iterations < mode.mrc) {
            throw ValidationError("mode trace entry " + std::to_string(i) + ": stay of " +
                                  std::to_string(stay.iterations) + " iterations in '" + mode.name +
                                  "' is below its MRC " + std::to_string(mode.mrc));
        }
        if (i > 0 && !edge_index(spec, trace[i - 1].mode, stay.mode)) {
            throw ValidationError("mode trace entry " + std::to_string(i) + ": no transition '" +
                                  spec.mtg.modes[trace[i - 1].mode].name + "' -> '" + mode.name + "'");
        }
    }
}

const char* to_string(SimEventKind kind) {
    switch (kind) {
    case SimEventKind::produce:
        return "produce";
    case SimEventKind::consume:
        return "consume";
    case SimEventKind::transition_start:
        return "transition_start";
    case SimEventKind::transition_end:
        return "transition_end";
    }
    return "?";
}

SimTrace simulate(const Spec& spec, const AnalysisResult& analysis, const ModeTrace& trace, std::int64_t buffer,
                  SimOptions options) {
    validate_trace(spec, trace);
    if (buffer < 1) {
        throw std::invalid_argument("buffer size must be positive");
    }
    if (analysis.schedules.size() != spec.mode_count()) {
        throw ValidationError("analysis does not cover every mode of the spec");
    }

    SimTrace out;
    const Rational period = Rational(1) / spec.throughput_constraint;
    std::optional<Rational> next_consume;
    std::int64_t occupancy = 0;

    auto consume_once = [&] {
        const Rational t = *next_consume;
        --occupancy;
        out.events.push_back({t, SimEventKind::consume, occupancy});
        if (occupancy < 0) {
            out.passed = false;
            out.underflow_time = t;
            return;
        }
        ++out.consumed;
        *next_consume += period;
    };
    // Dequeues strictly before `limit` (or up to it when `inclusive`).
    auto consume_until = [&](const Rational& limit, bool inclusive) {
        while (out.passed && next_consume && (*next_consume < limit || (inclusive && *next_consume == limit))) {
            consume_once();
        }
    };
    auto produce = [&](Rational ready) -> std::optional<Rational> {
        consume_until(ready, false);
        if (!out.passed) {
            return std::nullopt;
        }
        if (options.bounded && occupancy >= buffer) {
            // Full: the write waits for the next dequeue.
            ready = *next_consume;
            consume_once();
        }
        ++occupancy;
        ++out.produced;
        out.max_occupancy = std::max(out.max_occupancy, occupancy);
        out.events.push_back({ready, SimEventKind::produce, occupancy});
        if (!next_consume && (options.start == ConsumerStart::immediate || occupancy >= buffer)) {
            next_consume = ready;
            consume_once();
        }
        return ready;
    };

    Rational last_write(0);
    for (std::size_t i = 0; i < trace.size() && out.passed; ++i) {
        const auto& s = analysis.schedules[trace[i].mode];
        Rational ready = last_write + Rational(s.latency);
        if (i > 0) {
            const auto e = *edge_index(spec, trace[i - 1].mode, trace[i].mode);
            const Rational delay = analysis.report.transitions.at(e).trans_delay;
            consume_until(last_write, true);
            out.events.push_back({last_write, SimEventKind::transition_start, occupancy});
            consume_until(last_write + delay, false);
            out.events.push_back({last_write + delay, SimEventKind::transition_end, occupancy});
            ready = last_write + delay + s.initiation_interval;
        }
        for (std::int64_t k = 0; k < trace[i].iterations && out.passed; ++k) {
            auto written = produce(ready);
            if (!written) {
                break;
            }
            last_write = *written;
            ready = last_write + s.initiation_interval;
        }
    }
    if (out.passed) {
        consume_until(last_write, true);
    }
    out.end_time = last_write;
    return out;
}

ModeTrace worst_case_trace(const Spec& spec, const std::vector<Rational>& delays, std::size_t length) {
    if (length == 0) {
        throw std::invalid_argument("trace length must be positive");
    }
    const std::size_t n = spec.mode_count();
    // best[k][m]: largest delay of a walk of k+1 stays ending in m; pred for reconstruction.
    std::vector<std::vector<std::optional<Rational>>> best(length, std::vector<std::optional<Rational>>(n));
    std::vector<std::vector<ModeIndex>> pred(length, std::vector<ModeIndex>(n, 0));
    best[0][spec.mtg.initial_mode] = Rational(0);
    std::size_t reached = 0;
    for (std::size_t k = 1; k < length; ++k) {
        bool any = false;
        for (ModeIndex from = 0; from < n; ++from) {
            if (!best[k - 1][from]) {
                continue;
            }
            for (std::size_t e = 0; e < spec.mtg.transitions.size(); ++e) {
                const auto& tr = spec.mtg.transitions[e];
                if (tr.from != from) {
                    continue;
                }
                const Rational v = *best[k - 1][from] + delays.at(e);
                auto& slot = best[k][tr.to];
                if (!slot || v > *slot || (v == *slot && from < pred[k][tr.to])) {
                    slot = v;
                    pred[k][tr.to] = from;
                }
                any = true;
            }
        }
        if (!any) {
            break;
        }
        reached = k;
    }
    ModeIndex end = n;
    for (ModeIndex m = 0; m < n; ++m) {
        if (best[reached][m] && (end == n || *best[reached][m] > *best[reached][end])) {
            end = m;
        }
    }
    ModeTrace out(reached + 1);
    for (std::size_t k = reached + 1; k-- > 0;) {
        out[k] = {end, spec.mtg.modes[end].mrc};
        end = k > 0 ? pred[k][end] : end;
    }
    return out;
}

Rational trace_delay(const Spec& spec, const std::vector<Rational>& delays, const ModeTrace& trace) {
    Rational total(0);
    for (std::size_t i = 1; i < trace.size(); ++i) {
        const auto e = edge_index(spec, trace[i - 1].mode, trace[i].mode);
        if (!e) {
            throw ValidationError("trace follows a missing transition");
        }
        total += delays.at(*e);
    }
    return total;
}

} // namespace mmdf
