#include "mmdf/scheduler.hpp"

#include "mmdf/errors.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>

namespace mmdf {

ModeGraph build_mode_graph(const Spec& spec, ModeIndex mode) {
    ModeGraph g;
    g.mode = mode;
    g.reps = repetition_vector(spec, mode);
    for (TaskIndex t = 0; t < spec.tasks.size(); ++t) {
        g.first_firing.push_back(g.firings.size());
        for (std::int64_t k = 0; k < g.reps[t]; ++k) {
            g.firings.push_back(Firing{t, k, spec.tasks[t].wcet[mode]});
        }
    }
    const std::size_t n = g.firings.size();
    g.deps.assign(n, {});

    std::int64_t deepest = 0;
    for (ChannelIndex c = 0; c < spec.channels.size(); ++c) {
        const auto& ch = spec.channels[c];
        const std::int64_t prod = spec.production(c, mode);
        const std::int64_t cons = spec.consumption(c, mode);
        const std::int64_t tokens = ch.initial_tokens[mode];
        const std::int64_t src_reps = g.reps[ch.src.task];
        for (std::int64_t k = 0; k < g.reps[ch.dst.task]; ++k) {
            // Tokens [k*cons, (k+1)*cons) of iteration 0; token j comes from
            // producer firing floor((j - tokens) / prod) when j >= tokens.
            const std::int64_t lo = floor_div(k * cons - tokens, prod);
            const std::int64_t hi = floor_div((k + 1) * cons - 1 - tokens, prod);
            auto& out = g.deps[g.first_firing[ch.dst.task] + static_cast<std::size_t>(k)];
            for (std::int64_t global = lo; global <= hi; ++global) {
                Dependency dep;
                dep.producer = g.first_firing[ch.src.task] + static_cast<std::size_t>(positive_mod(global, src_reps));
                dep.iteration_offset = floor_div(global, src_reps);
                deepest = std::max(deepest, -dep.iteration_offset);
                out.push_back(dep);
            }
        }
    }
    for (auto& d : g.deps) {
        std::sort(d.begin(), d.end());
        d.erase(std::unique(d.begin(), d.end()), d.end());
    }
    g.lookback = std::max<std::int64_t>(1, deepest + 1);

    // Kahn over intra-iteration edges.
    std::vector<std::vector<std::size_t>> succ(n);
    std::vector<std::size_t> indegree(n, 0);
    for (std::size_t f = 0; f < n; ++f) {
        for (const auto& d : g.deps[f]) {
            if (d.iteration_offset == 0) {
                succ[d.producer].push_back(f);
                ++indegree[f];
            }
        }
    }
    std::vector<std::size_t> topo;
    for (std::size_t f = 0; f < n; ++f) {
        if (indegree[f] == 0) {
            topo.push_back(f);
        }
    }
    for (std::size_t i = 0; i < topo.size(); ++i) {
        for (std::size_t s : succ[topo[i]]) {
            if (--indegree[s] == 0) {
                topo.push_back(s);
            }
        }
    }
    if (topo.size() != n) {
        for (std::size_t f = 0; f < n; ++f) {
            if (indegree[f] != 0) {
                throw DeadlockError("mode '" + spec.mtg.modes[mode].name + "' deadlocks: firing " +
                                    spec.tasks[g.firings[f].task].name + "#" +
                                    std::to_string(g.firings[f].instance) +
                                    " lies on a precedence cycle without enough initial tokens");
            }
        }
    }

    g.rank.assign(n, 0);
    for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
        Time below = 0;
        for (std::size_t s : succ[*it]) {
            below = std::max(below, g.rank[s]);
        }
        g.rank[*it] = g.firings[*it].wcet + below;
    }

    std::vector<std::size_t> by_name(n);
    for (std::size_t f = 0; f < n; ++f) {
        by_name[f] = f;
    }
    std::sort(by_name.begin(), by_name.end(), [&](std::size_t a, std::size_t b) {
        const auto& na = spec.tasks[g.firings[a].task].name;
        const auto& nb = spec.tasks[g.firings[b].task].name;
        if (na != nb) {
            return na < nb;
        }
        return g.firings[a].instance < g.firings[b].instance;
    });
    g.name_order.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        g.name_order[by_name[i]] = i;
    }
    return g;
}

ModeScheduler::ModeScheduler(const Spec& spec, ModeIndex mode)
    : graph_(build_mode_graph(spec, mode)), pool_(spec.processor_pool) {}

ModeScheduler::ModeScheduler(ModeGraph graph, std::size_t pool) : graph_(std::move(graph)), pool_(pool) {}

std::vector<ProcessorId> ModeScheduler::processors_of(const ModeMapping& genes, const GeneLayout& layout) const {
    std::vector<ProcessorId> out(graph_.firings.size());
    for (std::size_t f = 0; f < graph_.firings.size(); ++f) {
        out[f] = genes.at(layout.gene(graph_.firings[f].task, graph_.firings[f].instance));
        if (out[f] >= pool_) {
            throw ValidationError("processor id " + std::to_string(out[f]) + " outside the pool");
        }
    }
    return out;
}

// Event-driven list scheduling of iteration 0: whenever a processor is idle
// it starts the highest-priority ready firing mapped to it.
ModeScheduler::ListResult ModeScheduler::list_iteration(const std::vector<ProcessorId>& proc) const {
    const auto& g = graph_;
    const std::size_t n = g.firings.size();
    ListResult r;
    r.start.assign(n, -1);
    r.finish.assign(n, -1);
    r.order.assign(pool_, {});

    std::vector<std::vector<std::size_t>> candidates(pool_);
    for (std::size_t f = 0; f < n; ++f) {
        candidates[proc[f]].push_back(f);
    }
    auto higher = [&](std::size_t a, std::size_t b) {
        if (g.rank[a] != g.rank[b]) {
            return g.rank[a] > g.rank[b];
        }
        return g.name_order[a] < g.name_order[b];
    };
    auto ready_at = [&](std::size_t f, Time t) {
        for (const auto& d : g.deps[f]) {
            if (d.iteration_offset == 0 && (r.finish[d.producer] < 0 || r.finish[d.producer] > t)) {
                return false;
            }
        }
        return true;
    };

    std::vector<Time> busy_until(pool_, 0);
    std::size_t placed = 0;
    Time now = 0;
    while (placed < n) {
        for (std::size_t p = 0; p < pool_; ++p) {
            if (busy_until[p] > now) {
                continue;
            }
            std::optional<std::size_t> best;
            for (std::size_t f : candidates[p]) {
                if (r.start[f] >= 0 || !ready_at(f, now)) {
                    continue;
                }
                if (!best || higher(f, *best)) {
                    best = f;
                }
            }
            if (best) {
                r.start[*best] = now;
                r.finish[*best] = now + g.firings[*best].wcet;
                busy_until[p] = r.finish[*best];
                r.order[p].push_back(*best);
                ++placed;
            }
        }
        if (placed == n) {
            break;
        }
        std::optional<Time> next;
        for (Time b : busy_until) {
            if (b > now && (!next || b < *next)) {
                next = b;
            }
        }
        if (!next) {
            throw DeadlockError("list scheduler stalled: no complete iteration under this mapping");
        }
        now = *next;
    }
    return r;
}

namespace {

// Firings in list-schedule start order; every processor replays its share in this order.
std::vector<std::size_t> start_order(const std::vector<Time>& start) {
    std::vector<std::size_t> sequence(start.size());
    for (std::size_t f = 0; f < sequence.size(); ++f) {
        sequence[f] = f;
    }
    std::stable_sort(sequence.begin(), sequence.end(),
                     [&](std::size_t a, std::size_t b) { return start[a] < start[b]; });
    return sequence;
}

// Edge of the folded graph: `to` of iteration i waits for `from` of iteration i - distance.
struct FoldedEdge {
    std::size_t from = 0;
    std::size_t to = 0;
    std::int64_t distance = 0;
};

struct CycleBound {
    Rational ratio{0};
    std::vector<Rational> potential;
};

// Maximum cycle ratio (sum of WCETs over sum of distances) by repeated
// positive-cycle search, together with a potential p satisfying
// p(to) >= p(from) + wcet(to) - ratio * distance on every edge.
CycleBound max_cycle_ratio(const ModeGraph& g, const std::vector<FoldedEdge>& edges, Rational ratio) {
    const std::size_t n = g.firings.size();
    for (;;) {
        std::vector<Rational> pot(n);
        for (std::size_t v = 0; v < n; ++v) {
            pot[v] = Rational(g.firings[v].wcet);
        }
        std::vector<std::size_t> parent(n, edges.size());
        std::size_t changed = n;
        for (std::size_t pass = 0; pass <= n; ++pass) {
            changed = n;
            for (std::size_t e = 0; e < edges.size(); ++e) {
                const auto& edge = edges[e];
                const Rational cand =
                    pot[edge.from] + Rational(g.firings[edge.to].wcet) - ratio * Rational(edge.distance);
                if (cand > pot[edge.to]) {
                    pot[edge.to] = cand;
                    parent[edge.to] = e;
                    changed = edge.to;
                }
            }
            if (changed == n) {
                return {ratio, std::move(pot)};
            }
        }
        std::size_t v = changed;
        for (std::size_t i = 0; i < n; ++i) {
            v = edges[parent[v]].from;
        }
        Time weight = 0;
        std::int64_t distance = 0;
        std::size_t u = v;
        do {
            const auto& edge = edges[parent[u]];
            weight += g.firings[u].wcet;
            distance += edge.distance;
            u = edge.from;
        } while (u != v);
        if (distance <= 0 || Rational(weight, distance) <= ratio) {
            throw std::logic_error("cycle ratio search did not improve");
        }
        ratio = Rational(weight, distance);
    }
}

} // namespace

// Re-executes the per-processor order of iteration 0 for several iterations.
// Firings are visited in iteration-0 start order, which is consistent with
// both intra-iteration precedence and processor order.
ModeScheduler::Replay ModeScheduler::replay(const ListResult& first, const std::vector<ProcessorId>& proc,
                                            std::int64_t iterations) const {
    const auto& g = graph_;
    const std::size_t n = g.firings.size();
    const std::vector<std::size_t> sequence = start_order(first.start);

    Replay run;
    std::vector<Time> ready(pool_, 0);
    for (std::int64_t i = 0; i < iterations; ++i) {
        std::vector<Time> start(n, 0);
        std::vector<Time> finish(n, 0);
        for (std::size_t f : sequence) {
            Time t = ready[proc[f]];
            for (const auto& d : g.deps[f]) {
                std::int64_t source = i + d.iteration_offset;
                if (source < 0) {
                    continue; // initial token
                }
                Time produced = d.iteration_offset == 0 ? finish[d.producer]
                                                        : run.finish[static_cast<std::size_t>(source)][d.producer];
                t = std::max(t, produced);
            }
            start[f] = t;
            finish[f] = t + g.firings[f].wcet;
            ready[proc[f]] = finish[f];
        }
        run.start.push_back(std::move(start));
        run.finish.push_back(std::move(finish));
    }
    return run;
}

SteadyState ModeScheduler::analyse(const Replay& run, const ListResult& first,
                                   const std::vector<ProcessorId>& proc) const {
    const auto iterations = static_cast<std::int64_t>(run.finish.size());
    SteadyState ss;
    for (const auto& finish : run.finish) {
        ss.completions.push_back(*std::max_element(finish.begin(), finish.end()));
    }
    const Time first_start = *std::min_element(run.start[0].begin(), run.start[0].end());
    ss.latency = ss.completions[0] - first_start;
    const Time c0 = ss.completions[0];

    // Largest observed slope of completions from iteration 0.
    Rational observed(0);
    for (std::int64_t j = 1; j < iterations; ++j) {
        observed = std::max(observed, Rational(ss.completions[static_cast<std::size_t>(j)] - c0, j));
    }

    // Asymptotic bound: with ratio r and potential p, every finish time obeys
    // F(v, i) <= p(v) + c + r*i where c = max(wcet - p), hence
    // c_k - c_0 <= r*k + K with K = max p + c - c_0.
    std::vector<FoldedEdge> edges;
    for (std::size_t f = 0; f < graph_.firings.size(); ++f) {
        for (const auto& d : graph_.deps[f]) {
            edges.push_back({d.producer, f, -d.iteration_offset});
        }
    }
    Rational ring(0);
    std::vector<std::vector<std::size_t>> rows(pool_);
    for (std::size_t f : start_order(first.start)) {
        rows[proc[f]].push_back(f);
    }
    for (const auto& row : rows) {
        if (row.empty()) {
            continue;
        }
        Time work = 0;
        for (std::size_t i = 0; i < row.size(); ++i) {
            work += graph_.firings[row[i]].wcet;
            if (i + 1 < row.size()) {
                edges.push_back({row[i], row[i + 1], 0});
            }
        }
        edges.push_back({row.back(), row.front(), 1});
        ring = std::max(ring, Rational(work));
    }
    const CycleBound bound = max_cycle_ratio(graph_, edges, ring);
    ss.cycle_ratio = bound.ratio;
    Rational top = bound.potential[0];
    Rational slack = Rational(graph_.firings[0].wcet) - bound.potential[0];
    for (std::size_t v = 0; v < graph_.firings.size(); ++v) {
        top = std::max(top, bound.potential[v]);
        slack = std::max(slack, Rational(graph_.firings[v].wcet) - bound.potential[v]);
    }
    const Rational excess = top + slack - Rational(c0);
    Rational ii = std::max(observed, bound.ratio);
    if (excess > 0) {
        // Iterations past the unrolled horizon N satisfy slope <= r + K/N.
        ii = std::max(observed, bound.ratio + excess / Rational(iterations - 1));
    }

    // The future of a self-timed run depends only on the finish times of the
    // last `lookback` iterations; a repeated (shift-normalised) state means
    // the run is periodic from there on.
    const std::int64_t depth = graph_.lookback;
    std::map<std::vector<Time>, std::int64_t> seen;
    for (std::int64_t i = depth - 1; i < iterations; ++i) {
        std::vector<Time> state;
        state.reserve(static_cast<std::size_t>(depth) * graph_.firings.size());
        for (std::int64_t j = 0; j < depth; ++j) {
            for (Time f : run.finish[static_cast<std::size_t>(i - j)]) {
                state.push_back(f - ss.completions[static_cast<std::size_t>(i)]);
            }
        }
        auto [it, inserted] = seen.emplace(std::move(state), i);
        if (inserted) {
            continue;
        }
        const std::int64_t earlier = it->second;
        ss.periodic = true;
        ss.transient = earlier;
        ss.period = i - earlier;
        Rational periodic(ss.completions[static_cast<std::size_t>(i)] - ss.completions[static_cast<std::size_t>(earlier)],
                          ss.period);
        // Bound every completion of the transient as well: c_j <= c_0 + j*II.
        for (std::int64_t j = 1; j <= i; ++j) {
            periodic = std::max(periodic, Rational(ss.completions[static_cast<std::size_t>(j)] - c0, j));
        }
        ii = std::min(ii, periodic);
        break;
    }
    // c_k <= c_{k-1} + latency always holds for a fixed-order self-timed run.
    ss.initiation_interval = std::min(ii, Rational(ss.latency));
    ss.exact = ss.initiation_interval == std::max(observed, bound.ratio);
    return ss;
}

std::vector<std::vector<std::size_t>> ModeScheduler::firing_order(const ModeMapping& genes,
                                                                  const GeneLayout& layout) const {
    return list_iteration(processors_of(genes, layout)).order;
}

SteadyState ModeScheduler::steady_state(const ModeMapping& genes, const GeneLayout& layout,
                                        std::int64_t unroll) const {
    if (unroll < 2) {
        throw std::invalid_argument("unroll must be at least 2");
    }
    auto proc = processors_of(genes, layout);
    auto first = list_iteration(proc);
    return analyse(replay(first, proc, unroll), first, proc);
}

namespace {

ModeSchedule make_schedule(const ModeGraph& g, std::size_t pool, const std::vector<ProcessorId>& proc,
                           const std::vector<std::vector<Time>>& start,
                           const std::vector<std::vector<Time>>& finish, const SteadyState& ss) {
    ModeSchedule s;
    s.mode = g.mode;
    s.placements.assign(pool, {});
    for (std::size_t i = 0; i < start.size(); ++i) {
        for (std::size_t f = 0; f < g.firings.size(); ++f) {
            s.placements[proc[f]].push_back(Placement{g.firings[f].task, g.firings[f].instance,
                                                      static_cast<std::int64_t>(i), start[i][f], finish[i][f]});
        }
    }
    for (ProcessorId p = 0; p < pool; ++p) {
        auto& row = s.placements[p];
        std::stable_sort(row.begin(), row.end(),
                         [](const Placement& a, const Placement& b) { return a.start < b.start; });
        if (!row.empty()) {
            s.used_processors.push_back(p);
        }
    }
    s.latency = ss.latency;
    s.initiation_interval = ss.initiation_interval;
    s.steady_state_found = ss.exact;
    return s;
}

} // namespace

ModeSchedule ModeScheduler::schedule(const ModeMapping& genes, const GeneLayout& layout,
                                     std::int64_t unroll) const {
    return unrolled(genes, layout, 1, unroll);
}

ModeSchedule ModeScheduler::unrolled(const ModeMapping& genes, const GeneLayout& layout, std::int64_t iterations,
                                     std::int64_t unroll) const {
    if (unroll < 2) {
        throw std::invalid_argument("unroll must be at least 2");
    }
    auto proc = processors_of(genes, layout);
    auto first = list_iteration(proc);
    auto run = replay(first, proc, std::max(unroll, iterations));
    SteadyState ss = analyse(run, first, proc);
    run.start.resize(static_cast<std::size_t>(iterations));
    run.finish.resize(static_cast<std::size_t>(iterations));
    return make_schedule(graph_, pool_, proc, run.start, run.finish, ss);
}

ModeSchedule list_schedule(const Spec& spec, ModeIndex mode, const ModeMapping& genes, std::int64_t unroll) {
    return ModeScheduler(spec, mode).schedule(genes, gene_layout(spec, mode), unroll);
}

std::pair<Time, Rational> steady_state_metrics(const Spec& spec, ModeIndex mode, const ModeMapping& genes,
                                               std::int64_t unroll) {
    SteadyState ss = ModeScheduler(spec, mode).steady_state(genes, gene_layout(spec, mode), unroll);
    return {ss.latency, ss.initiation_interval};
}

namespace {

std::string placement_label(const Spec& spec, const ModeSchedule& schedule, const Placement& p) {
    std::string label = spec.tasks[p.task].name;
    bool multi = false;
    for (const auto& row : schedule.placements) {
        for (const auto& q : row) {
            if (q.task == p.task && q.instance > 0) {
                multi = true;
            }
        }
    }
    if (multi) {
        label += "#" + std::to_string(p.instance);
    }
    return label + "@" + std::to_string(p.iteration);
}

} // namespace

std::string gantt_text(const Spec& spec, const ModeSchedule& schedule) {
    std::ostringstream out;
    out << "mode " << spec.mtg.modes[schedule.mode].name << " latency " << schedule.latency << " ii "
        << to_string(schedule.initiation_interval) << "\n";
    for (ProcessorId p : schedule.used_processors) {
        out << "P" << p << " |";
        for (const auto& pl : schedule.placements[p]) {
            out << " " << placement_label(spec, schedule, pl) << " [" << pl.start << "," << pl.finish << ") |";
        }
        out << "\n";
    }
    return out.str();
}

std::string gantt_svg(const Spec& spec, const ModeSchedule& schedule) {
    constexpr int kRowHeight = 28;
    constexpr int kLabelWidth = 48;
    constexpr double kWidth = 800.0;
    Time horizon = 1;
    for (const auto& row : schedule.placements) {
        for (const auto& pl : row) {
            horizon = std::max(horizon, pl.finish);
        }
    }
    const double scale = kWidth / static_cast<double>(horizon);
    const auto rows = static_cast<int>(schedule.used_processors.size());
    char buf[256];
    std::ostringstream out;
    std::snprintf(buf, sizeof buf,
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" font-family=\"monospace\" "
                  "font-size=\"11\">\n",
                  kLabelWidth + static_cast<int>(kWidth) + 8, (rows + 1) * kRowHeight);
    out << buf;
    out << "<text x=\"4\" y=\"16\">mode " << spec.mtg.modes[schedule.mode].name << " latency " << schedule.latency
        << " ii " << to_string(schedule.initiation_interval) << "</text>\n";
    int r = 1;
    for (ProcessorId p : schedule.used_processors) {
        const int y = r * kRowHeight;
        std::snprintf(buf, sizeof buf, "<text x=\"4\" y=\"%d\">P%u</text>\n", y + 17, p);
        out << buf;
        for (const auto& pl : schedule.placements[p]) {
            const double x = kLabelWidth + static_cast<double>(pl.start) * scale;
            const double w = static_cast<double>(pl.finish - pl.start) * scale;
            std::snprintf(buf, sizeof buf,
                          "<rect x=\"%.2f\" y=\"%d\" width=\"%.2f\" height=\"%d\" fill=\"#cfe2f3\" stroke=\"#333\"/>\n",
                          x, y + 2, w, kRowHeight - 4);
            out << buf;
            std::snprintf(buf, sizeof buf, "<text x=\"%.2f\" y=\"%d\">", x + 2, y + 17);
            out << buf << placement_label(spec, schedule, pl) << "</text>\n";
        }
        ++r;
    }
    out << "</svg>\n";
    return out.str();
}

} // namespace mmdf
