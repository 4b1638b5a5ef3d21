#include "mmdf/model.hpp"

#include "mmdf/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>

namespace mmdf {

using nlohmann::ordered_json;

std::optional<ModeIndex> Spec::find_mode(std::string_view name) const {
    for (ModeIndex m = 0; m < mtg.modes.size(); ++m) {
        if (mtg.modes[m].name == name) {
            return m;
        }
    }
    return std::nullopt;
}

std::optional<TaskIndex> Spec::find_task(std::string_view name) const {
    for (TaskIndex t = 0; t < tasks.size(); ++t) {
        if (tasks[t].name == name) {
            return t;
        }
    }
    return std::nullopt;
}

std::int64_t RepetitionVector::total() const {
    return std::accumulate(firings.begin(), firings.end(), std::int64_t{0});
}

namespace {

std::string endpoint_name(const Spec& spec, const PortRef& ref) {
    return spec.tasks[ref.task].name + "." + spec.port(ref).name;
}

std::string channel_name(const Spec& spec, ChannelIndex c) {
    return endpoint_name(spec, spec.channels[c].src) + " -> " +
           endpoint_name(spec, spec.channels[c].dst);
}

} // namespace

RepetitionVector repetition_vector(const Spec& spec, ModeIndex mode) {
    const std::size_t n = spec.tasks.size();
    std::vector<std::vector<ChannelIndex>> incident(n);
    for (ChannelIndex c = 0; c < spec.channels.size(); ++c) {
        incident[spec.channels[c].src.task].push_back(c);
        incident[spec.channels[c].dst.task].push_back(c);
    }

    std::vector<std::optional<Rational>> ratio(n);
    std::vector<std::int64_t> firings(n, 0);
    for (TaskIndex root = 0; root < n; ++root) {
        if (ratio[root]) {
            continue;
        }
        std::vector<TaskIndex> component;
        std::queue<TaskIndex> frontier;
        ratio[root] = Rational(1);
        frontier.push(root);
        while (!frontier.empty()) {
            TaskIndex t = frontier.front();
            frontier.pop();
            component.push_back(t);
            for (ChannelIndex c : incident[t]) {
                const auto& ch = spec.channels[c];
                const std::int64_t prod = spec.production(c, mode);
                const std::int64_t cons = spec.consumption(c, mode);
                // reps[src] * prod == reps[dst] * cons
                TaskIndex other = ch.src.task == t ? ch.dst.task : ch.src.task;
                Rational expected = ch.src.task == t ? *ratio[t] * Rational(prod, cons)
                                                     : *ratio[t] * Rational(cons, prod);
                if (ch.src.task == ch.dst.task) {
                    if (prod != cons) {
                        throw InconsistencyError(
                            "mode '" + spec.mtg.modes[mode].name + "' is inconsistent: self-loop " +
                            channel_name(spec, c) + " violates balance equation reps*" +
                            std::to_string(prod) + " = reps*" + std::to_string(cons));
                    }
                    continue;
                }
                if (!ratio[other]) {
                    ratio[other] = expected;
                    frontier.push(other);
                } else if (*ratio[other] != expected) {
                    throw InconsistencyError(
                        "mode '" + spec.mtg.modes[mode].name +
                        "' is inconsistent: balance equation on channel " + channel_name(spec, c) +
                        " (reps[" + spec.tasks[ch.src.task].name + "]*" + std::to_string(prod) +
                        " = reps[" + spec.tasks[ch.dst.task].name + "]*" + std::to_string(cons) +
                        ") has only the zero solution");
                }
            }
        }
        std::int64_t den_lcm = 1;
        for (TaskIndex t : component) {
            den_lcm = std::lcm(den_lcm, ratio[t]->denominator());
        }
        std::int64_t num_gcd = 0;
        for (TaskIndex t : component) {
            firings[t] = ratio[t]->numerator() * (den_lcm / ratio[t]->denominator());
            num_gcd = std::gcd(num_gcd, firings[t]);
        }
        for (TaskIndex t : component) {
            firings[t] /= num_gcd;
        }
    }
    return RepetitionVector{std::move(firings)};
}

namespace {

void require(bool condition, const std::string& message) {
    if (!condition) {
        throw ValidationError(message);
    }
}

// Fires enabled tasks with unlimited processors until the repetition vector
// is exhausted or nothing can fire.
void check_deadlock_free(const Spec& spec, ModeIndex mode, const RepetitionVector& reps) {
    std::vector<std::int64_t> tokens(spec.channels.size());
    for (ChannelIndex c = 0; c < spec.channels.size(); ++c) {
        tokens[c] = spec.channels[c].initial_tokens[mode];
    }
    std::vector<std::vector<ChannelIndex>> inputs(spec.tasks.size());
    std::vector<std::vector<ChannelIndex>> outputs(spec.tasks.size());
    for (ChannelIndex c = 0; c < spec.channels.size(); ++c) {
        outputs[spec.channels[c].src.task].push_back(c);
        inputs[spec.channels[c].dst.task].push_back(c);
    }
    std::vector<std::int64_t> fired(spec.tasks.size(), 0);
    bool progress = true;
    while (progress) {
        progress = false;
        for (TaskIndex t = 0; t < spec.tasks.size(); ++t) {
            while (fired[t] < reps[t]) {
                bool enabled = std::all_of(inputs[t].begin(), inputs[t].end(), [&](ChannelIndex c) {
                    return tokens[c] >= spec.consumption(c, mode);
                });
                if (!enabled) {
                    break;
                }
                for (ChannelIndex c : inputs[t]) {
                    tokens[c] -= spec.consumption(c, mode);
                }
                for (ChannelIndex c : outputs[t]) {
                    tokens[c] += spec.production(c, mode);
                }
                ++fired[t];
                progress = true;
            }
        }
    }
    for (TaskIndex t = 0; t < spec.tasks.size(); ++t) {
        if (fired[t] < reps[t]) {
            throw DeadlockError("mode '" + spec.mtg.modes[mode].name + "' deadlocks: task '" +
                                spec.tasks[t].name + "' completes only " + std::to_string(fired[t]) +
                                " of " + std::to_string(reps[t]) + " firings with the given initial tokens");
        }
    }
}

} // namespace

void validate(const Spec& spec) {
    const std::size_t modes = spec.mode_count();
    require(modes > 0, "model has no modes");
    require(!spec.tasks.empty(), "model has no tasks");
    require(spec.processor_pool >= 1, "processor_pool must be positive");
    require(spec.throughput_constraint > 0, "throughput_constraint must be positive");
    require(spec.mtg.initial_mode < modes, "initial mode out of range");

    std::set<std::string> mode_names;
    for (const auto& mode : spec.mtg.modes) {
        require(!mode.name.empty(), "mode with empty name");
        require(mode_names.insert(mode.name).second, "duplicate mode '" + mode.name + "'");
        require(mode.mrc > 0, "mode '" + mode.name + "': mrc must be positive");
    }

    std::set<std::string> task_names;
    for (const auto& task : spec.tasks) {
        require(!task.name.empty(), "task with empty name");
        require(task.name.find('.') == std::string::npos, "task '" + task.name + "': name must not contain '.'");
        require(task_names.insert(task.name).second, "duplicate task '" + task.name + "'");
        require(task.wcet.size() == modes, "task '" + task.name + "': wcet must be defined for every mode");
        for (ModeIndex m = 0; m < modes; ++m) {
            require(task.wcet[m] > 0, "task '" + task.name + "': wcet in mode '" + spec.mtg.modes[m].name +
                                          "' must be positive");
        }
        require(task.migration_cost >= 0, "task '" + task.name + "': migration_cost must be nonnegative");
        std::set<std::string> port_names;
        for (const auto& port : task.ports) {
            require(port_names.insert(port.name).second,
                    "task '" + task.name + "': duplicate port '" + port.name + "'");
            require(port.rate.size() == modes,
                    "port '" + task.name + "." + port.name + "': rate must be defined for every mode");
            for (ModeIndex m = 0; m < modes; ++m) {
                require(port.rate[m] > 0, "port '" + task.name + "." + port.name + "': rate in mode '" +
                                              spec.mtg.modes[m].name + "' must be positive");
            }
        }
    }

    std::set<std::pair<TaskIndex, std::size_t>> used_ports;
    for (ChannelIndex c = 0; c < spec.channels.size(); ++c) {
        const auto& ch = spec.channels[c];
        for (const PortRef* ref : {&ch.src, &ch.dst}) {
            require(ref->task < spec.tasks.size() && ref->port < spec.tasks[ref->task].ports.size(),
                    "channel " + std::to_string(c) + " references an unknown port");
        }
        const std::string name = channel_name(spec, c);
        require(spec.port(ch.src).direction == PortDirection::output,
                "channel " + name + ": source must be an output port");
        require(spec.port(ch.dst).direction == PortDirection::input,
                "channel " + name + ": destination must be an input port");
        require(used_ports.insert({ch.src.task, ch.src.port}).second,
                "channel " + name + ": port " + endpoint_name(spec, ch.src) + " is connected more than once");
        require(used_ports.insert({ch.dst.task, ch.dst.port}).second,
                "channel " + name + ": port " + endpoint_name(spec, ch.dst) + " is connected more than once");
        require(ch.initial_tokens.size() == modes,
                "channel " + name + ": initial_tokens must be defined for every mode");
        for (ModeIndex m = 0; m < modes; ++m) {
            require(ch.initial_tokens[m] >= 0, "channel " + name + ": initial tokens must be nonnegative");
        }
    }

    std::set<std::pair<ModeIndex, ModeIndex>> seen;
    for (const auto& tr : spec.mtg.transitions) {
        require(tr.from < modes && tr.to < modes, "transition references an unknown mode");
        require(tr.from != tr.to, "self-transition on mode '" + spec.mtg.modes[tr.from].name + "'");
        require(seen.insert({tr.from, tr.to}).second, "duplicate transition '" + spec.mtg.modes[tr.from].name +
                                                           "' -> '" + spec.mtg.modes[tr.to].name + "'");
    }

    for (ModeIndex m = 0; m < modes; ++m) {
        RepetitionVector reps = repetition_vector(spec, m);
        check_deadlock_free(spec, m, reps);
    }
}

// ---------------------------------------------------------------------------
// Document format

namespace {

[[noreturn]] void parse_fail(const std::string& what) {
    throw ParseError(what);
}

const ordered_json& member(const ordered_json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) {
        parse_fail(where + ": missing key '" + key + "'");
    }
    return obj.at(key);
}

std::int64_t as_int(const ordered_json& v, const std::string& where) {
    if (!v.is_number_integer()) {
        parse_fail(where + ": expected an integer");
    }
    return v.get<std::int64_t>();
}

std::string as_string(const ordered_json& v, const std::string& where) {
    if (!v.is_string()) {
        parse_fail(where + ": expected a string");
    }
    return v.get<std::string>();
}

// Either one integer for every mode, or an object keyed by mode name.
std::vector<std::int64_t> per_mode(const ordered_json& v, const Spec& spec, const std::string& where) {
    std::vector<std::int64_t> out(spec.mode_count(), 0);
    if (v.is_number_integer()) {
        std::fill(out.begin(), out.end(), v.get<std::int64_t>());
        return out;
    }
    if (!v.is_object()) {
        parse_fail(where + ": expected an integer or an object keyed by mode name");
    }
    std::vector<bool> set(spec.mode_count(), false);
    for (const auto& [key, value] : v.items()) {
        auto m = spec.find_mode(key);
        if (!m) {
            throw ValidationError(where + ": unknown mode '" + key + "'");
        }
        out[*m] = as_int(value, where + "." + key);
        set[*m] = true;
    }
    for (ModeIndex m = 0; m < spec.mode_count(); ++m) {
        if (!set[m]) {
            throw ValidationError(where + ": no value for mode '" + spec.mtg.modes[m].name + "'");
        }
    }
    return out;
}

PortRef parse_endpoint(const ordered_json& v, const Spec& spec, const std::string& where) {
    std::string text = as_string(v, where);
    auto dot = text.find('.');
    if (dot == std::string::npos) {
        parse_fail(where + ": endpoint '" + text + "' must have the form task.port");
    }
    auto task = spec.find_task(text.substr(0, dot));
    if (!task) {
        throw ValidationError(where + ": unknown task in endpoint '" + text + "'");
    }
    const auto& ports = spec.tasks[*task].ports;
    std::string port_name = text.substr(dot + 1);
    for (std::size_t p = 0; p < ports.size(); ++p) {
        if (ports[p].name == port_name) {
            return PortRef{*task, p};
        }
    }
    throw ValidationError(where + ": unknown port in endpoint '" + text + "'");
}

ordered_json per_mode_json(const std::vector<std::int64_t>& values, const Spec& spec) {
    ordered_json out = ordered_json::object();
    for (ModeIndex m = 0; m < spec.mode_count(); ++m) {
        out[spec.mtg.modes[m].name] = values[m];
    }
    return out;
}

} // namespace

Spec load_spec(std::string_view document) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(document);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("malformed graph document: ") + e.what());
    }
    if (!doc.is_object()) {
        parse_fail("graph document must be an object");
    }

    Spec spec;
    const auto& modes = member(doc, "modes", "document");
    if (!modes.is_array()) {
        parse_fail("modes: expected an array");
    }
    for (std::size_t i = 0; i < modes.size(); ++i) {
        std::string where = "modes[" + std::to_string(i) + "]";
        Mode mode;
        mode.name = as_string(member(modes[i], "name", where), where + ".name");
        mode.mrc = as_int(member(modes[i], "mrc", where), where + ".mrc");
        spec.mtg.modes.push_back(std::move(mode));
    }

    const auto& tasks = member(doc, "tasks", "document");
    if (!tasks.is_array()) {
        parse_fail("tasks: expected an array");
    }
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        std::string where = "tasks[" + std::to_string(i) + "]";
        Task task;
        task.name = as_string(member(tasks[i], "name", where), where + ".name");
        where = "task '" + task.name + "'";
        task.wcet = per_mode(member(tasks[i], "wcet", where), spec, where + ".wcet");
        if (tasks[i].contains("migration_cost")) {
            task.migration_cost = as_int(tasks[i].at("migration_cost"), where + ".migration_cost");
        }
        if (tasks[i].contains("ports")) {
            const auto& ports = tasks[i].at("ports");
            if (!ports.is_array()) {
                parse_fail(where + ".ports: expected an array");
            }
            for (const auto& p : ports) {
                Port port;
                port.name = as_string(member(p, "name", where + ".ports"), where + ".ports.name");
                std::string pwhere = where + " port '" + port.name + "'";
                std::string dir = as_string(member(p, "direction", pwhere), pwhere + ".direction");
                if (dir == "in") {
                    port.direction = PortDirection::input;
                } else if (dir == "out") {
                    port.direction = PortDirection::output;
                } else {
                    parse_fail(pwhere + ".direction: expected \"in\" or \"out\"");
                }
                port.rate = p.contains("rate") ? per_mode(p.at("rate"), spec, pwhere + ".rate")
                                               : std::vector<std::int64_t>(spec.mode_count(), 1);
                task.ports.push_back(std::move(port));
            }
        }
        spec.tasks.push_back(std::move(task));
    }

    if (doc.contains("channels")) {
        const auto& channels = doc.at("channels");
        if (!channels.is_array()) {
            parse_fail("channels: expected an array");
        }
        for (std::size_t i = 0; i < channels.size(); ++i) {
            std::string where = "channels[" + std::to_string(i) + "]";
            Channel ch;
            ch.src = parse_endpoint(member(channels[i], "src", where), spec, where + ".src");
            ch.dst = parse_endpoint(member(channels[i], "dst", where), spec, where + ".dst");
            ch.initial_tokens = channels[i].contains("initial_tokens")
                                    ? per_mode(channels[i].at("initial_tokens"), spec, where + ".initial_tokens")
                                    : std::vector<std::int64_t>(spec.mode_count(), 0);
            spec.channels.push_back(std::move(ch));
        }
    }

    if (doc.contains("transitions")) {
        const auto& transitions = doc.at("transitions");
        if (!transitions.is_array()) {
            parse_fail("transitions: expected an array of [from, to] pairs");
        }
        for (const auto& pair : transitions) {
            if (!pair.is_array() || pair.size() != 2) {
                parse_fail("transitions: expected [from, to] pairs");
            }
            auto from = spec.find_mode(as_string(pair[0], "transitions"));
            auto to = spec.find_mode(as_string(pair[1], "transitions"));
            if (!from || !to) {
                throw ValidationError("transition references an unknown mode: " + pair.dump());
            }
            spec.mtg.transitions.push_back(Transition{*from, *to});
        }
    }

    if (doc.contains("initial_mode")) {
        auto m = spec.find_mode(as_string(doc.at("initial_mode"), "initial_mode"));
        if (!m) {
            throw ValidationError("initial_mode names an unknown mode");
        }
        spec.mtg.initial_mode = *m;
    }

    const auto& thr = member(doc, "throughput_constraint", "document");
    std::int64_t num = as_int(member(thr, "num", "throughput_constraint"), "throughput_constraint.num");
    std::int64_t den = as_int(member(thr, "den", "throughput_constraint"), "throughput_constraint.den");
    if (den <= 0 || num <= 0) {
        throw ValidationError("throughput_constraint must be a positive rational");
    }
    spec.throughput_constraint = Rational(num, den);

    std::int64_t pool = as_int(member(doc, "processor_pool", "document"), "processor_pool");
    if (pool <= 0) {
        throw ValidationError("processor_pool must be positive");
    }
    spec.processor_pool = static_cast<std::size_t>(pool);

    if (doc.contains("instance_mapping")) {
        if (!doc.at("instance_mapping").is_boolean()) {
            parse_fail("instance_mapping: expected a boolean");
        }
        spec.instance_mapping = doc.at("instance_mapping").get<bool>();
    }

    validate(spec);
    return spec;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open '" + path.string() + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

Spec load_spec_file(const std::filesystem::path& path) {
    return load_spec(read_text_file(path));
}

std::string serialize(const Spec& spec) {
    ordered_json doc;
    doc["modes"] = ordered_json::array();
    for (const auto& mode : spec.mtg.modes) {
        doc["modes"].push_back({{"name", mode.name}, {"mrc", mode.mrc}});
    }
    doc["initial_mode"] = spec.mtg.modes.at(spec.mtg.initial_mode).name;
    doc["tasks"] = ordered_json::array();
    for (const auto& task : spec.tasks) {
        ordered_json t;
        t["name"] = task.name;
        t["wcet"] = per_mode_json(task.wcet, spec);
        t["migration_cost"] = task.migration_cost;
        t["ports"] = ordered_json::array();
        for (const auto& port : task.ports) {
            t["ports"].push_back({{"name", port.name},
                                  {"direction", port.direction == PortDirection::input ? "in" : "out"},
                                  {"rate", per_mode_json(port.rate, spec)}});
        }
        doc["tasks"].push_back(std::move(t));
    }
    doc["channels"] = ordered_json::array();
    for (ChannelIndex c = 0; c < spec.channels.size(); ++c) {
        const auto& ch = spec.channels[c];
        doc["channels"].push_back({{"src", endpoint_name(spec, ch.src)},
                                   {"dst", endpoint_name(spec, ch.dst)},
                                   {"initial_tokens", per_mode_json(ch.initial_tokens, spec)}});
    }
    doc["transitions"] = ordered_json::array();
    for (const auto& tr : spec.mtg.transitions) {
        doc["transitions"].push_back({spec.mtg.modes[tr.from].name, spec.mtg.modes[tr.to].name});
    }
    doc["throughput_constraint"] = {{"num", spec.throughput_constraint.numerator()},
                                    {"den", spec.throughput_constraint.denominator()}};
    doc["processor_pool"] = spec.processor_pool;
    doc["instance_mapping"] = spec.instance_mapping;
    return doc.dump(2) + "\n";
}

Spec with_uniform_migration_cost(const Spec& spec, Time cost) {
    Spec out = spec;
    for (auto& task : out.tasks) {
        task.migration_cost = cost;
    }
    return out;
}

Spec with_scaled_migration_cost(const Spec& spec, std::int64_t factor) {
    Spec out = spec;
    for (auto& task : out.tasks) {
        task.migration_cost *= factor;
    }
    return out;
}

} // namespace mmdf
