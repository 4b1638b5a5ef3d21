#include "mmdf/report_io.hpp"

#include "mmdf/errors.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace mmdf {

using nlohmann::ordered_json;

namespace {

ordered_json parse_document(std::string_view document, const char* what) {
    try {
        return ordered_json::parse(document);
    } catch (const ordered_json::parse_error& e) {
        throw ParseError(std::string(what) + ": " + e.what());
    }
}

std::string rat(const Rational& r) {
    return to_string(r);
}

ordered_json fitness_json(const Fitness& f) {
    ordered_json j;
    j["feasible"] = f.feasible;
    j["processors"] = f.processors;
    j["mig_cost_total"] = f.mig_cost_total;
    j["shortfall"] = rat(f.shortfall);
    return j;
}

ordered_json analysis_json(const Spec& spec, const AnalysisResult& analysis) {
    const auto& r = analysis.report;
    ordered_json j;
    j["feasible"] = r.feasible;
    j["processors"] = r.processors;
    j["mig_cost_total"] = r.mig_cost_total;
    j["max_interval_overall"] = rat(r.max_interval_overall);
    j["output_buffer_size"] = r.output_buffer_size;
    j["shortfall"] = rat(r.shortfall);
    j["throughput_constraint"] = rat(spec.throughput_constraint);
    ordered_json modes = ordered_json::array();
    for (const auto& m : r.modes) {
        ordered_json e;
        e["mode"] = spec.mtg.modes[m.mode].name;
        e["processors"] = m.processors;
        e["latency"] = m.latency;
        e["initiation_interval"] = rat(m.initiation_interval);
        e["steady_state_found"] = analysis.schedules.at(m.mode).steady_state_found;
        e["max_trans_delay"] = rat(m.max_trans_delay);
        e["thr_require"] = m.thr_require ? ordered_json(rat(*m.thr_require)) : ordered_json(nullptr);
        e["allowed_interval"] = rat(m.allowed_interval);
        e["meets_requirement"] = m.meets_requirement;
        modes.push_back(e);
    }
    j["modes"] = modes;
    ordered_json transitions = ordered_json::array();
    for (const auto& t : r.transitions) {
        ordered_json e;
        e["from"] = spec.mtg.modes[t.from].name;
        e["to"] = spec.mtg.modes[t.to].name;
        e["mig_cost"] = t.mig_cost;
        e["trans_delay"] = rat(t.trans_delay);
        transitions.push_back(e);
    }
    j["transitions"] = transitions;
    return j;
}

std::int64_t as_int(const ordered_json& v, const std::string& where) {
    if (!v.is_number_integer()) {
        throw ParseError(where + ": expected an integer");
    }
    return v.get<std::int64_t>();
}

ProcessorId as_processor(const ordered_json& v, const std::string& where) {
    const auto p = as_int(v, where);
    if (p < 0) {
        throw ValidationError(where + ": processor id must be nonnegative");
    }
    return static_cast<ProcessorId>(p);
}

} // namespace

MappingSolution load_mapping(const Spec& spec, std::string_view document) {
    const auto doc = parse_document(document, "mapping");
    if (!doc.is_object() || !doc.contains("mapping") || !doc["mapping"].is_object()) {
        throw ParseError("mapping: expected an object with key 'mapping'");
    }
    const auto& body = doc["mapping"];
    const auto layouts = gene_layouts(spec);
    MappingSolution sol;
    for (ModeIndex m = 0; m < spec.mode_count(); ++m) {
        const auto& name = spec.mtg.modes[m].name;
        if (!body.contains(name) || !body[name].is_object()) {
            throw ValidationError("mapping: mode '" + name + "' missing");
        }
        const auto& entry = body[name];
        ModeMapping genes(layouts[m].size, 0);
        for (TaskIndex t = 0; t < spec.tasks.size(); ++t) {
            const auto& task = spec.tasks[t].name;
            const std::string where = "mapping." + name + "." + task;
            if (!entry.contains(task)) {
                throw ValidationError(where + ": task not mapped");
            }
            const auto& v = entry[task];
            const std::size_t count = layouts[m].count[t];
            if (v.is_array()) {
                if (v.size() != count) {
                    throw ValidationError(where + ": expected " + std::to_string(count) + " instance entries");
                }
                for (std::size_t i = 0; i < count; ++i) {
                    genes[layouts[m].offset[t] + i] = as_processor(v[i], where);
                }
            } else {
                const auto p = as_processor(v, where);
                for (std::size_t i = 0; i < count; ++i) {
                    genes[layouts[m].offset[t] + i] = p;
                }
            }
        }
        for (const auto& [key, value] : entry.items()) {
            if (!spec.find_task(key)) {
                throw ValidationError("mapping." + name + ": unknown task '" + key + "'");
            }
        }
        sol.modes.push_back(std::move(genes));
    }
    for (const auto& [key, value] : body.items()) {
        if (!spec.find_mode(key)) {
            throw ValidationError("mapping: unknown mode '" + key + "'");
        }
    }
    check_mapping(spec, sol);
    return sol;
}

MappingSolution load_mapping_file(const Spec& spec, const std::filesystem::path& path) {
    return load_mapping(spec, read_text_file(path));
}

std::string serialize_mapping(const Spec& spec, const MappingSolution& solution) {
    const auto layouts = gene_layouts(spec);
    ordered_json body = ordered_json::object();
    for (ModeIndex m = 0; m < spec.mode_count(); ++m) {
        ordered_json entry = ordered_json::object();
        for (TaskIndex t = 0; t < spec.tasks.size(); ++t) {
            const auto& l = layouts[m];
            if (l.count[t] == 1) {
                entry[spec.tasks[t].name] = solution.modes.at(m).at(l.offset[t]);
            } else {
                ordered_json arr = ordered_json::array();
                for (std::size_t i = 0; i < l.count[t]; ++i) {
                    arr.push_back(solution.modes.at(m).at(l.offset[t] + i));
                }
                entry[spec.tasks[t].name] = arr;
            }
        }
        body[spec.mtg.modes[m].name] = entry;
    }
    ordered_json doc;
    doc["mapping"] = body;
    return doc.dump(2) + "\n";
}

std::string report_json(const Spec& spec, const AnalysisResult& analysis) {
    return analysis_json(spec, analysis).dump(2) + "\n";
}

std::string strategy_report_json(const Spec& spec, const StrategyResult& result) {
    ordered_json j;
    j["strategy"] = result.strategy;
    j["fitness"] = fitness_json(result.fitness);
    j["infeasibility"] = result.infeasibility.empty() ? ordered_json(nullptr) : ordered_json(result.infeasibility);
    j["analysis"] = analysis_json(spec, result.analysis);
    return j.dump(2) + "\n";
}

std::string evolution_jsonl(const std::vector<GenerationStats<Fitness>>& log) {
    std::string out;
    for (const auto& g : log) {
        ordered_json j;
        j["generation"] = g.generation;
        j["best"] = fitness_json(g.best);
        j["median"] = fitness_json(g.median);
        out += j.dump() + "\n";
    }
    return out;
}

ModeTrace load_trace(const Spec& spec, std::string_view document) {
    const auto doc = parse_document(document, "trace");
    if (!doc.is_object() || !doc.contains("trace") || !doc["trace"].is_array()) {
        throw ParseError("trace: expected an object with array 'trace'");
    }
    ModeTrace trace;
    for (std::size_t i = 0; i < doc["trace"].size(); ++i) {
        const auto& e = doc["trace"][i];
        const std::string where = "trace[" + std::to_string(i) + "]";
        if (!e.is_object() || !e.contains("mode") || !e["mode"].is_string() || !e.contains("iterations")) {
            throw ParseError(where + ": expected {\"mode\": name, \"iterations\": n}");
        }
        const auto m = spec.find_mode(e["mode"].get<std::string>());
        if (!m) {
            throw ValidationError(where + ": unknown mode '" + e["mode"].get<std::string>() + "'");
        }
        trace.push_back({*m, as_int(e["iterations"], where + ".iterations")});
    }
    validate_trace(spec, trace);
    return trace;
}

std::string serialize_trace(const Spec& spec, const ModeTrace& trace) {
    ordered_json arr = ordered_json::array();
    for (const auto& s : trace) {
        ordered_json e;
        e["mode"] = spec.mtg.modes.at(s.mode).name;
        e["iterations"] = s.iterations;
        arr.push_back(e);
    }
    ordered_json doc;
    doc["trace"] = arr;
    return doc.dump(2) + "\n";
}

std::string trace_csv(const SimTrace& trace) {
    std::ostringstream os;
    os << "time,event,occupancy\n";
    for (const auto& e : trace.events) {
        os << to_string(e.time) << ',' << to_string(e.kind) << ',' << e.occupancy << '\n';
    }
    return os.str();
}

GaConfig load_config(std::string_view document) {
    auto doc = parse_document(document, "config");
    if (!doc.is_object()) {
        throw ParseError("config: expected an object");
    }
    // Sectioned form: {"ga": {...}, "scheduler": {"unroll": n}}.
    for (const char* section : {"ga", "scheduler"}) {
        if (!doc.contains(section)) {
            continue;
        }
        if (!doc[section].is_object()) {
            throw ParseError(std::string("config.") + section + ": expected an object");
        }
        const ordered_json body = doc[section];
        doc.erase(section);
        for (const auto& [key, value] : body.items()) {
            if (doc.contains(key)) {
                throw ParseError("config: key '" + key + "' given twice");
            }
            doc[key] = value;
        }
    }
    GaConfig c;
    if (doc.contains("preset")) {
        const auto& p = doc["preset"];
        if (p == "large") {
            c = GaConfig::large_scale();
        } else if (p != "desk") {
            throw ParseError("config.preset: expected \"desk\" or \"large\"");
        }
    }
    auto count = [&](const std::string& key, std::size_t& field) {
        const auto v = as_int(doc[key], "config." + key);
        if (v < 0) {
            throw ValidationError("config." + key + ": must be nonnegative");
        }
        field = static_cast<std::size_t>(v);
    };
    auto probability = [&](const std::string& key, double& field) {
        if (!doc[key].is_number()) {
            throw ParseError("config." + key + ": expected a number");
        }
        field = doc[key].get<double>();
    };
    for (const auto& [key, value] : doc.items()) {
        if (key == "preset") {
            continue;
        } else if (key == "population_size") {
            count(key, c.population_size);
        } else if (key == "mu") {
            count(key, c.mu);
        } else if (key == "lambda") {
            count(key, c.lambda);
        } else if (key == "max_generations") {
            count(key, c.max_generations);
        } else if (key == "crossover_probability") {
            probability(key, c.crossover_probability);
        } else if (key == "mutation_probability") {
            probability(key, c.mutation_probability);
        } else if (key == "seed") {
            c.seed = static_cast<std::uint64_t>(as_int(value, "config.seed"));
        } else if (key == "unroll") {
            c.unroll = as_int(value, "config.unroll");
        } else {
            throw ParseError("config: unknown key '" + key + "'");
        }
    }
    try {
        c.validate();
    } catch (const std::invalid_argument& e) {
        throw ValidationError(std::string("config: ") + e.what());
    }
    return c;
}

std::string serialize_config(const GaConfig& c) {
    ordered_json j;
    j["population_size"] = c.population_size;
    j["mu"] = c.mu;
    j["lambda"] = c.lambda;
    j["crossover_probability"] = c.crossover_probability;
    j["mutation_probability"] = c.mutation_probability;
    j["max_generations"] = c.max_generations;
    j["seed"] = c.seed;
    j["unroll"] = c.unroll;
    return j.dump(2) + "\n";
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    }
    out << text;
    if (!out) {
        throw std::runtime_error("failed writing '" + path.string() + "'");
    }
}

} // namespace mmdf
