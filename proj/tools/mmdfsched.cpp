#include "mmdf/baselines.hpp"
#include "mmdf/errors.hpp"
#include "mmdf/report_io.hpp"
#include "mmdf/simulator.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using namespace mmdf;

namespace {

constexpr int kOk = 0;
constexpr int kError = 1;
constexpr int kInfeasible = 2;

struct GraphOptions {
    std::string graph;
    std::optional<std::size_t> pool;
    std::optional<std::int64_t> mc_scale;
    std::int64_t unroll = kDefaultUnroll;
};

struct SearchOptions {
    std::string config;
    std::uint64_t seed = 0;
    std::optional<std::size_t> generations;
    std::optional<std::size_t> population;
};

void add_graph_options(CLI::App* cmd, GraphOptions& o) {
    cmd->add_option("--graph", o.graph, "MMDF graph (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--pool", o.pool, "Override the processor pool size")->check(CLI::PositiveNumber);
    cmd->add_option("--mc-scale", o.mc_scale, "Multiply every migration cost by this factor")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--unroll", o.unroll, "Self-timed iterations replayed per mode schedule")
        ->capture_default_str()
        ->check(CLI::Range(2, 100000));
}

void add_search_options(CLI::App* cmd, SearchOptions& o) {
    cmd->add_option("--config", o.config, "GA/scheduler configuration (JSON)")->check(CLI::ExistingFile);
    cmd->add_option("--seed", o.seed, "Random seed")->capture_default_str();
    cmd->add_option("--generations", o.generations, "Override the generation count");
    cmd->add_option("--population", o.population, "Override population, mu and lambda")
        ->check(CLI::PositiveNumber);
}

Spec load_graph(const GraphOptions& o) {
    Spec spec = load_spec_file(o.graph);
    if (o.pool) {
        spec.processor_pool = *o.pool;
    }
    if (o.mc_scale) {
        spec = with_scaled_migration_cost(spec, *o.mc_scale);
    }
    validate(spec);
    return spec;
}

GaConfig load_search(const SearchOptions& o, const GraphOptions& g) {
    GaConfig c;
    if (!o.config.empty()) {
        c = load_config(read_text_file(o.config));
    }
    c.seed = o.seed;
    c.unroll = g.unroll;
    if (o.generations) {
        c.max_generations = *o.generations;
    }
    if (o.population) {
        c.population_size = c.mu = c.lambda = *o.population;
    }
    c.validate();
    return c;
}

fs::path prepare_out_dir(const std::string& dir) {
    fs::path out = dir.empty() ? fs::path(".") : fs::path(dir);
    fs::create_directories(out);
    return out;
}

void print_summary(const Spec& spec, const AnalysisResult& a) {
    const auto& r = a.report;
    std::cout << (r.feasible ? "feasible" : "infeasible") << ": processors " << r.processors << ", mig_cost_total "
              << r.mig_cost_total << ", buffer " << r.output_buffer_size << "\n";
    for (const auto& m : r.modes) {
        std::cout << "  " << spec.mtg.modes[m.mode].name << ": latency " << m.latency << ", II "
                  << to_string(m.initiation_interval) << ", allowed " << to_string(m.allowed_interval)
                  << (m.meets_requirement ? "" : "  [violated]") << "\n";
    }
}

StrategyResult run_strategy(const Spec& spec, const std::string& strategy, const GaConfig& config) {
    if (strategy == "proposed") {
        return evolve(spec, config);
    }
    if (strategy == "fixed") {
        return run_fixed(spec, config);
    }
    return run_base(spec, config).result;
}

int cmd_analyze(const GraphOptions& g, const std::string& mapping_file, const std::string& out_dir) {
    const Spec spec = load_graph(g);
    const MappingSolution mapping = load_mapping_file(spec, mapping_file);
    const AnalysisResult a = analyze(spec, mapping, g.unroll);
    const fs::path out = prepare_out_dir(out_dir);
    write_text_file(out / "report.json", report_json(spec, a));
    print_summary(spec, a);
    return a.report.feasible ? kOk : kInfeasible;
}

int cmd_schedule(const GraphOptions& g, const SearchOptions& s, const std::string& strategy,
                 const std::string& out_dir) {
    const Spec spec = load_graph(g);
    const GaConfig config = load_search(s, g);
    const StrategyResult result = run_strategy(spec, strategy, config);
    const fs::path out = prepare_out_dir(out_dir);
    write_text_file(out / "mapping.json", serialize_mapping(spec, result.solution));
    write_text_file(out / "report.json", strategy_report_json(spec, result));
    write_text_file(out / "evolution.jsonl", evolution_jsonl(result.log));
    write_text_file(out / "config.json", serialize_config(config));
    for (const auto& schedule : result.analysis.schedules) {
        const auto& name = spec.mtg.modes[schedule.mode].name;
        write_text_file(out / ("gantt_" + name + ".txt"), gantt_text(spec, schedule));
        write_text_file(out / ("gantt_" + name + ".svg"), gantt_svg(spec, schedule));
    }
    std::cout << strategy << " ";
    print_summary(spec, result.analysis);
    if (!result.infeasibility.empty()) {
        std::cerr << "no feasible solution: " << result.infeasibility << "\n";
        return kInfeasible;
    }
    return kOk;
}

int cmd_compare(const GraphOptions& g, const SearchOptions& s, const std::vector<std::int64_t>& sweep,
                const std::string& out_dir) {
    if (sweep.empty()) {
        throw CLI::ValidationError("--mc", "the migration-cost sweep must name at least one value");
    }
    const Spec base_spec = load_graph(g);
    const GaConfig config = load_search(s, g);
    const std::vector<std::string> strategies{"base", "fixed", "proposed"};
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    std::ostringstream table;
    table << std::left << std::setw(8) << "MC";
    for (const auto& name : strategies) {
        table << std::setw(30) << (name + " (procs/mig/buffer)");
    }
    table << "\n";
    for (std::int64_t mc : sweep) {
        const Spec spec = with_uniform_migration_cost(base_spec, mc);
        table << std::setw(8) << mc;
        for (const auto& name : strategies) {
            nlohmann::ordered_json cell;
            cell["mc"] = mc;
            cell["strategy"] = name;
            std::string text;
            try {
                const StrategyResult r = run_strategy(spec, name, config);
                const auto& rep = r.analysis.report;
                cell["feasible"] = rep.feasible;
                cell["processors"] = rep.processors;
                cell["mig_cost_total"] = rep.mig_cost_total;
                cell["output_buffer_size"] = rep.output_buffer_size;
                if (rep.feasible) {
                    text = std::to_string(rep.processors) + " / " + std::to_string(rep.mig_cost_total) + " / " +
                           std::to_string(rep.output_buffer_size);
                } else {
                    cell["infeasibility"] = r.infeasibility;
                    text = "infeasible";
                }
            } catch (const std::exception& e) {
                cell["feasible"] = false;
                cell["infeasibility"] = e.what();
                text = "infeasible";
            }
            table << std::setw(30) << text;
            rows.push_back(cell);
        }
        table << "\n";
    }
    const fs::path out = prepare_out_dir(out_dir);
    nlohmann::ordered_json doc;
    doc["cells"] = rows;
    write_text_file(out / "compare.json", doc.dump(2) + "\n");
    write_text_file(out / "compare.txt", table.str());
    std::cout << table.str();
    return kOk;
}

struct ValidateOptions {
    std::string mapping;
    std::string trace;
    bool worst_case = false;
    std::size_t length = 8;
    std::optional<std::int64_t> buffer;
    std::string consumer = "primed";
    bool unbounded = false;
};

int cmd_validate(const GraphOptions& g, const ValidateOptions& v, const std::string& out_dir) {
    const Spec spec = load_graph(g);
    const MappingSolution mapping = load_mapping_file(spec, v.mapping);
    const AnalysisResult a = analyze(spec, mapping, g.unroll);
    const ModeTrace trace = v.worst_case ? worst_case_trace(spec, a.report.delays(), v.length)
                                         : load_trace(spec, read_text_file(v.trace));
    const std::int64_t buffer = v.buffer.value_or(a.report.output_buffer_size);
    SimOptions options;
    options.start = v.consumer == "immediate" ? ConsumerStart::immediate : ConsumerStart::primed;
    options.bounded = !v.unbounded;
    const SimTrace sim = simulate(spec, a, trace, buffer, options);
    const fs::path out = prepare_out_dir(out_dir);
    write_text_file(out / "trace.csv", trace_csv(sim));
    write_text_file(out / "mode_trace.json", serialize_trace(spec, trace));
    if (!a.report.feasible) {
        std::cerr << "warning: mapping violates the tightened throughput requirement\n";
    }
    if (sim.passed) {
        std::cout << "pass: buffer " << buffer << ", " << sim.produced << " produced, " << sim.consumed
                  << " consumed over " << to_string(sim.end_time) << "\n";
        return kOk;
    }
    std::cout << "fail: buffer " << buffer << " underflows at t=" << to_string(*sim.underflow_time) << " after "
              << sim.consumed << " samples\n";
    return kInfeasible;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-mode dataflow mapping, transition analysis and validation"};
    app.require_subcommand(1);

    GraphOptions graph;
    SearchOptions search;
    std::string out_dir;
    std::string mapping_file;
    std::string strategy = "proposed";
    std::vector<std::int64_t> sweep;
    ValidateOptions validate_opts;

    auto* analyze_cmd = app.add_subcommand("analyze", "Transition analysis of a given mapping");
    add_graph_options(analyze_cmd, graph);
    analyze_cmd->add_option("--mapping", mapping_file, "Mapping (JSON)")->required()->check(CLI::ExistingFile);
    analyze_cmd->add_option("--out-dir", out_dir, "Output directory");

    auto* schedule_cmd = app.add_subcommand("schedule", "Search a mapping with one strategy");
    add_graph_options(schedule_cmd, graph);
    add_search_options(schedule_cmd, search);
    schedule_cmd->add_option("--strategy", strategy, "Mapping strategy")
        ->capture_default_str()
        ->check(CLI::IsMember({"proposed", "base", "fixed"}));
    schedule_cmd->add_option("--out-dir", out_dir, "Output directory");

    auto* compare_cmd = app.add_subcommand("compare", "Sweep migration cost across all strategies");
    add_graph_options(compare_cmd, graph);
    add_search_options(compare_cmd, search);
    compare_cmd->add_option("--mc", sweep, "Migration costs to sweep (comma separated)")
        ->required()
        ->delimiter(',')
        ->check(CLI::NonNegativeNumber);
    compare_cmd->add_option("--out-dir", out_dir, "Output directory");

    auto* validate_cmd = app.add_subcommand("validate", "Replay a mode trace against the periodic consumer");
    add_graph_options(validate_cmd, graph);
    validate_cmd->add_option("--mapping,--solution", validate_opts.mapping, "Mapping (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    auto* trace_opt =
        validate_cmd->add_option("--trace", validate_opts.trace, "Mode trace (JSON)")->check(CLI::ExistingFile);
    auto* worst_opt = validate_cmd->add_flag("--worst-case", validate_opts.worst_case,
                                             "Use the delay-maximising trace with MRC-length stays");
    trace_opt->excludes(worst_opt);
    validate_cmd->add_option("--length", validate_opts.length, "Stays in the worst-case trace")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    validate_cmd->add_option("--buffer", validate_opts.buffer, "Buffer size (default: computed)")
        ->check(CLI::PositiveNumber);
    validate_cmd->add_option("--consumer", validate_opts.consumer, "Consumer start policy")
        ->capture_default_str()
        ->check(CLI::IsMember({"primed", "immediate"}));
    validate_cmd->add_flag("--unbounded", validate_opts.unbounded, "Let the buffer grow past its size");
    validate_cmd->add_option("--out-dir", out_dir, "Output directory");

    try {
        app.parse(argc, argv);
        if (*validate_cmd && !validate_opts.worst_case && validate_opts.trace.empty()) {
            throw CLI::RequiredError("--trace or --worst-case");
        }
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kError;
    }

    try {
        if (*analyze_cmd) {
            return cmd_analyze(graph, mapping_file, out_dir);
        }
        if (*schedule_cmd) {
            return cmd_schedule(graph, search, strategy, out_dir);
        }
        if (*compare_cmd) {
            return cmd_compare(graph, search, sweep, out_dir);
        }
        return cmd_validate(graph, validate_opts, out_dir);
    } catch (const CLI::Error& e) {
        std::cerr << "usage error: " << e.what() << "\n";
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
    } catch (const InconsistencyError& e) {
        std::cerr << "inconsistent graph: " << e.what() << "\n";
    } catch (const DeadlockError& e) {
        std::cerr << "deadlock: " << e.what() << "\n";
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
    } catch (const fs::filesystem_error& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
    }
    return kError;
}
