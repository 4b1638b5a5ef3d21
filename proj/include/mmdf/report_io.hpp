#pragma once

#include "mmdf/analysis.hpp"
#include "mmdf/ga.hpp"
#include "mmdf/mapping.hpp"
#include "mmdf/model.hpp"
#include "mmdf/simulator.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace mmdf {

/// {"mapping": {"<mode>": {"<task>": p | [p per instance]}}}
MappingSolution load_mapping(const Spec& spec, std::string_view document);
MappingSolution load_mapping_file(const Spec& spec, const std::filesystem::path& path);
std::string serialize_mapping(const Spec& spec, const MappingSolution& solution);

/// Transition analysis report; exact rationals are written as "p/q" strings.
std::string report_json(const Spec& spec, const AnalysisResult& analysis);

/// Report of a strategy run: fitness, reason when infeasible, analysis.
std::string strategy_report_json(const Spec& spec, const StrategyResult& result);

/// One JSON object per generation: generation, best and median fitness.
std::string evolution_jsonl(const std::vector<GenerationStats<Fitness>>& log);

/// {"trace": [{"mode": "<name>", "iterations": n}, ...]}
ModeTrace load_trace(const Spec& spec, std::string_view document);
std::string serialize_trace(const Spec& spec, const ModeTrace& trace);

/// "time,event,occupancy" lines; time as an exact "p/q" value.
std::string trace_csv(const SimTrace& trace);

/// GaConfig fields by name, plus "preset": "desk" | "large" applied first.
/// Fields may also be grouped under "ga" and "scheduler" objects.
GaConfig load_config(std::string_view document);
std::string serialize_config(const GaConfig& config);

void write_text_file(const std::filesystem::path& path, std::string_view text);

} // namespace mmdf
