#pragma once

#include "mmdf/ga.hpp"

#include <map>
#include <vector>

namespace mmdf {

/// One mapping that is used unchanged in every mode, so no task ever
/// migrates. Instances of a task share its processor.
StrategyResult run_fixed(const Spec& spec, const GaConfig& config);

/// Best single-mode schedule found for one exact processor count.
struct ModePoint {
    std::size_t processors = 0;
    ModeMapping genes;
    Time latency = 0;
    Rational initiation_interval{1};
};

/// Per-mode candidates keyed by used processor count.
using ModeFront = std::map<std::size_t, ModePoint>;

/// Per-mode search over processor counts 1..pool, keeping for every exact
/// used-processor count the schedule of lowest interval (then latency).
std::vector<ModeFront> mode_fronts(const Spec& spec, const GaConfig& config);

struct BaseResult {
    StrategyResult result;
    std::vector<ModeFront> fronts;
    std::size_t rounds = 0;
};

/// Optimises each mode in isolation against ThrConst, then raises the
/// processor count of every mode whose transition-adjusted requirement is
/// violated until all modes pass or the pool is exhausted.
BaseResult run_base(const Spec& spec, const GaConfig& config);

} // namespace mmdf
