#pragma once

#include "mmdf/model.hpp"

#include <cstdint>
#include <set>
#include <vector>

namespace mmdf {

using ProcessorId = std::uint32_t;

/// Gene positions of one mode: every task owns `count[t]` consecutive genes
/// starting at `offset[t]` (one per firing with instance mapping, else one).
struct GeneLayout {
    std::vector<std::size_t> offset;
    std::vector<std::size_t> count;
    std::size_t size = 0;

    std::size_t gene(TaskIndex task, std::int64_t instance) const {
        return offset[task] + (count[task] > 1 ? static_cast<std::size_t>(instance) : 0);
    }
};

GeneLayout gene_layout(const Spec& spec, ModeIndex mode);
std::vector<GeneLayout> gene_layouts(const Spec& spec);

/// Processor assignment of every gene of one mode.
using ModeMapping = std::vector<ProcessorId>;

/// The chromosome: one ModeMapping per mode.
struct MappingSolution {
    std::vector<ModeMapping> modes;

    bool operator==(const MappingSolution&) const = default;
    auto operator<=>(const MappingSolution&) const = default;
};

/// Map(m, p) for p in [0, pool): the set of tasks with at least one gene on p.
std::vector<std::set<TaskIndex>> processor_task_sets(const GeneLayout& layout, const ModeMapping& genes,
                                                     std::size_t pool);

/// |Proc_m|: processors that host at least one gene.
std::size_t used_processor_count(const ModeMapping& genes);

/// Maximum over modes of the used processor count.
std::size_t processor_count(const MappingSolution& solution);

/// Same assignment for every gene of every mode.
MappingSolution uniform_mapping(const Spec& spec, ProcessorId processor);

/// Throws ValidationError when the shape or a processor id is out of range.
void check_mapping(const Spec& spec, const MappingSolution& solution);

} // namespace mmdf
