#include "mmdf/mapping.hpp"

#include "mmdf/errors.hpp"

#include <algorithm>

namespace mmdf {

GeneLayout gene_layout(const Spec& spec, ModeIndex mode) {
    GeneLayout layout;
    RepetitionVector reps;
    if (spec.instance_mapping) {
        reps = repetition_vector(spec, mode);
    }
    for (TaskIndex t = 0; t < spec.tasks.size(); ++t) {
        layout.offset.push_back(layout.size);
        std::size_t count = spec.instance_mapping ? static_cast<std::size_t>(reps[t]) : 1;
        layout.count.push_back(count);
        layout.size += count;
    }
    return layout;
}

std::vector<GeneLayout> gene_layouts(const Spec& spec) {
    std::vector<GeneLayout> out;
    for (ModeIndex m = 0; m < spec.mode_count(); ++m) {
        out.push_back(gene_layout(spec, m));
    }
    return out;
}

std::vector<std::set<TaskIndex>> processor_task_sets(const GeneLayout& layout, const ModeMapping& genes,
                                                     std::size_t pool) {
    std::vector<std::set<TaskIndex>> sets(pool);
    for (TaskIndex t = 0; t < layout.offset.size(); ++t) {
        for (std::size_t k = 0; k < layout.count[t]; ++k) {
            sets.at(genes[layout.offset[t] + k]).insert(t);
        }
    }
    return sets;
}

std::size_t used_processor_count(const ModeMapping& genes) {
    ModeMapping sorted = genes;
    std::sort(sorted.begin(), sorted.end());
    return static_cast<std::size_t>(std::unique(sorted.begin(), sorted.end()) - sorted.begin());
}

std::size_t processor_count(const MappingSolution& solution) {
    std::size_t best = 0;
    for (const auto& genes : solution.modes) {
        best = std::max(best, used_processor_count(genes));
    }
    return best;
}

MappingSolution uniform_mapping(const Spec& spec, ProcessorId processor) {
    MappingSolution out;
    for (const auto& layout : gene_layouts(spec)) {
        out.modes.emplace_back(layout.size, processor);
    }
    return out;
}

void check_mapping(const Spec& spec, const MappingSolution& solution) {
    if (solution.modes.size() != spec.mode_count()) {
        throw ValidationError("mapping covers " + std::to_string(solution.modes.size()) + " modes, model has " +
                              std::to_string(spec.mode_count()));
    }
    for (ModeIndex m = 0; m < spec.mode_count(); ++m) {
        GeneLayout layout = gene_layout(spec, m);
        if (solution.modes[m].size() != layout.size) {
            throw ValidationError("mapping for mode '" + spec.mtg.modes[m].name + "' has " +
                                  std::to_string(solution.modes[m].size()) + " genes, expected " +
                                  std::to_string(layout.size));
        }
        for (ProcessorId p : solution.modes[m]) {
            if (p >= spec.processor_pool) {
                throw ValidationError("mapping for mode '" + spec.mtg.modes[m].name + "' uses processor " +
                                      std::to_string(p) + " outside the pool of " +
                                      std::to_string(spec.processor_pool));
            }
        }
    }
}

} // namespace mmdf
