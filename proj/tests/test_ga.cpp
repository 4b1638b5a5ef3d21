#include "mmdf/ga.hpp"
#include "mmdf/report_io.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <iostream>
#include <random>

using namespace mmdf;

namespace {

GaConfig quick(std::uint64_t seed, std::size_t generations = 150) {
    GaConfig c;
    c.seed = seed;
    c.max_generations = generations;
    return c;
}

} // namespace

TEST_CASE("fitness ordering") {
    const Fitness feasible3{true, 3, 0, Rational(0)};
    const Fitness feasible2{true, 2, 40, Rational(0)};
    const Fitness feasible2cheap{true, 2, 10, Rational(0)};
    const Fitness infeasible1{false, 1, 0, Rational(5)};
    const Fitness infeasible2{false, 2, 0, Rational(1)};
    CHECK(ranks_ahead(feasible3, infeasible1));
    CHECK(ranks_ahead(feasible2, feasible3));
    CHECK(ranks_ahead(feasible2cheap, feasible2));
    CHECK(ranks_ahead(infeasible2, infeasible1));
    CHECK_FALSE(ranks_ahead(feasible2, feasible2));
}

TEST_CASE("evaluate examples") {
    const Spec spec = oracle::load_fixture("motiv.json");
    SUBCASE("serial mapping under a tight constraint") {
        const Fitness f = evaluate(spec, uniform_mapping(spec, 0));
        CHECK_FALSE(f.feasible);
        CHECK(f.shortfall > 0);
        CHECK(f.mig_cost_total == 0);
    }
    SUBCASE("fixed-style mapping has no migration") {
        const Fitness f = evaluate(spec, MappingSolution{{{0, 0, 1, 2}, {0, 0, 1, 2}}});
        CHECK(f.feasible);
        CHECK(f.mig_cost_total == 0);
        CHECK(f.processors == 3);
    }
    SUBCASE("migrating two-processor solution with long stays") {
        const Spec long_stays = oracle::load_fixture("motiv_mrc50.json");
        const Fitness f = evaluate(long_stays, MappingSolution{{{0, 0, 1, 1}, {0, 0, 0, 1}}});
        CHECK(f.feasible);
        CHECK(f.processors == 2);
        CHECK(f.mig_cost_total == 20);
    }
}

TEST_CASE("similarity examples") {
    const Spec spec = oracle::load_fixture("rotated.json");
    const MappingSolution m = load_mapping_file(spec, oracle::fixture("rotated_map.json"));
    CHECK(similarity(spec, m, 0, 0, 1, 2) == 2);
    CHECK(similarity(spec, m, 0, 0, 1, 0) == 0);
    const MappingSolution same{{{0, 0, 0, 1, 1, 1}, {0, 0, 0, 1, 1, 1}}};
    CHECK(similarity(spec, same, 0, 0, 1, 0) == 3);
}

TEST_CASE("renaming the rotated mapping removes all migration") {
    const Spec spec = oracle::load_fixture("rotated.json");
    const MappingSolution m = load_mapping_file(spec, oracle::fixture("rotated_map.json"));
    CHECK(mig_cost_total(spec, m) > 0);
    const MappingSolution r = rename_processors(spec, m);
    CHECK(mig_cost_total(spec, r) == 0);
    CHECK(r.modes[0] == m.modes[0]);
    CHECK(rename_processors(spec, r) == r);
}

TEST_CASE("property: renaming never worsens and keeps per-mode schedules") {
    std::mt19937_64 rng(41);
    int checked = 0;
    std::size_t optimal = 0;
    Time total_gap = 0;
    while (checked < 500) {
        Spec spec = oracle::random_spec(rng, {.max_tasks = 5, .max_modes = 2, .max_pool = 5});
        if (spec.mode_count() != 2) {
            continue;
        }
        spec.processor_pool = std::uniform_int_distribution<std::size_t>(2, 5)(rng);
        const MappingSolution m = oracle::random_mapping(spec, rng);
        const MappingSolution r = rename_processors(spec, m);
        const Time before = mig_cost_total(spec, m);
        const Time after = mig_cost_total(spec, r);
        const Time best = oracle::optimal_renaming_cost(spec, m);
        CHECK(after <= before);
        CHECK(after >= best);
        optimal += after == best;
        total_gap += after - best;
        const Fitness fm = evaluate(spec, m);
        const Fitness fr = evaluate(spec, r);
        CHECK(fr.processors == fm.processors);
        for (ModeIndex mode = 0; mode < 2; ++mode) {
            const auto a = list_schedule(spec, mode, m.modes[mode]);
            const auto b = list_schedule(spec, mode, r.modes[mode]);
            CHECK(a.latency == b.latency);
            CHECK(a.initiation_interval == b.initiation_interval);
        }
        ++checked;
    }
    MESSAGE("renaming reached the permutation optimum on " << optimal << " of " << checked
                                                           << " instances; summed gap " << total_gap);
}

TEST_CASE("operators") {
    Rng rng(5);
    const MappingSolution a{{{0, 1, 2, 0}, {1, 1, 0, 2}}};
    const MappingSolution b{{{2, 2, 2, 2}, {0, 0, 0, 0}}};
    SUBCASE("identical parents give identical children") {
        const auto [x, y] = crossover(a, a, 1.0, rng);
        CHECK(x == a);
        CHECK(y == a);
    }
    SUBCASE("zero probabilities are identities") {
        CHECK(mutate(a, 3, 0.0, rng) == a);
        const auto [x, y] = crossover(a, b, 0.0, rng);
        CHECK(x == a);
        CHECK(y == b);
    }
    SUBCASE("uniform crossover golden") {
        Rng seeded(2024);
        const auto [x, y] = crossover(a, b, 1.0, seeded);
        // Children are a gene-wise partition of the parents.
        for (std::size_t m = 0; m < 2; ++m) {
            for (std::size_t i = 0; i < 4; ++i) {
                const bool swapped = x.modes[m][i] != a.modes[m][i];
                CHECK((swapped ? y.modes[m][i] == a.modes[m][i] : y.modes[m][i] == b.modes[m][i]));
            }
        }
        Rng again(2024);
        CHECK(crossover(a, b, 1.0, again) == std::make_pair(x, y));
        CHECK(x == MappingSolution{{{0, 2, 2, 2}, {0, 1, 0, 0}}});
    }
    SUBCASE("mutation changes at most one gene") {
        const MappingSolution m = mutate(a, 3, 1.0, rng);
        int diff = 0;
        for (std::size_t k = 0; k < 2; ++k) {
            for (std::size_t i = 0; i < 4; ++i) {
                diff += m.modes[k][i] != a.modes[k][i];
                CHECK(m.modes[k][i] < 3);
            }
        }
        CHECK(diff <= 1);
    }
}

TEST_CASE("evolve examples") {
    SUBCASE("single mode, two independent tasks, loose constraint") {
        const Spec spec = load_spec(R"({"modes": [{"name": "S", "mrc": 1}],
            "tasks": [{"name": "A", "wcet": 4, "ports": []}, {"name": "B", "wcet": 6, "ports": []}],
            "channels": [], "throughput_constraint": {"num": 1, "den": 100}, "processor_pool": 3})");
        const auto r = evolve(spec, quick(1, 30));
        CHECK(r.fitness.feasible);
        CHECK(r.fitness.processors == 1);
        CHECK(r.fitness.mig_cost_total == 0);
        CHECK(r.infeasibility.empty());
    }
    SUBCASE("motiv fixtures match the exhaustive oracle") {
        for (const char* name : {"motiv.json", "motiv_mrc50.json"}) {
            const Spec spec = oracle::load_fixture(name);
            const auto truth = oracle::brute_force_processors(spec);
            REQUIRE(truth.migrating.has_value());
            const auto r = evolve(spec, quick(7));
            CHECK(r.fitness.feasible);
            CHECK(r.fitness.processors == *truth.migrating);
        }
    }
    SUBCASE("motiv with migration cost scaled by 100") {
        const Spec spec = with_scaled_migration_cost(oracle::load_fixture("motiv_mrc50.json"), 100);
        const auto truth = oracle::brute_force_processors(spec);
        const auto r = evolve(spec, quick(7));
        REQUIRE(truth.migrating.has_value());
        CHECK(r.fitness.processors == *truth.migrating);
        CHECK(r.fitness.mig_cost_total == 0);
    }
}

TEST_CASE("evolve is deterministic and elitist") {
    const Spec spec = oracle::load_fixture("four_modes.json");
    const auto a = evolve(spec, quick(3, 60));
    const auto b = evolve(spec, quick(3, 60));
    CHECK(a.solution == b.solution);
    CHECK(a.fitness == b.fitness);
    REQUIRE(a.log.size() == 61);
    for (std::size_t g = 1; g < a.log.size(); ++g) {
        CHECK_FALSE(ranks_ahead(a.log[g - 1].best, a.log[g].best));
        CHECK(a.log[g].generation == g);
    }
    CHECK(a.log.back().best == a.fitness);
    CHECK(a.analysis.report.processors == a.fitness.processors);
}

TEST_CASE("property: evolve reaches the oracle optimum on small random instances") {
    std::mt19937_64 rng(43);
    int instances = 0;
    while (instances < 6) {
        Spec spec = oracle::random_spec(rng, {.max_tasks = 4, .max_modes = 3, .max_pool = 3});
        spec.instance_mapping = false;
        // Keeps the exhaustive oracle within pool^genes <= 3^9 mappings.
        if (spec.mode_count() < 2 || spec.processor_pool < 2 || spec.task_count() * spec.mode_count() > 9) {
            continue;
        }
        const MappingSolution probe = oracle::random_mapping(spec, rng);
        spec = oracle::make_feasible(spec, probe, Rational(0));
        const auto truth = oracle::brute_force_processors(spec);
        REQUIRE(truth.migrating.has_value());
        int hits = 0;
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            GaConfig desk;
            desk.seed = seed;
            const auto r = evolve(spec, desk);
            hits += r.fitness.feasible && r.fitness.processors == *truth.migrating;
        }
        INFO("instance " << instances << " with " << spec.mode_count() << " modes");
        CHECK(hits >= 19);
        ++instances;
    }
}

TEST_CASE("config validation") {
    GaConfig c;
    c.mu = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = GaConfig{};
    c.mutation_probability = 1.5;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    const GaConfig p = GaConfig::large_scale();
    CHECK(p.population_size == 100);
    CHECK(p.max_generations == 30000);
}
