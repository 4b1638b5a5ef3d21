#include "mmdf/baselines.hpp"

#include "oracles.hpp"

#include <doctest.h>

using namespace mmdf;

namespace {

GaConfig quick(std::uint64_t seed = 0) {
    GaConfig c;
    c.seed = seed;
    c.max_generations = 150;
    return c;
}

} // namespace

TEST_CASE("fixed strategy") {
    SUBCASE("motiv needs three processors, as the single-mapping oracle says") {
        const Spec spec = oracle::load_fixture("motiv.json");
        const auto truth = oracle::brute_force_processors(spec);
        const auto r = run_fixed(spec, quick());
        REQUIRE(truth.fixed.has_value());
        CHECK(*truth.fixed == 3);
        CHECK(r.fitness.feasible);
        CHECK(r.fitness.processors == 3);
        CHECK(r.fitness.mig_cost_total == 0);
        CHECK(r.solution.modes[0] == r.solution.modes[1]);
    }
    SUBCASE("never below the migrating optimum") {
        for (const char* name : {"motiv.json", "motiv_mrc50.json", "independent.json"}) {
            const Spec spec = oracle::load_fixture(name);
            const auto truth = oracle::brute_force_processors(spec);
            REQUIRE(truth.fixed.has_value());
            REQUIRE(truth.migrating.has_value());
            CHECK(*truth.fixed >= *truth.migrating);
            CHECK(run_fixed(spec, quick()).fitness.processors == *truth.fixed);
        }
    }
    SUBCASE("single mode: same as proposed") {
        const Spec spec = oracle::load_fixture("single.json");
        CHECK(run_fixed(spec, quick()).fitness == evolve(spec, quick()).fitness);
    }
    SUBCASE("critical-path lower bound") {
        // Two independent 30-unit tasks under a 1/40 constraint need two processors.
        const Spec spec = load_spec(R"({"modes": [{"name": "S", "mrc": 1}],
            "tasks": [{"name": "A", "wcet": 30, "ports": []}, {"name": "B", "wcet": 30, "ports": []}],
            "channels": [], "throughput_constraint": {"num": 1, "den": 40}, "processor_pool": 3})");
        CHECK(run_fixed(spec, quick()).fitness.processors >= 2);
    }
}

TEST_CASE("property: fixed is never below the migrating optimum") {
    std::mt19937_64 rng(53);
    int instances = 0;
    while (instances < 10) {
        Spec spec = oracle::random_spec(rng, {.max_tasks = 4, .max_modes = 2, .max_pool = 3});
        spec.instance_mapping = false;
        if (spec.mode_count() != 2) {
            continue;
        }
        spec = oracle::make_feasible(spec, oracle::random_mapping(spec, rng), Rational(1, 10));
        const auto truth = oracle::brute_force_processors(spec);
        const auto fixed = run_fixed(spec, quick());
        CHECK(fixed.fitness.mig_cost_total == 0);
        if (truth.fixed) {
            CHECK(*truth.fixed >= *truth.migrating);
            CHECK(fixed.fitness.feasible);
            CHECK(fixed.fitness.processors >= *truth.migrating);
        } else {
            CHECK_FALSE(fixed.fitness.feasible);
        }
        ++instances;
    }
}

TEST_CASE("base strategy") {
    SUBCASE("zero delay: base matches proposed") {
        const Spec spec = oracle::load_fixture("independent.json");
        const auto base = run_base(spec, quick());
        const auto proposed = evolve(spec, quick());
        CHECK(base.result.fitness.feasible);
        CHECK(base.result.fitness.processors == proposed.fitness.processors);
        for (const auto& m : base.result.analysis.report.modes) {
            CHECK(m.max_trans_delay == Rational(0));
        }
    }
    SUBCASE("motiv with zero migration cost: base matches proposed") {
        const Spec spec = with_uniform_migration_cost(oracle::load_fixture("motiv.json"), 0);
        const auto base = run_base(spec, quick());
        const auto proposed = evolve(spec, quick());
        REQUIRE(base.result.fitness.feasible);
        CHECK(base.result.fitness.processors == proposed.fitness.processors);
    }
    SUBCASE("motiv MC 10: base is infeasible or uses at least as many processors") {
        const Spec spec = oracle::load_fixture("motiv.json");
        const auto base = run_base(spec, quick());
        const auto proposed = evolve(spec, quick());
        CHECK((!base.result.fitness.feasible || base.result.fitness.processors >= proposed.fitness.processors));
        CHECK(base.rounds <= spec.mode_count() * spec.processor_pool);
    }
    SUBCASE("motiv MC 10^4: base fails on the throughput precondition, proposed stays feasible") {
        const Spec spec = with_scaled_migration_cost(oracle::load_fixture("motiv.json"), 1000);
        const auto base = run_base(spec, quick());
        CHECK_FALSE(base.result.fitness.feasible);
        CHECK(base.result.infeasibility.find("throughput budget") != std::string::npos);
        CHECK(evolve(spec, quick()).fitness.feasible);
    }
    SUBCASE("archive holds one best point per processor count") {
        const Spec spec = oracle::load_fixture("motiv.json");
        const auto fronts = mode_fronts(spec, quick());
        REQUIRE(fronts.size() == 2);
        for (const auto& front : fronts) {
            CHECK(front.size() <= spec.processor_pool);
            for (const auto& [count, point] : front) {
                CHECK(point.processors == count);
                CHECK(used_processor_count(point.genes) == count);
            }
        }
        CHECK(fronts[0].at(1).initiation_interval == Rational(60));
        CHECK(fronts[0].at(3).initiation_interval == Rational(27));
    }
    SUBCASE("deterministic") {
        const Spec spec = oracle::load_fixture("four_modes.json");
        const auto a = run_base(spec, quick(4));
        const auto b = run_base(spec, quick(4));
        CHECK(a.result.solution == b.result.solution);
        CHECK(a.rounds == b.rounds);
    }
}
