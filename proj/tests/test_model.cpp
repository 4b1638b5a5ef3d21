#include "mmdf/errors.hpp"
#include "mmdf/model.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace mmdf;

namespace {

const char* kMinimal = R"({
  "modes": [{"name": "S", "mrc": 1}],
  "tasks": [{"name": "A", "wcet": 3, "ports": []}],
  "channels": [],
  "throughput_constraint": {"num": 1, "den": 10},
  "processor_pool": 1
})";

std::string chain(int prod, int cons) {
    return std::string(R"({
  "modes": [{"name": "S", "mrc": 1}],
  "tasks": [
    {"name": "P", "wcet": 2, "ports": [{"name": "o", "direction": "out", "rate": )") +
           std::to_string(prod) + R"(}]},
    {"name": "Q", "wcet": 2, "ports": [{"name": "i", "direction": "in", "rate": )" +
           std::to_string(cons) + R"(}]}
  ],
  "channels": [{"src": "P.o", "dst": "Q.i"}],
  "throughput_constraint": {"num": 1, "den": 100},
  "processor_pool": 2
})";
}

} // namespace

TEST_CASE("minimal document loads") {
    const Spec spec = load_spec(kMinimal);
    CHECK(spec.task_count() == 1);
    CHECK(spec.mode_count() == 1);
    CHECK(spec.throughput_constraint == Rational(1, 10));
    CHECK(spec.mtg.initial_mode == 0);
}

TEST_CASE("motivational fixture loads with its constants") {
    const Spec spec = oracle::load_fixture("motiv.json");
    CHECK(spec.task_count() == 4);
    CHECK(spec.throughput_constraint == Rational(1, 35));
    const ModeIndex m1 = *spec.find_mode("M1");
    const ModeIndex m2 = *spec.find_mode("M2");
    const std::vector<Time> w1{17, 13, 14, 16};
    const std::vector<Time> w2{12, 10, 8, 10};
    for (TaskIndex t = 0; t < 4; ++t) {
        CHECK(spec.tasks[t].wcet[m1] == w1[t]);
        CHECK(spec.tasks[t].wcet[m2] == w2[t]);
        CHECK(spec.tasks[t].migration_cost == 10);
    }
    CHECK(spec.mtg.modes[m1].mrc == 5);
}

TEST_CASE("repetition vectors") {
    SUBCASE("homogeneous connected DAG is all ones") {
        const Spec spec = oracle::load_fixture("motiv.json");
        CHECK(repetition_vector(spec, 0).firings == std::vector<std::int64_t>{1, 1, 1, 1});
    }
    SUBCASE("motiv M2: D fires three times per firing of B") {
        const Spec spec = oracle::load_fixture("motiv.json");
        const auto reps = repetition_vector(spec, *spec.find_mode("M2"));
        CHECK(reps.firings == std::vector<std::int64_t>{1, 1, 1, 3});
    }
    SUBCASE("rates 2 and 3 give (3, 2)") {
        const Spec spec = load_spec(chain(2, 3));
        CHECK(repetition_vector(spec, 0).firings == std::vector<std::int64_t>{3, 2});
    }
}

TEST_CASE("rate mismatch is rejected citing the balance equation") {
    Spec spec = oracle::load_fixture("motiv.json");
    // D reads one token from B but three from C in M2: B and C would need different rates.
    spec.tasks[3].ports[1].rate[1] = 3;
    try {
        validate(spec);
        FAIL("expected an inconsistency error");
    } catch (const InconsistencyError& e) {
        CHECK(std::string(e.what()).find("balance") != std::string::npos);
        CHECK(std::string(e.what()).find("M2") != std::string::npos);
    }
}

TEST_CASE("validation errors name the offending entity") {
    Spec spec = oracle::load_fixture("motiv.json");
    SUBCASE("self transition") {
        spec.mtg.transitions.push_back({0, 0});
        CHECK_THROWS_AS(validate(spec), ValidationError);
    }
    SUBCASE("negative initial tokens") {
        spec.channels[0].initial_tokens[0] = -1;
        CHECK_THROWS_AS(validate(spec), ValidationError);
    }
    SUBCASE("nonpositive wcet") {
        spec.tasks[0].wcet[1] = 0;
        CHECK_THROWS_WITH_AS(validate(spec), doctest::Contains("'A'"), ValidationError);
    }
    SUBCASE("port used by two channels") {
        spec.channels.push_back(spec.channels[0]);
        CHECK_THROWS_AS(validate(spec), ValidationError);
    }
    SUBCASE("cycle without initial tokens deadlocks") {
        Task& d = spec.tasks[3];
        d.ports.push_back({"back", PortDirection::output, {1, 1}});
        spec.tasks[0].ports.push_back({"back", PortDirection::input, {1, 3}});
        spec.channels.push_back({{3, d.ports.size() - 1}, {0, spec.tasks[0].ports.size() - 1}, {0, 0}});
        CHECK_THROWS_AS(validate(spec), DeadlockError);
        spec.channels.back().initial_tokens = {1, 3};
        CHECK_NOTHROW(validate(spec));
    }
}

TEST_CASE("parse errors") {
    CHECK_THROWS_AS(load_spec("{"), ParseError);
    CHECK_THROWS_AS(load_spec(R"({"modes": []})"), std::exception);
    CHECK_THROWS_AS(load_spec(R"({"modes": [{"name": "S", "mrc": "x"}]})"), ParseError);
}

TEST_CASE("unknown mode in per-mode values is rejected") {
    std::string doc = kMinimal;
    doc.replace(doc.find("\"wcet\": 3"), 9, R"("wcet": {"S": 3, "Q": 4})");
    CHECK_THROWS_AS(load_spec(doc), ValidationError);
}

TEST_CASE("property: serialize round-trips and balance equations hold") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 200; ++i) {
        const Spec spec = oracle::random_spec(rng);
        const Spec back = load_spec(serialize(spec));
        CHECK(back == spec);
        for (ModeIndex m = 0; m < spec.mode_count(); ++m) {
            const auto reps = repetition_vector(spec, m);
            for (ChannelIndex c = 0; c < spec.channels.size(); ++c) {
                const auto& ch = spec.channels[c];
                CHECK(reps[ch.src.task] * spec.production(c, m) == reps[ch.dst.task] * spec.consumption(c, m));
            }
        }
    }
}

TEST_CASE("property: scaling both rates of a channel keeps the repetition vector") {
    std::mt19937_64 rng(12);
    for (int i = 0; i < 100; ++i) {
        Spec spec = oracle::random_spec(rng, {.allow_cycles = false});
        if (spec.channels.empty()) {
            continue;
        }
        const auto before = repetition_vector(spec, 0);
        const auto& ch = spec.channels[0];
        spec.tasks[ch.src.task].ports[ch.src.port].rate[0] *= 3;
        spec.tasks[ch.dst.task].ports[ch.dst.port].rate[0] *= 3;
        CHECK(repetition_vector(spec, 0) == before);
    }
}

TEST_CASE("migration cost helpers") {
    const Spec spec = oracle::load_fixture("motiv.json");
    const Spec zero = with_uniform_migration_cost(spec, 0);
    const Spec scaled = with_scaled_migration_cost(spec, 100);
    for (TaskIndex t = 0; t < 4; ++t) {
        CHECK(zero.tasks[t].migration_cost == 0);
        CHECK(scaled.tasks[t].migration_cost == 1000);
    }
}
