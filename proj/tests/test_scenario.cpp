#include "doctest.h"

#include "lambda_memory/errors.hpp"
#include "lambda_memory/scenario.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace lmem;
using nlohmann::json;
using doctest::Approx;

namespace {

json minimal() {
    return json::parse(R"({"medium": {"alphaL": 24}, "input": {"shape": "gaussian"}, "target": {"shape": "ramp_pos"}})");
}

} // namespace

TEST_CASE("minimal scenario takes documented defaults") {
    const ScenarioSpec s = parse_scenario(minimal());
    CHECK(s.medium.d() == 12.0);
    CHECK(s.input.shape == PulseShape::gaussian);
    CHECK(s.target.shape == PulseShape::ramp_pos);
    CHECK(s.storage_time == 0.0);
    CHECK(s.write_window == 50.0);
    CHECK(s.read_window == 50.0);
    CHECK(s.n_z == 200);
    CHECK_FALSE(s.dt.has_value());
    CHECK(s.refine_iterations == 2);
    CHECK(s.input_grid().t_start() == -50.0);
    CHECK(s.target_grid().t_end() == 50.0);
}

TEST_CASE("physical units convert with the scenario's gamma") {
    json j = minimal();
    j["medium"]["gamma"] = 1e9;
    j["medium"]["spin_lifetime_us"] = 500.0;
    j["storage_time_us"] = 100.0;
    const ScenarioSpec s = parse_scenario(j);
    CHECK(s.storage_time == Approx(1e5));
    CHECK(s.storage_decay_exponent() == Approx(0.1));
}

TEST_CASE("schema errors") {
    json j = minimal();
    j["medium"].erase("alphaL");
    CHECK_THROWS_AS(parse_scenario(j), InvalidParameter);

    j = minimal();
    j.erase("target");
    CHECK_THROWS_AS(parse_scenario(j), InvalidParameter);

    j = minimal();
    j["input"]["shape"] = "sawtooth";
    CHECK_THROWS_AS(parse_scenario(j), InvalidParameter);

    j = minimal();
    j["input"]["sigma"] = "wide";
    CHECK_THROWS_AS(parse_scenario(j), InvalidParameter);

    j = minimal();
    j["storage_time"] = -1.0;
    CHECK_THROWS_AS(parse_scenario(j), InvalidParameter);

    j = minimal();
    j["medium"]["alphaL"] = -2.0;
    CHECK_THROWS_AS(parse_scenario(j), InvalidParameter);

    j = minimal();
    j["target"] = {{"shape", "time_bin"}, {"sigma_bin", 3.0}, {"separation", 8.0}};
    CHECK_THROWS_AS(parse_scenario(j), InvalidParameter);

    j = minimal();
    j["input"]["sigma"] = 30.0; // does not fit the window
    CHECK_THROWS_AS(parse_scenario(j), InvalidParameter);

    j = minimal();
    j["grid"] = {{"n_z", 1}};
    CHECK_THROWS_AS(parse_scenario(j), InvalidParameter);

    CHECK_THROWS_AS(parse_scenario(json::array()), InvalidParameter);
}

TEST_CASE("custom pulses") {
    json j = minimal();
    j["input"] = {{"shape", "custom"}, {"samples", {0.0, 1.0, json::array({0.5, 0.5}), 0.0}}};
    const ScenarioSpec s = parse_scenario(j);
    const Envelope e = build_pulse(s.input, s.input_grid());
    CHECK(e.energy() == Approx(1.0));
    CHECK(std::abs(e.at(-50.0 + 50.0 / 3.0)) > 0.0);
}

TEST_CASE("round trip through JSON") {
    json j = minimal();
    j["id"] = "rt";
    j["target"] = {{"shape", "time_bin"}, {"theta", 0.5}, {"phi", 0.25}};
    j["storage_time"] = 12.5;
    j["grid"] = {{"n_z", 150}, {"dt", 0.01}};
    const ScenarioSpec a = parse_scenario(j);
    const ScenarioSpec b = parse_scenario(to_json(a));
    CHECK(b.id == "rt");
    CHECK(b.target.theta == 0.5);
    CHECK(b.target.phi == 0.25);
    CHECK(b.storage_time == 12.5);
    CHECK(b.n_z == 150);
    CHECK(b.dt.value() == 0.01);
    CHECK(to_json(b) == to_json(a));
}

TEST_CASE("files may carry comments") {
    const auto path = std::filesystem::temp_directory_path() / "lmem_scenario_comments.json";
    {
        std::ofstream out(path);
        out << "// header\n" << minimal().dump() << "\n";
    }
    CHECK(load_scenario(path).medium.alpha_l() == 24.0);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_scenario("/definitely/not/here.json"), InvalidParameter);
}

TEST_CASE("parameter overrides") {
    ScenarioSpec s = parse_scenario(minimal());
    set_parameter(s, "alphaL", 48.0);
    CHECK(s.medium.d() == 24.0);
    set_parameter(s, "spin_lifetime_us", 500.0);
    set_parameter(s, "storage_time_us", 100.0);
    CHECK(s.storage_decay_exponent() == Approx(0.1));
    set_parameter(s, "n_z", 120.0);
    CHECK(s.n_z == 120);
    CHECK_THROWS_AS(set_parameter(s, "n_z", 12.5), InvalidParameter);
    CHECK_THROWS_AS(set_parameter(s, "colour", 1.0), InvalidParameter);
    CHECK_THROWS_AS(set_parameter(s, "omega_max", -1.0), InvalidParameter);
    for (const auto& name : parameter_names())
        CHECK_FALSE(name.empty());
}

TEST_CASE("shape names") {
    for (auto s : {PulseShape::gaussian, PulseShape::ramp_pos, PulseShape::ramp_neg, PulseShape::time_bin,
                   PulseShape::custom})
        CHECK(parse_shape(to_string(s)) == s);
    CHECK_THROWS_AS(parse_shape("square"), InvalidParameter);
}
