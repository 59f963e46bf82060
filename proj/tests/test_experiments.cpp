#include <doctest.h>

#include <mg1sim/config_io.hpp>
#include <mg1sim/experiments.hpp>

#include "test_fixtures.hpp"

#include <fstream>
#include <sstream>

using namespace mg1sim;

namespace {

Scenario small_scenario() {
    Scenario s;
    s.name = "small";
    s.config = testing::mm1_config();
    s.policy = PolicyKind::DelayFair;
    s.v_sweep = std::vector<double>{10.0, 100.0};
    s.frames = 2000;
    s.replications = 3;
    s.seed_base = 1;
    return s;
}

}  // namespace

TEST_CASE("an explicitly empty V sweep yields an empty table") {
    Scenario s = small_scenario();
    s.v_sweep = std::vector<double>{};
    const auto result = run_scenario(s);
    CHECK(result.rows.empty());

    std::ostringstream csv;
    write_scenario_csv(result, csv);
    CHECK(csv.str().find("# mg1sim scenario csv v1") == 0);
}

TEST_CASE("scenario rows are reproducible bit for bit") {
    const Scenario s = small_scenario();
    const auto a = run_scenario(s);
    const auto b = run_scenario(s);
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        CHECK(a.rows[i].delay_mean == b.rows[i].delay_mean);
        CHECK(a.rows[i].penalty == b.rows[i].penalty);
        CHECK(a.rows[i].power_mean == b.rows[i].power_mean);
        CHECK(a.rows[i].z_metric == b.rows[i].z_metric);
    }
}

TEST_CASE("constraint sets become rows in declaration order") {
    Scenario s = small_scenario();
    s.policy = PolicyKind::DelayFeas;
    s.v_sweep.reset();
    s.constraint_sets = std::vector<std::vector<double>>{{0.45, 2.05}, {1.25, 1.25}};
    const auto result = run_scenario(s);
    REQUIRE(result.rows.size() == 2);
    CHECK(result.rows[0].bounds == std::vector<double>{0.45, 2.05});
    CHECK(result.rows[1].bounds == std::vector<double>{1.25, 1.25});
    // queue metrics present per class
    CHECK(result.rows[0].z_metric.size() == 2);
}

TEST_CASE("oracle comparison reproduces the fairness sweep gaps") {
    const std::vector<double> v = {100, 1000, 5000, 10000};
    const std::vector<double> penalties = {2.529, 2.335, 2.312, 2.301};
    const auto cmp = compare_to_oracle(v, penalties, 2.304);
    CHECK(cmp.gaps[0] == doctest::Approx(0.225));
    CHECK(cmp.gaps[1] == doctest::Approx(0.031));
    CHECK(cmp.gaps[2] == doctest::Approx(0.008));
    CHECK(cmp.gaps[3] == doctest::Approx(-0.003));
    CHECK(cmp.gaps_nonincreasing);
    CHECK(cmp.c_over_v > 0.0);
    CHECK(cmp.r_squared > 0.9);
}

TEST_CASE("oracle comparison flags non-monotone gaps") {
    const std::vector<double> v = {10, 100};
    const std::vector<double> values = {1.0, 2.0};
    const auto cmp = compare_to_oracle(v, values, 0.5);
    CHECK_FALSE(cmp.gaps_nonincreasing);
}

TEST_CASE("a vanishing gap in the large-V limit") {
    const std::vector<double> v = {1e18};
    const std::vector<double> values = {2.304};
    const auto cmp = compare_to_oracle(v, values, 2.304);
    CHECK(cmp.gaps[0] == doctest::Approx(0.0));
}

TEST_CASE("config JSON round trip") {
    SystemConfig config = testing::affine_power_config();
    config.p_const = 3.5;
    config.p_fixed = 5.0;
    config.r_max = std::vector<double>{2.0, 2.0};
    config.fixed_order = std::vector<int>{1, 0};

    const auto j = config_to_json(config);
    const SystemConfig back = config_from_json(j);
    CHECK(back.classes.size() == 2);
    CHECK(back.classes[0].lambda == config.classes[0].lambda);
    CHECK(back.classes[0].size.mean() == config.classes[0].size.mean());
    CHECK(back.classes[0].size.second_moment() == config.classes[0].size.second_moment());
    CHECK(back.classes[1].penalty.coefficient() == 4.0);
    CHECK(back.rate.mu(6.0) == doctest::Approx(5.0));
    CHECK(*back.p_const == 3.5);
    CHECK(*back.p_fixed == 5.0);
    CHECK(*back.fixed_order == std::vector<int>{1, 0});
}

TEST_CASE("scenario files load with inline and referenced configs") {
    const auto dir = std::filesystem::temp_directory_path() / "mg1sim_test";
    std::filesystem::create_directories(dir);

    {
        std::ofstream cfg(dir / "config.json");
        cfg << config_to_json(testing::mm1_config());
    }
    {
        std::ofstream sc(dir / "scenario.json");
        sc << R"({"name": "t", "policy": "delayfeas", "config_path": "config.json",
                  "frames": 100, "replications": 2, "seed_base": 3,
                  "constraint_sets": [[1.25, 1.25]]})";
    }
    const Scenario s = load_scenario((dir / "scenario.json").string());
    CHECK(s.name == "t");
    CHECK(s.policy == PolicyKind::DelayFeas);
    CHECK(s.frames == 100);
    CHECK(s.config.classes.size() == 2);
    const auto result = run_scenario(s);
    CHECK(result.rows.size() == 1);
}

TEST_CASE("bad configs are rejected with context") {
    CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"p_min": 1})")), ConfigError);
    CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(
                        R"({"classes": [{"lambda": -1, "size": {"kind": "exponential",
                            "mean": 0.4}, "delay_bound": 1}], "p_min": 1, "p_max": 1})")),
                    ConfigError);
}
