#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include <mg1sim/simulator.hpp>

namespace mg1sim {

// A declarative study: one policy on one config, swept over control
// parameters and/or delay constraint sets.
struct Scenario {
    std::string name;
    SystemConfig config;
    PolicyKind policy = PolicyKind::DelayFeas;
    // nullopt: use config.v; an explicitly empty list yields no rows.
    std::optional<std::vector<double>> v_sweep;
    // nullopt: use the per-class delay bounds of the config.
    std::optional<std::vector<std::vector<double>>> constraint_sets;
    std::int64_t frames = 1'000'000;
    int replications = 10;
    std::uint64_t seed_base = 1;
};

struct ScenarioRow {
    double v = 0.0;
    std::vector<double> bounds;
    std::vector<double> delay_mean;
    std::vector<double> delay_se;
    double penalty = 0.0;  // sum_n f_n(mean delay), the replication-averaged cell
    double power_mean = 0.0;
    double power_se = 0.0;
    std::vector<double> z_metric;  // mean over runs of Z_K / K
    std::vector<double> y_metric;
    double x_metric = 0.0;
};

struct ScenarioResult {
    std::string name;
    std::string policy;
    std::vector<ScenarioRow> rows;
    std::size_t num_classes = 0;
};

// Rows follow declaration order: constraint sets outer, V values inner.
// Deterministic given the seed base; every row reuses the same seeds so
// sweeps are matched-pair comparisons.
ScenarioResult run_scenario(const Scenario& scenario);

Scenario scenario_from_json(const nlohmann::json& j);
// The scenario file may embed the config under "config" or reference a
// file under "config_path" (relative to the scenario file).
Scenario load_scenario(const std::string& path);

// CSV with a versioned schema comment line.
void write_scenario_csv(const ScenarioResult& result, std::ostream& out);
std::string scenario_table(const ScenarioResult& result);

struct OracleComparison {
    std::vector<double> v;
    std::vector<double> gaps;         // policy value - oracle optimum
    bool gaps_nonincreasing = false;  // monotone trend over the sweep
    double c_over_v = 0.0;            // least-squares c of gap ~ c / V
    double r_squared = 0.0;
};

// Gap report against an oracle optimum for a V sweep of scalar values
// (penalties or powers, both measured the same way).
OracleComparison compare_to_oracle(std::span<const double> v_values,
                                   std::span<const double> policy_values, double oracle_value);

}  // namespace mg1sim
