#include <mg1sim/experiments.hpp>

#include <mg1sim/config_io.hpp>
#include <mg1sim/virtual_queues.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace mg1sim {

namespace {

ScenarioRow run_point(const Scenario& scenario, double v, const std::vector<double>& bounds) {
    SystemConfig config = scenario.config;
    config.v = v;
    for (std::size_t n = 0; n < config.classes.size(); ++n) {
        config.classes[n].delay_bound = bounds[n];
    }
    const Policy policy(scenario.policy, config);
    const ReplicationResult rep = run_replications(
        config, policy, scenario.frames, seed_range(scenario.seed_base, scenario.replications));

    ScenarioRow row;
    row.v = v;
    row.bounds = bounds;
    row.delay_mean = rep.delay_mean;
    row.delay_se = rep.delay_se;
    row.power_mean = rep.power_mean;
    row.power_se = rep.power_se;
    for (std::size_t n = 0; n < config.classes.size(); ++n) {
        row.penalty += config.classes[n].penalty.value(rep.delay_mean[n]);
    }
    const std::size_t nc = config.num_classes();
    row.z_metric.assign(nc, 0.0);
    row.y_metric.assign(nc, 0.0);
    for (const auto& run : rep.runs) {
        for (std::size_t n = 0; n < nc; ++n) {
            row.z_metric[n] += mean_rate_metric(run.final_state.z[n], scenario.frames);
            row.y_metric[n] += mean_rate_metric(run.final_state.y[n], scenario.frames);
        }
        row.x_metric += mean_rate_metric(run.final_state.x, scenario.frames);
    }
    const auto runs = static_cast<double>(rep.runs.size());
    for (std::size_t n = 0; n < nc; ++n) {
        row.z_metric[n] /= runs;
        row.y_metric[n] /= runs;
    }
    row.x_metric /= runs;
    return row;
}

}  // namespace

ScenarioResult run_scenario(const Scenario& scenario) {
    scenario.config.validate();
    if (scenario.replications < 1) throw ConfigError("scenario needs at least one replication");

    std::vector<double> default_bounds;
    for (const auto& c : scenario.config.classes) default_bounds.push_back(c.delay_bound);
    const std::vector<std::vector<double>> bound_sets =
        scenario.constraint_sets.value_or(std::vector<std::vector<double>>{default_bounds});
    const std::vector<double> v_values =
        scenario.v_sweep.value_or(std::vector<double>{scenario.config.v});

    ScenarioResult result;
    result.name = scenario.name;
    result.policy = policy_name(scenario.policy);
    result.num_classes = scenario.config.num_classes();
    for (const auto& bounds : bound_sets) {
        if (bounds.size() != scenario.config.num_classes()) {
            throw ConfigError("constraint set size does not match the class count");
        }
        for (double v : v_values) {
            try {
                result.rows.push_back(run_point(scenario, v, bounds));
            } catch (const Error& e) {
                std::ostringstream os;
                os << "scenario '" << scenario.name << "' failed at V=" << v << ", bounds=(";
                for (std::size_t n = 0; n < bounds.size(); ++n) {
                    if (n) os << ",";
                    os << bounds[n];
                }
                os << "): " << e.what();
                throw Error(os.str());
            }
        }
    }
    return result;
}

Scenario scenario_from_json(const nlohmann::json& j) {
    using nlohmann::json;
    try {
        Scenario s;
        s.name = j.at("name").get<std::string>();
        s.config = config_from_json(j.at("config"));
        s.policy = policy_kind_from_name(j.at("policy").get<std::string>());
        if (j.contains("v_sweep")) s.v_sweep = j.at("v_sweep").get<std::vector<double>>();
        if (j.contains("constraint_sets")) {
            s.constraint_sets =
                j.at("constraint_sets").get<std::vector<std::vector<double>>>();
        }
        if (j.contains("frames")) s.frames = j.at("frames").get<std::int64_t>();
        if (j.contains("replications")) s.replications = j.at("replications").get<int>();
        if (j.contains("seed_base")) s.seed_base = j.at("seed_base").get<std::uint64_t>();
        return s;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad scenario: ") + e.what());
    }
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("cannot parse " + path + ": " + e.what());
    }
    if (j.contains("config_path")) {
        const auto config_path =
            std::filesystem::path(path).parent_path() / j.at("config_path").get<std::string>();
        std::ifstream cin(config_path);
        if (!cin) throw ConfigError("cannot open config file: " + config_path.string());
        nlohmann::json jc;
        cin >> jc;
        j["config"] = jc;
    }
    return scenario_from_json(j);
}

void write_scenario_csv(const ScenarioResult& result, std::ostream& out) {
    out << "# mg1sim scenario csv v1\n";
    out << "name,policy,row,v";
    const std::size_t n = result.num_classes;
    for (std::size_t i = 1; i <= n; ++i) out << ",d" << i;
    for (std::size_t i = 1; i <= n; ++i) out << ",delay" << i;
    for (std::size_t i = 1; i <= n; ++i) out << ",delay" << i << "_se";
    out << ",penalty,power,power_se";
    for (std::size_t i = 1; i <= n; ++i) out << ",z" << i << "_rate";
    for (std::size_t i = 1; i <= n; ++i) out << ",y" << i << "_rate";
    out << ",x_rate\n";
    out << std::setprecision(12);
    for (std::size_t r = 0; r < result.rows.size(); ++r) {
        const ScenarioRow& row = result.rows[r];
        out << result.name << ',' << result.policy << ',' << r << ',' << row.v;
        for (double d : row.bounds) out << ',' << d;
        for (double d : row.delay_mean) out << ',' << d;
        for (double d : row.delay_se) out << ',' << d;
        out << ',' << row.penalty << ',' << row.power_mean << ',' << row.power_se;
        for (double d : row.z_metric) out << ',' << d;
        for (double d : row.y_metric) out << ',' << d;
        out << ',' << row.x_metric << '\n';
    }
}

std::string scenario_table(const ScenarioResult& result) {
    std::ostringstream os;
    os << "scenario " << result.name << " (" << result.policy << ")\n";
    os << std::fixed << std::setprecision(4);
    os << std::setw(10) << "V";
    const std::size_t n = result.num_classes;
    for (std::size_t i = 1; i <= n; ++i) os << std::setw(10) << ("d" + std::to_string(i));
    for (std::size_t i = 1; i <= n; ++i) os << std::setw(10) << ("W" + std::to_string(i));
    os << std::setw(10) << "penalty" << std::setw(10) << "power" << '\n';
    for (const ScenarioRow& row : result.rows) {
        os << std::setw(10) << row.v;
        for (double d : row.bounds) os << std::setw(10) << d;
        for (double d : row.delay_mean) os << std::setw(10) << d;
        os << std::setw(10) << row.penalty << std::setw(10) << row.power_mean << '\n';
    }
    return os.str();
}

OracleComparison compare_to_oracle(std::span<const double> v_values,
                                   std::span<const double> policy_values, double oracle_value) {
    if (v_values.size() != policy_values.size() || v_values.empty()) {
        throw ConfigError("one policy value per V required");
    }
    OracleComparison cmp;
    cmp.v.assign(v_values.begin(), v_values.end());
    for (double p : policy_values) cmp.gaps.push_back(p - oracle_value);

    cmp.gaps_nonincreasing = true;
    for (std::size_t i = 1; i < cmp.gaps.size(); ++i) {
        if (cmp.gaps[i] > cmp.gaps[i - 1]) cmp.gaps_nonincreasing = false;
    }

    // Least-squares fit of gap = c / V through the origin, with R^2 against
    // the mean-gap baseline.
    double sxx = 0.0;
    double sxy = 0.0;
    double mean = 0.0;
    for (std::size_t i = 0; i < cmp.gaps.size(); ++i) {
        const double x = 1.0 / cmp.v[i];
        sxx += x * x;
        sxy += x * cmp.gaps[i];
        mean += cmp.gaps[i];
    }
    mean /= static_cast<double>(cmp.gaps.size());
    cmp.c_over_v = sxx > 0.0 ? sxy / sxx : 0.0;
    double ss_res = 0.0;
    double ss_tot = 0.0;
    for (std::size_t i = 0; i < cmp.gaps.size(); ++i) {
        const double fit = cmp.c_over_v / cmp.v[i];
        ss_res += (cmp.gaps[i] - fit) * (cmp.gaps[i] - fit);
        ss_tot += (cmp.gaps[i] - mean) * (cmp.gaps[i] - mean);
    }
    cmp.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return cmp;
}

}  // namespace mg1sim
