#include <CLI11.hpp>

#include <mg1sim/config_io.hpp>
#include <mg1sim/experiments.hpp>
#include <mg1sim/oracle.hpp>
#include <mg1sim/simulator.hpp>
#include <mg1sim/virtual_queues.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

namespace {

namespace fs = std::filesystem;
using namespace mg1sim;

// MG1SIM_OUT_DIR reroutes relative output paths; nothing else is read from
// the environment.
fs::path resolve_out(const std::string& path) {
    fs::path p(path);
    if (p.is_relative()) {
        if (const char* dir = std::getenv("MG1SIM_OUT_DIR")) {
            p = fs::path(dir) / p;
        }
    }
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    return p;
}

void write_frame_trace(const std::vector<FrameRecord>& frames, std::size_t num_classes,
                       std::ostream& out) {
    out << "# mg1sim frame trace csv v1\n";
    out << "k,idle,busy,total,power,order";
    for (std::size_t i = 1; i <= num_classes; ++i) out << ",arrivals" << i;
    for (std::size_t i = 1; i <= num_classes; ++i) out << ",delay_sum" << i;
    out << '\n';
    out << std::setprecision(12);
    for (const FrameRecord& f : frames) {
        out << f.index << ',' << f.idle << ',' << f.busy << ',' << f.total << ',' << f.power
            << ',' << f.order.to_string();
        for (auto a : f.arrivals) out << ',' << a;
        for (double d : f.delay_sums) out << ',' << d;
        out << '\n';
    }
}

void write_queue_trace(const std::vector<QueueTraceRow>& rows, std::size_t num_classes,
                       std::ostream& out) {
    out << "# mg1sim queue trace csv v1\n";
    out << "k";
    for (std::size_t i = 1; i <= num_classes; ++i) out << ",z" << i;
    for (std::size_t i = 1; i <= num_classes; ++i) out << ",y" << i;
    out << ",x\n";
    out << std::setprecision(12);
    for (const QueueTraceRow& r : rows) {
        out << r.frame;
        for (double z : r.z) out << ',' << z;
        for (double y : r.y) out << ',' << y;
        out << ',' << r.x << '\n';
    }
}

void write_simulate_csv(const ReplicationResult& rep, std::int64_t frames,
                        std::size_t num_classes, std::ostream& out) {
    out << "# mg1sim simulate csv v1\n";
    out << "row,seed,frames";
    for (std::size_t i = 1; i <= num_classes; ++i) out << ",delay" << i;
    out << ",power";
    for (std::size_t i = 1; i <= num_classes; ++i) out << ",z" << i;
    for (std::size_t i = 1; i <= num_classes; ++i) out << ",y" << i;
    out << ",x\n";
    out << std::setprecision(12);
    for (std::size_t r = 0; r < rep.runs.size(); ++r) {
        const RunSummary& run = rep.runs[r];
        out << r << ',' << run.seed << ',' << frames;
        for (double d : run.delays) out << ',' << d;
        out << ',' << run.power;
        for (double z : run.final_state.z) out << ',' << z;
        for (double y : run.final_state.y) out << ',' << y;
        out << ',' << run.final_state.x << '\n';
    }
    out << "mean,," << frames;
    for (double d : rep.delay_mean) out << ',' << d;
    out << ',' << rep.power_mean;
    for (std::size_t i = 0; i < 2 * num_classes + 1; ++i) out << ',';
    out << '\n';
    out << "se,," << frames;
    for (double d : rep.delay_se) out << ',' << d;
    out << ',' << rep.power_se;
    for (std::size_t i = 0; i < 2 * num_classes + 1; ++i) out << ',';
    out << '\n';
}

void print_mixture(const Mixture& mixture, std::size_t num_classes, std::ostream& out) {
    const auto vertices_count = mixture.weights.size();
    std::vector<int> perm(num_classes);
    for (std::size_t i = 0; i < num_classes; ++i) perm[i] = static_cast<int>(i);
    std::size_t j = 0;
    do {
        if (j >= vertices_count) break;
        if (mixture.weights[j] > 1e-9) {
            out << "    order " << PriorityOrder(perm).to_string() << "  weight "
                << mixture.weights[j] << '\n';
        }
        ++j;
    } while (std::next_permutation(perm.begin(), perm.end()));
}

int cmd_simulate(const std::string& config_path, const std::string& policy_name_arg,
                 std::int64_t frames, int reps, std::uint64_t seed, const std::string& out_path,
                 bool trace) {
    const SystemConfig config = load_config(config_path);
    const Policy policy(policy_kind_from_name(policy_name_arg), config);
    const ReplicationResult rep =
        run_replications(config, policy, frames, seed_range(seed, reps));

    const std::size_t n = config.num_classes();
    std::cout << std::setprecision(6) << std::fixed;
    std::cout << "policy " << policy_name_arg << ", " << reps << " x " << frames
              << " frames, seed base " << seed << '\n';
    for (std::size_t i = 0; i < n; ++i) {
        std::cout << "  class " << i + 1 << " delay " << rep.delay_mean[i] << " +- "
                  << rep.delay_se[i] << '\n';
    }
    std::cout << "  average power " << rep.power_mean << " +- " << rep.power_se << '\n';

    if (!out_path.empty()) {
        const fs::path out = resolve_out(out_path);
        std::ofstream f(out);
        if (!f) throw Error("cannot write " + out.string());
        write_simulate_csv(rep, frames, n, f);
        std::cout << "wrote " << out.string() << '\n';
        if (trace) {
            RunOptions opt;
            opt.capture_frames = true;
            opt.capture_queue_trace = true;
            const RunResult r = run(config, policy, frames, seed, opt);
            fs::path frames_path = out;
            frames_path.replace_extension(".frames.csv");
            fs::path queues_path = out;
            queues_path.replace_extension(".queues.csv");
            std::ofstream ff(frames_path);
            write_frame_trace(r.frames, n, ff);
            std::ofstream qf(queues_path);
            write_queue_trace(r.queue_trace, n, qf);
            std::cout << "wrote " << frames_path.string() << " and " << queues_path.string()
                      << " (first replication)\n";
        }
    }
    return 0;
}

int cmd_scenario_run(const std::string& path, std::string out_path) {
    const Scenario scenario = load_scenario(path);
    const ScenarioResult result = run_scenario(scenario);
    std::cout << scenario_table(result);
    if (out_path.empty()) out_path = scenario.name + ".csv";
    const fs::path out = resolve_out(out_path);
    std::ofstream f(out);
    if (!f) throw Error("cannot write " + out.string());
    write_scenario_csv(result, f);
    std::cout << "wrote " << out.string() << '\n';
    return 0;
}

int cmd_oracle_penalty(const std::string& config_path, double power_arg) {
    const SystemConfig config = load_config(config_path);
    const double power = power_arg > 0.0 ? power_arg : config.fixed_power();
    const PenaltyTarget target = min_penalty_target(config, power);
    std::cout << std::setprecision(10);
    std::cout << "optimal delays:";
    for (double w : target.delays) std::cout << ' ' << w;
    std::cout << "\npenalty " << target.penalty << "\nmixture:\n";
    print_mixture(target.mixture, config.num_classes(), std::cout);
    return 0;
}

int cmd_oracle_power(const std::string& config_path, int grid) {
    const SystemConfig config = load_config(config_path);
    std::vector<double> bounds;
    for (const auto& c : config.classes) bounds.push_back(c.delay_bound);
    const PowerTarget target = min_power_target(config, bounds, grid);
    std::cout << std::setprecision(10);
    std::cout << "minimal average power " << target.average_power << '\n';
    for (const auto& point : target.points) {
        std::cout << "  allocate " << point.power << " with probability " << point.weight
                  << '\n';
        print_mixture(point.mixture, config.num_classes(), std::cout);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-class M/G/1 frame-based scheduling and power control simulator"};
    app.require_subcommand(1);

    // simulate
    std::string config_path;
    std::string policy_arg;
    std::int64_t frames = 1'000'000;
    int reps = 10;
    std::uint64_t seed = 1;
    std::string out_path;
    bool trace = false;
    auto* simulate = app.add_subcommand("simulate", "run one policy and report averages");
    simulate->add_option("--config", config_path, "config JSON")->required();
    simulate->add_option("--policy", policy_arg, "policy name")
        ->required()
        ->check(CLI::IsMember(
            {"delayfeas", "delayfair", "dynpower", "dynpower-nm2", "pwdelayfair", "fixed-order"}));
    simulate->add_option("--frames", frames, "frames per run");
    simulate->add_option("--reps", reps, "independent replications");
    simulate->add_option("--seed", seed, "seed base (run i uses seed base+i)");
    simulate->add_option("--out", out_path, "summary CSV path");
    simulate->add_flag("--trace", trace, "also write frame and queue traces");

    // scenario run
    std::string scenario_path;
    std::string scenario_out;
    auto* scenario = app.add_subcommand("scenario", "scenario studies");
    auto* scenario_run = scenario->add_subcommand("run", "run a scenario file");
    scenario_run->add_option("file", scenario_path, "scenario JSON")->required();
    scenario_run->add_option("--out", scenario_out, "result CSV path (default <name>.csv)");

    // oracle penalty / power
    std::string oracle_config;
    double oracle_power_level = 0.0;
    int oracle_grid = 2000;
    auto* oracle = app.add_subcommand("oracle", "ground-truth optima over the delay region");
    auto* oracle_penalty = oracle->add_subcommand(
        "penalty", "minimize the config's penalties subject to its delay bounds");
    oracle_penalty->add_option("--config", oracle_config, "config JSON")->required();
    oracle_penalty->add_option("--power", oracle_power_level,
                               "power level (default: the config's fixed power)");
    auto* oracle_power = oracle->add_subcommand(
        "power", "minimize average power subject to the config's delay bounds");
    oracle_power->add_option("--config", oracle_config, "config JSON")->required();
    oracle_power->add_option("--grid", oracle_grid, "power grid cells");

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) {
            return cmd_simulate(config_path, policy_arg, frames, reps, seed, out_path, trace);
        }
        if (scenario->parsed() && scenario_run->parsed()) {
            return cmd_scenario_run(scenario_path, scenario_out);
        }
        if (oracle->parsed() && oracle_penalty->parsed()) {
            return cmd_oracle_penalty(oracle_config, oracle_power_level);
        }
        if (oracle->parsed() && oracle_power->parsed()) {
            return cmd_oracle_power(oracle_config, oracle_grid);
        }
        std::cerr << app.help();
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
