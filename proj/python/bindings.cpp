// Python bindings for the core operations: config loading, the closed-form
// M/G/1 quantities, the region oracles, and the simulator.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <mg1sim/analytic.hpp>
#include <mg1sim/config_io.hpp>
#include <mg1sim/experiments.hpp>
#include <mg1sim/oracle.hpp>
#include <mg1sim/policies.hpp>
#include <mg1sim/simulator.hpp>

#include <json.hpp>

namespace py = pybind11;
using namespace mg1sim;

namespace {

SystemConfig config_from_str(const std::string& text) {
    return config_from_json(nlohmann::json::parse(text));
}

py::dict profile_dict(const LoadProfile& profile) {
    py::dict d;
    d["rho"] = profile.rho;
    d["residual"] = profile.residual;
    d["mu"] = profile.mu;
    d["rho_sum"] = profile.rho_sum();
    return d;
}

py::dict run_dict(const RunResult& r, std::size_t num_classes) {
    py::dict d;
    std::vector<double> delays;
    for (std::size_t n = 0; n < num_classes; ++n) {
        delays.push_back(r.stats.average_delay(n).value_or(std::nan("")));
    }
    d["delays"] = delays;
    d["power"] = r.stats.average_power().value_or(std::nan(""));
    d["frames"] = r.stats.frames();
    d["z"] = r.final_state.z;
    d["y"] = r.final_state.y;
    d["x"] = r.final_state.x;
    return d;
}

}  // namespace

PYBIND11_MODULE(_mg1sim, m) {
    m.doc() = "multi-class M/G/1 frame-based scheduling and power control";

    py::register_exception<Error>(m, "Mg1simError");

    py::class_<SystemConfig>(m, "Config")
        .def_static("from_json", &config_from_str, py::arg("text"),
                    "Parse and validate a config from its JSON text.")
        .def("to_json", [](const SystemConfig& c) { return config_to_json(c).dump(2); })
        .def_property_readonly("num_classes", &SystemConfig::num_classes)
        .def_property_readonly("total_lambda", &SystemConfig::total_lambda)
        .def_property_readonly("total_work_rate", &SystemConfig::total_work_rate);

    m.def("load_config", &load_config, py::arg("path"));

    m.def(
        "load_profile",
        [](const SystemConfig& c, double power) { return profile_dict(load_profile(c, power)); },
        py::arg("config"), py::arg("power"));

    m.def(
        "expected_frame_size",
        [](const SystemConfig& c, double power) {
            return expected_frame_size(load_profile(c, power));
        },
        py::arg("config"), py::arg("power"));

    m.def(
        "priority_delays",
        [](const SystemConfig& c, double power, const std::vector<int>& order) {
            return priority_delays(load_profile(c, power), PriorityOrder(order));
        },
        py::arg("config"), py::arg("power"), py::arg("order"),
        "Average delays under a strict priority order (0-based class ids, "
        "highest priority first).");

    m.def(
        "conservation_value",
        [](const SystemConfig& c, double power) {
            return conservation_value(load_profile(c, power));
        },
        py::arg("config"), py::arg("power"));

    m.def(
        "delay_region",
        [](const SystemConfig& c, double power) {
            const DelayRegion r = delay_region(c, power);
            py::dict d;
            d["min_delay"] = r.min_delay;
            d["rho"] = r.rho;
            d["conservation"] = r.conservation;
            return d;
        },
        py::arg("config"), py::arg("power"));

    m.def(
        "enumerate_vertices",
        [](const SystemConfig& c, double power) {
            py::list out;
            for (const auto& v : enumerate_vertices(c, power)) {
                py::dict d;
                d["order"] = v.order.classes();
                d["delays"] = v.delays;
                d["x_values"] = v.x_values;
                out.append(d);
            }
            return out;
        },
        py::arg("config"), py::arg("power"));

    m.def(
        "min_penalty_target",
        [](const SystemConfig& c, double power) {
            const PenaltyTarget t = min_penalty_target(c, power);
            py::dict d;
            d["delays"] = t.delays;
            d["penalty"] = t.penalty;
            d["mixture"] = t.mixture.weights;
            d["max_bound_violation"] = t.max_bound_violation;
            return d;
        },
        py::arg("config"), py::arg("power"),
        "Minimize the config's penalties over the delay region subject to "
        "its per-class bounds.");

    m.def(
        "min_power_target",
        [](const SystemConfig& c) {
            std::vector<double> bounds;
            for (const auto& cls : c.classes) bounds.push_back(cls.delay_bound);
            const PowerTarget t = min_power_target(c, bounds);
            py::dict d;
            d["average_power"] = t.average_power;
            py::list points;
            for (const auto& p : t.points) {
                py::dict pd;
                pd["power"] = p.power;
                pd["weight"] = p.weight;
                pd["mixture"] = p.mixture.weights;
                points.append(pd);
            }
            d["points"] = points;
            return d;
        },
        py::arg("config"));

    m.def(
        "simulate",
        [](const SystemConfig& c, const std::string& policy, std::int64_t frames,
           std::uint64_t seed) {
            const Policy p(policy_kind_from_name(policy), c);
            py::gil_scoped_release release;
            const RunResult r = run(c, p, frames, seed);
            py::gil_scoped_acquire acquire;
            return run_dict(r, c.num_classes());
        },
        py::arg("config"), py::arg("policy"), py::arg("frames"), py::arg("seed"));

    m.def(
        "simulate_replications",
        [](const SystemConfig& c, const std::string& policy, std::int64_t frames,
           std::uint64_t seed_base, int replications) {
            const Policy p(policy_kind_from_name(policy), c);
            py::gil_scoped_release release;
            const ReplicationResult rep =
                run_replications(c, p, frames, seed_range(seed_base, replications));
            py::gil_scoped_acquire acquire;
            py::dict d;
            d["delay_mean"] = rep.delay_mean;
            d["delay_se"] = rep.delay_se;
            d["power_mean"] = rep.power_mean;
            d["power_se"] = rep.power_se;
            py::list per_run;
            for (const auto& run_summary : rep.runs) {
                py::dict rd;
                rd["seed"] = run_summary.seed;
                rd["delays"] = run_summary.delays;
                rd["power"] = run_summary.power;
                per_run.append(rd);
            }
            d["runs"] = per_run;
            return d;
        },
        py::arg("config"), py::arg("policy"), py::arg("frames"), py::arg("seed_base"),
        py::arg("replications"));
}
