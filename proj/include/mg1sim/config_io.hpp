#pragma once

#include <string>

#include <json.hpp>

#include <mg1sim/types.hpp>

namespace mg1sim {

// JSON schema (see README for the full reference):
// {
//   "classes": [{"lambda": 1.0,
//                "size": {"kind": "exponential", "mean": 0.4},
//                "delay_bound": 2.0,
//                "penalty": {"kind": "quadratic", "coeff": 1.0}}, ...],
//   "rate": {"kind": "linear"},
//   "p_min": 1.0, "p_max": 1.0,
//   "p_fixed": 1.0, "p_const": 3.5,      // optional
//   "v": 100.0,
//   "r_max": [...], "fixed_order": [...] // optional; fixed_order is 1-based
// }
SystemConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const SystemConfig& config);

SystemConfig load_config(const std::string& path);

}  // namespace mg1sim
