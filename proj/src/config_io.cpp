#include <mg1sim/config_io.hpp>

#include <fstream>

namespace mg1sim {

namespace {

using nlohmann::json;

JobSizeDist size_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "exponential") return JobSizeDist::exponential(j.at("mean").get<double>());
    if (kind == "deterministic") return JobSizeDist::deterministic(j.at("mean").get<double>());
    if (kind == "two-point") {
        return JobSizeDist::two_point(j.at("mean").get<double>(),
                                      j.at("second_moment").get<double>());
    }
    throw ConfigError("unknown size kind '" + kind + "'");
}

json size_to_json(const JobSizeDist& d) {
    json j;
    switch (d.kind()) {
        case JobSizeDist::Kind::Exponential:
            j["kind"] = "exponential";
            j["mean"] = d.mean();
            break;
        case JobSizeDist::Kind::Deterministic:
            j["kind"] = "deterministic";
            j["mean"] = d.mean();
            break;
        case JobSizeDist::Kind::TwoPoint:
            j["kind"] = "two-point";
            j["mean"] = d.mean();
            j["second_moment"] = d.second_moment();
            break;
    }
    return j;
}

PenaltyFn penalty_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "quadratic") return PenaltyFn::quadratic(j.at("coeff").get<double>());
    if (kind == "linear") return PenaltyFn::linear(j.at("coeff").get<double>());
    if (kind == "tabulated") {
        return PenaltyFn::tabulated(j.at("x_max").get<double>(),
                                    j.at("values").get<std::vector<double>>());
    }
    throw ConfigError("unknown penalty kind '" + kind + "'");
}

json penalty_to_json(const PenaltyFn& f) {
    json j;
    switch (f.kind()) {
        case PenaltyFn::Kind::Quadratic:
            j["kind"] = "quadratic";
            j["coeff"] = f.coefficient();
            break;
        case PenaltyFn::Kind::Linear:
            j["kind"] = "linear";
            j["coeff"] = f.coefficient();
            break;
        case PenaltyFn::Kind::Tabulated:
            j["kind"] = "tabulated";
            j["x_max"] = f.x_max();
            j["values"] = f.table();
            break;
    }
    return j;
}

RatePowerFn rate_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "linear") return RatePowerFn::linear();
    if (kind == "affine") {
        return RatePowerFn::affine(j.at("intercept").get<double>(), j.at("slope").get<double>());
    }
    if (kind == "tabulated") {
        return RatePowerFn::tabulated(j.at("p_lo").get<double>(), j.at("p_hi").get<double>(),
                                      j.at("values").get<std::vector<double>>());
    }
    throw ConfigError("unknown rate kind '" + kind + "'");
}

}  // namespace

SystemConfig config_from_json(const nlohmann::json& j) {
    try {
        SystemConfig config;
        for (const auto& jc : j.at("classes")) {
            ClassParams c;
            c.lambda = jc.at("lambda").get<double>();
            c.size = size_from_json(jc.at("size"));
            c.delay_bound = jc.at("delay_bound").get<double>();
            if (jc.contains("penalty")) c.penalty = penalty_from_json(jc.at("penalty"));
            config.classes.push_back(std::move(c));
        }
        config.rate = j.contains("rate") ? rate_from_json(j.at("rate")) : RatePowerFn::linear();
        config.p_min = j.at("p_min").get<double>();
        config.p_max = j.at("p_max").get<double>();
        if (j.contains("p_fixed")) config.p_fixed = j.at("p_fixed").get<double>();
        if (j.contains("p_const")) config.p_const = j.at("p_const").get<double>();
        if (j.contains("v")) config.v = j.at("v").get<double>();
        if (j.contains("r_max")) config.r_max = j.at("r_max").get<std::vector<double>>();
        if (j.contains("fixed_order")) {
            std::vector<int> order = j.at("fixed_order").get<std::vector<int>>();
            for (int& c : order) c -= 1;  // 1-based in the file
            config.fixed_order = std::move(order);
        }
        config.validate();
        return config;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad config: ") + e.what());
    }
}

nlohmann::json config_to_json(const SystemConfig& config) {
    json j;
    j["classes"] = json::array();
    for (const auto& c : config.classes) {
        json jc;
        jc["lambda"] = c.lambda;
        jc["size"] = size_to_json(c.size);
        jc["delay_bound"] = c.delay_bound;
        jc["penalty"] = penalty_to_json(c.penalty);
        j["classes"].push_back(std::move(jc));
    }
    switch (config.rate.kind()) {
        case RatePowerFn::Kind::Linear:
            j["rate"] = {{"kind", "linear"}};
            break;
        case RatePowerFn::Kind::Affine:
            j["rate"] = {{"kind", "affine"},
                         {"intercept", config.rate.intercept()},
                         {"slope", config.rate.slope()}};
            break;
        case RatePowerFn::Kind::Tabulated:
            j["rate"] = {{"kind", "tabulated"},
                         {"p_lo", config.rate.p_lo()},
                         {"p_hi", config.rate.p_hi()},
                         {"values", config.rate.table()}};
            break;
    }
    j["p_min"] = config.p_min;
    j["p_max"] = config.p_max;
    if (config.p_fixed) j["p_fixed"] = *config.p_fixed;
    if (config.p_const) j["p_const"] = *config.p_const;
    j["v"] = config.v;
    if (config.r_max) j["r_max"] = *config.r_max;
    if (config.fixed_order) {
        std::vector<int> order = *config.fixed_order;
        for (int& c : order) c += 1;
        j["fixed_order"] = order;
    }
    return j;
}

SystemConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("cannot parse " + path + ": " + e.what());
    }
    return config_from_json(j);
}

}  // namespace mg1sim
