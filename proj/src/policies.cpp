#include <mg1sim/policies.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mg1sim {

PriorityOrder order_by_descending(std::span<const double> keys) {
    std::vector<int> idx(keys.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return keys[a] > keys[b]; });
    return PriorityOrder(std::move(idx));
}

FrameDecision delayfeas_decide(std::span<const double> z) {
    FrameDecision d;
    d.order = order_by_descending(z);
    return d;
}

double delayfair_aux(double y, double lambda, const PenaltyFn& penalty, double v, double r_hi) {
    const double gain = y * lambda;
    if (penalty.kind() == PenaltyFn::Kind::Quadratic) {
        const double vc = v * penalty.coefficient();
        if (vc <= 0.0) return gain > 0.0 ? r_hi : 0.0;
        return std::min(r_hi, gain / vc);
    }
    auto objective = [&](double r) { return v * penalty.value(r) - gain * r; };
    auto [r_star, value] = golden_section_min(objective, 0.0, r_hi, 1e-9 * r_hi);
    // Convex objective: corners beat an interior point only exactly at them.
    if (objective(0.0) <= value) return 0.0;
    if (objective(r_hi) < value) return r_hi;
    return r_star;
}

FrameDecision delayfair_decide(std::span<const double> z, std::span<const double> y,
                               const SystemConfig& config) {
    const std::size_t n = config.num_classes();
    std::vector<double> keys(n);
    for (std::size_t i = 0; i < n; ++i) {
        keys[i] = (z[i] + y[i]) / config.classes[i].size.mean();
    }
    FrameDecision d;
    d.order = order_by_descending(keys);
    std::vector<double> aux(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& c = config.classes[i];
        aux[i] = delayfair_aux(y[i], c.lambda, c.penalty, config.v, c.delay_bound);
    }
    d.auxiliaries = std::move(aux);
    return d;
}

namespace {

// Shared core of the dynamic power objectives: per-rank weighted priority
// delays as a function of the service rate. cum[m] = sum_{j<=m} lambda E[S]
// over the m highest-priority classes.
struct PowerObjectiveTerms {
    std::vector<double> weight;  // state[pi_m] * lambda[pi_m] (times R-hat if used)
    std::vector<double> cum;
    double work_rate = 0.0;  // sum lambda E[S]

    double delay_sum(double mu) const {
        double acc = 0.0;
        double above = 0.0;
        for (std::size_t m = 0; m < weight.size(); ++m) {
            const double upto = cum[m];
            acc += weight[m] / ((mu - above) * (mu - upto));
            above = upto;
        }
        return acc;
    }
};

PowerObjectiveTerms make_terms(std::span<const double> state, const PriorityOrder& order,
                               const SystemConfig& config, double scale) {
    PowerObjectiveTerms t;
    const std::size_t n = config.num_classes();
    t.weight.resize(n);
    t.cum.resize(n);
    double cum = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
        const int cls = order.class_at(m);
        const auto& c = config.classes[cls];
        cum += c.lambda * c.size.mean();
        t.cum[m] = cum;
        t.weight[m] = state[cls] * c.lambda * scale;
    }
    t.work_rate = cum;
    return t;
}

double second_moment_rate(const SystemConfig& config) {
    double r = 0.0;
    for (const auto& c : config.classes) r += c.lambda * c.size.second_moment();
    return 0.5 * r;
}

}  // namespace

FrameDecision dynpower_decide(std::span<const double> z, const SystemConfig& config) {
    const std::size_t n = config.num_classes();
    std::vector<double> keys(n);
    for (std::size_t i = 0; i < n; ++i) keys[i] = z[i] / config.classes[i].size.mean();
    FrameDecision d;
    d.order = order_by_descending(keys);

    const PowerObjectiveTerms terms = make_terms(z, d.order, config, second_moment_rate(config));
    const double v_work = config.v * terms.work_rate;
    auto objective = [&](double p) {
        const double mu = config.rate.mu(p);
        return v_work * p / mu + terms.delay_sum(mu);
    };
    d.power = minimize_power(objective, config.p_min, config.p_max);
    return d;
}

FrameDecision dynpower_decide_no_m2(std::span<const double> z, const SystemConfig& config,
                                    double v_tilde) {
    const std::size_t n = config.num_classes();
    std::vector<double> keys(n);
    for (std::size_t i = 0; i < n; ++i) keys[i] = z[i] / config.classes[i].size.mean();
    FrameDecision d;
    d.order = order_by_descending(keys);

    const PowerObjectiveTerms terms = make_terms(z, d.order, config, 1.0);
    const double v_work = v_tilde * terms.work_rate;
    auto objective = [&](double p) {
        const double mu = config.rate.mu(p);
        return v_work * p / mu + terms.delay_sum(mu);
    };
    d.power = minimize_power(objective, config.p_min, config.p_max);
    return d;
}

FrameDecision pwdelayfair_decide(double x, std::span<const double> y,
                                 const SystemConfig& config, std::span<const double> r_max) {
    const std::size_t n = config.num_classes();
    std::vector<double> keys(n);
    for (std::size_t i = 0; i < n; ++i) keys[i] = y[i] / config.classes[i].size.mean();
    FrameDecision d;
    d.order = order_by_descending(keys);

    const double p_const = config.p_const.value_or(0.0);
    const PowerObjectiveTerms terms = make_terms(y, d.order, config, second_moment_rate(config));
    auto objective = [&](double p) {
        const double mu = config.rate.mu(p);
        return x * (-p_const + p / mu * terms.work_rate) + terms.delay_sum(mu);
    };
    d.power = minimize_power(objective, config.p_min, config.p_max);

    std::vector<double> aux(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& c = config.classes[i];
        aux[i] = delayfair_aux(y[i], c.lambda, c.penalty, config.v, r_max[i]);
    }
    d.auxiliaries = std::move(aux);
    return d;
}

std::vector<double> default_r_max(const SystemConfig& config) {
    const LoadProfile profile = load_profile(config, config.p_min);
    const double rho_sum = profile.rho_sum();
    double worst = 0.0;
    for (double rho_n : profile.rho) {
        // a class sees its largest delay when ranked last
        const double others = rho_sum - rho_n;
        worst = std::max(worst, profile.residual / ((1.0 - others) * (1.0 - rho_sum)));
    }
    return std::vector<double>(config.num_classes(), 2.0 * worst);
}

PolicyKind policy_kind_from_name(const std::string& name) {
    if (name == "delayfeas") return PolicyKind::DelayFeas;
    if (name == "delayfair") return PolicyKind::DelayFair;
    if (name == "dynpower") return PolicyKind::DynPower;
    if (name == "dynpower-nm2") return PolicyKind::DynPowerNoM2;
    if (name == "pwdelayfair") return PolicyKind::PwDelayFair;
    if (name == "fixed-order") return PolicyKind::FixedOrder;
    throw ConfigError("unknown policy '" + name + "'");
}

std::string policy_name(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::DelayFeas: return "delayfeas";
        case PolicyKind::DelayFair: return "delayfair";
        case PolicyKind::DynPower: return "dynpower";
        case PolicyKind::DynPowerNoM2: return "dynpower-nm2";
        case PolicyKind::PwDelayFair: return "pwdelayfair";
        case PolicyKind::FixedOrder: return "fixed-order";
    }
    return "unknown";
}

Policy::Policy(PolicyKind kind, const SystemConfig& config) : kind_(kind) {
    config.validate();
    for (const auto& c : config.classes) delay_bounds_.push_back(c.delay_bound);
    if (kind_ == PolicyKind::PwDelayFair) {
        if (!config.p_const) {
            throw ConfigError("pwdelayfair needs p_const in the config");
        }
        r_max_ = config.r_max ? *config.r_max : default_r_max(config);
    }
    if (kind_ == PolicyKind::FixedOrder) {
        fixed_order_ = config.fixed_order ? PriorityOrder(*config.fixed_order)
                                          : PriorityOrder::identity(config.num_classes());
    }
}

FrameDecision Policy::decide(const SystemConfig& config, const VirtualState& state) const {
    switch (kind_) {
        case PolicyKind::DelayFeas:
            return delayfeas_decide(state.z);
        case PolicyKind::DelayFair:
            return delayfair_decide(state.z, state.y, config);
        case PolicyKind::DynPower:
            return dynpower_decide(state.z, config);
        case PolicyKind::DynPowerNoM2:
            return dynpower_decide_no_m2(state.z, config, config.v);
        case PolicyKind::PwDelayFair:
            return pwdelayfair_decide(state.x, state.y, config, r_max_);
        case PolicyKind::FixedOrder:
            break;
    }
    FrameDecision d;
    d.order = fixed_order_;
    return d;
}

void Policy::apply_updates(const SystemConfig& config, const FrameDecision& decision,
                           const FrameMeasurement& frame, VirtualState& state) const {
    switch (kind_) {
        case PolicyKind::DelayFeas:
        case PolicyKind::DynPower:
        case PolicyKind::DynPowerNoM2:
            update_z(state, frame, delay_bounds_);
            break;
        case PolicyKind::DelayFair:
            update_z(state, frame, delay_bounds_);
            update_y(state, frame, *decision.auxiliaries, delay_bounds_);
            break;
        case PolicyKind::PwDelayFair:
            update_y(state, frame, *decision.auxiliaries, r_max_);
            update_x(state, frame, *config.p_const);
            break;
        case PolicyKind::FixedOrder:
            break;
    }
    ++state.frame;
}

}  // namespace mg1sim
