#include <mg1sim/analytic.hpp>

#include <numeric>
#include <sstream>

namespace mg1sim {

PriorityOrder::PriorityOrder(std::vector<int> order) : order_(std::move(order)) {
    std::vector<bool> seen(order_.size(), false);
    for (int c : order_) {
        if (c < 0 || static_cast<std::size_t>(c) >= order_.size() || seen[c]) {
            throw ConfigError("priority order must be a permutation of the classes");
        }
        seen[c] = true;
    }
}

PriorityOrder PriorityOrder::identity(std::size_t num_classes) {
    std::vector<int> order(num_classes);
    std::iota(order.begin(), order.end(), 0);
    return PriorityOrder(std::move(order));
}

std::string PriorityOrder::to_string() const {
    std::ostringstream os;
    for (std::size_t m = 0; m < order_.size(); ++m) {
        if (m > 0) os << '>';
        os << order_[m] + 1;
    }
    return os.str();
}

double LoadProfile::rho_sum() const {
    return std::accumulate(rho.begin(), rho.end(), 0.0);
}

LoadProfile load_profile(const SystemConfig& config, double power) {
    const double mu = config.rate.mu(power);
    const double work = config.total_work_rate();
    if (!(mu > work)) {
        std::ostringstream os;
        os << "unstable power " << power << ": mu = " << mu
           << " <= total work rate sum lambda_n E[S_n] = " << work;
        throw StabilityError(os.str());
    }
    LoadProfile profile;
    profile.mu = mu;
    profile.rho.reserve(config.num_classes());
    profile.lambda.reserve(config.num_classes());
    double residual = 0.0;
    for (const auto& c : config.classes) {
        profile.rho.push_back(c.lambda * c.size.mean() / mu);
        profile.lambda.push_back(c.lambda);
        residual += c.lambda * c.size.second_moment() / (mu * mu);
    }
    profile.residual = 0.5 * residual;
    return profile;
}

double expected_frame_size(const LoadProfile& profile) {
    const double lambda_sum = std::accumulate(profile.lambda.begin(), profile.lambda.end(), 0.0);
    return 1.0 / ((1.0 - profile.rho_sum()) * lambda_sum);
}

DelayVector priority_delays(const LoadProfile& profile, const PriorityOrder& order) {
    const std::size_t n = profile.rho.size();
    if (order.size() != n) {
        throw ConfigError("priority order size does not match the load profile");
    }
    DelayVector delays(n, 0.0);
    double above = 0.0;  // load of strictly higher-priority classes
    for (std::size_t m = 0; m < n; ++m) {
        const int cls = order.class_at(m);
        const double upto = above + profile.rho[cls];
        delays[cls] = profile.residual / ((1.0 - above) * (1.0 - upto));
        above = upto;
    }
    return delays;
}

double conservation_value(const LoadProfile& profile) {
    const double rho_sum = profile.rho_sum();
    return rho_sum * profile.residual / (1.0 - rho_sum);
}

DelayRegion delay_region(const SystemConfig& config, double power) {
    const LoadProfile profile = load_profile(config, power);
    DelayRegion region;
    region.rho = profile.rho;
    region.conservation = conservation_value(profile);
    region.min_delay.reserve(profile.rho.size());
    for (double rho_n : profile.rho) {
        region.min_delay.push_back(profile.residual / (1.0 - rho_n));
    }
    return region;
}

}  // namespace mg1sim
