#pragma once

#include <cstddef>
#include <vector>

#include <mg1sim/types.hpp>

namespace mg1sim {

using DelayVector = std::vector<double>;

// Strict nonpreemptive priority order: class_at(0) has the highest priority.
class PriorityOrder {
public:
    explicit PriorityOrder(std::vector<int> order);
    // Identity order (class 0 highest).
    static PriorityOrder identity(std::size_t num_classes);

    std::size_t size() const { return order_.size(); }
    int class_at(std::size_t rank) const { return order_[rank]; }
    const std::vector<int>& classes() const { return order_; }

    bool operator==(const PriorityOrder& other) const = default;

    // "r1>r2>..." with 1-based class labels, highest priority first.
    std::string to_string() const;

private:
    std::vector<int> order_;
};

// Per-class loads and the residual-work constant at one service rate.
struct LoadProfile {
    std::vector<double> rho;      // rho_n = lambda_n E[S_n] / mu
    std::vector<double> lambda;   // arrival rates, kept for frame statistics
    double residual = 0.0;        // R = 0.5 sum_n lambda_n E[X_n^2]
    double mu = 0.0;

    double rho_sum() const;
};

// Loads at power P. Throws StabilityError when mu(P) cannot carry the work.
LoadProfile load_profile(const SystemConfig& config, double power);

// Mean frame length 1 / ((1 - sum rho) sum lambda).
double expected_frame_size(const LoadProfile& profile);

// Average queueing delays of every class under a strict priority order:
// the m-th ranked class sees R / ((1 - sum_{j<m} rho)(1 - sum_{j<=m} rho)).
DelayVector priority_delays(const LoadProfile& profile, const PriorityOrder& order);

// sum_n rho_n W_n, identical under every work-conserving policy.
double conservation_value(const LoadProfile& profile);

// Per-class delay floors plus the conservation equality; for two classes
// this is the full description of the achievable delay region.
struct DelayRegion {
    std::vector<double> min_delay;   // W_n >= R / (1 - rho_n)
    std::vector<double> rho;         // coefficients of the equality
    double conservation = 0.0;       // sum_n rho_n W_n = this
};

DelayRegion delay_region(const SystemConfig& config, double power);

}  // namespace mg1sim
