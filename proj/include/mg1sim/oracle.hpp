#pragma once

#include <span>
#include <vector>

#include <mg1sim/analytic.hpp>
#include <mg1sim/types.hpp>

namespace mg1sim {

// One strict-priority operating point of the performance region.
struct RegionVertex {
    PriorityOrder order;
    DelayVector delays;
    std::vector<double> x_values;  // x_n = rho_n * W_n
};

// Probability weights over a vertex list (index-aligned).
struct Mixture {
    std::vector<double> weights;

    // Throws ConfigError unless weights are nonnegative and sum to 1
    // within 1e-9.
    void validate() const;
};

// All N! strict-priority vertices in lexicographic order of the priority
// permutation. Guarded at N <= 8; this is desk-scale ground truth.
std::vector<RegionVertex> enumerate_vertices(const SystemConfig& config, double power);

// Convex combination of vertex delay vectors.
DelayVector mixture_delays(const std::vector<RegionVertex>& vertices, const Mixture& mixture);

// Exact feasibility of per-class delay bounds over the performance region,
// via the subset inequalities of the underlying polymatroid base:
// bounds are achievable iff sum_{n in S} rho_n d_n >= rho(S) R / (1 - rho(S))
// for every class subset S.
bool bounds_feasible(const LoadProfile& profile, std::span<const double> bounds);

struct PenaltyTarget {
    DelayVector delays;
    double penalty = 0.0;               // sum_n f_n(W_n), without penalty terms
    Mixture mixture;                    // aligned with enumerate_vertices order
    double max_bound_violation = 0.0;   // max_n (W_n - d_n)+
    int iterations = 0;
};

// Minimize sum_n f_n(W_n) over the delay region subject to W_n <= d_n.
// Frank-Wolfe with away steps; every linear subproblem is solved exactly by
// the c-mu rule. Bounds are folded in as a smooth hinge penalty whose weight
// escalates until the violation is below 1e-6.
PenaltyTarget min_penalty_target(const SystemConfig& config,
                                 std::span<const PenaltyFn> penalties,
                                 std::span<const double> bounds, double power);

// Convenience overload using the per-class penalties and bounds of config.
PenaltyTarget min_penalty_target(const SystemConfig& config, double power);

// One (power, order-mixture) operating point; weight is the randomization
// probability when two points are mixed.
struct PowerOperatingPoint {
    double power = 0.0;
    Mixture mixture;
    double weight = 1.0;
};

struct PowerTarget {
    double average_power = 0.0;           // minimal achievable average power
    std::vector<PowerOperatingPoint> points;  // one or two support points
};

// Minimize average power subject to per-class delay bounds, over constant
// power levels and randomizations of two grid-adjacent operating points.
// Grid step (p_max - p_min) / grid_cells with boundary refinement.
// Guarded at N <= 4.
PowerTarget min_power_target(const SystemConfig& config, std::span<const double> bounds,
                             int grid_cells = 2000);

}  // namespace mg1sim
