#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <mg1sim/types.hpp>

namespace mg1sim {

// Discrete-time virtual queues updated at frame boundaries. Z tracks delay
// in excess of per-class bounds, Y delay in excess of the chosen auxiliary
// targets, X energy in excess of the average power budget. All start at
// zero and stay nonnegative.
struct VirtualState {
    std::vector<double> z;
    std::vector<double> y;
    double x = 0.0;
    std::int64_t frame = 0;

    static VirtualState zeros(std::size_t num_classes) {
        VirtualState s;
        s.z.assign(num_classes, 0.0);
        s.y.assign(num_classes, 0.0);
        return s;
    }
};

// Per-class measurements of one completed frame, as consumed by the queue
// updates.
struct FrameMeasurement {
    std::vector<std::int64_t> arrivals;   // |A_{n,k}|
    std::vector<double> delay_sums;       // sum of queueing delays per class
    double power = 0.0;                   // allocation used in the busy period
    double busy = 0.0;
    double total = 0.0;                   // idle + busy
};

// z'_n = max(z_n + delay_sum_n - d_n |A_n|, 0)
void update_z(VirtualState& state, const FrameMeasurement& frame, std::span<const double> bounds);

// y'_n = max(y_n + delay_sum_n - r_n |A_n|, 0); r chosen before the frame.
void update_y(VirtualState& state, const FrameMeasurement& frame, std::span<const double> r,
              std::span<const double> r_max);

// x' = max(x + P B - p_const T, 0)
void update_x(VirtualState& state, const FrameMeasurement& frame, double p_const);

// Single-run mean-rate-stability proxy: queue value at frame K over K.
double mean_rate_metric(double queue_value, std::int64_t frames);

// Overload for a recorded trace; entry i holds the value after frame i+1.
double mean_rate_metric(std::span<const double> history);

// Sanity limit; a queue beyond this indicates a diverging configuration.
inline constexpr double kQueueDivergenceLimit = 1e12;

}  // namespace mg1sim
