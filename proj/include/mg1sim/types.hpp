#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <mg1sim/rng.hpp>

namespace mg1sim {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid configuration or schema violation.
struct ConfigError : Error {
    using Error::Error;
};

// A power level (or the whole power interval) cannot support the offered load.
struct StabilityError : Error {
    using Error::Error;
};

// Problem size exceeds what a brute-force oracle is sized for.
struct CapabilityError : Error {
    using Error::Error;
};

// Requested targets lie outside the achievable performance region.
struct InfeasibleError : Error {
    using Error::Error;
};

// Inconsistent measurements fed into an accumulator or queue update.
struct DataError : Error {
    using Error::Error;
};

// Job size distribution with known first two moments. The two-point family
// (an atom at zero plus one positive atom) reaches any pair with
// second_moment > mean^2, which exponential/deterministic cannot.
class JobSizeDist {
public:
    enum class Kind { Exponential, Deterministic, TwoPoint };

    static JobSizeDist exponential(double mean);
    static JobSizeDist deterministic(double mean);
    static JobSizeDist two_point(double mean, double second_moment);

    Kind kind() const { return kind_; }
    double mean() const { return mean_; }
    double second_moment() const { return second_moment_; }

    // Draws are a pure function of the stream state; the distribution object
    // itself holds no sampler state.
    double sample(RngStream& rng) const;

private:
    JobSizeDist(Kind kind, double mean, double second_moment);

    Kind kind_;
    double mean_;
    double second_moment_;
    double atom_ = 0.0;      // two-point: positive support point
    double zero_prob_ = 0.0; // two-point: probability of the zero atom
};

// Nondecreasing, nonnegative, convex penalty of an average delay.
class PenaltyFn {
public:
    enum class Kind { Quadratic, Linear, Tabulated };

    // f(w) = 0.5 * coeff * w^2
    static PenaltyFn quadratic(double coeff);
    // f(w) = coeff * w
    static PenaltyFn linear(double coeff);
    // Values on a uniform grid over [0, x_max], linearly interpolated.
    // Convexity and monotonicity are checked by finite differences at load.
    static PenaltyFn tabulated(double x_max, std::vector<double> values);

    Kind kind() const { return kind_; }
    double coefficient() const { return coeff_; }
    double x_max() const { return x_max_; }
    const std::vector<double>& table() const { return values_; }

    double value(double w) const;
    // A subgradient (the right slope at kinks).
    double slope(double w) const;

private:
    PenaltyFn(Kind kind, double coeff) : kind_(kind), coeff_(coeff) {}

    Kind kind_;
    double coeff_ = 0.0;
    double x_max_ = 0.0;
    std::vector<double> values_;
};

// Concave, continuous, nondecreasing service rate as a function of power.
class RatePowerFn {
public:
    enum class Kind { Linear, Affine, Tabulated };

    // mu(P) = P
    static RatePowerFn linear();
    // mu(P) = intercept + slope * P, slope >= 0
    static RatePowerFn affine(double intercept, double slope);
    // Values on a uniform power grid over [p_lo, p_hi]; concavity and
    // monotonicity checked at load. Evaluation clamps to the grid range.
    static RatePowerFn tabulated(double p_lo, double p_hi, std::vector<double> values);

    Kind kind() const { return kind_; }
    double intercept() const { return intercept_; }
    double slope() const { return slope_; }
    double p_lo() const { return p_lo_; }
    double p_hi() const { return p_hi_; }
    const std::vector<double>& table() const { return values_; }

    double mu(double power) const;

private:
    explicit RatePowerFn(Kind kind) : kind_(kind) {}

    Kind kind_;
    double intercept_ = 0.0;
    double slope_ = 1.0;
    double p_lo_ = 0.0;
    double p_hi_ = 0.0;
    std::vector<double> values_;
};

struct ClassParams {
    double lambda = 0.0;  // Poisson arrival rate
    JobSizeDist size = JobSizeDist::deterministic(1.0);
    double delay_bound = 0.0;
    PenaltyFn penalty = PenaltyFn::quadratic(1.0);
};

struct SystemConfig {
    std::vector<ClassParams> classes;
    RatePowerFn rate = RatePowerFn::linear();
    double p_min = 1.0;
    double p_max = 1.0;
    // Power used by policies that do no power control (defaults to p_min).
    std::optional<double> p_fixed;
    // Average power budget for the power-constrained policy.
    std::optional<double> p_const;
    double v = 1.0;
    // Auxiliary-variable boxes [0, r_max[n]]; when absent a default is
    // derived from the worst priority delay at p_min (see policies).
    std::optional<std::vector<double>> r_max;
    // Priority order for the fixed-order policy, order[m] = class index
    // (0-based) with the m-th highest priority.
    std::optional<std::vector<int>> fixed_order;

    std::size_t num_classes() const { return classes.size(); }
    double total_lambda() const;
    double total_work_rate() const;  // sum_n lambda_n E[S_n]
    double fixed_power() const { return p_fixed.value_or(p_min); }

    // Throws ConfigError / StabilityError on violation.
    void validate() const;
};

// Ratio-of-expectations accumulators, from frame 0 with no warm-up discard.
class RunningStats {
public:
    explicit RunningStats(std::size_t num_classes)
        : delay_sum_(num_classes, 0.0), arrival_count_(num_classes, 0) {}

    void add_frame(const std::vector<std::int64_t>& arrivals,
                   const std::vector<double>& delay_sums,
                   double energy, double duration);

    // Per-class delay estimate; empty when the class has no arrivals yet.
    std::optional<double> average_delay(std::size_t class_index) const;
    // Energy over elapsed time; empty before the first frame completes.
    std::optional<double> average_power() const;

    double delay_sum(std::size_t n) const { return delay_sum_[n]; }
    std::int64_t arrival_count(std::size_t n) const { return arrival_count_[n]; }
    double energy() const { return energy_; }
    double elapsed_time() const { return time_; }
    std::int64_t frames() const { return frames_; }

private:
    std::vector<double> delay_sum_;
    std::vector<std::int64_t> arrival_count_;
    double energy_ = 0.0;
    double time_ = 0.0;
    std::int64_t frames_ = 0;
};

}  // namespace mg1sim
