#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <mg1sim/analytic.hpp>
#include <mg1sim/types.hpp>
#include <mg1sim/virtual_queues.hpp>

namespace mg1sim {

// What a policy commits to for one frame: the priority order, the power
// level (absent for the fixed-power policies), and per-class auxiliary
// targets (absent for policies without Y queues).
struct FrameDecision {
    PriorityOrder order = PriorityOrder::identity(0);
    std::optional<double> power;
    std::optional<std::vector<double>> auxiliaries;
};

// Priorities in decreasing order of keys; ties go to the lower class index
// so that runs are reproducible.
PriorityOrder order_by_descending(std::span<const double> keys);

// Priorities by decreasing z_n; needs no statistics at all.
FrameDecision delayfeas_decide(std::span<const double> z);

// Priorities by decreasing (z_n + y_n) / E[S_n]; auxiliaries solve the
// per-class box problem min V f_n(r) - y_n lambda_n r on [0, d_n].
FrameDecision delayfair_decide(std::span<const double> z, std::span<const double> y,
                               const SystemConfig& config);

// Minimizer of V f(r) - y lambda r over [0, r_hi]: closed form for
// quadratic penalties, golden-section (1e-9 of the box width) otherwise.
double delayfair_aux(double y, double lambda, const PenaltyFn& penalty, double v, double r_hi);

// Priorities by decreasing z_n / E[S_n]; power minimizes
//   (V sum lambda E[S]) P / mu(P) + sum_m z_{pi_m} lambda_{pi_m} W_{pi_m}(P)
// over [p_min, p_max]. The order is optimal for every power level, so the
// two choices decouple.
FrameDecision dynpower_decide(std::span<const double> z, const SystemConfig& config);

// Second-moment-free variant: same order; the power objective replaces the
// priority-delay terms by their moment-free core, with v_tilde standing in
// for V / (0.5 sum lambda E[S^2]).
FrameDecision dynpower_decide_no_m2(std::span<const double> z, const SystemConfig& config,
                                    double v_tilde);

// Priorities by decreasing y_n / E[S_n]; power minimizes
//   x [ -p_const + (P/mu(P)) sum lambda E[S] ] + sum_m y_{pi_m} lambda_{pi_m} W_{pi_m}(P);
// auxiliaries solve the box problem on [0, r_max_n].
FrameDecision pwdelayfair_decide(double x, std::span<const double> y,
                                 const SystemConfig& config, std::span<const double> r_max);

// Twice the worst strict-priority delay at p_min; a safe auxiliary box when
// the config does not set one.
std::vector<double> default_r_max(const SystemConfig& config);

// Power minimization used by the dynamic policies: 512-point grid plus
// golden-section refinement in the best bracket. The objective is
// continuous but not certified unimodal, so the grid guards the bracket.
// Among equal values the smallest power wins.
template <typename F>
double minimize_power(F&& objective, double p_min, double p_max);

enum class PolicyKind {
    DelayFeas,
    DelayFair,
    DynPower,
    DynPowerNoM2,
    PwDelayFair,
    FixedOrder,
};

PolicyKind policy_kind_from_name(const std::string& name);
std::string policy_name(PolicyKind kind);

// Bundles a decision rule with its virtual-queue bookkeeping. Construction
// resolves policy prerequisites (p_const, auxiliary boxes, fixed order)
// from the config once.
class Policy {
public:
    Policy(PolicyKind kind, const SystemConfig& config);

    PolicyKind kind() const { return kind_; }

    FrameDecision decide(const SystemConfig& config, const VirtualState& state) const;
    void apply_updates(const SystemConfig& config, const FrameDecision& decision,
                       const FrameMeasurement& frame, VirtualState& state) const;

private:
    PolicyKind kind_;
    std::vector<double> delay_bounds_;
    std::vector<double> r_max_;
    PriorityOrder fixed_order_ = PriorityOrder::identity(0);
};

}  // namespace mg1sim

#include <mg1sim/golden.hpp>

namespace mg1sim {

template <typename F>
double minimize_power(F&& objective, double p_min, double p_max) {
    if (!(p_max > p_min)) return p_min;
    constexpr int kGridPoints = 512;
    const double step = (p_max - p_min) / (kGridPoints - 1);
    int best = 0;
    double best_value = objective(p_min);
    // improvements below the tie tolerance count as ties, which the
    // smallest power wins; evaluation noise is ~1 ulp on flat objectives
    const auto tie_eps = [](double v) { return 1e-12 * (std::abs(v) + 1.0); };
    for (int i = 1; i < kGridPoints; ++i) {
        const double value = objective(p_min + i * step);
        if (value < best_value - tie_eps(best_value)) {
            best_value = value;
            best = i;
        }
    }
    const double lo = p_min + (best > 0 ? (best - 1) : 0) * step;
    const double hi = std::min(p_max, p_min + (best + 1) * step);
    auto [p_refined, value_refined] =
        golden_section_min(objective, lo, hi, 1e-10 * (p_max - p_min));
    if (value_refined < best_value - tie_eps(best_value)) return p_refined;
    return p_min + best * step;
}

}  // namespace mg1sim
