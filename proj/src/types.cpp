#include <mg1sim/types.hpp>

#include <cmath>
#include <sstream>

namespace mg1sim {

namespace {

std::string fmt(double x) {
    std::ostringstream os;
    os << x;
    return os.str();
}

}  // namespace

JobSizeDist::JobSizeDist(Kind kind, double mean, double second_moment)
    : kind_(kind), mean_(mean), second_moment_(second_moment) {
    if (!(mean > 0.0)) {
        throw ConfigError("job size mean must be positive, got " + fmt(mean));
    }
    if (second_moment < mean * mean) {
        throw ConfigError("job size second moment " + fmt(second_moment) +
                          " is below mean^2 = " + fmt(mean * mean));
    }
}

JobSizeDist JobSizeDist::exponential(double mean) {
    return JobSizeDist(Kind::Exponential, mean, 2.0 * mean * mean);
}

JobSizeDist JobSizeDist::deterministic(double mean) {
    return JobSizeDist(Kind::Deterministic, mean, mean * mean);
}

JobSizeDist JobSizeDist::two_point(double mean, double second_moment) {
    JobSizeDist d(Kind::TwoPoint, mean, second_moment);
    // Atom at zero with probability p, atom at b = m2/mean otherwise;
    // matches (mean, m2) for any m2 >= mean^2.
    d.atom_ = second_moment / mean;
    d.zero_prob_ = 1.0 - mean * mean / second_moment;
    return d;
}

double JobSizeDist::sample(RngStream& rng) const {
    switch (kind_) {
        case Kind::Exponential:
            return -mean_ * std::log(rng.uniform01());
        case Kind::Deterministic:
            return mean_;
        case Kind::TwoPoint:
            return rng.uniform01() < zero_prob_ ? 0.0 : atom_;
    }
    return mean_;
}

PenaltyFn PenaltyFn::quadratic(double coeff) {
    if (coeff < 0.0) {
        throw ConfigError("quadratic penalty coefficient must be nonnegative");
    }
    return PenaltyFn(Kind::Quadratic, coeff);
}

PenaltyFn PenaltyFn::linear(double coeff) {
    if (coeff < 0.0) {
        throw ConfigError("linear penalty coefficient must be nonnegative");
    }
    return PenaltyFn(Kind::Linear, coeff);
}

PenaltyFn PenaltyFn::tabulated(double x_max, std::vector<double> values) {
    if (!(x_max > 0.0) || values.size() < 2) {
        throw ConfigError("tabulated penalty needs x_max > 0 and at least two values");
    }
    if (values.front() < 0.0) {
        throw ConfigError("tabulated penalty must be nonnegative");
    }
    const double step = x_max / static_cast<double>(values.size() - 1);
    double scale = 0.0;
    for (double v : values) scale = std::max(scale, std::abs(v));
    const double tol = 1e-9 * std::max(1.0, scale);
    double prev_slope = -HUGE_VAL;
    for (std::size_t i = 0; i + 1 < values.size(); ++i) {
        const double slope = (values[i + 1] - values[i]) / step;
        if (slope < -tol / step) {
            throw ConfigError("tabulated penalty must be nondecreasing (violated at knot " +
                              std::to_string(i) + ")");
        }
        if (slope < prev_slope - tol / step) {
            throw ConfigError("tabulated penalty must be convex (violated at knot " +
                              std::to_string(i) + ")");
        }
        prev_slope = slope;
    }
    PenaltyFn f(Kind::Tabulated, 0.0);
    f.x_max_ = x_max;
    f.values_ = std::move(values);
    return f;
}

double PenaltyFn::value(double w) const {
    switch (kind_) {
        case Kind::Quadratic:
            return 0.5 * coeff_ * w * w;
        case Kind::Linear:
            return coeff_ * w;
        case Kind::Tabulated:
            break;
    }
    const double step = x_max_ / static_cast<double>(values_.size() - 1);
    if (w <= 0.0) return values_.front();
    if (w >= x_max_) {
        // extrapolate with the final slope
        const double last = (values_.back() - values_[values_.size() - 2]) / step;
        return values_.back() + last * (w - x_max_);
    }
    const auto i = static_cast<std::size_t>(w / step);
    const double t = (w - static_cast<double>(i) * step) / step;
    return values_[i] * (1.0 - t) + values_[i + 1] * t;
}

double PenaltyFn::slope(double w) const {
    switch (kind_) {
        case Kind::Quadratic:
            return coeff_ * w;
        case Kind::Linear:
            return coeff_;
        case Kind::Tabulated:
            break;
    }
    const double step = x_max_ / static_cast<double>(values_.size() - 1);
    if (w < 0.0) return 0.0;
    auto i = static_cast<std::size_t>(w / step);
    if (i + 1 >= values_.size()) i = values_.size() - 2;
    return (values_[i + 1] - values_[i]) / step;
}

RatePowerFn RatePowerFn::linear() {
    return RatePowerFn(Kind::Linear);
}

RatePowerFn RatePowerFn::affine(double intercept, double slope) {
    if (slope < 0.0) {
        throw ConfigError("rate function must be nondecreasing (affine slope >= 0)");
    }
    RatePowerFn f(Kind::Affine);
    f.intercept_ = intercept;
    f.slope_ = slope;
    return f;
}

RatePowerFn RatePowerFn::tabulated(double p_lo, double p_hi, std::vector<double> values) {
    if (!(p_hi > p_lo) || values.size() < 2) {
        throw ConfigError("tabulated rate needs p_hi > p_lo and at least two values");
    }
    const double step = (p_hi - p_lo) / static_cast<double>(values.size() - 1);
    double scale = 0.0;
    for (double v : values) scale = std::max(scale, std::abs(v));
    const double tol = 1e-9 * std::max(1.0, scale);
    double prev_slope = HUGE_VAL;
    for (std::size_t i = 0; i + 1 < values.size(); ++i) {
        const double slope = (values[i + 1] - values[i]) / step;
        if (slope < -tol / step) {
            throw ConfigError("tabulated rate must be nondecreasing (violated at knot " +
                              std::to_string(i) + ")");
        }
        if (slope > prev_slope + tol / step) {
            throw ConfigError("tabulated rate must be concave (violated at knot " +
                              std::to_string(i) + ")");
        }
        prev_slope = slope;
    }
    RatePowerFn f(Kind::Tabulated);
    f.p_lo_ = p_lo;
    f.p_hi_ = p_hi;
    f.values_ = std::move(values);
    return f;
}

double RatePowerFn::mu(double power) const {
    switch (kind_) {
        case Kind::Linear:
            return power;
        case Kind::Affine:
            return intercept_ + slope_ * power;
        case Kind::Tabulated:
            break;
    }
    const double step = (p_hi_ - p_lo_) / static_cast<double>(values_.size() - 1);
    if (power <= p_lo_) return values_.front();
    if (power >= p_hi_) return values_.back();
    const auto i = static_cast<std::size_t>((power - p_lo_) / step);
    const double t = (power - p_lo_ - static_cast<double>(i) * step) / step;
    return values_[i] * (1.0 - t) + values_[i + 1] * t;
}

double SystemConfig::total_lambda() const {
    double sum = 0.0;
    for (const auto& c : classes) sum += c.lambda;
    return sum;
}

double SystemConfig::total_work_rate() const {
    double sum = 0.0;
    for (const auto& c : classes) sum += c.lambda * c.size.mean();
    return sum;
}

void SystemConfig::validate() const {
    if (classes.empty()) {
        throw ConfigError("config needs at least one class");
    }
    for (std::size_t n = 0; n < classes.size(); ++n) {
        if (!(classes[n].lambda > 0.0)) {
            throw ConfigError("class " + std::to_string(n + 1) + ": lambda must be positive");
        }
        if (!(classes[n].delay_bound > 0.0)) {
            throw ConfigError("class " + std::to_string(n + 1) +
                              ": delay bound must be positive");
        }
    }
    if (!(p_min <= p_max)) {
        throw ConfigError("p_min must not exceed p_max");
    }
    if (!(v > 0.0)) {
        throw ConfigError("control parameter v must be positive");
    }
    if (p_fixed && (*p_fixed < p_min || *p_fixed > p_max)) {
        throw ConfigError("p_fixed must lie in [p_min, p_max]");
    }
    if (p_const && !(*p_const > 0.0)) {
        throw ConfigError("p_const must be positive");
    }
    if (r_max) {
        if (r_max->size() != classes.size()) {
            throw ConfigError("r_max must have one entry per class");
        }
        for (double r : *r_max) {
            if (!(r > 0.0)) throw ConfigError("r_max entries must be positive");
        }
    }
    if (fixed_order) {
        if (fixed_order->size() != classes.size()) {
            throw ConfigError("fixed_order must list every class exactly once");
        }
        std::vector<bool> seen(classes.size(), false);
        for (int c : *fixed_order) {
            if (c < 0 || static_cast<std::size_t>(c) >= classes.size() || seen[c]) {
                throw ConfigError("fixed_order must be a permutation of the classes");
            }
            seen[c] = true;
        }
    }
    const double mu_min = rate.mu(p_min);
    const double work = total_work_rate();
    if (!(mu_min > work)) {
        throw StabilityError("unstable at p_min: mu(" + fmt(p_min) + ") = " + fmt(mu_min) +
                             " <= total work rate sum lambda_n E[S_n] = " + fmt(work));
    }
}

void RunningStats::add_frame(const std::vector<std::int64_t>& arrivals,
                             const std::vector<double>& delay_sums,
                             double energy, double duration) {
    if (arrivals.size() != delay_sum_.size() || delay_sums.size() != delay_sum_.size()) {
        throw DataError("frame class count does not match the accumulator");
    }
    if (energy < 0.0 || duration < 0.0) {
        throw DataError("frame energy and duration must be nonnegative");
    }
    for (std::size_t n = 0; n < delay_sum_.size(); ++n) {
        if (arrivals[n] < 0 || delay_sums[n] < 0.0) {
            throw DataError("negative arrival count or delay sum in frame");
        }
        delay_sum_[n] += delay_sums[n];
        arrival_count_[n] += arrivals[n];
    }
    energy_ += energy;
    time_ += duration;
    ++frames_;
}

std::optional<double> RunningStats::average_delay(std::size_t class_index) const {
    if (arrival_count_[class_index] <= 0) return std::nullopt;
    return delay_sum_[class_index] / static_cast<double>(arrival_count_[class_index]);
}

std::optional<double> RunningStats::average_power() const {
    if (!(time_ > 0.0)) return std::nullopt;
    return energy_ / time_;
}

}  // namespace mg1sim
