#include <mg1sim/virtual_queues.hpp>

#include <algorithm>
#include <sstream>

namespace mg1sim {

namespace {

void check_frame(const FrameMeasurement& frame, std::size_t num_classes) {
    if (frame.arrivals.size() != num_classes || frame.delay_sums.size() != num_classes) {
        throw DataError("frame class count does not match the virtual state");
    }
    for (std::size_t n = 0; n < num_classes; ++n) {
        if (frame.delay_sums[n] < 0.0) {
            throw DataError("negative delay sum in frame for class " + std::to_string(n + 1));
        }
        if (frame.arrivals[n] < 0) {
            throw DataError("negative arrival count in frame");
        }
    }
}

void check_not_diverged(double value) {
    if (!(value < kQueueDivergenceLimit)) {
        std::ostringstream os;
        os << "virtual queue exceeded " << kQueueDivergenceLimit
           << "; configuration appears infeasible";
        throw DataError(os.str());
    }
}

}  // namespace

void update_z(VirtualState& state, const FrameMeasurement& frame,
              std::span<const double> bounds) {
    check_frame(frame, state.z.size());
    if (bounds.size() != state.z.size()) {
        throw DataError("one delay bound per class required");
    }
    for (std::size_t n = 0; n < state.z.size(); ++n) {
        const double drift =
            frame.delay_sums[n] - bounds[n] * static_cast<double>(frame.arrivals[n]);
        state.z[n] = std::max(state.z[n] + drift, 0.0);
        check_not_diverged(state.z[n]);
    }
}

void update_y(VirtualState& state, const FrameMeasurement& frame, std::span<const double> r,
              std::span<const double> r_max) {
    check_frame(frame, state.y.size());
    if (r.size() != state.y.size() || r_max.size() != state.y.size()) {
        throw DataError("one auxiliary value and box per class required");
    }
    for (std::size_t n = 0; n < state.y.size(); ++n) {
        if (r[n] < 0.0 || r[n] > r_max[n]) {
            std::ostringstream os;
            os << "auxiliary r for class " << n + 1 << " is " << r[n] << ", outside [0, "
               << r_max[n] << "]";
            throw DataError(os.str());
        }
        const double drift = frame.delay_sums[n] - r[n] * static_cast<double>(frame.arrivals[n]);
        state.y[n] = std::max(state.y[n] + drift, 0.0);
        check_not_diverged(state.y[n]);
    }
}

void update_x(VirtualState& state, const FrameMeasurement& frame, double p_const) {
    if (frame.busy > frame.total) {
        throw DataError("busy period exceeds the frame length");
    }
    if (frame.busy < 0.0 || frame.power < 0.0) {
        throw DataError("negative busy period or power in frame");
    }
    const double drift = frame.power * frame.busy - p_const * frame.total;
    state.x = std::max(state.x + drift, 0.0);
    check_not_diverged(state.x);
}

double mean_rate_metric(double queue_value, std::int64_t frames) {
    if (frames < 1) throw DataError("mean rate metric needs at least one frame");
    return queue_value / static_cast<double>(frames);
}

double mean_rate_metric(std::span<const double> history) {
    if (history.empty()) throw DataError("mean rate metric needs at least one frame");
    return history.back() / static_cast<double>(history.size());
}

}  // namespace mg1sim
