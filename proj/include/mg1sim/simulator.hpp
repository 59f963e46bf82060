#pragma once

#include <cstdint>
#include <vector>

#include <mg1sim/policies.hpp>
#include <mg1sim/types.hpp>
#include <mg1sim/virtual_queues.hpp>

namespace mg1sim {

// One completed frame: an idle period and the busy period that ends it.
// All jobs arriving in a frame are also served in it, since the busy period
// drains the system.
struct FrameRecord {
    std::int64_t index = 0;
    double idle = 0.0;
    double busy = 0.0;
    double total = 0.0;
    std::vector<std::int64_t> arrivals;
    std::vector<double> delay_sums;
    double power = 0.0;
    PriorityOrder order = PriorityOrder::identity(0);
};

struct QueueTraceRow {
    std::int64_t frame = 0;  // boundary after this many frames
    std::vector<double> z;
    std::vector<double> y;
    double x = 0.0;
};

struct RunOptions {
    // Keep per-frame records / queue snapshots. Off by default: a million
    // frames of records is ~100 MB.
    bool capture_frames = false;
    bool capture_queue_trace = false;
};

struct RunResult {
    RunningStats stats;
    VirtualState final_state;
    std::vector<FrameRecord> frames;
    std::vector<QueueTraceRow> queue_trace;

    explicit RunResult(std::size_t num_classes)
        : stats(num_classes), final_state(VirtualState::zeros(num_classes)) {}
};

// Simulate `frames` frames. Each frame: draw the idle period from the
// per-class Poisson arrival streams, ask the policy for a decision using
// the pre-frame virtual state, serve the busy period nonpreemptively under
// strict priorities at rate mu(P_k), then apply the policy's virtual-queue
// updates at the frame boundary. Deterministic given (config, policy,
// frames, seed).
RunResult run(const SystemConfig& config, const Policy& policy, std::int64_t frames,
              std::uint64_t seed, const RunOptions& options = {});

struct RunSummary {
    std::uint64_t seed = 0;
    std::vector<double> delays;  // per-class ratio estimators (NaN without data)
    double power = 0.0;
    RunningStats stats;
    VirtualState final_state;

    explicit RunSummary(std::size_t num_classes)
        : stats(num_classes), final_state(VirtualState::zeros(num_classes)) {}
};

struct ReplicationResult {
    std::vector<RunSummary> runs;
    std::vector<double> delay_mean;
    std::vector<double> delay_se;
    double power_mean = 0.0;
    double power_se = 0.0;
};

// Independent runs, one per seed, executed concurrently; the aggregate is
// the arithmetic mean (and standard error) of the per-run estimators.
ReplicationResult run_replications(const SystemConfig& config, const Policy& policy,
                                   std::int64_t frames, const std::vector<std::uint64_t>& seeds);

// Seeds base, base+1, ..., base+count-1.
std::vector<std::uint64_t> seed_range(std::uint64_t base, int count);

}  // namespace mg1sim
