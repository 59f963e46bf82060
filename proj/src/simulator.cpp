#include <mg1sim/simulator.hpp>

#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

namespace mg1sim {

namespace {

constexpr std::int64_t kMaxEventsPerFrame = 100'000'000;

struct Job {
    double arrival = 0.0;
    double size = 0.0;
};

}  // namespace

RunResult run(const SystemConfig& config, const Policy& policy, std::int64_t frames,
              std::uint64_t seed, const RunOptions& options) {
    config.validate();
    if (frames < 1) throw ConfigError("need at least one frame");

    const std::size_t n = config.num_classes();
    // Independent streams per class for arrivals and sizes: the j-th class-n
    // job carries the same (inter-arrival, size) draws under every policy,
    // so policy comparisons share the arrival sample path.
    std::vector<RngStream> arrival_rng;
    std::vector<RngStream> size_rng;
    arrival_rng.reserve(n);
    size_rng.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        arrival_rng.emplace_back(seed, static_cast<std::uint32_t>(2 * i));
        size_rng.emplace_back(seed, static_cast<std::uint32_t>(2 * i + 1));
    }

    std::vector<double> next_arrival(n);
    for (std::size_t i = 0; i < n; ++i) {
        next_arrival[i] = arrival_rng[i].exponential(config.classes[i].lambda);
    }

    RunResult result(n);
    if (options.capture_frames) result.frames.reserve(static_cast<std::size_t>(frames));
    if (options.capture_queue_trace) {
        result.queue_trace.reserve(static_cast<std::size_t>(frames));
    }

    std::vector<std::vector<Job>> queue(n);
    std::vector<std::size_t> head(n, 0);
    std::vector<std::int64_t> counts(n, 0);
    std::vector<double> delay_sums(n, 0.0);

    auto admit_until = [&](double horizon) {
        for (std::size_t i = 0; i < n; ++i) {
            while (next_arrival[i] <= horizon) {
                queue[i].push_back({next_arrival[i], config.classes[i].size.sample(size_rng[i])});
                ++counts[i];
                next_arrival[i] += arrival_rng[i].exponential(config.classes[i].lambda);
            }
        }
    };

    double t = 0.0;
    for (std::int64_t k = 0; k < frames; ++k) {
        const FrameDecision decision = policy.decide(config, result.final_state);
        const double power = decision.power.value_or(config.fixed_power());
        const double mu = config.rate.mu(power);

        for (std::size_t i = 0; i < n; ++i) {
            queue[i].clear();
            head[i] = 0;
            counts[i] = 0;
            delay_sums[i] = 0.0;
        }

        // The idle period ends at the earliest pending arrival.
        double t_first = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) t_first = std::min(t_first, next_arrival[i]);
        const double idle = t_first - t;
        admit_until(t_first);

        double now = t_first;
        std::int64_t events = 0;
        for (;;) {
            int cls = -1;
            for (std::size_t m = 0; m < n; ++m) {
                const int c = decision.order.class_at(m);
                if (head[c] < queue[c].size()) {
                    cls = c;
                    break;
                }
            }
            if (cls < 0) break;  // system drained; the busy period is over
            const Job job = queue[cls][head[cls]++];
            delay_sums[cls] += now - job.arrival;
            const double done = now + job.size / mu;
            admit_until(done);
            now = done;
            if (++events > kMaxEventsPerFrame) {
                throw DataError("frame " + std::to_string(k) +
                                " exceeded the per-frame event cap; the system is diverging");
            }
        }

        const double busy = now - t_first;
        FrameMeasurement fm;
        fm.arrivals = counts;
        fm.delay_sums = delay_sums;
        fm.power = power;
        fm.busy = busy;
        fm.total = idle + busy;

        result.stats.add_frame(counts, delay_sums, power * busy, fm.total);
        policy.apply_updates(config, decision, fm, result.final_state);

        if (options.capture_frames) {
            FrameRecord rec;
            rec.index = k;
            rec.idle = idle;
            rec.busy = busy;
            rec.total = fm.total;
            rec.arrivals = counts;
            rec.delay_sums = delay_sums;
            rec.power = power;
            rec.order = decision.order;
            result.frames.push_back(std::move(rec));
        }
        if (options.capture_queue_trace) {
            result.queue_trace.push_back(QueueTraceRow{k + 1, result.final_state.z,
                                                       result.final_state.y,
                                                       result.final_state.x});
        }
        t = now;
    }
    return result;
}

std::vector<std::uint64_t> seed_range(std::uint64_t base, int count) {
    std::vector<std::uint64_t> seeds(static_cast<std::size_t>(count));
    std::iota(seeds.begin(), seeds.end(), base);
    return seeds;
}

ReplicationResult run_replications(const SystemConfig& config, const Policy& policy,
                                   std::int64_t frames,
                                   const std::vector<std::uint64_t>& seeds) {
    if (seeds.empty()) throw ConfigError("need at least one seed");
    const std::size_t n = config.num_classes();

    ReplicationResult result;
    result.runs.assign(seeds.size(), RunSummary(n));

    std::atomic<std::size_t> cursor{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= seeds.size()) return;
            const RunResult r = run(config, policy, frames, seeds[i]);
            RunSummary& summary = result.runs[i];
            summary.seed = seeds[i];
            summary.delays.resize(n);
            for (std::size_t c = 0; c < n; ++c) {
                summary.delays[c] =
                    r.stats.average_delay(c).value_or(std::numeric_limits<double>::quiet_NaN());
            }
            summary.power = r.stats.average_power().value_or(0.0);
            summary.stats = r.stats;
            summary.final_state = r.final_state;
        }
    };

    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t num_threads = std::min<std::size_t>(hw, seeds.size());
    if (num_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        threads.reserve(num_threads);
        for (std::size_t i = 0; i < num_threads; ++i) threads.emplace_back(worker);
        for (auto& th : threads) th.join();
    }

    auto mean_se = [&](auto&& get) {
        double mean = 0.0;
        for (const auto& r : result.runs) mean += get(r);
        mean /= static_cast<double>(result.runs.size());
        double var = 0.0;
        for (const auto& r : result.runs) {
            const double d = get(r) - mean;
            var += d * d;
        }
        double se = 0.0;
        if (result.runs.size() > 1) {
            var /= static_cast<double>(result.runs.size() - 1);
            se = std::sqrt(var / static_cast<double>(result.runs.size()));
        }
        return std::pair{mean, se};
    };

    result.delay_mean.resize(n);
    result.delay_se.resize(n);
    for (std::size_t c = 0; c < n; ++c) {
        auto [m, s] = mean_se([&](const RunSummary& r) { return r.delays[c]; });
        result.delay_mean[c] = m;
        result.delay_se[c] = s;
    }
    auto [pm, ps] = mean_se([](const RunSummary& r) { return r.power; });
    result.power_mean = pm;
    result.power_se = ps;
    return result;
}

}  // namespace mg1sim
