#include <doctest.h>

#include <mg1sim/simulator.hpp>

#include "test_fixtures.hpp"

#include <cmath>

using namespace mg1sim;

TEST_CASE("same seed, same run, bit for bit") {
    const auto config = testing::mm1_config();
    const Policy policy(PolicyKind::DelayFeas, config);
    RunOptions opts;
    opts.capture_frames = true;
    const auto a = run(config, policy, 500, 42, opts);
    const auto b = run(config, policy, 500, 42, opts);
    REQUIRE(a.frames.size() == b.frames.size());
    for (std::size_t k = 0; k < a.frames.size(); ++k) {
        CHECK(a.frames[k].idle == b.frames[k].idle);
        CHECK(a.frames[k].busy == b.frames[k].busy);
        CHECK(a.frames[k].power == b.frames[k].power);
        CHECK(a.frames[k].order == b.frames[k].order);
        for (std::size_t n = 0; n < 2; ++n) {
            CHECK(a.frames[k].arrivals[n] == b.frames[k].arrivals[n]);
            CHECK(a.frames[k].delay_sums[n] == b.frames[k].delay_sums[n]);
        }
    }
    CHECK(a.final_state.z == b.final_state.z);

    const auto c = run(config, policy, 500, 43, opts);
    CHECK(c.stats.delay_sum(0) != a.stats.delay_sum(0));
}

TEST_CASE("work conservation: busy periods do not depend on the order served") {
    // same seed means the same arrival and size draws per class, so any two
    // priority rules see identical idle/busy splits and arrival counts
    auto config = testing::mm1_config();
    RunOptions opts;
    opts.capture_frames = true;

    config.fixed_order = std::vector<int>{0, 1};
    const auto a = run(config, Policy(PolicyKind::FixedOrder, config), 2000, 7, opts);
    config.fixed_order = std::vector<int>{1, 0};
    const auto b = run(config, Policy(PolicyKind::FixedOrder, config), 2000, 7, opts);

    double delay_diff = 0.0;
    for (std::size_t k = 0; k < a.frames.size(); ++k) {
        // identical up to summation order of the service times
        REQUIRE(a.frames[k].idle == doctest::Approx(b.frames[k].idle).epsilon(1e-9));
        REQUIRE(a.frames[k].busy == doctest::Approx(b.frames[k].busy).epsilon(1e-9));
        REQUIRE(a.frames[k].arrivals[0] == b.frames[k].arrivals[0]);
        REQUIRE(a.frames[k].arrivals[1] == b.frames[k].arrivals[1]);
        delay_diff += std::abs(a.frames[k].delay_sums[0] - b.frames[k].delay_sums[0]);
    }
    CHECK(delay_diff > 1.0);  // the schedules themselves do differ
}

TEST_CASE("delays and frame statistics match the closed forms at a million frames") {
    auto config = testing::mm1_config();
    config.fixed_order = std::vector<int>{0, 1};
    const Policy policy(PolicyKind::FixedOrder, config);
    const auto r = run(config, policy, 1'000'000, 1);

    // strict-priority delays (high, low) = (0.4, 2.0)
    CHECK(*r.stats.average_delay(0) == doctest::Approx(0.4).epsilon(0.02));
    CHECK(*r.stats.average_delay(1) == doctest::Approx(2.0).epsilon(0.02));

    // conservation: 0.4 W1 + 0.4 W2 = 0.96
    const double weighted = 0.4 * *r.stats.average_delay(0) + 0.4 * *r.stats.average_delay(1);
    CHECK(weighted == doctest::Approx(0.96).epsilon(0.02));

    // renewal identities: E[T] = 5/3 and E[|A_n|] = lambda_n E[T]
    const double mean_t = r.stats.elapsed_time() / static_cast<double>(r.stats.frames());
    CHECK(mean_t == doctest::Approx(5.0 / 3.0).epsilon(0.01));
    const double mean_a1 =
        static_cast<double>(r.stats.arrival_count(0)) / static_cast<double>(r.stats.frames());
    const double mean_a2 =
        static_cast<double>(r.stats.arrival_count(1)) / static_cast<double>(r.stats.frames());
    CHECK(mean_a1 == doctest::Approx(1.0 * 5.0 / 3.0).epsilon(0.01));
    CHECK(mean_a2 == doctest::Approx(2.0 * 5.0 / 3.0).epsilon(0.01));
}

TEST_CASE("nearly idle system leaves almost every job without queueing delay") {
    SystemConfig config;
    ClassParams c1;
    c1.lambda = 1.0;
    c1.size = JobSizeDist::exponential(0.004);
    c1.delay_bound = 1.0;
    ClassParams c2;
    c2.lambda = 2.0;
    c2.size = JobSizeDist::exponential(0.003);
    c2.delay_bound = 1.0;
    config.classes = {c1, c2};  // total load 0.01
    config.p_min = config.p_max = 1.0;
    const Policy policy(PolicyKind::DelayFeas, config);
    const auto r = run(config, policy, 100'000, 3);

    // every frame's first job starts service on arrival, so the zero-delay
    // fraction is at least frames / jobs
    const double jobs =
        static_cast<double>(r.stats.arrival_count(0) + r.stats.arrival_count(1));
    CHECK(static_cast<double>(r.stats.frames()) / jobs >= 0.98);
}

TEST_CASE("single-class M/D/1 delay matches the Pollaczek-Khinchine value") {
    SystemConfig config;
    ClassParams c;
    c.lambda = 0.5;
    c.size = JobSizeDist::deterministic(1.0);
    c.delay_bound = 10.0;
    config.classes = {c};
    config.p_min = config.p_max = 1.0;
    const Policy policy(PolicyKind::FixedOrder, config);
    const auto r = run(config, policy, 200'000, 17);
    // W = lambda E[S^2] / (2 (1 - rho)) = 0.25 / 0.5
    CHECK(*r.stats.average_delay(0) == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("average power accounts busy-period energy only") {
    // fixed power 4, loads 0.25 + 0.5: P-bar = 4 * 0.75 = 3
    auto config = testing::power_config();
    config.p_fixed = 4.0;
    config.fixed_order = std::vector<int>{0, 1};
    const Policy policy(PolicyKind::FixedOrder, config);
    const auto r = run(config, policy, 200'000, 11);
    CHECK(*r.stats.average_power() == doctest::Approx(3.0).epsilon(0.01));
}

TEST_CASE("replication aggregation") {
    const auto config = testing::mm1_config();
    const Policy policy(PolicyKind::DelayFeas, config);

    // one seed: mean equals the run, zero standard error
    const auto single = run_replications(config, policy, 2000, {5});
    const auto direct = run(config, policy, 2000, 5);
    CHECK(single.delay_mean[0] == *direct.stats.average_delay(0));
    CHECK(single.delay_se[0] == 0.0);

    // identical seeds: still zero standard error
    const auto twins = run_replications(config, policy, 2000, {5, 5, 5});
    CHECK(twins.delay_se[0] == 0.0);
    CHECK(twins.delay_se[1] == 0.0);
    CHECK(twins.power_se == 0.0);
    CHECK(twins.delay_mean[0] == *direct.stats.average_delay(0));

    // distinct seeds: spread shows up
    const auto spread = run_replications(config, policy, 2000, seed_range(1, 4));
    CHECK(spread.delay_se[0] > 0.0);
    CHECK(spread.runs.size() == 4);
}

TEST_CASE("queue trace rows follow the virtual state") {
    const auto config = testing::mm1_config();
    const Policy policy(PolicyKind::DelayFair, config);
    RunOptions opts;
    opts.capture_queue_trace = true;
    const auto r = run(config, policy, 300, 9, opts);
    REQUIRE(r.queue_trace.size() == 300);
    CHECK(r.queue_trace.back().z == r.final_state.z);
    CHECK(r.queue_trace.back().y == r.final_state.y);
    for (const auto& row : r.queue_trace) {
        for (double z : row.z) REQUIRE(z >= 0.0);
        for (double y : row.y) REQUIRE(y >= 0.0);
        REQUIRE(row.x >= 0.0);
    }
}

TEST_CASE("the delay-debt queue obeys its pathwise lower bound on a real run") {
    const auto config = testing::mm1_config();
    const Policy policy(PolicyKind::DelayFeas, config);
    const auto r = run(config, policy, 20'000, 13);
    for (std::size_t n = 0; n < 2; ++n) {
        const double bound = r.stats.delay_sum(n) -
                             config.classes[n].delay_bound *
                                 static_cast<double>(r.stats.arrival_count(n));
        CHECK(r.final_state.z[n] >= bound - 1e-9);
        CHECK(r.final_state.z[n] >= 0.0);
    }
}

TEST_CASE("invalid run requests are rejected") {
    const auto config = testing::mm1_config();
    const Policy policy(PolicyKind::DelayFeas, config);
    CHECK_THROWS_AS(run(config, policy, 0, 1), ConfigError);
    CHECK_THROWS_AS(run_replications(config, policy, 10, {}), ConfigError);
}
