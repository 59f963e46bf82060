#include <doctest.h>

#include <mg1sim/oracle.hpp>
#include <mg1sim/policies.hpp>
#include <mg1sim/rng.hpp>

#include "test_fixtures.hpp"

#include <cmath>

using namespace mg1sim;

namespace {

// Config with E[S] = (2, 1) for the weighted-ordering cases.
SystemConfig uneven_sizes_config() {
    SystemConfig config;
    ClassParams c1;
    c1.lambda = 0.1;
    c1.size = JobSizeDist::deterministic(2.0);
    c1.delay_bound = 50.0;
    ClassParams c2;
    c2.lambda = 0.1;
    c2.size = JobSizeDist::deterministic(1.0);
    c2.delay_bound = 50.0;
    config.classes = {c1, c2};
    config.p_min = config.p_max = 1.0;
    config.v = 1.0;
    return config;
}

double dynpower_objective(const SystemConfig& config, std::span<const double> z,
                          const PriorityOrder& order, double v, double p) {
    const auto profile = load_profile(config, p);
    const auto delays = priority_delays(profile, order);
    double obj = v * config.total_work_rate() * p / config.rate.mu(p);
    for (std::size_t n = 0; n < z.size(); ++n) obj += z[n] * config.classes[n].lambda * delays[n];
    return obj;
}

double pwdelayfair_power_objective(const SystemConfig& config, double x,
                                   std::span<const double> y, const PriorityOrder& order,
                                   double p) {
    const auto profile = load_profile(config, p);
    const auto delays = priority_delays(profile, order);
    const double mu = config.rate.mu(p);
    double obj = x * (-config.p_const.value_or(0.0) + p / mu * config.total_work_rate());
    for (std::size_t n = 0; n < y.size(); ++n) obj += y[n] * config.classes[n].lambda * delays[n];
    return obj;
}

}  // namespace

TEST_CASE("delayfeas sorts by queue value with index tie-breaks") {
    CHECK(delayfeas_decide(std::vector<double>{5, 2, 7}).order == PriorityOrder({2, 0, 1}));
    CHECK(delayfeas_decide(std::vector<double>{0, 0}).order == PriorityOrder({0, 1}));
    CHECK(delayfeas_decide(std::vector<double>{3, 3, 3}).order == PriorityOrder({0, 1, 2}));
    CHECK_FALSE(delayfeas_decide(std::vector<double>{1, 2}).power.has_value());
}

TEST_CASE("delayfair sorts by (z + y) / mean size") {
    const auto config = uneven_sizes_config();
    // z+y = (4, 4), E[S] = (2, 1): keys (2, 4), class 2 first
    auto d = delayfair_decide(std::vector<double>{4, 0}, std::vector<double>{0, 4}, config);
    CHECK(d.order == PriorityOrder({1, 0}));
    REQUIRE(d.auxiliaries.has_value());

    // all zero: identity by the tie rule
    d = delayfair_decide(std::vector<double>{0, 0}, std::vector<double>{0, 0}, config);
    CHECK(d.order == PriorityOrder({0, 1}));

    SystemConfig single;
    single.classes = {config.classes[0]};
    single.p_min = single.p_max = 1.0;
    d = delayfair_decide(std::vector<double>{9}, std::vector<double>{1}, single);
    CHECK(d.order == PriorityOrder({0}));
}

TEST_CASE("auxiliary subproblem closed form and corners") {
    // quadratic: r* = min(d, y lambda / (V c))
    CHECK(delayfair_aux(50.0, 1.0, PenaltyFn::quadratic(1.0), 100.0, 2.0) ==
          doctest::Approx(0.5));
    CHECK(delayfair_aux(1000.0, 1.0, PenaltyFn::quadratic(1.0), 100.0, 2.0) ==
          doctest::Approx(2.0));  // clipped at the box
    CHECK(delayfair_aux(0.0, 1.0, PenaltyFn::quadratic(1.0), 100.0, 2.0) == 0.0);

    // linear: corner solutions
    CHECK(delayfair_aux(10.0, 1.0, PenaltyFn::linear(1.0), 5.0, 2.0) == doctest::Approx(2.0));
    CHECK(delayfair_aux(1.0, 1.0, PenaltyFn::linear(1.0), 5.0, 2.0) == doctest::Approx(0.0));

    // any nondecreasing convex f with y = 0: both terms favor r = 0
    CHECK(delayfair_aux(0.0, 1.0, PenaltyFn::tabulated(2.0, {0.0, 0.25, 1.0, 2.25, 4.0}), 10.0,
                        2.0) == 0.0);
}

TEST_CASE("auxiliary solution satisfies first-order optimality") {
    RngStream rng(5, 0);
    const auto tab = PenaltyFn::tabulated(4.0, {0.0, 0.1, 0.4, 0.9, 1.6, 2.5, 3.6, 4.9, 6.4});
    for (int trial = 0; trial < 200; ++trial) {
        const double y = 20.0 * rng.uniform01();
        const double lambda = 0.1 + 2.0 * rng.uniform01();
        const double v = 1.0 + 50.0 * rng.uniform01();
        const double r_hi = 0.5 + 3.0 * rng.uniform01();
        const PenaltyFn& f =
            (trial % 2 == 0) ? tab : PenaltyFn::quadratic(0.2 + 3.0 * rng.uniform01());
        const double r = delayfair_aux(y, lambda, f, v, r_hi);
        REQUIRE(r >= 0.0);
        REQUIRE(r <= r_hi);
        auto objective = [&](double t) { return v * f.value(t) - y * lambda * t; };
        const double at = objective(r);
        const double eps = 1e-5 * r_hi;
        if (r > eps) CHECK(at <= objective(r - eps) + 1e-9);
        if (r < r_hi - eps) CHECK(at <= objective(r + eps) + 1e-9);
    }
}

TEST_CASE("dynpower with empty queues settles at the cheapest power") {
    // mu(P) = P: P / mu(P) is flat, resolved to p_min by the tie rule
    const auto config = testing::power_config();
    const auto d = dynpower_decide(std::vector<double>{0, 0}, config);
    CHECK(*d.power == doctest::Approx(4.0).epsilon(1e-9));

    // affine rate: P / mu(P) strictly increases, p_min without ties
    const auto affine = testing::affine_power_config();
    CHECK(*dynpower_decide(std::vector<double>{0, 0}, affine).power ==
          doctest::Approx(4.0).epsilon(1e-9));
}

TEST_CASE("dynpower with huge V ignores the queues") {
    auto config = testing::affine_power_config();
    config.v = 1e12;
    const auto d = dynpower_decide(std::vector<double>{40, 15}, config);
    CHECK(*d.power == doctest::Approx(4.0).epsilon(1e-6));
}

TEST_CASE("dynpower power choice matches a dense one-dimensional scan") {
    auto config = testing::power_config();
    config.v = 1.0;
    const std::vector<double> z = {1.0, 1.0};
    const auto d = dynpower_decide(z, config);

    const int dense = 1'000'000;
    double best = HUGE_VAL;
    for (int i = 0; i <= dense; ++i) {
        const double p = 4.0 + (10.0 - 4.0) * i / dense;
        best = std::min(best, dynpower_objective(config, z, d.order, config.v, p));
    }
    const double chosen = dynpower_objective(config, z, d.order, config.v, *d.power);
    CHECK(chosen <= best + 1e-9 * std::abs(best));
}

TEST_CASE("second-moment-free variant: empty queues and dense-scan checks") {
    // Z = 0 behaves exactly like the full objective's Z = 0 case
    const auto config = testing::power_config();
    const auto d = dynpower_decide_no_m2(std::vector<double>{0, 0}, config, 1.0);
    CHECK(*d.power == doctest::Approx(4.0).epsilon(1e-9));

    // Z = (1, 0), v-tilde = 1: the chosen power minimizes the moment-free
    // objective against a dense one-dimensional scan
    const std::vector<double> z = {1.0, 0.0};
    const auto d2 = dynpower_decide_no_m2(z, config, 1.0);
    auto objective = [&](double p) {
        const double mu = config.rate.mu(p);
        double obj = 1.0 * config.total_work_rate() * p / mu;
        double above = 0.0;
        for (std::size_t m = 0; m < 2; ++m) {
            const int cls = d2.order.class_at(m);
            const auto& c = config.classes[cls];
            const double upto = above + c.lambda * c.size.mean();
            obj += z[cls] * c.lambda / ((mu - above) * (mu - upto));
            above = upto;
        }
        return obj;
    };
    const int dense = 1'000'000;
    double best = HUGE_VAL;
    for (int i = 0; i <= dense; ++i) {
        best = std::min(best, objective(4.0 + 6.0 * i / dense));
    }
    CHECK(objective(*d2.power) <= best + 1e-9 * std::max(1.0, std::abs(best)));
}

TEST_CASE("second-moment-free variant matches when v-tilde is rescaled") {
    const auto config = testing::affine_power_config();
    const double r_hat = 0.5 * (1.0 * 2.0 + 2.0 * 1.0);  // 0.5 sum lambda E[S^2]
    RngStream rng(17, 1);
    for (int trial = 0; trial < 100; ++trial) {
        const std::vector<double> z = {20.0 * rng.uniform01(), 20.0 * rng.uniform01()};
        SystemConfig c = config;
        c.v = 0.5 + 10.0 * rng.uniform01();
        const auto with_m2 = dynpower_decide(z, c);
        const auto without_m2 = dynpower_decide_no_m2(z, c, c.v / r_hat);
        CHECK(with_m2.order == without_m2.order);
        CHECK(*with_m2.power == doctest::Approx(*without_m2.power).epsilon(1e-6));
    }
}

TEST_CASE("pwdelayfair corner cases") {
    auto config = testing::affine_power_config();
    config.p_const = 3.5;
    const auto r_max = default_r_max(config);

    // nothing in debt: cheapest power, zero auxiliary targets
    auto d = pwdelayfair_decide(0.0, std::vector<double>{0, 0}, config, r_max);
    CHECK(*d.power == doctest::Approx(4.0).epsilon(1e-9));
    CHECK((*d.auxiliaries)[0] == 0.0);
    CHECK((*d.auxiliaries)[1] == 0.0);

    // large power debt dominates: P / mu(P) increasing pushes to p_min
    d = pwdelayfair_decide(1e9, std::vector<double>{1, 1}, config, r_max);
    CHECK(*d.power == doctest::Approx(4.0).epsilon(1e-6));
}

TEST_CASE("pwdelayfair power choice matches a dense scan") {
    auto config = testing::power_config();
    config.p_const = 4.0;
    config.v = 1.0;
    const auto r_max = default_r_max(config);
    const std::vector<double> y = {1.0, 1.0};
    const auto d = pwdelayfair_decide(1.0, y, config, r_max);

    const int dense = 1'000'000;
    double best = HUGE_VAL;
    for (int i = 0; i <= dense; ++i) {
        const double p = 4.0 + (10.0 - 4.0) * i / dense;
        best = std::min(best, pwdelayfair_power_objective(config, 1.0, y, d.order, p));
    }
    const double chosen = pwdelayfair_power_objective(config, 1.0, y, d.order, *d.power);
    CHECK(chosen <= best + 1e-9 * std::max(1.0, std::abs(best)));
}

TEST_CASE("scaling all queue values never changes the chosen order") {
    const auto config = testing::affine_power_config();
    auto with_pconst = config;
    with_pconst.p_const = 3.5;
    const auto r_max = default_r_max(with_pconst);
    RngStream rng(29, 0);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::vector<double> z = {30.0 * rng.uniform01(), 30.0 * rng.uniform01()};
        const std::vector<double> y = {30.0 * rng.uniform01(), 30.0 * rng.uniform01()};
        const double x = 10.0 * rng.uniform01();
        const double scale = (trial % 3 == 0) ? 0.5 : (trial % 3 == 1) ? 2.0 : 37.5;
        std::vector<double> zs = z;
        std::vector<double> ys = y;
        for (auto& v : zs) v *= scale;
        for (auto& v : ys) v *= scale;

        CHECK(delayfeas_decide(z).order == delayfeas_decide(zs).order);
        CHECK(delayfair_decide(z, y, config).order == delayfair_decide(zs, ys, config).order);
        CHECK(dynpower_decide(z, config).order == dynpower_decide(zs, config).order);
        CHECK(pwdelayfair_decide(x, y, with_pconst, r_max).order ==
              pwdelayfair_decide(x * scale, ys, with_pconst, r_max).order);
    }
}

TEST_CASE("priority choice is optimal at every power level (decoupling)") {
    const auto config = testing::power_config();
    const std::vector<double> z = {3.0, 5.0};
    const auto decision = dynpower_decide(z, config);
    for (int i = 0; i < 10; ++i) {
        const double p = 4.0 + (10.0 - 4.0) * i / 9.0;
        // brute-force the best order at this power
        PriorityOrder best = PriorityOrder::identity(2);
        double best_obj = HUGE_VAL;
        for (const auto& perm : {std::vector<int>{0, 1}, std::vector<int>{1, 0}}) {
            const double obj = dynpower_objective(config, z, PriorityOrder(perm), 0.0, p);
            if (obj < best_obj) {
                best_obj = obj;
                best = PriorityOrder(perm);
            }
        }
        CHECK(decision.order == best);
    }
}

TEST_CASE("chosen power beats a thousand random samples") {
    auto config = testing::affine_power_config();
    config.v = 2.0;
    const std::vector<double> z = {7.0, 2.0};
    const auto d = dynpower_decide(z, config);
    const double chosen = dynpower_objective(config, z, d.order, config.v, *d.power);
    RngStream rng(31, 0);
    for (int i = 0; i < 1000; ++i) {
        const double p = 4.0 + 6.0 * rng.uniform01();
        CHECK(chosen <= dynpower_objective(config, z, d.order, config.v, p) + 1e-9);
    }
}

TEST_CASE("deterministic decisions beat randomized mixtures of themselves") {
    // ratio-of-expectation objectives: mixing stationary decisions can never
    // beat the best deterministic one
    auto config = testing::power_config();
    config.v = 1.0;
    const std::vector<double> z = {2.0, 1.0};
    const auto d = dynpower_decide(z, config);

    // deterministic optimum of the frame-ratio objective
    auto ratio_term = [&](double p, const PriorityOrder& order) {
        const auto profile = load_profile(config, p);
        const auto delays = priority_delays(profile, order);
        const double t = expected_frame_size(profile);
        double phi = config.v * p * profile.rho_sum() * t;
        for (std::size_t n = 0; n < z.size(); ++n) {
            phi += z[n] * config.classes[n].lambda * delays[n] * t;
        }
        return std::pair{phi, t};
    };
    const auto [phi_star, t_star] = ratio_term(*d.power, d.order);
    const double u_star = phi_star / t_star;

    RngStream rng(37, 0);
    for (int trial = 0; trial < 300; ++trial) {
        // random two-point mixture of deterministic decisions
        const double beta = rng.uniform01();
        double phi = 0.0;
        double t = 0.0;
        for (int j = 0; j < 2; ++j) {
            const double p = 4.0 + 6.0 * rng.uniform01();
            const auto order =
                rng.uniform01() < 0.5 ? PriorityOrder({0, 1}) : PriorityOrder({1, 0});
            const auto [phi_j, t_j] = ratio_term(p, order);
            const double w = (j == 0) ? beta : 1.0 - beta;
            phi += w * phi_j;
            t += w * t_j;
        }
        CHECK(phi / t >= u_star - 1e-9);
    }
}
