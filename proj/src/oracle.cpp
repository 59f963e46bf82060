#include <mg1sim/oracle.hpp>

#include <mg1sim/golden.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>

namespace mg1sim {

namespace {

constexpr int kMaxVertexClasses = 8;
constexpr int kMaxPowerSearchClasses = 4;
constexpr int kFwMaxIter = 10000;
constexpr double kFwRelGap = 1e-8;
constexpr double kBoundViolationTol = 1e-6;

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Linear minimization over the delay region: min sum_n g_n W_n is attained
// by the strict priority rule ordered by decreasing g_n / rho_n (the c-mu
// rule, with x_n = rho_n W_n). Ties go to the lower class index.
PriorityOrder cmu_order(const LoadProfile& profile, std::span<const double> weights) {
    std::vector<int> idx(profile.rho.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        return weights[a] / profile.rho[a] > weights[b] / profile.rho[b];
    });
    return PriorityOrder(std::move(idx));
}

using AtomKey = std::vector<int>;

struct Atom {
    double weight = 0.0;
    std::vector<double> point;
};

struct AfwResult {
    std::vector<double> x;
    double value = 0.0;
    double gap = 0.0;
    std::map<AtomKey, Atom> atoms;
    int iterations = 0;
};

// Frank-Wolfe with away steps over a polytope given by its linear
// minimization oracle. Away steps keep convergence linear when the optimum
// sits strictly inside a face, which plain Frank-Wolfe handles poorly.
AfwResult afw_minimize(
    const std::function<std::pair<AtomKey, std::vector<double>>(std::span<const double>)>& lmo,
    const std::function<double(std::span<const double>)>& value,
    const std::function<std::vector<double>(std::span<const double>)>& grad,
    std::span<const double> seed_grad, int max_iter, double rel_gap,
    double stop_below = -HUGE_VAL) {
    AfwResult res;
    {
        auto [key, point] = lmo(seed_grad);
        res.x = point;
        res.atoms[key] = Atom{1.0, std::move(point)};
    }
    for (int iter = 0; iter < max_iter; ++iter) {
        res.iterations = iter;
        res.value = value(res.x);
        if (res.value <= stop_below) {
            res.gap = 0.0;
            return res;
        }
        const std::vector<double> g = grad(res.x);
        auto [fw_key, fw_point] = lmo(g);
        const double gx = dot(g, res.x);
        const double fw_gap = gx - dot(g, fw_point);
        res.gap = fw_gap;
        if (fw_gap <= rel_gap * std::max(1.0, std::abs(res.value))) {
            return res;
        }
        // the away atom must carry weight; stale zero-weight atoms would
        // produce a zero-length step and stall the search
        auto away = res.atoms.end();
        double away_score = -HUGE_VAL;
        for (auto it = res.atoms.begin(); it != res.atoms.end(); ++it) {
            if (it->second.weight <= 1e-15) continue;
            const double s = dot(g, it->second.point);
            if (s > away_score) {
                away_score = s;
                away = it;
            }
        }
        const double away_gap = (away != res.atoms.end()) ? away_score - gx : -HUGE_VAL;

        std::vector<double> dir(res.x.size());
        double t_max = 1.0;
        const bool fw_step = fw_gap >= away_gap || away == res.atoms.end();
        if (fw_step) {
            for (std::size_t i = 0; i < dir.size(); ++i) dir[i] = fw_point[i] - res.x[i];
        } else {
            for (std::size_t i = 0; i < dir.size(); ++i) dir[i] = res.x[i] - away->second.point[i];
            const double alpha = away->second.weight;
            if (alpha >= 1.0) return res;  // hull degenerated to one atom
            t_max = alpha / (1.0 - alpha);
        }

        auto phi = [&](double t) {
            std::vector<double> y(res.x.size());
            for (std::size_t i = 0; i < y.size(); ++i) y[i] = res.x[i] + t * dir[i];
            return value(y);
        };
        auto [t_star, phi_star] = golden_section_min(phi, 0.0, t_max, 1e-12 * t_max);
        if (phi(t_max) <= phi_star) t_star = t_max;  // corner solutions exactly
        if (!(t_star > 0.0)) return res;

        for (std::size_t i = 0; i < res.x.size(); ++i) res.x[i] += t_star * dir[i];
        if (fw_step) {
            for (auto& [key, atom] : res.atoms) atom.weight *= (1.0 - t_star);
            auto& atom = res.atoms[fw_key];
            atom.weight += t_star;
            if (atom.point.empty()) atom.point = fw_point;
            for (auto it = res.atoms.begin(); it != res.atoms.end();) {
                it = (it->second.weight <= 1e-15 && it->first != fw_key) ? res.atoms.erase(it)
                                                                         : std::next(it);
            }
        } else {
            for (auto& [key, atom] : res.atoms) atom.weight *= (1.0 + t_star);
            away->second.weight -= t_star;
            if (away->second.weight <= 1e-15) res.atoms.erase(away);
        }

        // Periodically resync the iterate with its convex combination to
        // keep floating-point drift out of the atom weights.
        if ((iter & 63) == 63) {
            double wsum = 0.0;
            for (auto& [key, atom] : res.atoms) wsum += atom.weight;
            std::fill(res.x.begin(), res.x.end(), 0.0);
            for (auto& [key, atom] : res.atoms) {
                atom.weight /= wsum;
                for (std::size_t i = 0; i < res.x.size(); ++i) {
                    res.x[i] += atom.weight * atom.point[i];
                }
            }
        }
    }
    res.value = value(res.x);
    return res;
}

std::pair<AtomKey, std::vector<double>> region_lmo(const LoadProfile& profile,
                                                   std::span<const double> g) {
    PriorityOrder order = cmu_order(profile, g);
    DelayVector w = priority_delays(profile, order);
    return {order.classes(), std::move(w)};
}

double hinge_sq(std::span<const double> w, std::span<const double> bounds) {
    double s = 0.0;
    for (std::size_t n = 0; n < w.size(); ++n) {
        const double e = w[n] - bounds[n];
        if (e > 0.0) s += e * e;
    }
    return s;
}

// Gradient seed: evaluate the objective slope at the equal-delay point on
// the conservation hyperplane.
std::vector<double> equal_delay_point(const LoadProfile& profile) {
    const double w_eq = conservation_value(profile) / profile.rho_sum();
    return std::vector<double>(profile.rho.size(), w_eq);
}

int factorial(int n) {
    int f = 1;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

std::map<AtomKey, int> vertex_index_map(std::size_t num_classes) {
    std::vector<int> perm(num_classes);
    std::iota(perm.begin(), perm.end(), 0);
    std::map<AtomKey, int> index;
    int i = 0;
    do {
        index[perm] = i++;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return index;
}

Mixture atoms_to_mixture(const std::map<AtomKey, Atom>& atoms, std::size_t num_classes) {
    Mixture mix;
    mix.weights.assign(static_cast<std::size_t>(factorial(static_cast<int>(num_classes))), 0.0);
    const auto index = vertex_index_map(num_classes);
    double wsum = 0.0;
    for (const auto& [key, atom] : atoms) wsum += atom.weight;
    for (const auto& [key, atom] : atoms) {
        mix.weights[static_cast<std::size_t>(index.at(key))] += atom.weight / wsum;
    }
    return mix;
}

}  // namespace

void Mixture::validate() const {
    double sum = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw ConfigError("mixture weights must be nonnegative");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        std::ostringstream os;
        os << "mixture weights sum to " << sum << ", expected 1 within 1e-9";
        throw ConfigError(os.str());
    }
}

std::vector<RegionVertex> enumerate_vertices(const SystemConfig& config, double power) {
    const std::size_t n = config.num_classes();
    if (n > kMaxVertexClasses) {
        throw CapabilityError("vertex enumeration is limited to " +
                              std::to_string(kMaxVertexClasses) + " classes, got " +
                              std::to_string(n));
    }
    const LoadProfile profile = load_profile(config, power);
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<RegionVertex> vertices;
    vertices.reserve(static_cast<std::size_t>(factorial(static_cast<int>(n))));
    do {
        RegionVertex v{PriorityOrder(perm), {}, {}};
        v.delays = priority_delays(profile, v.order);
        v.x_values.reserve(n);
        for (std::size_t i = 0; i < n; ++i) v.x_values.push_back(profile.rho[i] * v.delays[i]);
        vertices.push_back(std::move(v));
    } while (std::next_permutation(perm.begin(), perm.end()));
    return vertices;
}

DelayVector mixture_delays(const std::vector<RegionVertex>& vertices, const Mixture& mixture) {
    if (vertices.empty() || mixture.weights.size() != vertices.size()) {
        throw ConfigError("mixture weight count does not match the vertex list");
    }
    mixture.validate();
    DelayVector out(vertices.front().delays.size(), 0.0);
    for (std::size_t j = 0; j < vertices.size(); ++j) {
        for (std::size_t n = 0; n < out.size(); ++n) {
            out[n] += mixture.weights[j] * vertices[j].delays[n];
        }
    }
    return out;
}

bool bounds_feasible(const LoadProfile& profile, std::span<const double> bounds) {
    const std::size_t n = profile.rho.size();
    if (bounds.size() != n) throw ConfigError("one delay bound per class required");
    // sum_{n in S} rho_n d_n >= rho(S) R / (1 - rho(S)) for every subset S
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        double rho_s = 0.0;
        double u_s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (mask & (1u << i)) {
                rho_s += profile.rho[i];
                u_s += profile.rho[i] * bounds[i];
            }
        }
        if (u_s < rho_s * profile.residual / (1.0 - rho_s)) return false;
    }
    return true;
}

namespace {

// Describes the tightest violated subset inequality for error messages.
std::string describe_infeasibility(const LoadProfile& profile, std::span<const double> bounds) {
    const std::size_t n = profile.rho.size();
    double worst = 0.0;
    std::uint32_t worst_mask = 0;
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        double rho_s = 0.0;
        double u_s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (mask & (1u << i)) {
                rho_s += profile.rho[i];
                u_s += profile.rho[i] * bounds[i];
            }
        }
        const double need = rho_s * profile.residual / (1.0 - rho_s);
        if (need - u_s > worst) {
            worst = need - u_s;
            worst_mask = mask;
        }
    }
    std::ostringstream os;
    os << "delay bounds are outside the achievable region: classes {";
    bool first = true;
    for (std::size_t i = 0; i < n; ++i) {
        if (worst_mask & (1u << i)) {
            if (!first) os << ",";
            os << i + 1;
            first = false;
        }
    }
    os << "} require weighted delay >= " << worst << " more than the bounds allow";
    return os.str();
}

}  // namespace

PenaltyTarget min_penalty_target(const SystemConfig& config,
                                 std::span<const PenaltyFn> penalties,
                                 std::span<const double> bounds, double power) {
    const std::size_t n = config.num_classes();
    if (n > kMaxVertexClasses) {
        throw CapabilityError("penalty oracle is limited to " +
                              std::to_string(kMaxVertexClasses) + " classes");
    }
    if (penalties.size() != n || bounds.size() != n) {
        throw ConfigError("one penalty and one bound per class required");
    }
    const LoadProfile profile = load_profile(config, power);
    if (!bounds_feasible(profile, bounds)) {
        throw InfeasibleError(describe_infeasibility(profile, bounds));
    }

    auto lmo = [&](std::span<const double> g) { return region_lmo(profile, g); };

    double kappa = 0.0;  // hinge weight; raised only if bounds actually bind
    AfwResult fw;
    for (int round = 0; round < 12; ++round) {
        auto value = [&](std::span<const double> w) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += penalties[i].value(w[i]);
            return s + kappa * hinge_sq(w, bounds);
        };
        auto grad = [&](std::span<const double> w) {
            std::vector<double> g(n);
            for (std::size_t i = 0; i < n; ++i) {
                g[i] = penalties[i].slope(w[i]);
                const double e = w[i] - bounds[i];
                if (e > 0.0) g[i] += 2.0 * kappa * e;
            }
            return g;
        };
        const std::vector<double> seed = grad(equal_delay_point(profile));
        fw = afw_minimize(lmo, value, grad, seed, kFwMaxIter, kFwRelGap);
        double viol = 0.0;
        for (std::size_t i = 0; i < n; ++i) viol = std::max(viol, fw.x[i] - bounds[i]);
        if (viol <= kBoundViolationTol) break;
        kappa = (kappa == 0.0) ? 16.0 * std::max(1.0, std::abs(fw.value)) : kappa * 16.0;
    }

    PenaltyTarget target;
    target.delays = fw.x;
    target.penalty = 0.0;
    for (std::size_t i = 0; i < n; ++i) target.penalty += penalties[i].value(fw.x[i]);
    target.mixture = atoms_to_mixture(fw.atoms, n);
    for (std::size_t i = 0; i < n; ++i) {
        target.max_bound_violation = std::max(target.max_bound_violation, fw.x[i] - bounds[i]);
    }
    target.max_bound_violation = std::max(target.max_bound_violation, 0.0);
    target.iterations = fw.iterations;
    return target;
}

PenaltyTarget min_penalty_target(const SystemConfig& config, double power) {
    std::vector<PenaltyFn> penalties;
    std::vector<double> bounds;
    for (const auto& c : config.classes) {
        penalties.push_back(c.penalty);
        bounds.push_back(c.delay_bound);
    }
    return min_penalty_target(config, penalties, bounds, power);
}

namespace {

double constant_average_power(const SystemConfig& config, double power) {
    return power * config.total_work_rate() / config.rate.mu(power);
}

// Closest-to-feasible order mixture at one power level, by minimizing the
// squared bound excess over the region.
AfwResult feasibility_fw(const LoadProfile& profile, std::span<const double> bounds) {
    auto lmo = [&](std::span<const double> g) { return region_lmo(profile, g); };
    auto value = [&](std::span<const double> w) { return hinge_sq(w, bounds); };
    auto grad = [&](std::span<const double> w) {
        std::vector<double> g(w.size());
        for (std::size_t i = 0; i < w.size(); ++i) g[i] = 2.0 * std::max(0.0, w[i] - bounds[i]);
        return g;
    };
    std::vector<double> seed(profile.rho.size(), 1.0);
    return afw_minimize(lmo, value, grad, seed, kFwMaxIter, 1e-12, 1e-22);
}

// Feasibility of bounds under a randomization of two power levels, where
// theta is the time-average weight of the low-power level in the mixed
// delay vector. Solved over the product of the two regions; the linear
// oracle splits into one c-mu call per level.
struct TwoPointFeasibility {
    bool feasible = false;
    std::map<AtomKey, Atom> atoms_lo;
    std::map<AtomKey, Atom> atoms_hi;
};

TwoPointFeasibility two_point_feasible(const LoadProfile& lo, const LoadProfile& hi,
                                       double theta, std::span<const double> bounds) {
    const std::size_t n = lo.rho.size();
    auto lmo = [&](std::span<const double> g) {
        auto [key_lo, w_lo] = region_lmo(lo, g.subspan(0, n));
        auto [key_hi, w_hi] = region_lmo(hi, g.subspan(n, n));
        AtomKey key = key_lo;
        key.insert(key.end(), key_hi.begin(), key_hi.end());
        std::vector<double> point = std::move(w_lo);
        point.insert(point.end(), w_hi.begin(), w_hi.end());
        return std::make_pair(std::move(key), std::move(point));
    };
    auto mixed = [&](std::span<const double> w, std::size_t i) {
        return theta * w[i] + (1.0 - theta) * w[n + i];
    };
    auto value = [&](std::span<const double> w) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double e = mixed(w, i) - bounds[i];
            if (e > 0.0) s += e * e;
        }
        return s;
    };
    auto grad = [&](std::span<const double> w) {
        std::vector<double> g(2 * n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double e = mixed(w, i) - bounds[i];
            if (e > 0.0) {
                g[i] = 2.0 * theta * e;
                g[n + i] = 2.0 * (1.0 - theta) * e;
            }
        }
        return g;
    };
    std::vector<double> seed(2 * n, 1.0);
    double scale = 1.0;
    for (double b : bounds) scale = std::max(scale, std::abs(b));
    const double tol = 1e-7 * scale;
    AfwResult fw = afw_minimize(lmo, value, grad, seed, 2000, 1e-12, tol * tol * 0.09);

    TwoPointFeasibility out;
    out.feasible = std::sqrt(fw.value) <= tol;
    for (const auto& [key, atom] : fw.atoms) {
        AtomKey klo(key.begin(), key.begin() + static_cast<std::ptrdiff_t>(n));
        AtomKey khi(key.begin() + static_cast<std::ptrdiff_t>(n), key.end());
        out.atoms_lo[klo].weight += atom.weight;
        out.atoms_hi[khi].weight += atom.weight;
    }
    return out;
}

}  // namespace

PowerTarget min_power_target(const SystemConfig& config, std::span<const double> bounds,
                             int grid_cells) {
    const std::size_t n = config.num_classes();
    if (n > kMaxPowerSearchClasses) {
        throw CapabilityError("power oracle is limited to " +
                              std::to_string(kMaxPowerSearchClasses) + " classes");
    }
    if (bounds.size() != n) throw ConfigError("one delay bound per class required");

    const LoadProfile prof_max = load_profile(config, config.p_max);
    if (!bounds_feasible(prof_max, bounds)) {
        throw InfeasibleError("at p_max: " + describe_infeasibility(prof_max, bounds));
    }

    auto feasible_at = [&](double p) {
        return bounds_feasible(load_profile(config, p), bounds);
    };
    auto avg_power = [&](double p) { return constant_average_power(config, p); };

    const double h = (config.p_max - config.p_min) / grid_cells;
    int first_feasible = -1;
    int best = -1;
    double best_power = HUGE_VAL;
    for (int i = 0; i <= grid_cells; ++i) {
        const double p = (i == grid_cells) ? config.p_max : config.p_min + i * h;
        if (!feasible_at(p)) continue;
        if (first_feasible < 0) first_feasible = i;
        const double a = avg_power(p);
        if (a < best_power) {
            best_power = a;
            best = i;
        }
    }
    // p_max is feasible, so the grid scan found at least one point.

    // Exact feasibility boundary inside the first feasible cell. Feasibility
    // is monotone in power: raising the rate scales every subset requirement
    // down faster than the bound side.
    double boundary = config.p_min + first_feasible * h;
    if (first_feasible > 0) {
        double lo = config.p_min + (first_feasible - 1) * h;
        double hi = boundary;
        for (int it = 0; it < 60 && hi - lo > 1e-12 * (config.p_max - config.p_min + 1.0); ++it) {
            const double mid = 0.5 * (lo + hi);
            (feasible_at(mid) ? hi : lo) = mid;
        }
        boundary = hi;
    }

    // Candidate 1: the best constant power level. Golden refinement around
    // the best grid cell, never dropping below the feasibility boundary;
    // among equal average powers prefer the smaller allocation.
    double cand_p = (best == grid_cells) ? config.p_max : config.p_min + best * h;
    double cand_a = best_power;
    {
        const double lo = std::max(boundary, cand_p - h);
        const double hi = std::min(config.p_max, cand_p + h);
        if (hi > lo) {
            auto [p_ref, a_ref] = golden_section_min(avg_power, lo, hi, 1e-9 * (hi - lo));
            if (a_ref < cand_a && feasible_at(p_ref)) {
                cand_p = p_ref;
                cand_a = a_ref;
            }
        }
        const double a_boundary = avg_power(boundary);
        if (a_boundary <= cand_a + 1e-12 * std::max(1.0, cand_a)) {
            cand_p = boundary;
            cand_a = a_boundary;
        }
    }

    PowerTarget target;
    target.average_power = cand_a;
    {
        PowerOperatingPoint point;
        point.power = cand_p;
        point.mixture = atoms_to_mixture(feasibility_fw(load_profile(config, cand_p), bounds).atoms,
                                         n);
        point.weight = 1.0;
        target.points.push_back(std::move(point));
    }

    // Candidate 2: randomize the two grid points adjacent to the feasibility
    // boundary. Mixed delays are time-weighted, so in (delay, power) space
    // the randomization traces the segment between the two operating points;
    // push as much weight as feasibility allows onto the cheaper one.
    if (first_feasible > 0) {
        const double p_lo = config.p_min + (first_feasible - 1) * h;
        const double p_hi = config.p_min + first_feasible * h;
        const double a_lo = avg_power(p_lo);
        const double a_hi = avg_power(p_hi);
        if (a_lo < cand_a - 1e-12 * std::max(1.0, cand_a)) {
            const LoadProfile prof_lo = load_profile(config, p_lo);
            const LoadProfile prof_hi = load_profile(config, p_hi);
            double lo_t = 0.0;  // theta: time-average weight on p_lo
            double hi_t = 1.0;
            TwoPointFeasibility at_best = two_point_feasible(prof_lo, prof_hi, 0.0, bounds);
            for (int it = 0; it < 40; ++it) {
                const double mid = 0.5 * (lo_t + hi_t);
                TwoPointFeasibility f = two_point_feasible(prof_lo, prof_hi, mid, bounds);
                if (f.feasible) {
                    lo_t = mid;
                    at_best = std::move(f);
                } else {
                    hi_t = mid;
                }
            }
            const double theta = lo_t;
            const double a_mix = theta * a_lo + (1.0 - theta) * a_hi;
            if (theta > 0.0 && a_mix < target.average_power) {
                target.average_power = a_mix;
                target.points.clear();
                // Convert the time-average weight back to a per-frame
                // randomization probability.
                const double t_lo = expected_frame_size(prof_lo);
                const double t_hi = expected_frame_size(prof_hi);
                const double beta = theta * t_hi / (theta * t_hi + (1.0 - theta) * t_lo);
                PowerOperatingPoint lo_point;
                lo_point.power = p_lo;
                lo_point.mixture = atoms_to_mixture(at_best.atoms_lo, n);
                lo_point.weight = beta;
                PowerOperatingPoint hi_point;
                hi_point.power = p_hi;
                hi_point.mixture = atoms_to_mixture(at_best.atoms_hi, n);
                hi_point.weight = 1.0 - beta;
                target.points.push_back(std::move(lo_point));
                target.points.push_back(std::move(hi_point));
            }
        }
    }
    return target;
}

}  // namespace mg1sim
