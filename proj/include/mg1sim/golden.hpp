#pragma once

#include <cmath>
#include <utility>

namespace mg1sim {

// Golden-section search for the minimum of a unimodal function on [a, b].
// Returns {argmin, value}. Interval shrinks by ~0.618 per evaluation, so
// the iteration cap is generous for any tolerance above ~1e-14 * (b - a).
template <typename F>
std::pair<double, double> golden_section_min(F&& f, double a, double b, double tol,
                                             int max_iter = 200) {
    constexpr double kInvPhi = 0.6180339887498949;
    double c = b - kInvPhi * (b - a);
    double d = a + kInvPhi * (b - a);
    double fc = f(c);
    double fd = f(d);
    for (int i = 0; i < max_iter && (b - a) > tol; ++i) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kInvPhi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kInvPhi * (b - a);
            fd = f(d);
        }
    }
    const double x = 0.5 * (a + b);
    return {x, f(x)};
}

}  // namespace mg1sim
