#pragma once

// Derivative-free one-dimensional solvers shared by the weight and
// robustness modules.

#include <cmath>
#include <utility>

namespace pweight::rootfind {

/// Bisection on [lo, hi] where f(lo) and f(hi) have opposite signs (zero
/// counts as either). Runs until the midpoint is no longer representable
/// strictly inside the bracket or the bracket is narrower than xtol.
/// Returns the endpoint with the smaller |f|.
template <class F>
double bisect(F&& f, double lo, double hi, double xtol = 0.0, int max_iter = 2000)
{
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) {
        return lo;
    }
    if (fhi == 0.0) {
        return hi;
    }
    const bool lo_positive = flo > 0.0;
    for (int it = 0; it < max_iter; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (!(mid > std::fmin(lo, hi) && mid < std::fmax(lo, hi)) ||
            std::fabs(hi - lo) <= xtol) {
            break;
        }
        const double fm = f(mid);
        if (fm == 0.0) {
            return mid;
        }
        if ((fm > 0.0) == lo_positive) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }
    return std::fabs(flo) <= std::fabs(fhi) ? lo : hi;
}

/// Golden-section search for the maximum of a unimodal f on [lo, hi].
/// Returns (argmax, max).
template <class F>
std::pair<double, double> golden_max(F&& f, double lo, double hi, double xtol,
                                     int max_iter = 500)
{
    constexpr double kInvPhi = 0.6180339887498948482;
    double x1 = hi - kInvPhi * (hi - lo);
    double x2 = lo + kInvPhi * (hi - lo);
    double f1 = f(x1);
    double f2 = f(x2);
    for (int it = 0; it < max_iter && (hi - lo) > xtol; ++it) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + kInvPhi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - kInvPhi * (hi - lo);
            f1 = f(x1);
        }
    }
    return f1 >= f2 ? std::pair{x1, f1} : std::pair{x2, f2};
}

} // namespace pweight::rootfind
