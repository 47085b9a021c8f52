#pragma once

#include <cmath>
#include <string>

#include "tmfrac/errors.hpp"

namespace tmfrac {

struct BisectionResult {
    double root = 0.0;
    double lo = 0.0;  // f(lo) > 0
    double hi = 0.0;  // f(hi) < 0
    int iterations = 0;
};

/// Zero of a decreasing function by bisection. The bracket [lo, hi] is widened
/// by doubling its ends until the signs straddle zero; more than `max_doublings`
/// widenings on either side throws NonBracketed.
template <class F>
BisectionResult bisect_decreasing(F&& f, double lo, double hi, double tol, int max_doublings = 10) {
    double flo = f(lo);
    for (int k = 0; flo <= 0.0; ++k) {
        if (flo == 0.0) return {lo, lo, lo, 0};
        if (k == max_doublings) throw NonBracketed("no sign change below " + std::to_string(lo));
        hi = lo;
        lo *= 2.0;
        flo = f(lo);
    }
    double fhi = f(hi);
    for (int k = 0; fhi >= 0.0; ++k) {
        if (fhi == 0.0) return {hi, hi, hi, 0};
        if (k == max_doublings) throw NonBracketed("no sign change above " + std::to_string(hi));
        lo = hi;
        hi *= 2.0;
        fhi = f(hi);
    }

    BisectionResult r;
    while (hi - lo > tol) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        double fm = f(mid);
        ++r.iterations;
        if (fm == 0.0) {
            lo = hi = mid;
            break;
        }
        if (fm > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    r.lo = lo;
    r.hi = hi;
    r.root = 0.5 * (lo + hi);
    return r;
}

}  // namespace tmfrac
