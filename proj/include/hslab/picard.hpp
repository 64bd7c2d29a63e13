#ifndef HSLAB_PICARD_HPP
#define HSLAB_PICARD_HPP

#include <cmath>
#include <sstream>
#include <vector>

#include "errors.hpp"

namespace hslab {

template <class V>
struct PicardResult {
    V fixed_point;
    std::vector<double> ratios;  // successive-iterate distance ratios
    double final_delta = 0.0;
    int iterations = 0;
};

// Generic contraction-mapping driver: iterate x <- op(x) until the supplied
// distance of successive iterates drops below tol.  Per-step contraction
// ratios are recorded; sustained expansion or max_iter raises numeric_error.
template <class V, class Op, class Dist>
PicardResult<V> picard_iterate(Op&& op, V init, double tol, int max_iter, Dist&& dist) {
    PicardResult<V> res;
    V prev = std::move(init);
    double d_prev = -1.0;
    int expanding_streak = 0;
    for (int it = 0; it < max_iter; ++it) {
        V next = op(prev);
        const double d = dist(next, prev);
        res.iterations = it + 1;
        if (d_prev > 0.0) {
            const double ratio = d / d_prev;
            res.ratios.push_back(ratio);
            if (!std::isfinite(d) || ratio >= 1.05) {
                if (++expanding_streak >= 4 || !std::isfinite(d)) {
                    std::ostringstream os;
                    os << "picard_iterate: divergence after " << res.iterations
                       << " iterations; ratios:";
                    for (double r : res.ratios) os << " " << r;
                    throw numeric_error(os.str());
                }
            } else {
                expanding_streak = 0;
            }
        }
        prev = std::move(next);
        res.final_delta = d;
        if (d < tol) {
            res.fixed_point = std::move(prev);
            return res;
        }
        d_prev = d;
    }
    std::ostringstream os;
    os << "picard_iterate: no convergence in " << max_iter << " iterations (last delta "
       << res.final_delta << "); ratios:";
    for (double r : res.ratios) os << " " << r;
    throw numeric_error(os.str());
}

}  // namespace hslab

#endif
