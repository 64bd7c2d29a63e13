#ifndef HSLAB_ODE_HPP
#define HSLAB_ODE_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "errors.hpp"

namespace hslab {

using Vec = std::vector<double>;
using OdeRhs = std::function<void(double, const Vec&, Vec&)>;

struct OdeOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
    double h_init = 0.0;       // 0 => automatic
    double h_max = 0.0;        // 0 => span
    long max_steps = 50000000;
    double event_tol = 1e-10;  // bisection tolerance for event coordinates
};

struct EventSpec {
    std::string kind;                                  // e.g. "blow_up", "sign_change"
    std::function<double(double, const Vec&)> g;       // event at sign change of g
    bool terminal = false;
    int direction = 0;  // +1: only -..+ crossings, -1: only +..-, 0: both
};

struct OdeEvent {
    std::string kind;
    double t;
    Vec y;
};

// Solution with derivative samples at every accepted step; evaluation between
// nodes is cubic Hermite (4th order, consistent with the step tolerance).
struct OdeSolution {
    std::vector<double> t;
    std::vector<Vec> y;
    std::vector<Vec> dy;
    std::vector<OdeEvent> events;
    bool terminated_by_event = false;
    std::string terminal_kind;

    std::size_t dim() const { return y.empty() ? 0 : y.front().size(); }

    // index of interval containing tq
    std::size_t locate(double tq) const {
        if (t.size() < 2 || tq < t.front() || tq > t.back())
            throw validation_error("OdeSolution::locate: query outside sampled span");
        auto it = std::upper_bound(t.begin(), t.end(), tq);
        std::size_t i = static_cast<std::size_t>(it - t.begin());
        if (i == 0) i = 1;
        if (i >= t.size()) i = t.size() - 1;
        return i - 1;
    }

    void hermite(std::size_t i, double tq, Vec* val, Vec* der) const {
        const double h = t[i + 1] - t[i];
        const double x = (tq - t[i]) / h;
        const double h00 = (1 + 2 * x) * (1 - x) * (1 - x);
        const double h10 = x * (1 - x) * (1 - x);
        const double h01 = x * x * (3 - 2 * x);
        const double h11 = x * x * (x - 1);
        const double d00 = 6 * x * (x - 1) / h;
        const double d10 = (1 - x) * (1 - 3 * x);
        const double d01 = -6 * x * (x - 1) / h;
        const double d11 = x * (3 * x - 2);
        std::size_t m = dim();
        if (val) val->resize(m);
        if (der) der->resize(m);
        for (std::size_t j = 0; j < m; ++j) {
            if (val)
                (*val)[j] = h00 * y[i][j] + h * h10 * dy[i][j] + h01 * y[i + 1][j] + h * h11 * dy[i + 1][j];
            if (der)
                (*der)[j] = d00 * y[i][j] + d10 * dy[i][j] + d01 * y[i + 1][j] + d11 * dy[i + 1][j];
        }
    }

    Vec eval(double tq) const {
        Vec v;
        hermite(locate(tq), tq, &v, nullptr);
        return v;
    }
    Vec eval_deriv(double tq) const {
        Vec d;
        hermite(locate(tq), tq, nullptr, &d);
        return d;
    }
};

namespace detail {
// Dormand-Prince 5(4) tableau
inline constexpr double dp_c[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
inline constexpr double dp_a[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
inline constexpr double dp_b5[7] = {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84, 0.0};
inline constexpr double dp_b4[7] = {5179.0 / 57600, 0.0,          7571.0 / 16695, 393.0 / 640,
                                    -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};
}  // namespace detail

// Adaptive Dormand-Prince integration of y' = rhs(t, y) over [t0, t1], t1 > t0.
// Events are detected on accepted steps and bisection-refined on the Hermite
// interpolant; a terminal event truncates the solution at the event coordinate.
inline OdeSolution integrate_ode(const OdeRhs& rhs, double t0, double t1, const Vec& y0,
                                 const OdeOptions& opts = {},
                                 const std::vector<EventSpec>& events = {}) {
    if (!(t1 > t0)) throw validation_error("integrate_ode: need t1 > t0");
    const std::size_t m = y0.size();
    OdeSolution sol;
    sol.t.push_back(t0);
    sol.y.push_back(y0);
    Vec f0(m);
    rhs(t0, y0, f0);
    sol.dy.push_back(f0);

    const double span = t1 - t0;
    const double h_max = opts.h_max > 0.0 ? opts.h_max : span;
    double h = opts.h_init > 0.0 ? opts.h_init : std::min(h_max, 1e-3 * span);

    std::vector<double> gprev(events.size());
    for (std::size_t e = 0; e < events.size(); ++e) gprev[e] = events[e].g(t0, y0);

    Vec k[7], ytmp(m), ynew(m), err(m), fnew(m);
    for (auto& kk : k) kk.resize(m);
    k[0] = f0;

    double t = t0;
    Vec y = y0;
    long steps = 0;
    while (t < t1) {
        if (++steps > opts.max_steps)
            throw numeric_error("integrate_ode: max step count exceeded at t=" + std::to_string(t));
        if (t + h > t1) h = t1 - t;
        // floor relative to the current coordinate: integrations seeded at a
        // tiny t0 (deep shooting seeds) legitimately need steps far below
        // eps * span while t is still small
        const double h_floor = 16.0 * std::numeric_limits<double>::epsilon() *
                               std::max(std::abs(t), 1e-12 * span);
        if (h < h_floor)
            throw numeric_error("integrate_ode: step size underflow at t=" + std::to_string(t));

        // stages (k[0] is FSAL from the previous step)
        bool stage_ok = true;
        for (int i = 1; i < 7 && stage_ok; ++i) {
            for (std::size_t j = 0; j < m; ++j) {
                double acc = 0.0;
                for (int l = 0; l < i; ++l) acc += detail::dp_a[i][l] * k[l][j];
                ytmp[j] = y[j] + h * acc;
            }
            try {
                rhs(t + detail::dp_c[i] * h, ytmp, k[i]);
            } catch (const validation_error&) {
                stage_ok = false;  // stepped outside the rhs domain: retry smaller
            }
            for (std::size_t j = 0; j < m && stage_ok; ++j)
                if (!std::isfinite(k[i][j])) stage_ok = false;
        }
        if (!stage_ok) {
            h *= 0.25;
            continue;
        }
        double errnorm = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            double y5 = 0.0, e4 = 0.0;
            for (int i = 0; i < 7; ++i) {
                y5 += detail::dp_b5[i] * k[i][j];
                e4 += (detail::dp_b5[i] - detail::dp_b4[i]) * k[i][j];
            }
            ynew[j] = y[j] + h * y5;
            const double sc = opts.atol + opts.rtol * std::max(std::abs(y[j]), std::abs(ynew[j]));
            const double r = h * e4 / sc;
            errnorm += r * r;
        }
        errnorm = std::sqrt(errnorm / m);
        if (!(errnorm <= 1.0)) {
            h *= std::max(0.2, 0.9 * std::pow(errnorm, -0.2));
            continue;
        }
        // accept
        const double tnew = t + h;
        fnew = k[6];  // FSAL: stage 7 is rhs at (tnew, ynew)
        sol.t.push_back(tnew);
        sol.y.push_back(ynew);
        sol.dy.push_back(fnew);

        // event sweep on this step
        bool stop = false;
        for (std::size_t e = 0; e < events.size() && !stop; ++e) {
            const double g1 = events[e].g(tnew, ynew);
            const double g0 = gprev[e];
            const bool crossed = (g0 < 0.0 && g1 >= 0.0 && events[e].direction >= 0) ||
                                 (g0 > 0.0 && g1 <= 0.0 && events[e].direction <= 0);
            gprev[e] = g1;
            if (!crossed || g0 == 0.0) continue;
            // bisection on the Hermite interpolant of the last step
            const std::size_t seg = sol.t.size() - 2;
            double lo = t, hi = tnew, glo = g0;
            Vec mid;
            while (hi - lo > opts.event_tol) {
                const double mc = 0.5 * (lo + hi);
                sol.hermite(seg, mc, &mid, nullptr);
                const double gm = events[e].g(mc, mid);
                if ((glo < 0.0) == (gm < 0.0)) {
                    lo = mc;
                    glo = gm;
                } else {
                    hi = mc;
                }
            }
            const double te = 0.5 * (lo + hi);
            sol.hermite(seg, te, &mid, nullptr);
            sol.events.push_back({events[e].kind, te, mid});
            if (events[e].terminal) {
                // truncate the final node at the event coordinate
                Vec dmid;
                sol.hermite(seg, te, nullptr, &dmid);
                sol.t.back() = te;
                sol.y.back() = mid;
                sol.dy.back() = dmid;
                sol.terminated_by_event = true;
                sol.terminal_kind = events[e].kind;
                stop = true;
            }
        }
        if (stop) break;

        t = tnew;
        y = ynew;
        k[0] = fnew;
        h = std::min({h * std::min(5.0, std::max(0.2, 0.9 * std::pow(std::max(errnorm, 1e-10), -0.2))),
                      h_max});
    }
    return sol;
}

}  // namespace hslab

#endif
