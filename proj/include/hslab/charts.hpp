#ifndef HSLAB_CHARTS_HPP
#define HSLAB_CHARTS_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "constants.hpp"
#include "errors.hpp"
#include "ode.hpp"

namespace hslab {

// Three coordinate charts for the radial equation:
//   RChart:   (r, u, u')
//   XiChart:  xi = r^{(2-s)/2}, (xi, y, y') with y(xi) = u(r)
//   LogChart: t = log r (or log(1/r)), (t, w, w') with w = r^{(n-2)/2} u
enum class ChartTag { RChart, XiChart, LogChart };
enum class LogOrientation { LogR, LogInvR };

struct Chart {
    ChartTag tag = ChartTag::RChart;
    LogOrientation orient = LogOrientation::LogR;  // meaningful for LogChart only
};

struct Sample {
    double coord;
    double value;
    double deriv;
};

struct TrajEvent {
    std::string kind;  // blow_up, sign_change, z_crossing
    double coord;
};

struct Trajectory {
    Chart chart;
    Params params;
    std::vector<Sample> samples;
    std::vector<TrajEvent> events;
    std::string provenance;

    bool ascending() const {
        return samples.size() < 2 || samples[1].coord > samples[0].coord;
    }
    double coord_min() const {
        return std::min(samples.front().coord, samples.back().coord);
    }
    double coord_max() const {
        return std::max(samples.front().coord, samples.back().coord);
    }

    // cubic Hermite interpolation of (value, deriv) at an arbitrary coordinate
    Sample eval(double c) const {
        if (samples.size() < 2) throw validation_error("Trajectory::eval: too few samples");
        std::vector<Sample> const& ss = samples;
        const bool asc = ascending();
        auto cmp = [asc](const Sample& a, double cc) { return asc ? a.coord < cc : a.coord > cc; };
        if (c < coord_min() || c > coord_max())
            throw validation_error("Trajectory::eval: coordinate outside span");
        auto it = std::lower_bound(ss.begin(), ss.end(), c, cmp);
        std::size_t i = static_cast<std::size_t>(it - ss.begin());
        if (i == 0) i = 1;
        if (i >= ss.size()) i = ss.size() - 1;
        const Sample& s0 = ss[i - 1];
        const Sample& s1 = ss[i];
        const double h = s1.coord - s0.coord;
        const double x = (c - s0.coord) / h;
        const double h00 = (1 + 2 * x) * (1 - x) * (1 - x);
        const double h10 = x * (1 - x) * (1 - x);
        const double h01 = x * x * (3 - 2 * x);
        const double h11 = x * x * (x - 1);
        const double v = h00 * s0.value + h * h10 * s0.deriv + h01 * s1.value + h * h11 * s1.deriv;
        const double d = 6 * x * (x - 1) / h * s0.value + (1 - x) * (1 - 3 * x) * s0.deriv -
                         6 * x * (x - 1) / h * s1.value + x * (3 * x - 2) * s1.deriv;
        return {c, v, d};
    }
};

// Second derivative of the unknown in the given chart at (coord, value, deriv).
inline double rhs_eval(const Chart& chart, const Params& p, double coord, double value,
                       double deriv) {
    if (!(value > 0.0)) throw validation_error("rhs_eval: nonpositive value");
    const double n = p.n, s = p.s;
    const double tss = 2.0 * (n - s) / (n - 2.0);
    switch (chart.tag) {
        case ChartTag::RChart: {
            const double r = coord;
            if (!(r > 0.0)) throw validation_error("rhs_eval: r <= 0");
            return -(n - 1.0) / r * deriv - powp(r, -s) * powp(value, tss - 1.0) +
                   p.mu * powp(value, p.q);
        }
        case ChartTag::XiChart: {
            const double xi = coord;
            if (!(xi > 0.0))
                throw validation_error("rhs_eval: xi <= 0 (use the series seed at the origin)");
            const double a_xi = (2.0 * n - s - 2.0) / (2.0 - s);
            const double c = 4.0 / ((2.0 - s) * (2.0 - s));
            return -a_xi / xi * deriv -
                   c * (powp(value, tss - 1.0) -
                        p.mu * powp(xi, 2.0 * s / (2.0 - s)) * powp(value, p.q));
        }
        case ChartTag::LogChart: {
            const double lambda = 0.5 * (n - 2.0) * (2.0 * n / (n - 2.0) - 1.0 - p.q);
            const double sgn = chart.orient == LogOrientation::LogR ? 1.0 : -1.0;
            return potential_f(p, value) + p.mu * std::exp(sgn * lambda * coord) * powp(value, p.q);
        }
    }
    throw validation_error("rhs_eval: bad chart");
}

struct TrajEventSpec {
    std::string kind;     // "blow_up", "sign_change", "z_crossing"
    double level = 0.0;   // ceiling for blow_up, z-level for z_crossing
};

namespace detail {
// Same formulas as rhs_eval but with the value clamped at 0, so that stages
// probing slightly past a positivity loss do not abort the step; the
// sign_change event still terminates the integration at the crossing.
inline double rhs_clamped(const Chart& chart, const Params& p, double coord, double value,
                          double deriv) {
    return rhs_eval(chart, p, coord, std::max(value, 0.0) + (value > 0.0 ? 0.0 : 1e-300), deriv);
}
}  // namespace detail

namespace detail {
inline double z_of(const Chart& chart, const Params& p, double coord, double value) {
    const double half = 0.5 * (p.n - 2.0);
    switch (chart.tag) {
        case ChartTag::RChart: return powp(coord, half) * value;
        case ChartTag::XiChart: return powp(coord, 2.0 * half / (2.0 - p.s)) * value;
        case ChartTag::LogChart: return value;  // w is z already
    }
    return value;
}
}  // namespace detail

// Adaptive integration in a chart; samples are the accepted steps.
inline Trajectory integrate(const Chart& chart, const Params& p, Sample initial, double coord_end,
                            const OdeOptions& opts = {},
                            const std::vector<TrajEventSpec>& especs = {}) {
    p.validate();
    if (!(initial.value > 0.0)) throw validation_error("integrate: initial value <= 0");
    if (!(coord_end > initial.coord)) throw validation_error("integrate: need ascending span");

    OdeRhs rhs = [&chart, &p](double c, const Vec& y, Vec& dydc) {
        dydc.resize(2);
        dydc[0] = y[1];
        dydc[1] = detail::rhs_clamped(chart, p, c, y[0], y[1]);
    };
    std::vector<EventSpec> evs;
    // positivity loss always terminates
    evs.push_back({"sign_change", [](double, const Vec& y) { return y[0]; }, true, -1});
    for (const auto& es : especs) {
        if (es.kind == "blow_up") {
            const double ceil = es.level;
            evs.push_back({"blow_up", [ceil](double, const Vec& y) { return y[0] - ceil; }, true, +1});
        } else if (es.kind == "z_crossing") {
            const double lv = es.level;
            Chart ch = chart;
            Params pp = p;
            evs.push_back({"z_crossing",
                           [ch, pp, lv](double c, const Vec& y) {
                               return detail::z_of(ch, pp, c, y[0]) - lv;
                           },
                           false, 0});
        } else {
            throw validation_error("integrate: unknown event kind " + es.kind);
        }
    }
    OdeSolution sol = integrate_ode(rhs, initial.coord, coord_end, {initial.value, initial.deriv},
                                    opts, evs);
    Trajectory traj;
    traj.chart = chart;
    traj.params = p;
    traj.provenance = "integrate";
    traj.samples.reserve(sol.t.size());
    for (std::size_t i = 0; i < sol.t.size(); ++i)
        traj.samples.push_back({sol.t[i], sol.y[i][0], sol.y[i][1]});
    for (const auto& e : sol.events) traj.events.push_back({e.kind, e.t});
    return traj;
}

// Pointwise algebraic conversion between charts (chain rule on derivatives).
inline Sample convert_sample(const Chart& from, const Chart& to, const Params& p, Sample s) {
    const double n = p.n, sx = p.s;
    const double half = 0.5 * (n - 2.0);
    // chart -> (r, u, du/dr)
    double r, u, du;
    switch (from.tag) {
        case ChartTag::RChart:
            r = s.coord; u = s.value; du = s.deriv;
            break;
        case ChartTag::XiChart: {
            r = powp(s.coord, 2.0 / (2.0 - sx));
            u = s.value;
            du = s.deriv * 0.5 * (2.0 - sx) * powp(r, -0.5 * sx);
            break;
        }
        case ChartTag::LogChart: {
            const double sgn = from.orient == LogOrientation::LogR ? 1.0 : -1.0;
            r = std::exp(sgn * s.coord);
            u = s.value * powp(r, -half);
            // dw/dt = sgn * r dz/dr,  z' = half r^{half-1} u + r^{half} u'
            du = (sgn * s.deriv / r - half * powp(r, half - 1.0) * u) * powp(r, -half);
            break;
        }
        default: throw validation_error("convert_sample: bad source chart");
    }
    // (r, u, du/dr) -> target
    switch (to.tag) {
        case ChartTag::RChart: return {r, u, du};
        case ChartTag::XiChart: {
            const double xi = powp(r, 0.5 * (2.0 - sx));
            return {xi, u, du * 2.0 / (2.0 - sx) * powp(r, 0.5 * sx)};
        }
        case ChartTag::LogChart: {
            const double sgn = to.orient == LogOrientation::LogR ? 1.0 : -1.0;
            const double w = powp(r, half) * u;
            const double dzdr = half * powp(r, half - 1.0) * u + powp(r, half) * du;
            return {sgn * std::log(r), w, sgn * r * dzdr};
        }
    }
    throw validation_error("convert_sample: bad target chart");
}

inline Trajectory chart_transform(const Trajectory& traj, const Chart& target) {
    Trajectory out;
    out.chart = target;
    out.params = traj.params;
    out.provenance = traj.provenance + " | chart_transform";
    out.samples.reserve(traj.samples.size());
    for (const auto& s : traj.samples)
        out.samples.push_back(convert_sample(traj.chart, target, traj.params, s));
    for (const auto& e : traj.events) {
        Sample conv = convert_sample(traj.chart, target, traj.params, traj.eval(e.coord));
        out.events.push_back({e.kind, conv.coord});
    }
    return out;
}

// Unique removable-singularity solution with u(0+) = gamma, via the xi-chart
// series seed  y(xi) = gamma + y''(0) xi^2/2,  y''(0) = -2 gamma^{2*(s)-1}/((n-s)(2-s)).
inline Trajectory shoot_removable(const Params& p, double gamma, double r_max,
                                  const OdeOptions& opts = {}, double seed_factor = 1e-4,
                                  double ceiling_factor = 1e8) {
    p.validate();
    if (!(gamma > 0.0)) throw validation_error("shoot_removable: gamma <= 0");
    if (!(r_max > 0.0)) throw validation_error("shoot_removable: r_max <= 0");
    const double n = p.n, s = p.s;
    const double tss = 2.0 * (n - s) / (n - 2.0);
    const double y2 = -2.0 * powp(gamma, tss - 1.0) / ((n - s) * (2.0 - s));
    const double xi0 = seed_factor * std::sqrt(gamma / std::abs(y2));
    const double xi_max = powp(r_max, 0.5 * (2.0 - s));
    if (!(xi_max > xi0))
        throw validation_error("shoot_removable: r_max inside the series seed radius");
    Chart xi{ChartTag::XiChart, LogOrientation::LogR};
    Sample init{xi0, gamma + 0.5 * y2 * xi0 * xi0, y2 * xi0};
    std::vector<TrajEventSpec> evs{{"blow_up", ceiling_factor * gamma}};
    Trajectory txi = integrate(xi, p, init, xi_max, opts, evs);
    Trajectory tr = chart_transform(txi, Chart{ChartTag::RChart, LogOrientation::LogR});
    tr.provenance = "shoot_removable gamma=" + std::to_string(gamma);
    return tr;
}

// Kelvin transform: u on (r1, r2) -> rho^{2-n} u(1/rho) on (1/r2, 1/r1).
inline Trajectory kelvin_transform(const Trajectory& traj) {
    if (traj.chart.tag != ChartTag::RChart)
        throw validation_error("kelvin_transform: RChart source required");
    const double n = traj.params.n;
    Trajectory out;
    out.chart = traj.chart;
    out.params = traj.params;
    out.provenance = traj.provenance + " | kelvin";
    out.samples.reserve(traj.samples.size());
    const bool asc = traj.ascending();
    auto push = [&](const Sample& s) {
        const double rho = 1.0 / s.coord;
        const double v = powp(rho, 2.0 - n) * s.value;
        const double d = (2.0 - n) * powp(rho, 1.0 - n) * s.value - powp(rho, -n) * s.deriv;
        out.samples.push_back({rho, v, d});
    };
    if (asc)
        for (auto it = traj.samples.rbegin(); it != traj.samples.rend(); ++it) push(*it);
    else
        for (const auto& s : traj.samples) push(s);
    return out;
}

// Re-orient a LogChart trajectory between t = log r and t = log(1/r).
inline Trajectory reorient_log(const Trajectory& traj, LogOrientation target) {
    if (traj.chart.tag != ChartTag::LogChart)
        throw validation_error("reorient_log: LogChart required");
    if (traj.chart.orient == target) return traj;
    Trajectory out;
    out.chart = traj.chart;
    out.chart.orient = target;
    out.params = traj.params;
    out.provenance = traj.provenance + " | reorient";
    out.samples.reserve(traj.samples.size());
    for (auto it = traj.samples.rbegin(); it != traj.samples.rend(); ++it)
        out.samples.push_back({-it->coord, it->value, -it->deriv});
    for (const auto& e : traj.events) out.events.push_back({e.kind, -e.coord});
    return out;
}

}  // namespace hslab

#endif
