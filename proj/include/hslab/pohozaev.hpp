#ifndef HSLAB_POHOZAEV_HPP
#define HSLAB_POHOZAEV_HPP

#include <cmath>
#include <functional>
#include <vector>

#include "charts.hpp"
#include "constants.hpp"
#include "errors.hpp"

namespace hslab {

namespace detail {

// Interpolate the trajectory at radius r in its native chart, return (u, du/dr).
inline Sample sample_at_radius(const Trajectory& traj, double r) {
    double c;
    const Params& p = traj.params;
    switch (traj.chart.tag) {
        case ChartTag::RChart: c = r; break;
        case ChartTag::XiChart: c = powp(r, 0.5 * (2.0 - p.s)); break;
        case ChartTag::LogChart:
            c = traj.chart.orient == LogOrientation::LogR ? std::log(r) : -std::log(r);
            break;
        default: throw validation_error("sample_at_radius: bad chart");
    }
    Sample native = traj.eval(c);
    return convert_sample(traj.chart, Chart{ChartTag::RChart, LogOrientation::LogR}, p, native);
}

// radius range covered by a trajectory, as (r_lo, r_hi)
inline std::pair<double, double> radius_range(const Trajectory& traj) {
    auto radius_of = [&](double c) {
        const Params& p = traj.params;
        switch (traj.chart.tag) {
            case ChartTag::RChart: return c;
            case ChartTag::XiChart: return powp(c, 2.0 / (2.0 - p.s));
            case ChartTag::LogChart:
                return std::exp(traj.chart.orient == LogOrientation::LogR ? c : -c);
            default: throw validation_error("radius_range: bad chart");
        }
    };
    const double ra = radius_of(traj.samples.front().coord);
    const double rb = radius_of(traj.samples.back().coord);
    return {std::min(ra, rb), std::max(ra, rb)};
}

// adaptive Simpson quadrature
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol, int depth = 0, double fa = NAN, double fm = NAN,
                               double fb = NAN) {
    const double m = 0.5 * (a + b);
    if (std::isnan(fa)) fa = f(a);
    if (std::isnan(fm)) fm = f(m);
    if (std::isnan(fb)) fb = f(b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth > 48) return left + right;
    if (std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(f, a, m, 0.5 * tol, depth + 1, fa, flm, fm) +
           adaptive_simpson(f, m, b, 0.5 * tol, depth + 1, fm, frm, fb);
}

}  // namespace detail

// P_r = (omega_{n-1}/2) [ -(r z')^2 + z^2 F_r(z) ]  with z = r^{(n-2)/2} u.
inline double pohozaev_radial(const Trajectory& traj, double r) {
    const Params& p = traj.params;
    auto [rlo, rhi] = detail::radius_range(traj);
    if (!(r >= rlo && r <= rhi))
        throw validation_error("pohozaev_radial: r outside trajectory range");
    Sample s = detail::sample_at_radius(traj, r);
    DerivedConstants d = derive_constants(p);
    const double half = 0.5 * (p.n - 2.0);
    const double z = powp(r, half) * s.value;
    const double rzp = powp(r, half) * (half * s.value + r * s.deriv);
    return 0.5 * d.omega_n_minus_1 * (-rzp * rzp + z * z * potential_FR(p, r, z));
}

// | P_{r2} - P_{r1} - omega_{n-1} c_{mu,q,n} \int_{r1}^{r2} xi^{n-1} u^{q+1} dxi |
inline double pohozaev_increment_residual(const Trajectory& traj, double r1, double r2) {
    if (!(r1 < r2)) throw validation_error("pohozaev_increment_residual: need r1 < r2");
    const Params& p = traj.params;
    DerivedConstants d = derive_constants(p);
    auto integrand = [&](double r) {
        Sample s = detail::sample_at_radius(traj, r);
        return powp(r, p.n - 1.0) * powp(std::max(s.value, 0.0), p.q + 1.0);
    };
    const double I = detail::adaptive_simpson(integrand, r1, r2, 1e-12 * std::max(1.0, r2 - r1));
    const double dP = pohozaev_radial(traj, r2) - pohozaev_radial(traj, r1);
    return std::abs(dP - d.omega_n_minus_1 * d.c_mu_q_n * I);
}

struct PohozaevLimit {
    double value = 0.0;
    double spread = 0.0;
    bool conclusive = false;
};

// r -> 0 limit of P_r by repeated 3-point Richardson on radii (r, r/2, r/4)
// marching down the trajectory.  Requires >= 3 decades of coverage.
inline PohozaevLimit pohozaev_limit(const Trajectory& traj) {
    auto [rlo, rhi] = detail::radius_range(traj);
    PohozaevLimit out;
    if (!(rlo > 0.0) || rhi / rlo < 1e3) {
        out.conclusive = false;
        return out;
    }
    // ladder of halving radii from just below the top down to the bottom
    std::vector<double> rs;
    for (double r = 0.5 * rhi; r >= rlo * (1.0 + 1e-12); r *= 0.5) rs.push_back(r);
    if (rs.size() < 3) {
        out.conclusive = false;
        return out;
    }
    std::vector<double> P(rs.size());
    for (std::size_t i = 0; i < rs.size(); ++i) P[i] = pohozaev_radial(traj, rs[i]);
    // deepest extrapolation with a sanity guard on the decay ratio
    double value = P.back();
    const std::size_t last = rs.size() - 1;
    {
        const double d1 = P[last - 1] - P[last];
        const double d0 = P[last - 2] - P[last - 1];
        const double rho = d0 / d1;
        if (std::isfinite(rho) && rho > 1.2)
            value = P[last] - d1 / (rho - 1.0);
    }
    out.value = value;
    // spread: scatter of the deepest decade of P values around the estimate
    double spread = 0.0;
    for (std::size_t i = 0; i < rs.size(); ++i)
        if (rs[i] <= 10.0 * rs.back())
            spread = std::max(spread, std::abs(P[i] - value));
    out.spread = spread;
    out.conclusive = true;
    return out;
}

// Fowler energy E(t) = (w')^2 - w^2 F_{e^t}(w) on a LogChart (t = log r) trajectory.
inline double fowler_energy(const Trajectory& traj, double t) {
    if (traj.chart.tag != ChartTag::LogChart || traj.chart.orient != LogOrientation::LogR)
        throw validation_error("fowler_energy: LogChart with t = log r required");
    Sample s = traj.eval(t);
    const double w = s.value;
    return s.deriv * s.deriv - w * w * potential_FR(traj.params, std::exp(t), w);
}

// sigma = F0(phi) - (phi')^2, the conserved level of the unperturbed flow.
inline double orbit_sigma(const Params& p, double phi, double dphi) {
    if (!(phi >= 0.0)) throw validation_error("orbit_sigma: phi < 0");
    return potential_F0(p, phi) - dphi * dphi;
}

struct PohozaevReport {
    std::vector<double> r_values;
    std::vector<double> P_r;
    PohozaevLimit limit;
    std::vector<double> increment_residuals;
};

inline PohozaevReport pohozaev_report(const Trajectory& traj, int ladder = 24) {
    auto [rlo, rhi] = detail::radius_range(traj);
    PohozaevReport rep;
    for (int j = 0; j < ladder; ++j) {
        const double r = 0.5 * rhi * std::pow(0.5, j);
        if (r < rlo) break;
        rep.r_values.push_back(r);
        rep.P_r.push_back(pohozaev_radial(traj, r));
    }
    for (std::size_t i = 1; i < rep.r_values.size(); ++i)
        rep.increment_residuals.push_back(
            pohozaev_increment_residual(traj, rep.r_values[i], rep.r_values[i - 1]));
    rep.limit = pohozaev_limit(traj);
    return rep;
}

}  // namespace hslab

#endif
