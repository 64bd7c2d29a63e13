#ifndef HSLAB_MB_HPP
#define HSLAB_MB_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include "charts.hpp"
#include "constants.hpp"
#include "errors.hpp"
#include "pohozaev.hpp"

namespace hslab {

struct MbOptions {
    double Lambda = 1.0;            // a-priori bound level, must exceed Lambda0
    std::vector<double> gammas;     // increasing schedule; default 10, 10^2, ..., 10^6
    double r_min = 0.0;             // reporting cutoff (0: keep everything)
    double r_max = -1.0;            // continuation radius; <0: use R_Lambda
    double bound_tol = 1e-9;        // sampling tolerance for z <= Lambda
    int cauchy_samples = 64;        // log-spaced points per dyadic interval
    int cauchy_intervals = 6;
};

struct CompactMetric {
    double r_lo = 0.0, r_hi = 0.0;
    std::vector<double> sup_diff;  // sup |u_{i+1} - u_i| per successive pair
    bool decreasing = false;
};

struct ContinuationRun {
    std::vector<double> gammas;
    std::vector<Trajectory> members;  // RChart, restricted to [r_min, r_max]
    Trajectory limit_candidate;       // deepest member
    double Lambda = 0.0;
    double r_max = 0.0;
    double sup_z = 0.0;
    bool bound_ok = false;
    std::vector<CompactMetric> metrics;
    bool inconclusive = false;  // Cauchy trend not monotone on some compact
};

namespace detail {
inline double z_at(const Trajectory& traj, double r) {
    Sample s = detail::sample_at_radius(traj, r);
    return powp(r, 0.5 * (traj.params.n - 2.0)) * s.value;
}

inline Trajectory restrict_radii(const Trajectory& traj, double r_min, double r_max) {
    Trajectory out = traj;
    out.samples.clear();
    for (const Sample& s : traj.samples)
        if (s.coord >= r_min && s.coord <= r_max * (1.0 + 1e-12)) out.samples.push_back(s);
    if (out.samples.size() < 2)
        throw numeric_error("restrict_radii: trajectory empty after restriction");
    return out;
}
}  // namespace detail

// gamma-continuation of removable shoots toward a multi-bump candidate.
inline ContinuationRun mb_continuation(const Params& p, const MbOptions& opt_in = {}) {
    p.validate();
    DerivedConstants d = derive_constants(p);
    MbOptions opt = opt_in;
    if (opt.gammas.empty())
        for (double g = 10.0; g <= 1.0000001e6; g *= 10.0) opt.gammas.push_back(g);
    if (!std::is_sorted(opt.gammas.begin(), opt.gammas.end()))
        throw validation_error("mb_continuation: gamma schedule must be increasing");
    const bool perturbed = p.mu > 0.0;
    if (perturbed && !d.mb_admissible)
        throw validation_error("mb_continuation: q outside (2*-2, 2*-1)");
    if (!(opt.Lambda > d.Lambda0))
        throw validation_error("mb_continuation: need Lambda > Lambda0");

    ContinuationRun run;
    run.Lambda = opt.Lambda;
    if (opt.r_max > 0.0) {
        run.r_max = opt.r_max;
    } else {
        if (!(p.mu > 0.0))
            throw validation_error("mb_continuation: R_Lambda undefined for mu = 0; pass r_max");
        run.r_max = radius_thresholds(p, opt.Lambda).R_Lambda;
    }

    for (double g : opt.gammas) {
        Trajectory full = shoot_removable(p, g, run.r_max);
        run.gammas.push_back(g);
        run.members.push_back(detail::restrict_radii(full, opt.r_min, run.r_max));
    }

    // a priori bound z <= Lambda on every member
    run.sup_z = 0.0;
    for (const Trajectory& traj : run.members)
        for (const Sample& s : traj.samples)
            run.sup_z = std::max(run.sup_z, powp(s.coord, 0.5 * (p.n - 2.0)) * s.value);
    run.bound_ok = run.sup_z <= opt.Lambda + opt.bound_tol;
    if (!run.bound_ok)
        throw numeric_error("mb_continuation: a priori bound z <= Lambda violated; "
                            "retry with a smaller continuation radius");

    // Cauchy differences of successive members on dyadic compacts of (r_min, r_max]
    for (int kdy = 0; kdy < opt.cauchy_intervals; ++kdy) {
        CompactMetric cm;
        cm.r_hi = run.r_max * std::pow(0.5, kdy);
        cm.r_lo = 0.5 * cm.r_hi;
        if (cm.r_lo <= opt.r_min) break;
        bool coverable = true;
        for (const Trajectory& traj : run.members)
            if (traj.samples.front().coord > cm.r_lo) coverable = false;
        if (!coverable) break;
        for (std::size_t i = 0; i + 1 < run.members.size(); ++i) {
            double sup = 0.0;
            for (int j = 0; j < opt.cauchy_samples; ++j) {
                const double r =
                    cm.r_lo * powp(cm.r_hi / cm.r_lo, j / (opt.cauchy_samples - 1.0));
                sup = std::max(sup, std::abs(detail::sample_at_radius(run.members[i + 1], r).value -
                                             detail::sample_at_radius(run.members[i], r).value));
            }
            cm.sup_diff.push_back(sup);
        }
        cm.decreasing = true;
        for (std::size_t i = 1; i < cm.sup_diff.size(); ++i)
            if (cm.sup_diff[i] > cm.sup_diff[i - 1]) cm.decreasing = false;
        if (!cm.decreasing) run.inconclusive = true;
        run.metrics.push_back(std::move(cm));
    }
    run.limit_candidate = run.members.back();
    return run;
}

struct Bump {
    double r_peak = 0.0;
    double z_peak = 0.0;
    double u_peak = 0.0;
    double prominence = 0.0;
    double eta = 0.0;               // fitted bubble scale
    double peak_rel_dev = 0.0;      // |u - U_eta| / U_eta at the peak
    double halfwidth_rel_dev = 0.0; // max of the same over the half-height window
    double r_lo = 0.0, r_hi = 0.0;  // half-height window
};

struct BumpAnalysis {
    std::vector<Bump> bumps;             // descending r (outermost first)
    std::vector<double> spacing_ratios;  // r_{k+1} / r_k along descending radii
};

namespace detail {
// minimize g over [a, b] by golden section
inline double golden_min(const std::function<double(double)>& g, double a, double b) {
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - gr * (b - a), e = a + gr * (b - a);
    double fc = g(c), fe = g(e);
    for (int it = 0; it < 200 && (b - a) > 1e-12 * (std::abs(a) + std::abs(b)); ++it) {
        if (fc < fe) {
            b = e; e = c; fe = fc;
            c = b - gr * (b - a); fc = g(c);
        } else {
            a = c; c = e; fc = fe;
            e = a + gr * (b - a); fe = g(e);
        }
    }
    return 0.5 * (a + b);
}
}  // namespace detail

// Locate bubble-like bumps of z(r) = r^{(n-2)/2} u(r) and fit each against a
// standard bubble U_eta.
inline BumpAnalysis bump_analysis(const Trajectory& traj) {
    if (traj.chart.tag != ChartTag::RChart)
        throw validation_error("bump_analysis: RChart trajectory required");
    const Params& p = traj.params;
    DerivedConstants d = derive_constants(p);
    const std::size_t N = traj.samples.size();
    if (N < 8) throw validation_error("bump_analysis: too few samples");
    const double r_lo = traj.samples.front().coord, r_hi = traj.samples.back().coord;
    if (!(r_hi / r_lo >= 1e3))
        throw validation_error("bump_analysis: need >= 3 decades of radius coverage");

    std::vector<double> z(N);
    for (std::size_t i = 0; i < N; ++i)
        z[i] = powp(traj.samples[i].coord, 0.5 * (p.n - 2.0)) * traj.samples[i].value;

    const double prominence_floor = 0.1 * d.Lambda0;
    BumpAnalysis out;
    std::vector<std::size_t> peaks;
    std::vector<double> prominences;
    for (std::size_t i = 1; i + 1 < N; ++i) {
        if (!(z[i] >= z[i - 1] && z[i] > z[i + 1])) continue;
        // prominence: drop to the higher of the two flanking valleys bounded by
        // the nearest samples exceeding the peak
        double left_min = z[i], right_min = z[i];
        for (std::size_t j = i; j-- > 0;) {
            left_min = std::min(left_min, z[j]);
            if (z[j] > z[i]) break;
        }
        for (std::size_t j = i + 1; j < N; ++j) {
            right_min = std::min(right_min, z[j]);
            if (z[j] > z[i]) break;
        }
        const double prom = z[i] - std::max(left_min, right_min);
        if (prom < prominence_floor) continue;
        peaks.push_back(i);
        prominences.push_back(prom);
    }
    std::reverse(peaks.begin(), peaks.end());  // outermost bump first
    std::reverse(prominences.begin(), prominences.end());

    for (std::size_t ip = 0; ip < peaks.size(); ++ip) {
        const std::size_t pk = peaks[ip];
        Bump b;
        b.r_peak = traj.samples[pk].coord;
        b.z_peak = z[pk];
        b.u_peak = traj.samples[pk].value;
        b.prominence = prominences[ip];
        // half-height window around the peak
        std::size_t lo = pk, hi = pk;
        while (lo > 0 && z[lo - 1] >= 0.5 * b.z_peak && z[lo - 1] <= z[lo]) --lo;
        while (hi + 1 < N && z[hi + 1] >= 0.5 * b.z_peak && z[hi + 1] <= z[hi]) ++hi;
        b.r_lo = traj.samples[lo].coord;
        b.r_hi = traj.samples[hi].coord;
        // fit eta by minimizing the worst relative deviation over the window
        auto dev = [&](double eta) {
            double worst = 0.0;
            for (std::size_t j = lo; j <= hi; ++j) {
                const double U = bubble_eval(p, eta, traj.samples[j].coord);
                worst = std::max(worst, std::abs(traj.samples[j].value - U) / U);
            }
            return worst;
        };
        b.eta = detail::golden_min(dev, 0.25 * b.r_peak, 4.0 * b.r_peak);
        b.halfwidth_rel_dev = dev(b.eta);
        const double Upk = bubble_eval(p, b.eta, b.r_peak);
        b.peak_rel_dev = std::abs(b.u_peak - Upk) / Upk;
        out.bumps.push_back(b);
    }
    for (std::size_t i = 0; i + 1 < out.bumps.size(); ++i)
        out.spacing_ratios.push_back(out.bumps[i + 1].r_peak / out.bumps[i].r_peak);
    return out;
}

struct CurvatureDiagnostics {
    std::vector<double> r;        // descending (shrinking radius)
    std::vector<double> K;        // K(r) = 1 - mu r^s u^{q - 2*(s) + 1}
    std::vector<double> rK;       // r^{1-ell} |K'(r)|
    std::vector<double> run_inf;  // running inf of rK over shrinking r
    std::vector<double> run_sup;  // running sup
    double C = 0.0;               // C_{s,ell} = 2(s - ell)/(n - 2)
};

// Scalar-curvature-style diagnostic along a candidate trajectory.
inline CurvatureDiagnostics curvature_diagnostics(const Trajectory& traj, const Params& p,
                                                  double ell) {
    if (traj.chart.tag != ChartTag::RChart)
        throw validation_error("curvature_diagnostics: RChart trajectory required");
    if (ell == p.s) throw validation_error("curvature_diagnostics: ell = s not allowed");
    if (!(ell > 0.0 && ell < std::min(0.5 * (p.n - 2.0), 2.0)))
        throw validation_error("curvature_diagnostics: ell outside (0, min{(n-2)/2, 2})");
    DerivedConstants d = derive_constants(p);
    const double q_expected = d.two_star - 1.0 - 2.0 * ell / (p.n - 2.0);
    if (std::abs(p.q - q_expected) > 1e-9)
        throw validation_error("curvature_diagnostics: q inconsistent with ell");

    CurvatureDiagnostics out;
    out.C = 2.0 * (p.s - ell) / (p.n - 2.0);
    const double k = p.q - d.two_star_s + 1.0;
    double rinf = std::numeric_limits<double>::infinity(), rsup = 0.0;
    for (std::size_t idx = traj.samples.size(); idx-- > 0;) {  // shrinking r
        const Sample& s = traj.samples[idx];
        const double r = s.coord, u = s.value;
        const double zz = powp(r, 0.5 * (p.n - 2.0)) * u;
        const double dz = powp(r, 0.5 * (p.n - 2.0)) * (0.5 * (p.n - 2.0) * u / r + s.deriv);
        const double K = 1.0 - p.mu * powp(r, p.s) * powp(u, k);
        const double rK = p.mu * powp(zz, out.C) * std::abs(ell + out.C * r * dz / zz);
        rinf = std::min(rinf, rK);
        rsup = std::max(rsup, rK);
        out.r.push_back(r);
        out.K.push_back(K);
        out.rK.push_back(rK);
        out.run_inf.push_back(rinf);
        out.run_sup.push_back(rsup);
    }
    return out;
}

}  // namespace hslab

#endif
