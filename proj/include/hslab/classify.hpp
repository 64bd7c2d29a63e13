#ifndef HSLAB_CLASSIFY_HPP
#define HSLAB_CLASSIFY_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "charts.hpp"
#include "constants.hpp"
#include "errors.hpp"
#include "mb.hpp"
#include "pohozaev.hpp"

namespace hslab {

enum class ProfileLabel { Removable, ND, CGS, MB, Unknown };

inline const char* to_string(ProfileLabel l) {
    switch (l) {
        case ProfileLabel::Removable: return "Removable";
        case ProfileLabel::ND: return "ND";
        case ProfileLabel::CGS: return "CGS";
        case ProfileLabel::MB: return "MB";
        default: return "Unknown";
    }
}

struct ClassifyThresholds {
    double z_zero = -1.0;        // Removable: z_limsup below this; <0: 1e-3 * Lambda0
    double nd = 1e-2;            // ND: relative deviation of r^vartheta u from mu^{-1/k}
    double sigma = 1e-4;         // CGS: minimal sigma estimate
    double sigma_spread = 0.1;   // CGS: relative spread of the sigma samples
    double mb_liminf = -1.0;     // MB: z liminf proxy below this; <0: 0.1 * Lambda0
    double mb_P = 1e-4;          // MB: |P-limit| below this
};

struct ProfileEvidence {
    double decades = 0.0;
    bool coverage_ok = false;
    double z_liminf_proxy = 0.0;
    double z_limsup_proxy = 0.0;
    double u_rel_variation = 0.0;       // over the last two decades
    double nd_limit_deviation = -1.0;   // -1 when not applicable
    double sigma_estimate = 0.0;
    double sigma_spread = 0.0;
    PohozaevLimit P_limit;
    int bump_count = 0;
    bool nd_admissible = false;
    bool mb_admissible = false;
    ClassifyThresholds thresholds;
};

struct ProfileClass {
    ProfileLabel label = ProfileLabel::Unknown;
    ProfileEvidence evidence;
};

// Decision tree over the last two decades of radius:
//  (1) flat bounded u with z -> 0                        => Removable
//  (2) r^vartheta u -> mu^{-1/k} (admissible q only)     => ND
//  (3) (z, r z') on a fixed F0-level set, P-limit > 0    => CGS
//  (4) oscillating z, liminf ~ 0, P-limit ~ 0, >=2 bumps => MB
inline ProfileClass classify(const Trajectory& traj_in, const Params& p,
                             const ClassifyThresholds& th_in = {}) {
    p.validate();
    DerivedConstants d = derive_constants(p);
    ClassifyThresholds th = th_in;
    if (th.z_zero < 0.0) th.z_zero = 1e-3 * d.Lambda0;
    if (th.mb_liminf < 0.0) th.mb_liminf = 0.1 * d.Lambda0;

    Trajectory traj = traj_in;
    traj.params = p;
    if (traj.chart.tag != ChartTag::RChart)
        traj = chart_transform(traj, Chart{ChartTag::RChart, LogOrientation::LogR});
    if (!traj.ascending()) std::reverse(traj.samples.begin(), traj.samples.end());

    ProfileClass out;
    ProfileEvidence& ev = out.evidence;
    ev.thresholds = th;
    ev.nd_admissible = d.nd_admissible;
    ev.mb_admissible = d.mb_admissible;

    const double r_lo = traj.samples.front().coord, r_hi = traj.samples.back().coord;
    ev.decades = std::log10(r_hi / r_lo);
    ev.coverage_ok = ev.decades >= 3.0;
    if (!ev.coverage_ok) return out;  // Unknown with coverage flag

    // proxies over the deepest two decades
    const double half = 0.5 * (p.n - 2.0);
    const double r_cut = 100.0 * r_lo;
    double zmin = std::numeric_limits<double>::infinity(), zmax = 0.0;
    double umin = std::numeric_limits<double>::infinity(), umax = 0.0;
    double nd_dev = 0.0;
    std::vector<double> sigmas;
    for (const Sample& s : traj.samples) {
        if (s.coord > r_cut) break;
        const double z = powp(s.coord, half) * s.value;
        const double rzp = powp(s.coord, half) * (half * s.value + s.coord * s.deriv);
        zmin = std::min(zmin, z);
        zmax = std::max(zmax, z);
        umin = std::min(umin, s.value);
        umax = std::max(umax, s.value);
        sigmas.push_back(potential_F0(p, std::max(z, 0.0)) - rzp * rzp);
        if (d.nd_admissible && p.mu > 0.0) {
            const double target = powp(p.mu, -1.0 / d.k);
            nd_dev = std::max(nd_dev,
                              std::abs(powp(s.coord, *d.vartheta) * s.value - target) / target);
        }
    }
    ev.z_liminf_proxy = zmin;
    ev.z_limsup_proxy = zmax;
    ev.u_rel_variation = umax > 0.0 ? (umax - umin) / umax : 0.0;
    if (d.nd_admissible && p.mu > 0.0) ev.nd_limit_deviation = nd_dev;

    std::sort(sigmas.begin(), sigmas.end());
    ev.sigma_estimate = sigmas[sigmas.size() / 2];
    double spread = 0.0;
    for (double s : sigmas) spread = std::max(spread, std::abs(s - ev.sigma_estimate));
    ev.sigma_spread = spread;

    ev.P_limit = pohozaev_limit(traj);
    try {
        ev.bump_count = static_cast<int>(bump_analysis(traj).bumps.size());
    } catch (const validation_error&) {
        ev.bump_count = 0;
    }

    if (ev.z_limsup_proxy < th.z_zero && std::isfinite(umax) &&
        ev.u_rel_variation < 0.1) {
        out.label = ProfileLabel::Removable;
    } else if (d.nd_admissible && p.mu > 0.0 && nd_dev < th.nd) {
        out.label = ProfileLabel::ND;
    } else if (ev.sigma_estimate > th.sigma &&
               ev.sigma_spread < th.sigma_spread * ev.sigma_estimate &&
               ev.P_limit.conclusive && ev.P_limit.value > 0.0) {
        out.label = ProfileLabel::CGS;
    } else if (d.mb_admissible && ev.bump_count >= 2 &&
               ev.z_liminf_proxy <= th.mb_liminf &&
               ev.z_limsup_proxy > th.mb_liminf &&
               ev.P_limit.conclusive && std::abs(ev.P_limit.value) <= th.mb_P) {
        out.label = ProfileLabel::MB;
    } else {
        out.label = ProfileLabel::Unknown;
    }
    return out;
}

}  // namespace hslab

#endif
