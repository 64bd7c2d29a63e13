#ifndef HSLAB_CGS_HPP
#define HSLAB_CGS_HPP

#include <cmath>
#include <limits>
#include <vector>

#include "charts.hpp"
#include "constants.hpp"
#include "errors.hpp"
#include "orbits.hpp"
#include "picard.hpp"

namespace hslab {

// Pair of functions on a uniform grid [T0, T_max], measured in the weighted
// sup norm  sup_t e^{rate t} (|f1| + |f2|)  with rate = lambda/2.
struct WeightedPath {
    double T0 = 0.0;
    double h = 0.0;
    double rate = 0.0;
    // The weight saturates beyond weight_cap: past the kept horizon the
    // iterates decay like e^{-lambda t} and the growing weight would only
    // amplify round-off of the tail pad to above any usable tolerance.
    double weight_cap = std::numeric_limits<double>::infinity();
    std::vector<double> f1, f2;

    double t_at(std::size_t i) const { return T0 + h * static_cast<double>(i); }
    double weight_at(std::size_t i) const { return std::exp(rate * std::min(t_at(i), weight_cap)); }
    double weighted_norm() const {
        double m = 0.0;
        for (std::size_t i = 0; i < f1.size(); ++i) {
            const double w = weight_at(i) * (std::abs(f1[i]) + std::abs(f2[i]));
            if (w > m) m = w;
        }
        return m;
    }
};

inline double weighted_distance(const WeightedPath& a, const WeightedPath& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.f1.size(); ++i) {
        const double w = a.weight_at(i) *
                         (std::abs(a.f1[i] - b.f1[i]) + std::abs(a.f2[i] - b.f2[i]));
        if (w > m) m = w;
    }
    return m;
}

struct CgsCertificate {
    std::vector<double> ratios;
    double weighted_norm = 0.0;
    double residual = 0.0;       // sup-norm ODE residual of the reconstructed (V, W)
    double T0_used = 0.0;
    double T_max_used = 0.0;
    int t0_escalations = 0;
    std::string regime;          // "step1" or "step2"
};

// Margin separating the generic-orbit regime from the near-maximum regime.
// The split point is only known to exist; this default is a tunable, chosen so
// the measured step-1 contraction ratio stays comfortably below 1 up to the
// overlap band [sigma_bar - 2 margin, sigma_bar - margin].
inline constexpr double kCgsSigmaMarginFrac = 1e-3;

namespace detail {

// cumulative integral from the right on a uniform grid, 4th-order sliding
// Newton-Cotes per interval
inline std::vector<double> cumulative_from_right(const std::vector<double>& v, double h) {
    const std::size_t n = v.size();
    std::vector<double> I(n, 0.0);
    if (n < 4) throw validation_error("cumulative_from_right: grid too short");
    for (std::size_t i = n - 1; i-- > 0;) {
        double seg;
        if (i == 0)
            seg = h / 24.0 * (9.0 * v[0] + 19.0 * v[1] - 5.0 * v[2] + v[3]);
        else if (i + 2 >= n)
            seg = h / 24.0 * (v[i - 2] - 5.0 * v[i - 1] + 19.0 * v[i] + 9.0 * v[i + 1]);
        else
            seg = h / 24.0 * (-v[i - 1] + 13.0 * v[i] + 13.0 * v[i + 1] - v[i + 2]);
        I[i] = I[i + 1] + seg;
    }
    return I;
}

// 4th-order central finite difference of a uniform-grid sequence
inline std::vector<double> fd_derivative(const std::vector<double>& v, double h) {
    const std::size_t n = v.size();
    std::vector<double> d(n, 0.0);
    for (std::size_t i = 2; i + 2 < n; ++i)
        d[i] = (v[i - 2] - 8.0 * v[i - 1] + 8.0 * v[i + 1] - v[i + 2]) / (12.0 * h);
    if (n >= 5) {
        d[0] = d[2];
        d[1] = d[2];
        d[n - 1] = d[n - 3];
        d[n - 2] = d[n - 3];
    }
    return d;
}

struct OrbitNodes {
    std::vector<double> phi, dphi, ds, dds, fp;  // phi, phi', d_sigma phi, d_sigma phi', f'(phi)
};

inline OrbitNodes orbit_nodes(const Params& p, const OrbitSpec& spec, double T0, double h,
                              std::size_t n, bool with_derivs) {
    auto od = get_orbit(p, spec.sigma);
    const double shift = orbit_shift(*od, spec);
    OrbitNodes on;
    on.phi.resize(n);
    on.dphi.resize(n);
    on.ds.resize(n);
    on.dds.resize(n);
    on.fp.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        OrbitPoint pt = od->eval_local(T0 + h * i - shift);
        on.phi[i] = pt.phi;
        on.dphi[i] = pt.dphi;
        on.ds[i] = with_derivs ? pt.dphi_dsigma : 0.0;
        on.dds[i] = with_derivs ? pt.ddphi_dsigma : 0.0;
        on.fp[i] = potential_f_prime(p, pt.phi);
    }
    return on;
}

}  // namespace detail

// Step-1 contraction: fixed point of
//   (Vhat, What)(t) = ( -2 int_t^inf g d_sigma phi dy,  2 int_t^inf g phi' dy ),
//   g = f(V) - f(phi) - (V - phi) f'(phi) + mu e^{-lambda t} V^q,
//   V = phi + Vhat phi' + What d_sigma phi.
inline WeightedPath cgs_fixed_point(const Params& p, const OrbitSpec& spec, double T0,
                                    double T_max, double tol, CgsCertificate* cert = nullptr,
                                    double h = 0.01, int max_iter = 80,
                                    double weight_cap = std::numeric_limits<double>::infinity()) {
    p.validate();
    DerivedConstants d = derive_constants(p);
    const double lambda = d.lambda;
    if (!(lambda > 0.0)) throw validation_error("cgs_fixed_point: needs lambda > 0 (q < 2*-1)");
    const std::size_t n = static_cast<std::size_t>(std::ceil((T_max - T0) / h)) + 1;
    detail::OrbitNodes on = detail::orbit_nodes(p, spec, T0, h, n, true);

    auto apply = [&](const WeightedPath& x) {
        std::vector<double> g1(n), g2(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double t = T0 + h * i;
            const double pert = x.f1[i] * on.dphi[i] + x.f2[i] * on.ds[i];
            const double V = on.phi[i] + pert;
            if (!(V > 0.0))
                throw numeric_error("cgs_fixed_point: V lost positivity at t=" + std::to_string(t));
            const double g = potential_f(p, V) - potential_f(p, on.phi[i]) - pert * on.fp[i] +
                             p.mu * std::exp(-lambda * t) * powp(V, p.q);
            g1[i] = g * on.ds[i];
            g2[i] = g * on.dphi[i];
        }
        auto I1 = detail::cumulative_from_right(g1, h);
        auto I2 = detail::cumulative_from_right(g2, h);
        WeightedPath out = x;
        for (std::size_t i = 0; i < n; ++i) {
            out.f1[i] = -2.0 * I1[i];
            out.f2[i] = 2.0 * I2[i];
        }
        if (out.weighted_norm() > 1.0)
            throw numeric_error("cgs_fixed_point: operator left the weighted unit ball");
        return out;
    };

    WeightedPath init;
    init.T0 = T0;
    init.h = h;
    init.rate = 0.5 * lambda;
    init.weight_cap = weight_cap;
    init.f1.assign(n, 0.0);
    init.f2.assign(n, 0.0);
    auto res = picard_iterate(apply, init, tol, max_iter, weighted_distance);
    if (cert) {
        cert->ratios = res.ratios;
        cert->weighted_norm = res.fixed_point.weighted_norm();
        cert->T0_used = T0;
        cert->T_max_used = T_max;
        cert->regime = "step1";
    }
    return res.fixed_point;
}

// Step-2 contraction near sigma_bar, in the rotating frame of
// A = [[0,1],[f'(M0),0]] (pure imaginary spectrum):
//   Xtil(t) = -int_t^inf e^{-yA} (0, N(y)) dy,
//   N = f(phi + Vtil) - f(phi) - f'(M0) Vtil + mu e^{-lambda t} (phi + Vtil)^q,
//   (Vtil, Wtil) = e^{tA} Xtil.
inline WeightedPath cgs_fixed_point_near_max(const Params& p, const OrbitSpec& spec, double T0,
                                             double T_max, double tol,
                                             CgsCertificate* cert = nullptr, double h = 0.01,
                                             int max_iter = 80,
                                             double weight_cap = std::numeric_limits<double>::infinity()) {
    p.validate();
    DerivedConstants dc = derive_constants(p);
    const double lambda = dc.lambda;
    const double fpM0 = potential_f_prime(p, dc.M0);
    if (!(fpM0 < 0.0)) throw validation_error("cgs_fixed_point_near_max: f'(M0) must be negative");
    const double om = std::sqrt(-fpM0);
    const std::size_t n = static_cast<std::size_t>(std::ceil((T_max - T0) / h)) + 1;
    detail::OrbitNodes on = detail::orbit_nodes(p, spec, T0, h, n, false);

    auto apply = [&](const WeightedPath& x) {
        std::vector<double> q1(n), q2(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double t = T0 + h * i;
            const double c = std::cos(om * t), s = std::sin(om * t);
            const double Vt = c * x.f1[i] + s / om * x.f2[i];  // e^{tA} Xtil, first row
            const double V = on.phi[i] + Vt;
            if (!(V > 0.0))
                throw numeric_error("cgs_fixed_point_near_max: V lost positivity at t=" +
                                    std::to_string(t));
            const double N = potential_f(p, V) - potential_f(p, on.phi[i]) - fpM0 * Vt +
                             p.mu * std::exp(-lambda * t) * powp(V, p.q);
            // e^{-tA} (0, N)
            q1[i] = -s / om * N;
            q2[i] = c * N;
        }
        auto I1 = detail::cumulative_from_right(q1, h);
        auto I2 = detail::cumulative_from_right(q2, h);
        WeightedPath out = x;
        for (std::size_t i = 0; i < n; ++i) {
            out.f1[i] = -I1[i];
            out.f2[i] = -I2[i];
        }
        if (out.weighted_norm() > 1.0)
            throw numeric_error("cgs_fixed_point_near_max: operator left the weighted unit ball");
        return out;
    };

    WeightedPath init;
    init.T0 = T0;
    init.h = h;
    init.rate = 0.5 * lambda;
    init.weight_cap = weight_cap;
    init.f1.assign(n, 0.0);
    init.f2.assign(n, 0.0);
    auto res = picard_iterate(apply, init, tol, max_iter, weighted_distance);
    if (cert) {
        cert->ratios = res.ratios;
        cert->weighted_norm = res.fixed_point.weighted_norm();
        cert->T0_used = T0;
        cert->T_max_used = T_max;
        cert->regime = "step2";
    }
    return res.fixed_point;
}

// Reconstruct (V, W) on the grid from a regime fixed point.
inline void cgs_reconstruct(const Params& p, const OrbitSpec& spec, const WeightedPath& fp,
                            bool step2, std::vector<double>& t, std::vector<double>& V,
                            std::vector<double>& W) {
    DerivedConstants dc = derive_constants(p);
    const std::size_t n = fp.f1.size();
    detail::OrbitNodes on = detail::orbit_nodes(p, spec, fp.T0, fp.h, n, !step2);
    t.resize(n);
    V.resize(n);
    W.resize(n);
    const double om = std::sqrt(-potential_f_prime(p, dc.M0));
    for (std::size_t i = 0; i < n; ++i) {
        t[i] = fp.t_at(i);
        if (step2) {
            const double c = std::cos(om * t[i]), s = std::sin(om * t[i]);
            V[i] = on.phi[i] + c * fp.f1[i] + s / om * fp.f2[i];
            W[i] = on.dphi[i] - om * s * fp.f1[i] + c * fp.f2[i];
        } else {
            V[i] = on.phi[i] + fp.f1[i] * on.dphi[i] + fp.f2[i] * on.ds[i];
            W[i] = on.dphi[i] + fp.f1[i] * potential_f(p, on.phi[i]) + fp.f2[i] * on.dds[i];
        }
    }
}

// sup-norm residual of the first-order system V' = W, W' = f(V) + mu e^{-lambda t} V^q
inline double cgs_system_residual(const Params& p, const std::vector<double>& t,
                                  const std::vector<double>& V, const std::vector<double>& W) {
    DerivedConstants dc = derive_constants(p);
    const double h = t[1] - t[0];
    auto dV = detail::fd_derivative(V, h);
    auto dW = detail::fd_derivative(W, h);
    double r = 0.0;
    for (std::size_t i = 2; i + 2 < t.size(); ++i) {
        r = std::max(r, std::abs(dV[i] - W[i]));
        r = std::max(r, std::abs(dW[i] - potential_f(p, V[i]) -
                                 p.mu * std::exp(-dc.lambda * t[i]) * powp(std::max(V[i], 0.0), p.q)));
    }
    return r;
}

// Automatic T0 escalation: double T0 until the measured ratios stay below 0.9.
template <class Solver>
WeightedPath cgs_solve_with_escalation(Solver&& solver, double T0_init, double horizon,
                                       double lambda, double tol, CgsCertificate* cert) {
    double T0 = T0_init;
    const double pad = 2.0 / lambda * std::log(1e10);  // certified tail truncation
    std::string last_err;
    for (int esc = 0; esc < 6; ++esc) {
        const double T_max = T0 + horizon + pad;
        try {
            CgsCertificate local;
            WeightedPath fp = solver(T0, T_max, tol, &local);
            double worst = 0.0;
            for (std::size_t i = 1; i < local.ratios.size(); ++i)
                worst = std::max(worst, local.ratios[i]);
            if (worst < 0.9) {
                if (cert) {
                    *cert = local;
                    cert->t0_escalations = esc;
                }
                return fp;
            }
            last_err = "measured ratio " + std::to_string(worst) + " >= 0.9";
        } catch (const numeric_error& e) {
            last_err = e.what();
        }
        T0 *= 2.0;
    }
    throw numeric_error("cgs_solve_with_escalation: no contraction after T0 escalation cap (" +
                        last_err + ")");
}

struct CgsSolution {
    Trajectory trajectory;  // LogChart, t = log(1/r)
    CgsCertificate certificate;
    double decay_certificate = 0.0;  // sup_t e^{lambda t/2} (|V-phi| + |W-phi'|)
};

// Full (CGS) solve: pick the regime by sigma, fixed-point it, reconstruct the
// radial trajectory on [T0, T0 + horizon] in t = log(1/r).
inline CgsSolution cgs_solution(const Params& p, const OrbitSpec& spec, double horizon,
                                double tol = 1e-8, double T0_init = 40.0,
                                double margin_frac = kCgsSigmaMarginFrac) {
    p.validate();
    DerivedConstants dc = derive_constants(p);
    if (!(spec.sigma > 0.0 && spec.sigma <= dc.sigma_bar))
        throw validation_error("cgs_solution: sigma outside (0, sigma_bar]");
    const double margin = margin_frac * dc.sigma_bar;
    const bool step2 = spec.sigma > dc.sigma_bar - 1.5 * margin;

    CgsSolution out;
    WeightedPath fp;
    if (step2) {
        auto solver = [&](double T0, double Tm, double tl, CgsCertificate* c) {
            return cgs_fixed_point_near_max(p, spec, T0, Tm, tl, c, 0.01, 80, T0 + horizon);
        };
        fp = cgs_solve_with_escalation(solver, T0_init, horizon, dc.lambda, tol,
                                       &out.certificate);
    } else {
        auto solver = [&](double T0, double Tm, double tl, CgsCertificate* c) {
            return cgs_fixed_point(p, spec, T0, Tm, tl, c, 0.01, 80, T0 + horizon);
        };
        fp = cgs_solve_with_escalation(solver, T0_init, horizon, dc.lambda, tol,
                                       &out.certificate);
    }
    std::vector<double> t, V, W;
    cgs_reconstruct(p, spec, fp, step2, t, V, W);
    out.certificate.residual = cgs_system_residual(p, t, V, W);

    // decay certificate against the tracked orbit
    const std::size_t n = t.size();
    detail::OrbitNodes on = detail::orbit_nodes(p, spec, fp.T0, fp.h, n, false);
    double decay = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        decay = std::max(decay, std::exp(0.5 * dc.lambda * t[i]) *
                                    (std::abs(V[i] - on.phi[i]) + std::abs(W[i] - on.dphi[i])));
    out.decay_certificate = decay;

    Trajectory traj;
    traj.chart = Chart{ChartTag::LogChart, LogOrientation::LogInvR};
    traj.params = p;
    traj.provenance = "cgs_solution sigma=" + std::to_string(spec.sigma);
    const std::size_t n_keep = static_cast<std::size_t>(std::ceil(horizon / fp.h)) + 1;
    for (std::size_t i = 0; i < std::min(n, n_keep); ++i)
        traj.samples.push_back({t[i], V[i], W[i]});
    out.trajectory = std::move(traj);
    return out;
}

}  // namespace hslab

#endif
