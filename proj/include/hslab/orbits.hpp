#ifndef HSLAB_ORBITS_HPP
#define HSLAB_ORBITS_HPP

#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "constants.hpp"
#include "errors.hpp"
#include "ode.hpp"

namespace hslab {

// A periodic orbit of phi'' = f(phi) at level F0(phi) - (phi')^2 = sigma,
// shifted by tau: phi_{sigma,tau}(t) = phi_sigma(t - (t_sigma/pi) * tau_angle).
struct OrbitSpec {
    double sigma;
    double tau_angle = 0.0;  // in [0, 2pi)
};

struct OrbitPoint {
    double phi, dphi;
    double dphi_dsigma, ddphi_dsigma;  // sigma-derivatives (valid away from sigma_bar)
};

struct OrbitData {
    Params params;
    double sigma;
    double a_sigma, b_sigma;  // F0(a) = F0(b) = sigma, a <= M0 <= b
    double t_sigma;           // half period
    bool constant;            // sigma == sigma_bar (phi == M0)
    bool has_derivs;
    double dP_dsigma = 0.0;  // period derivative, secular growth of d_sigma phi
    // dense samples over one period [0, 2 t_sigma], phi starting at (a, 0)
    std::vector<double> t;
    std::vector<std::array<double, 4>> y;  // phi, dphi, dsphi, dsphi'

    // Hermite evaluation at wrapped local time; derivative data comes from the
    // ODE.  (phi, phi') wrap periodically; the sigma-derivative pair picks up a
    // secular term because the period depends on sigma:
    //   d_sigma phi(t + kP) = d_sigma phi(t) - k P'(sigma) phi'(t).
    OrbitPoint eval_local(double tl) const {
        if (constant) {
            const double M0 = derive_constants(params).M0;
            return {M0, 0.0, 0.0, 0.0};
        }
        const double P = 2.0 * t_sigma;
        const double kwrap = std::floor(tl / P);
        double tw = tl - kwrap * P;
        if (tw < 0.0) tw = 0.0;
        if (tw > P) tw = P;
        auto it = std::upper_bound(t.begin(), t.end(), tw);
        std::size_t i = static_cast<std::size_t>(it - t.begin());
        if (i == 0) i = 1;
        if (i >= t.size()) i = t.size() - 1;
        const double h = t[i] - t[i - 1];
        const double x = (tw - t[i - 1]) / h;
        const double h00 = (1 + 2 * x) * (1 - x) * (1 - x);
        const double h10 = x * (1 - x) * (1 - x);
        const double h01 = x * x * (3 - 2 * x);
        const double h11 = x * x * (x - 1);
        const double g00 = 6 * x * (x - 1) / h;
        const double g10 = (1 - x) * (1 - 3 * x);
        const double g01 = -6 * x * (x - 1) / h;
        const double g11 = x * (3 * x - 2);
        auto derivs = [&](const std::array<double, 4>& s) -> std::array<double, 4> {
            return {s[1], potential_f(params, s[0]), s[3],
                    potential_f_prime(params, s[0]) * s[2]};
        };
        const auto& y0 = this->y[i - 1];
        const auto& y1 = this->y[i];
        const auto d0 = derivs(y0);
        const auto d1 = derivs(y1);
        std::array<double, 4> v{}, dv{};
        for (int j = 0; j < 4; ++j) {
            v[j] = h00 * y0[j] + h * h10 * d0[j] + h01 * y1[j] + h * h11 * d1[j];
            dv[j] = g00 * y0[j] + g10 * d0[j] + g01 * y1[j] + g11 * d1[j];
        }
        (void)dv;
        const double sec = kwrap * dP_dsigma;
        return {v[0], v[1], v[2] - sec * v[1], v[3] - sec * potential_f(params, v[0])};
    }
};

// Two positive solutions of F0(xi) = sigma, bracketing M0.
inline std::pair<double, double> level_roots(const Params& p, double sigma) {
    p.validate();
    DerivedConstants d = derive_constants(p);
    if (!(sigma > 0.0)) throw validation_error("level_roots: sigma <= 0");
    if (sigma > d.sigma_bar)
        throw validation_error("level_roots: sigma above sigma_bar");
    if (sigma == d.sigma_bar) return {d.M0, d.M0};
    auto g = [&](double x) { return potential_F0(p, x) - sigma; };
    auto bisect = [&](double lo, double hi) {
        double glo = g(lo);
        for (int i = 0; i < 200 && hi - lo > 1e-16 * (1.0 + hi); ++i) {
            const double m = 0.5 * (lo + hi);
            const double gm = g(m);
            if ((glo < 0.0) == (gm < 0.0)) {
                lo = m;
                glo = gm;
            } else {
                hi = m;
            }
        }
        return 0.5 * (lo + hi);
    };
    // F0 rises 0 -> sigma_bar on (0, M0), falls to -inf past M0
    double a = bisect(1e-300 + 0.0, d.M0);
    double hi = 2.0 * d.M0;
    while (g(hi) > 0.0) hi *= 2.0;
    double b = bisect(d.M0, hi);
    // Newton polish (F0' = 2f)
    for (int i = 0; i < 3; ++i) {
        a -= (potential_F0(p, a) - sigma) / (2.0 * potential_f(p, a));
        b -= (potential_F0(p, b) - sigma) / (2.0 * potential_f(p, b));
    }
    return {a, b};
}

namespace detail {
// G(eta) = (F0(eta) - sigma) / ((eta-a)(b-eta)), evaluated stably near the roots
// by a 3-term Taylor expansion of F0 about the nearby root.
inline double period_G(const Params& p, double sigma, double a, double b, double eta) {
    const double w = b - a;
    const double tss = 2.0 * (p.n - p.s) / (p.n - 2.0);
    auto fpp = [&](double x) {
        return -(tss - 1.0) * (tss - 2.0) * powp(x, tss - 3.0);
    };
    if (eta - a < 1e-4 * w) {
        const double d = eta - a;
        const double F0p = 2.0 * potential_f(p, a);
        const double F0pp = 2.0 * potential_f_prime(p, a);
        const double F0ppp = 2.0 * fpp(a);
        return (F0p + 0.5 * F0pp * d + F0ppp * d * d / 6.0) / (b - eta);
    }
    if (b - eta < 1e-4 * w) {
        const double d = eta - b;  // negative
        const double F0p = 2.0 * potential_f(p, b);
        const double F0pp = 2.0 * potential_f_prime(p, b);
        const double F0ppp = 2.0 * fpp(b);
        return -(F0p + 0.5 * F0pp * d + F0ppp * d * d / 6.0) / (eta - a);
    }
    return (potential_F0(p, eta) - sigma) / ((eta - a) * (b - eta));
}
}  // namespace detail

// Half period t_sigma = int_a^b d eta / sqrt(F0(eta) - sigma); the substitution
// eta = a + (b-a) sin^2(theta) removes both inverse-square-root endpoint
// singularities, leaving the smooth integrand 2/sqrt(G).
inline double half_period(const Params& p, double sigma) {
    DerivedConstants d = derive_constants(p);
    if (!(sigma > 0.0 && sigma < d.sigma_bar))
        throw validation_error("half_period: sigma outside (0, sigma_bar)");
    auto [a, b] = level_roots(p, sigma);
    auto integrand = [&](double theta) {
        const double ssin = std::sin(theta);
        const double eta = a + (b - a) * ssin * ssin;
        const double G = detail::period_G(p, sigma, a, b, eta);
        if (!(G > 0.0)) throw numeric_error("half_period: nonpositive integrand denominator");
        return 2.0 / std::sqrt(G);
    };
    // composite Simpson with refinement to machine-level stall
    const double lo = 0.0, hi = 0.5 * M_PI;
    double prev = 0.0;
    int nseg = 16;
    double result = 0.0;
    for (int iter = 0; iter < 12; ++iter, nseg *= 2) {
        const double h = (hi - lo) / nseg;
        double acc = integrand(lo) + integrand(hi);
        for (int i = 1; i < nseg; ++i) acc += (i % 2 ? 4.0 : 2.0) * integrand(lo + i * h);
        result = acc * h / 3.0;
        if (iter > 2 && std::abs(result - prev) < 1e-13 * std::abs(result)) break;
        prev = result;
    }
    return result;
}

namespace detail {
struct OrbitKey {
    int n;
    double s, sigma;
    bool operator<(const OrbitKey& o) const {
        if (n != o.n) return n < o.n;
        if (s != o.s) return s < o.s;
        return sigma < o.sigma;
    }
};

inline std::shared_ptr<const OrbitData> build_orbit(const Params& p, double sigma) {
    DerivedConstants d = derive_constants(p);
    auto data = std::make_shared<OrbitData>();
    data->params = p;
    data->sigma = sigma;
    if (sigma == d.sigma_bar) {
        data->a_sigma = data->b_sigma = d.M0;
        data->t_sigma = M_PI / std::sqrt(std::abs(potential_f_prime(p, d.M0)));
        data->constant = true;
        data->has_derivs = false;
        return data;
    }
    auto [a, b] = level_roots(p, sigma);
    data->a_sigma = a;
    data->b_sigma = b;
    data->t_sigma = half_period(p, sigma);
    data->constant = false;
    data->has_derivs = true;
    const double P = 2.0 * data->t_sigma;
    OdeRhs rhs = [p](double, const Vec& y, Vec& dy) {
        dy.resize(4);
        dy[0] = y[1];
        dy[1] = potential_f(p, y[0]);
        dy[2] = y[3];
        dy[3] = potential_f_prime(p, y[0]) * y[2];
    };
    OdeOptions opts;
    opts.rtol = 1e-12;
    opts.atol = 1e-14;
    opts.h_max = P / 4096.0;
    const double psi0 = 1.0 / (2.0 * potential_f(p, a));  // 1/F0'(a)
    OdeSolution sol = integrate_ode(rhs, 0.0, P, {a, 0.0, psi0, 0.0}, opts);
    data->t = sol.t;
    data->y.reserve(sol.y.size());
    for (const auto& v : sol.y) data->y.push_back({v[0], v[1], v[2], v[3]});
    // P'(sigma) from the monodromy of the variational pair: with phi'(0) = 0,
    // dsphi'(P) = dsphi'(0) - P'(sigma) f(a) and dsphi'(0) = 0.
    data->dP_dsigma = -sol.y.back()[3] / potential_f(p, a);
    return data;
}

// single-writer / multi-reader cache; readers receive immutable shared data
inline std::shared_ptr<const OrbitData> orbit_cache_get(const Params& p, double sigma) {
    static std::map<OrbitKey, std::shared_ptr<const OrbitData>> cache;
    static std::mutex mtx;
    OrbitKey key{p.n, p.s, sigma};
    {
        std::lock_guard<std::mutex> lk(mtx);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }
    auto built = build_orbit(p, sigma);
    std::lock_guard<std::mutex> lk(mtx);
    auto [it, inserted] = cache.emplace(key, built);
    return it->second;
}
}  // namespace detail

inline std::shared_ptr<const OrbitData> get_orbit(const Params& p, double sigma) {
    p.validate();
    DerivedConstants d = derive_constants(p);
    if (!(sigma > 0.0 && sigma <= d.sigma_bar))
        throw validation_error("get_orbit: sigma outside (0, sigma_bar]");
    return detail::orbit_cache_get(p, sigma);
}

inline double orbit_shift(const OrbitData& od, const OrbitSpec& spec) {
    return od.t_sigma / M_PI * spec.tau_angle;
}

// phi_{sigma,tau}(t) and its t-derivative
inline std::array<double, 2> orbit_eval(const Params& p, const OrbitSpec& spec, double t) {
    auto od = get_orbit(p, spec.sigma);
    OrbitPoint pt = od->eval_local(t - orbit_shift(*od, spec));
    return {pt.phi, pt.dphi};
}

// Default margin keeping sigma-derivatives away from the degenerate sigma_bar.
inline constexpr double kSigmaDerivMargin = 1e-4;

// (d phi/d sigma, d phi'/d sigma) via the variational equation
// psi'' = f'(phi) psi, psi(0) = 1/F0'(a_sigma), psi'(0) = 0.
inline std::array<double, 2> orbit_sigma_derivative(const Params& p, const OrbitSpec& spec,
                                                    double t,
                                                    double margin = kSigmaDerivMargin) {
    DerivedConstants d = derive_constants(p);
    if (!(spec.sigma <= d.sigma_bar * (1.0 - margin)))
        throw validation_error(
            "orbit_sigma_derivative: sigma within the sigma_bar margin; use the near-max path");
    auto od = get_orbit(p, spec.sigma);
    OrbitPoint pt = od->eval_local(t - orbit_shift(*od, spec));
    return {pt.dphi_dsigma, pt.ddphi_dsigma};
}

// Direct ODE measurement of the principal period: first return of phi' to 0
// from below after leaving the minimum (a_sigma, 0).
inline double period_ode(const Params& p, double sigma) {
    DerivedConstants d = derive_constants(p);
    if (!(sigma > 0.0 && sigma < d.sigma_bar))
        throw validation_error("period_ode: sigma outside (0, sigma_bar)");
    auto [a, b] = level_roots(p, sigma);
    (void)b;
    OdeRhs rhs = [p](double, const Vec& y, Vec& dy) {
        dy.resize(2);
        dy[0] = y[1];
        dy[1] = potential_f(p, y[0]);
    };
    OdeOptions opts;
    opts.rtol = 1e-12;
    opts.atol = 1e-14;
    const double guess = 4.0 * half_period(p, sigma);
    std::vector<EventSpec> evs{
        {"period", [](double, const Vec& y) { return y[1]; }, true, +1}};
    OdeSolution sol = integrate_ode(rhs, 0.0, guess, {a, 0.0}, opts, evs);
    if (sol.events.empty()) throw numeric_error("period_ode: no return event found");
    return sol.events.back().t;
}

}  // namespace hslab

#endif
