#ifndef HSLAB_CONSTANTS_HPP
#define HSLAB_CONSTANTS_HPP

#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>

#include "errors.hpp"

namespace hslab {

// Problem parameters for  -Delta u = |x|^{-s} u^{2*(s)-1} - mu u^q  (radial).
struct Params {
    int n = 3;          // dimension, >= 3
    double s = 1.0;     // singularity exponent, in (0,2)
    double mu = 1.0;    // perturbation strength, >= 0 (main regime: > 0)
    double q = 4.5;     // perturbation exponent, > 1
    std::optional<double> R;  // domain radius, optional until a solve needs it

    void validate() const {
        std::ostringstream os;
        if (n < 3) { os << "n=" << n << " violates n >= 3"; throw validation_error(os.str()); }
        if (!(s > 0.0 && s < 2.0)) { os << "s=" << s << " violates 0 < s < 2"; throw validation_error(os.str()); }
        if (!(mu >= 0.0)) { os << "mu=" << mu << " violates mu >= 0"; throw validation_error(os.str()); }
        if (!(q > 1.0)) { os << "q=" << q << " violates q > 1"; throw validation_error(os.str()); }
        if (R && !(*R > 0.0)) { os << "R=" << *R << " violates R > 0"; throw validation_error(os.str()); }
    }
};

// pow for positive bases only; fractional exponents on negative bases are a bug.
inline double powp(double base, double expo) {
    if (base < 0.0)
        throw validation_error("powp: negative base " + std::to_string(base));
    if (base == 0.0) return expo == 0.0 ? 1.0 : 0.0;
    return std::exp(expo * std::log(base));
}

// Every closed-form constant derived from Params.  Fields that require
// q > 2*(s)-1 (i.e. k = q - 2*(s) + 1 > 0) are tagged-absent otherwise.
struct DerivedConstants {
    double two_star_s;   // 2(n-s)/(n-2), Hardy-Sobolev critical exponent
    double two_star;     // 2n/(n-2), Sobolev critical exponent
    double c_ns;         // bubble amplitude ((n-s)(n-2))^{1/(2*(s)-2)}
    double lambda;       // (n-2)(2*-1-q)/2
    double c_mu_q_n;     // lambda*mu/(q+1)
    double k;            // q - 2*(s) + 1 (may be <= 0)
    std::optional<double> vartheta;  // s/k
    std::optional<double> beta;      // (q-1)*vartheta/2 - 1
    std::optional<double> zeta;      // (2*(s)-2)/k
    std::optional<double> Upsilon;   // mu^{zeta/2} sqrt(k)
    std::optional<double> Gamma;     // vartheta(n-2-vartheta) mu^zeta
    std::optional<double> lambda1;   // mu^{-zeta/2} beta^{-1} sqrt(k)
    double Lambda0;      // [(n-2)(n-s)/4]^{1/(2*(s)-2)}, positive zero of F0
    double M0;           // ((n-2)/2)^{(n-2)/(2-s)}, positive zero of f
    double sigma_bar;    // F0(M0), max of F0 on (0,inf)
    double Theta;        // 2(q-2*+2)/(2*-1-q)
    double omega_n_minus_1;  // area of unit (n-1)-sphere
    double a_xi;         // (2n-s-2)/(2-s)
    bool nd_admissible;  // 2*(s)-1 < q < 2*-1
    bool mb_admissible;  // 2*-2 < q < 2*-1
};

// f(xi) = (n-2)^2 xi/4 - xi^{2*(s)-1}
inline double potential_f(const Params& p, double xi) {
    if (xi < 0.0) throw validation_error("potential_f: xi < 0");
    const double tss = 2.0 * (p.n - p.s) / (p.n - 2);
    return 0.25 * (p.n - 2) * (p.n - 2) * xi - powp(xi, tss - 1.0);
}

// f'(xi), used by the variational equation and the near-max CGS frame
inline double potential_f_prime(const Params& p, double xi) {
    if (xi < 0.0) throw validation_error("potential_f_prime: xi < 0");
    const double tss = 2.0 * (p.n - p.s) / (p.n - 2);
    return 0.25 * (p.n - 2) * (p.n - 2) - (tss - 1.0) * powp(xi, tss - 2.0);
}

// F0(xi) = (n-2)^2 xi^2/4 - (2/2*(s)) xi^{2*(s)}.  Note F0' = 2f.
inline double potential_F0(const Params& p, double xi) {
    if (xi < 0.0) throw validation_error("potential_F0: xi < 0");
    const double tss = 2.0 * (p.n - p.s) / (p.n - 2);
    return 0.25 * (p.n - 2) * (p.n - 2) * xi * xi - (2.0 / tss) * powp(xi, tss);
}

// FR(xi) = (n-2)^2/4 - (2/2*(s)) xi^{2*(s)-2} + 2 mu R^lambda xi^{q-1}/(q+1).
// Not xi^2-scaled: xi^2 FR(xi) = F0(xi) + 2 mu R^lambda xi^{q+1}/(q+1).
inline double potential_FR(const Params& p, double R, double xi) {
    if (xi < 0.0) throw validation_error("potential_FR: xi < 0");
    if (!(R > 0.0)) throw validation_error("potential_FR: R <= 0");
    const double tss = 2.0 * (p.n - p.s) / (p.n - 2);
    const double lambda = 0.5 * (p.n - 2) * (2.0 * p.n / (p.n - 2) - 1.0 - p.q);
    return 0.25 * (p.n - 2) * (p.n - 2) - (2.0 / tss) * powp(xi, tss - 2.0)
         + 2.0 * p.mu * powp(R, lambda) * powp(xi, p.q - 1.0) / (p.q + 1.0);
}

inline DerivedConstants derive_constants(const Params& p) {
    p.validate();
    DerivedConstants d{};
    const double n = p.n, s = p.s, q = p.q, mu = p.mu;
    d.two_star_s = 2.0 * (n - s) / (n - 2.0);
    d.two_star = 2.0 * n / (n - 2.0);
    d.c_ns = powp((n - s) * (n - 2.0), 1.0 / (d.two_star_s - 2.0));
    d.lambda = 0.5 * (n - 2.0) * (d.two_star - 1.0 - q);
    d.c_mu_q_n = d.lambda * mu / (q + 1.0);
    d.k = q - d.two_star_s + 1.0;
    if (d.k > 0.0) {
        d.vartheta = s / d.k;
        d.beta = 0.5 * (q - 1.0) * (*d.vartheta) - 1.0;
        d.zeta = (d.two_star_s - 2.0) / d.k;
        if (mu > 0.0) {
            d.Upsilon = powp(mu, *d.zeta / 2.0) * std::sqrt(d.k);
            d.Gamma = (*d.vartheta) * (n - 2.0 - *d.vartheta) * powp(mu, *d.zeta);
            if (*d.beta != 0.0)
                d.lambda1 = powp(mu, -*d.zeta / 2.0) * std::sqrt(d.k) / (*d.beta);
        }
    }
    d.Lambda0 = powp(0.25 * (n - 2.0) * (n - s), 1.0 / (d.two_star_s - 2.0));
    d.M0 = powp(0.5 * (n - 2.0), (n - 2.0) / (2.0 - s));
    d.sigma_bar = potential_F0(p, d.M0);
    d.Theta = 2.0 * (q - d.two_star + 2.0) / (d.two_star - 1.0 - q);
    d.omega_n_minus_1 = 2.0 * std::pow(M_PI, 0.5 * n) / std::tgamma(0.5 * n);
    d.a_xi = (2.0 * n - s - 2.0) / (2.0 - s);
    d.nd_admissible = (q > d.two_star_s - 1.0) && (q < d.two_star - 1.0);
    d.mb_admissible = (q > d.two_star - 2.0) && (q < d.two_star - 1.0);
    return d;
}

// U_eta(r) = c_ns eta^{(n-2)/2} (eta^{2-s} + r^{2-s})^{-(n-2)/(2-s)}
inline double bubble_eval(const Params& p, double eta, double r) {
    p.validate();
    if (!(eta > 0.0)) throw validation_error("bubble_eval: eta <= 0");
    if (!(r > 0.0)) throw validation_error("bubble_eval: r <= 0");
    const double n = p.n, s = p.s;
    const double tss = 2.0 * (n - s) / (n - 2.0);
    const double c_ns = powp((n - s) * (n - 2.0), 1.0 / (tss - 2.0));
    return c_ns * powp(eta, 0.5 * (n - 2.0))
         * powp(powp(eta, 2.0 - s) + powp(r, 2.0 - s), -(n - 2.0) / (2.0 - s));
}

// d/dr of U_eta(r)
inline double bubble_deriv(const Params& p, double eta, double r) {
    const double n = p.n, s = p.s;
    const double u = bubble_eval(p, eta, r);
    const double den = powp(eta, 2.0 - s) + powp(r, 2.0 - s);
    return -u * (n - 2.0) * powp(r, 1.0 - s) / den;
}

struct RadiusThresholds {
    double R_Lambda;                 // F_{R_Lambda}(Lambda) = 0
    std::optional<double> R_star;    // lower bound for the maximal radius; absent => +inf
    bool R_star_infinite = false;
    std::optional<double> xi_c;      // critical point of F_Rbar (needs q > 2*(s)-1)
};

// Closed-form ell_q (see ell_q_sup for the equivalent sup characterization).
inline double ell_q_closed(const Params& p) {
    p.validate();
    const double n = p.n, s = p.s, q = p.q;
    const double tss = 2.0 * (n - s) / (n - 2.0);
    const double ts = 2.0 * n / (n - 2.0);
    if (!(q > tss - 1.0 && q < ts - 1.0))
        throw validation_error("ell_q_closed: q outside (2*(s)-1, 2*-1)");
    const double k = q - tss + 1.0;
    return (2.0 - s) * (q + 1.0) / ((n - s) * (q - 1.0))
         * powp((n - 2.0) * (n - s) * (q - 1.0) / (4.0 * k), -k / (tss - 2.0));
}

// ell_q = (q+1)/2 * sup_{L > Lambda0} (-F0(L)/L^{q+1}), by golden-section search
// with automatic bracket expansion.
inline double ell_q_sup(const Params& p, int refine_iters = 200) {
    p.validate();
    const double tss = 2.0 * (p.n - p.s) / (p.n - 2);
    const double ts = 2.0 * p.n / (p.n - 2);
    if (!(p.q > tss - 1.0 && p.q < ts - 1.0))
        throw validation_error("ell_q_sup: q outside (2*(s)-1, 2*-1)");
    DerivedConstants d = derive_constants(p);
    auto obj = [&](double L) { return -potential_F0(p, L) / powp(L, p.q + 1.0); };
    // bracket a maximum: expand right until the objective turns down
    double lo = d.Lambda0 * (1.0 + 1e-8), hi = d.Lambda0 * 2.0;
    double prev = obj(lo), cur = obj(hi);
    int guard = 0;
    while (cur > prev) {
        prev = cur;
        hi *= 2.0;
        cur = obj(hi);
        if (++guard > 200)
            throw numeric_error("ell_q_sup: failed to bracket a maximum (objective still rising at Lambda="
                                + std::to_string(hi) + ")");
    }
    // golden-section on [lo, hi]
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double c1 = b - gr * (b - a), c2 = a + gr * (b - a);
    double f1 = obj(c1), f2 = obj(c2);
    for (int i = 0; i < refine_iters && (b - a) > 1e-14 * (1.0 + b); ++i) {
        if (f1 < f2) {
            a = c1; c1 = c2; f1 = f2;
            c2 = a + gr * (b - a); f2 = obj(c2);
        } else {
            b = c2; c2 = c1; f2 = f1;
            c1 = b - gr * (b - a); f1 = obj(c1);
        }
    }
    return 0.5 * (p.q + 1.0) * obj(0.5 * (a + b));
}

// R_Lambda, R*, and (optionally) xi_c for a candidate radius Rbar.
inline RadiusThresholds radius_thresholds(const Params& p, double Lambda,
                                          std::optional<double> Rbar = std::nullopt) {
    p.validate();
    DerivedConstants d = derive_constants(p);
    if (!(Lambda > d.Lambda0))
        throw validation_error("radius_thresholds: Lambda <= Lambda0 (F0(Lambda) >= 0 breaks the formula)");
    RadiusThresholds out{};
    const double F0L = potential_F0(p, Lambda);
    out.R_Lambda = powp(-(p.q + 1.0) * F0L / (2.0 * p.mu * powp(Lambda, p.q + 1.0)),
                        1.0 / d.lambda);
    // self-check of the defining identity
    if (std::abs(potential_FR(p, out.R_Lambda, Lambda)) > 1e-12)
        throw numeric_error("radius_thresholds: F_{R_Lambda}(Lambda) != 0 beyond tolerance");
    if (p.q < d.two_star_s - 1.0) {
        out.R_star_infinite = true;  // maximal radius is +inf in this range
    } else if (p.q == d.two_star_s - 1.0) {
        out.R_star = powp(1.0 / p.mu, 1.0 / p.s);
    } else if (p.q < d.two_star - 1.0) {
        out.R_star = powp(ell_q_closed(p) / p.mu, 1.0 / d.lambda);
    }
    if (Rbar) {
        if (!(p.q > d.two_star_s - 1.0))
            throw validation_error("radius_thresholds: xi_c needs q > 2*(s)-1");
        out.xi_c = powp((2.0 - p.s) * (p.q + 1.0)
                        / (p.mu * (p.n - p.s) * (p.q - 1.0) * powp(*Rbar, d.lambda)),
                        1.0 / d.k);
    }
    return out;
}

}  // namespace hslab

#endif
