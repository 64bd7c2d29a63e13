// Acceptance harness: one criterion per invocation, one PASS/FAIL line.
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hslab/cgs.hpp"
#include "hslab/charts.hpp"
#include "hslab/classify.hpp"
#include "hslab/constants.hpp"
#include "hslab/mb.hpp"
#include "hslab/nd.hpp"
#include "hslab/orbits.hpp"
#include "hslab/pohozaev.hpp"

using namespace hslab;

namespace {

int g_failures = 0;
std::string g_first_failure;

void require(bool ok, const std::string& what) {
    if (ok) return;
    ++g_failures;
    if (g_first_failure.empty()) g_first_failure = what;
}

void require_close(double got, double want, double tol, const std::string& what) {
    std::ostringstream os;
    os << what << " (got " << got << ", want " << want << " +- " << tol << ")";
    require(std::abs(got - want) <= tol, os.str());
}

const Params kCanon{3, 1.0, 1.0, 4.5, std::nullopt};
const Chart kR{ChartTag::RChart, LogOrientation::LogR};

Trajectory bubble_traj(const Params& p, double eta, double rlo, double rhi, int n) {
    Trajectory traj;
    traj.chart = kR;
    traj.params = p;
    for (int i = 0; i < n; ++i) {
        const double r = rlo * powp(rhi / rlo, i / (n - 1.0));
        traj.samples.push_back({r, bubble_eval(p, eta, r), bubble_deriv(p, eta, r)});
    }
    return traj;
}

// 1. closed-form identities on a randomized admissible family
void criterion_1() {
    std::mt19937_64 rng(20240817);
    std::uniform_int_distribution<int> un(3, 7);
    std::uniform_real_distribution<double> us(0.2, 1.8);
    std::uniform_real_distribution<double> umu(0.1, 10.0);
    std::uniform_real_distribution<double> ufrac(0.05, 0.95);
    for (int c = 0; c < 20; ++c) {
        Params p;
        p.n = un(rng);
        p.s = us(rng);
        p.mu = umu(rng);
        DerivedConstants d0 = derive_constants(p);
        p.q = d0.two_star_s - 1.0 + ufrac(rng) * (d0.two_star - d0.two_star_s);
        DerivedConstants d = derive_constants(p);
        const double lam0 = 0.25 * (p.n - 2.0) * (p.n - 2.0);
        // F0(Lambda0) = 0 and f(M0) = 0, relative to the quadratic/linear scale
        require(std::abs(potential_F0(p, d.Lambda0)) <=
                    1e-10 * std::max(1.0, lam0 * d.Lambda0 * d.Lambda0),
                "zoo: F0(Lambda0) != 0");
        require(std::abs(potential_f(p, d.M0)) <= 1e-10 * std::max(1.0, lam0 * d.M0),
                "zoo: f(M0) != 0");
        // F_{R_Lambda}(Lambda) = 0 at Lambda = 2 Lambda0
        const double Lam = 2.0 * d.Lambda0;
        RadiusThresholds rt = radius_thresholds(p, Lam);
        require(std::abs(potential_FR(p, rt.R_Lambda, Lam)) <=
                    1e-10 * std::max(1.0, lam0 * Lam * Lam),
                "zoo: F_{R_Lambda}(Lambda) != 0");
        // the two ell_q characterizations agree
        require(std::abs(ell_q_closed(p) - ell_q_sup(p)) < 1e-6,
                "zoo: ell_q closed vs sup mismatch");
    }
    // edge behavior: ell_q -> 1 as q -> 2*(s)-1 from above
    Params pe = kCanon;
    pe.q = 3.0 + 1e-3;
    require_close(ell_q_closed(pe), 1.0, 1e-2, "ell_q edge limit");
}

// 2. bubble exactness: re-integration and Kelvin symmetry
void criterion_2() {
    Params p0 = kCanon;
    p0.mu = 0.0;
    Sample init{0.05, bubble_eval(p0, 1.0, 0.05), bubble_deriv(p0, 1.0, 0.05)};
    Trajectory traj = integrate(kR, p0, init, 5.0);  // two decades
    double worst = 0.0;
    for (const Sample& s : traj.samples)
        worst = std::max(worst, std::abs(s.value - bubble_eval(p0, 1.0, s.coord)));
    require(worst < 1e-8, "bubble re-integration sup error >= 1e-8");
    Trajectory bub = bubble_traj(kCanon, 2.0, 0.1, 10.0, 200);
    Trajectory kv = kelvin_transform(bub);
    double kworst = 0.0;
    for (const Sample& s : kv.samples)
        kworst = std::max(kworst, std::abs(s.value - bubble_eval(kCanon, 0.5, s.coord)));
    require(kworst < 1e-12, "Kelvin(U_2) != U_{1/2}");
}

// 3. conservation and monotonicity
void criterion_3() {
    // mu = 0: the log-chart energy is an exact invariant
    Params p0 = kCanon;
    p0.mu = 0.0;
    auto od = get_orbit(p0, 0.02);
    Trajectory lg;
    lg.chart = Chart{ChartTag::LogChart, LogOrientation::LogR};
    lg.params = p0;
    for (int i = 0; i <= 4000; ++i) {
        const double t = -10.0 + 20.0 * i / 4000.0;
        OrbitPoint pt = od->eval_local(t);
        lg.samples.push_back({t, pt.phi, pt.dphi});
    }
    double emin = 1e300, emax = -1e300;
    for (int i = 0; i <= 20; ++i) {
        const double E = fowler_energy(lg, -9.5 + 19.0 * i / 20.0);
        emin = std::min(emin, E);
        emax = std::max(emax, E);
    }
    require((emax - emin) / 19.0 < 1e-9, "mu=0 energy drifts >= 1e-9 per unit t");
    // mu > 0: strict decrease of the Fowler energy
    Trajectory run = chart_transform(shoot_removable(kCanon, 1.0, 0.2),
                                     Chart{ChartTag::LogChart, LogOrientation::LogR});
    // scan where E is resolved above integration noise (~1e-9)
    const double t_lo = -5.0, t_hi = run.coord_max() - 0.5;
    double prev = fowler_energy(run, t_lo);
    bool strict = true;
    for (int i = 1; i <= 40; ++i) {
        const double E = fowler_energy(run, t_lo + (t_hi - t_lo) * i / 40.0);
        if (!(E < prev)) strict = false;
        prev = E;
    }
    require(strict, "mu>0 Fowler energy not strictly decreasing");
    // Pohozaev increment identity on the canonical removable run
    require(pohozaev_increment_residual(shoot_removable(kCanon, 1.0, 0.2), 0.01, 0.2) < 1e-6,
            "Pohozaev increment residual >= 1e-6");
}

// 4. removable shooting
void criterion_4() {
    Trajectory traj = shoot_removable(kCanon, 1.0, 0.2);
    require_close(traj.samples.front().value, 1.0, 1e-8, "u(0+) != gamma");
    const double r = 1e-3;
    auto g = [&](double rr) { return traj.eval(rr).deriv; };  // s = 1
    const double g0 = g(r), g1 = g(r / 2), g2 = g(r / 4);
    const double rho = (g0 - g1) / (g1 - g2);
    const double lim = g2 - (g1 - g2) / (rho - 1.0);
    require_close(lim, -0.5, 1e-4, "r^{s-1} u' limit");
    PohozaevLimit pl = pohozaev_limit(traj);
    require(pl.conclusive, "removable P-limit inconclusive");
    require(std::abs(pl.value) < 1e-6, "removable P-limit not ~0");
}

// 5. orbit family
void criterion_5() {
    auto od = get_orbit(kCanon, 0.02);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ut(0.0, 6.0 * od->t_sigma);
    double eworst = 0.0;
    for (int i = 0; i < 200; ++i) {
        auto [phi, dphi] = orbit_eval(kCanon, {0.02, 0.0}, ut(rng));
        eworst = std::max(eworst, std::abs(orbit_sigma(kCanon, phi, dphi) - 0.02));
    }
    require(eworst < 1e-9, "orbit energy residual >= 1e-9");
    require(std::abs(2.0 * half_period(kCanon, 0.02) - period_ode(kCanon, 0.02)) < 1e-6,
            "quadrature vs ODE period mismatch");
    require_close(2.0 * half_period(kCanon, 0.03125 - 1e-6), 2.0 * M_PI * std::sqrt(2.0),
                  1e-3, "period limit at sigma_bar");
    double dworst = 0.0;
    for (int i = 0; i <= 300; ++i) {
        const double t = 40.0 + 6.0 * od->t_sigma * i / 300.0;
        OrbitPoint pt = od->eval_local(t);
        const double det =
            pt.dphi * pt.ddphi_dsigma - potential_f(kCanon, pt.phi) * pt.dphi_dsigma;
        dworst = std::max(dworst, std::abs(det + 0.5));
    }
    require(dworst < 1e-7, "sigma-derivative determinant != -1/2");
}

// 6. CGS contraction and classification
void criterion_6() {
    CgsSolution sol = cgs_solution(kCanon, {0.02, 0.0}, 60.0);
    for (double r : sol.certificate.ratios)
        require(r <= 0.55, "CGS Picard ratio > 0.55");
    require(sol.certificate.residual < 1e-6, "CGS system residual >= 1e-6");
    require(sol.decay_certificate <= 1.0, "CGS decay certificate > 1");
    // regime overlap
    DerivedConstants d = derive_constants(kCanon);
    const double margin = kCgsSigmaMarginFrac * d.sigma_bar;
    OrbitSpec spec{d.sigma_bar - 1.5 * margin, 0.0};
    const double T0 = 40.0, horizon = 60.0;
    const double Tm = T0 + horizon + 2.0 / d.lambda * std::log(1e10);
    WeightedPath f1 = cgs_fixed_point(kCanon, spec, T0, Tm, 1e-8, nullptr, 0.01, 80, T0 + horizon);
    WeightedPath f2 =
        cgs_fixed_point_near_max(kCanon, spec, T0, Tm, 1e-8, nullptr, 0.01, 80, T0 + horizon);
    std::vector<double> t1, V1, W1, t2, V2, W2;
    cgs_reconstruct(kCanon, spec, f1, false, t1, V1, W1);
    cgs_reconstruct(kCanon, spec, f2, true, t2, V2, W2);
    double sup = 0.0;
    for (std::size_t i = 0; i < t1.size() && t1[i] <= T0 + horizon; ++i)
        sup = std::max(sup, std::abs(V1[i] - V2[i]) + std::abs(W1[i] - W2[i]));
    require(sup < 1e-5, "CGS regime overlap disagreement >= 1e-5");
    // classifier agrees, with the right level
    ProfileClass pc = classify(sol.trajectory, kCanon);
    require(pc.label == ProfileLabel::CGS, "classifier label != CGS");
    require(std::abs(pc.evidence.sigma_estimate - 0.02) < 1e-3, "CGS sigma estimate off");
}

// 7. ND pipeline on the production grid
void criterion_7() {
    DerivedConstants d = derive_constants(kCanon);
    // FD Jacobian of the regularized field at the origin has eigenvectors
    // (Upsilon, 0, 1), (Gamma, 1, 0), (-Upsilon, 0, 1) with eigenvalues
    // lambda1, 0, -lambda1
    const double h = 1e-6;
    auto jac_apply = [&](const std::array<double, 3>& v) {
        std::array<double, 3> out{};
        auto fp = nd_rhs(kCanon, {h * v[0], h * v[1], h * v[2]});
        auto fm = nd_rhs(kCanon, {-h * v[0], -h * v[1], -h * v[2]});
        for (int i = 0; i < 3; ++i) out[i] = (fp[i] - fm[i]) / (2.0 * h);
        return out;
    };
    const std::array<std::array<double, 3>, 3> evec{{{*d.Upsilon, 0.0, 1.0},
                                                     {*d.Gamma, 1.0, 0.0},
                                                     {-*d.Upsilon, 0.0, 1.0}}};
    const std::array<double, 3> eval{*d.lambda1, 0.0, -*d.lambda1};
    require_close(*d.lambda1, 7.348469228349535, 1e-9, "lambda1 value");
    for (int k = 0; k < 3; ++k) {
        auto jv = jac_apply(evec[k]);
        for (int i = 0; i < 3; ++i)
            require(std::abs(jv[i] - eval[k] * evec[k][i]) < 1e-8 * std::max(1.0, *d.lambda1),
                    "FD Jacobian eigenpair residual >= 1e-8");
    }
    NDConfig cfg;  // defaults: 33 x 65
    ManifoldGrid grid = manifold_fixed_point(kCanon, cfg);
    for (std::size_t i = 1; i < grid.ratios.size(); ++i)
        require(grid.ratios[i] <= 0.55, "manifold Picard ratio > 0.55");
    // center-flow closed form
    OdeRhs rhs = [](double, const Vec& y, Vec& dy) { dy = {-y[0] * y[0]}; };
    const double y0 = 0.004;
    OdeSolution csol = integrate_ode(rhs, 0.0, 50.0, {y0});
    double cworst = 0.0;
    for (std::size_t i = 0; i < csol.t.size(); ++i)
        cworst = std::max(cworst, std::abs(csol.y[i][0] - 1.0 / (csol.t[i] + 1.0 / y0)));
    require(cworst < 1e-10, "center flow vs closed form >= 1e-10");
    NDSolution sol = nd_solution(grid, kCanon, cfg, 0.5 * grid.r0, 0.25 * grid.r0, 4.0);
    for (std::size_t i = 0; i < sol.t_samples.size(); ++i)
        require(std::abs(sol.X[i][1] * sol.t_samples[i] - 1.0) < 1e-14, "X2(t) != 1/t");
    const Sample& deep = sol.trajectory.samples.front();
    require_close(powp(deep.coord, 2.0 / 3.0) * deep.value, 1.0, 1e-2, "r^{2/3} u limit");
    // multiplicity: five stable seeds, pairwise-distinct trajectories
    std::vector<NDSolution> sols;
    for (double f : {-0.4, -0.2, 0.1, 0.25, 0.4})
        sols.push_back(nd_solution(grid, kCanon, cfg, 0.5 * grid.r0, f * grid.r0, 4.0));
    for (std::size_t a = 0; a < sols.size(); ++a)
        for (std::size_t b = a + 1; b < sols.size(); ++b) {
            const double rlo = std::max(sols[a].trajectory.samples.front().coord,
                                        sols[b].trajectory.samples.front().coord) * 1.01;
            const double rhi = std::min(sols[a].trajectory.samples.back().coord,
                                        sols[b].trajectory.samples.back().coord) * 0.99;
            double dist = 0.0;
            for (int i = 0; i < 100; ++i) {
                const double r = rlo * powp(rhi / rlo, i / 99.0);
                dist = std::max(dist, std::abs(sols[a].trajectory.eval(r).value -
                                               sols[b].trajectory.eval(r).value));
            }
            require(dist > 1e-6, "ND multiplicity: trajectories not distinct");
        }
}

// 8. MB pipeline
void criterion_8() {
    ContinuationRun run = mb_continuation(kCanon);
    require(run.bound_ok, "a priori bound z <= Lambda violated");
    BumpAnalysis ba = bump_analysis(run.limit_candidate);
    require(ba.bumps.size() >= 2, "candidate has < 2 bumps");
    for (const Bump& b : ba.bumps)
        require(b.peak_rel_dev <= 0.10, "per-bump bubble fit > 10% at peak");
    // decreasing spacing ratio needs a third bump: push the shoot deeper
    Trajectory deep = shoot_removable(kCanon, 1e14, run.r_max);
    BumpAnalysis bd = bump_analysis(deep);
    require(bd.bumps.size() >= 3, "deep shoot has < 3 bumps");
    bool decreasing = true;
    for (std::size_t i = 1; i < bd.spacing_ratios.size(); ++i)
        if (!(bd.spacing_ratios[i] < bd.spacing_ratios[i - 1])) decreasing = false;
    require(decreasing, "bump spacing ratios not decreasing");
    PohozaevLimit pl = pohozaev_limit(run.limit_candidate);
    require(pl.conclusive && std::abs(pl.value) < 1e-4, "MB P-limit not ~0");
    MbOptions opt;
    opt.r_min = 1e-15;  // resolved range of the gamma = 1e6 member
    ContinuationRun cut = mb_continuation(kCanon, opt);
    require(classify(cut.limit_candidate, kCanon).label == ProfileLabel::MB,
            "classifier label != MB");
}

// 9. curvature-style diagnostic
void criterion_9() {
    {
        Params p{3, 1.0, 1.0, 4.4, std::nullopt};  // ell = 0.3 < s
        Trajectory tr = shoot_removable(p, 1e6, radius_thresholds(p, 1.0).R_Lambda);
        CurvatureDiagnostics cd = curvature_diagnostics(tr, p, 0.3);
        require(cd.run_inf.back() <= 0.1 * cd.run_inf.front(),
                "ell<s: running inf did not decrease 10x");
        require(cd.run_sup.back() < 10.0, "ell<s: running sup unbounded");
        require(std::abs(cd.K.back() - 1.0) < 1e-2, "ell<s: K does not tend to 1");
    }
    {
        Params p{6, 1.0, 1.0, 1.3, std::nullopt};  // ell = 1.4 > s
        Trajectory tr = shoot_removable(p, 1e6, radius_thresholds(p, 26.0).R_Lambda);
        CurvatureDiagnostics cd = curvature_diagnostics(tr, p, 1.4);
        require(cd.run_sup.back() >= 10.0 * cd.run_sup.front(),
                "ell>s: running sup did not increase 10x");
        require(std::abs(cd.K.back() - 1.0) < 1e-2, "ell>s: K does not tend to 1");
    }
}

// 10. classifier guards on an adversarial corpus
void criterion_10() {
    std::mt19937_64 rng(10);
    std::uniform_int_distribution<int> un(3, 6);
    std::uniform_real_distribution<double> us(0.3, 1.7);
    std::uniform_real_distribution<double> umu(0.1, 5.0);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (int c = 0; c < 50; ++c) {
        Params p;
        p.n = un(rng);
        p.s = us(rng);
        p.mu = umu(rng);
        DerivedConstants d0 = derive_constants(p);
        // exponent drawn across the whole admissible-and-not range
        p.q = 1.1 + u01(rng) * (d0.two_star - 1.0 - 1.2);
        DerivedConstants d = derive_constants(p);
        // synthetic positive trajectory: one of four shapes
        Trajectory traj;
        traj.chart = kR;
        traj.params = p;
        const int shape = c % 4;
        const double rlo = 1e-8, rhi = 10.0;
        const int N = 800;
        for (int i = 0; i < N; ++i) {
            const double r = rlo * powp(rhi / rlo, i / (N - 1.0));
            double u = 0.0, du = 0.0;
            if (shape == 0) {  // pure power law
                const double alpha = 0.3 * (p.n - 2.0);
                u = powp(r, -alpha);
                du = -alpha * powp(r, -alpha - 1.0);
            } else if (shape == 1) {  // bubble
                u = bubble_eval(p, 1.0, r);
                du = bubble_deriv(p, 1.0, r);
            } else if (shape == 2) {  // two superposed bubbles (multi-bump lookalike)
                u = bubble_eval(p, 1.0, r) + bubble_eval(p, 1e-4, r);
                du = bubble_deriv(p, 1.0, r) + bubble_deriv(p, 1e-4, r);
            } else {  // oscillating z profile
                const double half = 0.5 * (p.n - 2.0);
                const double amp = 0.5 * d.Lambda0 * (1.0 + 0.5 * std::sin(3.0 * std::log(r)));
                u = amp * powp(r, -half);
                du = amp * (-half) * powp(r, -half - 1.0) +
                     0.75 * d.Lambda0 * std::cos(3.0 * std::log(r)) * powp(r, -half - 1.0);
            }
            traj.samples.push_back({r, u, du});
        }
        ProfileClass pc = classify(traj, p);
        if (p.q <= d.two_star_s - 1.0)
            require(pc.label != ProfileLabel::ND, "ND emitted for q <= 2*(s)-1");
        if (p.q <= d.two_star - 2.0)
            require(pc.label != ProfileLabel::MB, "MB emitted for q <= 2*-2");
    }
}

const char* kNames[10] = {
    "closed-form zoo identities",
    "bubble exactness and Kelvin symmetry",
    "conservation and monotonicity",
    "removable shooting",
    "orbit family",
    "CGS contraction and classification",
    "ND pipeline",
    "MB pipeline",
    "curvature diagnostic",
    "classifier guards",
};

}  // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::fprintf(stderr, "usage: acceptance <criterion 1..10>\n");
        return 2;
    }
    const int c = std::atoi(argv[1]);
    if (c < 1 || c > 10) {
        std::fprintf(stderr, "usage: acceptance <criterion 1..10>\n");
        return 2;
    }
    try {
        switch (c) {
            case 1: criterion_1(); break;
            case 2: criterion_2(); break;
            case 3: criterion_3(); break;
            case 4: criterion_4(); break;
            case 5: criterion_5(); break;
            case 6: criterion_6(); break;
            case 7: criterion_7(); break;
            case 8: criterion_8(); break;
            case 9: criterion_9(); break;
            case 10: criterion_10(); break;
        }
    } catch (const std::exception& e) {
        std::printf("FAIL: criterion %d %s (exception: %s)\n", c, kNames[c - 1], e.what());
        return 1;
    }
    if (g_failures) {
        std::printf("FAIL: criterion %d %s (%d check(s); first: %s)\n", c, kNames[c - 1],
                    g_failures, g_first_failure.c_str());
        return 1;
    }
    std::printf("PASS: criterion %d %s\n", c, kNames[c - 1]);
    return 0;
}
