#ifndef HSLAB_ND_HPP
#define HSLAB_ND_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "charts.hpp"
#include "constants.hpp"
#include "errors.hpp"
#include "ode.hpp"
#include "picard.hpp"

namespace hslab {

// Configuration of the center-stable-manifold construction for the
// three-variable system  X1 = t(1 - mu r^s u^k), X2 = 1/t, X3 = r u'/u + vartheta,
// t = r^{-beta}.
struct NDConfig {
    double epsilon = 0.5;   // Psi_eps regularization threshold, needs eps < 1 - delta^2
    double delta = 0.5;     // ball radius for the C1 estimate (and r0 < delta/2)
    double C2 = 1.0;        // Lipschitz budget for the manifold graph
    int grid_ny = 33;       // nodes in the center direction y in [0, r0]
    int grid_nz = 65;       // nodes in the stable direction z in [-r0, r0]
    double tol = 1e-8;      // Picard sup-distance tolerance on the grid
    int max_iter = 60;
    double burn_in = 1.0;   // time after which Psi_eps must stay inactive
    double window = 0.1;    // re-projection window for the reconstructed flow
};

// C^1 continuation of t^zeta below eps: first-order Taylor about eps.
inline double psi_eps(double t, double eps, double zeta) {
    if (t >= eps) return powp(t, zeta);
    return powp(eps, zeta) + zeta * powp(eps, zeta - 1.0) * (t - eps);
}

namespace detail {
struct NDScalars {
    double k, vartheta, beta, zeta, Upsilon, Gamma, lambda1;
};

inline NDScalars nd_scalars(const Params& p) {
    DerivedConstants d = derive_constants(p);
    if (!d.nd_admissible)
        throw validation_error("nd: q outside the admissible range (2*(s)-1, 2*-1)");
    if (!(p.mu > 0.0)) throw validation_error("nd: mu must be positive");
    return {d.k, *d.vartheta, *d.beta, *d.zeta, *d.Upsilon, *d.Gamma, *d.lambda1};
}
}  // namespace detail

// Vector field in the original coordinates; regularized variant replaces
// (1 - xi1 xi2)_+^zeta by Psi_eps(1 - xi1 xi2).
inline std::array<double, 3> nd_rhs(const Params& p, const std::array<double, 3>& xi,
                                    bool regularized = true, double eps = 0.5) {
    auto sc = detail::nd_scalars(p);
    const double x1 = xi[0], x2 = xi[1], x3 = xi[2];
    const double one_m = 1.0 - x1 * x2;
    const double H1 = x1 * x2 + sc.k / sc.beta * one_m * x3;
    const double H2 = -x2 * x2;
    const double pw = regularized ? psi_eps(one_m, eps, sc.zeta)
                                  : powp(std::max(one_m, 0.0), sc.zeta);
    const double H3 = powp(p.mu, -sc.zeta) / sc.beta * x1 * pw +
                      x2 / sc.beta * (x3 - sc.vartheta) * (x3 - sc.vartheta + p.n - 2.0);
    return {H1, H2, H3};
}

// Change of coordinates diagonalizing the linearization:
//   Y = (Upsilon (Z1 - Z3) + Gamma Z2, Z2, Z1 + Z3)
// and its printed inverse.
inline std::array<double, 3> diagonal_change(const Params& p, bool to_diagonal,
                                             const std::array<double, 3>& v) {
    auto sc = detail::nd_scalars(p);
    if (to_diagonal) {
        const double Y1 = v[0], Y2 = v[1], Y3 = v[2];
        return {(Y1 - sc.Gamma * Y2 + sc.Upsilon * Y3) / (2.0 * sc.Upsilon), Y2,
                (sc.Gamma * Y2 + sc.Upsilon * Y3 - Y1) / (2.0 * sc.Upsilon)};
    }
    const double Z1 = v[0], Z2 = v[1], Z3 = v[2];
    return {sc.Upsilon * (Z1 - Z3) + sc.Gamma * Z2, Z2, Z1 + Z3};
}

// Nonlinear remainders in diagonal coordinates:
//   Z' = (lambda1 Z1 + h1(Z), -Z2^2, -lambda1 Z3 + h3(Z)),
// derived mechanically by conjugating the regularized field and subtracting
// the linear part (the remainders are not available in closed form).
inline std::array<double, 3> nd_h(const Params& p, const std::array<double, 3>& Z,
                                  double eps = 0.5) {
    auto sc = detail::nd_scalars(p);
    auto Y = diagonal_change(p, false, Z);
    auto HY = nd_rhs(p, Y, true, eps);
    auto D = diagonal_change(p, true, HY);
    return {D[0] - sc.lambda1 * Z[0], D[1] + Z[1] * Z[1], D[2] + sc.lambda1 * Z[2]};
}

// Finite-difference certificate for the diagonalization: the conjugated
// Jacobian at the origin must be diag(lambda1, 0, -lambda1) and the
// remainders must vanish to second order.
inline void nd_validate_diagonalization(const Params& p, double eps = 0.5, double fd_tol = 1e-7) {
    auto sc = detail::nd_scalars(p);
    const double h = 1e-6;
    double J[3][3];
    for (int j = 0; j < 3; ++j) {
        std::array<double, 3> zp{0, 0, 0}, zm{0, 0, 0};
        zp[j] = h;
        zm[j] = -h;
        auto Yp = diagonal_change(p, false, zp);
        auto Ym = diagonal_change(p, false, zm);
        auto Hp = nd_rhs(p, Yp, true, eps);
        auto Hm = nd_rhs(p, Ym, true, eps);
        auto Dp = diagonal_change(p, true, Hp);
        auto Dm = diagonal_change(p, true, Hm);
        for (int i = 0; i < 3; ++i) J[i][j] = (Dp[i] - Dm[i]) / (2.0 * h);
    }
    const double diag[3] = {sc.lambda1, 0.0, -sc.lambda1};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const double want = i == j ? diag[i] : 0.0;
            if (std::abs(J[i][j] - want) > fd_tol * (1.0 + sc.lambda1))
                throw numeric_error("nd_validate_diagonalization: conjugated Jacobian mismatch");
        }
    // quadratic smallness of the remainders
    for (double scale : {1e-2, 1e-3}) {
        std::array<double, 3> Z{0.37 * scale, -0.61 * scale, 0.42 * scale};
        auto hv = nd_h(p, Z, eps);
        const double mag = std::abs(hv[0]) + std::abs(hv[1]) + std::abs(hv[2]);
        if (mag > 100.0 * scale * scale)
            throw numeric_error("nd_validate_diagonalization: remainder not second order");
    }
}

// Sampled bound C1 with |h1|+|h3| <= C1 sum xi_j^2 and
// |grad h1|+|grad h3| <= C1 sum |xi_j| over B_delta(0), 1.5x safety factor.
inline double estimate_C1(const Params& p, const NDConfig& cfg) {
    double worst = 0.0;
    const int N = 9;
    const double fd = 1e-7;
    for (int i = 0; i <= N; ++i)
        for (int j = 0; j <= N; ++j)
            for (int l = 0; l <= N; ++l) {
                std::array<double, 3> Z{cfg.delta * (2.0 * i / N - 1.0),
                                        cfg.delta * (2.0 * j / N - 1.0),
                                        cfg.delta * (2.0 * l / N - 1.0)};
                const double nrm2 = Z[0] * Z[0] + Z[1] * Z[1] + Z[2] * Z[2];
                if (nrm2 > cfg.delta * cfg.delta || nrm2 < 1e-12) continue;
                auto hv = nd_h(p, Z, cfg.epsilon);
                worst = std::max(worst, (std::abs(hv[0]) + std::abs(hv[2])) / nrm2);
                double grad = 0.0;
                for (int c = 0; c < 3; ++c) {
                    auto Zp = Z, Zm = Z;
                    Zp[c] += fd;
                    Zm[c] -= fd;
                    auto hp = nd_h(p, Zp, cfg.epsilon);
                    auto hm = nd_h(p, Zm, cfg.epsilon);
                    grad += std::hypot((hp[0] - hm[0]) / (2 * fd), 0.0) +
                            std::abs((hp[2] - hm[2]) / (2 * fd));
                }
                const double nrm1 = std::abs(Z[0]) + std::abs(Z[1]) + std::abs(Z[2]);
                worst = std::max(worst, grad / nrm1);
            }
    return 1.5 * worst;
}

struct RadiusChoice {
    double r0;
    std::array<double, 5> bounds;  // four inequalities plus delta/2
    double rho;
};

// r0 = 0.9 min{ |c|/(4C1(1+C2^2)), rho/(3C1(3+2C2)), aC2/(6C1(1+C2)),
//               a/(12C1(2+C2)), delta/2 },   rho defaulting to a/2.
inline RadiusChoice choose_radius(double C1, double C2, double a, double c_abs, double delta,
                                  double rho = -1.0) {
    if (!(C1 > 0 && C2 > 0 && a > 0 && c_abs > 0 && delta > 0))
        throw validation_error("choose_radius: all constants must be positive");
    if (rho <= 0.0) rho = 0.5 * a;
    RadiusChoice rc;
    rc.rho = rho;
    rc.bounds = {c_abs / (4.0 * C1 * (1.0 + C2 * C2)), rho / (3.0 * C1 * (3.0 + 2.0 * C2)),
                 a * C2 / (6.0 * C1 * (1.0 + C2)), a / (12.0 * C1 * (2.0 + C2)), 0.5 * delta};
    double m = rc.bounds[0];
    for (double b : rc.bounds) m = std::min(m, b);
    rc.r0 = 0.9 * m;
    if (!(rc.r0 > 0.0)) throw validation_error("choose_radius: nonpositive radius");
    return rc;
}

// Lipschitz graph w over D_{r0} = [0, r0] x [-r0, r0] with its certificates.
struct ManifoldGrid {
    Params params;
    NDConfig cfg;
    double r0 = 0.0;
    double C1 = 0.0;
    std::array<double, 5> bounds{};
    std::vector<double> w;  // row-major, iy * nz + iz
    double lipschitz_estimate = 0.0;
    std::vector<double> ratios;
    double final_delta = 0.0;

    double node_y(int iy) const { return r0 * iy / (cfg.grid_ny - 1); }
    double node_z(int iz) const { return r0 * (2.0 * iz / (cfg.grid_nz - 1) - 1.0); }

    // bilinear interpolation, queries clamped to the box
    double interp(double y, double z) const {
        const int ny = cfg.grid_ny, nz = cfg.grid_nz;
        double fy = std::clamp(y / r0, 0.0, 1.0) * (ny - 1);
        double fz = std::clamp(0.5 * (z / r0 + 1.0), 0.0, 1.0) * (nz - 1);
        int iy = std::min(static_cast<int>(fy), ny - 2);
        int iz = std::min(static_cast<int>(fz), nz - 2);
        const double ay = fy - iy, az = fz - iz;
        return (1 - ay) * (1 - az) * w[iy * nz + iz] + (1 - ay) * az * w[iy * nz + iz + 1] +
               ay * (1 - az) * w[(iy + 1) * nz + iz] + ay * az * w[(iy + 1) * nz + iz + 1];
    }
};

namespace detail {
// Integrate the (S_w) flow from (y0, z0) and accumulate the T-map integral
//   Tw(y0, z0) = -int_0^inf e^{-a t} h1(w(flow), flow) dt.
// The center direction is decoupled (y' = -y^2), so y(t) = 1/(t + 1/y0) is
// used in closed form; the ODE state is (z, I).
inline double tmap_node(const Params& p, const NDConfig& cfg, const ManifoldGrid& grid,
                        double y0, double z0, double T_max, double a, double c) {
    auto yc = [y0](double t) { return y0 <= 0.0 ? 0.0 : 1.0 / (t + 1.0 / y0); };
    const double zbound = std::max(y0, std::abs(z0)) + 1e-9;
    OdeRhs rhs = [&](double t, const Vec& st, Vec& d) {
        const double y = yc(t);
        const double z = st[0];
        const double x = grid.interp(y, z);
        auto hv = nd_h(p, {x, y, z}, cfg.epsilon);
        d.resize(2);
        d[0] = c * z + hv[2];
        d[1] = std::exp(-a * t) * hv[0];
    };
    OdeOptions opts;
    opts.rtol = 1e-10;
    opts.atol = 1e-13;
    OdeSolution sol = integrate_ode(rhs, 0.0, T_max, {z0, 0.0}, opts);
    for (std::size_t i = 0; i < sol.t.size(); ++i)
        if (std::abs(sol.y[i][0]) > zbound + 1e-6 * grid.r0)
            throw numeric_error("manifold_fixed_point: flow escaped the validity box");
    return -sol.y.back()[1];
}
}  // namespace detail

// Theorem-style graph-transform fixed point for the manifold w.
inline ManifoldGrid manifold_fixed_point(const Params& p, const NDConfig& cfg) {
    p.validate();
    auto sc = detail::nd_scalars(p);
    if (!(cfg.epsilon < 1.0 - cfg.delta * cfg.delta))
        throw validation_error("manifold_fixed_point: need epsilon < 1 - delta^2");
    nd_validate_diagonalization(p, cfg.epsilon);
    const double a = sc.lambda1, c = -sc.lambda1;
    const double C1 = estimate_C1(p, cfg);
    RadiusChoice rc = choose_radius(C1, cfg.C2, a, std::abs(c), cfg.delta);

    ManifoldGrid grid;
    grid.params = p;
    grid.cfg = cfg;
    grid.r0 = rc.r0;
    grid.C1 = C1;
    grid.bounds = rc.bounds;
    const int ny = cfg.grid_ny, nz = cfg.grid_nz;
    grid.w.assign(static_cast<std::size_t>(ny) * nz, 0.0);
    const double T_max =
        std::log(std::max(30.0 * C1 * grid.r0 * grid.r0 / (a * cfg.tol), 10.0)) / a;

    auto sweep = [&](const std::vector<double>& wcur) {
        ManifoldGrid tmp = grid;
        tmp.w = wcur;
        std::vector<double> out(wcur.size());
        for (int iy = 0; iy < ny; ++iy)
            for (int iz = 0; iz < nz; ++iz)
                out[iy * nz + iz] = detail::tmap_node(p, cfg, tmp, grid.node_y(iy),
                                                      grid.node_z(iz), T_max, a, c);
        // the graph must pass through the origin
        const int iz0 = (nz - 1) / 2;
        if (std::abs(out[iz0]) > 1e-12)
            throw numeric_error("manifold_fixed_point: w(0,0) drifted from 0");
        out[iz0] = 0.0;
        for (double v : out)
            if (std::abs(v) > grid.r0 + 1e-12)
                throw numeric_error("manifold_fixed_point: graph left [-r0, r0]");
        return out;
    };
    auto dist = [](const std::vector<double>& A, const std::vector<double>& B) {
        double m = 0.0;
        for (std::size_t i = 0; i < A.size(); ++i) m = std::max(m, std::abs(A[i] - B[i]));
        return m;
    };
    PicardResult<std::vector<double>> res;
    try {
        res = picard_iterate(sweep, grid.w, cfg.tol, cfg.max_iter, dist);
    } catch (const numeric_error& e) {
        throw numeric_error(std::string("manifold_fixed_point: contraction failure (consider a "
                                        "smaller r0): ") + e.what());
    }
    grid.w = res.fixed_point;
    grid.ratios = res.ratios;
    grid.final_delta = res.final_delta;
    // empirical node-pair Lipschitz quotient
    const double hy = grid.r0 / (ny - 1), hz = 2.0 * grid.r0 / (nz - 1);
    double lip = 0.0;
    for (int iy = 0; iy < ny; ++iy)
        for (int iz = 0; iz < nz; ++iz) {
            if (iy + 1 < ny)
                lip = std::max(lip, std::abs(grid.w[(iy + 1) * nz + iz] - grid.w[iy * nz + iz]) / hy);
            if (iz + 1 < nz)
                lip = std::max(lip, std::abs(grid.w[iy * nz + iz + 1] - grid.w[iy * nz + iz]) / hz);
        }
    grid.lipschitz_estimate = lip;
    if (lip > cfg.C2)
        throw numeric_error("manifold_fixed_point: Lipschitz estimate exceeds the C2 budget");
    return grid;
}

struct NDSolution {
    Trajectory trajectory;  // RChart, ascending r
    double manifold_stability = 0.0;  // max |Z1(t) - w(Z2, Z3)| along the flow
    double min_one_minus_x1x2 = 0.0;
    std::vector<double> t_samples;           // shifted times t = r^{-beta}
    std::vector<std::array<double, 3>> X;    // X-variables at t_samples
};

// Reconstruct a radial solution from a manifold point (y20, z30): march the
// regularized system in short windows, re-projecting the unstable coordinate
// onto the graph after each window (lambda1 > 0 would otherwise amplify the
// graph interpolation error exponentially), shift time by 1/y20 so
// X2(t) = 1/t exactly, and invert the defining transformation.
inline NDSolution nd_solution(const ManifoldGrid& grid, const Params& p, const NDConfig& cfg,
                              double y20, double z30, double horizon_decades = 4.0) {
    auto sc = detail::nd_scalars(p);
    if (!(y20 > 0.0 && y20 <= grid.r0) || std::abs(z30) > grid.r0)
        throw validation_error("nd_solution: (y20, z30) outside D_{r0}");

    // Y2 is decoupled with closed form 1/(t + 1/y20); keeping it closed-form in
    // the right-hand side makes the reconstructed X2(t) = 1/t exact.
    auto y2c = [y20](double t) { return 1.0 / (t + 1.0 / y20); };
    OdeRhs rhs = [&](double t, const Vec& st, Vec& d) {
        auto H = nd_rhs(p, {st[0], y2c(t), st[1]}, true, cfg.epsilon);
        d.resize(2);
        d[0] = H[0];
        d[1] = H[2];
    };
    const double Th = (powp(10.0, sc.beta * horizon_decades) - 1.0) / y20;
    OdeOptions opts;
    opts.rtol = 1e-12;
    opts.atol = 1e-15;

    NDSolution out;
    double stab = 0.0, min1m = std::numeric_limits<double>::infinity();
    Trajectory traj;
    traj.chart = Chart{ChartTag::RChart, LogOrientation::LogR};
    traj.params = p;
    traj.provenance = "nd_solution y20=" + std::to_string(y20) + " z30=" + std::to_string(z30);

    auto on_graph = [&](double y, double z) {
        return grid.interp(std::clamp(y, 0.0, grid.r0), std::clamp(z, -grid.r0, grid.r0));
    };
    auto record = [&](double t, double Y1, double Y3) {
        const double Y2 = y2c(t);
        const double one_m = 1.0 - Y1 * Y2;
        min1m = std::min(min1m, one_m);
        if (t >= cfg.burn_in && one_m < cfg.epsilon)
            throw numeric_error("nd_solution: regularization breach after burn-in");
        const double tx = t + 1.0 / y20;  // shifted time: X(tx) = Y(tx - 1/y20)
        const double r = powp(tx, -1.0 / sc.beta);
        if (!(one_m > 0.0)) throw numeric_error("nd_solution: 1 - X1 X2 lost positivity");
        const double u = powp(one_m / p.mu, 1.0 / sc.k) * powp(r, -sc.vartheta);
        const double du = u * (Y3 - sc.vartheta) / r;
        traj.samples.push_back({r, u, du});
        out.t_samples.push_back(tx);
        out.X.push_back({Y1, 1.0 / tx, Y3});
    };

    double Z1 = on_graph(y20, z30), Z3 = z30;
    auto Y0 = diagonal_change(p, false, {Z1, y20, Z3});
    double Y1 = Y0[0], Y3 = Y0[2], t = 0.0;
    record(t, Y1, Y3);
    // multiplicative sampling: ~600 rows, log-uniform in the radius
    const double off = 1.0 / y20;
    const double keep_ratio = powp((Th + off) / off, 1.0 / 600.0);
    double next_keep = off * keep_ratio;
    while (t < Th) {
        const double t1 = std::min(t + cfg.window, Th);
        OdeSolution sol = integrate_ode(rhs, t, t1, {Y1, Y3}, opts);
        t = t1;
        Y1 = sol.y.back()[0];
        Y3 = sol.y.back()[1];
        // measure the off-graph drift accumulated over this window, then
        // project the unstable coordinate back onto the graph
        auto Z = diagonal_change(p, true, {Y1, y2c(t), Y3});
        const double drift = std::abs(Z[0] - on_graph(Z[1], Z[2]));
        stab = std::max(stab, drift);
        if (drift > 1e-3)
            throw numeric_error("nd_solution: trajectory left the manifold neighborhood");
        Z[0] = on_graph(Z[1], Z[2]);
        auto Yp = diagonal_change(p, false, Z);
        Y1 = Yp[0];
        Y3 = Yp[2];
        if (t + off >= next_keep || t >= Th) {
            record(t, Y1, Y3);
            while (next_keep <= t + off) next_keep *= keep_ratio;
        }
    }
    std::reverse(traj.samples.begin(), traj.samples.end());
    std::reverse(out.t_samples.begin(), out.t_samples.end());
    std::reverse(out.X.begin(), out.X.end());
    out.trajectory = std::move(traj);
    out.manifold_stability = stab;
    out.min_one_minus_x1x2 = min1m;
    return out;
}

}  // namespace hslab

#endif
