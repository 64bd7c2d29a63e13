// hslab command-line driver: reproducible runs of the radial-profile toolkit.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>

#include <CLI11.hpp>

#include "hslab/cgs.hpp"
#include "hslab/charts.hpp"
#include "hslab/classify.hpp"
#include "hslab/constants.hpp"
#include "hslab/errors.hpp"
#include "hslab/io.hpp"
#include "hslab/mb.hpp"
#include "hslab/nd.hpp"
#include "hslab/orbits.hpp"
#include "hslab/pohozaev.hpp"

namespace fs = std::filesystem;
using namespace hslab;

namespace {

// flat key=value config with every key accounted for (unknown keys rejected)
class Cfg {
    std::map<std::string, std::string> kv_;
    std::set<std::string> seen_;

public:
    void load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw validation_error("config: cannot open '" + path + "'");
        kv_ = parse_config(in);
    }
    std::optional<std::string> take(const std::string& k) {
        seen_.insert(k);
        auto it = kv_.find(k);
        if (it == kv_.end()) return std::nullopt;
        return it->second;
    }
    void finish() const {
        for (const auto& [k, v] : kv_)
            if (!seen_.count(k)) throw validation_error("config: unknown key '" + k + "'");
    }
    const std::map<std::string, std::string>& raw() const { return kv_; }
};

struct Common {
    Params p;
    std::string out_dir;
    std::string config_path;
    CLI::Option *on = nullptr, *os = nullptr, *omu = nullptr, *oq = nullptr, *oR = nullptr;
    double R_val = 0.0;
};

void add_common(CLI::App* cmd, Common& c) {
    c.on = cmd->add_option("--n", c.p.n, "dimension (>= 3)");
    c.os = cmd->add_option("--s", c.p.s, "singularity exponent in (0,2)");
    c.omu = cmd->add_option("--mu", c.p.mu, "perturbation strength");
    c.oq = cmd->add_option("--q", c.p.q, "perturbation exponent");
    c.oR = cmd->add_option("--R", c.R_val, "domain radius");
    const char* env = std::getenv("HSLAB_OUT");
    c.out_dir = env ? env : ".";
    cmd->add_option("--out", c.out_dir, "output directory");
    cmd->add_option("--config", c.config_path, "flat key=value config file");
}

// fold config values into options the command line did not set
void resolve_common(Common& c, Cfg& cfg) {
    if (!c.config_path.empty()) cfg.load(c.config_path);
    auto fold = [&](CLI::Option* opt, const char* key, auto& var) {
        auto v = cfg.take(key);
        if (v && opt->count() == 0) {
            std::istringstream is(*v);
            is >> var;
            if (is.fail()) throw validation_error(std::string("config: bad value for ") + key);
        }
    };
    fold(c.on, "params.n", c.p.n);
    fold(c.os, "params.s", c.p.s);
    fold(c.omu, "params.mu", c.p.mu);
    fold(c.oq, "params.q", c.p.q);
    fold(c.oR, "params.R", c.R_val);
    if (c.oR->count() > 0 || cfg.take("params.R")) c.p.R = c.R_val;
    auto od = cfg.take("output.dir");
    if (od) c.out_dir = *od;
    c.p.validate();
}

// scalar config fallback for command-specific keys
template <class T>
void fold_key(Cfg& cfg, CLI::Option* opt, const std::string& key, T& var) {
    auto v = cfg.take(key);
    if (v && (!opt || opt->count() == 0)) {
        std::istringstream is(*v);
        is >> var;
        if (is.fail()) throw validation_error("config: bad value for " + key);
    }
}

void write_file(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw validation_error("cannot write " + path.string());
    out << content;
}

void write_manifest(const Common& c, const std::string& command,
                    const std::map<std::string, std::string>& resolved, const json& tols) {
    std::map<std::string, std::string> m = resolved;
    m["params.n"] = std::to_string(c.p.n);
    m["params.s"] = format_double(c.p.s);
    m["params.mu"] = format_double(c.p.mu);
    m["params.q"] = format_double(c.p.q);
    if (c.p.R) m["params.R"] = format_double(*c.p.R);
    m["output.dir"] = c.out_dir;
    write_file(fs::path(c.out_dir) / "manifest.json",
               make_manifest(command, m, tols).dump(2) + "\n");
}

json jopt(const std::optional<double>& v) {
    if (v) return *v;
    return "undefined";
}

void save_trajectory(const Common& c, const Trajectory& traj, const std::string& stem) {
    write_file(fs::path(c.out_dir) / (stem + ".csv"), trajectory_csv(traj));
    write_file(fs::path(c.out_dir) / (stem + ".json"),
               trajectory_sidecar_json(traj).dump(2) + "\n");
}

Trajectory load_trajectory(const std::string& path, const std::string& chart_name_in,
                           const Params& p) {
    std::ifstream in(path);
    if (!in) throw validation_error("cannot open trajectory CSV '" + path + "'");
    return trajectory_from_csv(in, chart_from_name(chart_name_in), p);
}

json bump_json(const BumpAnalysis& ba) {
    json bumps = json::array();
    for (const Bump& b : ba.bumps)
        bumps.push_back({{"r_peak", b.r_peak},
                         {"z_peak", b.z_peak},
                         {"eta", b.eta},
                         {"peak_rel_dev", b.peak_rel_dev},
                         {"halfwidth_rel_dev", b.halfwidth_rel_dev}});
    return json{{"bumps", bumps}, {"spacing_ratios", ba.spacing_ratios}};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hslab: radial singular-profile laboratory"};
    app.require_subcommand(1);

    // ---- constants ----
    auto* c_const = app.add_subcommand("constants", "closed-form constants as JSON");
    Common cc_const;
    add_common(c_const, cc_const);
    bool as_json = false;
    double cl_Lambda = 0.0, cl_Rbar = 0.0;
    c_const->add_flag("--json", as_json, "JSON output (default)");
    auto* oL = c_const->add_option("--Lambda", cl_Lambda, "also report R_Lambda etc.");
    auto* oRb = c_const->add_option("--Rbar", cl_Rbar, "also report xi_c for this radius");

    // ---- bubble ----
    auto* c_bub = app.add_subcommand("bubble", "sample an explicit bubble U_eta");
    Common cc_bub;
    add_common(c_bub, cc_bub);
    double b_eta = 1.0, b_rlo = 1e-3, b_rhi = 10.0;
    int b_samples = 512;
    auto* ob_eta = c_bub->add_option("--eta", b_eta, "bubble scale");
    c_bub->add_option("--rlo", b_rlo, "smallest radius");
    c_bub->add_option("--rhi", b_rhi, "largest radius");
    c_bub->add_option("--samples", b_samples, "sample count");

    // ---- shoot ----
    auto* c_sh = app.add_subcommand("shoot", "removable shooting from u(0)=gamma");
    Common cc_sh;
    add_common(c_sh, cc_sh);
    double sh_gamma = 1.0, sh_rmax = 0.2;
    auto* osh_g = c_sh->add_option("--gamma", sh_gamma, "central value");
    auto* osh_r = c_sh->add_option("--rmax", sh_rmax, "integration radius");

    // ---- orbit ----
    auto* c_orb = app.add_subcommand("orbit", "periodic orbit of the unperturbed flow");
    Common cc_orb;
    add_common(c_orb, cc_orb);
    double orb_sigma = 0.02, orb_tau = 0.0;
    int orb_samples = 512;
    auto* oorb_s = c_orb->add_option("--sigma", orb_sigma, "energy level in (0, sigma_bar]");
    auto* oorb_t = c_orb->add_option("--tau", orb_tau, "phase angle in [0, 2pi)");
    c_orb->add_option("--samples", orb_samples, "rows in orbit.csv");

    // ---- cgs ----
    auto* c_cgs = app.add_subcommand("cgs", "singular (CGS)-type solution by contraction");
    Common cc_cgs;
    add_common(c_cgs, cc_cgs);
    double g_sigma = 0.02, g_tau = 0.0, g_horizon = 60.0, g_tol = 1e-8, g_T0 = 40.0;
    auto* ocgs_s = c_cgs->add_option("--sigma", g_sigma, "orbit energy level");
    auto* ocgs_t = c_cgs->add_option("--tau", g_tau, "orbit phase angle");
    auto* ocgs_h = c_cgs->add_option("--horizon", g_horizon, "t-length of the output");
    c_cgs->add_option("--tol", g_tol, "fixed-point tolerance");
    c_cgs->add_option("--T0", g_T0, "initial contraction start time");

    // ---- nd ----
    auto* c_nd = app.add_subcommand("nd", "(ND)-type solutions from the center-stable manifold");
    Common cc_nd;
    add_common(c_nd, cc_nd);
    double nd_y20 = -1.0, nd_z30 = 0.0, nd_decades = 4.0;
    int nd_sweep = 0;
    NDConfig ndc;
    auto* ond_y = c_nd->add_option("--y20", nd_y20, "center coordinate (default r0/2)");
    auto* ond_z = c_nd->add_option("--z30", nd_z30, "stable coordinate");
    auto* ond_sw = c_nd->add_option("--z30-sweep", nd_sweep, "emit this many z30 values");
    auto* ond_dec = c_nd->add_option("--decades", nd_decades, "radial decades to cover");
    auto* ond_tol = c_nd->add_option("--tol", ndc.tol, "manifold Picard tolerance");
    auto* ond_ny = c_nd->add_option("--grid-ny", ndc.grid_ny, "grid nodes in y");
    auto* ond_nz = c_nd->add_option("--grid-nz", ndc.grid_nz, "grid nodes in z");

    // ---- mb ----
    auto* c_mb = app.add_subcommand("mb", "multi-bump candidate by gamma-continuation");
    Common cc_mb;
    add_common(c_mb, cc_mb);
    MbOptions mbo;
    double mb_gmax = 1e6, mb_gratio = 10.0, mb_ell = 0.0;
    bool mb_per_gamma = false;
    auto* omb_L = c_mb->add_option("--Lambda", mbo.Lambda, "a priori bound level");
    auto* omb_gmax = c_mb->add_option("--gamma-max", mb_gmax, "largest gamma");
    auto* omb_grat = c_mb->add_option("--gamma-ratio", mb_gratio, "schedule ratio");
    auto* omb_rmin = c_mb->add_option("--rmin", mbo.r_min, "restriction cutoff");
    auto* omb_rmax = c_mb->add_option("--rmax", mbo.r_max, "continuation radius (default R_Lambda)");
    auto* omb_ell = c_mb->add_option("--ell", mb_ell, "also run the curvature diagnostic");
    c_mb->add_flag("--per-gamma", mb_per_gamma, "emit every member trajectory");

    // ---- pohozaev ----
    auto* c_poh = app.add_subcommand("pohozaev", "Pohozaev function report for a trajectory");
    Common cc_poh;
    add_common(c_poh, cc_poh);
    std::string poh_in, poh_chart = "r";
    c_poh->add_option("--in", poh_in, "trajectory CSV")->required();
    c_poh->add_option("--chart", poh_chart, "chart of the input (r|xi|log_r|log_inv_r)");

    // ---- classify ----
    auto* c_cls = app.add_subcommand("classify", "profile classification of a trajectory");
    Common cc_cls;
    add_common(c_cls, cc_cls);
    std::string cls_in, cls_chart = "r";
    c_cls->add_option("--in", cls_in, "trajectory CSV")->required();
    c_cls->add_option("--chart", cls_chart, "chart of the input");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (c_const->parsed()) {
            Common& c = cc_const;
            Cfg cfg;
            resolve_common(c, cfg);
            fold_key(cfg, oL, "constants.Lambda", cl_Lambda);
            fold_key(cfg, oRb, "constants.Rbar", cl_Rbar);
            cfg.finish();
            DerivedConstants d = derive_constants(c.p);
            json j{{"two_star_s", d.two_star_s},
                   {"two_star", d.two_star},
                   {"c_ns", d.c_ns},
                   {"lambda", d.lambda},
                   {"c_mu_q_n", d.c_mu_q_n},
                   {"k", d.k},
                   {"vartheta", jopt(d.vartheta)},
                   {"beta", jopt(d.beta)},
                   {"zeta", jopt(d.zeta)},
                   {"Upsilon", jopt(d.Upsilon)},
                   {"Gamma", jopt(d.Gamma)},
                   {"lambda1", jopt(d.lambda1)},
                   {"Lambda0", d.Lambda0},
                   {"M0", d.M0},
                   {"sigma_bar", d.sigma_bar},
                   {"Theta", d.Theta},
                   {"omega_n_minus_1", d.omega_n_minus_1},
                   {"a_xi", d.a_xi},
                   {"nd_admissible", d.nd_admissible},
                   {"mb_admissible", d.mb_admissible}};
            if (d.nd_admissible) {
                j["ell_q"] = ell_q_closed(c.p);
            } else {
                j["ell_q"] = "undefined";
            }
            if (oL->count() > 0 || cl_Lambda > 0.0) {
                RadiusThresholds rt = radius_thresholds(
                    c.p, cl_Lambda,
                    (oRb->count() > 0 || cl_Rbar > 0.0) ? std::optional<double>(cl_Rbar)
                                                        : std::nullopt);
                j["R_Lambda"] = rt.R_Lambda;
                if (rt.R_star_infinite)
                    j["R_star"] = "infinite";
                else
                    j["R_star"] = jopt(rt.R_star);
                j["xi_c"] = jopt(rt.xi_c);
            }
            std::cout << j.dump(2) << "\n";
            if (c.out_dir != ".") {
                write_file(fs::path(c.out_dir) / "constants.json", j.dump(2) + "\n");
                write_manifest(c, "constants", {}, json::object());
            }
        } else if (c_bub->parsed()) {
            Common& c = cc_bub;
            Cfg cfg;
            resolve_common(c, cfg);
            fold_key(cfg, ob_eta, "bubble.eta", b_eta);
            cfg.finish();
            if (!(b_rlo > 0.0 && b_rhi > b_rlo))
                throw validation_error("bubble: need 0 < rlo < rhi");
            Trajectory traj;
            traj.chart = {ChartTag::RChart, LogOrientation::LogR};
            traj.params = c.p;
            traj.provenance = "bubble eta=" + format_double(b_eta);
            for (int i = 0; i < b_samples; ++i) {
                const double r = b_rlo * powp(b_rhi / b_rlo, i / (b_samples - 1.0));
                traj.samples.push_back({r, bubble_eval(c.p, b_eta, r),
                                        bubble_deriv(c.p, b_eta, r)});
            }
            save_trajectory(c, traj, "trajectory");
            write_manifest(c, "bubble", {{"bubble.eta", format_double(b_eta)}}, json::object());
        } else if (c_sh->parsed()) {
            Common& c = cc_sh;
            Cfg cfg;
            resolve_common(c, cfg);
            fold_key(cfg, osh_g, "shoot.gamma", sh_gamma);
            fold_key(cfg, osh_r, "shoot.rmax", sh_rmax);
            cfg.finish();
            Trajectory traj = shoot_removable(c.p, sh_gamma, sh_rmax);
            save_trajectory(c, traj, "trajectory");
            json summary = trajectory_sidecar_json(traj);
            PohozaevLimit pl = pohozaev_limit(traj);
            summary["P_limit"] = {{"value", pl.value},
                                  {"spread", pl.spread},
                                  {"conclusive", pl.conclusive}};
            write_file(fs::path(c.out_dir) / "summary.json", summary.dump(2) + "\n");
            write_manifest(c, "shoot",
                           {{"shoot.gamma", format_double(sh_gamma)},
                            {"shoot.rmax", format_double(sh_rmax)}},
                           json::object());
        } else if (c_orb->parsed()) {
            Common& c = cc_orb;
            Cfg cfg;
            resolve_common(c, cfg);
            fold_key(cfg, oorb_s, "orbit.sigma", orb_sigma);
            fold_key(cfg, oorb_t, "orbit.tau_angle", orb_tau);
            cfg.finish();
            auto od = get_orbit(c.p, orb_sigma);
            const double shift = orbit_shift(*od, {orb_sigma, orb_tau});
            std::ostringstream os;
            os << "t,phi,dphi,dphi_dsigma,ddphi_dsigma\n";
            const double P = od->constant ? 1.0 : 2.0 * od->t_sigma;
            for (int i = 0; i <= orb_samples; ++i) {
                const double t = P * i / orb_samples;
                OrbitPoint pt = od->eval_local(t - shift);
                os << format_double(t) << ',' << format_double(pt.phi) << ','
                   << format_double(pt.dphi) << ',' << format_double(pt.dphi_dsigma) << ','
                   << format_double(pt.ddphi_dsigma) << '\n';
            }
            write_file(fs::path(c.out_dir) / "orbit.csv", os.str());
            json j{{"sigma", od->sigma},
                   {"a", od->a_sigma},
                   {"b", od->b_sigma},
                   {"t_sigma", od->t_sigma}};
            write_file(fs::path(c.out_dir) / "orbit.json", j.dump(2) + "\n");
            std::cout << j.dump(2) << "\n";
            write_manifest(c, "orbit",
                           {{"orbit.sigma", format_double(orb_sigma)},
                            {"orbit.tau_angle", format_double(orb_tau)}},
                           json::object());
        } else if (c_cgs->parsed()) {
            Common& c = cc_cgs;
            Cfg cfg;
            resolve_common(c, cfg);
            fold_key(cfg, ocgs_s, "cgs.sigma", g_sigma);
            fold_key(cfg, ocgs_t, "cgs.tau_angle", g_tau);
            fold_key(cfg, ocgs_h, "cgs.horizon", g_horizon);
            cfg.finish();
            CgsSolution sol = cgs_solution(c.p, {g_sigma, g_tau}, g_horizon, g_tol, g_T0);
            save_trajectory(c, sol.trajectory, "trajectory");
            json cert{{"ratio_history", sol.certificate.ratios},
                      {"weighted_norm", sol.certificate.weighted_norm},
                      {"residual", sol.certificate.residual},
                      {"decay_certificate", sol.decay_certificate},
                      {"T0", sol.certificate.T0_used},
                      {"T_max", sol.certificate.T_max_used},
                      {"regime", sol.certificate.regime},
                      {"t0_escalations", sol.certificate.t0_escalations}};
            write_file(fs::path(c.out_dir) / "certificate.json", cert.dump(2) + "\n");
            std::cout << cert.dump(2) << "\n";
            write_manifest(c, "cgs",
                           {{"cgs.sigma", format_double(g_sigma)},
                            {"cgs.tau_angle", format_double(g_tau)},
                            {"cgs.horizon", format_double(g_horizon)}},
                           json{{"tol", g_tol}});
        } else if (c_nd->parsed()) {
            Common& c = cc_nd;
            Cfg cfg;
            resolve_common(c, cfg);
            fold_key(cfg, ond_y, "nd.y20", nd_y20);
            fold_key(cfg, ond_z, "nd.z30", nd_z30);
            fold_key(cfg, ond_sw, "nd.z30_sweep", nd_sweep);
            fold_key(cfg, ond_dec, "nd.decades", nd_decades);
            fold_key(cfg, ond_tol, "nd.tol", ndc.tol);
            fold_key(cfg, ond_ny, "nd.grid_ny", ndc.grid_ny);
            fold_key(cfg, ond_nz, "nd.grid_nz", ndc.grid_nz);
            cfg.finish();
            ManifoldGrid grid = manifold_fixed_point(c.p, ndc);
            const double y20 = nd_y20 > 0.0 ? nd_y20 : 0.5 * grid.r0;
            std::vector<double> z30s;
            if (nd_sweep > 0) {
                for (int i = 0; i < nd_sweep; ++i)
                    z30s.push_back(grid.r0 * (-0.5 + (nd_sweep == 1 ? 0.5 : i / (nd_sweep - 1.0))));
            } else {
                z30s.push_back(nd_z30);
            }
            json stab = json::array();
            for (std::size_t i = 0; i < z30s.size(); ++i) {
                NDSolution sol = nd_solution(grid, c.p, ndc, y20, z30s[i], nd_decades);
                save_trajectory(c, sol.trajectory,
                                z30s.size() == 1 ? "trajectory"
                                                 : "trajectory_" + std::to_string(i));
                stab.push_back({{"z30", z30s[i]},
                                {"manifold_stability", sol.manifold_stability}});
            }
            auto sc = derive_constants(c.p);
            json cert{{"r0", grid.r0},
                      {"C1", grid.C1},
                      {"bounds", grid.bounds},
                      {"ratios", grid.ratios},
                      {"final_delta", grid.final_delta},
                      {"lipschitz_estimate", grid.lipschitz_estimate},
                      {"eigenvalues", {*sc.lambda1, 0.0, -*sc.lambda1}},
                      {"y20", y20},
                      {"solutions", stab}};
            write_file(fs::path(c.out_dir) / "certificate.json", cert.dump(2) + "\n");
            std::cout << cert.dump(2) << "\n";
            write_manifest(c, "nd",
                           {{"nd.y20", format_double(y20)},
                            {"nd.decades", format_double(nd_decades)}},
                           json{{"tol", ndc.tol}});
        } else if (c_mb->parsed()) {
            Common& c = cc_mb;
            Cfg cfg;
            resolve_common(c, cfg);
            fold_key(cfg, omb_L, "mb.Lambda", mbo.Lambda);
            fold_key(cfg, omb_gmax, "mb.gamma_max", mb_gmax);
            fold_key(cfg, omb_grat, "mb.gamma_ratio", mb_gratio);
            fold_key(cfg, omb_rmin, "mb.r_min", mbo.r_min);
            fold_key(cfg, omb_rmax, "mb.r_max", mbo.r_max);
            fold_key(cfg, omb_ell, "mb.ell", mb_ell);
            cfg.finish();
            if (!(mb_gratio > 1.0)) throw validation_error("mb: gamma ratio must exceed 1");
            for (double g = mb_gratio; g <= mb_gmax * (1.0 + 1e-9); g *= mb_gratio)
                mbo.gammas.push_back(g);
            ContinuationRun run = mb_continuation(c.p, mbo);
            if (mb_per_gamma)
                for (std::size_t i = 0; i < run.members.size(); ++i)
                    save_trajectory(c, run.members[i], "member_" + std::to_string(i));
            save_trajectory(c, run.limit_candidate, "candidate");
            BumpAnalysis ba = bump_analysis(run.limit_candidate);
            PohozaevLimit pl = pohozaev_limit(run.limit_candidate);
            json metrics = json::array();
            for (const CompactMetric& cm : run.metrics)
                metrics.push_back({{"r_lo", cm.r_lo},
                                   {"r_hi", cm.r_hi},
                                   {"sup_diff", cm.sup_diff},
                                   {"decreasing", cm.decreasing}});
            json rep = bump_json(ba);
            rep["P_limit"] = {{"value", pl.value},
                              {"spread", pl.spread},
                              {"conclusive", pl.conclusive}};
            rep["bound_ok"] = run.bound_ok;
            rep["sup_z"] = run.sup_z;
            rep["Lambda"] = run.Lambda;
            rep["r_max"] = run.r_max;
            rep["inconclusive"] = run.inconclusive;
            rep["cauchy_metrics"] = metrics;
            if (omb_ell->count() > 0 || mb_ell > 0.0) {
                CurvatureDiagnostics cd =
                    curvature_diagnostics(run.limit_candidate, c.p, mb_ell);
                rep["curvature"] = {{"K_last", cd.K.back()},
                                    {"run_inf_last", cd.run_inf.back()},
                                    {"run_sup_last", cd.run_sup.back()}};
            }
            write_file(fs::path(c.out_dir) / "report.json", rep.dump(2) + "\n");
            std::cout << rep.dump(2) << "\n";
            write_manifest(c, "mb",
                           {{"mb.Lambda", format_double(mbo.Lambda)},
                            {"mb.gamma_max", format_double(mb_gmax)},
                            {"mb.gamma_ratio", format_double(mb_gratio)}},
                           json{{"bound_tol", mbo.bound_tol}});
        } else if (c_poh->parsed()) {
            Common& c = cc_poh;
            Cfg cfg;
            resolve_common(c, cfg);
            cfg.finish();
            Trajectory traj = load_trajectory(poh_in, poh_chart, c.p);
            PohozaevReport rep = pohozaev_report(traj);
            std::ostringstream os;
            os << "r,P_r\n";
            for (std::size_t i = 0; i < rep.r_values.size(); ++i)
                os << format_double(rep.r_values[i]) << ',' << format_double(rep.P_r[i])
                   << '\n';
            write_file(fs::path(c.out_dir) / "pohozaev.csv", os.str());
            json j{{"limit",
                    {{"value", rep.limit.value},
                     {"spread", rep.limit.spread},
                     {"conclusive", rep.limit.conclusive}}},
                   {"increment_residuals", rep.increment_residuals}};
            write_file(fs::path(c.out_dir) / "pohozaev.json", j.dump(2) + "\n");
            std::cout << j.dump(2) << "\n";
            write_manifest(c, "pohozaev", {{"pohozaev.in", poh_in}}, json::object());
        } else if (c_cls->parsed()) {
            Common& c = cc_cls;
            Cfg cfg;
            resolve_common(c, cfg);
            cfg.finish();
            Trajectory traj = load_trajectory(cls_in, cls_chart, c.p);
            ProfileClass pc = classify(traj, c.p);
            json ev{{"decades", pc.evidence.decades},
                    {"coverage_ok", pc.evidence.coverage_ok},
                    {"z_liminf_proxy", pc.evidence.z_liminf_proxy},
                    {"z_limsup_proxy", pc.evidence.z_limsup_proxy},
                    {"u_rel_variation", pc.evidence.u_rel_variation},
                    {"nd_limit_deviation", pc.evidence.nd_limit_deviation},
                    {"sigma_estimate", pc.evidence.sigma_estimate},
                    {"sigma_spread", pc.evidence.sigma_spread},
                    {"P_limit",
                     {{"value", pc.evidence.P_limit.value},
                      {"spread", pc.evidence.P_limit.spread},
                      {"conclusive", pc.evidence.P_limit.conclusive}}},
                    {"bump_count", pc.evidence.bump_count},
                    {"nd_admissible", pc.evidence.nd_admissible},
                    {"mb_admissible", pc.evidence.mb_admissible}};
            json j{{"label", to_string(pc.label)}, {"evidence", ev}};
            write_file(fs::path(c.out_dir) / "verdict.json", j.dump(2) + "\n");
            std::cout << j.dump(2) << "\n";
            write_manifest(c, "classify", {{"classify.in", cls_in}}, json::object());
            if (!pc.evidence.coverage_ok)
                throw inconclusive_error("classify: insufficient decade coverage");
        }
    } catch (const validation_error& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const numeric_error& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const inconclusive_error& e) {
        std::cerr << "inconclusive: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
