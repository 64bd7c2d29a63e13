#ifndef HSLAB_IO_HPP
#define HSLAB_IO_HPP

#include <charconv>
#include <istream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "charts.hpp"
#include "constants.hpp"
#include "errors.hpp"
#include "orbits.hpp"

namespace hslab {

using json = nlohmann::json;

// shortest round-trip decimal representation of a binary64 value
inline std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
    double v = 0.0;
    const char* b = s.data();
    const char* e = s.data() + s.size();
    while (b < e && (*b == ' ' || *b == '\t')) ++b;
    auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc{})
        throw validation_error("parse_double: bad number '" + s + "'");
    return v;
}

inline const char* chart_name(const Chart& c) {
    switch (c.tag) {
        case ChartTag::RChart: return "r";
        case ChartTag::XiChart: return "xi";
        case ChartTag::LogChart:
            return c.orient == LogOrientation::LogR ? "log_r" : "log_inv_r";
        default: return "?";
    }
}

inline Chart chart_from_name(const std::string& name) {
    if (name == "r") return {ChartTag::RChart, LogOrientation::LogR};
    if (name == "xi") return {ChartTag::XiChart, LogOrientation::LogR};
    if (name == "log_r") return {ChartTag::LogChart, LogOrientation::LogR};
    if (name == "log_inv_r") return {ChartTag::LogChart, LogOrientation::LogInvR};
    throw validation_error("chart_from_name: unknown chart '" + name + "'");
}

// Trajectory CSV with header coord,value,deriv,z,dz.  The z columns carry
// z = r^{(n-2)/2} u and dz/dr; they are left empty for XiChart data.
inline std::string trajectory_csv(const Trajectory& traj) {
    std::ostringstream os;
    os << "coord,value,deriv,z,dz\n";
    const Params& p = traj.params;
    const double half = 0.5 * (p.n - 2.0);
    const Chart rchart{ChartTag::RChart, LogOrientation::LogR};
    for (const Sample& s : traj.samples) {
        os << format_double(s.coord) << ',' << format_double(s.value) << ','
           << format_double(s.deriv);
        if (traj.chart.tag == ChartTag::XiChart) {
            os << ",,\n";
            continue;
        }
        Sample rs = convert_sample(traj.chart, rchart, p, s);
        const double z = powp(rs.coord, half) * rs.value;
        const double dz = powp(rs.coord, half) * (half * rs.value / rs.coord + rs.deriv);
        os << ',' << format_double(z) << ',' << format_double(dz) << '\n';
    }
    return os.str();
}

// read back coord,value,deriv (z columns are derived data and ignored)
inline Trajectory trajectory_from_csv(std::istream& in, const Chart& chart, const Params& p) {
    Trajectory traj;
    traj.chart = chart;
    traj.params = p;
    std::string line;
    if (!std::getline(in, line) || line.rfind("coord,value,deriv", 0) != 0)
        throw validation_error("trajectory_from_csv: missing header");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string f0, f1, f2;
        if (!std::getline(ls, f0, ',') || !std::getline(ls, f1, ',') ||
            !std::getline(ls, f2, ','))
            throw validation_error("trajectory_from_csv: short row '" + line + "'");
        traj.samples.push_back({parse_double(f0), parse_double(f1), parse_double(f2)});
    }
    if (traj.samples.size() < 2)
        throw validation_error("trajectory_from_csv: fewer than 2 samples");
    return traj;
}

inline json params_json(const Params& p) {
    json j{{"n", p.n}, {"s", p.s}, {"mu", p.mu}, {"q", p.q}};
    if (p.R) j["R"] = *p.R;
    return j;
}

inline json trajectory_sidecar_json(const Trajectory& traj) {
    json ev = json::array();
    for (const TrajEvent& e : traj.events)
        ev.push_back({{"kind", e.kind}, {"coord", e.coord}});
    return json{{"chart", chart_name(traj.chart)},
                {"params", params_json(traj.params)},
                {"samples", traj.samples.size()},
                {"events", ev},
                {"provenance", traj.provenance}};
}

// one-period orbit samples: t,phi,dphi,dphi_dsigma,ddphi_dsigma
inline std::string orbit_csv(const OrbitData& od, int n_samples = 512) {
    std::ostringstream os;
    os << "t,phi,dphi,dphi_dsigma,ddphi_dsigma\n";
    const double P = od.constant ? 1.0 : 2.0 * od.t_sigma;
    for (int i = 0; i <= n_samples; ++i) {
        const double t = P * i / n_samples;
        OrbitPoint pt = od.eval_local(t);
        os << format_double(t) << ',' << format_double(pt.phi) << ','
           << format_double(pt.dphi) << ',' << format_double(pt.dphi_dsigma) << ','
           << format_double(pt.ddphi_dsigma) << '\n';
    }
    return os.str();
}

// Flat key=value configuration with section prefixes (params.n=3).
// '#' starts a comment; blank lines ignored; unknown keys are rejected by
// config_require_known.
inline std::map<std::string, std::string> parse_config(std::istream& in) {
    std::map<std::string, std::string> cfg;
    std::string line;
    int lineno = 0;
    auto trim = [](std::string s) {
        const char* ws = " \t\r";
        const auto b = s.find_first_not_of(ws);
        if (b == std::string::npos) return std::string();
        const auto e = s.find_last_not_of(ws);
        return s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw validation_error("parse_config: line " + std::to_string(lineno) +
                                   " is not key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty()) throw validation_error("parse_config: empty key at line " +
                                                std::to_string(lineno));
        if (cfg.count(key))
            throw validation_error("parse_config: duplicate key '" + key + "'");
        cfg[key] = val;
    }
    return cfg;
}

inline void config_require_known(const std::map<std::string, std::string>& cfg,
                                 const std::set<std::string>& allowed) {
    for (const auto& [k, v] : cfg)
        if (!allowed.count(k))
            throw validation_error("config: unknown key '" + k + "'");
}

inline std::string config_text(const std::map<std::string, std::string>& cfg) {
    std::ostringstream os;
    for (const auto& [k, v] : cfg) os << k << '=' << v << '\n';
    return os.str();
}

// Run manifest: configuration, library version, and the tolerances in force.
inline json make_manifest(const std::string& command,
                          const std::map<std::string, std::string>& cfg,
                          const json& tolerances) {
    json jcfg = json::object();
    for (const auto& [k, v] : cfg) jcfg[k] = v;
    return json{{"command", command},
                {"library", "hslab"},
                {"version", "1.0.0"},
                {"config", jcfg},
                {"tolerances", tolerances}};
}

}  // namespace hslab

#endif
