#include "swarmfield/scenario.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace swarmfield {

DerivedParams derive_params(const ScenarioConfig& config) {
    DerivedParams out;
    if (config.margin_override) {
        out.margins = margins_from_bounds(config.margin_override->first,
                                          config.margin_override->second, config.d_m);
    } else {
        const Mat3 pv[] = {config.meas_cov};
        out.margins = compute_margins(pv, config.d_m);
    }
    SafetyParams& s = out.safety;
    s.d_m = config.d_m;
    s.d_m_inflated = out.margins.d_m_inflated;
    s.eps_J = out.margins.eps_J;
    s.comm_radius = 2.0 * out.margins.d_m_inflated;
    s.d_c = s.comm_radius;
    s.d_r = 0.75 * s.d_c;
    s.d_eps = s.d_r - config.goal_tol;
    s.sharpness = config.sharpness;
    out.eps_f = out.margins.eps_d + config.goal_tol;
    return out;
}

std::vector<std::string> validate_scenario(const ScenarioConfig& config) {
    std::vector<std::string> issues;
    auto fail = [&](const std::string& msg) { issues.push_back(msg); };

    if (config.dt <= 0.0) fail("dt must be > 0 (got " + std::to_string(config.dt) + ")");
    if (config.steps < 1) fail("steps must be >= 1 (got " + std::to_string(config.steps) + ")");
    if (config.d_m <= 0.0) fail("d_m must be > 0 (got " + std::to_string(config.d_m) + ")");
    if (config.sharpness <= 0.0) fail("mu must be > 0");
    if (config.goal_tol <= 0.0) fail("eps must be > 0");
    if (config.agents.empty()) fail("at least one agent is required");

    for (std::size_t i = 0; i < config.agents.size(); ++i) {
        const AgentParams& p = config.agents[i].params;
        const std::string tag = "agent " + std::to_string(i) + ": ";
        if (p.body_radius <= 0.0) fail(tag + "radius must be > 0");
        if (p.speed_gain <= 0.0) fail(tag + "k_u must be > 0");
        if (p.turn_gain <= 0.0) fail(tag + "k_omega must be > 0");
        if (!(p.cooperation > 0.0 && p.cooperation < 1.0)) fail(tag + "eps_i must lie in (0,1)");
        if (!config.agents[i].initial.position.allFinite()) fail(tag + "non-finite start position");
        if (!std::isfinite(config.agents[i].initial.heading)) fail(tag + "non-finite heading");
    }

    if (config.wind.profile == WindProfile::sinusoidal) {
        if (std::abs(config.wind.amplitude.x()) > 1.0 || std::abs(config.wind.amplitude.y()) > 1.0) {
            fail("sinusoidal wind amplitudes must lie in [-1, 1] m/s");
        }
        if (config.wind.period.x() <= 0.0 || config.wind.period.y() <= 0.0) {
            fail("sinusoidal wind periods must be > 0");
        }
    }
    for (int k = 0; k < 3; ++k) {
        if (config.meas_cov(k, k) < 0.0) fail("measurement covariance entries must be >= 0");
    }
    if (config.wind.covariance(0, 0) < 0.0 || config.wind.covariance(1, 1) < 0.0) {
        fail("wind covariance entries must be >= 0");
    }
    if (config.mode == ProtocolMode::nominal) {
        if (config.wind.profile != WindProfile::constant || !config.wind.mean.isZero() ||
            !config.wind.covariance.isZero() || !config.meas_cov.isZero()) {
            fail("nominal mode requires zero wind and zero noise covariances");
        }
    }

    // Threshold ladder and goal separation need the derived margins.
    try {
        const DerivedParams derived = derive_params(config);
        try {
            derived.safety.validate();
        } catch (const std::invalid_argument& e) {
            std::ostringstream os;
            os << e.what() << " (d_m'=" << derived.safety.d_m_inflated
               << ", d_eps=" << derived.safety.d_eps << ", d_r=" << derived.safety.d_r
               << ", d_c=" << derived.safety.d_c << ", R_c=" << derived.safety.comm_radius << ")";
            fail(os.str());
        }
        for (std::size_t i = 0; i < config.agents.size(); ++i) {
            for (std::size_t j = i + 1; j < config.agents.size(); ++j) {
                const Scalar sep = (config.agents[i].params.goal - config.agents[j].params.goal).norm();
                if (sep <= 2.0 * derived.safety.comm_radius) {
                    std::ostringstream os;
                    os << "goals of agents " << i << " and " << j << " are " << sep
                       << " m apart; must exceed 2 R_c = " << 2.0 * derived.safety.comm_radius;
                    fail(os.str());
                }
            }
        }
    } catch (const std::invalid_argument& e) {
        fail(std::string("margin derivation failed: ") + e.what());
    }
    return issues;
}

namespace {

std::string join_issues(const std::vector<std::string>& issues) {
    std::string out = "scenario invalid:";
    for (const std::string& s : issues) out += "\n  - " + s;
    return out;
}

}  // namespace

ScenarioError::ScenarioError(std::vector<std::string> v)
    : std::runtime_error(join_issues(v)), issues(std::move(v)) {}

namespace {

const std::set<std::string> kKnownKeys = {
    "mode", "dt", "steps", "seed", "d_m", "mu", "eps", "k_u", "k_omega", "eps_i",
    "wind.profile", "wind.mean_x", "wind.mean_y",
    "wind.amp_x", "wind.amp_y", "wind.period_x", "wind.period_y",
    "wind.phase_x", "wind.phase_y", "wind.cov_xx", "wind.cov_yy", "wind.noise_scaling",
    "meas.cov_x", "meas.cov_y", "meas.cov_theta",
};

struct Parser {
    std::map<std::string, std::string> kv;
    std::vector<std::array<Scalar, 6>> agent_rows;
    std::vector<std::string> issues;

    bool number(const std::string& key, Scalar& out) {
        auto it = kv.find(key);
        if (it == kv.end()) return false;
        try {
            std::size_t pos = 0;
            out = std::stod(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            issues.push_back("key '" + key + "': not a number: '" + it->second + "'");
            return false;
        }
        return true;
    }
};

}  // namespace

ScenarioConfig parse_scenario_text(const std::string& text) {
    Parser p;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            p.issues.push_back("line " + std::to_string(lineno) + ": expected 'key = value'");
            continue;
        }
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "agent") {
            std::istringstream row(value);
            std::array<Scalar, 6> vals{};
            if (row >> vals[0] >> vals[1] >> vals[2] >> vals[3] >> vals[4] >> vals[5]) {
                p.agent_rows.push_back(vals);
            } else {
                p.issues.push_back("line " + std::to_string(lineno) +
                                   ": agent needs 6 numbers (x0 y0 theta0 goal_x goal_y radius)");
            }
            continue;
        }
        if (!kKnownKeys.contains(key)) {
            p.issues.push_back("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
            continue;
        }
        if (p.kv.contains(key)) {
            p.issues.push_back("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
            continue;
        }
        p.kv[key] = value;
    }

    if (p.kv.empty() && p.agent_rows.empty() && p.issues.empty()) {
        throw ScenarioError({"empty scenario file"});
    }

    ScenarioConfig config;
    if (auto it = p.kv.find("mode"); it != p.kv.end()) {
        if (it->second == "robust") config.mode = ProtocolMode::robust;
        else if (it->second == "nominal") config.mode = ProtocolMode::nominal;
        else p.issues.push_back("mode must be 'robust' or 'nominal', got '" + it->second + "'");
    }
    Scalar v = 0.0;
    if (p.number("dt", v)) config.dt = v;
    if (p.number("steps", v)) config.steps = static_cast<int>(v);
    if (p.number("seed", v)) config.seed = static_cast<std::uint64_t>(v);
    if (p.number("d_m", v)) config.d_m = v;
    if (p.number("mu", v)) config.sharpness = v;
    if (p.number("eps", v)) config.goal_tol = v;

    Scalar k_u = 1.0, k_omega = 2.0, eps_i = 0.5;
    p.number("k_u", k_u);
    p.number("k_omega", k_omega);
    p.number("eps_i", eps_i);

    if (auto it = p.kv.find("wind.profile"); it != p.kv.end()) {
        if (it->second == "constant") config.wind.profile = WindProfile::constant;
        else if (it->second == "sinusoidal") config.wind.profile = WindProfile::sinusoidal;
        else p.issues.push_back("wind.profile must be 'constant' or 'sinusoidal'");
    }
    if (p.number("wind.mean_x", v)) config.wind.mean.x() = v;
    if (p.number("wind.mean_y", v)) config.wind.mean.y() = v;
    if (p.number("wind.amp_x", v)) config.wind.amplitude.x() = v;
    if (p.number("wind.amp_y", v)) config.wind.amplitude.y() = v;
    if (p.number("wind.period_x", v)) config.wind.period.x() = v;
    if (p.number("wind.period_y", v)) config.wind.period.y() = v;
    if (p.number("wind.phase_x", v)) config.wind.phase.x() = v;
    if (p.number("wind.phase_y", v)) config.wind.phase.y() = v;
    if (p.number("wind.cov_xx", v)) config.wind.covariance(0, 0) = v;
    if (p.number("wind.cov_yy", v)) config.wind.covariance(1, 1) = v;
    if (auto it = p.kv.find("wind.noise_scaling"); it != p.kv.end()) {
        if (it->second == "per_step") config.wind.scaling = NoiseScaling::per_step;
        else if (it->second == "sqrt_dt") config.wind.scaling = NoiseScaling::sqrt_dt;
        else p.issues.push_back("wind.noise_scaling must be 'per_step' or 'sqrt_dt'");
    }
    if (p.number("meas.cov_x", v)) config.meas_cov(0, 0) = v;
    if (p.number("meas.cov_y", v)) config.meas_cov(1, 1) = v;
    if (p.number("meas.cov_theta", v)) config.meas_cov(2, 2) = v;

    for (const auto& row : p.agent_rows) {
        AgentSpec spec;
        spec.initial.position = {row[0], row[1]};
        spec.initial.heading = wrap_angle(row[2]);
        spec.params.goal = {row[3], row[4]};
        spec.params.body_radius = row[5];
        spec.params.speed_gain = k_u;
        spec.params.turn_gain = k_omega;
        spec.params.cooperation = eps_i;
        config.agents.push_back(spec);
    }

    std::vector<std::string> all = std::move(p.issues);
    for (std::string& s : validate_scenario(config)) all.push_back(std::move(s));
    if (!all.empty()) throw ScenarioError(std::move(all));
    return config;
}

ScenarioConfig parse_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ScenarioError({"cannot open scenario file: " + path});
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario_text(buf.str());
}

}  // namespace swarmfield
