#include "gprace/config.hpp"

#include "gprace/errors.hpp"
#include "gprace/util.hpp"

#include <algorithm>
#include <cstdlib>
#include <sstream>

namespace gprace {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return {};
    std::size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

std::string strip_comment(const std::string& line) {
    bool in_quote = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_quote = !in_quote;
        if (line[i] == '#' && !in_quote) return line.substr(0, i);
    }
    return line;
}

} // namespace

ConfigFile ConfigFile::parse_file(const std::filesystem::path& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const MissingArtifactError&) {
        throw ConfigError("config file not found: " + path.string());
    }
    return parse_string(text, path.string());
}

ConfigFile ConfigFile::parse_string(const std::string& text, const std::string& origin) {
    ConfigFile cfg;
    cfg.origin_ = origin;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(strip_comment(line));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3) {
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": malformed section header '" + line + "'");
            }
            section = trim(line.substr(1, line.size() - 2));
            cfg.sections_[section]; // section may be empty
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value', got '" + line + "'");
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
        }
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
            value = value.substr(1, value.size() - 2);
        }
        auto& sec = cfg.sections_[section];
        if (sec.count(key)) {
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + section + "." + key + "'");
        }
        sec[key] = value;
    }
    return cfg;
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
    auto it = sections_.find(section);
    return it != sections_.end() && it->second.count(key) > 0;
}

std::string ConfigFile::raw(const std::string& section, const std::string& key) const {
    auto it = sections_.find(section);
    if (it == sections_.end() || !it->second.count(key)) {
        throw ConfigError(origin_ + ": missing required key '" + section + "." + key + "'");
    }
    return it->second.at(key);
}

double ConfigFile::get_double(const std::string& section, const std::string& key) const {
    const std::string v = raw(section, key);
    char* end = nullptr;
    double d = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0') {
        throw ConfigError(origin_ + ": key '" + section + "." + key + "': '" + v + "' is not a number");
    }
    return d;
}

double ConfigFile::get_double(const std::string& section, const std::string& key, double fallback) const {
    return has(section, key) ? get_double(section, key) : fallback;
}

std::int64_t ConfigFile::get_int(const std::string& section, const std::string& key) const {
    const std::string v = raw(section, key);
    char* end = nullptr;
    long long i = std::strtoll(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0') {
        throw ConfigError(origin_ + ": key '" + section + "." + key + "': '" + v + "' is not an integer");
    }
    return i;
}

std::int64_t ConfigFile::get_int(const std::string& section, const std::string& key, std::int64_t fallback) const {
    return has(section, key) ? get_int(section, key) : fallback;
}

bool ConfigFile::get_bool(const std::string& section, const std::string& key, bool fallback) const {
    if (!has(section, key)) return fallback;
    const std::string v = raw(section, key);
    if (v == "true") return true;
    if (v == "false") return false;
    throw ConfigError(origin_ + ": key '" + section + "." + key + "': '" + v + "' is not true/false");
}

std::string ConfigFile::get_string(const std::string& section, const std::string& key, const std::string& fallback) const {
    return has(section, key) ? raw(section, key) : fallback;
}

std::vector<std::string> ConfigFile::keys(const std::string& section) const {
    std::vector<std::string> out;
    auto it = sections_.find(section);
    if (it == sections_.end()) return out;
    for (const auto& [k, v] : it->second) out.push_back(k);
    return out;
}

void ConfigFile::reject_unknown_keys(const std::string& section, const std::vector<std::string>& allowed) const {
    for (const auto& k : keys(section)) {
        if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
            throw ConfigError(origin_ + ": unknown key '" + section + "." + k + "'");
        }
    }
}

namespace {

void check(bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
}

void check_order(double lo, double hi, const std::string& section, const std::string& what) {
    check(lo < hi, section + "." + what + ": min must be < max");
}

} // namespace

AppConfig AppConfig::load(const std::filesystem::path& path) {
    return from_config(ConfigFile::parse_file(path));
}

AppConfig AppConfig::from_config(const ConfigFile& cfg) {
    AppConfig a;

    cfg.reject_unknown_keys("vehicle", {"mass", "inertia_z", "lf", "lr"});
    a.vehicle.m = cfg.get_double("vehicle", "mass");
    a.vehicle.Iz = cfg.get_double("vehicle", "inertia_z");
    a.vehicle.lf = cfg.get_double("vehicle", "lf");
    a.vehicle.lr = cfg.get_double("vehicle", "lr");
    check(a.vehicle.m > 0, "vehicle.mass: must be > 0");
    check(a.vehicle.Iz > 0, "vehicle.inertia_z: must be > 0");
    check(a.vehicle.lf > 0, "vehicle.lf: must be > 0");
    check(a.vehicle.lr > 0, "vehicle.lr: must be > 0");

    cfg.reject_unknown_keys("tires", {"Bf", "Cf", "Df", "Br", "Cr", "Dr"});
    a.tires.Bf = cfg.get_double("tires", "Bf");
    a.tires.Cf = cfg.get_double("tires", "Cf");
    a.tires.Df = cfg.get_double("tires", "Df");
    a.tires.Br = cfg.get_double("tires", "Br");
    a.tires.Cr = cfg.get_double("tires", "Cr");
    a.tires.Dr = cfg.get_double("tires", "Dr");
    for (double v : {a.tires.Bf, a.tires.Cf, a.tires.Df, a.tires.Br, a.tires.Cr, a.tires.Dr}) {
        check(v > 0, "tires: all Pacejka coefficients must be > 0");
    }

    cfg.reject_unknown_keys("drivetrain", {"Cm1", "Cm2", "Croll", "Cd"});
    a.drive.Cm1 = cfg.get_double("drivetrain", "Cm1");
    a.drive.Cm2 = cfg.get_double("drivetrain", "Cm2");
    a.drive.Croll = cfg.get_double("drivetrain", "Croll");
    a.drive.Cd = cfg.get_double("drivetrain", "Cd");
    check(a.drive.Cm1 > 0, "drivetrain.Cm1: must be > 0");
    check(a.drive.Cm2 >= 0, "drivetrain.Cm2: must be >= 0");
    check(a.drive.Croll >= 0, "drivetrain.Croll: must be >= 0");
    check(a.drive.Cd >= 0, "drivetrain.Cd: must be >= 0");

    cfg.reject_unknown_keys("limits", {"d_min", "d_max", "delta_min", "delta_max", "ddelta_min",
                                       "ddelta_max", "v_max", "a_lat_max", "a_lon_max", "a_brake_max"});
    a.limits.d_min = cfg.get_double("limits", "d_min");
    a.limits.d_max = cfg.get_double("limits", "d_max");
    a.limits.delta_min = cfg.get_double("limits", "delta_min");
    a.limits.delta_max = cfg.get_double("limits", "delta_max");
    a.limits.ddelta_min = cfg.get_double("limits", "ddelta_min");
    a.limits.ddelta_max = cfg.get_double("limits", "ddelta_max");
    a.limits.v_max = cfg.get_double("limits", "v_max");
    a.limits.a_lat_max = cfg.get_double("limits", "a_lat_max");
    a.limits.a_lon_max = cfg.get_double("limits", "a_lon_max");
    a.limits.a_brake_max = cfg.get_double("limits", "a_brake_max");
    check_order(a.limits.d_min, a.limits.d_max, "limits", "d");
    check_order(a.limits.delta_min, a.limits.delta_max, "limits", "delta");
    check_order(a.limits.ddelta_min, a.limits.ddelta_max, "limits", "ddelta");
    check(a.limits.v_max > 0, "limits.v_max: must be > 0");
    check(a.limits.a_lat_max > 0, "limits.a_lat_max: must be > 0");
    check(a.limits.a_lon_max > 0, "limits.a_lon_max: must be > 0");
    check(a.limits.a_brake_max > 0, "limits.a_brake_max: must be > 0");

    cfg.reject_unknown_keys("track", {"n_checkpoints", "radius", "radial_jitter", "angular_jitter",
                                      "width", "min_radius", "resolution", "max_retries"});
    a.track.n_checkpoints = static_cast<int>(cfg.get_int("track", "n_checkpoints", a.track.n_checkpoints));
    a.track.radius = cfg.get_double("track", "radius", a.track.radius);
    a.track.radial_jitter = cfg.get_double("track", "radial_jitter", a.track.radial_jitter);
    a.track.angular_jitter = cfg.get_double("track", "angular_jitter", a.track.angular_jitter);
    a.track.width = cfg.get_double("track", "width", a.track.width);
    a.track.min_radius = cfg.get_double("track", "min_radius", a.track.min_radius);
    a.track.resolution = cfg.get_double("track", "resolution", a.track.resolution);
    a.track.max_retries = static_cast<int>(cfg.get_int("track", "max_retries", a.track.max_retries));
    check(a.track.n_checkpoints >= 6, "track.n_checkpoints: must be >= 6");
    check(a.track.radius > 0, "track.radius: must be > 0");
    check(a.track.radial_jitter >= 0 && a.track.radial_jitter < 1, "track.radial_jitter: must be in [0, 1)");
    check(a.track.angular_jitter >= 0 && a.track.angular_jitter < 0.5, "track.angular_jitter: must be in [0, 0.5)");
    check(a.track.width > 0, "track.width: must be > 0");
    check(a.track.min_radius > 0, "track.min_radius: must be > 0");
    check(a.track.resolution > 0, "track.resolution: must be > 0");
    check(a.track.max_retries > 0, "track.max_retries: must be > 0");

    cfg.reject_unknown_keys("purepursuit", {"lookahead", "speed_gain", "gain_jitter"});
    a.purepursuit.lookahead = cfg.get_double("purepursuit", "lookahead", a.purepursuit.lookahead);
    a.purepursuit.speed_gain = cfg.get_double("purepursuit", "speed_gain", a.purepursuit.speed_gain);
    a.purepursuit.gain_jitter = cfg.get_double("purepursuit", "gain_jitter", a.purepursuit.gain_jitter);
    check(a.purepursuit.lookahead > 0, "purepursuit.lookahead: must be > 0");
    check(a.purepursuit.speed_gain > 0, "purepursuit.speed_gain: must be > 0");
    check(a.purepursuit.gain_jitter >= 0 && a.purepursuit.gain_jitter < 1, "purepursuit.gain_jitter: must be in [0, 1)");

    cfg.reject_unknown_keys("mpc", {"horizon", "q_pos", "r_d", "r_ddelta", "s_slack"});
    a.mpc.horizon = static_cast<int>(cfg.get_int("mpc", "horizon", a.mpc.horizon));
    a.mpc.q_pos = cfg.get_double("mpc", "q_pos", a.mpc.q_pos);
    a.mpc.r_d = cfg.get_double("mpc", "r_d", a.mpc.r_d);
    a.mpc.r_ddelta = cfg.get_double("mpc", "r_ddelta", a.mpc.r_ddelta);
    a.mpc.s_slack = cfg.get_double("mpc", "s_slack", a.mpc.s_slack);
    check(a.mpc.horizon >= 2, "mpc.horizon: must be >= 2");
    check(a.mpc.q_pos > 0, "mpc.q_pos: must be > 0");
    check(a.mpc.r_d > 0, "mpc.r_d: must be > 0");
    check(a.mpc.r_ddelta > 0, "mpc.r_ddelta: must be > 0");
    check(a.mpc.s_slack > 0, "mpc.s_slack: must be > 0");

    cfg.reject_unknown_keys("solver", {"sqp_iters", "newton_iters", "tol", "trust_init", "slack_threshold"});
    a.solver.sqp_iters = static_cast<int>(cfg.get_int("solver", "sqp_iters", a.solver.sqp_iters));
    a.solver.newton_iters = static_cast<int>(cfg.get_int("solver", "newton_iters", a.solver.newton_iters));
    a.solver.tol = cfg.get_double("solver", "tol", a.solver.tol);
    a.solver.trust_init = cfg.get_double("solver", "trust_init", a.solver.trust_init);
    a.solver.slack_threshold = cfg.get_double("solver", "slack_threshold", a.solver.slack_threshold);
    check(a.solver.sqp_iters >= 1, "solver.sqp_iters: must be >= 1");
    check(a.solver.newton_iters >= 1, "solver.newton_iters: must be >= 1");
    check(a.solver.tol > 0, "solver.tol: must be > 0");
    check(a.solver.trust_init > 0, "solver.trust_init: must be > 0");
    check(a.solver.slack_threshold > 0, "solver.slack_threshold: must be > 0");

    cfg.reject_unknown_keys("gp", {"restarts", "sweeps", "golden_iters", "max_samples"});
    a.gp.restarts = static_cast<int>(cfg.get_int("gp", "restarts", a.gp.restarts));
    a.gp.sweeps = static_cast<int>(cfg.get_int("gp", "sweeps", a.gp.sweeps));
    a.gp.golden_iters = static_cast<int>(cfg.get_int("gp", "golden_iters", a.gp.golden_iters));
    a.gp.max_samples = static_cast<int>(cfg.get_int("gp", "max_samples", a.gp.max_samples));
    check(a.gp.restarts >= 1, "gp.restarts: must be >= 1");
    check(a.gp.sweeps >= 0, "gp.sweeps: must be >= 0");
    check(a.gp.golden_iters >= 4, "gp.golden_iters: must be >= 4");
    check(a.gp.max_samples >= 50, "gp.max_samples: must be >= 50");

    cfg.reject_unknown_keys("experiment", {"collect_laps", "race_laps", "update_laps", "plant_substeps",
                                           "ts", "offtrack_margin"});
    a.experiment.collect_laps = static_cast<int>(cfg.get_int("experiment", "collect_laps", a.experiment.collect_laps));
    a.experiment.race_laps = static_cast<int>(cfg.get_int("experiment", "race_laps", a.experiment.race_laps));
    a.experiment.update_laps = static_cast<int>(cfg.get_int("experiment", "update_laps", a.experiment.update_laps));
    a.experiment.plant_substeps = static_cast<int>(cfg.get_int("experiment", "plant_substeps", a.experiment.plant_substeps));
    a.experiment.ts = cfg.get_double("experiment", "ts", a.experiment.ts);
    a.experiment.offtrack_margin = cfg.get_double("experiment", "offtrack_margin", a.experiment.offtrack_margin);
    check(a.experiment.collect_laps >= 1, "experiment.collect_laps: must be >= 1");
    check(a.experiment.race_laps >= 1, "experiment.race_laps: must be >= 1");
    check(a.experiment.update_laps >= 1, "experiment.update_laps: must be >= 1");
    check(a.experiment.plant_substeps >= 1, "experiment.plant_substeps: must be >= 1");
    check(a.experiment.ts > 0, "experiment.ts: must be > 0");
    check(a.experiment.offtrack_margin >= 0, "experiment.offtrack_margin: must be >= 0");

    return a;
}

} // namespace gprace
