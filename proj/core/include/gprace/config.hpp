#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace gprace {

/// Minimal TOML-style config reader.
///
/// Grammar (one entry per line):
///   [section]
///   key = value        # trailing comments allowed
/// Values are numbers, booleans (true/false), or strings (optionally
/// double-quoted). Keys are unique within a section.
class ConfigFile {
public:
    static ConfigFile parse_file(const std::filesystem::path& path);
    static ConfigFile parse_string(const std::string& text, const std::string& origin = "<string>");

    bool has(const std::string& section, const std::string& key) const;

    double get_double(const std::string& section, const std::string& key) const;
    double get_double(const std::string& section, const std::string& key, double fallback) const;
    std::int64_t get_int(const std::string& section, const std::string& key) const;
    std::int64_t get_int(const std::string& section, const std::string& key, std::int64_t fallback) const;
    bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
    std::string get_string(const std::string& section, const std::string& key, const std::string& fallback) const;

    /// Keys present in a section (empty if the section is absent).
    std::vector<std::string> keys(const std::string& section) const;

    /// Throws ConfigError if the section holds a key not in `allowed`.
    void reject_unknown_keys(const std::string& section, const std::vector<std::string>& allowed) const;

    const std::string& origin() const { return origin_; }

private:
    std::string raw(const std::string& section, const std::string& key) const;

    std::map<std::string, std::map<std::string, std::string>> sections_;
    std::string origin_;
};

struct VehicleParams {
    double m = 0;  ///< mass, kg
    double Iz = 0; ///< yaw inertia, kg m^2
    double lf = 0; ///< CG to front axle, m
    double lr = 0; ///< CG to rear axle, m
};

struct TireParams {
    double Bf = 0, Cf = 0, Df = 0; ///< front Pacejka coefficients (Df in N)
    double Br = 0, Cr = 0, Dr = 0; ///< rear Pacejka coefficients (Dr in N)
};

struct DriveParams {
    double Cm1 = 0;   ///< N per unit duty
    double Cm2 = 0;   ///< N s/m per unit duty
    double Croll = 0; ///< rolling resistance, N
    double Cd = 0;    ///< drag coefficient, N s^2/m^2
};

struct LimitsConfig {
    double d_min = -1, d_max = 1;
    double delta_min = -0.4, delta_max = 0.4;
    double ddelta_min = -5, ddelta_max = 5;
    double v_max = 3;       ///< racing-line speed cap, m/s
    double a_lat_max = 4;   ///< lateral acceleration cap, m/s^2
    double a_lon_max = 3;   ///< forward acceleration cap, m/s^2
    double a_brake_max = 4; ///< braking deceleration cap, m/s^2
};

struct TrackGenConfig {
    int n_checkpoints = 12;
    double radius = 2.0;         ///< mean checkpoint radius, m
    double radial_jitter = 0.3;  ///< fractional radius jitter
    double angular_jitter = 0.3; ///< fractional slot jitter
    double width = 0.5;          ///< track width, m
    double min_radius = 0.35;    ///< curvature cap = 1/min_radius
    double resolution = 0.05;    ///< centerline resampling spacing, m
    int max_retries = 64;
};

struct PurePursuitConfig {
    double lookahead = 0.6;   ///< arc-length lookahead, m
    double speed_gain = 0.5;  ///< duty per m/s of speed error
    double gain_jitter = 0.1; ///< per-lap fractional jitter on both gains
};

struct MpcWeightsConfig {
    int horizon = 20;
    double q_pos = 50;      ///< tracking weight on x and y
    double r_d = 1;         ///< weight on duty increments
    double r_ddelta = 1;    ///< weight on steering rate
    double s_slack = 1000;  ///< weight on boundary slack
};

struct SolverConfig {
    int sqp_iters = 4;
    int newton_iters = 30;
    double tol = 1e-6;           ///< first-order optimality tolerance
    double trust_init = 0.5;     ///< initial trust radius (input units)
    double slack_threshold = 1e-4; ///< slacks above this flag infeasible-relaxed
};

struct GpSearchConfig {
    std::uint64_t seed = 0;
    int restarts = 8;      ///< random log-space starts, spread over the nu grid
    int sweeps = 2;        ///< coordinate refinement sweeps per restart
    int golden_iters = 16; ///< golden-section iterations per coordinate
    int max_samples = 400; ///< farthest-point subsample cap
};

struct ExperimentConfig {
    int collect_laps = 2;
    int race_laps = 1;
    int update_laps = 1;
    int plant_substeps = 4;
    double ts = 0.02;
    double offtrack_margin = 0.15; ///< tolerated boundary excess, m
};

/// All configuration sections used by the pipeline, validated on load.
struct AppConfig {
    VehicleParams vehicle;
    TireParams tires;
    DriveParams drive;
    LimitsConfig limits;
    TrackGenConfig track;
    PurePursuitConfig purepursuit;
    MpcWeightsConfig mpc;
    SolverConfig solver;
    GpSearchConfig gp;
    ExperimentConfig experiment;

    static AppConfig load(const std::filesystem::path& path);
    static AppConfig from_config(const ConfigFile& cfg);
};

} // namespace gprace
