// SPDX-License-Identifier: Apache-2.0
//
// isacsim - desk-scale integrated sensing and communication simulator
// Copyright (C) 2026 isacsim contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef ISACSIM_SCENARIO_HPP
#define ISACSIM_SCENARIO_HPP

#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fusion.hpp"
#include "io.hpp"
#include "sensing.hpp"
#include "slam.hpp"
#include "tracking.hpp"

namespace isacsim {

// Experiment configuration, runners and artifact emission. Configs are JSON
// with a version field; unknown fields are rejected so typos fail loudly.

constexpr int scenario_config_version = 1;

// ---- fail-closed JSON access ---------------------------------------------------

namespace cfgdetail {

inline void require_object(const nlohmann::json &j, const std::string &path)
{
    if (!j.is_object())
        throw config_error("config: '" + path + "' must be an object");
}

/// Every present key must appear in `allowed`; every `required` key must be
/// present. Error messages carry the full field path.
inline void check_keys(const nlohmann::json &j, const std::string &path, const std::vector<std::string> &required,
                       const std::vector<std::string> &optional)
{
    require_object(j, path);
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const auto &k : required)
            known = known || it.key() == k;
        for (const auto &k : optional)
            known = known || it.key() == k;
        if (!known)
            throw config_error("config: unknown field '" + path + "." + it.key() + "'");
    }
    for (const auto &k : required)
        if (!j.contains(k))
            throw config_error("config: missing field '" + path + "." + k + "'");
}

inline double get_double(const nlohmann::json &j, const std::string &path, const std::string &key)
{
    const auto &v = j.at(key);
    if (!v.is_number())
        throw config_error("config: '" + path + "." + key + "' must be a number");
    return v.get<double>();
}

inline double opt_double(const nlohmann::json &j, const std::string &path, const std::string &key, double dflt)
{
    return j.contains(key) ? get_double(j, path, key) : dflt;
}

inline int get_int(const nlohmann::json &j, const std::string &path, const std::string &key)
{
    const auto &v = j.at(key);
    if (!v.is_number_integer())
        throw config_error("config: '" + path + "." + key + "' must be an integer");
    return v.get<int>();
}

inline int opt_int(const nlohmann::json &j, const std::string &path, const std::string &key, int dflt)
{
    return j.contains(key) ? get_int(j, path, key) : dflt;
}

inline std::string get_string(const nlohmann::json &j, const std::string &path, const std::string &key)
{
    const auto &v = j.at(key);
    if (!v.is_string())
        throw config_error("config: '" + path + "." + key + "' must be a string");
    return v.get<std::string>();
}

inline Vec2 get_vec2(const nlohmann::json &j, const std::string &path, const std::string &key)
{
    const auto &v = j.at(key);
    const std::string p = path + "." + key;
    check_keys(v, p, {"x", "y"}, {});
    return {get_double(v, p, "x"), get_double(v, p, "y")};
}

/// Placement with heading given in degrees.
inline Node get_node(const nlohmann::json &j, const std::string &path, const std::string &key)
{
    const auto &v = j.at(key);
    const std::string p = path + "." + key;
    check_keys(v, p, {"x", "y"}, {"heading_deg"});
    return {{get_double(v, p, "x"), get_double(v, p, "y")}, deg2rad(opt_double(v, p, "heading_deg", 0.0))};
}

} // namespace cfgdetail

// ---- per-kind run parameters ----------------------------------------------------

/// Stop-and-scan mapping run: the terminal drives a straight line, stopping
/// every `stop_spacing_m` to sweep a full panorama in `n_orientations` turns.
struct SlamRunConfig {
    Node bs;
    Node start;
    Vec2 camera{0.0, 0.0};
    int n_stops = 20;
    double stop_spacing_m = 2.0;
    double leg_speed_mps = 0.5;
    double rotation_s = 1.0;
    int n_orientations = 4;
    double imu_rate_hz = 1.0;
    double odometry_speed_sigma = 0.25; // consumer-grade dead reckoning; the filter gets the same value
    double odometry_yaw_sigma = 0.008;
    double vision_rate_hz = 30.0;
    double vision_loss = 0.05;
    double vision_sigma_m = 0.05;
    double vision_sigma_range_m = 20.0; // sigma doubles at this distance from the camera
    double scan_noise_power = 1e-13;
    int k_paths = 4;
    double peak_rel_floor_db = 12.0; // drop panorama peaks this far under the strongest
    double peak_snr_floor_db = 10.0; // and peaks this close to the noise floor
    double peak_merge_deg = 6.0;     // bearing-only collapse of sector-edge ghosts
    double bearing_sigma_deg = 1.0;  // panorama peak accuracy after interpolation
    double bearing_gate_nis = 3.84;  // chi-square(1) 95%; drops blended far peaks
    double prior_pos_sigma_m = 0.1;
    double prior_heading_sigma_deg = 2.0;
    double convergence_map_err_m = 0.8;
};

struct ImagingRunConfig {
    Node node;
    double noise_power = 1e-12;
    double min_range_m = 1.0;
    double threshold_db = 10.0;
    double pgm_lo_db = -140.0;
    double pgm_hi_db = -40.0;
};

struct BeamtrackRunConfig {
    Node bs;
    Vec2 track_a, track_b;
    double ue_heading = pi / 2.0;
    TrackingMode mode = TrackingMode::sensing_aided;
    TrackingConfig tracking;
};

struct NetsenseRunConfig {
    struct Terminal {
        int id = 0;
        Node pose;
        double pose_sigma_m = 0.05;
        double heading_sigma_deg = 1.0;
    };
    std::vector<Terminal> terminals;
    double noise_power = 1e-12;
    double min_range_m = 1.0;
    double threshold_db = 10.0;
    double point_sigma_m = 0.15;
    FusionConfig fusion;
};

// ---- scenario --------------------------------------------------------------------

struct Scenario {
    int version = scenario_config_version;
    std::string kind;
    std::string map_path;
    EnvironmentMap env;
    Numerology num;
    std::uint64_t seed = 1;
    std::string out_dir = "out";

    std::optional<SlamRunConfig> slam;
    std::optional<ImagingRunConfig> imaging;
    std::optional<BeamtrackRunConfig> beamtrack;
    std::optional<NetsenseRunConfig> netsense;
};

namespace cfgdetail {

inline SlamRunConfig parse_slam_run(const nlohmann::json &j)
{
    const std::string p = "slam";
    check_keys(j, p, {"bs", "start"},
               {"camera",          "stops",           "stop_spacing_m",  "leg_speed_mps",
                "rotation_s",      "orientations",    "imu_rate_hz",     "odometry_speed_sigma",
                "odometry_yaw_sigma", "vision_rate_hz", "vision_loss",   "vision_sigma_m",
                "vision_sigma_range_m", "scan_noise_power", "k_paths",   "peak_rel_floor_db",
                "peak_snr_floor_db", "peak_merge_deg", "bearing_sigma_deg", "bearing_gate_nis",
                "prior_pos_sigma_m", "prior_heading_sigma_deg", "convergence_map_err_m"});
    SlamRunConfig rc;
    rc.bs = get_node(j, p, "bs");
    rc.start = get_node(j, p, "start");
    rc.camera = j.contains("camera") ? get_vec2(j, p, "camera") : rc.start.pos;
    rc.n_stops = opt_int(j, p, "stops", rc.n_stops);
    rc.stop_spacing_m = opt_double(j, p, "stop_spacing_m", rc.stop_spacing_m);
    rc.leg_speed_mps = opt_double(j, p, "leg_speed_mps", rc.leg_speed_mps);
    rc.rotation_s = opt_double(j, p, "rotation_s", rc.rotation_s);
    rc.n_orientations = opt_int(j, p, "orientations", rc.n_orientations);
    rc.imu_rate_hz = opt_double(j, p, "imu_rate_hz", rc.imu_rate_hz);
    rc.odometry_speed_sigma = opt_double(j, p, "odometry_speed_sigma", rc.odometry_speed_sigma);
    rc.odometry_yaw_sigma = opt_double(j, p, "odometry_yaw_sigma", rc.odometry_yaw_sigma);
    rc.vision_rate_hz = opt_double(j, p, "vision_rate_hz", rc.vision_rate_hz);
    rc.vision_loss = opt_double(j, p, "vision_loss", rc.vision_loss);
    rc.vision_sigma_m = opt_double(j, p, "vision_sigma_m", rc.vision_sigma_m);
    rc.vision_sigma_range_m = opt_double(j, p, "vision_sigma_range_m", rc.vision_sigma_range_m);
    rc.scan_noise_power = opt_double(j, p, "scan_noise_power", rc.scan_noise_power);
    rc.k_paths = opt_int(j, p, "k_paths", rc.k_paths);
    rc.peak_rel_floor_db = opt_double(j, p, "peak_rel_floor_db", rc.peak_rel_floor_db);
    rc.peak_snr_floor_db = opt_double(j, p, "peak_snr_floor_db", rc.peak_snr_floor_db);
    rc.peak_merge_deg = opt_double(j, p, "peak_merge_deg", rc.peak_merge_deg);
    rc.bearing_sigma_deg = opt_double(j, p, "bearing_sigma_deg", rc.bearing_sigma_deg);
    rc.bearing_gate_nis = opt_double(j, p, "bearing_gate_nis", rc.bearing_gate_nis);
    rc.prior_pos_sigma_m = opt_double(j, p, "prior_pos_sigma_m", rc.prior_pos_sigma_m);
    rc.prior_heading_sigma_deg = opt_double(j, p, "prior_heading_sigma_deg", rc.prior_heading_sigma_deg);
    rc.convergence_map_err_m = opt_double(j, p, "convergence_map_err_m", rc.convergence_map_err_m);

    if (rc.n_stops < 1)
        throw config_error("config: slam.stops must be >= 1");
    if (rc.n_orientations < 1 || rc.n_orientations > 8)
        throw config_error("config: slam.orientations must be in [1, 8]");
    if (rc.stop_spacing_m <= 0.0 || rc.leg_speed_mps <= 0.0 || rc.rotation_s <= 0.0)
        throw config_error("config: slam spacing, speed and rotation time must be positive");
    if (rc.imu_rate_hz <= 0.0 || rc.vision_rate_hz <= 0.0)
        throw config_error("config: slam sensor rates must be positive");
    if (rc.vision_loss < 0.0 || rc.vision_loss >= 1.0)
        throw config_error("config: slam.vision_loss must be in [0, 1)");
    if (rc.k_paths < 1)
        throw config_error("config: slam.k_paths must be >= 1");
    return rc;
}

inline ImagingRunConfig parse_imaging_run(const nlohmann::json &j)
{
    const std::string p = "imaging";
    check_keys(j, p, {"node"}, {"noise_power", "min_range_m", "threshold_db", "pgm_lo_db", "pgm_hi_db"});
    ImagingRunConfig rc;
    rc.node = get_node(j, p, "node");
    rc.noise_power = opt_double(j, p, "noise_power", rc.noise_power);
    rc.min_range_m = opt_double(j, p, "min_range_m", rc.min_range_m);
    rc.threshold_db = opt_double(j, p, "threshold_db", rc.threshold_db);
    rc.pgm_lo_db = opt_double(j, p, "pgm_lo_db", rc.pgm_lo_db);
    rc.pgm_hi_db = opt_double(j, p, "pgm_hi_db", rc.pgm_hi_db);
    if (rc.noise_power < 0.0)
        throw config_error("config: imaging.noise_power must be >= 0");
    if (rc.pgm_hi_db <= rc.pgm_lo_db)
        throw config_error("config: imaging pgm range must satisfy lo < hi");
    return rc;
}

inline BeamtrackRunConfig parse_beamtrack_run(const nlohmann::json &j)
{
    const std::string p = "beamtrack";
    check_keys(j, p, {"bs", "track_a", "track_b"},
               {"ue_heading_deg", "mode", "m_beams", "speed_mps", "duration_s", "step_ms",
                "scan_noise_power", "outage_margin_db", "pose_error_sigma_m", "heading_error_sigma_deg",
                "min_interruption_ms"});
    BeamtrackRunConfig rc;
    rc.bs = get_node(j, p, "bs");
    rc.track_a = get_vec2(j, p, "track_a");
    rc.track_b = get_vec2(j, p, "track_b");
    rc.ue_heading = deg2rad(opt_double(j, p, "ue_heading_deg", 90.0));
    if (j.contains("mode")) {
        const std::string m = get_string(j, p, "mode");
        if (m == "exhaustive")
            rc.mode = TrackingMode::exhaustive;
        else if (m == "sensing_aided")
            rc.mode = TrackingMode::sensing_aided;
        else
            throw config_error("config: beamtrack.mode must be 'exhaustive' or 'sensing_aided'");
    }
    rc.tracking.m_beams = opt_int(j, p, "m_beams", rc.tracking.m_beams);
    rc.tracking.ue_speed_mps = opt_double(j, p, "speed_mps", rc.tracking.ue_speed_mps);
    rc.tracking.sim_duration_s = opt_double(j, p, "duration_s", rc.tracking.sim_duration_s);
    rc.tracking.step_ms = opt_double(j, p, "step_ms", rc.tracking.step_ms);
    rc.tracking.scan_noise_power = opt_double(j, p, "scan_noise_power", rc.tracking.scan_noise_power);
    rc.tracking.outage_margin_db = opt_double(j, p, "outage_margin_db", rc.tracking.outage_margin_db);
    rc.tracking.pose_error_sigma_m = opt_double(j, p, "pose_error_sigma_m", rc.tracking.pose_error_sigma_m);
    rc.tracking.heading_error_sigma =
        deg2rad(opt_double(j, p, "heading_error_sigma_deg", rad2deg(rc.tracking.heading_error_sigma)));
    rc.tracking.min_interruption_ms = opt_double(j, p, "min_interruption_ms", rc.tracking.min_interruption_ms);
    return rc;
}

inline NetsenseRunConfig parse_netsense_run(const nlohmann::json &j)
{
    const std::string p = "netsense";
    check_keys(j, p, {"ues"},
               {"noise_power", "min_range_m", "threshold_db", "point_sigma_m", "gate_m", "coverage_tol_m"});
    NetsenseRunConfig rc;
    const auto &ues = j.at("ues");
    if (!ues.is_array() || ues.empty())
        throw config_error("config: netsense.ues must be a non-empty array");
    if (ues.size() > static_cast<std::size_t>(CapacityLimits{}.max_ul_ues))
        throw config_error("config: netsense.ues exceeds the uplink capacity of " +
                           std::to_string(CapacityLimits{}.max_ul_ues) + " terminals");
    for (std::size_t i = 0; i < ues.size(); ++i) {
        const std::string up = p + ".ues[" + std::to_string(i) + "]";
        check_keys(ues[i], up, {"id", "x", "y"}, {"heading_deg", "pose_sigma_m", "heading_sigma_deg"});
        NetsenseRunConfig::Terminal t;
        t.id = get_int(ues[i], up, "id");
        t.pose = {{get_double(ues[i], up, "x"), get_double(ues[i], up, "y")},
                  deg2rad(opt_double(ues[i], up, "heading_deg", 0.0))};
        t.pose_sigma_m = opt_double(ues[i], up, "pose_sigma_m", t.pose_sigma_m);
        t.heading_sigma_deg = opt_double(ues[i], up, "heading_sigma_deg", t.heading_sigma_deg);
        rc.terminals.push_back(t);
    }
    for (std::size_t i = 0; i < rc.terminals.size(); ++i)
        for (std::size_t k = i + 1; k < rc.terminals.size(); ++k)
            if (rc.terminals[i].id == rc.terminals[k].id)
                throw config_error("config: netsense.ues ids must be unique");
    rc.noise_power = opt_double(j, p, "noise_power", rc.noise_power);
    rc.min_range_m = opt_double(j, p, "min_range_m", rc.min_range_m);
    rc.threshold_db = opt_double(j, p, "threshold_db", rc.threshold_db);
    rc.point_sigma_m = opt_double(j, p, "point_sigma_m", rc.point_sigma_m);
    rc.fusion.gate_m = opt_double(j, p, "gate_m", rc.fusion.gate_m);
    rc.fusion.coverage_tol_m = opt_double(j, p, "coverage_tol_m", rc.fusion.coverage_tol_m);
    return rc;
}

} // namespace cfgdetail

/// Parse a scenario document. Relative map/numerology paths resolve against
/// `base_dir` (the directory of the config file).
inline Scenario parse_scenario(const nlohmann::json &j, const std::string &base_dir)
{
    using namespace cfgdetail;
    check_keys(j, "$", {"version", "kind", "map"}, {"numerology", "seed", "out_dir", "slam", "imaging", "beamtrack", "netsense"});
    Scenario sc;
    sc.version = get_int(j, "$", "version");
    if (sc.version != scenario_config_version)
        throw config_error("config: unsupported version " + std::to_string(sc.version) + " (expected " +
                           std::to_string(scenario_config_version) + ")");
    sc.kind = get_string(j, "$", "kind");
    if (j.contains("seed")) {
        const auto &v = j.at("seed");
        if (!v.is_number_unsigned() && !v.is_number_integer())
            throw config_error("config: '$.seed' must be an integer");
        if (v.is_number_integer() && v.get<long long>() < 0)
            throw config_error("config: '$.seed' must be non-negative");
        sc.seed = v.get<std::uint64_t>();
    }
    if (j.contains("out_dir"))
        sc.out_dir = get_string(j, "$", "out_dir");

    auto resolve = [&](const std::string &rel) {
        std::filesystem::path p(rel);
        if (p.is_absolute() || base_dir.empty())
            return rel;
        return (std::filesystem::path(base_dir) / p).string();
    };
    sc.map_path = resolve(get_string(j, "$", "map"));
    sc.env = load_map(sc.map_path);

    if (j.contains("numerology")) {
        const std::string np = resolve(get_string(j, "$", "numerology"));
        std::ifstream in(np);
        if (!in)
            throw config_error("config: cannot open numerology file " + np);
        nlohmann::json nj;
        try {
            in >> nj;
        } catch (const nlohmann::json::exception &e) {
            throw config_error("config: numerology file " + np + ": " + e.what());
        }
        sc.num = numerology_from_json(nj);
    }

    if (sc.kind != "slam" && sc.kind != "imaging" && sc.kind != "beamtrack" && sc.kind != "netsense")
        throw config_error("config: '$.kind' must be one of slam, imaging, beamtrack, netsense");
    if (!j.contains(sc.kind))
        throw config_error("config: missing field '$." + sc.kind + "' for kind '" + sc.kind + "'");
    for (const char *k : {"slam", "imaging", "beamtrack", "netsense"})
        if (k != sc.kind && j.contains(k))
            throw config_error("config: field '$." + std::string(k) + "' does not match kind '" + sc.kind + "'");

    if (sc.kind == "slam")
        sc.slam = cfgdetail::parse_slam_run(j.at("slam"));
    else if (sc.kind == "imaging")
        sc.imaging = cfgdetail::parse_imaging_run(j.at("imaging"));
    else if (sc.kind == "beamtrack")
        sc.beamtrack = cfgdetail::parse_beamtrack_run(j.at("beamtrack"));
    else
        sc.netsense = cfgdetail::parse_netsense_run(j.at("netsense"));
    return sc;
}

inline Scenario load_scenario(const std::string &config_path)
{
    std::ifstream in(config_path);
    if (!in)
        throw config_error("config: cannot open " + config_path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception &e) {
        throw config_error("config: " + config_path + ": " + e.what());
    }
    return parse_scenario(j, std::filesystem::path(config_path).parent_path().string());
}

// ---- modality selection -----------------------------------------------------------

struct Modalities {
    bool radio = false;
    bool imu = false;
    bool vision = false;
};

/// Comma-separated subset of {radio, imu, vision}; odometry is the filter's
/// process model, so imu must be present.
inline Modalities parse_modalities(const std::string &csv)
{
    Modalities m;
    std::size_t pos = 0;
    bool any = false;
    while (pos <= csv.size()) {
        const std::size_t next = csv.find(',', pos);
        const std::string tok = csv.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
        if (!tok.empty()) {
            any = true;
            if (tok == "radio")
                m.radio = true;
            else if (tok == "imu")
                m.imu = true;
            else if (tok == "vision")
                m.vision = true;
            else
                throw config_error("modalities: unknown modality '" + tok + "'");
        }
        if (next == std::string::npos)
            break;
        pos = next + 1;
    }
    if (!any)
        throw config_error("modalities: empty set");
    if (!m.imu)
        throw config_error("modalities: imu odometry is required");
    return m;
}

inline std::string modalities_to_string(const Modalities &m)
{
    std::string s;
    for (const auto &[on, name] : {std::pair{m.radio, "radio"}, {m.imu, "imu"}, {m.vision, "vision"}}) {
        if (!on)
            continue;
        if (!s.empty())
            s += ',';
        s += name;
    }
    return s;
}

// ---- stop-and-scan mapping run ------------------------------------------------------

struct TrajectoryRow {
    double t = 0.0;
    Vec2 truth;
    Vec2 est;
    double err = 0.0;
};

struct StopRow {
    int stop = 0;
    double t = 0.0;
    int n_bearings = 0;
    int n_anchors = 0;
    int n_recovered = 0;
    double mapping_err_m = std::numeric_limits<double>::quiet_NaN();
};

struct SlamRunResult {
    std::vector<TrajectoryRow> trajectory;
    std::vector<StopRow> stops;
    std::vector<RecoveredSurface> recovered;
    SlamState state{};
    double mean_loc_err_m = 0.0;
    double final_loc_err_m = 0.0;
    double mapping_err_m = std::numeric_limits<double>::quiet_NaN();
    int convergence_stop = -1; // 1-based stop index; -1 when never reached
    double duration_s = 0.0;
    long n_iterations = 0;
    double mean_iter_wall_ms = 0.0;
    double wall_s = 0.0;
};

/// Execute the stop-and-scan protocol with the selected sensor set. The drive
/// plan (legs, scan dwells, in-place turns) is identical for every modality
/// subset, so runs differ only in the measurements fused.
inline SlamRunResult run_slam(const Scenario &sc, const Modalities &mods)
{
    if (!sc.slam)
        throw config_error("run_slam: scenario kind is not 'slam'");
    if (!mods.imu)
        throw config_error("run_slam: imu odometry is required");
    const SlamRunConfig &rc = *sc.slam;
    const EnvironmentMap &env = sc.env;
    if (!env.contains(rc.bs.pos))
        throw config_error("run_slam: site outside the map");
    if (!env.contains(rc.start.pos))
        throw config_error("run_slam: start outside the map");

    const BeamCodebook cb = build_codebook({});
    BistaticScanConfig scan_cfg;
    scan_cfg.noise_power = rc.scan_noise_power;
    const double scan_s = cb.n_beams() * scan_cfg.row_period_ms * 1e-3;
    const double rot_step = 2.0 * pi / rc.n_orientations;
    const double leg_s = rc.stop_spacing_m / rc.leg_speed_mps;
    const Vec2 drive_dir{std::cos(rc.start.heading), std::sin(rc.start.heading)};

    // Motion plan: commanded (v, w) segments; gaps between segments are scan
    // dwells (zero command). Turns sum to a full revolution per stop, so every
    // stop starts at the initial heading.
    struct Seg {
        double t0, t1, v, w;
    };
    struct ScanEvent {
        double t0, t1;
        int stop, orient;
    };
    std::vector<Seg> segs;
    std::vector<ScanEvent> scan_events;
    double t_cursor = 0.0;
    for (int k = 0; k < rc.n_stops; ++k) {
        if (!env.contains(rc.start.pos + drive_dir * (k * rc.stop_spacing_m)))
            throw config_error("run_slam: trajectory leaves the map");
        for (int o = 0; o < rc.n_orientations; ++o) {
            scan_events.push_back({t_cursor, t_cursor + scan_s, k, o});
            t_cursor += scan_s;
            segs.push_back({t_cursor, t_cursor + rc.rotation_s, 0.0, rot_step / rc.rotation_s});
            t_cursor += rc.rotation_s;
        }
        if (k + 1 < rc.n_stops) {
            segs.push_back({t_cursor, t_cursor + leg_s, rc.leg_speed_mps, 0.0});
            t_cursor += leg_s;
        }
    }
    const double t_end = t_cursor;

    const auto stop_pos = [&](int k) { return rc.start.pos + drive_dir * (k * rc.stop_spacing_m); };
    const auto truth_at = [&](double tau) -> Node {
        Vec2 p = rc.start.pos;
        double h = rc.start.heading;
        for (const Seg &s : segs) {
            if (tau <= s.t0)
                break;
            const double dt = std::min(tau, s.t1) - s.t0;
            if (s.v != 0.0) {
                p.x += s.v * dt * std::cos(h);
                p.y += s.v * dt * std::sin(h);
            }
            h += s.w * dt;
            if (tau <= s.t1)
                break;
        }
        return {p, wrap_angle(h)};
    };

    // Odometry belief: commanded profile plus one noise draw per sample period.
    // The same stream feeds every modality subset, so subsets share trajectories.
    RngStream imu_rng(sc.seed, "imu");
    const long n_ticks = static_cast<long>(std::ceil(t_end * rc.imu_rate_hz)) + 2;
    std::vector<double> noise_v(static_cast<std::size_t>(n_ticks)), noise_w(static_cast<std::size_t>(n_ticks));
    for (long k = 0; k < n_ticks; ++k) {
        noise_v[static_cast<std::size_t>(k)] = rc.odometry_speed_sigma * imu_rng.normal();
        noise_w[static_cast<std::size_t>(k)] = rc.odometry_yaw_sigma * imu_rng.normal();
    }
    RngStream vision_rng(sc.seed, "vision");
    RngStream scan_rng(sc.seed, "scan");

    SlamConfig fcfg;
    fcfg.bearing_sigma = deg2rad(rc.bearing_sigma_deg);
    fcfg.bearing_gate_nis = rc.bearing_gate_nis;
    fcfg.sigma_speed = rc.odometry_speed_sigma;
    fcfg.sigma_yaw_rate = rc.odometry_yaw_sigma;
    SlamState state = make_slam_state(rc.bs.pos, rc.start.pos, rc.start.heading, fcfg, rc.prior_pos_sigma_m,
                                      deg2rad(rc.prior_heading_sigma_deg));

    SlamRunResult res;
    long n_iter = 0;
    const auto wall0 = std::chrono::steady_clock::now();

    std::size_t seg_ix = 0;
    const auto advance_to = [&](double tau) {
        while (state.time < tau - 1e-12) {
            const double t0 = state.time;
            while (seg_ix < segs.size() && segs[seg_ix].t1 <= t0 + 1e-12)
                ++seg_ix;
            double v = 0.0, w = 0.0, bound = t_end + 1.0;
            if (seg_ix < segs.size()) {
                const Seg &s = segs[seg_ix];
                if (t0 < s.t0 - 1e-12)
                    bound = s.t0;
                else {
                    v = s.v;
                    w = s.w;
                    bound = s.t1;
                }
            }
            const long tick = static_cast<long>(std::floor(t0 * rc.imu_rate_hz + 1e-9));
            const double tick_end = static_cast<double>(tick + 1) / rc.imu_rate_hz;
            const double t1 = std::min({tau, bound, tick_end});
            const std::size_t ni = static_cast<std::size_t>(std::min(tick, n_ticks - 1));
            predict(state, {t1, v + noise_v[ni], w + noise_w[ni], 0.0}, t1 - t0);
            ++n_iter;
        }
    };

    const auto record_row = [&](double tau) {
        const Node truth = truth_at(tau);
        TrajectoryRow row;
        row.t = tau;
        row.truth = truth.pos;
        row.est = state.position();
        row.err = distance(row.truth, row.est);
        res.trajectory.push_back(row);
    };

    const auto vision_event = [&](double tau) {
        const double u = vision_rng.uniform();
        const double nx = vision_rng.normal(), ny = vision_rng.normal();
        std::vector<Vec2> ped_noise;
        for (std::size_t i = 0; i < env.interferers.size(); ++i)
            ped_noise.push_back({vision_rng.normal(), vision_rng.normal()});
        advance_to(tau);
        ++n_iter;
        if (u < rc.vision_loss) {
            update_vision(state, {tau, {}, true});
            return;
        }
        const auto sigma_at = [&](Vec2 p) {
            const double d = distance(p, rc.camera);
            return rc.vision_sigma_m * (1.0 + (d / rc.vision_sigma_range_m) * (d / rc.vision_sigma_range_m));
        };
        VisionDetection det;
        det.t = tau;
        const Node truth = truth_at(tau);
        const double su = sigma_at(truth.pos);
        det.targets.push_back({truth.pos + Vec2{su * nx, su * ny}, su});
        for (std::size_t i = 0; i < env.interferers.size(); ++i) {
            const Vec2 p = env.interferers[i].position(tau);
            const double sp = sigma_at(p);
            det.targets.push_back({p + ped_noise[i] * sp, sp});
        }
        update_vision(state, det);
    };

    // Panorama sectors are offsets from the final turn's heading, which is the
    // terminal's attitude when the bearings get fused.
    std::vector<double> pano_orient(static_cast<std::size_t>(rc.n_orientations));
    for (int o = 0; o < rc.n_orientations; ++o)
        pano_orient[static_cast<std::size_t>(o)] = wrap_angle((o - (rc.n_orientations - 1)) * rot_step);

    const auto radio_event = [&](const ScanEvent &last) {
        std::vector<RsrpImage> imgs;
        std::vector<int> all_beams(static_cast<std::size_t>(cb.n_beams()));
        for (int i = 0; i < cb.n_beams(); ++i)
            all_beams[static_cast<std::size_t>(i)] = i;
        for (int o = 0; o < rc.n_orientations; ++o) {
            const ScanEvent &ev = scan_events[static_cast<std::size_t>(last.stop * rc.n_orientations + o)];
            const Node ue{stop_pos(ev.stop), wrap_angle(rc.start.heading + o * rot_step)};
            imgs.push_back(scan_bistatic(rc.bs, ue, env, sc.num, cb, all_beams, ev.t0, scan_cfg, scan_rng));
        }
        const Panorama pano = assemble_panorama(imgs, pano_orient, cb);
        // Over-ask, then merge: sectors overlap, so one arrival can peak near
        // a sector edge and again inside the neighbour; keep the stronger.
        const auto peaks = estimate_bearings(pano, cb, 2 * rc.k_paths);
        double max_power = 0.0;
        for (const BearingPeak &pk : peaks)
            max_power = std::max(max_power, pk.power);
        std::vector<BearingMeasurement> meas;
        for (const BearingPeak &pk : peaks) {
            if (static_cast<int>(meas.size()) >= rc.k_paths)
                break;
            if (pk.power < max_power * from_db(-rc.peak_rel_floor_db))
                continue;
            if (pk.power < rc.scan_noise_power * from_db(rc.peak_snr_floor_db))
                continue;
            bool dup = false;
            for (const BearingMeasurement &seen : meas)
                dup = dup || std::abs(wrap_angle(seen.bearing - pk.bearing)) < deg2rad(rc.peak_merge_deg);
            if (dup)
                continue;
            BearingMeasurement m;
            m.t = last.t1;
            m.bearing = pk.bearing;
            m.rsrp_dbm = to_db(pk.power) + 30.0;
            meas.push_back(m);
        }
        advance_to(last.t1);
        ++n_iter;
        update_radio(state, meas);

        StopRow sr;
        sr.stop = last.stop + 1;
        sr.t = last.t1;
        sr.n_bearings = static_cast<int>(meas.size());
        sr.n_anchors = static_cast<int>(state.anchors.size());
        const auto rec = recover_surfaces(state);
        sr.n_recovered = static_cast<int>(rec.size());
        if (!rec.empty())
            sr.mapping_err_m = mapping_error(rec, env.surfaces);
        if (res.convergence_stop < 0 && rec.size() >= env.surfaces.size() && !std::isnan(sr.mapping_err_m) &&
            sr.mapping_err_m <= rc.convergence_map_err_m)
            res.convergence_stop = sr.stop;
        res.stops.push_back(sr);
    };

    // Chronological merge of sensor events; ties resolve radio, vision, tick.
    long tick_ix = 1, vis_ix = 1;
    std::size_t radio_ix = 0;
    record_row(0.0);
    while (true) {
        const double t_tick = static_cast<double>(tick_ix) / rc.imu_rate_hz;
        const double t_vis = mods.vision ? static_cast<double>(vis_ix) / rc.vision_rate_hz : t_end + 1.0;
        double t_radio = t_end + 1.0;
        if (mods.radio) {
            while (radio_ix < scan_events.size() && scan_events[radio_ix].orient != rc.n_orientations - 1)
                ++radio_ix;
            if (radio_ix < scan_events.size())
                t_radio = scan_events[radio_ix].t1;
        }
        const double t_next = std::min({t_tick, t_vis, t_radio});
        if (t_next > t_end + 0.5)
            break;
        if (t_radio <= t_vis && t_radio <= t_tick) {
            radio_event(scan_events[radio_ix]);
            ++radio_ix;
        } else if (t_vis <= t_tick) {
            if (t_vis <= t_end)
                vision_event(t_vis);
            ++vis_ix;
        } else {
            if (t_tick <= t_end) {
                advance_to(t_tick);
                record_row(t_tick);
            }
            ++tick_ix;
            if (t_tick > t_end)
                break;
        }
    }
    if (res.trajectory.back().t < t_end - 1e-9) {
        advance_to(t_end);
        record_row(t_end);
    }

    const auto wall1 = std::chrono::steady_clock::now();
    res.wall_s = std::chrono::duration<double>(wall1 - wall0).count();
    res.n_iterations = n_iter;
    res.mean_iter_wall_ms = n_iter > 0 ? res.wall_s * 1000.0 / static_cast<double>(n_iter) : 0.0;
    res.duration_s = t_end;

    double acc = 0.0;
    for (const TrajectoryRow &r : res.trajectory)
        acc += r.err;
    res.mean_loc_err_m = acc / static_cast<double>(res.trajectory.size());
    res.final_loc_err_m = res.trajectory.back().err;
    res.recovered = recover_surfaces(state);
    if (!res.recovered.empty())
        res.mapping_err_m = mapping_error(res.recovered, env.surfaces);
    res.state = std::move(state);
    return res;
}

// ---- monostatic imaging run ----------------------------------------------------------

struct ImagingRunResult {
    AngleRangeImage image; // leak-filtered
    std::vector<SensedPoint> points;
    std::vector<LocalSegment> segments;
    double wall_s = 0.0;
};

inline ImagingRunResult run_imaging(const Scenario &sc)
{
    if (!sc.imaging)
        throw config_error("run_imaging: scenario kind is not 'imaging'");
    const ImagingRunConfig &rc = *sc.imaging;
    if (!sc.env.contains(rc.node.pos))
        throw config_error("run_imaging: node outside the map");
    const auto wall0 = std::chrono::steady_clock::now();
    const BeamCodebook cb = build_codebook({});

    // Calibration capture: the transceiver leak alone, measured on an empty map.
    EnvironmentMap empty;
    empty.bounds_lo = sc.env.bounds_lo;
    empty.bounds_hi = sc.env.bounds_hi;
    empty.phase_seed = sc.env.phase_seed;
    MonostaticScanConfig calib_cfg;
    calib_cfg.noise_power = 0.0;
    RngStream calib_rng(sc.seed, "calib");
    const AngleRangeImage calib = scan_monostatic(rc.node, empty, sc.num, cb, calib_cfg, calib_rng);

    MonostaticScanConfig scan_cfg;
    scan_cfg.noise_power = rc.noise_power;
    RngStream mono_rng(sc.seed, "mono");
    const AngleRangeImage raw = scan_monostatic(rc.node, sc.env, sc.num, cb, scan_cfg, mono_rng);

    ImagingRunResult res;
    res.image = filter_self_interference(raw, calib, rc.min_range_m);
    res.points = extract_point_cloud(res.image, rc.threshold_db);
    res.segments = segments_from_point_cloud(res.points);
    const auto wall1 = std::chrono::steady_clock::now();
    res.wall_s = std::chrono::duration<double>(wall1 - wall0).count();
    return res;
}

// ---- beam tracking run -----------------------------------------------------------------

struct BeamtrackRunResult {
    LinkTimeline timeline;
    TrackingMode mode = TrackingMode::sensing_aided;
    int m_beams = 0;
    double wall_s = 0.0;
};

inline BeamtrackRunResult run_beamtrack(const Scenario &sc)
{
    if (!sc.beamtrack)
        throw config_error("run_beamtrack: scenario kind is not 'beamtrack'");
    const BeamtrackRunConfig &rc = *sc.beamtrack;
    const auto wall0 = std::chrono::steady_clock::now();
    const BeamCodebook cb = build_codebook({});
    TrackingScenario ts;
    ts.env = sc.env;
    ts.bs = rc.bs;
    ts.track_a = rc.track_a;
    ts.track_b = rc.track_b;
    ts.ue_heading = rc.ue_heading;
    TrackingConfig tc = rc.tracking;
    tc.seed = sc.seed;

    BeamtrackRunResult res;
    res.timeline = run_tracking(tc, ts, rc.mode, sc.num, cb);
    res.mode = rc.mode;
    res.m_beams = rc.mode == TrackingMode::exhaustive ? cb.n_beams() : tc.m_beams;
    const auto wall1 = std::chrono::steady_clock::now();
    res.wall_s = std::chrono::duration<double>(wall1 - wall0).count();
    return res;
}

// ---- cooperative sensing run -------------------------------------------------------------

struct NetsenseRunResult {
    std::vector<SensingReport> reports; // local frames, publish order
    FusedMap fused;
    double coverage_fused = 0.0;
    std::vector<double> coverage_individual;
    bool permutation_bitexact = false;
    std::string bus_dump; // raw framed records
    double wall_s = 0.0;
};

inline NetsenseRunResult run_netsense(const Scenario &sc)
{
    if (!sc.netsense)
        throw config_error("run_netsense: scenario kind is not 'netsense'");
    const NetsenseRunConfig &rc = *sc.netsense;
    const auto wall0 = std::chrono::steady_clock::now();
    const BeamCodebook cb = build_codebook({});

    EnvironmentMap empty;
    empty.bounds_lo = sc.env.bounds_lo;
    empty.bounds_hi = sc.env.bounds_hi;
    empty.phase_seed = sc.env.phase_seed;
    MonostaticScanConfig calib_cfg;
    calib_cfg.noise_power = 0.0;

    NetsenseRunResult res;
    MessageBus bus;
    for (const auto &term : rc.terminals) {
        if (!sc.env.contains(term.pose.pos))
            throw config_error("run_netsense: terminal " + std::to_string(term.id) + " outside the map");
        RngStream calib_rng(sc.seed, "calib", static_cast<std::uint64_t>(term.id));
        const AngleRangeImage calib = scan_monostatic(term.pose, empty, sc.num, cb, calib_cfg, calib_rng);
        MonostaticScanConfig scan_cfg;
        scan_cfg.noise_power = rc.noise_power;
        RngStream scan_rng(sc.seed, "mono", static_cast<std::uint64_t>(term.id));
        const AngleRangeImage img = filter_self_interference(
            scan_monostatic(term.pose, sc.env, sc.num, cb, scan_cfg, scan_rng), calib, rc.min_range_m);

        SensingReport rep;
        rep.ue_id = term.id;
        RngStream pose_rng(sc.seed, "pose", static_cast<std::uint64_t>(term.id));
        const double sh = deg2rad(term.heading_sigma_deg);
        rep.pose = Node{{term.pose.pos.x + term.pose_sigma_m * pose_rng.normal(),
                         term.pose.pos.y + term.pose_sigma_m * pose_rng.normal()},
                        wrap_angle(term.pose.heading + sh * pose_rng.normal())};
        rep.pose_cov = Eigen::Vector3d(term.pose_sigma_m * term.pose_sigma_m, term.pose_sigma_m * term.pose_sigma_m,
                                       sh * sh)
                           .asDiagonal();
        for (const SensedPoint &p : extract_point_cloud(img, rc.threshold_db)) {
            ReportPoint rp;
            rp.pos = p.local_xy();
            rp.cov = Eigen::Matrix2d::Identity() * (rc.point_sigma_m * rc.point_sigma_m);
            rp.confidence = p.power;
            rep.points.push_back(rp);
        }
        for (const LocalSegment &s : segments_from_point_cloud(extract_point_cloud(img, rc.threshold_db))) {
            ReportSegment rs;
            rs.a = s.a;
            rs.b = s.b;
            rs.confidence = static_cast<double>(s.support);
            rep.segments.push_back(rs);
        }
        res.reports.push_back(rep);
        bus.publish(rep);
    }

    // Fusion consumes the collector snapshot; report order must not matter.
    const std::vector<SensingReport> collected = bus.snapshot();
    res.fused = fuse(collected, rc.fusion);
    res.coverage_fused = coverage(res.fused, sc.env.surfaces, rc.fusion);
    for (const SensingReport &rep : collected) {
        const FusedMap one = fuse({rep}, rc.fusion);
        res.coverage_individual.push_back(coverage(one, sc.env.surfaces, rc.fusion));
    }
    std::vector<SensingReport> reversed(collected.rbegin(), collected.rend());
    const FusedMap refused = fuse(reversed, rc.fusion);
    res.permutation_bitexact = refused.points.size() == res.fused.points.size() &&
                               refused.segments.size() == res.fused.segments.size();
    if (res.permutation_bitexact) {
        for (std::size_t i = 0; i < refused.points.size(); ++i)
            res.permutation_bitexact = res.permutation_bitexact &&
                                       refused.points[i].pos.x == res.fused.points[i].pos.x &&
                                       refused.points[i].pos.y == res.fused.points[i].pos.y &&
                                       refused.points[i].weight == res.fused.points[i].weight;
        for (std::size_t i = 0; i < refused.segments.size(); ++i)
            res.permutation_bitexact = res.permutation_bitexact && refused.segments[i].a.x == res.fused.segments[i].a.x &&
                                       refused.segments[i].a.y == res.fused.segments[i].a.y &&
                                       refused.segments[i].b.x == res.fused.segments[i].b.x &&
                                       refused.segments[i].b.y == res.fused.segments[i].b.y;
    }
    res.bus_dump = bus.raw();
    const auto wall1 = std::chrono::steady_clock::now();
    res.wall_s = std::chrono::duration<double>(wall1 - wall0).count();
    return res;
}

// ---- artifact emission --------------------------------------------------------------

namespace artifacts {

inline void ensure_dir(const std::string &dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw config_error("output: cannot create directory " + dir + ": " + ec.message());
}

inline std::string join(const std::string &dir, const std::string &name)
{
    return (std::filesystem::path(dir) / name).string();
}

inline void write_json(const std::string &path, const nlohmann::json &j)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw config_error("output: cannot open " + path);
    out << j.dump(2) << '\n';
}

inline nlohmann::json common_summary(const Scenario &sc)
{
    nlohmann::json j;
    j["kind"] = sc.kind;
    j["seed"] = sc.seed;
    j["map"] = sc.map_path;
    return j;
}

inline void write_slam(const Scenario &sc, const Modalities &mods, const SlamRunResult &res, const std::string &dir)
{
    ensure_dir(dir);
    {
        CsvWriter csv(join(dir, "trajectory.csv"), {"t", "x_true", "y_true", "x_est", "y_est", "err"});
        for (const TrajectoryRow &r : res.trajectory)
            csv.row({format_double(r.t), format_double(r.truth.x), format_double(r.truth.y), format_double(r.est.x),
                     format_double(r.est.y), format_double(r.err)});
    }
    {
        CsvWriter csv(join(dir, "map_segments.csv"), {"ax", "ay", "bx", "by", "anchor"});
        for (const RecoveredSurface &s : res.recovered)
            csv.row({format_double(s.a.x), format_double(s.a.y), format_double(s.b.x), format_double(s.b.y),
                     format_int(s.anchor_index)});
    }
    {
        CsvWriter csv(join(dir, "stops.csv"), {"stop", "t", "n_bearings", "n_anchors", "n_recovered", "mapping_err_m"});
        for (const StopRow &r : res.stops)
            csv.row({format_int(r.stop), format_double(r.t), format_int(r.n_bearings), format_int(r.n_anchors),
                     format_int(r.n_recovered),
                     std::isnan(r.mapping_err_m) ? std::string("nan") : format_double(r.mapping_err_m)});
    }
    nlohmann::json j = common_summary(sc);
    j["modalities"] = modalities_to_string(mods);
    j["duration_s"] = res.duration_s;
    j["mean_localization_error_m"] = res.mean_loc_err_m;
    j["final_localization_error_m"] = res.final_loc_err_m;
    if (!std::isnan(res.mapping_err_m))
        j["mapping_error_m"] = res.mapping_err_m;
    j["convergence_stop"] = res.convergence_stop;
    j["n_recovered_surfaces"] = res.recovered.size();
    j["n_anchors"] = res.state.anchors.size();
    j["n_iterations"] = res.n_iterations;
    j["mean_iteration_wall_ms"] = res.mean_iter_wall_ms; // wall time lives only here
    j["wall_s"] = res.wall_s;
    write_json(join(dir, "summary.json"), j);
}

inline void write_imaging(const Scenario &sc, const ImagingRunResult &res, const std::string &dir)
{
    ensure_dir(dir);
    const ImagingRunConfig &rc = *sc.imaging;
    std::vector<double> db(res.image.power.size());
    for (std::size_t i = 0; i < db.size(); ++i)
        db[i] = to_db(res.image.power[i]);
    write_pgm(join(dir, "image.pgm"), static_cast<std::size_t>(res.image.n_beams),
              static_cast<std::size_t>(res.image.n_bins), db, rc.pgm_lo_db, rc.pgm_hi_db);
    {
        CsvWriter csv(join(dir, "point_cloud.csv"), {"az_rad", "range_m", "x", "y", "power_db"});
        for (const SensedPoint &p : res.points) {
            const Vec2 xy = p.local_xy();
            csv.row({format_double(p.az), format_double(p.range_m), format_double(xy.x), format_double(xy.y),
                     format_double(to_db(p.power))});
        }
    }
    {
        CsvWriter csv(join(dir, "segments.csv"), {"ax", "ay", "bx", "by", "support"});
        for (const LocalSegment &s : res.segments)
            csv.row({format_double(s.a.x), format_double(s.a.y), format_double(s.b.x), format_double(s.b.y),
                     format_int(s.support)});
    }
    nlohmann::json j = common_summary(sc);
    j["n_points"] = res.points.size();
    j["n_segments"] = res.segments.size();
    j["scan_elapsed_ms"] = res.image.elapsed_ms;
    j["bin_range_m"] = res.image.bin_range_m;
    j["wall_s"] = res.wall_s;
    write_json(join(dir, "summary.json"), j);
}

inline void write_beamtrack(const Scenario &sc, const BeamtrackRunResult &res, const std::string &dir)
{
    ensure_dir(dir);
    {
        CsvWriter csv(join(dir, "timeline.csv"), {"t_ms", "serving_ue_beam", "serving_bs_beam", "rsrp_dbm", "outage"});
        for (const LinkStep &s : res.timeline.steps)
            csv.row({format_double(s.t_ms), format_int(s.serving_ue), format_int(s.serving_bs),
                     format_double(s.serving_rsrp_dbm), format_int(s.outage ? 1 : 0)});
    }
    nlohmann::json j = common_summary(sc);
    j["mode"] = res.mode == TrackingMode::exhaustive ? "exhaustive" : "sensing_aided";
    j["m_beams"] = res.m_beams;
    j["interruption_count"] = res.timeline.interruptions.size();
    j["total_interrupted_s"] = res.timeline.total_interrupted_ms / 1000.0;
    j["alignment_fraction"] = res.timeline.alignment_fraction;
    j["mean_serving_rsrp_dbm"] = res.timeline.mean_serving_rsrp_dbm;
    j["outage_threshold_dbm"] = res.timeline.outage_threshold_dbm;
    j["median_best_rsrp_dbm"] = res.timeline.median_best_rsrp_dbm;
    j["overhead_reduction"] = res.timeline.overhead_reduction;
    j["wall_s"] = res.wall_s;
    write_json(join(dir, "summary.json"), j);
}

inline void write_netsense(const Scenario &sc, const NetsenseRunResult &res, const std::string &dir)
{
    ensure_dir(dir);
    {
        std::ofstream out(join(dir, "reports.bus"), std::ios::binary);
        if (!out)
            throw config_error("output: cannot open " + join(dir, "reports.bus"));
        out << res.bus_dump;
    }
    {
        CsvWriter csv(join(dir, "fused_points.csv"), {"x", "y", "weight", "n_sources"});
        for (const FusedPoint &p : res.fused.points)
            csv.row({format_double(p.pos.x), format_double(p.pos.y), format_double(p.weight),
                     format_int(static_cast<long long>(p.source_ues.size()))});
    }
    {
        CsvWriter csv(join(dir, "fused_segments.csv"), {"ax", "ay", "bx", "by", "confidence"});
        for (const ReportSegment &s : res.fused.segments)
            csv.row({format_double(s.a.x), format_double(s.a.y), format_double(s.b.x), format_double(s.b.y),
                     format_double(s.confidence)});
    }
    nlohmann::json j = common_summary(sc);
    j["n_reports"] = res.reports.size();
    j["coverage_fused"] = res.coverage_fused;
    j["coverage_individual"] = res.coverage_individual;
    j["permutation_bitexact"] = res.permutation_bitexact;
    j["bus_bytes"] = res.bus_dump.size();
    j["wall_s"] = res.wall_s;
    write_json(join(dir, "summary.json"), j);
}

} // namespace artifacts

// ---- reference vector dump --------------------------------------------------------

/// Deterministic reference waveforms and tables for cross-checking external
/// tooling: a random-access preamble, one modulated sync burst, the beam grid
/// and the frame plan.
inline void dump_vectors(const Numerology &num, const std::string &dir)
{
    artifacts::ensure_dir(dir);
    const PreambleBank bank = build_preamble_bank(1);
    write_iq(artifacts::join(dir, "rach_preamble.iq"), build_rach_signal(bank.preambles.front()));

    const SsbBlock ssb = build_ssb(1);
    ResourceGrid grid(ssb_n_symbols, num.fft_size);
    place_ssb(grid, ssb, 0, -ssb_n_subcarriers / 2);
    write_iq(artifacts::join(dir, "ssb_burst.iq"), ofdm_modulate(grid, num));

    const BeamCodebook cb = build_codebook({});
    {
        CsvWriter csv(artifacts::join(dir, "codebook.csv"), {"beam", "sine", "azimuth_rad", "azimuth_deg"});
        for (int b = 0; b < cb.n_beams(); ++b)
            csv.row({format_int(b), format_double(cb.sine[static_cast<std::size_t>(b)]),
                     format_double(cb.azimuth[static_cast<std::size_t>(b)]),
                     format_double(rad2deg(cb.azimuth[static_cast<std::size_t>(b)]))});
    }
    nlohmann::json j;
    j["numerology"] = {{"carrier_hz", num.carrier_hz},         {"scs_hz", num.scs_hz},
                       {"n_effective_sc", num.n_effective_sc}, {"sample_rate_hz", num.sample_rate_hz},
                       {"fft_size", num.fft_size},             {"cp_len", num.cp_len}};
    j["frame"] = to_json(build_schedule(num));
    artifacts::write_json(artifacts::join(dir, "reference.json"), j);
}

} // namespace isacsim

#endif
