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

#ifndef ISACSIM_TRACKING_HPP
#define ISACSIM_TRACKING_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "rng.hpp"
#include "sensing.hpp"
#include "slam.hpp"

namespace isacsim {

// ---- configuration ---------------------------------------------------------------

enum class TrackingMode { exhaustive, sensing_aided };

struct TrackingConfig {
    int m_beams = 16;                // candidate beams per terminal-side sweep
    double outage_threshold_dbm = std::numeric_limits<double>::quiet_NaN(); // NaN: auto
    double outage_margin_db = 15.0;  // auto threshold: median best RSRP minus this
    double ue_speed_mps = 4.0;
    double sim_duration_s = 200.0;
    double step_ms = 10.0;
    double min_interruption_ms = 500.0; // video stall proxy
    double scan_noise_power = 1e-13;
    double pose_error_sigma_m = 0.2;    // localization proxy fed to the predictor
    double heading_error_sigma = deg2rad(1.0);
    std::uint64_t seed = 1;
};

/// One terminal shuttling between two waypoints with a fixed panel bearing.
struct TrackingScenario {
    EnvironmentMap env;
    Node bs;
    Vec2 track_a, track_b;
    double ue_heading = pi / 2.0;
};

inline Node tracking_pose(const TrackingScenario &sc, double speed_mps, double t_s)
{
    const Vec2 d = sc.track_b - sc.track_a;
    const double len = d.norm();
    const Vec2 dir = d * (1.0 / len);
    double s = std::fmod(speed_mps * t_s, 2.0 * len);
    if (s < 0.0)
        s += 2.0 * len;
    const Vec2 pos = (s <= len) ? sc.track_a + dir * s : sc.track_b - dir * (s - len);
    return {pos, sc.ue_heading};
}

inline double scan_period_ms(int n_candidates) { return 20.0 * n_candidates; }

// ---- candidate prediction ----------------------------------------------------------

/// Map predicted arrival directions (LOS to the site plus one specular bounce
/// per estimated reflector) to the M nearest codebook beams. The pose is
/// dead-reckoned forward when an odometry sample newer than the state is given.
/// An untrusted (high-covariance) or empty prediction falls back to the full
/// sweep.
inline std::vector<int> predict_candidates(const SlamState &state, const std::vector<Surface> &est_surfaces,
                                           const BeamCodebook &cb, int m,
                                           const std::optional<ImuSample> &imu = std::nullopt,
                                           double dt_s = 0.0, double trust_cov_trace = 1.0)
{
    if (m < 1 || m > cb.n_beams())
        throw config_error("predict_candidates: candidate count out of range");

    auto full_sweep = [&] {
        std::vector<int> all(static_cast<std::size_t>(cb.n_beams()));
        for (int i = 0; i < cb.n_beams(); ++i)
            all[static_cast<std::size_t>(i)] = i;
        return all;
    };
    if (state.pose_cov().trace() > trust_cov_trace)
        return full_sweep();

    SlamState fwd = state;
    if (imu && dt_s > 0.0)
        predict(fwd, *imu, dt_s);
    const Vec2 pos = fwd.position();
    const double heading = fwd.heading();
    const Vec2 bs = fwd.anchors.front().mean;

    std::vector<double> dirs;
    dirs.push_back(wrap_angle(std::atan2(bs.y - pos.y, bs.x - pos.x) - heading));
    for (const Surface &s : est_surfaces) {
        const Vec2 image = mirror_point(bs, s.a, s.b);
        // Specular validity: the image-to-terminal segment must cross the wall.
        const Vec2 dir = pos - image;
        const Vec2 seg = s.b - s.a;
        const double denom = dir.cross(seg);
        if (std::abs(denom) < 1e-15)
            continue;
        const double ti = (s.a - image).cross(seg) / denom;
        const double u = (s.a - image).cross(dir) / denom;
        if (ti <= 1e-9 || ti >= 1.0 - 1e-9 || u < 0.0 || u > 1.0)
            continue;
        dirs.push_back(wrap_angle(std::atan2(image.y - pos.y, image.x - pos.x) - heading));
    }

    std::vector<int> seeds;
    for (double az : dirs) {
        if (std::abs(az) > pi / 2.0)
            continue; // behind the panel
        const int b = cb.nearest_beam(az);
        if (std::find(seeds.begin(), seeds.end(), b) == seeds.end())
            seeds.push_back(b);
    }
    if (seeds.empty())
        return full_sweep();

    std::vector<int> out = seeds;
    if (static_cast<int>(out.size()) > m)
        out.resize(static_cast<std::size_t>(m));
    for (int d = 1; static_cast<int>(out.size()) < m && d < cb.n_beams(); ++d) {
        for (int s : seeds) {
            for (int b : {s - d, s + d}) {
                if (b < 0 || b >= cb.n_beams())
                    continue;
                if (std::find(out.begin(), out.end(), b) != out.end())
                    continue;
                out.push_back(b);
                if (static_cast<int>(out.size()) == m)
                    break;
            }
            if (static_cast<int>(out.size()) == m)
                break;
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

// ---- link timeline --------------------------------------------------------------------

struct LinkStep {
    double t_ms = 0.0;
    int serving_ue = 0, serving_bs = 0;
    double serving_rsrp_dbm = 0.0;
    int best_ue = 0, best_bs = 0;
    double best_rsrp_dbm = 0.0;
    bool aligned = false;
    bool outage = false;
};

struct ScanRecord {
    double t_start_ms = 0.0;
    int n_rows = 0;
    int serving_ue = 0, serving_bs = 0;
};

struct Interruption {
    double start_ms = 0.0;
    double duration_ms = 0.0;
};

struct LinkTimeline {
    std::vector<LinkStep> steps;
    std::vector<ScanRecord> scans;
    std::vector<Interruption> interruptions;
    double outage_threshold_dbm = 0.0;
    double median_best_rsrp_dbm = 0.0;
    double total_interrupted_ms = 0.0;
    double alignment_fraction = 0.0;
    double mean_serving_rsrp_dbm = 0.0;
    double overhead_reduction = 0.0;
};

namespace detail {

/// Band-averaged per-pair link power: sum over paths of the beamformed path
/// powers (cross terms wash out over the wide effective band).
struct PairPowers {
    int n = 0;
    std::vector<double> p; // [ue * n + bs]
    int best_ue = 0, best_bs = 0;

    double at(int u, int b) const { return p[static_cast<std::size_t>(u) * n + b]; }
};

inline PairPowers pair_powers(const std::vector<PathComponent> &paths, const BeamCodebook &cb)
{
    PairPowers pp;
    pp.n = cb.n_beams();
    pp.p.assign(static_cast<std::size_t>(pp.n) * pp.n, 0.0);
    std::vector<double> gtx(static_cast<std::size_t>(pp.n)), grx(static_cast<std::size_t>(pp.n));
    for (const PathComponent &path : paths) {
        const double a2 = std::norm(path.amplitude * path.weight) *
                          std::pow(element_amplitude(path.aod_az) * element_amplitude(path.aoa_az), 2.0);
        if (a2 == 0.0)
            continue;
        for (int b = 0; b < pp.n; ++b) {
            gtx[static_cast<std::size_t>(b)] = std::norm(beam_gain(cb.geom, cb.beams[b], path.aod_az, 0.0));
            grx[static_cast<std::size_t>(b)] = std::norm(beam_gain(cb.geom, cb.beams[b], path.aoa_az, 0.0));
        }
        for (int u = 0; u < pp.n; ++u) {
            const double row = a2 * grx[static_cast<std::size_t>(u)];
            for (int b = 0; b < pp.n; ++b)
                pp.p[static_cast<std::size_t>(u) * pp.n + b] += row * gtx[static_cast<std::size_t>(b)];
        }
    }
    double best = -1.0;
    for (int u = 0; u < pp.n; ++u)
        for (int b = 0; b < pp.n; ++b)
            if (pp.at(u, b) > best) {
                best = pp.at(u, b);
                pp.best_ue = u;
                pp.best_bs = b;
            }
    return pp;
}

} // namespace detail

/// Step a shuttling terminal for the configured duration, sweeping beams
/// back-to-back (one 20 ms dwell per candidate row) and locking the serving
/// pair to each sweep's argmax at sweep end. The link itself is non-blocking
/// during sweeps. Outage marks steps whose serving RSRP falls below the
/// threshold (default: scenario median best minus a margin); interruptions are
/// maximal outage runs of at least the stall duration.
inline LinkTimeline run_tracking(const TrackingConfig &cfg, const TrackingScenario &sc, TrackingMode mode,
                                 const Numerology &num, const BeamCodebook &cb)
{
    if (cfg.m_beams < 1 || cfg.m_beams > cb.n_beams())
        throw config_error("run_tracking: m_beams out of range");
    if (cfg.step_ms <= 0.0 || cfg.sim_duration_s <= 0.0 || cfg.ue_speed_mps < 0.0)
        throw config_error("run_tracking: non-positive step, duration, or speed");
    if (!sc.env.contains(sc.track_a) || !sc.env.contains(sc.track_b))
        throw config_error("run_tracking: trajectory leaves the map");
    if (!sc.env.contains(sc.bs.pos))
        throw config_error("run_tracking: site outside the map");

    RngStream scan_noise(cfg.seed, "track_scan");
    RngStream pose_err(cfg.seed, "track_pose");

    BistaticScanConfig scan_cfg;
    scan_cfg.noise_power = cfg.scan_noise_power;
    const PoseFn ue_at = [&](double t) { return tracking_pose(sc, cfg.ue_speed_mps, t); };

    std::vector<int> all_beams(static_cast<std::size_t>(cb.n_beams()));
    for (int i = 0; i < cb.n_beams(); ++i)
        all_beams[static_cast<std::size_t>(i)] = i;

    LinkTimeline tl;
    tl.overhead_reduction =
        (mode == TrackingMode::sensing_aided) ? (cb.n_beams() - cfg.m_beams) / static_cast<double>(cb.n_beams())
                                              : 0.0;

    // Initial access: assume a completed first alignment at t = 0.
    const detail::PairPowers p0 = detail::pair_powers(trace_paths(sc.env, sc.bs, ue_at(0.0), num, 0.0), cb);
    int serving_ue = p0.best_ue, serving_bs = p0.best_bs;

    const double duration_ms = cfg.sim_duration_s * 1000.0;
    double scan_start_ms = 0.0;
    std::optional<RsrpImage> active; // sweep in flight
    double active_end_ms = 0.0;

    auto begin_scan = [&](double t_ms) {
        std::vector<int> cands;
        if (mode == TrackingMode::exhaustive) {
            cands = all_beams;
        } else {
            const Node truth = ue_at(t_ms * 1e-3);
            const double ex = cfg.pose_error_sigma_m * pose_err.normal();
            const double ey = cfg.pose_error_sigma_m * pose_err.normal();
            const double eh = cfg.heading_error_sigma * pose_err.normal();
            SlamState proxy = make_slam_state(sc.bs.pos, {truth.pos.x + ex, truth.pos.y + ey},
                                              wrap_angle(truth.heading + eh));
            cands = predict_candidates(proxy, sc.env.surfaces, cb, cfg.m_beams);
        }
        active = scan_bistatic(sc.bs, ue_at, sc.env, num, cb, cands, t_ms * 1e-3, scan_cfg, scan_noise);
        active_end_ms = t_ms + scan_period_ms(static_cast<int>(cands.size()));
    };
    begin_scan(0.0);

    const int n_steps = static_cast<int>(std::floor(duration_ms / cfg.step_ms));
    tl.steps.reserve(static_cast<std::size_t>(n_steps));
    for (int k = 0; k < n_steps; ++k) {
        const double t_ms = k * cfg.step_ms;
        while (t_ms >= active_end_ms) { // sweep finished: lock argmax, start next
            const auto [ru, rb] = active->argmax();
            serving_ue = active->ue_beams[static_cast<std::size_t>(ru)];
            serving_bs = rb;
            tl.scans.push_back({active->t0 * 1000.0, active->n_ue, serving_ue, serving_bs});
            scan_start_ms = active_end_ms;
            begin_scan(scan_start_ms);
        }

        const detail::PairPowers pp =
            detail::pair_powers(trace_paths(sc.env, sc.bs, ue_at(t_ms * 1e-3), num, t_ms * 1e-3), cb);
        LinkStep step;
        step.t_ms = t_ms;
        step.serving_ue = serving_ue;
        step.serving_bs = serving_bs;
        step.serving_rsrp_dbm = to_db(pp.at(serving_ue, serving_bs)) + 30.0;
        step.best_ue = pp.best_ue;
        step.best_bs = pp.best_bs;
        step.best_rsrp_dbm = to_db(pp.at(pp.best_ue, pp.best_bs)) + 30.0;
        step.aligned = (serving_ue == pp.best_ue && serving_bs == pp.best_bs);
        tl.steps.push_back(step);
    }

    std::vector<double> best_sorted;
    best_sorted.reserve(tl.steps.size());
    for (const LinkStep &s : tl.steps)
        best_sorted.push_back(s.best_rsrp_dbm);
    std::sort(best_sorted.begin(), best_sorted.end());
    tl.median_best_rsrp_dbm = best_sorted[best_sorted.size() / 2];
    tl.outage_threshold_dbm = std::isnan(cfg.outage_threshold_dbm)
                                  ? tl.median_best_rsrp_dbm - cfg.outage_margin_db
                                  : cfg.outage_threshold_dbm;

    int aligned_count = 0;
    double rsrp_sum = 0.0;
    for (LinkStep &s : tl.steps) {
        s.outage = s.serving_rsrp_dbm < tl.outage_threshold_dbm;
        aligned_count += s.aligned ? 1 : 0;
        rsrp_sum += s.serving_rsrp_dbm;
    }
    tl.alignment_fraction = static_cast<double>(aligned_count) / tl.steps.size();
    tl.mean_serving_rsrp_dbm = rsrp_sum / tl.steps.size();

    std::size_t i = 0;
    while (i < tl.steps.size()) {
        if (!tl.steps[i].outage) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < tl.steps.size() && tl.steps[j].outage)
            ++j;
        const double dur = (j - i) * cfg.step_ms;
        if (dur >= cfg.min_interruption_ms) {
            tl.interruptions.push_back({tl.steps[i].t_ms, dur});
            tl.total_interrupted_ms += dur;
        }
        i = j;
    }
    return tl;
}

// ---- mode comparison -----------------------------------------------------------------

struct ModeSeedResult {
    std::uint64_t seed = 0;
    int interruption_count = 0;
    double interrupted_s = 0.0;
    double alignment_fraction = 0.0;
    double mean_serving_rsrp_dbm = 0.0;
};

struct ModeComparison {
    std::vector<ModeSeedResult> exhaustive;
    std::vector<ModeSeedResult> sensing_aided;
};

inline ModeComparison compare_modes(const TrackingConfig &cfg, const TrackingScenario &sc, const Numerology &num,
                                    const BeamCodebook &cb, const std::vector<std::uint64_t> &seeds)
{
    if (seeds.empty())
        throw config_error("compare_modes: need at least one seed");
    ModeComparison out;
    for (std::uint64_t seed : seeds) {
        TrackingConfig c = cfg;
        c.seed = seed;
        for (TrackingMode mode : {TrackingMode::exhaustive, TrackingMode::sensing_aided}) {
            const LinkTimeline tl = run_tracking(c, sc, mode, num, cb);
            ModeSeedResult r;
            r.seed = seed;
            r.interruption_count = static_cast<int>(tl.interruptions.size());
            r.interrupted_s = tl.total_interrupted_ms / 1000.0;
            r.alignment_fraction = tl.alignment_fraction;
            r.mean_serving_rsrp_dbm = tl.mean_serving_rsrp_dbm;
            (mode == TrackingMode::exhaustive ? out.exhaustive : out.sensing_aided).push_back(r);
        }
    }
    return out;
}

} // namespace isacsim

#endif
