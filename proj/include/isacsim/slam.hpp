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

#ifndef ISACSIM_SLAM_HPP
#define ISACSIM_SLAM_HPP

#include <algorithm>
#include <optional>
#include <set>
#include <vector>

#include <Eigen/Dense>

#include "channel.hpp"
#include "common.hpp"

namespace isacsim {

// ---- measurement types --------------------------------------------------------

/// Wheel/inertial odometry sample; `heading` is the unit's own noisy estimate,
/// carried as data (propagation integrates `yaw_rate`).
struct ImuSample {
    double t = 0.0;
    double speed = 0.0;    // m/s
    double yaw_rate = 0.0; // rad/s
    double heading = 0.0;  // rad
};

struct VisionTarget {
    Vec2 pos;
    double sigma_m = 0.05; // grows toward the camera FOV edge
};

struct VisionDetection {
    double t = 0.0;
    std::vector<VisionTarget> targets;
    bool lost = false;
};

/// One panorama-derived arrival direction in the body frame.
struct BearingMeasurement {
    double t = 0.0;
    double bearing = 0.0; // rad, (-pi, pi]
    std::optional<int> anchor_hint;
    double rsrp_dbm = 0.0;
    std::optional<double> range_hint_m; // co-located echo range along the ray
};

// ---- filter configuration ------------------------------------------------------

struct SlamConfig {
    double sigma_speed = 0.05;      // m/s, odometry speed noise
    double sigma_yaw_rate = 0.01;   // rad/s
    double drift_qpos = 1e-4;       // m^2/s additive bias random walk
    double drift_qheading = 2e-5;   // rad^2/s
    double bearing_sigma = deg2rad(2.0);
    double bearing_gate_nis = 9.0;        // scalar innovation gate
    double vision_gate_nis = 9.21;        // 2-dof 99%
    double vision_loss_inflation = 4.0;   // pose covariance factor on loss
    double va_default_range_m = 6.0;      // ray init without a range estimate
    double va_init_sigma_m = 3.0;
    int va_spawn_min_sightings = 3;       // distinct stops in ray consensus before spawning
    double va_spawn_ray_tol_m = 1.5;      // ray-crossing agreement
    double va_spawn_min_parallax = deg2rad(5.0); // near-parallel rays triangulate badly
    double va_spawn_min_separation_m = 2.0; // crossings nearer a live anchor are its outliers
    int pending_max_age_stops = 6;
    double surface_cov_gate_trace = 0.7;  // m^2, pose-conditioned; anchors above are not mapped
};

// ---- state ----------------------------------------------------------------------

struct Anchor {
    Vec2 mean;
    Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
    bool fixed = false;    // known infrastructure position, outside the state
    int state_offset = -1; // first column in the joint state; -1 when fixed
    std::vector<Vec2> observed_from; // estimated stop positions that saw it
};

struct PendingBearing {
    Vec2 origin;
    double world_bearing = 0.0;
    std::optional<double> range_hint_m;
    int stop_id = 0;
    double heading_var = 0.0;           // pose heading variance when the ray was cast
    Eigen::Matrix2d origin_cov = Eigen::Matrix2d::Zero();
};

/// Joint extended-filter state over [x, y, heading, anchors...]. Fixed anchors
/// live outside the state vector; virtual anchors are appended as estimated.
struct SlamState {
    Eigen::VectorXd x;  // 3 + 2 * (number of estimated anchors)
    Eigen::MatrixXd P;
    double time = 0.0;
    std::vector<Anchor> anchors;
    std::vector<PendingBearing> pending;
    std::vector<Vec2> stop_path; // estimated position at each fused stop
    int stop_count = 0;
    SlamConfig cfg;

    double pos_x() const { return x(0); }
    double pos_y() const { return x(1); }
    double heading() const { return x(2); }
    Vec2 position() const { return {x(0), x(1)}; }
    Eigen::Matrix3d pose_cov() const { return P.topLeftCorner<3, 3>(); }

    Eigen::Matrix2d anchor_cov(int i) const
    {
        const Anchor &a = anchors.at(static_cast<std::size_t>(i));
        if (a.fixed)
            return Eigen::Matrix2d::Zero();
        return P.block<2, 2>(a.state_offset, a.state_offset);
    }

    Vec2 anchor_mean(int i) const
    {
        const Anchor &a = anchors.at(static_cast<std::size_t>(i));
        if (a.fixed)
            return a.mean;
        return {x(a.state_offset), x(a.state_offset + 1)};
    }
};

inline SlamState make_slam_state(Vec2 bs_pos, Vec2 start_pos, double start_heading, const SlamConfig &cfg = {},
                                 double pos_sigma = 0.1, double heading_sigma = deg2rad(2.0))
{
    SlamState s;
    s.cfg = cfg;
    s.x = Eigen::Vector3d(start_pos.x, start_pos.y, start_heading);
    s.P = Eigen::Vector3d(pos_sigma * pos_sigma, pos_sigma * pos_sigma, heading_sigma * heading_sigma).asDiagonal();
    Anchor bs;
    bs.mean = bs_pos;
    bs.fixed = true;
    s.anchors.push_back(bs);
    return s;
}

/// Extra known-position landmark (kept outside the estimated state).
inline int add_fixed_anchor(SlamState &s, Vec2 pos)
{
    Anchor a;
    a.mean = pos;
    a.fixed = true;
    s.anchors.push_back(a);
    return static_cast<int>(s.anchors.size()) - 1;
}

/// Append an estimated reflector anchor with an uncorrelated prior.
inline int add_virtual_anchor(SlamState &s, Vec2 pos, const Eigen::Matrix2d &cov)
{
    const int n = static_cast<int>(s.x.size());
    Eigen::VectorXd x2(n + 2);
    x2 << s.x, pos.x, pos.y;
    Eigen::MatrixXd p2 = Eigen::MatrixXd::Zero(n + 2, n + 2);
    p2.topLeftCorner(n, n) = s.P;
    p2.block<2, 2>(n, n) = cov;
    s.x = std::move(x2);
    s.P = std::move(p2);
    Anchor a;
    a.mean = pos;
    a.state_offset = n;
    s.anchors.push_back(a);
    return static_cast<int>(s.anchors.size()) - 1;
}

namespace detail {

inline void symmetrize(Eigen::MatrixXd &p) { p = ((p + p.transpose()) * 0.5).eval(); }

/// Scalar Joseph-form update with an already-wrapped innovation.
inline void scalar_update(SlamState &s, const Eigen::RowVectorXd &h, double innov, double r_var)
{
    const Eigen::VectorXd ph = s.P * h.transpose();
    const double svar = (h * ph)(0) + r_var;
    const Eigen::VectorXd k = ph / svar;
    s.x += k * innov;
    s.x(2) = wrap_angle(s.x(2));
    const Eigen::MatrixXd ikh = Eigen::MatrixXd::Identity(s.x.size(), s.x.size()) - k * h;
    s.P = (ikh * s.P * ikh.transpose() + k * r_var * k.transpose()).eval();
    symmetrize(s.P);
}

/// Predicted body-frame bearing and its sparse Jacobian row for one anchor.
inline std::pair<double, Eigen::RowVectorXd> bearing_model(const SlamState &s, int anchor)
{
    const Anchor &a = s.anchors[static_cast<std::size_t>(anchor)];
    const Vec2 ap = s.anchor_mean(anchor);
    const double dx = ap.x - s.pos_x();
    const double dy = ap.y - s.pos_y();
    const double q = dx * dx + dy * dy;
    Eigen::RowVectorXd h = Eigen::RowVectorXd::Zero(s.x.size());
    h(0) = dy / q;
    h(1) = -dx / q;
    h(2) = -1.0;
    if (!a.fixed) {
        h(a.state_offset) = -dy / q;
        h(a.state_offset + 1) = dx / q;
    }
    return {wrap_angle(std::atan2(dy, dx) - s.heading()), h};
}

/// Forward intersection of two bearing rays; empty when near-parallel or when
/// the crossing lies behind either origin.
inline std::optional<Vec2> intersect_rays(const PendingBearing &a, const PendingBearing &b)
{
    const Vec2 da{std::cos(a.world_bearing), std::sin(a.world_bearing)};
    const Vec2 db{std::cos(b.world_bearing), std::sin(b.world_bearing)};
    const double denom = da.cross(db);
    if (std::abs(denom) < 1e-6)
        return std::nullopt;
    const Vec2 d = b.origin - a.origin;
    const double ta = d.cross(db) / denom;
    const double tb = d.cross(da) / denom;
    if (ta < 0.3 || tb < 0.3)
        return std::nullopt;
    return a.origin + da * ta;
}

} // namespace detail

// ---- prediction ------------------------------------------------------------------

/// Dead-reckoning propagation: x += v dt cos h, y += v dt sin h, h += w dt.
/// Control noise enters through the motion Jacobian; an additive bias random
/// walk keeps the odometry-only covariance growing without bound.
inline void predict(SlamState &s, const ImuSample &imu, double dt)
{
    if (dt <= 0.0)
        throw config_error("predict: dt must be positive");
    if (imu.t < s.time)
        throw config_error("predict: non-monotonic odometry timestamp");

    const double th = s.heading();
    const double v = imu.speed;
    const int n = static_cast<int>(s.x.size());

    s.x(0) += v * dt * std::cos(th);
    s.x(1) += v * dt * std::sin(th);
    s.x(2) = wrap_angle(th + imu.yaw_rate * dt);

    Eigen::Matrix3d f = Eigen::Matrix3d::Identity();
    f(0, 2) = -v * dt * std::sin(th);
    f(1, 2) = v * dt * std::cos(th);

    Eigen::Matrix<double, 3, 2> g;
    g << dt * std::cos(th), 0.0, dt * std::sin(th), 0.0, 0.0, dt;
    const Eigen::Matrix2d u =
        Eigen::Vector2d(s.cfg.sigma_speed * s.cfg.sigma_speed, s.cfg.sigma_yaw_rate * s.cfg.sigma_yaw_rate)
            .asDiagonal();
    Eigen::Matrix3d q = g * u * g.transpose();
    q(0, 0) += s.cfg.drift_qpos * dt;
    q(1, 1) += s.cfg.drift_qpos * dt;
    q(2, 2) += s.cfg.drift_qheading * dt;

    s.P.topLeftCorner<3, 3>() = f * s.P.topLeftCorner<3, 3>() * f.transpose() + q;
    if (n > 3) {
        s.P.topRightCorner(3, n - 3) = f * s.P.topRightCorner(3, n - 3);
        s.P.bottomLeftCorner(n - 3, 3) = s.P.topRightCorner(3, n - 3).transpose();
    }
    detail::symmetrize(s.P);
    s.time = imu.t;
}

// ---- radio update ----------------------------------------------------------------

/// Fuse a stop point's panorama bearings. Each measurement associates to the
/// gated nearest anchor (or its hint); leftovers accumulate as pending rays,
/// and rays that agree across enough distinct stops spawn a virtual anchor at
/// their crossing (or along the ray at the echo-range estimate).
inline void update_radio(SlamState &s, const std::vector<BearingMeasurement> &meas)
{
    if (meas.empty())
        return;
    ++s.stop_count;
    s.stop_path.push_back(s.position());
    const double r_var = s.cfg.bearing_sigma * s.cfg.bearing_sigma;

    for (const BearingMeasurement &m : meas) {
        const double z = wrap_angle(m.bearing);
        int chosen = -1;
        double best_nis = s.cfg.bearing_gate_nis;
        double best_innov = 0.0;
        Eigen::RowVectorXd best_h;

        auto consider = [&](int idx) {
            auto [hat, h] = detail::bearing_model(s, idx);
            const double innov = wrap_angle(z - hat);
            const double svar = (h * s.P * h.transpose())(0) + r_var;
            const double nis = innov * innov / svar;
            if (nis < best_nis) {
                best_nis = nis;
                chosen = idx;
                best_innov = innov;
                best_h = h;
            }
        };
        if (m.anchor_hint && *m.anchor_hint >= 0 && *m.anchor_hint < static_cast<int>(s.anchors.size())) {
            consider(*m.anchor_hint);
        } else {
            // Known-position sites get first claim: an identified infrastructure
            // bearing must not be captured by an estimated anchor whose larger
            // covariance always flatters the NIS.
            for (int i = 0; i < static_cast<int>(s.anchors.size()); ++i)
                if (s.anchors[static_cast<std::size_t>(i)].fixed)
                    consider(i);
            if (chosen < 0)
                for (int i = 0; i < static_cast<int>(s.anchors.size()); ++i)
                    if (!s.anchors[static_cast<std::size_t>(i)].fixed)
                        consider(i);
        }

        if (chosen >= 0) {
            detail::scalar_update(s, best_h, best_innov, r_var);
            s.anchors[static_cast<std::size_t>(chosen)].observed_from.push_back(s.position());
            if (!s.anchors[static_cast<std::size_t>(chosen)].fixed) {
                auto &a = s.anchors[static_cast<std::size_t>(chosen)];
                a.mean = s.anchor_mean(chosen);
            }
        } else {
            s.pending.push_back({s.position(), wrap_angle(s.heading() + z), m.range_hint_m, s.stop_count,
                                 s.P(2, 2), s.P.topLeftCorner<2, 2>()});
        }
    }

    // Spawn virtual anchors from pending rays that agree across stops. A pair
    // proposes a crossing; the proposal needs ray consensus from enough
    // distinct stops and clearance from every anchor already tracked.
    const auto ray_hits = [&](const PendingBearing &p, Vec2 pos) {
        const Vec2 dir{std::cos(p.world_bearing), std::sin(p.world_bearing)};
        if (segment_point_distance(p.origin, p.origin + dir * 50.0, pos) > s.cfg.va_spawn_ray_tol_m)
            return false;
        return !p.range_hint_m ||
               std::abs(distance(p.origin, pos) - *p.range_hint_m) <= s.cfg.va_spawn_ray_tol_m * 2.0;
    };
    bool spawned = true;
    while (spawned) {
        spawned = false;
        for (std::size_t i = 0; i < s.pending.size() && !spawned; ++i) {
            for (std::size_t j = i + 1; j < s.pending.size() && !spawned; ++j) {
                const PendingBearing &a = s.pending[i];
                const PendingBearing &b = s.pending[j];
                if (a.stop_id == b.stop_id)
                    continue;
                // Near-parallel rays put the crossing far off along-ray; only
                // a range estimate can pin the anchor then.
                if (std::abs(wrap_angle(a.world_bearing - b.world_bearing)) < s.cfg.va_spawn_min_parallax &&
                    !a.range_hint_m && !b.range_hint_m)
                    continue;
                std::optional<Vec2> cross = detail::intersect_rays(a, b);
                Vec2 pos;
                if (cross) {
                    pos = *cross;
                } else if (a.range_hint_m || b.range_hint_m) {
                    const PendingBearing &w = a.range_hint_m ? a : b;
                    pos = w.origin + Vec2{std::cos(w.world_bearing), std::sin(w.world_bearing)} * *w.range_hint_m;
                } else {
                    continue;
                }
                if (!ray_hits(a, pos) || !ray_hits(b, pos))
                    continue;

                bool near_existing = false;
                for (int ai = 0; ai < static_cast<int>(s.anchors.size()); ++ai)
                    near_existing = near_existing ||
                                    distance(s.anchor_mean(ai), pos) < s.cfg.va_spawn_min_separation_m;
                if (near_existing)
                    continue;

                std::vector<std::size_t> members{i, j};
                std::set<int> stops{a.stop_id, b.stop_id};
                for (std::size_t k = 0; k < s.pending.size(); ++k) {
                    if (k == i || k == j || !ray_hits(s.pending[k], pos))
                        continue;
                    members.push_back(k);
                    stops.insert(s.pending[k].stop_id);
                }
                if (static_cast<int>(stops.size()) < s.cfg.va_spawn_min_sightings)
                    continue;

                // A mirror image is only visible from the real side of its
                // reflector, so every observer must stand on the site's side of
                // the implied plane; blended far peaks cross at along-track
                // phantoms that fail this.
                const Vec2 site = s.anchors.front().mean;
                const Vec2 mid = (site + pos) * 0.5;
                Vec2 nrm = pos - site;
                nrm = nrm * (1.0 / std::max(nrm.norm(), 1e-9));
                bool behind_mirror = false;
                for (std::size_t m : members)
                    behind_mirror = behind_mirror || (s.pending[m].origin - mid).dot(nrm) >= 0.0;
                if (behind_mirror)
                    continue;

                // Weighted least-squares triangulation of the member rays; the
                // same information seeds the covariance, so the consumed rays
                // are not fused twice. Each ray carries the caster's own pose
                // uncertainty: a heading error rotates every ray from that stop
                // coherently, so understating it makes split anchors.
                const double prior_info = 1.0 / (s.cfg.va_init_sigma_m * s.cfg.va_init_sigma_m);
                Eigen::Matrix2d info = Eigen::Matrix2d::Identity() * prior_info;
                Eigen::Vector2d rhs = Eigen::Vector2d(pos.x, pos.y) * prior_info;
                for (std::size_t m : members) {
                    const PendingBearing &p = s.pending[m];
                    const double rng = std::max(distance(p.origin, pos), 1.0);
                    const Eigen::Vector2d u(-std::sin(p.world_bearing), std::cos(p.world_bearing));
                    const double bearing_var = s.cfg.bearing_sigma * s.cfg.bearing_sigma + p.heading_var;
                    const double perp_var = rng * rng * bearing_var + u.dot(p.origin_cov * u);
                    const double w = 1.0 / perp_var;
                    info += w * u * u.transpose();
                    rhs += w * u * (u.dot(Eigen::Vector2d(p.origin.x, p.origin.y)));
                }
                const Eigen::Matrix2d cov = info.inverse();
                const Eigen::Vector2d solved = cov * rhs;
                pos = {solved(0), solved(1)};
                const int id = add_virtual_anchor(s, pos, cov);
                std::sort(members.begin(), members.end());
                for (std::size_t m = members.size(); m-- > 0;) {
                    s.anchors[static_cast<std::size_t>(id)].observed_from.push_back(
                        s.pending[members[m]].origin);
                    s.pending.erase(s.pending.begin() + static_cast<std::ptrdiff_t>(members[m]));
                }
                spawned = true;
            }
        }
    }
    std::erase_if(s.pending,
                  [&](const PendingBearing &p) { return p.stop_id + s.cfg.pending_max_age_stops < s.stop_count; });
}

// ---- vision update ---------------------------------------------------------------

/// Fuse the gated nearest camera target as a direct position fix; a lost frame
/// inflates the position covariance instead of updating. Heading is never
/// camera-observable, so it keeps its odometry/radio uncertainty on loss.
inline void update_vision(SlamState &s, const VisionDetection &det)
{
    const int n = static_cast<int>(s.x.size());
    if (det.lost || det.targets.empty()) {
        const double f = std::sqrt(s.cfg.vision_loss_inflation);
        s.P.topRows(2) *= f;
        s.P.leftCols(2) *= f; // congruence scaling keeps PSD
        detail::symmetrize(s.P);
        return;
    }

    const VisionTarget *best = nullptr;
    double best_d2 = 1e300;
    for (const VisionTarget &t : det.targets) {
        const double d2 = (t.pos - s.position()).dot(t.pos - s.position());
        if (d2 < best_d2) {
            best_d2 = d2;
            best = &t;
        }
    }

    const Eigen::Matrix2d r = Eigen::Matrix2d::Identity() * (best->sigma_m * best->sigma_m);
    const Eigen::Matrix2d pxy = s.P.topLeftCorner<2, 2>();
    const Eigen::Vector2d innov(best->pos.x - s.pos_x(), best->pos.y - s.pos_y());
    const Eigen::Matrix2d sm = pxy + r;
    const double nis = innov.dot(sm.inverse() * innov);
    if (nis > s.cfg.vision_gate_nis)
        return;

    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(2, n);
    h(0, 0) = 1.0;
    h(1, 1) = 1.0;
    const Eigen::MatrixXd ph = s.P * h.transpose();
    const Eigen::MatrixXd k = ph * sm.inverse();
    s.x += k * innov;
    s.x(2) = wrap_angle(s.x(2));
    const Eigen::MatrixXd ikh = Eigen::MatrixXd::Identity(n, n) - k * h;
    s.P = (ikh * s.P * ikh.transpose() + k * r * k.transpose()).eval();
    detail::symmetrize(s.P);
}

// ---- surface recovery --------------------------------------------------------------

struct RecoveredSurface {
    Vec2 a, b;
    int anchor_index = -1;
};

/// Each converged virtual anchor mirrors the serving site across a reflector:
/// the wall is the perpendicular bisector of the site-anchor segment, clipped
/// to the span of reflection points actually observed.
inline std::vector<RecoveredSurface> recover_surfaces(const SlamState &s)
{
    std::vector<RecoveredSurface> out;
    const Vec2 b = s.anchors.front().mean; // serving site
    for (int i = 1; i < static_cast<int>(s.anchors.size()); ++i) {
        const Anchor &a = s.anchors[static_cast<std::size_t>(i)];
        if (a.fixed)
            continue;
        // Gate on the anchor covariance conditioned on the pose: map quality is
        // relative to the trajectory, and the shared gauge drift of a dead-
        // reckoned platform would otherwise hide a well-resolved reflector.
        Eigen::Matrix2d rel = s.anchor_cov(i);
        const Eigen::Matrix<double, 2, 3> cross = s.P.block<2, 3>(a.state_offset, 0);
        rel -= cross * s.pose_cov().ldlt().solve(cross.transpose());
        if (rel.trace() > s.cfg.surface_cov_gate_trace)
            continue;
        const Vec2 v = s.anchor_mean(i);
        const Vec2 mid = (b + v) * 0.5;
        Vec2 normal = v - b;
        const double len = normal.norm();
        if (len < 1e-9)
            continue;
        normal = normal * (1.0 / len);
        const Vec2 dir{-normal.y, normal.x};

        double tmin = 1e300, tmax = -1e300;
        for (const Vec2 &p : a.observed_from) {
            // Specular point: the stop-to-anchor segment crossing the bisector.
            const Vec2 pv = v - p;
            const double denom = pv.dot(normal);
            if (std::abs(denom) < 1e-12)
                continue;
            const double u = (mid - p).dot(normal) / denom;
            if (u <= 0.0 || u >= 1.0)
                continue;
            const Vec2 refl = p + pv * u;
            const double t = (refl - mid).dot(dir);
            tmin = std::min(tmin, t);
            tmax = std::max(tmax, t);
        }
        if (tmin > tmax)
            continue;
        if (tmax - tmin < 0.5) { // widen degenerate extents for visibility
            const double c = 0.5 * (tmin + tmax);
            tmin = c - 0.25;
            tmax = c + 0.25;
        }
        const Vec2 wa = mid + dir * tmin;
        const Vec2 wb = mid + dir * tmax;

        // Point scatterers (not mirrors) also condense into tight anchors, but
        // their implied wall cuts the traveled path, which a real one cannot.
        bool through_path = false;
        for (std::size_t k = 1; k < s.stop_path.size(); ++k)
            through_path = through_path || segments_intersect(wa, wb, s.stop_path[k - 1], s.stop_path[k]);
        if (through_path)
            continue;
        out.push_back({wa, wb, i});
    }
    return out;
}

// ---- metrics ------------------------------------------------------------------------

/// Normalized pose estimation error squared against ground truth.
inline double pose_nees(const SlamState &s, Vec2 true_pos, double true_heading)
{
    Eigen::Vector3d e(s.pos_x() - true_pos.x, s.pos_y() - true_pos.y, wrap_angle(s.heading() - true_heading));
    return e.dot(s.pose_cov().ldlt().solve(e));
}

/// Mean distance from points sampled along recovered segments to the closest
/// true surface.
inline double mapping_error(const std::vector<RecoveredSurface> &recovered, const std::vector<Surface> &truth,
                            double step_m = 0.2)
{
    if (recovered.empty() || truth.empty())
        throw config_error("mapping_error: nothing to compare");
    double acc = 0.0;
    int n = 0;
    for (const RecoveredSurface &r : recovered) {
        const double len = distance(r.a, r.b);
        const int steps = std::max(1, static_cast<int>(std::floor(len / step_m)));
        for (int k = 0; k <= steps; ++k) {
            const Vec2 p = r.a + (r.b - r.a) * (static_cast<double>(k) / steps);
            double best = 1e300;
            for (const Surface &t : truth)
                best = std::min(best, segment_point_distance(t.a, t.b, p));
            acc += best;
            ++n;
        }
    }
    return acc / n;
}

} // namespace isacsim

#endif
