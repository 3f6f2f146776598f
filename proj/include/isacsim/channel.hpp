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

#ifndef ISACSIM_CHANNEL_HPP
#define ISACSIM_CHANNEL_HPP

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "array.hpp"
#include "common.hpp"
#include "frame.hpp"
#include "rng.hpp"

namespace isacsim {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double cross(Vec2 o) const { return x * o.y - y * o.x; }
    double norm() const { return std::hypot(x, y); }
};

inline double distance(Vec2 a, Vec2 b) { return (a - b).norm(); }

/// A radio endpoint: position plus array boresight heading (world frame, rad).
struct Node {
    Vec2 pos;
    double heading = 0.0;
};

/// Reflecting wall segment. `scatter_db` > 0 marks a rough finish whose
/// reflection gain jitters deterministically with the incidence geometry.
struct Surface {
    Vec2 a, b;
    double loss_db = 0.0;
    std::string kind = "wall";
    double scatter_db = 0.0;
};

/// Opaque non-reflecting blocker.
struct Obstacle {
    Vec2 a, b;
};

/// Moving blocker (pedestrian-scale disk) on a piecewise-linear trajectory.
struct Interferer {
    double radius = 0.3;
    std::vector<double> t;
    std::vector<Vec2> p;

    Vec2 position(double time) const
    {
        if (t.empty())
            throw config_error("Interferer: empty trajectory");
        if (time <= t.front())
            return p.front();
        if (time >= t.back())
            return p.back();
        std::size_t i = 1;
        while (t[i] < time)
            ++i;
        double u = (time - t[i - 1]) / (t[i] - t[i - 1]);
        return p[i - 1] + (p[i] - p[i - 1]) * u;
    }
};

struct EnvironmentMap {
    std::vector<Surface> surfaces;
    std::vector<Obstacle> obstacles;
    std::vector<Interferer> interferers;
    Vec2 bounds_lo{-50.0, -50.0};
    Vec2 bounds_hi{50.0, 50.0};
    std::uint64_t phase_seed = 0; // drives per-surface reflection phases

    bool contains(Vec2 q) const
    {
        return q.x >= bounds_lo.x && q.x <= bounds_hi.x && q.y >= bounds_lo.y && q.y <= bounds_hi.y;
    }
};

// ---- geometry helpers -------------------------------------------------------

/// Proper segment intersection, excluding shared endpoints within eps.
inline bool segments_intersect(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2, double eps = 1e-9)
{
    const Vec2 r = p2 - p1;
    const Vec2 s = q2 - q1;
    const double denom = r.cross(s);
    if (std::abs(denom) < 1e-15)
        return false; // parallel (collinear contact treated as grazing, not blocking)
    const double t = (q1 - p1).cross(s) / denom;
    const double u = (q1 - p1).cross(r) / denom;
    return t > eps && t < 1.0 - eps && u > eps && u < 1.0 - eps;
}

/// Distance from segment [a, b] to point c.
inline double segment_point_distance(Vec2 a, Vec2 b, Vec2 c)
{
    const Vec2 ab = b - a;
    const double len2 = ab.dot(ab);
    double t = len2 > 0.0 ? (c - a).dot(ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return distance(a + ab * t, c);
}

/// First intersection of ray (origin, unit dir) with segment [a, b]; returns
/// distance along the ray or a negative value when there is none.
inline double ray_segment_hit(Vec2 origin, Vec2 dir, Vec2 a, Vec2 b, double eps = 1e-9)
{
    const Vec2 s = b - a;
    const double denom = dir.cross(s);
    if (std::abs(denom) < 1e-15)
        return -1.0;
    const Vec2 d = a - origin;
    const double t = d.cross(s) / denom; // along the ray
    const double u = d.cross(dir) / denom; // along the segment
    if (t <= eps || u < -eps || u > 1.0 + eps)
        return -1.0;
    return t;
}

/// Whether segment [p1, p2] passes through the disk (centre c, radius r).
inline bool segment_hits_disk(Vec2 p1, Vec2 p2, Vec2 c, double r)
{
    return segment_point_distance(p1, p2, c) < r;
}

/// Mirror a point across the infinite line through [a, b].
inline Vec2 mirror_point(Vec2 p, Vec2 a, Vec2 b)
{
    const Vec2 d = b - a;
    const double len2 = d.dot(d);
    if (len2 <= 0.0)
        throw config_error("mirror_point: degenerate surface");
    const double t = (p - a).dot(d) / len2;
    const Vec2 foot = a + d * t;
    return foot + (foot - p);
}

/// True when the straight segment p1->p2 is blocked at time `t`.
/// `skip_surface` exempts one surface (used for the legs of its own reflection).
inline bool path_blocked(const EnvironmentMap &env, Vec2 p1, Vec2 p2, double t, int skip_surface = -1)
{
    for (std::size_t i = 0; i < env.surfaces.size(); ++i) {
        if (static_cast<int>(i) == skip_surface)
            continue;
        if (segments_intersect(p1, p2, env.surfaces[i].a, env.surfaces[i].b))
            return true;
    }
    for (const Obstacle &o : env.obstacles)
        if (segments_intersect(p1, p2, o.a, o.b))
            return true;
    for (const Interferer &it : env.interferers)
        if (segment_hits_disk(p1, p2, it.position(t), it.radius))
            return true;
    return false;
}

// ---- path tracing -----------------------------------------------------------

/// One propagation path. Angles are azimuths in each node's local frame.
struct PathComponent {
    double delay_s = 0.0;
    double aod_az = 0.0;
    double aoa_az = 0.0;
    cdouble amplitude; // free-space spread, reflection loss and carrier phase
    int n_bounces = 0;
    int surface_id = -1;
    double weight = 1.0; // ray-integration weight for scan fans
};

namespace detail {

inline double unit_hash(std::uint64_t seed, std::string_view name, std::uint64_t a, std::uint64_t b = 0)
{
    std::uint64_t h = derive_seed(seed, name, splitmix64(a) ^ b);
    return static_cast<double>(h >> 11) * 0x1p-53;
}

/// Deterministic reflection phase per surface.
inline double surface_phase(const EnvironmentMap &env, int surface_id)
{
    return 2.0 * pi * unit_hash(env.phase_seed, "surface-phase", static_cast<std::uint64_t>(surface_id));
}

/// Rough-surface gain jitter, tied to the incidence geometry so both link
/// directions see the same value.
inline double scatter_factor(const EnvironmentMap &env, const Surface &s, int surface_id, double incidence_rad)
{
    if (s.scatter_db <= 0.0)
        return 1.0;
    auto q = static_cast<std::uint64_t>(std::llround(std::abs(incidence_rad) * 360.0 / pi));
    double u = unit_hash(env.phase_seed, "surface-scatter", static_cast<std::uint64_t>(surface_id), q);
    return std::pow(10.0, -(s.scatter_db * u) / 20.0);
}

} // namespace detail

/// Line-of-sight plus first-order specular reflections at time `t`.
/// Amplitudes carry the free-space spread lambda/(4 pi d), the surface loss
/// and a carrier phase; directional weighting belongs to the beamformer.
inline std::vector<PathComponent> trace_paths(const EnvironmentMap &env, const Node &tx, const Node &rx,
                                              const Numerology &num, double t = 0.0)
{
    if (distance(tx.pos, rx.pos) < 1e-9)
        throw config_error("trace_paths: tx and rx positions coincide");
    const double lambda = num.wavelength_m();
    std::vector<PathComponent> paths;

    auto spread = [&](double d) { return lambda / (4.0 * pi * d); };
    auto carrier_phase = [&](double d) {
        double ph = -2.0 * pi * d / lambda;
        return cdouble(std::cos(ph), std::sin(ph));
    };

    if (!path_blocked(env, tx.pos, rx.pos, t)) {
        PathComponent p;
        const Vec2 d = rx.pos - tx.pos;
        const double dist = d.norm();
        p.delay_s = dist / speed_of_light;
        p.aod_az = wrap_angle(std::atan2(d.y, d.x) - tx.heading);
        p.aoa_az = wrap_angle(std::atan2(-d.y, -d.x) - rx.heading);
        p.amplitude = spread(dist) * carrier_phase(dist);
        paths.push_back(p);
    }

    for (std::size_t i = 0; i < env.surfaces.size(); ++i) {
        const Surface &s = env.surfaces[i];
        const Vec2 image = mirror_point(tx.pos, s.a, s.b);
        const Vec2 seg = s.b - s.a;
        // Reflection point = intersection of image->rx with the surface segment.
        const Vec2 dir = rx.pos - image;
        const double denom = dir.cross(seg);
        if (std::abs(denom) < 1e-15)
            continue;
        const double ti = (s.a - image).cross(seg) / denom;
        const double u = (s.a - image).cross(dir) / denom;
        if (ti <= 1e-9 || ti >= 1.0 - 1e-9 || u < 0.0 || u > 1.0)
            continue;
        const Vec2 refl = image + dir * ti;
        if (path_blocked(env, tx.pos, refl, t, static_cast<int>(i)) ||
            path_blocked(env, refl, rx.pos, t, static_cast<int>(i)))
            continue;

        PathComponent p;
        const double dist = distance(image, rx.pos);
        p.delay_s = dist / speed_of_light;
        const Vec2 out = refl - tx.pos;
        const Vec2 in = refl - rx.pos;
        p.aod_az = wrap_angle(std::atan2(out.y, out.x) - tx.heading);
        p.aoa_az = wrap_angle(std::atan2(in.y, in.x) - rx.heading);
        const Vec2 n{-seg.y / seg.norm(), seg.x / seg.norm()};
        const double incidence = std::acos(std::min(1.0, std::abs(n.dot(out) / out.norm())));
        const double refl_gain = std::pow(10.0, -s.loss_db / 20.0) *
                                 detail::scatter_factor(env, s, static_cast<int>(i), incidence);
        double ph = detail::surface_phase(env, static_cast<int>(i));
        p.amplitude = spread(dist) * refl_gain * carrier_phase(dist) * cdouble(std::cos(ph), std::sin(ph));
        p.n_bounces = 1;
        p.surface_id = static_cast<int>(i);
        paths.push_back(p);
    }
    return paths;
}

// ---- beamformed frequency response -------------------------------------------

/// Element power pattern: flat inside +-60 deg, cosine-squared roll-off to 90
/// deg, nothing behind the panel. Returned as an amplitude factor.
inline double element_amplitude(double az_local)
{
    const double a = std::abs(wrap_angle(az_local));
    const double edge = deg2rad(60.0);
    const double back = deg2rad(90.0);
    if (a <= edge)
        return 1.0;
    if (a >= back)
        return 0.0;
    return std::cos((a - edge) / (back - edge) * pi / 2.0);
}

/// Channel realization ready for frequency-domain evaluation: per-path complex
/// coefficients after beamforming at both ends.
struct ChannelRealization {
    std::vector<double> delay_s;
    std::vector<cdouble> coeff;
};

inline ChannelRealization beamform_paths(const std::vector<PathComponent> &paths, const UpaGeometry &geom,
                                         const std::vector<cdouble> &tx_weights,
                                         const std::vector<cdouble> &rx_weights)
{
    ChannelRealization ch;
    ch.delay_s.reserve(paths.size());
    ch.coeff.reserve(paths.size());
    for (const PathComponent &p : paths) {
        cdouble g = p.amplitude * p.weight * beam_gain(geom, tx_weights, p.aod_az, 0.0) *
                    beam_gain(geom, rx_weights, p.aoa_az, 0.0) * element_amplitude(p.aod_az) *
                    element_amplitude(p.aoa_az);
        ch.delay_s.push_back(p.delay_s);
        ch.coeff.push_back(g);
    }
    return ch;
}

/// H[k] over the centered effective subcarriers: sum_p c_p exp(-j 2 pi f_k tau_p).
inline std::vector<cdouble> freq_response(const ChannelRealization &ch, const Numerology &num)
{
    const int n = num.n_effective_sc;
    std::vector<cdouble> h(n, cdouble(0.0, 0.0));
    for (std::size_t p = 0; p < ch.coeff.size(); ++p) {
        if (std::norm(ch.coeff[p]) == 0.0)
            continue;
        const double f0 = -std::floor(n / 2.0) * num.scs_hz; // first centered subcarrier
        const double ph0 = -2.0 * pi * f0 * ch.delay_s[p];
        const double dph = -2.0 * pi * num.scs_hz * ch.delay_s[p];
        cdouble w = ch.coeff[p] * cdouble(std::cos(ph0), std::sin(ph0));
        const cdouble step(std::cos(dph), std::sin(dph));
        for (int k = 0; k < n; ++k) {
            h[k] += w;
            w *= step;
        }
    }
    return h;
}

// ---- monostatic echoes --------------------------------------------------------

struct MonostaticParams {
    int n_rays = 33;            // fan samples across the beam mainlobe
    double fan_halfwidth = 1.5; // in units of the null-to-null half width
    bool include_si = true;
    double si_delay_s = 5e-9;
    double si_amplitude = 1.07e-2; // ~40 dB above a 4 m metal echo
    double si_az = 0.0;            // fixed beam-space location (local frame)
};

/// Echo paths seen when transmitting and receiving on the same beam: a small
/// deterministic fan of rays across the mainlobe, first surface hit per ray,
/// two-way delay and spread, plus the transceiver self-interference leak.
inline std::vector<PathComponent> monostatic_channel(const EnvironmentMap &env, const Node &node,
                                                     double beam_az_local, const Numerology &num,
                                                     const UpaGeometry &geom, double t = 0.0,
                                                     const MonostaticParams &mp = {})
{
    const double lambda = num.wavelength_m();
    std::vector<PathComponent> paths;

    if (mp.include_si) {
        PathComponent si;
        si.delay_s = mp.si_delay_s;
        si.aod_az = mp.si_az;
        si.aoa_az = mp.si_az;
        si.amplitude = mp.si_amplitude;
        si.surface_id = -2;
        paths.push_back(si);
    }

    // Null-to-null half width of the array factor in sine space is 1/(N d).
    const double sine_half = mp.fan_halfwidth / (geom.n_cols * geom.spacing);
    const double s0 = std::sin(beam_az_local);
    for (int r = 0; r < mp.n_rays; ++r) {
        const double frac = mp.n_rays > 1 ? static_cast<double>(r) / (mp.n_rays - 1) : 0.5;
        const double s = s0 + (2.0 * frac - 1.0) * sine_half;
        if (s <= -1.0 || s >= 1.0)
            continue;
        const double az_local = std::asin(s);
        const double az_world = node.heading + az_local;
        const Vec2 dir{std::cos(az_world), std::sin(az_world)};

        double best_d = -1.0;
        int best_surface = -1;
        for (std::size_t i = 0; i < env.surfaces.size(); ++i) {
            double d = ray_segment_hit(node.pos, dir, env.surfaces[i].a, env.surfaces[i].b);
            if (d > 0.0 && (best_d < 0.0 || d < best_d)) {
                best_d = d;
                best_surface = static_cast<int>(i);
            }
        }
        double block_d = -1.0;
        for (const Obstacle &o : env.obstacles) {
            double d = ray_segment_hit(node.pos, dir, o.a, o.b);
            if (d > 0.0 && (block_d < 0.0 || d < block_d))
                block_d = d;
        }
        for (const Interferer &it : env.interferers) {
            // Conservative disk hit: treat as a blocker at the centre distance.
            Vec2 c = it.position(t);
            Vec2 rel = c - node.pos;
            double along = rel.dot(dir);
            if (along > 0.0 && (rel - dir * along).norm() < it.radius && (block_d < 0.0 || along < block_d))
                block_d = along;
        }
        if (best_surface < 0 || (block_d > 0.0 && block_d < best_d))
            continue;

        const Surface &s_hit = env.surfaces[best_surface];
        PathComponent p;
        p.delay_s = 2.0 * best_d / speed_of_light;
        p.aod_az = az_local;
        p.aoa_az = az_local;
        const double refl_gain = std::pow(10.0, -s_hit.loss_db / 20.0);
        const double ph = -2.0 * pi * (2.0 * best_d) / lambda + detail::surface_phase(env, best_surface);
        p.amplitude = lambda / (4.0 * pi * (2.0 * best_d)) * refl_gain * cdouble(std::cos(ph), std::sin(ph));
        p.n_bounces = 1;
        p.surface_id = best_surface;
        p.weight = 1.0 / mp.n_rays;
        paths.push_back(p);
    }
    return paths;
}

// ---- map file I/O --------------------------------------------------------------
//
// Structured text, one element per line, versioned header:
//
//     isacmap 1
//     # comment
//     bounds    x_lo y_lo x_hi y_hi
//     segment   x1 y1 x2 y2 loss_db kind [scatter_db]
//     obstacle  x1 y1 x2 y2
//     interferer radius t0 x0 y0 [t1 x1 y1 ...]

inline EnvironmentMap parse_map(std::istream &in)
{
    EnvironmentMap env;
    std::string line;
    if (!std::getline(in, line))
        throw config_error("map: empty file");
    {
        std::istringstream h(line);
        std::string magic;
        int version = 0;
        h >> magic >> version;
        if (magic != "isacmap" || version != 1)
            throw config_error("map: expected header 'isacmap 1'");
    }
    bool have_bounds = false;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag) || tag[0] == '#')
            continue;
        auto fail = [&](const std::string &msg) {
            throw config_error("map line " + std::to_string(lineno) + ": " + msg);
        };
        if (tag == "bounds") {
            if (!(ls >> env.bounds_lo.x >> env.bounds_lo.y >> env.bounds_hi.x >> env.bounds_hi.y))
                fail("bounds needs 4 numbers");
            have_bounds = true;
        } else if (tag == "segment") {
            Surface s;
            if (!(ls >> s.a.x >> s.a.y >> s.b.x >> s.b.y >> s.loss_db >> s.kind))
                fail("segment needs x1 y1 x2 y2 loss_db kind");
            if (!(ls >> s.scatter_db))
                s.scatter_db = (s.kind == "rough") ? 3.0 : 0.0;
            env.surfaces.push_back(s);
        } else if (tag == "obstacle") {
            Obstacle o;
            if (!(ls >> o.a.x >> o.a.y >> o.b.x >> o.b.y))
                fail("obstacle needs 4 numbers");
            env.obstacles.push_back(o);
        } else if (tag == "interferer") {
            Interferer it;
            if (!(ls >> it.radius))
                fail("interferer needs a radius");
            double t, x, y;
            while (ls >> t >> x >> y) {
                it.t.push_back(t);
                it.p.push_back({x, y});
            }
            if (it.t.empty())
                fail("interferer needs at least one t x y knot");
            env.interferers.push_back(it);
        } else {
            fail("unknown element '" + tag + "'");
        }
    }
    if (!have_bounds) {
        // Default bounds: geometry bounding box inflated by 5 m.
        bool any = false;
        Vec2 lo{1e18, 1e18}, hi{-1e18, -1e18};
        auto grow = [&](Vec2 p) {
            lo.x = std::min(lo.x, p.x);
            lo.y = std::min(lo.y, p.y);
            hi.x = std::max(hi.x, p.x);
            hi.y = std::max(hi.y, p.y);
            any = true;
        };
        for (const auto &s : env.surfaces) {
            grow(s.a);
            grow(s.b);
        }
        for (const auto &o : env.obstacles) {
            grow(o.a);
            grow(o.b);
        }
        if (any) {
            env.bounds_lo = lo - Vec2{5.0, 5.0};
            env.bounds_hi = hi + Vec2{5.0, 5.0};
        }
    }
    return env;
}

inline EnvironmentMap load_map(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw config_error("map: cannot open " + path);
    return parse_map(in);
}

} // namespace isacsim

#endif
