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

#ifndef ISACSIM_FUSION_HPP
#define ISACSIM_FUSION_HPP

#include <algorithm>
#include <deque>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "channel.hpp"
#include "frame.hpp"

namespace isacsim {

// ---- report types ------------------------------------------------------------

struct ReportPoint {
    Vec2 pos;
    Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
    double confidence = 1.0; // linear echo power, normalized per report
};

struct ReportSegment {
    Vec2 a, b;
    double confidence = 1.0;
};

/// One terminal's sensing result for a collection round. Points and segments
/// are in the terminal's local frame until transformed.
struct SensingReport {
    int ue_id = -1;
    std::optional<Node> pose;
    Eigen::Matrix3d pose_cov = Eigen::Matrix3d::Zero();
    std::vector<ReportPoint> points;
    std::vector<ReportSegment> segments;
};

// ---- frame alignment -----------------------------------------------------------

/// Rigid transform into the global frame. Point covariances pick up the pose
/// uncertainty through the transform Jacobian [I | dR/dheading * p].
inline SensingReport transform_report(const SensingReport &r)
{
    if (!r.pose)
        throw config_error("transform_report: report carries no pose estimate");
    const double c = std::cos(r.pose->heading), s = std::sin(r.pose->heading);
    Eigen::Matrix2d rot;
    rot << c, -s, s, c;
    Eigen::Matrix2d drot;
    drot << -s, -c, c, -s;
    const Eigen::Vector2d t(r.pose->pos.x, r.pose->pos.y);

    SensingReport g = r;
    for (ReportPoint &p : g.points) {
        const Eigen::Vector2d local(p.pos.x, p.pos.y);
        const Eigen::Vector2d world = rot * local + t;
        Eigen::Matrix<double, 2, 3> j;
        j << 1.0, 0.0, (drot * local)(0), 0.0, 1.0, (drot * local)(1);
        p.cov = (rot * p.cov * rot.transpose() + j * r.pose_cov * j.transpose()).eval();
        p.pos = {world(0), world(1)};
    }
    auto map = [&](Vec2 q) {
        const Eigen::Vector2d w = rot * Eigen::Vector2d(q.x, q.y) + t;
        return Vec2{w(0), w(1)};
    };
    for (ReportSegment &seg : g.segments) {
        seg.a = map(seg.a);
        seg.b = map(seg.b);
    }
    return g;
}

// ---- fusion ------------------------------------------------------------------------

struct FusionConfig {
    double gate_m = 0.5;           // cluster radius for point merging
    double coverage_tol_m = 0.5;   // truth sample counts as covered within this
    double coverage_step_m = 0.2;
    double collinear_max_angle = deg2rad(10.0);
    double segment_gap_m = 0.5;    // projected-interval gap allowed when merging
};

struct FusedPoint {
    Vec2 pos;
    double weight = 0.0;
    std::vector<int> source_ues; // every fused point traces to >= 1 report
};

struct FusedMap {
    std::vector<FusedPoint> points;
    std::vector<ReportSegment> segments;
};

namespace detail {

/// Undirected mean of two segment directions (angles mod pi).
inline double mean_direction(double phi1, double w1, double phi2, double w2)
{
    const double x = w1 * std::cos(2.0 * phi1) + w2 * std::cos(2.0 * phi2);
    const double y = w1 * std::sin(2.0 * phi1) + w2 * std::sin(2.0 * phi2);
    return 0.5 * std::atan2(y, x);
}

inline bool mergeable(const ReportSegment &p, const ReportSegment &q, const FusionConfig &cfg)
{
    const Vec2 dp = p.b - p.a, dq = q.b - q.a;
    const double phi_p = std::atan2(dp.y, dp.x), phi_q = std::atan2(dq.y, dq.x);
    double dphi = std::abs(wrap_angle(phi_p - phi_q));
    dphi = std::min(dphi, pi - dphi); // undirected
    if (dphi > cfg.collinear_max_angle)
        return false;
    if (segment_point_distance(p.a, p.b, q.a) > cfg.gate_m && segment_point_distance(p.a, p.b, q.b) > cfg.gate_m &&
        segment_point_distance(q.a, q.b, p.a) > cfg.gate_m && segment_point_distance(q.a, q.b, p.b) > cfg.gate_m)
        return false;
    // Projected intervals on the mean line must touch within the allowed gap.
    const double phi = mean_direction(phi_p, dp.norm(), phi_q, dq.norm());
    const Vec2 u{std::cos(phi), std::sin(phi)};
    const double p1 = u.dot(p.a), p2 = u.dot(p.b), q1 = u.dot(q.a), q2 = u.dot(q.b);
    const double plo = std::min(p1, p2), phi_hi = std::max(p1, p2);
    const double qlo = std::min(q1, q2), qhi = std::max(q1, q2);
    return std::max(plo, qlo) <= std::min(phi_hi, qhi) + cfg.segment_gap_m;
}

inline ReportSegment merge_segments(const ReportSegment &p, const ReportSegment &q)
{
    const Vec2 dp = p.b - p.a, dq = q.b - q.a;
    const double lp = dp.norm(), lq = dq.norm();
    const double wp = p.confidence * lp, wq = q.confidence * lq;
    const double phi = mean_direction(std::atan2(dp.y, dp.x), wp, std::atan2(dq.y, dq.x), wq);
    const Vec2 u{std::cos(phi), std::sin(phi)};
    const Vec2 mp = (p.a + p.b) * 0.5, mq = (q.a + q.b) * 0.5;
    const Vec2 anchor = (mp * wp + mq * wq) * (1.0 / (wp + wq));

    double tmin = 1e300, tmax = -1e300;
    for (Vec2 e : {p.a, p.b, q.a, q.b}) {
        const double t = u.dot(e - anchor);
        tmin = std::min(tmin, t);
        tmax = std::max(tmax, t);
    }
    ReportSegment out;
    out.a = anchor + u * tmin;
    out.b = anchor + u * tmax;
    out.confidence = (wp * p.confidence + wq * q.confidence) / (wp + wq);
    return out;
}

} // namespace detail

/// Merge transformed reports into one global map: points cluster by a gating
/// radius with confidence-weighted centroids; near-collinear overlapping
/// segments collapse into one span. Reports are processed in ue_id order, so
/// the result does not depend on arrival order.
inline FusedMap fuse(const std::vector<SensingReport> &reports, const FusionConfig &cfg = {})
{
    if (reports.empty())
        throw config_error("fuse: no reports");
    CapacityLimits limits;
    if (static_cast<int>(reports.size()) > limits.max_ul_ues)
        throw config_error("fuse: more reports than uplink capacity");

    std::vector<SensingReport> global;
    global.reserve(reports.size());
    for (const SensingReport &r : reports)
        global.push_back(transform_report(r));
    std::sort(global.begin(), global.end(),
              [](const SensingReport &a, const SensingReport &b) { return a.ue_id < b.ue_id; });
    for (std::size_t i = 1; i < global.size(); ++i)
        if (global[i].ue_id == global[i - 1].ue_id)
            throw config_error("fuse: duplicate ue_id in round");

    FusedMap map;
    for (const SensingReport &r : global) {
        double peak = 0.0;
        for (const ReportPoint &p : r.points)
            peak = std::max(peak, p.confidence);
        const double scale = peak > 0.0 ? 1.0 / peak : 1.0;
        for (const ReportPoint &p : r.points) {
            const double w = p.confidence * scale;
            FusedPoint *hit = nullptr;
            for (FusedPoint &f : map.points)
                if (distance(f.pos, p.pos) <= cfg.gate_m) {
                    hit = &f;
                    break;
                }
            if (hit) {
                const double tot = hit->weight + w;
                hit->pos = (hit->pos * hit->weight + p.pos * w) * (1.0 / tot);
                hit->weight = tot;
                if (hit->source_ues.empty() || hit->source_ues.back() != r.ue_id)
                    hit->source_ues.push_back(r.ue_id);
            } else {
                map.points.push_back({p.pos, w, {r.ue_id}});
            }
        }
        for (const ReportSegment &s : r.segments)
            map.segments.push_back(s);
    }

    bool merged = true;
    while (merged) {
        merged = false;
        for (std::size_t i = 0; i < map.segments.size() && !merged; ++i)
            for (std::size_t j = i + 1; j < map.segments.size() && !merged; ++j)
                if (detail::mergeable(map.segments[i], map.segments[j], cfg)) {
                    map.segments[i] = detail::merge_segments(map.segments[i], map.segments[j]);
                    map.segments.erase(map.segments.begin() + static_cast<std::ptrdiff_t>(j));
                    merged = true;
                }
    }
    return map;
}

/// Fraction of points sampled along the true surfaces that lie within
/// tolerance of any fused element.
inline double coverage(const FusedMap &map, const std::vector<Surface> &truth, const FusionConfig &cfg = {})
{
    if (truth.empty())
        throw config_error("coverage: no reference surfaces");
    int covered = 0, total = 0;
    for (const Surface &s : truth) {
        const double len = distance(s.a, s.b);
        const int steps = std::max(1, static_cast<int>(std::floor(len / cfg.coverage_step_m)));
        for (int k = 0; k <= steps; ++k) {
            const Vec2 q = s.a + (s.b - s.a) * (static_cast<double>(k) / steps);
            ++total;
            bool hit = false;
            for (const FusedPoint &p : map.points)
                if (distance(p.pos, q) <= cfg.coverage_tol_m) {
                    hit = true;
                    break;
                }
            for (std::size_t i = 0; !hit && i < map.segments.size(); ++i)
                if (segment_point_distance(map.segments[i].a, map.segments[i].b, q) <= cfg.coverage_tol_m)
                    hit = true;
            covered += hit ? 1 : 0;
        }
    }
    return static_cast<double>(covered) / total;
}

// ---- wire format ---------------------------------------------------------------------

inline std::string serialize_report(const SensingReport &r)
{
    if (!r.pose)
        throw config_error("serialize_report: report carries no pose estimate");
    nlohmann::json j;
    j["ue_id"] = r.ue_id;
    j["pose"] = {{"x", r.pose->pos.x}, {"y", r.pose->pos.y}, {"heading", r.pose->heading}};
    std::vector<double> pc(9);
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            pc[static_cast<std::size_t>(a * 3 + b)] = r.pose_cov(a, b);
    j["pose_cov"] = pc;
    j["points"] = nlohmann::json::array();
    for (const ReportPoint &p : r.points)
        j["points"].push_back({{"x", p.pos.x},
                               {"y", p.pos.y},
                               {"cov", {p.cov(0, 0), p.cov(0, 1), p.cov(1, 1)}},
                               {"conf", p.confidence}});
    j["segments"] = nlohmann::json::array();
    for (const ReportSegment &s : r.segments)
        j["segments"].push_back({{"ax", s.a.x}, {"ay", s.a.y}, {"bx", s.b.x}, {"by", s.b.y}, {"conf", s.confidence}});
    return j.dump();
}

inline SensingReport parse_report(const std::string &text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception &e) {
        throw config_error(std::string("report: bad payload: ") + e.what());
    }
    try {
        SensingReport r;
        r.ue_id = j.at("ue_id").get<int>();
        const auto &pose = j.at("pose");
        r.pose = Node{{pose.at("x").get<double>(), pose.at("y").get<double>()}, pose.at("heading").get<double>()};
        const auto pc = j.at("pose_cov").get<std::vector<double>>();
        if (pc.size() != 9)
            throw config_error("report: pose_cov must have 9 entries");
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                r.pose_cov(a, b) = pc[static_cast<std::size_t>(a * 3 + b)];
        for (const auto &p : j.at("points")) {
            ReportPoint rp;
            rp.pos = {p.at("x").get<double>(), p.at("y").get<double>()};
            const auto cv = p.at("cov").get<std::vector<double>>();
            if (cv.size() != 3)
                throw config_error("report: point cov must have 3 entries");
            rp.cov << cv[0], cv[1], cv[1], cv[2];
            rp.confidence = p.at("conf").get<double>();
            r.points.push_back(rp);
        }
        for (const auto &s : j.at("segments")) {
            ReportSegment rs;
            rs.a = {s.at("ax").get<double>(), s.at("ay").get<double>()};
            rs.b = {s.at("bx").get<double>(), s.at("by").get<double>()};
            rs.confidence = s.at("conf").get<double>();
            r.segments.push_back(rs);
        }
        return r;
    } catch (const nlohmann::json::exception &e) {
        throw config_error(std::string("report: missing or mistyped field: ") + e.what());
    }
}

/// Length-prefixed record framing: ASCII byte count, newline, payload, newline.
inline void frame_record(std::string &buf, const std::string &payload)
{
    buf += std::to_string(payload.size());
    buf += '\n';
    buf += payload;
    buf += '\n';
}

/// Reads one framed record starting at `off`; advances `off` past it.
inline std::optional<std::string> unframe_record(const std::string &buf, std::size_t &off)
{
    if (off >= buf.size())
        return std::nullopt;
    const std::size_t nl = buf.find('\n', off);
    if (nl == std::string::npos)
        throw config_error("record stream: truncated length prefix");
    std::size_t len = 0;
    for (std::size_t i = off; i < nl; ++i) {
        if (buf[i] < '0' || buf[i] > '9')
            throw config_error("record stream: malformed length prefix");
        len = len * 10 + static_cast<std::size_t>(buf[i] - '0');
    }
    if (nl + 1 + len + 1 > buf.size())
        throw config_error("record stream: truncated payload");
    if (buf[nl + 1 + len] != '\n')
        throw config_error("record stream: missing record terminator");
    std::string payload = buf.substr(nl + 1, len);
    off = nl + 1 + len + 1;
    return payload;
}

/// In-process collector: single writer appends, fusion drains a snapshot.
/// The backing buffer is the on-disk replay format.
class MessageBus {
  public:
    void publish(const SensingReport &r)
    {
        frame_record(buffer_, serialize_report(r));
        ++count_;
    }

    std::vector<SensingReport> snapshot() const
    {
        std::vector<SensingReport> out;
        std::size_t off = 0;
        while (auto payload = unframe_record(buffer_, off))
            out.push_back(parse_report(*payload));
        return out;
    }

    std::size_t size() const { return count_; }
    const std::string &raw() const { return buffer_; }

    void dump(const std::string &path) const
    {
        std::ofstream f(path, std::ios::binary);
        if (!f)
            throw config_error("bus dump: cannot open " + path);
        f.write(buffer_.data(), static_cast<std::streamsize>(buffer_.size()));
    }

    static MessageBus replay(const std::string &path)
    {
        std::ifstream f(path, std::ios::binary);
        if (!f)
            throw config_error("bus replay: cannot open " + path);
        MessageBus bus;
        bus.buffer_.assign(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
        std::size_t off = 0;
        while (unframe_record(bus.buffer_, off)) // validates framing
            ++bus.count_;
        return bus;
    }

  private:
    std::string buffer_;
    std::size_t count_ = 0;
};

} // namespace isacsim

#endif
