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

#include <catch2/catch_amalgamated.hpp>

#include <isacsim/rng.hpp>
#include <isacsim/slam.hpp>

using namespace isacsim;

namespace {

double true_bearing(Vec2 anchor, Vec2 pos, double heading)
{
    return wrap_angle(std::atan2(anchor.y - pos.y, anchor.x - pos.x) - heading);
}

BearingMeasurement make_bearing(double t, Vec2 anchor, Vec2 pos, double heading, double noise = 0.0)
{
    BearingMeasurement m;
    m.t = t;
    m.bearing = wrap_angle(true_bearing(anchor, pos, heading) + noise);
    m.range_hint_m = distance(anchor, pos);
    return m;
}

void require_healthy_cov(const SlamState &s)
{
    REQUIRE((s.P - s.P.transpose()).cwiseAbs().maxCoeff() < 1e-10);
    Eigen::LLT<Eigen::MatrixXd> llt(s.P);
    REQUIRE(llt.info() == Eigen::Success);
}

} // namespace

TEST_CASE("dead reckoning moves the pose along the heading")
{
    SlamState s = make_slam_state({0.0, 0.0}, {2.0, 3.0}, 0.0);
    predict(s, {1.0, 1.0, 0.0, 0.0}, 1.0);
    REQUIRE(s.pos_x() == Catch::Approx(3.0).margin(1e-12));
    REQUIRE(s.pos_y() == Catch::Approx(3.0).margin(1e-12));
    REQUIRE(s.heading() == Catch::Approx(0.0).margin(1e-12));
    REQUIRE(s.time == 1.0);

    predict(s, {2.0, 2.0, pi / 2.0, 0.0}, 1.0);
    REQUIRE(s.pos_x() == Catch::Approx(5.0).margin(1e-12));
    REQUIRE(s.heading() == Catch::Approx(pi / 2.0).margin(1e-12));
}

TEST_CASE("stationary prediction keeps the mean and grows the covariance")
{
    SlamState s = make_slam_state({0.0, 0.0}, {1.0, -1.0}, 0.3);
    const Eigen::Vector3d mean0 = s.x;
    double prev_trace = s.pose_cov().trace();
    for (int k = 1; k <= 20; ++k) {
        predict(s, {static_cast<double>(k), 0.0, 0.0, 0.3}, 1.0);
        const double tr = s.pose_cov().trace();
        REQUIRE(tr > prev_trace);
        prev_trace = tr;
    }
    REQUIRE((s.x - mean0).norm() < 1e-12);
    require_healthy_cov(s);
}

TEST_CASE("prediction rejects bad time steps")
{
    SlamState s = make_slam_state({0.0, 0.0}, {0.0, 0.0}, 0.0);
    predict(s, {5.0, 0.0, 0.0, 0.0}, 1.0);
    REQUIRE_THROWS_AS(predict(s, {4.0, 0.0, 0.0, 0.0}, 1.0), config_error);
    REQUIRE_THROWS_AS(predict(s, {6.0, 0.0, 0.0, 0.0}, 0.0), config_error);
    REQUIRE_THROWS_AS(predict(s, {6.0, 0.0, 0.0, 0.0}, -1.0), config_error);
}

TEST_CASE("odometry-only drift grows without bound")
{
    SlamState s = make_slam_state({0.0, 0.0}, {0.0, 0.0}, 0.0);
    double trace_100 = 0.0;
    std::vector<double> window_traces;
    for (int k = 1; k <= 800; ++k) {
        predict(s, {static_cast<double>(k), 0.5, 0.01, 0.0}, 1.0);
        if (k == 100)
            trace_100 = s.pose_cov().trace();
        if (k % 100 == 0)
            window_traces.push_back(s.pose_cov().trace());
    }
    REQUIRE(s.pose_cov().trace() > 4.0 * trace_100);
    for (std::size_t i = 1; i < window_traces.size(); ++i)
        REQUIRE(window_traces[i] > window_traces[i - 1]);
}

TEST_CASE("site bearings from successive stops tighten the pose")
{
    const Vec2 bs{0.0, 0.0};
    SlamState s = make_slam_state(bs, {5.0, 1.0}, 0.0, {}, 0.4, deg2rad(8.0));
    Vec2 pos{5.0, 1.0};

    for (int stop = 0; stop < 2; ++stop) {
        const double before = s.pose_cov().trace();
        update_radio(s, {make_bearing(s.time, bs, pos, 0.0)});
        REQUIRE(s.pose_cov().trace() < before);
        require_healthy_cov(s);

        predict(s, {s.time + 1.0, 2.0, 0.0, 0.0}, 1.0);
        pos.x += 2.0;
    }
}

TEST_CASE("bearing innovation wraps across the +/- pi cut")
{
    const Vec2 bs{-10.0, 0.0};
    SlamState s = make_slam_state(bs, {0.0, 0.0}, 0.0);
    const Eigen::VectorXd before = s.x;

    // Predicted bearing is just below +pi; the measurement reports just above
    // -pi. The wrapped innovation is tiny, so the pose barely moves.
    BearingMeasurement m;
    m.t = 0.0;
    m.bearing = wrap_angle(std::atan2(0.02, -10.0) + 0.04);
    REQUIRE(m.bearing < 0.0);
    update_radio(s, {m});
    REQUIRE((s.x - before).norm() < 0.1);
    require_healthy_cov(s);
}

TEST_CASE("hinted association bypasses the search")
{
    const Vec2 bs{0.0, 0.0};
    SlamState s = make_slam_state(bs, {4.0, 0.0}, 0.0);
    BearingMeasurement m = make_bearing(0.0, bs, {4.0, 0.0}, 0.0);
    m.anchor_hint = 0;
    const double before = s.pose_cov().trace();
    update_radio(s, {m});
    REQUIRE(s.pose_cov().trace() < before);
}

TEST_CASE("persistent unexplained bearings spawn a mirror anchor")
{
    const Vec2 bs{0.0, 0.0};
    const Vec2 va{0.0, -4.0}; // site mirrored across a wall at y = -2
    SlamState s = make_slam_state(bs, {4.0, 1.0}, 0.0);
    Vec2 pos{4.0, 1.0};

    for (int stop = 0; stop < 10; ++stop) {
        update_radio(s, {make_bearing(s.time, bs, pos, 0.0), make_bearing(s.time, va, pos, 0.0)});
        require_healthy_cov(s);
        if (stop < 9) {
            predict(s, {s.time + 4.0, 0.5, 0.0, 0.0}, 4.0);
            pos.x += 2.0;
        }
    }

    REQUIRE(s.anchors.size() == 2);
    REQUIRE_FALSE(s.anchors[1].fixed);
    REQUIRE(distance(s.anchor_mean(1), va) < 0.5);
    REQUIRE(s.anchors[1].observed_from.size() >= 8);
}

TEST_CASE("anchor spawning survives bearing noise")
{
    const Vec2 bs{0.0, 0.0};
    const Vec2 va{0.0, -4.0};
    RngStream rng(77, "slam_noise");
    SlamState s = make_slam_state(bs, {4.0, 1.0}, 0.0);
    Vec2 pos{4.0, 1.0};
    const double sigma = deg2rad(1.0);

    for (int stop = 0; stop < 10; ++stop) {
        update_radio(s, {make_bearing(s.time, bs, pos, 0.0, sigma * rng.normal()),
                         make_bearing(s.time, va, pos, 0.0, sigma * rng.normal())});
        require_healthy_cov(s);
        if (stop < 9) {
            predict(s, {s.time + 4.0, 0.5, 0.0, 0.0}, 4.0);
            pos.x += 2.0;
        }
    }
    REQUIRE(s.anchors.size() == 2);
    REQUIRE(distance(s.anchor_mean(1), va) < 0.5);
}

TEST_CASE("camera fix at the mean shrinks uncertainty without moving it")
{
    SlamState s = make_slam_state({0.0, 0.0}, {3.0, 2.0}, 0.1);
    const Eigen::VectorXd before = s.x;
    const double trace_before = s.pose_cov().trace();

    VisionDetection det;
    det.t = 0.0;
    det.targets.push_back({{3.0, 2.0}, 0.05});
    update_vision(s, det);

    REQUIRE((s.x - before).norm() < 1e-12);
    REQUIRE(s.pose_cov().trace() < trace_before);
    require_healthy_cov(s);
}

TEST_CASE("lost camera frames inflate the position covariance")
{
    SlamState s = make_slam_state({0.0, 0.0}, {3.0, 2.0}, 0.1);
    add_virtual_anchor(s, {1.0, 1.0}, Eigen::Matrix2d::Identity());
    const Eigen::VectorXd mean_before = s.x;
    const Eigen::Matrix3d pose_before = s.pose_cov();
    const Eigen::Matrix2d va_before = s.anchor_cov(1);

    VisionDetection det;
    det.t = 0.0;
    det.lost = true;
    update_vision(s, det);

    REQUIRE((s.x - mean_before).norm() == 0.0);
    REQUIRE((s.pose_cov().topLeftCorner<2, 2>() - 4.0 * pose_before.topLeftCorner<2, 2>()).cwiseAbs().maxCoeff() <
            1e-12);
    REQUIRE(s.pose_cov()(2, 2) == pose_before(2, 2)); // heading is not camera-observable
    REQUIRE((s.anchor_cov(1) - va_before).cwiseAbs().maxCoeff() < 1e-12);
    require_healthy_cov(s);
}

TEST_CASE("bystander detections are gated out")
{
    SlamState s = make_slam_state({0.0, 0.0}, {3.0, 2.0}, 0.1);
    const Eigen::VectorXd mean_before = s.x;
    const Eigen::MatrixXd cov_before = s.P;

    VisionDetection det;
    det.t = 0.0;
    det.targets.push_back({{6.0, 2.0}, 0.05}); // pedestrian 3 m away
    update_vision(s, det);

    REQUIRE((s.x - mean_before).norm() == 0.0);
    REQUIRE((s.P - cov_before).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("nearest camera target wins the association")
{
    SlamState s = make_slam_state({0.0, 0.0}, {3.0, 2.0}, 0.1);
    VisionDetection det;
    det.t = 0.0;
    det.targets.push_back({{6.5, 2.0}, 0.05});
    det.targets.push_back({{3.05, 2.0}, 0.05});
    update_vision(s, det);
    REQUIRE(s.pos_x() > 3.0);
    REQUIRE(s.pos_x() < 3.06);
}

TEST_CASE("recovered wall is the perpendicular bisector of site and anchor")
{
    SlamState s = make_slam_state({0.0, 0.0}, {2.0, 2.0}, 0.0);
    const int va = add_virtual_anchor(s, {10.0, 0.0}, Eigen::Matrix2d::Identity() * 0.01);
    s.anchors[static_cast<std::size_t>(va)].observed_from.push_back({2.0, 2.0});
    s.anchors[static_cast<std::size_t>(va)].observed_from.push_back({3.0, -3.0});

    const std::vector<RecoveredSurface> walls = recover_surfaces(s);
    REQUIRE(walls.size() == 1);
    REQUIRE(walls[0].a.x == Catch::Approx(5.0).margin(1e-12));
    REQUIRE(walls[0].b.x == Catch::Approx(5.0).margin(1e-12));
    const double lo = std::min(walls[0].a.y, walls[0].b.y);
    const double hi = std::max(walls[0].a.y, walls[0].b.y);
    REQUIRE(lo == Catch::Approx(-3.0 + 6.0 / 7.0).margin(1e-9));
    REQUIRE(hi == Catch::Approx(1.25).margin(1e-9));
}

TEST_CASE("uncertain anchors are excluded from the map")
{
    SlamState s = make_slam_state({0.0, 0.0}, {2.0, 2.0}, 0.0);
    const int good = add_virtual_anchor(s, {10.0, 0.0}, Eigen::Matrix2d::Identity() * 0.01);
    const int bad = add_virtual_anchor(s, {0.0, 8.0}, Eigen::Matrix2d::Identity() * 1.0);
    s.anchors[static_cast<std::size_t>(good)].observed_from.push_back({2.0, 2.0});
    s.anchors[static_cast<std::size_t>(bad)].observed_from.push_back({2.0, 2.0});

    const std::vector<RecoveredSurface> walls = recover_surfaces(s);
    REQUIRE(walls.size() == 1);
    REQUIRE(walls[0].anchor_index == good);
}

TEST_CASE("noiseless mirror geometry reproduces the wall exactly")
{
    const Vec2 bs{0.0, 0.0};
    const Vec2 wall_a{-6.0, -2.0}, wall_b{14.0, -2.0};
    const Vec2 va = mirror_point(bs, wall_a, wall_b);
    REQUIRE(distance(va, {0.0, -4.0}) < 1e-12);

    SlamConfig cfg;
    cfg.bearing_sigma = deg2rad(0.1);
    SlamState s = make_slam_state(bs, {4.0, 1.0}, 0.0, cfg, 1e-4, 1e-5);
    Vec2 pos{4.0, 1.0};
    std::vector<Vec2> stops;
    for (int stop = 0; stop < 6; ++stop) {
        stops.push_back(pos);
        update_radio(s, {make_bearing(s.time, bs, pos, 0.0), make_bearing(s.time, va, pos, 0.0)});
        if (stop < 5) {
            predict(s, {s.time + 4.0, 0.5, 0.0, 0.0}, 4.0);
            pos.x += 2.0;
        }
    }
    REQUIRE(s.anchors.size() == 2);
    REQUIRE(distance(s.anchor_mean(1), va) < 1e-6);

    const std::vector<RecoveredSurface> walls = recover_surfaces(s);
    REQUIRE(walls.size() == 1);
    for (const Vec2 &p : stops) {
        // True specular point for this stop: segment stop->mirror meets the wall.
        const Vec2 pv = va - p;
        const double u = (-2.0 - p.y) / pv.y;
        const Vec2 refl = p + pv * u;
        REQUIRE(segment_point_distance(walls[0].a, walls[0].b, refl) < 1e-6);
    }
}

TEST_CASE("mapping error metric measures segment displacement")
{
    std::vector<Surface> truth;
    truth.push_back({{0.0, 0.0}, {10.0, 0.0}, 1.0, "wall", 0.0});

    std::vector<RecoveredSurface> exact;
    exact.push_back({{1.0, 0.0}, {9.0, 0.0}, 1});
    REQUIRE(mapping_error(exact, truth) < 1e-12);

    std::vector<RecoveredSurface> shifted;
    shifted.push_back({{1.0, 0.3}, {9.0, 0.3}, 1});
    REQUIRE(mapping_error(shifted, truth) == Catch::Approx(0.3).margin(1e-12));

    REQUIRE_THROWS_AS(mapping_error({}, truth), config_error);
    REQUIRE_THROWS_AS(mapping_error(exact, {}), config_error);
}

TEST_CASE("filter is statistically consistent against an exact model")
{
    const Vec2 bs{0.0, 0.0};
    const std::vector<Vec2> beacons{{12.0, 0.0}, {0.0, 12.0}};
    SlamConfig cfg;
    cfg.drift_qpos = 0.0;
    cfg.drift_qheading = 0.0;
    cfg.bearing_gate_nis = 1e9;

    const int n_runs = 100;
    const int n_steps = 50;
    const double dt = 1.0;
    const double pos_sigma = 0.1, heading_sigma = deg2rad(2.0);

    double nees_sum = 0.0;
    for (int run = 0; run < n_runs; ++run) {
        RngStream rng(2026, "slam_nees", static_cast<std::uint64_t>(run));
        SlamState s = make_slam_state(bs, {5.0, 3.0}, 0.2, cfg, pos_sigma, heading_sigma);
        for (int i = 0; i < static_cast<int>(beacons.size()); ++i)
            add_fixed_anchor(s, beacons[static_cast<std::size_t>(i)]);

        double tx = 5.0 + pos_sigma * rng.normal();
        double ty = 3.0 + pos_sigma * rng.normal();
        double th = 0.2 + heading_sigma * rng.normal();

        for (int k = 1; k <= n_steps; ++k) {
            const double v_cmd = 0.5, w_cmd = 0.05;
            const double v = v_cmd + cfg.sigma_speed * rng.normal();
            const double w = w_cmd + cfg.sigma_yaw_rate * rng.normal();
            tx += v * dt * std::cos(th);
            ty += v * dt * std::sin(th);
            th = wrap_angle(th + w * dt);

            predict(s, {static_cast<double>(k), v_cmd, w_cmd, 0.0}, dt);

            std::vector<BearingMeasurement> meas;
            for (int a = 0; a < static_cast<int>(s.anchors.size()); ++a) {
                BearingMeasurement m;
                m.t = static_cast<double>(k);
                m.bearing =
                    wrap_angle(true_bearing(s.anchors[static_cast<std::size_t>(a)].mean, {tx, ty}, th) +
                               cfg.bearing_sigma * rng.normal());
                m.anchor_hint = a;
                meas.push_back(m);
            }
            update_radio(s, meas);
            nees_sum += pose_nees(s, {tx, ty}, th);
        }
        require_healthy_cov(s);
    }

    // Mean 3-dof consistency statistic over 100 runs: chi-square 95% band.
    const double mean_nees = nees_sum / (n_runs * n_steps);
    REQUIRE(mean_nees > 2.544);
    REQUIRE(mean_nees < 3.499);
}

TEST_CASE("covariance stays symmetric positive definite through mixed updates")
{
    RngStream rng(9, "slam_mixed");
    const Vec2 bs{0.0, 0.0};
    const Vec2 va{0.0, -4.0};
    SlamState s = make_slam_state(bs, {4.0, 1.0}, 0.0);
    Vec2 pos{4.0, 1.0};
    double heading = 0.0;

    for (int k = 1; k <= 60; ++k) {
        const double v = 0.4, w = (k % 17 == 0) ? 0.3 : 0.0;
        pos.x += v * std::cos(heading);
        pos.y += v * std::sin(heading);
        heading = wrap_angle(heading + w);
        predict(s, {static_cast<double>(k), v, w, heading}, 1.0);
        require_healthy_cov(s);

        if (k % 4 == 0) {
            update_radio(s, {make_bearing(s.time, bs, pos, heading, deg2rad(1.5) * rng.normal()),
                             make_bearing(s.time, va, pos, heading, deg2rad(1.5) * rng.normal())});
            require_healthy_cov(s);
        }
        VisionDetection det;
        det.t = s.time;
        if (k % 11 == 0) {
            det.lost = true;
        } else {
            det.targets.push_back({{pos.x + 0.05 * rng.normal(), pos.y + 0.05 * rng.normal()}, 0.05});
        }
        update_vision(s, det);
        require_healthy_cov(s);
    }
}
