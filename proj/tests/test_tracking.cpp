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

#include <isacsim/frame.hpp>
#include <isacsim/tracking.hpp>

using namespace isacsim;

namespace {

TrackingScenario make_hall()
{
    TrackingScenario sc;
    sc.env.surfaces.push_back({{-25.0, 15.0}, {25.0, 15.0}, 1.0, "metal", 0.0});
    sc.env.surfaces.push_back({{-25.0, 0.0}, {25.0, 0.0}, 5.0, "concrete", 0.0});
    sc.env.bounds_lo = {-30.0, -5.0};
    sc.env.bounds_hi = {30.0, 20.0};
    sc.env.phase_seed = 11;
    sc.bs = {{0.0, 13.0}, -pi / 2.0};
    sc.track_a = {-19.0, 1.0};
    sc.track_b = {19.0, 1.0};
    sc.ue_heading = pi / 2.0;
    return sc;
}

/// Brute-force best terminal beam for a single arrival direction.
int best_beam_for(const BeamCodebook &cb, double az)
{
    int best = 0;
    double best_p = -1.0;
    for (int b = 0; b < cb.n_beams(); ++b) {
        const double p = std::norm(beam_gain(cb.geom, cb.beams[b], az, 0.0));
        if (p > best_p) {
            best_p = p;
            best = b;
        }
    }
    return best;
}

bool timelines_identical(const LinkTimeline &a, const LinkTimeline &b)
{
    if (a.steps.size() != b.steps.size() || a.scans.size() != b.scans.size() ||
        a.interruptions.size() != b.interruptions.size())
        return false;
    for (std::size_t i = 0; i < a.steps.size(); ++i) {
        const LinkStep &x = a.steps[i], &y = b.steps[i];
        if (x.t_ms != y.t_ms || x.serving_ue != y.serving_ue || x.serving_bs != y.serving_bs ||
            x.serving_rsrp_dbm != y.serving_rsrp_dbm || x.best_ue != y.best_ue || x.best_bs != y.best_bs ||
            x.best_rsrp_dbm != y.best_rsrp_dbm || x.aligned != y.aligned || x.outage != y.outage)
            return false;
    }
    for (std::size_t i = 0; i < a.scans.size(); ++i) {
        const ScanRecord &x = a.scans[i], &y = b.scans[i];
        if (x.t_start_ms != y.t_start_ms || x.n_rows != y.n_rows || x.serving_ue != y.serving_ue ||
            x.serving_bs != y.serving_bs)
            return false;
    }
    return true;
}

} // namespace

TEST_CASE("sweep durations follow the per-beam dwell budget")
{
    REQUIRE(scan_period_ms(64) == 1280.0);
    REQUIRE(scan_period_ms(16) == 320.0);
    REQUIRE(scan_period_ms(1) == 20.0);
    for (int m = 1; m <= 64; ++m) {
        const auto [ms, reduction] = tracking_duration(m);
        REQUIRE(scan_period_ms(m) == ms);
        REQUIRE(reduction == Catch::Approx((64.0 - m) / 64.0).margin(1e-15));
    }
}

TEST_CASE("shuttle trajectory bounces between the endpoints")
{
    TrackingScenario sc = make_hall();
    REQUIRE(tracking_pose(sc, 4.0, 0.0).pos.x == Catch::Approx(-19.0));
    REQUIRE(tracking_pose(sc, 4.0, 1.0).pos.x == Catch::Approx(-15.0));
    REQUIRE(tracking_pose(sc, 4.0, 9.5).pos.x == Catch::Approx(19.0));
    REQUIRE(tracking_pose(sc, 4.0, 10.5).pos.x == Catch::Approx(15.0));
    REQUIRE(tracking_pose(sc, 4.0, 19.0).pos.x == Catch::Approx(-19.0));
    REQUIRE(tracking_pose(sc, 4.0, 3.0).heading == pi / 2.0);
}

TEST_CASE("candidate prediction nails the best beam with an exact pose")
{
    const BeamCodebook cb = build_codebook({});
    const Vec2 bs{0.0, 13.0};
    const Vec2 ue{5.0, 1.0};
    SlamState st = make_slam_state(bs, ue, pi / 2.0, {}, 1e-3, 1e-4);

    const std::vector<int> one = predict_candidates(st, {}, cb, 1);
    REQUIRE(one.size() == 1);
    const double az = wrap_angle(std::atan2(bs.y - ue.y, bs.x - ue.x) - pi / 2.0);
    REQUIRE(one[0] == best_beam_for(cb, az));
}

TEST_CASE("candidate sets have the requested cardinality and are sorted")
{
    const BeamCodebook cb = build_codebook({});
    SlamState st = make_slam_state({0.0, 13.0}, {5.0, 1.0}, pi / 2.0, {}, 1e-3, 1e-4);
    for (int m : {1, 4, 16, 33, 64}) {
        const std::vector<int> c = predict_candidates(st, {}, cb, m);
        REQUIRE(static_cast<int>(c.size()) == m);
        for (std::size_t i = 1; i < c.size(); ++i)
            REQUIRE(c[i] > c[i - 1]);
    }
    REQUIRE_THROWS_AS(predict_candidates(st, {}, cb, 0), config_error);
    REQUIRE_THROWS_AS(predict_candidates(st, {}, cb, 65), config_error);
}

TEST_CASE("moderate pose error keeps the true beam inside a small window")
{
    const BeamCodebook cb = build_codebook({});
    const Vec2 bs{0.0, 13.0};
    const Vec2 ue{5.0, 3.0}; // 10.3 m from the site
    const double true_az = wrap_angle(std::atan2(bs.y - ue.y, bs.x - ue.x) - pi / 2.0);
    const int truth = best_beam_for(cb, true_az);

    // 0.3 m transverse error at 10 m is under two beam pitches.
    for (double dx : {-0.3, 0.3}) {
        SlamState st = make_slam_state(bs, {ue.x + dx, ue.y}, pi / 2.0, {}, 1e-3, 1e-4);
        const std::vector<int> c4 = predict_candidates(st, {}, cb, 4);
        REQUIRE(std::find(c4.begin(), c4.end(), truth) != c4.end());
    }
}

TEST_CASE("reflector estimates contribute bounce-direction candidates")
{
    const BeamCodebook cb = build_codebook({});
    const Vec2 bs{0.0, 13.0};
    const Vec2 ue{5.0, 1.0};
    std::vector<Surface> walls;
    walls.push_back({{-25.0, 15.0}, {25.0, 15.0}, 1.0, "metal", 0.0});

    SlamState st = make_slam_state(bs, ue, pi / 2.0, {}, 1e-3, 1e-4);
    const Vec2 image = mirror_point(bs, walls[0].a, walls[0].b);
    const double nlos_az = wrap_angle(std::atan2(image.y - ue.y, image.x - ue.x) - pi / 2.0);
    const int nlos_beam = best_beam_for(cb, nlos_az);

    const std::vector<int> c = predict_candidates(st, walls, cb, 8);
    REQUIRE(std::find(c.begin(), c.end(), nlos_beam) != c.end());
}

TEST_CASE("an untrusted pose falls back to the full sweep")
{
    const BeamCodebook cb = build_codebook({});
    SlamState st = make_slam_state({0.0, 13.0}, {5.0, 1.0}, pi / 2.0, {}, 10.0, 1.0);
    const std::vector<int> c = predict_candidates(st, {}, cb, 8);
    REQUIRE(c.size() == 64);
    for (int i = 0; i < 64; ++i)
        REQUIRE(c[static_cast<std::size_t>(i)] == i);
}

TEST_CASE("a panel facing away from every path falls back to the full sweep")
{
    const BeamCodebook cb = build_codebook({});
    // Site due north but the panel faces south.
    SlamState st = make_slam_state({0.0, 13.0}, {0.0, 1.0}, -pi / 2.0, {}, 1e-3, 1e-4);
    const std::vector<int> c = predict_candidates(st, {}, cb, 8);
    REQUIRE(c.size() == 64);
}

TEST_CASE("tracking run validates its inputs")
{
    const Numerology num;
    const BeamCodebook cb = build_codebook({});
    TrackingScenario sc = make_hall();
    TrackingConfig cfg;
    cfg.sim_duration_s = 1.0;

    TrackingConfig bad = cfg;
    bad.m_beams = 0;
    REQUIRE_THROWS_AS(run_tracking(bad, sc, TrackingMode::sensing_aided, num, cb), config_error);
    bad = cfg;
    bad.step_ms = 0.0;
    REQUIRE_THROWS_AS(run_tracking(bad, sc, TrackingMode::exhaustive, num, cb), config_error);

    TrackingScenario off = sc;
    off.track_b = {100.0, 1.0};
    REQUIRE_THROWS_AS(run_tracking(cfg, off, TrackingMode::exhaustive, num, cb), config_error);
}

TEST_CASE("a static terminal never loses the link in either mode")
{
    const Numerology num;
    const BeamCodebook cb = build_codebook({});
    TrackingScenario sc = make_hall();
    sc.env.surfaces.clear(); // free space: one line of sight only
    TrackingConfig cfg;
    cfg.ue_speed_mps = 0.0;
    cfg.sim_duration_s = 6.0;
    cfg.seed = 3;

    for (TrackingMode mode : {TrackingMode::exhaustive, TrackingMode::sensing_aided}) {
        const LinkTimeline tl = run_tracking(cfg, sc, mode, num, cb);
        REQUIRE(tl.interruptions.empty());
        REQUIRE(tl.total_interrupted_ms == 0.0);
        for (const LinkStep &s : tl.steps)
            REQUIRE_FALSE(s.outage);
    }
}

TEST_CASE("a static terminal with an exact pose stays aligned with one candidate")
{
    const Numerology num;
    const BeamCodebook cb = build_codebook({});
    TrackingScenario sc = make_hall();
    sc.env.surfaces.clear();
    TrackingConfig cfg;
    cfg.ue_speed_mps = 0.0;
    cfg.sim_duration_s = 4.0;
    cfg.m_beams = 1;
    cfg.pose_error_sigma_m = 0.0;
    cfg.heading_error_sigma = 0.0;
    cfg.seed = 5;

    const LinkTimeline tl = run_tracking(cfg, sc, TrackingMode::sensing_aided, num, cb);
    REQUIRE(tl.alignment_fraction == 1.0);
    REQUIRE(tl.overhead_reduction == Catch::Approx(63.0 / 64.0));
    for (const ScanRecord &r : tl.scans)
        REQUIRE(r.n_rows == 1);
}

TEST_CASE("the serving pair always comes from the latest finished sweep")
{
    const Numerology num;
    const BeamCodebook cb = build_codebook({});
    const TrackingScenario sc = make_hall();
    TrackingConfig cfg;
    cfg.sim_duration_s = 8.0;
    cfg.m_beams = 8;
    cfg.seed = 7;

    const LinkTimeline tl = run_tracking(cfg, sc, TrackingMode::sensing_aided, num, cb);
    REQUIRE_FALSE(tl.scans.empty());
    for (const ScanRecord &r : tl.scans) {
        REQUIRE(r.n_rows == 8);
        const double applied_ms = r.t_start_ms + scan_period_ms(r.n_rows);
        // The first step at or after the sweep end must serve the sweep argmax.
        for (const LinkStep &s : tl.steps) {
            if (s.t_ms < applied_ms)
                continue;
            REQUIRE(s.serving_ue == r.serving_ue);
            REQUIRE(s.serving_bs == r.serving_bs);
            break;
        }
    }
}

TEST_CASE("a full sensing-aided sweep reproduces the exhaustive run exactly")
{
    const Numerology num;
    const BeamCodebook cb = build_codebook({});
    const TrackingScenario sc = make_hall();
    TrackingConfig cfg;
    cfg.sim_duration_s = 10.0;
    cfg.m_beams = 64;
    cfg.seed = 21;

    const LinkTimeline ex = run_tracking(cfg, sc, TrackingMode::exhaustive, num, cb);
    const LinkTimeline sa = run_tracking(cfg, sc, TrackingMode::sensing_aided, num, cb);
    REQUIRE(timelines_identical(ex, sa));
    REQUIRE(ex.scans.size() >= 7);
    for (const ScanRecord &r : ex.scans)
        REQUIRE(r.n_rows == 64);
}

TEST_CASE("narrow sensing-aided sweeps track better than exhaustive search")
{
    const Numerology num;
    const BeamCodebook cb = build_codebook({});
    const TrackingScenario sc = make_hall();
    TrackingConfig cfg;
    cfg.sim_duration_s = 40.0;
    cfg.m_beams = 16;
    cfg.seed = 17;

    const LinkTimeline ex = run_tracking(cfg, sc, TrackingMode::exhaustive, num, cb);
    const LinkTimeline sa = run_tracking(cfg, sc, TrackingMode::sensing_aided, num, cb);
    REQUIRE(sa.alignment_fraction > ex.alignment_fraction);
    REQUIRE(sa.total_interrupted_ms < ex.total_interrupted_ms);
    REQUIRE(sa.overhead_reduction == Catch::Approx(0.75));
}

TEST_CASE("explicit outage thresholds bound the interruption accounting")
{
    const Numerology num;
    const BeamCodebook cb = build_codebook({});
    const TrackingScenario sc = make_hall();
    TrackingConfig cfg;
    cfg.sim_duration_s = 3.0;
    cfg.seed = 2;

    cfg.outage_threshold_dbm = 100.0; // everything is outage
    LinkTimeline tl = run_tracking(cfg, sc, TrackingMode::exhaustive, num, cb);
    REQUIRE(tl.interruptions.size() == 1);
    REQUIRE(tl.total_interrupted_ms == Catch::Approx(3000.0));

    cfg.outage_threshold_dbm = -1000.0; // nothing is
    tl = run_tracking(cfg, sc, TrackingMode::exhaustive, num, cb);
    REQUIRE(tl.interruptions.empty());
}

TEST_CASE("mode comparison collects one row per seed and mode")
{
    const Numerology num;
    const BeamCodebook cb = build_codebook({});
    const TrackingScenario sc = make_hall();
    TrackingConfig cfg;
    cfg.sim_duration_s = 5.0;

    REQUIRE_THROWS_AS(compare_modes(cfg, sc, num, cb, {}), config_error);

    const ModeComparison mc = compare_modes(cfg, sc, num, cb, {1, 2});
    REQUIRE(mc.exhaustive.size() == 2);
    REQUIRE(mc.sensing_aided.size() == 2);
    REQUIRE(mc.exhaustive[0].seed == 1);
    REQUIRE(mc.sensing_aided[1].seed == 2);
    for (const ModeSeedResult &r : mc.exhaustive) {
        REQUIRE(r.alignment_fraction >= 0.0);
        REQUIRE(r.alignment_fraction <= 1.0);
    }
}
