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

#include <sstream>

#include "isacsim/channel.hpp"

using namespace isacsim;

namespace {

EnvironmentMap one_wall_map()
{
    EnvironmentMap env;
    env.surfaces.push_back({{-20.0, -2.0}, {20.0, -2.0}, 1.0, "metal", 0.0});
    env.phase_seed = 42;
    return env;
}

} // namespace

TEST_CASE("free-space line of sight")
{
    const EnvironmentMap env{};
    const Numerology num;
    const Node bs{{0.0, 0.0}, 0.0};
    const Node ue{{10.0, 0.0}, pi};

    const auto paths = trace_paths(env, bs, ue, num);
    REQUIRE(paths.size() == 1);
    const PathComponent &p = paths[0];
    CHECK(p.delay_s == Catch::Approx(10.0 / speed_of_light).epsilon(1e-12));
    CHECK(p.aod_az == Catch::Approx(0.0).margin(1e-12));
    CHECK(p.aoa_az == Catch::Approx(0.0).margin(1e-12));
    CHECK(p.n_bounces == 0);
    const double lambda = num.wavelength_m();
    CHECK(std::abs(p.amplitude) == Catch::Approx(lambda / (4.0 * pi * 10.0)).epsilon(1e-12));
    const double ph = std::arg(p.amplitude);
    const double expect = wrap_angle(-2.0 * pi * 10.0 / lambda);
    CHECK(std::abs(wrap_angle(ph - expect)) < 1e-6);

    CHECK_THROWS_AS(trace_paths(env, bs, Node{{0.0, 0.0}, 0.0}, num), config_error);
}

TEST_CASE("single-bounce image geometry")
{
    const EnvironmentMap env = one_wall_map();
    const Numerology num;
    const Node bs{{0.0, 0.0}, 0.0};
    const Node ue{{10.0, 0.0}, pi};

    const auto paths = trace_paths(env, bs, ue, num);
    REQUIRE(paths.size() == 2);
    const PathComponent &r = paths[1];
    CHECK(r.n_bounces == 1);
    CHECK(r.surface_id == 0);

    // Image of the BS across y = -2 is (0, -4); bounce point (5, -2).
    const double dist = std::sqrt(116.0);
    CHECK(r.delay_s == Catch::Approx(dist / speed_of_light).epsilon(1e-12));
    CHECK(r.aod_az == Catch::Approx(std::atan2(-2.0, 5.0)).margin(1e-12));
    CHECK(r.aoa_az == Catch::Approx(std::atan2(2.0, 5.0)).margin(1e-12));
    const double lambda = num.wavelength_m();
    const double expected_amp = lambda / (4.0 * pi * dist) * std::pow(10.0, -1.0 / 20.0);
    CHECK(std::abs(r.amplitude) == Catch::Approx(expected_amp).epsilon(1e-12));

    // Every delay is geometric distance over c.
    for (const auto &p : paths)
        CHECK(p.delay_s * speed_of_light >= 10.0 - 1e-9);
}

TEST_CASE("link reciprocity")
{
    EnvironmentMap env = one_wall_map();
    env.surfaces.push_back({{-20.0, 4.0}, {20.0, 4.0}, 6.0, "rough", 3.0});
    const Numerology num;
    const Node a{{1.0, 0.5}, 0.3};
    const Node b{{9.0, 1.5}, -2.8};

    const auto fwd = trace_paths(env, a, b, num);
    const auto rev = trace_paths(env, b, a, num);
    REQUIRE(fwd.size() == rev.size());
    REQUIRE(fwd.size() == 3);
    for (std::size_t i = 0; i < fwd.size(); ++i) {
        CHECK(fwd[i].delay_s == Catch::Approx(rev[i].delay_s).epsilon(1e-12));
        CHECK(std::abs(fwd[i].amplitude - rev[i].amplitude) < 1e-15);
        CHECK(fwd[i].aod_az == Catch::Approx(rev[i].aoa_az).margin(1e-12));
        CHECK(fwd[i].aoa_az == Catch::Approx(rev[i].aod_az).margin(1e-12));
        CHECK(fwd[i].surface_id == rev[i].surface_id);
    }

    // Repeat call is bit-identical (deterministic phases and scatter).
    const auto again = trace_paths(env, a, b, num);
    for (std::size_t i = 0; i < fwd.size(); ++i)
        CHECK(fwd[i].amplitude == again[i].amplitude);

    // A different phase seed moves reflection phases but not magnitudes.
    EnvironmentMap env2 = env;
    env2.phase_seed = 43;
    const auto alt = trace_paths(env2, a, b, num);
    CHECK(std::abs(alt[1].amplitude) == Catch::Approx(std::abs(fwd[1].amplitude)).epsilon(1e-12));
    CHECK(std::abs(alt[1].amplitude - fwd[1].amplitude) > 1e-9 * std::abs(fwd[1].amplitude));
    CHECK(alt[0].amplitude == fwd[0].amplitude); // LOS untouched
}

TEST_CASE("blockage by obstacles and moving interferers")
{
    EnvironmentMap env = one_wall_map();
    const Numerology num;
    const Node bs{{0.0, 0.0}, 0.0};
    const Node ue{{10.0, 0.0}, pi};

    SECTION("static obstacle removes only the line of sight")
    {
        env.obstacles.push_back({{5.0, 1.0}, {5.0, -0.9}});
        const auto paths = trace_paths(env, bs, ue, num);
        REQUIRE(paths.size() == 1);
        CHECK(paths[0].n_bounces == 1);
    }

    SECTION("pedestrian disk blocks while crossing, then clears")
    {
        Interferer ped;
        ped.radius = 0.3;
        ped.t = {0.0, 10.0};
        ped.p = {{5.0, 0.05}, {5.0, 10.0}};
        env.interferers.push_back(ped);

        const auto blocked = trace_paths(env, bs, ue, num, 0.0);
        REQUIRE(blocked.size() == 1);
        CHECK(blocked[0].n_bounces == 1);

        const auto clear = trace_paths(env, bs, ue, num, 10.0);
        REQUIRE(clear.size() == 2);

        // Piecewise-linear interpolation of the trajectory.
        const Vec2 mid = ped.position(5.0);
        CHECK(mid.x == Catch::Approx(5.0));
        CHECK(mid.y == Catch::Approx(0.5 * (0.05 + 10.0)));
        CHECK(ped.position(-1.0).y == Catch::Approx(0.05));
        CHECK(ped.position(99.0).y == Catch::Approx(10.0));
    }
}

TEST_CASE("element pattern gates the panel field of view")
{
    CHECK(element_amplitude(0.0) == 1.0);
    CHECK(element_amplitude(deg2rad(59.9)) == 1.0);
    CHECK(element_amplitude(deg2rad(-45.0)) == 1.0);
    CHECK(element_amplitude(deg2rad(75.0)) == Catch::Approx(std::cos(pi / 4.0)).epsilon(1e-12));
    CHECK(element_amplitude(deg2rad(90.0)) == 0.0);
    CHECK(element_amplitude(deg2rad(170.0)) == 0.0);
    CHECK(element_amplitude(deg2rad(-170.0)) == 0.0);
}

TEST_CASE("beamforming applies array gain and the element pattern")
{
    const UpaGeometry geom;
    std::vector<cdouble> w(64, cdouble(1.0 / 8.0, 0.0)); // matched to broadside

    SECTION("matched boresight path gets the full two-sided gain")
    {
        PathComponent p;
        p.delay_s = 1e-8;
        p.amplitude = cdouble(2e-4, 1e-4);
        const auto ch = beamform_paths({p}, geom, w, w);
        REQUIRE(ch.coeff.size() == 1);
        CHECK(ch.delay_s[0] == 1e-8);
        CHECK(std::abs(ch.coeff[0] - p.amplitude * 64.0) < 1e-12);
    }

    SECTION("a path behind the panel is nulled")
    {
        PathComponent p;
        p.amplitude = 1.0;
        p.aod_az = pi; // departure behind the transmit panel
        const auto ch = beamform_paths({p}, geom, w, w);
        CHECK(std::abs(ch.coeff[0]) == 0.0);
    }

    SECTION("ray weight scales the coefficient")
    {
        PathComponent p;
        p.amplitude = 1.0;
        p.weight = 0.25;
        const auto ch = beamform_paths({p}, geom, w, w);
        CHECK(std::abs(ch.coeff[0] - cdouble(16.0, 0.0)) < 1e-12);
    }
}

TEST_CASE("frequency response matches the direct sum over paths")
{
    const Numerology num;
    ChannelRealization ch;
    ch.delay_s = {0.0, 2.5e-9, 3.1e-8};
    ch.coeff = {cdouble(1.0, 0.0), cdouble(0.2, -0.4), cdouble(-0.05, 0.33)};

    const auto h = freq_response(ch, num);
    REQUIRE(h.size() == 792);
    for (int k = 0; k < 792; ++k) {
        const double fk = (k - 396) * num.scs_hz;
        cdouble expect = 0.0;
        for (std::size_t p = 0; p < ch.coeff.size(); ++p) {
            const double ph = -2.0 * pi * fk * ch.delay_s[p];
            expect += ch.coeff[p] * cdouble(std::cos(ph), std::sin(ph));
        }
        CHECK(std::abs(h[k] - expect) < 1e-9);
    }

    // A single pure delay keeps unit magnitude on every subcarrier.
    ChannelRealization pure;
    pure.delay_s = {7.7e-9};
    pure.coeff = {cdouble(1.0, 0.0)};
    for (const auto &v : freq_response(pure, num))
        CHECK(std::abs(std::abs(v) - 1.0) < 1e-12);
}

TEST_CASE("monostatic echoes from a facing wall")
{
    EnvironmentMap env;
    env.surfaces.push_back({{4.0, -10.0}, {4.0, 10.0}, 0.0, "metal", 0.0});
    env.phase_seed = 7;
    const Numerology num;
    const UpaGeometry geom;
    const Node node{{0.0, 0.0}, 0.0};

    const auto paths = monostatic_channel(env, node, 0.0, num, geom);
    REQUIRE(paths.size() == 34); // self-interference + 33-ray fan

    const PathComponent &si = paths[0];
    CHECK(si.surface_id == -2);
    CHECK(si.delay_s == 5e-9);
    CHECK(std::abs(si.amplitude) == Catch::Approx(1.07e-2));

    double min_delay = 1e9;
    for (std::size_t i = 1; i < paths.size(); ++i) {
        const auto &p = paths[i];
        CHECK(p.surface_id == 0);
        CHECK(p.weight == Catch::Approx(1.0 / 33.0));
        // Two-way range: 4 m / cos(ray azimuth), doubled.
        const double d = 4.0 / std::cos(p.aod_az);
        CHECK(p.delay_s == Catch::Approx(2.0 * d / speed_of_light).epsilon(1e-9));
        min_delay = std::min(min_delay, p.delay_s);
    }
    CHECK(min_delay == Catch::Approx(8.0 / speed_of_light).epsilon(1e-12));

    // Leakage sits ~40 dB above the boresight echo amplitude.
    const double echo_amp = num.wavelength_m() / (4.0 * pi * 8.0);
    const double ratio_db = 20.0 * std::log10(std::abs(si.amplitude) / echo_amp);
    CHECK(ratio_db > 39.0);
    CHECK(ratio_db < 41.0);
}

TEST_CASE("monostatic rays stop at the first surface and respect blockers")
{
    EnvironmentMap env;
    env.surfaces.push_back({{6.0, -10.0}, {6.0, 10.0}, 0.0, "metal", 0.0});
    env.surfaces.push_back({{3.0, -10.0}, {3.0, 10.0}, 0.0, "glass", 0.0});
    const Numerology num;
    const UpaGeometry geom;
    const Node node{{0.0, 0.0}, 0.0};

    MonostaticParams mp;
    mp.include_si = false;
    const auto paths = monostatic_channel(env, node, 0.0, num, geom, 0.0, mp);
    REQUIRE(paths.size() == 33);
    for (const auto &p : paths) {
        CHECK(p.surface_id == 1); // nearer wall wins
        CHECK(p.delay_s * speed_of_light >= 6.0 - 1e-9);
        CHECK(p.delay_s * speed_of_light < 2.0 * 3.0 / std::cos(deg2rad(23.0)));
    }

    env.obstacles.push_back({{1.5, -10.0}, {1.5, 10.0}});
    const auto blocked = monostatic_channel(env, node, 0.0, num, geom, 0.0, mp);
    CHECK(blocked.empty());
}

TEST_CASE("map text format round trip and validation")
{
    SECTION("well-formed map")
    {
        std::istringstream in("isacmap 1\n"
                              "# demo room\n"
                              "bounds -1 -1 11 5\n"
                              "segment 0 0 10 0 1.0 metal\n"
                              "segment 0 4 10 4 6.0 rough\n"
                              "segment 0 2 4 2 3.5 glass 0.5\n"
                              "obstacle 5 1 5 3\n"
                              "interferer 0.3 0 1 1 10 9 1\n");
        const EnvironmentMap env = parse_map(in);
        REQUIRE(env.surfaces.size() == 3);
        CHECK(env.surfaces[0].loss_db == 1.0);
        CHECK(env.surfaces[0].scatter_db == 0.0);
        CHECK(env.surfaces[1].kind == "rough");
        CHECK(env.surfaces[1].scatter_db == 3.0); // rough default
        CHECK(env.surfaces[2].scatter_db == 0.5);
        REQUIRE(env.obstacles.size() == 1);
        REQUIRE(env.interferers.size() == 1);
        CHECK(env.interferers[0].t.size() == 2);
        CHECK(env.bounds_hi.x == 11.0);
        CHECK(env.contains({5.0, 2.0}));
        CHECK_FALSE(env.contains({12.0, 2.0}));
    }

    SECTION("missing bounds default to the inflated bounding box")
    {
        std::istringstream in("isacmap 1\nsegment 0 0 10 4 0 metal\n");
        const EnvironmentMap env = parse_map(in);
        CHECK(env.bounds_lo.x == -5.0);
        CHECK(env.bounds_lo.y == -5.0);
        CHECK(env.bounds_hi.x == 15.0);
        CHECK(env.bounds_hi.y == 9.0);
    }

    SECTION("rejects malformed inputs with the offending line")
    {
        std::istringstream empty("");
        CHECK_THROWS_AS(parse_map(empty), config_error);

        std::istringstream bad_header("isacmap 2\n");
        CHECK_THROWS_WITH(parse_map(bad_header), Catch::Matchers::ContainsSubstring("isacmap 1"));

        std::istringstream bad_tag("isacmap 1\nwallz 0 0 1 1\n");
        CHECK_THROWS_WITH(parse_map(bad_tag), Catch::Matchers::ContainsSubstring("line 2"));

        std::istringstream short_seg("isacmap 1\n\nsegment 0 0 1 1\n");
        CHECK_THROWS_WITH(parse_map(short_seg), Catch::Matchers::ContainsSubstring("line 3"));

        std::istringstream bare_ped("isacmap 1\ninterferer 0.3\n");
        CHECK_THROWS_AS(parse_map(bare_ped), config_error);
    }
}
