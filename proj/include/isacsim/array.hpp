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

#ifndef ISACSIM_ARRAY_HPP
#define ISACSIM_ARRAY_HPP

#include <vector>

#include "common.hpp"

namespace isacsim {

/// Uniform planar array; spacing is in wavelengths.
struct UpaGeometry {
    int n_rows = 8; // elevation axis
    int n_cols = 8; // azimuth axis
    double spacing = 0.5;

    int n_elements() const { return n_rows * n_cols; }

    void validate() const
    {
        if (n_rows <= 0 || n_cols <= 0 || spacing <= 0.0)
            throw config_error("UpaGeometry: rows, cols and spacing must be positive");
    }
};

/// Array response for a plane wave from (az, el), row-major over (row p, col q):
/// element (p, q) = exp(j 2 pi spacing (p sin el + q cos el sin az)).
/// Entries are unit modulus; the element pattern is applied at path level, not here.
inline std::vector<cdouble> steering_vector(const UpaGeometry &geom, double az, double el)
{
    geom.validate();
    if (az < -pi || az > pi || el < -pi / 2.0 || el > pi / 2.0)
        throw config_error("steering_vector: angles out of range");
    const double u = std::sin(el);
    const double w = std::cos(el) * std::sin(az);
    std::vector<cdouble> v(static_cast<std::size_t>(geom.n_elements()));
    std::size_t idx = 0;
    for (int p = 0; p < geom.n_rows; ++p) {
        for (int q = 0; q < geom.n_cols; ++q) {
            double phase = 2.0 * pi * geom.spacing * (p * u + q * w);
            v[idx++] = cdouble(std::cos(phase), std::sin(phase));
        }
    }
    return v;
}

/// Combined response of a weight vector toward (az, el). Weights are applied
/// as-is (conjugation is baked into the stored weights), so a matched beam of
/// an N-element array reaches |gain|^2 = N.
inline cdouble beam_gain(const UpaGeometry &geom, const std::vector<cdouble> &weights, double az, double el)
{
    std::vector<cdouble> v = steering_vector(geom, az, el);
    if (weights.size() != v.size())
        throw config_error("beam_gain: weight length does not match array");
    cdouble acc = 0.0;
    for (std::size_t e = 0; e < v.size(); ++e)
        acc += weights[e] * v[e];
    return acc;
}

/// Sweep codebook: 64 boresight-elevation beams on a uniform sine-space
/// azimuth grid covering sin(+-60 deg). Beam index grows monotonically with
/// azimuth, so adjacent indexes are adjacent directions.
struct BeamCodebook {
    UpaGeometry geom;
    std::vector<std::vector<cdouble>> beams; // unit-L2-norm weight vectors
    std::vector<double> azimuth;             // rad
    std::vector<double> elevation;           // rad (all zero for the sweep fan)
    std::vector<double> sine;                // sin(azimuth) grid coordinate
    double sine_spacing = 0.0;

    int n_beams() const { return static_cast<int>(beams.size()); }

    /// Index of the grid beam nearest in sine space (clamped at the edges).
    int nearest_beam(double az) const
    {
        double t = (std::sin(az) - sine.front()) / sine_spacing;
        int i = static_cast<int>(std::lround(t));
        if (i < 0)
            i = 0;
        if (i >= n_beams())
            i = n_beams() - 1;
        return i;
    }
};

constexpr int codebook_n_beams = 64;

inline BeamCodebook build_codebook(const UpaGeometry &geom)
{
    geom.validate();
    BeamCodebook cb;
    cb.geom = geom;
    const double sin_max = std::sin(deg2rad(60.0));
    cb.sine_spacing = 2.0 * sin_max / codebook_n_beams;
    const double norm = std::sqrt(static_cast<double>(geom.n_elements()));
    for (int i = 0; i < codebook_n_beams; ++i) {
        double w = (i + 0.5) * cb.sine_spacing - sin_max; // bin centres
        double az = std::asin(w);
        std::vector<cdouble> v = steering_vector(geom, az, 0.0);
        for (auto &e : v)
            e = std::conj(e) / norm;
        cb.beams.push_back(std::move(v));
        cb.azimuth.push_back(az);
        cb.elevation.push_back(0.0);
        cb.sine.push_back(w);
    }
    return cb;
}

} // namespace isacsim

#endif
