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

#ifndef ISACSIM_COMMON_HPP
#define ISACSIM_COMMON_HPP

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace isacsim {

using cdouble = std::complex<double>;

constexpr double pi = 3.14159265358979323846;
constexpr double speed_of_light = 299792458.0; // m/s

/// Wrap an angle to (-pi, pi].
inline double wrap_angle(double a)
{
    a = std::fmod(a, 2.0 * pi);
    if (a <= -pi)
        a += 2.0 * pi;
    else if (a > pi)
        a -= 2.0 * pi;
    return a;
}

inline double deg2rad(double d) { return d * pi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / pi; }

/// Power ratio to decibel; clamps at a -400 dB floor so silent bins stay finite.
inline double to_db(double power)
{
    if (power <= 1e-40)
        return -400.0;
    return 10.0 * std::log10(power);
}

inline double from_db(double db) { return std::pow(10.0, db / 10.0); }

/// Error type for configuration and precondition violations.
class config_error : public std::runtime_error {
  public:
    explicit config_error(const std::string &msg) : std::runtime_error(msg) {}
};

} // namespace isacsim

#endif
