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

#ifndef ISACSIM_RNG_HPP
#define ISACSIM_RNG_HPP

#include <cstdint>
#include <random>
#include <string_view>

#include "common.hpp"

namespace isacsim {

// Every randomized component draws from its own named stream derived from one
// root seed:
//
//     stream_seed = splitmix64( splitmix64(root) ^ fnv1a64(name) ^ splitmix64(index) )
//
// Distinct (name, index) pairs give statistically independent streams, and a
// component never perturbs the draws of another, so adding or removing a
// consumer cannot change anyone else's sequence.

inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t derive_seed(std::uint64_t root, std::string_view stream, std::uint64_t index = 0)
{
    return splitmix64(splitmix64(root) ^ fnv1a64(stream) ^ splitmix64(index));
}

/// One named pseudo-random stream (mt19937_64 behind the documented split).
class RngStream {
  public:
    RngStream(std::uint64_t root, std::string_view stream, std::uint64_t index = 0)
        : gen_(derive_seed(root, stream, index))
    {
    }

    double normal(double mean = 0.0, double stddev = 1.0)
    {
        return mean + stddev * normal_(gen_);
    }

    double uniform(double lo = 0.0, double hi = 1.0)
    {
        return lo + (hi - lo) * uniform_(gen_);
    }

    /// Circularly symmetric complex Gaussian with the given total variance.
    cdouble cnormal(double variance = 1.0)
    {
        double s = std::sqrt(variance / 2.0);
        return {s * normal_(gen_), s * normal_(gen_)};
    }

    std::uint64_t integer() { return gen_(); }

    std::mt19937_64 &engine() { return gen_; }

  private:
    std::mt19937_64 gen_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

} // namespace isacsim

#endif
