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

#ifndef ISACSIM_FFT_HPP
#define ISACSIM_FFT_HPP

#include <stdexcept>
#include <vector>

#include "common.hpp"

namespace isacsim {

// Iterative radix-2 transform. Every transform size in this project is a
// power of two (1024/2048), so the restriction costs nothing.

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

/// In-place DFT: X[k] = sum_n x[n] exp(-j 2 pi k n / N).
/// The inverse applies the conjugate kernel and the 1/N factor.
inline void fft_inplace(std::vector<cdouble> &a, bool inverse = false)
{
    const std::size_t n = a.size();
    if (!is_pow2(n))
        throw std::invalid_argument("fft_inplace: size must be a power of two");

    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1)
            j ^= bit;
        j ^= bit;
        if (i < j)
            std::swap(a[i], a[j]);
    }

    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? 2.0 : -2.0) * pi / static_cast<double>(len);
        const cdouble wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            cdouble w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                cdouble u = a[i + k];
                cdouble v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }

    if (inverse) {
        const double inv = 1.0 / static_cast<double>(n);
        for (auto &x : a)
            x *= inv;
    }
}

inline std::vector<cdouble> fft(std::vector<cdouble> a)
{
    fft_inplace(a, false);
    return a;
}

inline std::vector<cdouble> ifft(std::vector<cdouble> a)
{
    fft_inplace(a, true);
    return a;
}

} // namespace isacsim

#endif
