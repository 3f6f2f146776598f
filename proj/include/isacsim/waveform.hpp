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

#ifndef ISACSIM_WAVEFORM_HPP
#define ISACSIM_WAVEFORM_HPP

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "common.hpp"
#include "fft.hpp"
#include "frame.hpp"

namespace isacsim {

// ---- Zadoff-Chu preambles --------------------------------------------------

constexpr int zc_length = 139;
constexpr int zc_n_shifts = 64;
constexpr int zc_shift_spacing = zc_length / zc_n_shifts; // floor(139/64) = 2
constexpr int rach_fft_size = 2048;
constexpr int rach_cp_len = 144;
constexpr int rach_signal_len = rach_fft_size + rach_cp_len; // 2192

/// Base sequence x[n] = exp(-j pi u n (n+1) / 139).
inline std::vector<cdouble> gen_zc(int root, int length = zc_length)
{
    if (length <= 0)
        throw config_error("gen_zc: length must be positive");
    if (root <= 0 || root >= length)
        throw config_error("gen_zc: root must be in (0, length)");
    std::vector<cdouble> x(length);
    for (int n = 0; n < length; ++n) {
        // n(n+1) stays below 2^15 here, but keep the modulus in exact integers.
        long long q = (static_cast<long long>(n) * (n + 1)) % (2LL * length);
        double phase = -pi * root * static_cast<double>(q) / length;
        x[n] = cdouble(std::cos(phase), std::sin(phase));
    }
    return x;
}

struct ZcPreamble {
    int root;
    int cyclic_shift; // 0..63, applied as floor(139/64)=2 sample steps

    std::vector<cdouble> sequence() const
    {
        if (cyclic_shift < 0 || cyclic_shift >= zc_n_shifts)
            throw config_error("ZcPreamble: cyclic_shift must be in [0, 64)");
        std::vector<cdouble> base = gen_zc(root);
        std::vector<cdouble> out(zc_length);
        const int c = cyclic_shift * zc_shift_spacing;
        for (int n = 0; n < zc_length; ++n)
            out[n] = base[(n + c) % zc_length];
        return out;
    }
};

/// 139-point spectrum of the preamble placed on the centre subcarriers of a
/// 2048-point inverse transform, plus a 144-sample cyclic prefix: 2192 samples,
/// inside three OFDM symbols of the data numerology.
inline std::vector<cdouble> build_rach_signal(const ZcPreamble &pre)
{
    std::vector<cdouble> seq = pre.sequence();

    // Exact 139-point DFT (the size is prime, so no fast path; it is tiny).
    std::vector<cdouble> spec(zc_length);
    for (int k = 0; k < zc_length; ++k) {
        cdouble acc = 0.0;
        for (int n = 0; n < zc_length; ++n) {
            double ph = -2.0 * pi * k * n / zc_length;
            acc += seq[n] * cdouble(std::cos(ph), std::sin(ph));
        }
        spec[k] = acc;
    }

    std::vector<cdouble> grid(rach_fft_size, 0.0);
    const int half = zc_length / 2; // 69
    for (int k = 0; k < zc_length; ++k) {
        int centered = k <= half ? k : k - zc_length; // map DFT index to -69..69
        int bin = (centered + rach_fft_size) % rach_fft_size;
        grid[bin] = spec[k];
    }
    fft_inplace(grid, true);

    std::vector<cdouble> out;
    out.reserve(rach_signal_len);
    for (int n = rach_fft_size - rach_cp_len; n < rach_fft_size; ++n)
        out.push_back(grid[n]);
    out.insert(out.end(), grid.begin(), grid.end());
    return out;
}

/// Correlation bank with precomputed spectra for detection.
struct PreambleBank {
    std::vector<ZcPreamble> preambles;
    std::vector<std::vector<cdouble>> signals; // 2192-sample reference signals
    std::vector<std::vector<cdouble>> spectra; // FFT of the 2048-sample bodies
    double body_energy = 0.0;                  // signal energy over the 2048-sample body
};

inline PreambleBank build_preamble_bank(int root)
{
    PreambleBank bank;
    for (int v = 0; v < zc_n_shifts; ++v) {
        ZcPreamble p{root, v};
        std::vector<cdouble> sig = build_rach_signal(p);
        std::vector<cdouble> body(sig.begin() + rach_cp_len, sig.end());
        double e = 0.0;
        for (const cdouble &s : body)
            e += std::norm(s);
        bank.body_energy = e; // identical for every shift
        bank.spectra.push_back(fft(std::move(body)));
        bank.signals.push_back(std::move(sig));
        bank.preambles.push_back(p);
    }
    return bank;
}

struct DetectionResult {
    int index;         // bank entry
    int timing_offset; // samples, relative to the nominal occasion start
    double peak_metric;
};

constexpr double default_detect_threshold = 8.0;
constexpr int default_detect_window = 16;

/// Matched-filter detection over the bank. The lag search per preamble is
/// limited to `window` samples: cyclic shifts of one root alias into each
/// other at lags of ~29.5 samples, so the timing window must stay below the
/// shift zone width for the index decision to be well-posed.
///
/// peak_metric normalizes |correlation| by sqrt(reference energy x noise
/// floor): under noise alone it is |CN(0,1)| per lag, so the threshold is a
/// detection z-score.
inline std::optional<DetectionResult> detect_preamble(const std::vector<cdouble> &rx,
                                                      const PreambleBank &bank, double noise_floor,
                                                      double threshold = default_detect_threshold,
                                                      int window = default_detect_window)
{
    if (rx.size() < static_cast<std::size_t>(rach_signal_len))
        throw config_error("detect_preamble: rx shorter than one RACH occasion");
    if (noise_floor <= 0.0)
        throw config_error("detect_preamble: noise_floor must be positive");

    std::vector<cdouble> body(rx.begin() + rach_cp_len, rx.begin() + rach_signal_len);
    std::vector<cdouble> rx_spec = fft(std::move(body));

    const double norm = std::sqrt(bank.body_energy * noise_floor);
    DetectionResult best{-1, 0, 0.0};
    std::vector<cdouble> prod(rach_fft_size);
    for (std::size_t v = 0; v < bank.spectra.size(); ++v) {
        for (int k = 0; k < rach_fft_size; ++k)
            prod[k] = rx_spec[k] * std::conj(bank.spectra[v][k]);
        fft_inplace(prod, true); // prod[l] = circular corr at lag l
        for (int l = 0; l < window; ++l) {
            double metric = std::abs(prod[l]) / norm;
            if (metric > best.peak_metric) {
                best.peak_metric = metric;
                best.index = static_cast<int>(v);
                best.timing_offset = l;
            }
        }
    }
    if (best.index < 0 || best.peak_metric <= threshold)
        return std::nullopt;
    return best;
}

// ---- OFDM ------------------------------------------------------------------

/// Frequency-time resource grid; rows are OFDM symbols, columns FFT bins.
struct ResourceGrid {
    int n_symbols = 0;
    int fft_size = 0;
    std::vector<cdouble> data;

    ResourceGrid() = default;
    ResourceGrid(int n_sym, int nfft) : n_symbols(n_sym), fft_size(nfft), data(static_cast<std::size_t>(n_sym) * nfft) {}

    cdouble &at(int sym, int bin) { return data[static_cast<std::size_t>(sym) * fft_size + bin]; }
    const cdouble &at(int sym, int bin) const { return data[static_cast<std::size_t>(sym) * fft_size + bin]; }
};

/// Centered subcarrier index (-fft/2 .. fft/2-1) to FFT bin.
inline int sc_to_bin(int k, int fft_size)
{
    if (k < -fft_size / 2 || k >= fft_size / 2)
        throw config_error("sc_to_bin: subcarrier index out of range");
    return (k + fft_size) % fft_size;
}

/// IFFT per symbol plus cyclic prefix. x[n] = (1/N) sum_k X[k] e^{j2pi kn/N}.
inline std::vector<cdouble> ofdm_modulate(const ResourceGrid &grid, const Numerology &num)
{
    if (grid.fft_size != num.fft_size)
        throw config_error("ofdm_modulate: grid FFT size does not match numerology");
    std::vector<cdouble> out;
    out.reserve(static_cast<std::size_t>(grid.n_symbols) * num.symbol_len());
    std::vector<cdouble> sym(num.fft_size);
    for (int s = 0; s < grid.n_symbols; ++s) {
        std::copy(grid.data.begin() + static_cast<std::size_t>(s) * num.fft_size,
                  grid.data.begin() + static_cast<std::size_t>(s + 1) * num.fft_size, sym.begin());
        fft_inplace(sym, true);
        for (int n = num.fft_size - num.cp_len; n < num.fft_size; ++n)
            out.push_back(sym[n]);
        out.insert(out.end(), sym.begin(), sym.end());
    }
    return out;
}

/// Strip cyclic prefixes and FFT each symbol back onto the grid.
inline ResourceGrid ofdm_demodulate(const std::vector<cdouble> &time, const Numerology &num)
{
    const std::size_t sym_len = static_cast<std::size_t>(num.symbol_len());
    if (time.empty() || time.size() % sym_len != 0)
        throw config_error("ofdm_demodulate: sample count must be a positive multiple of fft_size + cp_len");
    const int n_sym = static_cast<int>(time.size() / sym_len);
    ResourceGrid grid(n_sym, num.fft_size);
    std::vector<cdouble> sym(num.fft_size);
    for (int s = 0; s < n_sym; ++s) {
        auto start = time.begin() + s * sym_len + num.cp_len;
        std::copy(start, start + num.fft_size, sym.begin());
        fft_inplace(sym, false);
        std::copy(sym.begin(), sym.end(), grid.data.begin() + static_cast<std::size_t>(s) * num.fft_size);
    }
    return grid;
}

// ---- synchronization signal block -------------------------------------------

constexpr int ssb_n_symbols = 4;
constexpr int ssb_n_subcarriers = 240;
constexpr int ssb_sync_len = 127;
constexpr int ssb_sync_offset = 56; // first subcarrier of the 127-wide sync part

namespace detail {

/// Degree-7 binary m-sequence, x(i+7) = x(i+tap) + x(i) mod 2.
inline std::array<int, ssb_sync_len> mseq7(int tap, int shift)
{
    std::array<int, ssb_sync_len> x{};
    int reg[7] = {1, 1, 1, 0, 1, 1, 0};
    std::array<int, ssb_sync_len> base{};
    for (int i = 0; i < ssb_sync_len; ++i) {
        base[i] = reg[0];
        int fb = (reg[tap] + reg[0]) % 2;
        for (int j = 0; j < 6; ++j)
            reg[j] = reg[j + 1];
        reg[6] = fb;
    }
    for (int i = 0; i < ssb_sync_len; ++i)
        x[i] = base[(i + shift) % ssb_sync_len];
    return x;
}

/// Length-31 Gold sequence generator (scrambling-style pseudo-random bits).
inline std::vector<int> gold31(std::uint32_t cinit, int count)
{
    constexpr int nc = 1600;
    std::vector<int> x1(nc + count + 31), x2(nc + count + 31);
    x1[0] = 1;
    for (int i = 0; i < 31; ++i)
        x2[i] = (cinit >> i) & 1;
    for (int i = 0; i + 31 < static_cast<int>(x1.size()); ++i) {
        x1[i + 31] = (x1[i + 3] + x1[i]) % 2;
        x2[i + 31] = (x2[i + 3] + x2[i + 2] + x2[i + 1] + x2[i]) % 2;
    }
    std::vector<int> c(count);
    for (int i = 0; i < count; ++i)
        c[i] = (x1[i + nc] + x2[i + nc]) % 2;
    return c;
}

} // namespace detail

/// One beam's synchronization block: primary/secondary sync sequences plus
/// broadcast pilots, all deterministic in (cell_id, beam index).
struct SsbBlock {
    int cell_id = 0;
    int beam_index = 0;
    ResourceGrid grid;                          // 4 x 240 (fft_size field = 240)
    std::vector<std::pair<int, int>> pilot_res; // (symbol, subcarrier) entries used for RSRP
};

inline SsbBlock build_ssb(int cell_id, int beam_index = 0)
{
    if (cell_id < 0 || beam_index < 0)
        throw config_error("build_ssb: ids must be non-negative");
    SsbBlock ssb;
    ssb.cell_id = cell_id;
    ssb.beam_index = beam_index;
    ssb.grid = ResourceGrid(ssb_n_symbols, ssb_n_subcarriers);

    auto pss = detail::mseq7(3, 43 * (cell_id % 3));
    auto sss_a = detail::mseq7(3, (5 * cell_id) % ssb_sync_len);
    auto sss_b = detail::mseq7(5, (7 * cell_id + 11) % ssb_sync_len);
    for (int i = 0; i < ssb_sync_len; ++i) {
        ssb.grid.at(0, ssb_sync_offset + i) = 1.0 - 2.0 * pss[i];
        ssb.grid.at(2, ssb_sync_offset + i) = (1.0 - 2.0 * sss_a[i]) * (1.0 - 2.0 * sss_b[i]);
    }

    const std::uint32_t cinit = static_cast<std::uint32_t>(cell_id * 65537 + beam_index * 257 + 1);
    // Broadcast pilots: full symbols 1 and 3, plus the side bands of symbol 2.
    std::vector<std::pair<int, int>> pbch;
    for (int sc = 0; sc < ssb_n_subcarriers; ++sc)
        pbch.emplace_back(1, sc);
    for (int sc = 0; sc < 48; ++sc)
        pbch.emplace_back(2, sc);
    for (int sc = ssb_n_subcarriers - 48; sc < ssb_n_subcarriers; ++sc)
        pbch.emplace_back(2, sc);
    for (int sc = 0; sc < ssb_n_subcarriers; ++sc)
        pbch.emplace_back(3, sc);
    auto bits = detail::gold31(cinit, 2 * static_cast<int>(pbch.size()));
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (std::size_t i = 0; i < pbch.size(); ++i) {
        cdouble q((1.0 - 2.0 * bits[2 * i]) * inv_sqrt2, (1.0 - 2.0 * bits[2 * i + 1]) * inv_sqrt2);
        ssb.grid.at(pbch[i].first, pbch[i].second) = q;
    }

    // RSRP pilots: the secondary sync sequence plus every broadcast RE.
    for (int i = 0; i < ssb_sync_len; ++i)
        ssb.pilot_res.emplace_back(2, ssb_sync_offset + i);
    ssb.pilot_res.insert(ssb.pilot_res.end(), pbch.begin(), pbch.end());
    return ssb;
}

/// Copy an SSB into a larger grid at (start_symbol, first centered subcarrier).
inline void place_ssb(ResourceGrid &grid, const SsbBlock &ssb, int start_symbol, int sc0_centered)
{
    if (start_symbol < 0 || start_symbol + ssb_n_symbols > grid.n_symbols)
        throw config_error("place_ssb: symbol range out of grid");
    for (int s = 0; s < ssb_n_symbols; ++s)
        for (int sc = 0; sc < ssb_n_subcarriers; ++sc)
            grid.at(start_symbol + s, sc_to_bin(sc0_centered + sc, grid.fft_size)) = ssb.grid.at(s, sc);
}

// ---- RSRP -------------------------------------------------------------------

/// Mean matched-pilot power over the given REs of equally shaped rx/tx grids.
inline double estimate_rsrp(const ResourceGrid &rx, const ResourceGrid &tx,
                            const std::vector<std::pair<int, int>> &pilot_res)
{
    if (rx.n_symbols != tx.n_symbols || rx.fft_size != tx.fft_size)
        throw config_error("estimate_rsrp: rx/tx grid shapes differ");
    if (pilot_res.empty())
        throw config_error("estimate_rsrp: empty pilot set");
    double acc = 0.0;
    for (const auto &[sym, sc] : pilot_res) {
        if (sym < 0 || sym >= rx.n_symbols || sc < 0 || sc >= rx.fft_size)
            throw config_error("estimate_rsrp: pilot RE out of range");
        const cdouble t = tx.at(sym, sc);
        const double tp = std::norm(t);
        if (tp <= 0.0)
            throw config_error("estimate_rsrp: zero-power pilot RE");
        acc += std::norm(rx.at(sym, sc) * std::conj(t)) / tp;
    }
    return acc / static_cast<double>(pilot_res.size());
}

} // namespace isacsim

#endif
