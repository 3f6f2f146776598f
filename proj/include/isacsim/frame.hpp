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

#ifndef ISACSIM_FRAME_HPP
#define ISACSIM_FRAME_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "common.hpp"

namespace isacsim {

/// Physical-layer numerology of the mmWave link.
struct Numerology {
    double carrier_hz = 28e9;
    double scs_hz = 120e3;
    int n_effective_sc = 792;
    double sample_rate_hz = 122.88e6;
    int fft_size = 1024;
    int cp_len = 72;

    double effective_bandwidth_hz() const { return n_effective_sc * scs_hz; }
    double wavelength_m() const { return speed_of_light / carrier_hz; }
    int symbol_len() const { return fft_size + cp_len; }
    double symbol_duration_s() const { return symbol_len() / sample_rate_hz; }

    /// The FFT size is pinned by sample_rate / scs; anything else is a
    /// misconfiguration, not a tunable.
    void validate() const
    {
        if (carrier_hz <= 0 || scs_hz <= 0 || sample_rate_hz <= 0)
            throw config_error("numerology: rates must be positive");
        if (n_effective_sc <= 0 || fft_size <= 0 || cp_len < 0)
            throw config_error("numerology: sizes must be positive");
        const double ratio = sample_rate_hz / scs_hz;
        if (ratio != static_cast<double>(fft_size))
            throw config_error("numerology: fft_size must equal sample_rate_hz / scs_hz exactly");
        if (n_effective_sc > fft_size)
            throw config_error("numerology: n_effective_sc exceeds fft_size");
    }
};

/// One synchronization-signal block allocation inside the frame.
struct SsbSlot {
    int index;        // 0..63
    int slot;         // slot index within the frame
    int start_symbol; // first of 4 consecutive symbols
};

/// One random-access occasion inside the frame.
struct RachOccasion {
    int slot;
    int start_symbol;
    int n_symbols; // <= 3
};

struct FrameSchedule {
    double frame_ms = 20.0;
    int n_subframes = 20;
    int slots_per_subframe = 8;
    int symbols_per_slot = 14;
    std::vector<SsbSlot> ssb;
    std::vector<RachOccasion> rach;

    int n_slots() const { return n_subframes * slots_per_subframe; }
    int n_symbols() const { return n_slots() * symbols_per_slot; }
    double slot_duration_ms() const { return frame_ms / n_slots(); }
};

/// Connection-capacity limits of the base station prototype.
struct CapacityLimits {
    int max_ul_ues = 16;
    int max_dl_ues = 10;
};

/// Lay out one 20 ms frame: a 64-block beam-sweep burst in the first 4 ms
/// (two blocks per slot, symbols 2-5 and 8-11), then random-access occasions
/// in the last subframe.
inline FrameSchedule build_schedule(const Numerology &num)
{
    num.validate();
    FrameSchedule fs;
    fs.ssb.reserve(64);
    for (int i = 0; i < 64; ++i) {
        SsbSlot s;
        s.index = i;
        s.slot = i / 2;
        s.start_symbol = (i % 2 == 0) ? 2 : 8;
        fs.ssb.push_back(s);
    }
    const int last_subframe_first_slot = (fs.n_subframes - 1) * fs.slots_per_subframe;
    for (int k = 0; k < fs.slots_per_subframe; ++k) {
        RachOccasion r;
        r.slot = last_subframe_first_slot + k;
        r.start_symbol = 0;
        r.n_symbols = 3;
        fs.rach.push_back(r);
    }
    return fs;
}

/// Peak spectral-efficiency rate in bit/s for the given modulation order and
/// control/reference overhead fraction.
inline double max_throughput(const Numerology &num, int bits_per_symbol, double overhead_fraction)
{
    num.validate();
    if (bits_per_symbol != 2 && bits_per_symbol != 4 && bits_per_symbol != 6)
        throw config_error("max_throughput: bits_per_symbol must be 2, 4 or 6");
    if (overhead_fraction < 0.0 || overhead_fraction >= 1.0)
        throw config_error("max_throughput: overhead_fraction must be in [0, 1)");
    return num.n_effective_sc * num.scs_hz * bits_per_symbol * (1.0 - overhead_fraction);
}

/// Measured control overhead of the prototype link, calibrated so the peak
/// 64-QAM rate lands on the observed ~508 Mb/s.
constexpr double default_overhead_fraction = 0.10915;

struct TrackingDuration {
    double scan_ms;            // full sweep time for M candidate beams
    double overhead_reduction; // fraction of sweep slots released vs. 64 beams
};

/// A sweep visits one beam per 20 ms frame, so M candidates cost 20*M ms.
inline TrackingDuration tracking_duration(int m_beams)
{
    if (m_beams < 1 || m_beams > 64)
        throw config_error("tracking_duration: m_beams must be in [1, 64]");
    TrackingDuration td;
    td.scan_ms = 20.0 * m_beams;
    td.overhead_reduction = static_cast<double>(64 - m_beams) / 64.0;
    return td;
}

// ---- serialization -------------------------------------------------------

inline nlohmann::json to_json(const Numerology &num)
{
    return {
        {"carrier_hz", num.carrier_hz},   {"scs_hz", num.scs_hz},
        {"n_effective_sc", num.n_effective_sc}, {"sample_rate_hz", num.sample_rate_hz},
        {"fft_size", num.fft_size},       {"cp_len", num.cp_len},
    };
}

/// Fail-closed parse: every field required, unknown fields rejected by name.
inline Numerology numerology_from_json(const nlohmann::json &j)
{
    static const char *known[] = {"carrier_hz", "scs_hz", "n_effective_sc",
                                  "sample_rate_hz", "fft_size", "cp_len"};
    if (!j.is_object())
        throw config_error("numerology: expected a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char *k : known)
            ok = ok || (it.key() == k);
        if (!ok)
            throw config_error("numerology: unknown field '" + it.key() + "'");
    }
    Numerology num;
    try {
        num.carrier_hz = j.at("carrier_hz").get<double>();
        num.scs_hz = j.at("scs_hz").get<double>();
        num.n_effective_sc = j.at("n_effective_sc").get<int>();
        num.sample_rate_hz = j.at("sample_rate_hz").get<double>();
        num.fft_size = j.at("fft_size").get<int>();
        num.cp_len = j.at("cp_len").get<int>();
    } catch (const nlohmann::json::exception &e) {
        throw config_error(std::string("numerology: ") + e.what());
    }
    num.validate();
    return num;
}

inline nlohmann::json to_json(const FrameSchedule &fs)
{
    nlohmann::json j;
    j["frame_ms"] = fs.frame_ms;
    j["n_subframes"] = fs.n_subframes;
    j["slots_per_subframe"] = fs.slots_per_subframe;
    j["symbols_per_slot"] = fs.symbols_per_slot;
    j["ssb"] = nlohmann::json::array();
    for (const auto &s : fs.ssb)
        j["ssb"].push_back({{"index", s.index}, {"slot", s.slot}, {"start_symbol", s.start_symbol}});
    j["rach"] = nlohmann::json::array();
    for (const auto &r : fs.rach)
        j["rach"].push_back({{"slot", r.slot}, {"start_symbol", r.start_symbol}, {"n_symbols", r.n_symbols}});
    return j;
}

} // namespace isacsim

#endif
