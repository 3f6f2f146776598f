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

#ifndef ISACSIM_SENSING_HPP
#define ISACSIM_SENSING_HPP

#include <functional>
#include <optional>

#include "array.hpp"
#include "channel.hpp"
#include "common.hpp"
#include "fft.hpp"
#include "rng.hpp"
#include "waveform.hpp"

namespace isacsim {

// ---- bistatic beam-sweep imaging ---------------------------------------------

/// Beam-pair RSRP matrix: one row per swept UE beam, one column per BS beam.
struct RsrpImage {
    int n_ue = 0;
    int n_bs = 0;
    std::vector<double> power;     // row-major linear power
    std::vector<int> ue_beams;     // codebook indexes of the rows
    double noise_power = 0.0;
    double t0 = 0.0;

    double &at(int i, int j) { return power[static_cast<std::size_t>(i) * n_bs + j]; }
    double at(int i, int j) const { return power[static_cast<std::size_t>(i) * n_bs + j]; }

    std::pair<int, int> argmax() const
    {
        std::size_t best = 0;
        for (std::size_t k = 1; k < power.size(); ++k)
            if (power[k] > power[best])
                best = k;
        return {static_cast<int>(best) / n_bs, static_cast<int>(best) % n_bs};
    }
};

struct BistaticScanConfig {
    double noise_power = 1e-13;  // per resource element
    double tx_amplitude = 1.0;   // scales the transmitted pilots
    int pilot_stride = 4;        // use every Nth pilot RE
    double row_period_ms = 20.0; // one UE beam dwell per frame
    int cell_id = 1;
};

/// Pose of the receiving terminal as a function of time (s); lets sweep rows
/// see the motion that happened during their own dwell.
using PoseFn = std::function<Node(double)>;

namespace detail {

inline std::vector<std::pair<int, int>> strided_pilots(const SsbBlock &ssb, int stride)
{
    if (stride < 1)
        throw config_error("scan: pilot_stride must be >= 1");
    std::vector<std::pair<int, int>> out;
    for (std::size_t i = 0; i < ssb.pilot_res.size(); i += stride)
        out.push_back(ssb.pilot_res[i]);
    return out;
}

} // namespace detail

/// Sweep the synchronization-block burst across all 64 BS beams while the
/// terminal listens on each candidate beam in turn; every measured pair goes
/// through pilot-level channel synthesis, per-RE noise and the RSRP estimator.
/// Noise is drawn row-major (ue beam, bs beam, RE), so a given stream yields
/// the same image for the same candidate list.
inline RsrpImage scan_bistatic(const Node &bs, const PoseFn &ue_at, const EnvironmentMap &env,
                               const Numerology &num, const BeamCodebook &cb,
                               const std::vector<int> &ue_candidates, double t0,
                               const BistaticScanConfig &cfg, RngStream &noise)
{
    if (ue_candidates.empty())
        throw config_error("scan_bistatic: empty candidate set");
    for (int c : ue_candidates)
        if (c < 0 || c >= cb.n_beams())
            throw config_error("scan_bistatic: candidate beam out of range");

    const SsbBlock ssb = build_ssb(cfg.cell_id);
    const auto pilots = detail::strided_pilots(ssb, cfg.pilot_stride);
    const int n_bs = cb.n_beams();

    RsrpImage img;
    img.n_ue = static_cast<int>(ue_candidates.size());
    img.n_bs = n_bs;
    img.ue_beams = ue_candidates;
    img.noise_power = cfg.noise_power;
    img.t0 = t0;
    img.power.assign(static_cast<std::size_t>(img.n_ue) * n_bs, 0.0);

    ResourceGrid rx_grid(ssb_n_symbols, ssb_n_subcarriers);
    std::vector<double> pilot_freq(pilots.size());
    for (std::size_t k = 0; k < pilots.size(); ++k)
        pilot_freq[k] = (pilots[k].second - ssb_n_subcarriers / 2) * num.scs_hz;

    for (int r = 0; r < img.n_ue; ++r) {
        const double t_row = t0 + r * cfg.row_period_ms * 1e-3;
        const Node ue = ue_at(t_row);
        const std::vector<PathComponent> paths = trace_paths(env, bs, ue, num, t_row);
        const std::size_t np = paths.size();

        // Per-path end gains for every BS beam and for this row's UE beam.
        std::vector<cdouble> rx_g(np), base(np);
        const auto &wue = cb.beams[ue_candidates[r]];
        for (std::size_t p = 0; p < np; ++p) {
            rx_g[p] = beam_gain(cb.geom, wue, paths[p].aoa_az, 0.0) * element_amplitude(paths[p].aoa_az) *
                      element_amplitude(paths[p].aod_az) * paths[p].amplitude * paths[p].weight *
                      cfg.tx_amplitude;
        }
        std::vector<std::vector<cdouble>> tx_g(static_cast<std::size_t>(n_bs), std::vector<cdouble>(np));
        for (int j = 0; j < n_bs; ++j)
            for (std::size_t p = 0; p < np; ++p)
                tx_g[j][p] = beam_gain(cb.geom, cb.beams[j], paths[p].aod_az, 0.0);

        // Phase ramps over the pilot frequencies, one per path.
        std::vector<std::vector<cdouble>> ramp(np, std::vector<cdouble>(pilots.size()));
        for (std::size_t p = 0; p < np; ++p)
            for (std::size_t k = 0; k < pilots.size(); ++k) {
                double ph = -2.0 * pi * pilot_freq[k] * paths[p].delay_s;
                ramp[p][k] = cdouble(std::cos(ph), std::sin(ph));
            }

        for (int j = 0; j < n_bs; ++j) {
            for (std::size_t k = 0; k < pilots.size(); ++k) {
                cdouble h = 0.0;
                for (std::size_t p = 0; p < np; ++p)
                    h += rx_g[p] * tx_g[j][p] * ramp[p][k];
                const auto &[sym, sc] = pilots[k];
                rx_grid.at(sym, sc) = h * ssb.grid.at(sym, sc) + noise.cnormal(cfg.noise_power);
            }
            img.at(r, j) = estimate_rsrp(rx_grid, ssb.grid, pilots);
        }
    }
    return img;
}

inline RsrpImage scan_bistatic(const Node &bs, const Node &ue, const EnvironmentMap &env, const Numerology &num,
                               const BeamCodebook &cb, const std::vector<int> &ue_candidates, double t0,
                               const BistaticScanConfig &cfg, RngStream &noise)
{
    return scan_bistatic(bs, [&](double) { return ue; }, env, num, cb, ue_candidates, t0, cfg, noise);
}

// ---- panorama -----------------------------------------------------------------

/// Full-turn RSRP image stitched from one 64-row sweep per terminal
/// orientation; rows map to body-frame bearings.
struct Panorama {
    int rows = 0;
    int cols = 0;
    std::vector<double> power;       // row-major linear power
    std::vector<double> orientation; // body-frame offset per sector (rad)

    double at(int r, int c) const { return power[static_cast<std::size_t>(r) * cols + c]; }
};

inline Panorama assemble_panorama(const std::vector<RsrpImage> &scans, const std::vector<double> &orientations,
                                  const BeamCodebook &cb)
{
    if (scans.empty() || orientations.empty())
        throw config_error("assemble_panorama: no scans");
    if (scans.size() != orientations.size())
        throw config_error("assemble_panorama: scans and orientations differ in count");
    for (std::size_t i = 0; i < orientations.size(); ++i)
        for (std::size_t j = i + 1; j < orientations.size(); ++j)
            if (std::abs(wrap_angle(orientations[i] - orientations[j])) < 1e-9)
                throw config_error("assemble_panorama: duplicate orientation");
    Panorama pano;
    pano.cols = scans.front().n_bs;
    pano.orientation = orientations;
    for (const RsrpImage &s : scans) {
        if (s.n_ue != cb.n_beams() || s.n_bs != pano.cols)
            throw config_error("assemble_panorama: each scan must sweep the full codebook");
        pano.power.insert(pano.power.end(), s.power.begin(), s.power.end());
    }
    pano.rows = static_cast<int>(scans.size()) * cb.n_beams();
    return pano;
}

// ---- angle estimation -----------------------------------------------------------

struct AngleEstimate {
    double aoa_az = 0.0; // refined UE-side azimuth (rad, local frame)
    double aod_az = 0.0; // refined BS-side azimuth (rad, local frame)
    double power = 0.0;  // linear RSRP at the peak
};

namespace detail {

/// Vertex offset of a parabola through (-1,ym) (0,y0) (+1,yp), clamped to half
/// a sample; y values are in dB.
inline double parabolic_offset(double ym, double y0, double yp)
{
    const double denom = ym - 2.0 * y0 + yp;
    if (std::abs(denom) < 1e-12)
        return 0.0;
    double d = 0.5 * (ym - yp) / denom;
    return std::clamp(d, -0.5, 0.5);
}

struct GridPeak {
    int r, c;
    double power;
};

/// 3x3 non-maximum suppression, strongest first.
inline std::vector<GridPeak> find_peaks(const std::vector<double> &img, int rows, int cols)
{
    std::vector<GridPeak> peaks;
    auto at = [&](int r, int c) { return img[static_cast<std::size_t>(r) * cols + c]; };
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            const double v = at(r, c);
            if (v <= 0.0)
                continue;
            bool is_max = true;
            for (int dr = -1; dr <= 1 && is_max; ++dr)
                for (int dc = -1; dc <= 1 && is_max; ++dc) {
                    if (dr == 0 && dc == 0)
                        continue;
                    const int rr = r + dr, cc = c + dc;
                    if (rr < 0 || rr >= rows || cc < 0 || cc >= cols)
                        continue;
                    const double w = at(rr, cc);
                    if (w > v || (w == v && (rr < r || (rr == r && cc < c))))
                        is_max = false;
                }
            if (is_max)
                peaks.push_back({r, c, v});
        }
    std::sort(peaks.begin(), peaks.end(), [](const GridPeak &a, const GridPeak &b) {
        if (a.power != b.power)
            return a.power > b.power;
        return a.r != b.r ? a.r < b.r : a.c < b.c;
    });
    return peaks;
}

} // namespace detail

/// Strongest k beam-space peaks of a full-sweep RSRP image, each refined by
/// separable quadratic interpolation of dB power in sine space.
inline std::vector<AngleEstimate> estimate_angles(const RsrpImage &img, const BeamCodebook &cb, int k_paths)
{
    if (k_paths < 1)
        throw config_error("estimate_angles: k_paths must be >= 1");
    if (img.n_ue != cb.n_beams() || img.n_bs != cb.n_beams())
        throw config_error("estimate_angles: image must cover the full codebook on both axes");

    auto peaks = detail::find_peaks(img.power, img.n_ue, img.n_bs);
    std::vector<AngleEstimate> out;
    auto at_db = [&](int r, int c) { return to_db(img.at(r, c)); };
    for (const auto &pk : peaks) {
        if (static_cast<int>(out.size()) >= k_paths)
            break;
        double row_sine = cb.sine[img.ue_beams[pk.r]];
        double col_sine = cb.sine[pk.c];
        if (pk.r > 0 && pk.r < img.n_ue - 1)
            row_sine += detail::parabolic_offset(at_db(pk.r - 1, pk.c), at_db(pk.r, pk.c), at_db(pk.r + 1, pk.c)) *
                        cb.sine_spacing;
        if (pk.c > 0 && pk.c < img.n_bs - 1)
            col_sine += detail::parabolic_offset(at_db(pk.r, pk.c - 1), at_db(pk.r, pk.c), at_db(pk.r, pk.c + 1)) *
                        cb.sine_spacing;
        AngleEstimate est;
        est.aoa_az = std::asin(std::clamp(row_sine, -1.0, 1.0));
        est.aod_az = std::asin(std::clamp(col_sine, -1.0, 1.0));
        est.power = pk.power;
        out.push_back(est);
    }
    return out;
}

struct BearingPeak {
    double bearing = 0.0; // body-frame azimuth of arrival (rad)
    double aod_az = 0.0;  // BS-side azimuth (rad)
    double power = 0.0;
};

/// Peaks of a stitched panorama: interpolation stays inside each orientation
/// sector, and near-duplicate bearings from overlapping sectors collapse onto
/// the strongest observation. An edge-row peak cannot be interpolated and is
/// usually out-of-sector leakage, so it is dropped whenever another sector
/// covers its direction in the interior.
inline std::vector<BearingPeak> estimate_bearings(const Panorama &pano, const BeamCodebook &cb, int k_paths,
                                                  double dedupe_rad = deg2rad(3.0))
{
    if (k_paths < 1)
        throw config_error("estimate_bearings: k_paths must be >= 1");
    const int nb = cb.n_beams();
    auto peaks = detail::find_peaks(pano.power, pano.rows, pano.cols);
    auto at_db = [&](int r, int c) { return to_db(pano.at(r, c)); };

    const double interior_fov = std::asin(std::clamp(std::abs(cb.sine.back()) - cb.sine_spacing, 0.0, 1.0));
    const auto interior_elsewhere = [&](int sector, double bearing) {
        for (std::size_t s = 0; s < pano.orientation.size(); ++s) {
            if (static_cast<int>(s) == sector)
                continue;
            if (std::abs(wrap_angle(bearing - pano.orientation[s])) < interior_fov)
                return true;
        }
        return false;
    };

    std::vector<BearingPeak> out;
    for (const auto &pk : peaks) {
        if (static_cast<int>(out.size()) >= k_paths)
            break;
        const int sector = pk.r / nb;
        const int local = pk.r % nb;
        double row_sine = cb.sine[local];
        if (local > 0 && local < nb - 1)
            row_sine += detail::parabolic_offset(at_db(pk.r - 1, pk.c), at_db(pk.r, pk.c), at_db(pk.r + 1, pk.c)) *
                        cb.sine_spacing;
        double col_sine = cb.sine[pk.c];
        if (pk.c > 0 && pk.c < pano.cols - 1)
            col_sine += detail::parabolic_offset(at_db(pk.r, pk.c - 1), at_db(pk.r, pk.c), at_db(pk.r, pk.c + 1)) *
                        cb.sine_spacing;

        BearingPeak bp;
        bp.bearing = wrap_angle(pano.orientation[sector] + std::asin(std::clamp(row_sine, -1.0, 1.0)));
        bp.aod_az = std::asin(std::clamp(col_sine, -1.0, 1.0));
        bp.power = pk.power;

        if ((local == 0 || local == nb - 1) && interior_elsewhere(sector, bp.bearing))
            continue;

        bool dup = false;
        for (const BearingPeak &seen : out)
            if (std::abs(wrap_angle(seen.bearing - bp.bearing)) < dedupe_rad &&
                std::abs(seen.aod_az - bp.aod_az) < dedupe_rad)
                dup = true;
        if (!dup)
            out.push_back(bp);
    }
    return out;
}

// ---- monostatic imaging -----------------------------------------------------------

/// Power-delay profile of one beam: 1024 delay bins at the sample period.
struct PowerDelayProfile {
    std::vector<double> power;
    double bin_range_m = 0.0;
};

/// Spectral taper before the delay transform. Rectangular keeps the narrowest
/// mainlobe; Hann trades width for lower sidelobes.
enum class PdpWindow { rectangular, hann };

/// Inverse-transform the effective-subcarrier response into delay bins.
inline PowerDelayProfile compute_pdp(const std::vector<cdouble> &h, const Numerology &num,
                                     PdpWindow window = PdpWindow::rectangular)
{
    const int n = static_cast<int>(h.size());
    if (n > num.fft_size)
        throw config_error("compute_pdp: response wider than the FFT grid");
    std::vector<cdouble> grid(static_cast<std::size_t>(num.fft_size), 0.0);
    const int half = n / 2;
    for (int k = 0; k < n; ++k) {
        cdouble v = h[k];
        if (window == PdpWindow::hann)
            v *= 0.5 * (1.0 - std::cos(2.0 * pi * k / (n - 1)));
        grid[sc_to_bin(k - half, num.fft_size)] = v;
    }
    fft_inplace(grid, true);
    PowerDelayProfile pdp;
    pdp.power.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        pdp.power[i] = std::norm(grid[i]);
    pdp.bin_range_m = speed_of_light / (2.0 * num.sample_rate_hz);
    return pdp;
}

/// Beam-azimuth x range-bin echo image from a monostatic sweep.
struct AngleRangeImage {
    int n_beams = 0;
    int n_bins = 0;
    std::vector<double> power; // row-major linear power
    std::vector<double> beam_az;
    double bin_range_m = 0.0;
    double elapsed_ms = 0.0; // occupies random-access occasions, not sync slots
    bool si_filtered = false;

    double &at(int b, int k) { return power[static_cast<std::size_t>(b) * n_bins + k]; }
    double at(int b, int k) const { return power[static_cast<std::size_t>(b) * n_bins + k]; }
};

struct MonostaticScanConfig {
    double noise_power = 0.0; // per subcarrier; calibration captures use zero
    double tx_amplitude = 1.0;
    MonostaticParams params;
    PdpWindow window = PdpWindow::rectangular;
};

/// Transmit and receive on the same beam, traverse all 64 directions. Echo
/// collection rides the random-access occasions: 8 per frame, one beam each.
inline AngleRangeImage scan_monostatic(const Node &node, const EnvironmentMap &env, const Numerology &num,
                                       const BeamCodebook &cb, const MonostaticScanConfig &cfg, RngStream &noise,
                                       double t = 0.0)
{
    const FrameSchedule fs = build_schedule(num);
    AngleRangeImage img;
    img.n_beams = cb.n_beams();
    img.n_bins = num.fft_size;
    img.beam_az = cb.azimuth;
    img.bin_range_m = speed_of_light / (2.0 * num.sample_rate_hz);
    img.elapsed_ms = std::ceil(static_cast<double>(cb.n_beams()) / fs.rach.size()) * fs.frame_ms;
    img.power.assign(static_cast<std::size_t>(img.n_beams) * img.n_bins, 0.0);

    for (int b = 0; b < img.n_beams; ++b) {
        auto paths = monostatic_channel(env, node, cb.azimuth[b], num, cb.geom, t, cfg.params);
        ChannelRealization ch = beamform_paths(paths, cb.geom, cb.beams[b], cb.beams[b]);
        std::vector<cdouble> h = freq_response(ch, num);
        for (auto &v : h) {
            v *= cfg.tx_amplitude;
            if (cfg.noise_power > 0.0)
                v += noise.cnormal(cfg.noise_power);
        }
        PowerDelayProfile pdp = compute_pdp(h, num, cfg.window);
        std::copy(pdp.power.begin(), pdp.power.end(), img.power.begin() + static_cast<std::size_t>(b) * img.n_bins);
    }
    return img;
}

/// Remove the transceiver leak: subtract the static calibration capture
/// (empty-map scan) and blank every bin whose apparent range falls below
/// `min_range_m`. Bins in the upper half of the profile alias negative delays,
/// so they are always below the floor. A second application is a no-op.
inline AngleRangeImage filter_self_interference(const AngleRangeImage &img, const AngleRangeImage &calibration,
                                                double min_range_m = 1.0)
{
    if (img.si_filtered)
        return img;
    if (calibration.n_beams != img.n_beams || calibration.n_bins != img.n_bins)
        throw config_error("filter_self_interference: calibration shape mismatch");
    AngleRangeImage out = img;
    for (std::size_t k = 0; k < out.power.size(); ++k)
        out.power[k] = std::max(0.0, out.power[k] - calibration.power[k]);
    for (int b = 0; b < out.n_beams; ++b)
        for (int k = 0; k < out.n_bins; ++k) {
            const double range = (k < out.n_bins / 2 ? k : k - out.n_bins) * img.bin_range_m;
            if (range < min_range_m)
                out.at(b, k) = 0.0;
        }
    out.si_filtered = true;
    return out;
}

// ---- range estimation ----------------------------------------------------------

struct RangeEstimate {
    double range_m = 0.0;
    double power = 0.0;
};

constexpr double default_peak_threshold_db = 10.0; // above the median bin power

/// Strongest delay peak refined by a three-point parabola on power; none when
/// nothing clears the threshold over the median bin.
inline std::optional<RangeEstimate> estimate_range(const PowerDelayProfile &pdp,
                                                   double threshold_db = default_peak_threshold_db)
{
    if (pdp.power.empty())
        throw config_error("estimate_range: empty profile");
    std::vector<double> sorted = pdp.power;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    const double median = sorted[sorted.size() / 2];
    std::size_t peak = 0;
    for (std::size_t i = 1; i < pdp.power.size(); ++i)
        if (pdp.power[i] > pdp.power[peak])
            peak = i;
    if (pdp.power[peak] < median * from_db(threshold_db) || pdp.power[peak] <= 0.0)
        return std::nullopt;
    double refined = static_cast<double>(peak);
    if (peak > 0 && peak + 1 < pdp.power.size()) {
        const double pm = pdp.power[peak - 1], p0 = pdp.power[peak], pp = pdp.power[peak + 1];
        // dB-domain vertex tracks the kernel shape closely; blanked neighbours
        // would hit the dB floor, so fall back to the linear fit there.
        refined += (pm > 0.0 && pp > 0.0) ? detail::parabolic_offset(to_db(pm), to_db(p0), to_db(pp))
                                          : detail::parabolic_offset(pm, p0, pp);
    }
    RangeEstimate est;
    est.range_m = refined * pdp.bin_range_m;
    est.power = pdp.power[peak];
    return est;
}

// ---- point cloud ------------------------------------------------------------------

/// One echo detection in the scanning node's local frame.
struct SensedPoint {
    double az = 0.0;
    double range_m = 0.0;
    double power = 0.0;

    Vec2 local_xy() const { return {range_m * std::cos(az), range_m * std::sin(az)}; }
};

/// One range peak per beam: at most 64 entries per sweep.
inline std::vector<SensedPoint> extract_point_cloud(const AngleRangeImage &img,
                                                    double threshold_db = default_peak_threshold_db)
{
    std::vector<SensedPoint> pts;
    PowerDelayProfile row;
    row.bin_range_m = img.bin_range_m;
    for (int b = 0; b < img.n_beams; ++b) {
        row.power.assign(img.power.begin() + static_cast<std::size_t>(b) * img.n_bins,
                         img.power.begin() + static_cast<std::size_t>(b + 1) * img.n_bins);
        auto est = estimate_range(row, threshold_db);
        if (est)
            pts.push_back({img.beam_az[b], est->range_m, est->power});
    }
    return pts;
}

/// Fit line segments to a beam-ordered point cloud: consecutive beams whose
/// ranges agree within `range_gap_m` form a cluster; clusters of >= 3 points
/// get a total-least-squares line clipped to their extent.
struct LocalSegment {
    Vec2 a, b;
    int support = 0;
};

inline std::vector<LocalSegment> segments_from_point_cloud(const std::vector<SensedPoint> &pts,
                                                           double range_gap_m = 1.0)
{
    std::vector<LocalSegment> segs;
    std::size_t i = 0;
    while (i < pts.size()) {
        std::size_t j = i + 1;
        while (j < pts.size() && std::abs(pts[j].range_m - pts[j - 1].range_m) < range_gap_m)
            ++j;
        if (j - i >= 3) {
            // PCA line fit over the cluster's Cartesian points.
            double mx = 0, my = 0;
            for (std::size_t k = i; k < j; ++k) {
                Vec2 p = pts[k].local_xy();
                mx += p.x;
                my += p.y;
            }
            const double n = static_cast<double>(j - i);
            mx /= n;
            my /= n;
            double sxx = 0, sxy = 0, syy = 0;
            for (std::size_t k = i; k < j; ++k) {
                Vec2 p = pts[k].local_xy();
                sxx += (p.x - mx) * (p.x - mx);
                sxy += (p.x - mx) * (p.y - my);
                syy += (p.y - my) * (p.y - my);
            }
            const double theta = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
            const Vec2 dir{std::cos(theta), std::sin(theta)};
            double tmin = 1e18, tmax = -1e18;
            for (std::size_t k = i; k < j; ++k) {
                Vec2 p = pts[k].local_xy();
                double tproj = (p - Vec2{mx, my}).dot(dir);
                tmin = std::min(tmin, tproj);
                tmax = std::max(tmax, tproj);
            }
            LocalSegment s;
            s.a = Vec2{mx, my} + dir * tmin;
            s.b = Vec2{mx, my} + dir * tmax;
            s.support = static_cast<int>(j - i);
            segs.push_back(s);
        }
        i = j;
    }
    return segs;
}

} // namespace isacsim

#endif
