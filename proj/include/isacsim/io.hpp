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

#ifndef ISACSIM_IO_HPP
#define ISACSIM_IO_HPP

#include <charconv>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "common.hpp"

namespace isacsim {

// File writers used by the experiment runners. All numeric formatting goes
// through std::to_chars (locale-free, shortest round-trip), so the same data
// always serializes to the same bytes.

inline std::string format_double(double v)
{
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::string format_int(long long v)
{
    char buf[24];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

class CsvWriter {
  public:
    CsvWriter(const std::string &path, const std::vector<std::string> &columns) : out_(path, std::ios::binary)
    {
        if (!out_)
            throw std::runtime_error("CsvWriter: cannot open " + path);
        for (std::size_t i = 0; i < columns.size(); ++i) {
            if (i)
                out_ << ',';
            out_ << columns[i];
        }
        out_ << '\n';
    }

    void row(const std::vector<std::string> &cells)
    {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i)
                out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }

  private:
    std::ofstream out_;
};

/// 8-bit binary PGM. Values are mapped linearly from [lo, hi] to [0, 255];
/// the fixed range keeps the mapping independent of image content.
inline void write_pgm(const std::string &path, std::size_t rows, std::size_t cols,
                      const std::vector<double> &values, double lo, double hi)
{
    if (values.size() != rows * cols)
        throw std::invalid_argument("write_pgm: size mismatch");
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("write_pgm: cannot open " + path);
    out << "P5\n" << cols << ' ' << rows << "\n255\n";
    const double span = hi > lo ? hi - lo : 1.0;
    for (double v : values) {
        double t = (v - lo) / span;
        if (t < 0.0)
            t = 0.0;
        if (t > 1.0)
            t = 1.0;
        out.put(static_cast<char>(static_cast<int>(t * 255.0 + 0.5)));
    }
}

/// Complex samples as little-endian interleaved float64 I/Q pairs.
inline void write_iq(const std::string &path, const std::vector<cdouble> &samples)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("write_iq: cannot open " + path);
    static_assert(sizeof(double) == 8);
    for (const cdouble &s : samples) {
        double iq[2] = {s.real(), s.imag()};
        out.write(reinterpret_cast<const char *>(iq), sizeof(iq));
    }
}

inline std::vector<cdouble> read_iq(const std::string &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("read_iq: cannot open " + path);
    std::vector<cdouble> samples;
    double iq[2];
    while (in.read(reinterpret_cast<char *>(iq), sizeof(iq)))
        samples.emplace_back(iq[0], iq[1]);
    return samples;
}

} // namespace isacsim

#endif
