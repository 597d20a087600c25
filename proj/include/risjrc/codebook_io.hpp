// SPDX-License-Identifier: Apache-2.0
//
// risjrc: link-level simulation of RIS-assisted joint radar-communication
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

// Codebook file layout (all integers u32, all reals f64, little-endian):
//
//   magic        8 bytes  "RISJCB\0\1"
//   grid_size, n_ris
//   spacing, v_bx, v_by, v_ux, v_uy
//   n_stages, schedule[n_stages]
//   per stage:   stage, l_s, c_s, n_beams
//                W_x column-major as (re, im) pairs, n_axis * n_beams entries
//                W_y likewise
//                residual_x[n_beams], residual_y[n_beams]
//   n_warnings,  per warning: length, bytes

#pragma once

#include "risjrc/codebook.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace risjrc
{

inline constexpr std::array<char, 8> codebook_magic{'R', 'I', 'S', 'J', 'C', 'B', '\0', '\1'};

class codebook_format_error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

namespace detail
{

inline void put_u64(std::ostream &os, std::uint64_t v)
{
    char buf[8];
    for (int k = 0; k < 8; ++k)
        buf[k] = static_cast<char>((v >> (8 * k)) & 0xff);
    os.write(buf, 8);
}

inline void put_u32(std::ostream &os, std::uint32_t v)
{
    char buf[4];
    for (int k = 0; k < 4; ++k)
        buf[k] = static_cast<char>((v >> (8 * k)) & 0xff);
    os.write(buf, 4);
}

inline void put_f64(std::ostream &os, double v) { put_u64(os, std::bit_cast<std::uint64_t>(v)); }

inline std::uint64_t get_u64(std::istream &is)
{
    unsigned char buf[8];
    if (!is.read(reinterpret_cast<char *>(buf), 8))
        throw codebook_format_error("codebook: truncated file");
    std::uint64_t v = 0;
    for (int k = 7; k >= 0; --k)
        v = (v << 8) | buf[k];
    return v;
}

inline std::uint32_t get_u32(std::istream &is)
{
    unsigned char buf[4];
    if (!is.read(reinterpret_cast<char *>(buf), 4))
        throw codebook_format_error("codebook: truncated file");
    std::uint32_t v = 0;
    for (int k = 3; k >= 0; --k)
        v = (v << 8) | buf[k];
    return v;
}

inline double get_f64(std::istream &is) { return std::bit_cast<double>(get_u64(is)); }

inline void put_matrix(std::ostream &os, const CMatrix &m)
{
    for (Eigen::Index c = 0; c < m.cols(); ++c)
        for (Eigen::Index r = 0; r < m.rows(); ++r)
        {
            put_f64(os, m(r, c).real());
            put_f64(os, m(r, c).imag());
        }
}

inline CMatrix get_matrix(std::istream &is, Eigen::Index rows, Eigen::Index cols)
{
    CMatrix m(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
        for (Eigen::Index r = 0; r < rows; ++r)
        {
            const double re = get_f64(is);
            const double im = get_f64(is);
            m(r, c) = {re, im};
        }
    return m;
}

} // namespace detail

inline void write_codebook(std::ostream &os, const Codebook &cb)
{
    using namespace detail;
    os.write(codebook_magic.data(), codebook_magic.size());
    put_u32(os, static_cast<std::uint32_t>(cb.grid_size));
    put_u32(os, static_cast<std::uint32_t>(cb.n_ris));
    put_f64(os, cb.spacing);
    put_f64(os, cb.v_b.vx);
    put_f64(os, cb.v_b.vy);
    put_f64(os, cb.v_u.vx);
    put_f64(os, cb.v_u.vy);
    put_u32(os, static_cast<std::uint32_t>(cb.stages.size()));
    for (std::size_t s = 0; s < cb.stages.size(); ++s)
        put_u32(os, static_cast<std::uint32_t>(s < cb.schedule.size() ? cb.schedule[s] : cb.stages[s].l_s));
    for (const auto &sb : cb.stages)
    {
        put_u32(os, static_cast<std::uint32_t>(sb.stage));
        put_u32(os, static_cast<std::uint32_t>(sb.l_s));
        put_u32(os, static_cast<std::uint32_t>(sb.c_s));
        put_u32(os, static_cast<std::uint32_t>(sb.wx.cols()));
        put_matrix(os, sb.wx);
        put_matrix(os, sb.wy);
        for (double r : sb.residual_x)
            put_f64(os, r);
        for (double r : sb.residual_y)
            put_f64(os, r);
    }
    put_u32(os, static_cast<std::uint32_t>(cb.warnings.size()));
    for (const auto &w : cb.warnings)
    {
        put_u32(os, static_cast<std::uint32_t>(w.size()));
        os.write(w.data(), static_cast<std::streamsize>(w.size()));
    }
    if (!os)
        throw codebook_format_error("codebook: write failed");
}

inline Codebook read_codebook(std::istream &is)
{
    using namespace detail;
    std::array<char, 8> magic{};
    if (!is.read(magic.data(), magic.size()) || magic != codebook_magic)
        throw codebook_format_error("codebook: bad magic (not a codebook file)");

    Codebook cb;
    cb.grid_size = static_cast<int>(get_u32(is));
    cb.n_ris = static_cast<int>(get_u32(is));
    if (!is_power_of_two(cb.grid_size) || !is_perfect_square(cb.n_ris) || cb.n_ris == 0)
        throw codebook_format_error("codebook: invalid header dimensions");
    cb.spacing = get_f64(is);
    cb.v_b = {get_f64(is), get_f64(is)};
    cb.v_u = {get_f64(is), get_f64(is)};
    const auto n_stages = get_u32(is);
    if (n_stages > 32)
        throw codebook_format_error("codebook: implausible stage count");
    for (std::uint32_t s = 0; s < n_stages; ++s)
        cb.schedule.push_back(static_cast<int>(get_u32(is)));

    const int n_axis = cb.n_axis();
    for (std::uint32_t s = 0; s < n_stages; ++s)
    {
        StageBook sb;
        sb.stage = static_cast<int>(get_u32(is));
        sb.l_s = static_cast<int>(get_u32(is));
        sb.c_s = static_cast<int>(get_u32(is));
        const auto nb = get_u32(is);
        if (sb.stage != static_cast<int>(s) + 1 || nb != (1u << sb.stage))
            throw codebook_format_error("codebook: stage header inconsistent");
        sb.wx = get_matrix(is, n_axis, nb);
        sb.wy = get_matrix(is, n_axis, nb);
        for (std::uint32_t k = 0; k < nb; ++k)
            sb.residual_x.push_back(get_f64(is));
        for (std::uint32_t k = 0; k < nb; ++k)
            sb.residual_y.push_back(get_f64(is));
        cb.stages.push_back(std::move(sb));
    }
    const auto n_warn = get_u32(is);
    for (std::uint32_t k = 0; k < n_warn; ++k)
    {
        const auto len = get_u32(is);
        std::string w(len, '\0');
        if (!is.read(w.data(), len))
            throw codebook_format_error("codebook: truncated warning text");
        cb.warnings.push_back(std::move(w));
    }
    return cb;
}

inline void save_codebook(const std::string &path, const Codebook &cb)
{
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw codebook_format_error("codebook: cannot open '" + path + "' for writing");
    write_codebook(os, cb);
}

inline Codebook load_codebook(const std::string &path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw codebook_format_error("codebook: cannot open '" + path + "'");
    return read_codebook(is);
}

} // namespace risjrc
