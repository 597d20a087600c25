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

#pragma once

#include "risjrc/core.hpp"

#include <cstdint>
#include <initializer_list>
#include <random>

namespace risjrc
{

/// splitmix64 finaliser, used to derive independent stream seeds.
inline constexpr std::uint64_t mix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed for the stream identified by (master, key...). Distinct keys give
/// unrelated streams; order of keys matters.
inline constexpr std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> keys)
{
    std::uint64_t h = mix64(master);
    for (auto k : keys)
        h = mix64(h ^ mix64(k + 0x632be59bd9b4e019ULL));
    return h;
}

/// Random source handed to every stochastic operation. Never global.
class Rng
{
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Circularly-symmetric complex Gaussian with E|x|^2 = variance.
    cplx complex_normal(double variance = 1.0)
    {
        const double s = std::sqrt(variance / 2.0);
        const double re = normal_(engine_);
        const double im = normal_(engine_);
        return {s * re, s * im};
    }

    /// Unit-modulus QPSK symbol exp(j (pi/4 + k pi/2)).
    cplx qpsk()
    {
        const auto k = static_cast<int>(engine_() >> 62);
        return std::polar(1.0, pi / 4.0 + k * pi / 2.0);
    }

    double uniform() { return uniform_(engine_); }

    int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }

    double normal() { return normal_(engine_); }

    std::mt19937_64 &engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

inline CMatrix complex_normal_matrix(Eigen::Index rows, Eigen::Index cols, double variance, Rng &rng)
{
    CMatrix m(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
        for (Eigen::Index r = 0; r < rows; ++r)
            m(r, c) = rng.complex_normal(variance);
    return m;
}

} // namespace risjrc
