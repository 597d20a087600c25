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

#include <unsupported/Eigen/KroneckerProduct>

namespace risjrc
{

/// Angle in degrees. All external surfaces speak degrees; math uses radians().
struct AngleDeg
{
    double value = 0.0;

    constexpr AngleDeg() = default;
    constexpr explicit AngleDeg(double deg) : value(deg) {}

    double radians() const { return value * pi / 180.0; }
};

/// Direction cosines (vx, vy) seen from the RIS.
struct DirectionCosine
{
    double vx = 0.0;
    double vy = 0.0;

    friend bool operator==(const DirectionCosine &, const DirectionCosine &) = default;
};

/// RIS element spacing in wavelengths. The default is a quarter wavelength.
inline constexpr double default_ris_spacing = 0.25;

// Steering vectors --------------------------------------------------------

/// Half-wavelength ULA response; entry n is exp(j (n-1) pi sin(theta)).
inline CVector ula_steering(AngleDeg theta, int n_elems)
{
    require(std::isfinite(theta.value), "ula_steering: angle is not finite");
    require(n_elems >= 1, "ula_steering: n_elems must be >= 1");
    const double phase = pi * std::sin(theta.radians());
    CVector b(n_elems);
    for (int n = 0; n < n_elems; ++n)
        b[n] = std::polar(1.0, phase * n);
    return b;
}

inline DirectionCosine direction_cosines(AngleDeg azimuth, AngleDeg elevation)
{
    require(std::isfinite(azimuth.value) && std::isfinite(elevation.value),
            "direction_cosines: angles must be finite");
    const double s = std::sin(elevation.radians());
    return {s * std::sin(azimuth.radians()), s * std::cos(azimuth.radians())};
}

inline void check_spacing(double spacing)
{
    require(std::isfinite(spacing) && spacing > 0.0 && spacing <= 0.5,
            "RIS element spacing must lie in (0, 0.5] wavelengths");
}

/// One RIS axis (horizontal or vertical); entry n is exp(j 2 pi spacing (n-1) v).
inline CVector ris_axis_steering(double v, int n_axis, double spacing = default_ris_spacing)
{
    check_spacing(spacing);
    require(std::isfinite(v) && std::abs(v) <= 1.0, "ris_axis_steering: |v| must be <= 1");
    require(n_axis >= 1, "ris_axis_steering: n_axis must be >= 1");
    const double phase = 2.0 * pi * spacing * v;
    CVector r(n_axis);
    for (int n = 0; n < n_axis; ++n)
        r[n] = std::polar(1.0, phase * n);
    return r;
}

/// Full UPA response r(v) = r_x(vx) (x) r_y(vy); element a*sqrt(N_r)+b is r_x[a] r_y[b].
inline CVector ris_full_steering(DirectionCosine v, int n_ris, double spacing = default_ris_spacing)
{
    require(is_perfect_square(n_ris), "ris_full_steering: n_ris must be a perfect square");
    const int n_axis = integer_sqrt(n_ris);
    const CVector rx = ris_axis_steering(v.vx, n_axis, spacing);
    const CVector ry = ris_axis_steering(v.vy, n_axis, spacing);
    return Eigen::kroneckerProduct(rx, ry).eval();
}

/// Kronecker product of two axis phase vectors, same ordering as ris_full_steering.
inline CVector kron(const CVector &outer, const CVector &inner)
{
    return Eigen::kroneckerProduct(outer, inner).eval();
}

// Search grid -------------------------------------------------------------

/// D equally spaced direction cosines covering [-1, 1] inclusive.
inline RVector cosine_grid(int d)
{
    require(d >= 2, "cosine_grid: need at least two points");
    return RVector::LinSpaced(d, -1.0, 1.0);
}

/// Zero-based index of the grid point nearest to v (lowest index on ties).
inline int nearest_grid_index(const RVector &grid, double v)
{
    int best = 0;
    double dist = std::abs(grid[0] - v);
    for (Eigen::Index k = 1; k < grid.size(); ++k)
    {
        const double d = std::abs(grid[k] - v);
        if (d < dist)
        {
            dist = d;
            best = static_cast<int>(k);
        }
    }
    return best;
}

} // namespace risjrc
