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

#include "risjrc/geometry.hpp"
#include "risjrc/rng.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace risjrc;
using Catch::Matchers::WithinAbs;

namespace
{

double max_abs_diff(const CVector &a, const CVector &b) { return (a - b).cwiseAbs().maxCoeff(); }

} // namespace

TEST_CASE("ula steering entries", "[geometry]")
{
    const CVector broadside = ula_steering(AngleDeg(0.0), 4);
    CHECK(max_abs_diff(broadside, CVector::Ones(4)) < 1e-15);

    const CVector endfire = ula_steering(AngleDeg(90.0), 2);
    CHECK(std::abs(endfire[0] - cplx(1.0, 0.0)) < 1e-15);
    CHECK(std::abs(endfire[1] - cplx(-1.0, 0.0)) < 1e-15);

    const CVector b = ula_steering(AngleDeg(45.0), 3);
    const cplx want = std::exp(cplx(0.0, 2.0 * pi * std::sin(pi / 4.0)));
    CHECK(std::abs(b[2] - want) < 1e-14);
}

TEST_CASE("ula steering rejects non-finite angles", "[geometry]")
{
    CHECK_THROWS_AS(ula_steering(AngleDeg(std::nan("")), 4), invalid_input);
    CHECK_THROWS_AS(ula_steering(AngleDeg(10.0), 0), invalid_input);
}

TEST_CASE("direction cosines", "[geometry]")
{
    const auto zero = direction_cosines(AngleDeg(123.0), AngleDeg(0.0));
    CHECK_THAT(zero.vx, WithinAbs(0.0, 1e-15));
    CHECK_THAT(zero.vy, WithinAbs(0.0, 1e-15));

    const auto target = direction_cosines(AngleDeg(-37.40), AngleDeg(42.79));
    CHECK_THAT(target.vx, WithinAbs(-0.4127, 1e-3));
    CHECK_THAT(target.vy, WithinAbs(0.5397, 1e-3));

    const auto edge = direction_cosines(AngleDeg(90.0), AngleDeg(90.0));
    CHECK_THAT(edge.vx, WithinAbs(1.0, 1e-15));
    CHECK_THAT(edge.vy, WithinAbs(0.0, 1e-15));
}

TEST_CASE("ris axis steering", "[geometry]")
{
    CHECK(max_abs_diff(ris_axis_steering(0.0, 8, 0.25), CVector::Ones(8)) < 1e-15);

    const CVector quarter = ris_axis_steering(1.0, 2, 0.25);
    CHECK(std::abs(quarter[1] - cplx(0.0, 1.0)) < 1e-15);

    const CVector half = ris_axis_steering(1.0, 2, 0.5);
    CHECK(std::abs(half[1] - cplx(-1.0, 0.0)) < 1e-15);

    CHECK_THROWS_AS(ris_axis_steering(0.1, 4, 0.0), invalid_input);
    CHECK_THROWS_AS(ris_axis_steering(0.1, 4, 0.51), invalid_input);
    CHECK_THROWS_AS(ris_axis_steering(1.5, 4, 0.25), invalid_input);
}

TEST_CASE("ris full steering", "[geometry]")
{
    CHECK(max_abs_diff(ris_full_steering({0.0, 0.0}, 16), CVector::Ones(16)) < 1e-15);

    const CVector corner = ris_full_steering({1.0, 1.0}, 4, 0.25);
    const cplx j{0.0, 1.0};
    CHECK(std::abs(corner[0] - 1.0) < 1e-15);
    CHECK(std::abs(corner[1] - j) < 1e-15);
    CHECK(std::abs(corner[2] - j) < 1e-15);
    CHECK(std::abs(corner[3] + 1.0) < 1e-15);

    CHECK_THROWS_AS(ris_full_steering({0.1, 0.1}, 15), invalid_input);
}

TEST_CASE("property: steering entries have unit modulus", "[geometry][property]")
{
    Rng rng(11);
    for (int rep = 0; rep < 1000; ++rep)
    {
        const int n = rng.uniform_int(1, 40);
        const double theta = 179.0 * rng.uniform() - 89.5;
        const double v = 2.0 * rng.uniform() - 1.0;
        const double sp = 0.01 + 0.49 * rng.uniform();
        const CVector b = ula_steering(AngleDeg(theta), n);
        const CVector r = ris_axis_steering(v, n, sp);
        REQUIRE(max_modulus_error(b) < 1e-12);
        REQUIRE(max_modulus_error(r) < 1e-12);
        REQUIRE(std::abs(b[0] - 1.0) == 0.0);
        REQUIRE(std::abs(r[0] - 1.0) == 0.0);
    }
}

TEST_CASE("property: full steering is the row-major Kronecker of the axes", "[geometry][property]")
{
    Rng rng(12);
    for (int rep = 0; rep < 200; ++rep)
    {
        const int n = rng.uniform_int(1, 12);
        const DirectionCosine v{2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0};
        const CVector rx = ris_axis_steering(v.vx, n);
        const CVector ry = ris_axis_steering(v.vy, n);
        const CVector full = ris_full_steering(v, n * n);
        double err = 0.0;
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                err = std::max(err, std::abs(full[a * n + b] - rx[a] * ry[b]));
        REQUIRE(err < 1e-12);
    }
}

TEST_CASE("property: steering at the negated angle is the conjugate", "[geometry][property]")
{
    Rng rng(13);
    for (int rep = 0; rep < 200; ++rep)
    {
        const double theta = 179.0 * rng.uniform() - 89.5;
        const double v = 2.0 * rng.uniform() - 1.0;
        REQUIRE(max_abs_diff(ula_steering(AngleDeg(-theta), 16), ula_steering(AngleDeg(theta), 16).conjugate()) <
                1e-12);
        REQUIRE(max_abs_diff(ris_axis_steering(-v, 16), ris_axis_steering(v, 16).conjugate()) < 1e-12);
    }
}

TEST_CASE("search grid", "[geometry]")
{
    const RVector g = cosine_grid(32);
    CHECK(g.size() == 32);
    CHECK(g[0] == -1.0);
    CHECK(g[31] == 1.0);
    for (Eigen::Index k = 1; k < g.size(); ++k)
        CHECK(g[k] > g[k - 1]);
    CHECK(nearest_grid_index(g, -1.0) == 0);
    CHECK(nearest_grid_index(g, 1.0) == 31);
    // Nearest cell of the reference target on the 32-point grid.
    CHECK(nearest_grid_index(g, 0.5397) == 24);
}
