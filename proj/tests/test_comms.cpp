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

#include "risjrc/codebook.hpp"
#include "risjrc/comms.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace risjrc;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("link matrices", "[comms]")
{
    const ScenarioConfig cfg;
    const LinkMatrices lm = build_link_matrices(cfg);
    CHECK(lm.f.rows() == cfg.n_b);
    CHECK(lm.c.rows() == cfg.n_u);
    for (int k = 0; k < 2; ++k)
    {
        CHECK_THAT(lm.f.col(k).norm(), WithinAbs(1.0, 1e-12));
        CHECK_THAT(lm.c.col(k).norm(), WithinAbs(1.0, 1e-12));
    }
    CHECK_THAT(std::abs(lm.p(0, 0)), WithinAbs(std::sqrt(cfg.p_r), 1e-15));
    CHECK_THAT(std::abs(lm.p(1, 1)), WithinAbs(std::sqrt(cfg.p_u), 1e-15));
    CHECK(lm.p(0, 1) == 0.0);
}

TEST_CASE("spectral efficiency closed forms", "[comms]")
{
    CHECK_THAT(spectral_efficiency(CMatrix::Zero(2, 2), 1.0), WithinAbs(0.0, 1e-15));
    const double s2 = 0.37;
    CHECK_THAT(spectral_efficiency(std::sqrt(s2) * CMatrix::Identity(2, 2), s2), WithinAbs(2.0, 1e-12));

    CMatrix diag = CMatrix::Zero(2, 2);
    diag(0, 0) = {3.0, 1.0};
    diag(1, 1) = {0.0, -0.5};
    const double want = std::log2(1.0 + 10.0 / s2) + std::log2(1.0 + 0.25 / s2);
    CHECK_THAT(spectral_efficiency(diag, s2), WithinRel(want, 1e-12));

    CHECK_THROWS_AS(spectral_efficiency(diag, 0.0), invalid_input);
}

TEST_CASE("property: spectral efficiency from singular values", "[comms][property]")
{
    Rng rng(51);
    for (int rep = 0; rep < 200; ++rep)
    {
        const CMatrix h = complex_normal_matrix(2, 2, std::pow(10.0, 4.0 * rng.uniform() - 2.0), rng);
        const double s2 = 0.01 + rng.uniform();
        const Eigen::JacobiSVD<CMatrix> svd(h);
        double want = 0.0;
        for (Eigen::Index k = 0; k < 2; ++k)
            want += std::log2(1.0 + svd.singularValues()[k] * svd.singularValues()[k] / s2);
        REQUIRE_THAT(spectral_efficiency(h, s2), WithinRel(want, 1e-10));
        REQUIRE(spectral_efficiency(h, s2) >= 0.0);
        // More noise never helps.
        REQUIRE(spectral_efficiency(h, 2.0 * s2) <= spectral_efficiency(h, s2) + 1e-12);
    }
}

TEST_CASE("effective channel scales with the square root of power", "[comms]")
{
    ScenarioConfig cfg;
    cfg.n_ris = 16 * 16;
    Rng rng(52);
    const ChannelSet ch = build_channels(cfg, draw_fading(rng));
    const PhaseProfile omega = comm_only_profile(cfg);
    const CMatrix h1 = effective_channel(ch, omega, build_link_matrices(cfg));
    const CMatrix h4 = effective_channel(ch, omega, build_link_matrices(cfg.with_total_power(4.0 * cfg.total_power())));
    CHECK((h4 - 2.0 * h1).norm() <= 1e-12 * h1.norm());
}

TEST_CASE("direct-only effective channel", "[comms]")
{
    ScenarioConfig cfg;
    cfg.n_ris = 16 * 16;
    Rng rng(53);
    const ChannelSet ch = build_channels(cfg, draw_fading(rng));
    const LinkMatrices lm = build_link_matrices(cfg);
    const CMatrix want = lm.c.adjoint() * ch.h_bu * lm.f * lm.p;
    CHECK((effective_channel(ch, std::nullopt, lm) - want).norm() <= 1e-12 * want.norm());
}

TEST_CASE("matched RIS path gives the coherent array gain", "[comms]")
{
    ScenarioConfig cfg;
    cfg.n_ris = 16 * 16;
    ChannelSet ch = build_channels(cfg, Fading{});
    ch.h_bu.setZero();
    const auto eta = link_pathloss(cfg);
    const CMatrix h = effective_channel(ch, comm_only_profile(cfg), build_link_matrices(cfg));
    const double want = eta.ru * eta.br * cfg.n_ris * std::sqrt(cfg.n_u * cfg.n_b * cfg.p_r);
    CHECK_THAT(std::abs(h(0, 0)), WithinRel(want, 1e-9));

    // A partial comm aperture of C elements per axis yields C^2 instead of N_r.
    const int c = 10;
    PhaseProfile partial{CVector::Zero(16), CVector::Zero(16)};
    partial.wx.tail(c) = design_comm_phases(c, 16, cfg.v_b.vx, cfg.v_u.vx);
    partial.wy.tail(c) = design_comm_phases(c, 16, cfg.v_b.vy, cfg.v_u.vy);
    const CMatrix hp = effective_channel(ch, partial, build_link_matrices(cfg));
    CHECK_THAT(std::abs(hp(0, 0)), WithinRel(want * c * c / cfg.n_ris, 1e-9));
}

TEST_CASE("average SE without fading is deterministic", "[comms]")
{
    ScenarioConfig cfg;
    cfg.n_ris = 16 * 16;
    cfg.fading = FadingModel::none;
    const PhaseProfile omega = comm_only_profile(cfg);
    const auto est = average_se(cfg, omega, 50, {3, 3, 0});
    const double want =
        spectral_efficiency(effective_channel(build_channels(cfg, Fading{}), omega, build_link_matrices(cfg)),
                            cfg.sigma_u2());
    CHECK_THAT(est.mean, WithinRel(want, 1e-10));
    CHECK_THAT(est.half_width, WithinAbs(0.0, 1e-9));
    CHECK(est.trials == 50);
}

TEST_CASE("average SE determinism", "[comms]")
{
    ScenarioConfig cfg;
    cfg.n_ris = 16 * 16;
    // Noise floor low enough for a non-trivial SE under the default link budget.
    cfg.sigma_u2_dbm = -250.0;
    const StreamKey key{5, 3, 1};
    const auto ris = average_se(cfg, comm_only_profile(cfg), 400, key);
    const auto none = average_se(cfg, std::nullopt, 400, key);
    const auto off = average_se(cfg, PhaseProfile{CVector::Zero(16), CVector::Zero(16)}, 400, key);
    CHECK(ris.half_width > 0.0);
    // A switched-off surface is the same as no surface.
    CHECK_THAT(off.mean, WithinRel(none.mean, 1e-12));
    const auto threaded = average_se(cfg, comm_only_profile(cfg), 400, key, 4);
    CHECK(threaded.mean == ris.mean);
    CHECK(threaded.half_width == ris.half_width);
    CHECK_THROWS_AS(average_se(cfg, std::nullopt, 0, key), invalid_input);
}
