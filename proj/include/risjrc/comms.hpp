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

#include "risjrc/channels.hpp"
#include "risjrc/parallel.hpp"

#include <optional>

namespace risjrc
{

struct LinkMatrices
{
    CMatrix f; // N_b x 2, N_b^{-1/2} [b(theta_r) b(theta_u)]
    CMatrix c; // N_u x 2, N_u^{-1/2} [u(zeta_r) u(zeta_b)]
    CMatrix p; // diag(sqrt(p_r), sqrt(p_u))
};

inline LinkMatrices build_link_matrices(const ScenarioConfig &cfg)
{
    LinkMatrices lm;
    lm.f.resize(cfg.n_b, 2);
    lm.f.col(0) = ula_steering(cfg.theta_r, cfg.n_b);
    lm.f.col(1) = ula_steering(cfg.theta_u, cfg.n_b);
    lm.f /= std::sqrt(static_cast<double>(cfg.n_b));
    lm.c.resize(cfg.n_u, 2);
    lm.c.col(0) = ula_steering(cfg.zeta_r, cfg.n_u);
    lm.c.col(1) = ula_steering(cfg.zeta_b, cfg.n_u);
    lm.c /= std::sqrt(static_cast<double>(cfg.n_u));
    lm.p = CMatrix::Zero(2, 2);
    lm.p(0, 0) = std::sqrt(cfg.p_r);
    lm.p(1, 1) = std::sqrt(cfg.p_u);
    return lm;
}

/// H_eff = C^H (H_bu + H_ru Omega H_br) F P, 2 x 2. No profile: RIS path absent.
inline CMatrix effective_channel(const ChannelSet &ch, const std::optional<PhaseProfile> &omega,
                                 const LinkMatrices &link)
{
    require_dims(ch.h_bu.cols() == link.f.rows() && ch.h_bu.rows() == link.c.rows(),
                 "effective_channel: link matrices do not match the channel");
    CMatrix h = ch.h_bu * link.f;
    if (omega)
    {
        const CVector w = omega->full();
        require_dims(ch.h_ru.cols() == w.size() && ch.h_br.rows() == w.size(),
                     "effective_channel: RIS size mismatch");
        h += ch.h_ru * (w.asDiagonal() * (ch.h_br * link.f));
    }
    return link.c.adjoint() * h * link.p;
}

/// log2 det(I + H H^H / sigma^2).
inline double spectral_efficiency(const CMatrix &h_eff, double sigma_u2)
{
    require(sigma_u2 > 0.0 && std::isfinite(sigma_u2), "spectral_efficiency: noise power must be positive");
    const auto n = h_eff.rows();
    const CMatrix g = CMatrix::Identity(n, n) + (h_eff * h_eff.adjoint()) / sigma_u2;
    const Eigen::LLT<CMatrix> llt(g);
    double logdet = 0.0;
    for (Eigen::Index k = 0; k < n; ++k)
        logdet += 2.0 * std::log2(llt.matrixL()(k, k).real());
    return logdet;
}

struct SeEstimate
{
    double mean = 0.0;
    double half_width = 0.0; // 95% normal approximation
    int trials = 0;
};

/// Monte Carlo SE over small-scale fading. H_eff is linear in the fading
/// coefficients: beta_bu * M_direct + beta_ru beta_br * M_ris, with the two
/// unit-fading matrices formed once through effective_channel.
inline SeEstimate average_se(const ScenarioConfig &cfg, const std::optional<PhaseProfile> &omega, int trials,
                             const StreamKey &key, int threads = 1)
{
    require(trials >= 1, "average_se: need at least one trial");
    const LinkMatrices link = build_link_matrices(cfg);
    const ChannelSet unit = build_channels(cfg, Fading{});
    const CMatrix m_direct = effective_channel(unit, std::nullopt, link);
    CMatrix m_ris = CMatrix::Zero(2, 2);
    if (omega)
    {
        ChannelSet ris_only = unit;
        ris_only.h_bu.setZero();
        m_ris = effective_channel(ris_only, omega, link);
    }

    const double sigma_u2 = cfg.sigma_u2();
    std::vector<double> se(static_cast<std::size_t>(trials));
    parallel_for(se.size(), threads, [&](std::size_t t) {
        Rng rng = key.trial_rng(t);
        const Fading f = draw_fading(rng, cfg.fading);
        const CMatrix h = f.beta_bu * m_direct + (f.beta_ru * f.beta_br) * m_ris;
        se[t] = spectral_efficiency(h, sigma_u2);
    });

    SeEstimate est;
    est.trials = trials;
    double sum = 0.0;
    for (double v : se)
        sum += v;
    est.mean = sum / trials;
    if (trials > 1)
    {
        double ss = 0.0;
        for (double v : se)
            ss += (v - est.mean) * (v - est.mean);
        est.half_width = 1.96 * std::sqrt(ss / (trials - 1) / trials);
    }
    return est;
}

} // namespace risjrc
