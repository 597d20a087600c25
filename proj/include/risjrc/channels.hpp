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

#include "risjrc/geometry.hpp"
#include "risjrc/rng.hpp"

#include <optional>

namespace risjrc
{

enum class PathlossModel
{
    literal,  // (eta0_lin / d)^alpha
    standard  // eta0_lin * d^-alpha
};

/// RIS elements that take part in the radar echo of a stage beam.
enum class RadarAperture
{
    sensing, // first L_s elements per axis; the communication part is left out
    full     // every element, communication part included
};

enum class FadingModel
{
    rayleigh, // beta, rho ~ CN(0, 1)
    none      // beta = rho = 1
};

/// Scenario geometry, link budget and power split. Defaults reproduce the
/// reference parameter table (N_b=64, N_u=16, N_r=64x64, D=32, ...).
struct ScenarioConfig
{
    int n_b = 64;
    int n_u = 16;
    int n_ris = 64 * 64;
    int grid_size = 32;

    AngleDeg theta_r{45.0};
    AngleDeg theta_u{-25.0};
    AngleDeg zeta_b{-30.0};
    AngleDeg zeta_r{25.0};

    DirectionCosine v_b{0.133, -0.112};
    DirectionCosine v_u{0.105, -0.343};
    DirectionCosine v_t{-0.4127, 0.5397};

    double d_bu = 20.0;
    double d_br = 10.0;
    double d_ru = 10.0;
    double d_rt = 5.0;

    double alpha_bu = 3.5;
    double alpha_br = 2.5;
    double alpha_ru = 2.8;
    double alpha_rt = 2.8;

    double eta0_db = -30.0;
    PathlossModel pathloss = PathlossModel::literal;

    double sigma_b2_dbm = -94.0;
    double sigma_u2_dbm = -80.0;

    double ris_spacing = default_ris_spacing;

    /// Total transmit power P in watts, split p_r (towards RIS) + p_u (towards UE).
    double p_r = 0.5;
    double p_u = 0.5;

    FadingModel fading = FadingModel::rayleigh;
    RadarAperture radar_aperture = RadarAperture::sensing;

    int ris_axis() const { return integer_sqrt(n_ris); }
    int n_stages() const { return log2_exact(grid_size); }
    double total_power() const { return p_r + p_u; }
    double sigma_b2() const { return dbm_to_watts(sigma_b2_dbm); }
    double sigma_u2() const { return dbm_to_watts(sigma_u2_dbm); }

    /// Same split ratio, new total power (watts).
    ScenarioConfig with_total_power(double p_total) const
    {
        ScenarioConfig c = *this;
        const double ratio = total_power() > 0.0 ? p_r / total_power() : 0.5;
        c.p_r = ratio * p_total;
        c.p_u = p_total - c.p_r;
        return c;
    }

    void validate() const
    {
        require(n_b >= 1 && n_u >= 1, "n_b and n_u must be positive");
        require(is_perfect_square(n_ris) && n_ris >= 1, "n_ris must be a positive perfect square");
        require(is_power_of_two(grid_size) && grid_size >= 2, "grid_size must be a power of two >= 2");
        for (auto a : {theta_r, theta_u, zeta_b, zeta_r})
            require(std::isfinite(a.value) && std::abs(a.value) < 90.0, "ULA angles must lie in (-90, 90) degrees");
        for (auto v : {v_b, v_u, v_t})
            require(std::abs(v.vx) <= 1.0 && std::abs(v.vy) <= 1.0, "direction cosines must lie in [-1, 1]");
        for (double d : {d_bu, d_br, d_ru, d_rt})
            require(d > 0.0, "distances must be positive");
        require(p_r >= 0.0 && p_u >= 0.0, "power split must be non-negative");
        check_spacing(ris_spacing);
    }
};

// Large- and small-scale fading -------------------------------------------

/// Amplitude pathloss eta for one link.
inline double pathloss(double d, double alpha, double eta0_db, PathlossModel model = PathlossModel::literal)
{
    require(std::isfinite(d) && d > 0.0, "pathloss: distance must be positive");
    const double eta0 = db_to_linear(eta0_db);
    if (model == PathlossModel::literal)
        return std::pow(eta0 / d, alpha);
    return eta0 * std::pow(d, -alpha);
}

struct LinkPathloss
{
    double bu, br, ru, rt;
};

inline LinkPathloss link_pathloss(const ScenarioConfig &c)
{
    return {pathloss(c.d_bu, c.alpha_bu, c.eta0_db, c.pathloss), pathloss(c.d_br, c.alpha_br, c.eta0_db, c.pathloss),
            pathloss(c.d_ru, c.alpha_ru, c.eta0_db, c.pathloss), pathloss(c.d_rt, c.alpha_rt, c.eta0_db, c.pathloss)};
}

struct Fading
{
    cplx beta_br{1.0, 0.0};
    cplx beta_bu{1.0, 0.0};
    cplx beta_ru{1.0, 0.0};
    cplx rho{1.0, 0.0};
};

/// Four i.i.d. CN(0,1) draws in the order beta_br, beta_bu, beta_ru, rho.
inline Fading draw_fading(Rng &rng)
{
    Fading f;
    f.beta_br = rng.complex_normal();
    f.beta_bu = rng.complex_normal();
    f.beta_ru = rng.complex_normal();
    f.rho = rng.complex_normal();
    return f;
}

inline Fading draw_fading(Rng &rng, FadingModel model)
{
    return model == FadingModel::rayleigh ? draw_fading(rng) : Fading{};
}

/// Complex path gains g = beta * eta and the scattering coefficient gamma = rho eta_rt^2.
struct ChannelGains
{
    cplx g_br, g_bu, g_ru, gamma;
};

inline ChannelGains channel_gains(const ScenarioConfig &cfg, const Fading &f)
{
    const auto eta = link_pathloss(cfg);
    return {f.beta_br * eta.br, f.beta_bu * eta.bu, f.beta_ru * eta.ru, f.rho * eta.rt * eta.rt};
}

// LoS channel matrices ----------------------------------------------------

struct ChannelSet
{
    CMatrix h_bu; // N_u x N_b
    CMatrix h_br; // N_r x N_b
    CMatrix h_ru; // N_u x N_r
    ChannelGains gains;
};

inline ChannelSet build_channels(const ScenarioConfig &cfg, const Fading &fading)
{
    cfg.validate();
    ChannelSet ch;
    ch.gains = channel_gains(cfg, fading);
    const CVector b_r = ula_steering(cfg.theta_r, cfg.n_b);
    const CVector b_u = ula_steering(cfg.theta_u, cfg.n_b);
    const CVector u_b = ula_steering(cfg.zeta_b, cfg.n_u);
    const CVector u_r = ula_steering(cfg.zeta_r, cfg.n_u);
    const CVector r_b = ris_full_steering(cfg.v_b, cfg.n_ris, cfg.ris_spacing);
    const CVector r_u = ris_full_steering(cfg.v_u, cfg.n_ris, cfg.ris_spacing);

    ch.h_br = ch.gains.g_br * r_b * b_r.adjoint();
    ch.h_bu = ch.gains.g_bu * u_b * b_u.adjoint();
    ch.h_ru = ch.gains.g_ru * u_r * r_u.adjoint();
    return ch;
}

/// Point-target response gamma * conj(r(v_t)) r(v_t)^H, dense N_r x N_r.
inline CMatrix target_response(DirectionCosine v_t, cplx gamma, int n_ris, double spacing = default_ris_spacing)
{
    const CVector r = ris_full_steering(v_t, n_ris, spacing);
    return gamma * r.conjugate() * r.adjoint();
}

// Transmit signal ---------------------------------------------------------

struct TransmitBlock
{
    CVector s_r; // radar stream, length T_s
    CVector s_u; // UE stream, length T_s
    CMatrix x;   // N_b x T_s
};

/// X = sqrt(p_r/N_b) b(theta_r) s_r^T + sqrt(p_u/N_b) b(theta_u) s_u^T.
inline CMatrix assemble_transmit(const ScenarioConfig &cfg, const CVector &s_r, const CVector &s_u)
{
    require_dims(s_r.size() == s_u.size(), "assemble_transmit: stream lengths differ");
    const CVector b_r = ula_steering(cfg.theta_r, cfg.n_b);
    const CVector b_u = ula_steering(cfg.theta_u, cfg.n_b);
    return std::sqrt(cfg.p_r / cfg.n_b) * b_r * s_r.transpose() + std::sqrt(cfg.p_u / cfg.n_b) * b_u * s_u.transpose();
}

inline TransmitBlock make_transmit_block(const ScenarioConfig &cfg, int t_s, Rng &rng)
{
    require(t_s >= 1, "make_transmit_block: need at least one snapshot");
    TransmitBlock blk;
    blk.s_r.resize(t_s);
    blk.s_u.resize(t_s);
    for (int m = 0; m < t_s; ++m)
    {
        blk.s_r[m] = rng.qpsk();
        blk.s_u[m] = rng.qpsk();
    }
    blk.x = assemble_transmit(cfg, blk.s_r, blk.s_u);
    return blk;
}

// RIS responses -----------------------------------------------------------

/// Kronecker-factored RIS configuration omega = omega_x (x) omega_y.
struct PhaseProfile
{
    CVector wx;
    CVector wy;

    CVector full() const { return kron(wx, wy); }
};

/// Response of one RIS axis, r^H(v_scan) diag(w) r(v_incident).
inline cplx axis_response(const CVector &w, double v_scan, double v_incident, double spacing = default_ris_spacing)
{
    const int n = static_cast<int>(w.size());
    const double phase = 2.0 * pi * spacing * (v_incident - v_scan);
    cplx acc{0.0, 0.0};
    for (int k = 0; k < n; ++k)
        acc += w[k] * std::polar(1.0, phase * k);
    return acc;
}

/// Squared spatial response [r^H(v_scan) diag(w) r(v_incident)]^2; the RIS is
/// traversed twice on the radar path.
inline cplx squared_spatial_response(const CVector &w_axis, double v_scan, double v_incident,
                                     double spacing = default_ris_spacing)
{
    const cplx a = axis_response(w_axis, v_scan, v_incident, spacing);
    return a * a;
}

// Received signals --------------------------------------------------------

/// Y_r = H_br^T Omega^T T Omega H_br X + N, evaluated as written (Omega diagonal).
inline CMatrix radar_receive(const TransmitBlock &x, const PhaseProfile &omega, const CMatrix &target,
                             const CMatrix &h_br, double sigma_b2, Rng &rng)
{
    const CVector w = omega.full();
    require_dims(h_br.rows() == w.size(), "radar_receive: H_br rows must equal N_r");
    require_dims(target.rows() == w.size() && target.cols() == w.size(), "radar_receive: target response is not N_r x N_r");
    require_dims(h_br.cols() == x.x.rows(), "radar_receive: H_br columns must equal N_b");

    CMatrix y = w.asDiagonal() * (h_br * x.x);
    y = target * y;
    y = w.asDiagonal() * y; // Omega^T = Omega for a diagonal matrix
    y = h_br.transpose() * y;
    if (sigma_b2 > 0.0)
        y += complex_normal_matrix(y.rows(), y.cols(), sigma_b2, rng);
    return y;
}

/// Y_u = (H_bu + H_ru Omega H_br) X + N_u. An empty optional means no RIS path.
inline CMatrix ue_receive(const TransmitBlock &x, const ChannelSet &ch, const std::optional<PhaseProfile> &omega,
                          double sigma_u2, Rng &rng)
{
    require_dims(ch.h_bu.cols() == x.x.rows(), "ue_receive: H_bu columns must equal N_b");
    CMatrix h = ch.h_bu;
    if (omega)
    {
        const CVector w = omega->full();
        require_dims(ch.h_ru.cols() == w.size() && ch.h_br.rows() == w.size(), "ue_receive: RIS size mismatch");
        h += ch.h_ru * (w.asDiagonal() * ch.h_br);
    }
    CMatrix y = h * x.x;
    if (sigma_u2 > 0.0)
        y += complex_normal_matrix(y.rows(), y.cols(), sigma_u2, rng);
    return y;
}

} // namespace risjrc
