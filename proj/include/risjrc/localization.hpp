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

#include "risjrc/codebook.hpp"
#include "risjrc/parallel.hpp"

#include <array>
#include <optional>
#include <vector>

namespace risjrc
{

// Radar scene ---------------------------------------------------------------

enum class RadarModel
{
    full,      // dense N_r x N_r target response, received matrix per beam
    beamformed // draws the beamformed, de-rotated samples z_m directly
};

enum class TargetMode
{
    fixed,      // cfg.v_t every trial
    random_grid // uniform over the D x D grid cells
};

/// Everything one localization trial needs. Fading is frozen for the trial.
struct RadarScene
{
    ScenarioConfig cfg;
    ChannelGains gains;
    DirectionCosine target;
    RadarModel model = RadarModel::beamformed;

    CMatrix h_br;          // full model only
    CMatrix target_matrix; // full model only
};

inline RadarScene make_radar_scene(const ScenarioConfig &cfg, const Fading &fading, DirectionCosine target,
                                   RadarModel model = RadarModel::beamformed)
{
    RadarScene sc{cfg, channel_gains(cfg, fading), target, model, {}, {}};
    if (model == RadarModel::full)
    {
        sc.h_br = sc.gains.g_br * ris_full_steering(cfg.v_b, cfg.n_ris, cfg.ris_spacing) *
                  ula_steering(cfg.theta_r, cfg.n_b).adjoint();
        sc.target_matrix = target_response(target, sc.gains.gamma, cfg.n_ris, cfg.ris_spacing);
    }
    return sc;
}

inline DirectionCosine draw_target(const ScenarioConfig &cfg, TargetMode mode, Rng &rng)
{
    if (mode == TargetMode::fixed)
        return cfg.v_t;
    const RVector grid = cosine_grid(cfg.grid_size);
    const int a = rng.uniform_int(0, cfg.grid_size - 1);
    const int b = rng.uniform_int(0, cfg.grid_size - 1);
    return {grid[a], grid[b]};
}

/// One-based grid cell (i, j) nearest to the target.
inline std::pair<int, int> true_cell(const ScenarioConfig &cfg, DirectionCosine target)
{
    const RVector grid = cosine_grid(cfg.grid_size);
    return {nearest_grid_index(grid, target.vx) + 1, nearest_grid_index(grid, target.vy) + 1};
}

// Per-beam statistic ----------------------------------------------------------

/// z = (b^T(theta_r) Y_r diag(conj(s_r)))^T; returns |mean(z)|^2.
inline double beam_statistic(const CMatrix &y_r, const CVector &s_r, AngleDeg theta_r)
{
    require_dims(y_r.cols() == s_r.size(), "beam_statistic: snapshot count mismatch");
    const CVector b = ula_steering(theta_r, static_cast<int>(y_r.rows()));
    const Eigen::RowVectorXcd bf = b.transpose() * y_r;
    cplx acc{0.0, 0.0};
    for (Eigen::Index m = 0; m < s_r.size(); ++m)
        acc += bf[m] * std::conj(s_r[m]);
    return std::norm(acc / static_cast<double>(s_r.size()));
}

/// Beamformed sample model for one RIS beam:
/// z_m = signal * (sqrt(p_r N_b) + sqrt(p_u / N_b) cross s_u conj(s_r)) + CN(0, N_b sigma_b^2),
/// with signal = gamma c_x c_y g_br^2 N_b and cross = b^H(theta_r) b(theta_u).
struct BeamLink
{
    cplx signal{0.0, 0.0};
    double radar_amp = 0.0;
    cplx cross_amp{0.0, 0.0};
    double noise_var = 0.0;

    cplx sample(Rng &rng) const
    {
        const cplx s_r = rng.qpsk();
        const cplx s_u = rng.qpsk();
        cplx z = signal * (radar_amp + cross_amp * s_u * std::conj(s_r));
        if (noise_var > 0.0)
            z += rng.complex_normal(noise_var);
        return z;
    }

    cplx noiseless(const cplx &s_r, const cplx &s_u) const
    {
        return signal * (radar_amp + cross_amp * s_u * std::conj(s_r));
    }
};

inline BeamLink beam_link(const RadarScene &sc, const PhaseProfile &beam)
{
    const auto &c = sc.cfg;
    const cplx cx = squared_spatial_response(beam.wx, sc.target.vx, c.v_b.vx, c.ris_spacing);
    const cplx cy = squared_spatial_response(beam.wy, sc.target.vy, c.v_b.vy, c.ris_spacing);
    const CVector b_r = ula_steering(c.theta_r, c.n_b);
    const CVector b_u = ula_steering(c.theta_u, c.n_b);
    const cplx cross = b_r.dot(b_u); // Eigen dot conjugates the first argument
    BeamLink link;
    link.signal = sc.gains.gamma * cx * cy * sc.gains.g_br * sc.gains.g_br * static_cast<double>(c.n_b);
    link.radar_amp = std::sqrt(c.p_r * c.n_b);
    link.cross_amp = std::sqrt(c.p_u / c.n_b) * cross;
    link.noise_var = c.n_b * c.sigma_b2();
    return link;
}

/// Transmits one beam t_s times and returns its statistic.
inline double observe_beam(const RadarScene &sc, const PhaseProfile &beam, int t_s, Rng &rng)
{
    require(t_s >= 1, "observe_beam: need at least one snapshot");
    if (sc.model == RadarModel::full)
    {
        const auto blk = make_transmit_block(sc.cfg, t_s, rng);
        const CMatrix y = radar_receive(blk, beam, sc.target_matrix, sc.h_br, sc.cfg.sigma_b2(), rng);
        return beam_statistic(y, blk.s_r, sc.cfg.theta_r);
    }
    const BeamLink link = beam_link(sc, beam);
    cplx acc{0.0, 0.0};
    for (int m = 0; m < t_s; ++m)
        acc += link.sample(rng);
    return std::norm(acc / static_cast<double>(t_s));
}

// Search --------------------------------------------------------------------

/// Four one-based 2-D beam indices at stage s+1 refining beam k of stage s
/// (row-major (a, b) -> (a-1) 2^s + b). Stage 0 / beam 0 denotes the root.
inline std::array<int, 4> child_beams(int s, int k)
{
    if (s == 0)
        return {1, 2, 3, 4};
    const int n = 1 << s;
    const int a = (k - 1) / n + 1;
    const int b = (k - 1) % n + 1;
    const int n2 = n << 1;
    return {(2 * a - 2) * n2 + (2 * b - 1), (2 * a - 2) * n2 + 2 * b, (2 * a - 1) * n2 + (2 * b - 1),
            (2 * a - 1) * n2 + 2 * b};
}

/// One-based 2-D beam index at stage s that covers grid cell (i, j).
inline int covering_beam(int s, std::pair<int, int> cell, int d)
{
    const int a = partition_of(s, cell.first, d);
    const int b = partition_of(s, cell.second, d);
    return (a - 1) * (1 << s) + b;
}

/// Index of the largest value; lowest index wins ties.
inline int argmax_first(const std::array<double, 4> &v)
{
    int best = 0;
    for (int k = 1; k < 4; ++k)
        if (v[static_cast<std::size_t>(k)] > v[static_cast<std::size_t>(best)])
            best = k;
    return best;
}

struct StageDecision
{
    int stage = 0;
    std::array<int, 4> candidates{};
    std::array<double, 4> statistics{};
    int chosen = 1; // 1..4 within candidates
    int snapshots = 1;
    bool correct = false;

    int chosen_beam() const { return candidates[static_cast<std::size_t>(chosen - 1)]; }
};

struct TrialRecord
{
    std::pair<int, int> truth{0, 0};
    std::pair<int, int> estimate{0, 0};
    std::vector<StageDecision> stages;
    long total_transmissions = 0;
    bool success = false;
};

struct SnapshotSchedule
{
    enum class Source
    {
        literal_rule,
        calibrated,
        manual
    };

    std::vector<int> snapshots;
    Source source = Source::manual;

    long transmissions() const
    {
        long t = 0;
        for (int s : snapshots)
            t += 4L * s;
        return t;
    }
};

inline SnapshotSchedule uniform_schedule(int n_stages, int t = 1)
{
    return {std::vector<int>(static_cast<std::size_t>(n_stages), t), SnapshotSchedule::Source::manual};
}

/// Hierarchical four-beam descent over the codebook stages.
inline TrialRecord hierarchical_localize(const RadarScene &sc, const Codebook &cb, const SnapshotSchedule &schedule,
                                         Rng &rng)
{
    require(cb.n_stages() == sc.cfg.n_stages() && cb.grid_size == sc.cfg.grid_size,
            "hierarchical_localize: codebook does not match the scenario grid");
    require(static_cast<int>(schedule.snapshots.size()) == cb.n_stages(),
            "hierarchical_localize: schedule length must equal the stage count");
    for (int t : schedule.snapshots)
        require(t >= 1, "hierarchical_localize: snapshot counts must be >= 1");

    TrialRecord rec;
    rec.truth = true_cell(sc.cfg, sc.target);
    int parent = 0;
    for (int s = 1; s <= cb.n_stages(); ++s)
    {
        const auto &book = cb.stage(s);
        StageDecision dec;
        dec.stage = s;
        dec.snapshots = schedule.snapshots[static_cast<std::size_t>(s - 1)];
        dec.candidates = child_beams(s - 1, parent);
        for (std::size_t k = 0; k < 4; ++k)
        {
            const PhaseProfile beam = book.radar_beam(dec.candidates[k], sc.cfg.radar_aperture);
            dec.statistics[k] = observe_beam(sc, beam, dec.snapshots, rng);
        }
        dec.chosen = argmax_first(dec.statistics) + 1;
        dec.correct = dec.chosen_beam() == covering_beam(s, rec.truth, cb.grid_size);
        rec.total_transmissions += 4L * dec.snapshots;
        parent = dec.chosen_beam();
        rec.stages.push_back(dec);
    }
    rec.estimate = cb.stage(cb.n_stages()).axis_pair(parent);
    rec.success = rec.estimate == rec.truth;
    return rec;
}

/// Pencil-beam scan over all D x D grid directions with the full aperture.
inline TrialRecord exhaustive_localize(const RadarScene &sc, Rng &rng, int t_per_beam = 1)
{
    require(t_per_beam >= 1, "exhaustive_localize: t_per_beam must be >= 1");
    const auto &c = sc.cfg;
    const int d = c.grid_size;
    const int n = c.ris_axis();
    const RVector grid = cosine_grid(d);

    TrialRecord rec;
    rec.truth = true_cell(c, sc.target);
    double best = -1.0;
    for (int i = 1; i <= d; ++i)
    {
        const CVector wx = matched_beam(c.v_b.vx, grid[i - 1], n, c.ris_spacing);
        for (int j = 1; j <= d; ++j)
        {
            const CVector wy = matched_beam(c.v_b.vy, grid[j - 1], n, c.ris_spacing);
            const double stat = observe_beam(sc, {wx, wy}, t_per_beam, rng);
            if (stat > best)
            {
                best = stat;
                rec.estimate = {i, j};
            }
        }
    }
    rec.total_transmissions = static_cast<long>(d) * d * t_per_beam;
    rec.success = rec.estimate == rec.truth;
    return rec;
}

// Snapshot selection ---------------------------------------------------------

enum class SnapshotRuleVariant
{
    literal,  // kappa / (1 - kappa) as printed, negative for every delta in (0, 1)
    magnitude // |kappa / (1 - kappa)|
};

struct SnapshotRule
{
    double kappa = 0.0;
    double factor = 0.0;  // kappa / (1 - kappa), or its magnitude
    double product = 0.0; // p_r * T_s
    bool physical = false;
    std::optional<double> snapshots; // ceil(product / p_r) when physical
};

/// p_r T_s = kappa/(1-kappa) * sigma_b^2 / (N_b^2 L_s^8 eta_br^2 eta_rt^2), kappa = 2(1 - 2 delta / 3).
inline SnapshotRule snapshot_rule(double delta, double p_r, int l_s, int n_b, double eta_br, double eta_rt,
                                  double sigma_b2, SnapshotRuleVariant variant = SnapshotRuleVariant::literal)
{
    require(delta > 0.0 && delta < 1.0, "snapshot_rule: delta must lie in (0, 1)");
    require(l_s >= 1 && n_b >= 1, "snapshot_rule: sizes must be positive");
    SnapshotRule r;
    r.kappa = 2.0 * (1.0 - 2.0 * delta / 3.0);
    r.factor = r.kappa / (1.0 - r.kappa);
    if (variant == SnapshotRuleVariant::magnitude)
        r.factor = std::abs(r.factor);
    const double nb2 = static_cast<double>(n_b) * n_b;
    r.product = r.factor * sigma_b2 / (nb2 * std::pow(static_cast<double>(l_s), 8) * eta_br * eta_br * eta_rt * eta_rt);
    r.physical = r.product > 0.0 && std::isfinite(r.product);
    if (r.physical && p_r > 0.0)
        r.snapshots = std::max(1.0, std::ceil(r.product / p_r));
    return r;
}

inline double overall_error_bound(double delta, int n_s) { return n_s * delta; }

// Empirical calibration ------------------------------------------------------

struct CalibrationResult
{
    int stage = 0;
    std::optional<int> snapshots;  // empty: infeasible within t_max
    std::vector<double> error_by_t; // entry T-1 is the empirical error with T snapshots
    int trials = 0;

    bool feasible() const { return snapshots.has_value(); }
};

struct EnsembleSpec
{
    TargetMode target = TargetMode::fixed;
    int threads = 1;
};

/// Isolated stage-s decisions (ancestors forced correct) over fading, RCS and
/// noise draws. Snapshots are nested: the run with T snapshots uses the first
/// T of t_max samples, so every T is evaluated on the same trials.
inline CalibrationResult calibrate_snapshots(int s, double delta, const ScenarioConfig &cfg, const Codebook &cb,
                                             const EnsembleSpec &ens, const StreamKey &key, int trials, int t_max)
{
    require(s >= 1 && s <= cb.n_stages(), "calibrate_snapshots: stage out of range");
    require(delta > 0.0 && delta < 1.0, "calibrate_snapshots: delta must lie in (0, 1)");
    require(trials >= 1000, "calibrate_snapshots: need at least 1000 trials");
    require(t_max >= 1, "calibrate_snapshots: t_max must be >= 1");

    const auto &book = cb.stage(s);
    std::vector<std::vector<std::uint8_t>> wrong(static_cast<std::size_t>(trials));
    parallel_for(static_cast<std::size_t>(trials), ens.threads, [&](std::size_t t) {
        Rng rng = key.trial_rng(t, static_cast<std::uint64_t>(s));
        const Fading fading = draw_fading(rng, cfg.fading);
        const DirectionCosine target = draw_target(cfg, ens.target, rng);
        const RadarScene sc = make_radar_scene(cfg, fading, target, RadarModel::beamformed);
        const auto cell = true_cell(cfg, target);
        const int parent = s == 1 ? 0 : covering_beam(s - 1, cell, cfg.grid_size);
        const auto cand = child_beams(s - 1, parent);
        const int truth = covering_beam(s, cell, cfg.grid_size);

        std::array<BeamLink, 4> links;
        for (std::size_t k = 0; k < 4; ++k)
            links[k] = beam_link(sc, book.radar_beam(cand[k], cfg.radar_aperture));
        std::array<cplx, 4> acc{};
        auto &out = wrong[t];
        out.resize(static_cast<std::size_t>(t_max));
        for (int m = 0; m < t_max; ++m)
        {
            std::array<double, 4> stat{};
            for (std::size_t k = 0; k < 4; ++k)
            {
                acc[k] += links[k].sample(rng);
                stat[k] = std::norm(acc[k]);
            }
            out[static_cast<std::size_t>(m)] = cand[static_cast<std::size_t>(argmax_first(stat))] != truth;
        }
    });

    CalibrationResult res;
    res.stage = s;
    res.trials = trials;
    res.error_by_t.assign(static_cast<std::size_t>(t_max), 0.0);
    for (const auto &w : wrong)
        for (std::size_t m = 0; m < w.size(); ++m)
            res.error_by_t[m] += w[m];
    for (auto &e : res.error_by_t)
        e /= trials;
    for (int m = 0; m < t_max; ++m)
        if (res.error_by_t[static_cast<std::size_t>(m)] <= delta)
        {
            res.snapshots = m + 1;
            break;
        }
    return res;
}

/// Runs `trials` independent hierarchical searches; trial t uses key.trial_rng(t).
inline std::vector<TrialRecord> run_localization_trials(const ScenarioConfig &cfg, const Codebook &cb,
                                                        const SnapshotSchedule &schedule, const EnsembleSpec &ens,
                                                        const StreamKey &key, int trials,
                                                        RadarModel model = RadarModel::beamformed)
{
    std::vector<TrialRecord> out(static_cast<std::size_t>(trials));
    parallel_for(out.size(), ens.threads, [&](std::size_t t) {
        Rng rng = key.trial_rng(t);
        const Fading fading = draw_fading(rng, cfg.fading);
        const DirectionCosine target = draw_target(cfg, ens.target, rng);
        const RadarScene sc = make_radar_scene(cfg, fading, target, model);
        out[t] = hierarchical_localize(sc, cb, schedule, rng);
    });
    return out;
}

/// Per-stage error conditioned on correct ancestors, plus the overall error.
struct LocalizationSummary
{
    std::vector<long> stage_trials; // trials reaching stage s with correct ancestors
    std::vector<long> stage_errors;
    long trials = 0;
    long failures = 0;

    double stage_error(int s) const
    {
        const auto k = static_cast<std::size_t>(s - 1);
        return stage_trials[k] > 0 ? static_cast<double>(stage_errors[k]) / stage_trials[k] : 0.0;
    }
    double overall_error() const { return trials > 0 ? static_cast<double>(failures) / trials : 0.0; }
};

inline LocalizationSummary summarize(const std::vector<TrialRecord> &recs, int n_stages)
{
    LocalizationSummary sum;
    sum.stage_trials.assign(static_cast<std::size_t>(n_stages), 0);
    sum.stage_errors.assign(static_cast<std::size_t>(n_stages), 0);
    for (const auto &r : recs)
    {
        ++sum.trials;
        if (!r.success)
            ++sum.failures;
        for (const auto &d : r.stages)
        {
            const auto k = static_cast<std::size_t>(d.stage - 1);
            ++sum.stage_trials[k];
            if (!d.correct)
            {
                ++sum.stage_errors[k];
                break;
            }
        }
    }
    return sum;
}

} // namespace risjrc
