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

#include <string>
#include <vector>

namespace risjrc
{

// Grid partitions ---------------------------------------------------------

/// Contiguous block of grid indices illuminated by beam i of stage s.
/// Indices are one-based, inclusive.
struct PartitionSpec
{
    int stage = 1;
    int index = 1;
    int first = 1;
    int last = 1;

    int size() const { return last - first + 1; }
    bool contains(int grid_index) const { return grid_index >= first && grid_index <= last; }

    std::vector<int> indices() const
    {
        std::vector<int> out;
        for (int k = first; k <= last; ++k)
            out.push_back(k);
        return out;
    }
};

inline PartitionSpec partition_indices(int s, int i, int d)
{
    require(s >= 1 && is_power_of_two(d) && (1L << s) <= d, "partition_indices: stage out of range for grid size");
    require(i >= 1 && i <= (1 << s), "partition_indices: partition index out of range");
    const int block = d >> s;
    return {s, i, block * (i - 1) + 1, block * i};
}

/// One-based partition index at stage s containing one-based grid index k.
inline int partition_of(int s, int grid_index, int d) { return (grid_index - 1) / (d >> s) + 1; }

// Khatri-Rao design matrix -------------------------------------------------

/// Column-wise Kronecker product: column k of the result is b.col(k) (x) a.col(k).
inline CMatrix khatri_rao(const CMatrix &b, const CMatrix &a)
{
    require_dims(a.cols() == b.cols(), "khatri_rao: column counts differ");
    CMatrix out(a.rows() * b.rows(), a.cols());
    for (Eigen::Index k = 0; k < a.cols(); ++k)
        for (Eigen::Index p = 0; p < b.rows(); ++p)
            out.col(k).segment(p * a.rows(), a.rows()) = b(p, k) * a.col(k);
    return out;
}

/// A = r^T(v_b) o R^H, so that (A g)_j = r^H(v_j) diag(g) r(v_b) on the first L elements.
inline CMatrix sensing_design_matrix(int l_s, double v_b, const RVector &grid, double spacing)
{
    CMatrix r(l_s, grid.size());
    for (Eigen::Index j = 0; j < grid.size(); ++j)
        r.col(j) = ris_axis_steering(grid[j], l_s, spacing);
    const CMatrix rb_t = ris_axis_steering(v_b, l_s, spacing).transpose();
    return khatri_rao(rb_t, r.adjoint());
}

// Sensing-part solver ------------------------------------------------------

/// Where the desired on-partition response has zero phase. `first_element`
/// keeps the steering convention unchanged; `centered` references the phase to
/// the middle of the sensing sub-array, which removes the linear phase ramp
/// that otherwise makes a flat-phase target unreachable.
enum class PhaseReference
{
    first_element,
    centered
};

struct SolverParams
{
    double mu_scale = 0.5; // mu = mu_scale / sigma_max(A)^2
    int max_iters = 500;
    double tol = 1e-8;     // relative residual change
    PhaseReference reference = PhaseReference::centered;
    double init_perturbation = 0.05; // radians, std of the seeded phase jitter
};

struct SensingDesign
{
    CVector g;
    double residual = 0.0; // ||A g - t|| / ||t||
    int iterations = 0;
};

inline CVector project_unit_modulus(const CVector &x)
{
    CVector y(x.size());
    for (Eigen::Index k = 0; k < x.size(); ++k)
        y[k] = std::polar(1.0, std::arg(x[k]));
    return y;
}

/// Desired response L_s * 1_{s,i}, with the optional centering phase.
inline CVector sensing_target(const PartitionSpec &part, int l_s, double v_b, const RVector &grid, double spacing,
                              PhaseReference ref)
{
    CVector t = CVector::Zero(grid.size());
    const double c = ref == PhaseReference::centered ? 0.5 * (l_s - 1) : 0.0;
    for (int k = part.first; k <= part.last; ++k)
    {
        const double phi = 2.0 * pi * spacing * c * (grid[k - 1] - v_b);
        t[k - 1] = static_cast<double>(l_s) * std::polar(1.0, -phi);
    }
    return t;
}

/// Projected-gradient unit-modulus least squares:
/// g <- exp(j angle(g + mu A^H (t - A g))). Returns the best iterate seen.
inline SensingDesign design_sensing_phases(int s, int i, int l_s, double v_b_axis, const RVector &grid,
                                           const SolverParams &params, const CVector &init,
                                           double spacing = default_ris_spacing)
{
    require(l_s >= 1, "design_sensing_phases: L_s must be >= 1");
    require(init.size() == l_s, "design_sensing_phases: init length must equal L_s");
    require(max_modulus_error(init) < 1e-9, "design_sensing_phases: init must be unit modulus");
    for (Eigen::Index k = 1; k < grid.size(); ++k)
        require(grid[k] > grid[k - 1], "design_sensing_phases: grid must be strictly increasing");
    require(params.max_iters >= 0 && params.mu_scale > 0.0, "design_sensing_phases: bad solver parameters");

    const int d = static_cast<int>(grid.size());
    const auto part = partition_indices(s, i, d);
    const CMatrix a = sensing_design_matrix(l_s, v_b_axis, grid, spacing);
    const CVector t = sensing_target(part, l_s, v_b_axis, grid, spacing, params.reference);
    const double t_norm = t.norm();

    const double smax = Eigen::JacobiSVD<CMatrix>(a).singularValues()(0);
    const double mu = params.mu_scale / (smax * smax);

    SensingDesign best{init, (a * init - t).norm() / t_norm, 0};
    CVector g = init;
    double prev = best.residual;
    for (int k = 1; k <= params.max_iters; ++k)
    {
        g = project_unit_modulus(g + mu * a.adjoint() * (t - a * g));
        const double res = (a * g - t).norm() / t_norm;
        if (res < best.residual)
            best = {g, res, k};
        if (std::abs(prev - res) <= params.tol * std::max(prev, 1e-300))
            break;
        prev = res;
    }
    return best;
}

/// Closed-form communication phases conj(r_xc(v_b)) .* r_xc(v_u) on the last
/// c_s of n_axis elements.
inline CVector design_comm_phases(int c_s, int n_axis, double v_b_axis, double v_u_axis,
                                  double spacing = default_ris_spacing)
{
    require(c_s >= 0 && c_s <= n_axis, "design_comm_phases: C_s out of range");
    const CVector rb = ris_axis_steering(v_b_axis, n_axis, spacing).tail(c_s);
    const CVector ru = ris_axis_steering(v_u_axis, n_axis, spacing).tail(c_s);
    return rb.conjugate().cwiseProduct(ru);
}

/// |r_xc^H(v_u) diag(h) r_xc(v_b)| over the last c_s elements.
inline double comm_gain(const CVector &h, int n_axis, double v_b_axis, double v_u_axis,
                        double spacing = default_ris_spacing)
{
    const auto c_s = h.size();
    const CVector rb = ris_axis_steering(v_b_axis, n_axis, spacing).tail(c_s);
    const CVector ru = ris_axis_steering(v_u_axis, n_axis, spacing).tail(c_s);
    return std::abs((ru.adjoint() * h.asDiagonal() * rb)(0, 0));
}

/// Matched pencil beam conj(r(v_in)) .* r(v_out) over n elements.
inline CVector matched_beam(double v_in, double v_out, int n, double spacing = default_ris_spacing)
{
    return ris_axis_steering(v_in, n, spacing).conjugate().cwiseProduct(ris_axis_steering(v_out, n, spacing));
}

struct AxisBeam
{
    CVector g; // sensing part, first L_s elements
    CVector h; // communication part, last C_s elements
    CVector w; // [g; h]
    double residual = 0.0;
};

inline AxisBeam concat_beam(const CVector &g, const CVector &h, double residual)
{
    AxisBeam b{g, h, CVector(g.size() + h.size()), residual};
    b.w << g, h;
    return b;
}

// Stages and codebook ------------------------------------------------------

/// Omega_s = W_x (x) W_y; column (a-1) 2^s + b is w_{x,a} (x) w_{y,b}.
inline CMatrix assemble_stage(const CMatrix &wx, const CMatrix &wy)
{
    require_dims(wx.cols() == wy.cols(), "assemble_stage: axis codebooks differ in beam count");
    const auto nb = wx.cols();
    CMatrix out(wx.rows() * wy.rows(), nb * nb);
    for (Eigen::Index a = 0; a < nb; ++a)
        for (Eigen::Index b = 0; b < nb; ++b)
            out.col(a * nb + b) = kron(wx.col(a), wy.col(b));
    return out;
}

inline CMatrix assemble_stage(const CMatrix &w) { return assemble_stage(w, w); }

struct StageBook
{
    int stage = 1;
    int l_s = 0;
    int c_s = 0;
    CMatrix wx; // n_axis x 2^s
    CMatrix wy;
    std::vector<double> residual_x;
    std::vector<double> residual_y;

    int beams_per_axis() const { return static_cast<int>(wx.cols()); }

    /// One-based 2-D beam index -> one-based axis partition pair (a, b).
    std::pair<int, int> axis_pair(int beam) const
    {
        const int n = beams_per_axis();
        return {(beam - 1) / n + 1, (beam - 1) % n + 1};
    }

    PhaseProfile beam(int k) const
    {
        const auto [a, b] = axis_pair(k);
        return {wx.col(a - 1), wy.col(b - 1)};
    }

    /// Beam k as seen by the radar path; with a sensing aperture the last C_s
    /// elements of each axis are zero.
    PhaseProfile radar_beam(int k, RadarAperture aperture) const
    {
        PhaseProfile p = beam(k);
        if (aperture == RadarAperture::sensing && l_s < p.wx.size())
        {
            p.wx.tail(p.wx.size() - l_s).setZero();
            p.wy.tail(p.wy.size() - l_s).setZero();
        }
        return p;
    }
};

struct DesignQuality
{
    double on_fraction = 0.0;  // mean on-partition |response| / L_s
    double off_fraction = 0.0; // mean off-partition |response| / L_s
    bool passed = false;
};

struct Codebook
{
    int grid_size = 0;
    int n_ris = 0;
    double spacing = default_ris_spacing;
    DirectionCosine v_b;
    DirectionCosine v_u;
    std::vector<int> schedule;
    std::vector<StageBook> stages;
    std::vector<std::string> warnings;

    int n_axis() const { return integer_sqrt(n_ris); }
    int n_stages() const { return static_cast<int>(stages.size()); }
    const StageBook &stage(int s) const { return stages.at(static_cast<std::size_t>(s - 1)); }
};

struct QualityGates
{
    double min_on = 0.7;
    double max_off = 0.25;
};

/// Mean on/off-partition response of a sensing part on the design grid.
inline DesignQuality mask_fidelity(const CVector &g, const PartitionSpec &part, double v_b, const RVector &grid,
                                   double spacing, const QualityGates &gates = {})
{
    const int l_s = static_cast<int>(g.size());
    const RVector mag = (sensing_design_matrix(l_s, v_b, grid, spacing) * g).cwiseAbs();
    double on = 0.0, off = 0.0;
    for (Eigen::Index j = 0; j < grid.size(); ++j)
        (part.contains(static_cast<int>(j) + 1) ? on : off) += mag[j];
    DesignQuality q;
    q.on_fraction = on / part.size() / l_s;
    const auto n_off = grid.size() - part.size();
    q.off_fraction = n_off > 0 ? off / static_cast<double>(n_off) / l_s : 0.0;
    q.passed = q.on_fraction >= gates.min_on && q.off_fraction <= gates.max_off;
    return q;
}

/// |r^H(v) diag(w) r(v_b)| for each v in `scan`.
inline RVector axis_pattern(const CVector &w, double v_b, const RVector &scan, double spacing = default_ris_spacing)
{
    RVector out(scan.size());
    for (Eigen::Index k = 0; k < scan.size(); ++k)
        out[k] = std::abs(axis_response(w, scan[k], v_b, spacing));
    return out;
}

/// Width (in direction cosine) of the region where |response|^2 >= max/2,
/// sampled on n_points over [-1, 1].
inline double half_power_width(const CVector &w, double v_b, double spacing = default_ris_spacing, int n_points = 4001)
{
    const RVector scan = RVector::LinSpaced(n_points, -1.0, 1.0);
    const RVector p = axis_pattern(w, v_b, scan, spacing).array().square();
    const double peak = p.maxCoeff();
    const auto above = (p.array() >= 0.5 * peak).count();
    return static_cast<double>(above) * 2.0 / (n_points - 1);
}

/// Warm start: matched beam towards the partition midpoint plus seeded phase jitter.
inline CVector sensing_init(const PartitionSpec &part, int l_s, double v_b, const RVector &grid, double spacing,
                            double jitter, Rng &rng)
{
    double mid = 0.0;
    for (int k = part.first; k <= part.last; ++k)
        mid += grid[k - 1];
    mid /= part.size();
    CVector g = matched_beam(v_b, mid, l_s, spacing);
    for (Eigen::Index k = 0; k < g.size(); ++k)
        g[k] *= std::polar(1.0, jitter * rng.normal());
    return g;
}

struct CodebookOptions
{
    SolverParams solver;
    QualityGates gates;
    std::uint64_t seed = 1;
};

/// Design every axis beam of every stage. Quality-gate failures are recorded
/// as warnings, not errors.
inline Codebook build_codebook(const ScenarioConfig &cfg, const std::vector<int> &schedule,
                               const CodebookOptions &opts = {})
{
    cfg.validate();
    const int d = cfg.grid_size;
    const int n_stages = cfg.n_stages();
    const int n_axis = cfg.ris_axis();
    require(static_cast<int>(schedule.size()) == n_stages, "build_codebook: schedule length must equal log2(D)");
    for (int l : schedule)
        require(l >= 1 && l <= n_axis, "build_codebook: each L_s must lie in [1, sqrt(N_r)]");

    const RVector grid = cosine_grid(d);
    Codebook cb{d, cfg.n_ris, cfg.ris_spacing, cfg.v_b, cfg.v_u, schedule, {}, {}};

    for (int s = 1; s <= n_stages; ++s)
    {
        StageBook sb;
        sb.stage = s;
        sb.l_s = schedule[static_cast<std::size_t>(s - 1)];
        sb.c_s = n_axis - sb.l_s;
        const int nb = 1 << s;
        sb.wx.resize(n_axis, nb);
        sb.wy.resize(n_axis, nb);

        for (int axis = 0; axis < 2; ++axis)
        {
            const double vb = axis == 0 ? cfg.v_b.vx : cfg.v_b.vy;
            const double vu = axis == 0 ? cfg.v_u.vx : cfg.v_u.vy;
            const CVector h = design_comm_phases(sb.c_s, n_axis, vb, vu, cfg.ris_spacing);
            auto &w = axis == 0 ? sb.wx : sb.wy;
            auto &res = axis == 0 ? sb.residual_x : sb.residual_y;
            for (int i = 1; i <= nb; ++i)
            {
                Rng rng(derive_seed(opts.seed, {static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(i),
                                                static_cast<std::uint64_t>(axis)}));
                const auto part = partition_indices(s, i, d);
                const CVector init =
                    sensing_init(part, sb.l_s, vb, grid, cfg.ris_spacing, opts.solver.init_perturbation, rng);
                const auto des = design_sensing_phases(s, i, sb.l_s, vb, grid, opts.solver, init, cfg.ris_spacing);
                w.col(i - 1) = concat_beam(des.g, h, des.residual).w;
                res.push_back(des.residual);

                const auto q = mask_fidelity(des.g, part, vb, grid, cfg.ris_spacing, opts.gates);
                if (!q.passed)
                    cb.warnings.push_back("stage " + std::to_string(s) + (axis == 0 ? " x" : " y") + " beam " +
                                          std::to_string(i) + ": on=" + std::to_string(q.on_fraction) +
                                          " off=" + std::to_string(q.off_fraction));
            }
        }
        cb.stages.push_back(std::move(sb));
    }
    return cb;
}

/// Idealised search codebook for checking the search logic. At stage s each
/// axis beam is the matched beam towards its partition midpoint formed by the
/// first min(2^s, sqrt(N_r)) elements; the remaining elements are switched off
/// (zero), so these beams are deliberately not unit modulus.
inline Codebook matched_oracle_codebook(const ScenarioConfig &cfg)
{
    cfg.validate();
    const int d = cfg.grid_size;
    const int n_axis = cfg.ris_axis();
    const RVector grid = cosine_grid(d);
    Codebook cb{d, cfg.n_ris, cfg.ris_spacing, cfg.v_b, cfg.v_u, {}, {}, {}};
    for (int s = 1; s <= cfg.n_stages(); ++s)
    {
        StageBook sb;
        sb.stage = s;
        sb.l_s = std::min(1 << s, n_axis);
        sb.c_s = 0;
        const int nb = 1 << s;
        sb.wx = CMatrix::Zero(n_axis, nb);
        sb.wy = CMatrix::Zero(n_axis, nb);
        for (int i = 1; i <= nb; ++i)
        {
            const auto part = partition_indices(s, i, d);
            const double mid = 0.5 * (grid[part.first - 1] + grid[part.last - 1]);
            sb.wx.col(i - 1).head(sb.l_s) = matched_beam(cfg.v_b.vx, mid, sb.l_s, cfg.ris_spacing);
            sb.wy.col(i - 1).head(sb.l_s) = matched_beam(cfg.v_b.vy, mid, sb.l_s, cfg.ris_spacing);
            sb.residual_x.push_back(0.0);
            sb.residual_y.push_back(0.0);
        }
        cb.schedule.push_back(sb.l_s);
        cb.stages.push_back(std::move(sb));
    }
    return cb;
}

/// Full-aperture comm-only configuration (RIS-assisted link without sensing).
inline PhaseProfile comm_only_profile(const ScenarioConfig &cfg)
{
    const int n = cfg.ris_axis();
    return {design_comm_phases(n, n, cfg.v_b.vx, cfg.v_u.vx, cfg.ris_spacing),
            design_comm_phases(n, n, cfg.v_b.vy, cfg.v_u.vy, cfg.ris_spacing)};
}

} // namespace risjrc
