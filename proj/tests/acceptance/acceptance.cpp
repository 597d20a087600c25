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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails. Reference values are computed here with
// explicit loops, independently of the library code paths under test.

#include "risjrc/risjrc.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>
#include <sstream>

using namespace risjrc;

namespace
{

constexpr double identity_tol = 1e-9;
constexpr double delta = 0.05;
constexpr std::uint64_t master_seed = 20240601;

struct Outcome
{
    bool pass = false;
    std::string detail;
};

std::string fmt(const char *f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), f, v);
    return buf;
}

double rel_err(const CMatrix &got, const CMatrix &want)
{
    const double den = want.norm();
    return den > 0.0 ? (got - want).norm() / den : got.norm();
}

cplx ref_axis(double spacing, int n, double v) { return std::polar(1.0, 2.0 * pi * spacing * n * v); }

/// r^H(v_scan) diag(w) r(v_inc) by explicit summation.
cplx ref_response(const CVector &w, double v_scan, double v_inc, double spacing)
{
    cplx acc{0.0, 0.0};
    for (int n = 0; n < w.size(); ++n)
        acc += std::conj(ref_axis(spacing, n, v_scan)) * w[n] * ref_axis(spacing, n, v_inc);
    return acc;
}

CVector random_phases(int n, Rng &rng)
{
    CVector w(n);
    for (int k = 0; k < n; ++k)
        w[k] = std::polar(1.0, 2.0 * pi * rng.uniform());
    return w;
}

// Desk-scale localization scenario shared by criteria 4, 5 and 9.
Settings desk_settings()
{
    Settings st;
    st.scenario.n_ris = 32 * 32;
    st.scenario.grid_size = 16;
    st.schedule = {4, 8, 16, 16};
    st.plan.unit = PowerUnit::detection_snr_db;
    st.plan.delta = delta;
    st.plan.t_max = 400;
    st.plan.trials = 10000;
    st.plan.calibration_trials = 10000;
    st.plan.seed = master_seed;
    st.plan.schedule_source = ScheduleSource::calibrated;
    st.plan.target = TargetMode::random_grid;
    st.plan.threads = 1;
    return st;
}

Settings criterion4_settings()
{
    Settings st = desk_settings();
    st.plan.kind = ExperimentKind::overall_error;
    st.plan.power_sweep = {25.0};
    return st;
}

std::string run_to_csv(const Settings &st, const Codebook &cb)
{
    std::ostringstream os;
    write_csv(os, run_experiment(st, cb));
    return os.str();
}

// 1 ------------------------------------------------------------------------------

Outcome analytic_identities()
{
    Rng rng(derive_seed(master_seed, {1}));
    double kron_err = 0.0, kr_err = 0.0, row_err = 0.0, comm_err = 0.0, fact_err = 0.0;

    for (int rep = 0; rep < 20; ++rep)
    {
        const int n = 8 + 4 * (rep % 4);
        const DirectionCosine v{2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0};
        const double sp = rep % 2 ? 0.25 : 0.5;
        CVector want(n * n);
        for (int p = 0; p < n; ++p)
            for (int q = 0; q < n; ++q)
                want[p * n + q] = std::polar(1.0, 2.0 * pi * sp * (p * v.vx + q * v.vy));
        kron_err = std::max(kron_err, rel_err(ris_full_steering(v, n * n, sp), want));
    }

    for (int rep = 0; rep < 20; ++rep)
    {
        const CMatrix a = complex_normal_matrix(5, 4, 1.0, rng);
        const CMatrix b = complex_normal_matrix(4, 6, 1.0, rng);
        const CVector g = complex_normal_matrix(4, 1, 1.0, rng);
        const CMatrix prod = a * g.asDiagonal() * b;
        const CVector vec = prod.reshaped();
        kr_err = std::max(kr_err, rel_err(khatri_rao(b.transpose(), a) * g, vec));

        const int l = 4 + rep;
        const double vb = 2.0 * rng.uniform() - 1.0;
        const RVector grid = cosine_grid(32);
        const CVector gg = random_phases(l, rng);
        CVector direct(grid.size());
        for (Eigen::Index j = 0; j < grid.size(); ++j)
            direct[j] = ref_response(gg, grid[j], vb, default_ris_spacing);
        row_err = std::max(row_err, rel_err(sensing_design_matrix(l, vb, grid, default_ris_spacing) * gg, direct));
    }

    for (int c_s = 1; c_s <= 60; c_s += 7)
    {
        const int n_axis = 64;
        const double vb = 2.0 * rng.uniform() - 1.0, vu = 2.0 * rng.uniform() - 1.0;
        CVector w = CVector::Zero(n_axis);
        w.tail(c_s) = design_comm_phases(c_s, n_axis, vb, vu);
        const double gain = std::abs(ref_response(w, vu, vb, default_ris_spacing));
        comm_err = std::max(comm_err, std::abs(gain - c_s) / c_s);
    }

    ScenarioConfig cfg;
    cfg.n_ris = 16 * 16;
    for (int rep = 0; rep < 100; ++rep)
    {
        const Fading f = draw_fading(rng);
        const ChannelGains gains = channel_gains(cfg, f);
        const DirectionCosine vt{2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0};
        const PhaseProfile omega{random_phases(16, rng), random_phases(16, rng)};
        const auto blk = make_transmit_block(cfg, 8, rng);
        const ChannelSet ch = build_channels(cfg, f);
        const CMatrix full = radar_receive(blk, omega, target_response(vt, gains.gamma, cfg.n_ris), ch.h_br, 0.0, rng);

        const cplx cx = std::pow(ref_response(omega.wx, vt.vx, cfg.v_b.vx, cfg.ris_spacing), 2);
        const cplx cy = std::pow(ref_response(omega.wy, vt.vy, cfg.v_b.vy, cfg.ris_spacing), 2);
        CMatrix bmat(cfg.n_b, cfg.n_b);
        const double s = std::sin(cfg.theta_r.radians());
        for (int p = 0; p < cfg.n_b; ++p)
            for (int q = 0; q < cfg.n_b; ++q)
                bmat(p, q) = gains.g_br * gains.g_br * std::polar(1.0, -pi * p * s) * std::polar(1.0, -pi * q * s);
        fact_err = std::max(fact_err, rel_err(full, gains.gamma * cx * cy * bmat * blk.x));
    }

    const double worst = std::max({kron_err, kr_err, row_err, comm_err, fact_err});
    return {worst <= identity_tol, "kron " + fmt("%.1e", kron_err) + ", khatri-rao " + fmt("%.1e", kr_err) +
                                       ", design rows " + fmt("%.1e", row_err) + ", comm gain " +
                                       fmt("%.1e", comm_err) + ", echo factorization " + fmt("%.1e", fact_err) +
                                       " (tol 1e-9)"};
}

// 2 ------------------------------------------------------------------------------

Outcome noiseless_oracle()
{
    ScenarioConfig cfg;
    cfg.n_ris = 16 * 16;
    cfg.grid_size = 16;
    cfg.fading = FadingModel::none;
    cfg.sigma_b2_dbm = -std::numeric_limits<double>::infinity();
    const Codebook cb = matched_oracle_codebook(cfg);
    const RVector grid = cosine_grid(cfg.grid_size);
    const SnapshotSchedule sched = uniform_schedule(cfg.n_stages(), 1);

    int hier_ok = 0, exh_ok = 0, agree = 0, total = 0;
    for (int i = 1; i <= cfg.grid_size; ++i)
        for (int j = 1; j <= cfg.grid_size; ++j)
        {
            Rng rng(derive_seed(master_seed, {2, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j)}));
            const RadarScene sc = make_radar_scene(cfg, Fading{}, {grid[i - 1], grid[j - 1]}, RadarModel::full);
            const auto h = hierarchical_localize(sc, cb, sched, rng);
            const auto e = exhaustive_localize(sc, rng, 1);
            const std::pair<int, int> truth{i, j};
            hier_ok += h.estimate == truth;
            exh_ok += e.estimate == truth;
            agree += h.estimate == e.estimate;
            ++total;
        }
    return {hier_ok == total && exh_ok == total && agree == total,
            "hierarchical " + std::to_string(hier_ok) + "/" + std::to_string(total) + ", exhaustive " +
                std::to_string(exh_ok) + "/" + std::to_string(total) + ", agreement " + std::to_string(agree) +
                "/" + std::to_string(total)};
}

// 3 ------------------------------------------------------------------------------

Outcome transmission_counts()
{
    ScenarioConfig cfg;
    cfg.n_ris = 32 * 32;
    const SnapshotSchedule sched{{36, 1, 1, 1, 1}, SnapshotSchedule::Source::manual};
    const Codebook cb = build_codebook(cfg, {4, 8, 16, 16, 16});
    Rng rng(derive_seed(master_seed, {3}));
    const RadarScene sc = make_radar_scene(cfg, draw_fading(rng), cfg.v_t);
    const auto h = hierarchical_localize(sc, cb, sched, rng);
    const auto e = exhaustive_localize(sc, rng, 1);
    const bool ok = sched.transmissions() == 160 && h.total_transmissions == 160 && e.total_transmissions == 1024;
    return {ok, "schedule (36,1,1,1,1): " + std::to_string(sched.transmissions()) + " planned, " +
                    std::to_string(h.total_transmissions) + " executed; exhaustive D=32: " +
                    std::to_string(e.total_transmissions)};
}

// 4 ------------------------------------------------------------------------------

Outcome stagewise_error(const ResultTable &t)
{
    const int n_s = 4;
    bool ok = true;
    std::string detail = "T =";
    for (int s = 1; s <= n_s; ++s)
    {
        const std::string tag = "stage_0" + std::to_string(s);
        const auto *snap = t.find("snapshots", tag, 0);
        ok = ok && snap && snap->status == "ok";
        detail += (s > 1 ? "," : " (") + (snap ? format_double(snap->value) : "?");
    }
    detail += ");";
    for (int s = 1; s <= n_s; ++s)
    {
        const auto *r = t.find("stage_error", "stage_0" + std::to_string(s), 0);
        if (!r)
            return {false, "missing stage_error row"};
        ok = ok && r->value <= delta + r->ci_half_width;
        detail += " e" + std::to_string(s) + "=" + fmt("%.4f", r->value) + "+-" + fmt("%.4f", r->ci_half_width);
    }
    const auto *o = t.find("overall_error", "all", 0);
    if (!o)
        return {false, "missing overall_error row"};
    ok = ok && o->value <= n_s * delta + o->ci_half_width;
    detail += "; overall " + fmt("%.4f", o->value) + " <= " + fmt("%.2f", n_s * delta) + "+" +
              fmt("%.4f", o->ci_half_width);
    return {ok, detail};
}

// 5 ------------------------------------------------------------------------------

Outcome snapshot_monotonicity(const Codebook &cb)
{
    Settings st = desk_settings();
    st.plan.kind = ExperimentKind::snapshots;
    st.plan.power_sweep = {20.0, 25.0, 30.0, 35.0, 40.0};
    const ResultTable t = run_experiment(st, cb);
    const int n_p = static_cast<int>(st.plan.power_sweep.size());
    const int n_s = cb.n_stages();

    // Infeasible points count as +infinity snapshots.
    auto snapshots = [&](int p, int s) {
        const auto *r = t.find("snapshots", "stage_0" + std::to_string(s), p);
        return !r || r->status != "ok" ? std::numeric_limits<double>::infinity() : r->value;
    };
    bool ok = true;
    std::string detail;
    for (int p = 0; p < n_p; ++p)
    {
        ok = ok && snapshots(p, 1) >= snapshots(p, 2) && snapshots(p, 2) >= snapshots(p, 3);
        detail += (p ? " " : "") + fmt("%g", st.plan.power_sweep[static_cast<std::size_t>(p)]) + "dB:(";
        for (int s = 1; s <= n_s; ++s)
            detail += (s > 1 ? "," : "") + fmt("%g", snapshots(p, s));
        detail += ")";
        if (p > 0)
            for (int s = 1; s <= n_s; ++s)
                ok = ok && snapshots(p, s) <= snapshots(p - 1, s);
    }
    for (int s = 3; s <= n_s; ++s)
        ok = ok && snapshots(n_p - 1, s) == 1.0;
    return {ok, detail};
}

// 6 ------------------------------------------------------------------------------

Outcome se_ordering()
{
    Settings st;
    st.plan.kind = ExperimentKind::se_sweep;
    st.plan.unit = PowerUnit::link_snr_db;
    st.plan.power_sweep = {-10.0, 0.0, 10.0, 20.0, 30.0};
    st.plan.trials = 2000;
    st.plan.seed = master_seed;
    st.plan.threads = 1;
    const Codebook cb = build_codebook(st.scenario, st.schedule, st.codebook);
    const ResultTable t = run_experiment(st, cb);
    bool ok = true;
    std::string detail;
    const int top = static_cast<int>(st.plan.power_sweep.size()) - 1;
    for (int p = 0; p <= top; ++p)
    {
        const double bench = t.find("se", "benchmark", p)->value;
        const double s1 = t.find("se", "stage_01", p)->value;
        const double s5 = t.find("se", "stage_05", p)->value;
        const double none = t.find("se", "no_ris", p)->value;
        ok = ok && bench >= s1 && s1 >= s5 && s5 >= none && bench - s1 <= 1.0;
        if (p == top)
        {
            ok = ok && bench - none >= 2.0;
            detail = "top point: benchmark " + fmt("%.2f", bench) + ", stage 1 " + fmt("%.2f", s1) + ", stage 5 " +
                     fmt("%.2f", s5) + ", no RIS " + fmt("%.2f", none) + " bit/s/Hz";
        }
    }
    return {ok, detail};
}

// 7 ------------------------------------------------------------------------------

Outcome codebook_quality()
{
    Settings st;
    st.scenario.n_ris = 32 * 32;
    st.plan.kind = ExperimentKind::codebook_report;
    const Codebook cb = build_codebook(st.scenario, st.schedule, st.codebook);
    const ResultTable t = run_experiment(st, cb);
    std::array<int, 6> fails{}, beams{};
    for (const auto &r : t.rows)
        if (r.metric == "mask_pass")
        {
            const int s = std::stoi(r.tag.substr(6, 2));
            ++beams[static_cast<std::size_t>(s)];
            fails[static_cast<std::size_t>(s)] += r.value < 0.5;
        }
    double w[4];
    for (int s = 1; s <= 3; ++s)
        w[s] = t.find("mean_half_power_width", "stage_0" + std::to_string(s), 0)->value;
    const bool narrowing = w[1] > w[2] && w[2] > w[3];
    bool all_pass = true;
    std::string detail = "gate failures per stage:";
    for (int s = 1; s <= 5; ++s)
    {
        all_pass = all_pass && fails[static_cast<std::size_t>(s)] == 0;
        detail += " " + std::to_string(fails[static_cast<std::size_t>(s)]) + "/" +
                  std::to_string(beams[static_cast<std::size_t>(s)]);
    }
    detail += "; half-power widths " + fmt("%.3f", w[1]) + " > " + fmt("%.3f", w[2]) + " > " + fmt("%.3f", w[3]) +
              (narrowing ? "" : " (not decreasing)");
    return {all_pass && narrowing, detail};
}

// 8 ------------------------------------------------------------------------------

Outcome snapshot_rule_literal()
{
    const ScenarioConfig cfg;
    const auto eta = link_pathloss(cfg);
    const auto lit = snapshot_rule(delta, cfg.p_r, 4, cfg.n_b, eta.br, eta.rt, cfg.sigma_b2());
    const bool kappa_ok = std::abs(lit.kappa - 1.9333) <= 1e-4;
    const bool flagged = lit.product < 0.0 && !lit.physical && !lit.snapshots;

    // Pick p_r so the L=8 count is moderate; the L=4 count must then be 256x larger.
    const auto ref = snapshot_rule(delta, 1.0, 8, cfg.n_b, eta.br, eta.rt, cfg.sigma_b2(), SnapshotRuleVariant::magnitude);
    const double p_r = ref.product / 1000.5;
    const auto m4 = snapshot_rule(delta, p_r, 4, cfg.n_b, eta.br, eta.rt, cfg.sigma_b2(), SnapshotRuleVariant::magnitude);
    const auto m8 = snapshot_rule(delta, p_r, 8, cfg.n_b, eta.br, eta.rt, cfg.sigma_b2(), SnapshotRuleVariant::magnitude);
    bool scaling = m4.snapshots && m8.snapshots && *m4.snapshots > 0.0 && *m8.snapshots > 0.0;
    if (scaling)
        scaling = std::abs(*m4.snapshots - 256.0 * *m8.snapshots) <= 256.0 && *m4.snapshots > *m8.snapshots;
    return {kappa_ok && flagged && scaling,
            "kappa " + fmt("%.6f", lit.kappa) + ", literal product " + fmt("%.3e", lit.product) +
                (flagged ? " (flagged non-physical)" : " (not flagged)") + ", magnitude T(4)=" +
                fmt("%.0f", m4.snapshots.value_or(-1)) + " T(8)=" + fmt("%.0f", m8.snapshots.value_or(-1))};
}

// 9 ------------------------------------------------------------------------------

Outcome determinism(const std::string &first, const Codebook &cb)
{
    Settings st = criterion4_settings();
    const std::string again = run_to_csv(st, cb);
    st.plan.threads = 4;
    const std::string threaded = run_to_csv(st, cb);
    const bool ok = first == again && first == threaded && !first.empty();
    return {ok, std::string("same seed ") + (first == again ? "byte-identical" : "DIFFERENT") + ", 4 threads vs 1 " +
                    (first == threaded ? "byte-identical" : "DIFFERENT") + " (" + std::to_string(first.size()) +
                    " bytes)"};
}

} // namespace

int main()
{
    int failed = 0;
    auto report = [&](int id, const char *name, const std::function<Outcome()> &fn) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try
        {
            o = fn();
        }
        catch (const std::exception &e)
        {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failed += !o.pass;
        std::printf("[%s] criterion %d: %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs);
        std::fflush(stdout);
    };

    const Settings desk = criterion4_settings();
    const Codebook desk_cb = build_codebook(desk.scenario, desk.schedule, desk.codebook);
    std::string c4_csv;

    report(1, "analytic identities", analytic_identities);
    report(2, "noiseless oracle localization", noiseless_oracle);
    report(3, "transmission counts", transmission_counts);
    report(4, "stagewise error control", [&] {
        const ResultTable t = run_experiment(desk, desk_cb);
        std::ostringstream os;
        write_csv(os, t);
        c4_csv = os.str();
        return stagewise_error(t);
    });
    report(5, "snapshot monotonicity", [&] { return snapshot_monotonicity(desk_cb); });
    report(6, "spectral efficiency ordering", se_ordering);
    report(7, "codebook design quality", codebook_quality);
    report(8, "closed-form snapshot rule", snapshot_rule_literal);
    report(9, "determinism", [&] { return determinism(c4_csv, desk_cb); });

    std::printf("%d of 9 criteria failed\n", failed);
    return failed == 0 ? 0 : 1;
}
