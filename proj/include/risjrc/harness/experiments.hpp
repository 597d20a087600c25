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

#include "risjrc/comms.hpp"
#include "risjrc/harness/config.hpp"
#include "risjrc/localization.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <ostream>
#include <tuple>

namespace risjrc
{

struct ResultRow
{
    std::string experiment;
    int point = 0;
    double power = std::numeric_limits<double>::quiet_NaN(); // sweep value, plan units
    double power_dbm = std::numeric_limits<double>::quiet_NaN();
    std::string metric;
    std::string tag;
    double value = 0.0;
    double ci_half_width = 0.0;
    long trials = 0;
    std::string status = "ok";
};

/// Rows are only ever appended; seed and hash apply to every row.
struct ResultTable
{
    std::uint64_t seed = 0;
    std::string config_hash;
    std::string power_unit = "dBm";
    std::vector<ResultRow> rows;

    void append(ResultRow r) { rows.push_back(std::move(r)); }

    const ResultRow *find(const std::string &metric, const std::string &tag, int point) const
    {
        for (const auto &r : rows)
            if (r.metric == metric && r.tag == tag && r.point == point)
                return &r;
        return nullptr;
    }
};

/// Half-width of the 95% Wilson score interval for k successes in n trials.
inline double wilson_half_width(long k, long n, double z = 1.959963984540054)
{
    if (n <= 0)
        return 0.0;
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(k) / nn;
    const double z2 = z * z;
    return z / (1.0 + z2 / nn) * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
}

// CSV ----------------------------------------------------------------------------

inline const char *csv_header =
    "experiment,point,power,power_unit,power_dbm,metric,tag,value,ci_half_width,trials,status,seed,config_hash";

inline std::string csv_field(const std::string &s)
{
    if (s.find_first_of(",\"\r\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s)
    {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + '"';
}

inline std::string csv_number(double v) { return std::isnan(v) ? std::string() : format_double(v); }

/// Rows sorted by (experiment, point, metric, tag) so the output does not
/// depend on the order in which work finished.
inline std::vector<ResultRow> sorted_rows(const ResultTable &t)
{
    std::vector<ResultRow> rows = t.rows;
    std::stable_sort(rows.begin(), rows.end(), [](const ResultRow &a, const ResultRow &b) {
        return std::tie(a.experiment, a.point, a.metric, a.tag) < std::tie(b.experiment, b.point, b.metric, b.tag);
    });
    return rows;
}

inline void write_csv(std::ostream &os, const ResultTable &t)
{
    os << csv_header << "\r\n";
    const std::string seed = std::to_string(t.seed);
    for (const auto &r : sorted_rows(t))
        os << csv_field(r.experiment) << ',' << r.point << ',' << csv_number(r.power) << ','
           << csv_field(t.power_unit) << ',' << csv_number(r.power_dbm) << ',' << csv_field(r.metric) << ','
           << csv_field(r.tag) << ',' << csv_number(r.value) << ',' << csv_number(r.ci_half_width) << ','
           << r.trials << ',' << csv_field(r.status) << ',' << seed << ',' << csv_field(t.config_hash) << "\r\n";
}

inline void emit_csv(const ResultTable &t, const std::string &path)
{
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw std::runtime_error("emit_csv: cannot open '" + path + "' for writing");
    write_csv(os, t);
    os.flush();
    if (!os)
        throw std::runtime_error("emit_csv: write to '" + path + "' failed");
}

// Experiments -------------------------------------------------------------------

namespace detail
{

// Stream families; one per (experiment, phase) so no stream is ever reused.
enum StreamFamily : std::uint64_t
{
    stream_calibration = 1,
    stream_localization = 2,
    stream_se = 3,
};

inline StreamKey stream_key(const ExperimentPlan &plan, StreamFamily family, int point)
{
    return {plan.seed, (static_cast<std::uint64_t>(plan.kind) + 1) * 16 + family, static_cast<std::uint64_t>(point)};
}

inline std::string stage_tag(int s)
{
    char buf[24];
    std::snprintf(buf, sizeof(buf), "stage_%02d", s);
    return buf;
}

} // namespace detail

struct PowerPoint
{
    int index = 0;
    double value = 0.0; // plan units
    double watts = 0.0;
    ScenarioConfig cfg; // scenario with this total power, split ratio preserved
};

inline std::vector<PowerPoint> power_points(const Settings &st)
{
    std::vector<PowerPoint> out;
    for (std::size_t k = 0; k < st.plan.power_sweep.size(); ++k)
    {
        PowerPoint p;
        p.index = static_cast<int>(k);
        p.value = st.plan.power_sweep[k];
        p.watts = sweep_power_watts(st.scenario, st.schedule, st.plan.unit, p.value);
        p.cfg = st.scenario.with_total_power(p.watts);
        out.push_back(p);
    }
    return out;
}

/// Snapshot schedule chosen for one power point.
struct ScheduleChoice
{
    SnapshotSchedule schedule;
    std::vector<CalibrationResult> calibration; // calibrated source only
    std::vector<std::optional<double>> rule;   // rule source only, unclamped T_s
    bool feasible = true;
};

inline ScheduleChoice choose_schedule(const Settings &st, const Codebook &cb, const PowerPoint &pt)
{
    const auto &plan = st.plan;
    const int n_s = cb.n_stages();
    ScheduleChoice ch;
    switch (plan.schedule_source)
    {
    case ScheduleSource::manual:
        ch.schedule = {plan.manual_snapshots, SnapshotSchedule::Source::manual};
        break;
    case ScheduleSource::rule:
    {
        const auto eta = link_pathloss(pt.cfg);
        ch.schedule.source = SnapshotSchedule::Source::literal_rule;
        for (int s = 1; s <= n_s; ++s)
        {
            const auto r = snapshot_rule(plan.delta, pt.cfg.p_r, cb.stage(s).l_s, pt.cfg.n_b, eta.br, eta.rt,
                                         pt.cfg.sigma_b2(), SnapshotRuleVariant::magnitude);
            ch.rule.push_back(r.snapshots);
            if (!r.snapshots || *r.snapshots > plan.t_max)
            {
                ch.feasible = false;
                ch.schedule.snapshots.push_back(plan.t_max);
            }
            else
                ch.schedule.snapshots.push_back(static_cast<int>(*r.snapshots));
        }
        break;
    }
    case ScheduleSource::calibrated:
    {
        ch.schedule.source = SnapshotSchedule::Source::calibrated;
        const EnsembleSpec ens{plan.target, plan.threads};
        const StreamKey key = detail::stream_key(plan, detail::stream_calibration, pt.index);
        for (int s = 1; s <= n_s; ++s)
        {
            auto res = calibrate_snapshots(s, plan.delta, pt.cfg, cb, ens, key, plan.calibration_trials, plan.t_max);
            if (!res.feasible())
                ch.feasible = false;
            ch.schedule.snapshots.push_back(res.snapshots.value_or(plan.t_max));
            ch.calibration.push_back(std::move(res));
        }
        break;
    }
    }
    return ch;
}

namespace detail
{

inline ResultRow point_row(const ExperimentPlan &plan, const PowerPoint &pt, std::string metric, std::string tag,
                           double value, double ci, long trials, std::string status = "ok")
{
    return {to_string(plan.kind), pt.index, pt.value, watts_to_dbm(pt.watts), std::move(metric),
            std::move(tag),       value,    ci,       trials,                 std::move(status)};
}

inline void append_localization(ResultTable &t, const ExperimentPlan &plan, const PowerPoint &pt,
                                const LocalizationSummary &sum, int n_s, const std::string &status)
{
    for (int s = 1; s <= n_s; ++s)
    {
        const auto k = static_cast<std::size_t>(s - 1);
        t.append(point_row(plan, pt, "stage_error", stage_tag(s), sum.stage_error(s),
                           wilson_half_width(sum.stage_errors[k], sum.stage_trials[k]), sum.stage_trials[k], status));
    }
    t.append(point_row(plan, pt, "overall_error", "all", sum.overall_error(),
                       wilson_half_width(sum.failures, sum.trials), sum.trials, status));
}

inline void append_schedule(ResultTable &t, const ExperimentPlan &plan, const PowerPoint &pt,
                            const ScheduleChoice &ch)
{
    for (std::size_t k = 0; k < ch.schedule.snapshots.size(); ++k)
    {
        const int s = static_cast<int>(k) + 1;
        bool ok = true;
        if (!ch.calibration.empty())
            ok = ch.calibration[k].feasible();
        if (!ch.rule.empty())
            ok = ch.rule[k].has_value() && *ch.rule[k] <= plan.t_max;
        t.append(point_row(plan, pt, "snapshots", stage_tag(s), ch.schedule.snapshots[k], 0.0,
                           ch.calibration.empty() ? 0 : ch.calibration[k].trials, ok ? "ok" : "infeasible"));
    }
}

} // namespace detail

inline void run_localization_experiment(const Settings &st, const Codebook &cb, ResultTable &t)
{
    const auto &plan = st.plan;
    const int n_s = cb.n_stages();
    for (const auto &pt : power_points(st))
    {
        SnapshotSchedule sched;
        std::string status = "ok";
        if (plan.kind == ExperimentKind::stage_error && plan.schedule_source != ScheduleSource::manual)
            sched = uniform_schedule(n_s, 1);
        else
        {
            const auto ch = choose_schedule(st, cb, pt);
            detail::append_schedule(t, plan, pt, ch);
            sched = ch.schedule;
            if (!ch.feasible)
                status = "infeasible";
        }
        const auto recs = run_localization_trials(pt.cfg, cb, sched, {plan.target, plan.threads},
                                                  detail::stream_key(plan, detail::stream_localization, pt.index),
                                                  plan.trials, plan.radar_model);
        detail::append_localization(t, plan, pt, summarize(recs, n_s), n_s, status);
        if (plan.kind == ExperimentKind::overall_error)
        {
            t.append(detail::point_row(plan, pt, "overall_error_bound", "all",
                                       overall_error_bound(plan.delta, n_s), 0.0, 0));
            t.append(detail::point_row(plan, pt, "transmissions", "hierarchical",
                                       static_cast<double>(sched.transmissions()), 0.0, 0, status));
        }
    }
}

inline void run_snapshot_experiment(const Settings &st, const Codebook &cb, ResultTable &t)
{
    const auto &plan = st.plan;
    for (const auto &pt : power_points(st))
    {
        const auto ch = choose_schedule(st, cb, pt);
        detail::append_schedule(t, plan, pt, ch);
        for (std::size_t k = 0; k < ch.calibration.size(); ++k)
        {
            const auto &c = ch.calibration[k];
            const auto idx = static_cast<std::size_t>(c.snapshots.value_or(plan.t_max) - 1);
            const double e = c.error_by_t[idx];
            const long wrong = std::lround(e * c.trials);
            t.append(detail::point_row(plan, pt, "calibrated_error", detail::stage_tag(c.stage), e,
                                       wilson_half_width(wrong, c.trials), c.trials,
                                       c.feasible() ? "ok" : "infeasible"));
        }
        // The closed-form rule as printed, alongside its magnitude reading.
        const auto eta = link_pathloss(pt.cfg);
        for (int s = 1; s <= cb.n_stages(); ++s)
        {
            const auto lit = snapshot_rule(plan.delta, pt.cfg.p_r, cb.stage(s).l_s, pt.cfg.n_b, eta.br, eta.rt,
                                           pt.cfg.sigma_b2(), SnapshotRuleVariant::literal);
            t.append(detail::point_row(plan, pt, "rule_literal_product", detail::stage_tag(s), lit.product, 0.0, 0,
                                       lit.physical ? "ok" : "non_physical"));
            const auto mag = snapshot_rule(plan.delta, pt.cfg.p_r, cb.stage(s).l_s, pt.cfg.n_b, eta.br, eta.rt,
                                           pt.cfg.sigma_b2(), SnapshotRuleVariant::magnitude);
            t.append(detail::point_row(plan, pt, "rule_magnitude_snapshots", detail::stage_tag(s),
                                       mag.snapshots.value_or(std::numeric_limits<double>::quiet_NaN()), 0.0, 0));
        }
    }
}

/// SE of the UE for the comm-only benchmark, each stage's beam towards the
/// configured target, and the link without RIS. All scenarios share the
/// fading draws of a point.
inline void run_se_experiment(const Settings &st, const Codebook &cb, ResultTable &t)
{
    const auto &plan = st.plan;
    const auto cell = true_cell(st.scenario, st.scenario.v_t);
    for (const auto &pt : power_points(st))
    {
        const StreamKey key = detail::stream_key(plan, detail::stream_se, pt.index);
        auto add = [&](const std::string &tag, const std::optional<PhaseProfile> &omega) {
            const auto est = average_se(pt.cfg, omega, plan.trials, key, plan.threads);
            t.append(detail::point_row(plan, pt, "se", tag, est.mean, est.half_width, est.trials));
        };
        add("benchmark", comm_only_profile(pt.cfg));
        for (int s = 1; s <= cb.n_stages(); ++s)
            add(detail::stage_tag(s), cb.stage(s).beam(covering_beam(s, cell, cb.grid_size)));
        add("no_ris", std::nullopt);
    }
}

inline void run_transmission_experiment(const Settings &st, const Codebook &cb, ResultTable &t)
{
    const auto &plan = st.plan;
    const double exhaustive = static_cast<double>(st.scenario.grid_size) * st.scenario.grid_size;
    for (const auto &pt : power_points(st))
    {
        const auto ch = choose_schedule(st, cb, pt);
        detail::append_schedule(t, plan, pt, ch);
        const std::string status = ch.feasible ? "ok" : "infeasible";
        t.append(detail::point_row(plan, pt, "transmissions", "hierarchical",
                                   static_cast<double>(ch.schedule.transmissions()), 0.0, 0, status));
        t.append(detail::point_row(plan, pt, "transmissions", "exhaustive", exhaustive, 0.0, 0));
    }
}

inline void run_codebook_report(const Settings &st, const Codebook &cb, ResultTable &t)
{
    const std::string name = to_string(ExperimentKind::codebook_report);
    const RVector grid = cosine_grid(cb.grid_size);
    auto row = [&](std::string metric, std::string tag, double v) {
        ResultRow r;
        r.experiment = name;
        r.metric = std::move(metric);
        r.tag = std::move(tag);
        r.value = v;
        t.append(std::move(r));
    };
    for (const auto &sb : cb.stages)
    {
        double hpw = 0.0;
        for (int axis = 0; axis < 2; ++axis)
        {
            const double vb = axis == 0 ? cb.v_b.vx : cb.v_b.vy;
            const auto &w = axis == 0 ? sb.wx : sb.wy;
            const auto &res = axis == 0 ? sb.residual_x : sb.residual_y;
            for (int i = 1; i <= sb.beams_per_axis(); ++i)
            {
                char tag[48];
                std::snprintf(tag, sizeof(tag), "stage_%02d_%c_beam_%02d", sb.stage, axis == 0 ? 'x' : 'y', i);
                const CVector g = w.col(i - 1).head(sb.l_s);
                const auto q = mask_fidelity(g, partition_indices(sb.stage, i, cb.grid_size), vb, grid, cb.spacing,
                                             st.codebook.gates);
                const double width = half_power_width(g, vb, cb.spacing);
                hpw += width;
                row("on_fraction", tag, q.on_fraction);
                row("off_fraction", tag, q.off_fraction);
                row("mask_pass", tag, q.passed ? 1.0 : 0.0);
                row("residual", tag, res[static_cast<std::size_t>(i - 1)]);
                row("half_power_width", tag, width);
            }
        }
        row("mean_half_power_width", detail::stage_tag(sb.stage), hpw / (2.0 * sb.beams_per_axis()));
    }
}

inline ResultTable run_experiment(const Settings &st, const Codebook &cb)
{
    st.plan.validate();
    require(cb.grid_size == st.scenario.grid_size && cb.n_ris == st.scenario.n_ris,
            "run_experiment: codebook does not match the scenario");
    ResultTable t;
    t.seed = st.plan.seed;
    t.config_hash = config_hash(st);
    t.power_unit = to_string(st.plan.unit);
    switch (st.plan.kind)
    {
    case ExperimentKind::stage_error:
    case ExperimentKind::overall_error: run_localization_experiment(st, cb, t); break;
    case ExperimentKind::snapshots: run_snapshot_experiment(st, cb, t); break;
    case ExperimentKind::se_sweep: run_se_experiment(st, cb, t); break;
    case ExperimentKind::transmission_count: run_transmission_experiment(st, cb, t); break;
    case ExperimentKind::codebook_report: run_codebook_report(st, cb, t); break;
    }
    return t;
}

/// Per-trial trace of one hierarchical search, one row per stage.
inline void write_trace_csv(std::ostream &os, const TrialRecord &rec, std::uint64_t seed, double power_dbm)
{
    os << "stage,candidates,statistics,chosen_beam,snapshots,correct,truth_i,truth_j,seed,power_dbm\r\n";
    for (const auto &d : rec.stages)
    {
        std::string cand, stats;
        for (std::size_t k = 0; k < 4; ++k)
        {
            cand += (k ? ";" : "") + std::to_string(d.candidates[k]);
            stats += (k ? ";" : "") + format_double(d.statistics[k]);
        }
        os << d.stage << ',' << cand << ',' << stats << ',' << d.chosen_beam() << ',' << d.snapshots << ','
           << (d.correct ? 1 : 0) << ',' << rec.truth.first << ',' << rec.truth.second << ',' << seed << ','
           << format_double(power_dbm) << "\r\n";
    }
}

} // namespace risjrc
