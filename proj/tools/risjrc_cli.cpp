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

#include "risjrc/risjrc.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace
{

using namespace risjrc;

struct CommonFlags
{
    std::string config;
    std::string codebook;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    std::optional<int> parallel;
};

void add_common(CLI::App *cmd, CommonFlags &f)
{
    cmd->add_option("--config", f.config, "INI configuration file (built-in defaults if omitted)");
    cmd->add_option("--seed", f.seed, "master seed, overrides experiment.seed");
    cmd->add_option("--trials", f.trials, "Monte Carlo trials per point, overrides experiment.trials");
    cmd->add_option("--out", f.out, "output file (stdout if omitted)");
    cmd->add_option("--codebook", f.codebook, "codebook file from design-codebook (designed on the fly if omitted)");
    cmd->add_option("--parallel", f.parallel, "worker threads, 0 for all cores");
}

Settings settings_from(const CommonFlags &f)
{
    Settings st;
    if (!f.config.empty())
        st = load_config(f.config);
    else
    {
        std::istringstream empty;
        st = parse_config(empty, "<defaults>");
    }
    if (f.seed)
        st.plan.seed = *f.seed;
    if (f.trials)
        st.plan.trials = *f.trials;
    if (f.parallel)
        st.plan.threads = *f.parallel;
    st.plan.validate();
    return st;
}

Codebook codebook_from(const CommonFlags &f, const Settings &st)
{
    Codebook cb = f.codebook.empty() ? build_codebook(st.scenario, st.schedule, st.codebook) : load_codebook(f.codebook);
    if (cb.grid_size != st.scenario.grid_size || cb.n_ris != st.scenario.n_ris)
        throw config_error("codebook geometry (D=" + std::to_string(cb.grid_size) + ", N_r=" +
                           std::to_string(cb.n_ris) + ") does not match the configuration");
    return cb;
}

template <typename Fn>
void with_output(const std::string &path, Fn &&fn)
{
    if (path.empty())
    {
        fn(std::cout);
        return;
    }
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw std::runtime_error("cannot open '" + path + "' for writing");
    fn(os);
    if (!os.flush())
        throw std::runtime_error("write to '" + path + "' failed");
}

void run_kind(const CommonFlags &f, ExperimentKind kind)
{
    Settings st = settings_from(f);
    st.plan.kind = kind;
    const Codebook cb = codebook_from(f, st);
    const ResultTable t = run_experiment(st, cb);
    with_output(f.out, [&](std::ostream &os) { write_csv(os, t); });
}

void design_codebook(const CommonFlags &f)
{
    Settings st = settings_from(f);
    if (f.seed)
        st.codebook.seed = *f.seed;
    if (f.out.empty())
        throw std::runtime_error("design-codebook: --out is required");
    const Codebook cb = build_codebook(st.scenario, st.schedule, st.codebook);
    save_codebook(f.out, cb);
    for (const auto &w : cb.warnings)
        std::cerr << "warning: mask gate failed, " << w << '\n';
    std::cerr << "wrote " << cb.n_stages() << " stages to " << f.out << '\n';
}

void localize(const CommonFlags &f, std::optional<double> power)
{
    Settings st = settings_from(f);
    if (power)
        st.plan.power_sweep = {*power};
    else
        st.plan.power_sweep = {st.total_power_value};
    const Codebook cb = codebook_from(f, st);
    const PowerPoint pt = power_points(st).front();
    const auto ch = choose_schedule(st, cb, pt);
    if (!ch.feasible)
        std::cerr << "warning: snapshot schedule infeasible at this power, using t_max where needed\n";

    const StreamKey key{st.plan.seed, 0, 0};
    Rng rng = key.trial_rng(0);
    const Fading fading = draw_fading(rng, pt.cfg.fading);
    const DirectionCosine target = draw_target(pt.cfg, st.plan.target, rng);
    const RadarScene sc = make_radar_scene(pt.cfg, fading, target, st.plan.radar_model);
    const TrialRecord rec = hierarchical_localize(sc, cb, ch.schedule, rng);

    std::cerr << "target (" << target.vx << ", " << target.vy << ") cell (" << rec.truth.first << ", "
              << rec.truth.second << ")\n";
    for (const auto &d : rec.stages)
    {
        std::cerr << "stage " << d.stage << " T=" << d.snapshots << " beams";
        for (std::size_t k = 0; k < 4; ++k)
            std::cerr << ' ' << d.candidates[k] << ':' << d.statistics[k];
        std::cerr << " -> " << d.chosen_beam() << (d.correct ? " (correct)" : " (wrong)") << '\n';
    }
    std::cerr << "estimate (" << rec.estimate.first << ", " << rec.estimate.second << ") "
              << (rec.success ? "success" : "failure") << ", " << rec.total_transmissions << " transmissions\n";
    with_output(f.out, [&](std::ostream &os) { write_trace_csv(os, rec, st.plan.seed, watts_to_dbm(pt.watts)); });
}

void beampattern(const CommonFlags &f, int points)
{
    const Settings st = settings_from(f);
    const Codebook cb = codebook_from(f, st);
    const RVector scan = points > 0 ? RVector::LinSpaced(points, -1.0, 1.0) : cosine_grid(cb.grid_size);
    with_output(f.out, [&](std::ostream &os) {
        os << "stage,axis,beam,l_s,v,magnitude\r\n";
        for (const auto &sb : cb.stages)
            for (int axis = 0; axis < 2; ++axis)
            {
                const double vb = axis == 0 ? cb.v_b.vx : cb.v_b.vy;
                const auto &w = axis == 0 ? sb.wx : sb.wy;
                for (int i = 1; i <= sb.beams_per_axis(); ++i)
                {
                    const RVector mag = axis_pattern(w.col(i - 1).head(sb.l_s), vb, scan, cb.spacing);
                    for (Eigen::Index k = 0; k < scan.size(); ++k)
                        os << sb.stage << ',' << (axis == 0 ? 'x' : 'y') << ',' << i << ',' << sb.l_s << ','
                           << format_double(scan[k]) << ',' << format_double(mag[k]) << "\r\n";
                }
            }
    });
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"risjrc: RIS-assisted joint radar-communication simulator"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::optional<double> power;
    int points = 0;

    auto *design = app.add_subcommand("design-codebook", "design the hierarchical codebook and write it to --out");
    auto *loc = app.add_subcommand("localize", "run one hierarchical search and print its trace");
    loc->add_option("--power", power, "total power in dBm (default: power.total)");
    auto *stage = app.add_subcommand("stage-error", "per-stage error versus power");
    auto *calib = app.add_subcommand("calibrate", "calibrated snapshot counts versus power");
    auto *overall = app.add_subcommand("overall-error", "overall localization error versus power");
    auto *se = app.add_subcommand("se-sweep", "UE spectral efficiency versus power");
    auto *count = app.add_subcommand("count-transmissions", "hierarchical versus exhaustive transmission counts");
    auto *pattern = app.add_subcommand("beampattern", "per-beam axis response magnitudes");
    pattern->add_option("--points", points, "scan points over [-1, 1] (default: the design grid)");
    auto *report = app.add_subcommand("codebook-report", "mask fidelity and beam widths of the codebook");
    for (auto *cmd : {design, loc, stage, calib, overall, se, count, pattern, report})
        add_common(cmd, flags);

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (design->parsed())
            design_codebook(flags);
        else if (loc->parsed())
            localize(flags, power);
        else if (stage->parsed())
            run_kind(flags, ExperimentKind::stage_error);
        else if (calib->parsed())
            run_kind(flags, ExperimentKind::snapshots);
        else if (overall->parsed())
            run_kind(flags, ExperimentKind::overall_error);
        else if (se->parsed())
            run_kind(flags, ExperimentKind::se_sweep);
        else if (count->parsed())
            run_kind(flags, ExperimentKind::transmission_count);
        else if (pattern->parsed())
            beampattern(flags, points);
        else if (report->parsed())
            run_kind(flags, ExperimentKind::codebook_report);
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
