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
#include "risjrc/localization.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace risjrc
{

class config_error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

enum class ExperimentKind
{
    stage_error,
    snapshots,
    overall_error,
    se_sweep,
    transmission_count,
    codebook_report
};

/// How numbers in a power sweep are read.
enum class PowerUnit
{
    dbm,              // total transmit power, dB relative to 1 mW
    db,               // total transmit power, dB relative to 1 W
    detection_snr_db, // nominal stage-1 radar detection SNR
    link_snr_db       // nominal RIS-assisted UE link SNR (full-aperture comm beam)
};

enum class ScheduleSource
{
    calibrated,
    rule, // closed-form snapshot rule, magnitude reading
    manual
};

struct ExperimentPlan
{
    ExperimentKind kind = ExperimentKind::overall_error;
    std::vector<double> power_sweep{30.0};
    PowerUnit unit = PowerUnit::dbm;
    int trials = 2000;
    std::uint64_t seed = 1;
    double delta = 0.05;
    int t_max = 400;
    int calibration_trials = 10000;
    ScheduleSource schedule_source = ScheduleSource::calibrated;
    std::vector<int> manual_snapshots;
    TargetMode target = TargetMode::fixed;
    RadarModel radar_model = RadarModel::beamformed;
    int threads = 0; // 0: all cores

    void validate() const
    {
        if (trials < 1)
            throw config_error("experiment.trials: must be >= 1");
        if (power_sweep.empty())
            throw config_error("experiment.power_sweep: must not be empty");
        if (!(delta > 0.0 && delta < 1.0))
            throw config_error("experiment.delta: must lie in (0, 1)");
        if (t_max < 1)
            throw config_error("experiment.t_max: must be >= 1");
        if (calibration_trials < 1000)
            throw config_error("experiment.calibration_trials: must be >= 1000");
        for (int t : manual_snapshots)
            if (t < 1)
                throw config_error("experiment.snapshots: entries must be >= 1");
    }
};

struct Settings
{
    ScenarioConfig scenario;
    std::vector<int> schedule{4, 8, 16, 16, 16};
    CodebookOptions codebook;
    ExperimentPlan plan;
    /// Power written in the [power] section, in plan units of dBm or dB.
    double total_power_value = 30.0;
};

// Names -----------------------------------------------------------------------

inline const std::map<std::string, ExperimentKind> &experiment_names()
{
    static const std::map<std::string, ExperimentKind> m{{"stage-error", ExperimentKind::stage_error},
                                                         {"snapshots", ExperimentKind::snapshots},
                                                         {"overall-error", ExperimentKind::overall_error},
                                                         {"se-sweep", ExperimentKind::se_sweep},
                                                         {"transmission-count", ExperimentKind::transmission_count},
                                                         {"codebook-report", ExperimentKind::codebook_report}};
    return m;
}

inline std::string to_string(ExperimentKind k)
{
    for (const auto &[name, kind] : experiment_names())
        if (kind == k)
            return name;
    return "?";
}

inline std::string to_string(PowerUnit u)
{
    switch (u)
    {
    case PowerUnit::dbm: return "dBm";
    case PowerUnit::db: return "dB";
    case PowerUnit::detection_snr_db: return "detection_snr_dB";
    case PowerUnit::link_snr_db: return "link_snr_dB";
    }
    return "?";
}

/// Shortest decimal text that parses back to the same double.
inline std::string format_double(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// Power conversions -------------------------------------------------------------

/// Nominal per-snapshot stage-1 detection SNR with unit fading and ideal
/// squared responses L^2 on each axis: eta_rt^4 eta_br^4 L^8 N_b^2 p_r / sigma_b^2.
inline double nominal_detection_snr(const ScenarioConfig &cfg, int l_s)
{
    const auto eta = link_pathloss(cfg);
    const double gain = std::pow(eta.rt, 4) * std::pow(eta.br, 4) * std::pow(static_cast<double>(l_s), 8) *
                        static_cast<double>(cfg.n_b) * cfg.n_b;
    return gain * cfg.p_r / cfg.sigma_b2();
}

/// Nominal UE SNR of the RIS-assisted stream with the full-aperture comm beam:
/// (eta_ru eta_br N_r)^2 N_u N_b p_r / sigma_u^2.
inline double nominal_link_snr(const ScenarioConfig &cfg)
{
    const auto eta = link_pathloss(cfg);
    const double a = eta.ru * eta.br * cfg.n_ris;
    return a * a * cfg.n_u * cfg.n_b * cfg.p_r / cfg.sigma_u2();
}

/// Total power in watts for one sweep value.
inline double sweep_power_watts(const ScenarioConfig &cfg, const std::vector<int> &schedule, PowerUnit unit,
                                double value)
{
    switch (unit)
    {
    case PowerUnit::dbm: return dbm_to_watts(value);
    case PowerUnit::db: return db_to_linear(value);
    case PowerUnit::detection_snr_db:
    {
        const ScenarioConfig unit_power = cfg.with_total_power(1.0);
        const int l1 = schedule.empty() ? 1 : schedule.front();
        return db_to_linear(value) / nominal_detection_snr(unit_power, l1);
    }
    case PowerUnit::link_snr_db:
        return db_to_linear(value) / nominal_link_snr(cfg.with_total_power(1.0));
    }
    return 0.0;
}

// INI loading -------------------------------------------------------------------

namespace detail
{

inline const std::map<std::string, std::set<std::string>> &known_keys()
{
    static const std::map<std::string, std::set<std::string>> m{
        {"arrays", {"n_b", "n_u", "n_ris", "grid_size", "ris_spacing", "radar_aperture"}},
        {"angles", {"theta_r", "theta_u", "zeta_b", "zeta_r"}},
        {"directions", {"v_bx", "v_by", "v_ux", "v_uy", "v_tx", "v_ty"}},
        {"links",
         {"d_bu", "d_br", "d_ru", "d_rt", "alpha_bu", "alpha_br", "alpha_ru", "alpha_rt", "eta0_db", "pathloss"}},
        {"noise", {"sigma_b2_dbm", "sigma_u2_dbm"}},
        {"power", {"total", "unit", "p_r_w", "p_u_w", "fading"}},
        {"codebook",
         {"schedule", "mu_scale", "max_iters", "tol", "phase_reference", "init_perturbation", "seed", "min_on",
          "max_off"}},
        {"experiment",
         {"kind", "power_sweep", "power_unit", "trials", "seed", "delta", "t_max", "calibration_trials",
          "schedule_source", "snapshots", "target_mode", "radar_model", "parallel"}}};
    return m;
}

template <typename T>
T parse_number(const std::string &key, const std::string &text)
{
    T v{};
    const char *b = text.data();
    const char *e = text.data() + text.size();
    while (b < e && std::isspace(static_cast<unsigned char>(*b)))
        ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(e[-1])))
        --e;
    if constexpr (std::is_floating_point_v<T>)
    {
        // GCC 11 lacks floating-point from_chars in some configurations.
        std::string s(b, e);
        char *end = nullptr;
        v = std::strtod(s.c_str(), &end);
        if (s.empty() || end != s.c_str() + s.size())
            throw config_error(key + ": expected a number, got '" + text + "'");
    }
    else
    {
        const auto res = std::from_chars(b, e, v);
        if (res.ec != std::errc() || res.ptr != e)
            throw config_error(key + ": expected an integer, got '" + text + "'");
    }
    return v;
}

template <typename T>
std::vector<T> parse_list(const std::string &key, const std::string &text)
{
    std::vector<T> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        out.push_back(parse_number<T>(key, item));
    return out;
}

template <typename E>
E parse_enum(const std::string &key, const std::string &text, const std::map<std::string, E> &names)
{
    const auto it = names.find(text);
    if (it == names.end())
    {
        std::string allowed;
        for (const auto &[n, _] : names)
            allowed += (allowed.empty() ? "" : ", ") + n;
        throw config_error(key + ": unknown value '" + text + "' (allowed: " + allowed + ")");
    }
    return it->second;
}

} // namespace detail

/// Parses the sectioned key-value configuration. Missing keys keep their
/// defaults (the reference parameter table); unknown sections or keys are
/// rejected.
inline Settings parse_config(std::istream &is, const std::string &origin = "<config>")
{
    using boost::property_tree::ptree;
    // Inline comments (';' or '#' after whitespace) are stripped; line count is kept.
    std::ostringstream clean;
    for (std::string line; std::getline(is, line);)
    {
        for (std::size_t k = 1; k < line.size(); ++k)
            if ((line[k] == ';' || line[k] == '#') && std::isspace(static_cast<unsigned char>(line[k - 1])))
            {
                line.erase(k);
                break;
            }
        clean << line << '\n';
    }
    std::istringstream cleaned(clean.str());
    ptree tree;
    try
    {
        boost::property_tree::ini_parser::read_ini(cleaned, tree);
    }
    catch (const boost::property_tree::ini_parser_error &e)
    {
        throw config_error(origin + ":" + std::to_string(e.line()) + ": " + e.message());
    }

    const auto &known = detail::known_keys();
    for (const auto &[section, body] : tree)
    {
        const auto it = known.find(section);
        if (it == known.end() || body.empty())
            throw config_error(origin + ": unknown section or top-level key '" + section + "'");
        for (const auto &[key, _] : body)
            if (!it->second.count(key))
                throw config_error(origin + ": unknown key '" + section + "." + key + "'");
    }

    Settings st;
    auto get = [&](const std::string &path) -> std::optional<std::string> {
        if (auto v = tree.get_optional<std::string>(ptree::path_type(path, '.')))
            return *v;
        return std::nullopt;
    };
    auto num = [&](const std::string &path, auto &out) {
        if (auto v = get(path))
            out = detail::parse_number<std::decay_t<decltype(out)>>(path, *v);
    };
    auto angle = [&](const std::string &path, AngleDeg &out) {
        if (auto v = get(path))
            out = AngleDeg(detail::parse_number<double>(path, *v));
    };

    auto &sc = st.scenario;
    num("arrays.n_b", sc.n_b);
    num("arrays.n_u", sc.n_u);
    num("arrays.n_ris", sc.n_ris);
    num("arrays.grid_size", sc.grid_size);
    num("arrays.ris_spacing", sc.ris_spacing);
    if (auto v = get("arrays.radar_aperture"))
        sc.radar_aperture = detail::parse_enum<RadarAperture>(
            "arrays.radar_aperture", *v, {{"sensing", RadarAperture::sensing}, {"full", RadarAperture::full}});
    angle("angles.theta_r", sc.theta_r);
    angle("angles.theta_u", sc.theta_u);
    angle("angles.zeta_b", sc.zeta_b);
    angle("angles.zeta_r", sc.zeta_r);
    num("directions.v_bx", sc.v_b.vx);
    num("directions.v_by", sc.v_b.vy);
    num("directions.v_ux", sc.v_u.vx);
    num("directions.v_uy", sc.v_u.vy);
    num("directions.v_tx", sc.v_t.vx);
    num("directions.v_ty", sc.v_t.vy);
    num("links.d_bu", sc.d_bu);
    num("links.d_br", sc.d_br);
    num("links.d_ru", sc.d_ru);
    num("links.d_rt", sc.d_rt);
    num("links.alpha_bu", sc.alpha_bu);
    num("links.alpha_br", sc.alpha_br);
    num("links.alpha_ru", sc.alpha_ru);
    num("links.alpha_rt", sc.alpha_rt);
    num("links.eta0_db", sc.eta0_db);
    if (auto v = get("links.pathloss"))
        sc.pathloss = detail::parse_enum<PathlossModel>(
            "links.pathloss", *v, {{"literal", PathlossModel::literal}, {"standard", PathlossModel::standard}});
    num("noise.sigma_b2_dbm", sc.sigma_b2_dbm);
    num("noise.sigma_u2_dbm", sc.sigma_u2_dbm);

    PowerUnit total_unit = PowerUnit::dbm;
    if (auto v = get("power.unit"))
        total_unit =
            detail::parse_enum<PowerUnit>("power.unit", *v, {{"dBm", PowerUnit::dbm}, {"dB", PowerUnit::db}});
    num("power.total", st.total_power_value);
    const double p_total = total_unit == PowerUnit::dbm ? dbm_to_watts(st.total_power_value)
                                                        : db_to_linear(st.total_power_value);
    const auto p_r = get("power.p_r_w");
    const auto p_u = get("power.p_u_w");
    if (p_r.has_value() != p_u.has_value())
        throw config_error("power: p_r_w and p_u_w must be given together");
    if (p_r)
    {
        sc.p_r = detail::parse_number<double>("power.p_r_w", *p_r);
        sc.p_u = detail::parse_number<double>("power.p_u_w", *p_u);
        if (sc.p_r < 0.0 || sc.p_u < 0.0)
            throw config_error("power: p_r_w and p_u_w must be non-negative");
        if (std::abs(sc.p_r + sc.p_u - p_total) > 1e-9 * std::max(1.0, p_total))
            throw config_error("power: p_r_w + p_u_w must equal the total power P (" + format_double(p_total) +
                               " W)");
    }
    else
    {
        sc.p_r = 0.5 * p_total;
        sc.p_u = 0.5 * p_total;
    }
    if (auto v = get("power.fading"))
        sc.fading = detail::parse_enum<FadingModel>("power.fading", *v,
                                                    {{"rayleigh", FadingModel::rayleigh}, {"none", FadingModel::none}});

    if (auto v = get("codebook.schedule"))
        st.schedule = detail::parse_list<int>("codebook.schedule", *v);
    auto &so = st.codebook.solver;
    num("codebook.mu_scale", so.mu_scale);
    num("codebook.max_iters", so.max_iters);
    num("codebook.tol", so.tol);
    num("codebook.init_perturbation", so.init_perturbation);
    if (auto v = get("codebook.phase_reference"))
        so.reference = detail::parse_enum<PhaseReference>(
            "codebook.phase_reference", *v,
            {{"centered", PhaseReference::centered}, {"first_element", PhaseReference::first_element}});
    num("codebook.seed", st.codebook.seed);
    num("codebook.min_on", st.codebook.gates.min_on);
    num("codebook.max_off", st.codebook.gates.max_off);

    auto &pl = st.plan;
    if (auto v = get("experiment.kind"))
        pl.kind = detail::parse_enum<ExperimentKind>("experiment.kind", *v, experiment_names());
    if (auto v = get("experiment.power_sweep"))
        pl.power_sweep = detail::parse_list<double>("experiment.power_sweep", *v);
    if (auto v = get("experiment.power_unit"))
        pl.unit = detail::parse_enum<PowerUnit>("experiment.power_unit", *v,
                                                {{"dBm", PowerUnit::dbm},
                                                 {"dB", PowerUnit::db},
                                                 {"detection_snr_dB", PowerUnit::detection_snr_db},
                                                 {"link_snr_dB", PowerUnit::link_snr_db}});
    num("experiment.trials", pl.trials);
    num("experiment.seed", pl.seed);
    num("experiment.delta", pl.delta);
    num("experiment.t_max", pl.t_max);
    num("experiment.calibration_trials", pl.calibration_trials);
    if (auto v = get("experiment.schedule_source"))
        pl.schedule_source = detail::parse_enum<ScheduleSource>(
            "experiment.schedule_source", *v,
            {{"calibrated", ScheduleSource::calibrated}, {"rule", ScheduleSource::rule}, {"manual", ScheduleSource::manual}});
    if (auto v = get("experiment.snapshots"))
        pl.manual_snapshots = detail::parse_list<int>("experiment.snapshots", *v);
    if (auto v = get("experiment.target_mode"))
        pl.target = detail::parse_enum<TargetMode>("experiment.target_mode", *v,
                                                   {{"fixed", TargetMode::fixed}, {"random_grid", TargetMode::random_grid}});
    if (auto v = get("experiment.radar_model"))
        pl.radar_model = detail::parse_enum<RadarModel>(
            "experiment.radar_model", *v, {{"beamformed", RadarModel::beamformed}, {"full", RadarModel::full}});
    num("experiment.parallel", pl.threads);

    try
    {
        sc.validate();
    }
    catch (const invalid_input &e)
    {
        throw config_error(origin + ": " + e.what());
    }
    if (static_cast<int>(st.schedule.size()) != sc.n_stages())
        throw config_error("codebook.schedule: needs log2(grid_size) = " + std::to_string(sc.n_stages()) +
                           " entries, got " + std::to_string(st.schedule.size()));
    for (int l : st.schedule)
        if (l < 1 || l > sc.ris_axis())
            throw config_error("codebook.schedule: entries must lie in [1, sqrt(n_ris)]");
    for (std::size_t k = 1; k < st.schedule.size(); ++k)
        if (st.schedule[k] < st.schedule[k - 1])
            throw config_error("codebook.schedule: L_s must be non-decreasing");
    pl.validate();
    if (pl.schedule_source == ScheduleSource::manual &&
        static_cast<int>(pl.manual_snapshots.size()) != sc.n_stages())
        throw config_error("experiment.snapshots: manual schedule needs one entry per stage");
    return st;
}

inline Settings load_config(const std::string &path)
{
    std::ifstream is(path);
    if (!is)
        throw config_error("cannot open config file '" + path + "'");
    return parse_config(is, path);
}

/// Canonical text of every setting; the basis of the config hash.
inline std::string canonical_text(const Settings &st)
{
    const auto &c = st.scenario;
    std::ostringstream os;
    auto kv = [&](const char *k, double v) { os << k << '=' << format_double(v) << '\n'; };
    kv("n_b", c.n_b);
    kv("n_u", c.n_u);
    kv("n_ris", c.n_ris);
    kv("grid_size", c.grid_size);
    kv("ris_spacing", c.ris_spacing);
    kv("radar_aperture", static_cast<int>(c.radar_aperture));
    kv("theta_r", c.theta_r.value);
    kv("theta_u", c.theta_u.value);
    kv("zeta_b", c.zeta_b.value);
    kv("zeta_r", c.zeta_r.value);
    kv("v_bx", c.v_b.vx);
    kv("v_by", c.v_b.vy);
    kv("v_ux", c.v_u.vx);
    kv("v_uy", c.v_u.vy);
    kv("v_tx", c.v_t.vx);
    kv("v_ty", c.v_t.vy);
    kv("d_bu", c.d_bu);
    kv("d_br", c.d_br);
    kv("d_ru", c.d_ru);
    kv("d_rt", c.d_rt);
    kv("alpha_bu", c.alpha_bu);
    kv("alpha_br", c.alpha_br);
    kv("alpha_ru", c.alpha_ru);
    kv("alpha_rt", c.alpha_rt);
    kv("eta0_db", c.eta0_db);
    kv("pathloss", static_cast<int>(c.pathloss));
    kv("sigma_b2_dbm", c.sigma_b2_dbm);
    kv("sigma_u2_dbm", c.sigma_u2_dbm);
    kv("p_r", c.p_r);
    kv("p_u", c.p_u);
    kv("fading", static_cast<int>(c.fading));
    for (int l : st.schedule)
        kv("schedule", l);
    const auto &so = st.codebook.solver;
    kv("mu_scale", so.mu_scale);
    kv("max_iters", so.max_iters);
    kv("tol", so.tol);
    kv("phase_reference", static_cast<int>(so.reference));
    kv("init_perturbation", so.init_perturbation);
    kv("codebook_seed", static_cast<double>(st.codebook.seed));
    kv("min_on", st.codebook.gates.min_on);
    kv("max_off", st.codebook.gates.max_off);
    const auto &p = st.plan;
    kv("kind", static_cast<int>(p.kind));
    for (double v : p.power_sweep)
        kv("power_sweep", v);
    kv("power_unit", static_cast<int>(p.unit));
    kv("trials", p.trials);
    os << "seed=" << p.seed << '\n';
    kv("delta", p.delta);
    kv("t_max", p.t_max);
    kv("calibration_trials", p.calibration_trials);
    kv("schedule_source", static_cast<int>(p.schedule_source));
    for (int t : p.manual_snapshots)
        kv("snapshots", t);
    kv("target_mode", static_cast<int>(p.target));
    kv("radar_model", static_cast<int>(p.radar_model));
    return os.str();
}

/// FNV-1a 64 of canonical_text, as 16 hex digits. Thread count is excluded:
/// results do not depend on it.
inline std::string config_hash(const Settings &st)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : canonical_text(st))
    {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace risjrc
