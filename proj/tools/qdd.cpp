// qdd: motor selection, actuator comparison and dynamometer analysis CLI.
//
// Exit codes: 0 success, 2 usage/validation, 3 I/O or file format,
// 4 analysis failure (unidentifiable data, optimizer trouble).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qdd/qdd.hpp"

namespace {

using ordered_json = nlohmann::ordered_json;

enum class Format { Table, Csv, Json };
enum class Units { SI, Display };

struct GlobalOptions {
    std::string format = "table";
    std::string units;  // empty = per-command default

    Format fmt() const {
        if (format == "csv") return Format::Csv;
        if (format == "json") return Format::Json;
        return Format::Table;
    }
    Units resolve_units(Units command_default) const {
        if (units == "si") return Units::SI;
        if (units == "display") return Units::Display;
        return command_default;
    }
};

// Table cells round to 3 significant figures; CSV and JSON carry full
// precision in the same units so machine output agrees with the table to
// printed precision.
std::string fmt3(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

std::string fmt_cell(double v, Format f) {
    return f == Format::Table ? fmt3(v) : qdd::detail::format_full(v);
}

void print_aligned(std::ostream& out, const std::vector<std::string>& headers,
                   const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> width(headers.size());
    for (std::size_t i = 0; i < headers.size(); ++i) width[i] = headers[i].size();
    for (const auto& row : rows)
        for (std::size_t i = 0; i < row.size() && i < width.size(); ++i)
            width[i] = std::max(width[i], row[i].size());
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i + 1 == cells.size())
                out << cells[i];
            else
                out << std::left << std::setw(int(width[i]) + 2) << cells[i];
        }
        out << '\n';
    };
    line(headers);
    for (const auto& r : rows) line(r);
}

void print_csv(std::ostream& out, const std::vector<std::string>& headers,
               const std::vector<std::vector<std::string>>& rows) {
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i)
            out << cells[i] << (i + 1 == cells.size() ? "" : ",");
        out << '\n';
    };
    line(headers);
    for (const auto& r : rows) line(r);
}

void emit_rows(Format f, const std::vector<std::string>& headers,
               const std::vector<std::vector<std::string>>& rows) {
    if (f == Format::Csv)
        print_csv(std::cout, headers, rows);
    else
        print_aligned(std::cout, headers, rows);
}

void emit_json(const ordered_json& doc) { std::cout << doc.dump(2) << '\n'; }

// ---------------------------------------------------------------------------
// Shared plumbing

std::string resolve_catalog_path(const std::string& positional) {
    if (!positional.empty()) return positional;
    if (const char* env = std::getenv("QDD_CATALOG"); env && *env) return env;
    throw qdd::validation_error("no catalog path given and QDD_CATALOG is not set");
}

qdd::Catalog load_and_report(const std::string& path) {
    qdd::Catalog cat = qdd::load_catalog(path);
    for (const auto& q : cat.quarantined)
        std::cerr << "warning: " << q.source << " row " << q.row
                  << (q.name.empty() ? "" : " (" + q.name + ")") << " quarantined: "
                  << q.diagnostic << '\n';
    return cat;
}

const qdd::MotorRecord& find_motor(const qdd::Catalog& cat, const std::string& name) {
    if (const auto* m = cat.find(name)) return *m;
    std::string msg = "unknown motor '" + name + "'; catalog has:";
    for (const auto& n : cat.names()) msg += ' ' + n;
    throw qdd::validation_error(msg);
}

qdd::Channel channel_from_token(const std::string& token) {
    if (token == "torque") return qdd::Channel::Torque;
    if (token == "velocity") return qdd::Channel::Velocity;
    if (token == "current") return qdd::Channel::Current;
    if (token == "voltage") return qdd::Channel::Voltage;
    throw qdd::validation_error("unknown channel '" + token +
                                "' (expected torque, velocity, current or voltage)");
}

std::string flags_text(const qdd::ResolutionFlags& flags, char sep) {
    std::string out;
    auto add = [&](const char* token) {
        if (!out.empty()) out += sep;
        out += token;
    };
    if (flags.kb_assumed) add("kb_assumed");
    if (flags.km_derived) add("km_derived");
    if (flags.km_inconsistent) add("km_inconsistent");
    return out;
}

struct MetricUnit {
    double scale = 1.0;
    const char* label = "";
};

MetricUnit metric_unit(qdd::Metric m, Units u) {
    using qdd::Metric;
    if (u == Units::Display) {
        switch (m) {
            case Metric::SM: return {1e3, "ms"};
            case Metric::ST: return {1e3, "g_a2_n2"};
            case Metric::MassSM: return {1e3, "kg_ms"};
            case Metric::MassST: return {1e3, "kg_g_a2_n2"};
            case Metric::Kts: return {1.0, "nm_kg_sqrtc"};
        }
    }
    switch (m) {
        case Metric::SM: return {1.0, "s"};
        case Metric::ST: return {1.0, "kg_a2_n2"};
        case Metric::MassSM: return {1.0, "kg_s"};
        case Metric::MassST: return {1.0, "kg2_a2_n2"};
        case Metric::Kts: return {1.0, "nm_kg_sqrtc"};
    }
    return {};
}

ordered_json value_json(const qdd::Uncertain& u, double scale, const char* unit) {
    ordered_json v;
    v["value"] = u.value * scale;
    if (u.sigma > 0.0) v["sigma"] = u.sigma * scale;
    v["unit"] = unit;
    return v;
}

// ---------------------------------------------------------------------------
// metrics

struct MetricsArgs {
    std::string catalog;
    std::vector<std::string> motors;
};

int run_metrics(const GlobalOptions& g, const MetricsArgs& a) {
    const Units units = g.resolve_units(Units::Display);
    const Format f = g.fmt();
    const qdd::Catalog cat = load_and_report(resolve_catalog_path(a.catalog));

    std::vector<const qdd::MotorRecord*> selected;
    if (a.motors.empty())
        for (const auto& e : cat.entries) selected.push_back(&e.motor);
    else
        for (const auto& name : a.motors) selected.push_back(&find_motor(cat, name));

    const auto u_sm = metric_unit(qdd::Metric::SM, units);
    const auto u_st = metric_unit(qdd::Metric::ST, units);
    const auto u_msm = metric_unit(qdd::Metric::MassSM, units);
    const auto u_mst = metric_unit(qdd::Metric::MassST, units);
    const auto u_kts = metric_unit(qdd::Metric::Kts, units);

    if (f == Format::Json) {
        ordered_json doc;
        doc["units"] = units == Units::Display ? "display" : "si";
        doc["motors"] = ordered_json::array();
        for (const auto* m : selected) {
            const qdd::MetricReport rep = qdd::metric_report(*m);
            ordered_json row;
            row["name"] = m->name;
            row["s_m"] = value_json(rep.s_m, u_sm.scale, u_sm.label);
            row["s_t"] = value_json(rep.s_t, u_st.scale, u_st.label);
            row["m_s_m"] = value_json(rep.m_s_m, u_msm.scale, u_msm.label);
            row["m_s_t"] = value_json(rep.m_s_t, u_mst.scale, u_mst.label);
            if (rep.k_ts) row["k_ts"] = value_json(*rep.k_ts, u_kts.scale, u_kts.label);
            const std::string flags = flags_text(rep.flags, ';');
            row["flags"] = flags;
            doc["motors"].push_back(std::move(row));
        }
        emit_json(doc);
        return 0;
    }

    std::vector<std::string> headers = {"name",
                                        std::string("s_m_") + u_sm.label,
                                        std::string("s_t_") + u_st.label,
                                        std::string("m_s_m_") + u_msm.label,
                                        std::string("m_s_t_") + u_mst.label,
                                        std::string("k_ts_") + u_kts.label,
                                        "flags"};
    std::vector<std::vector<std::string>> rows;
    for (const auto* m : selected) {
        const qdd::MetricReport rep = qdd::metric_report(*m);
        auto cell = [&](const qdd::Uncertain& u, double scale) {
            std::string s = fmt_cell(u.value * scale, f);
            if (f == Format::Table && u.sigma > 0.0) s += " +-" + fmt3(u.sigma * scale);
            return s;
        };
        const std::string flags = flags_text(rep.flags, ';');
        rows.push_back({m->name, cell(rep.s_m, u_sm.scale), cell(rep.s_t, u_st.scale),
                        cell(rep.m_s_m, u_msm.scale), cell(rep.m_s_t, u_mst.scale),
                        rep.k_ts ? cell(*rep.k_ts, u_kts.scale) : std::string("-"),
                        flags.empty() ? "-" : flags});
    }
    emit_rows(f, headers, rows);
    return 0;
}

// ---------------------------------------------------------------------------
// rank

struct RankArgs {
    std::string catalog;
    std::string by = "s_m";
    bool weighted = false;
    bool ascending = false;
    bool descending = false;
};

int run_rank(const GlobalOptions& g, const RankArgs& a) {
    const Units units = g.resolve_units(Units::Display);
    const Format f = g.fmt();
    if (a.ascending && a.descending)
        throw qdd::validation_error("--ascending and --descending are mutually exclusive");

    qdd::Metric metric = qdd::metric_from_token(a.by);
    if (a.weighted) {
        if (metric == qdd::Metric::SM)
            metric = qdd::Metric::MassSM;
        else if (metric == qdd::Metric::ST)
            metric = qdd::Metric::MassST;
        else
            throw qdd::validation_error("--weighted applies to s_m or s_t only");
    }

    const qdd::Catalog cat = load_and_report(resolve_catalog_path(a.catalog));
    qdd::RankReport rep;
    if (a.ascending || a.descending)
        rep = qdd::rank(cat, metric, a.ascending);
    else
        rep = qdd::rank(cat, metric);

    if (rep.rows.empty())
        std::cerr << "notice: no catalog record resolves metric " << qdd::metric_token(metric)
                  << '\n';

    const auto unit = metric_unit(metric, units);
    const std::string value_header = std::string(qdd::metric_token(metric)) + "_" + unit.label;

    if (f == Format::Json) {
        ordered_json doc;
        doc["metric"] = qdd::metric_token(metric);
        doc["order"] = rep.ascending ? "ascending" : "descending";
        doc["units"] = units == Units::Display ? "display" : "si";
        doc["ranking"] = ordered_json::array();
        for (std::size_t i = 0; i < rep.rows.size(); ++i) {
            ordered_json row;
            row["rank"] = i + 1;
            row["name"] = rep.rows[i].name;
            row["value"] = value_json(rep.rows[i].value, unit.scale, unit.label);
            row["mass_kg"] = rep.rows[i].mass_kg;
            doc["ranking"].push_back(std::move(row));
        }
        doc["unresolved"] = rep.unresolved;
        emit_json(doc);
        return 0;
    }

    std::vector<std::string> headers = {"rank", "name", value_header, "mass_kg"};
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
        auto& r = rep.rows[i];
        std::string value = fmt_cell(r.value.value * unit.scale, f);
        if (f == Format::Table && r.value.sigma > 0.0) value += " +-" + fmt3(r.value.sigma * unit.scale);
        rows.push_back({std::to_string(i + 1), r.name, value, fmt_cell(r.mass_kg, f)});
    }
    for (const auto& name : rep.unresolved) rows.push_back({"-", name, "unresolved", "-"});
    emit_rows(f, headers, rows);
    return 0;
}

// ---------------------------------------------------------------------------
// compare

struct CompareArgs {
    std::string catalog;
    std::string motor_a;
    std::string motor_b;
    std::string match = "inertia";
    double torque = 0.0;
    double current = 0.0;
};

int run_compare(const GlobalOptions& g, const CompareArgs& a) {
    const Units units = g.resolve_units(Units::Display);
    const Format f = g.fmt();
    const qdd::Catalog cat = load_and_report(resolve_catalog_path(a.catalog));
    const qdd::MotorRecord& ma = find_motor(cat, a.motor_a);
    const qdd::MotorRecord& mb = find_motor(cat, a.motor_b);

    double n_a = 1.0, n_b = 1.0;
    if (a.match == "inertia") {
        n_a = qdd::ratio_for_matched_inertia(ma, {mb, 1.0});
        n_b = 1.0;
    } else {
        if (!(a.torque > 0.0) || !(a.current > 0.0))
            throw qdd::validation_error("--match torque requires --torque and --current");
        n_a = qdd::ratio_for_torque(ma, a.torque, a.current);
        n_b = qdd::ratio_for_torque(mb, a.torque, a.current);
    }
    const qdd::EffectiveConstants ea = qdd::effective_constants({ma, n_a});
    const qdd::EffectiveConstants eb = qdd::effective_constants({mb, n_b});
    const qdd::Uncertain sm_a = qdd::responsiveness_metric(ma);
    const qdd::Uncertain sm_b = qdd::responsiveness_metric(mb);
    const qdd::Uncertain st_a = qdd::torque_specific_inertia(ma);
    const qdd::Uncertain st_b = qdd::torque_specific_inertia(mb);

    const double k_ta_ratio = ea.k_ta.value / eb.k_ta.value;
    const double k_ma_ratio = ea.k_ma.value / eb.k_ma.value;
    const double s_m_advantage = sm_b.value / sm_a.value;
    const double s_t_advantage = st_b.value / st_a.value;

    const auto u_sm = metric_unit(qdd::Metric::SM, units);

    if (f == Format::Json) {
        ordered_json doc;
        doc["motor_a"] = ma.name;
        doc["motor_b"] = mb.name;
        doc["match"] = a.match;
        doc["n_a"] = n_a;
        doc["n_b"] = n_b;
        doc["k_ta_a"] = value_json(ea.k_ta, 1.0, "nm_a");
        doc["k_ta_b"] = value_json(eb.k_ta, 1.0, "nm_a");
        doc["k_ma_a"] = value_json(ea.k_ma, 1.0, "nm_sqrtw");
        doc["k_ma_b"] = value_json(eb.k_ma, 1.0, "nm_sqrtw");
        doc["j_a_a"] = value_json(ea.j_a, 1.0, "kgm2");
        doc["j_a_b"] = value_json(eb.j_a, 1.0, "kgm2");
        doc["s_m_a"] = value_json(sm_a, u_sm.scale, u_sm.label);
        doc["s_m_b"] = value_json(sm_b, u_sm.scale, u_sm.label);
        doc["k_ta_ratio"] = k_ta_ratio;
        doc["k_ma_ratio"] = k_ma_ratio;
        doc["s_m_advantage"] = s_m_advantage;
        doc["s_t_advantage"] = s_t_advantage;
        doc["k_ta_winner"] = k_ta_ratio >= 1.0 ? ma.name : mb.name;
        doc["k_ma_winner"] = k_ma_ratio >= 1.0 ? ma.name : mb.name;
        emit_json(doc);
        return 0;
    }

    std::vector<std::string> headers = {"quantity", "value"};
    std::vector<std::vector<std::string>> rows;
    auto push = [&](const std::string& key, double v) { rows.push_back({key, fmt_cell(v, f)}); };
    auto push_text = [&](const std::string& key, const std::string& v) { rows.push_back({key, v}); };
    push_text("motor_a", ma.name);
    push_text("motor_b", mb.name);
    push_text("match", a.match);
    push("n_a", n_a);
    push("n_b", n_b);
    push("k_ta_a_nm_a", ea.k_ta.value);
    push("k_ta_b_nm_a", eb.k_ta.value);
    push("k_ma_a_nm_sqrtw", ea.k_ma.value);
    push("k_ma_b_nm_sqrtw", eb.k_ma.value);
    push("j_a_a_kgm2", ea.j_a.value);
    push("j_a_b_kgm2", eb.j_a.value);
    push(std::string("s_m_a_") + u_sm.label, sm_a.value * u_sm.scale);
    push(std::string("s_m_b_") + u_sm.label, sm_b.value * u_sm.scale);
    push("k_ta_ratio", k_ta_ratio);
    push("k_ma_ratio", k_ma_ratio);
    push("s_m_advantage", s_m_advantage);
    push("s_t_advantage", s_t_advantage);
    push_text("k_ta_winner", k_ta_ratio >= 1.0 ? ma.name : mb.name);
    push_text("k_ma_winner", k_ma_ratio >= 1.0 ? ma.name : mb.name);
    emit_rows(f, headers, rows);
    return 0;
}

// ---------------------------------------------------------------------------
// sysid

struct SysidArgs {
    std::vector<std::string> files;  // with-rotor [, without-rotor]
    double ratio = 0.0;
    double band_lo = 1.0;
    double band_hi = 40.0;
    double coherence_floor = 0.8;
    std::size_t segment_length = 0;  // 0 = auto
    double overlap = 0.5;
    std::string input = "torque";
    std::string output = "velocity";
};

struct SysidRun {
    std::string file;
    qdd::FirstOrderFit fit;
    qdd::FrequencyResponse fr;
};

qdd::FirstOrderFit fit_with_coherence_context(const qdd::FrequencyResponse& fr,
                                              const qdd::TimeSeries& ts,
                                              const qdd::FitBand& band, qdd::Channel input,
                                              qdd::Channel output) {
    try {
        return qdd::fit_first_order(fr, ts, band, input, output);
    } catch (const qdd::analysis_error& e) {
        double max_coh = 0.0;
        std::size_t in_band = 0, passing = 0;
        for (std::size_t i = 0; i < fr.frequency.size(); ++i) {
            if (fr.frequency[i] < band.f_lo || fr.frequency[i] > band.f_hi) continue;
            ++in_band;
            max_coh = std::max(max_coh, fr.coherence[i]);
            if (fr.coherence[i] >= band.coherence_floor) ++passing;
        }
        std::ostringstream os;
        os << e.what() << " [band " << band.f_lo << "-" << band.f_hi << " Hz: " << in_band
           << " bins, " << passing << " with coherence >= " << band.coherence_floor
           << ", max coherence " << fmt3(max_coh) << "]";
        throw qdd::analysis_error(os.str());
    }
}

int run_sysid(const GlobalOptions& g, const SysidArgs& a) {
    const Format f = g.fmt();
    if (a.files.empty() || a.files.size() > 2)
        throw qdd::validation_error("sysid takes one or two time-series files");
    if (a.files.size() == 2 && !(a.ratio > 0.0))
        throw qdd::validation_error("two-file differential inertia requires --ratio");

    qdd::WelchParams params;
    params.segment_length = a.segment_length;
    params.overlap = a.overlap;
    qdd::FitBand band{a.band_lo, a.band_hi, a.coherence_floor};
    const qdd::Channel input = channel_from_token(a.input);
    const qdd::Channel output = channel_from_token(a.output);

    std::vector<SysidRun> runs;
    for (const auto& file : a.files) {
        const qdd::TimeSeries ts = qdd::read_timeseries_csv(file);
        qdd::FrequencyResponse fr = qdd::welch_tf(ts, input, output, params);
        qdd::FirstOrderFit fit = fit_with_coherence_context(fr, ts, band, input, output);
        runs.push_back({file, std::move(fit), std::move(fr)});
    }

    std::optional<qdd::Uncertain> j_m;
    if (runs.size() == 2) {
        const auto sigma_of = [](const qdd::FirstOrderFit& fit) {
            return fit.j_ci ? *fit.j_ci / 2.0 : 0.0;
        };
        j_m = qdd::differential_inertia({runs[0].fit.j, sigma_of(runs[0].fit)},
                                        {runs[1].fit.j, sigma_of(runs[1].fit)}, a.ratio);
    }

    if (f == Format::Json) {
        ordered_json doc;
        doc["runs"] = ordered_json::array();
        for (const auto& run : runs) {
            ordered_json r;
            r["file"] = run.file;
            r["j_kgm2"] = run.fit.j;
            r["b_nms_rad"] = run.fit.b;
            r["vaf_percent"] = run.fit.vaf;
            if (run.fit.j_ci) r["j_ci"] = *run.fit.j_ci;
            if (run.fit.b_ci) r["b_ci"] = *run.fit.b_ci;
            r["segments"] = run.fr.segment_count;
            r["stage1_bins"] = run.fit.diagnostics.stage1_bins;
            r["stage1_j"] = run.fit.diagnostics.stage1_j;
            r["stage1_b"] = run.fit.diagnostics.stage1_b;
            r["stage1_residual"] = run.fit.diagnostics.stage1_residual;
            r["stage1_iterations"] = run.fit.diagnostics.stage1_iterations;
            r["stage2_iterations"] = run.fit.diagnostics.stage2_iterations;
            doc["runs"].push_back(std::move(r));
        }
        if (j_m) {
            doc["ratio"] = a.ratio;
            doc["j_m_kgm2"] = j_m->value;
            doc["j_m_ci"] = 2.0 * j_m->sigma;
        }
        emit_json(doc);
        return 0;
    }

    std::vector<std::string> headers = {"file", "j_kgm2", "b_nms_rad", "vaf_percent",
                                        "segments", "stage1_bins"};
    std::vector<std::vector<std::string>> rows;
    for (const auto& run : runs)
        rows.push_back({run.file, fmt_cell(run.fit.j, f), fmt_cell(run.fit.b, f),
                        fmt_cell(run.fit.vaf, f), std::to_string(run.fr.segment_count),
                        std::to_string(run.fit.diagnostics.stage1_bins)});
    emit_rows(f, headers, rows);
    if (j_m) {
        std::vector<std::string> h2 = {"quantity", "value"};
        std::vector<std::vector<std::string>> r2 = {
            {"ratio", fmt_cell(a.ratio, f)},
            {"j_m_kgm2", fmt_cell(j_m->value, f)},
            {"j_m_ci", fmt_cell(2.0 * j_m->sigma, f)},
        };
        if (f == Format::Table) std::cout << '\n';
        emit_rows(f, h2, r2);
    }
    return 0;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
    qdd::SimConfig cfg;
    std::string out;
};

int run_simulate(const GlobalOptions&, const SimulateArgs& a) {
    a.cfg.validate();
    const qdd::TimeSeries ts = qdd::simulate_backdrive_run(a.cfg);
    qdd::write_timeseries_csv(ts, a.out);
    std::cout << "wrote " << ts.size() << " samples at " << ts.sample_rate << " Hz to " << a.out
              << '\n';
    return 0;
}

// ---------------------------------------------------------------------------
// isolines

struct IsolinesArgs {
    std::string catalog;
    std::string metric = "s_m";
    double k_min = 0.0;
    double k_max = 0.0;
    std::string levels;  // comma-separated explicit levels
    int per_decade = 1;
    std::size_t samples = 64;
    bool no_scatter = false;
};

int run_isolines(const GlobalOptions& g, const IsolinesArgs& a) {
    const Format f = g.fmt();
    const qdd::Metric metric = qdd::metric_from_token(a.metric);
    if (metric != qdd::Metric::SM && metric != qdd::Metric::ST)
        throw qdd::validation_error("isolines support s_m and s_t");

    std::optional<qdd::Catalog> cat;
    std::string catalog_path;
    try {
        catalog_path = resolve_catalog_path(a.catalog);
    } catch (const qdd::validation_error&) {
        catalog_path.clear();
    }
    if (!catalog_path.empty()) cat = load_and_report(catalog_path);

    std::optional<qdd::ScatterTable> scatter;
    if (cat && !a.no_scatter) scatter = qdd::scatter_data(*cat, metric);

    double k_min = a.k_min, k_max = a.k_max;
    if (!(k_min > 0.0) || !(k_max > 0.0)) {
        if (!scatter || scatter->points.empty())
            throw qdd::validation_error(
                "no K range: pass --k-min/--k-max or a catalog with resolvable records");
        double lo = scatter->points.front().k, hi = lo;
        for (const auto& p : scatter->points) {
            lo = std::min(lo, p.k);
            hi = std::max(hi, p.k);
        }
        k_min = lo / 2.0;
        k_max = hi * 2.0;
    }

    qdd::IsolineSet set;
    if (!a.levels.empty()) {
        std::vector<double> levels;
        std::stringstream ss(a.levels);
        std::string tok;
        while (std::getline(ss, tok, ','))
            levels.push_back(qdd::detail::parse_number(qdd::detail::trim(tok), "--levels"));
        set = qdd::isolines(metric, k_min, k_max, std::move(levels), a.samples);
    } else {
        if (!cat)
            throw qdd::validation_error("no levels: pass --levels or a catalog to span");
        set = qdd::isolines(*cat, metric, k_min, k_max, a.per_decade, a.samples);
    }

    const char* axis_label =
        (scatter ? scatter->axis : qdd::default_scatter_axis(metric)) == qdd::ScatterAxis::KM
            ? "k_m_nm_sqrtw"
            : "k_t_nm_a";

    if (f == Format::Json) {
        ordered_json doc;
        doc["metric"] = qdd::metric_token(metric);
        doc["x_axis"] = axis_label;
        doc["y_axis"] = "j_m_kgm2";
        doc["log_log"] = true;
        doc["lines"] = ordered_json::array();
        for (const auto& line : set.lines) {
            ordered_json l;
            l["level"] = line.level;
            l["points"] = ordered_json::array();
            for (const auto& p : line.points) l["points"].push_back({p[0], p[1]});
            doc["lines"].push_back(std::move(l));
        }
        if (scatter) {
            doc["motors"] = ordered_json::array();
            for (const auto& p : scatter->points) {
                ordered_json m;
                m["name"] = p.name;
                m["k"] = p.k;
                m["j_m"] = p.j_m;
                m["metric"] = p.metric;
                doc["motors"].push_back(std::move(m));
            }
        }
        emit_json(doc);
        return 0;
    }

    // Plot-data rows; '# axes: log-log' hints at the intended scales.
    std::vector<std::string> headers = {"name", "x", "y", "metric", "level"};
    std::vector<std::vector<std::string>> rows;
    for (const auto& line : set.lines)
        for (const auto& p : line.points)
            rows.push_back({"isoline", fmt_cell(p[0], f), fmt_cell(p[1], f),
                            fmt_cell(line.level, f), fmt_cell(line.level, f)});
    if (scatter)
        for (const auto& p : scatter->points)
            rows.push_back({p.name, fmt_cell(p.k, f), fmt_cell(p.j_m, f), fmt_cell(p.metric, f),
                            ""});
    std::cout << "# axes: log-log; x: " << axis_label << "; y: j_m_kgm2; metric: "
              << qdd::metric_token(metric) << '\n';
    emit_rows(f, headers, rows);
    return 0;
}

// ---------------------------------------------------------------------------
// convert / thin-ring / fit-constant

struct ConvertArgs {
    std::string winding;
    double r_ll = 0.0;
    double l_ll = 0.0;  // 0 = not given
    std::string frame = "per-winding";
};

int run_convert(const GlobalOptions& g, const ConvertArgs& a) {
    const Format f = g.fmt();
    const qdd::Winding w = qdd::detail::parse_winding(a.winding);
    const qdd::ConversionFrame frame = a.frame == "wye-equivalent"
                                           ? qdd::ConversionFrame::WyeEquivalent
                                           : qdd::ConversionFrame::PerWinding;
    const bool have_l = a.l_ll > 0.0;
    const qdd::PhaseParameters phase =
        qdd::phase_from_line({a.r_ll, have_l ? a.l_ll : 1.0, w}, frame);

    if (f == Format::Json) {
        ordered_json doc;
        doc["winding"] = a.winding;
        doc["frame"] = a.frame;
        doc["r_phase_ohm"] = phase.r_phase;
        if (have_l) doc["l_eff_h"] = phase.l_eff;
        emit_json(doc);
        return 0;
    }
    std::vector<std::string> headers = {"quantity", "value"};
    std::vector<std::vector<std::string>> rows = {{"r_phase_ohm", fmt_cell(phase.r_phase, f)}};
    if (have_l) rows.push_back({"l_eff_h", fmt_cell(phase.l_eff, f)});
    emit_rows(f, headers, rows);
    return 0;
}

struct ThinRingArgs {
    double mass = 0.0;
    double radius = 0.0;
    double mass_sigma = 0.0;
    double radius_sigma = 0.0;
};

int run_thin_ring(const GlobalOptions& g, const ThinRingArgs& a) {
    const Format f = g.fmt();
    const qdd::Uncertain j =
        qdd::thin_ring_inertia({a.mass, a.mass_sigma}, {a.radius, a.radius_sigma});
    if (f == Format::Json) {
        ordered_json doc;
        doc["j_kgm2"] = j.value;
        if (j.sigma > 0.0) doc["j_sigma"] = j.sigma;
        emit_json(doc);
        return 0;
    }
    std::vector<std::string> headers = {"quantity", "value"};
    std::vector<std::vector<std::string>> rows = {{"j_kgm2", fmt_cell(j.value, f)}};
    if (j.sigma > 0.0) rows.push_back({"j_sigma", fmt_cell(j.sigma, f)});
    emit_rows(f, headers, rows);
    return 0;
}

struct FitConstantArgs {
    std::string file;
    std::string x = "current";
    std::string y = "torque";
    bool stall_reduce = false;
    double trim = 0.5;
    double step_threshold = 0.5;
};

int run_fit_constant(const GlobalOptions& g, const FitConstantArgs& a) {
    const Format f = g.fmt();
    const qdd::TimeSeries ts = qdd::read_timeseries_csv(a.file);
    const qdd::Channel cx = channel_from_token(a.x);
    const qdd::Channel cy = channel_from_token(a.y);

    std::vector<double> xs, ys;
    if (a.stall_reduce) {
        const auto pick = [](const qdd::StallPoint& p, qdd::Channel c) {
            if (c == qdd::Channel::Torque) return p.mean_torque;
            if (c == qdd::Channel::Current) return p.mean_current;
            throw qdd::validation_error("--stall-reduce provides torque and current only");
        };
        const auto points = qdd::stall_test_reduce(ts, {a.trim, a.step_threshold});
        for (const auto& p : points) {
            xs.push_back(pick(p, cx));
            ys.push_back(pick(p, cy));
        }
    } else {
        const auto sx = ts.channel(cx);
        const auto sy = ts.channel(cy);
        xs.assign(sx.begin(), sx.end());
        ys.assign(sy.begin(), sy.end());
    }
    const qdd::LinearFit fit = qdd::fit_constant(xs, ys);

    if (f == Format::Json) {
        ordered_json doc;
        doc["x"] = a.x;
        doc["y"] = a.y;
        doc["n"] = xs.size();
        doc["slope"] = fit.slope;
        doc["slope_ci"] = fit.slope_uncertainty;
        doc["intercept"] = fit.intercept;
        doc["r_squared"] = fit.r_squared;
        emit_json(doc);
        return 0;
    }
    std::vector<std::string> headers = {"quantity", "value"};
    std::vector<std::vector<std::string>> rows = {
        {"n", std::to_string(xs.size())},
        {"slope", fmt_cell(fit.slope, f)},
        {"slope_ci", fmt_cell(fit.slope_uncertainty, f)},
        {"intercept", fmt_cell(fit.intercept, f)},
        {"r_squared", fmt_cell(fit.r_squared, f)},
    };
    emit_rows(f, headers, rows);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"qdd: motor selection and actuator design toolkit"};
    app.require_subcommand(1);
    GlobalOptions g;
    app.add_option("--format", g.format, "output format")
        ->check(CLI::IsMember({"table", "csv", "json"}))
        ->capture_default_str();
    app.add_option("--units", g.units,
                   "unit system (default: display for metrics/rank/compare, si elsewhere)")
        ->check(CLI::IsMember({"si", "display"}));

    std::function<int()> selected;

    MetricsArgs metrics_args;
    auto* metrics = app.add_subcommand("metrics", "selection metrics per motor");
    metrics->fallthrough();
    metrics->add_option("catalog", metrics_args.catalog, "catalog CSV/JSON (or QDD_CATALOG)");
    metrics->add_option("motor", metrics_args.motors, "motor name(s); default all");
    metrics->callback([&] { selected = [&] { return run_metrics(g, metrics_args); }; });

    RankArgs rank_args;
    auto* rank = app.add_subcommand("rank", "order motors by a metric");
    rank->fallthrough();
    rank->add_option("catalog", rank_args.catalog, "catalog CSV/JSON (or QDD_CATALOG)");
    rank->add_option("--by", rank_args.by, "s_m|s_t|m_s_m|m_s_t|k_ts")->capture_default_str();
    rank->add_flag("--weighted", rank_args.weighted, "mass-weighted variant of s_m/s_t");
    rank->add_flag("--ascending", rank_args.ascending, "force ascending order");
    rank->add_flag("--descending", rank_args.descending, "force descending order");
    rank->callback([&] { selected = [&] { return run_rank(g, rank_args); }; });

    CompareArgs compare_args;
    auto* compare = app.add_subcommand("compare", "two motors at matched transmissions");
    compare->fallthrough();
    compare->add_option("catalog", compare_args.catalog, "catalog CSV/JSON (or QDD_CATALOG)");
    compare->add_option("motor_a", compare_args.motor_a, "first motor")->required();
    compare->add_option("motor_b", compare_args.motor_b, "second motor (reference, N = 1)")
        ->required();
    compare->add_option("--match", compare_args.match, "inertia|torque")
        ->check(CLI::IsMember({"inertia", "torque"}))
        ->capture_default_str();
    compare->add_option("--torque", compare_args.torque, "target output torque [N·m]");
    compare->add_option("--current", compare_args.current, "current limit [A]");
    compare->callback([&] { selected = [&] { return run_compare(g, compare_args); }; });

    SysidArgs sysid_args;
    auto* sysid = app.add_subcommand("sysid", "first-order fit from dyno time series");
    sysid->fallthrough();
    sysid->add_option("files", sysid_args.files,
                      "time-series CSV; optionally a second no-rotor file")
        ->required();
    sysid->add_option("--ratio", sysid_args.ratio, "transmission ratio N for J_m extraction");
    std::vector<double> band_edges;
    sysid->add_option("--band", band_edges, "fit band edges [Hz] (default 1 40)")
        ->expected(2);
    sysid->add_option("--coherence-floor", sysid_args.coherence_floor,
                      "exclude bins below this coherence")
        ->capture_default_str();
    sysid->add_option("--segment-length", sysid_args.segment_length,
                      "Welch segment length (power of two; 0 = auto)");
    sysid->add_option("--overlap", sysid_args.overlap, "Welch overlap fraction")
        ->capture_default_str();
    sysid->add_option("--input-channel", sysid_args.input, "input channel")
        ->capture_default_str();
    sysid->add_option("--output-channel", sysid_args.output, "output channel")
        ->capture_default_str();
    sysid->callback([&] {
        selected = [&] {
            if (!band_edges.empty()) {
                sysid_args.band_lo = band_edges[0];
                sysid_args.band_hi = band_edges[1];
            }
            return run_sysid(g, sysid_args);
        };
    });

    SimulateArgs sim_args;
    auto* simulate = app.add_subcommand("simulate", "synthetic backdrive dyno run");
    simulate->fallthrough();
    simulate->add_option("--j", sim_args.cfg.true_j, "true inertia [kg·m²]")
        ->capture_default_str();
    simulate->add_option("--b", sim_args.cfg.true_b, "true damping [N·m·s/rad]")
        ->capture_default_str();
    simulate->add_option("--duration", sim_args.cfg.duration, "record length [s]")
        ->capture_default_str();
    simulate->add_option("--rate", sim_args.cfg.sample_rate, "sample rate [Hz]")
        ->capture_default_str();
    simulate->add_option("--bandwidth", sim_args.cfg.excitation.bandwidth,
                         "excitation bandwidth [Hz]")
        ->capture_default_str();
    simulate->add_option("--amplitude", sim_args.cfg.excitation.amplitude,
                         "excitation peak torque [N·m]")
        ->capture_default_str();
    simulate->add_option("--seed", sim_args.cfg.excitation.seed, "RNG seed")
        ->capture_default_str();
    simulate->add_option("--noise-torque", sim_args.cfg.noise.torque_sigma,
                         "torque sensor noise sigma [N·m]")
        ->capture_default_str();
    simulate->add_option("--noise-velocity", sim_args.cfg.noise.velocity_sigma,
                         "velocity noise sigma [rad/s]")
        ->capture_default_str();
    simulate->add_option("--out", sim_args.out, "output CSV path")->required();
    simulate->callback([&] { selected = [&] { return run_simulate(g, sim_args); }; });

    IsolinesArgs iso_args;
    auto* isolines = app.add_subcommand("isolines", "selection-chart plot data");
    isolines->fallthrough();
    isolines->add_option("catalog", iso_args.catalog,
                         "catalog CSV/JSON (optional; or QDD_CATALOG)");
    isolines->add_option("--metric", iso_args.metric, "s_m|s_t")->capture_default_str();
    isolines->add_option("--k-min", iso_args.k_min, "K axis lower bound");
    isolines->add_option("--k-max", iso_args.k_max, "K axis upper bound");
    isolines->add_option("--levels", iso_args.levels, "explicit comma-separated levels");
    isolines->add_option("--per-decade", iso_args.per_decade, "auto levels per decade")
        ->capture_default_str();
    isolines->add_option("--samples", iso_args.samples, "points per polyline")
        ->capture_default_str();
    isolines->add_flag("--no-scatter", iso_args.no_scatter, "omit catalog scatter rows");
    isolines->callback([&] { selected = [&] { return run_isolines(g, iso_args); }; });

    ConvertArgs convert_args;
    auto* convert = app.add_subcommand("convert", "line-to-line to phase-frame conversion");
    convert->fallthrough();
    convert->add_option("--winding", convert_args.winding, "wye|delta")
        ->check(CLI::IsMember({"wye", "delta"}))
        ->required();
    convert->add_option("--rll", convert_args.r_ll, "line-to-line resistance [ohm]")->required();
    convert->add_option("--lll", convert_args.l_ll, "line-to-line inductance [H]");
    convert->add_option("--frame", convert_args.frame, "per-winding|wye-equivalent")
        ->check(CLI::IsMember({"per-winding", "wye-equivalent"}))
        ->capture_default_str();
    convert->callback([&] { selected = [&] { return run_convert(g, convert_args); }; });

    ThinRingArgs ring_args;
    auto* thin_ring = app.add_subcommand("thin-ring", "rotor inertia from ring mass and radius");
    thin_ring->fallthrough();
    thin_ring->add_option("--mass", ring_args.mass, "ring mass [kg]")->required();
    thin_ring->add_option("--radius", ring_args.radius, "ring radius [m]")->required();
    thin_ring->add_option("--mass-sigma", ring_args.mass_sigma, "mass sigma [kg]");
    thin_ring->add_option("--radius-sigma", ring_args.radius_sigma, "radius sigma [m]");
    thin_ring->callback([&] { selected = [&] { return run_thin_ring(g, ring_args); }; });

    FitConstantArgs fitc_args;
    auto* fit_constant = app.add_subcommand("fit-constant", "line fit between two channels");
    fit_constant->fallthrough();
    fit_constant->add_option("file", fitc_args.file, "time-series CSV")->required();
    fit_constant->add_option("--x", fitc_args.x, "x channel")->capture_default_str();
    fit_constant->add_option("--y", fitc_args.y, "y channel")->capture_default_str();
    fit_constant->add_flag("--stall-reduce", fitc_args.stall_reduce,
                           "average steady command levels first");
    fit_constant->add_option("--trim", fitc_args.trim, "seconds trimmed per segment end")
        ->capture_default_str();
    fit_constant->add_option("--step-threshold", fitc_args.step_threshold,
                             "current jump starting a new level [A]")
        ->capture_default_str();
    fit_constant->callback([&] { selected = [&] { return run_fit_constant(g, fitc_args); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        return selected ? selected() : 2;
    } catch (const qdd::analysis_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    } catch (const qdd::io_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const qdd::validation_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const qdd::error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
