#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "qdd/detail/csv.hpp"
#include "qdd/errors.hpp"
#include "qdd/motor.hpp"

namespace qdd {

struct CatalogEntry {
    MotorRecord motor;
    std::string source;  // file the record came from
    std::size_t row = 0; // 1-based data-row index within the source
};

struct QuarantinedRow {
    std::string source;
    std::size_t row = 0;
    std::string name;  // empty when the name cell itself was unusable
    std::string diagnostic;
};

struct Catalog {
    std::vector<CatalogEntry> entries;
    std::vector<QuarantinedRow> quarantined;

    const MotorRecord* find(std::string_view name) const {
        for (const auto& e : entries)
            if (e.motor.name == name) return &e.motor;
        return nullptr;
    }

    std::vector<std::string> names() const {
        std::vector<std::string> out;
        out.reserve(entries.size());
        for (const auto& e : entries) out.push_back(e.motor.name);
        return out;
    }
};

namespace detail {

// Recognized catalog columns. Values are converted to SI on load; emission
// always uses the first (canonical) suffix listed for each field.
struct ColumnSpec {
    const char* column;  // header token, without any _sigma suffix
    const char* field;   // canonical field key
    double scale;        // multiplier to SI
};

inline constexpr ColumnSpec catalog_columns[] = {
    {"r_phase_ohm", "r_phase", 1.0},
    {"r_phase_mohm", "r_phase", 1e-3},
    {"l_eff_h", "l_eff", 1.0},
    {"l_eff_mh", "l_eff", 1e-3},
    {"l_eff_uh", "l_eff", 1e-6},
    {"k_t_nm_a", "k_t", 1.0},
    {"k_b_vs_rad", "k_b", 1.0},
    {"k_m_nm_sqrtw", "k_m", 1.0},
    {"j_m_kgm2", "j_m", 1.0},
    {"j_m_gcm2", "j_m", 1e-7},
    {"mass_kg", "mass", 1.0},
    {"mass_g", "mass", 1e-3},
    {"gap_radius_m", "gap_radius", 1.0},
    {"gap_radius_mm", "gap_radius", 1e-3},
    {"length_m", "length", 1.0},
    {"length_mm", "length", 1e-3},
    {"r_th_c_w", "r_th", 1.0},
};

struct ResolvedColumn {
    const ColumnSpec* spec = nullptr;  // null for name / winding
    bool is_sigma = false;
    bool is_name = false;
    bool is_winding = false;
};

inline ResolvedColumn resolve_column(const std::string& header, const std::string& source) {
    ResolvedColumn out;
    if (header == "name") {
        out.is_name = true;
        return out;
    }
    if (header == "winding") {
        out.is_winding = true;
        return out;
    }
    std::string base = header;
    constexpr std::string_view sigma_suffix = "_sigma";
    if (base.size() > sigma_suffix.size() &&
        std::string_view(base).substr(base.size() - sigma_suffix.size()) == sigma_suffix) {
        out.is_sigma = true;
        base.resize(base.size() - sigma_suffix.size());
    }
    for (const auto& spec : catalog_columns) {
        if (base == spec.column) {
            out.spec = &spec;
            return out;
        }
    }
    throw io_error(source + ": unknown column or unit suffix '" + header + "'");
}

// Per-field accumulation while reading one row.
struct FieldSlot {
    std::optional<double> value;
    std::optional<double> sigma;
};

inline Winding parse_winding(std::string token) {
    std::transform(token.begin(), token.end(), token.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (token == "wye") return Winding::Wye;
    if (token == "delta") return Winding::Delta;
    throw validation_error("winding must be 'wye' or 'delta', got '" + token + "'");
}

inline const char* winding_token(Winding w) {
    return w == Winding::Wye ? "wye" : "delta";
}

inline Uncertain take_required(FieldSlot& slot, const char* field) {
    if (!slot.value) throw validation_error(std::string("missing required field ") + field);
    return {*slot.value, slot.sigma.value_or(0.0)};
}

inline std::optional<Uncertain> take_optional(FieldSlot& slot) {
    if (!slot.value) return std::nullopt;
    return Uncertain{*slot.value, slot.sigma.value_or(0.0)};
}

// Assembles a MotorRecord from field slots; throws validation_error on
// missing/invalid values so the caller can quarantine.
inline MotorRecord record_from_slots(std::string name, std::optional<Winding> winding,
                                     std::vector<FieldSlot>& slots,
                                     const std::vector<std::string>& fields) {
    auto slot = [&](const char* key) -> FieldSlot& {
        for (std::size_t i = 0; i < fields.size(); ++i)
            if (fields[i] == key) return slots[i];
        throw error(std::string("internal: unknown field ") + key);
    };
    MotorRecord rec;
    if (name.empty()) throw validation_error("missing required field name");
    rec.name = std::move(name);
    if (!winding) throw validation_error("missing required field winding");
    rec.winding = *winding;
    rec.r_phase = take_required(slot("r_phase"), "r_phase");
    rec.l_eff = take_required(slot("l_eff"), "l_eff");
    rec.k_t = take_required(slot("k_t"), "k_t");
    rec.k_b = take_optional(slot("k_b"));
    rec.k_m = take_optional(slot("k_m"));
    rec.j_m = take_required(slot("j_m"), "j_m");
    rec.mass = take_required(slot("mass"), "mass");
    rec.gap_radius = take_optional(slot("gap_radius"));
    rec.length = take_optional(slot("length"));
    rec.r_th = take_optional(slot("r_th"));
    rec.validate();
    return rec;
}

inline void append_entry(Catalog& catalog, MotorRecord rec, const std::string& source,
                         std::size_t row) {
    for (const auto& e : catalog.entries)
        if (e.motor.name == rec.name)
            throw io_error(source + ": duplicate motor name '" + rec.name + "'");
    catalog.entries.push_back({std::move(rec), source, row});
}

// Canonical field order used for slot storage and CSV emission.
inline const std::vector<std::string>& canonical_fields() {
    static const std::vector<std::string> fields = {
        "r_phase", "l_eff", "k_t", "k_b", "k_m", "j_m", "mass", "gap_radius", "length", "r_th"};
    return fields;
}

}  // namespace detail

inline Catalog load_catalog_csv(std::istream& in, const std::string& source) {
    const detail::CsvTable table = detail::read_csv(in, source);

    std::vector<detail::ResolvedColumn> layout;
    layout.reserve(table.columns.size());
    for (const auto& header : table.columns) layout.push_back(detail::resolve_column(header, source));

    // Reject a header that maps one field (value or sigma) twice, e.g. both
    // j_m_kgm2 and j_m_gcm2: silently preferring one would hide data.
    for (std::size_t i = 0; i < layout.size(); ++i) {
        for (std::size_t j = i + 1; j < layout.size(); ++j) {
            const bool same_plain = (layout[i].is_name && layout[j].is_name) ||
                                    (layout[i].is_winding && layout[j].is_winding);
            const bool same_field = layout[i].spec && layout[j].spec &&
                                    std::string_view(layout[i].spec->field) == layout[j].spec->field &&
                                    layout[i].is_sigma == layout[j].is_sigma;
            if (same_plain || same_field)
                throw io_error(source + ": columns '" + table.columns[i] + "' and '" +
                               table.columns[j] + "' map to the same field");
        }
    }

    const auto& fields = detail::canonical_fields();
    Catalog catalog;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& cells = table.rows[r];
        const std::size_t row_number = r + 1;
        std::string name;
        try {
            if (cells.size() != table.columns.size())
                throw validation_error("expected " + std::to_string(table.columns.size()) +
                                       " cells, got " + std::to_string(cells.size()));
            std::optional<Winding> winding;
            std::vector<detail::FieldSlot> slots(fields.size());
            for (std::size_t c = 0; c < cells.size(); ++c) {
                const auto& cell = cells[c];
                if (cell.empty()) continue;
                const auto& col = layout[c];
                if (col.is_name) {
                    name = cell;
                } else if (col.is_winding) {
                    winding = detail::parse_winding(cell);
                } else {
                    double value;
                    try {
                        value = detail::parse_number(cell, table.columns[c]);
                    } catch (const io_error& e) {
                        throw validation_error(e.what());
                    }
                    value *= col.spec->scale;
                    std::size_t slot_index = 0;
                    while (fields[slot_index] != col.spec->field) ++slot_index;
                    if (col.is_sigma)
                        slots[slot_index].sigma = value;
                    else
                        slots[slot_index].value = value;
                }
            }
            detail::append_entry(catalog,
                                 detail::record_from_slots(name, winding, slots, fields),
                                 source, row_number);
        } catch (const validation_error& e) {
            catalog.quarantined.push_back({source, row_number, name, e.what()});
        }
    }
    return catalog;
}

inline Catalog load_catalog_json(std::istream& in, const std::string& source) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const nlohmann::json::parse_error& e) {
        throw io_error(source + ": " + e.what());
    }
    if (!doc.is_array()) throw io_error(source + ": expected a top-level array of motor objects");

    const auto& fields = detail::canonical_fields();
    Catalog catalog;
    for (std::size_t r = 0; r < doc.size(); ++r) {
        const std::size_t row_number = r + 1;
        std::string name;
        try {
            const auto& obj = doc[r];
            if (!obj.is_object()) throw validation_error("entry is not an object");
            std::optional<Winding> winding;
            std::vector<detail::FieldSlot> slots(fields.size());
            for (const auto& [key, value] : obj.items()) {
                if (value.is_null()) continue;
                const auto col = detail::resolve_column(key, source);
                if (col.is_name) {
                    if (!value.is_string()) throw validation_error("name must be a string");
                    name = value.get<std::string>();
                } else if (col.is_winding) {
                    if (!value.is_string()) throw validation_error("winding must be a string");
                    winding = detail::parse_winding(value.get<std::string>());
                } else {
                    if (!value.is_number())
                        throw validation_error("field " + key + " must be a number");
                    const double scaled = value.get<double>() * col.spec->scale;
                    std::size_t slot_index = 0;
                    while (fields[slot_index] != col.spec->field) ++slot_index;
                    if (col.is_sigma)
                        slots[slot_index].sigma = scaled;
                    else
                        slots[slot_index].value = scaled;
                }
            }
            detail::append_entry(catalog,
                                 detail::record_from_slots(name, winding, slots, fields),
                                 source, row_number);
        } catch (const validation_error& e) {
            catalog.quarantined.push_back({source, row_number, name, e.what()});
        }
    }
    return catalog;
}

inline Catalog load_catalog(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open " + path);
    const bool json_ext = path.size() >= 5 && path.substr(path.size() - 5) == ".json";
    if (json_ext) return load_catalog_json(in, path);
    // Sniff: a JSON catalog starts with '['.
    int c = in.peek();
    while (c != EOF && std::isspace(static_cast<unsigned char>(c))) {
        in.get();
        c = in.peek();
    }
    if (c == '[') return load_catalog_json(in, path);
    return load_catalog_csv(in, path);
}

inline void save_catalog_csv(const Catalog& catalog, std::ostream& out) {
    // Canonical header: SI suffix per field, sigma column after each value
    // column so a round trip preserves uncertainties.
    std::vector<const detail::ColumnSpec*> canonical;
    for (const auto& field : detail::canonical_fields())
        for (const auto& spec : detail::catalog_columns)
            if (std::string_view(spec.field) == field && spec.scale == 1.0) {
                canonical.push_back(&spec);
                break;
            }

    out << "name,winding";
    for (const auto* spec : canonical) out << ',' << spec->column << ',' << spec->column << "_sigma";
    out << '\n';

    auto cell = [&](const std::optional<Uncertain>& u) {
        if (!u) {
            out << ",,";
            return;
        }
        out << ',' << detail::format_full(u->value) << ',' << detail::format_full(u->sigma);
    };
    for (const auto& e : catalog.entries) {
        const auto& m = e.motor;
        out << m.name << ',' << detail::winding_token(m.winding);
        cell(m.r_phase);
        cell(m.l_eff);
        cell(m.k_t);
        cell(m.k_b);
        cell(m.k_m);
        cell(m.j_m);
        cell(m.mass);
        cell(m.gap_radius);
        cell(m.length);
        cell(m.r_th);
        out << '\n';
    }
}

inline void save_catalog_csv(const Catalog& catalog, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot open " + path + " for writing");
    save_catalog_csv(catalog, out);
}

// ---------------------------------------------------------------------------
// Ranking

enum class Metric { SM, ST, MassSM, MassST, Kts };

inline const char* metric_token(Metric m) {
    switch (m) {
        case Metric::SM: return "s_m";
        case Metric::ST: return "s_t";
        case Metric::MassSM: return "m_s_m";
        case Metric::MassST: return "m_s_t";
        case Metric::Kts: return "k_ts";
    }
    return "?";
}

inline Metric metric_from_token(std::string_view token) {
    for (Metric m : {Metric::SM, Metric::ST, Metric::MassSM, Metric::MassST, Metric::Kts})
        if (token == metric_token(m)) return m;
    throw validation_error("unknown metric '" + std::string(token) +
                           "' (expected s_m, s_t, m_s_m, m_s_t or k_ts)");
}

/// S_M/S_T-family metrics are costs (lower is better); K_ts is a capability.
inline bool metric_lower_is_better(Metric m) { return m != Metric::Kts; }

/// Metric value for one record, or nullopt when the record lacks the inputs
/// (e.g. K_ts without R_th). Values come from metric_report so every
/// consumer sees identical numbers.
inline std::optional<Uncertain> metric_value(const MotorRecord& rec, Metric m) {
    try {
        const MetricReport report = metric_report(rec);
        switch (m) {
            case Metric::SM: return report.s_m;
            case Metric::ST: return report.s_t;
            case Metric::MassSM: return report.m_s_m;
            case Metric::MassST: return report.m_s_t;
            case Metric::Kts: return report.k_ts;
        }
        return std::nullopt;
    } catch (const validation_error&) {
        return std::nullopt;
    }
}

struct RankedMotor {
    std::string name;
    Uncertain value;
    double mass_kg = 0.0;
};

struct RankReport {
    Metric metric = Metric::SM;
    bool ascending = true;
    std::vector<RankedMotor> rows;
    std::vector<std::string> unresolved;  // metric not computable
};

inline RankReport rank(const Catalog& catalog, Metric by, bool ascending) {
    RankReport report;
    report.metric = by;
    report.ascending = ascending;
    for (const auto& e : catalog.entries) {
        if (auto value = metric_value(e.motor, by))
            report.rows.push_back({e.motor.name, *value, e.motor.mass.value});
        else
            report.unresolved.push_back(e.motor.name);
    }
    std::stable_sort(report.rows.begin(), report.rows.end(),
                     [ascending](const RankedMotor& a, const RankedMotor& b) {
                         if (a.value.value != b.value.value)
                             return ascending ? a.value.value < b.value.value
                                              : a.value.value > b.value.value;
                         if (a.mass_kg != b.mass_kg) return a.mass_kg < b.mass_kg;
                         return a.name < b.name;
                     });
    return report;
}

/// Best-first default: ascending for cost metrics, descending for K_ts.
inline RankReport rank(const Catalog& catalog, Metric by) {
    return rank(catalog, by, metric_lower_is_better(by));
}

// ---------------------------------------------------------------------------
// Isolines and scatter data (selection-chart plot data)

struct Isoline {
    double level = 0.0;                          // metric value along the line
    std::vector<std::array<double, 2>> points;   // (K, J_m) samples
};

struct IsolineSet {
    Metric metric = Metric::SM;
    std::vector<Isoline> lines;
};

/// Powers-of-ten grid spanning [lo, hi]; per_decade > 1 inserts log-uniform
/// sublevels (e.g. 2 per decade: 1, ~3.16, 10, ...).
inline std::vector<double> decade_levels(double lo, double hi, int per_decade = 1) {
    require_positive(lo, "level range low");
    require_positive(hi, "level range high");
    if (lo > hi) throw validation_error("inverted level range");
    if (per_decade < 1) throw validation_error("levels_per_decade must be >= 1");
    const double n = per_decade;
    const auto lo_step = static_cast<long>(std::floor(std::log10(lo) * n));
    const auto hi_step = static_cast<long>(std::ceil(std::log10(hi) * n));
    std::vector<double> levels;
    for (long k = lo_step; k <= hi_step; ++k) levels.push_back(std::pow(10.0, double(k) / n));
    return levels;
}

inline IsolineSet isolines(Metric metric, double k_min, double k_max, std::vector<double> levels,
                           std::size_t samples_per_line = 64) {
    if (metric != Metric::SM && metric != Metric::ST)
        throw validation_error("isolines: metric must be s_m or s_t");
    require_positive(k_min, "k_min");
    require_positive(k_max, "k_max");
    if (k_min >= k_max) throw validation_error("isolines: inverted K range");
    if (samples_per_line < 2) throw validation_error("isolines: need at least 2 samples");
    if (levels.empty()) throw validation_error("isolines: no levels given");
    std::sort(levels.begin(), levels.end());
    for (std::size_t i = 0; i < levels.size(); ++i) {
        require_positive(levels[i], "isoline level");
        if (i > 0 && levels[i] == levels[i - 1])
            throw validation_error("isolines: duplicate level");
    }

    IsolineSet set;
    set.metric = metric;
    const double log_ratio = std::log(k_max / k_min);
    for (double level : levels) {
        Isoline line;
        line.level = level;
        line.points.reserve(samples_per_line);
        for (std::size_t i = 0; i < samples_per_line; ++i) {
            const double t = double(i) / double(samples_per_line - 1);
            const double k = k_min * std::exp(t * log_ratio);
            line.points.push_back({k, level * k * k});
        }
        set.lines.push_back(std::move(line));
    }
    return set;
}

/// Auto-leveled variant: powers of ten spanning the catalog's metric range.
inline IsolineSet isolines(const Catalog& catalog, Metric metric, double k_min, double k_max,
                           int levels_per_decade = 1, std::size_t samples_per_line = 64) {
    double lo = 0.0, hi = 0.0;
    for (const auto& e : catalog.entries) {
        if (auto v = metric_value(e.motor, metric)) {
            if (lo == 0.0 || v->value < lo) lo = v->value;
            if (v->value > hi) hi = v->value;
        }
    }
    if (lo == 0.0) throw analysis_error("isolines: no record resolves the metric");
    return isolines(metric, k_min, k_max, decade_levels(lo, hi, levels_per_decade),
                    samples_per_line);
}

enum class ScatterAxis { KM, KT };

struct ScatterPoint {
    std::string name;
    double k = 0.0;       // K_M or K_T, per axis
    double j_m = 0.0;     // [kg·m²]
    double metric = 0.0;  // metric value from metric_report
};

struct ScatterTable {
    Metric metric = Metric::SM;
    ScatterAxis axis = ScatterAxis::KM;
    bool log_log_hint = true;  // plot both axes logarithmically
    std::vector<ScatterPoint> points;
};

/// Default axis matches the metric definition (K_M for the S_M family, K_T
/// for the S_T family) so each point satisfies J = metric · K² exactly for
/// s_m and s_t.
inline ScatterAxis default_scatter_axis(Metric metric) {
    return (metric == Metric::ST || metric == Metric::MassST) ? ScatterAxis::KT : ScatterAxis::KM;
}

inline ScatterTable scatter_data(const Catalog& catalog, Metric metric,
                                 std::optional<ScatterAxis> axis = std::nullopt) {
    ScatterTable table;
    table.metric = metric;
    table.axis = axis.value_or(default_scatter_axis(metric));
    for (const auto& e : catalog.entries) {
        const auto value = metric_value(e.motor, metric);
        if (!value) continue;
        ScatterPoint p;
        p.name = e.motor.name;
        p.k = table.axis == ScatterAxis::KM ? resolved_km(e.motor).value : e.motor.k_t.value;
        p.j_m = e.motor.j_m.value;
        p.metric = value->value;
        table.points.push_back(std::move(p));
    }
    return table;
}

}  // namespace qdd
