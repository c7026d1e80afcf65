#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>

#include "qdd/errors.hpp"
#include "qdd/uncertain.hpp"

namespace qdd {

enum class Winding { Wye, Delta };

/// Frame for the Delta line-to-line conversion. PerWinding reports the
/// resistance/inductance of one physical winding (R = 3/2 * R_LL); the
/// Wye-equivalent frame reports the electrically equivalent Wye value
/// (R = R_LL / 2). Both conventions appear in vendor data.
enum class ConversionFrame { PerWinding, WyeEquivalent };

/// Per-motor physical parameters. All values SI. Optional fields may be
/// absent on datasheets; k_b and k_m have documented fallbacks.
struct MotorRecord {
    std::string name;
    Winding winding = Winding::Wye;
    Uncertain r_phase;                   // phase resistance [ohm]
    Uncertain l_eff;                     // effective phase inductance [H]
    Uncertain k_t;                       // torque constant [N·m/A]
    std::optional<Uncertain> k_b;        // back-EMF constant [V·s/rad]
    std::optional<Uncertain> k_m;        // motor constant [N·m/sqrt(W)]
    Uncertain j_m;                       // rotor inertia [kg·m²]
    Uncertain mass;                      // [kg]
    std::optional<Uncertain> gap_radius; // [m]
    std::optional<Uncertain> length;     // axial length [m]
    std::optional<Uncertain> r_th;       // thermal resistance [°C/W]

    void validate() const {
        require_positive(r_phase, "r_phase");
        require_positive(l_eff, "l_eff");
        require_positive(k_t, "k_t");
        require_positive(j_m, "j_m");
        require_positive(mass, "mass");
        if (k_b) require_positive(*k_b, "k_b");
        if (k_m) require_positive(*k_m, "k_m");
        if (gap_radius) require_positive(*gap_radius, "gap_radius");
        if (length) require_positive(*length, "length");
        if (r_th) require_positive(*r_th, "r_th");
    }
};

/// Raw line-to-line electrical measurement, before phase-frame conversion.
struct LineMeasurement {
    double r_line_line = 0.0;  // [ohm]
    double l_line_line = 0.0;  // [H]
    Winding winding = Winding::Wye;
};

struct PhaseParameters {
    double r_phase = 0.0;  // [ohm]
    double l_eff = 0.0;    // [H]
};

/// Converts a line-to-line measurement to the phase frame. Wye windings put
/// two phases in series between terminals (factor 1/2); Delta terminals see
/// one winding in parallel with the other two in series (factor 3/2 back to
/// the per-winding value).
inline PhaseParameters phase_from_line(const LineMeasurement& meas,
                                       ConversionFrame frame = ConversionFrame::PerWinding) {
    require_positive(meas.r_line_line, "r_line_line");
    require_positive(meas.l_line_line, "l_line_line");
    double factor;
    if (meas.winding == Winding::Wye) {
        factor = 0.5;
    } else {
        factor = frame == ConversionFrame::PerWinding ? 1.5 : 0.5;
    }
    return {factor * meas.r_line_line, factor * meas.l_line_line};
}

/// Inverse of phase_from_line, for round-trip checks and catalog emission.
inline LineMeasurement line_from_phase(const PhaseParameters& phase, Winding winding,
                                       ConversionFrame frame = ConversionFrame::PerWinding) {
    double factor = winding == Winding::Wye ? 0.5
                    : frame == ConversionFrame::PerWinding ? 1.5
                                                           : 0.5;
    return {phase.r_phase / factor, phase.l_eff / factor, winding};
}

/// K_M = sqrt(K_T * K_B / R_phase), with first-order sigma propagation.
inline Uncertain derive_km(const Uncertain& k_t, const Uncertain& k_b, const Uncertain& r_phase) {
    require_positive(k_t, "k_t");
    require_positive(k_b, "k_b");
    require_positive(r_phase, "r_phase");
    const double v = std::sqrt(k_t.value * k_b.value / r_phase.value);
    const double sigma = combine_sigma({v / (2.0 * k_t.value) * k_t.sigma,
                                        v / (2.0 * k_b.value) * k_b.sigma,
                                        -v / (2.0 * r_phase.value) * r_phase.sigma});
    return {v, sigma};
}

/// How optional constants were filled in for a record.
struct ResolutionFlags {
    bool kb_assumed = false;      // K_B taken equal to K_T (ideal PMSM)
    bool km_derived = false;      // K_M computed from K_T, K_B, R_phase
    bool km_inconsistent = false; // stored K_M disagrees with the derived value
};

/// K_B, falling back to K_T for ideal-PMSM behaviour when absent.
inline Uncertain resolved_kb(const MotorRecord& rec) {
    return rec.k_b ? *rec.k_b : rec.k_t;
}

/// K_M as stored, or derived from K_T, K_B, R_phase when absent.
inline Uncertain resolved_km(const MotorRecord& rec) {
    if (rec.k_m) return *rec.k_m;
    return derive_km(rec.k_t, resolved_kb(rec), rec.r_phase);
}

/// Relative tolerance for stored-vs-derived K_M agreement. Datasheet K_M
/// values show scatter well beyond measurement sigma, so disagreement flags
/// the record instead of rejecting it.
inline constexpr double km_consistency_tolerance = 0.05;

inline ResolutionFlags resolution_flags(const MotorRecord& rec) {
    ResolutionFlags flags;
    flags.kb_assumed = !rec.k_b.has_value();
    flags.km_derived = !rec.k_m.has_value();
    if (rec.k_m) {
        const Uncertain derived = derive_km(rec.k_t, resolved_kb(rec), rec.r_phase);
        const double diff = std::abs(rec.k_m->value - derived.value);
        const double combined = combine_sigma({rec.k_m->sigma, derived.sigma});
        flags.km_inconsistent =
            diff > combined && diff > km_consistency_tolerance * derived.value;
    }
    return flags;
}

namespace detail {

// S = j / k^2 with sigma propagated through whichever independent inputs
// actually feed k: (j, k) directly, or the electrical set when k was derived.
inline Uncertain inertia_over_constant_sq(const Uncertain& j, const Uncertain& k) {
    const double v = j.value / (k.value * k.value);
    const double sigma = combine_sigma(
        {j.sigma / (k.value * k.value), -2.0 * v / k.value * k.sigma});
    return {v, sigma};
}

// S_M = j * r / (kt * kb), all four independent.
inline Uncertain sm_from_electrical(const Uncertain& j, const Uncertain& k_t,
                                    const Uncertain& k_b, const Uncertain& r) {
    const double v = j.value * r.value / (k_t.value * k_b.value);
    const double sigma = combine_sigma({v / j.value * j.sigma,
                                        v / r.value * r.sigma,
                                        -v / k_t.value * k_t.sigma,
                                        -v / k_b.value * k_b.sigma});
    return {v, sigma};
}

// S_M = j * r / kt^2 when K_B is the same variable as K_T.
inline Uncertain sm_from_kt_only(const Uncertain& j, const Uncertain& k_t, const Uncertain& r) {
    const double v = j.value * r.value / (k_t.value * k_t.value);
    const double sigma = combine_sigma({v / j.value * j.sigma,
                                        v / r.value * r.sigma,
                                        -2.0 * v / k_t.value * k_t.sigma});
    return {v, sigma};
}

}  // namespace detail

/// S_M = J_m / K_M^2 [s]: the mechanical time constant of speed response to
/// a q-axis voltage step. Lower is more responsive; invariant to the
/// transmission ratio.
inline Uncertain responsiveness_metric(const MotorRecord& rec) {
    require_positive(rec.j_m, "j_m");
    if (rec.k_m) return detail::inertia_over_constant_sq(rec.j_m, *rec.k_m);
    // Derived K_M: propagate from the underlying electrical measurements so
    // sigma terms are not double counted.
    require_positive(rec.k_t, "k_t");
    require_positive(rec.r_phase, "r_phase");
    if (rec.k_b) return detail::sm_from_electrical(rec.j_m, rec.k_t, *rec.k_b, rec.r_phase);
    return detail::sm_from_kt_only(rec.j_m, rec.k_t, rec.r_phase);
}

/// S_T = J_m / K_T^2 [kg·(A/N)²]: inertia cost per unit of torque
/// capability, also transmission-invariant.
inline Uncertain torque_specific_inertia(const MotorRecord& rec) {
    require_positive(rec.j_m, "j_m");
    require_positive(rec.k_t, "k_t");
    return detail::inertia_over_constant_sq(rec.j_m, rec.k_t);
}

/// K_ts = (K_T / m) * sqrt(1 / (R_th * R_phase)) [N·m/(kg·sqrt(°C))]:
/// continuous torque per mass per square root of winding temperature rise.
inline Uncertain thermal_specific_torque(const MotorRecord& rec) {
    if (!rec.r_th) throw unresolved_field_error("r_th");
    require_positive(rec.k_t, "k_t");
    require_positive(rec.mass, "mass");
    require_positive(*rec.r_th, "r_th");
    require_positive(rec.r_phase, "r_phase");
    const double v = rec.k_t.value / rec.mass.value *
                     std::sqrt(1.0 / (rec.r_th->value * rec.r_phase.value));
    const double sigma = combine_sigma({v / rec.k_t.value * rec.k_t.sigma,
                                        -v / rec.mass.value * rec.mass.sigma,
                                        -v / (2.0 * rec.r_th->value) * rec.r_th->sigma,
                                        -v / (2.0 * rec.r_phase.value) * rec.r_phase.sigma});
    return {v, sigma};
}

/// Selection metrics for one motor. k_ts is absent when the record has no
/// thermal resistance.
struct MetricReport {
    Uncertain s_m;    // [s]
    Uncertain s_t;    // [kg·(A/N)²]
    Uncertain m_s_m;  // [kg·s]
    Uncertain m_s_t;  // [kg²·(A/N)²]
    std::optional<Uncertain> k_ts;  // [N·m/(kg·sqrt(°C))]
    ResolutionFlags flags;
};

inline MetricReport metric_report(const MotorRecord& rec) {
    rec.validate();
    MetricReport report;
    report.s_m = responsiveness_metric(rec);
    report.s_t = torque_specific_inertia(rec);
    // Mass weighting: mass is independent of every S_M/S_T input.
    report.m_s_m = {rec.mass.value * report.s_m.value,
                    combine_sigma({report.s_m.value * rec.mass.sigma,
                                   rec.mass.value * report.s_m.sigma})};
    report.m_s_t = {rec.mass.value * report.s_t.value,
                    combine_sigma({report.s_t.value * rec.mass.sigma,
                                   rec.mass.value * report.s_t.sigma})};
    if (rec.r_th) report.k_ts = thermal_specific_torque(rec);
    report.flags = resolution_flags(rec);
    return report;
}

}  // namespace qdd
