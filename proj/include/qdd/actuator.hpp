#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "qdd/errors.hpp"
#include "qdd/motor.hpp"

namespace qdd {

/// A motor behind an ideal transmission: massless, lossless, infinitely
/// stiff. ratio is a speed reduction (output torque multiplier).
struct ActuatorConfig {
    MotorRecord motor;
    double ratio = 1.0;

    void validate() const {
        motor.validate();
        require_positive(ratio, "ratio");
    }
};

struct EffectiveConstants {
    Uncertain k_ta;  // N * K_T  [N·m/A]
    Uncertain k_ma;  // N * K_M  [N·m/sqrt(W)]
    Uncertain j_a;   // N^2 * J_m [kg·m²]
};

inline EffectiveConstants effective_constants(const ActuatorConfig& cfg) {
    cfg.validate();
    const double n = cfg.ratio;
    const Uncertain km = resolved_km(cfg.motor);
    return {{n * cfg.motor.k_t.value, n * cfg.motor.k_t.sigma},
            {n * km.value, n * km.sigma},
            {n * n * cfg.motor.j_m.value, n * n * cfg.motor.j_m.sigma}};
}

/// Smallest ratio whose effective torque constant reaches torque_target at
/// current_limit. Exact real value; snapping to a realizable gearset is the
/// caller's concern.
inline double ratio_for_torque(const MotorRecord& motor, double torque_target,
                               double current_limit) {
    require_positive(torque_target, "torque_target");
    require_positive(current_limit, "current_limit");
    require_positive(motor.k_t, "k_t");
    return torque_target / (motor.k_t.value * current_limit);
}

/// Ratio giving `motor` the same actuator inertia as the reference config:
/// N = N_ref * sqrt(J_ref / J).
inline double ratio_for_matched_inertia(const MotorRecord& motor, const ActuatorConfig& reference) {
    reference.validate();
    require_positive(motor.j_m, "j_m");
    return reference.ratio * std::sqrt(reference.motor.j_m.value / motor.j_m.value);
}

/// Two actuators with transmission ratios chosen so their reflected inertias
/// match. Ratios are a-relative-to-b; advantage values are the factor by
/// which a beats b (values > 1 favour a).
struct MatchedInertiaComparison {
    double n_a = 1.0;             // ratio for motor a (b is the N=1 reference)
    double n_b = 1.0;
    EffectiveConstants a;
    EffectiveConstants b;
    double k_ta_ratio = 1.0;      // K_Ta,a / K_Ta,b == torque per amp advantage of a
    double k_ma_ratio = 1.0;      // K_Ma,a / K_Ma,b == torque per sqrt-heat advantage of a
    double s_m_advantage = 1.0;   // S_M,b / S_M,a == responsiveness advantage of a
    double s_t_advantage = 1.0;   // S_T,b / S_T,a
    std::string k_ta_winner;
    std::string k_ma_winner;
};

inline MatchedInertiaComparison compare_at_matched_inertia(const MotorRecord& a,
                                                           const MotorRecord& b) {
    MatchedInertiaComparison cmp;
    const ActuatorConfig ref{b, 1.0};
    cmp.n_a = ratio_for_matched_inertia(a, ref);
    cmp.n_b = 1.0;
    cmp.a = effective_constants({a, cmp.n_a});
    cmp.b = effective_constants(ref);
    cmp.k_ta_ratio = cmp.a.k_ta.value / cmp.b.k_ta.value;
    cmp.k_ma_ratio = cmp.a.k_ma.value / cmp.b.k_ma.value;
    cmp.s_m_advantage = responsiveness_metric(b).value / responsiveness_metric(a).value;
    cmp.s_t_advantage = torque_specific_inertia(b).value / torque_specific_inertia(a).value;
    cmp.k_ta_winner = cmp.k_ta_ratio >= 1.0 ? a.name : b.name;
    cmp.k_ma_winner = cmp.k_ma_ratio >= 1.0 ? a.name : b.name;
    return cmp;
}

/// S_M doubles as the time constant of the speed response to a q-axis
/// voltage step (first-order model, no electrical transient).
inline Uncertain mechanical_time_constant(const MotorRecord& motor) {
    return responsiveness_metric(motor);
}

/// Property ratios predicted by the ideal gap-radius scaling laws for a
/// geometry pair (r = gap radius ratio, l = length ratio):
///   K_T ~ r^2 l, K_T/m ~ r, K_T/J ~ 1/r, K_M^2 ~ r^3 l, J ~ r^3 l.
struct ScalingPrediction {
    double k_t_ratio = 1.0;
    double k_t_per_mass_ratio = 1.0;
    double k_t_per_inertia_ratio = 1.0;
    double k_m_sq_ratio = 1.0;
    double j_m_ratio = 1.0;
};

inline ScalingPrediction scaling_prediction(double r_g_ratio, double l_ratio) {
    require_positive(r_g_ratio, "r_g_ratio");
    require_positive(l_ratio, "l_ratio");
    const double r = r_g_ratio, l = l_ratio;
    return {r * r * l, r, 1.0 / r, r * r * r * l, r * r * r * l};
}

struct ScalingDeviationRow {
    std::string quantity;
    double predicted = 1.0;  // from geometry ratios
    double measured = 1.0;   // from the records
    double quotient = 1.0;   // measured / predicted
};

/// Predicted-vs-measured property ratios (a relative to b) for each scaling
/// law, plus the derived S_M row: the laws make S_M geometry-invariant, so
/// its measured ratio isolates unmodeled effects (winding quality, core
/// material, rotor placement).
inline std::vector<ScalingDeviationRow> scaling_deviation_report(const MotorRecord& a,
                                                                 const MotorRecord& b) {
    if (!a.gap_radius || !a.length) throw unresolved_field_error("gap_radius/length (" + a.name + ")");
    if (!b.gap_radius || !b.length) throw unresolved_field_error("gap_radius/length (" + b.name + ")");
    const double r = a.gap_radius->value / b.gap_radius->value;
    const double l = a.length->value / b.length->value;
    const ScalingPrediction pred = scaling_prediction(r, l);

    const double kt = a.k_t.value / b.k_t.value;
    const double kt_per_mass = (a.k_t.value / a.mass.value) / (b.k_t.value / b.mass.value);
    const double kt_per_j = (a.k_t.value / a.j_m.value) / (b.k_t.value / b.j_m.value);
    const double km_a = resolved_km(a).value, km_b = resolved_km(b).value;
    const double km_sq = (km_a * km_a) / (km_b * km_b);
    const double jm = a.j_m.value / b.j_m.value;
    const double sm = responsiveness_metric(a).value / responsiveness_metric(b).value;

    auto row = [](std::string name, double p, double m) {
        return ScalingDeviationRow{std::move(name), p, m, m / p};
    };
    return {row("k_t", pred.k_t_ratio, kt),
            row("k_t_per_mass", pred.k_t_per_mass_ratio, kt_per_mass),
            row("k_t_per_inertia", pred.k_t_per_inertia_ratio, kt_per_j),
            row("k_m_sq", pred.k_m_sq_ratio, km_sq),
            row("j_m", pred.j_m_ratio, jm),
            row("s_m", 1.0, sm)};
}

}  // namespace qdd
