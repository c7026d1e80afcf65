#pragma once

#include <cmath>

#include "qdd/errors.hpp"
#include "qdd/uncertain.hpp"

namespace qdd {

/// Motor-side rotor inertia from a pair of output-side backdrive
/// identifications: one with the rotor installed, one without.
/// Both inputs are reflected to the output; the difference divides by N².
inline Uncertain differential_inertia(const Uncertain& j_with_rotor,
                                      const Uncertain& j_without_rotor,
                                      double ratio) {
    require_positive(ratio, "ratio");
    if (!(j_with_rotor.value > j_without_rotor.value))
        throw analysis_error(
            "differential_inertia: inertia with rotor does not exceed inertia "
            "without rotor; check for swapped runs");
    const double n2 = ratio * ratio;
    Uncertain out;
    out.value = (j_with_rotor.value - j_without_rotor.value) / n2;
    out.sigma = combine_sigma({j_with_rotor.sigma / n2, j_without_rotor.sigma / n2});
    return out;
}

/// Thin-ring approximation J = m·r² for a rotor whose mass sits at the
/// magnet gap radius.
inline double thin_ring_inertia(double mass_kg, double radius_m) {
    require_positive(mass_kg, "mass");
    require_positive(radius_m, "radius");
    return mass_kg * radius_m * radius_m;
}

inline Uncertain thin_ring_inertia(const Uncertain& mass_kg, const Uncertain& radius_m) {
    const double j = thin_ring_inertia(mass_kg.value, radius_m.value);
    const double dj_dm = radius_m.value * radius_m.value;
    const double dj_dr = 2.0 * mass_kg.value * radius_m.value;
    return {j, combine_sigma({dj_dm * mass_kg.sigma, dj_dr * radius_m.sigma})};
}

}  // namespace qdd
