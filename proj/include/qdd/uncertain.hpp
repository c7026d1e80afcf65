#pragma once

#include <cmath>
#include <initializer_list>

#include "qdd/errors.hpp"

namespace qdd {

/// A scalar with a symmetric 1-sigma uncertainty. sigma = 0 means exact.
/// Derived quantities propagate sigma to first order (linearized), assuming
/// independent inputs; the per-operation gradients live with the operations.
struct Uncertain {
    double value = 0.0;
    double sigma = 0.0;

    Uncertain() = default;
    Uncertain(double v, double s = 0.0) : value(v), sigma(s) {}
};

/// sqrt of the sum of squares of the terms; each term is (df/dx_i) * sigma_i.
inline double combine_sigma(std::initializer_list<double> terms) {
    double s2 = 0.0;
    for (double t : terms) s2 += t * t;
    return std::sqrt(s2);
}

inline void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v))
        throw validation_error(std::string(what) + " must be positive and finite");
}

inline void require_positive(const Uncertain& u, const char* what) {
    require_positive(u.value, what);
    if (u.sigma < 0.0 || !std::isfinite(u.sigma))
        throw validation_error(std::string(what) + " uncertainty must be non-negative");
}

}  // namespace qdd
