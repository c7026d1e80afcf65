#pragma once

#include <cmath>
#include <span>

#include "qdd/errors.hpp"

namespace qdd {

/// Ordinary least squares y = slope*x + intercept. slope_uncertainty is
/// twice the standard error of the slope.
struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_uncertainty = 0.0;
    double r_squared = 1.0;
};

inline LinearFit fit_constant(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n != y.size() || n < 3)
        throw validation_error("fit_constant: need equal-length inputs with >= 3 points");

    double mean_x = 0.0, mean_y = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_x += x[i];
        mean_y += y[i];
    }
    mean_x /= double(n);
    mean_y /= double(n);

    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mean_x;
        const double dy = y[i] - mean_y;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0) throw analysis_error("fit_constant: x is constant, fit is singular");

    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = mean_y - fit.slope * mean_x;

    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - (fit.slope * x[i] + fit.intercept);
        sse += r * r;
    }
    const double residual_var = sse / double(n - 2);
    fit.slope_uncertainty = 2.0 * std::sqrt(residual_var / sxx);
    fit.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
    return fit;
}

}  // namespace qdd
