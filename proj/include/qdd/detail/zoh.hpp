#pragma once

#include <cmath>

namespace qdd::detail {

/// Exact zero-order-hold update of J*dw/dt = u - B*w:
///   w[k+1] = a*w[k] + g*u[k],  a = exp(-B*dt/J),  g = (1-a)/B.
/// expm1 keeps g accurate as B -> 0; B = 0 uses the integrator limit dt/J.
struct FirstOrderZoh {
    double decay;
    double gain;

    FirstOrderZoh(double j, double b, double dt) {
        if (b == 0.0) {
            decay = 1.0;
            gain = dt / j;
        } else {
            const double em1 = std::expm1(-b * dt / j);
            decay = 1.0 + em1;
            gain = -em1 / b;
        }
    }

    double step(double w, double u) const { return decay * w + gain * u; }
};

}  // namespace qdd::detail
