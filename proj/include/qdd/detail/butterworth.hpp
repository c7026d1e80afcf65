#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "qdd/errors.hpp"

namespace qdd::detail {

/// Direct-form-I biquad section, b/a normalized to a0 = 1.
struct Biquad {
    double b0 = 1.0, b1 = 0.0, b2 = 0.0;
    double a1 = 0.0, a2 = 0.0;

    void apply_in_place(std::span<double> x) const {
        double x1 = 0.0, x2 = 0.0, y1 = 0.0, y2 = 0.0;
        for (double& sample : x) {
            const double x0 = sample;
            const double y0 = b0 * x0 + b1 * x1 + b2 * x2 - a1 * y1 - a2 * y2;
            x2 = x1;
            x1 = x0;
            y2 = y1;
            y1 = y0;
            sample = y0;
        }
    }
};

/// Low-pass biquad from the bilinear transform of an analog second-order
/// section with quality factor q (RBJ cookbook form).
inline Biquad lowpass_biquad(double cutoff_hz, double sample_rate_hz, double q) {
    const double w0 = 2.0 * std::numbers::pi * cutoff_hz / sample_rate_hz;
    const double alpha = std::sin(w0) / (2.0 * q);
    const double cw = std::cos(w0);
    const double a0 = 1.0 + alpha;
    Biquad s;
    s.b0 = (1.0 - cw) / 2.0 / a0;
    s.b1 = (1.0 - cw) / a0;
    s.b2 = s.b0;
    s.a1 = -2.0 * cw / a0;
    s.a2 = (1.0 - alpha) / a0;
    return s;
}

/// Fourth-order Butterworth low-pass as two cascaded biquads. Pole-pair Q
/// values are 1/(2 cos(pi/8)) and 1/(2 cos(3 pi/8)).
inline std::array<Biquad, 2> butterworth4_lowpass(double cutoff_hz, double sample_rate_hz) {
    if (!(cutoff_hz > 0.0) || !(cutoff_hz < sample_rate_hz / 2.0))
        throw validation_error("cutoff must lie in (0, sample_rate/2)");
    const double q1 = 1.0 / (2.0 * std::cos(std::numbers::pi / 8.0));
    const double q2 = 1.0 / (2.0 * std::cos(3.0 * std::numbers::pi / 8.0));
    return {lowpass_biquad(cutoff_hz, sample_rate_hz, q1),
            lowpass_biquad(cutoff_hz, sample_rate_hz, q2)};
}

/// Zero-phase filtering: run the cascade forward, then backward. The
/// magnitude response is squared, which is what keeps the stop band of the
/// excitation shaper deep enough for spectral tests.
inline void filtfilt(std::span<const Biquad> sections, std::vector<double>& x) {
    for (const Biquad& s : sections) s.apply_in_place(x);
    std::reverse(x.begin(), x.end());
    for (const Biquad& s : sections) s.apply_in_place(x);
    std::reverse(x.begin(), x.end());
}

}  // namespace qdd::detail
