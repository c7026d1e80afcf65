#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "qdd/detail/csv.hpp"
#include "qdd/detail/optimize.hpp"
#include "qdd/detail/zoh.hpp"
#include "qdd/errors.hpp"
#include "qdd/timeseries.hpp"
#include "qdd/uncertain.hpp"
#include "qdd/welch.hpp"

namespace qdd {

/// Identified parameters of Omega(s)/T(s) = 1/(J s + B).
struct FirstOrderFit {
    double j = 0.0;   // [kg·m²]
    double b = 0.0;   // [N·m·s/rad]
    double vaf = 0.0; // [%]
    std::optional<double> j_ci;  // 2-sigma half-width across repeated runs
    std::optional<double> b_ci;

    struct Diagnostics {
        double stage1_j = 0.0;
        double stage1_b = 0.0;
        double stage1_residual = 0.0;   // RMS log-gain residual over fitted bins
        std::size_t stage1_bins = 0;    // bins passing band and coherence gates
        std::size_t stage2_samples = 0; // VAF trace length
        int stage1_iterations = 0;
        int stage2_iterations = 0;
    } diagnostics;
};

/// Frequency band and coherence gate for the stage-1 gain fit. Fitting raw
/// log-gain everywhere overemphasizes bins with little signal energy, so
/// bins below the coherence floor are excluded.
struct FitBand {
    double f_lo = 1.0;             // [Hz]
    double f_hi = 40.0;            // [Hz]
    double coherence_floor = 0.8;
};

/// Variance Accounted For: 100 * (1 - var(measured - predicted)/var(measured)).
inline double vaf(std::span<const double> measured, std::span<const double> predicted) {
    if (measured.size() != predicted.size() || measured.size() < 2)
        throw validation_error("vaf: signals must have equal length >= 2");
    double mean_m = 0.0, mean_e = 0.0;
    const std::size_t n = measured.size();
    for (std::size_t i = 0; i < n; ++i) {
        mean_m += measured[i];
        mean_e += measured[i] - predicted[i];
    }
    mean_m /= double(n);
    mean_e /= double(n);
    double var_m = 0.0, var_e = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dm = measured[i] - mean_m;
        const double de = (measured[i] - predicted[i]) - mean_e;
        var_m += dm * dm;
        var_e += de * de;
    }
    // A constant signal accumulates rounding noise in the mean, so gate on
    // the relative standard deviation rather than exact zero.
    const double degenerate_sd = 1e-12 * std::abs(mean_m);
    if (var_m <= double(n) * degenerate_sd * degenerate_sd)
        throw analysis_error("vaf: measured signal has zero variance");
    return 100.0 * (1.0 - var_e / var_m);
}

/// Velocity predicted by the candidate (J, B) from a recorded torque input,
/// integrated by the same zero-order hold the rig applies between samples.
inline std::vector<double> predict_first_order(double j, double b, double sample_rate,
                                               std::span<const double> torque,
                                               double initial_velocity = 0.0) {
    require_positive(j, "j");
    if (b < 0.0) throw validation_error("b must be non-negative");
    require_positive(sample_rate, "sample_rate");
    const detail::FirstOrderZoh plant(j, b, 1.0 / sample_rate);
    std::vector<double> velocity(torque.size());
    double w = initial_velocity;
    for (std::size_t k = 0; k < torque.size(); ++k) {
        velocity[k] = w;
        w = plant.step(w, torque[k]);
    }
    return velocity;
}

namespace detail {

struct GatedBins {
    std::vector<double> frequency;
    std::vector<double> magnitude;
};

inline GatedBins gate_bins(const FrequencyResponse& fr, const FitBand& band) {
    GatedBins g;
    for (std::size_t k = 0; k < fr.frequency.size(); ++k) {
        const double f = fr.frequency[k];
        if (f < band.f_lo || f > band.f_hi) continue;
        if (fr.coherence[k] < band.coherence_floor) continue;
        const double mag = std::abs(fr.gain[k]);
        if (mag <= 0.0) continue;
        g.frequency.push_back(f);
        g.magnitude.push_back(mag);
    }
    return g;
}

// Closed-form seeds: B from the low-frequency plateau, J from the -3 dB
// corner (or from the highest gated bin when the corner is out of band).
inline std::pair<double, double> stage0_seed(const GatedBins& bins) {
    const double b0 = 1.0 / bins.magnitude.front();
    const double corner_mag = bins.magnitude.front() / std::numbers::sqrt2;
    double f_corner = 0.0;
    for (std::size_t k = 0; k < bins.frequency.size(); ++k) {
        if (bins.magnitude[k] <= corner_mag) {
            f_corner = bins.frequency[k];
            break;
        }
    }
    double j0 = 0.0;
    if (f_corner > 0.0) {
        j0 = b0 / (2.0 * std::numbers::pi * f_corner);
    } else {
        const double f_hi = bins.frequency.back();
        const double mag_hi = bins.magnitude.back();
        const double inv2 = 1.0 / (mag_hi * mag_hi) - b0 * b0;
        j0 = inv2 > 0.0 ? std::sqrt(inv2) / (2.0 * std::numbers::pi * f_hi)
                        : b0 / (2.0 * std::numbers::pi * f_hi);
    }
    return {j0, b0};
}

inline double log_gain_residual(double j, double b, const GatedBins& bins) {
    double ss = 0.0;
    for (std::size_t k = 0; k < bins.frequency.size(); ++k) {
        const double w = 2.0 * std::numbers::pi * bins.frequency[k];
        const double model = 1.0 / std::sqrt(b * b + w * w * j * j);
        const double r = std::log(bins.magnitude[k]) - std::log(model);
        ss += r * r;
    }
    return ss;
}

}  // namespace detail

/// Two-stage parametric fit of 1/(J s + B) to a Welch estimate plus the raw
/// record. Stage 1 matches log gain over coherent in-band bins; stage 2
/// restarts from that point and maximizes time-domain VAF, which weights
/// frequencies by their actual signal energy.
inline FirstOrderFit fit_first_order(const FrequencyResponse& fr, const TimeSeries& ts,
                                     const FitBand& band = {},
                                     Channel input = Channel::Torque,
                                     Channel output = Channel::Velocity) {
    if (!(band.f_lo > 0.0) || !(band.f_hi > band.f_lo))
        throw validation_error("fit band must satisfy 0 < f_lo < f_hi");
    if (!ts.has(input) || !ts.has(output))
        throw validation_error("fit_first_order: time series lacks the fitted channels");

    const detail::GatedBins bins = detail::gate_bins(fr, band);
    if (bins.frequency.size() < 3)
        throw analysis_error(
            "fit_first_order: only " + std::to_string(bins.frequency.size()) +
            " frequency bin(s) pass the coherence floor in band; data unidentifiable");

    const auto [j0, b0] = detail::stage0_seed(bins);

    const std::vector<double> lower = {1e-12, 0.0};
    const std::vector<double> upper = {1e6, 1e6};
    detail::SimplexOptions options;
    options.max_iterations = 600;
    options.x_tolerance = 1e-11;

    // Stage 1: frequency-domain log-gain fit.
    auto stage1_objective = [&](const std::vector<double>& p) {
        return detail::log_gain_residual(p[0], p[1], bins);
    };
    const detail::SimplexResult stage1 =
        detail::nelder_mead(stage1_objective, {j0, b0}, lower, upper,
                            {0.5 * j0 + 1e-12, 0.5 * b0 + 1e-12}, options);

    FirstOrderFit fit;
    fit.diagnostics.stage1_j = stage1.x[0];
    fit.diagnostics.stage1_b = stage1.x[1];
    fit.diagnostics.stage1_residual = std::sqrt(stage1.f / double(bins.frequency.size()));
    fit.diagnostics.stage1_bins = bins.frequency.size();
    fit.diagnostics.stage1_iterations = stage1.iterations;

    // Stage 2: time-domain VAF, seeded from stage 1.
    const std::span<const double> u = ts.channel(input);
    const std::span<const double> y = ts.channel(output);
    auto stage2_objective = [&](const std::vector<double>& p) {
        const std::vector<double> predicted =
            predict_first_order(p[0], p[1], ts.sample_rate, u, y.front());
        return -vaf(y, predicted);
    };
    // Stage 1 often pins B at 0 when the band sits above the mechanical
    // corner (the mass line hides damping). Step b on the corner scale
    // B = 2*pi*f_lo*J so stage 2 can still lift it off the bound.
    const double b_scale = 2.0 * std::numbers::pi * band.f_lo * stage1.x[0];
    const detail::SimplexResult stage2 = detail::nelder_mead(
        stage2_objective, stage1.x, lower, upper,
        {0.2 * stage1.x[0] + 1e-12, std::max(0.2 * stage1.x[1], 0.2 * b_scale)}, options);

    if (!stage1.converged || !stage2.converged)
        throw analysis_error("fit_first_order: optimizer did not converge (stage-1 J=" +
                             detail::format_full(stage1.x[0]) + ", B=" +
                             detail::format_full(stage1.x[1]) + " available as fallback)");

    fit.j = stage2.x[0];
    fit.b = stage2.x[1];
    fit.vaf = -stage2.f;
    fit.diagnostics.stage2_samples = y.size();
    fit.diagnostics.stage2_iterations = stage2.iterations;
    return fit;
}

/// Pools repeated identifications (e.g. across excitation amplitudes) into
/// a single estimate with 2-sigma confidence half-widths. At least two fits
/// are required for the intervals to exist.
inline FirstOrderFit combine_fits(std::span<const FirstOrderFit> fits) {
    if (fits.empty()) throw validation_error("combine_fits: no fits given");
    FirstOrderFit combined;
    double mj = 0.0, mb = 0.0, mvaf = 0.0;
    for (const FirstOrderFit& f : fits) {
        mj += f.j;
        mb += f.b;
        mvaf += f.vaf;
    }
    const double n = double(fits.size());
    combined.j = mj / n;
    combined.b = mb / n;
    combined.vaf = mvaf / n;
    if (fits.size() >= 2) {
        double sj = 0.0, sb = 0.0;
        for (const FirstOrderFit& f : fits) {
            sj += (f.j - combined.j) * (f.j - combined.j);
            sb += (f.b - combined.b) * (f.b - combined.b);
        }
        combined.j_ci = 2.0 * std::sqrt(sj / (n - 1.0));
        combined.b_ci = 2.0 * std::sqrt(sb / (n - 1.0));
    }
    combined.diagnostics = fits.front().diagnostics;
    return combined;
}

}  // namespace qdd
