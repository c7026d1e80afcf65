#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qdd/detail/butterworth.hpp"
#include "qdd/detail/random.hpp"
#include "qdd/detail/zoh.hpp"
#include "qdd/errors.hpp"
#include "qdd/timeseries.hpp"
#include "qdd/uncertain.hpp"

namespace qdd {

/// Synthetic dynamometer configuration. Defaults mirror the physical rig:
/// 1100 Hz logging, excitation band-limited to 40 Hz. The noise sigmas are
/// calibrated so that round-trip fits land in the 92-98% VAF band typical of
/// real backdrive runs; they are knobs, not measurements.
struct SimConfig {
    double true_j = 6.55e-4;   // [kg·m²]
    double true_b = 2.0e-3;    // [N·m·s/rad]
    double duration = 60.0;    // [s]
    double sample_rate = 1100.0;  // [Hz]

    struct Excitation {
        double bandwidth = 40.0;   // low-pass cutoff [Hz]
        double amplitude = 0.5;    // peak torque [N·m]
        std::uint64_t seed = 0;
    } excitation;

    // Defaults sized against the default excitation so fits land in the
    // 92-98% VAF range seen on the physical rig.
    struct Noise {
        double torque_sigma = 5.0e-3;   // [N·m]
        double velocity_sigma = 2.0;    // [rad/s]
    } noise;

    struct Electrical {
        double k_t = 0.0;      // [N·m/A]
        double k_b = 0.0;      // [V·s/rad]
        double r_phase = 0.0;  // [ohm]
    };
    std::optional<Electrical> electrical;  // required for voltage-driven runs

    std::size_t sample_count() const {
        return static_cast<std::size_t>(std::llround(duration * sample_rate));
    }

    void validate() const {
        require_positive(true_j, "true_j");
        if (true_b < 0.0) throw validation_error("true_b must be non-negative");
        require_positive(duration, "duration");
        require_positive(sample_rate, "sample_rate");
        require_positive(excitation.bandwidth, "excitation.bandwidth");
        require_positive(excitation.amplitude, "excitation.amplitude");
        if (!(excitation.bandwidth < sample_rate / 2.0))
            throw validation_error("excitation.bandwidth must be below the Nyquist rate");
        if (noise.torque_sigma < 0.0 || noise.velocity_sigma < 0.0)
            throw validation_error("noise sigmas must be non-negative");
        if (sample_count() < 2) throw validation_error("duration too short for the sample rate");
    }
};

/// Seeded Gaussian white noise, low-pass filtered to the configured
/// bandwidth (4th-order Butterworth, run zero-phase so the stop band falls
/// off at twice the single-pass rate), then rescaled to the peak amplitude.
inline std::vector<double> generate_excitation(const SimConfig& cfg) {
    cfg.validate();
    std::vector<double> torque(cfg.sample_count());
    detail::GaussianSource gaussian(cfg.excitation.seed);
    for (double& v : torque) v = gaussian();

    auto sections = detail::butterworth4_lowpass(cfg.excitation.bandwidth, cfg.sample_rate);
    detail::filtfilt(sections, torque);

    double peak = 0.0;
    for (double v : torque) peak = std::max(peak, std::abs(v));
    if (peak > 0.0) {
        const double scale = cfg.excitation.amplitude / peak;
        for (double& v : torque) v *= scale;
    }
    return torque;
}

inline TimeSeries simulate_backdrive(const SimConfig& cfg, std::span<const double> torque) {
    cfg.validate();
    if (torque.size() < 2) throw validation_error("torque signal must have >= 2 samples");

    const double dt = 1.0 / cfg.sample_rate;
    const detail::FirstOrderZoh plant(cfg.true_j, cfg.true_b, dt);

    TimeSeries ts;
    ts.sample_rate = cfg.sample_rate;
    ts.torque.assign(torque.begin(), torque.end());
    ts.velocity.resize(torque.size());
    double w = 0.0;
    for (std::size_t k = 0; k < torque.size(); ++k) {
        ts.velocity[k] = w;
        w = plant.step(w, torque[k]);
    }

    if (cfg.noise.torque_sigma > 0.0 || cfg.noise.velocity_sigma > 0.0) {
        detail::GaussianSource gaussian(detail::mix_seed(cfg.excitation.seed, 1));
        for (double& v : ts.torque) v += cfg.noise.torque_sigma * gaussian();
        for (double& v : ts.velocity) v += cfg.noise.velocity_sigma * gaussian();
    }
    return ts;
}

/// First-order voltage-driven motor: J*dw/dt = (K_T/R)(V_q - K_B*w).
/// The step-response time constant is R*J/(K_T*K_B) = J/K_M^2, i.e. the
/// motor's responsiveness metric; DC gain is 1/K_B.
inline TimeSeries simulate_voltage_driven(const SimConfig& cfg, std::span<const double> v_q) {
    cfg.validate();
    if (!cfg.electrical) throw unresolved_field_error("electrical (k_t, k_b, r_phase)");
    if (v_q.size() < 2) throw validation_error("voltage signal must have >= 2 samples");
    const auto& e = *cfg.electrical;
    require_positive(e.k_t, "electrical.k_t");
    require_positive(e.k_b, "electrical.k_b");
    require_positive(e.r_phase, "electrical.r_phase");

    // Same ZOH form with u = (K_T/R)*V and B_eq = K_T*K_B/R.
    const double dt = 1.0 / cfg.sample_rate;
    const double drive = e.k_t / e.r_phase;
    const detail::FirstOrderZoh plant(cfg.true_j, drive * e.k_b, dt);

    TimeSeries ts;
    ts.sample_rate = cfg.sample_rate;
    ts.voltage.assign(v_q.begin(), v_q.end());
    ts.velocity.resize(v_q.size());
    ts.torque.resize(v_q.size());
    ts.current.resize(v_q.size());
    double w = 0.0;
    for (std::size_t k = 0; k < v_q.size(); ++k) {
        ts.velocity[k] = w;
        ts.current[k] = (v_q[k] - e.k_b * w) / e.r_phase;
        ts.torque[k] = e.k_t * ts.current[k];
        w = plant.step(w, drive * v_q[k]);
    }

    if (cfg.noise.torque_sigma > 0.0 || cfg.noise.velocity_sigma > 0.0) {
        detail::GaussianSource gaussian(detail::mix_seed(cfg.excitation.seed, 2));
        for (double& v : ts.torque) v += cfg.noise.torque_sigma * gaussian();
        for (double& v : ts.velocity) v += cfg.noise.velocity_sigma * gaussian();
    }
    return ts;
}

/// Convenience wrapper: excitation + backdrive plant in one call.
inline TimeSeries simulate_backdrive_run(const SimConfig& cfg) {
    return simulate_backdrive(cfg, generate_excitation(cfg));
}

}  // namespace qdd
