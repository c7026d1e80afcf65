#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <unsupported/Eigen/FFT>

#include <qdd/detail/random.hpp>
#include <qdd/dyno_sim.hpp>
#include <qdd/motor.hpp>

#include "test_helpers.hpp"

using Catch::Approx;
using namespace qdd;

namespace {

SimConfig noiseless_config() {
    SimConfig cfg;
    cfg.noise.torque_sigma = 0.0;
    cfg.noise.velocity_sigma = 0.0;
    return cfg;
}

/// 63.2%-of-final crossing time of a unit-step velocity response, with
/// linear interpolation between samples.
double crossing_time(const std::vector<double>& velocity, double sample_rate, double target) {
    const double dt = 1.0 / sample_rate;
    for (std::size_t k = 1; k < velocity.size(); ++k) {
        if (velocity[k] >= target) {
            const double frac =
                (target - velocity[k - 1]) / (velocity[k] - velocity[k - 1]);
            return (double(k - 1) + frac) * dt;
        }
    }
    return -1.0;
}

double rk4_reference(double j, double b, double dt, std::span<const double> torque,
                     std::size_t index) {
    // Zero-order-hold input, 200 RK4 substeps per sample.
    double w = 0.0;
    for (std::size_t k = 0; k < index; ++k) {
        const double u = torque[k];
        const double h = dt / 200.0;
        for (int s = 0; s < 200; ++s) {
            const auto f = [&](double x) { return (u - b * x) / j; };
            const double k1 = f(w);
            const double k2 = f(w + 0.5 * h * k1);
            const double k3 = f(w + 0.5 * h * k2);
            const double k4 = f(w + h * k3);
            w += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
    }
    return w;
}

}  // namespace

TEST_CASE("excitation is deterministic in the seed", "[dyno_sim]") {
    SimConfig cfg;
    cfg.duration = 5.0;
    const std::vector<double> a = generate_excitation(cfg);
    const std::vector<double> b = generate_excitation(cfg);
    CHECK(a == b);

    cfg.excitation.seed = 1;
    const std::vector<double> c = generate_excitation(cfg);
    REQUIRE(c.size() == a.size());
    CHECK(a != c);

    SimConfig noisy;
    noisy.duration = 5.0;
    const TimeSeries r1 = simulate_backdrive_run(noisy);
    const TimeSeries r2 = simulate_backdrive_run(noisy);
    CHECK(r1.torque == r2.torque);
    CHECK(r1.velocity == r2.velocity);
}

TEST_CASE("excitation peaks at the commanded amplitude and scales linearly", "[dyno_sim]") {
    SimConfig cfg;
    cfg.duration = 10.0;
    const std::vector<double> base = generate_excitation(cfg);
    double peak = 0.0;
    for (double v : base) peak = std::max(peak, std::abs(v));
    CHECK(peak == Approx(cfg.excitation.amplitude).epsilon(1e-12));

    cfg.excitation.amplitude *= 2.5;
    const std::vector<double> scaled = generate_excitation(cfg);
    REQUIRE(scaled.size() == base.size());
    for (std::size_t i = 0; i < base.size(); ++i)
        REQUIRE(scaled[i] == Approx(2.5 * base[i]).margin(1e-12));
}

TEST_CASE("excitation energy stays inside the commanded band", "[dyno_sim]") {
    SimConfig cfg;  // 40 Hz cutoff, 60 s at 1100 Hz
    const std::vector<double> x = generate_excitation(cfg);

    const std::size_t nseg = 4096, hop = 2048;
    const std::size_t count = (x.size() - nseg) / hop + 1;
    std::vector<double> window(nseg), psd(nseg / 2 + 1, 0.0);
    for (std::size_t i = 0; i < nseg; ++i)
        window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * double(i) / double(nseg));
    Eigen::FFT<double> fft;
    fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
    std::vector<double> buf(nseg);
    std::vector<std::complex<double>> sp;
    for (std::size_t s = 0; s < count; ++s) {
        for (std::size_t i = 0; i < nseg; ++i) buf[i] = x[s * hop + i] * window[i];
        fft.fwd(sp, buf);
        for (std::size_t k = 0; k < psd.size(); ++k) psd[k] += std::norm(sp[k]);
    }

    const double df = cfg.sample_rate / double(nseg);
    double pass_mean = 0.0;
    std::size_t pass_bins = 0;
    double stop_max = 0.0;
    for (std::size_t k = 1; k < psd.size(); ++k) {
        const double f = df * double(k);
        if (f >= 2.0 && f <= 32.0) {
            pass_mean += psd[k];
            ++pass_bins;
        }
        if (f >= 80.0) stop_max = std::max(stop_max, psd[k]);
    }
    pass_mean /= double(pass_bins);
    CHECK(stop_max <= 1e-4 * pass_mean);  // > 40 dB down one octave above cutoff
}

TEST_CASE("constant torque follows the analytic exponential", "[dyno_sim]") {
    SimConfig cfg = noiseless_config();
    cfg.duration = 1.0;
    const double torque = 0.3;
    const std::vector<double> u(cfg.sample_count(), torque);
    const TimeSeries ts = simulate_backdrive(cfg, u);

    const double dt = 1.0 / cfg.sample_rate;
    for (std::size_t k : {std::size_t(1), std::size_t(10), std::size_t(100), std::size_t(1000)}) {
        const double t = double(k) * dt;
        const double analytic =
            torque / cfg.true_b * (1.0 - std::exp(-cfg.true_b * t / cfg.true_j));
        REQUIRE(ts.velocity[k] == Approx(analytic).epsilon(1e-9));
    }
}

TEST_CASE("zero input holds the rotor still", "[dyno_sim]") {
    SimConfig cfg = noiseless_config();
    cfg.duration = 0.5;
    const std::vector<double> u(cfg.sample_count(), 0.0);
    const TimeSeries ts = simulate_backdrive(cfg, u);
    for (double w : ts.velocity) REQUIRE(w == 0.0);
}

TEST_CASE("undamped rotor integrates torque into a ramp", "[dyno_sim]") {
    SimConfig cfg = noiseless_config();
    cfg.true_b = 0.0;
    cfg.duration = 1.0;
    const double torque = 0.2;
    const std::vector<double> u(cfg.sample_count(), torque);
    const TimeSeries ts = simulate_backdrive(cfg, u);
    const double dt = 1.0 / cfg.sample_rate;
    for (std::size_t k : {std::size_t(1), std::size_t(50), std::size_t(1000)}) {
        REQUIRE(ts.velocity[k] ==
                Approx(torque * double(k) * dt / cfg.true_j).epsilon(1e-12));
    }
}

TEST_CASE("discretization agrees with a fine RK4 reference", "[dyno_sim]") {
    SimConfig cfg = noiseless_config();
    cfg.duration = 300.0 / cfg.sample_rate;
    std::vector<double> u(cfg.sample_count());
    detail::GaussianSource g(17);
    for (double& v : u) v = g();
    const TimeSeries ts = simulate_backdrive(cfg, u);

    const double dt = 1.0 / cfg.sample_rate;
    for (std::size_t k : {std::size_t(1), std::size_t(37), std::size_t(299)}) {
        const double reference = rk4_reference(cfg.true_j, cfg.true_b, dt, u, k);
        REQUIRE(ts.velocity[k] == Approx(reference).margin(1e-9));
    }
}

TEST_CASE("backdrive plant is linear", "[dyno_sim]") {
    SimConfig cfg = noiseless_config();
    cfg.duration = 500.0 / cfg.sample_rate;
    std::vector<double> u1(cfg.sample_count()), u2(cfg.sample_count()),
        combo(cfg.sample_count());
    detail::GaussianSource g1(31), g2(32);
    for (std::size_t i = 0; i < u1.size(); ++i) {
        u1[i] = g1();
        u2[i] = g2();
        combo[i] = 2.0 * u1[i] - 3.0 * u2[i];
    }
    const TimeSeries y1 = simulate_backdrive(cfg, u1);
    const TimeSeries y2 = simulate_backdrive(cfg, u2);
    const TimeSeries yc = simulate_backdrive(cfg, combo);
    for (std::size_t i = 0; i < combo.size(); ++i)
        REQUIRE(yc.velocity[i] ==
                Approx(2.0 * y1.velocity[i] - 3.0 * y2.velocity[i]).margin(1e-9));
}

TEST_CASE("voltage step settles at 1/K_B and rises on the responsiveness time",
          "[dyno_sim]") {
    SimConfig cfg = noiseless_config();
    cfg.true_j = 9.01e-6;
    cfg.true_b = 0.0;
    cfg.sample_rate = 1.0e5;
    cfg.duration = 0.02;
    cfg.electrical = SimConfig::Electrical{0.105, 0.094, 0.705};
    const std::vector<double> v(cfg.sample_count(), 1.0);
    const TimeSeries ts = simulate_voltage_driven(cfg, v);

    CHECK(ts.velocity.back() == Approx(1.0 / 0.094).epsilon(1e-9));

    MotorRecord bench = testutil::ri50();
    bench.k_m.reset();  // resolve K_M from K_T, K_B, R to match the plant
    const double tau = responsiveness_metric(bench).value;
    const double target = (1.0 - std::exp(-1.0)) / 0.094;
    const double measured = crossing_time(ts.velocity, cfg.sample_rate, target);
    CHECK(measured == Approx(tau).epsilon(0.01));
}

TEST_CASE("stored-K_M motor rises on J/K_M^2", "[dyno_sim]") {
    const MotorRecord outrunner = testutil::u8();
    const double km2 = 0.23 * 0.23;
    SimConfig cfg = noiseless_config();
    cfg.true_j = 1.2e-4;
    cfg.true_b = 0.0;
    cfg.sample_rate = 1.0e5;
    cfg.duration = 0.02;
    // K_B chosen so the electrical triple reproduces the stored K_M.
    const double kb = km2 * 0.279 / 0.14;
    cfg.electrical = SimConfig::Electrical{0.14, kb, 0.279};
    const std::vector<double> v(cfg.sample_count(), 1.0);
    const TimeSeries ts = simulate_voltage_driven(cfg, v);

    const double target = (1.0 - std::exp(-1.0)) / kb;
    const double measured = crossing_time(ts.velocity, cfg.sample_rate, target);
    CHECK(measured > 2.19e-3);
    CHECK(measured < 2.39e-3);
    CHECK(measured == Approx(responsiveness_metric(outrunner).value).epsilon(2e-3));
}

TEST_CASE("voltage-step rise time tracks J/K_M^2 across random motors", "[dyno_sim]") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 10; ++i) {
        const double kt = 0.03 * std::pow(0.5 / 0.03, u(rng));
        const double kb = kt * (0.7 + 0.6 * u(rng));
        const double r = 0.1 * std::pow(30.0, u(rng));
        const double j = 1e-6 * std::pow(1e3, u(rng));
        const double tau = j * r / (kt * kb);

        SimConfig cfg = noiseless_config();
        cfg.true_j = j;
        cfg.true_b = 0.0;
        cfg.sample_rate = 411.7 / tau;  // non-integer fs*tau keeps crossings off-grid
        cfg.duration = 8.0 * tau;
        cfg.electrical = SimConfig::Electrical{kt, kb, r};
        const std::vector<double> v(cfg.sample_count(), 1.0);
        const TimeSeries ts = simulate_voltage_driven(cfg, v);

        const double target = (1.0 - std::exp(-1.0)) / kb;
        const double measured = crossing_time(ts.velocity, cfg.sample_rate, target);
        INFO("kt=" << kt << " kb=" << kb << " r=" << r << " j=" << j);
        REQUIRE(measured == Approx(tau).epsilon(0.01));
    }
}

TEST_CASE("voltage-driven channels are mutually consistent", "[dyno_sim]") {
    SimConfig cfg = noiseless_config();
    cfg.true_j = 9.01e-6;
    cfg.true_b = 0.0;
    cfg.sample_rate = 1.0e4;
    cfg.duration = 0.05;
    cfg.electrical = SimConfig::Electrical{0.105, 0.094, 0.705};
    const std::vector<double> v(cfg.sample_count(), 1.0);
    const TimeSeries ts = simulate_voltage_driven(cfg, v);

    REQUIRE(ts.has(Channel::Current));
    REQUIRE(ts.has(Channel::Voltage));
    for (std::size_t k = 0; k < ts.size(); ++k) {
        REQUIRE(ts.current[k] ==
                Approx((1.0 - 0.094 * ts.velocity[k]) / 0.705).margin(1e-12));
        REQUIRE(ts.torque[k] == Approx(0.105 * ts.current[k]).margin(1e-12));
    }
}

TEST_CASE("voltage-driven runs need electrical constants", "[dyno_sim]") {
    SimConfig cfg = noiseless_config();
    const std::vector<double> v(cfg.sample_count(), 1.0);
    CHECK_THROWS_AS(simulate_voltage_driven(cfg, v), unresolved_field_error);
}

TEST_CASE("measurement noise matches the configured sigmas", "[dyno_sim]") {
    SimConfig noisy;  // default sigmas 5e-3 and 2.0
    const std::vector<double> u = generate_excitation(noisy);
    const TimeSeries with_noise = simulate_backdrive(noisy, u);
    SimConfig clean = noiseless_config();
    const TimeSeries base = simulate_backdrive(clean, u);

    auto sample_std = [](const std::vector<double>& a, const std::vector<double>& b) {
        double mean = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) mean += a[i] - b[i];
        mean /= double(a.size());
        double ss = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double d = a[i] - b[i] - mean;
            ss += d * d;
        }
        return std::sqrt(ss / double(a.size() - 1));
    };
    CHECK(sample_std(with_noise.torque, base.torque) ==
          Approx(noisy.noise.torque_sigma).epsilon(0.05));
    CHECK(sample_std(with_noise.velocity, base.velocity) ==
          Approx(noisy.noise.velocity_sigma).epsilon(0.05));
}

TEST_CASE("simulator configs are validated", "[dyno_sim]") {
    SimConfig cfg;
    cfg.duration = 0.0;
    CHECK_THROWS_AS(generate_excitation(cfg), validation_error);

    cfg = SimConfig{};
    cfg.excitation.bandwidth = 550.0;  // Nyquist at the default rate
    CHECK_THROWS_AS(generate_excitation(cfg), validation_error);

    cfg = SimConfig{};
    cfg.noise.torque_sigma = -1.0;
    CHECK_THROWS_AS(simulate_backdrive_run(cfg), validation_error);

    cfg = SimConfig{};
    const std::vector<double> one(1, 0.0);
    CHECK_THROWS_AS(simulate_backdrive(cfg, one), validation_error);
}
