#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <qdd/detail/random.hpp>
#include <qdd/dyno_sim.hpp>
#include <qdd/welch.hpp>

#include "test_helpers.hpp"

using Catch::Approx;
using namespace qdd;

namespace {

TimeSeries noise_pair(std::uint64_t seed_x, std::uint64_t seed_y, std::size_t n,
                      double sample_rate) {
    TimeSeries ts;
    ts.sample_rate = sample_rate;
    detail::GaussianSource gx(seed_x), gy(seed_y);
    ts.torque.resize(n);
    ts.velocity.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        ts.torque[i] = gx();
        ts.velocity[i] = gy();
    }
    return ts;
}

TimeSeries noiseless_backdrive(double j, double b, double duration, std::uint64_t seed) {
    SimConfig cfg;
    cfg.true_j = j;
    cfg.true_b = b;
    cfg.duration = duration;
    cfg.excitation.seed = seed;
    cfg.noise.torque_sigma = 0.0;
    cfg.noise.velocity_sigma = 0.0;
    return simulate_backdrive_run(cfg);
}

}  // namespace

TEST_CASE("identity channel gives unit gain and unit coherence", "[welch]") {
    TimeSeries ts;
    ts.sample_rate = 100.0;
    detail::GaussianSource g(5);
    ts.torque.resize(8192);
    for (double& v : ts.torque) v = g();
    ts.velocity = ts.torque;

    const FrequencyResponse fr = welch_tf(ts, Channel::Torque, Channel::Velocity);
    REQUIRE(fr.segment_count >= 2);
    REQUIRE(fr.frequency.size() == fr.gain.size());
    REQUIRE(fr.frequency.size() == fr.coherence.size());
    for (std::size_t k = 0; k < fr.gain.size(); ++k) {
        CHECK(std::abs(fr.gain[k] - std::complex<double>(1.0, 0.0)) < 1e-9);
        CHECK(fr.coherence[k] >= 1.0 - 1e-12);
        CHECK(fr.coherence[k] <= 1.0);
    }
}

TEST_CASE("static scaling is recovered exactly", "[welch]") {
    TimeSeries ts;
    ts.sample_rate = 100.0;
    detail::GaussianSource g(5);
    ts.torque.resize(8192);
    ts.velocity.resize(8192);
    for (std::size_t i = 0; i < ts.torque.size(); ++i) {
        ts.torque[i] = g();
        ts.velocity[i] = 2.5 * ts.torque[i];
    }
    const FrequencyResponse fr = welch_tf(ts, Channel::Torque, Channel::Velocity);
    for (std::size_t k = 0; k < fr.gain.size(); ++k) {
        CHECK(std::abs(fr.gain[k] - std::complex<double>(2.5, 0.0)) < 1e-9);
        CHECK(fr.coherence[k] == Approx(1.0).margin(1e-12));
    }
}

TEST_CASE("estimate matches the analytic first-order magnitude", "[welch]") {
    const double j = 6.55e-4, b = 1.0e-3;
    const TimeSeries ts = noiseless_backdrive(j, b, 60.0, 2);

    SECTION("long segments resolve the whole band") {
        WelchParams params;
        params.segment_length = 4096;
        const FrequencyResponse fr = welch_tf(ts, Channel::Torque, Channel::Velocity, params);
        std::size_t bins = 0;
        for (std::size_t k = 0; k < fr.frequency.size(); ++k) {
            const double f = fr.frequency[k];
            if (f < 1.0 || f > 40.0) continue;
            const double w = 2.0 * std::numbers::pi * f;
            const double model = 1.0 / std::sqrt(b * b + w * w * j * j);
            CHECK(std::abs(fr.gain[k]) == Approx(model).epsilon(0.05));
            CHECK(fr.coherence[k] >= 0.95);
            ++bins;
        }
        CHECK(bins == 145);
    }

    SECTION("default segments need a coherence gate at the leaky low end") {
        const FrequencyResponse fr = welch_tf(ts, Channel::Torque, Channel::Velocity);
        std::size_t gated = 0;
        for (std::size_t k = 0; k < fr.frequency.size(); ++k) {
            const double f = fr.frequency[k];
            if (f < 1.0 || f > 40.0 || fr.coherence[k] < 0.95) continue;
            const double w = 2.0 * std::numbers::pi * f;
            const double model = 1.0 / std::sqrt(b * b + w * w * j * j);
            CHECK(std::abs(fr.gain[k]) == Approx(model).epsilon(0.05));
            ++gated;
        }
        CHECK(gated >= 30);
    }
}

TEST_CASE("independent channels decohere", "[welch]") {
    const TimeSeries ts = noise_pair(11, 12, 65536, 1100.0);
    WelchParams params;
    params.segment_length = 1024;
    const FrequencyResponse fr = welch_tf(ts, Channel::Torque, Channel::Velocity, params);
    REQUIRE(fr.segment_count == 127);

    double peak = 0.0, mean = 0.0;
    for (double c : fr.coherence) {
        REQUIRE(c >= 0.0);
        REQUIRE(c <= 1.0);
        peak = std::max(peak, c);
        mean += c;
    }
    mean /= double(fr.coherence.size());
    CHECK(peak < 0.2);
    CHECK(mean < 0.05);
}

TEST_CASE("a single segment makes coherence degenerate", "[welch]") {
    const TimeSeries ts = noise_pair(11, 12, 4096, 1100.0);
    WelchParams params;
    params.segment_length = 4096;

    // The public entry point refuses to average one segment...
    CHECK_THROWS_AS(welch_tf(ts, Channel::Torque, Channel::Velocity, params), analysis_error);

    // ...because without averaging coherence is identically 1 even for
    // unrelated signals.
    const FrequencyResponse fr =
        detail::welch_cross_spectra(ts.torque, ts.velocity, ts.sample_rate, params, 1);
    REQUIRE(fr.segment_count == 1);
    for (double c : fr.coherence) CHECK(c == Approx(1.0).margin(1e-9));
}

TEST_CASE("frequency grid spans (0, Nyquist]", "[welch]") {
    const TimeSeries ts = noise_pair(1, 2, 2048, 1000.0);
    WelchParams params;
    params.segment_length = 512;
    const FrequencyResponse fr = welch_tf(ts, Channel::Torque, Channel::Velocity, params);
    REQUIRE(fr.frequency.size() == 256);
    CHECK(fr.frequency.front() == Approx(1000.0 / 512.0).epsilon(1e-15));
    CHECK(fr.frequency.back() == Approx(500.0).epsilon(1e-15));
    for (std::size_t k = 1; k < fr.frequency.size(); ++k)
        REQUIRE(fr.frequency[k] > fr.frequency[k - 1]);
}

TEST_CASE("welch rejects malformed requests", "[welch]") {
    const TimeSeries ts = noise_pair(1, 2, 4096, 1000.0);

    SECTION("channel length mismatch") {
        std::vector<double> x(100, 0.0), y(99, 0.0);
        CHECK_THROWS_AS(detail::welch_cross_spectra(x, y, 1000.0, {}, 2), validation_error);
    }
    SECTION("missing channel") {
        CHECK_THROWS_AS(welch_tf(ts, Channel::Current, Channel::Velocity), validation_error);
        CHECK_THROWS_AS(welch_tf(ts, Channel::Torque, Channel::Voltage), validation_error);
    }
    SECTION("overlap out of range") {
        WelchParams params;
        params.overlap = 1.0;
        CHECK_THROWS_AS(welch_tf(ts, Channel::Torque, Channel::Velocity, params),
                        validation_error);
        params.overlap = -0.1;
        CHECK_THROWS_AS(welch_tf(ts, Channel::Torque, Channel::Velocity, params),
                        validation_error);
    }
    SECTION("segment length must be a power of two") {
        WelchParams params;
        params.segment_length = 1000;
        CHECK_THROWS_AS(welch_tf(ts, Channel::Torque, Channel::Velocity, params),
                        validation_error);
    }
}
