#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include <qdd/actuator.hpp>

#include "test_helpers.hpp"

using Catch::Approx;
using namespace qdd;

TEST_CASE("effective constants scale with the transmission ratio", "[actuator]") {
    const EffectiveConstants e = effective_constants({testutil::ri50(), 7.5});
    CHECK(e.j_a.value == Approx(5.068e-4).epsilon(1e-3));
    CHECK(e.j_a.value == Approx(56.25 * 9.01e-6).epsilon(1e-13));
    CHECK(e.j_a.sigma == Approx(56.25 * 1.8e-6).epsilon(1e-13));

    const EffectiveConstants e6 = effective_constants({testutil::ri50(), 6.0});
    CHECK(e6.k_ta.value == Approx(0.63).epsilon(1e-12));
    CHECK(e6.k_ta.sigma == Approx(0.012).epsilon(1e-12));
    CHECK(e6.k_ma.value == Approx(6.0 * 0.118).epsilon(1e-12));

    const EffectiveConstants id = effective_constants({testutil::ri50(), 1.0});
    CHECK(id.k_ta.value == 0.105);
    CHECK(id.j_a.value == 9.01e-6);

    CHECK_THROWS_AS(effective_constants({testutil::ri50(), 0.0}), validation_error);
}

TEST_CASE("ratio for a torque target at a current limit", "[actuator]") {
    CHECK(ratio_for_torque(testutil::ri50(), 6.3, 10.0) == Approx(6.0).epsilon(1e-12));
    CHECK(ratio_for_torque(testutil::u8(), 6.3, 10.0) == Approx(4.5).epsilon(1e-12));

    MotorRecord unit = testutil::ri50();
    unit.k_t = {1.0, 0.0};
    CHECK(ratio_for_torque(unit, 1.0, 1.0) == 1.0);

    CHECK_THROWS_AS(ratio_for_torque(testutil::ri50(), -1.0, 10.0), validation_error);
    CHECK_THROWS_AS(ratio_for_torque(testutil::ri50(), 1.0, 0.0), validation_error);
}

TEST_CASE("ratio for matched reflected inertia", "[actuator]") {
    const double n = ratio_for_matched_inertia(testutil::ri50(), {testutil::u8(), 1.0});
    CHECK(n == Approx(3.6495).epsilon(1e-4));

    // Matching back with the found ratio lands on 1.
    CHECK(ratio_for_matched_inertia(testutil::u8(), {testutil::ri50(), n}) ==
          Approx(1.0).epsilon(1e-12));

    // Matching a motor to itself reproduces the reference ratio exactly.
    for (double k : {0.5, 1.0, 7.5}) {
        CHECK(ratio_for_matched_inertia(testutil::ri50(), {testutil::ri50(), k}) == k);
    }
}

TEST_CASE("matched-inertia comparison of the reference motors", "[actuator]") {
    const MatchedInertiaComparison cmp =
        compare_at_matched_inertia(testutil::ri50(), testutil::u8());

    CHECK(cmp.n_a == Approx(3.6495).epsilon(1e-4));
    CHECK(cmp.n_b == 1.0);
    CHECK(cmp.a.j_a.value == Approx(cmp.b.j_a.value).epsilon(1e-12));

    CHECK(cmp.k_ta_ratio == Approx(2.737).epsilon(1e-3));
    CHECK(cmp.k_ma_ratio == Approx(1.872).epsilon(1e-3));
    CHECK(cmp.s_m_advantage > 3.3);
    CHECK(cmp.s_m_advantage < 3.6);

    CHECK(cmp.k_ta_winner == "RI50");
    CHECK(cmp.k_ma_winner == "RI50");
}

TEST_CASE("matched-inertia ratios equal their closed forms", "[actuator]") {
    const MatchedInertiaComparison cmp =
        compare_at_matched_inertia(testutil::ri50(), testutil::u8());
    // At equal reflected inertia the torque advantages collapse to square
    // roots of the motor metrics.
    CHECK(cmp.k_ta_ratio == Approx(std::sqrt(cmp.s_t_advantage)).epsilon(1e-12));
    CHECK(cmp.k_ma_ratio == Approx(std::sqrt(cmp.s_m_advantage)).epsilon(1e-12));
}

TEST_CASE("comparing a motor with itself is a wash", "[actuator]") {
    const MatchedInertiaComparison cmp =
        compare_at_matched_inertia(testutil::ri50(), testutil::ri50());
    CHECK(cmp.n_a == 1.0);
    CHECK(cmp.k_ta_ratio == 1.0);
    CHECK(cmp.k_ma_ratio == 1.0);
    CHECK(cmp.s_m_advantage == 1.0);
    CHECK(cmp.s_t_advantage == 1.0);
}

TEST_CASE("motor metrics are invariant to the transmission ratio", "[actuator]") {
    std::mt19937_64 rng(123);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto log_uniform = [&](double lo, double hi) { return lo * std::pow(hi / lo, u(rng)); };

    for (int trial = 0; trial < 1000; ++trial) {
        MotorRecord m;
        m.name = "rand";
        m.r_phase = {log_uniform(0.05, 5.0), 0.0};
        m.l_eff = {1e-4, 0.0};
        m.k_t = {log_uniform(0.01, 1.0), 0.0};
        m.k_b = Uncertain{m.k_t.value * (0.5 + u(rng)), 0.0};
        m.j_m = {log_uniform(1e-6, 1e-3), 0.0};
        m.mass = {log_uniform(0.05, 2.0), 0.0};
        if (u(rng) < 0.5)
            m.k_m = Uncertain{derive_km(m.k_t, *m.k_b, m.r_phase).value * (0.8 + 0.4 * u(rng)),
                              0.0};

        const double n = log_uniform(0.3, 30.0);
        const EffectiveConstants e = effective_constants({m, n});
        const double s_m_out = e.j_a.value / (e.k_ma.value * e.k_ma.value);
        const double s_t_out = e.j_a.value / (e.k_ta.value * e.k_ta.value);
        REQUIRE(s_m_out == Approx(responsiveness_metric(m).value).epsilon(1e-12));
        REQUIRE(s_t_out == Approx(torque_specific_inertia(m).value).epsilon(1e-12));
    }
}

TEST_CASE("gap-radius scaling laws", "[actuator]") {
    const ScalingPrediction p = scaling_prediction(2.0, 1.0);
    CHECK(p.k_t_ratio == 4.0);
    CHECK(p.k_t_per_mass_ratio == 2.0);
    CHECK(p.k_t_per_inertia_ratio == 0.5);
    CHECK(p.k_m_sq_ratio == 8.0);
    CHECK(p.j_m_ratio == 8.0);

    const ScalingPrediction unit = scaling_prediction(1.0, 1.0);
    CHECK(unit.k_t_ratio == 1.0);
    CHECK(unit.j_m_ratio == 1.0);

    CHECK(scaling_prediction(2.795, 0.5).k_t_ratio == Approx(3.906).margin(2e-3));

    CHECK_THROWS_AS(scaling_prediction(0.0, 1.0), validation_error);
}

TEST_CASE("scaling predictions compose multiplicatively", "[actuator]") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.2, 5.0);
    for (int trial = 0; trial < 50; ++trial) {
        const double r1 = u(rng), l1 = u(rng), r2 = u(rng), l2 = u(rng);
        const ScalingPrediction a = scaling_prediction(r1, l1);
        const ScalingPrediction b = scaling_prediction(r2, l2);
        const ScalingPrediction ab = scaling_prediction(r1 * r2, l1 * l2);
        CHECK(ab.k_t_ratio == Approx(a.k_t_ratio * b.k_t_ratio).epsilon(1e-12));
        CHECK(ab.k_t_per_mass_ratio ==
              Approx(a.k_t_per_mass_ratio * b.k_t_per_mass_ratio).epsilon(1e-12));
        CHECK(ab.k_t_per_inertia_ratio ==
              Approx(a.k_t_per_inertia_ratio * b.k_t_per_inertia_ratio).epsilon(1e-12));
        CHECK(ab.k_m_sq_ratio == Approx(a.k_m_sq_ratio * b.k_m_sq_ratio).epsilon(1e-12));
        CHECK(ab.j_m_ratio == Approx(a.j_m_ratio * b.j_m_ratio).epsilon(1e-12));
    }
}

TEST_CASE("scaling deviation report for the reference pair", "[actuator]") {
    const auto rows = scaling_deviation_report(testutil::u8(), testutil::ri50());
    REQUIRE(rows.size() == 6);

    auto find = [&](const std::string& q) {
        for (const auto& r : rows)
            if (r.quantity == q) return r;
        FAIL("missing row " + q);
        return rows.front();
    };

    const auto kt = find("k_t");
    CHECK(kt.predicted == Approx(3.905).margin(5e-3));
    CHECK(kt.measured == Approx(0.14 / 0.105).epsilon(1e-12));

    const auto jm = find("j_m");
    CHECK(jm.predicted == Approx(10.91).margin(5e-3));
    CHECK(jm.measured == Approx(13.32).margin(5e-3));

    const auto sm = find("s_m");
    CHECK(sm.predicted == 1.0);
    CHECK(sm.measured > 3.3);
    CHECK(sm.measured < 3.6);

    for (const auto& r : rows)
        CHECK(r.quotient == Approx(r.measured / r.predicted).epsilon(1e-12));
}

TEST_CASE("scaling deviation of a motor against itself is unity", "[actuator]") {
    for (const auto& r : scaling_deviation_report(testutil::ri50(), testutil::ri50())) {
        CHECK(r.predicted == Approx(1.0).epsilon(1e-12));
        CHECK(r.measured == Approx(1.0).epsilon(1e-12));
        CHECK(r.quotient == Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("scaling deviation requires geometry", "[actuator]") {
    MotorRecord no_geom = testutil::ri50();
    no_geom.gap_radius.reset();
    CHECK_THROWS_AS(scaling_deviation_report(no_geom, testutil::u8()), unresolved_field_error);
    CHECK_THROWS_AS(scaling_deviation_report(testutil::u8(), no_geom), unresolved_field_error);
}

TEST_CASE("mechanical time constant is the responsiveness metric", "[actuator]") {
    const Uncertain tau = mechanical_time_constant(testutil::ri50());
    const Uncertain s_m = responsiveness_metric(testutil::ri50());
    CHECK(tau.value == s_m.value);
    CHECK(tau.sigma == s_m.sigma);
}
