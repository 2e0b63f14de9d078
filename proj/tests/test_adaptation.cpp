#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dremrac/adaptation.hpp"

using namespace dremrac;

TEST_CASE("memory derivative weights by current time") {
    MemoryConfig cfg;
    cfg.sigma = 0.5;
    MemoryState st = MemoryState::zero(3, 1);
    st.Omega = 2.0;
    st.t = 1.0;
    Mat y = Mat::col_vec({1.0, 0.0, -1.0});
    auto d = memory_derivative(st, 3.0, y, cfg);
    const double w = std::exp(-0.5);
    CHECK(d.dOmega == doctest::Approx(-0.5 * 2.0 + w * 9.0));
    CHECK(d.dUpsilon[0] == doctest::Approx(w * 3.0));
    CHECK(d.dUpsilon[2] == doctest::Approx(-w * 3.0));
}

TEST_CASE("memory operator matches its closed form for constant excitation") {
    // With Delta^2 = c constant, Omega(t) = exp(-sigma t) c t.
    MemoryConfig cfg;
    cfg.sigma = 0.5;
    const double c = 0.8;
    const double Delta = std::sqrt(c);
    MemoryState st = MemoryState::zero(1, 1);
    Mat y = Mat::col_vec({Delta * 2.0});  // y_theta = Delta * theta, theta = 2
    const double dt = 1e-3;
    for (int i = 0; i < 5000; ++i) st = memory_step(st, Delta, y, cfg, dt);
    const double t = 5.0;
    const double expect = std::exp(-cfg.sigma * t) * c * t;
    CHECK(std::abs(st.Omega - expect) / expect <= 1e-6);
    // Upsilon = Omega theta along the trajectory.
    CHECK(std::abs(st.Upsilon[0] - st.Omega * 2.0) / (st.Omega * 2.0) <= 1e-9);
}

TEST_CASE("Upsilon tracks Omega theta under time-varying excitation") {
    MemoryConfig cfg;
    cfg.sigma = 0.3;
    Mat theta = Mat::from_rows({{1.5, -0.5}, {0.25, 2.0}});
    MemoryState st = MemoryState::zero(2, 2);
    const double dt = 1e-3;
    for (int i = 0; i < 4000; ++i) {
        const double t = i * dt;
        const double Delta = std::sin(t) * std::sin(t);
        st = memory_step(st, Delta, Delta * theta, cfg, dt);
    }
    CHECK(st.Omega > 0.0);
    CHECK((st.Upsilon - st.Omega * theta).max_abs() / (st.Omega * theta.max_abs()) <= 1e-9);
}

TEST_CASE("gain schedule") {
    GainSchedule sched;  // gamma0 = 1, gamma1 = 10, epsilon = 0
    Mat omega = Mat::col_vec({3.0, 4.0});

    SUBCASE("zero below or at the excitation threshold") {
        sched.epsilon = 1e-3;
        CHECK(gain(sched, 0.0, omega) == 0.0);
        CHECK(gain(sched, 1e-3, omega) == 0.0);
    }

    SUBCASE("normalized by Omega squared above it") {
        // (1 * 25 + 10) / 4 = 8.75.
        CHECK(gain(sched, 2.0, omega) == doctest::Approx(8.75));
        // Regressor-free floor gamma1 / Omega^2.
        CHECK(gain(sched, 2.0, Mat(2, 1)) == doctest::Approx(2.5));
    }

    SUBCASE("contraction rate gamma Omega^2 is at least gamma1") {
        for (double Om : {1e-6, 1e-2, 1.0, 50.0}) {
            const double g = gain(sched, Om, omega);
            CHECK(g * Om * Om == doctest::Approx(sched.gamma0 * 25.0 + sched.gamma1));
        }
    }
}

TEST_CASE("adaptation is stationary at the true parameters") {
    Mat theta = Mat::from_rows({{1.0, 2.0}, {-0.5, 0.25}, {3.0, -1.0}});
    const double Omega = 0.7;
    Mat Upsilon = Omega * theta;
    Mat next = adapt_step(theta, 5.0, Omega, Upsilon, 1e-2);
    CHECK((next - theta).max_abs() <= 1e-14);
}

TEST_CASE("scalar adaptation matches its exponential closed form") {
    // theta_hat' = -gamma Omega^2 (theta_hat - theta) with everything frozen:
    // theta_hat(t) = theta + (theta_hat(0) - theta) exp(-gamma Omega^2 t).
    const double theta = 2.0, Omega = 1.0, gamma = 2.0;
    Mat Upsilon = Mat::col_vec({Omega * theta});
    Mat th = Mat::col_vec({0.0});
    const double dt = 1e-3;
    for (int i = 0; i < 3000; ++i) th = adapt_step(th, gamma, Omega, Upsilon, dt);
    const double expect = theta * (1.0 - std::exp(-gamma * 3.0));
    CHECK(std::abs(th[0] - expect) <= 1e-6);
}

TEST_CASE("zero gain freezes the estimate") {
    Mat th = Mat::col_vec({1.0, -2.0});
    Mat next = adapt_step(th, 0.0, 123.0, Mat::col_vec({5.0, 5.0}), 0.1);
    CHECK((next - th).max_abs() == 0.0);
}

TEST_CASE("corrected baseline contracts, literal baseline diverges") {
    const double theta = 1.0, Delta = 1.0, gamma = 1.0;
    Mat y = Mat::col_vec({Delta * theta});
    const double dt = 1e-3;

    Mat good = Mat::col_vec({5.0});
    Mat bad = Mat::col_vec({5.0});
    for (int i = 0; i < 3000; ++i) {
        good = baseline_adapt_step(good, gamma, Delta, y, BaselineSign::corrected, dt);
        bad = baseline_adapt_step(bad, gamma, Delta, y, BaselineSign::literal, dt);
    }
    // Corrected: error shrinks by exp(-3).
    CHECK(std::abs(good[0] - theta) == doctest::Approx(4.0 * std::exp(-3.0)).epsilon(1e-6));
    // Literal: the sign is flipped, the same error grows by exp(+3).
    CHECK(std::abs(bad[0] - theta) == doctest::Approx(4.0 * std::exp(3.0)).epsilon(1e-6));
}
