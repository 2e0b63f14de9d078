#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "benchmark_fixture.hpp"
#include "dremrac/plant.hpp"

using namespace dremrac;

TEST_CASE("PlantModel::make validates shapes and rank") {
    auto plant = bench::plant();
    CHECK(plant.n == 4);
    CHECK(plant.m == 2);

    Mat A = Mat::identity(2);
    Mat B_rank_def = Mat::from_rows({{1, 2}, {2, 4}});  // rank 1
    CHECK_THROWS_AS(PlantModel::make(A, B_rank_def, Mat::col_vec({0.0, 0.0})), ModelError);
    CHECK_THROWS_AS(PlantModel::make(Mat::identity(3), Mat(2, 1), Mat(3, 1)), ModelError);
}

TEST_CASE("PlantModel::make rejects uncontrollable pairs") {
    // Decoupled mode never reached by the input.
    Mat A = Mat::from_rows({{1, 0}, {0, 2}});
    Mat B = Mat::from_rows({{1}, {0}});
    CHECK_THROWS_AS(PlantModel::make(A, B, Mat(2, 1)), ModelError);
}

TEST_CASE("is_controllable") {
    auto plant = bench::plant();
    CHECK(is_controllable(plant.A, plant.B));
    Mat A = Mat::from_rows({{1, 0}, {0, 2}});
    CHECK_FALSE(is_controllable(A, Mat::from_rows({{1}, {0}})));
    // Double integrator.
    Mat Adi = Mat::from_rows({{0, 1}, {0, 0}});
    CHECK(is_controllable(Adi, Mat::from_rows({{0}, {1}})));
}

TEST_CASE("is_hurwitz") {
    auto ref = bench::reference();
    CHECK(is_hurwitz(ref.A_ref));
    // The open-loop benchmark plant has a slightly unstable spiral mode.
    CHECK_FALSE(is_hurwitz(bench::plant().A));
    Mat neg(1, 1);
    neg(0, 0) = -1.0;
    CHECK(is_hurwitz(neg));
    CHECK_FALSE(is_hurwitz(Mat::from_rows({{0, 1}, {0, 0}})));
}

TEST_CASE("ReferenceModel::make rejects non-Hurwitz dynamics") {
    Mat A_unstable = Mat::identity(2);
    CHECK_THROWS_AS(ReferenceModel::make(A_unstable, Mat::identity(2), Mat(2, 1)), ModelError);
}

TEST_CASE("ideal_gains matches the frozen least-squares oracle") {
    auto gains = ideal_gains(bench::plant(), bench::reference());
    Mat theta = gains.theta();
    Mat expect = bench::theta_ls();
    CHECK((theta - expect).max_abs() <= 1e-10);
    CHECK(gains.residual == doctest::Approx(bench::kMatchingResidual).epsilon(1e-10));
}

TEST_CASE("ideal_gains is exact when matching holds by construction") {
    Mat A = Mat::from_rows({{0, 1}, {0, 0}});
    Mat B = Mat::from_rows({{0}, {1}});
    Mat Kx = Mat::from_rows({{-2, -3}});
    Mat Kr = Mat::from_rows({{2}});
    Mat A_ref = A + B * Kx;
    Mat B_ref = B * Kr;
    auto plant = PlantModel::make(A, B, Mat(2, 1));
    auto ref = ReferenceModel::make(A_ref, B_ref, Mat(2, 1));
    auto gains = ideal_gains(plant, ref);
    CHECK((gains.K_x - Kx).max_abs() <= 1e-12);
    CHECK((gains.K_r - Kr).max_abs() <= 1e-12);
    CHECK(gains.residual <= 1e-12);
}

TEST_CASE("plant and reference derivatives at the benchmark initial state") {
    auto plant = bench::plant();
    Mat u = Mat::col_vec({0.0, 0.5});
    Mat dx = plant_derivative(plant, plant.x0, u);
    // A x0 + B u worked by hand from the benchmark entries.
    CHECK(dx[0] == doctest::Approx(0.0));
    CHECK(dx[1] == doctest::Approx(-0.0015).epsilon(1e-12));
    CHECK(dx[2] == doctest::Approx(2.563).epsilon(1e-12));
    CHECK(dx[3] == doctest::Approx(-2.372).epsilon(1e-12));

    auto ref = bench::reference();
    Mat r = Mat::col_vec({1.0, 0.0});
    Mat dref = reference_derivative(ref, ref.x0_ref, r);
    // A_ref x0 + B_ref column 1.
    CHECK(dref[0] == doctest::Approx(0.0));
    CHECK(dref[1] == doctest::Approx(-0.048 + 0.041).epsilon(1e-9));
    CHECK(dref[2] == doctest::Approx(19.53 + 0.5 * 5.219 + 19.441).epsilon(1e-9));
    CHECK(dref[3] == doctest::Approx(0.204 - 0.5 * 3.22 + 0.348).epsilon(1e-9));
}

TEST_CASE("control law u = theta_hat' [x; r]") {
    auto ctrl = ControllerState::default_init(4, 2);
    Mat x = Mat::col_vec({1.0, 2.0, 3.0, 4.0});
    Mat r = Mat::col_vec({0.25, -0.5});
    Mat u = control(ctrl, x, r);
    // Default gains are zero feedback, identity feedforward.
    CHECK(u[0] == doctest::Approx(0.25));
    CHECK(u[1] == doctest::Approx(-0.5));
}

TEST_CASE("ControllerState::make rejects a zero feedforward block") {
    Mat th(6, 2);  // all zero, so K_r_hat(0) = 0
    CHECK_THROWS_AS(ControllerState::make(th, 4, 2), ModelError);
    CHECK_NOTHROW(ControllerState::make(ControllerState::default_init(4, 2).theta_hat, 4, 2));
}

TEST_CASE("tracking and augmented error") {
    Mat x = Mat::col_vec({3.0, 4.0, 0.0, 0.0});
    Mat x_ref = Mat(4, 1);
    Mat e = tracking_error(x, x_ref);
    CHECK(e.norm() == doctest::Approx(5.0));

    Mat theta = bench::theta_ls();
    CHECK(augmented_error(Mat(4, 1), theta, theta) == doctest::Approx(0.0));
    CHECK(augmented_error(e, theta, theta) == doctest::Approx(5.0));
}
