#include "support.hpp"
#include "survss/calibration.hpp"
#include "survss/error.hpp"

#include <doctest.h>

#include <cmath>

using namespace survss;

TEST_CASE("solve_intercept hits the target mean risk") {
    const auto table = testing::gbsg_cohort().table;
    const auto m = testing::gbsg_core_model();
    const Eigen::VectorXd score = table.values * m.beta;
    const double alpha = solve_intercept(score, 0.208, 5.0, 0.39);
    double mean = 0.0;
    for (Eigen::Index i = 0; i < score.size(); ++i) mean += risk_from_log_rate(alpha + 0.208 * score(i), 5.0);
    CHECK(mean / score.size() == doctest::Approx(0.39).epsilon(1e-9));
}

TEST_CASE("calibration reaches both behavioral targets on the breast cancer cohort") {
    const auto table = testing::gbsg_cohort().table;
    const auto m = testing::gbsg_core_model();
    const auto r = calibrate(table, m.beta, 5.0, CalibrationTarget{0.39, 0.70}, CalibrationOptions{});
    CHECK(std::abs(r.c_index - 0.70) <= 0.005);
    CHECK(std::abs(r.overall_risk - 0.39) <= 0.005);
    CHECK(r.simulation_rows == 10000);
    CHECK(simulated_c_index(table, r.model, CalibrationOptions{}) == r.c_index);
}

TEST_CASE("calibration is deterministic for a fixed seed") {
    const auto table = testing::gbsg_cohort().table;
    const auto beta = testing::gbsg_core_model().beta;
    const auto a = calibrate(table, beta, 5.0, CalibrationTarget{0.39, 0.70}, CalibrationOptions{});
    const auto b = calibrate(table, beta, 5.0, CalibrationTarget{0.39, 0.70}, CalibrationOptions{});
    CHECK(a.model.alpha == b.model.alpha);
    CHECK(a.model.delta == b.model.delta);
}

TEST_CASE("a C target of 0.5 gives the intercept-only model") {
    const auto table = testing::gbsg_cohort().table;
    const auto r = calibrate(table, testing::gbsg_core_model().beta, 5.0, CalibrationTarget{0.3, 0.5}, {});
    CHECK(r.model.delta == 0.0);
    CHECK(risk_from_log_rate(r.model.alpha, 5.0) == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("a constant score cannot reach a C above one half") {
    auto table = testing::gbsg_cohort().table;
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(6);
    try {
        (void)calibrate(table, beta, 5.0, CalibrationTarget{0.39, 0.7}, {});
        FAIL("expected infeasible");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Infeasible);
    }
}

TEST_CASE("an unreachable C is reported as infeasible") {
    const auto table = testing::gbsg_cohort().table;
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(6);
    beta(3) = 1.0;  // a single binary predictor caps the attainable C
    try {
        (void)calibrate(table, beta, 5.0, CalibrationTarget{0.39, 0.95}, {});
        FAIL("expected infeasible");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Infeasible);
    }
}

TEST_CASE("targets out of range are config errors") {
    const auto table = testing::gbsg_cohort().table;
    const auto beta = testing::gbsg_core_model().beta;
    CHECK_THROWS_AS((void)calibrate(table, beta, 5.0, CalibrationTarget{1.2, 0.7}, {}), Error);
    CHECK_THROWS_AS((void)calibrate(table, beta, 5.0, CalibrationTarget{0.3, 0.4}, {}), Error);
}
