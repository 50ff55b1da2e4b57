#include "support.hpp"
#include "survss/error.hpp"
#include "survss/precision.hpp"
#include "survss/samplesize.hpp"

#include <doctest.h>

#include <cmath>

using namespace survss;

TEST_CASE("the variance target reproduces the requested width") {
    for (double risk : {0.05, 0.2, 0.39, 0.7})
        for (double width : {0.05, 0.2, 0.6}) {
            const double v = variance_target_from_width(risk, width, 5.0, 1.96);
            const auto iv = risk_interval(log_rate_from_risk(risk, 5.0), std::sqrt(v), 5.0, 1.96);
            CHECK(iv.width() == doctest::Approx(width).epsilon(1e-9));
        }
}

TEST_CASE("widths the risk scale cannot reach are infeasible") {
    try {
        (void)variance_target_from_width(0.5, 1.0, 5.0, 1.96);
        FAIL("expected infeasible");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Infeasible);
    }
    CHECK_THROWS_AS((void)variance_target_from_width(0.5, 0.0, 5.0, 1.96), Error);
}

TEST_CASE("required n round trips within one ceiling step") {
    const auto c = testing::gbsg_cohort();
    const auto model = testing::gbsg_core_model();
    const auto info = unit_information(model, c.table, *c.followup);
    const auto mu = linear_predictor(model, c.table);
    const double z = 1.96;
    for (std::size_t i = 0; i < c.table.rows(); i += 11) {
        const auto x = c.table.design_row(i);
        const double risk = risk_from_log_rate(mu(static_cast<Eigen::Index>(i)), 5.0);
        const double target = 0.15;
        const double v = variance_target_from_width(risk, target, 5.0, z);
        const auto n = required_n(info, x, v);
        const auto width_at = [&](double m) {
            return risk_interval(mu(static_cast<Eigen::Index>(i)), std::sqrt(prediction_variance(info, x, m)), 5.0, z)
                .width();
        };
        CHECK(width_at(static_cast<double>(n)) <= target * (1 + 1e-9));
        if (n > 1) CHECK(width_at(static_cast<double>(n - 1)) > target * (1 - 1e-9));
    }
}

TEST_CASE("cohort n* is the largest individual requirement and binds in its bin") {
    const auto c = testing::gbsg_cohort();
    const auto model = testing::gbsg_core_model();
    const auto info = unit_information(model, c.table, *c.followup);
    PrecisionTargets targets;
    targets.bins = {{0.1, 0.1}, {0.3, 0.2}};
    const auto r = cohort_required_n(model, c.table, info, targets, 1.96);
    std::uint64_t top = 0;
    for (const auto& ind : r.individuals) top = std::max(top, ind.n);
    CHECK(r.n_star == top);
    CHECK(r.individuals.size() == c.table.rows());
    REQUIRE(!r.binding_rows.empty());
    CHECK(r.individuals[r.binding_rows[0]].n == r.n_star);
    for (const auto& ind : r.individuals) {
        const std::size_t expect = std::abs(ind.true_risk - 0.1) <= std::abs(ind.true_risk - 0.3) ? 0 : 1;
        CHECK(ind.bin == expect);
    }
}

TEST_CASE("scope filters by true risk and group") {
    const auto c = testing::gbsg_cohort();
    const auto model = testing::gbsg_core_model();
    const auto info = unit_information(model, c.table, *c.followup);
    PrecisionTargets targets;
    targets.bins = {{0.3, 0.2}};
    targets.scope.max_true_risk = 0.3;
    const auto r = cohort_required_n(model, c.table, info, targets, 1.96);
    for (const auto& ind : r.individuals) CHECK(ind.true_risk <= 0.3);
    targets.scope.group = std::make_pair(std::string("meno"), std::string("pre"));
    const auto pre = cohort_required_n(model, c.table, info, targets, 1.96);
    CHECK(pre.individuals.size() < r.individuals.size());
    targets.scope.group = std::make_pair(std::string("meno"), std::string("nobody"));
    CHECK_THROWS_AS((void)cohort_required_n(model, c.table, info, targets, 1.96), Error);
}

TEST_CASE("target validation") {
    PrecisionTargets t;
    CHECK_THROWS_AS(t.validate(), Error);
    t.bins = {{0.3, 0.2}, {0.2, 0.1}};
    CHECK_THROWS_AS(t.validate(), Error);
}
