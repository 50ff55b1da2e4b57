#include "support.hpp"
#include "survss/error.hpp"
#include "survss/model_compare.hpp"
#include "survss/synth.hpp"

#include <doctest.h>

#include <cmath>

using namespace survss;

namespace {

template <class F>
Eigen::VectorXd numeric_gradient(F&& f, const Eigen::VectorXd& at) {
    Eigen::VectorXd g(at.size());
    for (Eigen::Index j = 0; j < at.size(); ++j) {
        const double h = 1e-5 * std::max(1.0, std::abs(at(j)));
        Eigen::VectorXd up = at, down = at;
        up(j) += h;
        down(j) -= h;
        g(j) = (f(up) - f(down)) / (2 * h);
    }
    return g;
}

double relative_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return (a - b).norm() / std::max(1.0, b.norm());
}

}  // namespace

TEST_CASE("analytic scores match finite differences") {
    const auto c = testing::gbsg_cohort();
    const Eigen::MatrixXd x = design_matrix(c.table);
    const auto& fu = *c.followup;
    Eigen::VectorXd b = testing::gbsg_core_model().coefficients();
    const auto ge = numeric_gradient([&](const Eigen::VectorXd& q) { return exponential_loglik(x, fu, q); }, b);
    CHECK(relative_error(exponential_score(x, fu, b), ge) < 1e-5);

    Eigen::VectorXd w(8);
    w.head(7) = -b;
    w(7) = -0.2;
    const auto gw = numeric_gradient([&](const Eigen::VectorXd& q) { return weibull_loglik(x, fu, q); }, w);
    CHECK(relative_error(weibull_score(x, fu, w), gw) < 1e-5);

    const Eigen::MatrixXd h = weibull_hessian(x, fu, w);
    for (Eigen::Index j = 0; j < 8; ++j) {
        const auto col = numeric_gradient([&](const Eigen::VectorXd& q) { return weibull_score(x, fu, q)(j); }, w);
        CHECK(relative_error(h.col(j), col) < 1e-5);
    }
}

TEST_CASE("fits converge with zero score and the Weibull nests the exponential") {
    const auto c = testing::gbsg_cohort();
    const auto e = fit_exponential(c.table, *c.followup);
    const auto w = fit_weibull(c.table, *c.followup);
    REQUIRE(e.converged);
    REQUIRE(w.converged);
    const Eigen::MatrixXd x = design_matrix(c.table);
    CHECK(exponential_score(x, *c.followup, e.coefficients).norm() < 1e-6);
    CHECK(weibull_score(x, *c.followup, w.parameters()).norm() < 1e-6);
    CHECK(w.loglik >= e.loglik);
    CHECK(w.covariance.rows() == 8);
}

TEST_CASE("a Weibull with shape held at one reproduces the exponential") {
    const auto c = testing::gbsg_cohort();
    const auto e = fit_exponential(c.table, *c.followup);
    FitOptions o;
    o.fixed_shape = 1.0;
    const auto w = fit_weibull(c.table, *c.followup, o);
    CHECK((w.coefficients + e.coefficients).cwiseAbs().maxCoeff() < 1e-7);
    CHECK(w.loglik == doctest::Approx(e.loglik).epsilon(1e-12));
    const auto cmp = compare_intervals(e, w, c.table, 5.0, 1.96, IntervalScale::LogLog);
    for (const auto& r : cmp.rows) {
        CHECK(r.weibull.risk == doctest::Approx(r.exponential.risk).epsilon(1e-9));
        CHECK(r.weibull.interval.lower == doctest::Approx(r.exponential.interval.lower).epsilon(1e-6));
        CHECK(r.weibull.interval.upper == doctest::Approx(r.exponential.interval.upper).epsilon(1e-6));
    }
}

TEST_CASE("exponential MLE recovers the generating coefficients") {
    const auto c = testing::gbsg_cohort();
    std::vector<std::size_t> rows(20000);
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i % c.table.rows();
    const auto big = c.table.select_rows(rows);
    auto m = testing::gbsg_core_model();
    const auto fu = apply_censoring(simulate_event_times(m, big, 3), NoCensoring{}, 3);
    const auto fit = fit_exponential(big, fu);
    const Eigen::VectorXd truth = m.coefficients();
    for (Eigen::Index j = 0; j < truth.size(); ++j)
        CHECK(std::abs(fit.coefficients(j) - truth(j)) < 4.0 * std::sqrt(fit.covariance(j, j)));
}

TEST_CASE("risk-scale Weibull intervals are clamped and flagged") {
    const auto c = testing::gbsg_cohort();
    const auto e = fit_exponential(c.table, *c.followup);
    const auto w = fit_weibull(c.table, *c.followup);
    const auto cmp = compare_intervals(e, w, c.table, 5.0, 1.96, IntervalScale::Risk);
    for (const auto& r : cmp.rows) {
        CHECK(r.weibull.interval.lower >= 0.0);
        CHECK(r.weibull.interval.upper <= 1.0);
        if (r.weibull.clamped) CHECK(r.weibull.unreliable);
    }
    CHECK(cmp.likelihood_ratio >= 0.0);
}

TEST_CASE("fitting without events is a data error") {
    auto c = testing::gbsg_cohort();
    std::vector<int> none(c.table.rows(), 0);
    const FollowUp fu(c.followup->time(), none);
    CHECK_THROWS_AS((void)fit_exponential(c.table, fu), Error);
}
