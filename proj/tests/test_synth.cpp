#include "support.hpp"
#include "survss/error.hpp"
#include "survss/synth.hpp"

#include <doctest.h>

#include <cmath>

using namespace survss;

namespace {

PredictorSpec one(Distribution d) { return PredictorSpec{{{"x", std::move(d)}}}; }

CoreModel intercept_only(double alpha, std::size_t n, PredictorTable& table) {
    table.names = {"c"};
    table.kinds = {PredictorKind::Continuous};
    table.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), 1);
    table.standardization.assign(1, std::nullopt);
    CoreModel m;
    m.alpha = alpha;
    m.beta = Eigen::VectorXd::Zero(1);
    return m;
}

}  // namespace

TEST_CASE("bernoulli predictors match p within the binomial bound") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto t = sample_predictors(one(BernoulliDist{0.26}), 10000, seed);
        const double m = t.values.col(0).mean();
        CHECK(m >= 0.24);
        CHECK(m <= 0.28);
    }
    const auto ones = sample_predictors(one(BernoulliDist{1.0}), 500, 5);
    CHECK((ones.values.array() == 1.0).all());
}

TEST_CASE("normal predictors have the declared moments") {
    const auto t = sample_predictors(one(NormalDist{0.0, 1.0}), 10000, 11);
    const auto col = t.values.col(0);
    const double mean = col.mean();
    const double sd = std::sqrt((col.array() - mean).square().sum() / (col.size() - 1));
    CHECK(std::abs(mean) < 0.05);
    CHECK(sd >= 0.95);
    CHECK(sd <= 1.05);
}

TEST_CASE("categorical predictors expand to indicators with group labels") {
    CategoricalDist d{{"1", "2", "3"}, {0.15, 0.66, 0.19}, std::string("1")};
    const auto t = sample_predictors(PredictorSpec{{{"grade", d}}}, 20000, 3);
    CHECK(t.names == std::vector<std::string>{"grade_2", "grade_3"});
    CHECK(t.values.col(0).mean() == doctest::Approx(0.66).epsilon(0.03));
    CHECK(t.group_labels.at("grade").size() == 20000);
}

TEST_CASE("invalid specs are rejected") {
    CHECK_THROWS_AS(one(NormalDist{0.0, 0.0}).validate(), Error);
    CHECK_THROWS_AS(one(BernoulliDist{1.5}).validate(), Error);
    CHECK_THROWS_AS(one(CategoricalDist{{"a", "b"}, {0.5, 0.6}, std::nullopt}).validate(), Error);
    CHECK_THROWS_AS(validate(CensoringSpec{DelayedUniformCensoring{3.0, 2.0, 4.0}}), Error);
}

TEST_CASE("sampling is reproducible and independent of n for shared rows") {
    const PredictorSpec spec{{{"a", NormalDist{1, 2}}, {"b", BernoulliDist{0.3}}}};
    const auto x = sample_predictors(spec, 300, 99);
    const auto y = sample_predictors(spec, 300, 99);
    const auto z = sample_predictors(spec, 100, 99);
    CHECK(x.values == y.values);
    CHECK(x.values.topRows(100) == z.values);
}

TEST_CASE("intercept-only event times have mean 1 at rate 1") {
    PredictorTable table;
    const auto m = intercept_only(0.0, 100000, table);
    const auto times = simulate_event_times(m, table, 2024);
    double sum = 0.0;
    for (double t : times) sum += t;
    const double mean = sum / times.size();
    CHECK(mean >= 0.99);
    CHECK(mean <= 1.01);
}

TEST_CASE("simulated day-scale event times match the exponential risk") {
    PredictorTable table;
    const auto m = intercept_only(std::log(0.0000925), 100000, table);
    const auto times = simulate_event_times(m, table, 77);
    std::size_t early = 0;
    for (double t : times) early += t <= 5 * 365.25;
    const double risk = static_cast<double>(early) / times.size();
    CHECK(std::abs(risk - -std::expm1(-0.0000925 * 5 * 365.25)) <= 0.005);
}

TEST_CASE("inversion at U = exp(-1) gives the reciprocal rate") {
    for (double mu : {-3.0, 0.0, 1.7})
        CHECK(event_time_from_uniform(mu, std::exp(-1.0)) == doctest::Approx(std::exp(-mu)).epsilon(1e-14));
}

TEST_CASE("no censoring keeps every event") {
    const std::vector<double> t{0.5, 1.0, 2.0};
    const auto fu = apply_censoring(t, NoCensoring{}, 1);
    CHECK(fu.events() == 3);
    CHECK(fu.time() == t);
}

TEST_CASE("censoring at the event rate halves the event fraction") {
    PredictorTable table;
    const auto m = intercept_only(std::log(0.3), 100000, table);
    const auto t = simulate_event_times(m, table, 5);
    const auto fu = apply_censoring(t, ExponentialCensoring{0.3}, 5);
    const double frac = static_cast<double>(fu.events()) / fu.size();
    CHECK(std::abs(frac - 0.5) <= 0.01);
    for (std::size_t i = 0; i < t.size(); ++i) {
        REQUIRE(fu.time(i) <= t[i]);
        REQUIRE((fu.time(i) == t[i]) == (fu.event(i) == 1));
    }
}

TEST_CASE("delayed uniform censoring on the breast cancer cohort gives mean follow-up near 3.55 years") {
    const auto cohort = testing::gbsg_cohort();
    std::vector<std::size_t> rows(10000);
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i % cohort.table.rows();
    const auto big = cohort.table.select_rows(rows);
    const auto times = simulate_event_times(testing::gbsg_core_model(), big, 31);
    const auto fu = apply_censoring(times, DelayedUniformCensoring{2.0, 7.28, 7.28}, 31);
    const double mean = fu.person_time() / fu.size();
    CHECK(std::abs(mean - 3.55) <= 0.1);
    for (std::size_t i = 0; i < fu.size(); ++i) REQUIRE(fu.time(i) <= 7.28);
}

TEST_CASE("empirical risk of uncensored simulation matches the analytic mean") {
    const auto cohort = testing::gbsg_cohort();
    std::vector<std::size_t> rows(100000);
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i % cohort.table.rows();
    const auto big = cohort.table.select_rows(rows);
    const auto m = testing::gbsg_core_model();
    const auto times = simulate_event_times(m, big, 8);
    std::size_t early = 0;
    for (double t : times) early += t <= 5.0;
    CHECK(std::abs(static_cast<double>(early) / times.size() - true_risk(m, big, 5.0).mean()) <= 0.01);
}

TEST_CASE("adding censoring does not perturb the event-time draws") {
    const auto cohort = testing::gbsg_cohort();
    const auto m = testing::gbsg_core_model();
    const auto a = simulate_event_times(m, cohort.table, 4);
    (void)censoring_times(ExponentialCensoring{0.1}, cohort.table.rows(), 4);
    const auto b = simulate_event_times(m, cohort.table, 4);
    CHECK(a == b);
}
