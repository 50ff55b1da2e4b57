#include "support.hpp"
#include "survss/error.hpp"
#include "survss/report.hpp"
#include "survss/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

using namespace survss;

namespace {

PrecisionReport gbsg_report(double n) {
    const auto c = testing::gbsg_cohort();
    PrecisionOptions o;
    o.thresholds = {0.2};
    return precision_profile(testing::gbsg_core_model(), c.table, *c.followup, n, o);
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace

TEST_CASE("LOWESS reproduces lines and constants") {
    Stream s(5, 1);
    std::vector<double> x(200), line(200), flat(200, 0.37);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = s.uniform();
        line[i] = 2.5 * x[i] - 0.7;
    }
    for (double f : {0.1, 0.5, 1.0}) {
        const auto a = lowess(x, line, f);
        const auto b = lowess(x, flat, f);
        for (std::size_t i = 0; i < x.size(); ++i) {
            CHECK(std::abs(a[i] - line[i]) <= 1e-8);
            CHECK(std::abs(b[i] - 0.37) <= 1e-12);
        }
    }
}

TEST_CASE("a smaller LOWESS bandwidth tracks a quadratic more closely") {
    Stream s(8, 1);
    const std::size_t n = 400;
    std::vector<double> x(n), y(n), truth(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = s.uniform();
        truth[i] = 4.0 * (x[i] - 0.5) * (x[i] - 0.5);
        y[i] = truth[i] + 0.05 * s.normal();
    }
    auto rmse = [&](double f) {
        const auto fit = lowess(x, y, f);
        double sq = 0.0;
        for (std::size_t i = 0; i < n; ++i) sq += (fit[i] - truth[i]) * (fit[i] - truth[i]);
        return std::sqrt(sq / n);
    };
    CHECK(rmse(0.3) < rmse(0.9));
}

TEST_CASE("LOWESS argument checks") {
    const std::vector<double> four{1, 2, 3, 4};
    CHECK_THROWS_AS((void)lowess(four, four), Error);
    const std::vector<double> five{1, 2, 3, 4, 5};
    CHECK_THROWS_AS((void)lowess(five, five, 0.0), Error);
    CHECK_THROWS_AS((void)lowess(five, four), Error);
}

TEST_CASE("smoothed upper curve stays above the smoothed lower curve") {
    for (double n : {355.0, 920.0}) {
        const auto s = prediction_instability_series(gbsg_report(n));
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            CHECK(s.x[i] > 0.0);
            CHECK(s.x[i] < 1.0);
            CHECK(s.smooth_upper[i] >= s.smooth_lower[i]);
        }
    }
}

TEST_CASE("classification instability peaks near the threshold") {
    const auto s = classification_instability_series(gbsg_report(355), 0);
    std::size_t best = 0;
    for (std::size_t i = 1; i < s.x.size(); ++i)
        if (s.lower[i] > s.lower[best]) best = i;
    CHECK(std::abs(s.x[best] - 0.20) <= 0.01);
}

TEST_CASE("subgroups partition the overall aggregates") {
    const auto c = testing::gbsg_cohort();
    const auto report = gbsg_report(920);
    const auto groups = subgroup_summary(report, c.table.group_labels.at("meno"));
    REQUIRE(groups.size() == 2);
    double width = 0.0, mis = 0.0;
    std::size_t count = 0;
    for (const auto& g : groups) {
        width += g.aggregates.width.sum;
        mis += g.aggregates.misclass[0].sum;
        count += g.count;
    }
    CHECK(count == 220);
    CHECK(width == doctest::Approx(report.overall.width.sum).epsilon(1e-13));
    CHECK(mis == doctest::Approx(report.overall.misclass[0].sum).epsilon(1e-13));

    const std::vector<std::string> same(220, "all");
    const auto one = subgroup_summary(report, same);
    REQUIRE(one.size() == 1);
    CHECK(one[0].aggregates.width.mean == report.overall.width.mean);
    CHECK(one[0].aggregates.mape.median == report.overall.mape.median);
    CHECK(one[0].flags.empty());
}

TEST_CASE("singleton groups are flagged low-n and large means are flagged") {
    const auto report = gbsg_report(355);
    std::vector<std::string> labels(220, "rest");
    std::size_t widest = 0;
    for (std::size_t i = 1; i < 220; ++i)
        if (report.individuals[i].interval.width() > report.individuals[widest].interval.width()) widest = i;
    labels[widest] = "solo";
    const auto groups = subgroup_summary(report, labels, 1.5);
    const auto& solo = groups[1].label == "solo" ? groups[1] : groups[0];
    CHECK(solo.low_n);
    CHECK(solo.count == 1);
    CHECK(std::find(solo.flags.begin(), solo.flags.end(), "width") != solo.flags.end());
}

TEST_CASE("plots are byte-deterministic and CSVs have one row per individual") {
    const auto report = gbsg_report(355);
    const std::vector<PlotSeries> series{prediction_instability_series(report),
                                         classification_instability_series(report, 0)};
    const auto a = testing::scratch_dir("plots_a");
    const auto b = testing::scratch_dir("plots_b");
    const auto files = emit_plots(series, a);
    (void)emit_plots(series, b);
    REQUIRE(files.size() == 4);
    for (const auto& f : files) CHECK(slurp(f) == slurp(b / f.filename()));
    std::ifstream csv(a / "prediction_instability.csv");
    std::string line;
    std::size_t lines = 0;
    while (std::getline(csv, line)) ++lines;
    CHECK(lines == 221);
    CHECK(slurp(a / "prediction_instability.svg").rfind("<svg", 0) == 0);
}

TEST_CASE("plot emission errors") {
    PlotSeries empty;
    CHECK_THROWS_AS((void)emit_plots({empty}, testing::scratch_dir("plots_empty")), Error);
    const auto report = gbsg_report(355);
    const auto blocker = testing::scratch_dir("plots_blocked") / "file";
    std::ofstream(blocker) << "x";
    CHECK_THROWS_AS((void)emit_plots({prediction_instability_series(report)}, blocker / "sub"), Error);
}
