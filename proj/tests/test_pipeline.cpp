#include "support.hpp"
#include "survss/error.hpp"
#include "survss/pipeline.hpp"

#include <doctest.h>

#include <fstream>
#include <sstream>

using namespace survss;

namespace {

RunConfig example(const std::string& name, const std::vector<std::string>& overrides = {}) {
    return load_config(testing::source_dir() / "examples" / name, overrides);
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace

TEST_CASE("identical configs give byte-identical output trees") {
    const auto cfg = example("gbsg_calibrated.json");
    const auto a = testing::scratch_dir("run_a");
    const auto b = testing::scratch_dir("run_b");
    const auto first = run_workflow(prepare_workflow(cfg), a);
    const auto second = run_workflow(prepare_workflow(cfg), b);
    REQUIRE(first.files == second.files);
    for (const auto& f : first.files) CHECK_MESSAGE(slurp(a / f) == slurp(b / f), f.string());
    for (const char* f : {"report.json", "individuals.csv", "subgroups.csv", "manifest.json",
                          "plots/prediction_instability.csv", "plots/prediction_instability.svg",
                          "plots/classification_instability.csv", "plots/classification_instability.svg"})
        CHECK_MESSAGE(std::filesystem::exists(a / f), f);
}

TEST_CASE("the manifest carries the config, seeds and calibrated model") {
    const auto cfg = example("gbsg_calibrated.json");
    const auto out = run_workflow(prepare_workflow(cfg), testing::scratch_dir("manifest"));
    const auto& m = out.manifest;
    CHECK(m["config_hash"] == cfg.hash);
    CHECK(m["config"] == cfg.document);
    CHECK(m["seeds"]["calibration"] == cfg.seeds.calibration);
    CHECK(m.contains("calibration"));
    CHECK(m["information"]["reciprocal_condition"].get<double>() > 0.0);
    // Re-running from the embedded config reproduces the report.
    auto again = parse_config(m["config"], testing::source_dir() / "examples");
    CHECK(run_workflow(prepare_workflow(again), testing::scratch_dir("manifest_b")).report == out.report);
}

TEST_CASE("data without follow-up routes through simulated censoring") {
    const auto cfg = example("synthetic_no_followup.json", {"data.synth.n=2000"});
    const auto w = prepare_workflow(cfg);
    CHECK(w.followup.simulated);
    CHECK(w.followup.followup.size() == 2000);
    CHECK(w.followup.followup.events() < 2000);
    auto missing = cfg.document;
    missing.erase("censoring");
    const auto no_censoring = parse_config(missing, testing::source_dir() / "examples");
    CHECK_THROWS_AS((void)prepare_workflow(no_censoring), Error);
}

TEST_CASE("size grid matches the reference widths and quartering halves the standard errors") {
    const auto w = prepare_workflow(example("gbsg_core_model.json"));
    const std::vector<double> sizes{355, 920};
    const auto rows = size_grid(w, sizes);
    CHECK(std::abs(rows[0].aggregates.width.mean - 0.23) <= 0.01);
    CHECK(std::abs(rows[1].aggregates.width.mean - 0.14) <= 0.01);
    const std::vector<double> scaled{500, 2000};
    const auto q = size_grid(w, scaled);
    CHECK(q[0].mean_se_mu / q[1].mean_se_mu == doctest::Approx(2.0).epsilon(1e-12));
    CHECK_THROWS_AS((void)size_grid(w, std::vector<double>{}), Error);
}

TEST_CASE("a beta of the wrong length is a config error") {
    const auto cfg = example("gbsg_core_model.json", {"core_model.beta=[1,2]"});
    try {
        (void)prepare_workflow(cfg);
        FAIL("expected a config error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Config);
    }
}

TEST_CASE("equal standardized weights calibrate end to end") {
    const auto cfg = example("gbsg_calibrated.json",
                             {"core_model.calibrate={\"overall_risk\":0.39,\"c_index\":0.65,"
                              "\"equal_standardized_weights\":[-1,1,1,1,1,1]}"});
    const auto w = prepare_workflow(cfg);
    REQUIRE(w.model.calibration);
    CHECK(std::abs(w.model.calibration->c_index - 0.65) <= 0.005);
}
