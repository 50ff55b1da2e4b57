#pragma once

#include "survss/calibration.hpp"
#include "survss/config.hpp"
#include "survss/fisher.hpp"
#include "survss/precision.hpp"
#include "survss/samplesize.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace survss {

inline constexpr const char* kVersion = "1.0.0";

struct PreparedCohort {
    PredictorTable table;
    std::optional<FollowUp> observed;
    std::vector<std::string> provenance;
};

/// Loads or synthesizes the predictors and applies the configured standardization.
PreparedCohort prepare_cohort(const RunConfig& config);

struct ResolvedModel {
    CoreModel model;
    std::optional<CalibrationReport> calibration;
};

ResolvedModel resolve_core_model(const RunConfig& config, const PredictorTable& table);

struct ResolvedFollowUp {
    FollowUp followup;
    bool simulated = false;
};

/// Observed follow-up when the data carries it; otherwise event times drawn
/// from the core model and censored with the configured scheme.
ResolvedFollowUp resolve_followup(const RunConfig& config, const PreparedCohort& cohort, const CoreModel& model);

struct Workflow {
    RunConfig config;
    PreparedCohort cohort;
    ResolvedModel model;
    ResolvedFollowUp followup;
    UnitInformation info;
};

Workflow prepare_workflow(const RunConfig& config);

PrecisionOptions precision_options(const RunConfig& config);

struct SizeGridRow {
    double n = 0.0;
    double mean_se_mu = 0.0;
    PrecisionAggregates aggregates;
};

/// One precision profile per n; mean width must not increase with n.
std::vector<SizeGridRow> size_grid(const Workflow& workflow, std::span<const double> sizes);

struct RunOutputs {
    std::vector<PrecisionReport> profiles;
    std::optional<SampleSizeResult> option_b;
    nlohmann::json report;
    nlohmann::json manifest;
    std::vector<std::filesystem::path> files;  // relative to the output directory
};

/// Option A for every configured n, Option B when targets are present, then
/// the full output tree under `out_dir`.
RunOutputs run_workflow(const Workflow& workflow, const std::filesystem::path& out_dir);

nlohmann::json to_json(const CoreModel& model);
nlohmann::json to_json(const CalibrationReport& report);
nlohmann::json to_json(const SampleSizeResult& result);
nlohmann::json software_versions();

/// Writes `value.dump(2)` plus a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& value);

}  // namespace survss
