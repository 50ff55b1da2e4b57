#pragma once

#include "survss/calibration.hpp"
#include "survss/ingest.hpp"
#include "survss/samplesize.hpp"
#include "survss/synth.hpp"

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace survss {

struct CsvSource {
    std::filesystem::path path;
    CohortSchema schema;
};

struct SynthSource {
    PredictorSpec spec;
    std::size_t n = 0;
};

struct DirectModel {
    double alpha = 0.0;
    double delta = 1.0;
    Eigen::VectorXd beta;
};

struct CalibratedModel {
    CalibrationTarget target;
    // Exactly one of these is set.
    std::optional<Eigen::VectorXd> beta_relative;
    std::optional<std::vector<int>> equal_standardized_weights;
};

struct Seeds {
    std::uint64_t calibration = 20240601;
    std::uint64_t mape = 20240602;
    std::uint64_t simulation = 20240603;
};

struct RunConfig {
    std::variant<CsvSource, SynthSource> data;
    std::vector<std::string> standardize;
    std::variant<DirectModel, CalibratedModel> core_model;
    double horizon = 1.0;
    std::optional<CensoringSpec> censoring;
    std::vector<double> sample_sizes;
    std::optional<PrecisionTargets> precision_targets;
    std::vector<double> thresholds;
    double level = 0.95;
    std::optional<double> z_multiplier;
    int mape_draws = 1000;
    double lowess_bandwidth = 0.5;
    double subgroup_flag_factor = 1.5;
    Seeds seeds;
    std::filesystem::path output_dir = "out";

    nlohmann::json document;  // the effective configuration after overrides
    std::string hash;         // SHA-256 of the canonical document

    double multiplier() const;
};

nlohmann::json read_config_json(const std::filesystem::path& path);

/// Applies `path=value`. The path is a JSON pointer ("/core_model/alpha") or a
/// dotted path ("core_model.alpha", "sample_sizes.0"). The value is parsed as
/// JSON when possible, otherwise taken as a string.
void apply_override(nlohmann::json& document, const std::string& assignment);

std::string sha256_hex(const std::string& bytes);

/// Validates the whole document and reports every problem at once, each
/// prefixed by its JSON pointer. Relative data paths resolve against `base_dir`.
RunConfig parse_config(const nlohmann::json& document, const std::filesystem::path& base_dir);

RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

nlohmann::json to_json(const CensoringSpec& spec);

}  // namespace survss
