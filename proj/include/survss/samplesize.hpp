#pragma once

#include "survss/core_model.hpp"
#include "survss/fisher.hpp"
#include "survss/ingest.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace survss {

struct WidthTarget {
    double risk = 0.0;       // nominal risk level of the bin
    double max_width = 0.0;  // largest acceptable interval width on the risk scale
};

struct PrecisionScope {
    std::optional<double> min_true_risk;
    std::optional<double> max_true_risk;
    // (group column, label) restricts the scope to one subgroup.
    std::optional<std::pair<std::string, std::string>> group;
};

struct PrecisionTargets {
    std::vector<WidthTarget> bins;
    PrecisionScope scope;
    void validate() const;
};

/// Variance of mu_hat whose interval, centered at the log rate giving `risk`
/// at time t, has risk-scale width exactly `width`.
double variance_target_from_width(double risk, double width, double t, double z);

/// Inverse of the variance formula: ceil(x' I^{-1} x / target_variance), at least 1.
std::uint64_t required_n(const UnitInformation& info, const Eigen::VectorXd& x_new, double target_variance);

struct IndividualRequirement {
    std::size_t row = 0;
    double true_risk = 0.0;
    std::size_t bin = 0;
    double target_variance = 0.0;
    std::uint64_t n = 0;
};

struct BinRequirement {
    WidthTarget target;
    std::size_t individuals = 0;
    std::uint64_t max_n = 0;
    std::optional<std::size_t> binding_row;
};

struct SampleSizeResult {
    std::uint64_t n_star = 0;
    std::vector<IndividualRequirement> individuals;  // scoped individuals, table order
    std::vector<BinRequirement> bins;
    std::vector<std::size_t> binding_rows;  // up to 10 rows with the largest n, descending
};

/// Option B over a cohort: each scoped individual takes the bin whose risk is
/// nearest their true risk (ties to the lower bin), converts that bin's width
/// at their own true risk, and n* is the largest individual requirement.
SampleSizeResult cohort_required_n(const CoreModel& model, const PredictorTable& table, const UnitInformation& info,
                                   const PrecisionTargets& targets, double z);

}  // namespace survss
