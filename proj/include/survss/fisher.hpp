#pragma once

#include "survss/core_model.hpp"
#include "survss/ingest.hpp"

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace survss {

/// Per-participant Fisher information of the exponential core model,
/// I = mean_i x_i x_i' exp(y_i + mu_i), with x_i = (1, predictors) and
/// y_i the log follow-up time. Total information is n * I.
struct UnitInformation {
    Eigen::MatrixXd matrix;
    Eigen::MatrixXd inverse;
    // Smallest over largest eigenvalue.
    double reciprocal_condition = 0.0;
    // "intercept" followed by the predictor names.
    std::vector<std::string> parameter_names;

    Eigen::Index dimension() const { return matrix.rows(); }

    // x' I^{-1} x for a design row x = (1, predictors).
    double quadratic_form(const Eigen::VectorXd& x) const;
};

inline constexpr double kMinReciprocalCondition = 1e-10;

/// Validates and inverts a symmetric positive-definite unit information matrix.
/// Throws a numerical error naming the near-null direction when the matrix is
/// not PD or its reciprocal condition falls below kMinReciprocalCondition.
UnitInformation make_unit_information(Eigen::MatrixXd matrix, std::vector<std::string> parameter_names);

UnitInformation unit_information(const CoreModel& model, const PredictorTable& table, const FollowUp& followup);

/// var(beta_hat) = I^{-1} / n.
Eigen::MatrixXd parameter_covariance(const UnitInformation& info, double n);

nlohmann::json to_json(const UnitInformation& info);

}  // namespace survss
