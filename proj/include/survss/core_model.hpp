#pragma once

#include "survss/ingest.hpp"

#include <Eigen/Core>

#include <span>
#include <vector>

namespace survss {

/// Exponential proportional-hazards core model:
///   log hazard mu_i = alpha + delta * (beta . x_i),  T_i ~ Exponential(exp(mu_i)).
/// `horizon` is the prediction time t* in cohort time units.
struct CoreModel {
    double alpha = 0.0;
    double delta = 1.0;
    Eigen::VectorXd beta;
    double horizon = 1.0;

    // Effective regression coefficients (alpha, delta * beta).
    Eigen::VectorXd coefficients() const;
};

// F(t) = 1 - exp(-exp(mu) t), evaluated without cancellation for small risks.
double risk_from_log_rate(double mu, double t);
// Inverse of risk_from_log_rate in mu.
double log_rate_from_risk(double risk, double t);

Eigen::VectorXd linear_predictor(const CoreModel& model, const PredictorTable& table);
Eigen::VectorXd true_risk(const CoreModel& model, const PredictorTable& table, double t);

/// Harrell's concordance over comparable pairs: i had an event and either
/// t_i < t_j, or t_i == t_j with j censored. Higher mu is predicted to fail
/// first; ties in mu count one half. O(n log n).
double harrell_c(std::span<const double> mu, const FollowUp& followup);

/// Approach (b) weights: one unit of effect per standardized predictor.
Eigen::VectorXd standardized_equal_weights(const PredictorTable& table, std::span<const int> signs);

}  // namespace survss
