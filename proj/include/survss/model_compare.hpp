#pragma once

#include "survss/ingest.hpp"
#include "survss/precision.hpp"

#include <Eigen/Core>
#include <optional>
#include <vector>

namespace survss {

enum class Family { Exponential, Weibull };

/// A maximum-likelihood survival regression.
///
/// Exponential: coefficients are on the log-hazard scale, mu = x . b.
/// Weibull: AFT location coefficients gamma with log T = x . gamma + sigma * W,
/// W standard extreme value; shape = 1 / sigma. The covariance is over
/// (gamma, log sigma) unless the shape was held fixed.
struct FittedSurvivalModel {
    Family family = Family::Exponential;
    Eigen::VectorXd coefficients;
    std::optional<double> shape;
    bool shape_fixed = false;
    Eigen::MatrixXd covariance;
    double loglik = 0.0;
    bool converged = false;
    int iterations = 0;

    // Full parameter vector the covariance refers to.
    Eigen::VectorXd parameters() const;
};

struct FitOptions {
    int max_iterations = 100;
    double score_tolerance = 1e-8;
    // Weibull only: hold the shape at this value.
    std::optional<double> fixed_shape;
};

Eigen::MatrixXd design_matrix(const PredictorTable& table);

// Exponential log-likelihood sum_i [d_i mu_i - exp(mu_i) t_i] and its derivatives.
double exponential_loglik(const Eigen::MatrixXd& design, const FollowUp& followup, const Eigen::VectorXd& coef);
Eigen::VectorXd exponential_score(const Eigen::MatrixXd& design, const FollowUp& followup, const Eigen::VectorXd& coef);
Eigen::MatrixXd exponential_hessian(const Eigen::MatrixXd& design, const FollowUp& followup,
                                    const Eigen::VectorXd& coef);

// Weibull AFT log-likelihood (density in t) over params = (gamma, log sigma).
double weibull_loglik(const Eigen::MatrixXd& design, const FollowUp& followup, const Eigen::VectorXd& params);
Eigen::VectorXd weibull_score(const Eigen::MatrixXd& design, const FollowUp& followup, const Eigen::VectorXd& params);
Eigen::MatrixXd weibull_hessian(const Eigen::MatrixXd& design, const FollowUp& followup, const Eigen::VectorXd& params);

FittedSurvivalModel fit_exponential(const PredictorTable& table, const FollowUp& followup,
                                    const FitOptions& options = {});
FittedSurvivalModel fit_weibull(const PredictorTable& table, const FollowUp& followup, const FitOptions& options = {});

/// Risk by time t for a design row under a fitted model.
double fitted_risk(const FittedSurvivalModel& fit, const Eigen::VectorXd& x, double t);

enum class IntervalScale {
    Risk,    // delta method on F directly, clamped to [0,1]
    LogLog,  // delta method on log(-log(1 - F)), mapped back
};

struct ModelInterval {
    double risk = 0.0;
    RiskInterval interval;
    double se = 0.0;  // on the scale the interval was built
    bool clamped = false;
    bool unreliable = false;
};

struct ComparisonRow {
    ModelInterval exponential;
    ModelInterval weibull;
    double width_difference = 0.0;  // weibull - exponential
};

struct ComparisonReport {
    std::vector<ComparisonRow> rows;
    Summary exponential_width;
    Summary weibull_width;
    Summary width_difference;
    double likelihood_ratio = 0.0;
    std::size_t flagged = 0;
};

inline constexpr double kUnreliableRiskSe = 0.25;

/// Exponential intervals follow the log-rate construction with the fitted
/// covariance; Weibull intervals use the delta method with a central-difference
/// gradient over every parameter including the shape.
ComparisonReport compare_intervals(const FittedSurvivalModel& exponential, const FittedSurvivalModel& weibull,
                                   const PredictorTable& table, double t, double z,
                                   IntervalScale weibull_scale = IntervalScale::Risk);

}  // namespace survss
