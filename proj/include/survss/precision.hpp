#pragma once

#include "survss/core_model.hpp"
#include "survss/fisher.hpp"
#include "survss/ingest.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace survss {

struct Summary {
    std::size_t count = 0;
    double mean = 0.0;
    double min = 0.0;
    double median = 0.0;
    double max = 0.0;
    double sum = 0.0;
};

Summary summarize(std::span<const double> values);

/// Two-sided normal multiplier for a confidence level, e.g. 1.959964 at 0.95.
double normal_multiplier(double level);

/// var(mu_hat_new) = x' I^{-1} x / n for a design row x = (1, predictors).
double prediction_variance(const UnitInformation& info, const Eigen::VectorXd& x_new, double n);

struct RiskInterval {
    double lower = 0.0;
    double upper = 0.0;
    double width() const { return upper - lower; }
};

/// mu -/+ z * se on the log-rate scale, mapped to risk at time t.
RiskInterval risk_interval(double mu, double se, double t, double z);

/// Mass of Normal(mu, se^2) on the opposite side of the risk threshold from
/// the true risk F(mu, t).
double misclassification_probability(double mu, double se, double t, double threshold);

struct PredictionError {
    double mape = 0.0;
    double rmspe = 0.0;
};

/// Monte-Carlo absolute and root-mean-square risk error from `draws` samples
/// of Normal(mu, se^2). `stream_index` keys the random stream so individuals
/// draw independently of evaluation order.
PredictionError prediction_error(double mu, double se, double t, int draws, std::uint64_t seed,
                                 std::uint64_t stream_index = 0);

/// Expected net-benefit loss: P(misclassified) * |p - (1 - p) z / (1 - z)|.
double net_benefit_loss(double true_risk, double misclass_prob, double threshold);

struct IndividualPrecision {
    double mu = 0.0;
    double se_mu = 0.0;
    double true_risk = 0.0;
    RiskInterval interval;
    double mape = 0.0;
    double rmspe = 0.0;
    std::vector<double> misclass;  // one per threshold
    std::vector<double> nb_loss;   // one per threshold
};

struct PrecisionOptions {
    double level = 0.95;
    // Overrides the exact normal multiplier (e.g. 1.96).
    std::optional<double> z_multiplier;
    std::vector<double> thresholds;
    int mape_draws = 1000;
    std::uint64_t seed = 20240602;

    double multiplier() const { return z_multiplier.value_or(normal_multiplier(level)); }
};

struct PrecisionAggregates {
    Summary width;
    Summary mape;
    Summary rmspe;
    Summary true_risk;
    std::vector<Summary> misclass;
    std::vector<Summary> nb_loss;
};

struct PrecisionReport {
    double n = 0.0;
    double horizon = 0.0;
    double z = 0.0;
    std::vector<double> thresholds;
    std::vector<IndividualPrecision> individuals;
    PrecisionAggregates overall;

    PrecisionAggregates aggregate(std::span<const std::size_t> subset) const;
};

/// Option A: per-individual precision for a development sample of size n.
PrecisionReport precision_profile(const CoreModel& model, const PredictorTable& table, const UnitInformation& info,
                                  double n, const PrecisionOptions& options);
PrecisionReport precision_profile(const CoreModel& model, const PredictorTable& table, const FollowUp& followup,
                                  double n, const PrecisionOptions& options);

}  // namespace survss
