#pragma once

#include "survss/core_model.hpp"
#include "survss/synth.hpp"

#include <cstdint>

namespace survss {

struct CalibrationTarget {
    double overall_risk = 0.0;  // mean F(t*) over the cohort
    double c_index = 0.5;
    double tolerance_risk = 0.005;
    double tolerance_c = 0.005;
    int max_iterations = 200;
};

struct CalibrationOptions {
    CensoringSpec censoring = NoCensoring{};
    // Compute the C-index on uncensored simulated times instead.
    bool censoring_free_c = false;
    // Cohorts smaller than `full_cohort_threshold` are replicated to
    // `simulation_rows` rows for the simulated C-index.
    std::size_t full_cohort_threshold = 5000;
    std::size_t simulation_rows = 10000;
    std::uint64_t seed = 20240601;
};

struct CalibrationReport {
    CoreModel model;
    double c_index = 0.5;
    double overall_risk = 0.0;
    int iterations = 0;
    std::size_t simulation_rows = 0;
};

/// Intercept giving the target mean risk at `horizon` for fixed delta.
double solve_intercept(const Eigen::VectorXd& weighted_sum, double delta, double horizon, double overall_risk);

/// Finds (alpha, delta) so that the core model with relative weights `beta`
/// reaches the target mean risk and the target Harrell C on a simulated
/// event/censoring realization. Nested monotone bisection: alpha is solved
/// exactly for every trial delta, delta is bisected on the simulated C.
CalibrationReport calibrate(const PredictorTable& table, const Eigen::VectorXd& beta, double horizon,
                            const CalibrationTarget& target, const CalibrationOptions& options);

/// Simulated C-index of a fully specified model on the calibration realization.
double simulated_c_index(const PredictorTable& table, const CoreModel& model, const CalibrationOptions& options);

}  // namespace survss
