#pragma once

#include "survss/core_model.hpp"
#include "survss/ingest.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace survss {

struct NormalDist {
    double mean = 0.0;
    double sd = 1.0;
};
struct LogNormalDist {
    double log_mean = 0.0;
    double log_sd = 1.0;
};
struct BernoulliDist {
    double p = 0.5;
};
struct CategoricalDist {
    std::vector<std::string> levels;
    std::vector<double> probabilities;
    // First level when unset.
    std::optional<std::string> reference_level;
};

using Distribution = std::variant<NormalDist, LogNormalDist, BernoulliDist, CategoricalDist>;

struct PredictorDistribution {
    std::string name;
    Distribution distribution;
};

/// Marginal distributions of the core predictors, sampled independently.
struct PredictorSpec {
    std::vector<PredictorDistribution> predictors;
    void validate() const;
};

struct NoCensoring {};
struct ExponentialCensoring {
    double rate = 0.0;
};
/// No censoring before `no_censor_before`, uniform censoring times up to
/// `uniform_until`, and everyone still at risk censored at `administrative_max`.
struct DelayedUniformCensoring {
    double no_censor_before = 0.0;
    double uniform_until = 1.0;
    double administrative_max = 1.0;
};

using CensoringSpec = std::variant<NoCensoring, ExponentialCensoring, DelayedUniformCensoring>;

void validate(const CensoringSpec& spec);

/// n independent rows; categorical predictors are expanded to k-1
/// indicators and also recorded as group labels under their own name.
PredictorTable sample_predictors(const PredictorSpec& spec, std::size_t n, std::uint64_t seed);

/// Inversion sampling t_i = -log(U_i) / exp(mu_i), one stream per individual.
std::vector<double> simulate_event_times(const CoreModel& model, const PredictorTable& table, std::uint64_t seed);
std::vector<double> simulate_event_times(std::span<const double> mu, std::uint64_t seed);
double event_time_from_uniform(double mu, double u);

/// Censoring times per individual; +infinity under NoCensoring.
std::vector<double> censoring_times(const CensoringSpec& spec, std::size_t n, std::uint64_t seed);

/// Observed time min(t, c) and event indicator [t <= c].
FollowUp apply_censoring(std::span<const double> event_times, const CensoringSpec& spec, std::uint64_t seed);

}  // namespace survss
