#include "survss/synth.hpp"

#include "survss/error.hpp"
#include "survss/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace survss {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string reference_of(const CategoricalDist& c) { return c.reference_level.value_or(c.levels.front()); }

}  // namespace

void PredictorSpec::validate() const {
    if (predictors.empty()) throw config_error("predictor spec is empty");
    for (const auto& p : predictors) {
        const std::string where = "predictor '" + p.name + "': ";
        std::visit(overloaded{
                       [&](const NormalDist& d) {
                           if (!std::isfinite(d.mean) || !(d.sd > 0.0)) throw config_error(where + "normal needs sd > 0");
                       },
                       [&](const LogNormalDist& d) {
                           if (!std::isfinite(d.log_mean) || !(d.log_sd > 0.0))
                               throw config_error(where + "lognormal needs log_sd > 0");
                       },
                       [&](const BernoulliDist& d) {
                           if (!(d.p >= 0.0 && d.p <= 1.0)) throw config_error(where + "bernoulli p must be in [0,1]");
                       },
                       [&](const CategoricalDist& d) {
                           if (d.levels.size() < 2 || d.levels.size() != d.probabilities.size())
                               throw config_error(where + "categorical needs >= 2 levels with one probability each");
                           double total = 0.0;
                           for (double q : d.probabilities) {
                               if (!(q >= 0.0 && q <= 1.0)) throw config_error(where + "probabilities must be in [0,1]");
                               total += q;
                           }
                           if (std::abs(total - 1.0) > 1e-9) throw config_error(where + "probabilities must sum to 1");
                           const auto ref = reference_of(d);
                           if (std::find(d.levels.begin(), d.levels.end(), ref) == d.levels.end())
                               throw config_error(where + "unknown reference level '" + ref + "'");
                       },
                   },
                   p.distribution);
    }
}

void validate(const CensoringSpec& spec) {
    std::visit(overloaded{
                   [](const NoCensoring&) {},
                   [](const ExponentialCensoring& c) {
                       if (!(c.rate > 0.0) || !std::isfinite(c.rate))
                           throw config_error("exponential censoring rate must be > 0");
                   },
                   [](const DelayedUniformCensoring& c) {
                       if (!(c.no_censor_before >= 0.0 && c.no_censor_before < c.uniform_until &&
                             c.uniform_until <= c.administrative_max))
                           throw config_error(
                               "delayed-uniform censoring needs 0 <= no_censor_before < uniform_until <= administrative_max");
                   },
               },
               spec);
}

PredictorTable sample_predictors(const PredictorSpec& spec, std::size_t n, std::uint64_t seed) {
    spec.validate();
    if (n == 0) throw config_error("sample size must be >= 1");

    PredictorTable table;
    std::vector<Eigen::VectorXd> columns;
    const auto rows = static_cast<Eigen::Index>(n);
    for (std::size_t k = 0; k < spec.predictors.size(); ++k) {
        const auto& p = spec.predictors[k];
        std::visit(overloaded{
                       [&](const NormalDist& d) {
                           Eigen::VectorXd col(rows);
                           for (std::size_t i = 0; i < n; ++i) {
                               Stream s(seed, stream_tag::predictors + k, i);
                               col(static_cast<Eigen::Index>(i)) = d.mean + d.sd * s.normal();
                           }
                           columns.push_back(std::move(col));
                           table.names.push_back(p.name);
                           table.kinds.push_back(PredictorKind::Continuous);
                       },
                       [&](const LogNormalDist& d) {
                           Eigen::VectorXd col(rows);
                           for (std::size_t i = 0; i < n; ++i) {
                               Stream s(seed, stream_tag::predictors + k, i);
                               col(static_cast<Eigen::Index>(i)) = std::exp(d.log_mean + d.log_sd * s.normal());
                           }
                           columns.push_back(std::move(col));
                           table.names.push_back(p.name);
                           table.kinds.push_back(PredictorKind::Continuous);
                       },
                       [&](const BernoulliDist& d) {
                           Eigen::VectorXd col(rows);
                           auto& labels = table.group_labels[p.name];
                           for (std::size_t i = 0; i < n; ++i) {
                               Stream s(seed, stream_tag::predictors + k, i);
                               const bool one = s.uniform() < d.p;
                               col(static_cast<Eigen::Index>(i)) = one ? 1.0 : 0.0;
                               labels.push_back(one ? "1" : "0");
                           }
                           columns.push_back(std::move(col));
                           table.names.push_back(p.name);
                           table.kinds.push_back(PredictorKind::Binary);
                       },
                       [&](const CategoricalDist& d) {
                           const std::string ref = reference_of(d);
                           std::vector<std::size_t> drawn(n);
                           auto& labels = table.group_labels[p.name];
                           for (std::size_t i = 0; i < n; ++i) {
                               Stream s(seed, stream_tag::predictors + k, i);
                               const double u = s.uniform();
                               double cum = 0.0;
                               std::size_t level = d.levels.size() - 1;
                               for (std::size_t l = 0; l < d.levels.size(); ++l) {
                                   cum += d.probabilities[l];
                                   if (u < cum) {
                                       level = l;
                                       break;
                                   }
                               }
                               drawn[i] = level;
                               labels.push_back(d.levels[level]);
                           }
                           for (std::size_t l = 0; l < d.levels.size(); ++l) {
                               if (d.levels[l] == ref) continue;
                               Eigen::VectorXd col = Eigen::VectorXd::Zero(rows);
                               for (std::size_t i = 0; i < n; ++i)
                                   if (drawn[i] == l) col(static_cast<Eigen::Index>(i)) = 1.0;
                               columns.push_back(std::move(col));
                               table.names.push_back(p.name + "_" + d.levels[l]);
                               table.kinds.push_back(PredictorKind::Indicator);
                           }
                       },
                   },
                   p.distribution);
    }
    table.values.resize(rows, static_cast<Eigen::Index>(columns.size()));
    for (std::size_t j = 0; j < columns.size(); ++j) table.values.col(static_cast<Eigen::Index>(j)) = columns[j];
    table.standardization.assign(columns.size(), std::nullopt);
    table.validate();
    return table;
}

std::vector<double> simulate_event_times(std::span<const double> mu, std::uint64_t seed) {
    std::vector<double> times(mu.size());
    for (std::size_t i = 0; i < mu.size(); ++i) {
        if (!std::isfinite(mu[i])) throw numerical_error("non-finite log hazard at row " + std::to_string(i + 1));
        Stream s(seed, stream_tag::events, i);
        times[i] = event_time_from_uniform(mu[i], s.uniform());
        if (!(times[i] > 0.0) || !std::isfinite(times[i]))
            throw numerical_error("simulated event time out of range at row " + std::to_string(i + 1));
    }
    return times;
}

double event_time_from_uniform(double mu, double u) { return -std::log(u) / std::exp(mu); }

std::vector<double> simulate_event_times(const CoreModel& model, const PredictorTable& table, std::uint64_t seed) {
    const Eigen::VectorXd mu = linear_predictor(model, table);
    return simulate_event_times(std::span<const double>(mu.data(), static_cast<std::size_t>(mu.size())), seed);
}

std::vector<double> censoring_times(const CensoringSpec& spec, std::size_t n, std::uint64_t seed) {
    validate(spec);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        Stream s(seed, stream_tag::censoring, i);
        out[i] = std::visit(
            overloaded{
                [](const NoCensoring&) { return std::numeric_limits<double>::infinity(); },
                [&](const ExponentialCensoring& e) { return -std::log(s.uniform()) / e.rate; },
                [&](const DelayedUniformCensoring& d) {
                    const double draw = d.no_censor_before + s.uniform() * (d.uniform_until - d.no_censor_before);
                    return std::min(draw, d.administrative_max);
                },
            },
            spec);
    }
    return out;
}

FollowUp apply_censoring(std::span<const double> event_times, const CensoringSpec& spec, std::uint64_t seed) {
    const std::size_t n = event_times.size();
    const std::vector<double> censor = censoring_times(spec, n, seed);
    std::vector<double> time(n);
    std::vector<int> event(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = event_times[i];
        if (!(t > 0.0)) throw data_error("event time must be > 0 at row " + std::to_string(i + 1));
        event[i] = t <= censor[i] ? 1 : 0;
        time[i] = std::min(t, censor[i]);
    }
    return FollowUp(std::move(time), std::move(event));
}

}  // namespace survss
