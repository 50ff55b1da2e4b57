#include "survss/precision.hpp"

#include "survss/error.hpp"
#include "survss/rng.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace survss {

Summary summarize(std::span<const double> values) {
    Summary s;
    s.count = values.size();
    if (values.empty()) return s;
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    s.sum = std::accumulate(values.begin(), values.end(), 0.0);
    s.mean = s.sum / static_cast<double>(values.size());
    s.min = sorted.front();
    s.max = sorted.back();
    const std::size_t mid = sorted.size() / 2;
    s.median = sorted.size() % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
    return s;
}

double normal_multiplier(double level) {
    if (!(level > 0.0 && level < 1.0)) throw config_error("confidence level must be in (0,1)");
    return boost::math::quantile(boost::math::normal(), 0.5 + 0.5 * level);
}

double prediction_variance(const UnitInformation& info, const Eigen::VectorXd& x_new, double n) {
    if (!(n >= 1.0)) throw config_error("sample size must be >= 1");
    return info.quadratic_form(x_new) / n;
}

RiskInterval risk_interval(double mu, double se, double t, double z) {
    return {risk_from_log_rate(mu - z * se, t), risk_from_log_rate(mu + z * se, t)};
}

double misclassification_probability(double mu, double se, double t, double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0)) throw config_error("risk threshold must be in (0,1)");
    if (!(se > 0.0)) return 0.0;
    const double mu_threshold = log_rate_from_risk(threshold, t);
    const boost::math::normal standard;
    const double zscore = (mu_threshold - mu) / se;
    // Below threshold: misclassified when the draw lands above mu_threshold.
    if (risk_from_log_rate(mu, t) < threshold) return boost::math::cdf(boost::math::complement(standard, zscore));
    return boost::math::cdf(standard, zscore);
}

PredictionError prediction_error(double mu, double se, double t, int draws, std::uint64_t seed,
                                 std::uint64_t stream_index) {
    if (draws < 1) throw config_error("MAPE needs at least one draw");
    if (!(se > 0.0)) return {};
    const double truth = risk_from_log_rate(mu, t);
    Stream stream(seed, stream_tag::mape, stream_index);
    double abs_sum = 0.0;
    double sq_sum = 0.0;
    for (int k = 0; k < draws; ++k) {
        const double diff = risk_from_log_rate(mu + se * stream.normal(), t) - truth;
        abs_sum += std::abs(diff);
        sq_sum += diff * diff;
    }
    return {abs_sum / draws, std::sqrt(sq_sum / draws)};
}

double net_benefit_loss(double true_risk, double misclass_prob, double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0)) throw config_error("risk threshold must be in (0,1)");
    return misclass_prob * std::abs(true_risk - (1.0 - true_risk) * threshold / (1.0 - threshold));
}

PrecisionAggregates PrecisionReport::aggregate(std::span<const std::size_t> subset) const {
    const std::size_t m = subset.size();
    std::vector<double> width(m), mape(m), rmspe(m), risk(m);
    for (std::size_t k = 0; k < m; ++k) {
        const auto& ind = individuals.at(subset[k]);
        width[k] = ind.interval.width();
        mape[k] = ind.mape;
        rmspe[k] = ind.rmspe;
        risk[k] = ind.true_risk;
    }
    PrecisionAggregates out{summarize(width), summarize(mape), summarize(rmspe), summarize(risk), {}, {}};
    std::vector<double> buf(m);
    for (std::size_t z = 0; z < thresholds.size(); ++z) {
        for (std::size_t k = 0; k < m; ++k) buf[k] = individuals[subset[k]].misclass[z];
        out.misclass.push_back(summarize(buf));
        for (std::size_t k = 0; k < m; ++k) buf[k] = individuals[subset[k]].nb_loss[z];
        out.nb_loss.push_back(summarize(buf));
    }
    return out;
}

PrecisionReport precision_profile(const CoreModel& model, const PredictorTable& table, const UnitInformation& info,
                                  double n, const PrecisionOptions& options) {
    if (table.rows() == 0) throw data_error("precision profile needs at least one individual");
    if (!(model.horizon > 0.0)) throw config_error("horizon must be > 0");
    for (double z : options.thresholds)
        if (!(z > 0.0 && z < 1.0)) throw config_error("risk thresholds must be in (0,1)");

    PrecisionReport report;
    report.n = n;
    report.horizon = model.horizon;
    report.z = options.multiplier();
    report.thresholds = options.thresholds;

    const Eigen::VectorXd mu = linear_predictor(model, table);
    const double t = model.horizon;
    report.individuals.resize(table.rows());
    for (std::size_t i = 0; i < table.rows(); ++i) {
        auto& ind = report.individuals[i];
        ind.mu = mu(static_cast<Eigen::Index>(i));
        ind.se_mu = std::sqrt(prediction_variance(info, table.design_row(i), n));
        ind.true_risk = risk_from_log_rate(ind.mu, t);
        ind.interval = risk_interval(ind.mu, ind.se_mu, t, report.z);
        const auto err = prediction_error(ind.mu, ind.se_mu, t, options.mape_draws, options.seed, i);
        ind.mape = err.mape;
        ind.rmspe = err.rmspe;
        for (double z : options.thresholds) {
            const double p = misclassification_probability(ind.mu, ind.se_mu, t, z);
            ind.misclass.push_back(p);
            ind.nb_loss.push_back(net_benefit_loss(ind.true_risk, p, z));
        }
    }
    std::vector<std::size_t> all(table.rows());
    std::iota(all.begin(), all.end(), 0);
    report.overall = report.aggregate(all);
    return report;
}

PrecisionReport precision_profile(const CoreModel& model, const PredictorTable& table, const FollowUp& followup,
                                  double n, const PrecisionOptions& options) {
    return precision_profile(model, table, unit_information(model, table, followup), n, options);
}

}  // namespace survss
