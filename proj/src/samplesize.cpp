#include "survss/samplesize.hpp"

#include "survss/error.hpp"
#include "survss/precision.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace survss {

void PrecisionTargets::validate() const {
    if (bins.empty()) throw config_error("precision targets need at least one bin");
    for (std::size_t k = 0; k < bins.size(); ++k) {
        const auto& b = bins[k];
        if (!(b.risk > 0.0 && b.risk < 1.0)) throw config_error("target risk levels must be in (0,1)");
        if (!(b.max_width > 0.0 && b.max_width < 1.0)) throw config_error("target widths must be in (0,1)");
        if (k > 0 && !(b.risk > bins[k - 1].risk)) throw config_error("target risk levels must be strictly increasing");
    }
    if (scope.min_true_risk && scope.max_true_risk && *scope.min_true_risk > *scope.max_true_risk)
        throw config_error("precision scope: min_true_risk exceeds max_true_risk");
}

double variance_target_from_width(double risk, double width, double t, double z) {
    if (!(risk > 0.0 && risk < 1.0)) throw config_error("risk must be in (0,1)");
    if (!(width > 0.0)) throw config_error("target width must be > 0");
    if (!(t > 0.0) || !(z > 0.0)) throw config_error("horizon and multiplier must be > 0");
    if (width >= 1.0) {
        std::ostringstream os;
        os << "interval width " << width << " is not attainable on the risk scale";
        throw infeasible_error(os.str());
    }
    const double mu = log_rate_from_risk(risk, t);
    auto width_at = [&](double se) { return risk_interval(mu, se, t, z).width(); };

    double hi = 1.0;
    while (width_at(hi) < width) {
        const double grown = width_at(2.0 * hi);
        if (grown <= width_at(hi) || hi > 1e3) {
            std::ostringstream os;
            os << "interval width " << width << " is not attainable at risk " << risk << " (largest attainable "
               << grown << ")";
            throw infeasible_error(os.str());
        }
        hi *= 2.0;
    }
    double lo = 0.0;
    for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (width_at(mid) < width ? lo : hi) = mid;
    }
    const double se = 0.5 * (lo + hi);
    return se * se;
}

std::uint64_t required_n(const UnitInformation& info, const Eigen::VectorXd& x_new, double target_variance) {
    if (!(target_variance > 0.0)) throw config_error("target variance must be > 0");
    const double n = std::ceil(info.quadratic_form(x_new) / target_variance);
    if (!(n < 9.0e18)) throw numerical_error("required sample size overflows");
    return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(n));
}

SampleSizeResult cohort_required_n(const CoreModel& model, const PredictorTable& table, const UnitInformation& info,
                                   const PrecisionTargets& targets, double z) {
    targets.validate();
    const auto& scope = targets.scope;
    const std::vector<std::string>* labels = nullptr;
    if (scope.group) {
        const auto it = table.group_labels.find(scope.group->first);
        if (it == table.group_labels.end())
            throw config_error("precision scope: unknown group column '" + scope.group->first + "'");
        labels = &it->second;
    }

    const Eigen::VectorXd risk = true_risk(model, table, model.horizon);
    SampleSizeResult result;
    for (const auto& b : targets.bins) result.bins.push_back(BinRequirement{b, 0, 0, std::nullopt});

    for (std::size_t i = 0; i < table.rows(); ++i) {
        const double r = risk(static_cast<Eigen::Index>(i));
        if (scope.min_true_risk && r < *scope.min_true_risk) continue;
        if (scope.max_true_risk && r > *scope.max_true_risk) continue;
        if (labels && (*labels)[i] != scope.group->second) continue;

        std::size_t bin = 0;
        for (std::size_t k = 1; k < targets.bins.size(); ++k)
            if (std::abs(targets.bins[k].risk - r) < std::abs(targets.bins[bin].risk - r)) bin = k;

        IndividualRequirement req;
        req.row = i;
        req.true_risk = r;
        req.bin = bin;
        req.target_variance = variance_target_from_width(r, targets.bins[bin].max_width, model.horizon, z);
        req.n = required_n(info, table.design_row(i), req.target_variance);
        auto& b = result.bins[bin];
        ++b.individuals;
        if (req.n > b.max_n) {
            b.max_n = req.n;
            b.binding_row = i;
        }
        result.n_star = std::max(result.n_star, req.n);
        result.individuals.push_back(req);
    }
    if (result.individuals.empty()) throw config_error("precision scope selects no individuals");

    std::vector<std::size_t> order(result.individuals.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](auto a, auto b) { return result.individuals[a].n > result.individuals[b].n; });
    for (std::size_t k = 0; k < std::min<std::size_t>(10, order.size()); ++k)
        result.binding_rows.push_back(result.individuals[order[k]].row);
    return result;
}

}  // namespace survss
