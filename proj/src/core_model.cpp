#include "survss/core_model.hpp"

#include "survss/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace survss {

Eigen::VectorXd CoreModel::coefficients() const {
    Eigen::VectorXd c(beta.size() + 1);
    c(0) = alpha;
    c.tail(beta.size()) = delta * beta;
    return c;
}

double risk_from_log_rate(double mu, double t) { return -std::expm1(-std::exp(mu) * t); }

double log_rate_from_risk(double risk, double t) { return std::log(-std::log1p(-risk) / t); }

Eigen::VectorXd linear_predictor(const CoreModel& model, const PredictorTable& table) {
    if (static_cast<std::size_t>(model.beta.size()) != table.cols())
        throw data_error("core model has " + std::to_string(model.beta.size()) + " weights but the table has " +
                         std::to_string(table.cols()) + " predictor columns");
    Eigen::VectorXd mu = (table.values * model.beta).array() * model.delta + model.alpha;
    if (!mu.allFinite()) throw numerical_error("core model produced a non-finite linear predictor");
    return mu;
}

Eigen::VectorXd true_risk(const CoreModel& model, const PredictorTable& table, double t) {
    if (!(t > 0.0)) throw data_error("risk horizon must be > 0");
    Eigen::VectorXd mu = linear_predictor(model, table);
    return mu.unaryExpr([t](double m) { return risk_from_log_rate(m, t); });
}

namespace {

// Fenwick tree of counts over mu ranks.
class RankCounter {
public:
    explicit RankCounter(std::size_t n) : tree_(n + 1, 0) {}
    void add(std::size_t rank) {
        for (std::size_t i = rank + 1; i < tree_.size(); i += i & (~i + 1)) ++tree_[i];
    }
    // Number of inserted items with rank < r.
    std::uint64_t below(std::size_t r) const {
        std::uint64_t s = 0;
        for (std::size_t i = r; i > 0; i -= i & (~i + 1)) s += tree_[i];
        return s;
    }

private:
    std::vector<std::uint64_t> tree_;
};

}  // namespace

double harrell_c(std::span<const double> mu, const FollowUp& followup) {
    const std::size_t n = mu.size();
    if (n != followup.size()) throw data_error("harrell_c: mu and follow-up lengths differ");

    // Dense ranks of mu so that equal values share a rank.
    std::vector<std::size_t> by_mu(n);
    std::iota(by_mu.begin(), by_mu.end(), 0);
    std::sort(by_mu.begin(), by_mu.end(), [&](std::size_t a, std::size_t b) { return mu[a] < mu[b]; });
    std::vector<std::size_t> rank(n);
    std::size_t distinct = 0;
    for (std::size_t k = 0; k < n; ++k) {
        if (k > 0 && mu[by_mu[k]] != mu[by_mu[k - 1]]) ++distinct;
        rank[by_mu[k]] = distinct;
    }

    std::vector<std::size_t> by_time(n);
    std::iota(by_time.begin(), by_time.end(), 0);
    const auto& time = followup.time();
    std::sort(by_time.begin(), by_time.end(), [&](std::size_t a, std::size_t b) { return time[a] > time[b]; });

    // Sweep from the longest follow-up down. When an event at time tau is
    // scored, the tree holds everyone with t > tau plus the censored at tau.
    RankCounter tree(distinct + 1);
    std::uint64_t inserted = 0;
    double concordant = 0.0;
    double comparable = 0.0;
    std::size_t k = 0;
    while (k < n) {
        std::size_t end = k;
        while (end < n && time[by_time[end]] == time[by_time[k]]) ++end;
        for (std::size_t m = k; m < end; ++m) {
            const std::size_t i = by_time[m];
            if (followup.event(i) == 0) {
                tree.add(rank[i]);
                ++inserted;
            }
        }
        for (std::size_t m = k; m < end; ++m) {
            const std::size_t i = by_time[m];
            if (followup.event(i) != 1) continue;
            const std::uint64_t lower = tree.below(rank[i]);
            const std::uint64_t tied = tree.below(rank[i] + 1) - lower;
            concordant += static_cast<double>(lower) + 0.5 * static_cast<double>(tied);
            comparable += static_cast<double>(inserted);
        }
        for (std::size_t m = k; m < end; ++m) {
            const std::size_t i = by_time[m];
            if (followup.event(i) == 1) {
                tree.add(rank[i]);
                ++inserted;
            }
        }
        k = end;
    }
    if (comparable == 0.0) throw numerical_error("Harrell's C is undefined: no comparable pairs");
    return concordant / comparable;
}

Eigen::VectorXd standardized_equal_weights(const PredictorTable& table, std::span<const int> signs) {
    if (!signs.empty() && signs.size() != table.cols())
        throw config_error("equal-weight signs: expected " + std::to_string(table.cols()) + " entries, got " +
                           std::to_string(signs.size()));
    Eigen::VectorXd beta(static_cast<Eigen::Index>(signs.size()));
    for (std::size_t j = 0; j < signs.size(); ++j) {
        if (signs[j] != 1 && signs[j] != -1) throw config_error("equal-weight signs must be +1 or -1");
        beta(static_cast<Eigen::Index>(j)) = signs[j];
    }
    return beta;
}

}  // namespace survss
