#include "survss/calibration.hpp"

#include "survss/error.hpp"
#include "survss/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace survss {

namespace {

double mean_risk(const Eigen::VectorXd& weighted_sum, double alpha, double delta, double horizon) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < weighted_sum.size(); ++i)
        total += risk_from_log_rate(alpha + delta * weighted_sum(i), horizon);
    return total / static_cast<double>(weighted_sum.size());
}

// Fixed draws shared by every trial (alpha, delta): event times scale as
// E_i / exp(mu_i) with E_i ~ Exp(1), censoring times do not depend on the model.
struct Realization {
    std::vector<std::size_t> rows;
    std::vector<double> unit_exponential;
    std::vector<double> censor;
};

Realization make_realization(std::size_t n, const CalibrationOptions& options) {
    Realization r;
    const std::size_t m = n >= options.full_cohort_threshold ? n : std::max(n, options.simulation_rows);
    r.rows.resize(m);
    for (std::size_t i = 0; i < m; ++i) r.rows[i] = i % n;
    r.unit_exponential.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        Stream s(options.seed, stream_tag::calibration, i);
        r.unit_exponential[i] = -std::log(s.uniform());
    }
    r.censor = options.censoring_free_c ? std::vector<double>(m, std::numeric_limits<double>::infinity())
                                        : censoring_times(options.censoring, m, options.seed);
    return r;
}

double realization_c(const Realization& r, const Eigen::VectorXd& weighted_sum, double alpha, double delta) {
    const std::size_t m = r.rows.size();
    std::vector<double> mu(m);
    std::vector<double> time(m);
    std::vector<int> event(m);
    for (std::size_t i = 0; i < m; ++i) {
        mu[i] = alpha + delta * weighted_sum(static_cast<Eigen::Index>(r.rows[i]));
        const double t = r.unit_exponential[i] / std::exp(mu[i]);
        if (!(t > 0.0) || !std::isfinite(t)) throw numerical_error("calibration: simulated time out of range");
        event[i] = t <= r.censor[i] ? 1 : 0;
        time[i] = std::min(t, r.censor[i]);
    }
    return harrell_c(mu, FollowUp(std::move(time), std::move(event)));
}

}  // namespace

double solve_intercept(const Eigen::VectorXd& weighted_sum, double delta, double horizon, double overall_risk) {
    if (!(overall_risk > 0.0 && overall_risk < 1.0)) throw config_error("overall risk must be in (0,1)");
    if (!(horizon > 0.0)) throw config_error("horizon must be > 0");
    const double start = log_rate_from_risk(overall_risk, horizon) - delta * weighted_sum.mean();
    // Mean risk is strictly increasing in alpha; widen the bracket until it straddles the target.
    double lo = start - 1.0;
    double hi = start + 1.0;
    for (int k = 0; mean_risk(weighted_sum, lo, delta, horizon) > overall_risk; ++k) {
        if (k > 60) throw numerical_error("cannot bracket intercept for target risk");
        lo -= std::ldexp(1.0, k);
    }
    for (int k = 0; mean_risk(weighted_sum, hi, delta, horizon) < overall_risk; ++k) {
        if (k > 60) throw numerical_error("cannot bracket intercept for target risk");
        hi += std::ldexp(1.0, k);
    }
    for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, std::abs(lo)); ++it) {
        const double mid = 0.5 * (lo + hi);
        (mean_risk(weighted_sum, mid, delta, horizon) < overall_risk ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double simulated_c_index(const PredictorTable& table, const CoreModel& model, const CalibrationOptions& options) {
    const Eigen::VectorXd weighted_sum = table.values * model.beta;
    const Realization r = make_realization(table.rows(), options);
    return realization_c(r, weighted_sum, model.alpha, model.delta);
}

CalibrationReport calibrate(const PredictorTable& table, const Eigen::VectorXd& beta, double horizon,
                            const CalibrationTarget& target, const CalibrationOptions& options) {
    if (table.rows() < 2) throw data_error("calibration needs at least 2 rows");
    if (static_cast<std::size_t>(beta.size()) != table.cols())
        throw config_error("calibration: weight vector does not match the predictor columns");
    if (!(target.c_index >= 0.5 && target.c_index < 1.0)) throw config_error("target C-index must be in [0.5, 1)");
    if (!(target.tolerance_risk > 0.0 && target.tolerance_c > 0.0))
        throw config_error("calibration tolerances must be > 0");
    validate(options.censoring);

    const Eigen::VectorXd weighted_sum = table.values * beta;
    CalibrationReport report;
    report.model.beta = beta;
    report.model.horizon = horizon;

    const bool constant_score = (weighted_sum.array() == weighted_sum(0)).all();
    if (target.c_index - 0.5 <= target.tolerance_c) {
        // Intercept-only calibration: all ties give C = 0.5 exactly.
        report.model.delta = 0.0;
        report.model.alpha = log_rate_from_risk(target.overall_risk, horizon);
        report.overall_risk = mean_risk(weighted_sum, report.model.alpha, 0.0, horizon);
        report.c_index = 0.5;
        report.simulation_rows = 0;
        return report;
    }
    if (constant_score)
        throw infeasible_error("target C-index " + std::to_string(target.c_index) +
                               " is unreachable: the weighted predictor score is constant across the cohort");

    const Realization r = make_realization(table.rows(), options);
    report.simulation_rows = r.rows.size();

    int evaluations = 0;
    double best_gap = std::numeric_limits<double>::infinity();
    CoreModel best = report.model;
    double best_c = 0.5;
    auto evaluate = [&](double delta) {
        ++evaluations;
        const double alpha = solve_intercept(weighted_sum, delta, horizon, target.overall_risk);
        const double c = realization_c(r, weighted_sum, alpha, delta);
        if (std::abs(c - target.c_index) < best_gap) {
            best_gap = std::abs(c - target.c_index);
            best.alpha = alpha;
            best.delta = delta;
            best_c = c;
        }
        return c;
    };
    auto finish = [&] {
        report.model = best;
        report.c_index = best_c;
        report.overall_risk = mean_risk(weighted_sum, best.alpha, best.delta, horizon);
        report.iterations = evaluations;
        return report;
    };

    // Bracket delta: C(0) = 0.5 and C grows with delta.
    const double spread = std::sqrt((weighted_sum.array() - weighted_sum.mean()).square().mean());
    double lo = 0.0;
    double hi = 0.5 / spread;
    for (;;) {
        double c = 0.0;
        try {
            c = evaluate(hi);
        } catch (const Error&) {
            throw infeasible_error("target C-index " + std::to_string(target.c_index) +
                                   " is unreachable before the log hazard leaves floating-point range");
        }
        if (std::abs(c - target.c_index) <= target.tolerance_c) return finish();
        if (c > target.c_index) break;
        lo = hi;
        hi *= 2.0;
        if (evaluations >= target.max_iterations || hi * spread > 700.0)
            throw infeasible_error("target C-index " + std::to_string(target.c_index) +
                                   " is unreachable with these weights (largest simulated C " +
                                   std::to_string(best_c) + ")");
    }

    while (evaluations < target.max_iterations) {
        const double mid = 0.5 * (lo + hi);
        const double c = evaluate(mid);
        if (std::abs(c - target.c_index) <= target.tolerance_c) return finish();
        (c < target.c_index ? lo : hi) = mid;
        if (hi - lo < 1e-14 * hi) break;
    }
    std::ostringstream os;
    os << "calibration did not converge after " << evaluations << " evaluations; best iterate alpha=" << best.alpha
       << " delta=" << best.delta << " C=" << best_c;
    throw numerical_error(os.str());
}

}  // namespace survss
