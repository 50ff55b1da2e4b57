#include "survss/model_compare.hpp"

#include "survss/core_model.hpp"
#include "survss/error.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace survss {

namespace {

void check_fit_inputs(const PredictorTable& table, const FollowUp& followup) {
    if (followup.size() != table.rows()) throw data_error("follow-up and predictor table have different row counts");
    if (table.rows() <= table.cols() + 1)
        throw data_error("model fitting needs more individuals than parameters");
    if (followup.events() == 0) throw data_error("model fitting needs at least one event");
}

Eigen::MatrixXd invert_negative_hessian(const Eigen::MatrixXd& hessian) {
    const Eigen::MatrixXd info = -0.5 * (hessian + hessian.transpose());
    Eigen::LLT<Eigen::MatrixXd> llt(info);
    if (llt.info() != Eigen::Success) throw numerical_error("observed information is not positive definite");
    Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(info.rows(), info.cols()));
    return 0.5 * (cov + cov.transpose());
}

// Damped Newton ascent with step halving.
template <class LogLik, class Score, class Hessian>
Eigen::VectorXd newton_maximize(Eigen::VectorXd x, LogLik&& loglik, Score&& score, Hessian&& hessian,
                                const FitOptions& options, int& iterations, bool& converged, const char* what) {
    double current = loglik(x);
    converged = false;
    for (iterations = 0; iterations < options.max_iterations; ++iterations) {
        const Eigen::VectorXd g = score(x);
        if (g.cwiseAbs().maxCoeff() < options.score_tolerance) {
            converged = true;
            return x;
        }
        Eigen::MatrixXd neg_h = -hessian(x);
        Eigen::LDLT<Eigen::MatrixXd> ldlt(neg_h);
        Eigen::VectorXd step;
        if (ldlt.info() == Eigen::Success && ldlt.isPositive() && (ldlt.vectorD().array() > 0).all()) {
            step = ldlt.solve(g);
        } else {
            // Levenberg shift until the curvature is positive definite.
            const double shift = std::abs(neg_h.diagonal().maxCoeff()) + 1.0;
            neg_h.diagonal().array() += shift;
            step = neg_h.ldlt().solve(g);
        }
        double scale = 1.0;
        bool improved = false;
        for (int half = 0; half < 60; ++half, scale *= 0.5) {
            const Eigen::VectorXd candidate = x + scale * step;
            const double value = loglik(candidate);
            if (std::isfinite(value) && value >= current - 1e-12 * std::abs(current)) {
                x = candidate;
                current = value;
                improved = true;
                break;
            }
        }
        if (!improved) break;
    }
    if (score(x).cwiseAbs().maxCoeff() < options.score_tolerance) {
        converged = true;
        return x;
    }
    std::ostringstream os;
    os << what << " fit did not converge after " << iterations << " iterations (max |score| "
       << score(x).cwiseAbs().maxCoeff() << ")";
    throw numerical_error(os.str());
}

double weibull_log_cumhaz(const Eigen::VectorXd& x, const Eigen::VectorXd& params, double t, std::optional<double> fixed_log_sigma) {
    const Eigen::Index p = x.size();
    const double log_sigma = fixed_log_sigma ? *fixed_log_sigma : params(p);
    return (std::log(t) - x.dot(params.head(p))) / std::exp(log_sigma);
}

}  // namespace

Eigen::VectorXd FittedSurvivalModel::parameters() const {
    if (family == Family::Exponential || shape_fixed) return coefficients;
    Eigen::VectorXd p(coefficients.size() + 1);
    p.head(coefficients.size()) = coefficients;
    p(coefficients.size()) = -std::log(*shape);
    return p;
}

Eigen::MatrixXd design_matrix(const PredictorTable& table) {
    Eigen::MatrixXd x(table.values.rows(), table.values.cols() + 1);
    x.col(0).setOnes();
    x.rightCols(table.values.cols()) = table.values;
    return x;
}

double exponential_loglik(const Eigen::MatrixXd& design, const FollowUp& followup, const Eigen::VectorXd& coef) {
    const Eigen::VectorXd mu = design * coef;
    double ll = 0.0;
    for (Eigen::Index i = 0; i < mu.size(); ++i)
        ll += followup.event(static_cast<std::size_t>(i)) * mu(i) - std::exp(mu(i)) * followup.time(static_cast<std::size_t>(i));
    return ll;
}

Eigen::VectorXd exponential_score(const Eigen::MatrixXd& design, const FollowUp& followup, const Eigen::VectorXd& coef) {
    const Eigen::VectorXd mu = design * coef;
    Eigen::VectorXd resid(mu.size());
    for (Eigen::Index i = 0; i < mu.size(); ++i)
        resid(i) = followup.event(static_cast<std::size_t>(i)) - std::exp(mu(i)) * followup.time(static_cast<std::size_t>(i));
    return design.transpose() * resid;
}

Eigen::MatrixXd exponential_hessian(const Eigen::MatrixXd& design, const FollowUp& followup,
                                    const Eigen::VectorXd& coef) {
    const Eigen::VectorXd mu = design * coef;
    Eigen::VectorXd w(mu.size());
    for (Eigen::Index i = 0; i < mu.size(); ++i)
        w(i) = std::exp(mu(i) + followup.log_time(static_cast<std::size_t>(i)));
    return -(design.transpose() * w.asDiagonal() * design);
}

// z_i = (y_i - x_i gamma) / sigma;  l_i = d_i (z_i - log sigma - y_i) - exp(z_i).
double weibull_loglik(const Eigen::MatrixXd& design, const FollowUp& followup, const Eigen::VectorXd& params) {
    const Eigen::Index p = design.cols();
    const double log_sigma = params(p);
    const double sigma = std::exp(log_sigma);
    const Eigen::VectorXd loc = design * params.head(p);
    double ll = 0.0;
    for (Eigen::Index i = 0; i < loc.size(); ++i) {
        const double y = followup.log_time(static_cast<std::size_t>(i));
        const double z = (y - loc(i)) / sigma;
        ll += followup.event(static_cast<std::size_t>(i)) * (z - log_sigma - y) - std::exp(z);
    }
    return ll;
}

Eigen::VectorXd weibull_score(const Eigen::MatrixXd& design, const FollowUp& followup, const Eigen::VectorXd& params) {
    const Eigen::Index p = design.cols();
    const double sigma = std::exp(params(p));
    const Eigen::VectorXd loc = design * params.head(p);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(p + 1);
    for (Eigen::Index i = 0; i < loc.size(); ++i) {
        const double d = followup.event(static_cast<std::size_t>(i));
        const double z = (followup.log_time(static_cast<std::size_t>(i)) - loc(i)) / sigma;
        const double r = d - std::exp(z);
        g.head(p) -= (r / sigma) * design.row(i).transpose();
        g(p) += -z * r - d;
    }
    return g;
}

Eigen::MatrixXd weibull_hessian(const Eigen::MatrixXd& design, const FollowUp& followup, const Eigen::VectorXd& params) {
    const Eigen::Index p = design.cols();
    const double sigma = std::exp(params(p));
    const Eigen::VectorXd loc = design * params.head(p);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(p + 1, p + 1);
    for (Eigen::Index i = 0; i < loc.size(); ++i) {
        const double d = followup.event(static_cast<std::size_t>(i));
        const double z = (followup.log_time(static_cast<std::size_t>(i)) - loc(i)) / sigma;
        const double ez = std::exp(z);
        const auto x = design.row(i).transpose();
        h.topLeftCorner(p, p).noalias() -= (ez / (sigma * sigma)) * x * x.transpose();
        h.col(p).head(p) += ((d - ez - z * ez) / sigma) * x;
        h(p, p) += z * (d - ez) - z * z * ez;
    }
    h.row(p).head(p) = h.col(p).head(p).transpose();
    return h;
}

FittedSurvivalModel fit_exponential(const PredictorTable& table, const FollowUp& followup, const FitOptions& options) {
    check_fit_inputs(table, followup);
    const Eigen::MatrixXd x = design_matrix(table);
    Eigen::VectorXd start = Eigen::VectorXd::Zero(x.cols());
    start(0) = std::log(static_cast<double>(followup.events()) / followup.person_time());

    FittedSurvivalModel fit;
    fit.family = Family::Exponential;
    fit.coefficients = newton_maximize(
        start, [&](const Eigen::VectorXd& b) { return exponential_loglik(x, followup, b); },
        [&](const Eigen::VectorXd& b) { return exponential_score(x, followup, b); },
        [&](const Eigen::VectorXd& b) { return exponential_hessian(x, followup, b); }, options, fit.iterations,
        fit.converged, "exponential");
    fit.loglik = exponential_loglik(x, followup, fit.coefficients);
    fit.covariance = invert_negative_hessian(exponential_hessian(x, followup, fit.coefficients));
    return fit;
}

FittedSurvivalModel fit_weibull(const PredictorTable& table, const FollowUp& followup, const FitOptions& options) {
    check_fit_inputs(table, followup);
    const Eigen::MatrixXd x = design_matrix(table);
    const Eigen::Index p = x.cols();

    FitOptions exp_options = options;
    exp_options.fixed_shape.reset();
    const FittedSurvivalModel exp_fit = fit_exponential(table, followup, exp_options);

    FittedSurvivalModel fit;
    fit.family = Family::Weibull;
    if (options.fixed_shape) {
        if (!(*options.fixed_shape > 0.0)) throw config_error("Weibull shape must be > 0");
        const double log_sigma = -std::log(*options.fixed_shape);
        auto full = [&](const Eigen::VectorXd& gamma) {
            Eigen::VectorXd params(p + 1);
            params.head(p) = gamma;
            params(p) = log_sigma;
            return params;
        };
        fit.coefficients = newton_maximize(
            Eigen::VectorXd(-std::exp(log_sigma) * exp_fit.coefficients),
            [&](const Eigen::VectorXd& g) { return weibull_loglik(x, followup, full(g)); },
            [&](const Eigen::VectorXd& g) { return weibull_score(x, followup, full(g)).head(p).eval(); },
            [&](const Eigen::VectorXd& g) { return weibull_hessian(x, followup, full(g)).topLeftCorner(p, p).eval(); },
            options, fit.iterations, fit.converged, "Weibull");
        fit.shape = *options.fixed_shape;
        fit.shape_fixed = true;
        fit.loglik = weibull_loglik(x, followup, full(fit.coefficients));
        fit.covariance =
            invert_negative_hessian(weibull_hessian(x, followup, full(fit.coefficients)).topLeftCorner(p, p));
        return fit;
    }

    Eigen::VectorXd start(p + 1);
    start.head(p) = -exp_fit.coefficients;
    start(p) = 0.0;
    const Eigen::VectorXd params = newton_maximize(
        start, [&](const Eigen::VectorXd& q) { return weibull_loglik(x, followup, q); },
        [&](const Eigen::VectorXd& q) { return weibull_score(x, followup, q); },
        [&](const Eigen::VectorXd& q) { return weibull_hessian(x, followup, q); }, options, fit.iterations,
        fit.converged, "Weibull");
    fit.coefficients = params.head(p);
    fit.shape = std::exp(-params(p));
    fit.loglik = weibull_loglik(x, followup, params);
    fit.covariance = invert_negative_hessian(weibull_hessian(x, followup, params));
    return fit;
}

double fitted_risk(const FittedSurvivalModel& fit, const Eigen::VectorXd& x, double t) {
    if (fit.family == Family::Exponential) return risk_from_log_rate(x.dot(fit.coefficients), t);
    const double g = weibull_log_cumhaz(x, fit.coefficients, t, -std::log(*fit.shape));
    return -std::expm1(-std::exp(g));
}

ComparisonReport compare_intervals(const FittedSurvivalModel& exponential, const FittedSurvivalModel& weibull,
                                   const PredictorTable& table, double t, double z, IntervalScale weibull_scale) {
    if (exponential.family != Family::Exponential || weibull.family != Family::Weibull)
        throw config_error("compare_intervals expects an exponential and a Weibull fit");
    if (!exponential.converged || !weibull.converged) throw numerical_error("both fits must have converged");
    if (!(t > 0.0)) throw config_error("horizon must be > 0");

    ComparisonReport report;
    const Eigen::VectorXd theta = weibull.parameters();
    const std::optional<double> fixed_log_sigma =
        weibull.shape_fixed ? std::optional<double>(-std::log(*weibull.shape)) : std::nullopt;
    const Eigen::Index k = theta.size();

    std::vector<double> exp_w, wei_w, diff;
    for (std::size_t i = 0; i < table.rows(); ++i) {
        const Eigen::VectorXd x = table.design_row(i);
        ComparisonRow row;

        const double mu = x.dot(exponential.coefficients);
        row.exponential.risk = risk_from_log_rate(mu, t);
        row.exponential.se = std::sqrt(std::max(0.0, x.dot(exponential.covariance * x)));
        row.exponential.interval = risk_interval(mu, row.exponential.se, t, z);

        // log cumulative hazard is the natural scale; risk is a monotone map of it.
        auto log_cumhaz = [&](const Eigen::VectorXd& q) { return weibull_log_cumhaz(x, q, t, fixed_log_sigma); };
        auto risk_of = [&](const Eigen::VectorXd& q) { return -std::expm1(-std::exp(log_cumhaz(q))); };
        Eigen::VectorXd grad(k);
        for (Eigen::Index j = 0; j < k; ++j) {
            const double h = 1e-6 * std::max(1.0, std::abs(theta(j)));
            Eigen::VectorXd up = theta, down = theta;
            up(j) += h;
            down(j) -= h;
            grad(j) = weibull_scale == IntervalScale::Risk ? (risk_of(up) - risk_of(down)) / (2.0 * h)
                                                           : (log_cumhaz(up) - log_cumhaz(down)) / (2.0 * h);
        }
        const double se = std::sqrt(std::max(0.0, grad.dot(weibull.covariance * grad)));
        auto& w = row.weibull;
        w.risk = risk_of(theta);
        w.se = se;
        if (weibull_scale == IntervalScale::Risk) {
            const double lo = w.risk - z * se;
            const double hi = w.risk + z * se;
            w.clamped = lo < 0.0 || hi > 1.0;
            w.interval = {std::clamp(lo, 0.0, 1.0), std::clamp(hi, 0.0, 1.0)};
            w.unreliable = se > kUnreliableRiskSe || w.clamped;
        } else {
            const double g = log_cumhaz(theta);
            w.interval = {-std::expm1(-std::exp(g - z * se)), -std::expm1(-std::exp(g + z * se))};
            const double risk_se = se * std::exp(g) * std::exp(-std::exp(g));
            w.unreliable = risk_se > kUnreliableRiskSe;
        }
        row.width_difference = w.interval.width() - row.exponential.interval.width();
        if (w.unreliable) ++report.flagged;
        exp_w.push_back(row.exponential.interval.width());
        wei_w.push_back(w.interval.width());
        diff.push_back(row.width_difference);
        report.rows.push_back(row);
    }
    report.exponential_width = summarize(exp_w);
    report.weibull_width = summarize(wei_w);
    report.width_difference = summarize(diff);
    report.likelihood_ratio = 2.0 * (weibull.loglik - exponential.loglik);
    return report;
}

}  // namespace survss
