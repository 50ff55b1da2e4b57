#include "survss/fisher.hpp"

#include "survss/error.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace survss {

namespace {

std::string describe_direction(const Eigen::VectorXd& v, const std::vector<std::string>& names) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(v.size()));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return std::abs(v(a)) > std::abs(v(b)); });
    std::ostringstream os;
    os.precision(3);
    bool first = true;
    for (auto k : order) {
        if (std::abs(v(k)) < 0.05) break;
        os << (first ? "" : " ") << (v(k) >= 0 ? (first ? "" : "+") : "-") << std::abs(v(k)) << "*"
           << (static_cast<std::size_t>(k) < names.size() ? names[static_cast<std::size_t>(k)] : "p" + std::to_string(k));
        first = false;
    }
    return os.str();
}

}  // namespace

double UnitInformation::quadratic_form(const Eigen::VectorXd& x) const {
    if (x.size() != inverse.rows())
        throw data_error("design row has " + std::to_string(x.size()) + " entries, information matrix is " +
                         std::to_string(inverse.rows()) + "x" + std::to_string(inverse.rows()));
    return std::max(0.0, x.dot(inverse * x));
}

UnitInformation make_unit_information(Eigen::MatrixXd matrix, std::vector<std::string> parameter_names) {
    if (matrix.rows() == 0 || matrix.rows() != matrix.cols()) throw numerical_error("information matrix must be square");
    if (!matrix.allFinite()) throw numerical_error("information matrix has non-finite entries");
    const Eigen::MatrixXd sym = 0.5 * (matrix + matrix.transpose());

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
    const Eigen::VectorXd& ev = eig.eigenvalues();
    const double largest = ev.maxCoeff();
    const double smallest = ev.minCoeff();
    const double rcond = largest > 0.0 ? smallest / largest : 0.0;
    if (!(smallest > 0.0) || rcond < kMinReciprocalCondition) {
        Eigen::Index k = 0;
        ev.minCoeff(&k);
        std::ostringstream os;
        os << "unit information matrix is singular or not positive definite (reciprocal condition " << rcond
           << "); near-null direction: " << describe_direction(eig.eigenvectors().col(k), parameter_names);
        throw numerical_error(os.str());
    }

    Eigen::LLT<Eigen::MatrixXd> llt(sym);
    if (llt.info() != Eigen::Success) throw numerical_error("Cholesky factorization of the information matrix failed");

    UnitInformation info;
    info.matrix = sym;
    info.inverse = llt.solve(Eigen::MatrixXd::Identity(sym.rows(), sym.cols()));
    info.inverse = 0.5 * (info.inverse + info.inverse.transpose()).eval();
    info.reciprocal_condition = rcond;
    info.parameter_names = std::move(parameter_names);
    return info;
}

UnitInformation unit_information(const CoreModel& model, const PredictorTable& table, const FollowUp& followup) {
    const std::size_t n = table.rows();
    if (followup.size() != n) throw data_error("follow-up and predictor table have different row counts");
    if (n == 0) throw data_error("cannot compute unit information on an empty cohort");
    const Eigen::VectorXd mu = linear_predictor(model, table);

    const Eigen::Index dim = static_cast<Eigen::Index>(table.cols()) + 1;
    Eigen::MatrixXd design(static_cast<Eigen::Index>(n), dim);
    design.col(0).setOnes();
    design.rightCols(dim - 1) = table.values;
    Eigen::VectorXd w(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i)
        w(static_cast<Eigen::Index>(i)) = std::exp(followup.log_time(i) + mu(static_cast<Eigen::Index>(i)));
    if (!w.allFinite()) throw numerical_error("information weights exp(y + mu) overflowed");

    const Eigen::MatrixXd accum = design.transpose() * w.asDiagonal() * design;
    std::vector<std::string> names{"intercept"};
    names.insert(names.end(), table.names.begin(), table.names.end());
    return make_unit_information(accum / static_cast<double>(n), std::move(names));
}

Eigen::MatrixXd parameter_covariance(const UnitInformation& info, double n) {
    if (!(n >= 1.0)) throw config_error("sample size must be >= 1");
    return info.inverse / n;
}

nlohmann::json to_json(const UnitInformation& info) {
    auto rows = [](const Eigen::MatrixXd& m) {
        nlohmann::json out = nlohmann::json::array();
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            nlohmann::json row = nlohmann::json::array();
            for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
            out.push_back(std::move(row));
        }
        return out;
    };
    return {
        {"parameters", info.parameter_names},
        {"unit_information", rows(info.matrix)},
        {"inverse", rows(info.inverse)},
        {"reciprocal_condition", info.reciprocal_condition},
    };
}

}  // namespace survss
