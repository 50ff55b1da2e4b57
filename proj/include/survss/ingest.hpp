#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace survss {

enum class PredictorKind { Continuous, Binary, Indicator };

std::string_view to_string(PredictorKind kind);

struct Standardization {
    double mean = 0.0;
    double sd = 1.0;
};

/// Per-individual predictor values for the P core predictors, with
/// categorical variables already expanded to indicator columns.
struct PredictorTable {
    std::vector<std::string> names;
    std::vector<PredictorKind> kinds;
    Eigen::MatrixXd values;  // rows = individuals, cols = predictors
    std::map<std::string, std::vector<std::string>> group_labels;
    std::vector<std::optional<Standardization>> standardization;

    std::size_t rows() const { return static_cast<std::size_t>(values.rows()); }
    std::size_t cols() const { return static_cast<std::size_t>(values.cols()); }

    // Throws a data error when the column is absent.
    std::size_t column_index(std::string_view name) const;

    // (1, x_1i, ..., x_Pi)
    Eigen::VectorXd design_row(std::size_t i) const;

    // Rows in `index` order; group labels follow the rows.
    PredictorTable select_rows(const std::vector<std::size_t>& index) const;

    // Checks the column-level invariants (indicator coding, SD > 0, sizes).
    void validate() const;
};

/// Observed follow-up: time is min(event, censoring); log time is derived.
class FollowUp {
public:
    FollowUp() = default;
    FollowUp(std::vector<double> time, std::vector<int> event);

    std::size_t size() const { return time_.size(); }
    const std::vector<double>& time() const { return time_; }
    const std::vector<int>& event() const { return event_; }
    double time(std::size_t i) const { return time_[i]; }
    int event(std::size_t i) const { return event_[i]; }
    double log_time(std::size_t i) const;
    std::vector<double> log_time() const;

    std::size_t events() const;
    double person_time() const;

    FollowUp select_rows(const std::vector<std::size_t>& index) const;

private:
    std::vector<double> time_;
    std::vector<int> event_;
};

enum class ColumnKind { Continuous, Binary, Categorical };

struct PredictorColumn {
    std::string name;
    ColumnKind kind = ColumnKind::Continuous;
    std::optional<std::string> reference_level;
    // Declared level order for categorical columns; empty means sorted unique values.
    std::vector<std::string> levels;
};

struct CohortSchema {
    std::vector<PredictorColumn> predictors;
    std::optional<std::string> time_column;
    std::optional<std::string> event_column;
    double time_scale_divisor = 1.0;
    std::vector<std::string> group_columns;
};

struct Cohort {
    PredictorTable table;
    std::optional<FollowUp> followup;
    std::vector<std::string> provenance;
};

Cohort load_cohort(const std::filesystem::path& path, const CohortSchema& schema);
Cohort read_cohort(std::istream& in, const CohortSchema& schema, std::string_view source = "<stream>");

/// Replaces each named continuous column by (x - mean) / SD using the n-1 SD.
PredictorTable standardize(const PredictorTable& table, const std::vector<std::string>& columns);

/// Original scale of a column, inverting any recorded standardization.
Eigen::VectorXd unstandardized_column(const PredictorTable& table, std::string_view name);

/// Writes the cohort in the CSV layout that `read_cohort` accepts with
/// `export_schema(table, ...)`: one column per predictor, then time/event and
/// group columns when present.
void write_cohort_csv(std::ostream& out, const PredictorTable& table, const FollowUp* followup);
CohortSchema export_schema(const PredictorTable& table, bool with_followup);

}  // namespace survss
