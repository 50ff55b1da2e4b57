#include "survss/ingest.hpp"

#include "survss/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

namespace survss {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cell.push_back('"');
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cell.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cell));
            cell.clear();
        } else if (c != '\r') {
            cell.push_back(c);
        }
    }
    out.push_back(std::move(cell));
    return out;
}

std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t");
    return s.substr(first, last - first + 1);
}

bool is_missing(const std::string& cell) {
    return cell.empty() || cell == "NA" || cell == "NaN" || cell == ".";
}

std::optional<double> parse_number(const std::string& cell) {
    double v = 0.0;
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    if (!cell.empty() && *begin == '+') ++begin;
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{} || ptr != end || !std::isfinite(v)) return std::nullopt;
    return v;
}

std::string format_rows(const std::vector<std::size_t>& rows) {
    std::ostringstream os;
    const std::size_t shown = std::min<std::size_t>(rows.size(), 20);
    for (std::size_t k = 0; k < shown; ++k) os << (k ? ", " : "") << rows[k];
    if (rows.size() > shown) os << ", ... (" << rows.size() << " rows)";
    return os.str();
}

std::string level_token(const std::string& level) {
    std::string out;
    for (char c : level) out.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
    return out;
}

struct Problem {
    std::string what;
    std::vector<std::size_t> rows;
};

}  // namespace

std::string_view to_string(PredictorKind kind) {
    switch (kind) {
        case PredictorKind::Continuous: return "continuous";
        case PredictorKind::Binary: return "binary";
        case PredictorKind::Indicator: return "indicator";
    }
    return "continuous";
}

std::size_t PredictorTable::column_index(std::string_view name) const {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw data_error("unknown predictor column '" + std::string(name) + "'");
    return static_cast<std::size_t>(it - names.begin());
}

Eigen::VectorXd PredictorTable::design_row(std::size_t i) const {
    Eigen::VectorXd x(values.cols() + 1);
    x(0) = 1.0;
    x.tail(values.cols()) = values.row(static_cast<Eigen::Index>(i)).transpose();
    return x;
}

PredictorTable PredictorTable::select_rows(const std::vector<std::size_t>& index) const {
    PredictorTable out;
    out.names = names;
    out.kinds = kinds;
    out.standardization = standardization;
    out.values.resize(static_cast<Eigen::Index>(index.size()), values.cols());
    for (std::size_t r = 0; r < index.size(); ++r)
        out.values.row(static_cast<Eigen::Index>(r)) = values.row(static_cast<Eigen::Index>(index[r]));
    for (const auto& [group, labels] : group_labels) {
        auto& dst = out.group_labels[group];
        dst.reserve(index.size());
        for (std::size_t r : index) dst.push_back(labels[r]);
    }
    return out;
}

void PredictorTable::validate() const {
    const auto p = static_cast<std::size_t>(values.cols());
    if (names.size() != p || kinds.size() != p)
        throw data_error("predictor table: names/kinds do not match the number of columns");
    if (!standardization.empty() && standardization.size() != p)
        throw data_error("predictor table: standardization metadata has the wrong length");
    if (!values.allFinite()) throw data_error("predictor table contains non-finite values");
    for (std::size_t j = 0; j < p; ++j) {
        if (kinds[j] != PredictorKind::Continuous) {
            const auto col = values.col(static_cast<Eigen::Index>(j));
            if ((col.array() != 0.0 && col.array() != 1.0).any())
                throw data_error("column '" + names[j] + "' must contain only 0/1");
        }
        if (!standardization.empty() && standardization[j] && !(standardization[j]->sd > 0.0))
            throw data_error("column '" + names[j] + "' has non-positive standardization SD");
    }
    for (const auto& [group, labels] : group_labels)
        if (labels.size() != rows())
            throw data_error("group column '" + group + "' has the wrong number of labels");
}

FollowUp::FollowUp(std::vector<double> time, std::vector<int> event)
    : time_(std::move(time)), event_(std::move(event)) {
    if (time_.size() != event_.size()) throw data_error("follow-up: time and event lengths differ");
    std::vector<std::size_t> bad_time;
    std::vector<std::size_t> bad_event;
    for (std::size_t i = 0; i < time_.size(); ++i) {
        if (!(time_[i] > 0.0) || !std::isfinite(time_[i])) bad_time.push_back(i + 1);
        if (event_[i] != 0 && event_[i] != 1) bad_event.push_back(i + 1);
    }
    if (!bad_time.empty()) throw data_error("follow-up time must be > 0 (rows " + format_rows(bad_time) + ")");
    if (!bad_event.empty()) throw data_error("event must be 0 or 1 (rows " + format_rows(bad_event) + ")");
}

double FollowUp::log_time(std::size_t i) const { return std::log(time_[i]); }

std::vector<double> FollowUp::log_time() const {
    std::vector<double> out(time_.size());
    std::transform(time_.begin(), time_.end(), out.begin(), [](double t) { return std::log(t); });
    return out;
}

std::size_t FollowUp::events() const {
    return static_cast<std::size_t>(std::count(event_.begin(), event_.end(), 1));
}

double FollowUp::person_time() const { return std::accumulate(time_.begin(), time_.end(), 0.0); }

FollowUp FollowUp::select_rows(const std::vector<std::size_t>& index) const {
    std::vector<double> t;
    std::vector<int> e;
    t.reserve(index.size());
    e.reserve(index.size());
    for (std::size_t r : index) {
        t.push_back(time_[r]);
        e.push_back(event_[r]);
    }
    return FollowUp(std::move(t), std::move(e));
}

Cohort load_cohort(const std::filesystem::path& path, const CohortSchema& schema) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open cohort file '" + path.string() + "'");
    return read_cohort(in, schema, path.string());
}

Cohort read_cohort(std::istream& in, const CohortSchema& schema, std::string_view source) {
    if (schema.predictors.empty() && schema.group_columns.empty())
        throw config_error("schema lists no predictor columns");
    if (!(schema.time_scale_divisor > 0.0)) throw config_error("time_scale_divisor must be > 0");
    if (schema.time_column.has_value() != schema.event_column.has_value())
        throw config_error("schema must name both time_column and event_column, or neither");

    std::string line;
    if (!std::getline(in, line)) throw data_error("cohort file is empty: " + std::string(source));
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    std::vector<std::string> header = split_csv_line(line);
    for (auto& h : header) h = trim(h);

    auto find_column = [&](const std::string& name) -> std::size_t {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw config_error("schema error: column '" + name + "' not found in header");
        return static_cast<std::size_t>(it - header.begin());
    };

    std::vector<std::size_t> pred_idx;
    for (const auto& p : schema.predictors) pred_idx.push_back(find_column(p.name));
    std::optional<std::size_t> time_idx;
    std::optional<std::size_t> event_idx;
    if (schema.time_column) time_idx = find_column(*schema.time_column);
    if (schema.event_column) event_idx = find_column(*schema.event_column);
    std::vector<std::size_t> group_idx;
    for (const auto& g : schema.group_columns) group_idx.push_back(find_column(g));

    std::vector<std::vector<std::string>> cells;
    std::map<std::string, std::vector<std::size_t>> problems;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto row = split_csv_line(line);
        for (auto& c : row) c = trim(c);
        const std::size_t data_row = cells.size() + 1;
        if (row.size() != header.size()) {
            problems["wrong number of cells"].push_back(data_row);
            row.resize(header.size());
        }
        cells.push_back(std::move(row));
    }
    const std::size_t n = cells.size();
    if (n == 0) throw data_error("cohort file has no data rows: " + std::string(source));

    Cohort cohort;
    PredictorTable& table = cohort.table;
    std::vector<Eigen::VectorXd> columns;

    for (std::size_t k = 0; k < schema.predictors.size(); ++k) {
        const auto& spec = schema.predictors[k];
        const std::size_t c = pred_idx[k];
        if (spec.kind == ColumnKind::Categorical) {
            std::vector<std::string> levels = spec.levels;
            if (levels.empty()) {
                std::set<std::string> seen;
                for (const auto& row : cells)
                    if (!is_missing(row[c])) seen.insert(row[c]);
                levels.assign(seen.begin(), seen.end());
            }
            std::string reference = spec.reference_level.value_or(levels.empty() ? std::string{} : levels.front());
            if (std::find(levels.begin(), levels.end(), reference) == levels.end())
                throw config_error("reference level '" + reference + "' is not a level of '" + spec.name + "'");
            std::vector<std::string> non_ref;
            for (const auto& l : levels)
                if (l != reference) non_ref.push_back(l);
            for (const auto& l : non_ref) {
                Eigen::VectorXd col = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
                for (std::size_t i = 0; i < n; ++i)
                    if (cells[i][c] == l) col(static_cast<Eigen::Index>(i)) = 1.0;
                columns.push_back(std::move(col));
                table.names.push_back(spec.name + "_" + level_token(l));
                table.kinds.push_back(PredictorKind::Indicator);
            }
            for (std::size_t i = 0; i < n; ++i) {
                if (is_missing(cells[i][c]))
                    problems["missing value in '" + spec.name + "'"].push_back(i + 1);
                else if (std::find(levels.begin(), levels.end(), cells[i][c]) == levels.end())
                    problems["undeclared level in '" + spec.name + "'"].push_back(i + 1);
            }
            cohort.provenance.push_back("categorical '" + spec.name + "': " + std::to_string(levels.size()) +
                                        " levels -> " + std::to_string(non_ref.size()) +
                                        " indicators, reference '" + reference + "'");
            continue;
        }
        Eigen::VectorXd col(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) {
            const auto& cell = cells[i][c];
            if (is_missing(cell)) {
                problems["missing value in '" + spec.name + "'"].push_back(i + 1);
                col(static_cast<Eigen::Index>(i)) = 0.0;
                continue;
            }
            const auto v = parse_number(cell);
            if (!v) {
                problems["non-numeric value in '" + spec.name + "'"].push_back(i + 1);
                col(static_cast<Eigen::Index>(i)) = 0.0;
                continue;
            }
            if (spec.kind == ColumnKind::Binary && *v != 0.0 && *v != 1.0)
                problems["binary column '" + spec.name + "' not in {0,1}"].push_back(i + 1);
            col(static_cast<Eigen::Index>(i)) = *v;
        }
        columns.push_back(std::move(col));
        table.names.push_back(spec.name);
        table.kinds.push_back(spec.kind == ColumnKind::Binary ? PredictorKind::Binary : PredictorKind::Continuous);
    }

    std::vector<double> time;
    std::vector<int> event;
    if (time_idx) {
        time.resize(n);
        event.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto t = is_missing(cells[i][*time_idx]) ? std::nullopt : parse_number(cells[i][*time_idx]);
            if (!t) {
                problems["missing or non-numeric time"].push_back(i + 1);
            } else if (!(*t > 0.0)) {
                problems["time <= 0"].push_back(i + 1);
            } else {
                time[i] = *t / schema.time_scale_divisor;
            }
            const auto e = is_missing(cells[i][*event_idx]) ? std::nullopt : parse_number(cells[i][*event_idx]);
            if (!e || (*e != 0.0 && *e != 1.0))
                problems["event not in {0,1}"].push_back(i + 1);
            else
                event[i] = static_cast<int>(*e);
        }
    }

    for (std::size_t k = 0; k < schema.group_columns.size(); ++k) {
        auto& labels = table.group_labels[schema.group_columns[k]];
        labels.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            if (is_missing(cells[i][group_idx[k]]))
                problems["missing value in group '" + schema.group_columns[k] + "'"].push_back(i + 1);
            labels.push_back(cells[i][group_idx[k]]);
        }
    }

    if (!problems.empty()) {
        std::ostringstream os;
        os << "validation failed for " << source << ":";
        for (const auto& [what, rows] : problems) os << "\n  " << what << " (rows " << format_rows(rows) << ")";
        throw data_error(os.str());
    }

    table.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(columns.size()));
    for (std::size_t j = 0; j < columns.size(); ++j) table.values.col(static_cast<Eigen::Index>(j)) = columns[j];
    table.standardization.assign(columns.size(), std::nullopt);
    table.validate();
    if (time_idx) cohort.followup = FollowUp(std::move(time), std::move(event));

    cohort.provenance.insert(cohort.provenance.begin(),
                             "read " + std::to_string(n) + " rows from " + std::string(source) + "; " +
                                 std::to_string(schema.predictors.size()) + " predictors -> " +
                                 std::to_string(columns.size()) + " columns");
    if (time_idx && schema.time_scale_divisor != 1.0) {
        std::ostringstream os;
        os << "time column '" << *schema.time_column << "' divided by " << schema.time_scale_divisor;
        cohort.provenance.push_back(os.str());
    }
    return cohort;
}

PredictorTable standardize(const PredictorTable& table, const std::vector<std::string>& columns) {
    PredictorTable out = table;
    if (out.standardization.size() != out.cols()) out.standardization.assign(out.cols(), std::nullopt);
    const auto n = static_cast<double>(table.rows());
    for (const auto& name : columns) {
        const std::size_t j = table.column_index(name);
        if (table.kinds[j] != PredictorKind::Continuous)
            throw data_error("cannot standardize non-continuous column '" + name + "'");
        if (table.rows() < 2) throw data_error("cannot standardize '" + name + "' with fewer than 2 rows");
        auto col = out.values.col(static_cast<Eigen::Index>(j));
        const double mean = col.mean();
        const double sd = std::sqrt((col.array() - mean).square().sum() / (n - 1.0));
        if (!(sd > 0.0) || sd <= 1e-300) throw data_error("degenerate column '" + name + "': SD is zero");
        col = (col.array() - mean) / sd;
        // Compose with any earlier standardization so the metadata still maps to raw units.
        Standardization s{mean, sd};
        if (const auto& prev = table.standardization.size() == table.cols() ? table.standardization[j] : std::nullopt)
            s = Standardization{prev->mean + prev->sd * mean, prev->sd * sd};
        out.standardization[j] = s;
    }
    return out;
}

Eigen::VectorXd unstandardized_column(const PredictorTable& table, std::string_view name) {
    const std::size_t j = table.column_index(name);
    Eigen::VectorXd col = table.values.col(static_cast<Eigen::Index>(j));
    if (j < table.standardization.size() && table.standardization[j]) {
        const auto& s = *table.standardization[j];
        col = (col.array() * s.sd + s.mean).matrix();
    }
    return col;
}

void write_cohort_csv(std::ostream& out, const PredictorTable& table, const FollowUp* followup) {
    if (followup && followup->size() != table.rows()) throw data_error("follow-up length does not match table");
    out << std::setprecision(17);
    bool first = true;
    auto sep = [&] {
        if (!first) out << ',';
        first = false;
    };
    for (const auto& name : table.names) {
        sep();
        out << name;
    }
    if (followup) {
        sep();
        out << "time,event";
    }
    for (const auto& [group, labels] : table.group_labels) {
        sep();
        out << group;
    }
    out << '\n';
    for (std::size_t i = 0; i < table.rows(); ++i) {
        first = true;
        for (std::size_t j = 0; j < table.cols(); ++j) {
            sep();
            out << table.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        }
        if (followup) {
            sep();
            out << followup->time(i) << ',' << followup->event(i);
        }
        for (const auto& [group, labels] : table.group_labels) {
            sep();
            out << labels[i];
        }
        out << '\n';
    }
}

CohortSchema export_schema(const PredictorTable& table, bool with_followup) {
    CohortSchema schema;
    for (std::size_t j = 0; j < table.cols(); ++j)
        schema.predictors.push_back(PredictorColumn{
            table.names[j], table.kinds[j] == PredictorKind::Continuous ? ColumnKind::Continuous : ColumnKind::Binary,
            std::nullopt, {}});
    if (with_followup) {
        schema.time_column = "time";
        schema.event_column = "event";
    }
    for (const auto& [group, labels] : table.group_labels) schema.group_columns.push_back(group);
    return schema;
}

}  // namespace survss
