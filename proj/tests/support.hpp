#pragma once

#include "survss/core_model.hpp"
#include "survss/ingest.hpp"

#include <filesystem>
#include <random>
#include <string>

namespace survss::testing {

inline std::filesystem::path source_dir() { return SURVSS_SOURCE_DIR; }

inline std::filesystem::path gbsg_csv() { return source_dir() / "data" / "gbsg_er_tamoxifen.csv"; }

inline CohortSchema gbsg_schema() {
    CohortSchema s;
    s.predictors = {{"age", ColumnKind::Continuous, std::nullopt, {}},
                    {"size", ColumnKind::Continuous, std::nullopt, {}},
                    {"nodes", ColumnKind::Continuous, std::nullopt, {}},
                    {"meno", ColumnKind::Categorical, std::string("pre"), {"pre", "post"}},
                    {"grade", ColumnKind::Categorical, std::string("1"), {"1", "2", "3"}}};
    s.time_column = "time";
    s.event_column = "event";
    s.time_scale_divisor = 365.25;
    s.group_columns = {"meno"};
    return s;
}

// Standardized GBSG cohort with follow-up in years.
inline Cohort gbsg_cohort() {
    Cohort c = load_cohort(gbsg_csv(), gbsg_schema());
    c.table = standardize(c.table, {"age", "size", "nodes"});
    return c;
}

inline CoreModel gbsg_core_model() {
    CoreModel m;
    m.alpha = -3.429;
    m.delta = 0.208;
    m.beta = Eigen::VectorXd(6);
    m.beta << -1, 0.5, 2, 3, 3, 4;
    m.horizon = 5.0;
    return m;
}

// Unique scratch directory under the system temp path.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("survss_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace survss::testing
