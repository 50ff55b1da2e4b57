#pragma once

#include "survss/precision.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace survss {

/// Single-pass LOWESS: tricube-weighted local linear fit at every x_i over
/// its ceil(bandwidth * n) nearest neighbours. No robustness iterations.
std::vector<double> lowess(std::span<const double> x, std::span<const double> y, double bandwidth = 0.5);

enum class PlotKind { PredictionInstability, ClassificationInstability, NetBenefitLoss };

std::string_view file_stem(PlotKind kind);

/// Plot data for one figure. For prediction instability, `lower`/`upper` are
/// interval bounds; otherwise `lower` holds the metric and `upper` is empty.
struct PlotSeries {
    PlotKind kind = PlotKind::PredictionInstability;
    std::string title;
    std::vector<double> x;  // true risk
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<double> smooth_lower;  // evaluated at each x
    std::vector<double> smooth_upper;
    std::vector<double> thresholds;
};

PlotSeries prediction_instability_series(const PrecisionReport& report, double bandwidth = 0.5);
PlotSeries classification_instability_series(const PrecisionReport& report, std::size_t threshold_index,
                                             double bandwidth = 0.5);
PlotSeries net_benefit_loss_series(const PrecisionReport& report, std::size_t threshold_index, double bandwidth = 0.5);

std::string render_svg(const PlotSeries& series);
void write_plot_csv(std::ostream& out, const PlotSeries& series);

/// Writes <stem>.csv and <stem>.svg per series under `out_dir`, where the
/// stem comes from the plot kind plus `suffix`.
std::vector<std::filesystem::path> emit_plots(const std::vector<PlotSeries>& series,
                                              const std::filesystem::path& out_dir, const std::string& suffix = "");

struct SubgroupSummary {
    std::string label;
    std::size_t count = 0;
    PrecisionAggregates aggregates;
    bool low_n = false;
    std::vector<std::string> flags;  // metrics whose mean exceeds factor x overall mean
};

std::vector<SubgroupSummary> subgroup_summary(const PrecisionReport& report, std::span<const std::string> labels,
                                              double flag_factor = 1.5);

nlohmann::json to_json(const Summary& s);
nlohmann::json to_json(const PrecisionAggregates& a, std::span<const double> thresholds);

/// One row per individual, prefixed by the sample size n. `header` writes the column line.
void write_individuals_csv(std::ostream& out, const PrecisionReport& report, bool header = true);
void write_subgroups_csv(std::ostream& out, double n, const std::string& group,
                         const std::vector<SubgroupSummary>& groups, std::span<const double> thresholds,
                         bool header = true);

}  // namespace survss
