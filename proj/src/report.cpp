#include "survss/report.hpp"

#include "survss/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace survss {

namespace {

std::string fmt(double v, int digits = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

std::string fixed(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string threshold_tag(double z) { return fmt(z, 6); }

}  // namespace

std::vector<double> lowess(std::span<const double> x, std::span<const double> y, double bandwidth) {
    const std::size_t n = x.size();
    if (y.size() != n) throw data_error("lowess: x and y lengths differ");
    if (n < 5) throw data_error("lowess needs at least 5 points");
    if (!(bandwidth > 0.0 && bandwidth <= 1.0)) throw config_error("lowess bandwidth must be in (0,1]");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return x[a] < x[b]; });
    std::vector<double> xs(n), ys(n);
    for (std::size_t k = 0; k < n; ++k) {
        xs[k] = x[order[k]];
        ys[k] = y[order[k]];
    }
    const std::size_t q = std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(bandwidth * n)), 2, n);

    std::vector<double> fitted(n);
    std::vector<double> weight(q);
    std::size_t left = 0;  // window [left, left + q) of nearest neighbours in sorted order
    for (std::size_t k = 0; k < n; ++k) {
        const double x0 = xs[k];
        while (left + q < n && x0 - xs[left] > xs[left + q] - x0) ++left;
        const double h = std::max(x0 - xs[left], xs[left + q - 1] - x0);

        double sw = 0.0, sx = 0.0, sy = 0.0;
        for (std::size_t m = left; m < left + q; ++m) {
            double w = 1.0;
            if (h > 0.0) {
                const double u = std::abs(xs[m] - x0) / h;
                const double v = u < 1.0 ? 1.0 - u * u * u : 0.0;
                w = v * v * v;
            }
            weight[m - left] = w;
            sw += w;
            sx += w * xs[m];
            sy += w * ys[m];
        }
        if (!(sw > 0.0)) {
            fitted[order[k]] = ys[k];
            continue;
        }
        const double xbar = sx / sw;
        const double ybar = sy / sw;
        double sxx = 0.0, sxy = 0.0;
        for (std::size_t m = left; m < left + q; ++m) {
            const double w = weight[m - left];
            sxx += w * (xs[m] - xbar) * (xs[m] - xbar);
            sxy += w * (xs[m] - xbar) * (ys[m] - ybar);
        }
        const double range = xs.back() - xs.front();
        const bool sloped = sxx > 1e-12 * range * range * sw;
        fitted[order[k]] = ybar + (sloped ? sxy / sxx * (x0 - xbar) : 0.0);
    }
    return fitted;
}

std::string_view file_stem(PlotKind kind) {
    switch (kind) {
        case PlotKind::PredictionInstability: return "prediction_instability";
        case PlotKind::ClassificationInstability: return "classification_instability";
        case PlotKind::NetBenefitLoss: return "nb_loss";
    }
    return "plot";
}

PlotSeries prediction_instability_series(const PrecisionReport& report, double bandwidth) {
    PlotSeries s;
    s.kind = PlotKind::PredictionInstability;
    s.title = "Prediction instability, n = " + fmt(report.n);
    for (const auto& ind : report.individuals) {
        s.x.push_back(ind.true_risk);
        s.lower.push_back(ind.interval.lower);
        s.upper.push_back(ind.interval.upper);
    }
    if (s.x.size() >= 5) {
        s.smooth_lower = lowess(s.x, s.lower, bandwidth);
        s.smooth_upper = lowess(s.x, s.upper, bandwidth);
    }
    s.thresholds = report.thresholds;
    return s;
}

namespace {

PlotSeries metric_series(const PrecisionReport& report, std::size_t threshold_index, double bandwidth, PlotKind kind) {
    if (threshold_index >= report.thresholds.size()) throw config_error("plot: threshold index out of range");
    PlotSeries s;
    s.kind = kind;
    const double z = report.thresholds[threshold_index];
    s.title = std::string(kind == PlotKind::NetBenefitLoss ? "Expected net benefit loss" : "Classification instability") +
              ", n = " + fmt(report.n) + ", threshold " + fmt(z);
    for (const auto& ind : report.individuals) {
        s.x.push_back(ind.true_risk);
        s.lower.push_back(kind == PlotKind::NetBenefitLoss ? ind.nb_loss[threshold_index] : ind.misclass[threshold_index]);
    }
    if (s.x.size() >= 5) s.smooth_lower = lowess(s.x, s.lower, bandwidth);
    s.thresholds = {z};
    return s;
}

}  // namespace

PlotSeries classification_instability_series(const PrecisionReport& report, std::size_t threshold_index,
                                             double bandwidth) {
    return metric_series(report, threshold_index, bandwidth, PlotKind::ClassificationInstability);
}

PlotSeries net_benefit_loss_series(const PrecisionReport& report, std::size_t threshold_index, double bandwidth) {
    return metric_series(report, threshold_index, bandwidth, PlotKind::NetBenefitLoss);
}

void write_plot_csv(std::ostream& out, const PlotSeries& s) {
    const bool interval = s.kind == PlotKind::PredictionInstability;
    out << (interval ? "id,true_risk,lower,upper,smooth_lower,smooth_upper\n"
                     : s.kind == PlotKind::NetBenefitLoss ? "id,true_risk,nb_loss,smooth\n" : "id,true_risk,misclass,smooth\n");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
        out << i + 1 << ',' << fmt(s.x[i], 10) << ',' << fmt(s.lower[i], 10);
        if (interval) out << ',' << fmt(s.upper[i], 10);
        out << ',' << (s.smooth_lower.empty() ? "" : fmt(s.smooth_lower[i], 10));
        if (interval) out << ',' << (s.smooth_upper.empty() ? "" : fmt(s.smooth_upper[i], 10));
        out << '\n';
    }
}

std::string render_svg(const PlotSeries& s) {
    constexpr double W = 720, H = 520, left = 70, right = 20, top = 40, bottom = 60;
    const double pw = W - left - right, ph = H - top - bottom;
    const bool interval = s.kind == PlotKind::PredictionInstability;
    double ymax = 1.0;
    if (!interval) {
        ymax = 0.0;
        for (double v : s.lower) ymax = std::max(ymax, v);
        ymax = ymax > 0.0 ? std::min(1.0, std::ceil(ymax * 10.0 * 1.05) / 10.0) : 1.0;
        if (ymax <= 0.0) ymax = 1.0;
    }
    auto px = [&](double v) { return fixed(left + v * pw); };
    auto py = [&](double v) { return fixed(top + ph - (v / ymax) * ph); };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
       << ' ' << H << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
       << s.title << "</text>\n";
    os << "<g stroke=\"black\" stroke-width=\"1\"><line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\""
       << left + pw << "\" y2=\"" << top + ph << "\"/><line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left
       << "\" y2=\"" << top + ph << "\"/></g>\n";
    os << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
    for (int k = 0; k <= 10; k += 2) {
        const double v = k / 10.0;
        os << "<text x=\"" << px(v) << "\" y=\"" << fixed(top + ph + 16) << "\" text-anchor=\"middle\">" << fixed(v)
           << "</text>\n";
        os << "<text x=\"" << fixed(left - 6) << "\" y=\"" << py(v * ymax) << "\" text-anchor=\"end\">"
           << fmt(v * ymax, 3) << "</text>\n";
    }
    os << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 16 << "\" text-anchor=\"middle\">True risk</text>\n";
    os << "<text x=\"18\" y=\"" << top + ph / 2 << "\" transform=\"rotate(-90 18 " << top + ph / 2
       << ")\" text-anchor=\"middle\">"
       << (interval ? "95% uncertainty interval"
                    : s.kind == PlotKind::NetBenefitLoss ? "Expected net benefit loss" : "Probability of misclassification")
       << "</text>\n</g>\n";

    os << "<g stroke=\"#d62728\" stroke-width=\"1\" stroke-dasharray=\"4 3\">\n";
    for (double z : s.thresholds)
        os << "<line x1=\"" << px(z) << "\" y1=\"" << top << "\" x2=\"" << px(z) << "\" y2=\"" << top + ph << "\"/>\n";
    os << "</g>\n";

    if (interval) {
        os << "<g stroke=\"#7f7f7f\" stroke-width=\"0.6\" stroke-opacity=\"0.6\">\n";
        for (std::size_t i = 0; i < s.x.size(); ++i)
            os << "<line x1=\"" << px(s.x[i]) << "\" y1=\"" << py(s.lower[i]) << "\" x2=\"" << px(s.x[i]) << "\" y2=\""
               << py(s.upper[i]) << "\"/>\n";
        os << "</g>\n";
        os << "<line x1=\"" << px(0) << "\" y1=\"" << py(0) << "\" x2=\"" << px(1) << "\" y2=\"" << py(1)
           << "\" stroke=\"black\" stroke-width=\"0.8\"/>\n";
    } else {
        os << "<g fill=\"#1f77b4\" fill-opacity=\"0.6\">\n";
        for (std::size_t i = 0; i < s.x.size(); ++i)
            os << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.lower[i]) << "\" r=\"1.6\"/>\n";
        os << "</g>\n";
    }

    auto polyline = [&](const std::vector<double>& ys) {
        if (ys.empty()) return;
        std::vector<std::size_t> order(s.x.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return s.x[a] < s.x[b]; });
        os << "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"1.6\" stroke-dasharray=\"6 3\" points=\"";
        for (std::size_t k = 0; k < order.size(); ++k)
            os << (k ? " " : "") << px(s.x[order[k]]) << ',' << py(std::clamp(ys[order[k]], 0.0, ymax));
        os << "\"/>\n";
    };
    polyline(s.smooth_lower);
    polyline(s.smooth_upper);
    os << "</svg>\n";
    return os.str();
}

std::vector<std::filesystem::path> emit_plots(const std::vector<PlotSeries>& series,
                                              const std::filesystem::path& out_dir, const std::string& suffix) {
    if (series.empty()) throw data_error("no plot series to emit");
    for (const auto& s : series)
        if (s.x.empty()) throw data_error("cannot plot an empty cohort");
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw data_error("cannot create plot directory '" + out_dir.string() + "': " + ec.message());

    std::vector<std::filesystem::path> written;
    for (const auto& s : series) {
        const std::string stem = std::string(file_stem(s.kind)) + suffix;
        const auto csv_path = out_dir / (stem + ".csv");
        const auto svg_path = out_dir / (stem + ".svg");
        std::ofstream csv(csv_path, std::ios::binary);
        std::ofstream svg(svg_path, std::ios::binary);
        if (!csv || !svg) throw data_error("cannot write plot files in '" + out_dir.string() + "'");
        write_plot_csv(csv, s);
        svg << render_svg(s);
        written.push_back(csv_path);
        written.push_back(svg_path);
    }
    return written;
}

std::vector<SubgroupSummary> subgroup_summary(const PrecisionReport& report, std::span<const std::string> labels,
                                              double flag_factor) {
    if (labels.size() != report.individuals.size())
        throw data_error("subgroup labels do not match the number of individuals");
    std::map<std::string, std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < labels.size(); ++i) members[labels[i]].push_back(i);

    std::vector<SubgroupSummary> out;
    const auto& overall = report.overall;
    for (const auto& [label, rows] : members) {
        SubgroupSummary g;
        g.label = label;
        g.count = rows.size();
        g.aggregates = report.aggregate(rows);
        g.low_n = rows.size() < 2;
        auto check = [&](const std::string& name, double group_mean, double overall_mean) {
            if (overall_mean > 0.0 && group_mean > flag_factor * overall_mean) g.flags.push_back(name);
        };
        check("width", g.aggregates.width.mean, overall.width.mean);
        check("mape", g.aggregates.mape.mean, overall.mape.mean);
        for (std::size_t z = 0; z < report.thresholds.size(); ++z) {
            check("misclass@" + threshold_tag(report.thresholds[z]), g.aggregates.misclass[z].mean,
                  overall.misclass[z].mean);
            check("nb_loss@" + threshold_tag(report.thresholds[z]), g.aggregates.nb_loss[z].mean,
                  overall.nb_loss[z].mean);
        }
        out.push_back(std::move(g));
    }
    return out;
}

nlohmann::json to_json(const Summary& s) {
    return {{"count", s.count}, {"mean", s.mean}, {"min", s.min}, {"median", s.median}, {"max", s.max}, {"sum", s.sum}};
}

nlohmann::json to_json(const PrecisionAggregates& a, std::span<const double> thresholds) {
    nlohmann::json j{{"width", to_json(a.width)},
                     {"mape", to_json(a.mape)},
                     {"rmspe", to_json(a.rmspe)},
                     {"true_risk", to_json(a.true_risk)}};
    nlohmann::json per = nlohmann::json::array();
    for (std::size_t z = 0; z < thresholds.size(); ++z)
        per.push_back({{"threshold", thresholds[z]},
                       {"misclass", to_json(a.misclass[z])},
                       {"nb_loss", to_json(a.nb_loss[z])}});
    j["thresholds"] = std::move(per);
    return j;
}

void write_individuals_csv(std::ostream& out, const PrecisionReport& report, bool header) {
    if (header) {
        out << "n,id,mu,se_mu,true_risk,lower,upper,width,mape,rmspe";
        for (double z : report.thresholds) out << ",misclass@" << threshold_tag(z);
        for (double z : report.thresholds) out << ",nb_loss@" << threshold_tag(z);
        out << '\n';
    }
    for (std::size_t i = 0; i < report.individuals.size(); ++i) {
        const auto& ind = report.individuals[i];
        out << fmt(report.n, 12) << ',' << i + 1 << ',' << fmt(ind.mu, 12) << ',' << fmt(ind.se_mu, 12) << ',' << fmt(ind.true_risk, 12) << ','
            << fmt(ind.interval.lower, 12) << ',' << fmt(ind.interval.upper, 12) << ','
            << fmt(ind.interval.width(), 12) << ',' << fmt(ind.mape, 12) << ',' << fmt(ind.rmspe, 12);
        for (double v : ind.misclass) out << ',' << fmt(v, 12);
        for (double v : ind.nb_loss) out << ',' << fmt(v, 12);
        out << '\n';
    }
}

void write_subgroups_csv(std::ostream& out, double n, const std::string& group,
                         const std::vector<SubgroupSummary>& groups, std::span<const double> thresholds, bool header) {
    if (header) out << "n,group,label,count,low_n,metric,mean,min,median,max,sum,flagged\n";
    for (const auto& g : groups) {
        auto row = [&](const std::string& metric, const Summary& s) {
            const bool flagged = std::find(g.flags.begin(), g.flags.end(), metric) != g.flags.end();
            out << fmt(n, 12) << ',' << group << ',' << g.label << ',' << g.count << ',' << (g.low_n ? 1 : 0) << ','
                << metric << ','
                << fmt(s.mean, 10) << ',' << fmt(s.min, 10) << ',' << fmt(s.median, 10) << ',' << fmt(s.max, 10)
                << ',' << fmt(s.sum, 10) << ',' << (flagged ? 1 : 0) << '\n';
        };
        row("width", g.aggregates.width);
        row("mape", g.aggregates.mape);
        row("rmspe", g.aggregates.rmspe);
        for (std::size_t z = 0; z < thresholds.size(); ++z) {
            row("misclass@" + threshold_tag(thresholds[z]), g.aggregates.misclass[z]);
            row("nb_loss@" + threshold_tag(thresholds[z]), g.aggregates.nb_loss[z]);
        }
    }
}

}  // namespace survss
