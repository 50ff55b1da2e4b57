#include "survss/pipeline.hpp"

#include "survss/error.hpp"
#include "survss/report.hpp"

#include <Eigen/Core>
#include <boost/version.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace survss {

namespace {

using json = nlohmann::json;

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write '" + path.string() + "'");
    return out;
}

json vector_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

std::string size_tag(double n) {
    std::ostringstream os;
    os << n;
    return os.str();
}

std::string threshold_suffix(double z) {
    std::ostringstream os;
    os << "_z" << z;
    return os.str();
}

}  // namespace

PreparedCohort prepare_cohort(const RunConfig& config) {
    PreparedCohort out;
    if (const auto* csv = std::get_if<CsvSource>(&config.data)) {
        Cohort cohort = load_cohort(csv->path, csv->schema);
        out.table = std::move(cohort.table);
        out.observed = std::move(cohort.followup);
        out.provenance = std::move(cohort.provenance);
    } else {
        const auto& synth = std::get<SynthSource>(config.data);
        out.table = sample_predictors(synth.spec, synth.n, config.seeds.simulation);
        out.provenance.push_back("synthetic predictors: " + std::to_string(synth.n) + " rows, seed " +
                                 std::to_string(config.seeds.simulation));
    }
    if (!config.standardize.empty()) {
        out.table = standardize(out.table, config.standardize);
        std::string cols;
        for (const auto& c : config.standardize) cols += (cols.empty() ? "" : ", ") + c;
        out.provenance.push_back("standardized: " + cols);
    }
    out.table.validate();
    return out;
}

ResolvedModel resolve_core_model(const RunConfig& config, const PredictorTable& table) {
    ResolvedModel out;
    if (const auto* direct = std::get_if<DirectModel>(&config.core_model)) {
        if (static_cast<std::size_t>(direct->beta.size()) != table.cols()) {
            std::ostringstream os;
            os << "/core_model/beta: has " << direct->beta.size() << " weights but the cohort has " << table.cols()
               << " predictor columns";
            throw config_error(os.str());
        }
        out.model.alpha = direct->alpha;
        out.model.delta = direct->delta;
        out.model.beta = direct->beta;
        out.model.horizon = config.horizon;
        return out;
    }
    const auto& cal = std::get<CalibratedModel>(config.core_model);
    Eigen::VectorXd beta;
    if (cal.beta_relative) {
        beta = *cal.beta_relative;
        if (static_cast<std::size_t>(beta.size()) != table.cols()) {
            std::ostringstream os;
            os << "/core_model/calibrate/beta_relative: has " << beta.size() << " weights but the cohort has "
               << table.cols() << " predictor columns";
            throw config_error(os.str());
        }
    } else {
        beta = standardized_equal_weights(table, *cal.equal_standardized_weights);
    }
    CalibrationOptions options;
    options.censoring = config.censoring.value_or(CensoringSpec{NoCensoring{}});
    options.seed = config.seeds.calibration;
    out.calibration = calibrate(table, beta, config.horizon, cal.target, options);
    out.model = out.calibration->model;
    return out;
}

ResolvedFollowUp resolve_followup(const RunConfig& config, const PreparedCohort& cohort, const CoreModel& model) {
    if (cohort.observed) return {*cohort.observed, false};
    if (!config.censoring)
        throw config_error("/censoring: is required when the data carries no follow-up times");
    const auto times = simulate_event_times(model, cohort.table, config.seeds.simulation);
    return {apply_censoring(times, *config.censoring, config.seeds.simulation), true};
}

Workflow prepare_workflow(const RunConfig& config) {
    Workflow w;
    w.config = config;
    w.cohort = prepare_cohort(config);
    w.model = resolve_core_model(config, w.cohort.table);
    w.followup = resolve_followup(config, w.cohort, w.model.model);
    w.info = unit_information(w.model.model, w.cohort.table, w.followup.followup);
    return w;
}

PrecisionOptions precision_options(const RunConfig& config) {
    PrecisionOptions o;
    o.level = config.level;
    o.z_multiplier = config.z_multiplier;
    o.thresholds = config.thresholds;
    o.mape_draws = config.mape_draws;
    o.seed = config.seeds.mape;
    return o;
}

std::vector<SizeGridRow> size_grid(const Workflow& workflow, std::span<const double> sizes) {
    if (sizes.empty()) throw config_error("size grid needs at least one sample size");
    const auto options = precision_options(workflow.config);
    std::vector<SizeGridRow> rows;
    for (double n : sizes) {
        if (!(n >= 1.0)) throw config_error("sample sizes must be >= 1");
        const auto report = precision_profile(workflow.model.model, workflow.cohort.table, workflow.info, n, options);
        SizeGridRow row;
        row.n = n;
        row.aggregates = report.overall;
        double se = 0.0;
        for (const auto& ind : report.individuals) se += ind.se_mu;
        row.mean_se_mu = se / static_cast<double>(report.individuals.size());
        rows.push_back(std::move(row));
    }
    std::vector<std::size_t> order(rows.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return rows[a].n < rows[b].n; });
    for (std::size_t k = 1; k < order.size(); ++k) {
        const auto& small = rows[order[k - 1]];
        const auto& large = rows[order[k]];
        if (large.aggregates.width.mean > small.aggregates.width.mean * (1.0 + 1e-12)) {
            std::ostringstream os;
            os << "size grid: mean width rises from " << small.aggregates.width.mean << " at n=" << small.n << " to "
               << large.aggregates.width.mean << " at n=" << large.n;
            throw numerical_error(os.str());
        }
    }
    return rows;
}

json to_json(const CoreModel& model) {
    return {{"alpha", model.alpha}, {"delta", model.delta}, {"beta", vector_json(model.beta)},
            {"horizon", model.horizon}, {"coefficients", vector_json(model.coefficients())}};
}

json to_json(const CalibrationReport& report) {
    return {{"alpha", report.model.alpha},       {"delta", report.model.delta},
            {"c_index", report.c_index},         {"overall_risk", report.overall_risk},
            {"evaluations", report.iterations},  {"simulation_rows", report.simulation_rows}};
}

json to_json(const SampleSizeResult& result) {
    json bins = json::array();
    for (const auto& b : result.bins) {
        json jb{{"risk", b.target.risk},
                {"max_width", b.target.max_width},
                {"individuals", b.individuals},
                {"max_n", b.max_n}};
        jb["binding_id"] = b.binding_row ? json(*b.binding_row + 1) : json(nullptr);
        bins.push_back(std::move(jb));
    }
    json binding = json::array();
    for (auto r : result.binding_rows) binding.push_back(r + 1);
    return {{"n_star", result.n_star},
            {"scoped_individuals", result.individuals.size()},
            {"bins", std::move(bins)},
            {"binding_ids", std::move(binding)}};
}

json software_versions() {
    std::ostringstream compiler;
#if defined(__clang__)
    compiler << "clang " << __clang_major__ << '.' << __clang_minor__ << '.' << __clang_patchlevel__;
#elif defined(__GNUC__)
    compiler << "gcc " << __GNUC__ << '.' << __GNUC_MINOR__ << '.' << __GNUC_PATCHLEVEL__;
#else
    compiler << "unknown";
#endif
    std::ostringstream eigen, boost;
    eigen << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION;
    boost << BOOST_VERSION / 100000 << '.' << BOOST_VERSION / 100 % 1000 << '.' << BOOST_VERSION % 100;
    std::ostringstream nl;
    nl << NLOHMANN_JSON_VERSION_MAJOR << '.' << NLOHMANN_JSON_VERSION_MINOR << '.' << NLOHMANN_JSON_VERSION_PATCH;
    return {{"survss", kVersion},
            {"compiler", compiler.str()},
            {"eigen", eigen.str()},
            {"boost", boost.str()},
            {"nlohmann_json", nl.str()}};
}

void write_json(const std::filesystem::path& path, const nlohmann::json& value) {
    auto out = open_output(path);
    out << value.dump(2) << '\n';
}

RunOutputs run_workflow(const Workflow& w, const std::filesystem::path& out_dir) {
    const auto& cfg = w.config;
    const auto options = precision_options(cfg);
    const double z = cfg.multiplier();
    RunOutputs outputs;

    std::error_code ec;
    std::filesystem::create_directories(out_dir / "plots", ec);
    if (ec) throw data_error("cannot create output directory '" + out_dir.string() + "': " + ec.message());

    for (double n : cfg.sample_sizes)
        outputs.profiles.push_back(precision_profile(w.model.model, w.cohort.table, w.info, n, options));
    if (cfg.precision_targets)
        outputs.option_b = cohort_required_n(w.model.model, w.cohort.table, w.info, *cfg.precision_targets, z);
    if (outputs.profiles.size() > 1) size_grid(w, cfg.sample_sizes);

    // Tables.
    {
        auto out = open_output(out_dir / "individuals.csv");
        for (std::size_t k = 0; k < outputs.profiles.size(); ++k) write_individuals_csv(out, outputs.profiles[k], k == 0);
        if (outputs.profiles.empty()) out << "n,id\n";
        outputs.files.emplace_back("individuals.csv");
    }
    json profiles = json::array();
    {
        auto out = open_output(out_dir / "subgroups.csv");
        bool header = true;
        for (const auto& report : outputs.profiles) {
            json jp{{"n", report.n}, {"overall", to_json(report.overall, report.thresholds)}};
            double se = 0.0;
            for (const auto& ind : report.individuals) se += ind.se_mu;
            jp["mean_se_mu"] = se / static_cast<double>(report.individuals.size());
            json groups = json::object();
            for (const auto& [group, labels] : w.cohort.table.group_labels) {
                const auto summary = subgroup_summary(report, labels, cfg.subgroup_flag_factor);
                write_subgroups_csv(out, report.n, group, summary, report.thresholds, header);
                header = false;
                json jg = json::array();
                for (const auto& g : summary)
                    jg.push_back({{"label", g.label},
                                  {"count", g.count},
                                  {"low_n", g.low_n},
                                  {"flags", g.flags},
                                  {"aggregates", to_json(g.aggregates, report.thresholds)}});
                groups[group] = std::move(jg);
            }
            jp["subgroups"] = std::move(groups);
            profiles.push_back(std::move(jp));
        }
        if (header) out << "n,group,label,count,low_n,metric,mean,min,median,max,sum,flagged\n";
        outputs.files.emplace_back("subgroups.csv");
    }

    // Plots: the first sample size and first threshold keep the plain names.
    for (std::size_t k = 0; k < outputs.profiles.size(); ++k) {
        const auto& report = outputs.profiles[k];
        const std::string n_suffix = k == 0 ? "" : "_n" + size_tag(report.n);
        std::vector<PlotSeries> series{prediction_instability_series(report, cfg.lowess_bandwidth)};
        for (const auto& p : emit_plots(series, out_dir / "plots", n_suffix))
            outputs.files.push_back(std::filesystem::path("plots") / p.filename());
        for (std::size_t t = 0; t < report.thresholds.size(); ++t) {
            const std::string suffix = n_suffix + (t == 0 ? "" : threshold_suffix(report.thresholds[t]));
            std::vector<PlotSeries> metric{classification_instability_series(report, t, cfg.lowess_bandwidth),
                                           net_benefit_loss_series(report, t, cfg.lowess_bandwidth)};
            for (const auto& p : emit_plots(metric, out_dir / "plots", suffix))
                outputs.files.push_back(std::filesystem::path("plots") / p.filename());
        }
    }

    const auto& table = w.cohort.table;
    const auto& fu = w.followup.followup;
    json report{{"config_hash", cfg.hash},
                {"cohort",
                 {{"rows", table.rows()},
                  {"predictors", table.names},
                  {"followup",
                   {{"source", w.followup.simulated ? "simulated" : "observed"},
                    {"events", fu.events()},
                    {"person_time", fu.person_time()},
                    {"mean_time", fu.person_time() / static_cast<double>(fu.size())}}}}},
                {"core_model", to_json(w.model.model)},
                {"information", to_json(w.info)},
                {"z", z},
                {"level", cfg.level},
                {"thresholds", cfg.thresholds},
                {"profiles", std::move(profiles)}};
    if (w.model.calibration) report["calibration"] = to_json(*w.model.calibration);
    if (outputs.option_b) report["option_b"] = to_json(*outputs.option_b);
    outputs.report = report;
    write_json(out_dir / "report.json", report);
    outputs.files.emplace_back("report.json");

    json manifest{{"software", software_versions()},
                  {"config_hash", cfg.hash},
                  {"config", cfg.document},
                  {"seeds",
                   {{"calibration", cfg.seeds.calibration},
                    {"simulation", cfg.seeds.simulation},
                    {"mape", cfg.seeds.mape}}},
                  {"cohort", w.cohort.provenance},
                  {"core_model", to_json(w.model.model)},
                  {"information",
                   {{"reciprocal_condition", w.info.reciprocal_condition},
                    {"dimension", w.info.dimension()}}},
                  {"counts",
                   {{"rows", table.rows()},
                    {"events", fu.events()},
                    {"followup", w.followup.simulated ? "simulated" : "observed"},
                    {"sample_sizes", cfg.sample_sizes}}}};
    if (w.model.calibration) manifest["calibration"] = to_json(*w.model.calibration);
    json files = json::array();
    for (const auto& f : outputs.files) files.push_back(f.generic_string());
    files.push_back("manifest.json");
    manifest["outputs"] = std::move(files);
    outputs.manifest = manifest;
    write_json(out_dir / "manifest.json", manifest);
    outputs.files.emplace_back("manifest.json");
    return outputs;
}

}  // namespace survss
