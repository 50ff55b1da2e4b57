#include "survss/config.hpp"
#include "survss/error.hpp"
#include "survss/model_compare.hpp"
#include "survss/pipeline.hpp"
#include "survss/report.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

using namespace survss;
using json = nlohmann::json;

namespace {

struct Common {
    std::string config;
    std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("config", c.config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--set", c.overrides, "Override a config field, path=value (repeatable)");
}

RunConfig load(const Common& c) { return load_config(c.config, c.overrides); }

void print_aggregate_header(std::ostream& os, const std::vector<double>& thresholds) {
    os << "n\tmean_se_mu\tmean_width\tmean_mape\tmean_rmspe";
    for (double z : thresholds) os << "\tmisclass@" << z << "\tnb_loss_sum@" << z;
    os << '\n';
}

std::string num(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

int cmd_run(const Common& c, const std::string& out_override) {
    auto cfg = load(c);
    if (!out_override.empty()) cfg.output_dir = out_override;
    const auto workflow = prepare_workflow(cfg);
    const auto outputs = run_workflow(workflow, cfg.output_dir);
    const auto& m = workflow.model.model;
    std::cout << "core model: alpha=" << num(m.alpha) << " delta=" << num(m.delta) << " horizon=" << m.horizon << '\n';
    if (workflow.model.calibration)
        std::cout << "calibrated: C=" << num(workflow.model.calibration->c_index)
                  << " mean risk=" << num(workflow.model.calibration->overall_risk) << '\n';
    std::cout << "unit information: " << workflow.info.dimension() << " parameters, reciprocal condition "
              << workflow.info.reciprocal_condition << '\n';
    if (!outputs.profiles.empty()) {
        print_aggregate_header(std::cout, cfg.thresholds);
        for (const auto& p : outputs.profiles) {
            double se = 0.0;
            for (const auto& ind : p.individuals) se += ind.se_mu;
            std::cout << p.n << '\t' << num(se / p.individuals.size()) << '\t' << num(p.overall.width.mean) << '\t'
                      << num(p.overall.mape.mean) << '\t' << num(p.overall.rmspe.mean);
            for (std::size_t t = 0; t < p.thresholds.size(); ++t)
                std::cout << '\t' << num(p.overall.misclass[t].mean) << '\t' << num(p.overall.nb_loss[t].sum);
            std::cout << '\n';
        }
    }
    if (outputs.option_b) std::cout << "required sample size n* = " << outputs.option_b->n_star << '\n';
    std::cout << "wrote " << outputs.files.size() << " files under " << cfg.output_dir.string() << '\n';
    return 0;
}

int cmd_calibrate(const Common& c) {
    const auto cfg = load(c);
    const auto cohort = prepare_cohort(cfg);
    const auto resolved = resolve_core_model(cfg, cohort.table);
    json out{{"core_model", to_json(resolved.model)}};
    if (resolved.calibration) {
        out["calibration"] = to_json(*resolved.calibration);
    } else {
        CalibrationOptions options;
        options.censoring = cfg.censoring.value_or(CensoringSpec{NoCensoring{}});
        options.seed = cfg.seeds.calibration;
        const auto risk = true_risk(resolved.model, cohort.table, resolved.model.horizon);
        out["achieved"] = {{"overall_risk", risk.mean()},
                           {"simulated_c_index", simulated_c_index(cohort.table, resolved.model, options)}};
        if (cohort.observed) {
            const auto mu = linear_predictor(resolved.model, cohort.table);
            std::vector<double> v(mu.data(), mu.data() + mu.size());
            out["achieved"]["observed_c_index"] = harrell_c(v, *cohort.observed);
        }
    }
    std::cout << out.dump(2) << '\n';
    return 0;
}

int cmd_synth_export(const Common& c, const std::string& output) {
    const auto cfg = load(c);
    const auto cohort = prepare_cohort(cfg);
    const auto resolved = resolve_core_model(cfg, cohort.table);
    const auto fu = resolve_followup(cfg, cohort, resolved.model);
    std::ofstream file;
    std::ostream* out = &std::cout;
    if (!output.empty() && output != "-") {
        file.open(output, std::ios::binary);
        if (!file) throw data_error("cannot write '" + output + "'");
        out = &file;
    }
    write_cohort_csv(*out, cohort.table, &fu.followup);
    return 0;
}

int cmd_compare(const Common& c, const std::string& scale_name, const std::string& out_dir) {
    const auto cfg = load(c);
    const auto cohort = prepare_cohort(cfg);
    const auto resolved = resolve_core_model(cfg, cohort.table);
    const auto fu = resolve_followup(cfg, cohort, resolved.model);
    const auto scale = scale_name == "loglog" ? IntervalScale::LogLog : IntervalScale::Risk;
    const auto exp_fit = fit_exponential(cohort.table, fu.followup);
    const auto wei_fit = fit_weibull(cohort.table, fu.followup);
    const auto cmp = compare_intervals(exp_fit, wei_fit, cohort.table, cfg.horizon, cfg.multiplier(), scale);

    json j{{"config_hash", cfg.hash},
           {"scale", scale_name},
           {"rows", cohort.table.rows()},
           {"exponential", {{"loglik", exp_fit.loglik}, {"coefficients", exp_fit.coefficients}, {"mean_width", cmp.exponential_width.mean}}},
           {"weibull",
            {{"loglik", wei_fit.loglik},
             {"coefficients", wei_fit.coefficients},
             {"shape", wei_fit.shape.value_or(1.0)},
             {"mean_width", cmp.weibull_width.mean}}},
           {"mean_width_difference", cmp.width_difference.mean},
           {"likelihood_ratio", cmp.likelihood_ratio},
           {"flagged_unreliable", cmp.flagged}};
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw data_error("cannot create '" + out_dir + "': " + ec.message());
    write_json(std::filesystem::path(out_dir) / "compare.json", j);
    std::ofstream csv(std::filesystem::path(out_dir) / "compare.csv", std::ios::binary);
    if (!csv) throw data_error("cannot write compare.csv in '" + out_dir + "'");
    csv << "id,exp_risk,exp_lower,exp_upper,weibull_risk,weibull_lower,weibull_upper,width_difference,clamped,"
           "unreliable\n";
    csv.precision(10);
    for (std::size_t i = 0; i < cmp.rows.size(); ++i) {
        const auto& r = cmp.rows[i];
        csv << i + 1 << ',' << r.exponential.risk << ',' << r.exponential.interval.lower << ','
            << r.exponential.interval.upper << ',' << r.weibull.risk << ',' << r.weibull.interval.lower << ','
            << r.weibull.interval.upper << ',' << r.width_difference << ',' << (r.weibull.clamped ? 1 : 0) << ','
            << (r.weibull.unreliable ? 1 : 0) << '\n';
    }
    std::cout << "exponential mean width " << num(cmp.exponential_width.mean) << ", Weibull mean width "
              << num(cmp.weibull_width.mean) << " (shape " << num(wei_fit.shape.value_or(1.0)) << ", LR "
              << num(cmp.likelihood_ratio, 3) << ", " << cmp.flagged << " flagged)\n";
    return 0;
}

int cmd_size_grid(const Common& c, std::vector<double> sizes) {
    const auto cfg = load(c);
    if (sizes.empty()) sizes = cfg.sample_sizes;
    if (sizes.empty()) throw config_error("size-grid: no sample sizes given (--sizes or /sample_sizes)");
    const auto workflow = prepare_workflow(cfg);
    const auto rows = size_grid(workflow, sizes);
    print_aggregate_header(std::cout, cfg.thresholds);
    for (const auto& r : rows) {
        std::cout << r.n << '\t' << num(r.mean_se_mu) << '\t' << num(r.aggregates.width.mean) << '\t'
                  << num(r.aggregates.mape.mean) << '\t' << num(r.aggregates.rmspe.mean);
        for (std::size_t t = 0; t < cfg.thresholds.size(); ++t)
            std::cout << '\t' << num(r.aggregates.misclass[t].mean) << '\t' << num(r.aggregates.nb_loss[t].sum);
        std::cout << '\n';
    }
    return 0;
}

int cmd_fisher_export(const Common& c, const std::string& output) {
    const auto cfg = load(c);
    const auto workflow = prepare_workflow(cfg);
    json j = to_json(workflow.info);
    j["core_model"] = to_json(workflow.model.model);
    j["config_hash"] = cfg.hash;
    if (output.empty() || output == "-")
        std::cout << j.dump(2) << '\n';
    else
        write_json(output, j);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sample size and precision planning for survival prediction models"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    Common run_c, cal_c, synth_c, cmp_c, grid_c, fisher_c;
    std::string run_out, synth_out, cmp_out = "out", scale = "risk", fisher_out;
    std::vector<double> sizes;

    auto* run = app.add_subcommand("run", "Run the full workflow and write the output tree");
    add_common(run, run_c);
    run->add_option("--out", run_out, "Output directory (overrides /output_dir)");

    auto* cal = app.add_subcommand("calibrate", "Resolve the core model and print it as JSON");
    add_common(cal, cal_c);

    auto* synth = app.add_subcommand("synth", "Synthetic cohort tools");
    synth->require_subcommand(1);
    auto* synth_export = synth->add_subcommand("export", "Write the prepared cohort with follow-up as CSV");
    add_common(synth_export, synth_c);
    synth_export->add_option("-o,--output", synth_out, "Output CSV (default stdout)");

    auto* cmp = app.add_subcommand("compare", "Fit exponential and Weibull models and compare interval widths");
    add_common(cmp, cmp_c);
    cmp->add_option("--scale", scale, "Weibull interval scale")->check(CLI::IsMember({"risk", "loglog"}));
    cmp->add_option("--out", cmp_out, "Output directory");

    auto* grid = app.add_subcommand("size-grid", "Precision aggregates over a list of sample sizes");
    add_common(grid, grid_c);
    grid->add_option("--sizes", sizes, "Sample sizes (default /sample_sizes)")->delimiter(',');

    auto* fisher = app.add_subcommand("fisher", "Unit information tools");
    fisher->require_subcommand(1);
    auto* fisher_export = fisher->add_subcommand("export", "Write the unit information matrix as JSON");
    add_common(fisher_export, fisher_c);
    fisher_export->add_option("-o,--output", fisher_out, "Output JSON (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(ErrorKind::Config);
    }

    try {
        if (*run) return cmd_run(run_c, run_out);
        if (*cal) return cmd_calibrate(cal_c);
        if (*synth_export) return cmd_synth_export(synth_c, synth_out);
        if (*cmp) return cmd_compare(cmp_c, scale, cmp_out);
        if (*grid) return cmd_size_grid(grid_c, sizes);
        if (*fisher_export) return cmd_fisher_export(fisher_c, fisher_out);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
