#include <iostream>

#include <CLI11.hpp>

#include "../src/cli/commands.hpp"
#include "srdetect/errors.hpp"
#include "srdetect/version.hpp"

namespace {

struct Flags {
    std::string config_path;
    std::string model, procedure, head_start, out_dir, format;
    double gamma = 0.0, threshold = 0.0, zeta = 0.0, varkappa = 0.0, x_max = 0.0;
    std::vector<double> gammas;
    std::vector<std::string> procedures, estimators;
    int grid_n = 0, parallel_width = 0, series_cap = 0;
    long long runs = 0, step_cap = 0, mc_paths = 0, nu = 0, nu_far = 0;
    std::uint64_t seed = 0;
};

void add_common_flags(CLI::App* app, Flags& f) {
    app->add_option("--config", f.config_path, "JSON config file; flags override its values");
    app->add_option("--model", f.model, "beta | gaussian[:theta] | exponential[:pre,post]");
    app->add_option("--gamma", f.gamma, "target ARL to false alarm");
    app->add_option("--threshold", f.threshold, "detection threshold A");
    app->add_option("--procedure", f.procedure, "sr | sr-r | srp");
    app->add_option("--head-start", f.head_start, "zero | mu_A | equalizer | value:<r>");
    app->add_option("--gammas", f.gammas, "gamma list for the table command")->delimiter(',');
    app->add_option("--procedures", f.procedures, "procedure list for the oc command")
        ->delimiter(',');
    app->add_option("--grid-n", f.grid_n, "quadrature nodes on [0, A]");
    app->add_option("--runs", f.runs, "Monte Carlo runs");
    app->add_option("--seed", f.seed, "master seed (required by simulate)");
    app->add_option("--step-cap", f.step_cap, "per-run step cap (0: 100*A)");
    app->add_option("--parallel-width", f.parallel_width, "worker threads (0: hardware)");
    app->add_option("--series-cap", f.series_cap, "terms kept in the overshoot series");
    app->add_option("--mc-paths", f.mc_paths, "trajectories for the overshoot series");
    app->add_option("--zeta", f.zeta, "use this zeta instead of estimating it");
    app->add_option("--varkappa", f.varkappa, "use this varkappa instead of estimating it");
    app->add_option("--x-max", f.x_max, "stationary-law window");
    app->add_option("--estimators", f.estimators, "simulate: arl,add,stadd,martingale")
        ->delimiter(',');
    app->add_option("--nu", f.nu, "changepoint for the add estimator");
    app->add_option("--nu-far", f.nu_far, "far changepoint for the stadd estimator");
    app->add_option("--out", f.out_dir, "output directory");
    app->add_option("--format", f.format, "csv | json");
}

srd::cli::RunConfig merge(const CLI::App* app, const Flags& f) {
    srd::cli::RunConfig cfg;
    if (app->count("--config")) cfg = srd::cli::load_config(f.config_path);
    if (app->count("--model")) cfg.model = f.model;
    if (app->count("--procedure")) cfg.procedure = f.procedure;
    if (app->count("--head-start")) cfg.head_start = f.head_start;
    if (app->count("--gamma")) cfg.gamma = f.gamma;
    if (app->count("--threshold")) cfg.threshold = f.threshold;
    if (app->count("--gammas")) cfg.gammas = f.gammas;
    if (app->count("--procedures")) {
        cfg.procedures = f.procedures;
        cfg.procedures_given = true;
    }
    if (app->count("--grid-n")) cfg.grid_n = f.grid_n;
    if (app->count("--runs")) cfg.runs = f.runs;
    if (app->count("--seed")) cfg.seed = f.seed;
    if (app->count("--step-cap")) cfg.step_cap = f.step_cap;
    if (app->count("--parallel-width")) cfg.parallel_width = f.parallel_width;
    if (app->count("--series-cap")) cfg.series_cap = f.series_cap;
    if (app->count("--mc-paths")) cfg.mc_paths = f.mc_paths;
    if (app->count("--zeta")) cfg.zeta = f.zeta;
    if (app->count("--varkappa")) cfg.varkappa = f.varkappa;
    if (app->count("--x-max")) cfg.x_max = f.x_max;
    if (app->count("--estimators")) cfg.estimators = f.estimators;
    if (app->count("--nu")) cfg.nu = f.nu;
    if (app->count("--nu-far")) cfg.nu_far = f.nu_far;
    if (app->count("--out")) cfg.out_dir = f.out_dir;
    if (app->count("--format")) cfg.format = f.format;
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{std::string("srdetect ") + srd::kVersion +
                 " - Shiryaev-Roberts changepoint detection toolkit"};
    app.require_subcommand(1);

    Flags flags;
    auto* calibrate = app.add_subcommand("calibrate", "find A with ARL(A) = gamma");
    auto* oc = app.add_subcommand("oc", "delay curves and summary operating characteristics");
    auto* table = app.add_subcommand("table", "exact and asymptotic characteristics per gamma");
    auto* constants = app.add_subcommand("constants", "overshoot and delay constants");
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo estimates with solver checks");
    for (auto* sub : {calibrate, oc, table, constants, simulate}) add_common_flags(sub, flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (calibrate->parsed()) return srd::cli::cmd_calibrate(merge(calibrate, flags));
        if (oc->parsed()) return srd::cli::cmd_oc(merge(oc, flags));
        if (table->parsed()) return srd::cli::cmd_table(merge(table, flags));
        if (constants->parsed()) return srd::cli::cmd_constants(merge(constants, flags));
        if (simulate->parsed()) return srd::cli::cmd_simulate(merge(simulate, flags));
    } catch (const srd::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
