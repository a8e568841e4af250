#include "commands.hpp"

#include <atomic>
#include <functional>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "srdetect/asymptotics.hpp"
#include "srdetect/errors.hpp"
#include "srdetect/montecarlo.hpp"
#include "srdetect/oc.hpp"
#include "srdetect/version.hpp"

namespace srd::cli {
namespace {

std::string num6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    out << content;
}

std::string csv_preamble(const RunConfig& cfg) {
    return "# srdetect " + std::string(kVersion) + " config=" + cfg.to_json().dump() + "\n";
}

json output_header(const RunConfig& cfg) {
    json j;
    j["version"] = kVersion;
    j["config"] = cfg.to_json();
    return j;
}

ProcedureKind parse_procedure(const std::string& s) {
    if (s == "sr") return ProcedureKind::sr;
    if (s == "sr-r") return ProcedureKind::sr_r;
    if (s == "srp") return ProcedureKind::srp;
    throw ConfigError("unknown procedure '" + s + "' (expected sr, sr-r or srp)");
}

const char* argmax_name(ArgmaxKind k) {
    switch (k) {
        case ArgmaxKind::at_zero: return "at_zero";
        case ArgmaxKind::interior: return "interior";
        default: return "at_infinity";
    }
}

struct HeadStartSpec {
    bool adaptive_mu = false;  // r = mu_A, recomputed with the threshold
    double fixed_r = 0.0;
};

HeadStartSpec resolve_head_start(const RunConfig& cfg, const ChangepointModel& model) {
    const std::string& h = cfg.head_start;
    if (h == "zero") return {};
    if (h == "mu_A") return {true, 0.0};
    if (h == "equalizer") {
        if (model.family == ModelFamily::beta) return {false, design_head_start_equalizer(model)};
        const StationaryLaws laws = stationary_laws(model, cfg.x_max, cfg.grid_n);
        return {false, design_head_start_equalizer(model, &laws)};
    }
    if (h.rfind("value:", 0) == 0) {
        try {
            return {false, std::stod(h.substr(6))};
        } catch (const std::exception&) {
            throw ConfigError("bad head start '" + h + "'");
        }
    }
    throw ConfigError("unknown head start '" + h + "' (zero|mu_A|equalizer|value:<r>)");
}

CalibrationTarget make_target(ProcedureKind kind, const HeadStartSpec& hs) {
    CalibrationTarget t;
    t.kind = kind;
    t.adaptive_mu = kind == ProcedureKind::sr_r && hs.adaptive_mu;
    t.fixed_r = hs.fixed_r;
    return t;
}

// zeta for the "A ~ gamma * zeta" comparison: configured value if present,
// otherwise a quick series estimate.
struct ZetaInfo {
    double value;
    double se;
    std::string source;
};

ZetaInfo zeta_for_report(const RunConfig& cfg, const ChangepointModel& model) {
    if (cfg.zeta) return {*cfg.zeta, 0.0, "config"};
    const OvershootConstants oc =
        overshoot_constants(model, std::min(cfg.series_cap, 2000), 20000, cfg.seed.value_or(1),
                            cfg.parallel_width);
    return {oc.zeta.value, oc.zeta.std_error, "series_mc_quick"};
}

void run_jobs(std::vector<std::function<void()>> jobs, int width) {
    if (width <= 0) width = static_cast<int>(std::thread::hardware_concurrency());
    width = std::max(1, std::min<int>(width, static_cast<int>(jobs.size())));
    std::atomic<std::size_t> cursor{0};
    std::vector<std::string> errors(jobs.size());
    auto worker = [&] {
        for (;;) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= jobs.size()) return;
            try {
                jobs[i]();
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 1; w < width; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (const auto& e : errors)
        if (!e.empty()) throw NumericalError(e);
}

} // namespace

int cmd_calibrate(const RunConfig& cfg) {
    cfg.validate_common();
    if (!cfg.gamma) throw ConfigError("calibrate requires --gamma");
    const ChangepointModel model = model_by_name(cfg.model);
    const ProcedureKind kind = parse_procedure(cfg.procedure);
    const HeadStartSpec hs = resolve_head_start(cfg, model);

    CalibrateOptions opts;
    opts.grid_n = cfg.grid_n;
    const CalibrationResult res =
        calibrate_threshold(model, make_target(kind, hs), *cfg.gamma, opts);

    const ZetaInfo zeta = zeta_for_report(cfg, model);
    const double approx_A = *cfg.gamma * zeta.value;

    json j = output_header(cfg);
    j["procedure"] = cfg.procedure;
    j["gamma"] = *cfg.gamma;
    j["threshold"] = res.threshold;
    j["arl"] = res.arl;
    j["zeta"] = {{"value", zeta.value}, {"std_error", zeta.se}, {"source", zeta.source}};
    j["approx_threshold"] = approx_A;
    if (kind == ProcedureKind::sr_r)
        j["head_start"] = hs.adaptive_mu ? json("mu_A") : json(hs.fixed_r);
    write_file(std::filesystem::path(cfg.out_dir) / "calibrate.json", j.dump(2) + "\n");

    std::cout << "calibrated " << cfg.procedure << " for gamma=" << *cfg.gamma << ": A="
              << res.threshold << " (achieved ARL " << res.arl << ", design A=gamma*zeta gives "
              << approx_A << ")\n";
    if (*cfg.gamma < 2.0)
        std::cout << "warning: gamma is close to 1; the calibrated threshold is tiny and the "
                     "procedure alarms almost immediately\n";
    return 0;
}

int cmd_oc(const RunConfig& cfg) {
    cfg.validate_common();
    if (!cfg.gamma && !cfg.threshold)
        throw ConfigError("oc requires --gamma or --threshold");
    std::vector<std::string> procs = cfg.procedures;
    if (!cfg.procedures_given) procs = {"sr", "srp", "sr-r"};
    if (procs.empty()) throw ConfigError("oc: empty procedure list");

    const ChangepointModel model = model_by_name(cfg.model);
    const HeadStartSpec hs_cfg = resolve_head_start(cfg, model);

    json summary = output_header(cfg);
    summary["procedures"] = json::array();

    for (const auto& pname : procs) {
        const ProcedureKind kind = parse_procedure(pname);
        // sr-r defaults to the quasi-stationary mean unless a head start
        // was asked for explicitly
        const HeadStartSpec hs =
            kind == ProcedureKind::sr_r && cfg.head_start == "zero" ? HeadStartSpec{true, 0.0}
                                                                    : hs_cfg;
        double A;
        if (cfg.gamma) {
            CalibrateOptions opts;
            opts.grid_n = cfg.grid_n;
            A = calibrate_threshold(model, make_target(kind, hs), *cfg.gamma, opts).threshold;
        } else {
            A = *cfg.threshold;
        }

        OcSolver solver(model, A, cfg.grid_n);
        double r = 0.0;
        if (kind == ProcedureKind::sr_r)
            r = hs.adaptive_mu ? solver.quasi_stationary().mean : hs.fixed_r;
        const OcResult res = solver.analyze(kind, r);

        json p;
        p["procedure"] = pname;
        p["threshold"] = A;
        p["head_start"] = res.head_start;
        p["arl"] = res.arl_false_alarm;
        p["sadd"] = res.sadd;
        p["add_infinity"] = res.add_infinity;
        p["argmax_kind"] = argmax_name(res.argmax_kind);
        if (res.lower_bound) p["lower_bound"] = *res.lower_bound;
        if (cfg.format == "json") {
            p["delay_curve"] = res.delay_curve;
            p["survival"] = res.survival;
        }
        summary["procedures"].push_back(p);

        std::string csv = csv_preamble(cfg);
        csv += "procedure,nu,conditional_delay,survival\n";
        for (std::size_t i = 0; i < res.delay_curve.size(); ++i)
            csv += pname + "," + std::to_string(i) + "," + num6(res.delay_curve[i]) + "," +
                   num6(res.survival[i]) + "\n";
        if (cfg.format == "csv")
            write_file(std::filesystem::path(cfg.out_dir) / ("oc_" + pname + ".csv"), csv);
    }
    write_file(std::filesystem::path(cfg.out_dir) / "oc_summary.json", summary.dump(2) + "\n");
    std::cout << "oc: wrote " << (cfg.format == "csv" ? "per-procedure CSV curves and " : "")
              << "oc_summary.json for " << procs.size() << " procedure(s) under " << cfg.out_dir
              << "\n";
    return 0;
}

namespace {

struct TableRow {
    double gamma = 0.0;
    std::string procedure;
    double threshold = 0.0;
    double head_start = 0.0;
    double arl = 0.0, arl_approx = 0.0;
    double sadd = 0.0, sadd_approx = 0.0;
};

} // namespace

int cmd_table(const RunConfig& cfg) {
    cfg.validate_common();
    const ChangepointModel model = model_by_name(cfg.model);

    // Constants for the parenthesized predictions: configured values win,
    // otherwise the full series estimator at the configured scale.
    double zeta, varkappa, zeta_se = 0.0, varkappa_se = 0.0;
    if (cfg.zeta && cfg.varkappa) {
        zeta = *cfg.zeta;
        varkappa = *cfg.varkappa;
    } else {
        const OvershootConstants oc = overshoot_constants(model, cfg.series_cap, cfg.mc_paths,
                                                          cfg.seed.value_or(1), cfg.parallel_width);
        zeta = cfg.zeta.value_or(oc.zeta.value);
        varkappa = cfg.varkappa.value_or(oc.varkappa.value);
        zeta_se = oc.zeta.std_error;
        varkappa_se = oc.varkappa.std_error;
    }
    ConstantsBundle bundle;
    bundle.zeta = zeta;
    bundle.varkappa = varkappa;
    bundle.kl = model.kl;
    if (model.family == ModelFamily::beta) {
        bundle.c0 = 1.0;
        bundle.c_infinity = 1.6449340668482264;  // pi^2/6
    } else {
        const StationaryLaws laws = stationary_laws(model, cfg.x_max, cfg.grid_n);
        bundle.c0 = constant_c(model, 0.0, laws).value;
        bundle.c_infinity = constant_c_infinity(model, laws).value;
    }

    struct GammaBlock {
        std::vector<TableRow> rows;
        double lower_bound = 0.0, lower_bound_approx = 0.0;
    };
    std::vector<GammaBlock> blocks(cfg.gammas.size());

    std::vector<std::function<void()>> jobs;
    for (std::size_t gi = 0; gi < cfg.gammas.size(); ++gi) {
        jobs.emplace_back([&, gi] {
            const double gamma = cfg.gammas[gi];
            GammaBlock block;
            CalibrateOptions opts;
            opts.grid_n = cfg.grid_n;

            // SR
            {
                const CalibrationResult cal =
                    calibrate_threshold(model, {ProcedureKind::sr, 0.0, false}, gamma, opts);
                OcSolver solver(model, cal.threshold, cfg.grid_n);
                const OcResult res = solver.analyze(ProcedureKind::sr, 0.0);
                block.rows.push_back({gamma, "sr", cal.threshold, 0.0, res.arl_false_alarm,
                                      approx_arl(cal.threshold, zeta, 0.0), res.sadd,
                                      approx_sadd_at_gamma(SaddApproxKind::sr, gamma, bundle)});
                block.lower_bound = *res.lower_bound;
                block.lower_bound_approx =
                    approx_sadd_at_gamma(SaddApproxKind::lower_bound, gamma, bundle);
            }
            // SRP
            {
                const CalibrationResult cal =
                    calibrate_threshold(model, {ProcedureKind::srp, 0.0, false}, gamma, opts);
                OcSolver solver(model, cal.threshold, cfg.grid_n);
                const OcResult res = solver.analyze(ProcedureKind::srp, 0.0);
                block.rows.push_back({gamma, "srp", cal.threshold, res.head_start,
                                      res.arl_false_alarm,
                                      approx_arl(cal.threshold, zeta, res.head_start), res.sadd,
                                      approx_sadd_at_gamma(SaddApproxKind::srp, gamma, bundle)});
            }
            // SR-r with r = mu_A
            {
                const CalibrationResult cal =
                    calibrate_threshold(model, {ProcedureKind::sr_r, 0.0, true}, gamma, opts);
                OcSolver solver(model, cal.threshold, cfg.grid_n);
                const double r = solver.quasi_stationary().mean;
                const OcResult res = solver.analyze(ProcedureKind::sr_r, r);
                block.rows.push_back(
                    {gamma, "sr-r", cal.threshold, r, res.arl_false_alarm,
                     approx_arl(cal.threshold, zeta, r), res.sadd,
                     approx_sadd_at_gamma(SaddApproxKind::sr_r_designed, gamma, bundle)});
            }
            blocks[gi] = std::move(block);
        });
    }
    run_jobs(std::move(jobs), cfg.parallel_width);

    std::string csv = csv_preamble(cfg);
    csv += "gamma,procedure,threshold,head_start,arl,arl_approx,sadd,sadd_approx\n";
    json j = output_header(cfg);
    j["constants"] = {{"zeta", zeta},
                      {"zeta_std_error", zeta_se},
                      {"varkappa", varkappa},
                      {"varkappa_std_error", varkappa_se},
                      {"c0", bundle.c0},
                      {"c_infinity", bundle.c_infinity}};
    j["rows"] = json::array();
    for (std::size_t gi = 0; gi < blocks.size(); ++gi) {
        for (const auto& r : blocks[gi].rows) {
            csv += num6(r.gamma) + "," + r.procedure + "," + num6(r.threshold) + "," +
                   num6(r.head_start) + "," + num6(r.arl) + "," + num6(r.arl_approx) + "," +
                   num6(r.sadd) + "," + num6(r.sadd_approx) + "\n";
            j["rows"].push_back({{"gamma", r.gamma},
                                 {"procedure", r.procedure},
                                 {"threshold", r.threshold},
                                 {"head_start", r.head_start},
                                 {"arl", r.arl},
                                 {"arl_approx", r.arl_approx},
                                 {"sadd", r.sadd},
                                 {"sadd_approx", r.sadd_approx}});
        }
        csv += num6(cfg.gammas[gi]) + ",lower_bound,,,,," + num6(blocks[gi].lower_bound) + "," +
               num6(blocks[gi].lower_bound_approx) + "\n";
        j["rows"].push_back({{"gamma", cfg.gammas[gi]},
                             {"procedure", "lower_bound"},
                             {"sadd", blocks[gi].lower_bound},
                             {"sadd_approx", blocks[gi].lower_bound_approx}});
    }
    write_file(std::filesystem::path(cfg.out_dir) / "table.csv", csv);
    write_file(std::filesystem::path(cfg.out_dir) / "table.json", j.dump(2) + "\n");
    std::cout << "table: wrote table.csv and table.json under " << cfg.out_dir << " ("
              << cfg.gammas.size() << " gamma values)\n";
    return 0;
}

int cmd_constants(const RunConfig& cfg) {
    cfg.validate_common();
    const ChangepointModel model = model_by_name(cfg.model);

    const OvershootConstants oc = overshoot_constants(model, cfg.series_cap, cfg.mc_paths,
                                                      cfg.seed.value_or(1), cfg.parallel_width);
    const StationaryLaws laws = stationary_laws(model, cfg.x_max, cfg.grid_n);
    const CValue c0 = constant_c(model, 0.0, laws);
    const CValue cinf = constant_c_infinity(model, laws);

    json j = output_header(cfg);
    j["kl"] = {{"value", model.kl}, {"exact", model.kl_exact}};
    j["zeta"] = {{"value", oc.zeta.value},
                 {"std_error", oc.zeta.std_error},
                 {"provenance", "series_mc"},
                 {"series_cap", oc.series_cap},
                 {"paths", oc.paths}};
    j["varkappa"] = {{"value", oc.varkappa.value},
                     {"std_error", oc.varkappa.std_error},
                     {"provenance", "series_mc"}};
    j["s1_mean"] = oc.s1_mean;
    j["s1_second_moment"] = oc.s1_second_moment;
    auto cval = [](const CValue& c) {
        return json{{"value", c.value},
                    {"quadrature", c.quadrature},
                    {"provenance", c.provenance == Provenance::closed_form ? "closed_form"
                                                                           : "quadrature"}};
    };
    j["c0"] = cval(c0);
    j["c_infinity"] = cval(cinf);

    j["head_start_equalizer"] = design_head_start_equalizer(
        model, model.family == ModelFamily::beta ? nullptr : &laws);
    if (model.family == ModelFamily::beta)
        j["head_start_equalizer_quadrature"] = design_head_start_equalizer(model, &laws);

    j["stationary_laws"] = {{"x_max", laws.x_max},
                            {"q_st_eigenvalue", laws.q_st_eigenvalue},
                            {"q_tilde_eigenvalue", laws.q_tilde_eigenvalue},
                            {"q_st_tail_mass", laws.q_st_tail_mass},
                            {"q_tilde_tail_mass", laws.q_tilde_tail_mass}};
    if (model.family == ModelFamily::beta) {
        double sup_st = 0.0, sup_vt = 0.0;
        for (int i = 0; i <= 400; ++i) {
            const double x = laws.x_max / 2.0 * i / 400.0;
            const double ref = x / (1.0 + x);
            sup_st = std::max(sup_st, std::abs(laws.cdf_q_st(x) - ref));
            sup_vt = std::max(sup_vt, std::abs(laws.cdf_q_tilde(x) - ref));
        }
        j["stationary_laws"]["sup_error_vs_closed_form_q_st"] = sup_st;
        j["stationary_laws"]["sup_error_vs_closed_form_q_tilde"] = sup_vt;
    }

    // mu_A against log A over decades of A
    j["quasi_stationary_mean"] = json::array();
    for (double A : {10.0, 100.0, 1000.0, 10000.0}) {
        OcSolver solver(model, A, cfg.grid_n);
        const double mu = solver.quasi_stationary().mean;
        j["quasi_stationary_mean"].push_back(
            {{"threshold", A}, {"mu", mu}, {"log_threshold", std::log(A)},
             {"mu_minus_log", mu - std::log(A)}});
    }

    write_file(std::filesystem::path(cfg.out_dir) / "constants.json", j.dump(2) + "\n");
    std::cout << "constants: zeta=" << oc.zeta.value << " (se " << oc.zeta.std_error
              << "), varkappa=" << oc.varkappa.value << " (se " << oc.varkappa.std_error
              << "); wrote constants.json under " << cfg.out_dir << "\n";
    return 0;
}

int cmd_simulate(const RunConfig& cfg) {
    cfg.validate_common();
    if (!cfg.seed)
        throw ConfigError("simulate requires an explicit seed (no silent nondeterminism)");
    if (!cfg.gamma && !cfg.threshold)
        throw ConfigError("simulate requires --gamma or --threshold");
    const ChangepointModel model = model_by_name(cfg.model);
    const ProcedureKind kind = parse_procedure(cfg.procedure);
    const HeadStartSpec hs = resolve_head_start(cfg, model);

    double A;
    if (cfg.threshold) {
        A = *cfg.threshold;
    } else {
        CalibrateOptions opts;
        opts.grid_n = cfg.grid_n;
        A = calibrate_threshold(model, make_target(kind, hs), *cfg.gamma, opts).threshold;
    }

    OcSolver solver(model, A, cfg.grid_n);
    const double r = kind == ProcedureKind::sr   ? 0.0
                     : hs.adaptive_mu            ? solver.quasi_stationary().mean
                                                 : hs.fixed_r;
    const QuasiStationary* qsd =
        kind == ProcedureKind::srp ? &solver.quasi_stationary() : nullptr;

    McConfig mc;
    mc.n_runs = cfg.runs;
    mc.seed = *cfg.seed;
    mc.step_cap = cfg.step_cap;
    mc.parallel_width = cfg.parallel_width;

    json j = output_header(cfg);
    j["threshold"] = A;
    j["procedure"] = cfg.procedure;
    j["head_start"] = r;
    j["estimates"] = json::object();

    auto emit = [&](const char* key, const McEstimate& e, double solver_value) {
        json out = {{"mean", e.mean},
                    {"std_error", e.std_error},
                    {"n_runs", e.n_runs},
                    {"censored", e.censored},
                    {"flagged", e.flagged},
                    {"solver", solver_value}};
        if (e.std_error > 0.0) out["z_score"] = (e.mean - solver_value) / e.std_error;
        j["estimates"][key] = out;
    };

    for (const auto& est : cfg.estimators) {
        if (est == "arl") {
            emit("arl", estimate_arl(model, kind, A, r, qsd, mc),
                 kind == ProcedureKind::srp ? solver.srp_arl() : solver.arl(r));
        } else if (est == "add") {
            const AddEstimate add = estimate_add(model, kind, A, r, qsd, cfg.nu, mc);
            double ref;
            if (kind == ProcedureKind::srp) {
                ref = solver.srp_sadd();
            } else {
                const DelayCurve c = solver.delay_curve(r, std::max<int>(8, cfg.nu + 1));
                ref = cfg.nu < static_cast<long long>(c.delay.size())
                          ? c.delay[static_cast<std::size_t>(cfg.nu)]
                          : c.tail;
            }
            emit("add", add.estimate, ref);
            j["estimates"]["add"]["nu"] = cfg.nu;
            j["estimates"]["add"]["acceptance_fraction"] = add.acceptance_fraction;
            j["estimates"]["add"]["low_acceptance"] = add.low_acceptance;
        } else if (est == "stadd") {
            emit("stadd", estimate_stadd(model, A, cfg.nu_far, mc), solver.lower_bound());
            j["estimates"]["stadd"]["nu_far"] = cfg.nu_far;
        } else if (est == "martingale") {
            const MartingalePair m = verify_martingale(model, A, r, mc);
            j["estimates"]["martingale"] = {
                {"mean_stop_time", m.lhs.mean},
                {"mean_stopped_statistic_minus_r", m.rhs.mean},
                {"diff_mean", m.diff_mean},
                {"diff_std_error", m.diff_se},
                {"z_score", m.diff_se > 0.0 ? m.diff_mean / m.diff_se : 0.0},
                {"n_runs", m.lhs.n_runs}};
        } else {
            throw ConfigError("unknown estimator '" + est +
                              "' (expected arl, add, stadd or martingale)");
        }
    }

    write_file(std::filesystem::path(cfg.out_dir) / "simulate.json", j.dump(2) + "\n");
    std::cout << "simulate: wrote simulate.json under " << cfg.out_dir << "\n";
    return 0;
}

} // namespace srd::cli
