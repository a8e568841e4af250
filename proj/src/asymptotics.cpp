#include "srdetect/asymptotics.hpp"

#include <atomic>
#include <cmath>
#include <thread>
#include <vector>

#include "srdetect/errors.hpp"
#include "srdetect/rng.hpp"
#include "srdetect/simd/simd.hpp"

namespace srd {
namespace {

constexpr double kPi = 3.14159265358979323846;

struct WalkAggregate {
    // per-path sums over k of (1/k)-weighted statistics
    double sum_neg = 0.0, sumsq_neg = 0.0;        // max(0,-S_k) terms, post walk
    double sum_nonpos = 0.0, sumsq_nonpos = 0.0;  // 1{S_k<=0} terms, post walk
    double sum_pos = 0.0, sumsq_pos = 0.0;        // 1{S_k>0} terms, pre walk
    long long paths = 0;

    void merge(const WalkAggregate& o) {
        sum_neg += o.sum_neg;
        sumsq_neg += o.sumsq_neg;
        sum_nonpos += o.sum_nonpos;
        sumsq_nonpos += o.sumsq_nonpos;
        sum_pos += o.sum_pos;
        sumsq_pos += o.sumsq_pos;
        paths += o.paths;
    }
};

constexpr std::size_t kLanes = 256;

// Random walks S_k under one regime for paths [first, last); lanes advance
// in lockstep so the per-step transform vectorizes.
WalkAggregate walk_range_beta(bool post, int series_cap, long long first, long long last,
                              std::uint64_t seed) {
    const auto& ops = simd::ops();
    WalkAggregate agg;
    std::vector<Rng> rng(kLanes, Rng(0));
    std::vector<double> u(kLanes), S(kLanes), a_neg(kLanes), a_nonpos(kLanes), a_pos(kLanes);
    const double sign = post ? 1.0 : -1.0;
    const std::uint64_t regime_salt = post ? 0x706f7374ULL : 0x707265ULL;

    for (long long base = first; base < last; base += static_cast<long long>(kLanes)) {
        const std::size_t lanes = static_cast<std::size_t>(
            std::min<long long>(static_cast<long long>(kLanes), last - base));
        for (std::size_t l = 0; l < lanes; ++l) {
            rng[l].reseed(derive_seed(seed ^ regime_salt, static_cast<std::uint64_t>(base) + l));
            S[l] = a_neg[l] = a_nonpos[l] = a_pos[l] = 0.0;
        }
        for (int k = 1; k <= series_cap; ++k) {
            for (std::size_t l = 0; l < lanes; ++l) u[l] = rng[l].u01();
            ops.series_walk_step(u.data(), sign, 1.0 / k, lanes, S.data(), a_neg.data(),
                                 a_nonpos.data(), a_pos.data());
        }
        for (std::size_t l = 0; l < lanes; ++l) {
            agg.sum_neg += a_neg[l];
            agg.sumsq_neg += a_neg[l] * a_neg[l];
            agg.sum_nonpos += a_nonpos[l];
            agg.sumsq_nonpos += a_nonpos[l] * a_nonpos[l];
            agg.sum_pos += a_pos[l];
            agg.sumsq_pos += a_pos[l] * a_pos[l];
            ++agg.paths;
        }
    }
    return agg;
}

// Generic scalar walk for non-beta models.
WalkAggregate walk_range_generic(const ChangepointModel& model, bool post, int series_cap,
                                 long long first, long long last, std::uint64_t seed) {
    WalkAggregate agg;
    const std::uint64_t regime_salt = post ? 0x706f7374ULL : 0x707265ULL;
    for (long long p = first; p < last; ++p) {
        Rng rng(derive_seed(seed ^ regime_salt, static_cast<std::uint64_t>(p)));
        double S = 0.0, a_neg = 0.0, a_nonpos = 0.0, a_pos = 0.0;
        for (int k = 1; k <= series_cap; ++k) {
            const double x = post ? model.sample_post(rng) : model.sample_pre(rng);
            S += std::log(model.lr(x));
            const double invk = 1.0 / k;
            a_neg += std::max(0.0, -S) * invk;
            if (S <= 0.0)
                a_nonpos += invk;
            else
                a_pos += invk;
        }
        agg.sum_neg += a_neg;
        agg.sumsq_neg += a_neg * a_neg;
        agg.sum_nonpos += a_nonpos;
        agg.sumsq_nonpos += a_nonpos * a_nonpos;
        agg.sum_pos += a_pos;
        agg.sumsq_pos += a_pos * a_pos;
        ++agg.paths;
    }
    return agg;
}

WalkAggregate run_walks(const ChangepointModel& model, bool post, int series_cap, long long paths,
                        std::uint64_t seed, int threads) {
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    threads = std::max(1, std::min<int>(threads, 16));
    // fixed-size chunks on lane-block multiples, merged in chunk order, so
    // the result is independent of the thread count and scheduling
    const long long chunk = 8 * static_cast<long long>(kLanes);
    std::vector<std::pair<long long, long long>> ranges;
    for (long long lo = 0; lo < paths; lo += chunk)
        ranges.emplace_back(lo, std::min(paths, lo + chunk));

    std::vector<WalkAggregate> parts(ranges.size());
    std::atomic<std::size_t> cursor{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= ranges.size()) return;
            parts[i] = model.family == ModelFamily::beta
                           ? walk_range_beta(post, series_cap, ranges[i].first, ranges[i].second, seed)
                           : walk_range_generic(model, post, series_cap, ranges[i].first,
                                                ranges[i].second, seed);
        }
    };
    std::vector<std::thread> pool;
    for (int w = 1; w < threads; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    WalkAggregate total;
    for (const auto& p : parts) total.merge(p);
    return total;
}

struct MeanSe {
    double mean, se;
};

MeanSe mean_se(double sum, double sumsq, long long n) {
    const double mean = sum / static_cast<double>(n);
    const double var = std::max(0.0, sumsq / static_cast<double>(n) - mean * mean);
    return {mean, std::sqrt(var / static_cast<double>(n))};
}

bool is_beta(const ChangepointModel& m) { return m.family == ModelFamily::beta; }

// log(1+r+y) integrated against the c/y^2 tail on [x_max, inf):
// tail_mass * [ log(b+x)/x * x + ... ] with b = 1+r, evaluated analytically.
double log_tail_correction(double tail_mass, double x_max, double b) {
    if (tail_mass <= 0.0) return 0.0;
    const double c = tail_mass * x_max;  // density ~ c/y^2 beyond x_max
    return c * (std::log(b + x_max) / x_max + std::log1p(b / x_max) / b);
}

} // namespace

OvershootConstants overshoot_constants(const ChangepointModel& model, int series_cap,
                                       long long paths, std::uint64_t seed, int threads) {
    if (series_cap < 1000) throw ConfigError("overshoot_constants: series_cap must be >= 1000");
    if (paths < 10000) throw ConfigError("overshoot_constants: need at least 10^4 paths");
    const double I = model.kl;
    if (!(I > 0.0)) throw ConfigError("overshoot_constants: model has nonpositive KL number");

    double m2 = model.llr_moment2_post;
    if (!std::isfinite(m2)) {
        if (model.has_pdfs())
            m2 = llr_moment_post(model, 2);
        else
            throw UnsupportedModelError(
                "overshoot_constants: second moment of log Lambda is unavailable");
    }

    const WalkAggregate post = run_walks(model, true, series_cap, paths, seed, threads);
    const WalkAggregate pre = run_walks(model, false, series_cap, paths, seed, threads);

    const MeanSe neg = mean_se(post.sum_neg, post.sumsq_neg, post.paths);
    const MeanSe nonpos = mean_se(post.sum_nonpos, post.sumsq_nonpos, post.paths);
    const MeanSe pos = mean_se(pre.sum_pos, pre.sumsq_pos, pre.paths);

    OvershootConstants out;
    out.s1_mean = I;
    out.s1_second_moment = m2;
    out.series_cap = series_cap;
    out.paths = paths;
    out.seed = seed;
    out.varkappa = {m2 / (2.0 * I) - neg.mean, neg.se};
    const double expo = nonpos.mean + pos.mean;
    const double zeta = std::exp(-expo) / I;
    out.zeta = {zeta, zeta * std::hypot(nonpos.se, pos.se)};
    return out;
}

StationaryLaws stationary_laws(const ChangepointModel& model, double x_max, int grid_n) {
    StationaryLaws laws;
    laws.x_max = x_max;
    laws.grid = build_grid(x_max, grid_n);

    const DiscretizedOperator op_st = discretize_kernel(model, Regime::pre, laws.grid);
    const DiscretizedOperator op_v = discretize_v_kernel(model, laws.grid);
    const LeadingEigenpair st = leading_eigenpair(op_st);
    const LeadingEigenpair vt = leading_eigenpair(op_v);
    laws.q_st_masses = st.masses;
    laws.q_tilde_masses = vt.masses;
    laws.q_st_eigenvalue = st.eigenvalue;
    laws.q_tilde_eigenvalue = vt.eigenvalue;

    const Grid grid = laws.grid;
    laws.cdf_q_st = [grid, masses = laws.q_st_masses, lam = st.eigenvalue,
                     F = model.cdf_lr_pre](double x) {
        if (x <= 0.0) return 0.0;
        double acc = 0.0;
        for (std::size_t j = 0; j < grid.size(); ++j)
            acc += F(x / (1.0 + grid.nodes[j])) * masses[static_cast<Eigen::Index>(j)];
        return std::min(1.0, acc / lam);
    };
    laws.cdf_q_tilde = [grid, masses = laws.q_tilde_masses, lam = vt.eigenvalue,
                        F0 = model.cdf_lr_post](double x) {
        if (x <= 0.0) return 0.0;
        double acc = 0.0;
        for (std::size_t j = 0; j < grid.size(); ++j)
            acc += (1.0 - F0((1.0 + grid.nodes[j]) / x)) * masses[static_cast<Eigen::Index>(j)];
        return std::min(1.0, acc / lam);
    };

    // Mass beyond the window, from the Kesten c/x^2 tail with c estimated
    // two ways: the edge density and the mid-window cdf (the larger wins;
    // the truncated eigenfunction thins the tail, so either alone can
    // understate it).
    auto tail_estimate = [&](const Eigen::VectorXd& masses,
                             const std::function<double(double)>& cdf) {
        const std::size_t i = grid.size() - 1;
        const double c_edge = masses[static_cast<Eigen::Index>(i)] / grid.weights[i] * x_max * x_max;
        const double c_mid = 0.5 * x_max * (1.0 - cdf(0.5 * x_max));
        return std::max(c_edge, c_mid) / x_max;
    };
    laws.q_st_tail_mass = tail_estimate(laws.q_st_masses, laws.cdf_q_st);
    laws.q_tilde_tail_mass = tail_estimate(laws.q_tilde_masses, laws.cdf_q_tilde);
    if (laws.q_st_tail_mass >= 0.05 || laws.q_tilde_tail_mass >= 0.05)
        throw NumericalError("stationary_laws: tail mass beyond x_max reaches 5%; increase x_max");
    return laws;
}

double beta_c_closed_form(double r) {
    if (r < 0.0) throw ConfigError("C_r needs r >= 0");
    if (r == 0.0) return 1.0;
    return (1.0 + r) / r * std::log1p(r);
}

CValue constant_c(const ChangepointModel& model, double r, const StationaryLaws& laws) {
    if (r < 0.0) throw ConfigError("C_r needs r >= 0");
    const auto& ops = simd::ops();
    const double t = laws.q_tilde_tail_mass;
    const double quad = (1.0 - t) * ops.log_shift_dot(laws.grid.nodes.data(),
                                                      laws.q_tilde_masses.data(), laws.grid.size(),
                                                      1.0 + r) +
                        log_tail_correction(t, laws.x_max, 1.0 + r);
    if (is_beta(model)) return {beta_c_closed_form(r), quad, Provenance::closed_form};
    return {quad, quad, Provenance::quadrature};
}

CValue constant_c_infinity(const ChangepointModel& model, const StationaryLaws& laws) {
    const auto& ops = simd::ops();
    const std::size_t n = laws.grid.size();
    const double t_st = laws.q_st_tail_mass;
    const double t_v = laws.q_tilde_tail_mass;
    double quad = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double y = laws.grid.nodes[j];
        const double inner = (1.0 - t_st) * ops.log_shift_dot(laws.grid.nodes.data(),
                                                              laws.q_st_masses.data(), n, 1.0 + y) +
                             log_tail_correction(t_st, laws.x_max, 1.0 + y);
        quad += inner * laws.q_tilde_masses[static_cast<Eigen::Index>(j)];
    }
    quad *= 1.0 - t_v;
    // q_tilde tail against the inner integral, whose leading part is log(1+y)
    quad += (1.0 - t_st) * log_tail_correction(t_v, laws.x_max, 1.0);
    if (is_beta(model)) return {kPi * kPi / 6.0, quad, Provenance::closed_form};
    return {quad, quad, Provenance::quadrature};
}

double approx_arl(double threshold, double zeta, double head_start) {
    return threshold / zeta - head_start;
}

double approx_sadd_at_threshold(SaddApproxKind kind, double threshold, const ConstantsBundle& c) {
    const double corr = kind == SaddApproxKind::sr ? c.c0 : c.c_infinity;
    return (std::log(threshold) + c.varkappa - corr) / c.kl;
}

double approx_sadd_at_gamma(SaddApproxKind kind, double gamma, const ConstantsBundle& c) {
    return approx_sadd_at_threshold(kind, gamma * c.zeta, c);
}

double design_head_start_quasi_mean(const QuasiStationary& qsd) { return qsd.mean; }

double design_head_start_equalizer(const ChangepointModel& model, const StationaryLaws* laws) {
    std::function<double(double)> c_of_r;
    double c_inf;
    if (is_beta(model) && laws == nullptr) {
        c_of_r = [](double r) { return beta_c_closed_form(r); };
        c_inf = kPi * kPi / 6.0;
    } else {
        if (laws == nullptr)
            throw ConfigError("design_head_start_equalizer: non-beta models need stationary laws");
        if (is_beta(model)) {
            // quadrature route, used to cross-check the closed form
            c_of_r = [&model, laws](double r) { return constant_c(model, r, *laws).quadrature; };
            c_inf = constant_c_infinity(model, *laws).quadrature;
        } else {
            c_of_r = [&model, laws](double r) { return constant_c(model, r, *laws).value; };
            c_inf = constant_c_infinity(model, *laws).value;
        }
    }

    // C_r is increasing in r; expand the upper bracket, then bisect.
    double lo = 1e-6, hi = 4.0;
    if (c_of_r(lo) > c_inf)
        throw CalibrationError("design_head_start_equalizer: C_r exceeds C_inf at r ~ 0");
    int guard = 0;
    while (c_of_r(hi) < c_inf) {
        hi *= 2.0;
        if (++guard > 60)
            throw CalibrationError("design_head_start_equalizer: no sign change in bracket");
    }
    for (int it = 0; it < 200 && (hi - lo) > 1e-10 * (1.0 + hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        (c_of_r(mid) < c_inf ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace srd
