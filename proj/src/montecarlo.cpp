#include "srdetect/montecarlo.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <thread>
#include <vector>

#include "srdetect/errors.hpp"

namespace srd {
namespace {

long long effective_cap(const McConfig& cfg, double threshold) {
    if (cfg.step_cap > 0) return cfg.step_cap;
    return std::max<long long>(1000, static_cast<long long>(100.0 * threshold));
}

// Likelihood-ratio streams with the changepoint after observation nu
// (nu = none for pure pre-change). The beta stream inlines the sampler and
// ratio; the generic one goes through the model callbacks.
constexpr long long kNoChange = std::numeric_limits<long long>::max();

struct BetaLambdaStream {
    Rng rng;
    long long nu = kNoChange;
    long long t = 0;

    BetaLambdaStream(std::uint64_t seed, long long change_at) : rng(seed), nu(change_at) {}
    double r0_draw(const QuasiStationary& qsd) { return sample_head_start(qsd, rng); }
    double next() {
        ++t;
        const double s = std::sqrt(rng.u01());
        const double x = (t <= nu) ? s : 1.0 - s;
        return 1.0 / x - 1.0;
    }
};

struct GenericLambdaStream {
    const ChangepointModel* model;
    Rng rng;
    long long nu = kNoChange;
    long long t = 0;

    GenericLambdaStream(const ChangepointModel& m, std::uint64_t seed, long long change_at)
        : model(&m), rng(seed), nu(change_at) {}
    double r0_draw(const QuasiStationary& qsd) { return sample_head_start(qsd, rng); }
    double next() {
        ++t;
        const double x = (t <= nu) ? model->sample_pre(rng) : model->sample_post(rng);
        return model->lr(x);
    }
};

struct RunStat {
    double t = 0.0;
    double r_final = 0.0;
    bool censored = false;
};

template <class Stream>
RunStat one_run(double threshold, double head_start, long long cap, Stream& s) {
    Detector det(threshold, head_start);
    for (long long t = 1; t <= cap; ++t) {
        if (det.push_lr(s.next()))
            return {static_cast<double>(t), det.state().statistic, false};
    }
    return {static_cast<double>(cap), det.state().statistic, true};
}

// Accumulators per fixed-size chunk of run indices; chunks are combined in
// index order after the join, so sums do not depend on scheduling.
struct ChunkStat {
    double sum = 0.0, sumsq = 0.0;
    double sum_b = 0.0, sumsq_b = 0.0;   // secondary series (martingale rhs)
    double sum_d = 0.0, sumsq_d = 0.0;   // paired differences
    long long n = 0, censored = 0, accepted = 0;
};

constexpr long long kChunk = 4096;

template <class PerRun>
std::vector<ChunkStat> parallel_chunks(long long n_runs, int width, PerRun per_run) {
    if (width <= 0) width = static_cast<int>(std::thread::hardware_concurrency());
    width = std::max(1, std::min(width, 32));
    const long long chunks = (n_runs + kChunk - 1) / kChunk;
    std::vector<ChunkStat> stats(static_cast<std::size_t>(chunks));
    std::atomic<long long> cursor{0};
    auto worker = [&] {
        for (;;) {
            const long long c = cursor.fetch_add(1);
            if (c >= chunks) return;
            const long long lo = c * kChunk;
            const long long hi = std::min(n_runs, lo + kChunk);
            for (long long i = lo; i < hi; ++i) per_run(i, stats[static_cast<std::size_t>(c)]);
        }
    };
    std::vector<std::thread> pool;
    for (int w = 1; w < width; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    return stats;
}

McEstimate finish(const std::vector<ChunkStat>& stats) {
    double sum = 0.0, sumsq = 0.0;
    long long n = 0, censored = 0;
    for (const auto& s : stats) {
        sum += s.sum;
        sumsq += s.sumsq;
        n += s.n;
        censored += s.censored;
    }
    McEstimate e;
    e.n_runs = n;
    e.censored = censored;
    if (n > 0) {
        e.mean = sum / static_cast<double>(n);
        const double var = std::max(0.0, sumsq / static_cast<double>(n) - e.mean * e.mean);
        e.std_error = std::sqrt(var / static_cast<double>(n));
    }
    e.flagged = n > 0 && static_cast<double>(censored) >= 1e-3 * static_cast<double>(n);
    return e;
}

template <class Stream, class MakeStream>
McEstimate arl_impl(ProcedureKind kind, double threshold, double head_start,
                    const QuasiStationary* qsd, const McConfig& cfg, MakeStream make_stream) {
    if (kind == ProcedureKind::srp) {
        if (qsd == nullptr) throw ConfigError("estimate_arl: SRP needs a quasi-stationary law");
        if (std::abs(qsd->threshold - threshold) > 1e-9 * std::max(1.0, threshold))
            throw ConfigError("estimate_arl: quasi-stationary law belongs to a different threshold");
    }
    const long long cap = effective_cap(cfg, threshold);
    auto per_run = [&](long long idx, ChunkStat& st) {
        Stream s = make_stream(derive_seed(cfg.seed, static_cast<std::uint64_t>(idx)), kNoChange);
        const double r0 = kind == ProcedureKind::srp ? s.r0_draw(*qsd)
                          : kind == ProcedureKind::sr ? 0.0
                                                      : head_start;
        const RunStat r = one_run(threshold, r0, cap, s);
        st.sum += r.t;
        st.sumsq += r.t * r.t;
        ++st.n;
        if (r.censored) ++st.censored;
    };
    return finish(parallel_chunks(cfg.n_runs, cfg.parallel_width, per_run));
}

} // namespace

McEstimate estimate_arl(const ChangepointModel& model, ProcedureKind kind, double threshold,
                        double head_start, const QuasiStationary* qsd, const McConfig& cfg) {
    if (model.family == ModelFamily::beta)
        return arl_impl<BetaLambdaStream>(kind, threshold, head_start, qsd, cfg,
                                          [](std::uint64_t s, long long nu) {
                                              return BetaLambdaStream(s, nu);
                                          });
    return arl_impl<GenericLambdaStream>(kind, threshold, head_start, qsd, cfg,
                                         [&model](std::uint64_t s, long long nu) {
                                             return GenericLambdaStream(model, s, nu);
                                         });
}

namespace {

template <class Stream, class MakeStream>
AddEstimate add_impl(ProcedureKind kind, double threshold, double head_start,
                     const QuasiStationary* qsd, long long nu, const McConfig& cfg,
                     MakeStream make_stream) {
    if (nu < 0) throw ConfigError("estimate_add: nu must be nonnegative");
    if (kind == ProcedureKind::srp && qsd == nullptr)
        throw ConfigError("estimate_add: SRP needs a quasi-stationary law");
    const long long cap = nu + effective_cap(cfg, threshold);
    auto per_run = [&](long long idx, ChunkStat& st) {
        Stream s = make_stream(derive_seed(cfg.seed, static_cast<std::uint64_t>(idx)), nu);
        const double r0 = kind == ProcedureKind::srp ? s.r0_draw(*qsd)
                          : kind == ProcedureKind::sr ? 0.0
                                                      : head_start;
        const RunStat r = one_run(threshold, r0, cap, s);
        ++st.n;  // attempts
        if (!r.censored && r.t <= static_cast<double>(nu)) return;  // false alarm: discarded
        ++st.accepted;
        const double delay = r.t - static_cast<double>(nu);
        st.sum += delay;
        st.sumsq += delay * delay;
        if (r.censored) ++st.censored;
    };
    const auto stats = parallel_chunks(cfg.n_runs, cfg.parallel_width, per_run);

    AddEstimate out;
    double sum = 0.0, sumsq = 0.0;
    long long accepted = 0, attempts = 0, censored = 0;
    for (const auto& s : stats) {
        sum += s.sum;
        sumsq += s.sumsq;
        accepted += s.accepted;
        attempts += s.n;
        censored += s.censored;
    }
    out.attempts = attempts;
    out.estimate.n_runs = accepted;
    out.estimate.censored = censored;
    if (accepted > 0) {
        out.estimate.mean = sum / static_cast<double>(accepted);
        const double var =
            std::max(0.0, sumsq / static_cast<double>(accepted) - out.estimate.mean * out.estimate.mean);
        out.estimate.std_error = std::sqrt(var / static_cast<double>(accepted));
    }
    out.estimate.flagged =
        accepted > 0 && static_cast<double>(censored) >= 1e-3 * static_cast<double>(accepted);
    out.acceptance_fraction =
        attempts > 0 ? static_cast<double>(accepted) / static_cast<double>(attempts) : 0.0;
    out.low_acceptance = out.acceptance_fraction < 0.01;
    return out;
}

} // namespace

AddEstimate estimate_add(const ChangepointModel& model, ProcedureKind kind, double threshold,
                         double head_start, const QuasiStationary* qsd, long long nu,
                         const McConfig& cfg) {
    if (model.family == ModelFamily::beta)
        return add_impl<BetaLambdaStream>(kind, threshold, head_start, qsd, nu, cfg,
                                          [](std::uint64_t s, long long change_at) {
                                              return BetaLambdaStream(s, change_at);
                                          });
    return add_impl<GenericLambdaStream>(kind, threshold, head_start, qsd, nu, cfg,
                                         [&model](std::uint64_t s, long long change_at) {
                                             return GenericLambdaStream(model, s, change_at);
                                         });
}

namespace {

template <class Stream, class MakeStream>
McEstimate stadd_impl(double threshold, long long nu_far, const McConfig& cfg,
                      MakeStream make_stream) {
    if (nu_far < 0) throw ConfigError("estimate_stadd: nu_far must be nonnegative");
    const long long cap = nu_far + effective_cap(cfg, threshold);
    auto per_run = [&](long long idx, ChunkStat& st) {
        Stream s = make_stream(derive_seed(cfg.seed, static_cast<std::uint64_t>(idx)), nu_far);
        Detector det(threshold, 0.0);
        double value = 0.0;
        bool censored = true;
        for (long long t = 1; t <= cap; ++t) {
            if (det.push_lr(s.next())) {
                if (t > nu_far) {
                    value = static_cast<double>(t - nu_far);
                    censored = false;
                    break;
                }
                det.reset(0.0);  // false alarm: restart the multicyclic procedure
            }
        }
        if (censored) value = static_cast<double>(cap > nu_far ? cap - nu_far : 0);
        st.sum += value;
        st.sumsq += value * value;
        ++st.n;
        if (censored) ++st.censored;
    };
    return finish(parallel_chunks(cfg.n_runs, cfg.parallel_width, per_run));
}

} // namespace

McEstimate estimate_stadd(const ChangepointModel& model, double threshold, long long nu_far,
                          const McConfig& cfg) {
    if (model.family == ModelFamily::beta)
        return stadd_impl<BetaLambdaStream>(threshold, nu_far, cfg,
                                            [](std::uint64_t s, long long change_at) {
                                                return BetaLambdaStream(s, change_at);
                                            });
    return stadd_impl<GenericLambdaStream>(threshold, nu_far, cfg,
                                           [&model](std::uint64_t s, long long change_at) {
                                               return GenericLambdaStream(model, s, change_at);
                                           });
}

namespace {

template <class Stream, class MakeStream>
MartingalePair martingale_impl(double threshold, double head_start, const McConfig& cfg,
                               MakeStream make_stream) {
    const long long cap = effective_cap(cfg, threshold);
    auto per_run = [&](long long idx, ChunkStat& st) {
        Stream s = make_stream(derive_seed(cfg.seed, static_cast<std::uint64_t>(idx)), kNoChange);
        const RunStat r = one_run(threshold, head_start, cap, s);
        const double b = r.r_final - head_start;
        const double d = r.t - b;
        st.sum += r.t;
        st.sumsq += r.t * r.t;
        st.sum_b += b;
        st.sumsq_b += b * b;
        st.sum_d += d;
        st.sumsq_d += d * d;
        ++st.n;
        if (r.censored) ++st.censored;
    };
    const auto stats = parallel_chunks(cfg.n_runs, cfg.parallel_width, per_run);

    double sum = 0, sumsq = 0, sumb = 0, sumsqb = 0, sumd = 0, sumdsq = 0;
    long long n = 0, censored = 0;
    for (const auto& s : stats) {
        sum += s.sum;
        sumsq += s.sumsq;
        sumb += s.sum_b;
        sumsqb += s.sumsq_b;
        sumd += s.sum_d;
        sumdsq += s.sumsq_d;
        n += s.n;
        censored += s.censored;
    }
    auto make = [n, censored](double s, double ss) {
        McEstimate e;
        e.n_runs = n;
        e.censored = censored;
        e.mean = s / static_cast<double>(n);
        const double var = std::max(0.0, ss / static_cast<double>(n) - e.mean * e.mean);
        e.std_error = std::sqrt(var / static_cast<double>(n));
        e.flagged = static_cast<double>(censored) >= 1e-3 * static_cast<double>(n);
        return e;
    };
    MartingalePair out;
    out.lhs = make(sum, sumsq);
    out.rhs = make(sumb, sumsqb);
    out.diff_mean = sumd / static_cast<double>(n);
    const double dvar =
        std::max(0.0, sumdsq / static_cast<double>(n) - out.diff_mean * out.diff_mean);
    out.diff_se = std::sqrt(dvar / static_cast<double>(n));
    return out;
}

} // namespace

MartingalePair verify_martingale(const ChangepointModel& model, double threshold, double head_start,
                                 const McConfig& cfg) {
    if (model.family == ModelFamily::beta)
        return martingale_impl<BetaLambdaStream>(threshold, head_start, cfg,
                                                 [](std::uint64_t s, long long nu) {
                                                     return BetaLambdaStream(s, nu);
                                                 });
    return martingale_impl<GenericLambdaStream>(threshold, head_start, cfg,
                                                [&model](std::uint64_t s, long long nu) {
                                                    return GenericLambdaStream(model, s, nu);
                                                });
}

} // namespace srd
