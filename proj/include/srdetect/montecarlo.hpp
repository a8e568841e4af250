#ifndef SRDETECT_MONTECARLO_HPP
#define SRDETECT_MONTECARLO_HPP

#include <cstdint>

#include "srdetect/detector.hpp"

namespace srd {

// Simulation-based estimation of every operating characteristic, fully
// independent of the integral-equation solver. Per-run seeds derive from
// (seed, run index) only, so estimates are bit-identical for a fixed config
// regardless of parallel_width.
struct McConfig {
    long long n_runs = 100000;
    std::uint64_t seed = 1;
    long long step_cap = 0;   // 0: 100 * threshold (at least 1000)
    int parallel_width = 0;   // 0: hardware concurrency
};

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    long long n_runs = 0;
    long long censored = 0;  // runs truncated by the step cap (kept, reported)
    bool flagged = false;    // censored/n_runs >= 0.1%
};

// Mean stopping time on pure pre-change streams. SRP draws its head start
// from `qsd` (required for kind == srp).
McEstimate estimate_arl(const ChangepointModel& model, ProcedureKind kind, double threshold,
                        double head_start, const QuasiStationary* qsd, const McConfig& cfg);

struct AddEstimate {
    McEstimate estimate;              // conditional delay E_nu(T - nu | T > nu)
    double acceptance_fraction = 0.0; // empirical p_nu
    long long attempts = 0;
    bool low_acceptance = false;      // < 1%: prefer the integral-equation path
};

// Conditional delay at changepoint nu by rejection: streams whose run stops
// at or before nu are discarded. cfg.n_runs counts attempted streams.
AddEstimate estimate_add(const ChangepointModel& model, ProcedureKind kind, double threshold,
                         double head_start, const QuasiStationary* qsd, long long nu,
                         const McConfig& cfg);

// Multi-cyclic stationary delay: the SR procedure restarts from zero after
// every false alarm; the change enters at nu_far and the detection time of
// the first alarm past nu_far is recorded.
McEstimate estimate_stadd(const ChangepointModel& model, double threshold, long long nu_far,
                          const McConfig& cfg);

struct MartingalePair {
    McEstimate lhs;       // E_pre T
    McEstimate rhs;       // E_pre R_T - r
    double diff_mean = 0.0;
    double diff_se = 0.0; // paired standard error of lhs - rhs
};

// Optional-sampling identity E_pre T = E_pre R_T - r, checked on paired runs.
MartingalePair verify_martingale(const ChangepointModel& model, double threshold, double head_start,
                                 const McConfig& cfg);

} // namespace srd

#endif
