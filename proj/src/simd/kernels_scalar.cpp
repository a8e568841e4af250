#include "srdetect/simd/simd.hpp"

#include <cmath>

#include "log_core.hpp"

namespace srd::simd {
namespace {

using detail::log_positive;

void log_array_scalar(const double* x, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = log_positive(x[i]);
}

void beta_llr_scalar(const double* u, double* z, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double s = std::sqrt(u[i]);
        z[i] = log_positive(s / (1.0 - s));
    }
}

void beta_row_pre_scalar(const double* x, const double* w, std::size_t n, double y, double* out) {
    const double c = 1.0 + y;
    const double num = 2.0 * (c * c);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = x[i] + c;
        const double d3 = (d * d) * d;
        out[i] = (w[i] * num) / d3;
    }
}

void beta_row_post_scalar(const double* x, const double* w, std::size_t n, double y, double* out) {
    const double c = 1.0 + y;
    const double twoc = 2.0 * c;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = x[i] + c;
        const double d3 = (d * d) * d;
        out[i] = (w[i] * (x[i] * twoc)) / d3;
    }
}

// Four striped partial sums; the AVX2 variant accumulates the same stripes
// in its four lanes, so the two agree bitwise.
double log_shift_dot_scalar(const double* x, const double* w, std::size_t n, double c) {
    double acc[4] = {0.0, 0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i)
        acc[i & 3] = __builtin_fma(w[i], log_positive(c + x[i]), acc[i & 3]);
    return ((acc[0] + acc[1]) + acc[2]) + acc[3];
}

void series_walk_step_scalar(const double* u, double sign, double invk, std::size_t n,
                             double* S, double* agg_neg, double* agg_nonpos, double* agg_pos) {
    for (std::size_t i = 0; i < n; ++i) {
        const double s = std::sqrt(u[i]);
        const double z = sign * log_positive(s / (1.0 - s));
        const double Si = S[i] + z;
        S[i] = Si;
        const double neg = std::max(0.0 - Si, 0.0);
        agg_neg[i] = __builtin_fma(neg, invk, agg_neg[i]);
        if (Si <= 0.0)
            agg_nonpos[i] += invk;
        else
            agg_pos[i] += invk;
    }
}

} // namespace

const Ops& ops_scalar() {
    static const Ops table{
        &log_array_scalar,    &beta_llr_scalar,      &beta_row_pre_scalar,
        &beta_row_post_scalar, &log_shift_dot_scalar, &series_walk_step_scalar,
    };
    return table;
}

} // namespace srd::simd
