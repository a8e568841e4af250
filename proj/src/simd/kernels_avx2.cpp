// AVX2+FMA variants of the hot kernels. Compiled with -mavx2 -mfma only in
// this translation unit; entered solely through the dispatch table after a
// runtime CPU check.

#include "srdetect/simd/simd.hpp"

#if defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

#include <cmath>

#include "log_core.hpp"

namespace srd::simd {
namespace {

using detail::log_positive;

inline __m256d log_pd(__m256d x) {
    const __m256i bits = _mm256_castpd_si256(x);
    const __m256i tmp = _mm256_sub_epi64(bits, _mm256_set1_epi64x(static_cast<long long>(detail::kSqrtHalfBits)));

    // exponent = (int64)tmp >> 52, emulated (AVX2 has no 64-bit arithmetic shift)
    __m256i e12 = _mm256_srli_epi64(tmp, 52);
    e12 = _mm256_sub_epi64(_mm256_xor_si256(e12, _mm256_set1_epi64x(0x800)), _mm256_set1_epi64x(0x800));
    const __m256i packed = _mm256_permutevar8x32_epi32(e12, _mm256_setr_epi32(0, 2, 4, 6, 0, 0, 0, 0));
    const __m256d e = _mm256_cvtepi32_pd(_mm256_castsi256_si128(packed));

    const __m256i mbits = _mm256_add_epi64(_mm256_and_si256(tmp, _mm256_set1_epi64x(static_cast<long long>(detail::kMantissaMask))),
                                           _mm256_set1_epi64x(static_cast<long long>(detail::kSqrtHalfBits)));
    const __m256d m = _mm256_castsi256_pd(mbits);

    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d r = _mm256_div_pd(_mm256_sub_pd(m, one), _mm256_add_pd(m, one));
    const __m256d t = _mm256_mul_pd(r, r);

    __m256d p = _mm256_set1_pd(detail::kC17);
    p = _mm256_fmadd_pd(t, p, _mm256_set1_pd(detail::kC15));
    p = _mm256_fmadd_pd(t, p, _mm256_set1_pd(detail::kC13));
    p = _mm256_fmadd_pd(t, p, _mm256_set1_pd(detail::kC11));
    p = _mm256_fmadd_pd(t, p, _mm256_set1_pd(detail::kC9));
    p = _mm256_fmadd_pd(t, p, _mm256_set1_pd(detail::kC7));
    p = _mm256_fmadd_pd(t, p, _mm256_set1_pd(detail::kC5));
    p = _mm256_fmadd_pd(t, p, _mm256_set1_pd(detail::kC3));
    p = _mm256_mul_pd(p, t);

    const __m256d w = _mm256_add_pd(r, r);
    const __m256d base = _mm256_fmadd_pd(e, _mm256_set1_pd(detail::kLn2Hi), w);
    return _mm256_fmadd_pd(w, p, _mm256_fmadd_pd(e, _mm256_set1_pd(detail::kLn2Lo), base));
}

void log_array_avx2(const double* x, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, log_pd(_mm256_loadu_pd(x + i)));
    for (; i < n; ++i) out[i] = log_positive(x[i]);
}

void beta_llr_avx2(const double* u, double* z, std::size_t n) {
    const __m256d one = _mm256_set1_pd(1.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d s = _mm256_sqrt_pd(_mm256_loadu_pd(u + i));
        _mm256_storeu_pd(z + i, log_pd(_mm256_div_pd(s, _mm256_sub_pd(one, s))));
    }
    for (; i < n; ++i) {
        const double s = std::sqrt(u[i]);
        z[i] = log_positive(s / (1.0 - s));
    }
}

void beta_row_pre_avx2(const double* x, const double* w, std::size_t n, double y, double* out) {
    const double c = 1.0 + y;
    const double num = 2.0 * (c * c);
    const __m256d vc = _mm256_set1_pd(c);
    const __m256d vnum = _mm256_set1_pd(num);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_add_pd(_mm256_loadu_pd(x + i), vc);
        const __m256d d3 = _mm256_mul_pd(_mm256_mul_pd(d, d), d);
        const __m256d wn = _mm256_mul_pd(_mm256_loadu_pd(w + i), vnum);
        _mm256_storeu_pd(out + i, _mm256_div_pd(wn, d3));
    }
    for (; i < n; ++i) {
        const double d = x[i] + c;
        const double d3 = (d * d) * d;
        out[i] = (w[i] * num) / d3;
    }
}

void beta_row_post_avx2(const double* x, const double* w, std::size_t n, double y, double* out) {
    const double c = 1.0 + y;
    const double twoc = 2.0 * c;
    const __m256d vc = _mm256_set1_pd(c);
    const __m256d vtwoc = _mm256_set1_pd(twoc);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d xi = _mm256_loadu_pd(x + i);
        const __m256d d = _mm256_add_pd(xi, vc);
        const __m256d d3 = _mm256_mul_pd(_mm256_mul_pd(d, d), d);
        const __m256d wn = _mm256_mul_pd(_mm256_loadu_pd(w + i), _mm256_mul_pd(xi, vtwoc));
        _mm256_storeu_pd(out + i, _mm256_div_pd(wn, d3));
    }
    for (; i < n; ++i) {
        const double d = x[i] + c;
        const double d3 = (d * d) * d;
        out[i] = (w[i] * (x[i] * twoc)) / d3;
    }
}

double log_shift_dot_avx2(const double* x, const double* w, std::size_t n, double c) {
    const __m256d vc = _mm256_set1_pd(c);
    __m256d vacc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d lg = log_pd(_mm256_add_pd(vc, _mm256_loadu_pd(x + i)));
        vacc = _mm256_fmadd_pd(_mm256_loadu_pd(w + i), lg, vacc);
    }
    alignas(32) double acc[4];
    _mm256_store_pd(acc, vacc);
    for (; i < n; ++i)
        acc[i & 3] = __builtin_fma(w[i], log_positive(c + x[i]), acc[i & 3]);
    return ((acc[0] + acc[1]) + acc[2]) + acc[3];
}

void series_walk_step_avx2(const double* u, double sign, double invk, std::size_t n,
                           double* S, double* agg_neg, double* agg_nonpos, double* agg_pos) {
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d zero = _mm256_setzero_pd();
    const __m256d vsign = _mm256_set1_pd(sign);
    const __m256d vinvk = _mm256_set1_pd(invk);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d s = _mm256_sqrt_pd(_mm256_loadu_pd(u + i));
        const __m256d z = _mm256_mul_pd(vsign, log_pd(_mm256_div_pd(s, _mm256_sub_pd(one, s))));
        const __m256d Si = _mm256_add_pd(_mm256_loadu_pd(S + i), z);
        _mm256_storeu_pd(S + i, Si);

        const __m256d neg = _mm256_max_pd(_mm256_sub_pd(zero, Si), zero);
        _mm256_storeu_pd(agg_neg + i,
                         _mm256_fmadd_pd(neg, vinvk, _mm256_loadu_pd(agg_neg + i)));

        const __m256d le = _mm256_cmp_pd(Si, zero, _CMP_LE_OQ);
        _mm256_storeu_pd(agg_nonpos + i,
                         _mm256_add_pd(_mm256_loadu_pd(agg_nonpos + i), _mm256_and_pd(le, vinvk)));
        _mm256_storeu_pd(agg_pos + i,
                         _mm256_add_pd(_mm256_loadu_pd(agg_pos + i), _mm256_andnot_pd(le, vinvk)));
    }
    for (; i < n; ++i) {
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

const Ops* ops_avx2() {
    static const Ops table{
        &log_array_avx2,    &beta_llr_avx2,      &beta_row_pre_avx2,
        &beta_row_post_avx2, &log_shift_dot_avx2, &series_walk_step_avx2,
    };
    return &table;
}

} // namespace srd::simd

#else

namespace srd::simd {
const Ops* ops_avx2() { return nullptr; }
} // namespace srd::simd

#endif
