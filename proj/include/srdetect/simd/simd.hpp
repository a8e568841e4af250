#ifndef SRDETECT_SIMD_HPP
#define SRDETECT_SIMD_HPP

#include <cstddef>

namespace srd::simd {

enum class IsaLevel { scalar, avx2 };

// Hot arithmetic loops, provided as scalar reference implementations plus
// AVX2 variants. Both flavours follow the same operation order, so results
// are bit-identical between them (the vector log uses fused multiply-adds;
// the scalar reference calls std::fma to match).
struct Ops {
    // out[i] = log(x[i]); inputs must be positive and finite.
    void (*log_array)(const double* x, double* out, std::size_t n);

    // Log-likelihood ratio of one beta-model observation drawn via inverse
    // transform from a uniform: z[i] = log(s/(1-s)) with s = sqrt(u[i]).
    // This is the post-change draw; pre-change is the same value negated.
    void (*beta_llr_from_u01)(const double* u, double* z, std::size_t n);

    // Quadrature-weighted beta kernel rows against starting state y:
    //   pre : out[i] = w[i] * 2 (1+y)^2   / (1+x[i]+y)^3
    //   post: out[i] = w[i] * 2 x[i](1+y) / (1+x[i]+y)^3
    void (*beta_row_pre)(const double* x, const double* w, std::size_t n, double y, double* out);
    void (*beta_row_post)(const double* x, const double* w, std::size_t n, double y, double* out);

    // sum_i w[i] * log(c + x[i]), accumulated in four striped partial sums.
    double (*log_shift_dot)(const double* x, const double* w, std::size_t n, double c);

    // One step of the overshoot-constant random walk over a block of lanes:
    //   z = sign * log(sqrt(u)/(1-sqrt(u)));  S += z;
    //   agg_neg    += max(0,-S) * invk;
    //   agg_nonpos += (S <= 0) * invk;
    //   agg_pos    += (S >  0) * invk;
    void (*series_walk_step)(const double* u, double sign, double invk, std::size_t n,
                             double* S, double* agg_neg, double* agg_nonpos, double* agg_pos);
};

// Active implementation: best ISA the CPU supports, overridable with the
// environment variable SRDETECT_ISA=scalar|avx2 (read once).
const Ops& ops();
IsaLevel active_level();
const char* level_name(IsaLevel level);

// Specific implementations, for equivalence tests.
const Ops& ops_scalar();
const Ops* ops_avx2();   // nullptr when the CPU lacks AVX2+FMA

} // namespace srd::simd

#endif
