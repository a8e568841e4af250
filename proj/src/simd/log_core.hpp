#ifndef SRDETECT_SIMD_LOG_CORE_HPP
#define SRDETECT_SIMD_LOG_CORE_HPP

// Shared constants for the polynomial log used by the scalar and AVX2
// kernels. Argument is reduced to m in [sqrt(1/2), sqrt(2)), then
// log(m) = 2 atanh(r) with r = (m-1)/(m+1), |r| <= 0.1716, via the odd
// series truncated at r^17 (tail < 1e-15 relative).

#include <bit>
#include <cstdint>

namespace srd::simd::detail {

inline constexpr std::uint64_t kSqrtHalfBits = 0x3fe6a09e667f3bcdULL; // sqrt(0.5)
inline constexpr std::uint64_t kMantissaMask = 0x000fffffffffffffULL;

inline constexpr double kLn2Hi = 0x1.62e42fee00000p-1;
inline constexpr double kLn2Lo = 0x1.a39ef35793c76p-33;

inline constexpr double kC3  = 1.0 / 3.0;
inline constexpr double kC5  = 1.0 / 5.0;
inline constexpr double kC7  = 1.0 / 7.0;
inline constexpr double kC9  = 1.0 / 9.0;
inline constexpr double kC11 = 1.0 / 11.0;
inline constexpr double kC13 = 1.0 / 13.0;
inline constexpr double kC15 = 1.0 / 15.0;
inline constexpr double kC17 = 1.0 / 17.0;

// Scalar reference; the AVX2 kernel mirrors this computation lane-wise with
// the same fma placement, giving bit-identical results.
inline double log_positive(double x) {
    const std::uint64_t bits = std::bit_cast<std::uint64_t>(x);
    const std::uint64_t tmp = bits - kSqrtHalfBits;
    const auto e = static_cast<double>(static_cast<std::int64_t>(tmp) >> 52);
    const double m = std::bit_cast<double>((tmp & kMantissaMask) + kSqrtHalfBits);

    const double r = (m - 1.0) / (m + 1.0);
    const double t = r * r;
    double p = kC17;
    p = __builtin_fma(t, p, kC15);
    p = __builtin_fma(t, p, kC13);
    p = __builtin_fma(t, p, kC11);
    p = __builtin_fma(t, p, kC9);
    p = __builtin_fma(t, p, kC7);
    p = __builtin_fma(t, p, kC5);
    p = __builtin_fma(t, p, kC3);
    p = p * t;

    const double w = r + r;
    const double base = __builtin_fma(e, kLn2Hi, w);
    return __builtin_fma(w, p, __builtin_fma(e, kLn2Lo, base));
}

} // namespace srd::simd::detail

#endif
