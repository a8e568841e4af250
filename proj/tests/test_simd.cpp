#include <doctest.h>

#include <cmath>
#include <vector>

#include "srdetect/rng.hpp"
#include "srdetect/simd/simd.hpp"

using namespace srd;

namespace {

std::vector<double> random_positives(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> v(n);
    for (auto& x : v) {
        const double mag = 600.0 * (rng.u01() - 0.5);  // spread over many binades
        x = std::exp2(mag * 0.1) * (0.5 + rng.u01());
    }
    return v;
}

} // namespace

TEST_SUITE("simd") {

TEST_CASE("polynomial log matches std::log") {
    const auto& ops = simd::ops_scalar();
    auto xs = random_positives(5000, 42);
    xs.push_back(1.0);
    xs.push_back(std::nextafter(1.0, 2.0));
    xs.push_back(std::nextafter(1.0, 0.0));
    xs.push_back(1e-300);
    xs.push_back(1e300);
    std::vector<double> out(xs.size());
    ops.log_array(xs.data(), out.data(), xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double ref = std::log(xs[i]);
        const double scale = std::max(1.0, std::abs(ref));
        CHECK(std::abs(out[i] - ref) <= 1e-13 * scale);
    }
}

TEST_CASE("avx2 variants agree with scalar bit for bit") {
    const simd::Ops* avx = simd::ops_avx2();
    if (avx == nullptr) return;  // host without AVX2
    const auto& ref = simd::ops_scalar();

    const std::size_t n = 1003;  // deliberately not a multiple of 4
    auto xs = random_positives(n, 7);
    std::vector<double> a(n), b(n);

    ref.log_array(xs.data(), a.data(), n);
    avx->log_array(xs.data(), b.data(), n);
    CHECK(a == b);

    Rng rng(11);
    std::vector<double> u(n);
    for (auto& x : u) x = rng.u01();
    ref.beta_llr_from_u01(u.data(), a.data(), n);
    avx->beta_llr_from_u01(u.data(), b.data(), n);
    CHECK(a == b);

    std::vector<double> w(n);
    for (auto& x : w) x = rng.u01();
    for (double y : {0.0, 0.37, 12.0, 4000.0}) {
        ref.beta_row_pre(xs.data(), w.data(), n, y, a.data());
        avx->beta_row_pre(xs.data(), w.data(), n, y, b.data());
        CHECK(a == b);
        ref.beta_row_post(xs.data(), w.data(), n, y, a.data());
        avx->beta_row_post(xs.data(), w.data(), n, y, b.data());
        CHECK(a == b);
    }

    CHECK(ref.log_shift_dot(xs.data(), w.data(), n, 1.5) ==
          avx->log_shift_dot(xs.data(), w.data(), n, 1.5));

    std::vector<double> S1(n, 0.0), S2(n, 0.0), n1(n, 0.0), n2(n, 0.0), p1(n, 0.0), p2(n, 0.0),
        g1(n, 0.0), g2(n, 0.0);
    for (int k = 1; k <= 40; ++k) {
        for (auto& x : u) x = rng.u01();
        ref.series_walk_step(u.data(), 1.0, 1.0 / k, n, S1.data(), n1.data(), g1.data(), p1.data());
        avx->series_walk_step(u.data(), 1.0, 1.0 / k, n, S2.data(), n2.data(), g2.data(), p2.data());
    }
    CHECK(S1 == S2);
    CHECK(n1 == n2);
    CHECK(g1 == g2);
    CHECK(p1 == p2);
}

TEST_CASE("series walk step accumulates the advertised statistics") {
    const auto& ops = simd::ops_scalar();
    Rng rng(3);
    const std::size_t n = 17;
    std::vector<double> u(n), S(n, 0.0), neg(n, 0.0), nonpos(n, 0.0), pos(n, 0.0);
    std::vector<double> S_ref(n, 0.0), neg_ref(n, 0.0), nonpos_ref(n, 0.0), pos_ref(n, 0.0);
    for (int k = 1; k <= 25; ++k) {
        for (auto& x : u) x = rng.u01();
        ops.series_walk_step(u.data(), -1.0, 1.0 / k, n, S.data(), neg.data(), nonpos.data(),
                             pos.data());
        for (std::size_t i = 0; i < n; ++i) {
            const double s = std::sqrt(u[i]);
            S_ref[i] += -std::log(s / (1.0 - s));
            neg_ref[i] += std::max(0.0, -S_ref[i]) / k;
            (S_ref[i] <= 0.0 ? nonpos_ref[i] : pos_ref[i]) += 1.0 / k;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        CHECK(S[i] == doctest::Approx(S_ref[i]).epsilon(1e-12));
        CHECK(neg[i] == doctest::Approx(neg_ref[i]).epsilon(1e-12));
        CHECK(nonpos[i] == doctest::Approx(nonpos_ref[i]).epsilon(1e-12));
        CHECK(pos[i] == doctest::Approx(pos_ref[i]).epsilon(1e-12));
    }
}

TEST_CASE("dispatch reports a valid level") {
    const simd::IsaLevel level = simd::active_level();
    CHECK((level == simd::IsaLevel::scalar || level == simd::IsaLevel::avx2));
    CHECK(simd::level_name(level) != nullptr);
    const simd::Ops* table = &simd::ops();
    CHECK((table == &simd::ops_scalar() || table == simd::ops_avx2()));
}

} // TEST_SUITE
