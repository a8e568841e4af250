#ifndef SRDETECT_ASYMPTOTICS_HPP
#define SRDETECT_ASYMPTOTICS_HPP

#include <functional>
#include <optional>

#include "srdetect/fredholm.hpp"
#include "srdetect/model.hpp"
#include "srdetect/quasi_stationary.hpp"

namespace srd {

enum class Provenance { closed_form, series_mc, quadrature };

struct SeriesEstimate {
    double value = 0.0;
    double std_error = 0.0;
};

// Limiting overshoot constants of the one-sided test on the log-likelihood
// random walk: zeta = lim E_post exp(-overshoot), varkappa = lim E_post
// overshoot. Estimated from the ladder-series representation
//   varkappa = E S_1^2 / (2 E S_1) - sum_k (1/k) E_post[max(0, -S_k)]
//   zeta     = (1/I) exp{ -sum_k (1/k) [P_post(S_k <= 0) + P_pre(S_k > 0)] }
// with the leading fraction by quadrature and the series by Monte Carlo
// trajectory averaging.
struct OvershootConstants {
    SeriesEstimate zeta;      // in (0,1)
    SeriesEstimate varkappa;  // > 0
    double s1_mean = 0.0;         // E_post S_1 = I
    double s1_second_moment = 0.0;
    int series_cap = 0;
    long long paths = 0;
    std::uint64_t seed = 0;
};

OvershootConstants overshoot_constants(const ChangepointModel& model, int series_cap,
                                       long long paths, std::uint64_t seed, int threads = 0);

// Stationary laws entering the delay constants: q_st (limit of R_n under
// P_pre) and q_tilde (limit of V_n = sum e^{-S_i} under P_post), as leading
// eigenfunctions of the pre-change and v-walk kernels truncated to
// [0, x_max], with the Kesten 1/x tail accounted beyond the window.
struct StationaryLaws {
    Grid grid;
    double x_max = 0.0;
    Eigen::VectorXd q_st_masses, q_tilde_masses;  // each sums to 1
    double q_st_eigenvalue = 0.0, q_tilde_eigenvalue = 0.0;
    double q_st_tail_mass = 0.0, q_tilde_tail_mass = 0.0;  // estimated beyond x_max
    std::function<double(double)> cdf_q_st, cdf_q_tilde;   // Nystrom evaluation
};

// Throws NumericalError when the estimated tail mass beyond x_max reaches
// 5%, instructing a larger window.
StationaryLaws stationary_laws(const ChangepointModel& model, double x_max = 1e6,
                               int grid_n = 2048);

struct CValue {
    double value = 0.0;       // what downstream consumers use
    double quadrature = 0.0;  // always the numerical evaluation
    Provenance provenance = Provenance::quadrature;
};

// C_r = E log(1 + r + V_inf); closed form ((1+r)/r) log(1+r) for the beta
// model, exposed alongside the quadrature value for validation.
CValue constant_c(const ChangepointModel& model, double r, const StationaryLaws& laws);

// C_inf = E log(1 + R_inf + V_inf); pi^2/6 for the beta model.
CValue constant_c_infinity(const ChangepointModel& model, const StationaryLaws& laws);

double beta_c_closed_form(double r);  // ((1+r)/r) log(1+r), r = 0 -> 1

// Everything the approximation formulas need.
struct ConstantsBundle {
    double zeta = 0.0;
    double varkappa = 0.0;
    double c0 = 0.0;
    double c_infinity = 0.0;
    double kl = 0.0;
};

// E_pre T_A^r ~ A/zeta - r; the SRP variant passes r = mu_A.
double approx_arl(double threshold, double zeta, double head_start);

enum class SaddApproxKind { sr, sr_r_designed, srp, lower_bound };

// (1/I) [log A + varkappa - C], C = C_0 for SR and C_inf otherwise.
double approx_sadd_at_threshold(SaddApproxKind kind, double threshold, const ConstantsBundle& c);

// Same formula evaluated at the design threshold A = gamma * zeta.
double approx_sadd_at_gamma(SaddApproxKind kind, double gamma, const ConstantsBundle& c);

// Head-start design rules. quasi-mean: r = mu_A. Equalizer: the fixed r*
// solving C_r = C_inf (independent of A); root-found by bisection with an
// expanding upper bracket. Throws CalibrationError when no sign change is
// found.
double design_head_start_quasi_mean(const QuasiStationary& qsd);
double design_head_start_equalizer(const ChangepointModel& model,
                                   const StationaryLaws* laws = nullptr);

} // namespace srd

#endif
