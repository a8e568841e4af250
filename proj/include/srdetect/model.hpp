#ifndef SRDETECT_MODEL_HPP
#define SRDETECT_MODEL_HPP

#include <functional>
#include <limits>
#include <string>

#include "srdetect/rng.hpp"

namespace srd {

enum class Regime { pre, post };

enum class ModelFamily { beta, gaussian, exponential, custom };

// A simple changepoint model: observations are i.i.d. with density f before
// the changepoint and g after it. Everything downstream is driven by the
// likelihood ratio Lambda = g/f and its distribution functions
//   F_inf(t) = P_pre(Lambda <= t),  F_0(t) = P_post(Lambda <= t).
//
// Immutable after construction; safe to share across threads. Rng state is
// owned by the caller. Stationary and quasi-stationary distributions are
// assumed to exist, which holds whenever Lambda is continuous; the toolkit
// does not try to detect arithmetic log Lambda for custom models.
struct ChangepointModel {
    std::string name;
    ModelFamily family = ModelFamily::custom;

    // Kullback-Leibler number I = E_post log Lambda.
    double kl = 0.0;
    bool kl_exact = false;

    // Support of Lambda (used to clamp cdf evaluation for bounded ratios).
    double lr_min = 0.0;
    double lr_max = std::numeric_limits<double>::infinity();

    std::function<double(double)> lr;          // x -> g(x)/f(x)
    std::function<double(double)> cdf_lr_pre;  // F_inf
    std::function<double(double)> cdf_lr_post; // F_0
    std::function<double(double)> pdf_lr_pre;  // dF_inf/dt, null if unavailable
    std::function<double(double)> pdf_lr_post; // dF_0/dt,  null if unavailable
    std::function<double(Rng&)> sample_pre;
    std::function<double(Rng&)> sample_post;

    // E_post (log Lambda)^2, by closed form or 1-D quadrature; feeds the
    // overshoot-constant series. NaN when unknown (custom models).
    double llr_moment2_post = std::numeric_limits<double>::quiet_NaN();

    bool has_pdfs() const { return static_cast<bool>(pdf_lr_pre) && static_cast<bool>(pdf_lr_post); }
};

// The worked example model: beta(2,1) observations switching to beta(1,2),
// i.e. f(x) = 2x, g(x) = 2(1-x) on [0,1], Lambda(x) = 1/x - 1, with
// F_inf(t) = 1 - (1+t)^-2, F_0(t) = [t/(1+t)]^2 and I = 1.
ChangepointModel beta_model();

// N(0,1) -> N(theta,1), theta > 0. I = theta^2 / 2.
ChangepointModel gaussian_mean_shift(double theta = 1.0);

// Exp(rate_pre) -> Exp(rate_post), rates positive and distinct.
ChangepointModel exponential_rate_change(double rate_pre = 1.0, double rate_post = 0.5);

// Assemble a model from user-supplied densities and samplers. Lambda is
// computed as g/f; cdfs default to Monte Carlo estimates on a fixed grid
// (the integral-equation solver additionally needs pdfs, which custom
// models may supply through the struct fields afterwards).
ChangepointModel make_custom_model(std::string name,
                                   std::function<double(double)> density_pre,
                                   std::function<double(double)> density_post,
                                   std::function<double(Rng&)> sample_pre,
                                   std::function<double(Rng&)> sample_post);

// Built-in model lookup for the CLI: "beta", "gaussian[:theta]",
// "exponential[:rate_pre,rate_post]". Throws ConfigError for unknown names.
ChangepointModel model_by_name(const std::string& spec);

// --- operations ----------------------------------------------------------

// g(x)/f(x); throws std::domain_error outside the support of f.
double likelihood_ratio(const ChangepointModel& model, double x);

// F_inf(t) or F_0(t); throws std::domain_error for t < 0.
double cdf_lr(const ChangepointModel& model, Regime regime, double t);

double pdf_lr(const ChangepointModel& model, Regime regime, double t);

// I = E_post log Lambda (exact for built-ins).
double kl_number(const ChangepointModel& model);

struct McMoment {
    double mean = 0.0;
    double std_error = 0.0;
};

// Monte Carlo estimate of I for models without a closed form.
McMoment kl_number_mc(const ChangepointModel& model, long long n, std::uint64_t seed);

double sample_observation(const ChangepointModel& model, Regime regime, Rng& rng);

// E_post[(log Lambda)^k], k = 1, 2, by composite quadrature against the
// density of log Lambda. Requires pdf_lr_post.
double llr_moment_post(const ChangepointModel& model, int k);

// Largest second divided difference of log F over the grid, where F is the
// cdf of log Lambda under `regime`; <= 0 (up to rounding) for log-concave F.
double log_concavity_defect(const ChangepointModel& model, Regime regime,
                            double z_lo, double z_hi, int n_points);

} // namespace srd

#endif
