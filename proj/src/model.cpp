#include "srdetect/model.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>
#include <vector>

#include "srdetect/errors.hpp"

namespace srd {
namespace {

constexpr double kPi = 3.14159265358979323846;

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }
double std_normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi); }

// Marsaglia polar method; consumes a variable number of uniforms but is
// deterministic for a fixed rng state.
double sample_std_normal(Rng& rng) {
    for (;;) {
        const double u = 2.0 * rng.u01() - 1.0;
        const double v = 2.0 * rng.u01() - 1.0;
        const double s = u * u + v * v;
        if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
    }
}

// Composite 16-point Gauss-Legendre quadrature of fn over [lo, hi].
double integrate(const std::function<double(double)>& fn, double lo, double hi, int panels) {
    static const double xg[8] = {0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
                                 0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
                                 0.9445750230732326, 0.9894009349916499};
    static const double wg[8] = {0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
                                 0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
                                 0.0622535239386479, 0.0271524594117541};
    const double h = (hi - lo) / panels;
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double c = lo + (p + 0.5) * h;
        double acc = 0.0;
        for (int j = 0; j < 8; ++j)
            acc += wg[j] * (fn(c + 0.5 * h * xg[j]) + fn(c - 0.5 * h * xg[j]));
        total += 0.5 * h * acc;
    }
    return total;
}

struct MomentWindow {
    double lo, hi;
};

MomentWindow moment_window(const ChangepointModel& m) {
    switch (m.family) {
        case ModelFamily::beta:
            return {-80.0, 80.0};
        case ModelFamily::gaussian: {
            const double sd = std::sqrt(std::max(m.llr_moment2_post - m.kl * m.kl, 1e-12));
            return {m.kl - 50.0 * sd, m.kl + 50.0 * sd};
        }
        case ModelFamily::exponential: {
            const double z0 = std::log(m.lr_min > 0.0 ? m.lr_min : m.lr_max);
            const double sd = std::sqrt(std::max(m.llr_moment2_post - m.kl * m.kl, 1e-12));
            if (std::isfinite(std::log(m.lr_max))) return {z0 - 130.0 * sd, std::log(m.lr_max)};
            return {z0, z0 + 130.0 * sd};
        }
        default:
            throw UnsupportedModelError("llr moments need a built-in model or explicit pdfs");
    }
}

} // namespace

ChangepointModel beta_model() {
    ChangepointModel m;
    m.name = "beta";
    m.family = ModelFamily::beta;
    m.kl = 1.0;
    m.kl_exact = true;
    m.lr = [](double x) {
        if (!(x > 0.0) || x > 1.0)
            throw std::domain_error("beta model: observation outside (0,1]");
        return 1.0 / x - 1.0;
    };
    m.cdf_lr_pre = [](double t) {
        const double u = 1.0 + t;
        return 1.0 - 1.0 / (u * u);
    };
    m.cdf_lr_post = [](double t) {
        const double u = t / (1.0 + t);
        return u * u;
    };
    m.pdf_lr_pre = [](double t) {
        const double u = 1.0 + t;
        return 2.0 / (u * u * u);
    };
    m.pdf_lr_post = [](double t) {
        const double u = 1.0 + t;
        return 2.0 * t / (u * u * u);
    };
    m.sample_pre = [](Rng& rng) { return std::sqrt(rng.u01()); };
    m.sample_post = [](Rng& rng) { return 1.0 - std::sqrt(rng.u01()); };
    // E_post (log Lambda)^2 = pi^2/3 (quadrature agrees to machine precision)
    m.llr_moment2_post = kPi * kPi / 3.0;
    return m;
}

ChangepointModel gaussian_mean_shift(double theta) {
    if (!(theta > 0.0)) throw ConfigError("gaussian mean shift needs theta > 0");
    ChangepointModel m;
    m.name = "gaussian";
    m.family = ModelFamily::gaussian;
    m.kl = 0.5 * theta * theta;
    m.kl_exact = true;
    m.lr = [theta](double x) { return std::exp(theta * x - 0.5 * theta * theta); };
    m.cdf_lr_pre = [theta](double t) {
        if (t <= 0.0) return 0.0;
        return std_normal_cdf(std::log(t) / theta + 0.5 * theta);
    };
    m.cdf_lr_post = [theta](double t) {
        if (t <= 0.0) return 0.0;
        return std_normal_cdf(std::log(t) / theta - 0.5 * theta);
    };
    m.pdf_lr_pre = [theta](double t) {
        if (t <= 0.0) return 0.0;
        return std_normal_pdf(std::log(t) / theta + 0.5 * theta) / (theta * t);
    };
    m.pdf_lr_post = [theta](double t) {
        if (t <= 0.0) return 0.0;
        return std_normal_pdf(std::log(t) / theta - 0.5 * theta) / (theta * t);
    };
    m.sample_pre = [](Rng& rng) { return sample_std_normal(rng); };
    m.sample_post = [theta](Rng& rng) { return theta + sample_std_normal(rng); };
    m.llr_moment2_post = theta * theta + 0.25 * theta * theta * theta * theta;
    return m;
}

ChangepointModel exponential_rate_change(double rate_pre, double rate_post) {
    if (!(rate_pre > 0.0) || !(rate_post > 0.0) || rate_pre == rate_post)
        throw ConfigError("exponential rate change needs positive, distinct rates");
    ChangepointModel m;
    m.name = "exponential";
    m.family = ModelFamily::exponential;
    const double c = rate_post / rate_pre;      // Lambda(0)
    const double d = rate_pre - rate_post;      // Lambda(x) = c exp(d x)
    m.kl = std::log(c) + d / rate_post;
    m.kl_exact = true;
    if (d > 0.0) {
        m.lr_min = c;
    } else {
        m.lr_min = 0.0;
        m.lr_max = c;
    }
    m.lr = [c, d](double x) {
        if (x < 0.0) throw std::domain_error("exponential model: observation below 0");
        return c * std::exp(d * x);
    };
    auto cdf = [c, d](double rate, double t) {
        if (t <= 0.0) return 0.0;
        const double p = -rate / d; // sign matches monotonicity of Lambda
        if (d > 0.0) {
            if (t <= c) return 0.0;
            return 1.0 - std::pow(t / c, p);
        }
        if (t >= c) return 1.0;
        return std::pow(t / c, p);
    };
    auto pdf = [c, d](double rate, double t) {
        if (t <= 0.0) return 0.0;
        const double p = -rate / d;
        if (d > 0.0) {
            if (t <= c) return 0.0;
            return -p / t * std::pow(t / c, p);
        }
        if (t >= c) return 0.0;
        return p / t * std::pow(t / c, p);
    };
    m.cdf_lr_pre = [cdf, rate_pre](double t) { return cdf(rate_pre, t); };
    m.cdf_lr_post = [cdf, rate_post](double t) { return cdf(rate_post, t); };
    m.pdf_lr_pre = [pdf, rate_pre](double t) { return pdf(rate_pre, t); };
    m.pdf_lr_post = [pdf, rate_post](double t) { return pdf(rate_post, t); };
    m.sample_pre = [rate_pre](Rng& rng) { return -std::log(rng.u01()) / rate_pre; };
    m.sample_post = [rate_post](Rng& rng) { return -std::log(rng.u01()) / rate_post; };
    const double var = (d / rate_post) * (d / rate_post);
    m.llr_moment2_post = var + m.kl * m.kl;
    return m;
}

ChangepointModel make_custom_model(std::string name,
                                   std::function<double(double)> density_pre,
                                   std::function<double(double)> density_post,
                                   std::function<double(Rng&)> sample_pre,
                                   std::function<double(Rng&)> sample_post) {
    ChangepointModel m;
    m.name = std::move(name);
    m.family = ModelFamily::custom;
    m.lr = [f = std::move(density_pre), g = std::move(density_post)](double x) {
        const double fx = f(x);
        if (!(fx > 0.0)) throw std::domain_error("custom model: observation outside the support of f");
        return g(x) / fx;
    };
    m.sample_pre = std::move(sample_pre);
    m.sample_post = std::move(sample_post);

    // Empirical likelihood-ratio cdfs from a fixed-seed sample; enough for
    // detector runs and Monte Carlo work. The integral-equation solver
    // additionally needs pdfs, which callers may attach afterwards.
    constexpr long long kSamples = 1 << 18;
    auto make_cdf = [&m](Regime reg) {
        auto sorted = std::make_shared<std::vector<double>>();
        sorted->reserve(kSamples);
        Rng rng(reg == Regime::pre ? 0x7a31c9d2ULL : 0x52f8a11bULL);
        for (long long i = 0; i < kSamples; ++i) {
            const double x = reg == Regime::pre ? m.sample_pre(rng) : m.sample_post(rng);
            sorted->push_back(m.lr(x));
        }
        std::sort(sorted->begin(), sorted->end());
        return [sorted](double t) {
            const auto it = std::upper_bound(sorted->begin(), sorted->end(), t);
            return static_cast<double>(it - sorted->begin()) / static_cast<double>(sorted->size());
        };
    };
    m.cdf_lr_pre = make_cdf(Regime::pre);
    m.cdf_lr_post = make_cdf(Regime::post);

    const McMoment i_hat = kl_number_mc(m, 1 << 18, 0x11d3c0deULL);
    m.kl = i_hat.mean;
    m.kl_exact = false;
    return m;
}

ChangepointModel model_by_name(const std::string& spec) {
    const auto colon = spec.find(':');
    const std::string head = spec.substr(0, colon);
    std::vector<double> params;
    if (colon != std::string::npos) {
        std::stringstream ss(spec.substr(colon + 1));
        std::string tok;
        while (std::getline(ss, tok, ','))
            params.push_back(std::stod(tok));
    }
    if (head == "beta") {
        if (!params.empty()) throw ConfigError("beta model takes no parameters");
        return beta_model();
    }
    if (head == "gaussian") {
        if (params.size() > 1) throw ConfigError("gaussian model takes one parameter (theta)");
        return gaussian_mean_shift(params.empty() ? 1.0 : params[0]);
    }
    if (head == "exponential") {
        if (!params.empty() && params.size() != 2)
            throw ConfigError("exponential model takes two parameters (rate_pre,rate_post)");
        return params.empty() ? exponential_rate_change()
                              : exponential_rate_change(params[0], params[1]);
    }
    throw ConfigError("unknown model '" + spec +
                      "'; built-ins: beta, gaussian[:theta], exponential[:rate_pre,rate_post]");
}

double likelihood_ratio(const ChangepointModel& model, double x) { return model.lr(x); }

double cdf_lr(const ChangepointModel& model, Regime regime, double t) {
    if (t < 0.0) throw std::domain_error("cdf_lr: t must be nonnegative");
    return regime == Regime::pre ? model.cdf_lr_pre(t) : model.cdf_lr_post(t);
}

double pdf_lr(const ChangepointModel& model, Regime regime, double t) {
    if (t < 0.0) throw std::domain_error("pdf_lr: t must be nonnegative");
    const auto& pdf = regime == Regime::pre ? model.pdf_lr_pre : model.pdf_lr_post;
    if (!pdf) throw UnsupportedModelError("model '" + model.name + "' has no likelihood-ratio pdf");
    return pdf(t);
}

double kl_number(const ChangepointModel& model) { return model.kl; }

McMoment kl_number_mc(const ChangepointModel& model, long long n, std::uint64_t seed) {
    Rng rng(seed);
    double sum = 0.0, sumsq = 0.0;
    for (long long i = 0; i < n; ++i) {
        const double z = std::log(model.lr(model.sample_post(rng)));
        sum += z;
        sumsq += z * z;
    }
    const double mean = sum / static_cast<double>(n);
    const double var = std::max(0.0, sumsq / static_cast<double>(n) - mean * mean);
    return {mean, std::sqrt(var / static_cast<double>(n))};
}

double sample_observation(const ChangepointModel& model, Regime regime, Rng& rng) {
    return regime == Regime::pre ? model.sample_pre(rng) : model.sample_post(rng);
}

double llr_moment_post(const ChangepointModel& model, int k) {
    if (!model.pdf_lr_post)
        throw UnsupportedModelError("llr_moment_post requires pdf_lr_post");
    const MomentWindow w = moment_window(model);
    auto integrand = [&](double z) {
        const double t = std::exp(z);
        return std::pow(z, k) * model.pdf_lr_post(t) * t;
    };
    return integrate(integrand, w.lo, w.hi, 512);
}

double log_concavity_defect(const ChangepointModel& model, Regime regime,
                            double z_lo, double z_hi, int n_points) {
    if (n_points < 3) throw ConfigError("log_concavity_defect needs at least 3 points");
    const double h = (z_hi - z_lo) / (n_points - 1);
    std::vector<double> logF(n_points);
    for (int i = 0; i < n_points; ++i) {
        const double F = cdf_lr(model, regime, std::exp(z_lo + i * h));
        if (!(F > 0.0)) throw ConfigError("log_concavity_defect: cdf is zero on the grid");
        logF[i] = std::log(F);
    }
    double worst = -std::numeric_limits<double>::infinity();
    for (int i = 1; i + 1 < n_points; ++i)
        worst = std::max(worst, (logF[i - 1] - 2.0 * logF[i] + logF[i + 1]) / (h * h));
    return worst;
}

} // namespace srd
