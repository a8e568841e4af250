#include "srdetect/detector.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "srdetect/errors.hpp"

namespace srd {

Detector::Detector(double threshold, double head_start) {
    if (!(threshold > 0.0)) throw ConfigError("detector: threshold must be positive");
    if (head_start < 0.0) throw ConfigError("detector: head start must be nonnegative");
    if (head_start >= threshold)
        throw ConfigError("detector: head start must satisfy 0 <= r < A");
    state_.threshold = threshold;
    state_.head_start = head_start;
    state_.statistic = head_start;
}

StoppingRecord Detector::record() const {
    if (!stopped_) throw std::logic_error("detector: no stopping record before the run stops");
    return {state_.step, state_.statistic, std::log(state_.statistic) - std::log(state_.threshold)};
}

void Detector::reset(double head_start) {
    if (head_start < 0.0 || head_start >= state_.threshold)
        throw ConfigError("detector: head start must satisfy 0 <= r < A");
    state_.head_start = head_start;
    state_.statistic = head_start;
    state_.step = 0;
    stopped_ = false;
}

RunOutcome run_detector(const ChangepointModel& model, double threshold, double head_start,
                        std::span<const double> stream) {
    Detector det(threshold, head_start);
    RunOutcome out;
    for (double x : stream) {
        ++out.steps_consumed;
        if (det.push(model, x)) {
            out.stopped = true;
            out.record = det.record();
            return out;
        }
    }
    return out;
}

RunOutcome run_detector_srp(const ChangepointModel& model, double threshold,
                            const QuasiStationary& qsd, Rng& rng, std::span<const double> stream) {
    if (std::abs(qsd.threshold - threshold) > 1e-9 * std::max(1.0, threshold))
        throw ConfigError("run_detector_srp: quasi-stationary law belongs to a different threshold");
    return run_detector(model, threshold, sample_head_start(qsd, rng), stream);
}

double sample_head_start(const QuasiStationary& qsd, Rng& rng) {
    const double u = rng.u01();
    const auto& cdf = qsd.cdf_nodes;
    const auto& nodes = qsd.grid.nodes;
    const auto n = static_cast<std::size_t>(cdf.size());

    // piecewise-linear inverse through (0,0), (nodes, cdf), (A,1)
    std::size_t lo = 0, hi = n;  // segment index in 0..n; node i covers (cdf[i-1], cdf[i]]
    while (lo < hi) {
        const std::size_t mid = (lo + hi) / 2;
        if (cdf[static_cast<Eigen::Index>(mid)] < u)
            lo = mid + 1;
        else
            hi = mid;
    }
    const double x0 = (lo == 0) ? 0.0 : nodes[lo - 1];
    const double c0 = (lo == 0) ? 0.0 : cdf[static_cast<Eigen::Index>(lo - 1)];
    const double x1 = (lo == n) ? qsd.threshold : nodes[lo];
    const double c1 = (lo == n) ? 1.0 : cdf[static_cast<Eigen::Index>(lo)];
    if (!(c1 > c0)) return x0;
    return x0 + (x1 - x0) * (u - c0) / (c1 - c0);
}

double QuasiStationary::cdf(double x) const {
    if (x <= 0.0) return 0.0;
    if (x >= threshold) return 1.0;
    const auto& xs = grid.nodes;
    const auto n = static_cast<std::size_t>(cdf_nodes.size());
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const auto i = static_cast<std::size_t>(it - xs.begin());
    const double x0 = (i == 0) ? 0.0 : xs[i - 1];
    const double c0 = (i == 0) ? 0.0 : cdf_nodes[static_cast<Eigen::Index>(i - 1)];
    const double x1 = (i == n) ? threshold : xs[i];
    const double c1 = (i == n) ? 1.0 : cdf_nodes[static_cast<Eigen::Index>(i)];
    return c0 + (c1 - c0) * (x - x0) / (x1 - x0);
}

} // namespace srd
