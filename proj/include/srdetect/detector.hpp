#ifndef SRDETECT_DETECTOR_HPP
#define SRDETECT_DETECTOR_HPP

#include <cstdint>
#include <span>
#include <stdexcept>

#include "srdetect/model.hpp"
#include "srdetect/quasi_stationary.hpp"

namespace srd {

enum class ProcedureKind { sr, sr_r, srp };

struct DetectorState {
    double head_start = 0.0;  // R_0
    double statistic = 0.0;   // R_n
    std::uint64_t step = 0;   // n
    double threshold = 0.0;   // A
};

struct StoppingRecord {
    std::uint64_t stop_time = 0;   // T >= 1
    double final_statistic = 0.0;  // R_T >= A
    double overshoot_log = 0.0;    // log R_T - log A
};

// One SR update, R' = (1+R) * lambda. Throws std::domain_error on negative
// inputs.
inline double sr_step(double statistic, double lambda) {
    if (statistic < 0.0) throw std::domain_error("sr_step: statistic must be nonnegative");
    if (lambda < 0.0) throw std::domain_error("sr_step: likelihood ratio must be nonnegative");
    return (1.0 + statistic) * lambda;
}

// Push-based detector: feed observations one at a time; Monte Carlo and any
// live feed share this code path.
class Detector {
public:
    // Requires A > 0 and 0 <= head_start < A (r >= A is rejected, not
    // defined to stop immediately).
    Detector(double threshold, double head_start);

    // Feed the likelihood ratio of the next observation. Returns true once
    // the run stops (first n >= 1 with R_n >= A).
    bool push_lr(double lambda) {
        if (stopped_) return true;
        state_.statistic = sr_step(state_.statistic, lambda);
        ++state_.step;
        if (state_.statistic >= state_.threshold) stopped_ = true;
        return stopped_;
    }
    bool push(const ChangepointModel& model, double x) { return push_lr(model.lr(x)); }

    bool stopped() const { return stopped_; }
    const DetectorState& state() const { return state_; }
    StoppingRecord record() const;   // valid once stopped

    void reset(double head_start);

private:
    DetectorState state_;
    bool stopped_ = false;
};

struct RunOutcome {
    bool stopped = false;
    StoppingRecord record;           // meaningful when stopped
    std::uint64_t steps_consumed = 0;
};

// Run SR-r (head_start = 0 gives the original SR procedure) over a finite
// observation stream. A non-terminating run reports the steps consumed so
// the caller can extend the stream or treat the run as censored.
RunOutcome run_detector(const ChangepointModel& model, double threshold, double head_start,
                        std::span<const double> stream);

// SRP: the head start is drawn from the quasi-stationary law before the
// stream is consumed. The law must belong to this threshold.
RunOutcome run_detector_srp(const ChangepointModel& model, double threshold,
                            const QuasiStationary& qsd, Rng& rng, std::span<const double> stream);

// Inverse-cdf draw from the discretized Q_A with linear interpolation
// between grid nodes.
double sample_head_start(const QuasiStationary& qsd, Rng& rng);

} // namespace srd

#endif
