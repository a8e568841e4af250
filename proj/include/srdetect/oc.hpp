#ifndef SRDETECT_OC_HPP
#define SRDETECT_OC_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "srdetect/detector.hpp"
#include "srdetect/fredholm.hpp"
#include "srdetect/quasi_stationary.hpp"

namespace srd {

enum class ArgmaxKind { at_zero, interior, at_infinity };

struct DelayCurve {
    std::vector<double> delay;     // E_nu(T - nu | T > nu), nu = 0..K
    std::vector<double> survival;  // p_nu = P_pre(T > nu), nu = 0..K
    bool tail_stationary = false;  // five successive values within 1e-6 relative
    int stationary_at = -1;
    double tail = 0.0;             // last computed value, reported as ADD_inf
    bool truncated_underflow = false;  // p_nu fell below 1e-300
};

struct SaddResult {
    double sadd = 0.0;
    ArgmaxKind argmax = ArgmaxKind::at_zero;
    DelayCurve curve;
};

struct OcResult {
    ProcedureKind procedure = ProcedureKind::sr;
    double head_start = 0.0;  // r (SRP: mean of Q_A)
    double threshold = 0.0;
    double arl_false_alarm = 0.0;
    std::vector<double> delay_curve;
    std::vector<double> survival;
    double sadd = 0.0;
    double add_infinity = 0.0;
    ArgmaxKind argmax_kind = ArgmaxKind::at_zero;
    std::optional<double> lower_bound;  // SR only
};

// Exact operating characteristics at one threshold, by Nystrom solves of the
// delay/run-length integral equations. Construction builds only the grid;
// operators, factorizations and the quasi-stationary law are built on first
// use. Not thread-safe (lazy caches); run distinct instances in parallel.
class OcSolver {
public:
    static constexpr int kDefaultGridN = 2048;

    OcSolver(const ChangepointModel& model, double threshold, int grid_n = kDefaultGridN,
             int panel_order = 16);

    double threshold() const { return threshold_; }
    const Grid& grid() const { return grid_; }
    const ChangepointModel& model() const { return *model_; }

    // phi_inf(r) = E_pre T_A^r and phi_0(r) = E_post T_A^r at any 0 <= r < A.
    double arl(double r);
    double delay_at_zero(double r);

    GridFunction arl_curve();         // phi_inf on the grid, linear accessor
    GridFunction delay_zero_curve();  // phi_0 on the grid

    const QuasiStationary& quasi_stationary();

    double srp_arl();   // integral of phi_inf against Q_A
    double srp_sadd();  // integral of phi_0 against Q_A (the equalizer value)

    DelayCurve delay_curve(double r, int nu_max = kDefaultNuMax);
    std::vector<DelayCurve> delay_curves(std::span<const double> rs, int nu_max = kDefaultNuMax);
    DelayCurve srp_delay_curve(int nu_max = kDefaultNuMax);  // Q_A-mixed

    // J(T_A) = psi(0) / phi_inf(0), psi = phi_0 + T_pre psi.
    double lower_bound();

    SaddResult sadd(double r, int nu_max = kDefaultNuMax);

    OcResult analyze(ProcedureKind kind, double head_start, int nu_max = kDefaultNuMax);

    static constexpr int kDefaultNuMax = 200;

private:
    struct Probe;  // evaluation functional for delay recursions

    const Eigen::VectorXd& phi_pre();
    const Eigen::VectorXd& phi_post();
    const FredholmSolver& pre_solver();
    const FredholmSolver& post_solver();
    const DiscretizedOperator& pre_op();
    const DiscretizedOperator& post_op();
    std::vector<DelayCurve> run_delay_recursion(std::span<const Probe> probes, int nu_max);

    const ChangepointModel* model_;
    double threshold_;
    Grid grid_;
    std::optional<DiscretizedOperator> op_pre_, op_post_;
    std::optional<FredholmSolver> solver_pre_, solver_post_;
    std::optional<Eigen::VectorXd> phi_pre_, phi_post_;
    std::optional<QuasiStationary> qsd_;
};

// Threshold calibration target: which procedure's ARL to pin to gamma.
struct CalibrationTarget {
    ProcedureKind kind = ProcedureKind::sr;
    double fixed_r = 0.0;     // SR-r head start when adaptive_mu is false
    bool adaptive_mu = false; // SR-r with r = mu_A recomputed at each trial A
};

struct CalibrateOptions {
    int grid_n = OcSolver::kDefaultGridN;
    int coarse_grid_n = 512;  // bracketing/secant phase
    double rel_tol = 1e-4;    // on |ARL - gamma| / gamma
    double a_min = 1e-4;
    double a_max = 1e9;
    int max_iter = 200;
};

struct CalibrationResult {
    double threshold = 0.0;
    double arl = 0.0;  // achieved, on the fine grid
    int coarse_evals = 0;
    int fine_evals = 0;
};

// Bracketing plus secant-accelerated bisection on the monotone map
// A -> ARL(A). Throws CalibrationError when no bracket exists inside
// [a_min, a_max], ConfigError for gamma <= 1.
CalibrationResult calibrate_threshold(const ChangepointModel& model, const CalibrationTarget& target,
                                      double gamma, const CalibrateOptions& opts = {});

} // namespace srd

#endif
