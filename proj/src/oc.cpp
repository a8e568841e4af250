#include "srdetect/oc.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "srdetect/errors.hpp"

namespace srd {

// A linear functional against the delay/survival grid iterates: either the
// weighted kernel row at a point r (value = Nystrom evaluation at r) or the
// quasi-stationary masses (value = Q_A mixture).
struct OcSolver::Probe {
    Eigen::VectorXd pre_row;  // applied to delta/p grid vectors
    double delay0 = 0.0;      // delta_0 = phi_0(r) or its Q_A mixture
};

OcSolver::OcSolver(const ChangepointModel& model, double threshold, int grid_n, int panel_order)
    : model_(&model), threshold_(threshold), grid_(build_grid(threshold, grid_n, panel_order)) {}

const DiscretizedOperator& OcSolver::pre_op() {
    if (!op_pre_) op_pre_ = discretize_kernel(*model_, Regime::pre, grid_);
    return *op_pre_;
}

const DiscretizedOperator& OcSolver::post_op() {
    if (!op_post_) op_post_ = discretize_kernel(*model_, Regime::post, grid_);
    return *op_post_;
}

const FredholmSolver& OcSolver::pre_solver() {
    if (!solver_pre_) solver_pre_.emplace(pre_op());
    return *solver_pre_;
}

const FredholmSolver& OcSolver::post_solver() {
    if (!solver_post_) solver_post_.emplace(post_op());
    return *solver_post_;
}

const Eigen::VectorXd& OcSolver::phi_pre() {
    if (!phi_pre_)
        phi_pre_ = pre_solver().solve(Eigen::VectorXd::Ones(static_cast<Eigen::Index>(grid_.size())));
    return *phi_pre_;
}

const Eigen::VectorXd& OcSolver::phi_post() {
    if (!phi_post_)
        phi_post_ = post_solver().solve(Eigen::VectorXd::Ones(static_cast<Eigen::Index>(grid_.size())));
    return *phi_post_;
}

namespace {

Eigen::VectorXd row_at(const ChangepointModel& model, KernelKind kind, const Grid& grid, double r) {
    Eigen::VectorXd row(static_cast<Eigen::Index>(grid.size()));
    weighted_kernel_row(model, kind, grid, r, row.data());
    return row;
}

void check_head_start(double r, double A) {
    if (r < 0.0 || r >= A)
        throw ConfigError("head start must satisfy 0 <= r < A");
}

} // namespace

double OcSolver::arl(double r) {
    check_head_start(r, threshold_);
    return 1.0 + row_at(*model_, KernelKind::pre_change, grid_, r).dot(phi_pre());
}

double OcSolver::delay_at_zero(double r) {
    check_head_start(r, threshold_);
    return 1.0 + row_at(*model_, KernelKind::post_change, grid_, r).dot(phi_post());
}

GridFunction OcSolver::arl_curve() {
    const auto& v = phi_pre();
    return {grid_.nodes, {v.data(), v.data() + v.size()}};
}

GridFunction OcSolver::delay_zero_curve() {
    const auto& v = phi_post();
    return {grid_.nodes, {v.data(), v.data() + v.size()}};
}

const QuasiStationary& OcSolver::quasi_stationary() {
    if (!qsd_) {
        const LeadingEigenpair pair = leading_eigenpair(pre_op());
        QuasiStationary q;
        q.threshold = threshold_;
        q.eigenvalue = pair.eigenvalue;
        q.grid = grid_;
        q.masses = pair.masses;
        q.mean = 0.0;
        for (std::size_t i = 0; i < grid_.size(); ++i)
            q.mean += grid_.nodes[i] * q.masses[static_cast<Eigen::Index>(i)];

        // Q_A at the nodes through the eigen relation; exact at x = A by the
        // definition of lambda_A, monotone because F_inf is.
        const auto n = static_cast<Eigen::Index>(grid_.size());
        q.cdf_nodes.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double x = grid_.nodes[static_cast<std::size_t>(i)];
            double acc = 0.0;
            for (Eigen::Index j = 0; j < n; ++j)
                acc += model_->cdf_lr_pre(x / (1.0 + grid_.nodes[static_cast<std::size_t>(j)])) *
                       q.masses[j];
            q.cdf_nodes[i] = std::min(1.0, acc / pair.eigenvalue);
        }
        qsd_ = std::move(q);
    }
    return *qsd_;
}

double OcSolver::srp_arl() { return quasi_stationary().masses.dot(phi_pre()); }

double OcSolver::srp_sadd() { return quasi_stationary().masses.dot(phi_post()); }

std::vector<DelayCurve> OcSolver::run_delay_recursion(std::span<const Probe> probes, int nu_max) {
    const auto n = static_cast<Eigen::Index>(grid_.size());
    std::vector<DelayCurve> curves(probes.size());
    for (std::size_t p = 0; p < probes.size(); ++p) {
        curves[p].delay.push_back(probes[p].delay0);
        curves[p].survival.push_back(1.0);
    }

    Eigen::VectorXd delta = phi_post();
    Eigen::VectorXd surv = Eigen::VectorXd::Ones(n);
    const Eigen::MatrixXd& M = pre_op().matrix;

    auto stationary = [](const std::vector<double>& d) {
        const std::size_t k = d.size();
        if (k < 6) return false;
        for (std::size_t i = k - 5; i < k; ++i)
            if (std::abs(d[i] - d[i - 1]) >= 1e-6 * std::abs(d.back())) return false;
        return true;
    };

    std::vector<bool> done(probes.size(), false);
    for (int nu = 1; nu <= nu_max; ++nu) {
        bool all_done = true;
        for (std::size_t p = 0; p < probes.size(); ++p) {
            if (done[p]) continue;
            const double d = probes[p].pre_row.dot(delta);
            const double s = probes[p].pre_row.dot(surv);
            if (s < 1e-300) {
                curves[p].truncated_underflow = true;
                done[p] = true;
                continue;
            }
            curves[p].delay.push_back(d / s);
            curves[p].survival.push_back(s);
            if (stationary(curves[p].delay)) {
                curves[p].tail_stationary = true;
                curves[p].stationary_at = nu;
                done[p] = true;
            } else {
                all_done = false;
            }
        }
        if (all_done) break;
        delta = M * delta;
        surv = M * surv;
    }
    for (auto& c : curves) c.tail = c.delay.back();
    return curves;
}

DelayCurve OcSolver::delay_curve(double r, int nu_max) {
    check_head_start(r, threshold_);
    const Probe probe{row_at(*model_, KernelKind::pre_change, grid_, r), delay_at_zero(r)};
    return run_delay_recursion(std::span<const Probe>(&probe, 1), nu_max)[0];
}

std::vector<DelayCurve> OcSolver::delay_curves(std::span<const double> rs, int nu_max) {
    std::vector<Probe> probes;
    probes.reserve(rs.size());
    for (double r : rs) {
        check_head_start(r, threshold_);
        probes.push_back({row_at(*model_, KernelKind::pre_change, grid_, r), delay_at_zero(r)});
    }
    return run_delay_recursion(probes, nu_max);
}

DelayCurve OcSolver::srp_delay_curve(int nu_max) {
    const auto& q = quasi_stationary();
    const Probe probe{q.masses, srp_sadd()};
    return run_delay_recursion(std::span<const Probe>(&probe, 1), nu_max)[0];
}

double OcSolver::lower_bound() {
    const Eigen::VectorXd psi = pre_solver().solve(phi_post());
    const Eigen::VectorXd row0 = row_at(*model_, KernelKind::pre_change, grid_, 0.0);
    const double psi0 = delay_at_zero(0.0) + row0.dot(psi);
    return psi0 / arl(0.0);
}

SaddResult OcSolver::sadd(double r, int nu_max) {
    SaddResult out;
    out.curve = delay_curve(r, nu_max);
    const auto& d = out.curve.delay;
    const auto imax = static_cast<std::size_t>(
        std::max_element(d.begin(), d.end()) - d.begin());
    out.sadd = std::max(d[imax], out.curve.tail);
    if (imax == 0 && d[0] >= out.curve.tail)
        out.argmax = ArgmaxKind::at_zero;
    else if (out.curve.tail_stationary &&
             (imax + 5 >= d.size() || out.curve.tail >= d[imax]))
        out.argmax = ArgmaxKind::at_infinity;
    else
        out.argmax = ArgmaxKind::interior;
    return out;
}

OcResult OcSolver::analyze(ProcedureKind kind, double head_start, int nu_max) {
    OcResult res;
    res.procedure = kind;
    res.threshold = threshold_;
    switch (kind) {
        case ProcedureKind::sr:
        case ProcedureKind::sr_r: {
            const double r = kind == ProcedureKind::sr ? 0.0 : head_start;
            res.head_start = r;
            res.arl_false_alarm = arl(r);
            SaddResult s = sadd(r, nu_max);
            res.delay_curve = std::move(s.curve.delay);
            res.survival = std::move(s.curve.survival);
            res.sadd = s.sadd;
            res.add_infinity = s.curve.tail;
            res.argmax_kind = s.argmax;
            if (kind == ProcedureKind::sr) res.lower_bound = lower_bound();
            break;
        }
        case ProcedureKind::srp: {
            res.head_start = quasi_stationary().mean;
            res.arl_false_alarm = srp_arl();
            DelayCurve c = srp_delay_curve(nu_max);
            res.delay_curve = std::move(c.delay);
            res.survival = std::move(c.survival);
            res.sadd = srp_sadd();
            res.add_infinity = res.sadd;
            res.argmax_kind = ArgmaxKind::at_infinity;  // equalizer: constant curve
            break;
        }
    }
    return res;
}

namespace {

double target_arl(const ChangepointModel& model, const CalibrationTarget& target, double A,
                  int grid_n) {
    OcSolver solver(model, A, grid_n);
    switch (target.kind) {
        case ProcedureKind::sr:
            return solver.arl(0.0);
        case ProcedureKind::sr_r: {
            const double r = target.adaptive_mu ? solver.quasi_stationary().mean : target.fixed_r;
            if (r >= A) return 1.0;  // infeasible head start at this trial A
            return solver.arl(r);
        }
        case ProcedureKind::srp:
            return solver.srp_arl();
    }
    return 0.0;
}

} // namespace

CalibrationResult calibrate_threshold(const ChangepointModel& model, const CalibrationTarget& target,
                                      double gamma, const CalibrateOptions& opts) {
    if (!(gamma > 1.0)) throw ConfigError("calibrate_threshold: gamma must exceed 1");

    CalibrationResult res;
    auto coarse = [&](double A) {
        ++res.coarse_evals;
        return target_arl(model, target, A, opts.coarse_grid_n);
    };
    auto fine = [&](double A) {
        ++res.fine_evals;
        return target_arl(model, target, A, opts.grid_n);
    };

    // Bracket on the coarse grid. E_pre T >= A - r guarantees an upper
    // bracket after finitely many doublings.
    double a_hi = std::min(opts.a_max, std::max(2.0, gamma + target.fixed_r));
    double f_hi = coarse(a_hi);
    int guard = 0;
    while (f_hi < gamma) {
        a_hi *= 2.0;
        if (a_hi > opts.a_max || ++guard > 60)
            throw CalibrationError("calibrate_threshold: no upper bracket below a_max");
        f_hi = coarse(a_hi);
    }
    double a_lo = a_hi / 2.0;
    double f_lo = coarse(a_lo);
    guard = 0;
    while (f_lo >= gamma) {
        a_lo /= 2.0;
        if (a_lo < opts.a_min || ++guard > 60)
            throw CalibrationError("calibrate_threshold: no lower bracket above a_min");
        f_lo = coarse(a_lo);
    }

    // Secant steps clipped to the bracket, bisection as fallback. The map is
    // monotone and nearly linear (ARL ~ A/zeta - r), so this converges in a
    // handful of evaluations.
    double A = a_hi, f = f_hi;
    for (int it = 0; it < opts.max_iter; ++it) {
        if (std::abs(f - gamma) <= 0.5 * opts.rel_tol * gamma) break;
        double step = (f_hi != f_lo) ? (gamma - f) * (a_hi - a_lo) / (f_hi - f_lo) : 0.0;
        double next = A + step;
        if (!(next > a_lo && next < a_hi)) next = 0.5 * (a_lo + a_hi);
        f = coarse(next);
        A = next;
        if (f < gamma) {
            a_lo = A;
            f_lo = f;
        } else {
            a_hi = A;
            f_hi = f;
        }
    }

    // Fine-grid polish around the coarse solution. The grids agree closely,
    // so one or two corrections with the local slope suffice.
    const double slope = (f_hi - f_lo) != 0.0 ? (a_hi - a_lo) / (f_hi - f_lo) : 0.5;
    double f_fine = fine(A);
    for (int it = 0; it < 25 && std::abs(f_fine - gamma) > opts.rel_tol * gamma; ++it) {
        A += (gamma - f_fine) * slope;
        f_fine = fine(A);
    }
    if (std::abs(f_fine - gamma) > opts.rel_tol * gamma) {
        std::ostringstream msg;
        msg << "calibrate_threshold: fine polish stalled at ARL " << f_fine << " for gamma " << gamma;
        throw CalibrationError(msg.str());
    }
    res.threshold = A;
    res.arl = f_fine;
    return res;
}

} // namespace srd
