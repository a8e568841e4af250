#include "srdetect/fredholm.hpp"

#include <cmath>
#include <sstream>

#include "srdetect/errors.hpp"

namespace srd {
namespace {

double estimate_spectral_radius(const Eigen::MatrixXd& m) {
    Eigen::VectorXd v = Eigen::VectorXd::Ones(m.rows());
    v /= v.lpNorm<1>();
    double rho = 0.0;
    for (int it = 0; it < 100; ++it) {
        Eigen::VectorXd w = m * v;
        const double norm = w.lpNorm<1>();
        if (norm == 0.0) return 0.0;
        rho = norm;
        v = w / norm;
    }
    return rho;
}

} // namespace

FredholmSolver::FredholmSolver(const DiscretizedOperator& op) : op_(&op) {
    const auto n = op.matrix.rows();
    Eigen::MatrixXd system = Eigen::MatrixXd::Identity(n, n) - op.matrix;
    lu_.compute(system);
}

Eigen::VectorXd FredholmSolver::solve(const Eigen::VectorXd& rhs) const {
    Eigen::VectorXd u = lu_.solve(rhs);
    const double resid = (u - rhs - op_->matrix * u).lpNorm<Eigen::Infinity>();
    const double scale = u.lpNorm<Eigen::Infinity>();
    if (!(resid <= 1e-10 * scale) || !u.allFinite()) {
        std::ostringstream msg;
        msg << "Fredholm solve failed residual check (residual " << resid << ", scale " << scale
            << "); estimated spectral radius " << estimate_spectral_radius(op_->matrix);
        throw NumericalError(msg.str());
    }
    return u;
}

Eigen::VectorXd solve_fredholm(const DiscretizedOperator& op, const Eigen::VectorXd& rhs) {
    return FredholmSolver(op).solve(rhs);
}

LeadingEigenpair leading_eigenpair(const DiscretizedOperator& op, double tol, int max_iter) {
    const auto n = op.matrix.rows();
    Eigen::VectorXd m = Eigen::Map<const Eigen::VectorXd>(op.grid.weights.data(), n);
    m /= m.sum();

    double lambda_prev = -1.0;
    double lambda = 0.0;
    for (int it = 1; it <= max_iter; ++it) {
        Eigen::VectorXd next = op.matrix.transpose() * m;
        lambda = next.sum();
        if (!(lambda > 0.0))
            throw NumericalError("leading_eigenpair: operator maps the start measure to zero");
        next /= lambda;
        m.swap(next);
        if (it >= 3 && std::abs(lambda - lambda_prev) < tol) {
            LeadingEigenpair out;
            out.eigenvalue = lambda;
            out.masses = std::move(m);
            out.iterations = it;
            out.residual_l1 = (op.matrix.transpose() * out.masses - lambda * out.masses).lpNorm<1>();
            return out;
        }
        lambda_prev = lambda;
    }
    std::ostringstream msg;
    msg << "leading_eigenpair: no convergence after " << max_iter << " iterations; last eigenvalue delta "
        << std::abs(lambda - lambda_prev);
    throw NumericalError(msg.str());
}

} // namespace srd
