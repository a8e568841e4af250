#ifndef SRDETECT_FREDHOLM_HPP
#define SRDETECT_FREDHOLM_HPP

#include <Eigen/Dense>

#include "srdetect/integral_operator.hpp"

namespace srd {

// Direct solver for Fredholm equations of the second kind, u = rhs + T u,
// via one dense LU of (I - M). The factorization is reused across right-hand
// sides (ARL, delay-sum and lower-bound solves share the pre-change one).
// The operator must outlive the solver.
class FredholmSolver {
public:
    explicit FredholmSolver(const DiscretizedOperator& op);

    // Throws NumericalError (with an estimated spectral radius) when the
    // residual check ||u - rhs - M u||_inf < 1e-10 ||u||_inf fails.
    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

    const DiscretizedOperator& op() const { return *op_; }

private:
    const DiscretizedOperator* op_;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

Eigen::VectorXd solve_fredholm(const DiscretizedOperator& op, const Eigen::VectorXd& rhs);

struct LeadingEigenpair {
    double eigenvalue = 0.0;     // lambda_A in (0,1) for sub-stochastic kernels
    Eigen::VectorXd masses;      // nonnegative, sums to 1 (point masses at grid nodes)
    int iterations = 0;
    double residual_l1 = 0.0;    // ||M^T m - lambda m||_1 at exit
};

// Power iteration on the transpose (measure) action. Converges when two
// successive eigenvalue estimates differ by less than tol; throws
// NumericalError with the last residual if max_iter is exhausted.
LeadingEigenpair leading_eigenpair(const DiscretizedOperator& op, double tol = 1e-12,
                                   int max_iter = 200000);

} // namespace srd

#endif
