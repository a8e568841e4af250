#ifndef SRDETECT_QUASI_STATIONARY_HPP
#define SRDETECT_QUASI_STATIONARY_HPP

#include <Eigen/Dense>

#include "srdetect/grid.hpp"

namespace srd {

// Quasi-stationary law Q_A of the SR statistic on [0, A): the leading
// eigen-measure of the pre-change kernel restricted to the interval.
// cdf_nodes holds Q_A evaluated at the grid nodes through the eigenvalue
// relation Q_A(x) = (1/lambda) sum_j F_inf(x/(1+y_j)) m_j, which is accurate
// to quadrature precision (cumulative masses are biased by half a node).
struct QuasiStationary {
    double threshold = 0.0;   // A
    double eigenvalue = 0.0;  // lambda_A in (0,1)
    double mean = 0.0;        // mu_A
    Grid grid;
    Eigen::VectorXd masses;   // sum to 1
    Eigen::VectorXd cdf_nodes;

    // Linear interpolation through (0,0), (nodes, cdf_nodes), (A,1).
    double cdf(double x) const;
};

} // namespace srd

#endif
