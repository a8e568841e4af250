#ifndef SRDETECT_INTEGRAL_OPERATOR_HPP
#define SRDETECT_INTEGRAL_OPERATOR_HPP

#include <Eigen/Dense>

#include "srdetect/grid.hpp"
#include "srdetect/model.hpp"

namespace srd {

// Transition kernels of the Markov statistics, as densities in the target
// state x given the starting state y:
//   pre_change :  d/dx F_inf(x/(1+y))  -- one SR step under P_pre
//   post_change:  d/dx F_0(x/(1+y))    -- one SR step under P_post
//   v_walk     : -d/dx F_0((1+y)/x)    -- one step of V' = (1+V)/Lambda under P_post
enum class KernelKind { pre_change, post_change, v_walk };

// Nystrom discretization. matrix(j, i) = w_i * k(x_i | y_j): row j is the
// starting state y_j, column i the target node x_i, quadrature weight
// included. Function action (T u)(y_j) = sum_i matrix(j,i) u(x_i) = (M u)_j;
// measures evolve through the transpose, masses' = M^T masses.
struct DiscretizedOperator {
    Grid grid;
    KernelKind kind = KernelKind::pre_change;
    Eigen::MatrixXd matrix;
};

// Throws UnsupportedModelError when the model lacks the needed pdf.
DiscretizedOperator discretize_kernel(const ChangepointModel& model, Regime regime, const Grid& grid);
DiscretizedOperator discretize_v_kernel(const ChangepointModel& model, const Grid& grid);

// One weighted kernel row at an arbitrary starting state y (the natural
// Nystrom evaluation of operator images off the grid). out has grid.size()
// entries: out[i] = w_i * k(x_i | y).
void weighted_kernel_row(const ChangepointModel& model, KernelKind kind, const Grid& grid,
                         double y, double* out);

} // namespace srd

#endif
