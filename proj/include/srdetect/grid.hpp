#ifndef SRDETECT_GRID_HPP
#define SRDETECT_GRID_HPP

#include <cstddef>
#include <vector>

namespace srd {

// Quadrature grid on [0, A]: composite Gauss-Legendre panels whose edges are
// geometric in 1+x, i.e. e_i = (1+A)^(i/P) - 1. Every kernel in this family
// varies on the scale of 1+x, so this layout keeps the per-panel quadrature
// error uniformly near machine precision; uniform panels lose the ARL solve
// entirely for large A (the Fredholm solve amplifies kernel errors by the
// run length).
struct Grid {
    double upper = 0.0;
    int panel_order = 16;
    std::vector<double> nodes;   // strictly increasing, inside (0, A)
    std::vector<double> weights; // positive, sum to A

    std::size_t size() const { return nodes.size(); }
};

// n is rounded up to a multiple of panel_order. Throws ConfigError for
// A <= 0 or n < 64. Deterministic in (A, n, panel_order).
Grid build_grid(double A, int n, int panel_order = 16);

// Nodes/weights of the p-point Gauss-Legendre rule on [-1, 1].
void gauss_legendre(int p, std::vector<double>& nodes, std::vector<double>& weights);

// Values on the grid nodes with a clamped linear-interpolation accessor.
struct GridFunction {
    std::vector<double> xs;
    std::vector<double> ys;

    double operator()(double x) const;
};

} // namespace srd

#endif
