#include "srdetect/grid.hpp"

#include <algorithm>
#include <cmath>

#include "srdetect/errors.hpp"

namespace srd {

void gauss_legendre(int p, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.assign(p, 0.0);
    weights.assign(p, 0.0);
    const double pi = 3.14159265358979323846;
    for (int k = 0; k < (p + 1) / 2; ++k) {
        // Newton iteration from the Chebyshev-based initial guess
        double x = std::cos(pi * (k + 0.75) / (p + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= p; ++j) {
                const double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = p * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[k] = -x;
        nodes[p - 1 - k] = x;
        weights[k] = w;
        weights[p - 1 - k] = w;
    }
    if (p % 2 == 1) nodes[p / 2] = 0.0;
}

Grid build_grid(double A, int n, int panel_order) {
    if (!(A > 0.0)) throw ConfigError("build_grid: threshold must be positive");
    if (n < 64) throw ConfigError("build_grid: need at least 64 nodes");
    if (panel_order < 2 || panel_order > 64) throw ConfigError("build_grid: panel order out of range");

    const int panels = (n + panel_order - 1) / panel_order;

    std::vector<double> gx, gw;
    gauss_legendre(panel_order, gx, gw);

    Grid grid;
    grid.upper = A;
    grid.panel_order = panel_order;
    grid.nodes.reserve(static_cast<std::size_t>(panels) * panel_order);
    grid.weights.reserve(static_cast<std::size_t>(panels) * panel_order);

    const double log1pA = std::log1p(A);
    double lo = 0.0;
    for (int i = 0; i < panels; ++i) {
        const double hi = (i + 1 == panels) ? A : std::expm1(log1pA * (i + 1) / panels);
        const double mid = 0.5 * (lo + hi);
        const double half = 0.5 * (hi - lo);
        for (int j = 0; j < panel_order; ++j) {
            grid.nodes.push_back(mid + half * gx[j]);
            grid.weights.push_back(half * gw[j]);
        }
        lo = hi;
    }
    return grid;
}

double GridFunction::operator()(double x) const {
    if (xs.empty()) return 0.0;
    if (x <= xs.front()) return ys.front();
    if (x >= xs.back()) return ys.back();
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - xs.begin());
    const double t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
    return ys[i - 1] + t * (ys[i] - ys[i - 1]);
}

} // namespace srd
