#include "srdetect/integral_operator.hpp"

#include "srdetect/errors.hpp"
#include "srdetect/simd/simd.hpp"

namespace srd {
namespace {

void generic_row(const ChangepointModel& model, KernelKind kind, const Grid& grid,
                 double y, double* out) {
    const std::size_t n = grid.size();
    const double c = 1.0 + y;
    switch (kind) {
        case KernelKind::pre_change:
            for (std::size_t i = 0; i < n; ++i)
                out[i] = grid.weights[i] * model.pdf_lr_pre(grid.nodes[i] / c) / c;
            break;
        case KernelKind::post_change:
            for (std::size_t i = 0; i < n; ++i)
                out[i] = grid.weights[i] * model.pdf_lr_post(grid.nodes[i] / c) / c;
            break;
        case KernelKind::v_walk:
            for (std::size_t i = 0; i < n; ++i) {
                const double x = grid.nodes[i];
                out[i] = grid.weights[i] * model.pdf_lr_post(c / x) * c / (x * x);
            }
            break;
    }
}

void require_pdfs(const ChangepointModel& model) {
    if (!model.has_pdfs())
        throw UnsupportedModelError("model '" + model.name +
                                    "' has no differentiable likelihood-ratio cdf; "
                                    "the integral-equation solver is unavailable for it");
}

DiscretizedOperator discretize(const ChangepointModel& model, KernelKind kind, const Grid& grid) {
    require_pdfs(model);
    DiscretizedOperator op;
    op.grid = grid;
    op.kind = kind;
    const auto n = static_cast<Eigen::Index>(grid.size());
    op.matrix.resize(n, n);
    std::vector<double> row(grid.size());
    for (Eigen::Index j = 0; j < n; ++j) {
        weighted_kernel_row(model, kind, grid, grid.nodes[static_cast<std::size_t>(j)], row.data());
        op.matrix.row(j) = Eigen::Map<const Eigen::VectorXd>(row.data(), n);
    }
    return op;
}

} // namespace

void weighted_kernel_row(const ChangepointModel& model, KernelKind kind, const Grid& grid,
                         double y, double* out) {
    if (model.family == ModelFamily::beta && kind != KernelKind::v_walk) {
        // beta kernels have the closed forms 2(1+y)^2/(1+x+y)^3 (pre) and
        // 2x(1+y)/(1+x+y)^3 (post); the v-walk kernel coincides with the
        // pre-change one for this model but is kept on the generic path.
        const auto& ops = simd::ops();
        if (kind == KernelKind::pre_change)
            ops.beta_row_pre(grid.nodes.data(), grid.weights.data(), grid.size(), y, out);
        else
            ops.beta_row_post(grid.nodes.data(), grid.weights.data(), grid.size(), y, out);
        return;
    }
    require_pdfs(model);
    generic_row(model, kind, grid, y, out);
}

DiscretizedOperator discretize_kernel(const ChangepointModel& model, Regime regime, const Grid& grid) {
    return discretize(model, regime == Regime::pre ? KernelKind::pre_change : KernelKind::post_change,
                      grid);
}

DiscretizedOperator discretize_v_kernel(const ChangepointModel& model, const Grid& grid) {
    return discretize(model, KernelKind::v_walk, grid);
}

} // namespace srd
