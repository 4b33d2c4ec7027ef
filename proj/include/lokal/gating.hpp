#pragma once

// Gating functions: per-point kernel weights eta(x) in the probability simplex.
//
//   Constant       eta(x) = mu                      (global MKL weights)
//   SoftmaxLinear  eta(x) = softmax(x^T V + v0)
//   Regressor      eta(x) = softmax(clamp(g_1(x)), ..., clamp(g_m(x)))
//   Cluster        gamma_i(x, x') = sum_r beta_ir c_r(x) c_r(x')
//
// The cluster variant is not separable per point; it only exists at the Gram
// level (see cluster_gated_gram) and eval_gating rejects it.

#include "lokal/clustering.hpp"
#include "lokal/common.hpp"
#include "lokal/kernels.hpp"
#include "lokal/softmax.hpp"
#include "lokal/solver.hpp"

#include <memory>
#include <variant>
#include <vector>

namespace lokal {

struct ConstantGating {
    Vector mu;
};

struct SoftmaxLinearGating {
    Matrix weights; // d x m
    Vector offsets; // m
};

/// One SVR per kernel, fit on the training points in `train_x`.
struct RegressorGating {
    std::vector<KernelSpec> kernels;
    std::vector<SvrModel> regressors;
    std::shared_ptr<const Matrix> train_x;
};

/// Soft cluster memberships computed against fixed training centroids.
struct ClusterGating {
    Matrix beta; // m x l
    std::vector<KernelSpec> assign_kernels; // averaged to form the clustering kernel
    std::shared_ptr<const Matrix> train_x;
    std::shared_ptr<const KernelCentroids> centroids;
    double tau = 1.0;
};

using GatingModel = std::variant<ConstantGating, SoftmaxLinearGating, RegressorGating, ClusterGating>;

inline Index gating_width(const GatingModel& model) {
    switch (model.index()) {
    case 0: return std::get<ConstantGating>(model).mu.size();
    case 1: return std::get<SoftmaxLinearGating>(model).offsets.size();
    case 2: return static_cast<Index>(std::get<RegressorGating>(model).regressors.size());
    default: return std::get<ClusterGating>(model).beta.rows();
    }
}

inline ConstantGating make_constant_gating(Vector mu) {
    detail::require(mu.size() >= 1, "constant gating needs at least one weight");
    detail::require((mu.array() >= 0.0).all(), "constant gating weights must be nonnegative");
    detail::require(std::abs(mu.sum() - 1.0) <= 1e-9, "constant gating weights must sum to 1");
    return ConstantGating{std::move(mu)};
}

/// Raw gate values clamp(g_i(x_k)) for every row of `x`, p x m.
inline Matrix regressor_outputs(const RegressorGating& g, const Matrix& x) {
    detail::require(g.train_x != nullptr, "regressor gating has no training points");
    detail::require(g.kernels.size() == g.regressors.size(), "one kernel per regressor");
    const auto m = static_cast<Index>(g.regressors.size());
    Matrix out(x.rows(), m);
    Matrix cross;
    for (Index i = 0; i < m; ++i) {
        const auto& spec = g.kernels[static_cast<std::size_t>(i)];
        if (i == 0 || spec != g.kernels[static_cast<std::size_t>(i - 1)]) cross = gram_cross(spec, *g.train_x, x);
        out.col(i) = predict_gate(g.regressors[static_cast<std::size_t>(i)], cross);
    }
    return out;
}

/// Soft memberships of the rows of `x` against the training centroids.
inline SoftAssignment cluster_memberships(const ClusterGating& g, const Matrix& x) {
    detail::require(g.train_x != nullptr && g.centroids != nullptr, "cluster gating is not initialized");
    std::vector<Matrix> crosses;
    Vector diag = Vector::Zero(x.rows());
    for (const auto& spec : g.assign_kernels) {
        crosses.push_back(gram_cross(spec, *g.train_x, x));
        diag += kernel_diagonal(spec, x);
    }
    diag /= static_cast<double>(g.assign_kernels.size());
    return soften_distances(g.centroids->distances(uniform_cross(crosses), diag), g.tau);
}

/// Gating weights for every row of `x`, n x m.
inline EtaMatrix eta_matrix(const GatingModel& model, const Matrix& x) {
    switch (model.index()) {
    case 0: {
        const auto& mu = std::get<ConstantGating>(model).mu;
        EtaMatrix out(x.rows(), mu.size());
        out.rowwise() = mu.transpose();
        return out;
    }
    case 1: {
        const auto& g = std::get<SoftmaxLinearGating>(model);
        detail::require(x.cols() == g.weights.rows(), "gating: feature dimension mismatch");
        Matrix logits = x * g.weights;
        logits.rowwise() += g.offsets.transpose();
        return softmax_rows(logits);
    }
    case 2: return softmax_rows(regressor_outputs(std::get<RegressorGating>(model), x));
    default: throw error("cluster gating is pairwise; evaluate it at the Gram level via cluster_gated_gram");
    }
}

template <typename Derived>
Vector eval_gating(const GatingModel& model, const Eigen::MatrixBase<Derived>& x) {
    Matrix row(1, x.size());
    for (Index k = 0; k < x.size(); ++k) row(0, k) = x(k);
    return eta_matrix(model, row).row(0).transpose();
}

} // namespace lokal
