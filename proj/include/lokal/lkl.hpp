#pragma once

// Localized kernel learning trainers and predictors.
//
//   uniform  one SVM on the mean of the kernel dictionary
//   lmkl     alternate an SVM on the softmax-gated kernel with gradient steps
//            on the gating parameters (V, v0)
//   swmkl    per-kernel SVMs, SVR gates fit to each kernel's successes, then
//            one SVM on the pairwise-normalized gated kernel
//   ldmkl    per-kernel SVMs and SVR gates as in swmkl, gates normalized by
//            softmax, each SVM retrained where its gate is at least 1/m;
//            prediction is sign(sum_i g_i(x) tanh(fbar_i(x)))
//   clmkl    kernel k-means soft clusters on the uniform kernel, alternate an
//            SVM on the cluster-gated kernel with exponentiated-gradient
//            steps on the per-cluster kernel weights beta

#include "lokal/clustering.hpp"
#include "lokal/common.hpp"
#include "lokal/data.hpp"
#include "lokal/gating.hpp"
#include "lokal/kernels.hpp"
#include "lokal/solver.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace lokal {

enum class Method { uniform, lmkl, swmkl, ldmkl, clmkl };

inline Method parse_method(std::string_view s) {
    if (s == "uniform") return Method::uniform;
    if (s == "lmkl") return Method::lmkl;
    if (s == "swmkl") return Method::swmkl;
    if (s == "ldmkl") return Method::ldmkl;
    if (s == "clmkl") return Method::clmkl;
    throw error("unknown method '" + std::string(s) + "' (uniform|lmkl|swmkl|ldmkl|clmkl)");
}

inline const char* to_string(Method m) {
    switch (m) {
    case Method::uniform: return "uniform";
    case Method::lmkl: return "lmkl";
    case Method::swmkl: return "swmkl";
    case Method::ldmkl: return "ldmkl";
    default: return "clmkl";
    }
}

inline bool is_localized(Method m) { return m != Method::uniform; }

struct LmklOptions {
    double learning_rate = 0.01; // decays as 1/sqrt(t)
    int outer_iters = 100;
    double grad_tol = 1e-5; // stop once |J_t - J_{t-1}| falls below this
};

struct ClmklOptions {
    Index clusters = 3;
    double beta_step = 0.5;
    int outer_iters = 50;
    double objective_tol = 1e-5;
    double tau = 1.0;
    std::uint64_t seed = 0;
    Index kmeans_max_iter = 100;
};

/// SVR gate regressors used by swmkl and ldmkl. Without an explicit kernel a
/// Gaussian with the median-distance bandwidth of the training set is used.
struct GateOptions {
    SvmParams svr{};
    std::optional<KernelSpec> kernel;
};

struct TrainConfig {
    SvmParams svm{};
    LmklOptions lmkl{};
    ClmklOptions clmkl{};
    GateOptions gate{};

    void validate() const {
        svm.validate();
        gate.svr.validate();
        detail::require(lmkl.learning_rate > 0.0 && lmkl.outer_iters > 0 && lmkl.grad_tol > 0.0, "lmkl options must be positive");
        detail::require(clmkl.clusters > 0 && clmkl.beta_step > 0.0 && clmkl.outer_iters > 0 && clmkl.objective_tol > 0.0 && clmkl.tau > 0.0,
                        "clmkl options must be positive");
    }
};

/// Kernel dictionary together with its Gram matrices on one training set.
struct KernelBank {
    std::vector<KernelSpec> specs;
    std::vector<GramMatrix> grams;

    static KernelBank build(const std::vector<KernelSpec>& specs, const Matrix& x) {
        detail::require(!specs.empty(), "need at least one kernel");
        KernelBank bank;
        bank.specs = specs;
        for (const auto& s : specs) bank.grams.push_back(gram(s, x));
        return bank;
    }

    Index size() const { return static_cast<Index>(specs.size()); }

    std::vector<Matrix> crosses(const Matrix& train_x, const Matrix& query) const {
        std::vector<Matrix> out;
        for (const auto& s : specs) out.push_back(gram_cross(s, train_x, query));
        return out;
    }
};

struct LklModel {
    Method method = Method::uniform;
    std::vector<KernelSpec> kernels;
    std::shared_ptr<const Matrix> train_x;
    Vector train_y;

    /// lmkl: SoftmaxLinear, swmkl/ldmkl: Regressor, clmkl: Cluster, uniform: Constant.
    GatingModel gating = ConstantGating{};

    /// ldmkl: one model per kernel (trained on `subsets[i]`); otherwise one
    /// combined model over all training points.
    std::vector<SvmModel> components;
    std::vector<std::vector<Index>> subsets;

    /// Gate values at the training points (swmkl: clamped SVR outputs,
    /// ldmkl: their softmax, lmkl: eta, clmkl: soft memberships).
    Matrix train_gates;

    /// ldmkl kernels whose retraining subset was single-class.
    std::vector<Index> kept_stage1;

    std::vector<double> objective_trace;
    int outer_iterations = 0;
    bool outer_converged = true;
    bool solver_converged = true;

    Index n_train() const { return train_y.size(); }
    Index m() const { return static_cast<Index>(kernels.size()); }
};

// ---------------------------------------------------------------------------
// Shared helpers

/// 1/(2 median ||x_j - x_k||^2) over pairs of at most 500 evenly strided rows.
inline double median_heuristic_gamma(const Matrix& x) {
    const Index n = x.rows();
    const Index take = std::min<Index>(n, 500);
    std::vector<double> d2;
    for (Index a = 0; a < take; ++a)
        for (Index b = a + 1; b < take; ++b) {
            const Index ja = a * n / take, jb = b * n / take;
            d2.push_back((x.row(ja) - x.row(jb)).squaredNorm());
        }
    if (d2.empty()) return 1.0;
    auto mid = d2.begin() + static_cast<std::ptrdiff_t>(d2.size() / 2);
    std::nth_element(d2.begin(), mid, d2.end());
    return *mid > 0.0 ? 1.0 / (2.0 * *mid) : 1.0;
}

/// sum_j alpha_j - 1/2 a^T K a with a = dual_coef = alpha * y.
inline double svc_dual_objective(const Vector& dual_coef, const Vector& y, const Matrix& k) {
    return dual_coef.cwiseProduct(y).sum() - 0.5 * dual_coef.dot(k * dual_coef);
}

/// 1 where the classifier's sign (0 -> +1) matches the label, else 0.
inline Vector correctness_targets(const SvmModel& f, const GramMatrix& gram, const Vector& y) {
    const Vector fx = predict_decision(f, gram.entries);
    Vector out(y.size());
    for (Index j = 0; j < y.size(); ++j) out[j] = sign_label(fx[j]) == y[j] ? 1.0 : 0.0;
    return out;
}

namespace detail {

inline void check_training_set(const Dataset& train, const KernelBank& bank) {
    train.validate();
    require(bank.size() >= 1, "need at least one kernel");
    for (const auto& g : bank.grams) require(g.n() == train.n(), "kernel bank does not match training set");
    if (!train.has_both_classes()) throw error("training set needs both classes");
}

inline LklModel skeleton(Method method, const Dataset& train, const KernelBank& bank) {
    LklModel model;
    model.method = method;
    model.kernels = bank.specs;
    model.train_x = std::make_shared<const Matrix>(train.features);
    model.train_y = train.labels;
    return model;
}

/// Per-kernel SVMs, success indicators and SVR gates (first stage of swmkl / ldmkl).
struct StageOne {
    std::vector<SvmModel> classifiers;
    RegressorGating gates;
    Matrix raw_gates; // n x m, clamped SVR outputs at training points
    bool converged = true;
};

inline StageOne train_stage_one(const Dataset& train, const KernelBank& bank, const TrainConfig& cfg) {
    StageOne s;
    const Index n = train.n();
    const Index m = bank.size();
    const KernelSpec gate_kernel = cfg.gate.kernel ? *cfg.gate.kernel : KernelSpec{GaussianKernel{median_heuristic_gamma(train.features)}};
    const GramMatrix gate_gram = gram(gate_kernel, train.features);

    s.gates.train_x = std::make_shared<const Matrix>(train.features);
    s.raw_gates.resize(n, m);
    for (Index i = 0; i < m; ++i) {
        const auto& k = bank.grams[static_cast<std::size_t>(i)];
        SvmModel f = train_svc(k, train.labels, cfg.svm);
        SvrModel g = train_svr(gate_gram, correctness_targets(f, k, train.labels), cfg.gate.svr);
        s.raw_gates.col(i) = predict_gate(g, gate_gram.entries);
        s.converged = s.converged && f.converged && g.converged;
        s.classifiers.push_back(std::move(f));
        s.gates.kernels.push_back(gate_kernel);
        s.gates.regressors.push_back(std::move(g));
    }
    return s;
}

inline bool all_converged(const std::vector<SvmModel>& models) {
    return std::all_of(models.begin(), models.end(), [](const SvmModel& m) { return m.converged; });
}

} // namespace detail

// ---------------------------------------------------------------------------
// Uniform

inline LklModel train_uniform(const Dataset& train, const KernelBank& bank, const TrainConfig& cfg = {}) {
    cfg.validate();
    detail::check_training_set(train, bank);
    LklModel model = detail::skeleton(Method::uniform, train, bank);
    const auto m = bank.size();
    model.gating = make_constant_gating(Vector::Constant(m, 1.0 / static_cast<double>(m)));
    model.components.push_back(train_svc(uniform_gram(bank.grams), train.labels, cfg.svm));
    model.solver_converged = model.components[0].converged;
    return model;
}

// ---------------------------------------------------------------------------
// LMKL

/// J(V, v0) = sum_j alpha_j - 1/2 a^T K_eta a at fixed dual coefficients a.
inline double lmkl_objective(const std::vector<GramMatrix>& grams, const Vector& dual_coef, const Vector& y, const Matrix& x,
                             const SoftmaxLinearGating& gating) {
    const EtaMatrix eta = eta_matrix(gating, x);
    return svc_dual_objective(dual_coef, y, combined_gram_separable(grams, eta).entries);
}

struct LmklGradient {
    Matrix weights; // d x m
    Vector offsets; // m
};

/// Analytic gradient of lmkl_objective with respect to (V, v0).
///
/// With u_i = K_i (a o eta_i) and logits s_j = x_j^T V + v0,
///   dJ/ds_jh = -a_j eta_h(x_j) (u_hj - sum_i eta_i(x_j) u_ij).
inline LmklGradient lmkl_gradient(const std::vector<GramMatrix>& grams, const Vector& dual_coef, const Matrix& x,
                                  const SoftmaxLinearGating& gating) {
    const EtaMatrix eta = eta_matrix(gating, x);
    const Index n = x.rows();
    const auto m = static_cast<Index>(grams.size());
    detail::require(dual_coef.size() == n && eta.cols() == m, "lmkl_gradient: shape mismatch");
    Matrix u(n, m);
    for (Index i = 0; i < m; ++i) u.col(i) = grams[static_cast<std::size_t>(i)].entries * dual_coef.cwiseProduct(eta.col(i));
    Matrix ds(n, m);
    for (Index j = 0; j < n; ++j) {
        const double mean_u = eta.row(j).dot(u.row(j));
        for (Index h = 0; h < m; ++h) ds(j, h) = -dual_coef[j] * eta(j, h) * (u(j, h) - mean_u);
    }
    return LmklGradient{x.transpose() * ds, ds.colwise().sum().transpose()};
}

inline LklModel train_lmkl(const Dataset& train, const KernelBank& bank, const TrainConfig& cfg = {}) {
    cfg.validate();
    detail::check_training_set(train, bank);
    LklModel model = detail::skeleton(Method::lmkl, train, bank);
    const Index m = bank.size();
    SoftmaxLinearGating gating{Matrix::Zero(train.d(), m), Vector::Zero(m)};

    model.outer_converged = false;
    SvmModel svm;
    EtaMatrix eta;
    for (int t = 1; t <= cfg.lmkl.outer_iters; ++t) {
        eta = eta_matrix(gating, train.features);
        const GramMatrix k_eta = combined_gram_separable(bank.grams, eta);
        svm = train_svc(k_eta, train.labels, cfg.svm);
        model.solver_converged = model.solver_converged && svm.converged;
        model.objective_trace.push_back(svc_dual_objective(svm.dual_coef, train.labels, k_eta.entries));
        model.outer_iterations = t;
        const auto& tr = model.objective_trace;
        if (tr.size() >= 2 && std::abs(tr[tr.size() - 1] - tr[tr.size() - 2]) < cfg.lmkl.grad_tol) {
            model.outer_converged = true;
            break;
        }
        if (t == cfg.lmkl.outer_iters) break;
        // The bias is held fixed here; the next SVM solve refreshes it.
        const LmklGradient grad = lmkl_gradient(bank.grams, svm.dual_coef, train.features, gating);
        const double rate = cfg.lmkl.learning_rate / std::sqrt(static_cast<double>(t));
        gating.weights -= rate * grad.weights;
        gating.offsets -= rate * grad.offsets;
    }
    // The final SVM was trained under `eta`, i.e. the gating before any later step.
    model.gating = gating;
    model.train_gates = eta;
    model.components.push_back(std::move(svm));
    return model;
}

// ---------------------------------------------------------------------------
// SwMKL

inline LklModel train_swmkl(const Dataset& train, const KernelBank& bank, const TrainConfig& cfg = {}) {
    cfg.validate();
    detail::check_training_set(train, bank);
    LklModel model = detail::skeleton(Method::swmkl, train, bank);
    detail::StageOne s1 = detail::train_stage_one(train, bank, cfg);
    const GramMatrix combined = combined_gram_swmkl(bank.grams, s1.raw_gates);
    model.components.push_back(train_svc(combined, train.labels, cfg.svm));
    model.solver_converged = s1.converged && model.components[0].converged;
    model.train_gates = s1.raw_gates;
    model.gating = std::move(s1.gates);
    return model;
}

// ---------------------------------------------------------------------------
// LD-MKL

inline LklModel train_ldmkl(const Dataset& train, const KernelBank& bank, const TrainConfig& cfg = {}) {
    cfg.validate();
    detail::check_training_set(train, bank);
    LklModel model = detail::skeleton(Method::ldmkl, train, bank);
    detail::StageOne s1 = detail::train_stage_one(train, bank, cfg);
    const Matrix gates = softmax_rows(s1.raw_gates);
    const Index n = train.n();
    const Index m = bank.size();
    // Inclusive threshold so that m = 1 keeps every point.
    const double threshold = 1.0 / static_cast<double>(m) - 1e-12;

    for (Index i = 0; i < m; ++i) {
        std::vector<Index> rows;
        for (Index j = 0; j < n; ++j)
            if (gates(j, i) >= threshold) rows.push_back(j);
        const Dataset part = rows.empty() ? Dataset{} : subset(train, rows);
        if (rows.empty() || !part.has_both_classes()) {
            std::vector<Index> all(static_cast<std::size_t>(n));
            for (Index j = 0; j < n; ++j) all[static_cast<std::size_t>(j)] = j;
            model.subsets.push_back(std::move(all));
            model.components.push_back(s1.classifiers[static_cast<std::size_t>(i)]);
            model.kept_stage1.push_back(i);
            continue;
        }
        const GramMatrix sub = static_cast<Index>(rows.size()) == n ? bank.grams[static_cast<std::size_t>(i)]
                                                                    : restrict_gram(bank.grams[static_cast<std::size_t>(i)], rows);
        model.components.push_back(train_svc(sub, part.labels, cfg.svm));
        model.subsets.push_back(std::move(rows));
    }
    model.solver_converged = s1.converged && detail::all_converged(model.components);
    model.train_gates = gates;
    model.gating = std::move(s1.gates);
    return model;
}

// ---------------------------------------------------------------------------
// C-LMKL

/// dJ/dbeta_ir = -1/2 (a o c_r)^T K_i (a o c_r) at fixed dual coefficients a.
inline Matrix clmkl_beta_gradient(const std::vector<GramMatrix>& grams, const Vector& dual_coef, const SoftAssignment& c) {
    const auto m = static_cast<Index>(grams.size());
    Matrix grad(m, c.cols());
    for (Index r = 0; r < c.cols(); ++r) {
        const Vector w = dual_coef.cwiseProduct(c.col(r));
        for (Index i = 0; i < m; ++i) grad(i, r) = -0.5 * w.dot(grams[static_cast<std::size_t>(i)].entries * w);
    }
    return grad;
}

/// Multiplicative step beta_ir *= exp(step * grad_ir / max_i |grad_ir|), then
/// renormalization of every column onto the simplex.
inline Matrix exponentiated_gradient_step(const Matrix& beta, const Matrix& grad, double step) {
    Matrix next = beta;
    for (Index r = 0; r < beta.cols(); ++r) {
        const double scale = grad.col(r).cwiseAbs().maxCoeff();
        if (scale > 0.0)
            for (Index i = 0; i < beta.rows(); ++i) next(i, r) = beta(i, r) * std::exp(step * grad(i, r) / scale);
        next.col(r) /= next.col(r).sum();
    }
    return next;
}

inline LklModel train_clmkl(const Dataset& train, const KernelBank& bank, const TrainConfig& cfg = {}) {
    cfg.validate();
    detail::check_training_set(train, bank);
    LklModel model = detail::skeleton(Method::clmkl, train, bank);
    const Index m = bank.size();
    const Index l = std::min(cfg.clmkl.clusters, train.n());

    const GramMatrix k_uniform = uniform_gram(bank.grams);
    const KMeansResult km = kernel_kmeans(k_uniform, l, cfg.clmkl.seed, cfg.clmkl.kmeans_max_iter);
    const SoftAssignment c = soften(k_uniform, km.assignment, cfg.clmkl.tau);

    Matrix beta = Matrix::Constant(m, l, 1.0 / static_cast<double>(m));
    model.outer_converged = false;
    SvmModel svm;
    Matrix beta_used = beta;
    for (int t = 1; t <= cfg.clmkl.outer_iters; ++t) {
        const GramMatrix k_c = cluster_gated_gram(bank.grams, beta, c);
        svm = train_svc(k_c, train.labels, cfg.svm);
        beta_used = beta;
        model.solver_converged = model.solver_converged && svm.converged;
        model.objective_trace.push_back(svc_dual_objective(svm.dual_coef, train.labels, k_c.entries));
        model.outer_iterations = t;
        const auto& tr = model.objective_trace;
        if (tr.size() >= 2 && std::abs(tr[tr.size() - 1] - tr[tr.size() - 2]) < cfg.clmkl.objective_tol) {
            model.outer_converged = true;
            break;
        }
        if (t == cfg.clmkl.outer_iters) break;
        beta = exponentiated_gradient_step(beta, clmkl_beta_gradient(bank.grams, svm.dual_coef, c), cfg.clmkl.beta_step);
    }

    ClusterGating gating;
    gating.beta = beta_used;
    gating.assign_kernels = bank.specs;
    gating.train_x = model.train_x;
    gating.centroids = std::make_shared<const KernelCentroids>(k_uniform, km.assignment, l);
    gating.tau = cfg.clmkl.tau;
    model.gating = std::move(gating);
    model.train_gates = c;
    model.components.push_back(std::move(svm));
    return model;
}

// ---------------------------------------------------------------------------
// Dispatch

inline LklModel train(Method method, const Dataset& train_set, const KernelBank& bank, const TrainConfig& cfg = {}) {
    switch (method) {
    case Method::uniform: return train_uniform(train_set, bank, cfg);
    case Method::lmkl: return train_lmkl(train_set, bank, cfg);
    case Method::swmkl: return train_swmkl(train_set, bank, cfg);
    case Method::ldmkl: return train_ldmkl(train_set, bank, cfg);
    default: return train_clmkl(train_set, bank, cfg);
    }
}

inline LklModel train(Method method, const Dataset& train_set, const std::vector<KernelSpec>& kernels, const TrainConfig& cfg = {}) {
    return train(method, train_set, KernelBank::build(kernels, train_set.features), cfg);
}

inline LklModel train_uniform(const Dataset& t, const std::vector<KernelSpec>& k, const TrainConfig& c = {}) { return train(Method::uniform, t, k, c); }
inline LklModel train_lmkl(const Dataset& t, const std::vector<KernelSpec>& k, const TrainConfig& c = {}) { return train(Method::lmkl, t, k, c); }
inline LklModel train_swmkl(const Dataset& t, const std::vector<KernelSpec>& k, const TrainConfig& c = {}) { return train(Method::swmkl, t, k, c); }
inline LklModel train_ldmkl(const Dataset& t, const std::vector<KernelSpec>& k, const TrainConfig& c = {}) { return train(Method::ldmkl, t, k, c); }
inline LklModel train_clmkl(const Dataset& t, const std::vector<KernelSpec>& k, const TrainConfig& c = {}) { return train(Method::clmkl, t, k, c); }

// ---------------------------------------------------------------------------
// Prediction

/// fbar_i(x) = sum_{j in S_i} a_ij (g_i(x_j) / gbar_i) kappa_i(x_j, x) + b_i for
/// each kernel, p x m, where gbar_i is the alpha-weighted mean gate over the
/// support points of f_i. The gates reweight the expansion without changing
/// its scale relative to b_i, so uniform gates give fbar_i = f_i.
/// `crosses` are full training-by-query kernel matrices.
inline Matrix ldmkl_component_values(const LklModel& model, const std::vector<Matrix>& crosses) {
    detail::require(model.method == Method::ldmkl, "not an ldmkl model");
    const Index m = model.m();
    const Index p = crosses.at(0).cols();
    Matrix out(p, m);
    for (Index i = 0; i < m; ++i) {
        const auto& f = model.components[static_cast<std::size_t>(i)];
        const auto& rows = model.subsets[static_cast<std::size_t>(i)];
        const Matrix& cross = crosses[static_cast<std::size_t>(i)];
        double mass = 0.0, weighted = 0.0;
        for (Index s : f.support_indices) {
            mass += std::abs(f.dual_coef[s]);
            weighted += std::abs(f.dual_coef[s]) * model.train_gates(rows[static_cast<std::size_t>(s)], i);
        }
        const double gbar = mass > 0.0 ? weighted / mass : 1.0;
        Vector v = Vector::Constant(p, f.bias);
        for (Index s : f.support_indices) {
            const Index j = rows[static_cast<std::size_t>(s)];
            v += (f.dual_coef[s] * model.train_gates(j, i) / gbar) * cross.row(j).transpose();
        }
        out.col(i) = v;
    }
    return out;
}

/// Real-valued decision for each row of `x`; labels are its sign (0 -> +1).
inline Vector decision_values(const LklModel& model, const Matrix& x) {
    detail::require(model.train_x != nullptr, "model is not trained");
    detail::require(x.cols() == model.train_x->cols(), "query feature dimension mismatch");
    const Matrix& tx = *model.train_x;
    std::vector<Matrix> crosses;
    for (const auto& s : model.kernels) crosses.push_back(gram_cross(s, tx, x));

    switch (model.method) {
    case Method::uniform: return predict_decision(model.components.at(0), uniform_cross(crosses));
    case Method::lmkl: {
        const EtaMatrix eta_q = eta_matrix(model.gating, x);
        return predict_decision(model.components.at(0), combined_cross_separable(crosses, model.train_gates, eta_q));
    }
    case Method::swmkl: {
        const Matrix g_q = regressor_outputs(std::get<RegressorGating>(model.gating), x);
        return predict_decision(model.components.at(0), combined_cross_swmkl(crosses, model.train_gates, g_q));
    }
    case Method::ldmkl: {
        const Matrix g_q = eta_matrix(model.gating, x);
        const Matrix fbar = ldmkl_component_values(model, crosses);
        return (g_q.array() * fbar.array().tanh()).rowwise().sum().matrix();
    }
    default: {
        const auto& g = std::get<ClusterGating>(model.gating);
        const SoftAssignment c_q = cluster_memberships(g, x);
        return predict_decision(model.components.at(0), cluster_gated_cross(crosses, g.beta, model.train_gates, c_q));
    }
    }
}

inline Vector predict(const LklModel& model, const Matrix& x) {
    return decision_values(model, x).unaryExpr([](double v) { return sign_label(v); });
}

inline double accuracy(const Vector& predicted, const Vector& truth) {
    detail::require(predicted.size() == truth.size() && truth.size() > 0, "accuracy: size mismatch");
    Index hits = 0;
    for (Index j = 0; j < truth.size(); ++j) hits += predicted[j] == truth[j] ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(truth.size());
}

/// Fraction of training points that are support points of some component.
inline double support_fraction(const LklModel& model) {
    const Index n = model.n_train();
    if (n == 0) return 0.0;
    std::set<Index> support;
    for (std::size_t c = 0; c < model.components.size(); ++c) {
        const auto& f = model.components[c];
        const bool mapped = c < model.subsets.size();
        for (Index s : f.support_indices) support.insert(mapped ? model.subsets[c][static_cast<std::size_t>(s)] : s);
    }
    return static_cast<double>(support.size()) / static_cast<double>(n);
}

} // namespace lokal
