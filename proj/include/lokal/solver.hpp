#pragma once

// Soft-margin kernel SVM (classification) and epsilon-SVR (regression) on a
// precomputed Gram matrix.
//
// Both problems are solved in the common dual form
//
//     min  1/2 b^T Q b + p^T b    s.t.  s^T b = 0,  0 <= b_t <= C
//
// with Q_tu = s_t s_u K(t, u). Classification uses one variable per example
// (s = y, p = -1). Regression uses two per example, alpha_j with s = +1 and
// p = eps - z_j, alpha*_j with s = -1 and p = eps + z_j.
//
// The working pair is the maximal violating pair under second-order
// selection. Indefinite pairs (curvature <= 1e-12) take whichever endpoint of
// the feasible segment has the lower objective, so mildly indefinite kernels
// still make monotone progress.

#include "lokal/common.hpp"
#include "lokal/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace lokal {

struct SvmParams {
    double C = 1.0;
    double tol = 1e-3;
    /// 0 selects max(10^7, 100 * variables).
    long long max_iter = 0;
    double epsilon = 0.1;
    double sv_threshold = 1e-8;

    void validate() const {
        detail::require(C > 0.0, "C must be > 0");
        detail::require(tol > 0.0, "tol must be > 0");
        detail::require(max_iter >= 0, "max_iter must be >= 0");
        detail::require(epsilon >= 0.0, "epsilon must be >= 0");
        detail::require(sv_threshold > 0.0, "sv_threshold must be > 0");
    }
};

enum class Task { classification, regression };

/// Dual solution. For classification dual_coef_j = alpha_j y_j; for
/// regression dual_coef_j = alpha_j - alpha*_j. Decision values are
/// sum_j dual_coef_j K(x_j, x) + bias.
struct SvmModel {
    Task task = Task::classification;
    Vector dual_coef;
    double bias = 0.0;
    std::vector<Index> support_indices;
    bool converged = true;
    long long iterations = 0;

    Index n() const { return dual_coef.size(); }
};

using SvrModel = SvmModel;

namespace detail {

constexpr double kCurvatureFloor = 1e-12;

class Smo {
public:
    Smo(const Matrix& k, Vector sign, Vector linear, double c)
        : k_(k), n_(k.rows()), sign_(std::move(sign)), grad_(std::move(linear)), c_(c) {
        l_ = sign_.size();
        beta_ = Vector::Zero(l_);
    }

    void solve(double tol, long long max_iter) {
        iterations_ = 0;
        converged_ = false;
        while (iterations_ < max_iter) {
            Index i = -1, j = -1;
            if (!select(tol, i, j)) {
                converged_ = true;
                return;
            }
            step(i, j);
            ++iterations_;
        }
    }

    /// Bias such that decisions are sum s_t b_t K + bias.
    double bias() const {
        double ub = std::numeric_limits<double>::infinity();
        double lb = -std::numeric_limits<double>::infinity();
        double sum = 0.0;
        Index free = 0;
        for (Index t = 0; t < l_; ++t) {
            const double yg = sign_[t] * grad_[t];
            if (beta_[t] >= c_) {
                if (sign_[t] < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
            } else if (beta_[t] <= 0.0) {
                if (sign_[t] > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
            } else {
                sum += yg;
                ++free;
            }
        }
        double rho;
        if (free > 0) rho = sum / static_cast<double>(free);
        else if (std::isfinite(ub) && std::isfinite(lb)) rho = 0.5 * (ub + lb);
        else rho = std::isfinite(ub) ? ub : (std::isfinite(lb) ? lb : 0.0);
        return -rho;
    }

    const Vector& beta() const { return beta_; }
    bool converged() const { return converged_; }
    long long iterations() const { return iterations_; }

private:
    Index sample(Index t) const { return t < n_ ? t : t - n_; }
    double kern(Index t, Index u) const { return k_(sample(t), sample(u)); }

    bool in_up(Index t) const { return sign_[t] > 0 ? beta_[t] < c_ : beta_[t] > 0.0; }
    bool in_low(Index t) const { return sign_[t] > 0 ? beta_[t] > 0.0 : beta_[t] < c_; }

    bool select(double tol, Index& out_i, Index& out_j) const {
        double gmax = -std::numeric_limits<double>::infinity();
        Index i = -1;
        for (Index t = 0; t < l_; ++t) {
            if (in_up(t) && -sign_[t] * grad_[t] > gmax) {
                gmax = -sign_[t] * grad_[t];
                i = t;
            }
        }
        if (i < 0) return false;
        double gmin = std::numeric_limits<double>::infinity();
        double best = std::numeric_limits<double>::infinity();
        Index j = -1;
        const double kii = kern(i, i);
        const Index si = sample(i);
        for (Index t = 0; t < l_; ++t) {
            if (!in_low(t)) continue;
            const double v = -sign_[t] * grad_[t];
            gmin = std::min(gmin, v);
            const double b = gmax - v;
            if (b > 0.0) {
                double a = kii + kern(t, t) - 2.0 * k_(si, sample(t));
                if (a <= 0.0) a = kCurvatureFloor;
                const double score = -(b * b) / a;
                if (score < best) {
                    best = score;
                    j = t;
                }
            }
        }
        if (gmax - gmin < tol || j < 0) return false;
        out_i = i;
        out_j = j;
        return true;
    }

    // Moves along b_i += s_i t, b_j -= s_j t, which keeps s^T b fixed.
    void step(Index i, Index j) {
        const double b = -sign_[i] * grad_[i] + sign_[j] * grad_[j];
        const double a = kern(i, i) + kern(j, j) - 2.0 * kern(i, j);
        const double room_i = sign_[i] > 0 ? c_ - beta_[i] : beta_[i];
        const double room_j = sign_[j] > 0 ? beta_[j] : c_ - beta_[j];
        const double t_max = std::min(room_i, room_j);

        double t;
        if (a > kCurvatureFloor) {
            t = std::min(b / a, t_max);
        } else {
            // phi(t) = -b t + a t^2 / 2 is concave or flat here.
            const double at_max = -b * t_max + 0.5 * a * t_max * t_max;
            t = at_max < 0.0 ? t_max : 0.0;
        }

        const double old_i = beta_[i], old_j = beta_[j];
        beta_[i] += sign_[i] * t;
        beta_[j] -= sign_[j] * t;
        if (t == room_i) beta_[i] = sign_[i] > 0 ? c_ : 0.0;
        if (t == room_j) beta_[j] = sign_[j] > 0 ? 0.0 : c_;
        beta_[i] = std::clamp(beta_[i], 0.0, c_);
        beta_[j] = std::clamp(beta_[j], 0.0, c_);

        const double di = (beta_[i] - old_i) * sign_[i];
        const double dj = (beta_[j] - old_j) * sign_[j];
        const Index si = sample(i), sj = sample(j);
        for (Index u = 0; u < l_; ++u) {
            const Index su = sample(u);
            grad_[u] += sign_[u] * (k_(su, si) * di + k_(su, sj) * dj);
        }
    }

    const Matrix& k_;
    Index n_;
    Index l_;
    Vector sign_;
    Vector grad_;
    Vector beta_;
    double c_;
    long long iterations_ = 0;
    bool converged_ = false;
};

inline long long resolve_max_iter(const SvmParams& p, Index variables) {
    if (p.max_iter > 0) return p.max_iter;
    return std::max<long long>(10'000'000LL, 100LL * static_cast<long long>(variables));
}

inline void collect_support(SvmModel& model, double threshold) {
    model.support_indices.clear();
    for (Index j = 0; j < model.dual_coef.size(); ++j)
        if (std::abs(model.dual_coef[j]) > threshold) model.support_indices.push_back(j);
}

} // namespace detail

inline SvmModel train_svc(const GramMatrix& gram, const Vector& y, const SvmParams& params = {}) {
    params.validate();
    const Index n = gram.n();
    detail::require(gram.entries.cols() == n, "gram must be square");
    detail::require(y.size() == n, "label count must match gram size");
    bool pos = false, neg = false;
    for (Index j = 0; j < n; ++j) {
        detail::require(y[j] == 1.0 || y[j] == -1.0, "labels must be -1 or +1");
        (y[j] > 0 ? pos : neg) = true;
    }
    if (!(pos && neg)) throw error("train_svc needs both classes present");

    detail::Smo smo(gram.entries, y, Vector::Constant(n, -1.0), params.C);
    smo.solve(params.tol, detail::resolve_max_iter(params, n));

    SvmModel model;
    model.task = Task::classification;
    model.dual_coef = smo.beta().cwiseProduct(y);
    model.bias = smo.bias();
    model.converged = smo.converged();
    model.iterations = smo.iterations();
    detail::collect_support(model, params.sv_threshold);
    return model;
}

inline SvrModel train_svr(const GramMatrix& gram, const Vector& targets, const SvmParams& params = {}) {
    params.validate();
    const Index n = gram.n();
    detail::require(gram.entries.cols() == n, "gram must be square");
    detail::require(targets.size() == n, "target count must match gram size");

    Vector sign(2 * n), linear(2 * n);
    for (Index j = 0; j < n; ++j) {
        sign[j] = 1.0;
        linear[j] = params.epsilon - targets[j];
        sign[n + j] = -1.0;
        linear[n + j] = params.epsilon + targets[j];
    }
    detail::Smo smo(gram.entries, sign, linear, params.C);
    smo.solve(params.tol, detail::resolve_max_iter(params, 2 * n));

    SvrModel model;
    model.task = Task::regression;
    model.dual_coef = smo.beta().head(n) - smo.beta().tail(n);
    model.bias = smo.bias();
    model.converged = smo.converged();
    model.iterations = smo.iterations();
    detail::collect_support(model, params.sv_threshold);
    return model;
}

/// value_k = sum_j dual_coef_j cross(j, k) + bias
inline Vector predict_decision(const SvmModel& model, const Matrix& cross) {
    detail::require(cross.rows() == model.n(), "cross kernel rows must match training size");
    Vector out = Vector::Constant(cross.cols(), model.bias);
    for (Index j : model.support_indices) out += model.dual_coef[j] * cross.row(j).transpose();
    return out;
}

constexpr double kGateFloor = 1e-6;

/// Regression output clamped to [1e-6, 1].
inline Vector predict_gate(const SvrModel& model, const Matrix& cross) {
    return predict_decision(model, cross).cwiseMax(kGateFloor).cwiseMin(1.0);
}

inline double sign_label(double value) { return value >= 0.0 ? 1.0 : -1.0; }

struct KktReport {
    double max_violation = 0.0;
    double dual_objective = 0.0;
};

/// Worst KKT violation and the (maximization-form) dual objective. For
/// classification `y` holds labels; for regression it holds targets.
inline KktReport kkt_report(const SvmModel& model, const GramMatrix& gram, const Vector& y, const SvmParams& params) {
    const Index n = gram.n();
    detail::require(model.n() == n && y.size() == n, "kkt_report: size mismatch");
    const Vector kb = gram.entries * model.dual_coef;
    const double c = params.C;
    const double edge = 1e-12 * std::max(1.0, c);
    KktReport rep;
    if (model.task == Task::classification) {
        double sum_alpha = 0.0;
        for (Index j = 0; j < n; ++j) {
            const double alpha = model.dual_coef[j] * y[j];
            sum_alpha += alpha;
            const double margin = y[j] * (kb[j] + model.bias);
            double v;
            if (alpha <= edge) v = std::max(0.0, 1.0 - margin);
            else if (alpha >= c - edge) v = std::max(0.0, margin - 1.0);
            else v = std::abs(margin - 1.0);
            rep.max_violation = std::max(rep.max_violation, v);
        }
        rep.dual_objective = sum_alpha - 0.5 * model.dual_coef.dot(kb);
    } else {
        const double eps = params.epsilon;
        for (Index j = 0; j < n; ++j) {
            const double b = model.dual_coef[j];
            const double r = y[j] - (kb[j] + model.bias);
            double v;
            if (std::abs(b) <= edge) v = std::max(0.0, std::abs(r) - eps);
            else if (b >= c - edge) v = std::max(0.0, eps - r);
            else if (b > 0.0) v = std::abs(r - eps);
            else if (b <= -c + edge) v = std::max(0.0, r + eps);
            else v = std::abs(r + eps);
            rep.max_violation = std::max(rep.max_violation, v);
        }
        rep.dual_objective = -0.5 * model.dual_coef.dot(kb) - eps * model.dual_coef.lpNorm<1>() + y.dot(model.dual_coef);
    }
    return rep;
}

/// Principal submatrix on `rows`.
inline GramMatrix restrict_gram(const GramMatrix& gram, const std::vector<Index>& rows) {
    const auto p = static_cast<Index>(rows.size());
    Matrix out(p, p);
    for (Index a = 0; a < p; ++a)
        for (Index b = 0; b < p; ++b) out(a, b) = gram(rows[static_cast<std::size_t>(a)], rows[static_cast<std::size_t>(b)]);
    return GramMatrix(std::move(out));
}

} // namespace lokal
