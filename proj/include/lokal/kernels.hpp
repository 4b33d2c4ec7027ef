#pragma once

// Kernel dictionary, Gram matrices, and the gated kernel combinations.
//
// Every gated construction has the form
//
//     K(x_j, x_k) = sum_i gamma_i(x_j, x_k) * kappa_i(x_j, x_k)
//
// and differs only in the gating term gamma_i:
//
//     separable      eta_i(x_j) * eta_i(x_k)
//     pairwise       g_i(x_j) g_i(x_k) / sum_h g_h(x_j) g_h(x_k)
//     cluster        sum_r beta_ir c_r(x_j) c_r(x_k)
//     uniform        1/m
//
// Square (training) versions fill the upper triangle and mirror it, so the
// result is exactly symmetric. Cross versions take one gating matrix for the
// rows (training points) and one for the columns (query points).

#include "lokal/common.hpp"

#include <charconv>
#include <cmath>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

namespace lokal {

struct LinearKernel {
    bool operator==(const LinearKernel&) const = default;
};

/// (scale * <x, z> + coef0)^degree
struct PolynomialKernel {
    int degree = 2;
    double coef0 = 1.0;
    double scale = 1.0;

    bool operator==(const PolynomialKernel&) const = default;
};

/// exp(-gamma * |x - z|^2)
struct GaussianKernel {
    double gamma = 1.0;

    bool operator==(const GaussianKernel&) const = default;
};

using KernelSpec = std::variant<LinearKernel, PolynomialKernel, GaussianKernel>;

inline void validate(const KernelSpec& spec) {
    if (const auto* p = std::get_if<PolynomialKernel>(&spec))
        detail::require(p->degree >= 1, "polynomial degree must be >= 1");
    if (const auto* g = std::get_if<GaussianKernel>(&spec))
        detail::require(g->gamma > 0.0 && std::isfinite(g->gamma), "gaussian gamma must be > 0");
}

inline bool is_gaussian(const KernelSpec& spec) { return std::holds_alternative<GaussianKernel>(spec); }

/// `linear`, `poly:<degree>[:<coef0>[:<scale>]]`, `gauss:<gamma>`.
inline KernelSpec parse_kernel_spec(std::string_view text) {
    std::vector<std::string> parts;
    {
        std::string cur;
        for (char ch : text) {
            if (ch == ':') {
                parts.push_back(cur);
                cur.clear();
            } else {
                cur.push_back(ch);
            }
        }
        parts.push_back(cur);
    }
    auto num = [&](const std::string& s) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != s.size() || s.empty()) throw error("bad number '" + s + "' in kernel spec '" + std::string(text) + "'");
        return v;
    };
    KernelSpec spec;
    const std::string& kind = parts[0];
    if (kind == "linear" && parts.size() == 1) {
        spec = LinearKernel{};
    } else if (kind == "poly" && parts.size() >= 2 && parts.size() <= 4) {
        PolynomialKernel p;
        const double deg = num(parts[1]);
        if (deg != std::floor(deg)) throw error("polynomial degree must be an integer");
        p.degree = static_cast<int>(deg);
        if (parts.size() >= 3) p.coef0 = num(parts[2]);
        if (parts.size() >= 4) p.scale = num(parts[3]);
        spec = p;
    } else if (kind == "gauss" && parts.size() == 2) {
        spec = GaussianKernel{num(parts[1])};
    } else {
        throw error("unknown kernel spec '" + std::string(text) + "' (linear | poly:<deg>:<coef0>:<scale> | gauss:<gamma>)");
    }
    validate(spec);
    return spec;
}

inline std::string to_string(const KernelSpec& spec) {
    std::ostringstream os;
    os.precision(17);
    std::visit(
        [&](const auto& k) {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, LinearKernel>)
                os << "linear";
            else if constexpr (std::is_same_v<K, PolynomialKernel>)
                os << "poly:" << k.degree << ':' << k.coef0 << ':' << k.scale;
            else
                os << "gauss:" << k.gamma;
        },
        spec);
    return os.str();
}

namespace detail {

inline double ipow(double base, int exp) {
    double result = 1.0;
    while (exp > 0) {
        if (exp & 1) result *= base;
        base *= base;
        exp >>= 1;
    }
    return result;
}

/// Kernel value from the inner product and the two squared norms.
inline double kernel_from_products(const KernelSpec& spec, double ip, double nx, double nz) {
    switch (spec.index()) {
    case 0: return ip;
    case 1: {
        const auto& p = std::get<PolynomialKernel>(spec);
        return ipow(p.scale * ip + p.coef0, p.degree);
    }
    default: {
        const double dist = std::max(0.0, nx + nz - 2.0 * ip);
        return std::exp(-std::get<GaussianKernel>(spec).gamma * dist);
    }
    }
}

} // namespace detail

template <typename DerivedX, typename DerivedZ>
double eval_kernel(const KernelSpec& spec, const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedZ>& z) {
    detail::require(x.size() == z.size(), "kernel arguments differ in dimension");
    switch (spec.index()) {
    case 0: return x.dot(z);
    case 1: {
        const auto& p = std::get<PolynomialKernel>(spec);
        return detail::ipow(p.scale * x.dot(z) + p.coef0, p.degree);
    }
    default: return std::exp(-std::get<GaussianKernel>(spec).gamma * (x - z).squaredNorm());
    }
}

/// Symmetric kernel matrix. `psd_tol` bounds how negative its smallest
/// eigenvalue may be; it is checked by tests, not on construction.
struct GramMatrix {
    Matrix entries;
    double psd_tol = 0.0;

    GramMatrix() = default;
    explicit GramMatrix(Matrix k) : entries(std::move(k)), psd_tol(1e-8 * static_cast<double>(entries.rows())) {}

    Index n() const { return entries.rows(); }
    double operator()(Index j, Index k) const { return entries(j, k); }
};

/// Per-point kernel weights, entry (j, i) = eta_i(x_j).
using EtaMatrix = Matrix;

namespace detail {

inline void mirror_upper(Matrix& k) {
    for (Index j = 0; j < k.rows(); ++j)
        for (Index c = 0; c < j; ++c) k(j, c) = k(c, j);
}

template <typename F>
Matrix build_symmetric(Index n, F&& entry) {
    Matrix out(n, n);
    for (Index j = 0; j < n; ++j)
        for (Index k = j; k < n; ++k) out(j, k) = entry(j, k);
    mirror_upper(out);
    return out;
}

template <typename F>
Matrix build_cross(Index rows, Index cols, F&& entry) {
    Matrix out(rows, cols);
    for (Index j = 0; j < rows; ++j)
        for (Index k = 0; k < cols; ++k) out(j, k) = entry(j, k);
    return out;
}

inline void check_grams(const std::vector<GramMatrix>& grams) {
    require(!grams.empty(), "need at least one gram matrix");
    for (const auto& g : grams)
        require(g.entries.rows() == grams[0].n() && g.entries.cols() == grams[0].n(), "gram matrices differ in shape");
}

inline void check_crosses(const std::vector<Matrix>& crosses) {
    require(!crosses.empty(), "need at least one cross kernel matrix");
    for (const auto& c : crosses)
        require(c.rows() == crosses[0].rows() && c.cols() == crosses[0].cols(), "cross kernel matrices differ in shape");
}

} // namespace detail

/// Kernel matrix of the rows of `x` against themselves.
inline GramMatrix gram(const KernelSpec& spec, const Matrix& x) {
    validate(spec);
    const Index n = x.rows();
    detail::require(n >= 1, "gram needs at least one row");
    Matrix k = Matrix::Zero(n, n);
    k.selfadjointView<Eigen::Upper>().rankUpdate(x);
    const Vector norms = k.diagonal();
    for (Index j = 0; j < n; ++j) {
        for (Index c = j + 1; c < n; ++c) k(j, c) = detail::kernel_from_products(spec, k(j, c), norms[j], norms[c]);
        k(j, j) = is_gaussian(spec) ? 1.0 : detail::kernel_from_products(spec, norms[j], norms[j], norms[j]);
    }
    detail::mirror_upper(k);
    return GramMatrix(std::move(k));
}

/// Entry (j, k) = kappa(x_j, z_k).
inline Matrix gram_cross(const KernelSpec& spec, const Matrix& x, const Matrix& z) {
    validate(spec);
    detail::require(x.cols() == z.cols(), "gram_cross: feature dimension mismatch");
    Matrix k = x * z.transpose();
    const Vector nx = x.rowwise().squaredNorm();
    const Vector nz = z.rowwise().squaredNorm();
    for (Index j = 0; j < k.rows(); ++j)
        for (Index c = 0; c < k.cols(); ++c) k(j, c) = detail::kernel_from_products(spec, k(j, c), nx[j], nz[c]);
    return k;
}

/// kappa(z, z) for each row of z.
inline Vector kernel_diagonal(const KernelSpec& spec, const Matrix& z) {
    Vector out(z.rows());
    for (Index j = 0; j < z.rows(); ++j) out[j] = eval_kernel(spec, z.row(j), z.row(j));
    return out;
}

// ---------------------------------------------------------------------------
// Separable gating: sum_i eta_i(x_j) kappa_i(x_j, x_k) eta_i(x_k)

inline GramMatrix combined_gram_separable(const std::vector<GramMatrix>& grams, const EtaMatrix& eta) {
    detail::check_grams(grams);
    const Index n = grams[0].n();
    const auto m = static_cast<Index>(grams.size());
    detail::require(eta.rows() == n && eta.cols() == m, "eta must be n x m");
    return GramMatrix(detail::build_symmetric(n, [&](Index j, Index k) {
        double s = 0.0;
        for (Index i = 0; i < m; ++i) s += eta(j, i) * grams[static_cast<std::size_t>(i)](j, k) * eta(k, i);
        return s;
    }));
}

inline Matrix combined_cross_separable(const std::vector<Matrix>& crosses, const EtaMatrix& eta_rows, const EtaMatrix& eta_cols) {
    detail::check_crosses(crosses);
    const auto m = static_cast<Index>(crosses.size());
    detail::require(eta_rows.rows() == crosses[0].rows() && eta_rows.cols() == m, "row gating must be n x m");
    detail::require(eta_cols.rows() == crosses[0].cols() && eta_cols.cols() == m, "column gating must be p x m");
    return detail::build_cross(crosses[0].rows(), crosses[0].cols(), [&](Index j, Index k) {
        double s = 0.0;
        for (Index i = 0; i < m; ++i) s += eta_rows(j, i) * crosses[static_cast<std::size_t>(i)](j, k) * eta_cols(k, i);
        return s;
    });
}

// ---------------------------------------------------------------------------
// Pairwise-normalized gating (success-weighted combination)

namespace detail {

inline void check_positive_gates(const Matrix& g) {
    for (Index j = 0; j < g.rows(); ++j)
        for (Index i = 0; i < g.cols(); ++i) require(g(j, i) > 0.0, "pairwise gating needs strictly positive gates");
}

} // namespace detail

inline GramMatrix combined_gram_swmkl(const std::vector<GramMatrix>& grams, const Matrix& g) {
    detail::check_grams(grams);
    const Index n = grams[0].n();
    const auto m = static_cast<Index>(grams.size());
    detail::require(g.rows() == n && g.cols() == m, "gate matrix must be n x m");
    detail::check_positive_gates(g);
    return GramMatrix(detail::build_symmetric(n, [&](Index j, Index k) {
        double num = 0.0, z = 0.0;
        for (Index i = 0; i < m; ++i) {
            const double w = g(j, i) * g(k, i);
            num += w * grams[static_cast<std::size_t>(i)](j, k);
            z += w;
        }
        if (!(z > 0.0)) throw error("pairwise normalizer is not positive");
        return num / z;
    }));
}

inline Matrix combined_cross_swmkl(const std::vector<Matrix>& crosses, const Matrix& g_rows, const Matrix& g_cols) {
    detail::check_crosses(crosses);
    const auto m = static_cast<Index>(crosses.size());
    detail::require(g_rows.rows() == crosses[0].rows() && g_rows.cols() == m, "row gates must be n x m");
    detail::require(g_cols.rows() == crosses[0].cols() && g_cols.cols() == m, "column gates must be p x m");
    detail::check_positive_gates(g_rows);
    detail::check_positive_gates(g_cols);
    return detail::build_cross(crosses[0].rows(), crosses[0].cols(), [&](Index j, Index k) {
        double num = 0.0, z = 0.0;
        for (Index i = 0; i < m; ++i) {
            const double w = g_rows(j, i) * g_cols(k, i);
            num += w * crosses[static_cast<std::size_t>(i)](j, k);
            z += w;
        }
        return num / z;
    });
}

// ---------------------------------------------------------------------------
// Cluster gating: gamma_i(x, x') = sum_r beta_ir c_r(x) c_r(x')

namespace detail {

inline void check_beta(const Matrix& beta, Index m, Index clusters) {
    require(beta.rows() == m && beta.cols() == clusters, "beta must be m x l");
    require((beta.array() >= 0.0).all(), "beta entries must be nonnegative");
}

} // namespace detail

inline GramMatrix cluster_gated_gram(const std::vector<GramMatrix>& grams, const Matrix& beta, const Matrix& c) {
    detail::check_grams(grams);
    const Index n = grams[0].n();
    const auto m = static_cast<Index>(grams.size());
    detail::require(c.rows() == n, "soft assignment must have n rows");
    detail::check_beta(beta, m, c.cols());
    const Index l = c.cols();
    return GramMatrix(detail::build_symmetric(n, [&](Index j, Index k) {
        double s = 0.0;
        for (Index i = 0; i < m; ++i) {
            double gate = 0.0;
            for (Index r = 0; r < l; ++r) gate += beta(i, r) * c(j, r) * c(k, r);
            s += gate * grams[static_cast<std::size_t>(i)](j, k);
        }
        return s;
    }));
}

inline Matrix cluster_gated_cross(const std::vector<Matrix>& crosses, const Matrix& beta, const Matrix& c_rows, const Matrix& c_cols) {
    detail::check_crosses(crosses);
    const auto m = static_cast<Index>(crosses.size());
    detail::require(c_rows.rows() == crosses[0].rows() && c_cols.rows() == crosses[0].cols(), "soft assignment shape mismatch");
    detail::require(c_rows.cols() == c_cols.cols(), "soft assignments differ in cluster count");
    detail::check_beta(beta, m, c_rows.cols());
    const Index l = c_rows.cols();
    return detail::build_cross(crosses[0].rows(), crosses[0].cols(), [&](Index j, Index k) {
        double s = 0.0;
        for (Index i = 0; i < m; ++i) {
            double gate = 0.0;
            for (Index r = 0; r < l; ++r) gate += beta(i, r) * c_rows(j, r) * c_cols(k, r);
            s += gate * crosses[static_cast<std::size_t>(i)](j, k);
        }
        return s;
    });
}

// ---------------------------------------------------------------------------
// Constant gating

/// sum_i weights_i K_i
inline Matrix weighted_sum(const std::vector<Matrix>& mats, const Vector& weights) {
    detail::check_crosses(mats);
    detail::require(weights.size() == static_cast<Index>(mats.size()), "one weight per matrix");
    Matrix out = Matrix::Zero(mats[0].rows(), mats[0].cols());
    for (std::size_t i = 0; i < mats.size(); ++i) out += weights[static_cast<Index>(i)] * mats[i];
    return out;
}

inline GramMatrix weighted_gram(const std::vector<GramMatrix>& grams, const Vector& weights) {
    detail::check_grams(grams);
    detail::require(weights.size() == static_cast<Index>(grams.size()), "one weight per gram matrix");
    const auto m = static_cast<Index>(grams.size());
    return GramMatrix(detail::build_symmetric(grams[0].n(), [&](Index j, Index k) {
        double s = 0.0;
        for (Index i = 0; i < m; ++i) s += weights[i] * grams[static_cast<std::size_t>(i)](j, k);
        return s;
    }));
}

/// Entrywise mean of the kernel matrices.
inline GramMatrix uniform_gram(const std::vector<GramMatrix>& grams) {
    detail::require(!grams.empty(), "uniform_gram needs at least one gram matrix");
    const auto m = static_cast<Index>(grams.size());
    return weighted_gram(grams, Vector::Constant(m, 1.0 / static_cast<double>(m)));
}

inline Matrix uniform_cross(const std::vector<Matrix>& crosses) {
    detail::require(!crosses.empty(), "uniform_cross needs at least one matrix");
    const auto m = static_cast<Index>(crosses.size());
    return weighted_sum(crosses, Vector::Constant(m, 1.0 / static_cast<double>(m)));
}

} // namespace lokal
