#pragma once

// Kernel k-means on a Gram matrix and the soft assignments derived from it.
//
// Squared feature-space distance from point x to the centroid of cluster S:
//
//     K(x,x) - 2/|S| sum_{s in S} K(x,s) + 1/|S|^2 sum_{s,s' in S} K(s,s')

#include "lokal/common.hpp"
#include "lokal/kernels.hpp"
#include "lokal/softmax.hpp"

#include <limits>
#include <vector>

namespace lokal {

using Assignment = std::vector<Index>;

/// n x l soft assignment; rows are probability vectors.
using SoftAssignment = Matrix;

/// Cluster summaries needed to measure distances to centroids.
class KernelCentroids {
public:
    KernelCentroids(const GramMatrix& gram, const Assignment& assign, Index clusters)
        : assign_(assign), sizes_(Vector::Zero(clusters)), self_(Vector::Zero(clusters)) {
        const Index n = gram.n();
        detail::require(static_cast<Index>(assign.size()) == n, "assignment length must equal n");
        for (Index j = 0; j < n; ++j) {
            const Index r = assign[static_cast<std::size_t>(j)];
            detail::require(r >= 0 && r < clusters, "cluster label out of range");
            sizes_[r] += 1.0;
        }
        for (Index j = 0; j < n; ++j)
            for (Index k = 0; k < n; ++k) {
                const Index r = assign[static_cast<std::size_t>(j)];
                if (assign[static_cast<std::size_t>(k)] == r) self_[r] += gram(j, k);
            }
    }

    Index clusters() const { return sizes_.size(); }
    const Vector& sizes() const { return sizes_; }

    /// p x l squared distances for query points, given the n x p cross kernel
    /// (training rows) and kappa(z, z) for each query.
    Matrix distances(const Matrix& cross, const Vector& query_diag) const {
        const Index n = static_cast<Index>(assign_.size());
        detail::require(cross.rows() == n && query_diag.size() == cross.cols(), "centroid distance shape mismatch");
        const Index l = clusters();
        Matrix sums = Matrix::Zero(cross.cols(), l);
        for (Index j = 0; j < n; ++j) sums.col(assign_[static_cast<std::size_t>(j)]) += cross.row(j).transpose();
        Matrix out(cross.cols(), l);
        for (Index q = 0; q < cross.cols(); ++q)
            for (Index r = 0; r < l; ++r) {
                if (sizes_[r] == 0.0) {
                    out(q, r) = std::numeric_limits<double>::infinity();
                    continue;
                }
                const double s = sizes_[r];
                out(q, r) = std::max(0.0, query_diag[q] - 2.0 * sums(q, r) / s + self_[r] / (s * s));
            }
        return out;
    }

    Matrix distances(const GramMatrix& gram) const { return distances(gram.entries, gram.entries.diagonal()); }

private:
    Assignment assign_;
    Vector sizes_;
    Vector self_;
};

/// Within-cluster sum of squared feature-space distances.
inline double kmeans_objective(const GramMatrix& gram, const Assignment& assign, Index clusters) {
    const KernelCentroids cent(gram, assign, clusters);
    const Matrix dist = cent.distances(gram);
    double total = 0.0;
    for (Index j = 0; j < gram.n(); ++j) total += dist(j, assign[static_cast<std::size_t>(j)]);
    return total;
}

/// k-means++ seeding in feature space: first seed uniform, later seeds drawn
/// with probability proportional to squared distance to the nearest seed.
inline std::vector<Index> kmeanspp_seeds(const GramMatrix& gram, Index k, std::uint64_t seed) {
    const Index n = gram.n();
    detail::require(k >= 1 && k <= n, "need 1 <= k <= n");
    Rng rng(seed);
    std::vector<Index> seeds{static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)))};
    Vector nearest(n);
    auto dist = [&](Index j, Index s) { return std::max(0.0, gram(j, j) + gram(s, s) - 2.0 * gram(j, s)); };
    for (Index j = 0; j < n; ++j) nearest[j] = dist(j, seeds[0]);
    std::vector<bool> taken(static_cast<std::size_t>(n), false);
    taken[static_cast<std::size_t>(seeds[0])] = true;
    while (static_cast<Index>(seeds.size()) < k) {
        double total = 0.0;
        for (Index j = 0; j < n; ++j)
            if (!taken[static_cast<std::size_t>(j)]) total += nearest[j];
        Index pick = -1;
        if (total > 0.0) {
            const double target = rng.uniform() * total;
            double acc = 0.0;
            for (Index j = 0; j < n; ++j) {
                if (taken[static_cast<std::size_t>(j)] || nearest[j] <= 0.0) continue;
                acc += nearest[j];
                pick = j;
                if (acc > target) break;
            }
        } else {
            // Remaining points coincide with seeds; take any untaken one.
            std::vector<Index> free;
            for (Index j = 0; j < n; ++j)
                if (!taken[static_cast<std::size_t>(j)]) free.push_back(j);
            pick = free[static_cast<std::size_t>(rng.below(free.size()))];
        }
        seeds.push_back(pick);
        taken[static_cast<std::size_t>(pick)] = true;
        for (Index j = 0; j < n; ++j) nearest[j] = std::min(nearest[j], dist(j, pick));
    }
    return seeds;
}

struct KMeansResult {
    Assignment assignment;
    Index clusters = 0;
    Index iterations = 0;
    bool converged = false;
    /// Objective after initialization and after every iteration.
    std::vector<double> objective_trace;
};

namespace detail {

inline Index argmin_row(const Matrix& dist, Index j) {
    Index best = 0;
    for (Index r = 1; r < dist.cols(); ++r)
        if (dist(j, r) < dist(j, best)) best = r;
    return best;
}

} // namespace detail

/// Lloyd iterations in feature space. Empty clusters are reseeded with the
/// point farthest from its own centroid.
inline KMeansResult kernel_kmeans(const GramMatrix& gram, Index k, std::uint64_t seed, Index max_iter = 100) {
    const Index n = gram.n();
    if (k < 1 || k > n) throw error("kernel_kmeans needs 1 <= k <= n");
    const auto seeds = kmeanspp_seeds(gram, k, seed);

    KMeansResult res;
    res.clusters = k;
    res.assignment.assign(static_cast<std::size_t>(n), 0);
    for (Index j = 0; j < n; ++j) {
        Index best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (Index r = 0; r < k; ++r) {
            const Index s = seeds[static_cast<std::size_t>(r)];
            const double d = j == s ? -1.0 : gram(j, j) + gram(s, s) - 2.0 * gram(j, s);
            if (d < best_d) {
                best_d = d;
                best = r;
            }
        }
        res.assignment[static_cast<std::size_t>(j)] = best;
    }
    res.objective_trace.push_back(kmeans_objective(gram, res.assignment, k));

    for (res.iterations = 0; res.iterations < max_iter;) {
        const KernelCentroids cent(gram, res.assignment, k);
        const Matrix dist = cent.distances(gram);
        Assignment next(static_cast<std::size_t>(n));
        bool changed = false;
        for (Index j = 0; j < n; ++j) {
            const Index cur = res.assignment[static_cast<std::size_t>(j)];
            Index best = detail::argmin_row(dist, j);
            if (dist(j, cur) <= dist(j, best)) best = cur;
            next[static_cast<std::size_t>(j)] = best;
            changed |= best != cur;
        }

        std::vector<Index> sizes(static_cast<std::size_t>(k), 0);
        for (Index r : next) ++sizes[static_cast<std::size_t>(r)];
        for (Index r = 0; r < k; ++r) {
            if (sizes[static_cast<std::size_t>(r)] > 0) continue;
            Index far = -1;
            double far_d = -1.0;
            for (Index j = 0; j < n; ++j) {
                const Index own = next[static_cast<std::size_t>(j)];
                if (sizes[static_cast<std::size_t>(own)] < 2) continue;
                if (dist(j, own) > far_d) {
                    far_d = dist(j, own);
                    far = j;
                }
            }
            --sizes[static_cast<std::size_t>(next[static_cast<std::size_t>(far)])];
            next[static_cast<std::size_t>(far)] = r;
            ++sizes[static_cast<std::size_t>(r)];
            changed = true;
        }

        res.assignment = std::move(next);
        ++res.iterations;
        res.objective_trace.push_back(kmeans_objective(gram, res.assignment, k));
        if (!changed) {
            res.converged = true;
            break;
        }
    }
    return res;
}

/// c[j][r] = softmax_r(-dist^2(x_j, centroid_r) / tau)
inline SoftAssignment soften_distances(const Matrix& dist, double tau) {
    if (!(tau > 0.0)) throw error("softening temperature must be > 0");
    return softmax_rows(-dist / tau);
}

inline SoftAssignment soften(const GramMatrix& gram, const Assignment& assign, double tau = 1.0) {
    if (!(tau > 0.0)) throw error("softening temperature must be > 0");
    Index clusters = 0;
    for (Index r : assign) clusters = std::max(clusters, r + 1);
    const KernelCentroids cent(gram, assign, clusters);
    for (Index r = 0; r < clusters; ++r) detail::require(cent.sizes()[r] > 0.0, "soften: empty cluster");
    return soften_distances(cent.distances(gram), tau);
}

} // namespace lokal
