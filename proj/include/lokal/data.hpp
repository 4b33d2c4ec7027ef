#pragma once

// Datasets: libsvm text I/O, feature scaling and seeded train/test splits.

#include "lokal/common.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace lokal {

/// Dense feature matrix (one row per example) with labels in {-1, +1}.
struct Dataset {
    Matrix features;
    Vector labels;

    Dataset() = default;
    Dataset(Matrix x, Vector y) : features(std::move(x)), labels(std::move(y)) { validate(); }

    Index n() const { return features.rows(); }
    Index d() const { return features.cols(); }

    void validate() const {
        detail::require(features.rows() >= 1 && features.cols() >= 1, "dataset needs n >= 1 and d >= 1");
        detail::require(labels.size() == features.rows(), "label count does not match row count");
        for (Index j = 0; j < labels.size(); ++j)
            detail::require(labels[j] == 1.0 || labels[j] == -1.0, "labels must be -1 or +1");
    }

    bool has_both_classes() const {
        bool pos = false, neg = false;
        for (Index j = 0; j < labels.size(); ++j) (labels[j] > 0 ? pos : neg) = true;
        return pos && neg;
    }
};

/// Rows of `ds` picked by `rows`, in that order.
inline Dataset subset(const Dataset& ds, const std::vector<Index>& rows) {
    Matrix x(static_cast<Index>(rows.size()), ds.d());
    Vector y(static_cast<Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        x.row(static_cast<Index>(r)) = ds.features.row(rows[r]);
        y[static_cast<Index>(r)] = ds.labels[rows[r]];
    }
    return Dataset(std::move(x), std::move(y));
}

// ---------------------------------------------------------------------------
// libsvm text format

/// Maps raw label values to -1/+1, e.g. {2 -> -1, 4 -> +1}.
using LabelMap = std::map<double, int>;

/// Parses "2:-1,4:+1" style label maps.
inline LabelMap parse_label_map(std::string_view text) {
    LabelMap map;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t comma = text.find(',', pos);
        if (comma == std::string_view::npos) comma = text.size();
        const std::string item(text.substr(pos, comma - pos));
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw error("label map entry '" + item + "' must be <raw>:<+1|-1>");
        const double raw = std::stod(item.substr(0, colon));
        const double to = std::stod(item.substr(colon + 1));
        if (to != 1.0 && to != -1.0) throw error("label map target must be +1 or -1 in '" + item + "'");
        map[raw] = static_cast<int>(to);
        pos = comma + 1;
    }
    return map;
}

struct ParseOptions {
    std::optional<LabelMap> label_map;
    /// Lower bound on the feature count; the inferred d is the max index seen.
    Index min_features = 0;
};

namespace detail {

inline bool parse_double(std::string_view s, double& out) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc() && ptr == end && std::isfinite(out);
}

} // namespace detail

inline Dataset parse_libsvm(std::istream& in, const ParseOptions& opts = {}) {
    struct Row {
        double label;
        std::vector<std::pair<Index, double>> entries;
    };
    std::vector<Row> rows;
    Index d = opts.min_features;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        std::istringstream tokens(line);
        std::string tok;
        if (!(tokens >> tok)) continue;

        double raw = 0.0;
        if (!detail::parse_double(tok, raw)) throw parse_error(lineno, "bad label '" + tok + "'");
        double label;
        if (opts.label_map) {
            auto it = opts.label_map->find(raw);
            if (it == opts.label_map->end()) throw parse_error(lineno, "label '" + tok + "' not in label map");
            label = it->second;
        } else if (raw == 1.0 || raw == -1.0) {
            label = raw;
        } else {
            throw parse_error(lineno, "label '" + tok + "' is not +1/-1 (pass a label map)");
        }

        Row row{label, {}};
        Index last = 0;
        while (tokens >> tok) {
            const auto colon = tok.find(':');
            if (colon == std::string::npos) throw parse_error(lineno, "expected <index>:<value>, got '" + tok + "'");
            long long idx = 0;
            const std::string_view idx_str(tok.data(), colon);
            auto [p, ec] = std::from_chars(idx_str.data(), idx_str.data() + idx_str.size(), idx);
            if (ec != std::errc() || p != idx_str.data() + idx_str.size() || idx < 1)
                throw parse_error(lineno, "bad feature index in '" + tok + "'");
            if (idx <= last) throw parse_error(lineno, "feature indices must be strictly increasing");
            double val = 0.0;
            if (!detail::parse_double(std::string_view(tok).substr(colon + 1), val))
                throw parse_error(lineno, "bad feature value in '" + tok + "'");
            last = static_cast<Index>(idx);
            row.entries.emplace_back(last - 1, val);
        }
        d = std::max(d, last);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw error("libsvm input contains no examples");
    if (d == 0) throw error("libsvm input contains no features");

    Matrix x = Matrix::Zero(static_cast<Index>(rows.size()), d);
    Vector y(static_cast<Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        y[static_cast<Index>(r)] = rows[r].label;
        for (const auto& [c, v] : rows[r].entries) x(static_cast<Index>(r), c) = v;
    }
    return Dataset(std::move(x), std::move(y));
}

inline Dataset parse_libsvm(std::string_view text, const ParseOptions& opts = {}) {
    std::istringstream in{std::string(text)};
    return parse_libsvm(in, opts);
}

/// Writes nonzero entries with round-trip precision.
inline void write_libsvm(std::ostream& out, const Dataset& ds) {
    char buf[32];
    for (Index j = 0; j < ds.n(); ++j) {
        out << (ds.labels[j] > 0 ? "+1" : "-1");
        for (Index c = 0; c < ds.d(); ++c) {
            const double v = ds.features(j, c);
            if (v == 0.0) continue;
            std::snprintf(buf, sizeof buf, "%.17g", v);
            out << ' ' << (c + 1) << ':' << buf;
        }
        out << '\n';
    }
}

// ---------------------------------------------------------------------------
// Scaling

enum class ScaleMode { none, minmax, zscore };

inline ScaleMode parse_scale_mode(std::string_view s) {
    if (s == "none") return ScaleMode::none;
    if (s == "minmax") return ScaleMode::minmax;
    if (s == "zscore") return ScaleMode::zscore;
    throw error("unknown scale mode '" + std::string(s) + "' (none|minmax|zscore)");
}

inline const char* to_string(ScaleMode m) {
    switch (m) {
    case ScaleMode::minmax: return "minmax";
    case ScaleMode::zscore: return "zscore";
    default: return "none";
    }
}

/// Per-column affine map x' = (x - center) * factor. Degenerate (constant)
/// columns get factor 0 so they map to 0.
struct Scaler {
    ScaleMode mode = ScaleMode::none;
    Vector center;
    Vector factor;

    static Scaler fit(const Matrix& x, ScaleMode mode) {
        Scaler s;
        s.mode = mode;
        const Index d = x.cols();
        s.center = Vector::Zero(d);
        s.factor = Vector::Ones(d);
        if (mode == ScaleMode::none) return s;
        detail::require(mode != ScaleMode::zscore || x.rows() >= 2, "zscore scaling needs n >= 2");
        for (Index c = 0; c < d; ++c) {
            const auto col = x.col(c);
            if (mode == ScaleMode::minmax) {
                const double lo = col.minCoeff(), hi = col.maxCoeff();
                s.center[c] = 0.5 * (lo + hi);
                s.factor[c] = hi > lo ? 2.0 / (hi - lo) : 0.0;
            } else {
                const double mean = col.mean();
                const double var = (col.array() - mean).square().mean();
                s.center[c] = mean;
                s.factor[c] = var > 0.0 ? 1.0 / std::sqrt(var) : 0.0;
            }
        }
        return s;
    }

    Matrix apply(const Matrix& x) const {
        if (mode == ScaleMode::none) return x;
        detail::require(x.cols() == center.size(), "scaler dimension mismatch");
        Matrix out(x.rows(), x.cols());
        for (Index j = 0; j < x.rows(); ++j)
            out.row(j) = ((x.row(j).transpose() - center).array() * factor.array()).transpose();
        return out;
    }

    Dataset apply(const Dataset& ds) const { return Dataset(apply(ds.features), ds.labels); }
};

inline Dataset scale_features(const Dataset& ds, ScaleMode mode) {
    return Scaler::fit(ds.features, mode).apply(ds);
}

// ---------------------------------------------------------------------------
// Splitting

struct SplitSpec {
    double train_fraction = 0.75;
    std::uint64_t seed = 0;
};

/// Fisher-Yates permutation of [0, n).
inline std::vector<Index> shuffled_indices(Index n, std::uint64_t seed) {
    std::vector<Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Index{0});
    Rng rng(seed);
    for (Index i = n - 1; i > 0; --i) {
        const auto j = static_cast<Index>(rng.below(static_cast<std::uint64_t>(i) + 1));
        std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
    }
    return perm;
}

/// Train size round(fraction * n), clamped so both parts are nonempty.
inline Index train_size(Index n, double fraction) {
    const auto k = static_cast<Index>(std::llround(fraction * static_cast<double>(n)));
    return std::clamp<Index>(k, 1, n - 1);
}

struct SplitIndices {
    std::vector<Index> train;
    std::vector<Index> test;
};

inline SplitIndices split_indices(Index n, const SplitSpec& spec) {
    detail::require(n >= 2, "split needs at least 2 examples");
    detail::require(spec.train_fraction > 0.0 && spec.train_fraction < 1.0, "train_fraction must be in (0, 1)");
    auto perm = shuffled_indices(n, spec.seed);
    const auto k = static_cast<std::size_t>(train_size(n, spec.train_fraction));
    SplitIndices out;
    out.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(k));
    out.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(k), perm.end());
    return out;
}

inline std::pair<Dataset, Dataset> split(const Dataset& ds, const SplitSpec& spec) {
    auto idx = split_indices(ds.n(), spec);
    return {subset(ds, idx.train), subset(ds, idx.test)};
}

} // namespace lokal
