#pragma once

#include "lokal/common.hpp"

#include <cmath>

namespace lokal {

/// exp(v_i) / sum_k exp(v_k), shifted by max(v) so large inputs cannot overflow.
template <typename Derived>
Vector softmax(const Eigen::MatrixBase<Derived>& v) {
    detail::require(v.size() >= 1, "softmax of an empty vector");
    const double top = v.maxCoeff();
    detail::require(std::isfinite(top), "softmax input must be finite");
    Vector out = (v.derived().template cast<double>().array() - top).exp().matrix();
    out /= out.sum();
    return out;
}

/// Row-wise softmax.
inline Matrix softmax_rows(const Matrix& logits) {
    Matrix out(logits.rows(), logits.cols());
    for (Index j = 0; j < logits.rows(); ++j) out.row(j) = softmax(logits.row(j).transpose()).transpose();
    return out;
}

} // namespace lokal
