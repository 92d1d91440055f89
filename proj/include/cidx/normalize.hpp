#pragma once

// Scalar kernels for anchor normalization and weighted aggregation. These
// are templated so they also accept Eigen expressions and non-double
// scalars; the engine instantiates them with double.

#include "cidx/indicator_tree.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>

namespace cidx {

/// Linear map of `value` onto [0, scale] against fixed anchors, clamped at
/// both ends. lower_better mirrors the result.
template <typename Scalar>
Scalar normalize_value(Scalar value, Scalar low, Scalar high, Direction direction,
                       Scalar scale = Scalar(kScale)) {
    using std::clamp;
    const Scalar unit = clamp((value - low) / (high - low), Scalar(0), Scalar(1));
    const Scalar s = scale * unit;
    return direction == Direction::higher_better ? s : scale - s;
}

double normalize_value(double value, const AnchorPair& anchors, Direction direction);

/// Element-wise normalization of an array of raw values sharing one anchor
/// pair.
template <typename Derived>
auto normalize_array(const Eigen::ArrayBase<Derived>& values, typename Derived::Scalar low,
                     typename Derived::Scalar high, Direction direction) {
    using Scalar = typename Derived::Scalar;
    const Scalar scale(kScale);
    auto unit = ((values - low) / (high - low)).max(Scalar(0)).min(Scalar(1));
    using Result = Eigen::Array<Scalar, Derived::RowsAtCompileTime, Derived::ColsAtCompileTime>;
    Result s = scale * unit;
    if (direction == Direction::lower_better)
        s = scale - s;
    return s;
}

/// Σ wᵢ sᵢ over the whole vector. Weights are assumed to sum to one.
template <typename DerivedW, typename DerivedS>
typename DerivedW::Scalar weighted_sum(const Eigen::MatrixBase<DerivedW>& weights,
                                       const Eigen::MatrixBase<DerivedS>& scores) {
    return weights.dot(scores);
}

/// Composites for every row of an entity-by-dimension score matrix.
template <typename DerivedS, typename DerivedW>
Eigen::Matrix<typename DerivedS::Scalar, Eigen::Dynamic, 1> composites(
    const Eigen::MatrixBase<DerivedS>& scores, const Eigen::MatrixBase<DerivedW>& weights) {
    return scores * weights;
}

/// Scales a strictly positive vector so its entries sum to one.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> renormalized(const Eigen::MatrixBase<Derived>& w) {
    return w / w.sum();
}

}  // namespace cidx
