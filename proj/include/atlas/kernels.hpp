#pragma once

// Scalar kernels shared by the similarity model and the label weights.

#include <algorithm>
#include <cmath>

#include <Eigen/Core>

namespace atlas {

// e^{-distance / scale}: 1 at distance 0, about 0.37 at one characteristic scale.
template <typename Scalar>
Scalar exp_kernel(Scalar distance, Scalar scale) {
    return std::exp(-distance / scale);
}

// 2^{-generations}.
template <typename Scalar = double>
Scalar halving_kernel(int generations) {
    return std::ldexp(Scalar(1), -generations);
}

// Cosine similarity clamped into [0, 1]; zero vectors are dissimilar to everything.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar clamped_cosine(const Eigen::MatrixBase<DerivedA>& a,
                                         const Eigen::MatrixBase<DerivedB>& b) {
    using Scalar = typename DerivedA::Scalar;
    const Scalar na = a.norm();
    const Scalar nb = b.norm();
    if (na == Scalar(0) || nb == Scalar(0)) return Scalar(0);
    return std::clamp(a.dot(b) / (na * nb), Scalar(0), Scalar(1));
}

}  // namespace atlas
