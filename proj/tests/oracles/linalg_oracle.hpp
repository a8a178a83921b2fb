#pragma once

#include <Eigen/Eigenvalues>

#include "vclust/types.hpp"

namespace oracle {

// K^{-1/2} through a symmetric eigendecomposition.
inline vclust::Mat2 inverse_sqrt(const vclust::Mat2& K) {
  Eigen::SelfAdjointEigenSolver<vclust::Mat2> es(K);
  const auto& v = es.eigenvectors();
  vclust::Vec2 d = es.eigenvalues().cwiseSqrt().cwiseInverse();
  return v * d.asDiagonal() * v.transpose();
}

}  // namespace oracle
