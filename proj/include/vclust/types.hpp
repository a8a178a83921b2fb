#pragma once

#include <cmath>

#include <Eigen/Dense>

namespace vclust {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

inline constexpr double kPi = 3.14159265358979323846;

/// Clockwise planar rotation [[cos t, sin t], [-sin t, cos t]].
inline Mat2 rotation_cw(double t) {
  Mat2 r;
  r << std::cos(t), std::sin(t), -std::sin(t), std::cos(t);
  return r;
}

}  // namespace vclust
