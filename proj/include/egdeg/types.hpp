#pragma once

#include <Eigen/Dense>

namespace egdeg {

// Ambient dimensions are small; capping them keeps vectors on the stack.
inline constexpr int kMaxDim = 8;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

}  // namespace egdeg
