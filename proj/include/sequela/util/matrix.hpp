#pragma once

#include <Eigen/Dense>

namespace sequela {

/// Row-major dense matrix: one row per patient or instance.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace sequela
