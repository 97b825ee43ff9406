#pragma once

#include <Eigen/Dense>

namespace resgntk {

// Row-major so that per-node rows are contiguous; kernels are filled row by row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

using NodeIndex = std::size_t;
using ClassId = int;

}  // namespace resgntk
