#pragma once

#include <Eigen/Dense>

namespace pprobit {

/// Row-major so that each observation x_i is contiguous.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

}  // namespace pprobit
