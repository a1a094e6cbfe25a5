#pragma once

#include <Eigen/Dense>

namespace capfactor {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

}  // namespace capfactor
