#pragma once

#include <Eigen/Dense>

namespace singulax {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

}  // namespace singulax
