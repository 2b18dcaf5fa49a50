#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace fimex {

using Real = double;
using Complex = std::complex<double>;

// Solution and derivative vectors are complex throughout: the spectral KdV
// state and the complex Dahlquist tests need it, and real problems simply
// carry a zero imaginary part.
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// q solution (or derivative) vectors, one per node.
using Block = std::vector<Vector>;

}  // namespace fimex
