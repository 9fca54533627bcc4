#pragma once

#include <string>

#include <Eigen/Dense>

namespace ttsa {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Spectral norm (largest singular value).
double spectral_norm(const Matrix& m);

// Extreme eigenvalues of m + m^T. The positive-definiteness conditions and
// the q constants always enter through the symmetrized matrix, so the
// helpers take the raw matrix and symmetrize internally.
double lambda_min_sym(const Matrix& m);
double lambda_max_sym(const Matrix& m);

// Inverse / solve with an explicit singularity check (throws SingularMatrix
// carrying the name).
Matrix invert(const Matrix& m, const std::string& name);
Vector solve(const Matrix& m, const Vector& rhs, const std::string& name);

}  // namespace ttsa
