#include "ttsa/linalg.hpp"

#include "ttsa/errors.hpp"

namespace ttsa {

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

double lambda_min_sym(const Matrix& m) {
  Matrix s = m + m.transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> es(s, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double lambda_max_sym(const Matrix& m) {
  Matrix s = m + m.transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> es(s, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

Matrix invert(const Matrix& m, const std::string& name) {
  Eigen::FullPivLU<Matrix> lu(m);
  if (!lu.isInvertible()) throw SingularMatrix(name);
  return lu.inverse();
}

Vector solve(const Matrix& m, const Vector& rhs, const std::string& name) {
  Eigen::FullPivLU<Matrix> lu(m);
  if (!lu.isInvertible()) throw SingularMatrix(name);
  return lu.solve(rhs);
}

}  // namespace ttsa
