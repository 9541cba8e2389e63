#pragma once

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "learner/matrix_core.hpp"

// Reference computations used to check the library. They avoid the code
// paths under test: eigen-decompositions instead of SVDs, explicit
// projectors, scalar loops.
namespace oracle {

using learner::Index;
using learner::Matrix;
using learner::Vector;

inline Matrix gaussian(Index rows, Index cols, std::mt19937_64& gen) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = n(gen);
  return m;
}

/// Singular values, descending, from the eigenvalues of M^T M or M M^T.
inline Vector singular_values(const Matrix& m) {
  const Matrix g = m.rows() >= m.cols() ? Matrix(m.transpose() * m) : Matrix(m * m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(g);
  Vector ev = es.eigenvalues().reverse();
  for (Index i = 0; i < ev.size(); ++i) ev(i) = std::sqrt(std::max(0.0, ev(i)));
  return ev;
}

/// Orthonormal basis by Gram-Schmidt (twice, for stability).
inline Matrix gram_schmidt(const Matrix& b) {
  Matrix q = b;
  for (int pass = 0; pass < 2; ++pass) {
    for (Index k = 0; k < q.cols(); ++k) {
      for (Index j = 0; j < k; ++j) q.col(k) -= q.col(j).dot(q.col(k)) * q.col(j);
      q.col(k) /= q.col(k).norm();
    }
  }
  return q;
}

inline Matrix random_orthonormal(Index rows, Index cols, std::mt19937_64& gen) {
  return gram_schmidt(gaussian(rows, cols, gen));
}

inline Matrix projector(const Matrix& q) {
  Matrix p = Matrix::Zero(q.rows(), q.rows());
  for (Index i = 0; i < q.rows(); ++i)
    for (Index j = 0; j < q.rows(); ++j)
      for (Index k = 0; k < q.cols(); ++k) p(i, j) += q(i, k) * q(j, k);
  return p;
}

inline double sum_squares(const Matrix& m) {
  double s = 0.0;
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i) s += m(i, j) * m(i, j);
  return s;
}

inline double rel(const Matrix& a, const Matrix& b) {
  const double denom = std::max(b.norm(), 1e-300);
  return (a - b).norm() / denom;
}

}  // namespace oracle
