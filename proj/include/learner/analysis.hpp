#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "learner/matrix_core.hpp"

namespace learner {

struct ContributionScores {
  Matrix scores;     // n x r, squared loadings in [0, 1]
  std::string axis;  // e.g. "variant" or "phenotype"
};

/// Elementwise squares of an orthonormal basis; each column sums to one.
inline ContributionScores contribution_scores(const Matrix& basis, std::string axis = "") {
  require(basis.cols() >= 1 && basis.rows() >= 1, ErrorCode::EmptyMatrix, "basis is empty");
  for (Index k = 0; k < basis.cols(); ++k) {
    const double norm = basis.col(k).norm();
    require(std::abs(norm - 1.0) <= 1e-6, ErrorCode::NotOrthonormal,
            "column " + std::to_string(k) + " has norm " + std::to_string(norm));
  }
  return {basis.cwiseAbs2(), std::move(axis)};
}

/// Indices of the n largest scores in column `col`, ties broken by index.
inline std::vector<std::pair<Index, double>> top_contributors(const ContributionScores& s, Index col, Index n) {
  require(col >= 0 && col < s.scores.cols(), ErrorCode::IndexOutOfRange, "no such factor");
  std::vector<Index> order(static_cast<std::size_t>(s.scores.rows()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return s.scores(a, col) > s.scores(b, col); });
  order.resize(static_cast<std::size_t>(std::min<Index>(n, s.scores.rows())));
  std::vector<std::pair<Index, double>> out;
  for (Index i : order) out.emplace_back(i, s.scores(i, col));
  return out;
}

inline Vector scree_values(const Matrix& y, Index k) {
  require(k >= 1 && k <= std::min(y.rows(), y.cols()), ErrorCode::RankOutOfRange,
          "k " + std::to_string(k) + " outside [1, min(p,q)]");
  return singular_values(y).head(k);
}

/// Submatrices P(Qa)[S,S] and P(Qb)[S,S] for an index subset S.
struct ProjectionBlocks {
  std::vector<Index> indices;
  Matrix pa;
  Matrix pb;

  Matrix difference() const { return pa - pb; }
};

inline ProjectionBlocks projection_gram(const Matrix& qa, const Matrix& qb, const std::vector<Index>& subset) {
  require(qa.rows() == qb.rows(), ErrorCode::DimensionMismatch, "bases have different row counts");
  const auto n = static_cast<Index>(subset.size());
  Matrix ra(n, qa.cols());
  Matrix rb(n, qb.cols());
  for (Index k = 0; k < n; ++k) {
    const Index i = subset[static_cast<std::size_t>(k)];
    require(i >= 0 && i < qa.rows(), ErrorCode::IndexOutOfRange, "index " + std::to_string(i) + " out of range");
    ra.row(k) = qa.row(i);
    rb.row(k) = qb.row(i);
  }
  return {subset, ra * ra.transpose(), rb * rb.transpose()};
}

inline ProjectionBlocks projection_gram(const Matrix& qa, const Matrix& qb) {
  std::vector<Index> all(static_cast<std::size_t>(qa.rows()));
  std::iota(all.begin(), all.end(), Index{0});
  return projection_gram(qa, qb, all);
}

/// sum_l [ mean_i v_il^4 - (mean_i v_il^2)^2 ]
inline double varimax_criterion(const Matrix& v) {
  const double q = static_cast<double>(v.rows());
  const Matrix sq = v.cwiseAbs2();
  double total = 0.0;
  for (Index l = 0; l < v.cols(); ++l) {
    const double m2 = sq.col(l).sum() / q;
    const double m4 = sq.col(l).squaredNorm() / q;
    total += m4 - m2 * m2;
  }
  return total;
}

struct VarimaxResult {
  Matrix rotated;   // V R
  Matrix rotation;  // r x r orthogonal
  std::vector<double> criterion;  // per iterate, starting with the unrotated input
  int iterations = 0;
  bool converged = false;
};

/// Kaiser varimax without row normalization, by the SVD update
/// R <- P Q^T where P S Q^T = svd(V^T (L^3 - L diag(colsum(L^2))/q)).
///
/// Columns of the result are ordered by descending sum of squares and signed
/// so each column's largest-magnitude entry is positive.
inline VarimaxResult varimax(const Matrix& v, double tol = 1e-10, int max_iter = 1000) {
  require(v.cols() >= 1 && v.rows() >= 1, ErrorCode::EmptyMatrix, "loadings are empty");
  require(v.allFinite(), ErrorCode::NonFiniteInput, "loadings are not finite");
  const Index r = v.cols();
  const double q = static_cast<double>(v.rows());

  VarimaxResult out;
  Matrix rotation = Matrix::Identity(r, r);
  Matrix best_rotation = rotation;
  double best = varimax_criterion(v);
  out.criterion.push_back(best);
  for (int it = 1; it <= max_iter; ++it) {
    const Matrix l = v * rotation;
    const Vector colsum = l.cwiseAbs2().colwise().sum().transpose() / q;
    const Matrix target = l.array().cube().matrix() - l * colsum.asDiagonal();
    Eigen::JacobiSVD<Matrix> svd(v.transpose() * target, Eigen::ComputeFullU | Eigen::ComputeFullV);
    rotation = svd.matrixU() * svd.matrixV().transpose();
    const double crit = varimax_criterion(v * rotation);
    out.criterion.push_back(crit);
    out.iterations = it;
    const double previous = best;
    if (crit > best) {
      best = crit;
      best_rotation = rotation;
    }
    if (std::abs(crit - previous) <= tol) {
      out.converged = true;
      break;
    }
  }

  Matrix rotated = v * best_rotation;
  std::vector<Index> order(static_cast<std::size_t>(r));
  std::iota(order.begin(), order.end(), Index{0});
  const Vector ss = rotated.cwiseAbs2().colwise().sum().transpose();
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return ss(a) > ss(b); });
  out.rotated.resize(v.rows(), r);
  out.rotation.resize(r, r);
  for (Index k = 0; k < r; ++k) {
    const Index src = order[static_cast<std::size_t>(k)];
    Index arg = 0;
    rotated.col(src).cwiseAbs().maxCoeff(&arg);
    const double sign = rotated(arg, src) < 0.0 ? -1.0 : 1.0;
    out.rotated.col(k) = sign * rotated.col(src);
    out.rotation.col(k) = sign * best_rotation.col(src);
  }
  return out;
}

}  // namespace learner
