#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "learner/error.hpp"

namespace learner {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Position of a single matrix entry.
struct Entry {
  Index row = 0;
  Index col = 0;
  auto operator<=>(const Entry&) const = default;
};

inline std::string shape_string(Index rows, Index cols) {
  return std::to_string(rows) + "x" + std::to_string(cols);
}

/// Dense real matrix with an explicit observation mask (true = observed).
///
/// Values at unobserved positions are stored as 0 and never read by any
/// arithmetic in this library; callers that need the zero-filled view can use
/// values() directly.
class ObservedMatrix {
 public:
  explicit ObservedMatrix(Matrix values) : ObservedMatrix(values, Mask::Constant(values.rows(), values.cols(), true)) {}

  ObservedMatrix(Matrix values, Mask mask) : values_(std::move(values)), mask_(std::move(mask)) {
    require(values_.rows() > 0 && values_.cols() > 0, ErrorCode::EmptyMatrix, "matrix has no entries");
    require(mask_.rows() == values_.rows() && mask_.cols() == values_.cols(), ErrorCode::DimensionMismatch,
            "mask " + shape_string(mask_.rows(), mask_.cols()) + " vs values " +
                shape_string(values_.rows(), values_.cols()));
    observed_ = 0;
    for (Index j = 0; j < values_.cols(); ++j) {
      for (Index i = 0; i < values_.rows(); ++i) {
        if (!mask_(i, j)) {
          values_(i, j) = 0.0;
          continue;
        }
        require(std::isfinite(values_(i, j)), ErrorCode::NonFiniteInput,
                "observed entry (" + std::to_string(i) + "," + std::to_string(j) + ") is not finite");
        ++observed_;
      }
    }
    require(observed_ > 0, ErrorCode::EmptyObservationSet, "no observed entries");
  }

  Index rows() const noexcept { return values_.rows(); }
  Index cols() const noexcept { return values_.cols(); }
  Index size() const noexcept { return values_.size(); }
  Index observed_count() const noexcept { return observed_; }
  bool fully_observed() const noexcept { return observed_ == values_.size(); }

  bool is_observed(Index i, Index j) const { return mask_(i, j); }
  double operator()(Index i, Index j) const { return values_(i, j); }

  /// Zero-filled values.
  const Matrix& values() const noexcept { return values_; }
  const Mask& mask() const noexcept { return mask_; }

  /// Observed entries in column-major order.
  std::vector<Entry> observed_entries() const {
    std::vector<Entry> out;
    out.reserve(static_cast<std::size_t>(observed_));
    for (Index j = 0; j < cols(); ++j)
      for (Index i = 0; i < rows(); ++i)
        if (mask_(i, j)) out.push_back({i, j});
    return out;
  }

  /// Copy with the given entries additionally marked missing.
  ObservedMatrix with_hidden(const std::vector<Entry>& hidden) const {
    Mask m = mask_;
    for (const auto& e : hidden) {
      require(e.row >= 0 && e.row < rows() && e.col >= 0 && e.col < cols(), ErrorCode::IndexOutOfRange,
              "hidden entry outside matrix");
      m(e.row, e.col) = false;
    }
    return ObservedMatrix(values_, std::move(m));
  }

 private:
  Matrix values_;
  Mask mask_;
  Index observed_ = 0;
};

/// Top-r singular triplets: u (p x r), singular_values (r, nonincreasing), v (q x r).
struct TruncatedSvd {
  Matrix u;
  Vector singular_values;
  Matrix v;

  Index rank() const noexcept { return singular_values.size(); }

  Matrix reconstruct() const { return u * singular_values.asDiagonal() * v.transpose(); }

  /// Leading `r` triplets of this decomposition.
  TruncatedSvd leading(Index r) const {
    require(r >= 1 && r <= rank(), ErrorCode::RankOutOfRange,
            "requested " + std::to_string(r) + " of " + std::to_string(rank()) + " triplets");
    return {u.leftCols(r), singular_values.head(r), v.leftCols(r)};
  }
};

inline double orthonormality_error(const Matrix& q) {
  return (q.transpose() * q - Matrix::Identity(q.cols(), q.cols())).norm();
}

inline void require_orthonormal(const Matrix& q, double tol, const std::string& name) {
  require(q.cols() >= 1, ErrorCode::NotOrthonormal, name + " has no columns");
  double err = orthonormality_error(q);
  require(err <= tol, ErrorCode::NotOrthonormal,
          name + " deviates from orthonormal by " + std::to_string(err));
}

/// Source latent bases used by the transfer penalties and projections.
struct SourceBases {
  Matrix u1;  // p x r, orthonormal
  Matrix v1;  // q x r, orthonormal

  Index rank() const noexcept { return u1.cols(); }

  static SourceBases from(Matrix u1, Matrix v1) {
    require(u1.cols() == v1.cols(), ErrorCode::DimensionMismatch, "source bases have different ranks");
    require_orthonormal(u1, 1e-10, "U1");
    require_orthonormal(v1, 1e-10, "V1");
    return {std::move(u1), std::move(v1)};
  }

  static SourceBases from(const TruncatedSvd& svd) { return from(svd.u, svd.v); }
};

namespace detail {

inline void require_finite(const Matrix& m, const char* name) {
  require(m.allFinite(), ErrorCode::NonFiniteInput, std::string(name) + " has non-finite entries");
}

// Flip each column pair so the left vector's largest-magnitude entry is positive;
// ties go to the lowest index.
inline void fix_signs(Matrix& u, Matrix& v) {
  for (Index k = 0; k < u.cols(); ++k) {
    Index arg = 0;
    double best = -1.0;
    for (Index i = 0; i < u.rows(); ++i) {
      double a = std::abs(u(i, k));
      if (a > best) {
        best = a;
        arg = i;
      }
    }
    if (u(arg, k) < 0.0) {
      u.col(k) *= -1.0;
      v.col(k) *= -1.0;
    }
  }
}

}  // namespace detail

/// All min(p, q) singular values in nonincreasing order.
inline Vector singular_values(const Matrix& m) {
  detail::require_finite(m, "matrix");
  Eigen::BDCSVD<Matrix> svd(m);
  return svd.singularValues();
}

inline TruncatedSvd truncated_svd(const Matrix& m, Index r) {
  const Index k = std::min(m.rows(), m.cols());
  require(r >= 1 && r <= k, ErrorCode::RankOutOfRange,
          "rank " + std::to_string(r) + " outside [1, " + std::to_string(k) + "]");
  detail::require_finite(m, "matrix");
  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  TruncatedSvd out{svd.matrixU().leftCols(r), svd.singularValues().head(r), svd.matrixV().leftCols(r)};
  detail::fix_signs(out.u, out.v);
  return out;
}

inline TruncatedSvd truncated_svd(const ObservedMatrix& m, Index r) {
  require(m.fully_observed(), ErrorCode::InvalidArgument, "truncated_svd needs a fully observed matrix");
  return truncated_svd(m.values(), r);
}

/// Orthonormal basis of span(b) with the same column order (Gram-Schmidt signs).
inline Matrix orthonormalize(const Matrix& b) {
  const Index p = b.rows();
  const Index r = b.cols();
  require(r >= 1 && r <= p, ErrorCode::RankDeficient,
          "cannot orthonormalize " + shape_string(p, r));
  detail::require_finite(b, "basis");
  Eigen::HouseholderQR<Matrix> qr(b);
  Vector diag = qr.matrixQR().diagonal().head(r);
  const double largest = diag.cwiseAbs().maxCoeff();
  const double smallest = diag.cwiseAbs().minCoeff();
  require(largest > 0.0 && smallest >= 1e-12 * largest, ErrorCode::RankDeficient,
          "numerical column rank below " + std::to_string(r));
  Matrix q = qr.householderQ() * Matrix::Identity(p, r);
  for (Index k = 0; k < r; ++k)
    if (diag(k) < 0.0) q.col(k) *= -1.0;
  return q;
}

/// X - Q (Q^T X), i.e. the complement projector applied without forming it.
inline Matrix apply_complement_projection(const Matrix& q, const Matrix& x) {
  require(q.rows() == x.rows(), ErrorCode::DimensionMismatch,
          "basis " + shape_string(q.rows(), q.cols()) + " vs operand " + shape_string(x.rows(), x.cols()));
  return x - q * (q.transpose() * x);
}

/// ||Qa Qa^T - Qb Qb^T||_F via sqrt(ra + rb - 2 ||Qa^T Qb||_F^2).
inline double subspace_distance(const Matrix& qa, const Matrix& qb) {
  require(qa.rows() == qb.rows(), ErrorCode::DimensionMismatch,
          "bases have " + std::to_string(qa.rows()) + " and " + std::to_string(qb.rows()) + " rows");
  const double cross = (qa.transpose() * qb).squaredNorm();
  const double sq = static_cast<double>(qa.cols() + qb.cols()) - 2.0 * cross;
  return std::sqrt(std::max(sq, 0.0));
}

inline double frobenius_error(const Matrix& a, const Matrix& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), ErrorCode::DimensionMismatch,
          shape_string(a.rows(), a.cols()) + " vs " + shape_string(b.rows(), b.cols()));
  return (a - b).norm();
}

inline double min_singular_value(const Matrix& m) {
  require(m.size() > 0, ErrorCode::EmptyMatrix, "empty matrix");
  return singular_values(m).minCoeff();
}

struct CompletionResult {
  Matrix estimate;
  /// Sum of squared errors on the observed entries after each iteration.
  std::vector<double> observed_loss;
  int iterations = 0;
  bool converged = false;
};

inline double observed_squared_error(const Matrix& w, const ObservedMatrix& y) {
  return (w - y.values()).cwiseProduct(y.mask().cast<double>().matrix()).squaredNorm();
}

/// Rank-r completion by repeated impute / truncate (hard impute).
///
/// Missing entries start at 0. Each sweep replaces the working matrix by its
/// rank-r truncation and restores the observed values; the Omega-restricted
/// loss of the iterates is nonincreasing.
inline CompletionResult complete_rank_r(const ObservedMatrix& y, Index r, double tol = 1e-9, int max_iter = 1000) {
  require(r >= 1 && r <= std::min(y.rows(), y.cols()), ErrorCode::RankOutOfRange,
          "rank " + std::to_string(r) + " invalid for " + shape_string(y.rows(), y.cols()));
  require(tol > 0.0 && max_iter >= 1, ErrorCode::InvalidArgument, "tol and max_iter must be positive");
  const Matrix observed = y.mask().cast<double>().matrix();
  for (Index i = 0; i < y.rows(); ++i)
    require(observed.row(i).sum() > 0.0, ErrorCode::EmptyRowOrColumn, "row " + std::to_string(i) + " is unobserved");
  for (Index j = 0; j < y.cols(); ++j)
    require(observed.col(j).sum() > 0.0, ErrorCode::EmptyRowOrColumn,
            "column " + std::to_string(j) + " is unobserved");

  CompletionResult out;
  if (y.fully_observed()) {
    out.estimate = truncated_svd(y.values(), r).reconstruct();
    out.observed_loss.push_back(observed_squared_error(out.estimate, y));
    out.iterations = 1;
    out.converged = true;
    return out;
  }

  const Matrix missing = Matrix::Ones(y.rows(), y.cols()) - observed;
  Matrix filled = y.values();
  Matrix previous;
  for (int it = 1; it <= max_iter; ++it) {
    Matrix current = truncated_svd(filled, r).reconstruct();
    out.observed_loss.push_back(observed_squared_error(current, y));
    out.iterations = it;
    filled = y.values() + current.cwiseProduct(missing);
    if (it > 1) {
      const double change = (current - previous).norm() / std::max(1.0, previous.norm());
      if (change < tol) {
        out.estimate = std::move(current);
        out.converged = true;
        return out;
      }
    }
    previous = std::move(current);
  }
  out.estimate = std::move(previous);
  return out;
}

}  // namespace learner
