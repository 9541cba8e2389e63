#pragma once

#include "learner/matrix_core.hpp"

namespace learner {

/// Direct projection estimator: P(U1) Y0 P(V1), evaluated as
/// U1 ((U1^T Y0) V1) V1^T so no p x p or q x q projector is formed.
inline Matrix d_learner(const Matrix& y0, const SourceBases& bases) {
  require(bases.u1.rows() == y0.rows() && bases.v1.rows() == y0.cols(), ErrorCode::DimensionMismatch,
          "target " + shape_string(y0.rows(), y0.cols()) + " vs bases " +
              shape_string(bases.u1.rows(), bases.v1.rows()));
  const Matrix core = (bases.u1.transpose() * y0) * bases.v1;
  return bases.u1 * core * bases.v1.transpose();
}

inline Matrix d_learner(const ObservedMatrix& y0, const SourceBases& bases) {
  require(y0.fully_observed(), ErrorCode::InvalidArgument,
          "d_learner needs a fully observed target; use d_learner_missing");
  return d_learner(y0.values(), bases);
}

/// Projection estimator on the rank-r completion of a partially observed target.
inline Matrix d_learner_missing(const ObservedMatrix& y0, const SourceBases& bases, Index r, double tol = 1e-9,
                                int max_iter = 1000) {
  if (y0.fully_observed()) return d_learner(y0.values(), bases);
  return d_learner(complete_rank_r(y0, r, tol, max_iter).estimate, bases);
}

}  // namespace learner
