#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "learner/matrix_core.hpp"

namespace learner {

enum class Termination { Converged, MaxIter, Diverged };

constexpr std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::Converged: return "converged";
    case Termination::MaxIter: return "max_iter";
    case Termination::Diverged: return "diverged";
  }
  return "unknown";
}

/// Optimizer configuration for the penalized factorization.
///
/// lambda1_row penalizes the part of U outside span(U1), lambda1_col the part
/// of V outside span(V1); equal values give the single-penalty objective.
struct FitSpec {
  Index rank = 1;
  double lambda1_row = 0.0;
  double lambda1_col = 0.0;
  double lambda2 = 0.0;
  double step_size = 0.01;
  int max_iter = 75;
  double tol = 1e-3;
  double divergence_factor = 10.0;

  FitSpec with_lambdas(double l1_row, double l1_col, double l2) const {
    FitSpec s = *this;
    s.lambda1_row = l1_row;
    s.lambda1_col = l1_col;
    s.lambda2 = l2;
    return s;
  }

  void validate() const {
    require(rank >= 1, ErrorCode::RankOutOfRange, "rank must be positive");
    require(lambda1_row >= 0.0 && lambda1_col >= 0.0 && lambda2 >= 0.0, ErrorCode::InvalidArgument,
            "penalties must be nonnegative");
    require(std::isfinite(lambda1_row) && std::isfinite(lambda1_col) && std::isfinite(lambda2),
            ErrorCode::InvalidArgument, "penalties must be finite");
    require(step_size > 0.0 && std::isfinite(step_size), ErrorCode::InvalidArgument, "step size must be positive");
    require(max_iter >= 1, ErrorCode::InvalidArgument, "max_iter must be positive");
    require(tol > 0.0, ErrorCode::InvalidArgument, "tol must be positive");
    require(divergence_factor > 1.0, ErrorCode::InvalidArgument, "divergence factor must exceed 1");
  }
};

struct FactorPair {
  Matrix u;  // p x r
  Matrix v;  // q x r
};

/// U0 = U1 diag(s)^{1/2}, V0 = V1 diag(s)^{1/2}.
inline FactorPair default_init(const TruncatedSvd& source) {
  const Vector root = source.singular_values.cwiseSqrt();
  return {source.u * root.asDiagonal(), source.v * root.asDiagonal()};
}

struct FitResult {
  Matrix u_best;
  Matrix v_best;
  Matrix theta_hat;
  std::vector<double> objective_trajectory;  // includes the initial value
  std::size_t t_best = 0;
  Termination termination = Termination::MaxIter;
  int threads = 1;
};

/// Squared-error term on a fully observed target.
class DenseTarget {
 public:
  explicit DenseTarget(const Matrix& y) : y_(&y) {}

  Index rows() const { return y_->rows(); }
  Index cols() const { return y_->cols(); }
  double scale() const { return 1.0; }
  double data_norm() const { return y_->norm(); }
  Matrix residual(const Matrix& u, const Matrix& v) const { return u * v.transpose() - *y_; }

 private:
  const Matrix* y_;
};

/// Squared-error term restricted to observed entries, rescaled by pq/|Omega|.
/// The residual is zero off Omega, which is the same as imputing UV^T there.
class MaskedTarget {
 public:
  explicit MaskedTarget(const ObservedMatrix& y)
      : y_(&y.values()),
        weight_(y.mask().cast<double>().matrix()),
        scale_(static_cast<double>(y.size()) / static_cast<double>(y.observed_count())) {}

  Index rows() const { return y_->rows(); }
  Index cols() const { return y_->cols(); }
  double scale() const { return scale_; }
  double data_norm() const { return y_->norm(); }
  Matrix residual(const Matrix& u, const Matrix& v) const {
    return (u * v.transpose() - *y_).cwiseProduct(weight_);
  }

 private:
  const Matrix* y_;
  Matrix weight_;
  double scale_;
};

/// Objective and gradients for one (target, bases, penalties) instance.
template <class Target>
class LearnerProblem {
 public:
  LearnerProblem(Target target, const SourceBases& bases, const FitSpec& spec)
      : target_(std::move(target)), bases_(&bases), spec_(spec) {
    require(bases.u1.rows() == target_.rows() && bases.v1.rows() == target_.cols(), ErrorCode::DimensionMismatch,
            "target " + shape_string(target_.rows(), target_.cols()) + " vs bases " +
                shape_string(bases.u1.rows(), bases.v1.rows()));
  }

  double objective(const Matrix& u, const Matrix& v) const {
    check(u, v);
    const Matrix gram_gap = u.transpose() * u - v.transpose() * v;
    return target_.scale() * target_.residual(u, v).squaredNorm() +
           spec_.lambda1_row * apply_complement_projection(bases_->u1, u).squaredNorm() +
           spec_.lambda1_col * apply_complement_projection(bases_->v1, v).squaredNorm() +
           spec_.lambda2 * gram_gap.squaredNorm();
  }

  Matrix grad_u(const Matrix& u, const Matrix& v) const {
    check(u, v);
    const Matrix gram_gap = u.transpose() * u - v.transpose() * v;
    return 2.0 * target_.scale() * (target_.residual(u, v) * v) +
           2.0 * spec_.lambda1_row * apply_complement_projection(bases_->u1, u) + 4.0 * spec_.lambda2 * (u * gram_gap);
  }

  /// Size of the gradient's terms before cancellation; a gradient below a
  /// small multiple of this is round-off at a stationary point.
  double grad_scale(const Matrix& x, const Matrix& other, double lambda1) const {
    const double nx = x.norm();
    const double no = other.norm();
    return 2.0 * target_.scale() * (nx * no + target_.data_norm()) * no + 2.0 * lambda1 * nx +
           4.0 * spec_.lambda2 * nx * (nx * nx + no * no);
  }

  Matrix grad_v(const Matrix& u, const Matrix& v) const {
    check(u, v);
    const Matrix gram_gap = v.transpose() * v - u.transpose() * u;
    return 2.0 * target_.scale() * (target_.residual(u, v).transpose() * u) +
           2.0 * spec_.lambda1_col * apply_complement_projection(bases_->v1, v) + 4.0 * spec_.lambda2 * (v * gram_gap);
  }

 private:
  void check(const Matrix& u, const Matrix& v) const {
    require(u.rows() == target_.rows() && v.rows() == target_.cols() && u.cols() == v.cols(),
            ErrorCode::DimensionMismatch,
            "factors " + shape_string(u.rows(), u.cols()) + ", " + shape_string(v.rows(), v.cols()) +
                " do not fit target " + shape_string(target_.rows(), target_.cols()));
  }

  Target target_;
  const SourceBases* bases_;
  FitSpec spec_;
};

inline double objective(const Matrix& u, const Matrix& v, const ObservedMatrix& y0, const SourceBases& bases,
                        const FitSpec& spec) {
  if (y0.fully_observed()) return LearnerProblem(DenseTarget(y0.values()), bases, spec).objective(u, v);
  return LearnerProblem(MaskedTarget(y0), bases, spec).objective(u, v);
}

inline Matrix grad_u(const Matrix& u, const Matrix& v, const ObservedMatrix& y0, const SourceBases& bases,
                     const FitSpec& spec) {
  if (y0.fully_observed()) return LearnerProblem(DenseTarget(y0.values()), bases, spec).grad_u(u, v);
  return LearnerProblem(MaskedTarget(y0), bases, spec).grad_u(u, v);
}

inline Matrix grad_v(const Matrix& u, const Matrix& v, const ObservedMatrix& y0, const SourceBases& bases,
                     const FitSpec& spec) {
  if (y0.fully_observed()) return LearnerProblem(DenseTarget(y0.values()), bases, spec).grad_v(u, v);
  return LearnerProblem(MaskedTarget(y0), bases, spec).grad_v(u, v);
}

inline constexpr double kStationaryRelative = 1e-12;

/// One normalized descent step: x - c ||x|| g / ||g||. A zero gradient, or
/// one below kStationaryRelative * `scale`, leaves x unchanged.
inline Matrix normalized_step(const Matrix& x, const Matrix& g, double c, double scale = 0.0) {
  const double gnorm = g.norm();
  if (!(gnorm >= 1e-300) || gnorm <= kStationaryRelative * scale) return x;
  return x - (c * x.norm() / gnorm) * g;
}

/// Alternating normalized gradient descent on U then V, keeping the iterate
/// with the smallest objective (earliest on ties, possibly the initializer).
template <class Target>
FitResult fit_with(const Target& target, const SourceBases& bases, const FactorPair& init, const FitSpec& spec) {
  spec.validate();
  require(init.u.cols() == spec.rank && init.v.cols() == spec.rank, ErrorCode::RankOutOfRange,
          "initial factors have " + std::to_string(init.u.cols()) + " columns, spec rank is " +
              std::to_string(spec.rank));
  const LearnerProblem<Target> problem(target, bases, spec);

  Matrix u = init.u;
  Matrix v = init.v;
  FitResult out;
  out.threads = Eigen::nbThreads();
  out.u_best = u;
  out.v_best = v;

  const double eps0 = problem.objective(u, v);
  out.objective_trajectory.push_back(eps0);
  if (!std::isfinite(eps0)) {
    out.termination = Termination::Diverged;
    out.theta_hat = u * v.transpose();
    return out;
  }
  double best = eps0;
  double previous = eps0;
  out.termination = Termination::MaxIter;

  for (int t = 1; t <= spec.max_iter; ++t) {
    u = normalized_step(u, problem.grad_u(u, v), spec.step_size, problem.grad_scale(u, v, spec.lambda1_row));
    v = normalized_step(v, problem.grad_v(u, v), spec.step_size, problem.grad_scale(v, u, spec.lambda1_col));
    const double eps = problem.objective(u, v);
    out.objective_trajectory.push_back(eps);
    if (!std::isfinite(eps)) {
      out.termination = Termination::Diverged;
      break;
    }
    if (eps < best) {
      best = eps;
      out.t_best = static_cast<std::size_t>(t);
      out.u_best = u;
      out.v_best = v;
    }
    if (std::abs(eps - previous) < spec.tol) {
      out.termination = Termination::Converged;
      break;
    }
    if (eps > spec.divergence_factor * eps0) {
      out.termination = Termination::Diverged;
      break;
    }
    previous = eps;
  }
  out.theta_hat = out.u_best * out.v_best.transpose();
  return out;
}

inline FitResult fit(const ObservedMatrix& y0, const SourceBases& bases, const FactorPair& init,
                     const FitSpec& spec) {
  if (y0.fully_observed()) return fit_with(DenseTarget(y0.values()), bases, init, spec);
  return fit_with(MaskedTarget(y0), bases, init, spec);
}

/// Fit with bases and the default initializer taken from the source SVD.
inline FitResult fit(const ObservedMatrix& y0, const TruncatedSvd& source, const FitSpec& spec) {
  spec.validate();
  const TruncatedSvd lead = source.leading(spec.rank);
  return fit(y0, SourceBases::from(lead), default_init(lead), spec);
}

}  // namespace learner
