#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <string_view>

#include "learner/matrix_core.hpp"

namespace learner {

enum class RankStrategyKind { Fixed, ScreeNot, GapFallback };

struct RankStrategy {
  RankStrategyKind kind = RankStrategyKind::ScreeNot;
  Index fixed_rank = 0;

  static RankStrategy fixed(Index r) { return {RankStrategyKind::Fixed, r}; }
  static RankStrategy screenot() { return {RankStrategyKind::ScreeNot, 0}; }
  static RankStrategy gap() { return {RankStrategyKind::GapFallback, 0}; }
};

constexpr std::string_view to_string(RankStrategyKind k) {
  switch (k) {
    case RankStrategyKind::Fixed: return "fixed";
    case RankStrategyKind::ScreeNot: return "screenot";
    case RankStrategyKind::GapFallback: return "gap";
  }
  return "unknown";
}

/// Loose rank upper bound floor(min(p, q) / 3), at least 1.
inline Index default_rank_upper_bound(Index p, Index q) { return std::max<Index>(1, std::min(p, q) / 3); }

namespace screenot {

/// Replaces the top k singular values by a stand-in for the noise bulk.
///
/// With room for it (2k < n) the top k are extrapolated from the values at
/// positions k and 2k assuming the square-root edge of the bulk, i.e. the
/// j-th largest noise value behaves like edge - C j^{2/3}. Otherwise the
/// top k are winsorized to the value at position k.
inline Vector pseudo_noise(const Vector& sv, Index k) {
  const Index n = sv.size();
  require(k >= 1 && k < n, ErrorCode::RankOutOfRange,
          "upper bound " + std::to_string(k) + " needs 1 <= k < " + std::to_string(n));
  Vector z = sv;
  if (2 * k < n) {
    const double diff = sv(k) - sv(2 * k);
    const double denom = std::pow(2.0, 2.0 / 3.0) - 1.0;
    for (Index l = 0; l < k; ++l) {
      const double a = (1.0 - std::pow(static_cast<double>(l + 1) / static_cast<double>(k), 2.0 / 3.0)) / denom;
      z(l) = sv(k) + a * diff;
    }
  } else {
    for (Index l = 0; l < k; ++l) z(l) = sv(k);
  }
  return z;
}

/// y D'(y) / D(y) for the D-transform of the empirical noise distribution
/// with aspect ratio gamma = min(p,q)/max(p,q).
inline double log_derivative(double y, const Vector& z, double gamma) {
  const double n = static_cast<double>(z.size());
  double phi = 0.0;
  double dphi = 0.0;
  for (Index i = 0; i < z.size(); ++i) {
    const double zz = z(i) * z(i);
    const double den = y * y - zz;
    phi += y / den;
    dphi += -(y * y + zz) / (den * den);
  }
  phi /= n;
  dphi /= n;
  const double phi_g = gamma * phi + (1.0 - gamma) / y;
  const double dphi_g = gamma * dphi - (1.0 - gamma) / (y * y);
  const double d = phi * phi_g;
  const double dd = dphi * phi_g + phi * dphi_g;
  return y * dd / d;
}

/// Threshold above the noise bulk where keeping a component stops paying
/// off: the root of y D'(y)/D(y) = -4.
inline double optimal_threshold(const Vector& z, double gamma) {
  const double edge = z.maxCoeff();
  if (!(edge > 0.0)) return 0.0;
  auto f = [&](double y) { return log_derivative(y, z, gamma) + 4.0; };
  double lo = edge * (1.0 + 1e-12);
  double hi = 2.0 * edge;
  while (f(hi) < 0.0) hi *= 2.0;
  while (f(lo) > 0.0 && lo > edge) lo = edge + (lo - edge) * 1e-3;
  for (int it = 0; it < 300 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace screenot

/// Adaptive hard threshold for singular values `sv` (nonincreasing, all
/// min(p,q) of them) of a p x q matrix.
inline double screenot_threshold(const Vector& sv, Index p, Index q, Index upper_bound) {
  const double gamma = static_cast<double>(std::min(p, q)) / static_cast<double>(std::max(p, q));
  return screenot::optimal_threshold(screenot::pseudo_noise(sv, upper_bound), gamma);
}

inline Index select_rank_from_values(const Vector& sv, Index p, Index q, Index upper_bound,
                                     const RankStrategy& strategy) {
  const Index n = std::min(p, q);
  require(sv.size() == n, ErrorCode::DimensionMismatch, "expected all min(p,q) singular values");
  if (strategy.kind == RankStrategyKind::Fixed) {
    require(strategy.fixed_rank >= 1 && strategy.fixed_rank <= n, ErrorCode::RankOutOfRange,
            "fixed rank " + std::to_string(strategy.fixed_rank) + " outside [1, " + std::to_string(n) + "]");
    return strategy.fixed_rank;
  }
  require(upper_bound >= 1 && upper_bound < n, ErrorCode::RankOutOfRange,
          "upper bound " + std::to_string(upper_bound) + " needs 1 <= k < " + std::to_string(n));

  Index r = 0;
  if (strategy.kind == RankStrategyKind::ScreeNot) {
    const double threshold = screenot_threshold(sv, p, q, upper_bound);
    for (Index i = 0; i < n; ++i)
      if (sv(i) > threshold) ++r;
  } else {
    // Values at round-off level of the largest one count as exact zeros.
    const double zero = static_cast<double>(std::max(p, q)) * std::numeric_limits<double>::epsilon() * sv(0);
    double best = 0.0;
    for (Index i = 0; i < upper_bound; ++i) {
      if (!(sv(i) > zero)) break;
      const double ratio = sv(i + 1) > zero ? sv(i) / sv(i + 1) : std::numeric_limits<double>::infinity();
      if (ratio > best) {
        best = ratio;
        r = i + 1;
      }
    }
  }
  require(r >= 1, ErrorCode::RankZeroSelected, "no singular value cleared the threshold");
  return r;
}

inline Index select_rank(const Matrix& y1, Index upper_bound, const RankStrategy& strategy) {
  if (strategy.kind == RankStrategyKind::Fixed) {
    return select_rank_from_values(Vector::Zero(std::min(y1.rows(), y1.cols())), y1.rows(), y1.cols(), upper_bound,
                                   strategy);
  }
  return select_rank_from_values(singular_values(y1), y1.rows(), y1.cols(), upper_bound, strategy);
}

}  // namespace learner
