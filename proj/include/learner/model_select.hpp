#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "learner/fit.hpp"
#include "learner/matrix_core.hpp"
#include "learner/parallel.hpp"
#include "learner/rng.hpp"

namespace learner {

/// One (lambda1_row, lambda1_col, lambda2) candidate. Ordered lexicographically.
struct PenaltyCell {
  double lambda1_row = 0.0;
  double lambda1_col = 0.0;
  double lambda2 = 0.0;
  auto operator<=>(const PenaltyCell&) const = default;
};

/// n values 10^lo ... 10^hi, equally spaced in the exponent.
inline std::vector<double> log_space(double lo_exp, double hi_exp, int n) {
  require(n >= 1, ErrorCode::InvalidArgument, "grid needs at least one point");
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double e = n == 1 ? lo_exp : lo_exp + (hi_exp - lo_exp) * i / (n - 1);
    out[static_cast<std::size_t>(i)] = std::pow(10.0, e);
  }
  return out;
}

struct PenaltyGrid {
  std::vector<double> lambda1_values;
  std::vector<double> lambda2_values;
  bool separate_penalties = false;

  static PenaltyGrid log_spaced(double l1_lo_exp, double l1_hi_exp, double l2_lo_exp, double l2_hi_exp, int n = 5) {
    return {log_space(l1_lo_exp, l1_hi_exp, n), log_space(l2_lo_exp, l2_hi_exp, n), false};
  }

  void validate() const {
    for (const auto* values : {&lambda1_values, &lambda2_values}) {
      require(!values->empty(), ErrorCode::InvalidArgument, "penalty grid axis is empty");
      for (std::size_t i = 0; i < values->size(); ++i) {
        const double x = (*values)[i];
        require(std::isfinite(x) && (x > 0.0 || (x == 0.0 && i == 0)), ErrorCode::InvalidArgument,
                "grid values must be positive (0 allowed only as the first point)");
        require(i == 0 || x > (*values)[i - 1], ErrorCode::InvalidArgument, "grid values must strictly ascend");
      }
    }
  }

  /// Cells in lexicographic ascending order.
  std::vector<PenaltyCell> cells() const {
    validate();
    std::vector<PenaltyCell> out;
    if (separate_penalties) {
      for (double a : lambda1_values)
        for (double b : lambda1_values)
          for (double c : lambda2_values) out.push_back({a, b, c});
    } else {
      for (double a : lambda1_values)
        for (double c : lambda2_values) out.push_back({a, a, c});
    }
    return out;
  }
};

/// Partition of the observed entries into k folds whose sizes differ by at
/// most one. Deterministic in `seed`.
inline std::vector<std::vector<Entry>> make_folds(const ObservedMatrix& y0, int k, std::uint64_t seed) {
  require(k >= 1, ErrorCode::InvalidArgument, "fold count must be positive");
  require(y0.observed_count() >= k, ErrorCode::TooFewObservations,
          std::to_string(y0.observed_count()) + " observed entries for " + std::to_string(k) + " folds");
  std::vector<Entry> entries = y0.observed_entries();
  require(entries.size() <= std::numeric_limits<std::uint32_t>::max(), ErrorCode::InvalidArgument,
          "too many entries to shuffle");
  Pcg32 rng = child_stream(seed, 0, StreamRole::Folds);
  for (std::size_t i = entries.size(); i > 1; --i) {
    const std::size_t j = rng.bounded(static_cast<std::uint32_t>(i));
    std::swap(entries[i - 1], entries[j]);
  }
  std::vector<std::vector<Entry>> folds(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < entries.size(); ++i) folds[i % static_cast<std::size_t>(k)].push_back(entries[i]);
  for (auto& f : folds) std::sort(f.begin(), f.end(), [](const Entry& a, const Entry& b) {
      return a.col != b.col ? a.col < b.col : a.row < b.row;
    });
  return folds;
}

inline double holdout_mse(const Matrix& theta_hat, const ObservedMatrix& y, const std::vector<Entry>& holdout) {
  require(!holdout.empty(), ErrorCode::EmptyHoldout, "holdout set is empty");
  require(theta_hat.rows() == y.rows() && theta_hat.cols() == y.cols(), ErrorCode::DimensionMismatch,
          "estimate " + shape_string(theta_hat.rows(), theta_hat.cols()) + " vs data " +
              shape_string(y.rows(), y.cols()));
  double sum = 0.0;
  for (const auto& e : holdout) {
    require(e.row >= 0 && e.row < y.rows() && e.col >= 0 && e.col < y.cols(), ErrorCode::IndexOutOfRange,
            "holdout entry outside matrix");
    require(y.is_observed(e.row, e.col), ErrorCode::InvalidArgument, "holdout entry is not observed");
    const double d = theta_hat(e.row, e.col) - y(e.row, e.col);
    sum += d * d;
  }
  return sum / static_cast<double>(holdout.size());
}

struct SelectionResult {
  std::vector<PenaltyCell> cells;
  Matrix per_fold_mse;  // cells x folds; +inf marks a diverged fit
  Vector mean_mse;      // per cell
  std::size_t best_index = 0;
  PenaltyCell best;
  FitResult final_fit;
  std::uint64_t folds_seed = 0;
};

namespace detail {

inline std::size_t argmin_first(const Vector& values) {
  std::size_t best = 0;
  for (Index i = 1; i < values.size(); ++i)
    if (values(i) < values(static_cast<Index>(best))) best = static_cast<std::size_t>(i);
  return best;
}

inline double score_fit(const FitResult& f, const ObservedMatrix& y, const std::vector<Entry>& holdout) {
  if (f.termination == Termination::Diverged) return std::numeric_limits<double>::infinity();
  return holdout_mse(f.theta_hat, y, holdout);
}

}  // namespace detail

/// Four-fold entry-holdout selection of the penalties, then a refit on the
/// full target with the winning cell. The rank is spec_template.rank.
inline SelectionResult cv_select(const ObservedMatrix& y0, const TruncatedSvd& source, const PenaltyGrid& grid,
                                 const FitSpec& spec_template, std::uint64_t seed, int threads = 1,
                                 int fold_count = 4) {
  spec_template.validate();
  SelectionResult out;
  out.cells = grid.cells();
  out.folds_seed = seed;
  const auto folds = make_folds(y0, fold_count, seed);
  std::vector<ObservedMatrix> training;
  training.reserve(folds.size());
  for (const auto& f : folds) training.push_back(y0.with_hidden(f));

  const std::size_t nf = folds.size();
  const std::size_t jobs = out.cells.size() * nf;
  out.per_fold_mse.resize(static_cast<Index>(out.cells.size()), static_cast<Index>(nf));
  parallel_for(jobs, threads, [&](std::size_t job) {
    const std::size_t cell = job / nf;
    const std::size_t fold = job % nf;
    const PenaltyCell& c = out.cells[cell];
    const FitResult f = fit(training[fold], source, spec_template.with_lambdas(c.lambda1_row, c.lambda1_col, c.lambda2));
    out.per_fold_mse(static_cast<Index>(cell), static_cast<Index>(fold)) = detail::score_fit(f, y0, folds[fold]);
  });

  out.mean_mse = out.per_fold_mse.rowwise().mean();
  out.best_index = detail::argmin_first(out.mean_mse);
  out.best = out.cells[out.best_index];
  out.final_fit = fit(y0, source, spec_template.with_lambdas(out.best.lambda1_row, out.best.lambda1_col, out.best.lambda2));
  return out;
}

/// Selection against an independent target dataset: every cell is fit on the
/// full target and scored on all observed entries of `y0_ext`.
inline SelectionResult external_select(const ObservedMatrix& y0, const TruncatedSvd& source,
                                       const ObservedMatrix& y0_ext, const PenaltyGrid& grid,
                                       const FitSpec& spec_template, int threads = 1) {
  spec_template.validate();
  require(y0_ext.rows() == y0.rows() && y0_ext.cols() == y0.cols(), ErrorCode::DimensionMismatch,
          "external " + shape_string(y0_ext.rows(), y0_ext.cols()) + " vs target " +
              shape_string(y0.rows(), y0.cols()));
  SelectionResult out;
  out.cells = grid.cells();
  const auto holdout = y0_ext.observed_entries();
  std::vector<FitResult> fits(out.cells.size());
  out.per_fold_mse.resize(static_cast<Index>(out.cells.size()), 1);
  parallel_for(out.cells.size(), threads, [&](std::size_t cell) {
    const PenaltyCell& c = out.cells[cell];
    fits[cell] = fit(y0, source, spec_template.with_lambdas(c.lambda1_row, c.lambda1_col, c.lambda2));
    out.per_fold_mse(static_cast<Index>(cell), 0) = detail::score_fit(fits[cell], y0_ext, holdout);
  });
  out.mean_mse = out.per_fold_mse.col(0);
  out.best_index = detail::argmin_first(out.mean_mse);
  out.best = out.cells[out.best_index];
  out.final_fit = std::move(fits[out.best_index]);
  return out;
}

}  // namespace learner
