#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "learner/dlearner.hpp"
#include "learner/fit.hpp"
#include "learner/matrix_core.hpp"
#include "learner/model_select.hpp"
#include "learner/parallel.hpp"
#include "learner/rank.hpp"
#include "learner/rng.hpp"

namespace learner {

enum class Similarity { High, Moderate, Low };

constexpr std::string_view to_string(Similarity s) {
  switch (s) {
    case Similarity::High: return "high";
    case Similarity::Moderate: return "moderate";
    case Similarity::Low: return "low";
  }
  return "unknown";
}

/// Perturbation half-width multiplier s in Uniform(-s/sqrt(n), s/sqrt(n)).
/// Moderate uses 1/4: that is the scale at which the perturbed bases land at
/// d_U ~ 0.40 (r = 4) and ~0.57 (r = 8).
constexpr double default_perturb_scale(Similarity s) {
  switch (s) {
    case Similarity::High: return 0.0;
    case Similarity::Moderate: return 0.25;
    case Similarity::Low: return 0.5;
  }
  return 0.0;
}

/// Axis along which exchangeable noise is correlated. WithinColumn draws each
/// column as one p-dimensional exchangeable Gaussian.
enum class NoiseAxis { WithinColumn, WithinRow };

constexpr std::string_view to_string(NoiseAxis a) {
  return a == NoiseAxis::WithinColumn ? "within-column" : "within-row";
}

enum class Method { TargetSvd, Learner, DLearner };

constexpr std::string_view to_string(Method m) {
  switch (m) {
    case Method::TargetSvd: return "target_svd";
    case Method::Learner: return "learner";
    case Method::DLearner: return "dlearner";
  }
  return "unknown";
}

struct SimScenario {
  std::string name = "custom";
  Index p = 5000;
  Index q = 50;
  Index r = 4;
  Similarity similarity = Similarity::High;
  double perturb_scale = 0.0;
  double sigma0_sq = 0.1;
  double sigma1_sq = 0.01;
  double rho = 0.0;
  NoiseAxis noise_axis = NoiseAxis::WithinColumn;
  int reps = 10;
  std::uint64_t seed = 0;
  RankStrategy rank_strategy = RankStrategy::screenot();
  Index rank_upper_bound = 16;

  void validate() const {
    require(p >= 1 && q >= 1, ErrorCode::InvalidArgument, "dimensions must be positive");
    require(r >= 1 && r <= std::min(p, q), ErrorCode::RankOutOfRange, "rank must lie in [1, min(p,q)]");
    require(similarity == Similarity::High || perturb_scale > 0.0, ErrorCode::InvalidArgument,
            "perturbation scale must be positive");
    require(sigma0_sq > 0.0 && sigma1_sq > 0.0, ErrorCode::InvalidArgument, "noise variances must be positive");
    require(rho >= 0.0 && rho < 1.0, ErrorCode::InvalidCorrelation, "rho must lie in [0, 1)");
    require(reps >= 1, ErrorCode::InvalidArgument, "reps must be positive");
  }
};

inline Matrix gaussian_matrix(Index rows, Index cols, Pcg32& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  return m;
}

/// Top-r truncation of a p x q standard Gaussian matrix, in factored form.
inline TruncatedSvd gen_target_signal(Index p, Index q, Index r, Pcg32& rng) {
  require(r >= 1 && r <= std::min(p, q), ErrorCode::RankOutOfRange, "rank must lie in [1, min(p,q)]");
  return truncated_svd(gaussian_matrix(p, q, rng), r);
}

/// Source signal sharing the target's singular values in reverse order.
/// Moderate/Low perturb both singular-vector matrices with uniform noise
/// (U first, then V, from the same stream) before orthonormalizing.
inline TruncatedSvd gen_source_signal(const TruncatedSvd& theta0, Similarity similarity, double perturb_scale,
                                      Pcg32& rng) {
  Matrix u = theta0.u;
  Matrix v = theta0.v;
  if (similarity != Similarity::High) {
    require(perturb_scale > 0.0, ErrorCode::InvalidArgument, "perturbation scale must be positive");
    auto perturb = [&](Matrix& basis) {
      const double half = perturb_scale / std::sqrt(static_cast<double>(basis.rows()));
      std::uniform_real_distribution<double> unif(-half, half);
      for (Index j = 0; j < basis.cols(); ++j)
        for (Index i = 0; i < basis.rows(); ++i) basis(i, j) += unif(rng);
      basis = orthonormalize(basis);
    };
    perturb(u);
    perturb(v);
  }
  // Reversing the singular values is the same as reversing the column order
  // of the factors while keeping the values sorted.
  return {u.rowwise().reverse(), theta0.singular_values, v.rowwise().reverse()};
}

inline Matrix add_noise(const Matrix& theta, double sigma_sq, double rho, Pcg32& rng,
                        NoiseAxis axis = NoiseAxis::WithinColumn) {
  require(rho >= 0.0 && rho < 1.0, ErrorCode::InvalidCorrelation, "rho must lie in [0, 1)");
  require(sigma_sq > 0.0 && std::isfinite(sigma_sq), ErrorCode::InvalidArgument, "noise variance must be positive");
  std::normal_distribution<double> normal(0.0, 1.0);
  const double sigma = std::sqrt(sigma_sq);
  Matrix out = theta;
  if (rho == 0.0) {
    for (Index j = 0; j < out.cols(); ++j)
      for (Index i = 0; i < out.rows(); ++i) out(i, j) += sigma * normal(rng);
    return out;
  }
  const double own = std::sqrt(1.0 - rho);
  const double shared = std::sqrt(rho);
  if (axis == NoiseAxis::WithinColumn) {
    for (Index j = 0; j < out.cols(); ++j) {
      const double g0 = normal(rng);
      for (Index i = 0; i < out.rows(); ++i) out(i, j) += sigma * (own * normal(rng) + shared * g0);
    }
  } else {
    for (Index i = 0; i < out.rows(); ++i) {
      const double g0 = normal(rng);
      for (Index j = 0; j < out.cols(); ++j) out(i, j) += sigma * (own * normal(rng) + shared * g0);
    }
  }
  return out;
}

/// Everything drawn for one repetition. Each piece comes from its own child
/// stream of (seed, rep), so reps never influence each other.
struct SimDraw {
  TruncatedSvd theta0;
  TruncatedSvd theta1;
  Matrix y0;
  Matrix y1;
};

inline SimDraw draw_rep(const SimScenario& s, int rep) {
  s.validate();
  const auto r = static_cast<std::uint64_t>(rep);
  Pcg32 target_rng = child_stream(s.seed, r, StreamRole::TargetSignal);
  Pcg32 source_rng = child_stream(s.seed, r, StreamRole::SourceSignal);
  Pcg32 noise0 = child_stream(s.seed, r, StreamRole::TargetNoise);
  Pcg32 noise1 = child_stream(s.seed, r, StreamRole::SourceNoise);
  SimDraw d;
  d.theta0 = gen_target_signal(s.p, s.q, s.r, target_rng);
  d.theta1 = gen_source_signal(d.theta0, s.similarity, s.perturb_scale, source_rng);
  d.y0 = add_noise(d.theta0.reconstruct(), s.sigma0_sq, s.rho, noise0, s.noise_axis);
  d.y1 = add_noise(d.theta1.reconstruct(), s.sigma1_sq, s.rho, noise1, s.noise_axis);
  return d;
}

inline std::uint64_t rep_fold_seed(std::uint64_t seed, int rep) {
  Pcg32 rng = child_stream(seed, static_cast<std::uint64_t>(rep), StreamRole::Folds);
  const std::uint64_t hi = rng();
  return (hi << 32u) | rng();
}

struct MethodSummary {
  Method method = Method::TargetSvd;
  std::vector<double> errors;  // per rep, ||Theta_hat - Theta0||_F
  double mean = 0.0;
  double sd = 0.0;
};

struct ScenarioReport {
  SimScenario scenario;
  std::vector<MethodSummary> methods;
  std::vector<double> d_u;
  std::vector<double> d_v;
  std::vector<Index> selected_rank;
  std::vector<PenaltyCell> selected_lambdas;  // empty unless Learner ran
  std::string generator = std::string(Pcg32::name);

  const MethodSummary* find(Method m) const {
    for (const auto& s : methods)
      if (s.method == m) return &s;
    return nullptr;
  }
};

/// Sample mean and standard deviation (n - 1 denominator; 0 for a single value).
inline std::pair<double, double> mean_sd(const std::vector<double>& xs) {
  if (xs.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(xs.size() - 1))};
}

struct RepOutcome {
  double d_u = 0.0;
  double d_v = 0.0;
  Index rank = 0;
  PenaltyCell lambdas;
  std::vector<double> errors;  // aligned with the requested methods
};

inline RepOutcome run_rep(const SimScenario& s, int rep, const std::vector<Method>& methods,
                          const std::optional<PenaltyGrid>& grid, const FitSpec& spec_template) {
  const SimDraw d = draw_rep(s, rep);
  const Matrix theta0 = d.theta0.reconstruct();
  RepOutcome out;
  out.d_u = subspace_distance(d.theta0.u, d.theta1.u);
  out.d_v = subspace_distance(d.theta0.v, d.theta1.v);

  const bool needs_rank = std::any_of(methods.begin(), methods.end(), [](Method m) { return m != Method::TargetSvd; });
  std::optional<TruncatedSvd> source;
  if (needs_rank) {
    const Index bound = s.rank_upper_bound > 0 ? s.rank_upper_bound : default_rank_upper_bound(s.p, s.q);
    out.rank = select_rank(d.y1, bound, s.rank_strategy);
    source = truncated_svd(d.y1, out.rank);
  }
  for (Method m : methods) {
    switch (m) {
      case Method::TargetSvd:
        out.errors.push_back(frobenius_error(truncated_svd(d.y0, s.r).reconstruct(), theta0));
        break;
      case Method::DLearner:
        out.errors.push_back(frobenius_error(d_learner(d.y0, SourceBases::from(*source)), theta0));
        break;
      case Method::Learner: {
        require(grid.has_value(), ErrorCode::InvalidArgument, "learner needs a penalty grid");
        FitSpec spec = spec_template;
        spec.rank = out.rank;
        const SelectionResult sel = cv_select(ObservedMatrix(d.y0), *source, *grid, spec, rep_fold_seed(s.seed, rep));
        out.lambdas = sel.best;
        out.errors.push_back(frobenius_error(sel.final_fit.theta_hat, theta0));
        break;
      }
    }
  }
  return out;
}

/// Runs all repetitions (in parallel when threads > 1) and aggregates in rep
/// order, so the report is independent of the worker count.
inline ScenarioReport run_scenario(const SimScenario& s, const std::vector<Method>& methods,
                                   const std::optional<PenaltyGrid>& grid, const FitSpec& spec_template,
                                   int threads = 1) {
  s.validate();
  require(!methods.empty(), ErrorCode::InvalidArgument, "no methods requested");
  std::vector<RepOutcome> reps(static_cast<std::size_t>(s.reps));
  parallel_for(reps.size(), threads, [&](std::size_t i) {
    try {
      reps[i] = run_rep(s, static_cast<int>(i), methods, grid, spec_template);
    } catch (const Error& e) {
      throw Error(e.code(), "rep " + std::to_string(i) + ": " + e.what());
    }
  });

  ScenarioReport report;
  report.scenario = s;
  const bool learner = std::find(methods.begin(), methods.end(), Method::Learner) != methods.end();
  const bool ranked = std::any_of(methods.begin(), methods.end(), [](Method m) { return m != Method::TargetSvd; });
  for (const auto& rep : reps) {
    report.d_u.push_back(rep.d_u);
    report.d_v.push_back(rep.d_v);
    if (ranked) report.selected_rank.push_back(rep.rank);
    if (learner) report.selected_lambdas.push_back(rep.lambdas);
  }
  for (std::size_t k = 0; k < methods.size(); ++k) {
    MethodSummary summary;
    summary.method = methods[k];
    for (const auto& rep : reps) summary.errors.push_back(rep.errors[k]);
    std::tie(summary.mean, summary.sd) = mean_sd(summary.errors);
    report.methods.push_back(std::move(summary));
  }
  return report;
}

/// A scenario with the grid and optimizer settings used for it.
struct SimPreset {
  SimScenario scenario;
  PenaltyGrid grid;
  FitSpec spec_template;
};

inline std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const char* family : {"independent", "square", "desk", "correlated"})
    for (const char* level : {"high", "moderate", "low"}) out.push_back(std::string(family) + "-" + level);
  return out;
}

/// Named presets. "independent" is (5000, 50), "square" is (500, 500),
/// "desk" is (500, 50); "correlated" is (5000, 50) with rho = 0.25.
/// Step sizes and log10 grid bounds follow the published settings.
inline SimPreset scenario_preset(std::string_view name) {
  const auto dash = name.find('-');
  require(dash != std::string_view::npos, ErrorCode::InvalidArgument, "unknown preset '" + std::string(name) + "'");
  const std::string_view family = name.substr(0, dash);
  const std::string_view level = name.substr(dash + 1);

  SimPreset preset;
  SimScenario& s = preset.scenario;
  s.name = std::string(name);
  if (level == "high") s.similarity = Similarity::High;
  else if (level == "moderate") s.similarity = Similarity::Moderate;
  else if (level == "low") s.similarity = Similarity::Low;
  else fail(ErrorCode::InvalidArgument, "unknown preset '" + std::string(name) + "'");
  s.perturb_scale = default_perturb_scale(s.similarity);

  if (family == "independent" || family == "correlated") {
    s.p = 5000;
    s.q = 50;
  } else if (family == "square") {
    s.p = 500;
    s.q = 500;
  } else if (family == "desk") {
    s.p = 500;
    s.q = 50;
  } else {
    fail(ErrorCode::InvalidArgument, "unknown preset '" + std::string(name) + "'");
  }
  s.rank_upper_bound = 16;

  FitSpec& f = preset.spec_template;
  f.rank = s.r;
  f.max_iter = 75;
  f.tol = 1e-3;
  if (family == "correlated") {
    s.rho = 0.25;
    f.step_size = 0.035;
    preset.grid = PenaltyGrid::log_spaced(-4, 4, -4, 4);
    return preset;
  }
  switch (s.similarity) {
    case Similarity::High:
      f.step_size = 0.0035;
      preset.grid = PenaltyGrid::log_spaced(-4, 4, -4, 4);
      break;
    case Similarity::Moderate:
      f.step_size = 0.035;
      preset.grid = family == "square" ? PenaltyGrid::log_spaced(1, 3, -6, 0) : PenaltyGrid::log_spaced(0, 4, -2, 1);
      break;
    case Similarity::Low:
      f.step_size = 0.07;
      preset.grid = PenaltyGrid::log_spaced(0, 4, -2, 1);
      break;
  }
  return preset;
}

}  // namespace learner
