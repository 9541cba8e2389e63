#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "learner/analysis.hpp"
#include "learner/io.hpp"
#include "learner/model_select.hpp"
#include "learner/simulation.hpp"

namespace learner {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kVersion = "0.1.0";

using nlohmann::json;

inline json to_json(const PenaltyCell& c) {
  return {{"lambda1_row", c.lambda1_row}, {"lambda1_col", c.lambda1_col}, {"lambda2", c.lambda2}};
}

inline json to_json(const FitSpec& s) {
  return {{"rank", s.rank},
          {"lambda1_row", s.lambda1_row},
          {"lambda1_col", s.lambda1_col},
          {"lambda2", s.lambda2},
          {"step_size", s.step_size},
          {"max_iter", s.max_iter},
          {"tol", s.tol},
          {"divergence_factor", s.divergence_factor}};
}

inline json to_json(const PenaltyGrid& g) {
  return {{"lambda1_values", g.lambda1_values},
          {"lambda2_values", g.lambda2_values},
          {"separate_penalties", g.separate_penalties}};
}

inline json fit_summary(const FitResult& f) {
  return {{"t_best", f.t_best},
          {"objective_best", f.objective_trajectory.at(f.t_best)},
          {"iterations", f.objective_trajectory.size() - 1},
          {"termination", std::string(to_string(f.termination))},
          {"threads", f.threads}};
}

inline json to_json(const SimScenario& s) {
  return {{"name", s.name},
          {"p", s.p},
          {"q", s.q},
          {"r", s.r},
          {"similarity", std::string(to_string(s.similarity))},
          {"perturb_scale", s.perturb_scale},
          {"sigma0_sq", s.sigma0_sq},
          {"sigma1_sq", s.sigma1_sq},
          {"rho", s.rho},
          {"noise_axis", std::string(to_string(s.noise_axis))},
          {"reps", s.reps},
          {"seed", s.seed},
          {"rank_strategy", std::string(to_string(s.rank_strategy.kind))},
          {"rank_upper_bound", s.rank_upper_bound}};
}

inline json to_json(const ScenarioReport& r) {
  json methods = json::array();
  for (const auto& m : r.methods)
    methods.push_back({{"method", std::string(to_string(m.method))}, {"mean", m.mean}, {"sd", m.sd}, {"errors", m.errors}});
  json lambdas = json::array();
  for (const auto& c : r.selected_lambdas) lambdas.push_back(to_json(c));
  return {{"schema_version", kSchemaVersion},
          {"kind", "scenario_report"},
          {"generator", r.generator},
          {"scenario", to_json(r.scenario)},
          {"methods", methods},
          {"d_u", r.d_u},
          {"d_v", r.d_v},
          {"selected_rank", r.selected_rank},
          {"selected_lambdas", lambdas}};
}

/// One CSV row per (scenario, method).
inline std::string scenario_csv(const ScenarioReport& r) {
  const auto [du, du_sd] = mean_sd(r.d_u);
  const auto [dv, dv_sd] = mean_sd(r.d_v);
  const SimScenario& s = r.scenario;
  std::string out =
      "scenario,p,q,r,similarity,perturb_scale,sigma0_sq,sigma1_sq,rho,reps,seed,method,mean_error,sd_error,mean_d_u,"
      "mean_d_v\n";
  for (const auto& m : r.methods) {
    out += s.name + "," + std::to_string(s.p) + "," + std::to_string(s.q) + "," + std::to_string(s.r) + "," +
           std::string(to_string(s.similarity)) + "," + format_double(s.perturb_scale) + "," +
           format_double(s.sigma0_sq) + "," + format_double(s.sigma1_sq) + "," + format_double(s.rho) + "," +
           std::to_string(s.reps) + "," + std::to_string(s.seed) + "," + std::string(to_string(m.method)) + "," +
           format_double(m.mean) + "," + format_double(m.sd) + "," + format_double(du) + "," + format_double(dv) +
           "\n";
  }
  return out;
}

/// Per-cell table: penalties, per-fold MSE, mean MSE.
inline std::string selection_csv(const SelectionResult& s) {
  std::string out = "lambda1_row,lambda1_col,lambda2";
  for (Index k = 0; k < s.per_fold_mse.cols(); ++k) out += ",fold" + std::to_string(k + 1);
  out += ",mean_mse\n";
  for (std::size_t c = 0; c < s.cells.size(); ++c) {
    const auto row = static_cast<Index>(c);
    out += format_double(s.cells[c].lambda1_row) + "," + format_double(s.cells[c].lambda1_col) + "," +
           format_double(s.cells[c].lambda2);
    for (Index k = 0; k < s.per_fold_mse.cols(); ++k) out += "," + format_double(s.per_fold_mse(row, k));
    out += "," + format_double(s.mean_mse(row)) + "\n";
  }
  return out;
}

inline std::string trajectory_csv(const FitResult& f) {
  std::string out = "t,objective\n";
  for (std::size_t t = 0; t < f.objective_trajectory.size(); ++t)
    out += std::to_string(t) + "," + format_double(f.objective_trajectory[t]) + "\n";
  return out;
}

inline std::string top_contributors_csv(const ContributionScores& s, Index n) {
  std::string out = "factor,rank,index,score\n";
  for (Index k = 0; k < s.scores.cols(); ++k) {
    Index pos = 1;
    for (const auto& [idx, score] : top_contributors(s, k, n))
      out += std::to_string(k + 1) + "," + std::to_string(pos++) + "," + std::to_string(idx) + "," +
             format_double(score) + "\n";
  }
  return out;
}

}  // namespace learner
