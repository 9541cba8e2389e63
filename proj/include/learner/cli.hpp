#pragma once

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "learner/analysis.hpp"
#include "learner/dlearner.hpp"
#include "learner/fit.hpp"
#include "learner/io.hpp"
#include "learner/model_select.hpp"
#include "learner/parallel.hpp"
#include "learner/rank.hpp"
#include "learner/report.hpp"
#include "learner/simulation.hpp"

namespace learner::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kDataError = 3, kNumericFailure = 4 };

inline int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::RankOutOfRange:
    case ErrorCode::InvalidCorrelation:
      return kUsage;
    case ErrorCode::RankDeficient:
    case ErrorCode::RankZeroSelected:
    case ErrorCode::NotOrthonormal:
      return kNumericFailure;
    default:
      return kDataError;
  }
}

inline void write_error(std::ostream& err, const std::string& code, const std::string& message, int exit_code) {
  err << json{{"error", code}, {"message", message}, {"exit_code", exit_code}}.dump() << "\n";
}

/// Step size given as a number or by preset name.
inline double parse_step(const std::string& s) {
  if (s == "high") return 0.0035;
  if (s == "moderate") return 0.035;
  if (s == "low") return 0.07;
  double x = 0.0;
  require(detail::parse_number(s, x) && x > 0.0, ErrorCode::InvalidArgument,
          "step '" + s + "' is neither a positive number nor one of high|moderate|low");
  return x;
}

/// "lo:hi:n" (log10 exponents, n points) or a comma-separated list of values.
inline std::vector<double> parse_grid_axis(const std::string& s) {
  if (s.find(':') != std::string::npos) {
    const auto parts = detail::split(s, ':');
    double lo = 0.0;
    double hi = 0.0;
    double n = 0.0;
    require(parts.size() == 3 && detail::parse_number(parts[0], lo) && detail::parse_number(parts[1], hi) &&
                detail::parse_number(parts[2], n) && n >= 1.0 && n == std::floor(n),
            ErrorCode::InvalidArgument, "grid '" + s + "' is not lo:hi:n");
    return log_space(lo, hi, static_cast<int>(n));
  }
  std::vector<double> out;
  for (auto tok : detail::split(s, ',')) {
    double x = 0.0;
    require(detail::parse_number(tok, x), ErrorCode::InvalidArgument, "grid value '" + std::string(tok) + "'");
    out.push_back(x);
  }
  return out;
}

inline ObservedMatrix load_matrix(const std::string& path, bool impute_zero) {
  ObservedMatrix m = read_matrix(path);
  if (impute_zero && !m.fully_observed()) return ObservedMatrix(m.values());
  return m;
}

inline const Matrix& require_full(const ObservedMatrix& m, const std::string& what) {
  require(m.fully_observed(), ErrorCode::InvalidArgument,
          what + " has missing entries; pass --impute-zero to zero-fill them");
  return m.values();
}

struct FitOptions {
  std::string y0;
  std::string y1;
  Index rank = 0;
  Index upper_bound = 0;
  std::string rank_strategy = "screenot";
  std::optional<double> lambda1;
  std::optional<double> lambda1_row;
  std::optional<double> lambda1_col;
  double lambda2 = 1.0;
  std::string step = "0.035";
  int max_iter = 75;
  double tol = 1e-3;
  double divergence_factor = 10.0;
  bool impute_zero = false;
};

struct GridOptions {
  std::string lambda1_grid = "0:4:5";
  std::string lambda2_grid = "-2:1:5";
  bool separate = false;
};

struct CommonOptions {
  std::string out_dir = ".";
  int threads = 0;
  std::uint64_t seed = 0;
};

class Runner {
 public:
  Runner(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

  int run(const std::vector<std::string>& args) {
    CLI::App app{"Low-rank target estimation with source-subspace transfer"};
    app.set_config("--config", "", "TOML file with option values; unknown keys are errors");
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.require_subcommand(1);

    auto* fit_cmd = app.add_subcommand("fit", "Penalized fit with explicit penalties");
    add_fit_options(fit_cmd, true);
    add_common(fit_cmd, false);

    auto* cv_cmd = app.add_subcommand("cv-fit", "Select penalties by four-fold entry holdout, then refit");
    add_fit_options(cv_cmd, false);
    add_grid(cv_cmd);
    cv_cmd->add_option("--folds", folds_, "Number of folds")->check(CLI::PositiveNumber);
    add_common(cv_cmd, true);

    auto* ext_cmd = app.add_subcommand("ext-fit", "Select penalties against an external target dataset");
    add_fit_options(ext_cmd, false);
    add_grid(ext_cmd);
    ext_cmd->add_option("--y0-ext", y0_ext_, "External target matrix")->required();
    add_common(ext_cmd, false);

    auto* dl_cmd = app.add_subcommand("dlearner", "Direct projection estimate");
    dl_cmd->add_option("--y0", fit_.y0, "Target matrix")->required();
    dl_cmd->add_option("--y1", fit_.y1, "Source matrix")->required();
    add_rank_options(dl_cmd);
    dl_cmd->add_option("--complete-tol", complete_tol_, "Tolerance of the rank-r completion");
    dl_cmd->add_option("--complete-max-iter", complete_max_iter_, "Iteration cap of the rank-r completion");
    dl_cmd->add_flag("--impute-zero", fit_.impute_zero, "Zero-fill missing entries instead of modelling them");
    add_common(dl_cmd, false);

    auto* rank_cmd = app.add_subcommand("rank", "Select the rank from a source matrix");
    rank_cmd->add_option("--input", fit_.y1, "Matrix")->required();
    rank_cmd->add_option("--upper-bound", fit_.upper_bound, "Loose rank upper bound (default floor(min(p,q)/3))");
    rank_cmd->add_option("--strategy", fit_.rank_strategy, "screenot | gap | fixed")
        ->check(CLI::IsMember({"screenot", "gap", "fixed"}));
    rank_cmd->add_option("--fixed-rank", fit_.rank, "Rank returned by the fixed strategy");
    rank_cmd->add_flag("--impute-zero", fit_.impute_zero, "Zero-fill missing entries");
    rank_cmd->add_option("--out-dir", common_.out_dir, "Directory for the manifest");

    auto* sim_cmd = app.add_subcommand("simulate", "Run a simulation preset");
    sim_cmd->add_option("--preset", preset_, "One of: " + join(preset_names()))->required();
    sim_cmd->add_option("--reps", reps_, "Repetitions")->check(CLI::PositiveNumber);
    sim_cmd->add_option("--rank", sim_rank_, "True rank of the signal");
    sim_cmd->add_option("--p", sim_p_, "Rows");
    sim_cmd->add_option("--q", sim_q_, "Columns");
    sim_cmd->add_option("--sigma0-sq", sigma0_sq_, "Target noise variance");
    sim_cmd->add_option("--sigma1-sq", sigma1_sq_, "Source noise variance");
    sim_cmd->add_option("--rho", rho_, "Exchangeable noise correlation");
    sim_cmd->add_option("--perturb-scale", perturb_scale_, "Singular-vector perturbation scale");
    sim_cmd->add_option("--noise-axis", noise_axis_, "within-column | within-row")
        ->check(CLI::IsMember({"within-column", "within-row"}));
    sim_cmd->add_option("--methods", methods_, "Comma list of target_svd,learner,dlearner");
    sim_cmd->add_option("--rank-strategy", fit_.rank_strategy, "screenot | gap")
        ->check(CLI::IsMember({"screenot", "gap"}));
    sim_cmd->add_option("--upper-bound", fit_.upper_bound, "Rank upper bound");
    add_common(sim_cmd, true);

    auto* an_cmd = app.add_subcommand("analyze", "Contribution scores, scree values, varimax, projection blocks");
    an_cmd->add_option("--input", fit_.y0, "Matrix to decompose")->required();
    an_cmd->add_option("--rank", fit_.rank, "Rank (default: selected by ScreeNOT)");
    an_cmd->add_option("--upper-bound", fit_.upper_bound, "Rank upper bound");
    an_cmd->add_option("--scree", scree_k_, "Number of scree values (default: all)");
    an_cmd->add_option("--top", top_n_, "Top contributors per factor")->check(CLI::PositiveNumber);
    an_cmd->add_flag("--varimax", do_varimax_, "Varimax-rotate the right factors");
    an_cmd->add_option("--compare", compare_, "Second matrix for projection comparison");
    an_cmd->add_option("--subset-size", subset_size_, "Row subset size for the left projection blocks");
    an_cmd->add_flag("--impute-zero", fit_.impute_zero, "Zero-fill missing entries");
    add_common(an_cmd, true);

    std::vector<const char*> argv{"learner"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
      app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
      out_ << app.help();
      return kOk;
    } catch (const CLI::CallForAllHelp&) {
      out_ << app.help("", CLI::AppFormatMode::All);
      return kOk;
    } catch (const CLI::ParseError& e) {
      write_error(err_, "UsageError", e.what(), kUsage);
      return kUsage;
    }

    try {
      if (fit_cmd->parsed()) return run_fit();
      if (cv_cmd->parsed()) return run_cv();
      if (ext_cmd->parsed()) return run_ext();
      if (dl_cmd->parsed()) return run_dlearner();
      if (rank_cmd->parsed()) return run_rank();
      if (sim_cmd->parsed()) return run_simulate();
      if (an_cmd->parsed()) return run_analyze();
    } catch (const Error& e) {
      const int code = exit_code_for(e.code());
      write_error(err_, std::string(to_string(e.code())), e.what(), code);
      return code;
    } catch (const std::exception& e) {
      write_error(err_, "InternalError", e.what(), kNumericFailure);
      return kNumericFailure;
    }
    return kUsage;
  }

 private:
  static std::string join(const std::vector<std::string>& xs) {
    std::string out;
    for (const auto& x : xs) out += (out.empty() ? "" : ", ") + x;
    return out;
  }

  void add_common(CLI::App* cmd, bool seeded) {
    cmd->add_option("--out-dir", common_.out_dir, "Output directory");
    cmd->add_option("--threads", common_.threads, "Worker threads (default: logical cores)");
    if (seeded) cmd->add_option("--seed", common_.seed, "Random seed");
  }

  void add_rank_options(CLI::App* cmd) {
    cmd->add_option("--rank", fit_.rank, "Rank (default: ScreeNOT on the source matrix)");
    cmd->add_option("--upper-bound", fit_.upper_bound, "Rank upper bound (default floor(min(p,q)/3))");
    cmd->add_option("--rank-strategy", fit_.rank_strategy, "screenot | gap")
        ->check(CLI::IsMember({"screenot", "gap"}));
  }

  void add_fit_options(CLI::App* cmd, bool explicit_lambdas) {
    cmd->add_option("--y0", fit_.y0, "Target matrix")->required();
    cmd->add_option("--y1", fit_.y1, "Source matrix")->required();
    add_rank_options(cmd);
    if (explicit_lambdas) {
      cmd->add_option("--lambda1", fit_.lambda1, "Subspace penalty on both factors");
      cmd->add_option("--lambda1-row", fit_.lambda1_row, "Subspace penalty on U");
      cmd->add_option("--lambda1-col", fit_.lambda1_col, "Subspace penalty on V");
      cmd->add_option("--lambda2", fit_.lambda2, "Balance penalty");
    }
    cmd->add_option("--step", fit_.step, "Step size or preset name (high|moderate|low)");
    cmd->add_option("--max-iter", fit_.max_iter, "Iteration cap")->check(CLI::PositiveNumber);
    cmd->add_option("--tol", fit_.tol, "Tolerance on successive objective values");
    cmd->add_option("--divergence-factor", fit_.divergence_factor, "Stop when objective exceeds factor x initial");
    cmd->add_flag("--impute-zero", fit_.impute_zero, "Zero-fill missing entries instead of modelling them");
  }

  void add_grid(CLI::App* cmd) {
    cmd->add_option("--lambda1-grid", grid_.lambda1_grid, "lo:hi:n in log10, or comma list");
    cmd->add_option("--lambda2-grid", grid_.lambda2_grid, "lo:hi:n in log10, or comma list");
    cmd->add_flag("--separate", grid_.separate, "Search (lambda1_row, lambda1_col, lambda2)");
  }

  int threads() const { return common_.threads > 0 ? common_.threads : default_thread_count(); }

  std::string out_path(const std::string& name) {
    std::filesystem::create_directories(common_.out_dir);
    const std::string path = (std::filesystem::path(common_.out_dir) / name).string();
    outputs_.push_back(name);
    return path;
  }

  void write_manifest(const std::string& command, json parameters, json inputs, bool seeded) {
    json m{{"schema_version", kSchemaVersion},
           {"command", command},
           {"version", kVersion},
           {"eigen_version", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                 std::to_string(EIGEN_MINOR_VERSION)},
           {"generator", std::string(Pcg32::name)},
           {"threads", threads()},
           {"parameters", std::move(parameters)},
           {"inputs", std::move(inputs)}};
    if (seeded) m["seed"] = common_.seed;
    std::vector<std::string> outs = outputs_;
    const std::string path = out_path("manifest.json");
    m["outputs"] = outs;
    write_text(path, m.dump(2) + "\n");
  }

  RankStrategy strategy() const {
    if (fit_.rank_strategy == "gap") return RankStrategy::gap();
    if (fit_.rank_strategy == "fixed") return RankStrategy::fixed(fit_.rank);
    return RankStrategy::screenot();
  }

  Index resolve_rank(const Matrix& y1) const {
    if (fit_.rank > 0) return fit_.rank;
    const Index bound = fit_.upper_bound > 0 ? fit_.upper_bound : default_rank_upper_bound(y1.rows(), y1.cols());
    return select_rank(y1, bound, strategy());
  }

  FitSpec fit_spec(Index rank) const {
    FitSpec s;
    s.rank = rank;
    const double l1 = fit_.lambda1.value_or(0.0);
    s.lambda1_row = fit_.lambda1_row.value_or(l1);
    s.lambda1_col = fit_.lambda1_col.value_or(l1);
    s.lambda2 = fit_.lambda2;
    s.step_size = parse_step(fit_.step);
    s.max_iter = fit_.max_iter;
    s.tol = fit_.tol;
    s.divergence_factor = fit_.divergence_factor;
    s.validate();
    return s;
  }

  PenaltyGrid grid() const {
    PenaltyGrid g{parse_grid_axis(grid_.lambda1_grid), parse_grid_axis(grid_.lambda2_grid), grid_.separate};
    g.validate();
    return g;
  }

  json fit_inputs() const {
    return {{"y0", fit_.y0}, {"y1", fit_.y1}, {"impute_zero", fit_.impute_zero}};
  }

  void write_fit_outputs(const FitResult& f) {
    write_matrix(f.theta_hat, out_path("theta.csv"));
    write_matrix(f.u_best, out_path("u.csv"));
    write_matrix(f.v_best, out_path("v.csv"));
    write_text(out_path("trajectory.csv"), trajectory_csv(f));
  }

  int run_fit() {
    const ObservedMatrix y0 = load_matrix(fit_.y0, fit_.impute_zero);
    const ObservedMatrix y1 = load_matrix(fit_.y1, fit_.impute_zero);
    const Matrix& y1v = require_full(y1, "source matrix");
    const FitSpec spec = fit_spec(resolve_rank(y1v));
    const FitResult f = fit(y0, truncated_svd(y1v, spec.rank), spec);
    write_fit_outputs(f);
    json params{{"fit", to_json(spec)}, {"rank_strategy", fit_.rank > 0 ? "given" : fit_.rank_strategy}};
    params["result"] = fit_summary(f);
    write_manifest("fit", params, fit_inputs(), false);
    out_ << fit_summary(f).dump() << "\n";
    return kOk;
  }

  int run_cv() {
    const ObservedMatrix y0 = load_matrix(fit_.y0, fit_.impute_zero);
    const ObservedMatrix y1 = load_matrix(fit_.y1, fit_.impute_zero);
    const Matrix& y1v = require_full(y1, "source matrix");
    const FitSpec spec = fit_spec(resolve_rank(y1v));
    const PenaltyGrid g = grid();
    const SelectionResult sel = cv_select(y0, truncated_svd(y1v, spec.rank), g, spec, common_.seed, threads(), folds_);
    write_fit_outputs(sel.final_fit);
    write_text(out_path("cv_table.csv"), selection_csv(sel));
    json summary{{"best", to_json(sel.best)}, {"best_mean_mse", sel.mean_mse(static_cast<Index>(sel.best_index))},
                 {"final_fit", fit_summary(sel.final_fit)}};
    write_manifest("cv-fit", {{"fit", to_json(spec)}, {"grid", to_json(g)}, {"folds", folds_}, {"result", summary}},
                   fit_inputs(), true);
    out_ << summary.dump() << "\n";
    return kOk;
  }

  int run_ext() {
    const ObservedMatrix y0 = load_matrix(fit_.y0, fit_.impute_zero);
    const ObservedMatrix y1 = load_matrix(fit_.y1, fit_.impute_zero);
    const ObservedMatrix ext = read_matrix(y0_ext_);
    const Matrix& y1v = require_full(y1, "source matrix");
    const FitSpec spec = fit_spec(resolve_rank(y1v));
    const PenaltyGrid g = grid();
    const SelectionResult sel = external_select(y0, truncated_svd(y1v, spec.rank), ext, g, spec, threads());
    write_fit_outputs(sel.final_fit);
    write_text(out_path("ext_table.csv"), selection_csv(sel));
    json summary{{"best", to_json(sel.best)}, {"best_mse", sel.mean_mse(static_cast<Index>(sel.best_index))},
                 {"final_fit", fit_summary(sel.final_fit)}};
    json inputs = fit_inputs();
    inputs["y0_ext"] = y0_ext_;
    write_manifest("ext-fit", {{"fit", to_json(spec)}, {"grid", to_json(g)}, {"result", summary}}, inputs, false);
    out_ << summary.dump() << "\n";
    return kOk;
  }

  int run_dlearner() {
    const ObservedMatrix y0 = load_matrix(fit_.y0, fit_.impute_zero);
    const ObservedMatrix y1 = load_matrix(fit_.y1, fit_.impute_zero);
    const Matrix& y1v = require_full(y1, "source matrix");
    const Index r = resolve_rank(y1v);
    const SourceBases bases = SourceBases::from(truncated_svd(y1v, r));
    const Matrix theta = d_learner_missing(y0, bases, r, complete_tol_, complete_max_iter_);
    write_matrix(theta, out_path("theta.csv"));
    write_manifest("dlearner",
                   {{"rank", r},
                    {"completed", !y0.fully_observed()},
                    {"complete_tol", complete_tol_},
                    {"complete_max_iter", complete_max_iter_}},
                   fit_inputs(), false);
    out_ << json{{"rank", r}}.dump() << "\n";
    return kOk;
  }

  int run_rank() {
    const ObservedMatrix y1 = load_matrix(fit_.y1, fit_.impute_zero);
    const Matrix& y = require_full(y1, "input matrix");
    const Index bound = fit_.upper_bound > 0 ? fit_.upper_bound : default_rank_upper_bound(y.rows(), y.cols());
    const Index r = select_rank(y, bound, strategy());
    out_ << r << "\n";
    write_manifest("rank", {{"strategy", fit_.rank_strategy}, {"upper_bound", bound}, {"rank", r}},
                   {{"input", fit_.y1}, {"impute_zero", fit_.impute_zero}}, false);
    return kOk;
  }

  int run_simulate() {
    SimPreset preset = scenario_preset(preset_);
    SimScenario& s = preset.scenario;
    if (reps_) s.reps = *reps_;
    if (sim_rank_) s.r = *sim_rank_;
    if (sim_p_) s.p = *sim_p_;
    if (sim_q_) s.q = *sim_q_;
    if (sigma0_sq_) s.sigma0_sq = *sigma0_sq_;
    if (sigma1_sq_) s.sigma1_sq = *sigma1_sq_;
    if (rho_) s.rho = *rho_;
    if (perturb_scale_) s.perturb_scale = *perturb_scale_;
    if (noise_axis_ == "within-row") s.noise_axis = NoiseAxis::WithinRow;
    if (fit_.rank_strategy == "gap") s.rank_strategy = RankStrategy::gap();
    if (fit_.upper_bound > 0) s.rank_upper_bound = fit_.upper_bound;
    s.seed = common_.seed;
    preset.spec_template.rank = s.r;
    s.validate();

    std::vector<Method> methods;
    for (auto tok : detail::split(methods_, ',')) {
      if (tok == "target_svd") methods.push_back(Method::TargetSvd);
      else if (tok == "learner") methods.push_back(Method::Learner);
      else if (tok == "dlearner") methods.push_back(Method::DLearner);
      else fail(ErrorCode::InvalidArgument, "unknown method '" + std::string(tok) + "'");
    }
    const ScenarioReport report = run_scenario(s, methods, preset.grid, preset.spec_template, threads());
    write_text(out_path("report.json"), to_json(report).dump(2) + "\n");
    write_text(out_path("report.csv"), scenario_csv(report));
    json methods_json = json::array();
    for (Method m : methods) methods_json.push_back(std::string(to_string(m)));
    write_manifest("simulate",
                   {{"preset", preset_},
                    {"scenario", to_json(s)},
                    {"grid", to_json(preset.grid)},
                    {"fit", to_json(preset.spec_template)},
                    {"methods", methods_json}},
                   json::object(), true);
    json summary = json::object();
    for (const auto& m : report.methods) summary[std::string(to_string(m.method))] = {{"mean", m.mean}, {"sd", m.sd}};
    out_ << summary.dump() << "\n";
    return kOk;
  }

  int run_analyze() {
    const ObservedMatrix in = load_matrix(fit_.y0, fit_.impute_zero);
    const Matrix& y = require_full(in, "input matrix");
    const Index r = resolve_rank(y);
    const TruncatedSvd svd = truncated_svd(y, r);
    const Index n = std::min(y.rows(), y.cols());
    const Index k = scree_k_ > 0 ? std::min<Index>(scree_k_, n) : n;

    const Vector scree = scree_values(y, k);
    std::string scree_text = "index,singular_value\n";
    for (Index i = 0; i < k; ++i) scree_text += std::to_string(i + 1) + "," + format_double(scree(i)) + "\n";
    write_text(out_path("scree.csv"), scree_text);

    const ContributionScores su = contribution_scores(svd.u, "row");
    const ContributionScores sv = contribution_scores(svd.v, "column");
    write_matrix(su.scores, out_path("scores_u.csv"));
    write_matrix(sv.scores, out_path("scores_v.csv"));
    write_text(out_path("top_u.csv"), top_contributors_csv(su, top_n_));
    write_text(out_path("top_v.csv"), top_contributors_csv(sv, top_n_));

    json result{{"rank", r}};
    if (do_varimax_) {
      const VarimaxResult vm = varimax(svd.v);
      write_matrix(vm.rotated, out_path("varimax_v.csv"));
      write_matrix(vm.rotation, out_path("varimax_rotation.csv"));
      const ContributionScores rotated = contribution_scores(vm.rotated, "column");
      write_text(out_path("top_varimax_v.csv"), top_contributors_csv(rotated, top_n_));
      result["varimax"] = {{"converged", vm.converged}, {"iterations", vm.iterations},
                           {"criterion", vm.criterion.back()}};
    }
    if (!compare_.empty()) {
      const ObservedMatrix other_in = load_matrix(compare_, fit_.impute_zero);
      const Matrix& other = require_full(other_in, "comparison matrix");
      require(other.rows() == y.rows() && other.cols() == y.cols(), ErrorCode::DimensionMismatch,
              "comparison matrix shape differs");
      const TruncatedSvd osvd = truncated_svd(other, r);
      const ProjectionBlocks pv = projection_gram(svd.v, osvd.v);
      write_matrix(pv.pa, out_path("proj_v_input.csv"));
      write_matrix(pv.pb, out_path("proj_v_compare.csv"));

      const Index m = std::min<Index>(subset_size_, y.rows());
      std::vector<Index> rows(static_cast<std::size_t>(y.rows()));
      std::iota(rows.begin(), rows.end(), Index{0});
      Pcg32 rng = child_stream(common_.seed, 0, StreamRole::Folds);
      for (std::size_t i = 0; i < static_cast<std::size_t>(m); ++i) {
        const std::size_t j = i + rng.bounded(static_cast<std::uint32_t>(rows.size() - i));
        std::swap(rows[i], rows[j]);
      }
      rows.resize(static_cast<std::size_t>(m));
      std::sort(rows.begin(), rows.end());
      const ProjectionBlocks pu = projection_gram(svd.u, osvd.u, rows);
      write_matrix(pu.pa, out_path("proj_u_input.csv"));
      write_matrix(pu.pb, out_path("proj_u_compare.csv"));
      std::string subset = "index\n";
      for (Index i : rows) subset += std::to_string(i) + "\n";
      write_text(out_path("proj_u_subset.csv"), subset);
      result["d_u"] = subspace_distance(svd.u, osvd.u);
      result["d_v"] = subspace_distance(svd.v, osvd.v);
    }
    json inputs{{"input", fit_.y0}, {"impute_zero", fit_.impute_zero}};
    if (!compare_.empty()) inputs["compare"] = compare_;
    write_manifest("analyze",
                   {{"rank", r},
                    {"scree", k},
                    {"top", top_n_},
                    {"varimax", do_varimax_},
                    {"subset_size", subset_size_},
                    {"result", result}},
                   inputs, true);
    out_ << result.dump() << "\n";
    return kOk;
  }

  std::ostream& out_;
  std::ostream& err_;
  FitOptions fit_;
  GridOptions grid_;
  CommonOptions common_;
  int folds_ = 4;
  std::string y0_ext_;
  double complete_tol_ = 1e-9;
  int complete_max_iter_ = 1000;
  std::string preset_;
  std::optional<int> reps_;
  std::optional<Index> sim_rank_;
  std::optional<Index> sim_p_;
  std::optional<Index> sim_q_;
  std::optional<double> sigma0_sq_;
  std::optional<double> sigma1_sq_;
  std::optional<double> rho_;
  std::optional<double> perturb_scale_;
  std::string noise_axis_ = "within-column";
  std::string methods_ = "target_svd,learner,dlearner";
  Index scree_k_ = 0;
  Index top_n_ = 4;
  bool do_varimax_ = false;
  std::string compare_;
  Index subset_size_ = 500;
  std::vector<std::string> outputs_;
};

/// Entry point shared by the executable and the tests.
inline int run_command(const std::vector<std::string>& args, std::ostream& out = std::cout,
                       std::ostream& err = std::cerr) {
  return Runner(out, err).run(args);
}

}  // namespace learner::cli
