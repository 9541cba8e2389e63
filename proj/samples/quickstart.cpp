// Small end-to-end run: draw a moderate-similarity pair, pick the rank from
// the source, select penalties by cross-validation and compare estimators.
#include <iostream>

#include "learner/learner.hpp"

int main() {
  using namespace learner;

  SimPreset preset = scenario_preset("desk-moderate");
  SimScenario& s = preset.scenario;
  s.seed = 3;
  const SimDraw d = draw_rep(s, 0);
  const Matrix theta0 = d.theta0.reconstruct();

  const Index r = select_rank(d.y1, default_rank_upper_bound(s.p, s.q), RankStrategy::screenot());
  std::cout << "selected rank " << r << "\n";

  const TruncatedSvd source = truncated_svd(d.y1, r);
  FitSpec spec = preset.spec_template;
  spec.rank = r;
  const SelectionResult sel = cv_select(ObservedMatrix(d.y0), source, preset.grid, spec, 11);

  std::cout << "lambda1 " << sel.best.lambda1_row << "  lambda2 " << sel.best.lambda2 << "\n";
  std::cout << "target svd  " << frobenius_error(truncated_svd(d.y0, r).reconstruct(), theta0) << "\n";
  std::cout << "d-learner   " << frobenius_error(d_learner(d.y0, SourceBases::from(source)), theta0) << "\n";
  std::cout << "learner     " << frobenius_error(sel.final_fit.theta_hat, theta0) << "\n";
}
