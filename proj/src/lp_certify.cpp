#include "implylp/lpsolve.hpp"

#include <algorithm>
#include <cmath>

namespace implylp {

// Kept apart from the simplex code on purpose: residuals are recomputed from
// the original rows and bounds only.
SolutionCheck verify_solution(const LinearProgram &lp, const LpSolution &sol, double feas_tol) {
  SolutionCheck check;
  if (sol.status != LpStatus::Optimal || sol.primal.size() != lp.num_vars()) {
    check.max_violation = std::numeric_limits<double>::infinity();
    return check;
  }
  double worst = 0.0;
  for (std::size_t j = 0; j < lp.num_vars(); ++j) {
    const double v = sol.primal[j];
    if (!std::isfinite(v)) {
      worst = std::numeric_limits<double>::infinity();
      break;
    }
    worst = std::max({worst, lp.var_low[j] - v, v - lp.var_high[j]});
  }
  for (const LpRow &row : lp.rows) {
    long double activity = 0.0L;
    for (std::size_t e = 0; e < row.index.size(); ++e)
      activity += static_cast<long double>(row.coef[e]) * sol.primal[row.index[e]];
    const double gap = static_cast<double>(activity - row.rhs);
    worst = std::max(worst, row.relation == Relation::Equal ? std::abs(gap) : gap);
  }
  check.max_violation = worst;
  check.bound_certified = worst <= feas_tol;
  return check;
}

} // namespace implylp
