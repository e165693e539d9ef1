#pragma once

#include "implylp/linear_program.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace implylp {

enum class LpStatus {
  Optimal,
  Infeasible,
  IterationLimit,
  // Only reachable with an infinite direction, which well-formed programs
  // (finite variable boxes) never have.
  Unbounded,
  // Singular basis or a final point that fails the residual check.
  NumericFailure,
};

const char *to_string(LpStatus status);

struct SolveOptions {
  double feas_tol = 1e-9;
  double opt_tol = 1e-9;
  long max_iters = 0; // 0 selects max(10000, 20 * (rows + vars))
  int refactor_interval = 50;
  int bland_after = 200; // consecutive degenerate pivots before Bland's rule
};

struct LpSolution {
  LpStatus status = LpStatus::NumericFailure;
  double objective = 0.0;
  std::vector<double> primal;
  long iterations = 0;
  double max_primal_violation = 0.0;
  std::string message;

  bool optimal() const { return status == LpStatus::Optimal; }
};

// Bounded-variable primal revised simplex, two phases. Deterministic.
LpSolution solve(const LinearProgram &lp, const SolveOptions &opts = {});

struct SolutionCheck {
  double max_violation = 0.0;
  bool bound_certified = false;
};

// Recomputes every row residual and variable bound at sol.primal.
SolutionCheck verify_solution(const LinearProgram &lp, const LpSolution &sol,
                              double feas_tol = 1e-9);

} // namespace implylp
