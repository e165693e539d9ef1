#include "implylp/lpsolve.hpp"

#include "support/vertex_oracle.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace implylp;

TEST(LpSolve, SingleBoundedVariable) {
  LinearProgram lp;
  lp.add_variable(0.0, 1.0, "x");
  lp.objective[0] = 1.0;
  const LpSolution sol = solve(lp);
  ASSERT_EQ(sol.status, LpStatus::Optimal);
  EXPECT_DOUBLE_EQ(sol.objective, 0.0);
  const SolutionCheck check = verify_solution(lp, sol);
  EXPECT_EQ(check.max_violation, 0.0);
  EXPECT_TRUE(check.bound_certified);
}

TEST(LpSolve, HandSolvableVertex) {
  LinearProgram lp;
  lp.add_variable(0.0, 1.0, "x");
  lp.add_variable(0.0, 1.0, "y");
  lp.objective = {-1.0, -1.0};
  lp.add_row({0, 1}, {1.0, 1.0}, Relation::LessEq, 1.0);
  const LpSolution sol = solve(lp);
  ASSERT_EQ(sol.status, LpStatus::Optimal);
  EXPECT_NEAR(sol.objective, -1.0, 1e-12);
}

TEST(LpSolve, EqualityRowNeedsPhaseOne) {
  LinearProgram lp;
  lp.add_variable(-5.0, 5.0);
  lp.add_variable(-5.0, 5.0);
  lp.objective = {1.0, 2.0};
  lp.add_row({0, 1}, {1.0, 1.0}, Relation::Equal, 3.0);
  lp.add_row({0, 1}, {1.0, -1.0}, Relation::LessEq, 1.0);
  const LpSolution sol = solve(lp);
  ASSERT_EQ(sol.status, LpStatus::Optimal);
  // x + y = 3 and x - y <= 1 give x = 2, y = 1 at the optimum.
  EXPECT_NEAR(sol.objective, 4.0, 1e-12);
  EXPECT_NEAR(sol.primal[0], 2.0, 1e-12);
}

TEST(LpSolve, DetectsInfeasibility) {
  LinearProgram lp;
  lp.add_variable(0.0, 1.0);
  lp.add_row({0}, {1.0}, Relation::Equal, 2.0);
  EXPECT_EQ(solve(lp).status, LpStatus::Infeasible);

  LinearProgram crossed;
  crossed.add_variable(1.0, 0.0);
  EXPECT_EQ(solve(crossed).status, LpStatus::Infeasible);
}

TEST(LpSolve, IterationLimitIsReported) {
  LinearProgram lp;
  for (int j = 0; j < 6; ++j) {
    lp.add_variable(0.0, 1.0);
    lp.objective[j] = -1.0 - j;
  }
  lp.add_row({0, 1, 2, 3, 4, 5}, {1, 1, 1, 1, 1, 1}, Relation::Equal, 2.5);
  SolveOptions opts;
  opts.max_iters = 1;
  EXPECT_EQ(solve(lp, opts).status, LpStatus::IterationLimit);
}

TEST(LpSolve, PerturbedPrimalFailsCertification) {
  LinearProgram lp;
  lp.add_variable(0.0, 1.0);
  lp.add_variable(0.0, 1.0);
  lp.objective = {-1.0, -1.0};
  lp.add_row({0, 1}, {1.0, 1.0}, Relation::LessEq, 1.0);
  LpSolution sol = solve(lp);
  ASSERT_TRUE(verify_solution(lp, sol).bound_certified);
  sol.primal[0] += 1.0;
  const SolutionCheck check = verify_solution(lp, sol);
  EXPECT_FALSE(check.bound_certified);
  EXPECT_GE(check.max_violation, 1.0 - 1e-12);
}

TEST(LpSolve, MatchesVertexEnumeration) {
  std::mt19937_64 rng(20240607);
  for (int trial = 0; trial < 150; ++trial) {
    const auto inst = test_support::random_bounded_lp(rng);
    const auto expected = test_support::enumerate_vertices(inst.lp);
    ASSERT_TRUE(expected.has_value()) << "trial " << trial;
    const LpSolution sol = solve(inst.lp);
    ASSERT_EQ(sol.status, LpStatus::Optimal) << "trial " << trial << ": " << sol.message;
    EXPECT_NEAR(sol.objective, *expected, 1e-7) << "trial " << trial;
    EXPECT_TRUE(verify_solution(inst.lp, sol).bound_certified) << "trial " << trial;
    // The witness point is feasible, so it can never beat the optimum.
    EXPECT_LE(sol.objective, inst.lp.objective_value(inst.witness) + 1e-9);
  }
}

TEST(LpSolve, Deterministic) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const auto inst = test_support::random_bounded_lp(rng);
    const LpSolution a = solve(inst.lp);
    const LpSolution b = solve(inst.lp);
    EXPECT_EQ(a.status, b.status);
    EXPECT_EQ(a.objective, b.objective);
    EXPECT_EQ(a.iterations, b.iterations);
    EXPECT_EQ(a.primal, b.primal);
  }
}

TEST(LpSolve, DegenerateProgramTerminates) {
  // Many rows through the same vertex; Bland's rule must take over.
  LinearProgram lp;
  const int n = 6;
  for (int j = 0; j < n; ++j) {
    lp.add_variable(0.0, 10.0);
    lp.objective[j] = -1.0;
  }
  for (int r = 0; r < 40; ++r) {
    std::vector<std::size_t> idx;
    std::vector<double> coef;
    for (int j = 0; j < n; ++j) {
      idx.push_back(j);
      coef.push_back(1.0 + ((r * 7 + j * 3) % 5) * 0.25);
    }
    lp.add_row(idx, coef, Relation::LessEq, 0.0);
  }
  SolveOptions opts;
  opts.bland_after = 2;
  const LpSolution sol = solve(lp, opts);
  ASSERT_EQ(sol.status, LpStatus::Optimal);
  EXPECT_NEAR(sol.objective, 0.0, 1e-12);
}
