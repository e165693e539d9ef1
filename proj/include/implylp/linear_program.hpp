#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace implylp {

enum class Relation { LessEq, Equal };

struct LpRow {
  std::vector<std::size_t> index;
  std::vector<double> coef;
  Relation relation = Relation::LessEq;
  double rhs = 0.0;
  std::string name;
};

// min objective . x  s.t.  rows, var_low <= x <= var_high.
struct LinearProgram {
  std::vector<double> var_low;
  std::vector<double> var_high;
  std::vector<std::string> var_name;
  std::vector<LpRow> rows;
  std::vector<double> objective;

  std::size_t num_vars() const { return var_low.size(); }
  std::size_t num_rows() const { return rows.size(); }

  std::size_t add_variable(double low, double high, std::string name = {});
  std::size_t add_row(std::vector<std::size_t> index, std::vector<double> coef, Relation relation,
                      double rhs, std::string name = {});

  double objective_value(std::span<const double> x) const;
  double row_activity(std::size_t r, std::span<const double> x) const;
};

} // namespace implylp
