#include "implylp/linear_program.hpp"

#include "implylp/error.hpp"

namespace implylp {

std::size_t LinearProgram::add_variable(double low, double high, std::string name) {
  var_low.push_back(low);
  var_high.push_back(high);
  var_name.push_back(std::move(name));
  objective.push_back(0.0);
  return var_low.size() - 1;
}

std::size_t LinearProgram::add_row(std::vector<std::size_t> index, std::vector<double> coef,
                                   Relation relation, double rhs, std::string name) {
  if (index.size() != coef.size())
    throw ArgumentError("row index and coefficient lists differ in length");
  for (std::size_t j : index)
    if (j >= num_vars())
      throw ArgumentError("row references column " + std::to_string(j) + " of " +
                          std::to_string(num_vars()));
  rows.push_back(LpRow{std::move(index), std::move(coef), relation, rhs, std::move(name)});
  return rows.size() - 1;
}

double LinearProgram::objective_value(std::span<const double> x) const {
  double v = 0.0;
  for (std::size_t j = 0; j < objective.size(); ++j)
    if (objective[j] != 0.0)
      v += objective[j] * x[j];
  return v;
}

double LinearProgram::row_activity(std::size_t r, std::span<const double> x) const {
  const LpRow &row = rows[r];
  double v = 0.0;
  for (std::size_t e = 0; e < row.index.size(); ++e)
    v += row.coef[e] * x[row.index[e]];
  return v;
}

} // namespace implylp
