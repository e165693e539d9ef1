#include "implylp/lpsolve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace implylp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPivotTol = 1e-9;
constexpr double kDegenerateStep = 1e-12;

// Dense LU with partial pivoting: P A = L U, L unit lower triangular.
class DenseLu {
public:
  bool factor(std::vector<double> a, std::size_t m) {
    m_ = m;
    lu_ = std::move(a);
    perm_.resize(m);
    for (std::size_t k = 0; k < m; ++k)
      perm_[k] = k;
    double scale = 0.0;
    for (double v : lu_)
      scale = std::max(scale, std::abs(v));
    const double tiny = 1e-13 * std::max(1.0, scale);
    for (std::size_t k = 0; k < m; ++k) {
      std::size_t p = k;
      for (std::size_t i = k + 1; i < m; ++i)
        if (std::abs(at(i, k)) > std::abs(at(p, k)))
          p = i;
      if (std::abs(at(p, k)) <= tiny)
        return false;
      if (p != k) {
        for (std::size_t c = 0; c < m; ++c)
          std::swap(at(p, c), at(k, c));
        std::swap(perm_[p], perm_[k]);
      }
      const double pivot = at(k, k);
      for (std::size_t i = k + 1; i < m; ++i) {
        const double f = at(i, k) / pivot;
        at(i, k) = f;
        if (f == 0.0)
          continue;
        for (std::size_t c = k + 1; c < m; ++c)
          at(i, c) -= f * at(k, c);
      }
    }
    return true;
  }

  // b <- A^{-1} b
  void solve(std::vector<double> &b) const {
    std::vector<double> y(m_);
    for (std::size_t k = 0; k < m_; ++k)
      y[k] = b[perm_[k]];
    for (std::size_t i = 0; i < m_; ++i)
      for (std::size_t k = 0; k < i; ++k)
        y[i] -= at(i, k) * y[k];
    for (std::size_t i = m_; i-- > 0;) {
      for (std::size_t k = i + 1; k < m_; ++k)
        y[i] -= at(i, k) * y[k];
      y[i] /= at(i, i);
    }
    b.swap(y);
  }

  // c <- A^{-T} c
  void solve_transpose(std::vector<double> &c) const {
    std::vector<double> w(c);
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t k = 0; k < i; ++k)
        w[i] -= at(k, i) * w[k];
      w[i] /= at(i, i);
    }
    for (std::size_t i = m_; i-- > 0;)
      for (std::size_t k = i + 1; k < m_; ++k)
        w[i] -= at(k, i) * w[k];
    for (std::size_t k = 0; k < m_; ++k)
      c[perm_[k]] = w[k];
  }

private:
  double &at(std::size_t i, std::size_t j) { return lu_[i * m_ + j]; }
  double at(std::size_t i, std::size_t j) const { return lu_[i * m_ + j]; }

  std::size_t m_ = 0;
  std::vector<double> lu_;
  std::vector<std::size_t> perm_;
};

using Column = std::vector<std::pair<std::size_t, double>>;

class Simplex {
public:
  Simplex(const LinearProgram &lp, const SolveOptions &opts) : lp_(lp), opts_(opts) {}

  LpSolution run();

private:
  enum class PhaseResult { Optimal, IterationLimit, Unbounded, Singular };

  void build();
  bool refactor();
  void ftran(std::vector<double> &v) const;
  void btran(std::vector<double> &v) const;
  PhaseResult iterate();
  double reduced_cost(std::size_t j, const std::vector<double> &y) const;
  LpSolution finish(LpStatus status, std::string message);

  const LinearProgram &lp_;
  SolveOptions opts_;
  std::size_t m_ = 0;
  std::size_t n_struct_ = 0;
  std::vector<Column> cols_;
  std::vector<double> lo_, hi_, cost_, x_, b_;
  std::vector<std::ptrdiff_t> pos_;
  std::vector<std::size_t> basis_;
  std::vector<char> at_upper_;
  std::vector<std::size_t> artificials_;

  DenseLu lu_;
  struct Eta {
    std::size_t r;
    std::vector<double> w;
  };
  std::vector<Eta> etas_;
  long iters_ = 0;
  long max_iters_ = 0;
};

void Simplex::build() {
  m_ = lp_.num_rows();
  n_struct_ = lp_.num_vars();
  cols_.assign(n_struct_ + m_, {});
  lo_ = lp_.var_low;
  hi_ = lp_.var_high;
  b_.resize(m_);
  for (std::size_t r = 0; r < m_; ++r) {
    const LpRow &row = lp_.rows[r];
    b_[r] = row.rhs;
    for (std::size_t e = 0; e < row.index.size(); ++e) {
      if (row.coef[e] == 0.0)
        continue;
      Column &col = cols_[row.index[e]];
      if (!col.empty() && col.back().first == r)
        col.back().second += row.coef[e];
      else
        col.emplace_back(r, row.coef[e]);
    }
    cols_[n_struct_ + r].emplace_back(r, 1.0);
    lo_.push_back(0.0);
    hi_.push_back(row.relation == Relation::Equal ? 0.0 : kInf);
  }

  const std::size_t n_logical = n_struct_ + m_;
  x_.assign(n_logical, 0.0);
  at_upper_.assign(n_logical, 0);
  pos_.assign(n_logical, -1);
  for (std::size_t j = 0; j < n_struct_; ++j) {
    if (std::isfinite(lo_[j])) {
      x_[j] = lo_[j];
    } else if (std::isfinite(hi_[j])) {
      x_[j] = hi_[j];
      at_upper_[j] = 1;
    }
  }

  std::vector<double> residual = b_;
  for (std::size_t j = 0; j < n_struct_; ++j)
    if (x_[j] != 0.0)
      for (const auto &[r, a] : cols_[j])
        residual[r] -= a * x_[j];

  basis_.assign(m_, 0);
  for (std::size_t r = 0; r < m_; ++r) {
    const std::size_t s = n_struct_ + r;
    const bool fits = lp_.rows[r].relation == Relation::Equal ? residual[r] == 0.0
                                                               : residual[r] >= 0.0;
    if (fits) {
      x_[s] = residual[r];
      basis_[r] = s;
      pos_[s] = static_cast<std::ptrdiff_t>(r);
      continue;
    }
    const std::size_t a = cols_.size();
    cols_.push_back(Column{{r, residual[r] > 0.0 ? 1.0 : -1.0}});
    lo_.push_back(0.0);
    hi_.push_back(kInf);
    x_.push_back(std::abs(residual[r]));
    at_upper_.push_back(0);
    pos_.push_back(static_cast<std::ptrdiff_t>(r));
    basis_[r] = a;
    artificials_.push_back(a);
  }
  cost_.assign(cols_.size(), 0.0);
}

bool Simplex::refactor() {
  etas_.clear();
  if (m_ == 0)
    return true;
  std::vector<double> dense(m_ * m_, 0.0);
  for (std::size_t c = 0; c < m_; ++c)
    for (const auto &[r, a] : cols_[basis_[c]])
      dense[r * m_ + c] = a;
  if (!lu_.factor(std::move(dense), m_))
    return false;
  std::vector<double> rhs = b_;
  for (std::size_t j = 0; j < cols_.size(); ++j)
    if (pos_[j] < 0 && x_[j] != 0.0)
      for (const auto &[r, a] : cols_[j])
        rhs[r] -= a * x_[j];
  lu_.solve(rhs);
  for (std::size_t i = 0; i < m_; ++i)
    x_[basis_[i]] = rhs[i];
  return true;
}

void Simplex::ftran(std::vector<double> &v) const {
  lu_.solve(v);
  for (const Eta &eta : etas_) {
    const double t = v[eta.r] / eta.w[eta.r];
    if (t != 0.0)
      for (std::size_t i = 0; i < m_; ++i)
        v[i] -= eta.w[i] * t;
    v[eta.r] = t;
  }
}

void Simplex::btran(std::vector<double> &v) const {
  for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
    const Eta &eta = *it;
    double acc = v[eta.r];
    for (std::size_t i = 0; i < m_; ++i)
      if (i != eta.r)
        acc -= eta.w[i] * v[i];
    v[eta.r] = acc / eta.w[eta.r];
  }
  lu_.solve_transpose(v);
}

double Simplex::reduced_cost(std::size_t j, const std::vector<double> &y) const {
  double d = cost_[j];
  for (const auto &[r, a] : cols_[j])
    d -= y[r] * a;
  return d;
}

Simplex::PhaseResult Simplex::iterate() {
  int degenerate_run = 0;
  bool verified = false;
  std::vector<double> y(m_), w(m_);
  for (;;) {
    if (static_cast<int>(etas_.size()) >= opts_.refactor_interval && !refactor())
      return PhaseResult::Singular;

    for (std::size_t i = 0; i < m_; ++i)
      y[i] = cost_[basis_[i]];
    if (m_ > 0)
      btran(y);

    const bool bland = degenerate_run >= opts_.bland_after;
    std::ptrdiff_t entering = -1;
    int dir = 0;
    double best = 0.0;
    for (std::size_t j = 0; j < cols_.size(); ++j) {
      if (pos_[j] >= 0 || lo_[j] == hi_[j])
        continue;
      const double d = reduced_cost(j, y);
      int jdir = 0;
      if (!at_upper_[j] && d < -opts_.opt_tol && hi_[j] > x_[j])
        jdir = 1;
      else if (at_upper_[j] && d > opts_.opt_tol)
        jdir = -1;
      if (jdir == 0)
        continue;
      if (bland) {
        entering = static_cast<std::ptrdiff_t>(j);
        dir = jdir;
        break;
      }
      if (std::abs(d) > best) {
        best = std::abs(d);
        entering = static_cast<std::ptrdiff_t>(j);
        dir = jdir;
      }
    }

    if (entering < 0) {
      // Confirm optimality on a fresh factorization before accepting it.
      if (verified || etas_.empty())
        return PhaseResult::Optimal;
      if (!refactor())
        return PhaseResult::Singular;
      verified = true;
      continue;
    }
    verified = false;

    if (iters_ >= max_iters_)
      return PhaseResult::IterationLimit;
    ++iters_;

    const auto q = static_cast<std::size_t>(entering);
    std::fill(w.begin(), w.end(), 0.0);
    for (const auto &[r, a] : cols_[q])
      w[r] = a;
    if (m_ > 0)
      ftran(w);

    double step = hi_[q] - lo_[q];
    std::ptrdiff_t leave = -1;
    for (std::size_t i = 0; i < m_; ++i) {
      if (std::abs(w[i]) <= kPivotTol)
        continue;
      const double rate = -dir * w[i];
      const std::size_t j = basis_[i];
      double ratio;
      if (rate < 0.0) {
        if (!std::isfinite(lo_[j]))
          continue;
        ratio = (x_[j] - lo_[j]) / -rate;
      } else {
        if (!std::isfinite(hi_[j]))
          continue;
        ratio = (hi_[j] - x_[j]) / rate;
      }
      ratio = std::max(ratio, 0.0);
      if (ratio < step - 1e-12) {
        step = ratio;
        leave = static_cast<std::ptrdiff_t>(i);
      } else if (leave >= 0 && ratio <= step + 1e-12) {
        const auto cur = static_cast<std::size_t>(leave);
        const bool better = bland ? basis_[i] < basis_[cur] : std::abs(w[i]) > std::abs(w[cur]);
        if (better) {
          step = std::min(step, ratio);
          leave = static_cast<std::ptrdiff_t>(i);
        }
      }
    }
    if (!std::isfinite(step))
      return PhaseResult::Unbounded;

    degenerate_run = step <= kDegenerateStep ? degenerate_run + 1 : 0;

    if (step != 0.0) {
      for (std::size_t i = 0; i < m_; ++i)
        if (w[i] != 0.0)
          x_[basis_[i]] -= dir * step * w[i];
      x_[q] += dir * step;
    }

    if (leave < 0) {
      at_upper_[q] = dir > 0;
      x_[q] = dir > 0 ? hi_[q] : lo_[q];
      continue;
    }

    const auto r = static_cast<std::size_t>(leave);
    const std::size_t out = basis_[r];
    if (-dir * w[r] < 0.0) {
      x_[out] = lo_[out];
      at_upper_[out] = 0;
    } else {
      x_[out] = hi_[out];
      at_upper_[out] = 1;
    }
    pos_[out] = -1;
    if (std::find(artificials_.begin(), artificials_.end(), out) != artificials_.end()) {
      hi_[out] = 0.0;
      x_[out] = 0.0;
      at_upper_[out] = 0;
    }
    basis_[r] = q;
    pos_[q] = static_cast<std::ptrdiff_t>(r);
    at_upper_[q] = 0;
    etas_.push_back(Eta{r, w});
  }
}

LpSolution Simplex::finish(LpStatus status, std::string message) {
  LpSolution sol;
  sol.status = status;
  sol.iterations = iters_;
  sol.message = std::move(message);
  if (status != LpStatus::Optimal)
    return sol;
  sol.primal.assign(x_.begin(), x_.begin() + static_cast<std::ptrdiff_t>(n_struct_));
  sol.objective = lp_.objective_value(sol.primal);

  double viol = 0.0;
  for (std::size_t j = 0; j < n_struct_; ++j) {
    viol = std::max(viol, lp_.var_low[j] - sol.primal[j]);
    viol = std::max(viol, sol.primal[j] - lp_.var_high[j]);
  }
  for (std::size_t r = 0; r < m_; ++r) {
    const double gap = lp_.row_activity(r, sol.primal) - lp_.rows[r].rhs;
    viol = std::max(viol, lp_.rows[r].relation == Relation::Equal ? std::abs(gap) : gap);
  }
  sol.max_primal_violation = viol;
  if (viol > opts_.feas_tol) {
    sol.status = LpStatus::NumericFailure;
    sol.message = "final point violates constraints by " + std::to_string(viol);
  }
  return sol;
}

LpSolution Simplex::run() {
  for (std::size_t j = 0; j < lp_.num_vars(); ++j) {
    if (lp_.var_low[j] > lp_.var_high[j])
      return finish(LpStatus::Infeasible, "variable " + std::to_string(j) + " has empty bounds");
    if (!std::isfinite(lp_.var_low[j]) && !std::isfinite(lp_.var_high[j]))
      return finish(LpStatus::NumericFailure, "free variables are not supported");
  }
  build();
  max_iters_ = opts_.max_iters > 0
                   ? opts_.max_iters
                   : std::max<long>(10000, 20 * static_cast<long>(m_ + n_struct_));
  if (!refactor())
    return finish(LpStatus::NumericFailure, "initial basis is singular");

  if (!artificials_.empty()) {
    for (std::size_t a : artificials_)
      cost_[a] = 1.0;
    switch (iterate()) {
    case PhaseResult::Optimal:
      break;
    case PhaseResult::IterationLimit:
      return finish(LpStatus::IterationLimit, "iteration limit in phase 1");
    case PhaseResult::Unbounded:
    case PhaseResult::Singular:
      return finish(LpStatus::NumericFailure, "numerical failure in phase 1");
    }
    double infeasibility = 0.0;
    double scale = 1.0;
    for (double v : b_)
      scale = std::max(scale, std::abs(v));
    for (std::size_t a : artificials_)
      infeasibility += x_[a];
    if (infeasibility > opts_.feas_tol * scale)
      return finish(LpStatus::Infeasible, "phase 1 ended with infeasibility " +
                                              std::to_string(infeasibility));
    for (std::size_t a : artificials_) {
      cost_[a] = 0.0;
      hi_[a] = 0.0;
      if (pos_[a] < 0)
        x_[a] = 0.0;
    }
  }

  for (std::size_t j = 0; j < n_struct_; ++j)
    cost_[j] = lp_.objective[j];
  switch (iterate()) {
  case PhaseResult::Optimal:
    break;
  case PhaseResult::IterationLimit:
    return finish(LpStatus::IterationLimit, "iteration limit in phase 2");
  case PhaseResult::Unbounded:
    return finish(LpStatus::Unbounded, "objective is unbounded");
  case PhaseResult::Singular:
    return finish(LpStatus::NumericFailure, "singular basis");
  }
  return finish(LpStatus::Optimal, {});
}

} // namespace

const char *to_string(LpStatus status) {
  switch (status) {
  case LpStatus::Optimal:
    return "optimal";
  case LpStatus::Infeasible:
    return "infeasible";
  case LpStatus::IterationLimit:
    return "iteration_limit";
  case LpStatus::Unbounded:
    return "unbounded";
  case LpStatus::NumericFailure:
    return "numeric_failure";
  }
  return "?";
}

LpSolution solve(const LinearProgram &lp, const SolveOptions &opts) {
  Simplex simplex(lp, opts);
  return simplex.run();
}

} // namespace implylp
