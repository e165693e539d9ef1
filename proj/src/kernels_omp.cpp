#include "implylp/kernels.hpp"

#include "implylp/error.hpp"

#include <omp.h>

#include <atomic>

namespace implylp {

namespace {

std::atomic<int> g_jobs{0};

int team_size() {
  const int jobs = g_jobs.load(std::memory_order_relaxed);
  return jobs > 0 ? jobs : omp_get_max_threads();
}

// Below this many rows/points a parallel region costs more than it saves.
constexpr std::size_t kMinParallelRows = 256;
constexpr std::size_t kMinParallelPoints = 64;

} // namespace

void set_parallel_jobs(int jobs) { g_jobs.store(jobs < 0 ? 0 : jobs, std::memory_order_relaxed); }

int parallel_jobs() { return team_size(); }

namespace kernels {

void interval_affine_parallel(const LinearMap &map, std::span<const double> lo,
                              std::span<const double> hi, std::span<double> out_lo,
                              std::span<double> out_hi) {
  const auto rows = static_cast<std::ptrdiff_t>(map.rows);
#pragma omp parallel for schedule(static) num_threads(team_size()) if (map.rows >= kMinParallelRows)
  for (std::ptrdiff_t r = 0; r < rows; ++r) {
    double l = map.bias[r], h = map.bias[r];
    for (std::size_t e = map.row_start[r]; e < map.row_start[r + 1]; ++e) {
      const double w = map.value[e];
      const std::size_t c = map.col_index[e];
      if (w >= 0.0) {
        l += w * lo[c];
        h += w * hi[c];
      } else {
        l += w * hi[c];
        h += w * lo[c];
      }
    }
    out_lo[r] = l;
    out_hi[r] = h;
  }
}

std::vector<double> log_rpr_batch_parallel(const Network &net1, const Network &net2,
                                           const PointBatch &points, const ClassPair &pair) {
  std::vector<double> out(points.count());
  const auto n = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel for schedule(static) num_threads(team_size()) if (out.size() >= kMinParallelPoints)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    const auto x = forward(net1, points.point(k));
    const auto y = forward(net2, points.point(k));
    out[k] = (x[pair.i] - x[pair.j]) - (y[pair.i] - y[pair.j]);
  }
  return out;
}

std::size_t count_decision_violations_parallel(const Network &net1, const Network &net2,
                                               const PointBatch &points, std::size_t label) {
  const auto n = static_cast<std::ptrdiff_t>(points.count());
  std::size_t count = 0;
#pragma omp parallel for schedule(static) reduction(+ : count) num_threads(team_size()) if (points.count() >= kMinParallelPoints)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    if (argmax(forward(net2, points.point(k))) != label)
      continue;
    if (argmax(forward(net1, points.point(k))) != label)
      ++count;
  }
  return count;
}

} // namespace kernels

void interval_affine(const LinearMap &map, std::span<const double> lo, std::span<const double> hi,
                     std::span<double> out_lo, std::span<double> out_hi, ExecPolicy policy) {
  if (policy == ExecPolicy::Parallel)
    kernels::interval_affine_parallel(map, lo, hi, out_lo, out_hi);
  else
    kernels::interval_affine_serial(map, lo, hi, out_lo, out_hi);
}

namespace {

void check_batch(const Network &net1, const Network &net2, const PointBatch &points) {
  require_compatible(net1, net2);
  if (points.dim != net1.input_size())
    throw ShapeError("point batch has dimension " + std::to_string(points.dim) + ", networks take " +
                     std::to_string(net1.input_size()));
}

} // namespace

std::vector<double> log_rpr_batch(const Network &net1, const Network &net2,
                                  const PointBatch &points, const ClassPair &pair,
                                  ExecPolicy policy) {
  check_batch(net1, net2, points);
  validate_pair(pair, net1.output_size());
  return policy == ExecPolicy::Parallel ? kernels::log_rpr_batch_parallel(net1, net2, points, pair)
                                        : kernels::log_rpr_batch_serial(net1, net2, points, pair);
}

std::size_t count_decision_violations(const Network &net1, const Network &net2,
                                      const PointBatch &points, std::size_t label,
                                      ExecPolicy policy) {
  check_batch(net1, net2, points);
  if (label >= net1.output_size())
    throw ArgumentError("label out of range");
  return policy == ExecPolicy::Parallel
             ? kernels::count_decision_violations_parallel(net1, net2, points, label)
             : kernels::count_decision_violations_serial(net1, net2, points, label);
}

} // namespace implylp
