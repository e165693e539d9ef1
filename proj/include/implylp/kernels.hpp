#pragma once

// Data-parallel inner loops. Each kernel has a plain serial reference and an
// OpenMP version; tests hold the two to bit-identical results and
// bench/kernels_bench.cpp compares their speed.

#include "implylp/model.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace implylp {

enum class ExecPolicy { Serial, Parallel };

// Row-major batch of input points.
struct PointBatch {
  std::size_t dim = 0;
  std::vector<double> values;

  std::size_t count() const { return dim ? values.size() / dim : 0; }
  std::span<const double> point(std::size_t k) const { return {values.data() + k * dim, dim}; }
  void push_back(std::span<const double> x) { values.insert(values.end(), x.begin(), x.end()); }
};

// Sets the OpenMP worker count used by the Parallel kernels (0 = runtime default).
void set_parallel_jobs(int jobs);
int parallel_jobs();

namespace kernels {

// Interval image of out = W x + b for x in [lo, hi], splitting W by sign.
void interval_affine_serial(const LinearMap &map, std::span<const double> lo,
                            std::span<const double> hi, std::span<double> out_lo,
                            std::span<double> out_hi);
void interval_affine_parallel(const LinearMap &map, std::span<const double> lo,
                              std::span<const double> hi, std::span<double> out_lo,
                              std::span<double> out_hi);

// ln RPR of net1 w.r.t. net2 at every point of the batch.
std::vector<double> log_rpr_batch_serial(const Network &net1, const Network &net2,
                                         const PointBatch &points, const ClassPair &pair);
std::vector<double> log_rpr_batch_parallel(const Network &net1, const Network &net2,
                                           const PointBatch &points, const ClassPair &pair);

// Number of points where net2 predicts `label` and net1 does not.
std::size_t count_decision_violations_serial(const Network &net1, const Network &net2,
                                             const PointBatch &points, std::size_t label);
std::size_t count_decision_violations_parallel(const Network &net1, const Network &net2,
                                               const PointBatch &points, std::size_t label);

} // namespace kernels

void interval_affine(const LinearMap &map, std::span<const double> lo, std::span<const double> hi,
                     std::span<double> out_lo, std::span<double> out_hi, ExecPolicy policy);
std::vector<double> log_rpr_batch(const Network &net1, const Network &net2,
                                  const PointBatch &points, const ClassPair &pair,
                                  ExecPolicy policy = ExecPolicy::Parallel);
std::size_t count_decision_violations(const Network &net1, const Network &net2,
                                      const PointBatch &points, std::size_t label,
                                      ExecPolicy policy = ExecPolicy::Parallel);

} // namespace implylp
