#pragma once

#include "implylp/bounds.hpp"
#include "implylp/ingest.hpp"
#include "implylp/lpsolve.hpp"
#include "implylp/relax.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace implylp {

enum class BoundMethod { Interval, LpRefined };

const char *to_string(BoundMethod method);
BoundMethod bound_method_from_string(const std::string &name);

struct BoundOptions {
  BoundMethod method = BoundMethod::Interval;
  RelaxOptions relax;
  SolveOptions solve;
  // When set, every LP is also written there as CPLEX LP text.
  std::optional<std::filesystem::path> export_dir;
  std::string export_tag = "lp"; // file name prefix
};

struct RegionBounds {
  BoundsMap net1;
  BoundsMap net2;
};

BoundsMap compute_bounds(const Network &net, const InputRegion &region, const BoundOptions &opts);
RegionBounds compute_region_bounds(const Network &net1, const Network &net2,
                                   const InputRegion &region, const BoundOptions &opts);

// Bounds on ln RPR(net1 | net2) for one class pair over the region.
// lower minimizes the program built with (net1, net2); upper is minus the
// minimum of the program built with (net2, net1).
struct PairBound {
  ClassPair pair;
  double lower = 0.0;
  double upper = 0.0;
  LpStatus lower_status = LpStatus::NumericFailure;
  LpStatus upper_status = LpStatus::NumericFailure;
  bool lower_available = false;
  bool upper_available = false;
  std::size_t unstable = 0; // triangle-relaxed ReLUs in the lower program
  double wall_ms = 0.0;
};

// Pure variant: an infeasible program means no region point lets net2 prefer
// pair.i by the margin, so the bound is +inf and counts as available.
PairBound bound_pair(const Network &net1, const Network &net2, const InputRegion &region,
                     const ClassPair &pair, ProblemVariant variant, const BoundOptions &opts = {});
PairBound bound_pair(const Network &net1, const Network &net2, const InputRegion &region,
                     const RegionBounds &bounds, const ClassPair &pair, ProblemVariant variant,
                     const BoundOptions &opts = {});

struct VerifyOptions {
  double threshold = 0.0;
  ProblemVariant variant = ProblemVariant::JointMargin;
  BoundOptions bounds;
  bool allow_misclassified = false;
  // Also bound pairs (i, j) with i != label; they do not enter `implied`.
  bool all_pairs = false;
  std::optional<std::vector<double>> domain_low;
  std::optional<std::vector<double>> domain_high;
};

struct ImplicationReport {
  std::string sample_id;
  std::size_t correct_class = 0;
  double delta = 0.0;
  double threshold = 0.0;
  ProblemVariant variant = ProblemVariant::JointMargin;
  bool skipped = false;
  std::string skip_reason;
  std::vector<PairBound> pair_bounds;
  bool implied = false;         // net2 => net1
  bool reverse_implied = false; // net1 => net2
  double min_lower = 0.0;       // over pairs (label, j)
  double max_upper = 0.0;
  double wall_ms = 0.0;
};

ImplicationReport verify_implication(const Network &net1, const Network &net2,
                                     const Sample &sample, double delta,
                                     const VerifyOptions &opts = {});

// Samples run in parallel; reports come back in input order.
std::vector<ImplicationReport> verify_samples(const Network &net1, const Network &net2,
                                              const std::vector<Sample> &samples, double delta,
                                              const VerifyOptions &opts = {});

struct CompareResult {
  ClassPair pair;
  double min_joint = 0.0;
  double max_joint = 0.0;
  double min_ind = 0.0; // independent_sum
  double max_ind = 0.0;
  double range_joint = 0.0;
  double range_ind = 0.0;
  double improvement_pct = 0.0;
  std::size_t unstable = 0;
  bool ok = false; // every program solved to optimality
};

// Throws NumericError when a program does not solve to optimality.
CompareResult compare_independent(const Network &net1, const Network &net2,
                                  const InputRegion &region, const ClassPair &pair,
                                  const BoundOptions &opts = {});

struct ChainEntry {
  ClassPair pair;
  std::vector<double> adjacent; // lower(N_k | N_k+1)
  double end_to_end = 0.0;      // lower(N_1 | N_m)
  bool all_adjacent_positive = false;
  bool end_positive = false;
  bool available = false;
  // All adjacent bounds positive while the end-to-end bound is not.
  bool disagreement = false;
};

struct ChainReport {
  std::size_t length = 0;
  std::vector<ChainEntry> entries;
  std::size_t positive_chains = 0;
  std::size_t disagreements = 0;
};

ChainReport chain_transitivity(const std::vector<Network> &nets, const InputRegion &region,
                               const std::vector<ClassPair> &pairs,
                               const BoundOptions &opts = {});

nlohmann::json to_json(const PairBound &bound);
nlohmann::json to_json(const ImplicationReport &report, bool with_timing = true);
nlohmann::json to_json(const CompareResult &result);
nlohmann::json to_json(const ChainReport &report);

} // namespace implylp
