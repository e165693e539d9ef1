#pragma once

#include "implylp/relax.hpp"
#include "implylp/verify.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace implylp::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kLoadError = 3,
  kSolverFailure = 4,
  kAuditViolation = 5,
};

enum class OutputFormat { Json, Csv, Both };

struct RunConfig {
  std::string command;
  std::string net1;
  std::string net2;
  std::string samples;
  std::vector<double> deltas;
  double threshold = 0.0;
  ProblemVariant variant = ProblemVariant::JointMargin;
  BoundMethod bounds = BoundMethod::Interval;
  int jobs = 0; // 0: IMPLYLP_JOBS, then the OpenMP default
  std::uint64_t seed = 0;
  std::string out;
  OutputFormat format = OutputFormat::Both;
  bool allow_misclassified = false;
  bool all_pairs = false;
  std::optional<std::vector<double>> domain_low;
  std::optional<std::vector<double>> domain_high;
  SolveOptions solve;
  std::optional<std::string> export_lp;

  // compact
  std::optional<double> prune;
  std::optional<std::string> quant;

  // audit
  std::size_t trials = 100;
  std::size_t oracle_samples = 10000;
  bool inject_fault = false;
};

// Applies the keys of a JSON config object onto `cfg`; problems are appended
// to `errors` rather than thrown.
void apply_config_json(const nlohmann::json &doc, RunConfig &cfg, std::vector<std::string> &errors);

// Checks the command-specific requirements. Empty when valid.
std::vector<std::string> validate(const RunConfig &cfg);

int cmd_verify(const RunConfig &cfg, std::ostream &out, std::ostream &err);
int cmd_sweep(const RunConfig &cfg, std::ostream &out, std::ostream &err);
int cmd_compare(const RunConfig &cfg, std::ostream &out, std::ostream &err);
int cmd_compact(const RunConfig &cfg, std::ostream &out, std::ostream &err);
int cmd_audit(const RunConfig &cfg, std::ostream &out, std::ostream &err);

// Deterministic audit document (no timing fields). Exposed for tests.
nlohmann::json run_audit(const RunConfig &cfg, bool &passed);

// Parses argv, merges --config, validates, dispatches. Returns the exit code.
int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

} // namespace implylp::cli
