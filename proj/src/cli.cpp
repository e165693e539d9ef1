#include "implylp/cli.hpp"

#include "implylp/compaction.hpp"
#include "implylp/error.hpp"
#include "implylp/ingest.hpp"
#include "implylp/oracle.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>

namespace implylp::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

json number(double v) {
  if (std::isfinite(v))
    return v;
  if (std::isnan(v))
    return "nan";
  return v > 0 ? "inf" : "-inf";
}

std::string csv_number(double v) {
  if (std::isnan(v))
    return "nan";
  if (std::isinf(v))
    return v > 0 ? "inf" : "-inf";
  return json(v).dump(); // shortest round-trip form
}

std::string csv_field(const std::string &s) {
  if (s.find_first_of(",\"\n") == std::string::npos)
    return s;
  std::string q = "\"";
  for (char ch : s)
    q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return q + "\"";
}

std::string percent(std::size_t k, std::size_t n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", n ? 100.0 * static_cast<double>(k) / n : 0.0);
  return buf;
}

OutputFormat format_from_string(const std::string &s) {
  if (s == "json")
    return OutputFormat::Json;
  if (s == "csv")
    return OutputFormat::Csv;
  if (s == "both")
    return OutputFormat::Both;
  throw ArgumentError("unknown format '" + s + "' (expected json, csv or both)");
}

ProblemVariant cli_variant(const std::string &s) {
  if (s == "margin")
    return ProblemVariant::JointMargin;
  if (s == "pure")
    return ProblemVariant::JointPureImplication;
  throw ArgumentError("unknown variant '" + s + "' (expected margin or pure)");
}

bool wants_json(const RunConfig &c) { return c.format != OutputFormat::Csv; }
bool wants_csv(const RunConfig &c) { return c.format != OutputFormat::Json; }

void write_out(const RunConfig &cfg, const std::string &file, const std::string &text) {
  std::error_code ec;
  fs::create_directories(cfg.out, ec);
  if (ec)
    throw IoError("cannot create output directory '" + cfg.out + "': " + ec.message());
  write_text_file(fs::path(cfg.out) / file, text);
}

struct Inputs {
  Network net1;
  Network net2;
  std::vector<Sample> samples;
};

Inputs load_inputs(const RunConfig &cfg) {
  Network net1 = load_network(cfg.net1);
  Network net2 = load_network(cfg.net2);
  if (!check_compatible(net1, net2))
    throw CompatibilityError("networks '" + cfg.net1 + "' and '" + cfg.net2 +
                             "' are not compatible (input or output sizes differ)");
  std::vector<Sample> samples = load_samples(cfg.samples, net1.output_size());
  for (const Sample &s : samples)
    if (s.values.size() != net1.input_size())
      throw LoadError(cfg.samples + ": sample '" + s.id + "' has " +
                      std::to_string(s.values.size()) + " values, networks take " +
                      std::to_string(net1.input_size()));
  return {std::move(net1), std::move(net2), std::move(samples)};
}

std::optional<std::vector<double>> broadcast(const std::optional<std::vector<double>> &v,
                                             std::size_t dim) {
  if (v && v->size() == 1 && dim > 1)
    return std::vector<double>(dim, v->front());
  return v;
}

VerifyOptions verify_options(const RunConfig &cfg, std::size_t dim) {
  VerifyOptions o;
  o.threshold = cfg.threshold;
  o.variant = cfg.variant;
  o.bounds.method = cfg.bounds;
  o.bounds.solve = cfg.solve;
  if (cfg.export_lp) {
    std::error_code ec;
    fs::create_directories(*cfg.export_lp, ec);
    if (ec)
      throw IoError("cannot create LP export directory '" + *cfg.export_lp + "'");
    o.bounds.export_dir = fs::path(*cfg.export_lp);
  }
  o.bounds.relax.fault = cfg.inject_fault ? FaultInjection::UnstableAsInactive : FaultInjection::None;
  o.allow_misclassified = cfg.allow_misclassified;
  o.all_pairs = cfg.all_pairs;
  o.domain_low = broadcast(cfg.domain_low, dim);
  o.domain_high = broadcast(cfg.domain_high, dim);
  return o;
}

bool hard_failure(const std::vector<ImplicationReport> &reports) {
  auto hard = [](LpStatus s) { return s == LpStatus::NumericFailure || s == LpStatus::Unbounded; };
  for (const auto &r : reports)
    for (const auto &b : r.pair_bounds)
      if (hard(b.lower_status) || hard(b.upper_status))
        return true;
  return false;
}

struct Established {
  std::size_t evaluated = 0;
  std::size_t skipped = 0;
  std::size_t forward = 0; // net2 => net1
  std::size_t reverse = 0; // net1 => net2
};

Established tally(const std::vector<ImplicationReport> &reports) {
  Established e;
  for (const auto &r : reports) {
    if (r.skipped) {
      ++e.skipped;
      continue;
    }
    ++e.evaluated;
    e.forward += r.implied;
    e.reverse += r.reverse_implied;
  }
  return e;
}

json established_json(const Established &e) {
  auto pct = [&](std::size_t k) { return e.evaluated ? 100.0 * k / e.evaluated : 0.0; };
  return {{"evaluated", e.evaluated},
          {"skipped", e.skipped},
          {"net2_implies_net1", e.forward},
          {"net1_implies_net2", e.reverse},
          {"net2_implies_net1_pct", pct(e.forward)},
          {"net1_implies_net2_pct", pct(e.reverse)}};
}

void print_established(std::ostream &out, const Established &e, const std::string &prefix) {
  out << prefix << "established implication net2 => net1: " << percent(e.forward, e.evaluated)
      << " (" << e.forward << "/" << e.evaluated << ")\n";
  out << prefix << "established implication net1 => net2: " << percent(e.reverse, e.evaluated)
      << " (" << e.reverse << "/" << e.evaluated << ")\n";
  if (e.skipped)
    out << prefix << "skipped " << e.skipped << " misclassified sample(s)\n";
}

const char *kSummaryHeader = "id,delta,implied,min_lower,max_upper,wall_ms\n";

std::string summary_row(const ImplicationReport &r) {
  std::ostringstream os;
  os << csv_field(r.sample_id) << ',' << csv_number(r.delta) << ','
     << (r.skipped ? "skipped" : r.implied ? "true" : "false") << ','
     << (r.skipped ? "" : csv_number(r.min_lower)) << ','
     << (r.skipped ? "" : csv_number(r.max_upper)) << ',' << csv_number(r.wall_ms) << '\n';
  return os.str();
}

json run_header(const RunConfig &cfg) {
  return {{"command", cfg.command},
          {"net1", cfg.net1},
          {"net2", cfg.net2},
          {"samples", cfg.samples},
          {"threshold", cfg.threshold},
          {"variant", implylp::to_string(cfg.variant)},
          {"bounds", implylp::to_string(cfg.bounds)}};
}

// ---- audit ----------------------------------------------------------------

std::uint64_t trial_seed(std::uint64_t seed, std::size_t trial) {
  // splitmix64 step keeps neighbouring trials decorrelated
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (trial + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<ClassPair> label_pairs(std::size_t label, std::size_t classes) {
  std::vector<ClassPair> pairs;
  for (std::size_t j = 0; j < classes; ++j)
    if (j != label)
      pairs.push_back({label, j});
  return pairs;
}

struct PropertyLog {
  std::size_t checked = 0;
  std::size_t violations = 0;
  json first = nullptr;

  void record(bool ok, const std::function<json()> &dump) {
    ++checked;
    if (ok)
      return;
    if (violations++ == 0)
      first = dump();
  }
  void merge(const PropertyLog &o) {
    checked += o.checked;
    if (o.violations && !violations)
      first = o.first;
    violations += o.violations;
  }
  json to_json() const {
    return {{"checked", checked}, {"violations", violations}, {"first_violation", first}};
  }
};

struct TrialResult {
  PropertyLog soundness, exactness, joint_ind, decisions;
  std::size_t unstable_instances = 0;
  std::size_t tighter_instances = 0;
  std::size_t implied_instances = 0;
  json chain;
  std::size_t positive_chains = 0;
  std::size_t disagreements = 0;
};

json instance_dump(const Fixture &f, std::size_t trial, std::uint64_t seed, double delta,
                   const ClassPair &pair) {
  json center = json::array();
  for (double v : f.center)
    center.push_back(v);
  return {{"trial", trial},     {"seed", seed},
          {"delta", delta},     {"pair", {pair.i, pair.j}},
          {"center", center},   {"label", f.label},
          {"net1", network_to_json(f.net1)},
          {"net2", network_to_json(f.net2)}};
}

TrialResult run_trial(const RunConfig &cfg, std::size_t trial) {
  const std::uint64_t seed = trial_seed(cfg.seed, trial);
  const Fixture f = make_fixture(FixtureKind::RandomSmall, seed);
  BoundOptions bopts;
  bopts.solve = cfg.solve;
  bopts.method = cfg.bounds;
  bopts.relax.fault = cfg.inject_fault ? FaultInjection::UnstableAsInactive : FaultInjection::None;
  const auto pairs = label_pairs(f.label, f.net1.output_size());
  TrialResult r;

  for (double delta : {0.01, 0.05, 0.2}) {
    const InputRegion region{f.center, delta};
    const RegionBounds rb = compute_region_bounds(f.net1, f.net2, region, bopts);
    for (const ClassPair &pair : pairs) {
      const PairBound pb = bound_pair(f.net1, f.net2, region, rb, pair, ProblemVariant::JointMargin, bopts);
      const SampleOracleResult so = sample_extrema(f.net1, f.net2, region, pair, cfg.oracle_samples,
                                                   seed, ExecPolicy::Serial);
      const bool ok = pb.lower_available && pb.upper_available &&
                      pb.lower <= so.sampled_min + 1e-6 && so.sampled_max <= pb.upper + 1e-6;
      r.soundness.record(ok, [&] {
        json d = instance_dump(f, trial, seed, delta, pair);
        d["lower"] = number(pb.lower);
        d["upper"] = number(pb.upper);
        d["sampled_min"] = so.sampled_min;
        d["sampled_max"] = so.sampled_max;
        d["argmin"] = so.argmin;
        d["argmax"] = so.argmax;
        return d;
      });
    }
  }

  {
    const InputRegion region{f.center, 0.0};
    for (const ClassPair &pair : pairs) {
      const PairBound pb = bound_pair(f.net1, f.net2, region, pair, ProblemVariant::JointMargin, bopts);
      const double truth = log_rpr(f.net1, f.net2, f.center, pair);
      const bool ok = pb.lower_available && pb.upper_available &&
                      std::abs(pb.lower - truth) <= 1e-6 && std::abs(pb.upper - pb.lower) <= 1e-6;
      r.exactness.record(ok, [&] {
        json d = instance_dump(f, trial, seed, 0.0, pair);
        d["lower"] = number(pb.lower);
        d["upper"] = number(pb.upper);
        d["log_rpr"] = truth;
        return d;
      });
    }
  }

  const double delta = 0.05;
  const InputRegion region{f.center, delta};
  for (const ClassPair &pair : pairs) {
    const CompareResult c = compare_independent(f.net1, f.net2, region, pair, bopts);
    const bool ok = c.min_ind <= c.min_joint + 1e-6 && c.max_ind >= c.max_joint - 1e-6;
    r.joint_ind.record(ok, [&] {
      json d = instance_dump(f, trial, seed, delta, pair);
      d["comparison"] = implylp::to_json(c);
      return d;
    });
    if (c.unstable > 0) {
      ++r.unstable_instances;
      r.tighter_instances += c.improvement_pct > 0.0;
    }
  }

  VerifyOptions vopts;
  vopts.bounds = bopts;
  const Sample sample{"trial" + std::to_string(trial), f.center, f.label};
  const PointBatch points = region_points(region, cfg.oracle_samples, seed);
  auto check_direction = [&](const Network &a, const Network &b) {
    const ImplicationReport rep = verify_implication(a, b, sample, delta, vopts);
    if (rep.skipped || !rep.implied)
      return;
    ++r.implied_instances;
    const std::size_t bad = count_decision_violations(a, b, points, f.label, ExecPolicy::Serial);
    r.decisions.record(bad == 0, [&] {
      json d = instance_dump(f, trial, seed, delta, {f.label, f.label});
      d["direction"] = a.name() + " implied by " + b.name();
      d["counterexamples"] = bad;
      d["points"] = points.count();
      return d;
    });
  };
  check_direction(f.net1, f.net2);
  check_direction(f.net2, f.net1);

  const Triple t = random_triple(seed);
  const ChainReport chain = chain_transitivity(t.nets, InputRegion{t.center, delta},
                                               label_pairs(t.label, t.nets[0].output_size()), bopts);
  r.chain = implylp::to_json(chain);
  r.chain["trial"] = trial;
  r.positive_chains = chain.positive_chains;
  r.disagreements = chain.disagreements;
  return r;
}

// ---- argument parsing -----------------------------------------------------

struct RawFlags {
  std::optional<std::string> config;
  std::optional<std::string> net1, net2, samples, out, variant, bounds, format, quant, export_lp;
  std::vector<double> deltas;
  std::optional<double> threshold, prune, feas_tol, opt_tol;
  std::optional<long> max_iters;
  std::optional<int> jobs;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials, oracle_samples;
  std::vector<double> domain_low, domain_high;
  bool allow_misclassified = false;
  bool all_pairs = false;
  bool inject_fault = false;
};

void add_common(CLI::App *app, RawFlags &f) {
  app->add_option("--config", f.config, "JSON file with the same keys as the flags");
  app->add_option("--jobs", f.jobs, "worker count (falls back to IMPLYLP_JOBS)");
  app->add_option("--seed", f.seed, "seed for every random choice");
  app->add_option("--out", f.out, "output directory (compact: output network file)");
}

void add_verify_like(CLI::App *app, RawFlags &f) {
  add_common(app, f);
  app->add_option("--net1", f.net1, "implied network (NetworkFile)");
  app->add_option("--net2", f.net2, "implying network (NetworkFile)");
  app->add_option("--samples", f.samples, "SampleFile");
  app->add_option("--delta", f.deltas, "region radius; repeat for a sweep");
  app->add_option("--threshold", f.threshold, "implication threshold on the lower bound");
  app->add_option("--variant", f.variant, "margin | pure");
  app->add_option("--bounds", f.bounds, "interval | lp");
  app->add_option("--format", f.format, "json | csv | both");
  app->add_flag("--allow-misclassified", f.allow_misclassified,
                "verify samples even when a network misclassifies the center");
  app->add_flag("--all-pairs", f.all_pairs, "also bound pairs not involving the label");
  app->add_option("--domain-low", f.domain_low, "global input lower bound (one value or one per input)");
  app->add_option("--domain-high", f.domain_high, "global input upper bound");
  app->add_option("--export-lp", f.export_lp, "write every LP to this directory");
  app->add_option("--feas-tol", f.feas_tol, "simplex feasibility tolerance");
  app->add_option("--opt-tol", f.opt_tol, "simplex optimality tolerance");
  app->add_option("--max-iters", f.max_iters, "simplex iteration cap (0 = automatic)");
}

template <class F>
void assign(std::vector<std::string> &errors, F &&f) {
  try {
    f();
  } catch (const std::exception &e) {
    errors.emplace_back(e.what());
  }
}

void apply_flags(const RawFlags &f, RunConfig &c, std::vector<std::string> &errors) {
  if (f.net1) c.net1 = *f.net1;
  if (f.net2) c.net2 = *f.net2;
  if (f.samples) c.samples = *f.samples;
  if (f.out) c.out = *f.out;
  if (!f.deltas.empty()) c.deltas = f.deltas;
  if (f.threshold) c.threshold = *f.threshold;
  if (f.variant) assign(errors, [&] { c.variant = cli_variant(*f.variant); });
  if (f.bounds) assign(errors, [&] { c.bounds = bound_method_from_string(*f.bounds); });
  if (f.format) assign(errors, [&] { c.format = format_from_string(*f.format); });
  if (f.jobs) c.jobs = *f.jobs;
  if (f.seed) c.seed = *f.seed;
  if (f.allow_misclassified) c.allow_misclassified = true;
  if (f.all_pairs) c.all_pairs = true;
  if (!f.domain_low.empty()) c.domain_low = f.domain_low;
  if (!f.domain_high.empty()) c.domain_high = f.domain_high;
  if (f.export_lp) c.export_lp = *f.export_lp;
  if (f.feas_tol) c.solve.feas_tol = *f.feas_tol;
  if (f.opt_tol) c.solve.opt_tol = *f.opt_tol;
  if (f.max_iters) c.solve.max_iters = *f.max_iters;
  if (f.prune) c.prune = *f.prune;
  if (f.quant) c.quant = *f.quant;
  if (f.trials) c.trials = *f.trials;
  if (f.oracle_samples) c.oracle_samples = *f.oracle_samples;
  if (f.inject_fault) c.inject_fault = true;
}

int exit_for(const std::exception &e) {
  if (dynamic_cast<const LoadError *>(&e) || dynamic_cast<const IoError *>(&e))
    return kLoadError;
  if (dynamic_cast<const NumericError *>(&e))
    return kSolverFailure;
  return kConfigError;
}

} // namespace

void apply_config_json(const json &doc, RunConfig &c, std::vector<std::string> &errors) {
  if (!doc.is_object()) {
    errors.emplace_back("config file must hold a JSON object");
    return;
  }
  for (const auto &[key, v] : doc.items()) {
    try {
      if (key == "net1") c.net1 = v.get<std::string>();
      else if (key == "net2") c.net2 = v.get<std::string>();
      else if (key == "samples") c.samples = v.get<std::string>();
      else if (key == "out") c.out = v.get<std::string>();
      else if (key == "delta")
        c.deltas = v.is_array() ? v.get<std::vector<double>>() : std::vector<double>{v.get<double>()};
      else if (key == "threshold") c.threshold = v.get<double>();
      else if (key == "variant") c.variant = cli_variant(v.get<std::string>());
      else if (key == "bounds") c.bounds = bound_method_from_string(v.get<std::string>());
      else if (key == "format") c.format = format_from_string(v.get<std::string>());
      else if (key == "jobs") c.jobs = v.get<int>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "allow_misclassified") c.allow_misclassified = v.get<bool>();
      else if (key == "all_pairs") c.all_pairs = v.get<bool>();
      else if (key == "domain_low")
        c.domain_low = v.is_array() ? v.get<std::vector<double>>() : std::vector<double>{v.get<double>()};
      else if (key == "domain_high")
        c.domain_high = v.is_array() ? v.get<std::vector<double>>() : std::vector<double>{v.get<double>()};
      else if (key == "export_lp") c.export_lp = v.get<std::string>();
      else if (key == "feas_tol") c.solve.feas_tol = v.get<double>();
      else if (key == "opt_tol") c.solve.opt_tol = v.get<double>();
      else if (key == "max_iters") c.solve.max_iters = v.get<long>();
      else if (key == "prune") c.prune = v.get<double>();
      else if (key == "quant") c.quant = v.get<std::string>();
      else if (key == "trials") c.trials = v.get<std::size_t>();
      else if (key == "oracle_samples") c.oracle_samples = v.get<std::size_t>();
      else if (key == "inject_fault") c.inject_fault = v.get<bool>();
      else errors.push_back("config: unknown key '" + key + "'");
    } catch (const std::exception &e) {
      errors.push_back("config: key '" + key + "': " + e.what());
    }
  }
}

std::vector<std::string> validate(const RunConfig &c) {
  std::vector<std::string> errors;
  const std::string &cmd = c.command;
  const bool verify_like = cmd == "verify" || cmd == "sweep" || cmd == "compare";
  if (verify_like) {
    if (c.net1.empty()) errors.emplace_back("--net1 is required");
    if (c.net2.empty()) errors.emplace_back("--net2 is required");
    if (c.samples.empty()) errors.emplace_back("--samples is required");
    if (c.out.empty()) errors.emplace_back("--out is required");
    if (cmd == "sweep" && c.deltas.size() < 2)
      errors.emplace_back("sweep needs at least two --delta values");
    if (cmd != "sweep" && c.deltas.size() != 1)
      errors.emplace_back(cmd + " needs exactly one --delta (use sweep for several)");
    for (double d : c.deltas)
      if (!(d >= 0.0) || !std::isfinite(d))
        errors.push_back("delta " + csv_number(d) + " must be finite and non-negative");
    if (!std::isfinite(c.threshold))
      errors.emplace_back("threshold must be finite");
    if (cmd == "compare" && c.variant != ProblemVariant::JointMargin)
      errors.emplace_back("compare only supports the margin variant");
  } else if (cmd == "compact") {
    if (c.net1.empty()) errors.emplace_back("--net1 is required");
    if (c.out.empty()) errors.emplace_back("--out is required");
    if (!c.prune && !c.quant) errors.emplace_back("compact needs --prune or --quant");
    if (c.prune && !(*c.prune >= 0.0 && *c.prune <= 1.0))
      errors.emplace_back("--prune must lie in [0, 1]");
    if (c.quant) {
      try {
        quant_kind_from_string(*c.quant);
      } catch (const std::exception &e) {
        errors.emplace_back(e.what());
      }
    }
  } else if (cmd == "audit") {
    if (c.trials == 0) errors.emplace_back("--trials must be at least 1");
    if (c.oracle_samples == 0) errors.emplace_back("--oracle-samples must be at least 1");
  } else {
    errors.push_back("unknown command '" + cmd + "'");
  }
  if (c.jobs < 0) errors.emplace_back("--jobs must be non-negative");
  if (!(c.solve.feas_tol > 0.0) || !(c.solve.opt_tol > 0.0))
    errors.emplace_back("solver tolerances must be positive");
  if (c.solve.max_iters < 0) errors.emplace_back("--max-iters must be non-negative");
  return errors;
}

int cmd_verify(const RunConfig &cfg, std::ostream &out, std::ostream &) {
  const Inputs in = load_inputs(cfg);
  const double delta = cfg.deltas.front();
  const auto reports =
      verify_samples(in.net1, in.net2, in.samples, delta, verify_options(cfg, in.net1.input_size()));
  const Established e = tally(reports);

  if (wants_json(cfg)) {
    json doc = run_header(cfg);
    doc["delta"] = delta;
    doc["established"] = established_json(e);
    doc["reports"] = json::array();
    for (const auto &r : reports)
      doc["reports"].push_back(to_json(r));
    write_out(cfg, "report.json", doc.dump(1) + "\n");
  }
  if (wants_csv(cfg)) {
    std::string csv = kSummaryHeader;
    for (const auto &r : reports)
      csv += summary_row(r);
    write_out(cfg, "summary.csv", csv);
  }
  print_established(out, e, "");
  if (hard_failure(reports)) {
    out << "solver failure on at least one program; see the report\n";
    return kSolverFailure;
  }
  return kOk;
}

int cmd_sweep(const RunConfig &cfg, std::ostream &out, std::ostream &err) {
  const Inputs in = load_inputs(cfg);
  const VerifyOptions vopts = verify_options(cfg, in.net1.input_size());
  std::vector<double> deltas = cfg.deltas;
  std::sort(deltas.begin(), deltas.end());

  json doc = run_header(cfg);
  doc["deltas"] = deltas;
  doc["per_delta"] = json::array();
  doc["warnings"] = json::array();
  doc["reports"] = json::array();
  std::string csv = kSummaryHeader;
  bool failed = false;
  std::optional<std::size_t> prev_count;
  double prev_delta = 0.0;
  for (double delta : deltas) {
    const auto reports = verify_samples(in.net1, in.net2, in.samples, delta, vopts);
    failed = failed || hard_failure(reports);
    const Established e = tally(reports);
    json row = established_json(e);
    row["delta"] = delta;
    doc["per_delta"].push_back(row);
    for (const auto &r : reports) {
      doc["reports"].push_back(to_json(r));
      csv += summary_row(r);
    }
    out << "delta " << csv_number(delta) << ":\n";
    print_established(out, e, "  ");
    if (prev_count && e.forward > *prev_count) {
      const std::string w = "implied count rose from " + std::to_string(*prev_count) + " at delta " +
                            csv_number(prev_delta) + " to " + std::to_string(e.forward) +
                            " at delta " + csv_number(delta);
      doc["warnings"].push_back(w);
      err << "warning: " << w << "\n";
    }
    prev_count = e.forward;
    prev_delta = delta;
  }
  doc["monotone"] = doc["warnings"].empty();
  if (wants_json(cfg))
    write_out(cfg, "sweep.json", doc.dump(1) + "\n");
  if (wants_csv(cfg))
    write_out(cfg, "sweep.csv", csv);
  return failed ? kSolverFailure : kOk;
}

int cmd_compare(const RunConfig &cfg, std::ostream &out, std::ostream &) {
  const Inputs in = load_inputs(cfg);
  const double delta = cfg.deltas.front();
  const VerifyOptions vopts = verify_options(cfg, in.net1.input_size());
  BoundOptions bopts = vopts.bounds;

  struct Row {
    std::string id;
    CompareResult r;
  };
  std::vector<std::vector<Row>> per_sample(in.samples.size());
  std::vector<std::exception_ptr> errors(in.samples.size());
  const auto n = static_cast<std::ptrdiff_t>(in.samples.size());
#pragma omp parallel for schedule(dynamic) num_threads(parallel_jobs())
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    try {
      const Sample &s = in.samples[k];
      const std::size_t label = s.label ? *s.label : predict(in.net1, s.values);
      const InputRegion region{s.values, delta, vopts.domain_low, vopts.domain_high};
      BoundOptions local = bopts;
      local.export_tag = s.id + "_d" + std::to_string(delta);
      for (const ClassPair &pair : label_pairs(label, in.net1.output_size()))
        per_sample[k].push_back({s.id, compare_independent(in.net1, in.net2, region, pair, local)});
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (const auto &e : errors)
    if (e)
      std::rethrow_exception(e);

  std::vector<Row> rows;
  for (auto &v : per_sample)
    for (auto &r : v)
      rows.push_back(std::move(r));

  const std::vector<std::pair<const char *, double CompareResult::*>> cols = {
      {"min_ind", &CompareResult::min_ind},         {"min_joint", &CompareResult::min_joint},
      {"max_ind", &CompareResult::max_ind},         {"max_joint", &CompareResult::max_joint},
      {"range_ind", &CompareResult::range_ind},     {"range_joint", &CompareResult::range_joint},
      {"improvement_pct", &CompareResult::improvement_pct}};
  std::vector<double> mean(cols.size(), 0.0), sd(cols.size(), 0.0);
  for (std::size_t c = 0; c < cols.size(); ++c) {
    for (const Row &r : rows)
      mean[c] += r.r.*cols[c].second;
    mean[c] = rows.empty() ? 0.0 : mean[c] / rows.size();
    for (const Row &r : rows)
      sd[c] += std::pow(r.r.*cols[c].second - mean[c], 2);
    sd[c] = rows.size() > 1 ? std::sqrt(sd[c] / (rows.size() - 1)) : 0.0;
  }

  if (wants_csv(cfg)) {
    std::string csv = "id,i,j";
    for (const auto &c : cols)
      csv += std::string(",") + c.first;
    csv += "\n";
    for (const Row &r : rows) {
      csv += csv_field(r.id) + "," + std::to_string(r.r.pair.i) + "," + std::to_string(r.r.pair.j);
      for (const auto &c : cols)
        csv += "," + csv_number(r.r.*c.second);
      csv += "\n";
    }
    for (const auto &[name, vals] : {std::pair{"mean", &mean}, std::pair{"std", &sd}}) {
      csv += std::string(name) + ",,";
      for (double v : *vals)
        csv += "," + csv_number(v);
      csv += "\n";
    }
    write_out(cfg, "compare.csv", csv);
  }
  if (wants_json(cfg)) {
    json doc = run_header(cfg);
    doc["delta"] = delta;
    doc["rows"] = json::array();
    for (const Row &r : rows) {
      json j = to_json(r.r);
      j["id"] = r.id;
      doc["rows"].push_back(std::move(j));
    }
    json m, s;
    for (std::size_t c = 0; c < cols.size(); ++c) {
      m[cols[c].first] = number(mean[c]);
      s[cols[c].first] = number(sd[c]);
    }
    doc["mean"] = m;
    doc["std"] = s;
    write_out(cfg, "compare.json", doc.dump(1) + "\n");
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "%zu pair(s); improvement %.2f%% +- %.2f%%\n", rows.size(),
                mean.back(), sd.back());
  out << buf;
  return kOk;
}

int cmd_compact(const RunConfig &cfg, std::ostream &out, std::ostream &) {
  const Network net = load_network(cfg.net1);
  Network result = net;
  std::string name = net.name();
  if (cfg.prune) {
    result = prune_mbp(result, *cfg.prune);
    name += "_pruned" + csv_number(*cfg.prune);
  }
  std::string precision = "float64";
  if (cfg.quant) {
    const QuantKind kind = quant_kind_from_string(*cfg.quant);
    result = quantize(result, {kind});
    precision = implylp::to_string(kind);
    name += std::string("_") + precision;
  }
  result = Network(name, result.layers());
  if (const fs::path parent = fs::path(cfg.out).parent_path(); !parent.empty()) {
    std::error_code ec;
    fs::create_directories(parent, ec);
  }
  save_network(result, cfg.out);
  const ParameterStats before = parameter_stats(net), after = parameter_stats(result);
  char buf[200];
  std::snprintf(buf, sizeof buf, "parameters %zu, zeros %zu -> %zu, sparsity %.4f, precision %s\n",
                after.total, before.zeros, after.zeros, after.sparsity(), precision.c_str());
  out << buf << "wrote " << cfg.out << "\n";
  return kOk;
}

json run_audit(const RunConfig &cfg, bool &passed) {
  std::vector<TrialResult> results(cfg.trials);
  std::vector<std::exception_ptr> errors(cfg.trials);
  const auto n = static_cast<std::ptrdiff_t>(cfg.trials);
#pragma omp parallel for schedule(dynamic) num_threads(parallel_jobs())
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    try {
      results[k] = run_trial(cfg, static_cast<std::size_t>(k));
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (const auto &e : errors)
    if (e)
      std::rethrow_exception(e);

  TrialResult total;
  json chains = json::array();
  for (const TrialResult &r : results) {
    total.soundness.merge(r.soundness);
    total.exactness.merge(r.exactness);
    total.joint_ind.merge(r.joint_ind);
    total.decisions.merge(r.decisions);
    total.unstable_instances += r.unstable_instances;
    total.tighter_instances += r.tighter_instances;
    total.implied_instances += r.implied_instances;
    total.positive_chains += r.positive_chains;
    total.disagreements += r.disagreements;
    chains.push_back(r.chain);
  }
  passed = total.soundness.violations == 0 && total.exactness.violations == 0 &&
           total.joint_ind.violations == 0 && total.decisions.violations == 0;

  json t2 = total.joint_ind.to_json();
  t2["instances_with_unstable"] = total.unstable_instances;
  t2["joint_strictly_tighter"] = total.tighter_instances;
  json dec = total.decisions.to_json();
  dec["implied_instances"] = total.implied_instances;
  dec["samples_per_instance"] = cfg.oracle_samples;
  return {{"command", "audit"},
          {"seed", cfg.seed},
          {"trials", cfg.trials},
          {"oracle_samples", cfg.oracle_samples},
          {"inject_fault", cfg.inject_fault},
          {"bounds", implylp::to_string(cfg.bounds)},
          {"passed", passed},
          {"properties",
           {{"soundness", total.soundness.to_json()},
            {"delta0_exactness", total.exactness.to_json()},
            {"joint_vs_independent", t2},
            {"decision_consistency", dec}}},
          {"transitivity",
           {{"asserted", false},
            {"positive_chains", total.positive_chains},
            {"disagreements", total.disagreements},
            {"chains", chains}}}};
}

int cmd_audit(const RunConfig &cfg, std::ostream &out, std::ostream &err) {
  bool passed = false;
  const json doc = run_audit(cfg, passed);
  const std::string text = doc.dump(1) + "\n";
  if (cfg.out.empty())
    out << text;
  else
    write_out(cfg, "audit.json", text);
  const auto &p = doc["properties"];
  for (const auto &[name, v] : p.items())
    out << name << ": " << v["violations"].get<std::size_t>() << " violation(s) in "
        << v["checked"].get<std::size_t>() << " check(s)\n";
  out << "transitivity: " << doc["transitivity"]["disagreements"].get<std::size_t>()
      << " disagreement(s) among " << doc["transitivity"]["positive_chains"].get<std::size_t>()
      << " positive chain(s) (reported, not failed)\n";
  if (passed)
    return kOk;
  err << "audit failed for seed " << cfg.seed << "\n";
  for (const auto &[name, v] : p.items())
    if (!v["first_violation"].is_null())
      err << name << " instance:\n" << v["first_violation"].dump(1) << "\n";
  return kAuditViolation;
}

int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
  CLI::App app{"Differential verification of compatible classifiers via joint LP relaxation",
               "implylp"};
  app.require_subcommand(1);
  RawFlags f;
  auto *verify = app.add_subcommand("verify", "bound the log relative prediction ratio per sample");
  auto *sweep = app.add_subcommand("sweep", "verify over several radii");
  auto *compare = app.add_subcommand("compare", "joint versus independent bounds");
  auto *compact = app.add_subcommand("compact", "prune or quantize a network");
  auto *audit = app.add_subcommand("audit", "randomized property audit");
  for (auto *sub : {verify, sweep, compare})
    add_verify_like(sub, f);
  add_common(compact, f);
  compact->add_option("--net1", f.net1, "network to compact");
  compact->add_option("--prune", f.prune, "magnitude pruning fraction in [0, 1]");
  compact->add_option("--quant", f.quant, "float16 | int16 | int8 | int4");
  add_common(audit, f);
  audit->add_option("--trials", f.trials, "random instances");
  audit->add_option("--oracle-samples", f.oracle_samples, "sampled inputs per instance");
  audit->add_option("--bounds", f.bounds, "interval | lp");
  audit->add_flag("--inject-fault", f.inject_fault,
                  "encode unstable ReLUs as inactive (negative control)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  RunConfig cfg;
  cfg.command = app.get_subcommands().front()->get_name();
  std::vector<std::string> errors;
  if (f.config) {
    try {
      apply_config_json(read_json_file(*f.config), cfg, errors);
    } catch (const std::exception &e) {
      errors.emplace_back(e.what());
    }
  }
  apply_flags(f, cfg, errors);
  if (cfg.jobs == 0) {
    if (const char *env = std::getenv("IMPLYLP_JOBS")) {
      try {
        cfg.jobs = std::stoi(env);
      } catch (const std::exception &) {
        errors.push_back(std::string("IMPLYLP_JOBS is not an integer: '") + env + "'");
      }
    }
  }
  for (auto &e : validate(cfg))
    errors.push_back(std::move(e));
  if (!errors.empty()) {
    err << "configuration error:\n";
    for (const auto &e : errors)
      err << "  " << e << "\n";
    return kConfigError;
  }
  set_parallel_jobs(cfg.jobs);

  try {
    if (cfg.command == "verify")
      return cmd_verify(cfg, out, err);
    if (cfg.command == "sweep")
      return cmd_sweep(cfg, out, err);
    if (cfg.command == "compare")
      return cmd_compare(cfg, out, err);
    if (cfg.command == "compact")
      return cmd_compact(cfg, out, err);
    return cmd_audit(cfg, out, err);
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
    return exit_for(e);
  }
}

} // namespace implylp::cli
