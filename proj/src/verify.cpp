#include "implylp/verify.hpp"

#include "implylp/error.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>

namespace implylp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Optimal values this close to zero are simplex roundoff, far below feas_tol.
constexpr double kZeroSnap = 1e-12;

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since)
      .count();
}

struct Solved {
  double value = 0.0;
  LpStatus status = LpStatus::NumericFailure;
  bool available = false;
  std::size_t unstable = 0;
};

Solved solve_direction(const Network &first, const Network &second, const InputRegion &region,
                       const BoundsMap &b_first, const BoundsMap &b_second, const ClassPair &pair,
                       ProblemVariant variant, const BoundOptions &opts, const char *which) {
  const JointProgram prog =
      build_joint_lp(first, second, region, pair, b_first, b_second, variant, opts.relax);
  if (opts.export_dir) {
    const std::string file = opts.export_tag + "_" + std::to_string(pair.i) + "_" +
                             std::to_string(pair.j) + "_" + which + ".lp";
    export_lp(prog.lp, *opts.export_dir / file,
              std::string(to_string(variant)) + " " + which + " bound");
  }
  const LpSolution sol = solve(prog.lp, opts.solve);
  Solved out;
  out.status = sol.status;
  out.unstable = prog.unstable();
  if (sol.optimal()) {
    out.value = std::abs(sol.objective) <= kZeroSnap ? 0.0 : sol.objective;
    out.available = true;
  } else if (sol.status == LpStatus::Infeasible && variant == ProblemVariant::JointPureImplication) {
    out.value = kInf;
    out.available = true;
  } else {
    out.value = -kInf;
  }
  return out;
}

nlohmann::json number(double v) {
  if (std::isfinite(v))
    return v;
  if (std::isnan(v))
    return "nan";
  return v > 0 ? "inf" : "-inf";
}

} // namespace

const char *to_string(BoundMethod method) {
  return method == BoundMethod::Interval ? "interval" : "lp";
}

BoundMethod bound_method_from_string(const std::string &name) {
  if (name == "interval")
    return BoundMethod::Interval;
  if (name == "lp")
    return BoundMethod::LpRefined;
  throw ArgumentError("unknown bound method '" + name + "' (expected interval or lp)");
}

BoundsMap compute_bounds(const Network &net, const InputRegion &region, const BoundOptions &opts) {
  BoundsMap coarse = propagate_intervals(net, region, ExecPolicy::Serial);
  if (opts.method == BoundMethod::Interval)
    return coarse;
  return refine_bounds_lp(net, region, coarse, nullptr, opts.solve);
}

RegionBounds compute_region_bounds(const Network &net1, const Network &net2,
                                   const InputRegion &region, const BoundOptions &opts) {
  return {compute_bounds(net1, region, opts), compute_bounds(net2, region, opts)};
}

PairBound bound_pair(const Network &net1, const Network &net2, const InputRegion &region,
                     const ClassPair &pair, ProblemVariant variant, const BoundOptions &opts) {
  require_compatible(net1, net2);
  return bound_pair(net1, net2, region, compute_region_bounds(net1, net2, region, opts), pair,
                    variant, opts);
}

PairBound bound_pair(const Network &net1, const Network &net2, const InputRegion &region,
                     const RegionBounds &bounds, const ClassPair &pair, ProblemVariant variant,
                     const BoundOptions &opts) {
  if (variant != ProblemVariant::JointMargin && variant != ProblemVariant::JointPureImplication)
    throw ArgumentError("bound_pair needs a joint variant");
  const auto start = std::chrono::steady_clock::now();
  const Solved lo = solve_direction(net1, net2, region, bounds.net1, bounds.net2, pair, variant,
                                    opts, "lower");
  const Solved hi = solve_direction(net2, net1, region, bounds.net2, bounds.net1, pair, variant,
                                    opts, "upper");
  PairBound pb;
  pb.pair = pair;
  pb.lower = lo.value;
  pb.lower_status = lo.status;
  pb.lower_available = lo.available;
  pb.upper = 0.0 - hi.value; // no negative zero
  pb.upper_status = hi.status;
  pb.upper_available = hi.available;
  pb.unstable = lo.unstable;
  pb.wall_ms = elapsed_ms(start);
  return pb;
}

ImplicationReport verify_implication(const Network &net1, const Network &net2,
                                     const Sample &sample, double delta,
                                     const VerifyOptions &opts) {
  require_compatible(net1, net2);
  const auto start = std::chrono::steady_clock::now();
  ImplicationReport rep;
  rep.sample_id = sample.id;
  rep.delta = delta;
  rep.threshold = opts.threshold;
  rep.variant = opts.variant;
  if (!sample.label)
    throw ArgumentError("sample '" + sample.id + "' has no label");
  const std::size_t c = *sample.label;
  const std::size_t classes = net1.output_size();
  if (c >= classes)
    throw ArgumentError("sample '" + sample.id + "' label " + std::to_string(c) +
                        " is out of range for " + std::to_string(classes) + " classes");
  rep.correct_class = c;

  if (!opts.allow_misclassified) {
    const std::size_t p1 = predict(net1, sample.values);
    const std::size_t p2 = predict(net2, sample.values);
    if (p1 != c || p2 != c) {
      rep.skipped = true;
      rep.skip_reason = "center misclassified (net1 predicts " + std::to_string(p1) +
                        ", net2 predicts " + std::to_string(p2) + ")";
      rep.wall_ms = elapsed_ms(start);
      return rep;
    }
  }

  InputRegion region{sample.values, delta, opts.domain_low, opts.domain_high};
  const RegionBounds bounds = compute_region_bounds(net1, net2, region, opts.bounds);
  BoundOptions bopts = opts.bounds;
  bopts.export_tag = sample.id + "_d" + std::to_string(delta);

  std::vector<ClassPair> pairs;
  for (std::size_t j = 0; j < classes; ++j)
    if (j != c)
      pairs.push_back({c, j});
  if (opts.all_pairs)
    for (std::size_t i = 0; i < classes; ++i)
      for (std::size_t j = 0; j < classes; ++j)
        if (i != c && i != j)
          pairs.push_back({i, j});

  bool all_ok = true, fwd = true, rev = true;
  rep.min_lower = kInf;
  rep.max_upper = -kInf;
  for (const ClassPair &pair : pairs) {
    PairBound pb = bound_pair(net1, net2, region, bounds, pair, opts.variant, bopts);
    if (pair.i == c) {
      all_ok = all_ok && pb.lower_available && pb.upper_available;
      fwd = fwd && pb.lower_available && pb.lower >= opts.threshold;
      rev = rev && pb.upper_available && -pb.upper >= opts.threshold;
      rep.min_lower = std::min(rep.min_lower, pb.lower);
      rep.max_upper = std::max(rep.max_upper, pb.upper);
    }
    rep.pair_bounds.push_back(std::move(pb));
  }
  rep.implied = all_ok && fwd;
  rep.reverse_implied = all_ok && rev;
  rep.wall_ms = elapsed_ms(start);
  return rep;
}

std::vector<ImplicationReport> verify_samples(const Network &net1, const Network &net2,
                                              const std::vector<Sample> &samples, double delta,
                                              const VerifyOptions &opts) {
  std::vector<ImplicationReport> out(samples.size());
  std::vector<std::exception_ptr> errors(samples.size());
  const auto n = static_cast<std::ptrdiff_t>(samples.size());
#pragma omp parallel for schedule(dynamic) num_threads(parallel_jobs())
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    try {
      out[k] = verify_implication(net1, net2, samples[k], delta, opts);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (const auto &e : errors)
    if (e)
      std::rethrow_exception(e);
  return out;
}

CompareResult compare_independent(const Network &net1, const Network &net2,
                                  const InputRegion &region, const ClassPair &pair,
                                  const BoundOptions &opts) {
  require_compatible(net1, net2);
  const RegionBounds b = compute_region_bounds(net1, net2, region, opts);
  auto run = [&](const Network &a, const Network &bn, const BoundsMap &ba, const BoundsMap &bb,
                 ProblemVariant v, const char *which) {
    const Solved s = solve_direction(a, bn, region, ba, bb, pair, v, opts, which);
    if (!s.available)
      throw NumericError(std::string("comparison program '") + which + "' ended " +
                         to_string(s.status));
    return s;
  };
  const Solved joint_lo = run(net1, net2, b.net1, b.net2, ProblemVariant::JointMargin, "joint_lower");
  const Solved joint_hi = run(net2, net1, b.net2, b.net1, ProblemVariant::JointMargin, "joint_upper");
  const Solved ind1 = run(net1, net2, b.net1, b.net2, ProblemVariant::IndependentNet1, "ind1_lower");
  const Solved ind2 = run(net1, net2, b.net1, b.net2, ProblemVariant::IndependentNet2, "ind2_lower");
  const Solved rind1 = run(net2, net1, b.net2, b.net1, ProblemVariant::IndependentNet1, "ind1_upper");
  const Solved rind2 = run(net2, net1, b.net2, b.net1, ProblemVariant::IndependentNet2, "ind2_upper");

  CompareResult r;
  r.pair = pair;
  r.min_joint = joint_lo.value;
  r.max_joint = 0.0 - joint_hi.value;
  r.min_ind = ind1.value + ind2.value;
  r.max_ind = 0.0 - (rind1.value + rind2.value);
  r.range_joint = r.max_joint - r.min_joint;
  r.range_ind = r.max_ind - r.min_ind;
  r.improvement_pct = r.range_ind > 0.0 ? (1.0 - r.range_joint / r.range_ind) * 100.0 : 0.0;
  r.unstable = joint_lo.unstable;
  r.ok = true;
  return r;
}

ChainReport chain_transitivity(const std::vector<Network> &nets, const InputRegion &region,
                               const std::vector<ClassPair> &pairs, const BoundOptions &opts) {
  if (nets.size() < 3)
    throw ArgumentError("a transitivity chain needs at least 3 networks");
  for (std::size_t k = 1; k < nets.size(); ++k)
    require_compatible(nets[0], nets[k]);
  std::vector<BoundsMap> bounds;
  for (const Network &net : nets)
    bounds.push_back(compute_bounds(net, region, opts));

  auto lower = [&](std::size_t a, std::size_t b, const ClassPair &pair, bool &ok) {
    const Solved s = solve_direction(nets[a], nets[b], region, bounds[a], bounds[b], pair,
                                     ProblemVariant::JointMargin, opts, "chain");
    ok = ok && s.available;
    return s.value;
  };

  ChainReport rep;
  rep.length = nets.size();
  for (const ClassPair &pair : pairs) {
    validate_pair(pair, nets[0].output_size());
    ChainEntry e;
    e.pair = pair;
    bool ok = true;
    for (std::size_t k = 0; k + 1 < nets.size(); ++k)
      e.adjacent.push_back(lower(k, k + 1, pair, ok));
    e.end_to_end = lower(0, nets.size() - 1, pair, ok);
    e.available = ok;
    e.all_adjacent_positive =
        ok && std::all_of(e.adjacent.begin(), e.adjacent.end(), [](double v) { return v > 0.0; });
    e.end_positive = ok && e.end_to_end > 0.0;
    e.disagreement = e.all_adjacent_positive && !e.end_positive;
    rep.positive_chains += e.all_adjacent_positive;
    rep.disagreements += e.disagreement;
    rep.entries.push_back(std::move(e));
  }
  return rep;
}

nlohmann::json to_json(const PairBound &b) {
  return {{"pair", {b.pair.i, b.pair.j}},
          {"lower", number(b.lower)},
          {"upper", number(b.upper)},
          {"lower_status", to_string(b.lower_status)},
          {"upper_status", to_string(b.upper_status)},
          {"lower_available", b.lower_available},
          {"upper_available", b.upper_available},
          {"unstable_relus", b.unstable},
          {"wall_ms", b.wall_ms}};
}

nlohmann::json to_json(const ImplicationReport &r, bool with_timing) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto &b : r.pair_bounds) {
    nlohmann::json j = to_json(b);
    if (!with_timing)
      j.erase("wall_ms");
    pairs.push_back(std::move(j));
  }
  nlohmann::json j = {{"sample_id", r.sample_id},
                      {"correct_class", r.correct_class},
                      {"delta", r.delta},
                      {"threshold", r.threshold},
                      {"variant", to_string(r.variant)},
                      {"skipped", r.skipped},
                      {"implied", r.implied},
                      {"reverse_implied", r.reverse_implied},
                      {"pair_bounds", std::move(pairs)}};
  if (r.skipped) {
    j["skip_reason"] = r.skip_reason;
  } else {
    j["min_lower"] = number(r.min_lower);
    j["max_upper"] = number(r.max_upper);
  }
  if (with_timing)
    j["wall_ms"] = r.wall_ms;
  return j;
}

nlohmann::json to_json(const CompareResult &r) {
  return {{"pair", {r.pair.i, r.pair.j}},     {"min_ind", number(r.min_ind)},
          {"min_joint", number(r.min_joint)}, {"max_ind", number(r.max_ind)},
          {"max_joint", number(r.max_joint)}, {"range_ind", number(r.range_ind)},
          {"range_joint", number(r.range_joint)},
          {"improvement_pct", number(r.improvement_pct)},
          {"unstable_relus", r.unstable}};
}

nlohmann::json to_json(const ChainReport &r) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto &e : r.entries) {
    nlohmann::json adj = nlohmann::json::array();
    for (double v : e.adjacent)
      adj.push_back(number(v));
    entries.push_back({{"pair", {e.pair.i, e.pair.j}},
                       {"adjacent", std::move(adj)},
                       {"end_to_end", number(e.end_to_end)},
                       {"available", e.available},
                       {"all_adjacent_positive", e.all_adjacent_positive},
                       {"end_positive", e.end_positive},
                       {"disagreement", e.disagreement}});
  }
  return {{"length", r.length},
          {"positive_chains", r.positive_chains},
          {"disagreements", r.disagreements},
          {"entries", std::move(entries)}};
}

} // namespace implylp
