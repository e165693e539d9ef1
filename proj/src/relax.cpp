#include "implylp/relax.hpp"

#include "implylp/error.hpp"
#include "implylp/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace implylp {

namespace {

std::string var_name(int tag, std::size_t layer, bool pre, std::size_t i) {
  return "n" + std::to_string(tag) + "_l" + std::to_string(layer) + (pre ? "_pre_" : "_post_") +
         std::to_string(i);
}

std::string row_name(int tag, std::size_t layer, const char *what, std::size_t i) {
  return "n" + std::to_string(tag) + "_l" + std::to_string(layer) + "_" + what + "_" +
         std::to_string(i);
}

double widen(double v, double rel) { return rel * (1.0 + std::abs(v)); }

void add_relu_rows(LinearProgram &lp, std::size_t pre, std::size_t post, double pre_low,
                   double pre_high, int tag, std::size_t k, std::size_t i,
                   const RelaxOptions &opts, NetworkBlock &block) {
  NeuronPhase phase = classify_phase(pre_low, pre_high, opts.phase_slack);
  const double lo = pre_low - opts.phase_slack;
  const double hi = pre_high + opts.phase_slack;
  if (phase == NeuronPhase::Unstable && !(pre_high > pre_low)) // zero width: fixed by sign
    phase = pre_high >= 0.0 ? NeuronPhase::Active : NeuronPhase::Inactive;
  if (phase == NeuronPhase::Unstable && opts.fault == FaultInjection::UnstableAsInactive)
    phase = NeuronPhase::Inactive;

  switch (phase) {
  case NeuronPhase::Active:
    ++block.active;
    lp.add_row({post, pre}, {1.0, -1.0}, Relation::Equal, 0.0, row_name(tag, k, "active", i));
    break;
  case NeuronPhase::Inactive:
    ++block.inactive;
    lp.add_row({post}, {1.0}, Relation::Equal, 0.0, row_name(tag, k, "inactive", i));
    break;
  case NeuronPhase::Unstable: {
    ++block.unstable;
    // post <= hi (pre - lo) / (hi - lo)
    const double slope = hi / (hi - lo);
    lp.add_row({post, pre}, {1.0, -slope}, Relation::LessEq, -slope * lo,
               row_name(tag, k, "tri_upper", i));
    // post >= pre
    lp.add_row({pre, post}, {1.0, -1.0}, Relation::LessEq, 0.0, row_name(tag, k, "tri_pre", i));
    // post >= 0
    lp.add_row({post}, {-1.0}, Relation::LessEq, 0.0, row_name(tag, k, "tri_zero", i));
    break;
  }
  }
}

} // namespace

const char *to_string(ProblemVariant variant) {
  switch (variant) {
  case ProblemVariant::JointMargin:
    return "margin";
  case ProblemVariant::JointPureImplication:
    return "pure";
  case ProblemVariant::IndependentNet1:
    return "independent1";
  case ProblemVariant::IndependentNet2:
    return "independent2";
  }
  return "?";
}

ProblemVariant variant_from_string(const std::string &name) {
  for (auto v : {ProblemVariant::JointMargin, ProblemVariant::JointPureImplication,
                 ProblemVariant::IndependentNet1, ProblemVariant::IndependentNet2})
    if (name == to_string(v))
      return v;
  throw ArgumentError("unknown problem variant '" + name + "'");
}

std::vector<std::size_t> add_input_block(LinearProgram &lp, const Box &box) {
  std::vector<std::size_t> cols(box.size());
  for (std::size_t i = 0; i < box.size(); ++i)
    cols[i] = lp.add_variable(box.low[i], box.high[i], "in_" + std::to_string(i));
  return cols;
}

NetworkBlock add_network_block(LinearProgram &lp, const Network &net, const BoundsMap &bounds,
                               std::span<const std::size_t> inputs, int tag,
                               std::size_t num_layers, const RelaxOptions &opts) {
  if (inputs.size() != net.input_size())
    throw ShapeError("input block does not match network '" + net.name() + "'");
  if (bounds.layers.size() < std::min(num_layers, net.num_layers()))
    throw ArgumentError("bounds do not cover the requested layers");
  num_layers = std::min(num_layers, net.num_layers());

  NetworkBlock block;
  block.layer_vars.reserve(num_layers);
  std::vector<std::size_t> prev(inputs.begin(), inputs.end());
  for (std::size_t k = 0; k < num_layers; ++k) {
    const LayerSpec &layer = net.layer(k);
    const LayerBounds &lb = bounds.layers[k];
    const std::size_t n = flat_size(layer.output_shape);
    const bool linear = layer.is_linear();

    std::vector<std::size_t> cur(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double lo = lb.post_low[i] - widen(lb.post_low[i], opts.bound_slack);
      const double hi = lb.post_high[i] + widen(lb.post_high[i], opts.bound_slack);
      cur[i] = lp.add_variable(lo, hi, var_name(tag, k, linear, i));
    }

    switch (layer.kind) {
    case LayerKind::Relu:
      for (std::size_t i = 0; i < n; ++i)
        add_relu_rows(lp, prev[i], cur[i], lb.pre_low[i], lb.pre_high[i], tag, k, i, opts, block);
      break;
    case LayerKind::MaxPool2D:
      for (std::size_t o = 0; o < n; ++o) {
        const auto window = pool_window(layer, o);
        std::vector<std::size_t> idx{cur[o]};
        std::vector<double> coef{1.0};
        double sum_low = 0.0, max_low = -std::numeric_limits<double>::infinity();
        for (std::size_t w = 0; w < window.size(); ++w) {
          const std::size_t in = prev[window[w]];
          // post >= in_j
          lp.add_row({in, cur[o]}, {1.0, -1.0}, Relation::LessEq, 0.0,
                     row_name(tag, k, ("pool_ge" + std::to_string(w)).c_str(), o));
          const double low = lb.pre_low[window[w]] - opts.phase_slack;
          sum_low += low;
          max_low = std::max(max_low, low);
          idx.push_back(in);
          coef.push_back(-1.0);
        }
        // sum_j in_j >= post + sum_j low_j - max_j low_j
        lp.add_row(std::move(idx), std::move(coef), Relation::LessEq, max_low - sum_low,
                   row_name(tag, k, "pool_sum", o));
      }
      break;
    default: {
      const LinearMap map = linear_map(layer);
      for (std::size_t r = 0; r < map.rows; ++r) {
        std::vector<std::size_t> idx{cur[r]};
        std::vector<double> coef{1.0};
        for (std::size_t e = map.row_start[r]; e < map.row_start[r + 1]; ++e) {
          if (map.value[e] == 0.0)
            continue;
          idx.push_back(prev[map.col_index[e]]);
          coef.push_back(-map.value[e]);
        }
        lp.add_row(std::move(idx), std::move(coef), Relation::Equal, map.bias[r],
                   row_name(tag, k, "affine", r));
      }
      break;
    }
    }
    block.layer_vars.push_back(cur);
    prev = std::move(cur);
  }
  return block;
}

std::size_t JointProgram::column(const VarRef &ref) const {
  if (ref.owner == VarOwner::SharedInput)
    return inputs.at(ref.neuron);
  const bool first = ref.owner == VarOwner::Net1;
  if ((first && !has_net1) || (!first && !has_net2))
    throw ArgumentError("network block is not part of this program");
  const NetworkBlock &block = first ? net1 : net2;
  // Pre on a Relu / MaxPool layer is the layer input.
  if (ref.stage == Stage::Pre && ref.layer > 0 && pre_is_input.at(first ? 0 : 1).at(ref.layer))
    return block.layer_vars.at(ref.layer - 1).at(ref.neuron);
  if (ref.stage == Stage::Pre && ref.layer == 0 && pre_is_input.at(first ? 0 : 1).at(0))
    return inputs.at(ref.neuron);
  return block.layer_vars.at(ref.layer).at(ref.neuron);
}

JointProgram build_joint_lp(const Network &net1, const Network &net2, const InputRegion &region,
                            const ClassPair &pair, const BoundsMap &bounds1,
                            const BoundsMap &bounds2, ProblemVariant variant,
                            const RelaxOptions &opts) {
  require_compatible(net1, net2);
  validate_pair(pair, net1.output_size());
  const Box box = region_box(region);
  if (box.size() != net1.input_size())
    throw ShapeError("region dimension does not match the networks");
  for (const BoundsMap *b : {&bounds1, &bounds2})
    if (b->input.low != box.low || b->input.high != box.high)
      throw ArgumentError("bounds were computed for a different region");

  JointProgram prog;
  prog.variant = variant;
  prog.inputs = add_input_block(prog.lp, box);
  prog.has_net1 = variant != ProblemVariant::IndependentNet2;
  prog.has_net2 = variant != ProblemVariant::IndependentNet1;
  for (const Network *net : {&net1, &net2}) {
    std::vector<bool> flags;
    for (const auto &layer : net->layers())
      flags.push_back(!layer.is_linear());
    prog.pre_is_input.push_back(std::move(flags));
  }
  if (prog.has_net1)
    prog.net1 = add_network_block(prog.lp, net1, bounds1, prog.inputs, 1, net1.num_layers(), opts);
  if (prog.has_net2)
    prog.net2 = add_network_block(prog.lp, net2, bounds2, prog.inputs, 2, net2.num_layers(), opts);

  auto &obj = prog.lp.objective;
  if (prog.has_net1) {
    const auto &x = prog.net1.layer_vars.back();
    obj[x[pair.i]] += 1.0;
    obj[x[pair.j]] -= 1.0;
  }
  if (prog.has_net2) {
    const auto &y = prog.net2.layer_vars.back();
    if (variant == ProblemVariant::JointPureImplication) {
      // y_i - y_j >= margin
      prog.lp.add_row({y[pair.i], y[pair.j]}, {-1.0, 1.0}, Relation::LessEq, -opts.pure_margin,
                      "pure_margin");
    } else {
      obj[y[pair.i]] -= 1.0;
      obj[y[pair.j]] += 1.0;
    }
  }
  return prog;
}

std::string format_lp(const LinearProgram &lp, const std::string &title) {
  auto name = [&lp](std::size_t j) {
    return lp.var_name[j].empty() ? "x" + std::to_string(j) : lp.var_name[j];
  };
  auto num = [](double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  auto term = [&](double c, std::size_t j) {
    return (c < 0.0 ? " - " : " + ") + num(std::abs(c)) + " " + name(j);
  };

  std::ostringstream os;
  os << "\\ " << title << "\n";
  os << "Minimize\n obj:";
  bool any = false;
  for (std::size_t j = 0; j < lp.num_vars(); ++j) {
    if (lp.objective[j] == 0.0)
      continue;
    os << term(lp.objective[j], j);
    any = true;
  }
  if (!any && lp.num_vars() > 0)
    os << " 0 " << name(0);
  os << "\nSubject To\n";
  for (std::size_t r = 0; r < lp.num_rows(); ++r) {
    const LpRow &row = lp.rows[r];
    os << ' ' << (row.name.empty() ? "r" + std::to_string(r) : row.name) << ':';
    if (row.index.empty())
      os << " 0 " << name(0);
    for (std::size_t e = 0; e < row.index.size(); ++e)
      os << term(row.coef[e], row.index[e]);
    os << (row.relation == Relation::Equal ? " = " : " <= ") << num(row.rhs) << "\n";
  }
  os << "Bounds\n";
  for (std::size_t j = 0; j < lp.num_vars(); ++j)
    os << ' ' << num(lp.var_low[j]) << " <= " << name(j) << " <= " << num(lp.var_high[j]) << "\n";
  os << "End\n";
  return os.str();
}

void export_lp(const LinearProgram &lp, const std::filesystem::path &path,
               const std::string &title) {
  write_text_file(path, format_lp(lp, title));
}

} // namespace implylp
