#pragma once

#include "implylp/bounds.hpp"
#include "implylp/linear_program.hpp"
#include "implylp/model.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace implylp {

enum class ProblemVariant {
  JointMargin,          // min (x_i - x_j) - (y_i - y_j)
  JointPureImplication, // min x_i - x_j  s.t.  y_i - y_j >= pure_margin
  IndependentNet1,      // min x_i - x_j, net2 omitted
  IndependentNet2,      // min -(y_i - y_j), net1 omitted
};

const char *to_string(ProblemVariant variant);
ProblemVariant variant_from_string(const std::string &name);

// Deliberate relaxation bugs for negative-control audits.
enum class FaultInjection {
  None,
  // Unstable ReLUs are encoded as post = 0 instead of the triangle. This cuts
  // true behaviour out of the relaxation, so bounds stop being sound.
  UnstableAsInactive,
};

struct RelaxOptions {
  double phase_slack = kPhaseSlack;
  // Relative widening of every LP variable box taken from a BoundsMap.
  double bound_slack = 1e-9;
  // Stands in for the strict y_i - y_j > 0 of the pure-implication variant.
  double pure_margin = 1e-6;
  FaultInjection fault = FaultInjection::None;
};

enum class VarOwner { SharedInput, Net1, Net2 };
enum class Stage { Pre, Post };

// Names one LP column. For a Relu / MaxPool layer, Stage::Pre refers to the
// layer input (the previous layer's output column); for linear layers Pre and
// Post coincide.
struct VarRef {
  VarOwner owner = VarOwner::SharedInput;
  std::size_t layer = 0;
  std::size_t neuron = 0;
  Stage stage = Stage::Post;
};

struct NetworkBlock {
  std::vector<std::vector<std::size_t>> layer_vars; // output columns per layer
  std::size_t unstable = 0;                         // triangle-relaxed ReLUs
  std::size_t active = 0;
  std::size_t inactive = 0;
};

// One column per input dimension, bounded by the box. Names in_<i>.
std::vector<std::size_t> add_input_block(LinearProgram &lp, const Box &box);

// Encodes layers [0, num_layers) of `net` on top of the given input columns.
// `tag` (1 or 2) only affects the column and row names.
NetworkBlock add_network_block(LinearProgram &lp, const Network &net, const BoundsMap &bounds,
                               std::span<const std::size_t> inputs, int tag,
                               std::size_t num_layers, const RelaxOptions &opts = {});

struct JointProgram {
  LinearProgram lp;
  ProblemVariant variant = ProblemVariant::JointMargin;
  std::vector<std::size_t> inputs;
  NetworkBlock net1;
  NetworkBlock net2;
  bool has_net1 = false;
  bool has_net2 = false;
  // Per network, per layer: the layer is a Relu / MaxPool2D whose Pre stage is
  // its input column.
  std::vector<std::vector<bool>> pre_is_input;

  std::size_t column(const VarRef &ref) const;
  std::size_t unstable() const { return net1.unstable + net2.unstable; }
};

// Relaxed program whose minimum lower-bounds the chosen objective over the
// region. bounds1 / bounds2 must come from the same region.
JointProgram build_joint_lp(const Network &net1, const Network &net2, const InputRegion &region,
                            const ClassPair &pair, const BoundsMap &bounds1,
                            const BoundsMap &bounds2, ProblemVariant variant,
                            const RelaxOptions &opts = {});

// CPLEX LP text (Minimize / Subject To / Bounds / End). Deterministic.
std::string format_lp(const LinearProgram &lp, const std::string &title = "implylp");
void export_lp(const LinearProgram &lp, const std::filesystem::path &path,
               const std::string &title = "implylp");

} // namespace implylp
