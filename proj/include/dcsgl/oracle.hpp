#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dcsgl/graph.hpp"
#include "dcsgl/tensor.hpp"

namespace dcsgl {

enum class OracleDomain { Junction, Marker };
enum class InterventionMode { Interchange, RandomNegative };

/// Distribution over {factor present, factor absent}.
using Target = std::array<double, 2>;

/// Hand-built high-level model of the diminutive causal structure together
/// with its K intervened variants.
///
/// JUNCTION: the factor is "these nodes are junctions between base and motif".
/// The selector picks junction nodes and the oracle says present with
/// probability 1. Intervention gamma replaces ceil(rho * |sel|) of the
/// selected rows with layer features of uniformly drawn non-junction nodes of
/// the same graph, and the oracle answers 1 - rho_eff.
///
/// MARKER: the factor is the contrast marker. The selector picks the marker
/// and everything after it; graphs without a marker are skipped. Intervention
/// gamma deletes a suffix-first fraction of the span and the oracle answers
/// 1 - fraction deleted. When the whole span is deleted the pool falls back
/// to the surviving prefix of the path.
///
/// RANDOM_NEGATIVE replaces every selected row with a random node's row and
/// answers "absent".
///
/// The oracle never looks at the graph label.
struct CausalOracle {
  OracleDomain domain = OracleDomain::Junction;
  int K = 3;
  InterventionMode mode = InterventionMode::Interchange;
  std::uint64_t seed = 0;
  double replace_fraction = 0.5;
  /// Deleted span fraction per intervention; empty means (K - gamma) / K.
  std::vector<double> marker_fractions;
};

struct BaseSelection {
  std::vector<int> indices;
  Target target{1.0, 0.0};
};

struct InterventionPlan {
  int gamma = 0;
  std::string description;
  std::vector<RowSource> rows;
  Target target{0.5, 0.5};
  int perturbed = 0;  // rows substituted or deleted
  int selected = 0;   // size of the base selection
};

struct SelectionPlan {
  BaseSelection base;
  std::vector<InterventionPlan> interventions;
};

/// nullopt when the sample does not take part in the alignment losses.
std::optional<BaseSelection> oracle_base(const CausalOracle& oracle, const Graph& g);

/// K intervention recipes; `round` decorrelates draws between epochs.
/// Interventions that cannot be formed (no donor rows) are omitted.
std::vector<InterventionPlan> oracle_interventions(const CausalOracle& oracle, const Graph& g,
                                                   const BaseSelection& base, std::uint64_t round);

std::optional<SelectionPlan> make_plan(const CausalOracle& oracle, const Graph& g, std::uint64_t round);

std::vector<RowSource> plain_recipe(std::span<const int> indices);

/// Recipe rows shifted by `offset`, for graphs packed into a batch.
std::vector<RowSource> offset_recipe(std::span<const RowSource> recipe, int offset);

/// Gathers recipe rows from tapped layer features; substituted rows are constants.
Tensor apply_selection(const Tensor& tapped, std::span<const RowSource> recipe, const Matrix* frozen = nullptr);
Matrix apply_selection(const Matrix& tapped, std::span<const RowSource> recipe);

}  // namespace dcsgl
