#include "dcsgl/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dcsgl/rng.hpp"

namespace dcsgl {
namespace {

// ceil with a guard against 0.5 * 4 landing at 2.0000000000000004
int ceil_count(double fraction, int n) {
  int k = static_cast<int>(std::ceil(fraction * n - 1e-9));
  return std::clamp(k, 0, n);
}

Target absent_fraction(int perturbed, int total) {
  const double rho = total > 0 ? static_cast<double>(perturbed) / static_cast<double>(total) : 0.0;
  return {1.0 - rho, rho};
}

std::optional<InterventionPlan> interchange_junction(const CausalOracle& o, const Graph& g, const BaseSelection& base,
                                                     int gamma, Rng& rng) {
  const int sel = static_cast<int>(base.indices.size());
  std::vector<std::uint8_t> in_sel(g.num_nodes, 0);
  for (int v : base.indices) in_sel[v] = 1;
  std::vector<int> donors;
  for (int v = 0; v < g.num_nodes; ++v)
    if (!in_sel[v]) donors.push_back(v);
  if (donors.empty()) return std::nullopt;
  const int replace = ceil_count(o.replace_fraction, sel);
  std::vector<int> positions(sel);
  for (int i = 0; i < sel; ++i) positions[i] = i;
  for (int i = 0; i < replace; ++i) std::swap(positions[i], positions[i + uniform_index(rng, sel - i)]);
  InterventionPlan p;
  p.gamma = gamma;
  p.selected = sel;
  p.perturbed = replace;
  p.rows = plain_recipe(base.indices);
  for (int i = 0; i < replace; ++i) p.rows[positions[i]] = {donors[uniform_index(rng, static_cast<int>(donors.size()))], true};
  p.target = absent_fraction(replace, sel);
  p.description = "replace " + std::to_string(replace) + "/" + std::to_string(sel) + " junction rows";
  return p;
}

std::optional<InterventionPlan> delete_marker_suffix(const CausalOracle& o, const Graph& g, const BaseSelection& base,
                                                     int gamma) {
  const int span = static_cast<int>(base.indices.size());
  const double frac = o.marker_fractions.empty()
                          ? static_cast<double>(o.K - gamma) / static_cast<double>(o.K)
                          : o.marker_fractions[static_cast<std::size_t>(gamma) % o.marker_fractions.size()];
  const int removed = ceil_count(frac, span);
  InterventionPlan p;
  p.gamma = gamma;
  p.selected = span;
  p.perturbed = removed;
  p.target = absent_fraction(removed, span);
  std::vector<int> keep(base.indices.begin(), base.indices.end() - removed);
  if (keep.empty()) {
    std::vector<std::uint8_t> in_span(g.num_nodes, 0);
    for (int v : base.indices) in_span[v] = 1;
    for (int v = 0; v < g.num_nodes; ++v)
      if (!in_span[v]) keep.push_back(v);
    if (keep.empty()) return std::nullopt;
  }
  p.rows = plain_recipe(keep);
  p.description = "delete " + std::to_string(removed) + "/" + std::to_string(span) + " span rows";
  return p;
}

InterventionPlan random_negative(const Graph& g, const BaseSelection& base, int gamma, Rng& rng) {
  InterventionPlan p;
  p.gamma = gamma;
  p.selected = static_cast<int>(base.indices.size());
  p.perturbed = p.selected;
  for (int i = 0; i < p.selected; ++i) p.rows.push_back({uniform_index(rng, g.num_nodes), true});
  p.target = {0.0, 1.0};
  p.description = "random negative of " + std::to_string(p.selected) + " rows";
  return p;
}

}  // namespace

std::optional<BaseSelection> oracle_base(const CausalOracle& oracle, const Graph& g) {
  BaseSelection b;
  if (oracle.domain == OracleDomain::Junction) {
    if (g.junction.size() != static_cast<std::size_t>(g.num_nodes))
      throw std::invalid_argument("oracle_base: junction mask not populated");
    b.indices = g.junction_nodes();
  } else if (g.marker_span) {
    b.indices = *g.marker_span;
  }
  if (b.indices.empty()) return std::nullopt;
  b.target = {1.0, 0.0};
  return b;
}

std::vector<InterventionPlan> oracle_interventions(const CausalOracle& oracle, const Graph& g,
                                                   const BaseSelection& base, std::uint64_t round) {
  if (base.indices.empty()) throw std::invalid_argument("oracle_interventions: empty base selection");
  if (oracle.K < 0) throw std::invalid_argument("oracle_interventions: K must be >= 0");
  std::vector<InterventionPlan> out;
  for (int gamma = 0; gamma < oracle.K; ++gamma) {
    Rng rng(derive_seed(oracle.seed, {static_cast<std::uint64_t>(g.id), round, static_cast<std::uint64_t>(gamma)}));
    std::optional<InterventionPlan> p;
    if (oracle.mode == InterventionMode::RandomNegative)
      p = random_negative(g, base, gamma, rng);
    else if (oracle.domain == OracleDomain::Junction)
      p = interchange_junction(oracle, g, base, gamma, rng);
    else
      p = delete_marker_suffix(oracle, g, base, gamma);
    if (p) out.push_back(std::move(*p));
  }
  return out;
}

std::optional<SelectionPlan> make_plan(const CausalOracle& oracle, const Graph& g, std::uint64_t round) {
  auto base = oracle_base(oracle, g);
  if (!base) return std::nullopt;
  SelectionPlan plan;
  plan.interventions = oracle_interventions(oracle, g, *base, round);
  plan.base = std::move(*base);
  return plan;
}

std::vector<RowSource> plain_recipe(std::span<const int> indices) {
  std::vector<RowSource> out;
  out.reserve(indices.size());
  for (int i : indices) out.push_back({i, false});
  return out;
}

std::vector<RowSource> offset_recipe(std::span<const RowSource> recipe, int offset) {
  std::vector<RowSource> out(recipe.begin(), recipe.end());
  for (auto& r : out) r.index += offset;
  return out;
}

Tensor apply_selection(const Tensor& tapped, std::span<const RowSource> recipe, const Matrix* frozen) {
  return ad::select_rows(tapped, recipe, frozen);
}

Matrix apply_selection(const Matrix& tapped, std::span<const RowSource> recipe) {
  Matrix out(static_cast<Eigen::Index>(recipe.size()), tapped.cols());
  for (std::size_t r = 0; r < recipe.size(); ++r) {
    if (recipe[r].index < 0 || recipe[r].index >= tapped.rows())
      throw std::out_of_range("apply_selection: row index " + std::to_string(recipe[r].index) + " out of range");
    out.row(static_cast<Eigen::Index>(r)) = tapped.row(recipe[r].index);
  }
  return out;
}

}  // namespace dcsgl
