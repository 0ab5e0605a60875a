#include "dcsgl/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dcsgl/rng.hpp"

namespace dcsgl {
namespace {

void link(Shape& s, int a, int b) { s.edges.push_back({std::min(a, b), std::max(a, b)}); }

Shape cycle(int n) {
  Shape s{n, {}};
  for (int i = 0; i < n; ++i) link(s, i, (i + 1) % n);
  return s;
}

Shape tree(int n) {
  Shape s{n, {}};
  for (int i = 1; i < n; ++i) link(s, i, (i - 1) / 2);
  return s;
}

Shape ladder(int n) {
  const int rungs = std::max(2, n / 2);
  Shape s{2 * rungs, {}};
  for (int r = 0; r < rungs; ++r) {
    link(s, 2 * r, 2 * r + 1);
    if (r + 1 < rungs) {
      link(s, 2 * r, 2 * r + 2);
      link(s, 2 * r + 1, 2 * r + 3);
    }
  }
  return s;
}

Shape wheel(int n) {
  const int rim = std::max(3, n - 1);
  Shape s{rim + 1, {}};
  for (int i = 0; i < rim; ++i) {
    link(s, i, (i + 1) % rim);
    link(s, i, rim);
  }
  return s;
}

Shape grid(int n) {
  const int r = std::max(2, static_cast<int>(std::floor(std::sqrt(static_cast<double>(n)))));
  const int c = std::max(2, static_cast<int>(std::lround(static_cast<double>(n) / r)));
  Shape s{r * c, {}};
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) {
      if (j + 1 < c) link(s, i * c + j, i * c + j + 1);
      if (i + 1 < r) link(s, i * c + j, (i + 1) * c + j);
    }
  return s;
}

Shape barbell(int n) {
  const int k = std::max(3, n / 3);
  const int path = std::max(0, n - 2 * k);
  Shape s{2 * k + path, {}};
  auto clique = [&](int off) {
    for (int i = 0; i < k; ++i)
      for (int j = i + 1; j < k; ++j) link(s, off + i, off + j);
  };
  clique(0);
  clique(k + path);
  int prev = k - 1;
  for (int p = 0; p < path; ++p) {
    link(s, prev, k + p);
    prev = k + p;
  }
  link(s, prev, k + path);
  return s;
}

Shape star(int n) {
  const int m = std::max(3, n);
  Shape s{m, {}};
  for (int i = 1; i < m; ++i) link(s, 0, i);
  return s;
}

Shape from_edges(int n, std::initializer_list<std::pair<int, int>> es) {
  Shape s{n, {}};
  for (auto [a, b] : es) link(s, a, b);
  return s;
}

// Generated graph labels and the chosen base class for one motif graph.
struct MotifDraw {
  int motif = 0;
  int base = 0;
};

MotifDraw draw_classes(Rng& rng, std::optional<double> bias) {
  MotifDraw d;
  d.motif = uniform_index(rng, kMotifClasses);
  if (!bias) {
    d.base = uniform_index(rng, kMotifClasses);
  } else if (uniform01(rng) < *bias) {
    d.base = d.motif;
  } else {
    d.base = (d.motif + 1 + uniform_index(rng, kMotifClasses - 1)) % kMotifClasses;
  }
  return d;
}

struct SplitPlan {
  int train = 0, val = 0, test = 0;
};

SplitPlan plan_splits(int count) {
  SplitPlan p;
  p.train = count * 2 / 3;
  p.val = (count - p.train) / 2;
  p.test = count - p.train - p.val;
  return p;
}

void fill_splits(Dataset& ds, const SplitPlan& p) {
  for (int i = 0; i < p.train; ++i) ds.splits.train.push_back(i);
  for (int i = 0; i < p.val; ++i) ds.splits.val.push_back(p.train + i);
  for (int i = 0; i < p.test; ++i) ds.splits.test.push_back(p.train + p.val + i);
}

void random_features(Graph& g, Rng& rng) {
  g.features.resize(static_cast<std::size_t>(g.num_nodes) * g.feature_dim);
  for (auto& f : g.features) f = static_cast<float>(uniform01(rng));
}

Graph motif_graph(const GenSpec& spec, std::int64_t id, const MotifDraw& draw, Rng& rng) {
  const int size = uniform_int(rng, spec.base_min, spec.base_max);
  Shape base = make_base(spec.family, draw.base, size);
  Shape motif = make_motif(spec.family, draw.motif);
  Graph g;
  g.id = id;
  g.num_nodes = base.num_nodes + motif.num_nodes;
  g.feature_dim = spec.feature_dim;
  g.edges = base.edges;
  for (const Edge& e : motif.edges) g.edges.push_back({e.u + base.num_nodes, e.v + base.num_nodes});
  const int anchor_base = uniform_index(rng, base.num_nodes);
  const int anchor_motif = base.num_nodes + uniform_index(rng, motif.num_nodes);
  g.edges.push_back({anchor_base, anchor_motif});
  std::sort(g.edges.begin(), g.edges.end(), [](const Edge& a, const Edge& b) {
    return a.u != b.u ? a.u < b.u : a.v < b.v;
  });
  g.roles.assign(base.num_nodes, kBaseRole);
  g.roles.resize(g.num_nodes, 1);
  g.junction = annotate_junctions(g);
  g.label = draw.motif;
  if (spec.task == Task::NodeCls) {
    std::vector<int> y(base.num_nodes, 0);
    y.resize(g.num_nodes, draw.motif + 1);
    g.node_labels = std::move(y);
  }
  random_features(g, rng);
  return g;
}

}  // namespace

const char* family_name(Family f) {
  switch (f) {
    case Family::SpuriousMotif: return "spurious-motif";
    case Family::MotifVariant: return "motif-variant";
    case Family::Marker: return "marker";
  }
  return "?";
}

Family parse_family(const std::string& s) {
  if (s == "spurious-motif") return Family::SpuriousMotif;
  if (s == "motif-variant") return Family::MotifVariant;
  if (s == "marker") return Family::Marker;
  throw std::invalid_argument("unknown family '" + s + "' (expected spurious-motif, motif-variant or marker)");
}

void validate_spec(const GenSpec& spec) {
  if (spec.count <= 0) throw std::invalid_argument("count must be positive");
  if (spec.bias && !(*spec.bias >= 1.0 / 3.0 - 1e-12 && *spec.bias <= 1.0))
    throw std::invalid_argument("bias must be in [1/3,1]");
  if (spec.feature_dim < 1) throw std::invalid_argument("feature_dim must be positive");
  if (spec.base_min < 4 || spec.base_max < spec.base_min)
    throw std::invalid_argument("base sizes must satisfy 4 <= base_min <= base_max");
  if (spec.family == Family::Marker) {
    if (spec.feature_dim < 2) throw std::invalid_argument("marker graphs need feature_dim >= 2");
    if (spec.task != Task::GraphCls) throw std::invalid_argument("marker graphs support graph classification only");
  }
}

Shape make_base(Family f, int cls, int size) {
  if (f == Family::SpuriousMotif) {
    switch (cls) {
      case 0: return tree(size);
      case 1: return ladder(size);
      case 2: return wheel(size);
    }
  } else if (f == Family::MotifVariant) {
    switch (cls) {
      case 0: return grid(size);
      case 1: return barbell(size);
      case 2: return star(size);
    }
  }
  throw std::invalid_argument("no base shape for this family/class");
}

Shape make_motif(Family f, int cls) {
  if (f == Family::SpuriousMotif) {
    switch (cls) {
      case 0: return cycle(6);
      case 1: return from_edges(5, {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {0, 4}, {1, 4}});  // house
      case 2: return from_edges(6, {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {0, 2}, {3, 4}, {4, 5}});  // crane
    }
  } else if (f == Family::MotifVariant) {
    switch (cls) {
      case 0: return from_edges(4, {{0, 1}, {0, 2}, {1, 2}, {1, 3}, {2, 3}});  // diamond
      case 1: return from_edges(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}, {0, 2}});  // pentagon with chord
      case 2: return from_edges(5, {{0, 1}, {1, 2}, {2, 0}, {2, 3}, {3, 4}});  // triangle with tail
    }
  }
  throw std::invalid_argument("no motif shape for this family/class");
}

std::vector<std::uint8_t> annotate_junctions(const Graph& g) { return boundary_mask(g); }

GeneratedDataset gen_motif_dataset_with_meta(const GenSpec& spec) {
  validate_spec(spec);
  if (spec.family == Family::Marker) throw std::invalid_argument("use gen_marker_dataset for marker graphs");
  GeneratedDataset out;
  Dataset& ds = out.dataset;
  ds.name = family_name(spec.family);
  ds.bias = spec.bias;
  ds.task = spec.task;
  ds.feature_dim = spec.feature_dim;
  const SplitPlan plan = plan_splits(spec.count);
  fill_splits(ds, plan);
  ds.graphs.reserve(spec.count);
  out.base_class.reserve(spec.count);
  for (int i = 0; i < spec.count; ++i) {
    Rng rng(derive_seed(spec.seed, {static_cast<std::uint64_t>(i)}));
    // Only the training split carries the spurious base/motif correlation.
    MotifDraw draw = draw_classes(rng, i < plan.train ? spec.bias : std::nullopt);
    ds.graphs.push_back(motif_graph(spec, i, draw, rng));
    out.base_class.push_back(draw.base);
  }
  return out;
}

Dataset gen_motif_dataset(const GenSpec& spec) { return gen_motif_dataset_with_meta(spec).dataset; }

Dataset gen_mixed_node_dataset(const GenSpec& a, const GenSpec& b) {
  if (a.task != Task::NodeCls || (b.count > 0 && b.task != Task::NodeCls))
    throw std::invalid_argument("mixed datasets require node classification specs");
  if (b.count > 0 && a.feature_dim != b.feature_dim)
    throw std::invalid_argument("feature dimension mismatch: " + std::to_string(a.feature_dim) + " vs " +
                                std::to_string(b.feature_dim));
  Dataset ds = gen_motif_dataset(a);
  if (b.count == 0) return ds;
  Dataset other = gen_motif_dataset(b);
  const int shift = static_cast<int>(ds.graphs.size());
  ds.name += "+" + other.name;
  if (ds.bias != other.bias) ds.bias = std::nullopt;
  for (auto& g : other.graphs) {
    g.id += shift;
    g.label += kMotifClasses;
    for (auto& y : *g.node_labels)
      if (y > 0) y += kMotifClasses;
    ds.graphs.push_back(std::move(g));
  }
  for (int i : other.splits.train) ds.splits.train.push_back(i + shift);
  for (int i : other.splits.val) ds.splits.val.push_back(i + shift);
  for (int i : other.splits.test) ds.splits.test.push_back(i + shift);
  return ds;
}

Dataset gen_marker_dataset(const GenSpec& spec) {
  validate_spec(spec);
  if (spec.family != Family::Marker) throw std::invalid_argument("gen_marker_dataset needs the marker family");
  Dataset ds;
  ds.name = family_name(spec.family);
  ds.bias = std::nullopt;
  ds.task = Task::GraphCls;
  ds.feature_dim = spec.feature_dim;
  fill_splits(ds, plan_splits(spec.count));
  for (int i = 0; i < spec.count; ++i) {
    Rng rng(derive_seed(spec.seed, {static_cast<std::uint64_t>(i)}));
    Graph g;
    g.id = i;
    g.num_nodes = uniform_int(rng, spec.base_min, spec.base_max);
    g.feature_dim = spec.feature_dim;
    for (int v = 0; v + 1 < g.num_nodes; ++v) g.edges.push_back({v, v + 1});
    g.roles.assign(g.num_nodes, kBaseRole);
    g.junction.assign(g.num_nodes, 0);
    const bool has_marker = uniform01(rng) < 0.5;
    const int first_polarity = uniform_index(rng, 2);
    // Marker sits after at least two tokens and before at least one.
    const int marker = has_marker ? uniform_int(rng, 2, g.num_nodes - 2) : -1;
    g.features.resize(static_cast<std::size_t>(g.num_nodes) * g.feature_dim);
    for (int v = 0; v < g.num_nodes; ++v) {
      const int polarity = (has_marker && v > marker) ? 1 - first_polarity : first_polarity;
      float* row = g.features.data() + static_cast<std::size_t>(v) * g.feature_dim;
      if (v == marker) {
        row[0] = 0.5f;
        row[1] = 1.0f;
      } else {
        row[0] = static_cast<float>(polarity ? uniform(rng, 0.6, 1.0) : uniform(rng, 0.0, 0.4));
        row[1] = 0.0f;
      }
      for (int k = 2; k < g.feature_dim; ++k) row[k] = static_cast<float>(uniform01(rng));
    }
    if (has_marker) {
      std::vector<int> span;
      for (int v = marker; v < g.num_nodes; ++v) span.push_back(v);
      g.marker_span = std::move(span);
      g.label = 1 - first_polarity;
    } else {
      g.label = first_polarity;
    }
    ds.graphs.push_back(std::move(g));
  }
  return ds;
}

DatasetSummary summarize(const Dataset& ds) {
  DatasetSummary s;
  s.graphs = ds.graphs.size();
  s.train = ds.splits.train.size();
  s.val = ds.splits.val.size();
  s.test = ds.splits.test.size();
  std::size_t nodes = 0;
  for (const auto& g : ds.graphs) {
    nodes += static_cast<std::size_t>(g.num_nodes);
    if (g.marker_span) ++s.with_marker;
    auto bump = [&](int y) {
      if (y < 0) return;
      if (static_cast<std::size_t>(y) >= s.class_histogram.size()) s.class_histogram.resize(y + 1, 0);
      ++s.class_histogram[y];
    };
    if (ds.task == Task::NodeCls && g.node_labels) {
      for (int y : *g.node_labels) bump(y);
    } else {
      bump(g.label);
    }
  }
  s.avg_nodes = s.graphs ? static_cast<double>(nodes) / static_cast<double>(s.graphs) : 0.0;
  return s;
}

}  // namespace dcsgl
