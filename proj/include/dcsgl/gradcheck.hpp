#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dcsgl/graph.hpp"
#include "dcsgl/tensor.hpp"

namespace dcsgl {

/// |a - n| / max(|a|, |n|, 1e-3). The floor keeps round-off on near-zero
/// gradients from reading as a large relative error.
double relative_error(double analytic, double numeric);

using ScalarFn = std::function<Tensor(Tape&, const std::vector<Tensor>&)>;

struct GradCheckEntry {
  std::string name;
  int checked = 0;  // input entries compared
  double max_rel_error = 0.0;
};

/// Reverse-mode gradient of `f` against central differences for every entry
/// of every input.
GradCheckEntry check_gradients(const std::string& name, const ScalarFn& f, const std::vector<Matrix>& inputs,
                               double eps);

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double max_rel_error() const;
};

/// Every primitive on random inputs plus L_a and L_g of a default-sized model
/// on a five-node graph (two junctions, donors frozen at the unperturbed values).
GradCheckReport run_gradcheck(std::uint64_t seed = 0, double eps = 1e-5);

/// Triangle base {0,1,2} joined at 2-3 to the motif edge 3-4, random features.
Graph gradcheck_graph(std::uint64_t seed, int feature_dim = 4);

}  // namespace dcsgl
