#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "ergopt/dynamics.hpp"
#include "ergopt/potentials.hpp"

namespace ergopt {

// Uniform-cell discretization: node i covers [lo + i*w, lo + (i+1)*w), edges
// follow the inflated image of the cell center, weight = potential at the
// source center.
struct TransferGraph {
  int n = 0;
  double lo = 0.0;
  double cell_width = 0.0;
  double inflation = 0.0;
  bool circle = false;
  std::vector<double> weight;   // per source node
  std::vector<int> offsets;     // CSR out-edge lists, size n+1
  std::vector<int> targets;
};

struct CycleMeanResult {
  double value = 0.0;
  std::vector<int> cycle;          // empty unless requested and small enough
  std::vector<double> certificate; // D_k at the arg-max node, k = 0..n_scc
};

TransferGraph build_transfer_graph(const MapSpec& m, const Potential& p, int n);
CycleMeanResult karp_max_mean_cycle(const TransferGraph& g, bool want_cycle = true);
std::pair<double, double> oracle_Q(const MapSpec& m, const Potential& p, int n);

}  // namespace ergopt
