#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "ergopt/dynamics.hpp"
#include "ergopt/orbits.hpp"
#include "ergopt/potentials.hpp"

namespace ergopt {

struct SubAction {
  std::vector<double> grid;
  std::vector<double> u;
  double alpha = 1.0;
  double Q_used = 0.0;
  double defect = 0.0;           // max over nodes of phi + u - u(f(.)) - Q_used
  std::vector<int> contact_set;  // nodes with defect within contact_tol of 0
  double seminorm_ratio = 0.0;
  double contact_tol = 0.0;
  bool circle = false;
  double period = 1.0;

  GridFn as_grid_fn() const;
};

GridFn lax_oleinik_step(const GridFn& u, const MapSpec& m, const Potential& p, double Q,
                        double C_pen, double alpha);

SubAction compute_subaction(const MapSpec& m, const Potential& p, int n, double tol,
                            int max_iter, std::optional<double> Q_hint = std::nullopt,
                            std::optional<double> C_pen = std::nullopt);

std::pair<double, std::vector<int>> mane_defect(const SubAction& s, const MapSpec& m,
                                                const Potential& p);

// Telescoping sums of (phi - Q) along the orbit, one value per orbit point.
std::vector<double> attracting_subaction(const PeriodicOrbit& orbit, const Potential& p,
                                         double Q);

}  // namespace ergopt
