#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ergopt/dynamics.hpp"
#include "ergopt/potentials.hpp"

namespace ergopt {

struct PeriodicOrbit {
  std::vector<double> points;  // points[i+1] = f(points[i]), rotated so min point is first
  int period = 1;
  double multiplier = 0.0;     // (f^p)'(base)
  std::string itinerary;       // one branch symbol per point
  double gap = 0.0;            // min pairwise distance, +inf for fixed points

  double base() const { return points[0]; }
};

struct OrbitContinuation {
  PeriodicOrbit source;
  PeriodicOrbit target;
  double d_g = 0.0;
  bool success = false;
};

std::vector<PeriodicOrbit> enumerate_periodic(const MapSpec& m, int max_period);
double birkhoff_average(const PeriodicOrbit& o, const Potential& p);

// Index of the orbit with the largest average; ties broken by smaller period,
// then lexicographically smaller itinerary. -1 on an empty list.
int pick_maximizing(const std::vector<PeriodicOrbit>& orbits, const Potential& p,
                    double* best_avg = nullptr);
std::pair<PeriodicOrbit, double> maximizing_orbit(const MapSpec& m, const Potential& p,
                                                  int max_period);

OrbitContinuation continue_orbit(const PeriodicOrbit& source, const MapSpec& map_f,
                                 const MapSpec& map_g);

// Fills points/multiplier/itinerary/gap from a converged base point.
PeriodicOrbit orbit_from_point(const MapSpec& m, double x, int period);
bool same_orbit(const PeriodicOrbit& a, const PeriodicOrbit& b, const Metric& metric,
                double tol);

}  // namespace ergopt
