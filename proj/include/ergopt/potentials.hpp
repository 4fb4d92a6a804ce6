#pragma once

#include <memory>
#include <vector>

#include "ergopt/common.hpp"
#include "ergopt/dynamics.hpp"

namespace ergopt {

enum class PotFamily { Cosine, Linear, DistanceToOrbit, GridSampled, Step, TrigPoly, Sum };

// Piecewise-linear interpolant over strictly increasing nodes; circle grids
// wrap the last segment around to the first node.
struct GridFn {
  std::vector<double> x;
  std::vector<double> v;
  bool circle = false;
  double period = 1.0;

  double operator()(double q) const;
  double max_abs() const;
  double lip() const;  // max segment slope magnitude
};

struct SeminormReport {
  double holder_seminorm = 0.0;
  double sup_norm = 0.0;
  bool exact_flag = false;
};

struct Potential {
  PotFamily family = PotFamily::Linear;
  double alpha = 1.0;
  Metric metric;
  Interval dom{0.0, 1.0};

  double theta = 0.0, amp = 1.0;    // Cosine: amp*cos(2*pi*(x-theta))
  double slope = 0.0, offset = 0.0; // Linear
  std::vector<double> orbit_points; // DistanceToOrbit: -scale*d(x,O)^alpha
  double scale = 1.0;
  GridFn grid;                      // GridSampled
  std::vector<double> step_breaks;  // Step: constant on [b_i, b_{i+1}), last closed
  std::vector<double> step_values;
  double const0 = 0.0;              // TrigPoly constant term
  std::vector<double> cosc, sinc;   // TrigPoly coefficients, j = 1..degree
  std::shared_ptr<const std::vector<Potential>> parts;  // Sum

  static Potential cosine(double theta, double amp, double alpha = 1.0,
                          Metric metric = {true, 1.0}, Interval dom = {0.0, 1.0});
  static Potential linear(double slope, double offset, Metric metric = {false, 1.0},
                          Interval dom = {0.0, 1.0});
  static Potential constant(double c, Metric metric = {false, 1.0}, Interval dom = {0.0, 1.0});
  static Potential grid_sampled(GridFn g, double alpha, Metric metric, Interval dom);
  // exact piecewise-constant weights (seminorm is +inf unless constant)
  static Potential step(std::vector<double> breaks, std::vector<double> values,
                        Metric metric = {false, 1.0});
  static Potential trig_poly(double c0, std::vector<double> cosc, std::vector<double> sinc,
                             Metric metric = {true, 1.0}, Interval dom = {0.0, 1.0});
  static Potential sum(std::vector<Potential> parts);
};

double eval_potential(const Potential& p, double x);
SeminormReport seminorm(const Potential& p);
Potential cohomologous(const Potential& p, const GridFn& u, const MapSpec& m);
Potential distance_potential(std::vector<double> orbit_points, double alpha, double scale,
                             Metric metric, Interval dom = {0.0, 1.0});

}  // namespace ergopt
