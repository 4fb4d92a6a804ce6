#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "ergopt/common.hpp"

namespace ergopt {

enum class MapFamily {
  Doubling,
  Tent,
  Logistic,
  QuadraticReal,
  PiecewiseLinearMarkov,
  SineWave,
  PolynomialExtension,
};

// Arbitrary C^r function on an interval, exposed through its derivatives.
// df(x, 0) is the value. When the function is a polynomial, `poly` holds its
// coefficients (ascending) so extrema can be located exactly.
struct SmoothFn {
  double lo = 0.0;
  double hi = 1.0;
  int r = 1;
  std::function<double(double, int)> df;
  std::vector<double> poly;

  double operator()(double x) const { return df(x, 0); }
};

SmoothFn polynomial_fn(std::vector<double> coeffs, double lo, double hi, int r);

struct MapSpec;

// Three-piece glue: boundary polynomials left of `a` and right of `b`, the
// original map in between. `left_taylor[i]` is f^(i)(a)/i!; the top-degree
// coefficient carries the free parameter with the side-dependent sign.
struct ExtensionPieces {
  std::vector<double> left_taylor;
  double left_k = 0.0;
  std::vector<double> right_taylor;
  double right_k = 0.0;
  double a0 = 0.0, a = 0.0, b = 1.0, b0 = 1.0;
  SmoothFn inner;
  std::shared_ptr<const MapSpec> inner_spec;  // set when the inner map is a known family
};

struct MapSpec {
  MapFamily family = MapFamily::Doubling;
  double lo = 0.0, hi = 1.0;
  int smoothness_order = 2;
  bool circle_flag = false;

  double s = 2.0;               // Tent slope
  double a = 4.0;               // Logistic parameter
  double c = 0.0;               // QuadraticReal: x^2 + c
  double mean = 0.0, amp = 0.0; // SineWave: mean + amp*sin(2*pi*x)
  std::vector<double> breaks;   // PiecewiseLinearMarkov, size m+1
  std::vector<double> values;   // value at the left end of each piece, size m
  std::vector<double> slopes;   // size m
  std::shared_ptr<const ExtensionPieces> ext;

  static MapSpec doubling();
  static MapSpec tent(double s);
  static MapSpec logistic(double a);
  static MapSpec quadratic(double c);
  static MapSpec markov(std::vector<double> breaks, std::vector<double> values,
                        std::vector<double> slopes);
  static MapSpec sine(double mean, double amp, int r = 2);
  static MapSpec extension(ExtensionPieces pieces, int r);

  Metric metric() const { return Metric{circle_flag, hi - lo}; }
  double reduce(double x) const;  // mod into [lo,hi): circle maps only
};

struct PreimageBranch {
  int id;
  double x;
};

enum class EstimateMethod { AnalyticDerivativeBound, GridInfimum };

struct HyperbolicEstimate {
  double K = 1.0;
  double delta = 0.0;
  double lambda = 0.0;
  double lip = 0.0;
  std::vector<Interval> region;
  EstimateMethod method = EstimateMethod::AnalyticDerivativeBound;
};

double eval(const MapSpec& m, double x);
double derivative(const MapSpec& m, double x, int order);
std::vector<PreimageBranch> inverse_branches(const MapSpec& m, double y);
int branch_count(const MapSpec& m);
int branch_of(const MapSpec& m, double x);
// Preimage of y under one monotone branch, or nullopt when y misses its image.
std::optional<double> branch_preimage(const MapSpec& m, int branch, double y);

HyperbolicEstimate estimate_hyperbolic(const MapSpec& m, const std::vector<Interval>& region,
                                       int grid_n);
HyperbolicEstimate estimate_hyperbolic(const MapSpec& m, int grid_n = 4096);

// Upper bound on sup |f'| over the whole domain (exact for closed forms).
double lipschitz_constant(const MapSpec& m);

// View a smooth family as a SmoothFn (throws NonDifferentiable for piecewise
// families off their own pieces).
SmoothFn to_smooth(const MapSpec& m);

}  // namespace ergopt
