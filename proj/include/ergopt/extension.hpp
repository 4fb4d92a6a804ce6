#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ergopt/dynamics.hpp"
#include "ergopt/potentials.hpp"

namespace ergopt {

enum class Side { Left, Right };

// Degree-(r+1) polynomial matching the full jet of a map at one domain
// endpoint, with a free top-degree coefficient: the left form carries the
// (-1)^{r+1} sign so that both sides are monotone increasing in k.
struct BoundaryPolynomial {
  Side side = Side::Right;
  double anchor = 0.0;
  int degree = 2;              // r + 1
  std::vector<double> taylor;  // f^{(i)}(anchor)/i!, i = 0..r
  double k = 0.0;

  std::vector<double> coeffs() const;  // ascending in (x - anchor)
  double eval(double x, int order = 0) const;
};

BoundaryPolynomial boundary_polynomial(const MapSpec& f, Side side, double k);
BoundaryPolynomial boundary_polynomial(const SmoothFn& f, Side side, double k);

// C^r norm: max over derivative orders 0..r of the sup norm over [lo,hi];
// exact for polynomials, dense-grid bound otherwise.
double cr_norm(const SmoothFn& f);

double kw_value(int r, double norm_f, double w);
double kminus_value(int r, double norm_f, double y);
// Norm-independent bound on the extension/original C^r norm ratio, from the
// per-order coefficient estimates at collar widths y_left and y_right.
double dr_bound(int r, double y_left, double y_right);

struct ClaimParameters {
  double k_star = 0.0;
  double cut = 0.0;     // a1 (Left) or b1 (Right)
  double w = 0.0;       // accepted scan scale
  double target = 0.0;  // level met at the cut
  double tau = 0.0;
};

ClaimParameters claim_parameters(const MapSpec& f, Side side);

struct ExtensionResult {
  double a0 = 0.0, a1 = 0.0, b1 = 0.0, b0 = 0.0;
  MapSpec F;
  double tau_ext = 0.0;
  double theta = 2.0;
  int case_id = 0;  // sign pattern of (f'(a), f'(b)): 1 (+,+), 2 (-,+), 3 (+,-), 4 (-,-)
  std::string endpoint_a0, endpoint_b0;  // image of each new endpoint: "a0" or "b0"
  double k_left = 0.0, k_right = 0.0;
};

ExtensionResult find_hyperbolic_extension(const MapSpec& f);

std::pair<MapSpec, double> zero_boundary_extension(const SmoothFn& f, double a0, double b0);

struct VerificationReport {
  double kappa = 0.0;       // min{theta/2, a - a0, b0 - b}
  double eta_radius = 0.0;  // min{tau, (theta-1)/2}
  bool endpoints_ok = false;

  bool escape_ok = false;
  double escape_bound = 0.0;
  int max_entry_time = 0;
  std::vector<int> entry_times;  // -1: never entered within the cap

  bool expansion_ok = false;
  double min_outer_slope = 0.0;

  bool phi_checked = false;
  bool hypothesis_holds = false;  // phi(a0), phi(b0) < Q
  bool argmax_inside = false;
  double Q = 0.0, phi_a0 = 0.0, phi_b0 = 0.0;
};

VerificationReport verify_extension(const ExtensionResult& res, const MapSpec& f,
                                    const Potential* phi = nullptr, int max_period = 8);

// Finite-difference weights for the given derivative order at x0 over
// arbitrary nodes (Fornberg's recurrence).
std::vector<double> fd_weights(int order, const std::vector<double>& nodes, double x0);

}  // namespace ergopt
