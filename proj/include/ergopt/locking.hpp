#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ergopt/orbits.hpp"
#include "ergopt/potentials.hpp"
#include "ergopt/subaction.hpp"

namespace ergopt {

struct CertificateInputs {
  double K = 1.0;
  double delta = 0.0;
  double lambda = 0.0;
  double L = 0.0;
  double lip_f = 0.0;
  double gap = 0.0;
  double p0 = 1.0;
  double alpha = 1.0;
};

struct LockingCertificate {
  CertificateInputs inputs;
  double r = 0.0, L1 = 0.0, L2 = 0.0, L3 = 0.0, C = 0.0;
};

struct PerturbationBudget {
  double xi_seminorm_max = 0.0;
  double xi_sup_max = 0.0;
  double penalty_scale = 0.0;
  double d_g_max = 0.0;
};

struct DefectCheckInput {
  double tau_pert = 0.0;
  double eta = 0.0;
  double rho = 0.0;
  double coeff = 0.0;  // distance-penalty coefficient inside psi_g
  double Q = 0.0;
  double alpha = 1.0;
  Potential psi_g;  // (phi - Q) + xi - coeff * d(., O_g)^alpha
};

LockingCertificate certificate(const CertificateInputs& in);
PerturbationBudget budget(const LockingCertificate& cert, double phi_seminorm, double d_g,
                          double diam, std::optional<double> theta_lock = std::nullopt);
DefectCheckInput defect_inputs(const LockingCertificate& cert, double phi_seminorm, double d_g,
                               double Q, const PeriodicOrbit& orbit_g, const Potential& phi,
                               const Potential* xi);
std::pair<double, bool> defect_check(const MapSpec& map_g, const SubAction& sub,
                                     const PeriodicOrbit& orbit_g, const DefectCheckInput& in,
                                     double x0, int n_steps, double tol_numeric = 1e-3);

struct LockTestResult {
  double lock_rate = 0.0;
  int samples = 0;
  std::vector<int> failures;
  std::vector<std::string> errors;
};

LockTestResult empirical_lock_test(const MapSpec& map_g, const Potential& p,
                                   const PeriodicOrbit& expected, int max_period, int samples,
                                   const PerturbationBudget& bud, std::uint64_t seed);

// Random trig-polynomial perturbation scaled into the budget; degree 8,
// coefficients from the per-sample stream.
Potential sample_perturbation(Rng& rng, const PerturbationBudget& bud, double alpha,
                              Metric metric);

struct ScanCell {
  double a = 0.0, theta = 0.0;
  int period = 0;
  std::string itinerary;
  double avg = 0.0;
  bool ok = false;
  bool locked = false;
  bool degenerate = false;
  std::string error;
};

struct ScanRun {
  double a = 0.0, theta_lo = 0.0, theta_hi = 0.0;
  std::string itinerary;
};

struct ScanTable {
  std::vector<double> a_values, theta_values;
  std::vector<ScanCell> cells;  // row-major, a index outer
  std::vector<ScanRun> runs;

  const ScanCell& at(size_t i, size_t j) const { return cells[i * theta_values.size() + j]; }
};

ScanTable locking_scan(const std::function<MapSpec(double)>& map_at,
                       const std::function<Potential(double)>& pot_at,
                       const std::vector<double>& a_values,
                       const std::vector<double>& theta_values, int max_period);

}  // namespace ergopt
