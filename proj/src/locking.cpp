#include "ergopt/locking.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ergopt {

namespace {

double powa(double x, double a) { return a == 1.0 ? x : std::pow(x, a); }

}  // namespace

LockingCertificate certificate(const CertificateInputs& in) {
  if (!(in.lambda > 1.0)) throw InvalidInput("expansion factor must exceed 1");
  if (!(in.K > 0.0) || !(in.delta > 0.0) || !(in.lip_f > 0.0) || !(in.gap > 0.0))
    throw InvalidInput("K, delta, lip_f, gap must be positive");
  if (!(in.p0 >= 1.0)) throw InvalidInput("orbit cardinality must be at least 1");
  if (!(in.alpha > 0.0) || in.alpha > 1.0) throw InvalidInput("alpha must be in (0,1]");
  if (in.L < 0.0) throw InvalidInput("distortion constant must be nonnegative");

  LockingCertificate c;
  c.inputs = in;
  c.r = std::min(in.gap / (8.0 * in.lip_f), in.delta);
  c.L1 = 5.0 + 2.0 * in.L;
  double la = powa(in.lambda, in.alpha);
  c.L2 = 2.0 * powa(2.0 * in.K, in.alpha) * la / (la - 1.0);
  c.L3 = 1.0 + in.L + in.L * powa(2.0 * in.lip_f, in.alpha);
  double r_inv_a = powa(1.0 / c.r, in.alpha);
  double lip_a = powa(2.0 * in.lip_f, in.alpha);
  double t1 = 10.0 * c.L2 * c.L1 * r_inv_a * lip_a;
  double t2 = 2.0 * (in.p0 + c.L2 * c.L3) * c.L1 * r_inv_a * lip_a;
  c.C = std::max({1.0, t1, t2});
  return c;
}

PerturbationBudget budget(const LockingCertificate& cert, double phi_seminorm, double d_g,
                          double diam, std::optional<double> theta_lock) {
  if (d_g < 0.0) throw InvalidInput("d_g must be nonnegative");
  if (phi_seminorm < 0.0) throw InvalidInput("seminorm must be nonnegative");
  const double a = cert.inputs.alpha;
  double d_half = d_g == 0.0 ? 0.0 : std::pow(d_g, 0.5 * a);
  double d_a = d_g == 0.0 ? 0.0 : powa(d_g, a);
  PerturbationBudget b;
  b.xi_seminorm_max = 5.0 * cert.C * phi_seminorm * d_half;
  b.xi_sup_max = phi_seminorm * d_a;
  b.penalty_scale = 2.0 * cert.C * phi_seminorm * d_half;
  b.d_g_max = std::min(cert.inputs.gap / 4.0, 1.0);
  if (theta_lock) {
    if (!(*theta_lock > 0.0)) throw InvalidInput("theta_lock must be positive");
    double t = 9.0 * cert.C * (1.0 + diam) * phi_seminorm / *theta_lock;
    if (t > 0.0) b.d_g_max = std::min(b.d_g_max, 1.0 / (t * t));
  }
  return b;
}

DefectCheckInput defect_inputs(const LockingCertificate& cert, double phi_seminorm, double d_g,
                               double Q, const PeriodicOrbit& orbit_g, const Potential& phi,
                               const Potential* xi) {
  if (d_g < 0.0) throw InvalidInput("d_g must be nonnegative");
  if (orbit_g.points.empty()) throw InvalidInput("empty orbit");
  const double a = cert.inputs.alpha;
  DefectCheckInput in;
  in.alpha = a;
  in.Q = Q;
  double d_a = d_g == 0.0 ? 0.0 : powa(d_g, a);
  in.tau_pert = (3.0 + 2.0 * cert.inputs.L) * phi_seminorm * d_a;
  double s = 0.0;
  for (double x : orbit_g.points)
    s += eval_potential(phi, x) - Q + (xi ? eval_potential(*xi, x) : 0.0);
  in.eta = s / static_cast<double>(orbit_g.points.size());
  in.coeff = cert.C * phi_seminorm * (d_g == 0.0 ? 0.0 : std::pow(d_g, 0.5 * a));
  if (in.coeff > 0.0) {
    if (!(in.eta < in.tau_pert))
      throw InvalidInput("orbit defect eta=" + g17(in.eta) +
                         " is not below tau=" + g17(in.tau_pert));
    double ratio = (in.tau_pert - in.eta) / in.coeff;
    in.rho = a == 1.0 ? ratio : std::pow(ratio, 1.0 / a);
  }
  std::vector<Potential> parts{phi, Potential::constant(-Q, phi.metric, phi.dom)};
  if (xi) parts.push_back(*xi);
  if (in.coeff > 0.0)
    parts.push_back(distance_potential(orbit_g.points, a, in.coeff, phi.metric, phi.dom));
  in.psi_g = Potential::sum(std::move(parts));
  return in;
}

std::pair<double, bool> defect_check(const MapSpec& map_g, const SubAction& sub,
                                     const PeriodicOrbit& orbit_g, const DefectCheckInput& in,
                                     double x0, int n_steps, double tol_numeric) {
  if (n_steps < 1) throw InvalidInput("n_steps must be positive");
  if (orbit_g.points.empty()) throw InvalidInput("empty orbit");
  GridFn u = sub.as_grid_fn();
  double x = x0, s = 0.0;
  for (int i = 0; i < n_steps; ++i) {
    double fx = eval(map_g, x);
    s += eval_potential(in.psi_g, x) + u(x) - u(fx);
    x = fx;
  }
  double avg = s / n_steps;
  return {avg, avg <= in.eta + tol_numeric};
}

Potential sample_perturbation(Rng& rng, const PerturbationBudget& bud, double alpha,
                              Metric metric) {
  constexpr int kDeg = 8;
  std::vector<double> ac(kDeg), bc(kDeg);
  for (int j = 0; j < kDeg; ++j) {
    ac[j] = rng.sym();
    bc[j] = rng.sym();
  }
  double s0 = 0.0, s1 = 0.0;
  for (int j = 0; j < kDeg; ++j) {
    double h = std::hypot(ac[j], bc[j]);
    s0 += h;
    s1 += 2.0 * kPi * (j + 1) * h;
  }
  double bound_sem =
      alpha == 1.0 ? s1 : std::pow(s1, alpha) * std::pow(2.0 * s0, 1.0 - alpha);
  double scale = std::numeric_limits<double>::infinity();
  if (bound_sem > 0.0) scale = bud.xi_seminorm_max / bound_sem;
  if (s0 > 0.0) scale = std::min(scale, bud.xi_sup_max / s0);
  if (!std::isfinite(scale)) scale = 0.0;
  scale *= 0.999;  // keep strictly inside the budget ball
  for (int j = 0; j < kDeg; ++j) {
    ac[j] *= scale;
    bc[j] *= scale;
  }
  Potential xi = Potential::trig_poly(0.0, std::move(ac), std::move(bc), metric);
  xi.alpha = alpha;
  return xi;
}

LockTestResult empirical_lock_test(const MapSpec& map_g, const Potential& p,
                                   const PeriodicOrbit& expected, int max_period, int samples,
                                   const PerturbationBudget& bud, std::uint64_t seed) {
  if (samples < 1) throw InvalidInput("samples must be at least 1");
  if (expected.points.empty()) throw InvalidInput("empty orbit");
  LockTestResult res;
  res.samples = samples;
  Metric metric = map_g.metric();
  auto orbits = enumerate_periodic(map_g, max_period);
  Potential base = p;
  if (bud.penalty_scale > 0.0)
    base = Potential::sum(
        {p, distance_potential(expected.points, p.alpha, bud.penalty_scale, p.metric, p.dom)});
  int hits = 0;
  for (int i = 0; i < samples; ++i) {
    try {
      Rng rng(seed_mix(seed, static_cast<std::uint64_t>(i)));
      Potential xi = sample_perturbation(rng, bud, p.alpha, p.metric);
      Potential total = Potential::sum({base, xi});
      int idx = pick_maximizing(orbits, total);
      if (idx >= 0 && same_orbit(orbits[static_cast<size_t>(idx)], expected, metric, 1e-8)) {
        ++hits;
      } else {
        res.failures.push_back(i);
      }
    } catch (const Error& e) {
      res.failures.push_back(i);
      res.errors.push_back(std::to_string(i) + ": " + e.what());
    }
  }
  res.lock_rate = static_cast<double>(hits) / samples;
  return res;
}

ScanTable locking_scan(const std::function<MapSpec(double)>& map_at,
                       const std::function<Potential(double)>& pot_at,
                       const std::vector<double>& a_values,
                       const std::vector<double>& theta_values, int max_period) {
  if (a_values.empty() || theta_values.empty()) throw InvalidInput("empty parameter grid");
  ScanTable t;
  t.a_values = a_values;
  t.theta_values = theta_values;
  const size_t na = a_values.size(), nt = theta_values.size();
  t.cells.resize(na * nt);

  for (size_t i = 0; i < na; ++i) {
    std::vector<PeriodicOrbit> orbits;  // one enumeration per map parameter
    std::string row_error;
    try {
      orbits = enumerate_periodic(map_at(a_values[i]), max_period);
      if (orbits.empty()) row_error = "no periodic orbits found";
    } catch (const Error& e) {
      row_error = e.what();
    }
    for (size_t j = 0; j < nt; ++j) {
      ScanCell& c = t.cells[i * nt + j];
      c.a = a_values[i];
      c.theta = theta_values[j];
      if (!row_error.empty()) {
        c.error = row_error;
        continue;
      }
      try {
        Potential pot = pot_at(theta_values[j]);
        if (seminorm(pot).holder_seminorm == 0.0) {
          c.degenerate = true;  // constant potential: every orbit maximizes
          c.ok = true;
          c.avg = birkhoff_average(orbits[0], pot);
          continue;
        }
        double best = 0.0;
        int idx = pick_maximizing(orbits, pot, &best);
        const auto& o = orbits[static_cast<size_t>(idx)];
        c.period = o.period;
        c.itinerary = o.itinerary;
        c.avg = best;
        c.ok = true;
      } catch (const Error& e) {
        c.error = e.what();
      }
    }
  }

  auto cell = [&](size_t i, size_t j) -> const ScanCell& { return t.cells[i * nt + j]; };
  for (size_t i = 0; i < na; ++i)
    for (size_t j = 0; j < nt; ++j) {
      ScanCell& c = t.cells[i * nt + j];
      if (!c.ok || c.degenerate) continue;
      if (i == 0 || j == 0 || i + 1 == na || j + 1 == nt) continue;  // border cells stay unlocked
      const ScanCell* nb[4] = {&cell(i - 1, j), &cell(i + 1, j), &cell(i, j - 1),
                               &cell(i, j + 1)};
      bool all = true;
      for (const ScanCell* q : nb)
        all = all && q->ok && !q->degenerate && q->period == c.period &&
              q->itinerary == c.itinerary;
      c.locked = all;
    }

  for (size_t i = 0; i < na; ++i) {
    size_t j = 0;
    while (j < nt) {
      const ScanCell& c = cell(i, j);
      if (!c.ok || c.degenerate) {
        ++j;
        continue;
      }
      size_t k = j + 1;
      while (k < nt) {
        const ScanCell& d = cell(i, k);
        if (!d.ok || d.degenerate || d.period != c.period || d.itinerary != c.itinerary) break;
        ++k;
      }
      t.runs.push_back({a_values[i], theta_values[j], theta_values[k - 1], c.itinerary});
      j = k;
    }
  }
  return t;
}

}  // namespace ergopt
