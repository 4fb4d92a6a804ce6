#include <cmath>
#include <optional>
#include <vector>

#include "doctest.h"
#include "ergopt/common.hpp"
#include "ergopt/locking.hpp"
#include "ergopt/orbits.hpp"
#include "ergopt/subaction.hpp"

using namespace ergopt;

namespace {

CertificateInputs reference_inputs() {
  CertificateInputs in;
  in.K = 1.0;
  in.delta = 0.1;
  in.lambda = 2.0;
  in.L = 3.0;
  in.lip_f = 2.0;
  in.gap = 0.5;
  in.p0 = 1.0;
  in.alpha = 1.0;
  return in;
}

}  // namespace

TEST_CASE("certificate: reference instance evaluates to exact integers") {
  LockingCertificate c = certificate(reference_inputs());
  // every step is exact dyadic arithmetic, so equality is exact
  CHECK(c.r == 0.03125);  // min{0.5/16, 0.1}
  CHECK(c.L1 == 11.0);
  CHECK(c.L2 == 8.0);
  CHECK(c.L3 == 16.0);
  // C = max{1, 10*8*11*32*4, 2*(1+128)*11*32*4}
  CHECK(c.C == 363264.0);
}

TEST_CASE("certificate: degenerate and fractional-exponent instances") {
  CertificateInputs in = reference_inputs();
  in.L = 0.0;
  LockingCertificate c = certificate(in);
  CHECK(c.L1 == 5.0);
  CHECK(c.L3 == 1.0);

  CertificateInputs half = reference_inputs();
  half.K = 2.0;
  half.lambda = 4.0;
  half.alpha = 0.5;
  // 2*(2K)^a * la/(la-1) with (2K)^a = 2, la = 2
  CHECK(certificate(half).L2 == 8.0);

  CertificateInputs tiny = reference_inputs();
  tiny.delta = 0.01;
  CHECK(certificate(tiny).r == 0.01);  // delta branch of the min
}

TEST_CASE("certificate: input validation") {
  CertificateInputs in = reference_inputs();
  in.lambda = 1.0;
  CHECK_THROWS_AS(certificate(in), InvalidInput);
  in.lambda = 0.5;
  CHECK_THROWS_AS(certificate(in), InvalidInput);

  in = reference_inputs();
  in.alpha = 1.5;
  CHECK_THROWS_AS(certificate(in), InvalidInput);
  in = reference_inputs();
  in.L = -1.0;
  CHECK_THROWS_AS(certificate(in), InvalidInput);
  in = reference_inputs();
  in.gap = 0.0;
  CHECK_THROWS_AS(certificate(in), InvalidInput);
}

TEST_CASE("budget: formula evaluation and degenerate cases") {
  LockingCertificate c = certificate(reference_inputs());
  double sem = 2.0 * M_PI;

  PerturbationBudget b = budget(c, sem, 1e-12, 1.0);
  double d_half = std::pow(1e-12, 0.5);
  CHECK(b.xi_seminorm_max == doctest::Approx(5.0 * 363264.0 * sem * d_half).epsilon(1e-14));
  CHECK(b.xi_seminorm_max == doctest::Approx(11.41).epsilon(1e-3));
  CHECK(b.xi_sup_max == doctest::Approx(sem * 1e-12).epsilon(1e-14));
  CHECK(b.penalty_scale == doctest::Approx(2.0 * 363264.0 * sem * d_half).epsilon(1e-14));
  CHECK(b.d_g_max == 0.125);  // min{gap/4, 1} without a locking radius

  PerturbationBudget bt = budget(c, sem, 1e-12, 1.0, 1.0);
  double t = 9.0 * 363264.0 * 2.0 * sem;
  CHECK(bt.d_g_max == doctest::Approx(1.0 / (t * t)).epsilon(1e-14));
  CHECK(bt.d_g_max < 1e-14);

  PerturbationBudget z = budget(c, sem, 0.0, 1.0);
  CHECK(z.xi_seminorm_max == 0.0);
  CHECK(z.xi_sup_max == 0.0);
  CHECK(z.penalty_scale == 0.0);

  PerturbationBudget zs = budget(c, 0.0, 1e-6, 1.0);
  CHECK(zs.xi_seminorm_max == 0.0);
  CHECK(zs.xi_sup_max == 0.0);
  CHECK(zs.penalty_scale == 0.0);
}

TEST_CASE("budget: doubling the potential doubles every xi radius exactly") {
  LockingCertificate c = certificate(reference_inputs());
  PerturbationBudget b1 = budget(c, 2.0 * M_PI, 1e-8, 1.0);
  PerturbationBudget b2 = budget(c, 2.0 * (2.0 * M_PI), 1e-8, 1.0);
  CHECK(b2.xi_seminorm_max == 2.0 * b1.xi_seminorm_max);
  CHECK(b2.xi_sup_max == 2.0 * b1.xi_sup_max);
  CHECK(b2.penalty_scale == 2.0 * b1.penalty_scale);
  CHECK(b2.d_g_max == b1.d_g_max);
}

TEST_CASE("defect_inputs: quantities for the doubling fixed point") {
  LockingCertificate c = certificate(reference_inputs());
  PeriodicOrbit o = orbit_from_point(MapSpec::doubling(), 0.0, 1);
  Potential phi = Potential::cosine(0.0, 1.0);
  double sem = 2.0 * M_PI, d_g = 1e-4;

  DefectCheckInput in = defect_inputs(c, sem, d_g, 1.0, o, phi, nullptr);
  CHECK(in.tau_pert == doctest::Approx(9.0 * sem * d_g).epsilon(1e-14));
  CHECK(in.eta == 0.0);  // cos(0) - Q with Q = 1, exactly
  CHECK(in.coeff == doctest::Approx(363264.0 * sem * 0.01).epsilon(1e-14));
  CHECK(in.rho == doctest::Approx(in.tau_pert / in.coeff).epsilon(1e-12));
  CHECK(in.rho > 0.0);

  // psi_g = (phi - Q) - coeff * d(., O)
  CHECK(std::abs(eval_potential(in.psi_g, 0.0)) <= 1e-15);
  double at_quarter = std::cos(M_PI / 2.0) - 1.0 - in.coeff * 0.25;
  CHECK(eval_potential(in.psi_g, 0.25) == doctest::Approx(at_quarter).epsilon(1e-12));

  // eta >= tau is rejected whenever the penalty coefficient is active
  CHECK_THROWS_AS(defect_inputs(c, sem, d_g, -1.0, o, phi, nullptr), InvalidInput);

  // unperturbed case: no penalty, no rho
  DefectCheckInput flat = defect_inputs(c, sem, 0.0, 1.0, o, phi, nullptr);
  CHECK(flat.tau_pert == 0.0);
  CHECK(flat.coeff == 0.0);
}

TEST_CASE("defect_check: averages along forward orbits") {
  MapSpec m = MapSpec::doubling();
  Potential phi = Potential::cosine(0.0, 1.0);
  LockingCertificate c = certificate(reference_inputs());
  PeriodicOrbit o = orbit_from_point(m, 0.0, 1);
  SubAction sub = compute_subaction(m, phi, 1024, 1e-9, 4000);
  DefectCheckInput in = defect_inputs(c, 2.0 * M_PI, 1e-4, sub.Q_used, o, phi, nullptr);

  SUBCASE("starting on the orbit reproduces eta exactly") {
    auto [avg, pass] = defect_check(m, sub, o, in, 0.0, 1000);
    CHECK(avg == doctest::Approx(in.eta).epsilon(1e-12));
    CHECK(pass);
  }

  SUBCASE("random starting points pass with the default tolerance") {
    Rng rng(11);
    for (int k = 0; k < 5; ++k) {
      auto [avg, pass] = defect_check(m, sub, o, in, rng.unit(), 100000);
      CHECK(pass);
      CHECK(avg <= in.eta + 1e-3);
    }
  }
}

TEST_CASE("sample_perturbation: stays inside the budget ball, deterministic") {
  PerturbationBudget bud;
  bud.xi_seminorm_max = 0.1;
  bud.xi_sup_max = 0.01;
  Rng rng(7);
  Potential xi = sample_perturbation(rng, bud, 1.0, Metric{true, 1.0});
  SeminormReport rep = seminorm(xi);
  CHECK(rep.holder_seminorm <= 0.1);
  CHECK(rep.sup_norm <= 0.01);
  CHECK(rep.holder_seminorm > 0.0);

  Rng rng2(7);
  Potential xi2 = sample_perturbation(rng2, bud, 1.0, Metric{true, 1.0});
  for (double x : {0.0, 0.17, 0.5, 0.83})
    CHECK(eval_potential(xi, x) == eval_potential(xi2, x));

  PerturbationBudget zero;
  Rng rng3(7);
  Potential flat = sample_perturbation(rng3, zero, 1.0, Metric{true, 1.0});
  for (double x : {0.1, 0.6}) CHECK(eval_potential(flat, x) == 0.0);
}

TEST_CASE("empirical_lock_test: zero budget locks trivially") {
  MapSpec m = MapSpec::doubling();
  Potential phi = Potential::cosine(0.0, 1.0);
  PeriodicOrbit o = orbit_from_point(m, 0.0, 1);
  LockTestResult r = empirical_lock_test(m, phi, o, 6, 5, PerturbationBudget{}, 0);
  CHECK(r.lock_rate == 1.0);
  CHECK(r.failures.empty());
  CHECK(r.errors.empty());
}

TEST_CASE("empirical_lock_test: logistic 2-cycle under hand-set budgets") {
  MapSpec m = MapSpec::logistic(3.2);
  auto orbits = enumerate_periodic(m, 2);
  const PeriodicOrbit* two = nullptr;
  for (const auto& o : orbits)
    if (o.period == 2) two = &o;
  REQUIRE(two != nullptr);

  Potential phi = distance_potential(two->points, 1.0, 1.0, m.metric());
  PerturbationBudget bud;
  bud.xi_seminorm_max = 0.05;
  bud.xi_sup_max = 0.02;  // below half the margin to the nearest competitor
  LockTestResult r = empirical_lock_test(m, phi, *two, 4, 50, bud, 1);
  CHECK(r.lock_rate == 1.0);
  CHECK(r.errors.empty());
}

TEST_CASE("empirical_lock_test: certified budget at the doubling fixed point") {
  MapSpec m = MapSpec::doubling();
  Potential phi = Potential::cosine(0.0, 1.0);
  PeriodicOrbit o = orbit_from_point(m, 0.0, 1);
  LockingCertificate c = certificate(reference_inputs());
  PerturbationBudget bud = budget(c, seminorm(phi).holder_seminorm, 1e-12, 1.0);
  LockTestResult r = empirical_lock_test(m, phi, o, 6, 20, bud, 3);
  CHECK(r.lock_rate == 1.0);
}

TEST_CASE("locking_scan: doubling cosine sweep") {
  auto map_at = [](double) { return MapSpec::doubling(); };
  auto pot_at = [](double th) { return Potential::cosine(th, 1.0); };
  std::vector<double> thetas;
  for (int j = 0; j <= 20; ++j) thetas.push_back(0.01 * j);

  ScanTable t = locking_scan(map_at, pot_at, {0.0}, thetas, 8);
  const ScanCell& c0 = t.at(0, 0);
  CHECK(c0.ok);
  CHECK(c0.period == 1);
  CHECK(c0.itinerary == "0");
  // single-row tables have no interior, so nothing can be flagged locked
  for (const auto& c : t.cells) CHECK(!c.locked);
  REQUIRE(!t.runs.empty());
  CHECK(t.runs[0].itinerary == "0");
  CHECK(t.runs[0].theta_lo == 0.0);
  CHECK(t.runs[0].theta_hi > 0.0);  // a genuine period-1 plateau around 0
}

TEST_CASE("locking_scan: logistic identity potential picks the fixed point at a=3.2") {
  auto map_at = [](double a) { return MapSpec::logistic(a); };
  auto pot_at = [](double) { return Potential::linear(1.0, 0.0); };
  ScanTable t = locking_scan(map_at, pot_at, {3.1, 3.2, 3.3, 3.4, 3.5}, {0.0, 0.1, 0.2}, 6);
  const ScanCell& c = t.at(1, 1);
  CHECK(c.ok);
  CHECK(c.period == 1);
  CHECK(c.avg == doctest::Approx(0.6875).epsilon(1e-9));
}

TEST_CASE("locking_scan: interior plateau is flagged locked") {
  auto map_at = [](double) { return MapSpec::doubling(); };
  auto pot_at = [](double th) { return Potential::cosine(th, 1.0); };
  ScanTable t = locking_scan(map_at, pot_at, {0.0, 0.0, 0.0}, {0.0, 0.01, 0.02}, 6);
  CHECK(t.at(1, 1).locked);
  CHECK(!t.at(0, 0).locked);
  CHECK(!t.at(0, 1).locked);
  CHECK(!t.at(2, 2).locked);
}

TEST_CASE("locking_scan: constant potential columns are degenerate, failures stay local") {
  auto map_at = [](double s) { return MapSpec::tent(s); };
  auto pot_at = [](double th) {
    return th == 0.0 ? Potential::constant(0.3, Metric{true, 1.0})
                     : Potential::cosine(th, 1.0);
  };
  // tent(2.5) is rejected by the factory; its whole row reports the error
  ScanTable t = locking_scan(map_at, pot_at, {2.0, 2.5}, {0.0, 0.1}, 6);
  CHECK(t.at(0, 0).degenerate);
  CHECK(t.at(0, 0).ok);
  CHECK(!t.at(0, 0).locked);
  CHECK(t.at(0, 1).ok);
  CHECK(!t.at(1, 0).ok);
  CHECK(!t.at(1, 0).error.empty());
  CHECK(!t.at(1, 1).ok);

  CHECK_THROWS_AS(locking_scan(map_at, pot_at, {}, {0.0}, 6), InvalidInput);
}

TEST_CASE("locking_scan: adding a constant to the potential changes no itinerary") {
  auto map_at = [](double) { return MapSpec::doubling(); };
  auto base = [](double th) { return Potential::cosine(th, 1.0); };
  auto shifted = [](double th) {
    return Potential::sum({Potential::cosine(th, 1.0), Potential::constant(0.37, Metric{true, 1.0})});
  };
  std::vector<double> thetas = {0.0, 0.1, 0.2, 0.3, 0.45};
  ScanTable t1 = locking_scan(map_at, base, {0.0}, thetas, 8);
  ScanTable t2 = locking_scan(map_at, shifted, {0.0}, thetas, 8);
  for (size_t j = 0; j < thetas.size(); ++j) {
    CHECK(t1.at(0, j).itinerary == t2.at(0, j).itinerary);
    CHECK(t1.at(0, j).period == t2.at(0, j).period);
    CHECK(t2.at(0, j).avg == doctest::Approx(t1.at(0, j).avg + 0.37).epsilon(1e-12));
  }
}
