#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ergopt/common.hpp"
#include "ergopt/config.hpp"
#include "ergopt/dynamics.hpp"
#include "ergopt/extension.hpp"
#include "ergopt/locking.hpp"
#include "ergopt/maxmean.hpp"
#include "ergopt/orbits.hpp"
#include "ergopt/potentials.hpp"
#include "ergopt/runner.hpp"
#include "ergopt/subaction.hpp"

using namespace ergopt;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

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

// 1. Certificate arithmetic reproduces the hand-derived constants, < 1 ms.
bool criterion_certificate(std::string& out) {
  LockingCertificate cert;
  double best = 1e300;
  for (int rep = 0; rep < 5; ++rep) {
    auto t0 = Clock::now();
    cert = certificate(reference_inputs());
    best = std::min(best, ms_since(t0));
  }
  bool exact = cert.r == 0.03125 && cert.L1 == 11.0 && cert.L2 == 8.0 && cert.L3 == 16.0 &&
               cert.C == 363264.0;
  std::ostringstream oss;
  oss << "r=" << g17(cert.r) << " L1=" << g17(cert.L1) << " L2=" << g17(cert.L2)
      << " L3=" << g17(cert.L3) << " C=" << g17(cert.C) << ", certify took " << best << " ms";
  out = oss.str();
  return exact && best < 1.0;
}

// 2. Aligned Markov systems: cycle oracle == enumerated maximum exactly.
bool criterion_markov_exact(std::string& out) {
  MapSpec m2 = MapSpec::markov({0.0, 0.5, 1.0}, {0.0, 0.0}, {2.0, 2.0});
  Potential p2 = Potential::step({0.0, 0.25, 0.5, 0.75, 1.0}, {0.1, 0.9, 0.4, 0.55},
                                 Metric{false, 1.0});
  double v2 = oracle_Q(m2, p2, 256).first;
  double q2 = maximizing_orbit(m2, p2, 4).second;

  MapSpec m3 = MapSpec::markov({0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0}, {0.0, 0.0, 0.0},
                               {3.0, 3.0, 3.0});
  Potential p3 = Potential::step({0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0}, {0.2, 0.9, -0.3},
                                 Metric{false, 1.0});
  double v3 = oracle_Q(m3, p3, 243).first;
  double q3 = maximizing_orbit(m3, p3, 5).second;

  double d2 = std::abs(v2 - q2), d3 = std::abs(v3 - q3);
  std::ostringstream oss;
  oss << "binary: karp=" << g17(v2) << " orbits=" << g17(q2) << " diff=" << d2
      << "; ternary: karp=" << g17(v3) << " orbits=" << g17(q3) << " diff=" << d3;
  out = oss.str();
  return d2 <= 1e-13 && d3 <= 1e-13 && std::abs(q2 - 0.65) <= 1e-13 &&
         std::abs(q3 - 0.9) <= 1e-13;
}

// 3. Doubling map: oracle value within its own bound, argmax is {0} with avg 1.
bool criterion_doubling_oracle(std::string& out) {
  MapSpec m = MapSpec::doubling();
  Potential phi = Potential::cosine(0.0, 1.0);
  auto [value, bound] = oracle_Q(m, phi, 1 << 12);
  auto [orb, q] = maximizing_orbit(m, phi, 12);
  std::ostringstream oss;
  oss << "value=" << g17(value) << " |value-1|=" << std::abs(value - 1.0) << " bound="
      << g17(bound) << ", argmax period=" << orb.period << " avg=" << g17(q);
  out = oss.str();
  return std::isfinite(bound) && std::abs(value - 1.0) <= bound && orb.period == 1 &&
         orb.points[0] == 0.0 && q == 1.0;
}

// 4. Sub-action defect, contact set, seminorm control, coboundary control.
bool criterion_subaction(std::string& out) {
  MapSpec m = MapSpec::doubling();
  Potential phi = Potential::cosine(0.0, 1.0);
  SubAction s = compute_subaction(m, phi, 1 << 12, 1e-9, 20000);
  bool contact0 =
      std::find(s.contact_set.begin(), s.contact_set.end(), 0) != s.contact_set.end();
  const double ratio_cap = 8.0 * 1.05;  // penalty constant / seminorm, 5% slack

  Potential cob = Potential::trig_poly(0.0, {0.0, 0.0}, {-1.0, 1.0});
  SubAction sc = compute_subaction(m, cob, 1 << 12, 1e-9, 20000);
  const double cob_bound = 6.0 * kPi / (1 << 12) + 1e-8;
  std::ostringstream oss;
  oss << "defect=" << s.defect << " contact(0)=" << contact0 << " ratio=" << s.seminorm_ratio
      << " (cap " << ratio_cap << "), coboundary defect=" << sc.defect << " (bound "
      << cob_bound << ")";
  out = oss.str();
  return s.defect <= 1e-4 && contact0 && s.seminorm_ratio <= ratio_cap &&
         sc.defect <= cob_bound;
}

// 5. Perturbations below half the enumerated margin never move the argmax.
bool criterion_lock(std::string& out) {
  MapSpec m = MapSpec::logistic(3.2);
  auto orbits = enumerate_periodic(m, 12);
  const PeriodicOrbit* two = nullptr;
  for (const auto& o : orbits)
    if (o.period == 2) two = &o;
  if (!two) {
    out = "no 2-cycle found by enumeration";
    return false;
  }
  Potential phi = distance_potential(two->points, 1.0, 1.0, m.metric(), Interval{0.0, 1.0});
  double self_avg = birkhoff_average(*two, phi);
  double best_other = -1e300;
  for (const auto& o : orbits)
    if (&o != two) best_other = std::max(best_other, birkhoff_average(o, phi));
  double margin = 0.0 - best_other;

  PerturbationBudget bud;
  bud.xi_seminorm_max = 1.0;
  bud.xi_sup_max = 0.45 * margin;
  LockTestResult r = empirical_lock_test(m, phi, *two, 12, 200, bud, 7);
  std::ostringstream oss;
  oss << "margin=" << g17(margin) << " xi_sup_max=" << g17(bud.xi_sup_max)
      << " lock_rate=" << r.lock_rate << " over " << r.samples << " samples, errors="
      << r.errors.size();
  out = oss.str();
  return std::abs(self_avg) <= 1e-12 && margin > 0.0 && bud.xi_sup_max < 0.5 * margin &&
         r.lock_rate == 1.0 && r.samples == 200 && r.errors.empty();
}

// 6. 101x101 logistic/cosine scan: coverage, locked plateaus, byte determinism.
bool criterion_scan(std::string& out) {
  std::vector<double> A(101), TH(101);
  for (int i = 0; i < 101; ++i) A[i] = 3.0 + 0.5 * i / 100.0;
  for (int j = 0; j < 101; ++j) TH[j] = j / 101.0;
  Metric met{false, 1.0};
  Interval dom{0.0, 1.0};
  auto map_at = [](double a) { return MapSpec::logistic(a); };
  auto pot_at = [&](double th) { return Potential::cosine(th, 1.0, 1.0, met, dom); };
  ScanTable t = locking_scan(map_at, pot_at, A, TH, 8);
  int okc = 0, locked = 0;
  for (const auto& c : t.cells) {
    okc += c.ok;
    locked += c.locked;
  }
  double frac = static_cast<double>(okc) / static_cast<double>(t.cells.size());

  std::ostringstream cfg_text;
  cfg_text << "command = scan\nmap.family = logistic\n"
           << "scan.a_min = 3.0\nscan.a_max = 3.5\nscan.a_count = 101\n"
           << "scan.theta_min = 0.0\nscan.theta_max = " << g17(100.0 / 101.0)
           << "\nscan.theta_count = 101\nnumeric.max_period = 8\n";
  RunConfig cfg = parse_config(cfg_text.str());
  fs::path d1 = fs::temp_directory_path() / "ergopt_acc_scan1";
  fs::path d2 = fs::temp_directory_path() / "ergopt_acc_scan2";
  fs::remove_all(d1);
  fs::remove_all(d2);
  RunOptions o1, o2;
  o1.out_dir = d1.string();
  o2.out_dir = d2.string();
  int rc1 = run(cfg, o1);
  int rc2 = run(cfg, o2);
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
  };
  std::string f1 = slurp(d1 / "scan.csv"), f2 = slurp(d2 / "scan.csv");
  bool same = !f1.empty() && f1 == f2;
  std::ostringstream oss;
  oss << "ok=" << okc << "/" << t.cells.size() << " (" << 100.0 * frac
      << "%), locked cells=" << locked << ", byte-deterministic=" << same;
  out = oss.str();
  return frac >= 0.95 && locked >= 1 && rc1 == 0 && rc2 == 0 && same;
}

// 7. Extension: residuals, verification items, glue smoothness, norm-ratio cap.
bool criterion_extension(std::string& out) {
  MapSpec m = MapSpec::sine(0.5, 0.25);
  ExtensionResult res = find_hyperbolic_extension(m);
  double ra = std::abs(eval(res.F, res.a0) - res.a0);
  double rb = std::abs(eval(res.F, res.b0) - res.b0);
  VerificationReport rep = verify_extension(res, m);
  Potential phi = distance_potential({0.5}, 1.0, 1.0, Metric{false, 1.0},
                                     Interval{res.a0 - 0.1, res.b0 + 0.1});
  VerificationReport rp = verify_extension(res, m, &phi, 8);

  const double h = 1e-3;
  auto stencil = [&](const std::vector<double>& nodes, int order, double x0) {
    std::vector<double> w = fd_weights(order, nodes, x0);
    double acc = 0.0;
    for (size_t i = 0; i < nodes.size(); ++i) acc += w[i] * eval(res.F, nodes[i]);
    return acc;
  };
  std::vector<double> ln{-4.0 * h, -3.0 * h, -2.0 * h, -h};
  std::vector<double> rn{1.0 + h, 1.0 + 2.0 * h, 1.0 + 3.0 * h, 1.0 + 4.0 * h};
  double mismatch = 0.0;
  for (int order = 0; order <= 2; ++order) {
    double ea = derivative(m, 0.0, order), eb = derivative(m, 1.0, order);
    mismatch = std::max(mismatch,
                        std::abs(stencil(ln, order, 0.0) - ea) / (1.0 + std::abs(ea)));
    mismatch = std::max(mismatch,
                        std::abs(stencil(rn, order, 1.0) - eb) / (1.0 + std::abs(eb)));
  }

  Rng rng(5);
  const double cap = dr_bound(1, 1.0, 1.0);
  double worst_ratio = 0.0;
  bool ratios_ok = true;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> c{rng.sym(), rng.sym(), rng.sym(), rng.sym()};
    double ratio = zero_boundary_extension(polynomial_fn(c, 0.0, 1.0, 1), -1.0, 2.0).second;
    worst_ratio = std::max(worst_ratio, ratio);
    ratios_ok = ratios_ok && ratio <= cap + 1e-9;
  }
  bool items = rep.endpoints_ok && rep.escape_ok && rep.expansion_ok && rp.phi_checked &&
               rp.hypothesis_holds && rp.argmax_inside;
  std::ostringstream oss;
  oss << "case=" << res.case_id << " residuals=(" << ra << "," << rb << ") items(i-iv)="
      << items << " glue mismatch=" << mismatch << " entry<=bound " << rep.max_entry_time
      << "<=" << rep.escape_bound << " max norm ratio=" << worst_ratio << " (cap " << cap
      << ")";
  out = oss.str();
  return res.case_id == 1 && ra <= 1e-10 && rb <= 1e-10 && items && mismatch <= 1e-6 &&
         static_cast<double>(rep.max_entry_time) <= rep.escape_bound && ratios_ok;
}

// 8. Doubling the potential doubles the budgets exactly and moves no argmax.
bool criterion_covariance(std::string& out) {
  LockingCertificate cert = certificate(reference_inputs());
  double sem = 2.0 * kPi;
  PerturbationBudget b1 = budget(cert, sem, 1e-4, 1.0);
  PerturbationBudget b2 = budget(cert, 2.0 * sem, 1e-4, 1.0);
  bool doubled = b2.xi_seminorm_max == 2.0 * b1.xi_seminorm_max &&
                 b2.xi_sup_max == 2.0 * b1.xi_sup_max &&
                 b2.penalty_scale == 2.0 * b1.penalty_scale;

  std::vector<double> A, TH;
  for (int i = 0; i < 5; ++i) A.push_back(3.1 + 0.05 * i);
  for (int j = 0; j < 5; ++j) TH.push_back(0.1 * j);
  Metric met{false, 1.0};
  Interval dom{0.0, 1.0};
  auto map_at = [](double a) { return MapSpec::logistic(a); };
  auto base = [&](double th) { return Potential::cosine(th, 1.0, 1.0, met, dom); };
  auto twice = [&](double th) { return Potential::cosine(th, 2.0, 1.0, met, dom); };
  auto shifted = [&](double th) {
    return Potential::sum(
        {Potential::cosine(th, 1.0, 1.0, met, dom), Potential::constant(0.37, met, dom)});
  };
  ScanTable t1 = locking_scan(map_at, base, A, TH, 6);
  ScanTable t2 = locking_scan(map_at, twice, A, TH, 6);
  ScanTable t3 = locking_scan(map_at, shifted, A, TH, 6);
  size_t agree = 0;
  for (size_t k = 0; k < t1.cells.size(); ++k) {
    const ScanCell &c1 = t1.cells[k], &c2 = t2.cells[k], &c3 = t3.cells[k];
    bool same = c1.ok == c2.ok && c1.ok == c3.ok && c1.period == c2.period &&
                c1.period == c3.period && c1.itinerary == c2.itinerary &&
                c1.itinerary == c3.itinerary;
    agree += same;
  }
  std::ostringstream oss;
  oss << "budgets doubled exactly=" << doubled << ", argmax agreement " << agree << "/"
      << t1.cells.size() << " under 2*phi and phi+0.37";
  out = oss.str();
  return doubled && agree == t1.cells.size() && t1.cells.size() == 25;
}

// 9. Averaged penalized defect along long random orbits stays within eta + tol.
bool criterion_defect_orbits(std::string& out) {
  MapSpec m = MapSpec::doubling();
  Potential phi = Potential::cosine(0.0, 1.0);
  SubAction sub = compute_subaction(m, phi, 1024, 1e-9, 8000);
  PeriodicOrbit o = orbit_from_point(m, 0.0, 1);
  LockingCertificate cert = certificate(reference_inputs());
  double sem = seminorm(phi).holder_seminorm;
  DefectCheckInput in = defect_inputs(cert, sem, 1e-4, sub.Q_used, o, phi, nullptr);
  Rng rng(2026);
  bool all = true;
  double worst = -1e300;
  for (int k = 0; k < 20; ++k) {
    auto [avg, pass] = defect_check(m, sub, o, in, rng.unit(), 100000);
    all = all && pass;
    worst = std::max(worst, avg - in.eta);
  }
  std::ostringstream oss;
  oss << "eta=" << g17(in.eta) << " worst avg-eta=" << worst << " over 20 starts, n=100000";
  out = oss.str();
  return all && worst <= 1e-3;
}

struct Entry {
  const char* name;
  double limit_ms;
  bool (*fn)(std::string&);
};

}  // namespace

int main() {
  const Entry entries[] = {
      {"certificate arithmetic", 1000.0, criterion_certificate},
      {"exact markov oracle equivalence", 5000.0, criterion_markov_exact},
      {"doubling oracle bound and argmax", 30000.0, criterion_doubling_oracle},
      {"subaction certification", 60000.0, criterion_subaction},
      {"empirical locking of the attracting 2-cycle", 60000.0, criterion_lock},
      {"joint 101x101 scan", 600000.0, criterion_scan},
      {"hyperbolic extension round trip", 30000.0, criterion_extension},
      {"budget covariance and argmax invariance", 60000.0, criterion_covariance},
      {"defect check along random orbits", 10000.0, criterion_defect_orbits},
  };
  int failures = 0;
  for (size_t i = 0; i < sizeof entries / sizeof entries[0]; ++i) {
    std::string detail;
    bool ok = false;
    auto t0 = Clock::now();
    try {
      ok = entries[i].fn(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    double ms = ms_since(t0);
    bool pass = ok && ms <= entries[i].limit_ms;
    failures += !pass;
    std::printf("[%s] criterion %zu %s: %s | %.1f ms (limit %.0f ms)\n",
                pass ? "PASS" : "FAIL", i + 1, entries[i].name, detail.c_str(), ms,
                entries[i].limit_ms);
  }
  std::printf("%d/9 acceptance criteria passed\n", 9 - failures);
  return failures == 0 ? 0 : 1;
}
