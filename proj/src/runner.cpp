#include "ergopt/runner.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "json.hpp"

#include "ergopt/extension.hpp"
#include "ergopt/locking.hpp"
#include "ergopt/maxmean.hpp"
#include "ergopt/orbits.hpp"
#include "ergopt/subaction.hpp"

namespace ergopt {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr const char* kVersion = "0.1.0";

std::string hash_hex(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct Sink {
  std::filesystem::path dir;
  std::string basename;
  std::string command;
  std::string hash;
  long long seed;

  std::ofstream open_csv(const std::string& suffix = ".csv") const {
    std::filesystem::create_directories(dir);
    std::filesystem::path p = dir / (basename + suffix);
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error("cannot write " + p.string());
    out << "# command=" << command << "\n# config=" << hash << "\n# seed=" << seed
        << "\n# version=" << kVersion << "\n";
    std::cout << "wrote " << p.string() << "\n";
    return out;
  }

  ordered_json meta() const {
    ordered_json m;
    m["command"] = command;
    m["config"] = hash;
    m["seed"] = seed;
    m["version"] = kVersion;
    return m;
  }

  void write_json(const ordered_json& doc) const {
    std::filesystem::create_directories(dir);
    std::filesystem::path p = dir / (basename + ".json");
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error("cannot write " + p.string());
    out << doc.dump(2) << "\n";
    std::cout << "wrote " << p.string() << "\n";
  }
};

void run_orbits(const RunConfig& cfg, const Sink& sink) {
  MapSpec m = make_map(cfg);
  Potential p = make_potential(cfg, m);
  auto orbits = enumerate_periodic(m, static_cast<int>(cfg.integer("numeric.max_period")));
  auto out = sink.open_csv();
  out << "itinerary,period,base_point,multiplier,birkhoff_average,gap\n";
  for (const auto& o : orbits)
    out << o.itinerary << ',' << o.period << ',' << g17(o.base()) << ',' << g17(o.multiplier)
        << ',' << g17(birkhoff_average(o, p)) << ',' << g17(o.gap) << '\n';
}

void run_oracle(const RunConfig& cfg, const Sink& sink, bool emit_cycle) {
  MapSpec m = make_map(cfg);
  Potential p = make_potential(cfg, m);
  int n = static_cast<int>(cfg.integer("numeric.n"));
  auto [value, error_bound] = oracle_Q(m, p, n);
  std::vector<int> cycle;
  if (emit_cycle) cycle = karp_max_mean_cycle(build_transfer_graph(m, p, n), true).cycle;
  auto out = sink.open_csv();
  out << "value,error_bound,cycle_length\n";
  out << g17(value) << ',' << g17(error_bound) << ',' << cycle.size() << '\n';
  if (emit_cycle) {
    out << "cycle_cell\n";
    for (int cell : cycle) out << cell << '\n';
  }
}

void run_subaction(const RunConfig& cfg, const Sink& sink) {
  MapSpec m = make_map(cfg);
  Potential p = make_potential(cfg, m);
  SubAction s = compute_subaction(m, p, static_cast<int>(cfg.integer("numeric.n")),
                                  cfg.num("numeric.tol"),
                                  static_cast<int>(cfg.int_or("numeric.max_iter", 2000)));
  GridFn u = s.as_grid_fn();
  std::vector<char> contact(s.grid.size(), 0);
  for (int i : s.contact_set) contact[i] = 1;
  auto out = sink.open_csv();
  out << "node,u,defect_at_node,in_contact_set\n";
  for (size_t i = 0; i < s.grid.size(); ++i) {
    double x = s.grid[i];
    double d = eval_potential(p, x) + s.u[i] - u(eval(m, x)) - s.Q_used;
    out << i << ',' << g17(s.u[i]) << ',' << g17(d) << ',' << int(contact[i]) << '\n';
  }
}

void run_certify(const RunConfig& cfg, const Sink& sink) {
  CertificateInputs in;
  in.K = cfg.num_or("cert.K", 1.0);
  in.delta = cfg.num("cert.delta");
  in.lambda = cfg.num("cert.lambda");
  in.L = cfg.num("cert.L");
  in.lip_f = cfg.num("cert.lip_f");
  in.gap = cfg.num("cert.gap");
  in.p0 = cfg.num_or("cert.p0", 1.0);
  in.alpha = cfg.num_or("cert.alpha", 1.0);
  LockingCertificate cert = certificate(in);
  ordered_json doc;
  doc["meta"] = sink.meta();
  doc["inputs"] = {{"K", in.K},     {"delta", in.delta}, {"lambda", in.lambda},
                   {"L", in.L},     {"lip_f", in.lip_f}, {"gap", in.gap},
                   {"p0", in.p0},   {"alpha", in.alpha}};
  doc["derived"] = {{"r", cert.r}, {"L1", cert.L1}, {"L2", cert.L2}, {"L3", cert.L3},
                    {"C", cert.C}};
  if (cfg.has("budget.phi_seminorm") && cfg.has("budget.d_g")) {
    std::optional<double> theta_lock;
    if (cfg.has("budget.theta_lock")) theta_lock = cfg.num("budget.theta_lock");
    PerturbationBudget b = budget(cert, cfg.num("budget.phi_seminorm"), cfg.num("budget.d_g"),
                                  cfg.num_or("budget.diam", 1.0), theta_lock);
    doc["budget"] = {{"xi_seminorm_max", b.xi_seminorm_max},
                     {"xi_sup_max", b.xi_sup_max},
                     {"penalty_scale", b.penalty_scale},
                     {"d_g_max", b.d_g_max}};
  }
  sink.write_json(doc);
}

void run_scan(const RunConfig& cfg, const Sink& sink) {
  long long na = cfg.integer("scan.a_count"), nt = cfg.integer("scan.theta_count");
  if (na <= 0 || nt <= 0) throw InvalidInput("scan grid is empty");
  auto linspace = [](double lo, double hi, long long n) {
    std::vector<double> v;
    for (long long i = 0; i < n; ++i)
      v.push_back(n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) /
                                         static_cast<double>(n - 1));
    return v;
  };
  auto a_values = linspace(cfg.num("scan.a_min"), cfg.num("scan.a_max"), na);
  auto theta_values = linspace(cfg.num("scan.theta_min"), cfg.num("scan.theta_max"), nt);
  const std::string& fam = cfg.str("map.family");
  std::function<MapSpec(double)> map_at;
  if (fam == "logistic")
    map_at = [](double a) { return MapSpec::logistic(a); };
  else if (fam == "tent")
    map_at = [](double s) { return MapSpec::tent(s); };
  else if (fam == "quadratic")
    map_at = [](double c) { return MapSpec::quadratic(c); };
  else
    throw InvalidInput("scan sweeps a one-parameter family (logistic, tent, quadratic)");
  MapSpec probe = map_at(a_values[0]);
  Metric met = probe.metric();
  Interval dom{probe.lo, probe.hi};
  double amp = cfg.num_or("potential.amp", 1.0);
  double alpha = cfg.num_or("potential.alpha", 1.0);
  auto pot_at = [=](double theta) { return Potential::cosine(theta, amp, alpha, met, dom); };
  ScanTable t = locking_scan(map_at, pot_at, a_values, theta_values,
                             static_cast<int>(cfg.integer("numeric.max_period")));
  auto out = sink.open_csv();
  out << "a,theta,period,itinerary,birkhoff_avg,locked_flag\n";
  for (const auto& c : t.cells)
    out << g17(c.a) << ',' << g17(c.theta) << ',' << c.period << ',' << c.itinerary << ','
        << g17(c.avg) << ',' << int(c.locked) << '\n';
}

void run_extend(const RunConfig& cfg, const Sink& sink) {
  MapSpec m = make_map(cfg);
  ExtensionResult res = find_hyperbolic_extension(m);
  ordered_json doc;
  doc["meta"] = sink.meta();
  doc["a0"] = res.a0;
  doc["a1"] = res.a1;
  doc["b1"] = res.b1;
  doc["b0"] = res.b0;
  doc["theta"] = res.theta;
  doc["tau_ext"] = res.tau_ext;
  doc["endpoint_map"] = {{"a0", res.endpoint_a0}, {"b0", res.endpoint_b0}};
  doc["case_id"] = res.case_id;
  sink.write_json(doc);
  int n = static_cast<int>(cfg.integer("numeric.n"));
  auto out = sink.open_csv();
  out << "x,F\n";
  for (int i = 0; i <= n; ++i) {
    double x = res.a0 + (res.b0 - res.a0) * static_cast<double>(i) / n;
    out << g17(x) << ',' << g17(eval(res.F, x)) << '\n';
  }
}

void run_lock_test(const RunConfig& cfg, const Sink& sink) {
  MapSpec m = make_map(cfg);
  Potential p = make_potential(cfg, m);
  int max_period = static_cast<int>(cfg.integer("numeric.max_period"));
  auto [expected, best] = maximizing_orbit(m, p, max_period);
  PerturbationBudget bud;
  bud.xi_seminorm_max = cfg.num_or("budget.xi_seminorm_max", 0.0);
  bud.xi_sup_max = cfg.num_or("budget.xi_sup_max", 0.0);
  bud.penalty_scale = cfg.num_or("budget.penalty_scale", 0.0);
  LockTestResult r = empirical_lock_test(
      m, p, expected, max_period, static_cast<int>(cfg.int_or("lock.samples", 200)), bud,
      static_cast<std::uint64_t>(cfg.integer("numeric.seed")));
  ordered_json doc;
  doc["meta"] = sink.meta();
  doc["lock_rate"] = r.lock_rate;
  doc["samples"] = r.samples;
  doc["failures"] = r.failures;
  doc["errors"] = r.errors;
  doc["expected_period"] = expected.period;
  doc["expected_itinerary"] = expected.itinerary;
  doc["expected_points"] = expected.points;
  doc["expected_average"] = best;
  sink.write_json(doc);
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ParseError*>(&e) || dynamic_cast<const SchemaError*>(&e) ||
      dynamic_cast<const InvalidInput*>(&e) || dynamic_cast<const DomainError*>(&e) ||
      dynamic_cast<const GridMismatch*>(&e))
    return 2;
  return 1;
}

int run(const RunConfig& cfg, const RunOptions& opt) {
  try {
    if (cfg.command.empty()) throw SchemaError("missing key command");
    Sink sink;
    sink.dir = !opt.out_dir.empty() ? opt.out_dir : cfg.str_or("output.dir", ".");
    sink.basename = cfg.str_or("output.basename", cfg.command == "lock-test" ? "lock_test"
                                                                             : cfg.command);
    sink.command = cfg.command;
    sink.hash = hash_hex(cfg.config_hash());
    sink.seed = cfg.integer("numeric.seed");
    if (cfg.command == "orbits")
      run_orbits(cfg, sink);
    else if (cfg.command == "oracle")
      run_oracle(cfg, sink, opt.emit_cycle);
    else if (cfg.command == "subaction")
      run_subaction(cfg, sink);
    else if (cfg.command == "certify")
      run_certify(cfg, sink);
    else if (cfg.command == "scan")
      run_scan(cfg, sink);
    else if (cfg.command == "extend")
      run_extend(cfg, sink);
    else if (cfg.command == "lock-test")
      run_lock_test(cfg, sink);
    else
      throw SchemaError("command: unknown value '" + cfg.command + "'");
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
}

}  // namespace ergopt
