#include "ergopt/orbits.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace ergopt {

namespace {

char symbol_char(int id) { return id < 10 ? static_cast<char>('0' + id) : static_cast<char>('a' + id - 10); }

// shortest signed displacement y - x, wrapped on circle maps
double signed_err(const MapSpec& m, double y, double x) {
  double d = y - x;
  if (m.circle_flag) {
    double per = m.hi - m.lo;
    d -= per * std::round(d / per);
  }
  return d;
}

double iterate_n(const MapSpec& m, double x, int n) {
  for (int i = 0; i < n; ++i) x = eval(m, x);
  return x;
}

bool newton_polish(const MapSpec& m, double& x, int period) {
  for (int it = 0; it < 50; ++it) {
    double y = x, mult = 1.0;
    bool dok = true;
    for (int i = 0; i < period; ++i) {
      try {
        mult *= derivative(m, y, 1);
      } catch (const NonDifferentiable&) {
        dok = false;
      }
      y = eval(m, y);
    }
    double r = signed_err(m, y, x);
    if (std::fabs(r) <= 1e-12) return true;
    if (!dok) return false;
    double dr = mult - 1.0;
    if (std::fabs(dr) < 1e-12) return false;
    double nx = x - r / dr;
    if (m.circle_flag) nx = m.reduce(nx);
    else nx = std::clamp(nx, m.lo, m.hi);
    if (std::fabs(nx - x) < 1e-16 && std::fabs(r) > 1e-10) return false;
    x = nx;
  }
  double r = signed_err(m, iterate_n(m, x, period), x);
  return std::fabs(r) <= 1e-10;
}

bool minimal_period_ok(const MapSpec& m, double x, int period) {
  Metric mt = m.metric();
  for (int q = 1; q < period; ++q) {
    if (period % q != 0) continue;
    if (mt.dist(iterate_n(m, x, q), x) <= 1e-8) return false;
  }
  return true;
}

// Booth's least-rotation algorithm; a word is canonical when its least
// rotation starts at index 0.
int least_rotation(const std::vector<int>& w) {
  int n = static_cast<int>(w.size());
  std::vector<int> f(2 * n, -1);
  int k = 0;
  for (int j = 1; j < 2 * n; ++j) {
    int sj = w[j % n];
    int i = f[j - k - 1];
    while (i != -1 && sj != w[(k + i + 1) % n]) {
      if (sj < w[(k + i + 1) % n]) k = j - i - 1;
      i = f[i];
    }
    if (sj != w[(k + i + 1) % n]) {
      if (sj < w[(k + i + 1) % n]) k = j;
      f[j - k] = -1;
    } else {
      f[j - k] = i + 1;
    }
  }
  return k;
}

bool is_aperiodic(const std::vector<int>& w) {
  int n = static_cast<int>(w.size());
  for (int q = 1; q < n; ++q) {
    if (n % q != 0) continue;
    bool rep = true;
    for (int i = q; i < n && rep; ++i) rep = w[i] == w[i % q];
    if (rep) return false;
  }
  return true;
}

struct BranchInfo {
  double xlo, xhi;  // monotone piece extent
  double ylo, yhi;  // its image
};

std::vector<BranchInfo> branch_table(const MapSpec& m) {
  std::vector<BranchInfo> out;
  switch (m.family) {
    case MapFamily::Doubling:
      out.push_back({0.0, 0.5, 0.0, 1.0});
      out.push_back({0.5, 1.0, 0.0, 1.0});
      break;
    case MapFamily::Tent:
      out.push_back({0.0, 0.5, 0.0, m.s / 2});
      out.push_back({0.5, 1.0, 0.0, m.s / 2});
      break;
    case MapFamily::Logistic:
      out.push_back({0.0, 0.5, 0.0, m.a / 4});
      out.push_back({0.5, 1.0, 0.0, m.a / 4});
      break;
    case MapFamily::QuadraticReal:
      out.push_back({m.lo, 0.0, m.c, m.lo * m.lo + m.c});
      out.push_back({0.0, m.hi, m.c, m.hi * m.hi + m.c});
      break;
    case MapFamily::PiecewiseLinearMarkov:
      for (size_t i = 0; i < m.slopes.size(); ++i) {
        double fl = m.values[i];
        double fh = m.values[i] + m.slopes[i] * (m.breaks[i + 1] - m.breaks[i]);
        out.push_back({m.breaks[i], m.breaks[i + 1], std::min(fl, fh), std::max(fl, fh)});
      }
      break;
    default:
      throw BranchStructureUnavailable("no branch table for this family");
  }
  return out;
}

// Monotone branch preimage with clamping to the branch image, for interval
// propagation.
double clamped_preimage(const MapSpec& m, const BranchInfo& b, int id, double y) {
  y = std::clamp(y, b.ylo, b.yhi);
  if (auto x = branch_preimage(m, id, y)) return std::clamp(*x, b.xlo, b.xhi);
  // endpoint fallback: pick the branch endpoint whose image is nearest
  double fl = std::fabs(eval(m, b.xlo) - y);
  double fh = std::fabs(eval(m, std::nextafter(b.xhi, b.xlo)) - y);
  return fl <= fh ? b.xlo : b.xhi;
}

struct WordSolver {
  const MapSpec& m;
  const std::vector<BranchInfo>& br;

  // One backward sweep of [lo,hi] through the word's inverse branches;
  // returns false when the symbolic cylinder is empty.
  bool sweep(const std::vector<int>& w, double& lo, double& hi) const {
    for (int j = static_cast<int>(w.size()) - 1; j >= 0; --j) {
      const BranchInfo& b = br[w[j]];
      double l = std::max(lo, b.ylo), h = std::min(hi, b.yhi);
      if (l > h + 1e-13) return false;
      double p1 = clamped_preimage(m, b, w[j], l);
      double p2 = clamped_preimage(m, b, w[j], h);
      lo = std::min(p1, p2);
      hi = std::max(p1, p2);
    }
    return true;
  }

  // Clamped variant: stays defined at the bracket ends even when they poke
  // past a branch image; saturated roots are weeded out by the residual check.
  double pointwise(const std::vector<int>& w, double x) const {
    for (int j = static_cast<int>(w.size()) - 1; j >= 0; --j)
      x = clamped_preimage(m, br[w[j]], w[j], x);
    return x;
  }

  std::optional<double> solve(const std::vector<int>& w) const {
    double lo = m.lo, hi = m.hi;
    for (int pass = 0; pass < 400; ++pass) {
      double plo = lo, phi = hi;
      if (!sweep(w, lo, hi)) return std::nullopt;
      if (hi - lo < 1e-14) break;
      if (pass > 4 && std::fabs(lo - plo) < 1e-15 && std::fabs(hi - phi) < 1e-15) break;
    }
    if (hi - lo < 1e-6) return 0.5 * (lo + hi);
    // stalled: bisect G(x) - x on the stable bracket
    auto h = [&](double x) { return pointwise(w, x) - x; };
    double fl = h(lo), fh = h(hi);
    if (std::isnan(fl) || std::isnan(fh) || fl * fh > 0) return std::nullopt;
    for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
      double mid = 0.5 * (lo + hi);
      double fm = h(mid);
      if (std::isnan(fm)) return std::nullopt;
      if ((fm < 0) == (fl < 0)) { lo = mid; fl = fm; } else { hi = mid; }
    }
    return 0.5 * (lo + hi);
  }
};

void canonical_rotation(PeriodicOrbit& o) {
  size_t k = 0;
  for (size_t i = 1; i < o.points.size(); ++i)
    if (o.points[i] < o.points[k]) k = i;
  if (k == 0) return;
  std::rotate(o.points.begin(), o.points.begin() + k, o.points.end());
  std::rotate(o.itinerary.begin(), o.itinerary.begin() + k, o.itinerary.end());
}

bool push_orbit(std::vector<PeriodicOrbit>& out, const MapSpec& m, PeriodicOrbit o) {
  Metric mt = m.metric();
  for (const auto& q : out)
    if (same_orbit(q, o, mt, 1e-9)) return false;
  out.push_back(std::move(o));
  return true;
}

void necklace_enumerate(const MapSpec& m, int max_period, std::vector<PeriodicOrbit>& out) {
  auto br = branch_table(m);
  WordSolver solver{m, br};
  int nsym = static_cast<int>(br.size());
  std::vector<int> w;
  for (int p = 1; p <= max_period; ++p) {
    w.assign(p, 0);
    long long total = 1;
    for (int i = 0; i < p; ++i) total *= nsym;
    for (long long code = 0; code < total; ++code) {
      long long c = code;
      for (int i = p - 1; i >= 0; --i) { w[i] = static_cast<int>(c % nsym); c /= nsym; }
      if (!is_aperiodic(w) || least_rotation(w) != 0) continue;
      auto x = solver.solve(w);
      if (!x) continue;
      double root = *x;
      if (!newton_polish(m, root, p)) continue;
      if (m.circle_flag) root = m.reduce(root);
      if (std::fabs(signed_err(m, iterate_n(m, root, p), root)) > 1e-10) continue;
      if (!minimal_period_ok(m, root, p)) continue;
      push_orbit(out, m, orbit_from_point(m, root, p));
    }
  }
}

void dense_enumerate(const MapSpec& m, int max_period, std::vector<PeriodicOrbit>& out) {
  for (int p = 1; p <= max_period; ++p) {
    long long n = std::max(4096LL, std::min(1LL << 20, 64LL << p));
    double prev_x = m.lo, prev_r = signed_err(m, iterate_n(m, prev_x, p), prev_x);
    auto try_root = [&](double root) {
      if (!newton_polish(m, root, p)) return;
      if (root < m.lo - 1e-9 || root > m.hi + 1e-9) return;
      root = std::clamp(root, m.lo, m.hi);
      if (std::fabs(signed_err(m, iterate_n(m, root, p), root)) > 1e-10) return;
      if (!minimal_period_ok(m, root, p)) return;
      push_orbit(out, m, orbit_from_point(m, root, p));
    };
    if (std::fabs(prev_r) <= 1e-12) try_root(prev_x);
    for (long long i = 1; i <= n; ++i) {
      double x = m.lo + (m.hi - m.lo) * static_cast<double>(i) / static_cast<double>(n);
      double r = signed_err(m, iterate_n(m, x, p), x);
      if (std::fabs(r) <= 1e-12) {
        try_root(x);
      } else if (prev_r * r < 0) {
        double lo = prev_x, hi = x, fl = prev_r;
        for (int it = 0; it < 60 && hi - lo > 1e-14; ++it) {
          double mid = 0.5 * (lo + hi);
          double fm = signed_err(m, iterate_n(m, mid, p), mid);
          if ((fm < 0) == (fl < 0)) { lo = mid; fl = fm; } else { hi = mid; }
        }
        try_root(0.5 * (lo + hi));
      }
      prev_x = x;
      prev_r = r;
    }
  }
}

void attracting_pass(const MapSpec& m, int max_period, std::vector<PeriodicOrbit>& out) {
  std::vector<double> seeds;
  switch (m.family) {
    case MapFamily::Logistic: seeds = {0.5}; break;
    case MapFamily::QuadraticReal: seeds = {0.0}; break;
    case MapFamily::SineWave: seeds = {0.25, 0.75}; break;
    default: return;
  }
  Metric mt = m.metric();
  for (double x : seeds) {
    for (int i = 0; i < 10000; ++i) x = eval(m, x);
    double y = x;
    for (int q = 1; q <= max_period; ++q) {
      y = eval(m, y);
      if (mt.dist(y, x) <= 1e-9) {
        double root = x;
        if (newton_polish(m, root, q) && minimal_period_ok(m, root, q) &&
            std::fabs(signed_err(m, iterate_n(m, root, q), root)) <= 1e-10)
          push_orbit(out, m, orbit_from_point(m, root, q));
        break;
      }
    }
  }
}

}  // namespace

PeriodicOrbit orbit_from_point(const MapSpec& m, double x, int period) {
  PeriodicOrbit o;
  o.period = period;
  o.points.resize(period);
  o.itinerary.resize(period);
  double mult = 1.0;
  bool dok = true;
  double y = m.circle_flag ? m.reduce(x) : std::clamp(x, m.lo, m.hi);
  for (int i = 0; i < period; ++i) {
    o.points[i] = y;
    o.itinerary[i] = symbol_char(branch_of(m, y));
    try {
      mult *= derivative(m, y, 1);
    } catch (const NonDifferentiable&) {
      dok = false;
    }
    y = eval(m, y);
  }
  o.multiplier = dok ? mult : std::numeric_limits<double>::quiet_NaN();
  Metric mt = m.metric();
  o.gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i < period; ++i)
    for (int j = i + 1; j < period; ++j)
      o.gap = std::min(o.gap, mt.dist(o.points[i], o.points[j]));
  canonical_rotation(o);
  return o;
}

bool same_orbit(const PeriodicOrbit& a, const PeriodicOrbit& b, const Metric& metric,
                double tol) {
  if (a.period != b.period) return false;
  for (double x : a.points) {
    double best = std::numeric_limits<double>::infinity();
    for (double y : b.points) best = std::min(best, metric.dist(x, y));
    if (best > tol) return false;
  }
  return true;
}

std::vector<PeriodicOrbit> enumerate_periodic(const MapSpec& m, int max_period) {
  if (max_period < 1) throw InvalidInput("max_period must be >= 1");
  std::vector<PeriodicOrbit> out;
  bool necklace = false;
  switch (m.family) {
    case MapFamily::Doubling: necklace = true; break;
    case MapFamily::Tent: necklace = m.s >= 1.0; break;
    case MapFamily::Logistic: necklace = true; break;
    case MapFamily::QuadraticReal: necklace = true; break;
    case MapFamily::PiecewiseLinearMarkov: {
      necklace = true;
      for (double sl : m.slopes)
        if (std::fabs(sl) < 1.0) necklace = false;
      break;
    }
    default: necklace = false; break;
  }
  if (necklace) necklace_enumerate(m, max_period, out);
  else dense_enumerate(m, max_period, out);
  attracting_pass(m, max_period, out);
  std::sort(out.begin(), out.end(), [](const PeriodicOrbit& a, const PeriodicOrbit& b) {
    if (a.period != b.period) return a.period < b.period;
    return a.base() < b.base();
  });
  return out;
}

double birkhoff_average(const PeriodicOrbit& o, const Potential& p) {
  double s = 0.0;
  for (double x : o.points) s += eval_potential(p, x);
  return s / static_cast<double>(o.period);
}

int pick_maximizing(const std::vector<PeriodicOrbit>& orbits, const Potential& p,
                    double* best_avg) {
  int best = -1;
  double bavg = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < orbits.size(); ++i) {
    double avg = birkhoff_average(orbits[i], p);
    bool take = false;
    if (avg > bavg + 1e-12) {
      take = true;
    } else if (best >= 0 && std::fabs(avg - bavg) <= 1e-12) {
      const auto& cur = orbits[best];
      const auto& cand = orbits[i];
      if (cand.period < cur.period ||
          (cand.period == cur.period && cand.itinerary < cur.itinerary))
        take = true;
    }
    if (take) {
      best = static_cast<int>(i);
      bavg = avg;
    }
  }
  if (best_avg) *best_avg = bavg;
  return best;
}

std::pair<PeriodicOrbit, double> maximizing_orbit(const MapSpec& m, const Potential& p,
                                                  int max_period) {
  auto orbits = enumerate_periodic(m, max_period);
  double q = 0.0;
  int idx = pick_maximizing(orbits, p, &q);
  if (idx < 0) throw SearchFailed("no periodic orbits found up to the requested period");
  return {orbits[idx], q};
}

OrbitContinuation continue_orbit(const PeriodicOrbit& source, const MapSpec& map_f,
                                 const MapSpec& map_g) {
  (void)map_f;
  int p = source.period;
  double x = source.base();
  if (!newton_polish(map_g, x, p))
    throw NewtonDiverged("orbit continuation failed from base " + g17(source.base()));
  Metric mt = map_g.metric();
  for (int q = 1; q < p; ++q)
    if (p % q == 0 && mt.dist(iterate_n(map_g, x, q), x) <= 1e-8)
      throw PeriodChanged("minimal period dropped to " + std::to_string(q));
  OrbitContinuation res;
  res.source = source;
  res.d_g = 0.0;
  double y = x;
  for (int i = 0; i < p; ++i) {
    res.d_g = std::max(res.d_g, mt.dist(source.points[i], y));
    y = eval(map_g, y);
  }
  res.target = orbit_from_point(map_g, x, p);
  res.success = true;
  return res;
}

}  // namespace ergopt
