#include "ergopt/subaction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace ergopt {

namespace {

// One sup-form sweep: T[u](x) = max_k { u_k + phi_k - Q - C d(f(x_k), x)^a }.
// A fixed point satisfies phi + u - u(f(.)) <= Q with equality along
// maximizing orbits.
struct Sweeper {
  const std::vector<double>& grid;
  std::vector<double> y;    // f at nodes
  std::vector<double> phi;  // potential at nodes
  double C, alpha, Q;
  Metric metric;
  // alpha == 1 machinery: nodes of y sorted, tripled on the circle
  std::vector<int> order;
  std::vector<double> ys;
  std::vector<int> src;

  Sweeper(const std::vector<double>& grid_, const MapSpec& m, const Potential& p, double Q_,
          double C_, double alpha_)
      : grid(grid_), C(C_), alpha(alpha_), Q(Q_), metric(m.metric()) {
    int n = static_cast<int>(grid.size());
    y.resize(n);
    phi.resize(n);
    for (int i = 0; i < n; ++i) {
      y[i] = eval(m, grid[i]);
      phi[i] = eval_potential(p, grid[i]);
    }
    if (alpha == 1.0) {
      order.resize(n);
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](int a, int b) { return y[a] < y[b]; });
      int reps = metric.circle ? 3 : 1;
      double per = metric.period;
      for (int r = 0; r < reps; ++r) {
        double off = metric.circle ? (r - 1) * per : 0.0;
        for (int k : order) {
          ys.push_back(y[k] + off);
          src.push_back(k);
        }
      }
    }
  }

  void apply(const std::vector<double>& u, std::vector<double>& out) const {
    int n = static_cast<int>(grid.size());
    out.resize(n);
    if (alpha == 1.0) {
      int mN = static_cast<int>(ys.size());
      std::vector<double> pre(mN), suf(mN);
      double run = -std::numeric_limits<double>::infinity();
      for (int i = 0; i < mN; ++i) {
        int k = src[i];
        run = std::max(run, u[k] + phi[k] - Q + C * ys[i]);
        pre[i] = run;
      }
      run = -std::numeric_limits<double>::infinity();
      for (int i = mN - 1; i >= 0; --i) {
        int k = src[i];
        run = std::max(run, u[k] + phi[k] - Q - C * ys[i]);
        suf[i] = run;
      }
      int pos = 0;  // first index with ys >= x, grid ascending
      for (int j = 0; j < n; ++j) {
        double x = grid[j];
        while (pos < mN && ys[pos] < x) ++pos;
        double v = -std::numeric_limits<double>::infinity();
        if (pos > 0) v = std::max(v, pre[pos - 1] - C * x);
        if (pos < mN) v = std::max(v, suf[pos] + C * x);
        out[j] = v;
      }
    } else {
      for (int j = 0; j < n; ++j) {
        double x = grid[j], v = -std::numeric_limits<double>::infinity();
        for (int k = 0; k < n; ++k)
          v = std::max(v, u[k] + phi[k] - Q - C * std::pow(metric.dist(y[k], x), alpha));
        out[j] = v;
      }
    }
  }
};

std::vector<double> make_grid(const MapSpec& m, int n) {
  if (n < 2) throw InvalidInput("grid needs at least two nodes");
  std::vector<double> g(n);
  double span = m.hi - m.lo;
  for (int j = 0; j < n; ++j)
    g[j] = m.lo + span * j / (m.circle_flag ? n : n - 1);
  return g;
}

double grid_seminorm(const std::vector<double>& x, const std::vector<double>& v, double alpha,
                     const Metric& metric) {
  double s = 0.0;
  size_t n = x.size();
  if (alpha == 1.0) {
    for (size_t i = 0; i + 1 < n; ++i)
      s = std::max(s, std::fabs(v[i + 1] - v[i]) / (x[i + 1] - x[i]));
    if (metric.circle) {
      double w = x[0] + metric.period - x.back();
      if (w > 0) s = std::max(s, std::fabs(v[0] - v.back()) / w);
    }
  } else {
    for (size_t i = 0; i < n; ++i)
      for (size_t j = i + 1; j < n; ++j) {
        double d = metric.dist(x[i], x[j]);
        if (d > 0) s = std::max(s, std::fabs(v[i] - v[j]) / std::pow(d, alpha));
      }
  }
  return s;
}

}  // namespace

GridFn SubAction::as_grid_fn() const {
  GridFn g;
  g.x = grid;
  g.v = u;
  g.circle = circle;
  g.period = period;
  return g;
}

GridFn lax_oleinik_step(const GridFn& u, const MapSpec& m, const Potential& p, double Q,
                        double C_pen, double alpha) {
  if (u.x.empty() || u.x.size() != u.v.size()) throw GridMismatch("bad grid function");
  if (C_pen <= 0.0) throw InvalidInput("penalty coefficient must be positive");
  Sweeper sw(u.x, m, p, Q, C_pen, alpha);
  GridFn out = u;
  sw.apply(u.v, out.v);
  return out;
}

SubAction compute_subaction(const MapSpec& m, const Potential& p, int n, double tol,
                            int max_iter, std::optional<double> Q_hint,
                            std::optional<double> C_pen) {
  SubAction s;
  s.grid = make_grid(m, n);
  s.alpha = p.alpha;
  s.circle = m.circle_flag;
  s.period = m.hi - m.lo;

  double Q = Q_hint ? *Q_hint : maximizing_orbit(m, p, 12).second;
  double sem_phi = seminorm(p).holder_seminorm;
  double C;
  if (C_pen) {
    C = *C_pen;
  } else {
    if (!(sem_phi < std::numeric_limits<double>::infinity()))
      throw InvalidInput("potential has unbounded seminorm; supply a penalty coefficient");
    if (sem_phi == 0.0) {
      C = 1.0;
    } else {
      double la = std::pow(estimate_hyperbolic(m).lambda, p.alpha);
      C = sem_phi * la / (la - 1.0) * 4.0;
    }
  }
  if (C <= 0.0) throw InvalidInput("penalty coefficient must be positive");

  Sweeper sw(s.grid, m, p, Q, C, p.alpha);
  std::vector<double> u(s.grid.size(), 0.0), tu;
  bool converged = false;
  double spread = 0.0, drift = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    sw.apply(u, tu);
    double hi = -std::numeric_limits<double>::infinity(), lo = std::numeric_limits<double>::infinity();
    for (size_t j = 0; j < u.size(); ++j) {
      double d = tu[j] - u[j];
      hi = std::max(hi, d);
      lo = std::min(lo, d);
    }
    spread = hi - lo;
    if (spread < tol) {
      // uniform drift = the operator's additive eigenvalue; absorb it into Q
      drift = 0.5 * (hi + lo);
      converged = true;
      break;
    }
    // Half-step averaging: plain power sweeps oscillate forever when the
    // critical cycle has period > 1; the damped update converges regardless.
    double base = tu[0];
    for (size_t j = 0; j < u.size(); ++j) u[j] = 0.5 * (u[j] + tu[j] - base);
  }
  if (!converged)
    throw NotConverged("sup-change spread " + g17(spread) + " after " +
                       std::to_string(max_iter) + " sweeps (is Q too small?)");
  s.Q_used = Q + drift;
  s.u = u;

  // independent defect pass against the converged u
  GridFn ufn = s.as_grid_fn();
  double lip_u = ufn.lip();
  s.contact_tol = 10.0 * tol + (s.grid.size() >= 2 ? (s.grid[1] - s.grid[0]) * lip_u : 0.0);
  s.defect = -std::numeric_limits<double>::infinity();
  for (size_t j = 0; j < s.grid.size(); ++j) {
    double d = sw.phi[j] + s.u[j] - ufn(sw.y[j]) - s.Q_used;
    s.defect = std::max(s.defect, d);
    if (d >= -s.contact_tol) s.contact_set.push_back(static_cast<int>(j));
  }
  if (!s.contact_set.empty()) {
    double anchor = s.u[s.contact_set.front()];
    for (auto& v : s.u) v -= anchor;
  }

  double sem_u = grid_seminorm(s.grid, s.u, s.alpha, m.metric());
  if (sem_phi > 0.0 && sem_phi < std::numeric_limits<double>::infinity())
    s.seminorm_ratio = sem_u / sem_phi;
  else
    s.seminorm_ratio = sem_u == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return s;
}

std::pair<double, std::vector<int>> mane_defect(const SubAction& s, const MapSpec& m,
                                                const Potential& p) {
  GridFn ufn = s.as_grid_fn();
  double worst = -std::numeric_limits<double>::infinity();
  std::vector<int> violations;
  for (size_t j = 0; j < s.grid.size(); ++j) {
    double x = s.grid[j];
    double d = eval_potential(p, x) + s.u[j] - ufn(eval(m, x)) - s.Q_used;
    worst = std::max(worst, d);
    if (d > s.contact_tol) violations.push_back(static_cast<int>(j));
  }
  return {worst, violations};
}

std::vector<double> attracting_subaction(const PeriodicOrbit& orbit, const Potential& p,
                                         double Q) {
  std::vector<double> w(orbit.period, 0.0);
  for (int j = 1; j < orbit.period; ++j)
    w[j] = w[j - 1] + eval_potential(p, orbit.points[j - 1]) - Q;
  return w;
}

}  // namespace ergopt
