#include "ergopt/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace ergopt {

namespace {

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// Ascending coefficients in (x - anchor) for one boundary polynomial:
// the stored Taylor jet plus the free top-degree term.
std::vector<double> side_coeffs(const std::vector<double>& taylor, double k, bool left) {
  int r = static_cast<int>(taylor.size()) - 1;
  std::vector<double> c = taylor;
  double sign = left ? ((r + 1) % 2 == 0 ? 1.0 : -1.0) : 1.0;
  // (-1)^{r+1}: even r+1 -> +1
  c.push_back(sign * k / factorial(r + 1));
  return c;
}

double poly_eval_at(const std::vector<double>& c, double u, int order) {
  // sum_{i>=order} c[i] * i!/(i-order)! * u^{i-order}, Horner form
  int n = static_cast<int>(c.size());
  if (order >= n) return 0.0;
  double acc = 0.0;
  for (int i = n - 1; i >= order; --i) {
    double f = 1.0;
    for (int j = 0; j < order; ++j) f *= (i - j);
    acc = acc * u + c[i] * f;
  }
  return acc;
}

int plm_piece(const MapSpec& m, double x) {
  int n = static_cast<int>(m.slopes.size());
  if (x >= m.breaks[n]) return n - 1;  // last piece closed
  int lo = 0, hi = n;
  while (hi - lo > 1) {
    int mid = (lo + hi) / 2;
    if (x >= m.breaks[mid]) lo = mid; else hi = mid;
  }
  return lo;
}

void check_domain(const MapSpec& m, double& x) {
  if (m.circle_flag) {
    x = m.reduce(x);
    return;
  }
  if (x < m.lo - 1e-9 || x > m.hi + 1e-9)
    throw DomainError("point " + g17(x) + " outside [" + g17(m.lo) + "," + g17(m.hi) + "]");
  x = std::clamp(x, m.lo, m.hi);
}

double ext_eval(const ExtensionPieces& e, double x, int order) {
  if (x < e.a) return poly_eval_at(side_coeffs(e.left_taylor, e.left_k, true), x - e.a, order);
  if (x > e.b) return poly_eval_at(side_coeffs(e.right_taylor, e.right_k, false), x - e.b, order);
  return e.inner.df(x, order);
}

double grid_sup_abs(const MapSpec& m, int order, int n) {
  double s = 0.0;
  for (int i = 0; i <= n; ++i) {
    double x = m.lo + (m.hi - m.lo) * i / n;
    try {
      s = std::max(s, std::fabs(derivative(m, x, order)));
    } catch (const NonDifferentiable&) {
    }
  }
  return s;
}

// Exact infimum of |f'| over [l,h] for families whose |f'| is piecewise
// monotone with known break structure; NaN when no analytic form exists.
double analytic_abs_dmin(const MapSpec& m, double l, double h) {
  switch (m.family) {
    case MapFamily::Doubling:
      return 2.0;
    case MapFamily::Tent:
      return m.s;
    case MapFamily::Logistic:
      if (l <= 0.5 && 0.5 <= h) return 0.0;
      return m.a * std::min(std::fabs(1 - 2 * l), std::fabs(1 - 2 * h));
    case MapFamily::QuadraticReal:
      if (l <= 0.0 && 0.0 <= h) return 0.0;
      return 2.0 * std::min(std::fabs(l), std::fabs(h));
    case MapFamily::PiecewiseLinearMarkov: {
      double best = std::numeric_limits<double>::infinity();
      int n = static_cast<int>(m.slopes.size());
      for (int i = 0; i < n; ++i) {
        double pl = m.breaks[i], ph = m.breaks[i + 1];
        if (std::max(pl, l) < std::min(ph, h) || (l <= pl && pl < h))
          best = std::min(best, std::fabs(m.slopes[i]));
      }
      if (l <= m.breaks[n] && m.breaks[n] <= h) best = std::min(best, std::fabs(m.slopes[n - 1]));
      return best;
    }
    case MapFamily::SineWave: {
      double best = std::numeric_limits<double>::infinity();
      auto dv = [&](double x) { return std::fabs(derivative(m, x, 1)); };
      best = std::min(dv(l), dv(h));
      for (double z : {0.25, 0.75})
        if (l <= z && z <= h) best = 0.0;
      for (double z : {0.0, 0.5, 1.0})  // |cos| maxima; needed only for completeness
        if (l < z && z < h) best = std::min(best, dv(z));
      return best;
    }
    default:
      return std::numeric_limits<double>::quiet_NaN();
  }
}

double sup_abs_second(const MapSpec& m) {
  switch (m.family) {
    case MapFamily::Doubling:
    case MapFamily::Tent:
    case MapFamily::PiecewiseLinearMarkov:
      return 0.0;
    case MapFamily::Logistic:
      return 2.0 * m.a;
    case MapFamily::QuadraticReal:
      return 2.0;
    case MapFamily::SineWave:
      return 4.0 * kPi * kPi * std::fabs(m.amp);
    default:
      return 1.5 * grid_sup_abs(m, 2, 4096);
  }
}

}  // namespace

MapSpec MapSpec::doubling() {
  MapSpec m;
  m.family = MapFamily::Doubling;
  m.circle_flag = true;
  m.smoothness_order = 1;
  return m;
}

MapSpec MapSpec::tent(double s) {
  if (s <= 0.0 || s > 2.0) throw InvalidInput("tent slope must be in (0,2]");
  MapSpec m;
  m.family = MapFamily::Tent;
  m.s = s;
  m.smoothness_order = 1;
  return m;
}

MapSpec MapSpec::logistic(double a) {
  if (a < 0.0 || a > 4.0) throw InvalidInput("logistic parameter must be in [0,4]");
  MapSpec m;
  m.family = MapFamily::Logistic;
  m.a = a;
  m.smoothness_order = 4;
  return m;
}

MapSpec MapSpec::quadratic(double c) {
  if (c > 0.25) throw InvalidInput("x^2+c has no invariant interval for c > 1/4");
  MapSpec m;
  m.family = MapFamily::QuadraticReal;
  m.c = c;
  double beta = (1.0 + std::sqrt(1.0 - 4.0 * c)) / 2.0;
  m.lo = -beta;
  m.hi = beta;
  m.smoothness_order = 4;
  return m;
}

MapSpec MapSpec::markov(std::vector<double> breaks, std::vector<double> values,
                        std::vector<double> slopes) {
  if (breaks.size() < 2 || values.size() + 1 != breaks.size() || slopes.size() != values.size())
    throw InvalidInput("markov map needs m+1 breakpoints, m values, m slopes");
  for (size_t i = 0; i + 1 < breaks.size(); ++i)
    if (!(breaks[i] < breaks[i + 1])) throw InvalidInput("breakpoints must increase");
  MapSpec m;
  m.family = MapFamily::PiecewiseLinearMarkov;
  m.lo = breaks.front();
  m.hi = breaks.back();
  m.breaks = std::move(breaks);
  m.values = std::move(values);
  m.slopes = std::move(slopes);
  m.smoothness_order = 1;
  // Markov condition: piece endpoint images must land on breakpoints.
  auto on_break = [&](double y) {
    for (double bp : m.breaks)
      if (std::fabs(y - bp) <= 1e-9) return true;
    return false;
  };
  for (size_t i = 0; i < m.slopes.size(); ++i) {
    double left = m.values[i];
    double right = m.values[i] + m.slopes[i] * (m.breaks[i + 1] - m.breaks[i]);
    if (!on_break(left) || !on_break(right))
      throw InvalidInput("piece image does not land on breakpoints");
    if (std::min(left, right) < m.lo - 1e-9 || std::max(left, right) > m.hi + 1e-9)
      throw InvalidInput("piece image leaves the domain");
  }
  return m;
}

MapSpec MapSpec::sine(double mean, double amp, int r) {
  MapSpec m;
  m.family = MapFamily::SineWave;
  m.mean = mean;
  m.amp = amp;
  m.smoothness_order = r;
  if (mean - std::fabs(amp) < 0.0 || mean + std::fabs(amp) > 1.0)
    throw InvalidInput("sine map range leaves [0,1]");
  return m;
}

MapSpec MapSpec::extension(ExtensionPieces pieces, int r) {
  MapSpec m;
  m.family = MapFamily::PolynomialExtension;
  m.lo = pieces.a0;
  m.hi = pieces.b0;
  m.smoothness_order = r;
  m.ext = std::make_shared<const ExtensionPieces>(std::move(pieces));
  return m;
}

double MapSpec::reduce(double x) const {
  double len = hi - lo;
  double t = (x - lo) / len;
  t -= std::floor(t);
  return lo + t * len;
}

double eval(const MapSpec& m, double x) {
  check_domain(m, x);
  switch (m.family) {
    case MapFamily::Doubling: {
      double y = 2.0 * x;
      return y >= 1.0 ? y - 1.0 : y;
    }
    case MapFamily::Tent:
      return x <= 0.5 ? m.s * x : m.s * (1.0 - x);
    case MapFamily::Logistic:
      return m.a * x * (1.0 - x);
    case MapFamily::QuadraticReal:
      return x * x + m.c;
    case MapFamily::PiecewiseLinearMarkov: {
      int i = plm_piece(m, x);
      return m.values[i] + m.slopes[i] * (x - m.breaks[i]);
    }
    case MapFamily::SineWave:
      return m.mean + m.amp * std::sin(2.0 * kPi * x);
    case MapFamily::PolynomialExtension:
      return ext_eval(*m.ext, x, 0);
  }
  throw Error("unreachable");
}

double derivative(const MapSpec& m, double x, int order) {
  if (order < 0) throw InvalidInput("negative derivative order");
  if (order == 0) return eval(m, x);
  if (order > m.smoothness_order) throw OrderTooHigh("order " + std::to_string(order));
  check_domain(m, x);
  switch (m.family) {
    case MapFamily::Doubling:
      return order == 1 ? 2.0 : 0.0;
    case MapFamily::Tent:
      if (x == 0.5) throw NonDifferentiable("tent kink at 0.5");
      return order == 1 ? (x < 0.5 ? m.s : -m.s) : 0.0;
    case MapFamily::Logistic:
      if (order == 1) return m.a * (1.0 - 2.0 * x);
      if (order == 2) return -2.0 * m.a;
      return 0.0;
    case MapFamily::QuadraticReal:
      if (order == 1) return 2.0 * x;
      if (order == 2) return 2.0;
      return 0.0;
    case MapFamily::PiecewiseLinearMarkov: {
      for (size_t i = 1; i + 1 < m.breaks.size(); ++i)
        if (x == m.breaks[i]) throw NonDifferentiable("breakpoint " + g17(x));
      return order == 1 ? m.slopes[plm_piece(m, x)] : 0.0;
    }
    case MapFamily::SineWave: {
      double w = 2.0 * kPi;
      return m.amp * std::pow(w, order) * std::sin(w * x + order * kPi / 2.0);
    }
    case MapFamily::PolynomialExtension:
      return ext_eval(*m.ext, x, order);
  }
  throw Error("unreachable");
}

int branch_count(const MapSpec& m) {
  switch (m.family) {
    case MapFamily::Doubling:
    case MapFamily::Tent:
    case MapFamily::Logistic:
    case MapFamily::QuadraticReal:
      return 2;
    case MapFamily::PiecewiseLinearMarkov:
      return static_cast<int>(m.slopes.size());
    case MapFamily::SineWave:
      return 3;
    case MapFamily::PolynomialExtension:
      return 2 + (m.ext->inner_spec ? branch_count(*m.ext->inner_spec) : 1);
  }
  throw Error("unreachable");
}

int branch_of(const MapSpec& m, double x) {
  if (m.circle_flag) x = m.reduce(x);
  switch (m.family) {
    case MapFamily::Doubling:
    case MapFamily::Tent:
    case MapFamily::Logistic:
      return x < 0.5 ? 0 : 1;
    case MapFamily::QuadraticReal:
      return x < 0.0 ? 0 : 1;
    case MapFamily::PiecewiseLinearMarkov:
      return plm_piece(m, x);
    case MapFamily::SineWave:
      return x < 0.25 ? 0 : (x < 0.75 ? 1 : 2);
    case MapFamily::PolynomialExtension: {
      const auto& e = *m.ext;
      if (x < e.a) return 0;
      if (x > e.b) return branch_count(m) - 1;
      return 1 + (e.inner_spec ? branch_of(*e.inner_spec, x) : 0);
    }
  }
  throw Error("unreachable");
}

namespace {

// Bisection for a continuous strictly monotone piece.
std::optional<double> monotone_solve(const std::function<double(double)>& f, double lo, double hi,
                                     double y) {
  double fl = f(lo), fh = f(hi);
  bool inc = fl < fh;
  double a = std::min(fl, fh), b = std::max(fl, fh);
  if (y < a - 1e-13 || y > b + 1e-13) return std::nullopt;
  double l = lo, h = hi;
  for (int it = 0; it < 200 && h - l > 1e-15; ++it) {
    double mid = 0.5 * (l + h);
    double v = f(mid);
    if ((v < y) == inc) l = mid; else h = mid;
  }
  return 0.5 * (l + h);
}

}  // namespace

std::vector<PreimageBranch> inverse_branches(const MapSpec& m, double y) {
  std::vector<PreimageBranch> out;
  auto push = [&](int id, double x) {
    for (const auto& p : out)
      if (std::fabs(p.x - x) < 1e-14) return;
    out.push_back({id, x});
  };
  switch (m.family) {
    case MapFamily::Doubling: {
      double yy = m.reduce(y);
      push(0, yy / 2.0);
      push(1, (yy + 1.0) / 2.0);
      break;
    }
    case MapFamily::Tent: {
      if (y >= 0.0 && y <= m.s / 2.0 + 1e-15) {
        double x0 = y / m.s;
        if (x0 <= 0.5) push(0, x0);
        double x1 = 1.0 - y / m.s;
        if (x1 >= 0.5) push(1, x1);
      }
      break;
    }
    case MapFamily::Logistic: {
      if (m.a == 0.0) break;
      double disc = 1.0 - 4.0 * y / m.a;
      if (y < -1e-15 || disc < -1e-12) break;
      double sq = std::sqrt(std::max(0.0, disc));
      double x0 = (1.0 - sq) / 2.0, x1 = (1.0 + sq) / 2.0;
      if (x0 >= -1e-12 && x0 <= 1.0 + 1e-12) push(0, std::clamp(x0, 0.0, 1.0));
      if (x1 >= -1e-12 && x1 <= 1.0 + 1e-12) push(1, std::clamp(x1, 0.0, 1.0));
      break;
    }
    case MapFamily::QuadraticReal: {
      double d = y - m.c;
      if (d < -1e-15) break;
      double sq = std::sqrt(std::max(0.0, d));
      if (sq <= m.hi + 1e-12) {
        push(0, std::clamp(-sq, m.lo, m.hi));
        push(1, std::clamp(sq, m.lo, m.hi));
      }
      break;
    }
    case MapFamily::PiecewiseLinearMarkov: {
      int n = static_cast<int>(m.slopes.size());
      for (int i = 0; i < n; ++i) {
        if (m.slopes[i] == 0.0) continue;
        double x = m.breaks[i] + (y - m.values[i]) / m.slopes[i];
        bool last = (i == n - 1);
        if (x >= m.breaks[i] - 1e-12 && (x < m.breaks[i + 1] || (last && x <= m.breaks[i + 1] + 1e-12)))
          push(i, std::clamp(x, m.breaks[i], m.breaks[i + 1]));
      }
      break;
    }
    case MapFamily::SineWave: {
      if (m.amp == 0.0) break;
      double t = (y - m.mean) / m.amp;
      if (std::fabs(t) > 1.0 + 1e-12) break;
      t = std::clamp(t, -1.0, 1.0);
      double th = std::asin(t) / (2.0 * kPi);  // in [-1/4, 1/4]
      if (th >= 0.0) push(0, th); else push(2, th + 1.0);
      push(1, 0.5 - th);
      break;
    }
    case MapFamily::PolynomialExtension: {
      const auto& e = *m.ext;
      auto g = [&](double x) { return ext_eval(e, x, 0); };
      if (auto x = monotone_solve(g, e.a0, e.a, y)) push(0, *x);
      if (e.inner_spec) {
        for (const auto& p : inverse_branches(*e.inner_spec, y)) push(1 + p.id, p.x);
      } else {
        throw BranchStructureUnavailable("inner map has no branch table");
      }
      if (auto x = monotone_solve(g, e.b, e.b0, y)) push(branch_count(m) - 1, *x);
      break;
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& p, const auto& q) { return p.x < q.x; });
  return out;
}

std::optional<double> branch_preimage(const MapSpec& m, int branch, double y) {
  switch (m.family) {
    case MapFamily::Doubling:
      return (m.reduce(y) + branch) / 2.0;
    case MapFamily::Tent: {
      if (y < -1e-15 || y > m.s / 2.0 + 1e-15) return std::nullopt;
      double x = branch == 0 ? y / m.s : 1.0 - y / m.s;
      if ((branch == 0 && x <= 0.5 + 1e-15) || (branch == 1 && x >= 0.5 - 1e-15)) return x;
      return std::nullopt;
    }
    case MapFamily::PiecewiseLinearMarkov: {
      if (branch < 0 || branch >= static_cast<int>(m.slopes.size()) || m.slopes[branch] == 0.0)
        return std::nullopt;
      double x = m.breaks[branch] + (y - m.values[branch]) / m.slopes[branch];
      bool last = branch + 1 == static_cast<int>(m.slopes.size());
      double hi = m.breaks[branch + 1];
      if (x >= m.breaks[branch] - 1e-12 && (x < hi || (last && x <= hi + 1e-12)))
        return std::clamp(x, m.breaks[branch], hi);
      return std::nullopt;
    }
    default: {
      for (const auto& p : inverse_branches(m, y))
        if (p.id == branch) return p.x;
      return std::nullopt;
    }
  }
}

HyperbolicEstimate estimate_hyperbolic(const MapSpec& m, const std::vector<Interval>& region,
                                       int grid_n) {
  if (grid_n < 2) throw InvalidInput("grid_n must be >= 2");
  if (region.empty()) throw InvalidInput("empty region");
  for (const auto& iv : region)
    if (iv.lo < m.lo - 1e-12 || iv.hi > m.hi + 1e-12 || iv.lo > iv.hi)
      throw InvalidInput("region not inside the domain");

  bool analytic = m.family != MapFamily::PolynomialExtension;
  double margin = 0.0;
  if (!analytic) margin = sup_abs_second(m) * (m.hi - m.lo) / grid_n / 2.0;

  auto inf_over = [&](double l, double h) {
    l = std::max(l, m.lo);
    h = std::min(h, m.hi);
    if (analytic) return analytic_abs_dmin(m, l, h);
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= grid_n; ++i) {
      double x = l + (h - l) * i / grid_n;
      try {
        best = std::min(best, std::fabs(derivative(m, x, 1)));
      } catch (const NonDifferentiable&) {
      }
    }
    return best - margin;
  };

  auto inf_inflated = [&](double delta) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& iv : region) {
      if (m.circle_flag && 2.0 * delta + (iv.hi - iv.lo) >= m.hi - m.lo)
        best = std::min(best, inf_over(m.lo, m.hi));
      else
        best = std::min(best, inf_over(iv.lo - delta, iv.hi + delta));
    }
    return best;
  };

  HyperbolicEstimate est;
  est.K = 1.0;
  est.region = region;
  est.method = analytic ? EstimateMethod::AnalyticDerivativeBound : EstimateMethod::GridInfimum;
  est.lambda = inf_inflated(0.0);
  if (!(est.lambda > 1.0)) throw NotExpanding("inf |f'| = " + g17(est.lambda) + " over region");
  est.lip = lipschitz_constant(m);

  // Largest radius whose inflated region still has |f'| >= (1+lambda)/2: a
  // certified-positive expansion margin (the exact-lambda neighborhood can be
  // empty when the infimum sits on the region boundary).
  double thr = (1.0 + est.lambda) / 2.0;
  double cap = m.hi - m.lo;
  if (inf_inflated(cap) >= thr) {
    est.delta = cap;
  } else {
    double lo = 0.0, hi = cap;
    for (int it = 0; it < 60; ++it) {
      double mid = 0.5 * (lo + hi);
      if (inf_inflated(mid) >= thr) lo = mid; else hi = mid;
    }
    est.delta = lo;
    if (est.delta <= 1e-12) throw NotExpanding("no positive expansion margin around region");
  }
  return est;
}

HyperbolicEstimate estimate_hyperbolic(const MapSpec& m, int grid_n) {
  return estimate_hyperbolic(m, {Interval{m.lo, m.hi}}, grid_n);
}

double lipschitz_constant(const MapSpec& m) {
  switch (m.family) {
    case MapFamily::Doubling: return 2.0;
    case MapFamily::Tent: return m.s;
    case MapFamily::Logistic: return m.a;
    case MapFamily::QuadraticReal: return 2.0 * m.hi;
    case MapFamily::PiecewiseLinearMarkov: {
      double lip = 0.0;
      for (double sl : m.slopes) lip = std::max(lip, std::fabs(sl));
      return lip;
    }
    case MapFamily::SineWave: return 2.0 * kPi * std::fabs(m.amp);
    default: {
      int n = 8192;
      return grid_sup_abs(m, 1, n) + sup_abs_second(m) * (m.hi - m.lo) / n / 2.0;
    }
  }
}

SmoothFn polynomial_fn(std::vector<double> coeffs, double lo, double hi, int r) {
  SmoothFn f;
  f.lo = lo;
  f.hi = hi;
  f.r = r;
  f.poly = coeffs;
  f.df = [c = std::move(coeffs)](double x, int order) { return poly_eval_at(c, x, order); };
  return f;
}

SmoothFn to_smooth(const MapSpec& m) {
  SmoothFn f;
  f.lo = m.lo;
  f.hi = m.hi;
  f.r = m.smoothness_order;
  switch (m.family) {
    case MapFamily::Logistic: f.poly = {0.0, m.a, -m.a}; break;
    case MapFamily::QuadraticReal: f.poly = {m.c, 0.0, 1.0}; break;
    default: break;
  }
  f.df = [m](double x, int order) { return order == 0 ? eval(m, x) : derivative(m, x, order); };
  return f;
}

}  // namespace ergopt
