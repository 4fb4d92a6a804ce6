#include "ergopt/extension.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ergopt/orbits.hpp"

namespace ergopt {

namespace {

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

std::vector<double> poly_derive(const std::vector<double>& c) {
  std::vector<double> d;
  for (size_t i = 1; i < c.size(); ++i) d.push_back(c[i] * static_cast<double>(i));
  if (d.empty()) d.push_back(0.0);
  return d;
}

double poly_val(const std::vector<double>& c, double u) {
  double acc = 0.0;
  for (size_t i = c.size(); i-- > 0;) acc = acc * u + c[i];
  return acc;
}

double poly_val_order(const std::vector<double>& c, double u, int order) {
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

// All real roots in [lo,hi], isolated recursively between critical points.
std::vector<double> poly_roots_in(std::vector<double> c, double lo, double hi) {
  while (c.size() > 1 && c.back() == 0.0) c.pop_back();
  std::vector<double> out;
  int deg = static_cast<int>(c.size()) - 1;
  if (deg <= 0) return out;
  if (deg == 1) {
    double root = -c[0] / c[1];
    if (root >= lo && root <= hi) out.push_back(root);
    return out;
  }
  std::vector<double> nodes{lo};
  for (double t : poly_roots_in(poly_derive(c), lo, hi)) nodes.push_back(t);
  nodes.push_back(hi);
  std::sort(nodes.begin(), nodes.end());
  for (size_t i = 0; i + 1 < nodes.size(); ++i) {
    double u = nodes[i], v = nodes[i + 1];
    double fu = poly_val(c, u), fv = poly_val(c, v);
    if (fu == 0.0) out.push_back(u);
    if (fu * fv < 0.0) {
      for (int it = 0; it < 120 && v - u > 1e-16 * (1.0 + std::fabs(u)); ++it) {
        double mid = 0.5 * (u + v), fm = poly_val(c, mid);
        if ((fm < 0) == (fu < 0)) {
          u = mid;
          fu = fm;
        } else {
          v = mid;
        }
      }
      out.push_back(0.5 * (u + v));
    }
  }
  if (poly_val(c, hi) == 0.0) out.push_back(hi);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(),
                        [](double x, double y) { return std::fabs(x - y) < 1e-14; }),
            out.end());
  return out;
}

double poly_sup_abs(const std::vector<double>& c, double lo, double hi) {
  double best = std::max(std::fabs(poly_val(c, lo)), std::fabs(poly_val(c, hi)));
  for (double t : poly_roots_in(poly_derive(c), lo, hi))
    best = std::max(best, std::fabs(poly_val(c, t)));
  return best;
}

// sigma * p > 0 throughout [lo,hi]: checked at endpoints and interior extrema.
bool sign_constant(const std::vector<double>& c, double lo, double hi, double sigma) {
  if (!(sigma * poly_val(c, lo) > 0.0) || !(sigma * poly_val(c, hi) > 0.0)) return false;
  for (double t : poly_roots_in(poly_derive(c), lo, hi))
    if (!(sigma * poly_val(c, t) > 0.0)) return false;
  return true;
}

// Bisection then Newton for p(x) = level on a bracket with a sign change.
double solve_on_bracket(const BoundaryPolynomial& p, double lo, double hi, double level,
                        const char* what) {
  double fl = p.eval(lo) - level, fh = p.eval(hi) - level;
  if (fl == 0.0) return lo;
  if (fh == 0.0) return hi;
  if (fl * fh > 0.0)
    throw CaseSearchFailed(std::string(what) + ": no sign change on [" + g17(lo) + "," +
                           g17(hi) + "]");
  double u = lo, v = hi;
  for (int it = 0; it < 200 && v - u > 1e-16 * (1.0 + std::fabs(u)); ++it) {
    double mid = 0.5 * (u + v), fm = p.eval(mid) - level;
    if ((fm < 0) == (fl < 0)) {
      u = mid;
      fl = fm;
    } else {
      v = mid;
    }
  }
  double x = 0.5 * (u + v);
  for (int it = 0; it < 8; ++it) {
    double d = p.eval(x, 1);
    if (d == 0.0) break;
    double nx = x - (p.eval(x) - level) / d;
    if (nx < lo || nx > hi) break;
    x = nx;
  }
  return x;
}

// Fixed point of p beyond `cut` in direction dir; |p' - 1| > 1 there makes the
// crossing land within |p(cut) - cut| of the cut.
double fixed_point_beyond(const BoundaryPolynomial& p, double cut, double dir,
                          const char* what) {
  double gap = std::fabs(p.eval(cut) - cut);
  double far = cut + dir * (gap + 1e-6);
  double lo = std::min(cut, far), hi = std::max(cut, far);
  double fl = p.eval(lo) - lo, fh = p.eval(hi) - hi;
  if (fl * fh > 0.0)
    throw CaseSearchFailed(std::string(what) + ": fixed-point bracket has no sign change");
  double u = lo, v = hi;
  for (int it = 0; it < 200 && v - u > 1e-16 * (1.0 + std::fabs(u)); ++it) {
    double mid = 0.5 * (u + v), fm = p.eval(mid) - mid;
    if ((fm < 0) == (fl < 0)) {
      u = mid;
      fl = fm;
    } else {
      v = mid;
    }
  }
  double x = 0.5 * (u + v);
  for (int it = 0; it < 8; ++it) {
    double d = p.eval(x, 1) - 1.0;
    if (d == 0.0) break;
    double nx = x - (p.eval(x) - x) / d;
    if (nx < lo || nx > hi) break;
    x = nx;
  }
  return x;
}

// p(x) = level beyond `cut` in direction dir, |p'| > 2 bounding the distance.
double level_beyond(const BoundaryPolynomial& p, double cut, double dir, double level,
                    const char* what) {
  double gap = std::fabs(p.eval(cut) - level);
  double far = cut + dir * (0.5 * gap + 1e-6);
  return solve_on_bracket(p, std::min(cut, far), std::max(cut, far), level, what);
}

double mono_solve(const BoundaryPolynomial& p, double lo, double hi, double y,
                  const char* what) {
  return solve_on_bracket(p, lo, hi, y, what);
}

}  // namespace

std::vector<double> BoundaryPolynomial::coeffs() const {
  std::vector<double> c = taylor;
  int r = static_cast<int>(taylor.size()) - 1;
  double sign = side == Side::Left ? ((r + 1) % 2 == 0 ? 1.0 : -1.0) : 1.0;
  c.push_back(sign * k / factorial(r + 1));
  return c;
}

double BoundaryPolynomial::eval(double x, int order) const {
  return poly_val_order(coeffs(), x - anchor, order);
}

BoundaryPolynomial boundary_polynomial(const MapSpec& f, Side side, double k) {
  if (f.circle_flag) throw InvalidInput("boundary polynomials need an interval domain");
  BoundaryPolynomial p;
  p.side = side;
  p.anchor = side == Side::Left ? f.lo : f.hi;
  int r = f.smoothness_order;
  p.degree = r + 1;
  p.k = k;
  if (derivative(f, p.anchor, 1) == 0.0)
    throw ZeroDerivativeAtBoundary("map derivative vanishes at " + g17(p.anchor));
  p.taylor.resize(r + 1);
  for (int i = 0; i <= r; ++i) p.taylor[i] = derivative(f, p.anchor, i) / factorial(i);
  return p;
}

BoundaryPolynomial boundary_polynomial(const SmoothFn& f, Side side, double k) {
  BoundaryPolynomial p;
  p.side = side;
  p.anchor = side == Side::Left ? f.lo : f.hi;
  p.degree = f.r + 1;
  p.k = k;
  p.taylor.resize(f.r + 1);
  for (int i = 0; i <= f.r; ++i) p.taylor[i] = f.df(p.anchor, i) / factorial(i);
  return p;
}

double cr_norm(const SmoothFn& f) {
  if (!f.poly.empty()) {
    double best = 0.0;
    std::vector<double> c = f.poly;
    for (int i = 0; i <= f.r; ++i) {
      best = std::max(best, poly_sup_abs(c, f.lo, f.hi));
      c = poly_derive(c);
    }
    return best;
  }
  const int n = 10000;
  double best = 0.0;
  for (int i = 0; i <= f.r; ++i)
    for (int j = 0; j <= n; ++j) {
      double x = f.lo + (f.hi - f.lo) * j / n;
      best = std::max(best, std::fabs(f.df(x, i)));
    }
  return best;
}

double kw_value(int r, double norm_f, double w) {
  if (w <= 0.0) throw InvalidInput("scan scale must be positive");
  double s = 0.0, term = 1.0;
  for (int i = 0; i <= r - 1; ++i) {
    s += term;
    term *= w / (i + 1);
  }
  return factorial(r) / std::pow(w, r) * (norm_f * s + 2.0);
}

double kminus_value(int r, double norm_f, double y) {
  if (y <= 0.0) throw InvalidInput("collar width must be positive");
  return norm_f * factorial(r + 1) * (r + 1) * (1.0 + std::pow(y, -static_cast<double>(r + 1)));
}

double dr_bound(int r, double y_left, double y_right) {
  auto side_const = [&](double y) {
    double kfac = factorial(r + 1) * (r + 1) * (1.0 + std::pow(y, -static_cast<double>(r + 1)));
    double best = 0.0;
    for (int i = 0; i <= r; ++i) {
      double s = 0.0, term = 1.0;
      for (int j = 0; j <= r - i; ++j) {
        s += term;
        term *= y / (j + 1);
      }
      s += kfac * std::pow(y, static_cast<double>(r + 1 - i)) / factorial(r + 1 - i);
      best = std::max(best, s);
    }
    return best;
  };
  return 1.0 + side_const(y_left) + side_const(y_right);
}

ClaimParameters claim_parameters(const MapSpec& f, Side side) {
  if (f.circle_flag) throw InvalidInput("extensions need an interval domain");
  double a = f.lo, b = f.hi;
  double fa = eval(f, a), fb = eval(f, b);
  if (!(fa > a && fa < b && fb > a && fb < b))
    throw InvalidInput("endpoint images must be interior");
  double tau = 0.5 * std::min(fa - a, b - fb);
  int r = f.smoothness_order;
  double anchor = side == Side::Left ? a : b;
  double d1 = derivative(f, anchor, 1);
  if (d1 == 0.0) throw ZeroDerivativeAtBoundary("map derivative vanishes at " + g17(anchor));
  double sigma = d1 > 0 ? 1.0 : -1.0;
  double target;
  if (side == Side::Right)
    target = sigma > 0 ? b - tau : a + tau;
  else
    target = sigma > 0 ? a + tau : b - tau;
  // a decreasing boundary branch must start strictly beyond its level
  if (side == Side::Right && sigma < 0 && !(fb > a + tau))
    throw SearchFailed("f(b)=" + g17(fb) + " does not clear the level " + g17(a + tau));
  if (side == Side::Left && sigma < 0 && !(fa < b - tau))
    throw SearchFailed("f(a)=" + g17(fa) + " does not stay below " + g17(b - tau));

  double nf = cr_norm(to_smooth(f));
  double ksign = side == Side::Right ? sigma : -sigma;
  double dir = side == Side::Right ? 1.0 : -1.0;
  for (double w = 1.0; w >= 1e-8; w *= 0.5) {
    double k = ksign * kw_value(r, nf, w);
    BoundaryPolynomial p = boundary_polynomial(f, side, k);
    auto dc = poly_derive(p.coeffs());
    double ulo = side == Side::Right ? 0.0 : -w;
    double uhi = side == Side::Right ? w : 0.0;
    if (!sign_constant(dc, ulo, uhi, sigma)) continue;  // derivative must keep its sign
    double probe = anchor + dir * w;
    double val = p.eval(probe);
    bool crossed =
        side == Side::Right ? sigma * (val - target) < 0.0 : sigma * (val - target) > 0.0;
    if (!crossed) continue;
    double cut = level_beyond(p, probe, dir, target, "boundary cut");
    for (int t = 1; t <= 8; ++t) {  // slope stays certified beyond the cut
      double x = cut + dir * t * 0.125 * (1.0 + std::fabs(val - target));
      if (!(std::fabs(p.eval(x, 1)) > 2.0))
        throw SearchFailed("derivative bound fails beyond the cut at " + g17(x));
    }
    ClaimParameters out;
    out.k_star = k;
    out.cut = cut;
    out.w = w;
    out.target = target;
    out.tau = tau;
    return out;
  }
  throw SearchFailed("no admissible scan scale above 1e-8");
}

ExtensionResult find_hyperbolic_extension(const MapSpec& f) {
  if (f.circle_flag) throw InvalidInput("extensions need an interval domain");
  double a = f.lo, b = f.hi;
  double da = derivative(f, a, 1), db = derivative(f, b, 1);
  if (da == 0.0 || db == 0.0)
    throw ZeroDerivativeAtBoundary("map derivative vanishes at an endpoint");

  ClaimParameters left = claim_parameters(f, Side::Left);
  ClaimParameters right = claim_parameters(f, Side::Right);
  BoundaryPolynomial g = boundary_polynomial(f, Side::Left, left.k_star);
  BoundaryPolynomial h = boundary_polynomial(f, Side::Right, right.k_star);
  double a1 = left.cut, b1 = right.cut;
  double tau = left.tau;
  int case_id = da > 0 ? (db > 0 ? 1 : 3) : (db > 0 ? 2 : 4);

  double a0 = 0.0, b0 = 0.0;
  std::string e_a0, e_b0;
  switch (case_id) {
    case 1:
      b0 = fixed_point_beyond(h, b1, +1.0, "h(b0)=b0");
      a0 = fixed_point_beyond(g, a1, -1.0, "g(a0)=a0");
      e_a0 = "a0";
      e_b0 = "b0";
      break;
    case 2:
      b0 = fixed_point_beyond(h, b1, +1.0, "h(b0)=b0");
      a0 = level_beyond(g, a1, -1.0, b0, "g(a0)=b0");
      e_a0 = "b0";
      e_b0 = "b0";
      break;
    case 3:
      a0 = fixed_point_beyond(g, a1, -1.0, "g(a0)=a0");
      b0 = level_beyond(h, b1, +1.0, a0, "h(b0)=a0");
      e_a0 = "a0";
      e_b0 = "a0";
      break;
    case 4: {
      double p = b1 - a1;
      double a2 = a1 - p, b2 = b1 + p;
      if (!(g.eval(a2) > b2) || !(h.eval(b2) < a2))
        throw CaseSearchFailed("crossed bracket fails: g(a2)=" + g17(g.eval(a2)) +
                               " vs b2=" + g17(b2) + ", h(b2)=" + g17(h.eval(b2)) +
                               " vs a2=" + g17(a2));
      double y = 0.5 * (b1 + b2), x = a1;
      for (int it = 0; it < 300; ++it) {
        x = mono_solve(g, a2, a1, y, "g(x)=y");
        double ny = mono_solve(h, b1, b2, x, "h(y)=x");
        double step = std::fabs(ny - y);
        y = ny;
        if (step < 1e-15) break;
      }
      x = mono_solve(g, a2, a1, y, "g(x)=y");
      double resid = std::fabs(g.eval(x) - y) + std::fabs(h.eval(y) - x);
      if (resid > 1e-8)
        throw CaseSearchFailed("alternating solve residual " + g17(resid));
      a0 = x;
      b0 = y;
      e_a0 = "b0";
      e_b0 = "a0";
      break;
    }
  }
  if (!(a0 < a1) || !(b0 > b1)) throw CaseSearchFailed("endpoints landed inside the collar");

  auto pt = [&](const std::string& s) { return s == "a0" ? a0 : b0; };
  double res_a = std::fabs(g.eval(a0) - pt(e_a0));
  double res_b = std::fabs(h.eval(b0) - pt(e_b0));
  if (std::max(res_a, res_b) > 1e-10)
    throw CaseSearchFailed("endpoint residuals " + g17(res_a) + ", " + g17(res_b));

  ExtensionPieces pieces;
  pieces.left_taylor = g.taylor;
  pieces.left_k = g.k;
  pieces.right_taylor = h.taylor;
  pieces.right_k = h.k;
  pieces.a0 = a0;
  pieces.a = a;
  pieces.b = b;
  pieces.b0 = b0;
  pieces.inner = to_smooth(f);
  pieces.inner_spec = std::make_shared<const MapSpec>(f);

  ExtensionResult res;
  res.a0 = a0;
  res.a1 = a1;
  res.b1 = b1;
  res.b0 = b0;
  res.F = MapSpec::extension(std::move(pieces), f.smoothness_order);
  res.tau_ext = tau;
  res.theta = 2.0;
  res.case_id = case_id;
  res.endpoint_a0 = e_a0;
  res.endpoint_b0 = e_b0;
  res.k_left = left.k_star;
  res.k_right = right.k_star;
  return res;
}

std::pair<MapSpec, double> zero_boundary_extension(const SmoothFn& f, double a0, double b0) {
  if (!(a0 < f.lo) || !(b0 > f.hi))
    throw InvalidInput("extension interval must strictly contain the domain");
  int r = f.r;
  double a = f.lo, b = f.hi;
  BoundaryPolynomial g = boundary_polynomial(f, Side::Left, 0.0);
  BoundaryPolynomial h = boundary_polynomial(f, Side::Right, 0.0);
  double fac = factorial(r + 1);
  // the value at the far endpoint is affine in k; solve it exactly
  double k1 = -g.eval(a0) * fac / std::pow(a - a0, static_cast<double>(r + 1));
  double k2 = -h.eval(b0) * fac / std::pow(b0 - b, static_cast<double>(r + 1));
  g.k = k1;
  h.k = k2;

  ExtensionPieces pieces;
  pieces.left_taylor = g.taylor;
  pieces.left_k = k1;
  pieces.right_taylor = h.taylor;
  pieces.right_k = k2;
  pieces.a0 = a0;
  pieces.a = a;
  pieces.b = b;
  pieces.b0 = b0;
  pieces.inner = f;
  MapSpec F = MapSpec::extension(std::move(pieces), r);

  double nf = cr_norm(f);
  if (nf == 0.0) return {F, 0.0};
  double nF = nf;
  std::vector<double> lc = g.coeffs(), rc = h.coeffs();
  for (int i = 0; i <= r; ++i) {
    nF = std::max({nF, poly_sup_abs(lc, a0 - a, 0.0), poly_sup_abs(rc, 0.0, b0 - b)});
    lc = poly_derive(lc);
    rc = poly_derive(rc);
  }
  return {F, nF / nf};
}

VerificationReport verify_extension(const ExtensionResult& res, const MapSpec& f,
                                    const Potential* phi, int max_period) {
  VerificationReport rep;
  const MapSpec& F = res.F;
  double a = f.lo, b = f.hi;
  rep.kappa = std::min({res.theta / 2.0, a - res.a0, res.b0 - b});
  rep.eta_radius = std::min(res.tau_ext, (res.theta - 1.0) / 2.0);

  auto pt = [&](const std::string& s) { return s == "a0" ? res.a0 : res.b0; };
  rep.endpoints_ok = std::fabs(eval(F, res.a0) - pt(res.endpoint_a0)) <= 1e-10 &&
                     std::fabs(eval(F, res.b0) - pt(res.endpoint_b0)) <= 1e-10;

  const int kZone = 64;
  std::vector<double> pts;
  for (int j = 0; j < kZone; ++j) {
    pts.push_back(res.a0 + (a - res.a0) * (j + 0.5) / kZone);
    pts.push_back(b + (res.b0 - b) * (j + 0.5) / kZone);
  }
  double min_gap = std::numeric_limits<double>::infinity();
  for (double x : pts)
    min_gap = std::min({min_gap, std::fabs(x - res.a0), std::fabs(x - res.b0)});
  rep.escape_bound =
      1.0 + std::log((res.b0 - res.a0) / min_gap) / std::log((1.0 + res.theta) / 2.0);
  int cap = static_cast<int>(std::ceil(rep.escape_bound)) + 16;
  rep.escape_ok = true;
  for (double x : pts) {
    int entered = -1;
    double y = x;
    for (int step = 0; step <= cap; ++step) {
      bool inside = (y >= a - 1e-12 && y <= b + 1e-12) || std::fabs(y - res.a0) <= 1e-10 ||
                    std::fabs(y - res.b0) <= 1e-10;
      if (inside) {
        entered = step;
        break;
      }
      y = eval(F, y);
    }
    rep.entry_times.push_back(entered);
    if (entered < 0)
      rep.escape_ok = false;
    else
      rep.max_entry_time = std::max(rep.max_entry_time, entered);
  }
  if (rep.max_entry_time > rep.escape_bound) rep.escape_ok = false;

  const int kExp = 128;
  double mn = std::numeric_limits<double>::infinity();
  for (int j = 0; j < kExp; ++j) {
    double xl = res.a0 + (res.a1 - res.a0) * j / kExp;          // [a0, a1)
    double xr = res.b1 + (res.b0 - res.b1) * (j + 1.0) / kExp;  // (b1, b0]
    mn = std::min({mn, std::fabs(derivative(F, xl, 1)), std::fabs(derivative(F, xr, 1))});
  }
  rep.min_outer_slope = mn;
  rep.expansion_ok = mn > res.theta;

  if (phi) {
    rep.phi_checked = true;
    auto orbits = enumerate_periodic(F, max_period);
    double best = 0.0;
    int idx = pick_maximizing(orbits, *phi, &best);
    if (idx < 0) throw SearchFailed("no periodic orbits found for the extension");
    rep.Q = best;
    rep.phi_a0 = eval_potential(*phi, res.a0);
    rep.phi_b0 = eval_potential(*phi, res.b0);
    rep.hypothesis_holds = rep.phi_a0 < rep.Q && rep.phi_b0 < rep.Q;
    bool inside = true;
    for (const auto& o : orbits) {
      if (birkhoff_average(o, *phi) < best - 1e-9) continue;
      for (double x : o.points) inside = inside && x >= a - 1e-9 && x <= b + 1e-9;
    }
    rep.argmax_inside = inside;
  }
  return rep;
}

std::vector<double> fd_weights(int order, const std::vector<double>& nodes, double x0) {
  int n = static_cast<int>(nodes.size());
  if (order < 0 || n < order + 1) throw InvalidInput("need at least order+1 nodes");
  std::vector<std::vector<double>> c(order + 1, std::vector<double>(n, 0.0));
  c[0][0] = 1.0;
  double c1 = 1.0;
  for (int i = 1; i < n; ++i) {
    double c2 = 1.0;
    for (int j = 0; j < i; ++j) {
      double c3 = nodes[i] - nodes[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = std::min(i, order); k >= 1; --k)
          c[k][i] = c1 * (k * c[k - 1][i - 1] - (nodes[i - 1] - x0) * c[k][i - 1]) / c2;
        c[0][i] = -c1 * (nodes[i - 1] - x0) * c[0][i - 1] / c2;
      }
      for (int k = std::min(i, order); k >= 1; --k)
        c[k][j] = ((nodes[i] - x0) * c[k][j] - k * c[k - 1][j]) / c3;
      c[0][j] = (nodes[i] - x0) * c[0][j] / c3;
    }
    c1 = c2;
  }
  return c[order];
}

}  // namespace ergopt
