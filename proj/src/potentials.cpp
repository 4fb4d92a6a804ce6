#include "ergopt/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ergopt {

double GridFn::operator()(double q) const {
  if (x.empty()) throw GridMismatch("empty grid");
  if (x.size() == 1) return v[0];
  if (circle) {
    double span = period;
    double t = (q - x[0]) / span;
    q = x[0] + (t - std::floor(t)) * span;
    if (q >= x.back()) {  // wrap segment [x_last, x_0 + period]
      double w = x[0] + span - x.back();
      double s = w > 0 ? (q - x.back()) / w : 0.0;
      return v.back() + s * (v[0] - v.back());
    }
  } else {
    q = std::clamp(q, x.front(), x.back());
  }
  auto it = std::upper_bound(x.begin(), x.end(), q);
  size_t i = it == x.begin() ? 0 : static_cast<size_t>(it - x.begin() - 1);
  if (i + 1 >= x.size()) i = x.size() - 2;
  double w = x[i + 1] - x[i];
  double s = w > 0 ? (q - x[i]) / w : 0.0;
  return v[i] + s * (v[i + 1] - v[i]);
}

double GridFn::max_abs() const {
  double s = 0.0;
  for (double t : v) s = std::max(s, std::fabs(t));
  return s;
}

double GridFn::lip() const {
  double s = 0.0;
  for (size_t i = 0; i + 1 < x.size(); ++i) {
    double w = x[i + 1] - x[i];
    if (w > 0) s = std::max(s, std::fabs(v[i + 1] - v[i]) / w);
  }
  if (circle && x.size() >= 2) {
    double w = x[0] + period - x.back();
    if (w > 0) s = std::max(s, std::fabs(v[0] - v.back()) / w);
  }
  return s;
}

Potential Potential::cosine(double theta, double amp, double alpha, Metric metric, Interval dom) {
  if (alpha <= 0.0 || alpha > 1.0) throw InvalidInput("alpha must be in (0,1]");
  Potential p;
  p.family = PotFamily::Cosine;
  p.theta = theta;
  p.amp = amp;
  p.alpha = alpha;
  p.metric = metric;
  p.dom = dom;
  return p;
}

Potential Potential::linear(double slope, double offset, Metric metric, Interval dom) {
  Potential p;
  p.family = PotFamily::Linear;
  p.slope = slope;
  p.offset = offset;
  p.metric = metric;
  p.dom = dom;
  return p;
}

Potential Potential::constant(double c, Metric metric, Interval dom) {
  return linear(0.0, c, metric, dom);
}

Potential Potential::grid_sampled(GridFn g, double alpha, Metric metric, Interval dom) {
  if (alpha <= 0.0 || alpha > 1.0) throw InvalidInput("alpha must be in (0,1]");
  if (g.x.size() != g.v.size() || g.x.empty()) throw GridMismatch("grid node/value size mismatch");
  for (size_t i = 0; i + 1 < g.x.size(); ++i)
    if (!(g.x[i] < g.x[i + 1])) throw GridMismatch("grid nodes must increase");
  Potential p;
  p.family = PotFamily::GridSampled;
  p.grid = std::move(g);
  p.alpha = alpha;
  p.metric = metric;
  p.dom = dom;
  return p;
}

Potential Potential::step(std::vector<double> breaks, std::vector<double> values,
                          Metric metric) {
  if (breaks.size() < 2 || values.size() + 1 != breaks.size())
    throw InvalidInput("step potential needs m+1 breakpoints and m values");
  for (size_t i = 0; i + 1 < breaks.size(); ++i)
    if (!(breaks[i] < breaks[i + 1])) throw InvalidInput("breakpoints must increase");
  Potential p;
  p.family = PotFamily::Step;
  p.dom = {breaks.front(), breaks.back()};
  p.step_breaks = std::move(breaks);
  p.step_values = std::move(values);
  p.metric = metric;
  return p;
}

Potential Potential::trig_poly(double c0, std::vector<double> cosc, std::vector<double> sinc,
                               Metric metric, Interval dom) {
  if (cosc.size() != sinc.size()) throw InvalidInput("coefficient lists differ in length");
  Potential p;
  p.family = PotFamily::TrigPoly;
  p.const0 = c0;
  p.cosc = std::move(cosc);
  p.sinc = std::move(sinc);
  p.metric = metric;
  p.dom = dom;
  return p;
}

Potential Potential::sum(std::vector<Potential> parts) {
  if (parts.empty()) throw InvalidInput("empty sum");
  Potential p;
  p.family = PotFamily::Sum;
  p.alpha = parts[0].alpha;
  p.metric = parts[0].metric;
  p.dom = parts[0].dom;
  for (const auto& q : parts) p.alpha = std::min(p.alpha, q.alpha);
  p.parts = std::make_shared<const std::vector<Potential>>(std::move(parts));
  return p;
}

Potential distance_potential(std::vector<double> orbit_points, double alpha, double scale,
                             Metric metric, Interval dom) {
  if (alpha <= 0.0 || alpha > 1.0) throw InvalidInput("alpha must be in (0,1]");
  if (orbit_points.empty()) throw InvalidInput("empty orbit");
  Potential p;
  p.family = PotFamily::DistanceToOrbit;
  p.orbit_points = std::move(orbit_points);
  p.alpha = alpha;
  p.scale = scale;
  p.metric = metric;
  p.dom = dom;
  return p;
}

namespace {

double dist_to_set(const Metric& metric, const std::vector<double>& pts, double x) {
  double d = std::numeric_limits<double>::infinity();
  for (double p : pts) d = std::min(d, metric.dist(x, p));
  return d;
}

// Largest distance from a point of [dom] to the set: attained at a gap
// midpoint or (interval case) a domain endpoint.
double max_dist_to_set(const Metric& metric, const std::vector<double>& pts, Interval dom) {
  std::vector<double> s = pts;
  std::sort(s.begin(), s.end());
  double best = 0.0;
  if (metric.circle) {
    for (size_t i = 0; i < s.size(); ++i) {
      double lo = s[i];
      double hi = i + 1 < s.size() ? s[i + 1] : s[0] + metric.period;
      best = std::max(best, metric.dist(lo, 0.5 * (lo + hi)));
    }
  } else {
    best = std::max(dist_to_set(metric, s, dom.lo), dist_to_set(metric, s, dom.hi));
    for (size_t i = 0; i + 1 < s.size(); ++i)
      best = std::max(best, 0.5 * (s[i + 1] - s[i]));
  }
  return best;
}

}  // namespace

double eval_potential(const Potential& p, double x) {
  if (p.metric.circle) {
    double t = (x - p.dom.lo) / p.metric.period;
    x = p.dom.lo + (t - std::floor(t)) * p.metric.period;
  } else if (x < p.dom.lo - 1e-9 || x > p.dom.hi + 1e-9) {
    throw DomainError("potential argument " + g17(x) + " outside domain");
  }
  switch (p.family) {
    case PotFamily::Cosine:
      return p.amp * std::cos(2.0 * kPi * (x - p.theta));
    case PotFamily::Linear:
      return p.slope * x + p.offset;
    case PotFamily::DistanceToOrbit:
      return -p.scale * std::pow(dist_to_set(p.metric, p.orbit_points, x), p.alpha);
    case PotFamily::GridSampled:
      return p.grid(x);
    case PotFamily::Step: {
      const auto& b = p.step_breaks;
      if (x >= b.back()) return p.step_values.back();
      size_t lo = 0, hi = b.size() - 1;
      while (hi - lo > 1) {
        size_t mid = (lo + hi) / 2;
        if (x >= b[mid]) lo = mid; else hi = mid;
      }
      return p.step_values[lo];
    }
    case PotFamily::TrigPoly: {
      double v = p.const0;
      for (size_t j = 0; j < p.cosc.size(); ++j) {
        double w = 2.0 * kPi * (j + 1) * x;
        v += p.cosc[j] * std::cos(w) + p.sinc[j] * std::sin(w);
      }
      return v;
    }
    case PotFamily::Sum: {
      double v = 0.0;
      for (const auto& q : *p.parts) v += eval_potential(q, x);
      return v;
    }
  }
  throw Error("unreachable");
}

SeminormReport seminorm(const Potential& p) {
  SeminormReport r;
  switch (p.family) {
    case PotFamily::Cosine:
      r.sup_norm = std::fabs(p.amp);
      if (p.alpha == 1.0) {
        r.holder_seminorm = 2.0 * kPi * std::fabs(p.amp);
        r.exact_flag = true;
      } else {
        double lip = 2.0 * kPi * std::fabs(p.amp);
        r.holder_seminorm =
            std::pow(lip, p.alpha) * std::pow(2.0 * r.sup_norm, 1.0 - p.alpha);
        r.exact_flag = false;
      }
      return r;
    case PotFamily::Linear:
      r.sup_norm = std::max(std::fabs(p.slope * p.dom.lo + p.offset),
                            std::fabs(p.slope * p.dom.hi + p.offset));
      if (p.alpha == 1.0) {
        r.holder_seminorm = std::fabs(p.slope);
        r.exact_flag = true;
      } else {
        r.holder_seminorm =
            std::fabs(p.slope) * std::pow(p.dom.hi - p.dom.lo, 1.0 - p.alpha);
        r.exact_flag = false;
      }
      return r;
    case PotFamily::DistanceToOrbit:
      // |d(x,O)^a - d(y,O)^a| <= d(x,y)^a, tight as y -> x on O
      r.holder_seminorm = p.scale;
      r.sup_norm =
          p.scale * std::pow(max_dist_to_set(p.metric, p.orbit_points, p.dom), p.alpha);
      r.exact_flag = true;
      return r;
    case PotFamily::GridSampled: {
      r.sup_norm = p.grid.max_abs();
      r.exact_flag = false;
      const auto& g = p.grid;
      if (p.alpha == 1.0) {
        r.holder_seminorm = g.lip();  // pairwise max of a PL function = max segment slope
      } else {
        double best = 0.0;
        for (size_t i = 0; i < g.x.size(); ++i)
          for (size_t j = i + 1; j < g.x.size(); ++j) {
            double d = p.metric.dist(g.x[i], g.x[j]);
            if (d > 0)
              best = std::max(best, std::fabs(g.v[i] - g.v[j]) / std::pow(d, p.alpha));
          }
        r.holder_seminorm = best;
      }
      return r;
    }
    case PotFamily::Step: {
      double vmin = p.step_values[0], vmax = vmin;
      for (double t : p.step_values) {
        vmin = std::min(vmin, t);
        vmax = std::max(vmax, t);
        r.sup_norm = std::max(r.sup_norm, std::fabs(t));
      }
      r.holder_seminorm = vmax > vmin ? std::numeric_limits<double>::infinity() : 0.0;
      r.exact_flag = true;
      return r;
    }
    case PotFamily::TrigPoly: {
      double s0 = std::fabs(p.const0), s1 = 0.0, amp_sum = 0.0;
      for (size_t j = 0; j < p.cosc.size(); ++j) {
        double h = std::hypot(p.cosc[j], p.sinc[j]);
        amp_sum += h;
        s1 += 2.0 * kPi * (j + 1) * h;
      }
      r.sup_norm = s0 + amp_sum;
      r.holder_seminorm = p.alpha == 1.0
                              ? s1
                              : std::pow(s1, p.alpha) * std::pow(2.0 * amp_sum, 1.0 - p.alpha);
      r.exact_flag = false;  // upper bounds, not suprema
      return r;
    }
    case PotFamily::Sum: {
      for (const auto& q : *p.parts) {
        auto sr = seminorm(q);
        r.holder_seminorm += sr.holder_seminorm;
        r.sup_norm += sr.sup_norm;
      }
      r.exact_flag = false;
      return r;
    }
  }
  throw Error("unreachable");
}

Potential cohomologous(const Potential& p, const GridFn& u, const MapSpec& m) {
  if (u.x.empty() || u.x.size() != u.v.size()) throw GridMismatch("bad grid function");
  if (u.circle != m.circle_flag) throw GridMismatch("grid topology differs from the map's");
  if (u.x.front() < m.lo - 1e-9 || u.x.back() > m.hi + 1e-9)
    throw GridMismatch("grid leaves the map domain");
  GridFn out;
  out.x = u.x;
  out.circle = u.circle;
  out.period = u.period;
  out.v.resize(u.x.size());
  for (size_t i = 0; i < u.x.size(); ++i) {
    double xi = u.x[i];
    out.v[i] = eval_potential(p, xi) + u.v[i] - u(eval(m, xi));
  }
  return Potential::grid_sampled(std::move(out), p.alpha, p.metric, p.dom);
}

}  // namespace ergopt
