#include "ergopt/maxmean.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ergopt {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Iterative Tarjan; returns component id per node (ids in reverse topological
// order) and the component count.
int tarjan_scc(const TransferGraph& g, std::vector<int>& comp) {
  int n = g.n;
  comp.assign(n, -1);
  std::vector<int> index(n, -1), low(n, 0), on_stack(n, 0), stack, call_node, call_edge;
  int next_index = 0, ncomp = 0;
  for (int root = 0; root < n; ++root) {
    if (index[root] != -1) continue;
    call_node.push_back(root);
    call_edge.push_back(g.offsets[root]);
    index[root] = low[root] = next_index++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!call_node.empty()) {
      int v = call_node.back();
      int& e = call_edge.back();
      if (e < g.offsets[v + 1]) {
        int u = g.targets[e++];
        if (index[u] == -1) {
          index[u] = low[u] = next_index++;
          stack.push_back(u);
          on_stack[u] = 1;
          call_node.push_back(u);
          call_edge.push_back(g.offsets[u]);
        } else if (on_stack[u]) {
          low[v] = std::min(low[v], index[u]);
        }
      } else {
        if (low[v] == index[v]) {
          while (true) {
            int u = stack.back();
            stack.pop_back();
            on_stack[u] = 0;
            comp[u] = ncomp;
            if (u == v) break;
          }
          ++ncomp;
        }
        call_node.pop_back();
        call_edge.pop_back();
        if (!call_node.empty()) {
          int parent = call_node.back();
          low[parent] = std::min(low[parent], low[v]);
        }
      }
    }
  }
  return ncomp;
}

struct Scc {
  std::vector<int> nodes;            // global ids, ascending
  std::vector<int> offsets, targets; // local CSR restricted to the component
  std::vector<double> weight;        // per local source
};

}  // namespace

TransferGraph build_transfer_graph(const MapSpec& m, const Potential& p, int n) {
  if (n < 2) throw InvalidInput("need at least two cells");
  TransferGraph g;
  g.n = n;
  g.lo = m.lo;
  g.circle = m.circle_flag;
  double span = m.hi - m.lo;
  g.cell_width = span / n;
  double lip = lipschitz_constant(m);
  g.inflation = lip * g.cell_width / 2.0;
  g.offsets.assign(n + 1, 0);
  std::vector<std::vector<int>> adj(n);
  for (int i = 0; i < n; ++i) {
    double c = m.lo + (i + 0.5) * g.cell_width;
    g.weight.push_back(eval_potential(p, c));
    double y = eval(m, c);
    double ylo = y - g.inflation, yhi = y + g.inflation;
    auto& row = adj[i];
    if (g.circle && yhi - ylo >= span) {
      for (int j = 0; j < n; ++j) row.push_back(j);
    } else {
      if (!g.circle) {
        ylo = std::max(ylo, m.lo);
        yhi = std::min(yhi, m.hi);
      }
      int jlo = static_cast<int>(std::floor((ylo - m.lo) / g.cell_width));
      int jhi = static_cast<int>(std::floor((yhi - m.lo) / g.cell_width));
      for (int j = jlo; j <= jhi; ++j) {
        int jj = j;
        if (g.circle) {
          jj = j % n;
          if (jj < 0) jj += n;
        } else if (j < 0 || j >= n) {
          continue;
        }
        double cl = m.lo + j * g.cell_width, ch = cl + g.cell_width;
        if (std::min(yhi, ch) - std::max(ylo, cl) > 1e-12) row.push_back(jj);
      }
      if (row.empty()) {
        double yc = g.circle ? m.reduce(y) : std::clamp(y, m.lo, m.hi);
        int j = std::clamp(static_cast<int>(std::floor((yc - m.lo) / g.cell_width)), 0, n - 1);
        row.push_back(j);
      }
      std::sort(row.begin(), row.end());
      row.erase(std::unique(row.begin(), row.end()), row.end());
    }
  }
  for (int i = 0; i < n; ++i) {
    g.offsets[i + 1] = g.offsets[i] + static_cast<int>(adj[i].size());
    for (int j : adj[i]) g.targets.push_back(j);
  }
  return g;
}

CycleMeanResult karp_max_mean_cycle(const TransferGraph& g, bool want_cycle) {
  std::vector<int> comp;
  int ncomp = tarjan_scc(g, comp);

  std::vector<char> cyclic(ncomp, 0);
  {
    std::vector<int> size(ncomp, 0);
    for (int v = 0; v < g.n; ++v) ++size[comp[v]];
    for (int v = 0; v < g.n; ++v)
      for (int e = g.offsets[v]; e < g.offsets[v + 1]; ++e) {
        int u = g.targets[e];
        if (comp[u] == comp[v] && (size[comp[v]] >= 2 || u == v)) cyclic[comp[v]] = 1;
      }
  }

  std::vector<Scc> sccs;
  {
    std::vector<int> local(g.n, -1);
    std::vector<std::vector<int>> members(ncomp);
    for (int v = 0; v < g.n; ++v) members[comp[v]].push_back(v);
    for (int c = 0; c < ncomp; ++c) {
      if (!cyclic[c]) continue;
      Scc s;
      s.nodes = members[c];
      for (size_t k = 0; k < s.nodes.size(); ++k) local[s.nodes[k]] = static_cast<int>(k);
      s.offsets.assign(s.nodes.size() + 1, 0);
      for (size_t k = 0; k < s.nodes.size(); ++k) {
        int v = s.nodes[k];
        s.weight.push_back(g.weight[v]);
        for (int e = g.offsets[v]; e < g.offsets[v + 1]; ++e)
          if (comp[g.targets[e]] == c) s.targets.push_back(local[g.targets[e]]);
        s.offsets[k + 1] = static_cast<int>(s.targets.size());
      }
      sccs.push_back(std::move(s));
    }
  }
  if (sccs.empty()) throw NoCycle("transfer graph has no directed cycle");

  CycleMeanResult best;
  best.value = kNegInf;
  const Scc* best_scc = nullptr;
  int best_arg = -1;

  for (const auto& s : sccs) {
    int ns = static_cast<int>(s.nodes.size());
    // pass 1: D_{ns}
    std::vector<double> d(ns, 0.0), nd(ns);
    for (int k = 1; k <= ns; ++k) {
      std::fill(nd.begin(), nd.end(), kNegInf);
      for (int u = 0; u < ns; ++u) {
        double base = d[u] + s.weight[u];
        for (int e = s.offsets[u]; e < s.offsets[u + 1]; ++e)
          nd[s.targets[e]] = std::max(nd[s.targets[e]], base);
      }
      d.swap(nd);
    }
    std::vector<double> dn = d;
    // pass 2: min over k of (D_ns - D_k)/(ns - k), streamed
    std::vector<double> ratio(ns, std::numeric_limits<double>::infinity());
    d.assign(ns, 0.0);
    for (int k = 0; k < ns; ++k) {
      for (int v = 0; v < ns; ++v)
        ratio[v] = std::min(ratio[v], (dn[v] - d[v]) / (ns - k));
      std::fill(nd.begin(), nd.end(), kNegInf);
      for (int u = 0; u < ns; ++u) {
        double base = d[u] + s.weight[u];
        for (int e = s.offsets[u]; e < s.offsets[u + 1]; ++e)
          nd[s.targets[e]] = std::max(nd[s.targets[e]], base);
      }
      d.swap(nd);
    }
    int arg = 0;
    for (int v = 1; v < ns; ++v)
      if (ratio[v] > ratio[arg]) arg = v;
    if (ratio[arg] > best.value) {
      best.value = ratio[arg];
      best_scc = &s;
      best_arg = arg;
    }
  }

  // certificate: the D_k column at the winning node
  {
    const Scc& s = *best_scc;
    int ns = static_cast<int>(s.nodes.size());
    std::vector<double> d(ns, 0.0), nd(ns);
    best.certificate.push_back(d[best_arg]);
    for (int k = 1; k <= ns; ++k) {
      std::fill(nd.begin(), nd.end(), kNegInf);
      for (int u = 0; u < ns; ++u) {
        double base = d[u] + s.weight[u];
        for (int e = s.offsets[u]; e < s.offsets[u + 1]; ++e)
          nd[s.targets[e]] = std::max(nd[s.targets[e]], base);
      }
      d.swap(nd);
      best.certificate.push_back(d[best_arg]);
    }
  }

  if (want_cycle && best_scc->nodes.size() <= (1u << 13)) {
    const Scc& s = *best_scc;
    int ns = static_cast<int>(s.nodes.size());
    std::vector<double> d(ns, 0.0), nd(ns);
    std::vector<int> pred(static_cast<size_t>(ns) * (ns + 1), -1);
    for (int k = 1; k <= ns; ++k) {
      std::fill(nd.begin(), nd.end(), kNegInf);
      int* pk = pred.data() + static_cast<size_t>(k) * ns;
      for (int u = 0; u < ns; ++u) {
        double base = d[u] + s.weight[u];
        for (int e = s.offsets[u]; e < s.offsets[u + 1]; ++e) {
          int v = s.targets[e];
          if (base > nd[v]) {
            nd[v] = base;
            pk[v] = u;
          }
        }
      }
      d.swap(nd);
    }
    std::vector<int> walk(ns + 1);
    walk[ns] = best_arg;
    for (int k = ns; k > 0; --k) walk[k - 1] = pred[static_cast<size_t>(k) * ns + walk[k]];
    std::vector<int> seen_at(ns, -1);
    int lo = -1, hi = -1;
    for (int k = ns; k >= 0; --k) {
      if (seen_at[walk[k]] != -1) {
        lo = k;
        hi = seen_at[walk[k]];
        break;
      }
      seen_at[walk[k]] = k;
    }
    if (lo >= 0) {
      for (int k = lo; k < hi; ++k) best.cycle.push_back(s.nodes[walk[k]]);
      auto mn = std::min_element(best.cycle.begin(), best.cycle.end());
      std::rotate(best.cycle.begin(), mn, best.cycle.end());
    }
  }
  return best;
}

std::pair<double, double> oracle_Q(const MapSpec& m, const Potential& p, int n) {
  TransferGraph g = build_transfer_graph(m, p, n);
  double value = karp_max_mean_cycle(g, false).value;
  double sem = seminorm(p).holder_seminorm;
  double bound = 0.0;
  if (sem > 0.0) {
    double cell_term = std::pow(g.cell_width * (1.0 + g.inflation / g.cell_width), p.alpha);
    try {
      double la = std::pow(estimate_hyperbolic(m).lambda, p.alpha);
      bound = sem * cell_term * la / (la - 1.0);
    } catch (const NotExpanding&) {
      bound = std::numeric_limits<double>::infinity();
    }
  }
  return {value, bound};
}

}  // namespace ergopt
