#include "subgauss/chain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include "subgauss/errors.hpp"

namespace subgauss {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Adjacency of the auxiliary graph G_eps, generated lazily: neighbors of u
// are all v with d(u,v) admissible, found by truncated Dijkstra from u.
class EpsNeighborhood {
public:
  EpsNeighborhood(const MetricMeasureGraph& g, double radius, bool strict)
      : g_(g), radius_(radius), strict_(strict) {}

  const std::vector<std::pair<int, double>>& of(int u) {
    auto it = cache_.find(u);
    if (it != cache_.end()) return it->second;
    std::vector<std::pair<int, double>> nbrs;
    auto dist = g_.distances_within(u, radius_);
    for (int v = 0; v < g_.vertex_count(); ++v) {
      if (v == u) continue;
      double d = dist[v];
      if (strict_ ? d < radius_ : d <= radius_) nbrs.emplace_back(v, d);
    }
    return cache_.emplace(u, std::move(nbrs)).first->second;
  }

private:
  const MetricMeasureGraph& g_;
  double radius_;
  bool strict_;
  std::unordered_map<int, std::vector<std::pair<int, double>>> cache_;
};

// Dijkstra on G_eps; fills parents when requested.
double eps_dijkstra(const MetricMeasureGraph& g, EpsNeighborhood& nbh, int x,
                    int y, std::vector<int>* parent) {
  std::vector<double> dist(g.vertex_count(), kInf);
  if (parent) parent->assign(g.vertex_count(), -1);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[x] = 0.0;
  pq.push({0.0, x});
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[u]) continue;
    if (u == y) return d;
    for (auto [v, step] : nbh.of(u)) {
      double nd = d + step;
      if (nd < dist[v]) {
        dist[v] = nd;
        if (parent) (*parent)[v] = u;
        pq.push({nd, v});
      }
    }
  }
  return dist[y];
}

long eps_min_hops(const MetricMeasureGraph& g, EpsNeighborhood& nbh, int x,
                  int y) {
  std::vector<long> hops(g.vertex_count(), -1);
  std::queue<int> q;
  hops[x] = 0;
  q.push(x);
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    if (u == y) return hops[u];
    for (auto [v, step] : nbh.of(u)) {
      if (hops[v] < 0) {
        hops[v] = hops[u] + 1;
        q.push(v);
      }
    }
  }
  return -1;
}

}  // namespace

ChainResult chain_metric(const MetricMeasureGraph& g, int x, int y,
                         double eps) {
  g.check_vertex(x);
  g.check_vertex(y);
  if (eps <= 0.0) throw std::domain_error("chain_metric needs eps > 0");
  ChainResult res;
  res.epsilon = eps;
  if (x == y) {
    res.d_eps = 0.0;
    res.n_eps = 0;
    res.chain = {x};
    return res;
  }
  EpsNeighborhood nbh(g, eps, /*strict=*/true);
  std::vector<int> parent;
  double d = eps_dijkstra(g, nbh, x, y, &parent);
  if (!std::isfinite(d)) {
    res.d_eps = kInf;
    res.finite = false;
    return res;
  }
  res.d_eps = d;
  for (int v = y; v != -1; v = parent[v]) res.chain.push_back(v);
  std::reverse(res.chain.begin(), res.chain.end());
  res.n_eps = eps_min_hops(g, nbh, x, y);
  return res;
}

std::vector<int> shorten_chain(const MetricMeasureGraph& g,
                               const std::vector<int>& chain, double eps) {
  if (chain.size() < 2)
    throw std::invalid_argument("chain needs at least two points");
  for (size_t i = 1; i < chain.size(); ++i) {
    g.check_vertex(chain[i - 1]);
    g.check_vertex(chain[i]);
    if (!(g.distance(chain[i - 1], chain[i]) < eps))
      throw std::invalid_argument("step " + std::to_string(i) +
                                  " is not an eps-step");
  }
  std::vector<int> c = chain;
  // Remove any interior point whose adjacent steps are both < eps/2;
  // the merged step is then < eps by the triangle inequality.
  bool removed = true;
  while (removed && c.size() > 2) {
    removed = false;
    for (size_t i = 1; i + 1 < c.size(); ++i) {
      if (g.distance(c[i - 1], c[i]) < eps / 2.0 &&
          g.distance(c[i], c[i + 1]) < eps / 2.0) {
        c.erase(c.begin() + i);
        removed = true;
        break;
      }
    }
  }
  return c;
}

EpsilonSolution solve_epsilon(const MetricMeasureGraph& g,
                              const ScaleFunction& f, double t, int x,
                              int y) {
  g.check_vertex(x);
  g.check_vertex(y);
  if (t <= 0.0) throw std::domain_error("solve_epsilon needs t > 0");
  EpsilonSolution sol;
  sol.t = t;
  if (x == y) {
    sol.epsilon = kInf;
    sol.at_infinity = true;
    return sol;
  }
  double d = g.distance(x, y);
  if (!std::isfinite(d))
    throw below_resolution_error(kInf, "pair is disconnected");

  // Breakpoints of eps -> d_eps are the distinct pair distances <= d.
  std::set<double> bp;
  for (int v = 0; v < g.vertex_count(); ++v) {
    auto dist = g.distances_within(v, d);
    for (int w = 0; w < g.vertex_count(); ++w)
      if (w != v && dist[w] <= d) bp.insert(dist[w]);
  }
  std::vector<double> b(bp.begin(), bp.end());  // b[0] < ... < b[K-1] = d

  double min_g = kInf;
  // Scan intervals (b[k], b[k+1]] top-down; on each, d_eps is the constant
  // value computed with steps <= b[k] and G(eps) = F(eps)/eps * d_eps is
  // continuous nondecreasing.
  for (int k = (int)b.size() - 1; k >= 0; --k) {
    double L = b[k];
    bool last = (k == (int)b.size() - 1);
    double Rt = last ? kInf : b[k + 1];
    // cheap prune: d_eps >= d always
    if (f(L) / L * d > t) {
      min_g = std::min(min_g, f(L) / L * d);
      continue;
    }
    double dk;
    if (last) {
      dk = d;
    } else {
      EpsNeighborhood nbh(g, L, /*strict=*/false);
      dk = eps_dijkstra(g, nbh, x, y, nullptr);
    }
    if (!std::isfinite(dk)) continue;
    auto G = [&](double e) { return f(e) / e * dk; };
    double g_left = G(L);
    min_g = std::min(min_g, g_left);
    if (!last && G(Rt) <= t) {
      sol.epsilon = Rt;
      sol.g_value = G(Rt);
      sol.d_eps = dk;
      return sol;
    }
    if (g_left < t) {
      double lo = L, hi = last ? L : Rt;
      if (last) {
        hi = std::max(2.0 * L, L + 1.0);
        while (G(hi) <= t) hi *= 2.0;
      }
      // keep G(lo) <= t so the returned eps satisfies the constraint
      while ((hi - lo) > 1e-10 * hi) {
        double mid = 0.5 * (lo + hi);
        (G(mid) <= t ? lo : hi) = mid;
      }
      sol.epsilon = lo;
      sol.g_value = G(lo);
      sol.d_eps = dk;
      return sol;
    }
  }
  // Report the true minimum of G over all intervals, not the d-based bound.
  for (int k = (int)b.size() - 2; k >= 0; --k) {
    EpsNeighborhood nbh(g, b[k], /*strict=*/false);
    double dk = eps_dijkstra(g, nbh, x, y, nullptr);
    if (std::isfinite(dk)) min_g = std::min(min_g, f(b[k]) / b[k] * dk);
  }
  min_g = std::min(min_g, f(d) / d * d);
  throw below_resolution_error(
      min_g, "t below graph resolution: min achievable g = " +
                 std::to_string(min_g));
}

namespace {

// Minimal achievable maximum step when walking a shortest path in n hops.
double best_max_step(const std::vector<double>& cum, int n) {
  // candidate steps are differences of cumulative positions
  std::set<double> cand;
  for (size_t i = 0; i < cum.size(); ++i)
    for (size_t j = i + 1; j < cum.size(); ++j) cand.insert(cum[j] - cum[i]);
  for (double s : cand) {
    // greedy feasibility with max step s
    size_t i = 0;
    int hops = 0;
    bool ok = true;
    while (i + 1 < cum.size()) {
      size_t j = i;
      while (j + 1 < cum.size() && cum[j + 1] - cum[i] <= s) ++j;
      if (j == i) {
        ok = false;
        break;
      }
      i = j;
      if (++hops > n) {
        ok = false;
        break;
      }
    }
    if (ok) return s;
  }
  return cum.back();  // single hop fallback
}

}  // namespace

ChainConditionReport check_chain_condition(
    const MetricMeasureGraph& g,
    const std::vector<std::pair<int, int>>& pairs,
    const std::vector<int>& n_values) {
  if (pairs.empty())
    throw std::invalid_argument("check_chain_condition needs pairs");
  ChainConditionReport rep;
  for (auto [x, y] : pairs) {
    if (x == y) continue;
    double d = g.distance(x, y);
    if (!std::isfinite(d)) {
      ++rep.pairs_skipped;
      continue;
    }
    auto path = g.shortest_path(x, y);
    std::vector<double> cum(path.size(), 0.0);
    for (size_t i = 1; i < path.size(); ++i)
      cum[i] = g.distance(x, path[i]);
    for (int n : n_values) {
      if (n < 1) continue;
      double s = best_max_step(cum, n);
      rep.C = std::max(rep.C, n * s / d);
    }
    double L = g.min_edge_length();
    for (double eps : {1.5 * L, 3.0 * L, d / 2.0, d}) {
      if (eps <= 0.0) continue;
      ChainResult cr = chain_metric(g, x, y, eps);
      if (cr.finite)
        rep.max_deps_over_d = std::max(rep.max_deps_over_d, cr.d_eps / d);
    }
  }
  return rep;
}

}  // namespace subgauss
