#include "subgauss/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <queue>
#include <sstream>
#include <stdexcept>

#include "subgauss/errors.hpp"

namespace subgauss {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

MetricMeasureGraph::MetricMeasureGraph(int vertex_count,
                                       std::vector<Edge> edges,
                                       std::vector<double> measure)
    : n_(vertex_count), edges_(std::move(edges)), mu_(std::move(measure)) {
  if (n_ <= 0) throw std::invalid_argument("vertex_count must be positive");
  adj_.assign(n_, {});
  wdeg_.assign(n_, 0.0);
  min_len_ = kInf;
  for (const Edge& e : edges_) {
    if (e.u < 0 || e.u >= n_ || e.v < 0 || e.v >= n_)
      throw std::invalid_argument("edge endpoint out of range");
    if (e.u == e.v) throw std::invalid_argument("self-loop not allowed");
    if (e.conductance <= 0.0 || e.length <= 0.0)
      throw std::invalid_argument("conductance and length must be positive");
    adj_[e.u].push_back({e.v, e.conductance, e.length});
    adj_[e.v].push_back({e.u, e.conductance, e.length});
    wdeg_[e.u] += e.conductance;
    wdeg_[e.v] += e.conductance;
    min_len_ = std::min(min_len_, e.length);
  }
  if (mu_.empty()) {
    mu_ = wdeg_;
  } else if ((int)mu_.size() != n_) {
    throw std::invalid_argument("measure size mismatch");
  }
  for (int v = 0; v < n_; ++v)
    if (mu_[v] <= 0.0)
      throw std::invalid_argument("measure must be positive at vertex " +
                                  std::to_string(v));
  total_mass_ = 0.0;
  for (double m : mu_) total_mass_ += m;
}

MetricMeasureGraph MetricMeasureGraph::path_lattice(int n) {
  if (n < 2) throw std::invalid_argument("path lattice needs n >= 2");
  std::vector<Edge> edges;
  edges.reserve(n - 1);
  for (int i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, 1.0, 1.0});
  return MetricMeasureGraph(n, std::move(edges));
}

MetricMeasureGraph MetricMeasureGraph::sierpinski(int level, int max_level) {
  if (level < 0) throw std::invalid_argument("level must be nonnegative");
  if (level > max_level)
    throw resource_limit_error("sierpinski level " + std::to_string(level) +
                               " exceeds limit " + std::to_string(max_level));
  // Vertices live on the triangular lattice: point = a*e1 + b*e2.
  std::map<std::pair<long, long>, int> ids;
  std::vector<Edge> edges;
  std::map<std::pair<int, int>, bool> seen_edges;
  auto vertex = [&](long a, long b) {
    auto [it, inserted] = ids.try_emplace({a, b}, (int)ids.size());
    return it->second;
  };
  auto add_edge = [&](int u, int v) {
    auto key = std::minmax(u, v);
    if (seen_edges.emplace(key, true).second)
      edges.push_back({key.first, key.second, 1.0, 1.0});
  };
  // Recursive corner subdivision; unit cells contribute 3 vertices/edges.
  struct Cell {
    long a, b, size;
  };
  std::vector<Cell> stack{{0, 0, 1L << level}};
  while (!stack.empty()) {
    Cell c = stack.back();
    stack.pop_back();
    if (c.size == 1) {
      int p = vertex(c.a, c.b);
      int q = vertex(c.a + 1, c.b);
      int r = vertex(c.a, c.b + 1);
      add_edge(p, q);
      add_edge(q, r);
      add_edge(r, p);
    } else {
      long h = c.size / 2;
      stack.push_back({c.a, c.b, h});
      stack.push_back({c.a + h, c.b, h});
      stack.push_back({c.a, c.b + h, h});
    }
  }
  return MetricMeasureGraph((int)ids.size(), std::move(edges));
}

MetricMeasureGraph MetricMeasureGraph::from_stream(std::istream& in) {
  std::vector<Edge> edges;
  std::map<std::pair<int, int>, std::pair<double, double>> seen;
  std::map<int, double> measure_entries;
  bool in_measure = false;
  int max_id = -1;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first)) continue;  // blank / comment
    if (first == "MEASURE") {
      in_measure = true;
      continue;
    }
    if (in_measure) {
      int v;
      double mu;
      std::istringstream ms(line);
      if (!(ms >> v >> mu))
        throw parse_error(lineno, "expected 'vertex mu'");
      if (v < 0) throw parse_error(lineno, "negative vertex id");
      if (mu <= 0.0) throw parse_error(lineno, "nonpositive measure");
      if (!measure_entries.emplace(v, mu).second)
        throw parse_error(lineno, "duplicate measure entry");
      continue;
    }
    int u, v;
    double c, len;
    std::istringstream es(line);
    if (!(es >> u >> v >> c >> len))
      throw parse_error(lineno, "expected 'u v conductance length'");
    if (u < 0 || v < 0) throw parse_error(lineno, "negative vertex id");
    if (u == v) throw parse_error(lineno, "self-loop");
    if (c <= 0.0) throw parse_error(lineno, "nonpositive conductance");
    if (len <= 0.0) throw parse_error(lineno, "nonpositive length");
    auto key = std::minmax(u, v);
    auto [it, inserted] = seen.emplace(key, std::make_pair(c, len));
    if (!inserted) {
      if (it->second != std::make_pair(c, len))
        throw parse_error(lineno, "asymmetric duplicate edge");
      continue;  // symmetric restatement of the same edge
    }
    edges.push_back({key.first, key.second, c, len});
    max_id = std::max({max_id, u, v});
  }
  if (edges.empty()) throw parse_error(lineno, "no edges");
  int n = max_id + 1;
  std::vector<double> mu;
  if (!measure_entries.empty()) {
    for (const auto& [v, m] : measure_entries)
      if (v >= n)
        throw parse_error(lineno, "measure names dangling vertex id " +
                                      std::to_string(v));
    if ((int)measure_entries.size() != n)
      throw parse_error(lineno, "measure section must cover all vertices");
    mu.assign(n, 0.0);
    for (const auto& [v, m] : measure_entries) mu[v] = m;
  }
  return MetricMeasureGraph(n, std::move(edges), std::move(mu));
}

MetricMeasureGraph MetricMeasureGraph::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw parse_error(0, "cannot open " + path);
  return from_stream(in);
}

void MetricMeasureGraph::check_vertex(int v) const {
  if (v < 0 || v >= n_)
    throw std::invalid_argument("vertex " + std::to_string(v) +
                                " out of range");
}

const std::vector<double>& MetricMeasureGraph::distances_from(int src) const {
  check_vertex(src);
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto it = dist_cache_.find(src);
    if (it != dist_cache_.end()) return *it->second;
  }
  auto dist = std::make_shared<std::vector<double>>(
      distances_within(src, kInf));
  std::lock_guard<std::mutex> lock(cache_mutex_);
  auto [it, inserted] = dist_cache_.emplace(src, std::move(dist));
  return *it->second;
}

std::vector<double> MetricMeasureGraph::distances_within(int src,
                                                         double radius) const {
  check_vertex(src);
  std::vector<double> dist(n_, kInf);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[src] = 0.0;
  pq.push({0.0, src});
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[u]) continue;
    for (const Neighbor& nb : adj_[u]) {
      double nd = d + nb.length;
      if (nd > radius) continue;
      if (nd < dist[nb.to]) {
        dist[nb.to] = nd;
        pq.push({nd, nb.to});
      }
    }
  }
  return dist;
}

double MetricMeasureGraph::distance(int u, int v) const {
  return distances_from(u)[v];
}

std::vector<int> MetricMeasureGraph::shortest_path(int src, int dst) const {
  check_vertex(src);
  check_vertex(dst);
  std::vector<double> dist(n_, kInf);
  std::vector<int> parent(n_, -1);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[src] = 0.0;
  pq.push({0.0, src});
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[u]) continue;
    if (u == dst) break;
    for (const Neighbor& nb : adj_[u]) {
      double nd = d + nb.length;
      if (nd < dist[nb.to]) {
        dist[nb.to] = nd;
        parent[nb.to] = u;
        pq.push({nd, nb.to});
      }
    }
  }
  if (!std::isfinite(dist[dst])) return {};
  std::vector<int> path;
  for (int v = dst; v != -1; v = parent[v]) path.push_back(v);
  std::reverse(path.begin(), path.end());
  return path;
}

double MetricMeasureGraph::diameter() const {
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    if (diameter_ >= 0.0) return diameter_;
  }
  double diam = 0.0;
  for (int v = 0; v < n_; ++v) {
    const auto& d = distances_from(v);
    for (double x : d)
      if (std::isfinite(x)) diam = std::max(diam, x);
  }
  std::lock_guard<std::mutex> lock(cache_mutex_);
  diameter_ = diam;
  return diam;
}

bool MetricMeasureGraph::connected() const {
  const auto& d = distances_from(0);
  return std::all_of(d.begin(), d.end(),
                     [](double x) { return std::isfinite(x); });
}

Ball ball(const MetricMeasureGraph& g, int x, double r) {
  g.check_vertex(x);
  if (r <= 0.0) throw std::domain_error("ball radius must be positive");
  Ball b;
  b.center = x;
  b.radius = r;
  // Strict inequality: the open ball.
  auto dist = g.distances_within(x, r);
  for (int v = 0; v < g.vertex_count(); ++v)
    if (dist[v] < r) b.members.push_back(v);
  return b;
}

double volume(const MetricMeasureGraph& g, int x, double r) {
  Ball b = ball(g, x, r);
  double vol = 0.0;
  for (int v : b.members) vol += g.measure(v);
  return vol;
}

VolumeReport check_vd(const MetricMeasureGraph& g,
                      const std::vector<double>& radii,
                      const std::vector<int>& centers) {
  if (centers.empty() || radii.empty())
    throw std::invalid_argument("check_vd needs nonempty centers and radii");
  for (double r : radii)
    if (r <= 0.0) throw std::invalid_argument("radii must be positive");
  VolumeReport rep;
  double min_ratio = kInf;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (int x : centers) {
    for (double r : radii) {
      double v1 = volume(g, x, r);
      double v2 = volume(g, x, 2 * r);
      rep.samples.push_back({x, r, v1});
      double ratio = v2 / v1;
      rep.doubling_constant = std::max(rep.doubling_constant, ratio);
      min_ratio = std::min(min_ratio, ratio);
      double lx = std::log(r), ly = std::log(v1);
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
      ++m;
    }
  }
  double denom = m * sxx - sx * sx;
  rep.alpha = denom > 0 ? std::max(0.0, (m * sxy - sx * sy) / denom) : 0.0;
  rep.alpha_prime = std::max(0.0, std::log2(min_ratio));
  return rep;
}

}  // namespace subgauss
