#pragma once

#include <iosfwd>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

namespace subgauss {

struct Edge {
  int u = 0;
  int v = 0;
  double conductance = 1.0;
  double length = 1.0;
};

struct Neighbor {
  int to;
  double conductance;
  double length;
};

/// Finite weighted graph viewed as a metric measure space: shortest-path
/// metric over edge lengths, per-vertex measure mu (default: weighted
/// degree). Immutable after construction; distance queries are cached
/// per source with a fill-once lock.
class MetricMeasureGraph {
public:
  static MetricMeasureGraph path_lattice(int n);
  static MetricMeasureGraph sierpinski(int level, int max_level = 9);
  static MetricMeasureGraph from_stream(std::istream& in);
  static MetricMeasureGraph from_file(const std::string& path);
  // Builds from an explicit edge list; measure empty => weighted degree.
  MetricMeasureGraph(int vertex_count, std::vector<Edge> edges,
                     std::vector<double> measure = {});

  int vertex_count() const { return n_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<Neighbor>& neighbors(int v) const { return adj_[v]; }
  double measure(int v) const { return mu_[v]; }
  const std::vector<double>& measures() const { return mu_; }
  double total_mass() const { return total_mass_; }
  double weighted_degree(int v) const { return wdeg_[v]; }

  // Shortest-path distances from src to every vertex (inf when
  // disconnected). Computed on first use, then cached.
  const std::vector<double>& distances_from(int src) const;
  double distance(int u, int v) const;
  // Distances truncated at radius: entries > radius may be reported as inf.
  std::vector<double> distances_within(int src, double radius) const;
  // Shortest path src -> dst as a vertex sequence (empty if unreachable).
  std::vector<int> shortest_path(int src, int dst) const;

  double diameter() const;  // max finite pairwise distance
  double min_edge_length() const { return min_len_; }
  bool connected() const;

  void check_vertex(int v) const;

private:
  int n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<Neighbor>> adj_;
  std::vector<double> mu_;
  std::vector<double> wdeg_;
  double total_mass_ = 0.0;
  double min_len_ = 0.0;

  mutable std::mutex cache_mutex_;
  mutable std::unordered_map<int, std::shared_ptr<const std::vector<double>>>
      dist_cache_;
  mutable double diameter_ = -1.0;
};

/// Open metric ball B(x,r) = {y : d(x,y) < r}; strict inequality.
struct Ball {
  int center = 0;
  double radius = 0.0;
  std::vector<int> members;
};

Ball ball(const MetricMeasureGraph& g, int x, double r);

/// V(x,r) = mu(B(x,r)).
double volume(const MetricMeasureGraph& g, int x, double r);

struct VolumeSample {
  int center;
  double radius;
  double volume;
};

struct VolumeReport {
  double doubling_constant = 1.0;  // max V(x,2r)/V(x,r)
  double alpha = 0.0;              // log-log growth exponent
  double alpha_prime = 0.0;        // reverse-doubling exponent
  std::vector<VolumeSample> samples;
};

VolumeReport check_vd(const MetricMeasureGraph& g,
                      const std::vector<double>& radii,
                      const std::vector<int>& centers);

}  // namespace subgauss
