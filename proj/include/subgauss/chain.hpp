#pragma once

#include <vector>

#include "subgauss/graph.hpp"
#include "subgauss/scale.hpp"

namespace subgauss {

/// d_eps / N_eps for one pair: shortest total length and minimal hop
/// count over chains whose steps satisfy d(x_i, x_{i-1}) < eps strictly.
struct ChainResult {
  double epsilon = 0.0;
  double d_eps = 0.0;   // +inf when x,y in different eps-components
  long n_eps = 0;       // hop count; meaningless when !finite
  std::vector<int> chain;  // witness for d_eps, empty when infinite
  bool finite = true;
};

ChainResult chain_metric(const MetricMeasureGraph& g, int x, int y,
                         double eps);

/// Removes interior chain points whose two adjacent steps are each
/// < eps/2; the result is an eps-chain with at most 9*ceil(d_eps/eps)
/// steps when the input has total length <= 2*d_eps.
std::vector<int> shorten_chain(const MetricMeasureGraph& g,
                               const std::vector<int>& chain, double eps);

struct EpsilonSolution {
  double t = 0.0;
  double epsilon = 0.0;   // sup{eps : F(eps)/eps * d_eps <= t}; inf if x==y
  double g_value = 0.0;   // F(eps)/eps * d_eps at the solution
  double d_eps = 0.0;
  bool at_infinity = false;  // x == y
};

EpsilonSolution solve_epsilon(const MetricMeasureGraph& g,
                              const ScaleFunction& f, double t, int x, int y);

struct ChainConditionReport {
  double C = 0.0;                // max n * best_max_step / d(x,y)
  double max_deps_over_d = 1.0;  // max d_eps/d over the sampled eps
  int pairs_skipped = 0;         // disconnected pairs
};

ChainConditionReport check_chain_condition(
    const MetricMeasureGraph& g,
    const std::vector<std::pair<int, int>>& pairs,
    const std::vector<int>& n_values);

}  // namespace subgauss
