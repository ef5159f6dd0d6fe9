#pragma once

#include <cstdint>
#include <vector>

#include "subgauss/dirichlet.hpp"
#include "subgauss/graph.hpp"
#include "subgauss/report.hpp"
#include "subgauss/scale.hpp"

namespace subgauss {

/// P_x(tau_B <= t) = 1 - (exp(-t L^B) 1)(x) for a list of times.
std::vector<std::pair<double, double>> exit_tail_exact(
    const DirichletForm& df, const Ball& B, int x,
    const std::vector<double>& times);

/// E_x exp(-lambda tau_B) via one resolvent solve.
double laplace_exact(const DirichletForm& df, const Ball& B, int x,
                     double lambda);

struct MCConfig {
  uint64_t seed = 1;
  long n_samples = 10000;
  long max_event_count = 100000000;  // total jump budget
};

struct MCStats {
  double mean = 0.0;
  double ci_low = 0.0, ci_high = 0.0;  // 95% CI
  long n_samples = 0;
  uint64_t seed = 0;
  bool truncated = false;
  long truncated_count = 0;
};

/// Continuous-time walk: holding time Exp(sum_c/mu), jumps proportional
/// to conductance; per-trajectory substream keyed by (seed, index).
MCStats mc_exit_time(const DirichletForm& df, const Ball& B, int x,
                     const MCConfig& cfg);

/// (E_F): C^{-1} F(r) <= E_x tau_{B(x,r)} <= C F(r) on the sampled window.
ConditionReport check_EF(const DirichletForm& df, const ScaleFunction& f,
                         const std::vector<int>& centers,
                         const std::vector<double>& radii);

struct TailBoundReport {
  double C = 0.0;      // smallest prefactor at the fitted gamma
  double gamma = 0.0;  // largest gamma with C <= cap
  bool pass = false;
  bool elementary_bound_ok = true;  // P_x(tau < t) <= 1 - E/Ebar + t/Ebar
  std::vector<std::string> warnings;
};

TailBoundReport check_tail_bound(const DirichletForm& df,
                                 const ScaleFunction& f,
                                 const std::vector<Ball>& balls,
                                 const std::vector<double>& times,
                                 double C_cap = 10.0);

}  // namespace subgauss
