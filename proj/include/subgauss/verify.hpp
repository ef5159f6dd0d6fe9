#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "subgauss/chain.hpp"
#include "subgauss/dirichlet.hpp"
#include "subgauss/exit.hpp"
#include "subgauss/heat.hpp"
#include "subgauss/report.hpp"

namespace subgauss {

struct SampleTriple {
  double t;
  int x, y;
};

struct SampleRow {
  double t = 0;
  int x = 0, y = 0;
  double d = 0, d_eps = 0;
  long n_eps = 0;
  double p = 0, V = 0;
  double rhs_up = 0, rhs_low = 0;
};

struct EstimateReport {
  std::string condition;  // UE | NLE | TWO_SIDED | EQUIV
  bool pass = false;
  std::map<std::string, double> constants;
  Window window;
  std::vector<SampleRow> rows;
  std::vector<std::string> warnings;

  std::string to_json() const;
  std::string rows_csv() const;
};

/// (UE): p_t(x,y) <= C / V(x,R(t)) * exp(-1/2 Phi(c d(x,y), t)).
/// Scans candidate c, keeps the largest c whose prefactor C is finite
/// and drift-stable across the time window.
EstimateReport verify_ue(const DirichletForm& df, const ScaleFunction& f,
                         const std::vector<SampleTriple>& samples,
                         double C_cap = 100.0);

/// (NLE): p_t(x,y) >= c / V(x,R(t)) for d(x,y) <= eta R(t); also sweeps
/// eta upward and reports how far c survives.
EstimateReport verify_nle(const DirichletForm& df, const ScaleFunction& f,
                          const std::vector<SampleTriple>& samples,
                          double eta);

/// Two-sided estimate through the chain scale: regression of
/// log(p_t(x,y) V(x,R(t))) against -N_eps at eps = eps(kappa t, x, y).
EstimateReport verify_two_sided(const DirichletForm& df,
                                const ScaleFunction& f,
                                const std::vector<SampleTriple>& samples,
                                double kappa_up = 8.0,
                                double kappa_low = 0.125,
                                double r2_threshold = 0.9);

struct EquivalenceConfig {
  std::vector<double> radii;       // for VD / H / E_F
  std::vector<double> vd_radii;    // overrides radii for VD when nonempty
  std::vector<double> h_radii;     // overrides radii for H when nonempty
  std::vector<double> ef_radii;    // overrides radii for E_F when nonempty
  std::vector<double> times;       // for UE / NLE
  std::vector<int> centers;
  std::vector<SampleTriple> kernel_samples;
  double harnack_delta = 0.5;
  int harnack_trials = 8;
  double nle_eta = 1.0;
  uint64_t seed = 1;
};

struct EquivalenceReport {
  ConditionReport vd_as_condition;  // VD verdict in ConditionReport form
  ConditionReport harnack;
  ConditionReport ef;
  EstimateReport ue;
  EstimateReport nle;
  bool side_vhe = false;  // (VD)+(H)+(E_F)
  bool side_ue_nle = false;
  bool agree = false;
  std::string to_json() const;
};

EquivalenceReport equivalence_suite(const DirichletForm& df,
                                    const ScaleFunction& f,
                                    const EquivalenceConfig& cfg);

/// Stratified (t,x,y) sample generation over a time window, spreading
/// pairs across distance deciles. Deterministic in the seed.
std::vector<SampleTriple> stratified_samples(const MetricMeasureGraph& g,
                                             const std::vector<double>& times,
                                             int per_time, double max_dist,
                                             uint64_t seed);

/// Same, but basepoints are drawn from a given pool. Useful on finite
/// truncations where vertices near the boundary distort the envelope.
std::vector<SampleTriple> stratified_samples(const MetricMeasureGraph& g,
                                             const std::vector<double>& times,
                                             int per_time, double max_dist,
                                             uint64_t seed,
                                             const std::vector<int>& x_pool);

}  // namespace subgauss
