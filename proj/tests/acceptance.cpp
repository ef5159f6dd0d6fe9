// Acceptance gate: one line per criterion, nonzero exit when any fails.
// Tolerances are pinned here, not read from anywhere else.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "subgauss/chain.hpp"
#include "subgauss/dirichlet.hpp"
#include "subgauss/errors.hpp"
#include "subgauss/exit.hpp"
#include "subgauss/graph.hpp"
#include "subgauss/heat.hpp"
#include "subgauss/rng.hpp"
#include "subgauss/scale.hpp"
#include "subgauss/verify.hpp"

using namespace subgauss;

namespace {

int g_failures = 0;

void criterion(int id, const char* name, const std::function<bool()>& body) {
  auto t0 = std::chrono::steady_clock::now();
  bool ok = false;
  std::string err;
  try {
    ok = body();
  } catch (const std::exception& e) {
    err = e.what();
  }
  double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  if (!ok) ++g_failures;
  std::printf("[%s] criterion %2d: %s (%.2fs)%s%s\n", ok ? "PASS" : "FAIL", id,
              name, secs, err.empty() ? "" : " error: ", err.c_str());
  std::fflush(stdout);
}

bool close_rel(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

std::vector<int> interval(int a, int b) {
  std::vector<int> v(b - a);
  std::iota(v.begin(), v.end(), a);
  return v;
}

// exit-time sweep from a peripheral vertex: radii 3*2^k capped by the
// eccentricity, so the window spans a decade even on small graphs
ScaleFit corner_fit(const MetricMeasureGraph& g) {
  DirichletForm df(g);
  double diam = g.diameter();
  std::vector<double> radii;
  for (double r = 3.0; r < diam; r *= 2.0) radii.push_back(r);
  radii.push_back(diam);
  std::vector<std::pair<double, double>> data;
  for (double r : radii) {
    Ball B = ball(g, 0, r);
    if (df.covers_component(B.members)) break;
    data.emplace_back(r, mean_exit_exact(df, B.members, 0));
  }
  return fit_F_from_exit_times(data);
}

// dyadic sweep around the most central vertex
ScaleFit center_fit(const MetricMeasureGraph& g) {
  DirichletForm df(g);
  int c = 0;
  double best = 1e300;
  for (int v = 0; v < g.vertex_count(); ++v) {
    double ecc = 0.0;
    for (double d : g.distances_from(v))
      if (std::isfinite(d)) ecc = std::max(ecc, d);
    if (ecc < best) { best = ecc; c = v; }
  }
  std::vector<std::pair<double, double>> data;
  for (double r = 2.0; r <= g.diameter() / 2.0; r *= 2.0) {
    Ball B = ball(g, c, r);
    if (df.covers_component(B.members)) break;
    data.emplace_back(r, mean_exit_exact(df, B.members, c));
  }
  return fit_F_from_exit_times(data);
}

bool kernel_axioms(const MetricMeasureGraph& g, uint64_t seed) {
  DirichletForm df(g);
  HeatKernel hk(df);
  int n = g.vertex_count();
  Rng rng(seed);
  for (int it = 0; it < 30; ++it) {
    double t = 0.2 + 3.0 * rng.uniform();
    int x = (int)rng.uniform_int(n), y = (int)rng.uniform_int(n);
    double pxy = hk.p(t, x, y);
    if (pxy < -1e-10) return false;
    double pyx = hk.p(t, y, x);
    if (std::abs(pxy - pyx) >
        1e-10 * std::max(std::abs(pxy), std::abs(pyx)) + 1e-14)
      return false;
    if (hk.mass(t, x) > 1.0 + 1e-10) return false;
    // Chapman-Kolmogorov at t = 0.4 + 0.6 t
    double conv = 0.0;
    for (int z = 0; z < n; ++z)
      conv += hk.p(0.4 * t, x, z) * hk.p(0.6 * t, z, y) * g.measure(z);
    if (std::abs(conv - pxy) > 1e-10 * std::max(1.0, pxy)) return false;
  }
  auto rep = conservativeness_check(df, {0.5, 2.0, 8.0});
  return rep.pass && rep.max_deviation <= 1e-10;
}

struct MCCase {
  const MetricMeasureGraph* g;
  int center;
  double radius;
};

std::string mc_signature(const MCStats& s) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%ld,%llu,%d,%ld", s.mean,
                s.ci_low, s.ci_high, s.n_samples,
                (unsigned long long)s.seed, (int)s.truncated,
                s.truncated_count);
  return buf;
}

}  // namespace

int main() {
  criterion(1, "exit-time exactness on the path lattice", [] {
    auto t0 = std::chrono::steady_clock::now();
    auto g = MetricMeasureGraph::path_lattice(40);
    DirichletForm df(g);
    for (int R : {4, 8, 16, 32}) {
      double e = mean_exit_exact(df, interval(0, R), 0);
      if (!close_rel(e, (double)R * R, 1e-9)) return false;
    }
    double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return secs < 1.0;
  });

  criterion(2, "profile closed form and scaling identity", [] {
    for (double beta : {1.5, 2.0, 3.0}) {
      auto f = ScaleFunction::power(beta);
      double q = beta / (beta - 1.0);
      double coef = (beta - 1.0) * std::pow(beta, -q);
      for (int i = 0; i < 50; ++i) {
        double s = std::pow(10.0, -2.0 + 5.0 * i / 49.0);
        double want = coef * std::pow(s, q);
        if (!close_rel(phi_point(f, s).phi, want, 1e-7)) return false;
      }
    }
    auto f = ScaleFunction::power(2.0);
    Rng rng(2);
    for (int i = 0; i < 100; ++i) {
      double a = std::exp(2.0 * (rng.uniform() - 0.5));
      double b = std::exp(2.0 * (rng.uniform() - 0.5));
      double R = std::exp(3.0 * rng.uniform());
      double t = std::exp(3.0 * rng.uniform());
      double lhs = phi_Rt(f, a * R, b * t);
      double rhs = a * b * phi_Rt(f, R / b, t / a);
      if (!close_rel(lhs + 1e-300, rhs + 1e-300, 1e-9)) return false;
    }
    return true;
  });

  criterion(3, "kernel axioms, monotonicity, closed forms", [] {
    auto k2 = MetricMeasureGraph::path_lattice(2);
    auto p65 = MetricMeasureGraph::path_lattice(65);
    auto sg5 = MetricMeasureGraph::sierpinski(5);
    if (!kernel_axioms(k2, 1) || !kernel_axioms(p65, 2) ||
        !kernel_axioms(sg5, 3))
      return false;

    // nested-domain monotonicity, entrywise
    DirichletForm df(p65);
    HeatKernel full(df);
    HeatKernel inner(df, interval(20, 45));
    HeatKernel outer(df, interval(10, 55));
    for (double t : {0.5, 2.0, 8.0})
      for (int x = 20; x < 45; ++x)
        for (int y = 20; y < 45; ++y) {
          double pi = inner.p(t, x, y), po = outer.p(t, x, y);
          if (pi > po + 1e-12) return false;
          if (po > full.p(t, x, y) + 1e-12) return false;
        }

    // two-point closed forms
    DirichletForm dk(k2);
    HeatKernel hk(dk);
    HeatKernel hr(dk, std::vector<int>{0});
    for (double t : {0.25, 1.0, 4.0}) {
      if (!close_rel(hk.p(t, 0, 0), 0.5 * (1 + std::exp(-2 * t)), 1e-12))
        return false;
      if (!close_rel(hk.p(t, 0, 1), 0.5 * (1 - std::exp(-2 * t)), 1e-12))
        return false;
      if (!close_rel(hr.p(t, 0, 0), std::exp(-t), 1e-12)) return false;
    }
    return true;
  });

  criterion(4, "chain metric bounds on 500 random triples", [] {
    auto p = MetricMeasureGraph::path_lattice(129);
    auto sg = MetricMeasureGraph::sierpinski(4);
    Rng rng(5);
    for (int it = 0; it < 500; ++it) {
      const auto& g = (it % 2 == 0) ? p : sg;
      int n = g.vertex_count();
      int x = (int)rng.uniform_int(n), y = (int)rng.uniform_int(n);
      double d = g.distance(x, y);
      double eps = 1.01 + rng.uniform() * g.diameter();
      auto res = chain_metric(g, x, y, eps);
      if (!res.finite) return false;
      if (res.d_eps < d - 1e-12) return false;
      if (eps > d && std::abs(res.d_eps - d) > 1e-12) return false;
      if (x != y) {
        long lo = (long)std::ceil(res.d_eps / eps - 1e-12);
        if (res.n_eps < lo || res.n_eps > 9 * std::max(1L, lo)) return false;
        // shortened shortest path stays a valid eps-chain within the bound
        auto chain = shorten_chain(g, g.shortest_path(x, y), eps);
        if (chain.front() != x || chain.back() != y) return false;
        double total = 0.0;
        for (size_t i = 1; i < chain.size(); ++i) {
          double step = g.distance(chain[i - 1], chain[i]);
          if (step >= eps) return false;
          total += step;
        }
        if ((long)chain.size() - 1 > 9 * std::max(1L, lo)) return false;
        if (total < d - 1e-12) return false;
      }
    }
    return true;
  });

  criterion(5, "epsilon solver supremum property", [] {
    auto p = MetricMeasureGraph::path_lattice(129);
    auto sg = MetricMeasureGraph::sierpinski(4);
    auto f2 = ScaleFunction::power(2.0);
    auto f25 = ScaleFunction::power(2.5);
    Rng rng(8);
    int checked = 0;
    while (checked < 200) {
      const auto& g = (checked % 2 == 0) ? p : sg;
      const auto& f = (checked % 4 < 2) ? f2 : f25;
      int n = g.vertex_count();
      int x = (int)rng.uniform_int(n), y = (int)rng.uniform_int(n);
      if (x == y) continue;
      double d = g.distance(x, y);
      double t = f(d) * std::exp(3.0 * (rng.uniform() - 0.5));
      EpsilonSolution sol;
      try {
        sol = solve_epsilon(g, f, t, x, y);
      } catch (const below_resolution_error&) {
        continue;
      }
      auto gval = [&](double eps) {
        auto r = chain_metric(g, x, y, eps);
        return r.finite ? f(eps) / eps * r.d_eps : 1e300;
      };
      if (gval(sol.epsilon) > t * (1 + 1e-12)) return false;
      if (gval(sol.epsilon * (1 + 1e-6)) <= t) return false;
      ++checked;
    }
    // the path-lattice pinned case: d=4, F=r^2, t=8 gives eps=2
    auto sol = solve_epsilon(p, f2, 8.0, 60, 64);
    return std::abs(sol.epsilon - 2.0) <= 1e-9;
  });

  criterion(6, "exit tail bound with one fitted constant pair", [] {
    auto g = MetricMeasureGraph::path_lattice(257);
    DirichletForm df(g);
    auto f = ScaleFunction::power(2.0);
    std::vector<Ball> balls;
    for (double r : {8.0, 16.0, 32.0}) balls.push_back(ball(g, 128, r));
    auto rep = check_tail_bound(df, f, balls, {2.0, 8.0, 32.0, 128.0});
    return rep.pass && rep.elementary_bound_ok && rep.gamma > 0.0;
  });

  criterion(7, "walk-dimension recovery on gasket levels 5-7", [] {
    for (int lvl : {5, 6, 7}) {
      auto t0 = std::chrono::steady_clock::now();
      auto g = MetricMeasureGraph::sierpinski(lvl);
      auto fit = corner_fit(g);
      double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
              .count();
      if (fit.beta < 2.22 || fit.beta > 2.42) return false;
      if (secs >= 120.0) return false;
    }
    return true;
  });

  criterion(8, "two-sided estimate through the chain scale", [] {
    // gasket side: regression against the chain hop count
    auto sg = MetricMeasureGraph::sierpinski(6);
    DirichletForm dsg(sg);
    auto fit = center_fit(sg);
    std::vector<double> times;
    for (double r : {2.0, 3.0, 4.0, 5.0, 6.0, 8.0}) times.push_back(fit.f(r));
    auto samples = stratified_samples(sg, times, 40, 20.0, 1);
    auto rep = verify_two_sided(dsg, fit.f, samples);
    if (!rep.pass) return false;
    if (rep.rows.size() < 200) return false;
    if (rep.constants.at("slope") >= 0.0) return false;
    if (rep.constants.at("r2") < 0.9) return false;
    if (rep.constants.at("sandwich") != 1.0) return false;

    // path side: gaussian regime, residual spread within a factor 10
    auto p = MetricMeasureGraph::path_lattice(129);
    DirichletForm dp(p);
    auto f2 = ScaleFunction::power(2.0);
    std::vector<SampleTriple> ps;
    for (int s : {9, 7}) {
      int x0 = s == 9 ? 20 : 40;
      for (int N = 1; N <= 6; ++N) {
        int d = s * N;
        ps.push_back({(s + 1.0) * d / 8.0, x0, x0 + d});
      }
    }
    auto prep = verify_two_sided(dp, f2, ps);
    return prep.pass && prep.constants.at("residual_spread") <= 10.0;
  });

  criterion(9, "equivalence of characterizations, both directions", [] {
    // path, correct scale: both sides pass
    auto p = MetricMeasureGraph::path_lattice(257);
    DirichletForm dp(p);
    auto f2 = ScaleFunction::power(2.0);
    EquivalenceConfig pc;
    pc.radii = {16.0, 32.0, 64.0};
    pc.centers = {128};
    pc.kernel_samples = stratified_samples(p, {16.0, 64.0, 256.0}, 8, 40.0, 19);
    pc.nle_eta = 1.0;
    pc.seed = 23;
    auto good = equivalence_suite(dp, f2, pc);
    if (!(good.side_vhe && good.side_ue_nle && good.agree)) return false;

    // path, wrong exponent: both sides fail, verdicts still agree
    auto bad = equivalence_suite(dp, ScaleFunction::power(3.0), pc);
    if (bad.side_vhe || bad.side_ue_nle || !bad.agree) return false;

    // gasket, fitted scale: both sides pass
    auto sg = MetricMeasureGraph::sierpinski(6);
    DirichletForm dsg(sg);
    auto fit = center_fit(sg);
    int n = sg.vertex_count();
    EquivalenceConfig sc;
    sc.radii = {4.0, 8.0, 16.0};
    sc.h_radii = {8.0, 16.0, 32.0};
    sc.ef_radii = {4.0, 6.0, 8.0, 12.0, 16.0};
    sc.centers = {244, n / 4, n / 2, 3 * n / 4};
    std::vector<double> times;
    for (double r : sc.radii) times.push_back(fit.f(r));
    auto pool = ball(sg, 244, 16.0).members;
    sc.kernel_samples = stratified_samples(sg, times, 10, 40.0, 1, pool);
    sc.nle_eta = 0.5;
    sc.seed = 1;
    auto sgood = equivalence_suite(dsg, fit.f, sc);
    return sgood.side_vhe && sgood.side_ue_nle && sgood.agree;
  });

  criterion(10, "monte carlo consistency on 20 ball configurations", [] {
    auto p65 = MetricMeasureGraph::path_lattice(65);
    auto p129 = MetricMeasureGraph::path_lattice(129);
    auto sg4 = MetricMeasureGraph::sierpinski(4);
    std::vector<MCCase> cases;
    for (int c : {8, 24, 40, 56})
      for (double r : {3.0, 5.0}) cases.push_back({&p65, c, r});
    for (int c : {32, 64, 96})
      for (double r : {4.0, 8.0}) cases.push_back({&p129, c, r});
    for (int c : {10, 40, 80})
      for (double r : {3.0, 5.0}) cases.push_back({&sg4, c, r});
    if (cases.size() != 20) return false;

    int idx = 0;
    for (const auto& cs : cases) {
      DirichletForm df(*cs.g);
      Ball B = ball(*cs.g, cs.center, cs.radius);
      double exact = mean_exit_exact(df, B.members, cs.center);
      MCConfig cfg;
      cfg.seed = 100 + idx++;
      cfg.n_samples = 100000;
      auto st = mc_exit_time(df, B, cs.center, cfg);
      if (st.truncated) return false;
      if (exact < st.ci_low || exact > st.ci_high) return false;
      auto st2 = mc_exit_time(df, B, cs.center, cfg);
      if (mc_signature(st) != mc_signature(st2)) return false;
    }
    return true;
  });

  if (g_failures > 0) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
