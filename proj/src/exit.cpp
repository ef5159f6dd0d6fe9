#include "subgauss/exit.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "subgauss/errors.hpp"
#include "subgauss/heat.hpp"
#include "subgauss/rng.hpp"

namespace subgauss {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

void require_in_ball(const Ball& B, int x) {
  if (std::find(B.members.begin(), B.members.end(), x) == B.members.end())
    throw std::domain_error("start vertex not in ball");
}
}  // namespace

std::vector<std::pair<double, double>> exit_tail_exact(
    const DirichletForm& df, const Ball& B, int x,
    const std::vector<double>& times) {
  require_in_ball(B, x);
  HeatKernel hk(df, B.members);
  std::vector<std::pair<double, double>> tail;
  tail.reserve(times.size());
  for (double t : times) {
    if (t < 0.0) throw std::domain_error("tail times must be nonnegative");
    double surv = t == 0.0 ? 1.0 : hk.mass(t, x);
    tail.emplace_back(t, 1.0 - surv);
  }
  return tail;
}

double laplace_exact(const DirichletForm& df, const Ball& B, int x,
                     double lambda) {
  require_in_ball(B, x);
  if (lambda <= 0.0) throw std::domain_error("laplace_exact needs lambda > 0");
  // E_x e^{-lambda tau} = 1 - lambda * ((lambda I + L^B)^{-1} 1)(x);
  // in matrix form (lambda M + A)_B u = mu|_B.
  SparseMatrix A = df.restricted_laplacian(B.members);
  int m = (int)B.members.size();
  Vector rhs(m);
  for (int i = 0; i < m; ++i) rhs[i] = df.mu()[B.members[i]];
  for (int i = 0; i < m; ++i) A.coeffRef(i, i) += lambda * rhs[i];
  Eigen::SimplicialLDLT<SparseMatrix> solver(A);
  if (solver.info() != Eigen::Success)
    throw numeric_error("laplace_exact: factorization failed");
  Vector u = solver.solve(rhs);
  int ix = (int)(std::find(B.members.begin(), B.members.end(), x) -
                 B.members.begin());
  return 1.0 - lambda * u[ix];
}

MCStats mc_exit_time(const DirichletForm& df, const Ball& B, int x,
                     const MCConfig& cfg) {
  require_in_ball(B, x);
  if (cfg.n_samples < 1) throw std::invalid_argument("n_samples >= 1");
  const auto& g = df.graph();
  std::vector<char> in(g.vertex_count(), 0);
  for (int v : B.members) in[v] = 1;

  MCStats st;
  st.seed = cfg.seed;
  st.n_samples = cfg.n_samples;
  double sum = 0.0, sumsq = 0.0;
  long events_left = cfg.max_event_count;
  for (long traj = 0; traj < cfg.n_samples; ++traj) {
    Rng rng = Rng::stream(cfg.seed, (uint64_t)traj);
    int v = x;
    double tau = 0.0;
    bool done = false;
    while (!done) {
      if (events_left-- <= 0) {
        st.truncated = true;
        ++st.truncated_count;
        break;
      }
      double rate = g.weighted_degree(v) / g.measure(v);
      tau += -std::log(rng.uniform_pos()) / rate;
      // jump proportional to conductance, CDF scan
      double u = rng.uniform() * g.weighted_degree(v);
      double acc = 0.0;
      int next = g.neighbors(v).back().to;
      for (const Neighbor& nb : g.neighbors(v)) {
        acc += nb.conductance;
        if (u < acc) {
          next = nb.to;
          break;
        }
      }
      v = next;
      if (!in[v]) done = true;  // exit at the jump epoch
    }
    sum += tau;
    sumsq += tau * tau;
  }
  double n = (double)cfg.n_samples;
  st.mean = sum / n;
  double var = std::max(0.0, (sumsq - sum * sum / n) / (n - 1.0));
  double half = 1.959963984540054 * std::sqrt(var / n);
  st.ci_low = st.mean - half;
  st.ci_high = st.mean + half;
  return st;
}

ConditionReport check_EF(const DirichletForm& df, const ScaleFunction& f,
                         const std::vector<int>& centers,
                         const std::vector<double>& radii) {
  if (centers.empty() || radii.empty())
    throw std::invalid_argument("check_EF needs centers and radii");
  const auto& g = df.graph();
  ConditionReport rep;
  rep.condition = "E_F";
  rep.window.r_min = *std::min_element(radii.begin(), radii.end());
  rep.window.r_max = *std::max_element(radii.begin(), radii.end());
  double C = 1.0;
  for (double r : radii) {
    for (int x : centers) {
      Ball B = ball(g, x, r);
      if (df.covers_component(B.members)) {
        rep.warnings.push_back("ball(" + std::to_string(x) + "," +
                               std::to_string(r) +
                               ") covers a component, skipped");
        continue;
      }
      double E = mean_exit_exact(df, B.members, x);
      double ratio = E / f(r);
      rep.samples.emplace_back(r, ratio);
      C = std::max({C, ratio, 1.0 / ratio});
    }
  }
  if (rep.samples.empty())
    throw std::invalid_argument("check_EF: window produced no usable balls");
  double drift = drift_exponent(rep.samples);
  rep.constants["C"] = C;
  rep.constants["drift"] = drift;
  rep.pass = std::isfinite(C) && std::abs(drift) <= kDriftTol;
  return rep;
}

TailBoundReport check_tail_bound(const DirichletForm& df,
                                 const ScaleFunction& f,
                                 const std::vector<Ball>& balls,
                                 const std::vector<double>& times,
                                 double C_cap) {
  if (balls.empty() || times.empty())
    throw std::invalid_argument("check_tail_bound needs balls and times");
  TailBoundReport rep;

  struct Sample {
    double R, t, P;
  };
  std::vector<Sample> samples;
  for (const Ball& B : balls) {
    if (df.covers_component(B.members)) {
      rep.warnings.push_back("ball at " + std::to_string(B.center) +
                             " covers a component, skipped");
      continue;
    }
    int x = B.center;
    auto tail = exit_tail_exact(df, B, x, times);
    // elementary bound: P_x(tau < t) <= 1 - E_x tau / Ebar + t / Ebar
    Vector ones = Vector::Ones(df.graph().vertex_count());
    Vector Etau = green_apply(df, B.members, ones);
    double Ebar = 0.0;
    for (int v : B.members) Ebar = std::max(Ebar, Etau[v]);
    double Ex = Etau[x];
    for (auto [t, P] : tail) {
      samples.push_back({B.radius, t, P});
      double bound = 1.0 - Ex / Ebar + t / Ebar;
      if (P > bound + 1e-9) rep.elementary_bound_ok = false;
    }
  }
  if (samples.empty())
    throw std::invalid_argument("check_tail_bound: no usable balls");

  // largest gamma with C(gamma) = max P * exp(t Phi(gamma R / t)) <= cap
  double best_gamma = 0.0, best_C = kInf;
  for (int k = 60; k >= 1; --k) {
    double gamma = k / 60.0 * 2.0;  // scan (0, 2]
    double C = 0.0;
    for (const Sample& s : samples) {
      if (s.P <= 1e-12) continue;  // below spectral solver noise floor
      double expo = phi_Rt(f, gamma * s.R, s.t);
      if (expo > 700.0) {
        C = kInf;  // bound cannot be met at double range
        break;
      }
      C = std::max(C, s.P * std::exp(expo));
    }
    if (C <= C_cap) {
      best_gamma = gamma;
      best_C = C;
      break;
    }
  }
  rep.gamma = best_gamma;
  rep.C = best_C;
  rep.pass = best_gamma > 0.0 && rep.elementary_bound_ok;
  return rep;
}

}  // namespace subgauss
