#include "subgauss/dirichlet.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <memory>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "subgauss/errors.hpp"
#include "subgauss/rng.hpp"

namespace subgauss {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

// ---------------------------------------------------------------- report

LineFit fit_line(const std::vector<std::pair<double, double>>& xy) {
  LineFit f;
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (auto [x, y] : xy) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
    ++f.n;
  }
  if (f.n < 2) return f;
  double n = f.n;
  double denom = n * sxx - sx * sx;
  if (denom <= 0) return f;
  f.slope = (n * sxy - sx * sy) / denom;
  f.intercept = (sy - f.slope * sx) / n;
  double sst = syy - sy * sy / n;
  double sse = 0;
  for (auto [x, y] : xy) {
    double e = y - (f.slope * x + f.intercept);
    sse += e * e;
  }
  f.r2 = sst > 0 ? 1.0 - sse / sst : 1.0;
  return f;
}

double drift_exponent(const std::vector<std::pair<double, double>>& samples) {
  std::vector<std::pair<double, double>> logs;
  for (auto [scale, stat] : samples)
    if (scale > 0 && stat > 0 && std::isfinite(stat))
      logs.emplace_back(std::log(scale), std::log(stat));
  if (logs.size() < 2) return 0.0;
  return fit_line(logs).slope;
}

std::string ConditionReport::to_json() const {
  nlohmann::json j;
  j["condition"] = condition;
  j["pass"] = pass;
  j["constants"] = constants;
  j["window"] = {{"r_min", window.r_min},
                 {"r_max", window.r_max},
                 {"t_min", window.t_min},
                 {"t_max", window.t_max}};
  auto& arr = j["samples"] = nlohmann::json::array();
  for (auto [scale, stat] : samples)
    arr.push_back({{"scale", scale}, {"stat", stat}});
  j["warnings"] = warnings;
  return j.dump(2);
}

// ---------------------------------------------------------- DirichletForm

DirichletForm::DirichletForm(const MetricMeasureGraph& g) : g_(&g) {
  int n = g.vertex_count();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(4 * g.edges().size());
  for (const Edge& e : g.edges()) {
    trip.emplace_back(e.u, e.u, e.conductance);
    trip.emplace_back(e.v, e.v, e.conductance);
    trip.emplace_back(e.u, e.v, -e.conductance);
    trip.emplace_back(e.v, e.u, -e.conductance);
  }
  A_.resize(n, n);
  A_.setFromTriplets(trip.begin(), trip.end());
  mu_.resize(n);
  for (int v = 0; v < n; ++v) mu_[v] = g.measure(v);
}

double DirichletForm::energy(const Vector& f, const Vector& g) const {
  double e = 0.0;
  for (const Edge& ed : g_->edges())
    e += ed.conductance * (f[ed.u] - f[ed.v]) * (g[ed.u] - g[ed.v]);
  return e;
}

Vector DirichletForm::apply_generator(const Vector& f) const {
  return (A_ * f).cwiseQuotient(mu_);
}

double DirichletForm::inner_mu(const Vector& f, const Vector& g) const {
  return f.cwiseProduct(g).dot(mu_);
}

SparseMatrix DirichletForm::restricted_laplacian(
    const std::vector<int>& omega) const {
  int m = (int)omega.size();
  std::vector<int> idx(g_->vertex_count(), -1);
  for (int i = 0; i < m; ++i) {
    g_->check_vertex(omega[i]);
    idx[omega[i]] = i;
  }
  std::vector<Eigen::Triplet<double>> trip;
  for (int i = 0; i < m; ++i) {
    int v = omega[i];
    trip.emplace_back(i, i, g_->weighted_degree(v));
    for (const Neighbor& nb : g_->neighbors(v))
      if (idx[nb.to] >= 0) trip.emplace_back(i, idx[nb.to], -nb.conductance);
  }
  SparseMatrix S(m, m);
  S.setFromTriplets(trip.begin(), trip.end());
  return S;
}

bool DirichletForm::covers_component(const std::vector<int>& omega) const {
  std::vector<char> in(g_->vertex_count(), 0), seen(g_->vertex_count(), 0);
  for (int v : omega) in[v] = 1;
  for (int s : omega) {
    if (seen[s]) continue;
    std::queue<int> q;
    q.push(s);
    seen[s] = 1;
    bool escaped = false;
    std::vector<int> comp{s};
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (const Neighbor& nb : g_->neighbors(u)) {
        if (!in[nb.to]) {
          escaped = true;
          continue;
        }
        if (!seen[nb.to]) {
          seen[nb.to] = 1;
          comp.push_back(nb.to);
          q.push(nb.to);
        }
      }
    }
    if (!escaped) return true;
  }
  return false;
}

// ------------------------------------------------------------- operators

namespace {

std::unique_ptr<Eigen::SimplicialLDLT<SparseMatrix>> factor_restricted(
    const DirichletForm& df, const std::vector<int>& omega,
    const char* what) {
  if (omega.empty()) throw std::invalid_argument("empty domain");
  if (df.covers_component(omega))
    throw zero_eigenvalue_error(std::string(what) +
                                ": domain covers a whole component, "
                                "lambda_min = 0");
  auto solver = std::make_unique<Eigen::SimplicialLDLT<SparseMatrix>>();
  solver->compute(df.restricted_laplacian(omega));
  if (solver->info() != Eigen::Success)
    throw numeric_error(std::string(what) + ": factorization failed");
  return solver;
}

}  // namespace

double lambda_min(const DirichletForm& df, const std::vector<int>& omega) {
  auto solver_p = factor_restricted(df, omega, "lambda_min");
  auto& solver = *solver_p;
  int m = (int)omega.size();
  Vector muo(m);
  for (int i = 0; i < m; ++i) muo[i] = df.mu()[omega[i]];
  SparseMatrix Ao = df.restricted_laplacian(omega);

  // inverse iteration on the pencil (A, M), deterministic all-ones start
  Vector v = Vector::Ones(m);
  v /= std::sqrt(v.cwiseProduct(v).dot(muo));
  double lambda = v.dot(Ao * v);
  int cap = std::max(50, 10 * m);
  for (int it = 0; it < cap; ++it) {
    Vector w = solver.solve(muo.cwiseProduct(v));
    double norm = std::sqrt(w.cwiseProduct(w).dot(muo));
    if (!(norm > 0)) throw numeric_error("inverse iteration collapsed");
    v = w / norm;
    double next = v.dot(Ao * v) / v.cwiseProduct(v).dot(muo);
    if (std::abs(next - lambda) <= 1e-8 * std::abs(next)) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return lambda;
}

Vector green_apply(const DirichletForm& df, const std::vector<int>& omega,
                   const Vector& f) {
  auto solver_p = factor_restricted(df, omega, "green_apply");
  auto& solver = *solver_p;
  int m = (int)omega.size();
  Vector rhs(m);
  for (int i = 0; i < m; ++i) rhs[i] = df.mu()[omega[i]] * f[omega[i]];
  Vector u = solver.solve(rhs);
  Vector full = Vector::Zero(df.graph().vertex_count());
  for (int i = 0; i < m; ++i) full[omega[i]] = u[i];
  return full;
}

double mean_exit_exact(const DirichletForm& df, const std::vector<int>& omega,
                       int x) {
  if (std::find(omega.begin(), omega.end(), x) == omega.end())
    throw std::domain_error("mean_exit_exact: x not in domain");
  Vector ones = Vector::Ones(df.graph().vertex_count());
  return green_apply(df, omega, ones)[x];
}

Vector solve_dirichlet(const DirichletForm& df, const std::vector<int>& omega,
                       const Vector& f) {
  auto solver_p = factor_restricted(df, omega, "solve_dirichlet");
  auto& solver = *solver_p;
  int n = df.graph().vertex_count();
  int m = (int)omega.size();
  Vector fext = f;
  for (int v : omega) fext[v] = 0.0;
  Vector w = df.laplacian() * fext;
  Vector rhs(m);
  for (int i = 0; i < m; ++i) rhs[i] = -w[omega[i]];
  Vector u = solver.solve(rhs);
  Vector full = fext;
  for (int i = 0; i < m; ++i) full[omega[i]] = u[i];
  return full;
}

// -------------------------------------------------------------- checkers

namespace {

std::vector<int> boundary_of(const MetricMeasureGraph& g,
                             const std::vector<int>& omega) {
  std::vector<char> in(g.vertex_count(), 0);
  for (int v : omega) in[v] = 1;
  std::vector<char> bmark(g.vertex_count(), 0);
  std::vector<int> bnd;
  for (int v : omega)
    for (const Neighbor& nb : g.neighbors(v))
      if (!in[nb.to] && !bmark[nb.to]) {
        bmark[nb.to] = 1;
        bnd.push_back(nb.to);
      }
  std::sort(bnd.begin(), bnd.end());
  return bnd;
}

}  // namespace

ConditionReport harnack_check(const DirichletForm& df,
                              const std::vector<Ball>& balls, int trials,
                              double delta, uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("harnack_check: trials >= 1");
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("harnack_check: delta in (0,1)");
  const auto& g = df.graph();
  ConditionReport rep;
  rep.condition = "H";
  rep.window = {kInf, 0.0, 0.0, 0.0};
  double CH = 0.0;
  bool any_infinite = false;
  Rng rng(seed);
  for (const Ball& B : balls) {
    rep.window.r_min = std::min(rep.window.r_min, B.radius);
    rep.window.r_max = std::max(rep.window.r_max, B.radius);
    Ball shrunk = ball(g, B.center, delta * B.radius);
    if (shrunk.members.empty()) {
      rep.warnings.push_back("ball at " + std::to_string(B.center) +
                             " skipped: empty shrunk ball");
      continue;
    }
    auto bnd = boundary_of(g, B.members);
    if (bnd.empty()) {
      if ((int)B.members.size() < g.vertex_count()) {
        // ball swallowed a whole component of a disconnected graph
        any_infinite = true;
        rep.samples.emplace_back(B.radius, kInf);
      }
      continue;
    }
    // boundary data: extremal vertex indicators, then random nonnegative
    std::vector<Vector> data;
    int nb = (int)bnd.size();
    int cap = std::min(nb, 40);
    for (int k = 0; k < cap; ++k) {
      Vector f = Vector::Zero(g.vertex_count());
      f[bnd[(size_t)k * nb / cap]] = 1.0;
      data.push_back(std::move(f));
    }
    for (int tI = 0; tI < trials; ++tI) {
      Vector f = Vector::Zero(g.vertex_count());
      for (int b : bnd) f[b] = rng.uniform();
      data.push_back(std::move(f));
    }
    double worst = 1.0;
    for (const Vector& f : data) {
      Vector u = solve_dirichlet(df, B.members, f);
      double umax = -kInf, umin = kInf;
      for (int v : shrunk.members) {
        umax = std::max(umax, u[v]);
        umin = std::min(umin, u[v]);
      }
      if (umax <= 1e-14) continue;  // vacuous zero harmonic
      if (umin <= 1e-14 * umax) {
        any_infinite = true;
        worst = kInf;
        break;
      }
      worst = std::max(worst, umax / umin);
    }
    rep.samples.emplace_back(B.radius, worst);
    if (std::isfinite(worst)) CH = std::max(CH, worst);
  }
  double drift = drift_exponent(rep.samples);
  rep.constants["C_H"] = any_infinite ? kInf : CH;
  rep.constants["delta"] = delta;
  rep.constants["drift"] = drift;
  rep.pass = !any_infinite && CH > 0.0 && std::abs(drift) <= kDriftTol;
  return rep;
}

ConditionReport oscillation_check(const DirichletForm& df,
                                  const std::vector<int>& centers,
                                  const std::vector<double>& radii,
                                  double beta, uint64_t seed) {
  if (radii.size() < 2)
    throw std::invalid_argument("oscillation_check needs nested radii");
  std::vector<double> rr = radii;
  std::sort(rr.begin(), rr.end());
  const auto& g = df.graph();
  ConditionReport rep;
  rep.condition = "OSC";
  rep.window = {rr.front(), rr.back(), 0.0, 0.0};
  Rng rng(seed);
  double theta = kInf;
  for (int x : centers) {
    for (size_t k = 0; k + 1 < rr.size(); ++k) {
      double rho = rr[k], r = rr[k + 1];
      Ball B = ball(g, x, r);
      Ball Brho = ball(g, x, rho);
      auto bnd = boundary_of(g, B.members);
      if (bnd.empty() || Brho.members.empty()) continue;
      std::vector<Vector> data;
      int cap = std::min((int)bnd.size(), 16);
      for (int i = 0; i < cap; ++i) {
        Vector f = Vector::Zero(g.vertex_count());
        f[bnd[(size_t)i * bnd.size() / cap]] = 1.0;
        data.push_back(std::move(f));
      }
      for (int i = 0; i < 4; ++i) {
        Vector f = Vector::Zero(g.vertex_count());
        for (int b : bnd) f[b] = rng.uniform();
        data.push_back(std::move(f));
      }
      for (const Vector& f : data) {
        Vector u = solve_dirichlet(df, B.members, f);
        auto osc = [&](const std::vector<int>& mem) {
          double mx = -kInf, mn = kInf;
          for (int v : mem) {
            mx = std::max(mx, u[v]);
            mn = std::min(mn, u[v]);
          }
          return mx - mn;
        };
        double osc_r = osc(B.members), osc_rho = osc(Brho.members);
        if (osc_rho <= 1e-14 * (1.0 + osc_r)) continue;  // vacuous
        double th = std::log(2.0 * osc_r / osc_rho) / std::log(r / rho);
        theta = std::min(theta, th);
        rep.samples.emplace_back(r, osc_rho / osc_r);
      }
    }
  }
  if (!std::isfinite(theta)) {
    rep.warnings.push_back("all samples vacuous");
    theta = 0.0;
  }
  rep.constants["theta"] = theta;
  rep.constants["Theta"] = theta > 0 ? beta * theta / (beta + theta) : 0.0;
  rep.pass = theta > 0.0;
  return rep;
}

ConditionReport faber_krahn_check(const DirichletForm& df,
                                  const ScaleFunction& f,
                                  const std::vector<Ball>& balls,
                                  int subsets_per_ball, double nu,
                                  uint64_t seed) {
  if (!(nu > 0.0)) throw std::invalid_argument("faber_krahn: nu > 0");
  const auto& g = df.graph();
  ConditionReport rep;
  rep.condition = "FK";
  rep.window = {kInf, 0.0, 0.0, 0.0};
  double c_global = kInf;
  Rng rng(seed);
  int produced = 0;
  for (const Ball& B : balls) {
    rep.window.r_min = std::min(rep.window.r_min, B.radius);
    rep.window.r_max = std::max(rep.window.r_max, B.radius);
    double muB = 0.0;
    for (int v : B.members) muB += g.measure(v);
    double Fr = f(B.radius);
    double c_ball = kInf;
    // deterministic extremes first so the minimum is stable across radii
    std::vector<std::vector<int>> subsets{B.members, {B.center}};
    Ball half = ball(g, B.center, B.radius / 2.0);
    if (!half.members.empty()) subsets.push_back(half.members);
    for (int s = 0; s < subsets_per_ball; ++s) {
      // random connected subset grown from a random member
      size_t target = 1 + rng.uniform_int(B.members.size());
      int start = B.members[rng.uniform_int(B.members.size())];
      std::vector<char> in_ball(g.vertex_count(), 0), taken(g.vertex_count(), 0);
      for (int v : B.members) in_ball[v] = 1;
      std::vector<int> frontier{start}, subset;
      taken[start] = 1;
      while (!frontier.empty() && subset.size() < target) {
        size_t pick = rng.uniform_int(frontier.size());
        int v = frontier[pick];
        frontier.erase(frontier.begin() + pick);
        subset.push_back(v);
        for (const Neighbor& nb : g.neighbors(v))
          if (in_ball[nb.to] && !taken[nb.to]) {
            taken[nb.to] = 1;
            frontier.push_back(nb.to);
          }
      }
      std::sort(subset.begin(), subset.end());
      subsets.push_back(std::move(subset));
    }
    for (const auto& omega : subsets) {
      if (omega.empty()) continue;
      if (df.covers_component(omega)) {
        rep.warnings.push_back("subset covering a component skipped");
        continue;
      }
      double lam = lambda_min(df, omega);
      double muO = 0.0;
      for (int v : omega) muO += g.measure(v);
      double stat = lam * Fr * std::pow(muO / muB, nu);
      c_ball = std::min(c_ball, stat);
      ++produced;
    }
    if (std::isfinite(c_ball)) {
      rep.samples.emplace_back(B.radius, c_ball);
      c_global = std::min(c_global, c_ball);
    }
  }
  if (produced == 0) throw numeric_error("faber_krahn: no subsets generated");
  double drift = drift_exponent(rep.samples);
  rep.constants["c"] = c_global;
  rep.constants["nu"] = nu;
  rep.constants["drift"] = drift;
  rep.pass = c_global > 0.0 && std::abs(drift) <= kDriftTol;
  return rep;
}

}  // namespace subgauss
