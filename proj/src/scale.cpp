#include "subgauss/scale.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "subgauss/errors.hpp"

namespace subgauss {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

ScaleFunction ScaleFunction::power(double beta) {
  if (beta <= 1.0) throw regularity_error("power exponent must exceed 1");
  ScaleFunction f;
  f.kind_ = Kind::power;
  f.b1_ = f.b2_ = beta;
  return f;
}

ScaleFunction ScaleFunction::two_piece(double beta1, double beta2) {
  if (beta1 <= 1.0 || beta2 <= 1.0)
    throw regularity_error("two-piece exponents must exceed 1");
  ScaleFunction f;
  f.kind_ = Kind::two_piece;
  f.b1_ = beta1;
  f.b2_ = beta2;
  return f;
}

ScaleFunction ScaleFunction::tabulated(
    std::vector<std::pair<double, double>> table) {
  if (table.size() < 2)
    throw std::invalid_argument("tabulated scale needs >= 2 rows");
  ScaleFunction f;
  f.kind_ = Kind::tabulated;
  f.lr_.reserve(table.size());
  f.lf_.reserve(table.size());
  for (size_t i = 0; i < table.size(); ++i) {
    auto [r, F] = table[i];
    if (r <= 0.0 || F <= 0.0)
      throw std::invalid_argument("tabulated entries must be positive");
    if (i > 0 && (r <= table[i - 1].first || F <= table[i - 1].second))
      throw std::invalid_argument("tabulated columns must strictly increase");
    f.lr_.push_back(std::log(r));
    f.lf_.push_back(std::log(F));
  }
  return f;
}

ScaleFunction ScaleFunction::tabulated_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::pair<double, double>> table;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    double r, F;
    std::string head;
    if (!(ls >> r >> F)) {
      if (lineno == 1) continue;  // header row
      throw parse_error(lineno, "expected 'r,F'");
    }
    table.emplace_back(r, F);
  }
  return tabulated(std::move(table));
}

double ScaleFunction::operator()(double r) const {
  if (r <= 0.0) throw std::domain_error("scale function needs r > 0");
  switch (kind_) {
    case Kind::power:
      return std::pow(r, b1_);
    case Kind::two_piece:
      return r < 1.0 ? std::pow(r, b1_) : std::pow(r, b2_);
    case Kind::tabulated: {
      double lr = std::log(r);
      size_t n = lr_.size();
      // power-law continuation with the end slopes
      size_t i;
      if (lr <= lr_.front())
        i = 0;
      else if (lr >= lr_[n - 2])
        i = n - 2;
      else
        i = std::upper_bound(lr_.begin(), lr_.end(), lr) - lr_.begin() - 1;
      double slope = (lf_[i + 1] - lf_[i]) / (lr_[i + 1] - lr_[i]);
      return std::exp(lf_[i] + slope * (lr - lr_[i]));
    }
  }
  return 0.0;
}

double ScaleFunction::inverse(double t) const {
  if (t <= 0.0) throw std::domain_error("inverse scale needs t > 0");
  switch (kind_) {
    case Kind::power:
      return std::pow(t, 1.0 / b1_);
    case Kind::two_piece:
      return t < 1.0 ? std::pow(t, 1.0 / b1_) : std::pow(t, 1.0 / b2_);
    case Kind::tabulated: {
      double lt = std::log(t);
      size_t n = lf_.size();
      size_t i;
      if (lt <= lf_.front())
        i = 0;
      else if (lt >= lf_[n - 2])
        i = n - 2;
      else
        i = std::upper_bound(lf_.begin(), lf_.end(), lt) - lf_.begin() - 1;
      double slope = (lf_[i + 1] - lf_[i]) / (lr_[i + 1] - lr_[i]);
      return std::exp(lr_[i] + (lt - lf_[i]) / slope);
    }
  }
  return 0.0;
}

Regularity regularity_check(const ScaleFunction& f,
                            const std::vector<double>& grid) {
  if (grid.size() < 3)
    throw std::invalid_argument("regularity grid needs >= 3 points");
  std::vector<double> g = grid;
  std::sort(g.begin(), g.end());
  if (g.front() <= 0.0)
    throw std::invalid_argument("regularity grid must be positive");
  if (g.back() / g.front() < 99.0)
    throw std::invalid_argument("regularity grid must span >= 2 decades");

  // Exponents from well-separated pairs (ratio >= 10) so that local
  // wiggles of tabulated data do not dominate.
  double beta = kInf, beta_prime = 0.0;
  for (size_t i = 0; i < g.size(); ++i)
    for (size_t j = i + 1; j < g.size(); ++j) {
      if (g[j] / g[i] < 10.0) continue;
      double slope = std::log(f(g[j]) / f(g[i])) / std::log(g[j] / g[i]);
      beta = std::min(beta, slope);
      beta_prime = std::max(beta_prime, slope);
    }
  if (!(beta > 1.0))
    throw regularity_error("fitted beta <= 1 violates scale regularity");

  double C = 1.0;
  for (size_t i = 0; i < g.size(); ++i)
    for (size_t j = i + 1; j < g.size(); ++j) {
      double ratio = f(g[j]) / f(g[i]);
      double q = g[j] / g[i];
      C = std::max(C, std::pow(q, beta) / ratio);
      C = std::max(C, ratio / std::pow(q, beta_prime));
    }
  return {beta, beta_prime, C};
}

namespace {

// h(r) = s/r - 1/F(r), the objective of the profile supremum.
double profile_objective(const ScaleFunction& f, double s, double r) {
  return s / r - 1.0 / f(r);
}

// golden-section max of h on [lo,hi] in log r
double golden_max(const ScaleFunction& f, double s, double lo, double hi) {
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = std::log(lo), b = std::log(hi);
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = profile_objective(f, s, std::exp(c));
  double fd = profile_objective(f, s, std::exp(d));
  while (b - a > 1e-13 * (1.0 + std::abs(a) + std::abs(b))) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = profile_objective(f, s, std::exp(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = profile_objective(f, s, std::exp(d));
    }
  }
  return std::exp(0.5 * (a + b));
}

}  // namespace

ProfilePoint phi_point(const ScaleFunction& f, double s) {
  if (s < 0.0) throw std::domain_error("phi needs s >= 0");
  ProfilePoint p;
  p.s = s;
  if (s == 0.0) return p;  // Phi(0) = 0

  // Stationary scale: where the two terms balance, F(r)/r = 2/s.
  // F(r)/r is increasing (beta > 1), so bisect in log r.
  double target = 2.0 / s;
  double lo = 1.0, hi = 1.0;
  auto q = [&](double r) { return f(r) / r; };
  while (q(lo) > target && lo > 1e-280) lo *= 0.5;
  while (q(hi) < target && hi < 1e280) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    double mid = std::sqrt(lo * hi);
    (q(mid) < target ? lo : hi) = mid;
  }
  double rstar = std::sqrt(lo * hi);

  // Coarse scan (non-unimodal safe), then golden-section refinement.
  const int kScan = 512;
  double smin = rstar * 1e-6, smax = rstar * 1e6;
  double lmin = std::log(smin), step = std::log(smax / smin) / (kScan - 1);
  int best = 0;
  double best_val = -kInf;
  for (int i = 0; i < kScan; ++i) {
    double r = std::exp(lmin + i * step);
    double v = profile_objective(f, s, r);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  p.boundary = (best == 0 || best == kScan - 1);
  double blo = std::exp(lmin + std::max(0, best - 1) * step);
  double bhi = std::exp(lmin + std::min(kScan - 1, best + 1) * step);
  p.argmax_r = golden_max(f, s, blo, bhi);
  p.phi = profile_objective(f, s, p.argmax_r);
  if (p.phi < 0.0) p.phi = 0.0;
  return p;
}

double phi_Rt(const ScaleFunction& f, double R, double t) {
  if (t <= 0.0) throw std::domain_error("phi_Rt needs t > 0");
  if (R < 0.0) throw std::domain_error("phi_Rt needs R >= 0");
  if (R == 0.0) return 0.0;
  return t * phi_point(f, R / t).phi;
}

PhiLowerBound phi_lower_bound_check(
    const ScaleFunction& f, const Regularity& reg,
    const std::vector<std::pair<double, double>>& samples) {
  if (samples.empty())
    throw std::invalid_argument("phi_lower_bound_check needs samples");
  PhiLowerBound out;
  out.c = kInf;
  for (auto [R, t] : samples) {
    double lhs = phi_Rt(f, R, t);
    double q = f(R) / t;
    double rhs = std::min(std::pow(q, 1.0 / (reg.beta_prime - 1.0)),
                          std::pow(q, 1.0 / (reg.beta - 1.0)));
    double c = lhs / rhs;
    if (c < out.c) {
      out.c = c;
      out.worst_R = R;
      out.worst_t = t;
    }
  }
  if (!(out.c > 0.0))
    throw numeric_error("profile lower bound failed: c <= 0");
  return out;
}

ScaleFit fit_F_from_exit_times(
    const std::vector<std::pair<double, double>>& data) {
  if (data.size() < 4)
    throw std::invalid_argument("exit-time fit needs >= 4 pairs");
  double rmin = kInf, rmax = 0.0;
  for (auto [r, E] : data) {
    if (r <= 0.0 || E <= 0.0)
      throw std::invalid_argument("exit-time pairs must be positive");
    rmin = std::min(rmin, r);
    rmax = std::max(rmax, r);
  }
  if (rmax / rmin < 9.99)
    throw std::invalid_argument("exit-time radii must span >= 1 decade");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = (int)data.size();
  for (auto [r, E] : data) {
    double lx = std::log(r), ly = std::log(E);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  double beta = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  double intercept = (sy - beta * sx) / n;
  if (!(beta > 1.0))
    throw regularity_error("fitted exit-time exponent <= 1");
  ScaleFit fit{ScaleFunction::power(beta), beta, std::exp(intercept), 1.0};
  for (auto [r, E] : data) {
    double model = fit.prefactor * std::pow(r, beta);
    fit.spread = std::max({fit.spread, E / model, model / E});
  }
  return fit;
}

}  // namespace subgauss
