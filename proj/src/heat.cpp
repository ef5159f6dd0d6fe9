#include "subgauss/heat.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "subgauss/errors.hpp"

namespace subgauss {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

HeatKernel::HeatKernel(const DirichletForm& df,
                       std::optional<std::vector<int>> omega,
                       int dense_cutoff)
    : df_(&df) {
  int n = df.graph().vertex_count();
  if (omega) {
    domain_ = *omega;
    std::sort(domain_.begin(), domain_.end());
    domain_.erase(std::unique(domain_.begin(), domain_.end()), domain_.end());
    if (domain_.empty()) throw std::invalid_argument("empty domain");
  } else {
    domain_.resize(n);
    std::iota(domain_.begin(), domain_.end(), 0);
  }
  index_.assign(n, -1);
  for (int i = 0; i < (int)domain_.size(); ++i) index_[domain_[i]] = i;
  int m = (int)domain_.size();
  sqrt_mu_.resize(m);
  for (int i = 0; i < m; ++i) sqrt_mu_[i] = std::sqrt(df.mu()[domain_[i]]);

  SparseMatrix A = df.restricted_laplacian(domain_);
  // mu-symmetrized generator D^{-1/2} A D^{-1/2}
  sym_ = A;
  for (int k = 0; k < sym_.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(sym_, k); it; ++it)
      it.valueRef() /= sqrt_mu_[it.row()] * sqrt_mu_[it.col()];

  spectral_ = (m <= dense_cutoff);
  if (spectral_) {
    Eigen::MatrixXd dense(sym_);
    dense = 0.5 * (dense + dense.transpose());  // kill fp asymmetry
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense);
    if (es.info() != Eigen::Success)
      throw numeric_error("heat kernel eigendecomposition failed");
    eigenvalues_ = es.eigenvalues();
    eigenvectors_ = es.eigenvectors();
  }
}

Vector HeatKernel::apply_sym_exp(double t, const Vector& v) const {
  if (spectral_) {
    Vector c = eigenvectors_.transpose() * v;
    for (int k = 0; k < c.size(); ++k) c[k] *= std::exp(-eigenvalues_[k] * t);
    return eigenvectors_ * c;
  }
  return expm_lanczos(sym_, v, t);
}

double HeatKernel::p(double t, int x, int y) const {
  if (t <= 0.0) throw std::domain_error("heat kernel needs t > 0");
  int i = index_[x], j = index_[y];
  if (i < 0 || j < 0) return 0.0;
  if (spectral_) {
    double s = 0.0;
    for (int k = 0; k < eigenvalues_.size(); ++k)
      s += std::exp(-eigenvalues_[k] * t) * eigenvectors_(i, k) *
           eigenvectors_(j, k);
    return s / (sqrt_mu_[i] * sqrt_mu_[j]);
  }
  Vector ej = Vector::Zero(domain_.size());
  ej[j] = 1.0;
  Vector col = apply_sym_exp(t, ej);
  return col[i] / (sqrt_mu_[i] * sqrt_mu_[j]);
}

Vector HeatKernel::column(double t, int y) const {
  if (t <= 0.0) throw std::domain_error("heat kernel needs t > 0");
  int j = index_[y];
  if (j < 0) throw std::domain_error("y outside kernel domain");
  Vector ej = Vector::Zero(domain_.size());
  ej[j] = 1.0;
  Vector col = apply_sym_exp(t, ej);
  Vector full = Vector::Zero(df_->graph().vertex_count());
  for (int i = 0; i < (int)domain_.size(); ++i)
    full[domain_[i]] = col[i] / (sqrt_mu_[i] * sqrt_mu_[j]);
  return full;
}

Vector HeatKernel::apply(double t, const Vector& f) const {
  if (t <= 0.0) throw std::domain_error("heat kernel needs t > 0");
  int m = (int)domain_.size();
  Vector v(m);
  for (int i = 0; i < m; ++i) v[i] = sqrt_mu_[i] * f[domain_[i]];
  Vector w = apply_sym_exp(t, v);
  Vector full = Vector::Zero(df_->graph().vertex_count());
  for (int i = 0; i < m; ++i) full[domain_[i]] = w[i] / sqrt_mu_[i];
  return full;
}

double HeatKernel::mass(double t, int x) const {
  Vector ones = Vector::Ones(df_->graph().vertex_count());
  return apply(t, ones)[x];
}

double HeatKernel::time_derivative(double t, int x, int y) const {
  if (t <= 0.0) throw std::domain_error("heat kernel needs t > 0");
  int i = index_[x], j = index_[y];
  if (i < 0 || j < 0) return 0.0;
  if (spectral_) {
    double s = 0.0;
    for (int k = 0; k < eigenvalues_.size(); ++k)
      s -= eigenvalues_[k] * std::exp(-eigenvalues_[k] * t) *
           eigenvectors_(i, k) * eigenvectors_(j, k);
    return s / (sqrt_mu_[i] * sqrt_mu_[j]);
  }
  Vector ej = Vector::Zero(domain_.size());
  ej[j] = 1.0;
  Vector col = apply_sym_exp(t, ej);
  double v = -(sym_ * col)[i];
  return v / (sqrt_mu_[i] * sqrt_mu_[j]);
}

Vector expm_lanczos(const SparseMatrix& S, const Vector& v, double t,
                    double tol) {
  int n = (int)S.rows();
  double beta0 = v.norm();
  if (beta0 == 0.0) return v;
  int m_max = std::min(n, 160);
  Eigen::MatrixXd V(n, m_max);
  Eigen::VectorXd alpha(m_max), beta(m_max);
  V.col(0) = v / beta0;
  int m = 0;
  double off = 0.0;
  for (int j = 0; j < m_max; ++j) {
    Vector w = S * V.col(j);
    alpha[j] = V.col(j).dot(w);
    w -= alpha[j] * V.col(j);
    if (j > 0) w -= beta[j - 1] * V.col(j - 1);
    // full reorthogonalization
    for (int i = 0; i <= j; ++i) w -= V.col(i).dot(w) * V.col(i);
    off = w.norm();
    m = j + 1;
    if (m == n) break;
    if (j + 1 < m_max) {
      beta[j] = off;
      if (off < 1e-14) break;  // invariant subspace
      V.col(j + 1) = w / off;
    }
    // convergence probe every few steps: residual of the small problem
    if (m >= 8 && (m % 4 == 0)) {
      Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
      for (int i = 0; i < m; ++i) T(i, i) = alpha[i];
      for (int i = 0; i + 1 < m; ++i) T(i, i + 1) = T(i + 1, i) = beta[i];
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
      Eigen::VectorXd e1 = Eigen::VectorXd::Zero(m);
      e1[0] = 1.0;
      Eigen::VectorXd c = es.eigenvectors().transpose() * e1;
      for (int k = 0; k < m; ++k)
        c[k] *= std::exp(-es.eigenvalues()[k] * t);
      Eigen::VectorXd y = es.eigenvectors() * c;
      if (off * std::abs(y[m - 1]) * t < tol) break;
    }
  }
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) T(i, i) = alpha[i];
  for (int i = 0; i + 1 < m; ++i) T(i, i + 1) = T(i + 1, i) = beta[i];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
  Eigen::VectorXd e1 = Eigen::VectorXd::Zero(m);
  e1[0] = 1.0;
  Eigen::VectorXd c = es.eigenvectors().transpose() * e1;
  for (int k = 0; k < m; ++k) c[k] *= std::exp(-es.eigenvalues()[k] * t);
  Eigen::VectorXd y = es.eigenvectors() * c;
  return beta0 * (V.leftCols(m) * y);
}

namespace {

HeatKernelGrid make_grid(const DirichletForm& df,
                         std::optional<std::vector<int>> omega,
                         const std::vector<double>& times,
                         const std::vector<std::pair<int, int>>& pairs) {
  for (double t : times)
    if (t <= 0.0) throw std::domain_error("kernel times must be positive");
  auto backend = std::make_shared<HeatKernel>(df, omega);
  HeatKernelGrid grid;
  grid.domain = backend->domain();
  grid.times = times;
  std::vector<std::pair<int, int>> ps = pairs;
  if (ps.empty())
    for (int v : grid.domain) ps.emplace_back(v, v);
  for (double t : times)
    for (auto [x, y] : ps)
      grid.rows.push_back({t, x, y, backend->p(t, x, y)});
  grid.backend = std::move(backend);
  return grid;
}

}  // namespace

HeatKernelGrid heat_kernel(const DirichletForm& df,
                           const std::vector<double>& times,
                           const std::vector<std::pair<int, int>>& pairs) {
  return make_grid(df, std::nullopt, times, pairs);
}

HeatKernelGrid restricted_heat_kernel(
    const DirichletForm& df, const std::vector<int>& omega,
    const std::vector<double>& times,
    const std::vector<std::pair<int, int>>& pairs) {
  return make_grid(df, omega, times, pairs);
}

MassReport conservativeness_check(const DirichletForm& df,
                                  const std::vector<double>& times,
                                  double tol) {
  HeatKernel hk(df);
  MassReport rep;
  Vector ones = Vector::Ones(df.graph().vertex_count());
  for (double t : times) {
    Vector m = hk.apply(t, ones);
    for (int x = 0; x < m.size(); ++x)
      rep.max_deviation = std::max(rep.max_deviation, std::abs(m[x] - 1.0));
  }
  rep.pass = rep.max_deviation <= tol;
  return rep;
}

DerivativeBoundReport time_derivative_check(
    const DirichletForm& df, double t,
    const std::vector<std::pair<int, int>>& pairs) {
  if (t <= 0.0) throw std::domain_error("time_derivative_check needs t > 0");
  HeatKernel hk(df);
  DerivativeBoundReport rep;
  rep.pass = true;
  for (auto [x, y] : pairs) {
    double lhs = std::abs(hk.time_derivative(t, x, y));
    double rhs =
        2.0 / t * std::sqrt(hk.p(t / 2, x, x) * hk.p(t / 2, y, y));
    rep.samples.push_back({t, x, y, lhs, rhs});
    if (lhs > rhs * (1.0 + 1e-9)) rep.pass = false;
  }
  return rep;
}

ConditionReport diag_bounds_check(const DirichletForm& df,
                                  const ScaleFunction& f,
                                  const std::vector<int>& centers,
                                  const std::vector<double>& times) {
  if (centers.empty() || times.empty())
    throw std::invalid_argument("diag_bounds_check needs centers and times");
  const auto& g = df.graph();
  HeatKernel hk(df);
  ConditionReport rep;
  rep.condition = "DUE/DLE";
  rep.window.t_min = *std::min_element(times.begin(), times.end());
  rep.window.t_max = *std::max_element(times.begin(), times.end());
  rep.window.r_min = f.inverse(rep.window.t_min);
  rep.window.r_max = f.inverse(rep.window.t_max);
  double C = 0.0, c = kInf;
  for (double t : times) {
    double Rt = f.inverse(t);
    for (int x : centers) {
      double stat = hk.p(t, x, x) * volume(g, x, Rt);
      rep.samples.emplace_back(t, stat);
      C = std::max(C, stat);
      c = std::min(c, stat);
    }
  }
  double drift = drift_exponent(rep.samples);
  rep.constants["C"] = C;
  rep.constants["c"] = c;
  rep.constants["drift"] = drift;
  rep.pass = c > 0.0 && std::isfinite(C) && std::abs(drift) <= kDriftTol;
  return rep;
}

}  // namespace subgauss
