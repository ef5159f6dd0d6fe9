#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "subgauss/dirichlet.hpp"
#include "subgauss/report.hpp"
#include "subgauss/scale.hpp"

namespace subgauss {

/// Heat kernel p_t(x,y) of exp(-tL) (or exp(-tL^Omega)), mu-normalized
/// so that p_t(x,y) = p_t(y,x) and sum_z p_t(x,z) mu(z) <= 1.
/// Backed by an eigendecomposition of the mu-symmetrized generator for
/// small domains, by Lanczos matrix-exponential action above the cutoff.
class HeatKernel {
public:
  HeatKernel(const DirichletForm& df,
             std::optional<std::vector<int>> omega = std::nullopt,
             int dense_cutoff = 4000);

  double p(double t, int x, int y) const;
  // P_t f on the domain (f given on all vertices, read on the domain).
  Vector apply(double t, const Vector& f) const;
  // sum_z p_t(x,z) mu(z) = survival probability for restricted kernels.
  double mass(double t, int x) const;
  // d/dt p_t(.,y) at x, exact: -(L p_t(.,y))(x).
  double time_derivative(double t, int x, int y) const;
  // p_t(.,y) as a full vertex function.
  Vector column(double t, int y) const;

  int domain_size() const { return (int)domain_.size(); }
  const std::vector<int>& domain() const { return domain_; }
  bool spectral() const { return spectral_; }

private:
  const DirichletForm* df_;
  std::vector<int> domain_;          // sorted vertex ids
  std::vector<int> index_;           // vertex -> domain index or -1
  Vector sqrt_mu_;                   // on domain
  bool spectral_ = true;
  // spectral backend
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXd eigenvectors_;
  // krylov backend
  SparseMatrix sym_;  // D^{1/2} L D^{-1/2} restricted

  Vector apply_sym_exp(double t, const Vector& v) const;
};

/// Lanczos approximation of exp(-tS) v for symmetric positive
/// semidefinite sparse S, adaptive subspace size.
Vector expm_lanczos(const SparseMatrix& S, const Vector& v, double t,
                    double tol = 1e-10);

struct KernelRow {
  double t;
  int x, y;
  double p;
};

struct HeatKernelGrid {
  std::vector<int> domain;
  std::vector<double> times;
  std::vector<KernelRow> rows;
  std::shared_ptr<const HeatKernel> backend;
};

/// Kernel values on a time grid; empty pairs means all diagonal entries.
HeatKernelGrid heat_kernel(const DirichletForm& df,
                           const std::vector<double>& times,
                           const std::vector<std::pair<int, int>>& pairs = {});

HeatKernelGrid restricted_heat_kernel(
    const DirichletForm& df, const std::vector<int>& omega,
    const std::vector<double>& times,
    const std::vector<std::pair<int, int>>& pairs = {});

struct MassReport {
  double max_deviation = 0.0;  // max |sum_z p_t(x,z) mu(z) - 1|
  bool pass = false;
};

MassReport conservativeness_check(const DirichletForm& df,
                                  const std::vector<double>& times,
                                  double tol = 1e-10);

struct DerivativeBoundSample {
  double t;
  int x, y;
  double lhs, rhs;  // |d/dt p_t(x,y)| vs (2/t) sqrt(p_{t/2}(x,x) p_{t/2}(y,y))
};

struct DerivativeBoundReport {
  std::vector<DerivativeBoundSample> samples;
  bool pass = false;
};

DerivativeBoundReport time_derivative_check(
    const DirichletForm& df, double t,
    const std::vector<std::pair<int, int>>& pairs);

/// On-diagonal two-sided comparison: p_t(x,x) * V(x, R(t)) bounded above
/// and below, drift-stable across the declared time window.
ConditionReport diag_bounds_check(const DirichletForm& df,
                                  const ScaleFunction& f,
                                  const std::vector<int>& centers,
                                  const std::vector<double>& times);

}  // namespace subgauss
