#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <vector>

#include "subgauss/graph.hpp"
#include "subgauss/report.hpp"
#include "subgauss/scale.hpp"

namespace subgauss {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Graph Dirichlet form E(f,g) = 1/2 sum c_xy (f(x)-f(y))(g(x)-g(y)) and
/// its generator L = D_mu^{-1} A with A = Deg - C the conductance
/// Laplacian. L is self-adjoint in l2(mu).
class DirichletForm {
public:
  explicit DirichletForm(const MetricMeasureGraph& g);

  const MetricMeasureGraph& graph() const { return *g_; }
  const SparseMatrix& laplacian() const { return A_; }  // Deg - C
  const Vector& mu() const { return mu_; }

  double energy(const Vector& f, const Vector& g) const;
  Vector apply_generator(const Vector& f) const;  // L f
  double inner_mu(const Vector& f, const Vector& g) const;

  // A restricted to rows/columns of omega (Dirichlet condition outside).
  SparseMatrix restricted_laplacian(const std::vector<int>& omega) const;
  // Whether omega covers an entire connected component (singular L^Omega).
  bool covers_component(const std::vector<int>& omega) const;

private:
  const MetricMeasureGraph* g_;
  SparseMatrix A_;
  Vector mu_;
};

/// Bottom eigenvalue of L^Omega in l2(mu|Omega) by inverse iteration.
double lambda_min(const DirichletForm& df, const std::vector<int>& omega);

/// u = G^Omega f: solves L^Omega u = f with u = 0 outside omega.
/// f is given on the whole vertex set; values off omega are ignored.
Vector green_apply(const DirichletForm& df, const std::vector<int>& omega,
                   const Vector& f);

/// E_x tau_Omega = (G^Omega 1)(x).
double mean_exit_exact(const DirichletForm& df, const std::vector<int>& omega,
                       int x);

/// Weak Dirichlet problem: u harmonic at every vertex of omega, u = f
/// outside. Returns the full vertex function.
Vector solve_dirichlet(const DirichletForm& df, const std::vector<int>& omega,
                       const Vector& f);

ConditionReport harnack_check(const DirichletForm& df,
                              const std::vector<Ball>& balls, int trials,
                              double delta, uint64_t seed = 1);

ConditionReport oscillation_check(const DirichletForm& df,
                                  const std::vector<int>& centers,
                                  const std::vector<double>& radii,
                                  double beta, uint64_t seed = 1);

ConditionReport faber_krahn_check(const DirichletForm& df,
                                  const ScaleFunction& f,
                                  const std::vector<Ball>& balls,
                                  int subsets_per_ball, double nu,
                                  uint64_t seed = 1);

}  // namespace subgauss
