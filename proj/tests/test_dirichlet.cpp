#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "subgauss/dirichlet.hpp"
#include "subgauss/errors.hpp"
#include "subgauss/graph.hpp"
#include "subgauss/rng.hpp"
#include "subgauss/scale.hpp"

using namespace subgauss;

namespace {

MetricMeasureGraph triangle() {
  return MetricMeasureGraph(3, {{0, 1, 1.0, 1.0},
                                {1, 2, 1.0, 1.0},
                                {0, 2, 1.0, 1.0}});
}

Vector random_vector(Rng& rng, int n, double lo = -1.0, double hi = 1.0) {
  Vector f(n);
  for (int i = 0; i < n; ++i) f[i] = lo + (hi - lo) * rng.uniform();
  return f;
}

std::vector<int> interval(int a, int b) {  // [a, b)
  std::vector<int> v(b - a);
  std::iota(v.begin(), v.end(), a);
  return v;
}

}  // namespace

TEST_CASE("energy and generator") {
  auto g = triangle();
  DirichletForm df(g);

  Vector ind = Vector::Zero(3);
  ind[0] = 1.0;
  CHECK(df.energy(ind, ind) == doctest::Approx(2.0));

  // E(f,f) = (Lf, f)_mu
  Rng rng(2);
  auto sg = MetricMeasureGraph::sierpinski(3);
  DirichletForm dsg(sg);
  for (int it = 0; it < 20; ++it) {
    Vector f = random_vector(rng, sg.vertex_count());
    Vector g2 = random_vector(rng, sg.vertex_count());
    double e = dsg.energy(f, f);
    CHECK(e == doctest::Approx(dsg.inner_mu(dsg.apply_generator(f), f))
                   .epsilon(1e-12));
    // symmetry and bilinearity spot checks
    CHECK(dsg.energy(f, g2) == doctest::Approx(dsg.energy(g2, f)));
    CHECK(e >= 0.0);
  }

  // Markov property: clipping to [0,1] never increases energy
  for (int it = 0; it < 20; ++it) {
    Vector f = random_vector(rng, sg.vertex_count(), -2.0, 3.0);
    Vector clipped = f.cwiseMax(0.0).cwiseMin(1.0);
    CHECK(dsg.energy(clipped, clipped) <= dsg.energy(f, f) + 1e-12);
  }

  // L annihilates constants
  Vector ones = Vector::Ones(sg.vertex_count());
  CHECK(dsg.apply_generator(ones).cwiseAbs().maxCoeff() ==
        doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("bottom eigenvalue") {
  // path 0-1-2, omega = {1}: L^Omega u = (wdeg/mu) u = (2/2) u
  auto p3 = MetricMeasureGraph::path_lattice(3);
  DirichletForm df(p3);
  CHECK(lambda_min(df, {1}) == doctest::Approx(1.0).epsilon(1e-10));

  // domain monotonicity
  auto p33 = MetricMeasureGraph::path_lattice(33);
  DirichletForm dfp(p33);
  double l_small = lambda_min(dfp, interval(10, 20));
  double l_big = lambda_min(dfp, interval(5, 25));
  CHECK(l_big < l_small);

  // lambda_min >= 1 / sup mean exit time
  Vector ones = Vector::Ones(33);
  auto omega = interval(8, 24);
  Vector G1 = green_apply(dfp, omega, ones);
  double sup_exit = G1.maxCoeff();
  CHECK(lambda_min(dfp, omega) >= 1.0 / sup_exit - 1e-10);

  // oracle: dense eigensolver on the mu-weighted pencil
  {
    auto om = interval(8, 24);
    int m = (int)om.size();
    Eigen::MatrixXd A = Eigen::MatrixXd(dfp.restricted_laplacian(om));
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) M(i, i) = p33.measure(om[i]);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(A, M);
    CHECK(lambda_min(dfp, om) ==
          doctest::Approx(es.eigenvalues()[0]).epsilon(1e-8));
  }

  // whole component => singular
  CHECK_THROWS_AS(lambda_min(df, {0, 1, 2}), zero_eigenvalue_error);
  CHECK_THROWS_AS(lambda_min(df, {}), std::invalid_argument);
}

TEST_CASE("green operator") {
  auto g = MetricMeasureGraph::path_lattice(17);
  DirichletForm df(g);
  auto omega = interval(4, 13);
  Rng rng(5);

  for (int it = 0; it < 10; ++it) {
    Vector f = random_vector(rng, 17);
    Vector u = green_apply(df, omega, f);
    // inverse identity: L u = f on omega (u vanishes outside)
    Vector Lu = df.apply_generator(u);
    for (int v : omega)
      CHECK(Lu[v] == doctest::Approx(f[v]).epsilon(1e-10));
    for (int v = 0; v < 17; ++v)
      if (std::find(omega.begin(), omega.end(), v) == omega.end())
        CHECK(u[v] == 0.0);
  }

  // symmetry in l2(mu)
  Vector f = random_vector(rng, 17), h = random_vector(rng, 17);
  for (int v = 0; v < 17; ++v)
    if (std::find(omega.begin(), omega.end(), v) == omega.end())
      f[v] = h[v] = 0.0;
  Vector Gf = green_apply(df, omega, f), Gh = green_apply(df, omega, h);
  CHECK(df.inner_mu(Gf, h) == doctest::Approx(df.inner_mu(f, Gh)));

  // positivity: nonnegative input, nonnegative potential
  Vector pos = random_vector(rng, 17, 0.0, 1.0);
  Vector Gp = green_apply(df, omega, pos);
  CHECK(Gp.minCoeff() >= -1e-14);

  // sup bound through the mean exit time
  Vector ones = Vector::Ones(17);
  double sup_exit = green_apply(df, omega, ones).maxCoeff();
  Vector bnd = random_vector(rng, 17, -1.0, 1.0);
  Vector Gb = green_apply(df, omega, bnd);
  CHECK(Gb.cwiseAbs().maxCoeff() <= sup_exit + 1e-12);
}

TEST_CASE("mean exit time on the half line") {
  // reflecting at 0, absorbing at R: E_0 tau = R^2 exactly
  for (int R : {4, 8, 16}) {
    auto g = MetricMeasureGraph::path_lattice(R + 5);
    DirichletForm df(g);
    double e = mean_exit_exact(df, interval(0, R), 0);
    CHECK(e == doctest::Approx((double)R * R).epsilon(1e-12));
  }

  auto g = MetricMeasureGraph::path_lattice(9);
  DirichletForm df(g);
  CHECK_THROWS_AS(mean_exit_exact(df, interval(0, 4), 7), std::domain_error);
}

TEST_CASE("dirichlet problem") {
  auto g = MetricMeasureGraph::path_lattice(9);
  DirichletForm df(g);
  auto omega = interval(1, 8);

  // affine boundary data stays affine
  Vector f = Vector::Zero(9);
  f[8] = 8.0;
  Vector u = solve_dirichlet(df, omega, f);
  for (int v = 0; v < 9; ++v)
    CHECK(u[v] == doctest::Approx((double)v).epsilon(1e-10));

  Rng rng(8);
  auto sg = MetricMeasureGraph::sierpinski(3);
  DirichletForm dsg(sg);
  Ball B = ball(sg, 4, 4.0);
  for (int it = 0; it < 10; ++it) {
    Vector bd = random_vector(rng, sg.vertex_count(), 0.0, 1.0);
    Vector uu = solve_dirichlet(dsg, B.members, bd);
    // harmonic on the domain
    Vector Lu = dsg.apply_generator(uu);
    for (int v : B.members)
      CHECK(Lu[v] == doctest::Approx(0.0).epsilon(1e-10));
    // maximum principle over the boundary data
    CHECK(uu.maxCoeff() <= bd.maxCoeff() + 1e-12);
    for (int v : B.members) CHECK(uu[v] >= bd.minCoeff() - 1e-12);
    // energy minimality among extensions with the same outside values
    Vector w = uu;
    for (int v : B.members) w[v] += 0.2 * (rng.uniform() - 0.5);
    CHECK(dsg.energy(uu, uu) <= dsg.energy(w, w) + 1e-12);
    // comparison: larger data, larger solution
    Vector bd2 = bd;
    for (int v = 0; v < sg.vertex_count(); ++v) bd2[v] += rng.uniform();
    Vector uu2 = solve_dirichlet(dsg, B.members, bd2);
    for (int v : B.members) CHECK(uu2[v] >= uu[v] - 1e-12);
  }
}

TEST_CASE("harnack inequality") {
  // interval harmonics are affine; the half-ball ratio stays near 3
  auto g = MetricMeasureGraph::path_lattice(257);
  DirichletForm df(g);
  std::vector<Ball> balls;
  for (double r : {16.0, 32.0, 64.0}) balls.push_back(ball(g, 128, r));
  auto rep = harnack_check(df, balls, 4, 0.5, 13);
  CHECK(rep.pass);
  CHECK(rep.constants["C_H"] > 1.0);
  CHECK(rep.constants["C_H"] < 3.05);

  // two components: a harmonic vanishing on one of them
  MetricMeasureGraph two(6, {{0, 1, 1.0, 1.0},
                             {1, 2, 1.0, 1.0},
                             {3, 4, 1.0, 1.0},
                             {4, 5, 1.0, 1.0}});
  DirichletForm dtwo(two);
  Ball whole{1, 10.0, {0, 1, 2, 3, 4, 5}};
  auto bad = harnack_check(dtwo, {whole}, 2, 0.5, 13);
  CHECK(!bad.pass);

  CHECK_THROWS_AS(harnack_check(df, balls, 0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(harnack_check(df, balls, 2, 1.5), std::invalid_argument);
}

TEST_CASE("oscillation decay") {
  auto g = MetricMeasureGraph::path_lattice(129);
  DirichletForm df(g);
  auto rep = oscillation_check(df, {64}, {8.0, 16.0, 32.0}, 2.0, 3);
  CHECK(rep.pass);
  double theta = rep.constants["theta"];
  CHECK(theta > 0.5);
  CHECK(rep.constants["Theta"] ==
        doctest::Approx(2.0 * theta / (2.0 + theta)));

  CHECK_THROWS_AS(oscillation_check(df, {64}, {8.0}, 2.0),
                  std::invalid_argument);
}

TEST_CASE("spectral lower bound on balls") {
  auto g = MetricMeasureGraph::path_lattice(129);
  DirichletForm df(g);
  auto f = ScaleFunction::power(2.0);
  std::vector<Ball> balls;
  for (double r : {8.0, 16.0, 32.0}) balls.push_back(ball(g, 64, r));
  auto rep = faber_krahn_check(df, f, balls, 6, 2.0, 7);
  CHECK(rep.pass);
  // the minimum sits at the singleton subset: r^2/(2r-1)^2 -> 1/4
  CHECK(rep.constants["c"] > 0.2);
  CHECK(rep.constants["c"] < 0.3);

  CHECK_THROWS_AS(faber_krahn_check(df, f, balls, 2, -1.0),
                  std::invalid_argument);
}
