#include <cmath>
#include <limits>

#include "doctest.h"
#include "subgauss/chain.hpp"
#include "subgauss/errors.hpp"
#include "subgauss/graph.hpp"
#include "subgauss/rng.hpp"
#include "subgauss/scale.hpp"

using namespace subgauss;

namespace {

// independent validity check for a chain witness
void require_valid_chain(const MetricMeasureGraph& g, const ChainResult& cr,
                         int x, int y) {
  REQUIRE(cr.chain.size() >= 1);
  CHECK(cr.chain.front() == x);
  CHECK(cr.chain.back() == y);
  double total = 0.0;
  for (size_t i = 1; i < cr.chain.size(); ++i) {
    double step = g.distance(cr.chain[i - 1], cr.chain[i]);
    CHECK(step < cr.epsilon);
    total += step;
  }
  CHECK(total == doctest::Approx(cr.d_eps).epsilon(1e-12));
}

}  // namespace

TEST_CASE("chain metric on the path") {
  auto g = MetricMeasureGraph::path_lattice(9);

  auto fine = chain_metric(g, 0, 8, 1.5);
  CHECK(fine.d_eps == doctest::Approx(8.0));
  CHECK(fine.n_eps == 8);
  require_valid_chain(g, fine, 0, 8);

  // one admissible hop once eps exceeds the distance
  auto coarse = chain_metric(g, 0, 8, 100.0);
  CHECK(coarse.d_eps == doctest::Approx(8.0));
  CHECK(coarse.n_eps == 1);

  // below the lattice spacing nothing moves
  auto stuck = chain_metric(g, 0, 8, 0.5);
  CHECK(!stuck.finite);
  CHECK(std::isinf(stuck.d_eps));

  auto self = chain_metric(g, 3, 3, 0.5);
  CHECK(self.d_eps == 0.0);
  CHECK(self.n_eps == 0);

  CHECK_THROWS_AS(chain_metric(g, 0, 1, 0.0), std::domain_error);
  CHECK_THROWS_AS(chain_metric(g, 0, 99, 1.0), std::invalid_argument);
}

TEST_CASE("chain metric invariants on random pairs") {
  auto g = MetricMeasureGraph::sierpinski(4);
  Rng rng(21);
  for (int it = 0; it < 60; ++it) {
    int x = (int)rng.uniform_int(g.vertex_count());
    int y = (int)rng.uniform_int(g.vertex_count());
    if (x == y) continue;
    double d = g.distance(x, y);
    double eps = 1.0 + rng.uniform() * d;
    auto cr = chain_metric(g, x, y, eps);
    if (!cr.finite) continue;
    require_valid_chain(g, cr, x, y);
    // d_eps >= d, symmetric, and each hop is shorter than eps
    CHECK(cr.d_eps >= d - 1e-12);
    auto rev = chain_metric(g, y, x, eps);
    CHECK(rev.d_eps == doctest::Approx(cr.d_eps).epsilon(1e-12));
    CHECK(rev.n_eps == cr.n_eps);
    // hop-count lower bound: n steps each < eps cover d_eps
    CHECK(cr.n_eps * eps > cr.d_eps);
    // monotone nonincreasing in eps
    auto cr2 = chain_metric(g, x, y, 2.0 * eps);
    CHECK(cr2.d_eps <= cr.d_eps + 1e-12);
  }
}

TEST_CASE("shorten chain") {
  auto g = MetricMeasureGraph::path_lattice(5);
  auto out = shorten_chain(g, {0, 1, 2, 3, 4}, 3.0);
  CHECK(out == std::vector<int>{0, 2, 4});

  // already-coarse chain is untouched
  CHECK(shorten_chain(g, {0, 2, 4}, 3.0) == std::vector<int>{0, 2, 4});

  // a non-eps step is rejected
  CHECK_THROWS_AS(shorten_chain(g, {0, 4}, 3.0), std::invalid_argument);
  CHECK_THROWS_AS(shorten_chain(g, {0}, 3.0), std::invalid_argument);

  // output is a valid eps-chain with preserved endpoints
  auto sg = MetricMeasureGraph::sierpinski(4);
  Rng rng(33);
  for (int it = 0; it < 40; ++it) {
    int x = (int)rng.uniform_int(sg.vertex_count());
    int y = (int)rng.uniform_int(sg.vertex_count());
    if (x == y) continue;
    double eps = 1.5 + 3.0 * rng.uniform();
    auto cr = chain_metric(sg, x, y, eps);
    if (!cr.finite || cr.chain.size() < 2) continue;
    auto s = shorten_chain(sg, cr.chain, eps);
    CHECK(s.front() == x);
    CHECK(s.back() == y);
    for (size_t i = 1; i < s.size(); ++i)
      CHECK(sg.distance(s[i - 1], s[i]) < eps);
    // hop-count upper bound through the shortened witness
    long bound = 9 * (long)std::ceil(cr.d_eps / eps);
    CHECK((long)s.size() - 1 <= bound);
    CHECK(cr.n_eps <= bound);
  }
}

TEST_CASE("epsilon solver on the path") {
  auto g = MetricMeasureGraph::path_lattice(9);
  auto f = ScaleFunction::power(2.0);

  // d(0,4)=4, F(e)/e * 4 = 4e <= 8 exactly at e = 2
  auto sol = solve_epsilon(g, f, 8.0, 0, 4);
  CHECK(sol.epsilon == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(sol.d_eps == doctest::Approx(4.0));
  CHECK(sol.g_value <= 8.0 + 1e-9);

  auto same = solve_epsilon(g, f, 1.0, 3, 3);
  CHECK(same.at_infinity);
  CHECK(std::isinf(same.epsilon));

  // t below the resolution of the lattice
  CHECK_THROWS_AS(solve_epsilon(g, f, 1e-6, 0, 4), below_resolution_error);
  try {
    solve_epsilon(g, f, 1e-6, 0, 4);
  } catch (const below_resolution_error& e) {
    CHECK(e.min_g() > 1e-6);
  }
  CHECK_THROWS_AS(solve_epsilon(g, f, 0.0, 0, 4), std::domain_error);
}

TEST_CASE("epsilon solver tight-supremum property") {
  auto g = MetricMeasureGraph::sierpinski(3);
  Rng rng(17);
  for (int it = 0; it < 50; ++it) {
    int x = (int)rng.uniform_int(g.vertex_count());
    int y = (int)rng.uniform_int(g.vertex_count());
    if (x == y) continue;
    double beta = 1.5 + rng.uniform();
    auto f = ScaleFunction::power(beta);
    double d = g.distance(x, y);
    double t = f(d) / d * d * std::exp((rng.uniform() - 0.3) * 3.0);
    EpsilonSolution sol;
    try {
      sol = solve_epsilon(g, f, t, x, y);
    } catch (const below_resolution_error& e) {
      CHECK(e.min_g() > t);
      continue;
    }
    // g(eps) <= t with the strict chain metric at eps
    auto at = chain_metric(g, x, y, sol.epsilon);
    REQUIRE(at.finite);
    CHECK(f(sol.epsilon) / sol.epsilon * at.d_eps <= t * (1 + 1e-9));
    // just above eps the constraint fails
    double up = sol.epsilon * (1 + 1e-6);
    auto above = chain_metric(g, x, y, up);
    REQUIRE(above.finite);
    CHECK(f(up) / up * above.d_eps > t * (1 - 1e-9));
  }
}

TEST_CASE("epsilon solver disconnected pair") {
  MetricMeasureGraph g(4, {{0, 1, 1.0, 1.0}, {2, 3, 1.0, 1.0}});
  auto f = ScaleFunction::power(2.0);
  CHECK_THROWS_AS(solve_epsilon(g, f, 1.0, 0, 2), below_resolution_error);
}

TEST_CASE("chain condition constant") {
  auto path = MetricMeasureGraph::path_lattice(17);
  auto rep = check_chain_condition(path, {{0, 16}, {2, 10}},
                                   {1, 2, 3, 4, 5, 8, 16});
  CHECK(rep.C >= 1.0);
  CHECK(rep.C <= 2.0);
  CHECK(rep.max_deps_over_d == doctest::Approx(1.0));
  CHECK(rep.pairs_skipped == 0);

  // star: leaf-to-leaf through the hub
  std::vector<Edge> edges;
  for (int i = 1; i <= 6; ++i) edges.push_back({0, i, 1.0, 1.0});
  MetricMeasureGraph star(7, edges);
  auto srep = check_chain_condition(star, {{1, 2}, {3, 4}}, {1, 2});
  CHECK(srep.C == doctest::Approx(1.0));

  // disconnected pairs are counted, not fatal
  MetricMeasureGraph two(4, {{0, 1, 1.0, 1.0}, {2, 3, 1.0, 1.0}});
  auto trep = check_chain_condition(two, {{0, 2}, {0, 1}}, {1});
  CHECK(trep.pairs_skipped == 1);

  CHECK_THROWS_AS(check_chain_condition(path, {}, {1}),
                  std::invalid_argument);
}
