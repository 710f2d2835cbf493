#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "bolza/convex_fn.hpp"

using namespace bolza;

namespace {

// Quadratic-cost reference for the discrete Legendre transform.
Vec brute_llt(const Vec& grid, const Vec& values, const Vec& dual_grid) {
  Vec out(dual_grid.size(), -kInf);
  for (std::size_t j = 0; j < dual_grid.size(); ++j) {
    double w = dual_grid[j];
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (values[i] == kInf) continue;
      out[j] = std::max(out[j], w * grid[i] - values[i]);
    }
  }
  return out;
}

Vec linspace(double a, double b, std::size_t n) {
  Vec out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = a + (b - a) * double(i) / double(n - 1);
  return out;
}

}  // namespace

TEST_CASE("discrete Legendre transform reproduces the brute-force doubles") {
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  for (int trial = 0; trial < 60; ++trial) {
    std::size_t n = 3 + std::size_t(std::abs(unif(rng)) * 100);
    std::size_t m = 3 + std::size_t(std::abs(unif(rng)) * 100);
    Vec grid = linspace(-3.0 + 0.3 * unif(rng), 3.0 + 0.3 * unif(rng), n);
    Vec values(n);
    // convex samples plus occasional +inf entries marking a restricted domain
    double a = std::abs(unif(rng)), p = unif(rng), q = unif(rng);
    for (std::size_t i = 0; i < n; ++i) values[i] = (a * grid[i] + p) * grid[i] + q;
    if (trial % 3 == 0) {
      std::size_t cut = n / 4;
      for (std::size_t i = 0; i < cut; ++i) values[i] = kInf;
      for (std::size_t i = n - cut; i < n; ++i) values[i] = kInf;
    }
    Vec dual = linspace(-4.0, 4.0, m);
    Vec fast = llt_conjugate(grid, values, dual);
    Vec slow = brute_llt(grid, values, dual);
    REQUIRE(fast.size() == slow.size());
    for (std::size_t j = 0; j < m; ++j) CHECK(fast[j] == slow[j]);
  }
}

TEST_CASE("discrete Legendre transform handles nonconvex samples by convexifying") {
  // samples of a nonconvex function: the transform only sees the convex hull,
  // and must still agree with the brute force
  Vec grid = linspace(-2.0, 2.0, 41);
  Vec values(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) values[i] = std::sin(3.0 * grid[i]);
  Vec dual = linspace(-3.0, 3.0, 29);
  Vec fast = llt_conjugate(grid, values, dual);
  Vec slow = brute_llt(grid, values, dual);
  for (std::size_t j = 0; j < dual.size(); ++j) CHECK(fast[j] == slow[j]);
}

TEST_CASE("discrete Legendre transform rejects an all-infinite sample set") {
  Vec grid = {0.0, 1.0, 2.0};
  Vec values = {kInf, kInf, kInf};
  CHECK_THROWS_AS(llt_conjugate(grid, values, grid), std::invalid_argument);
}

TEST_CASE("sampled transform converges to the true conjugate of a smooth function") {
  // f = z^2/2 on a fine grid: the sampled conjugate approaches w^2/2
  Vec grid = linspace(-6.0, 6.0, 4001);
  Vec values(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) values[i] = 0.5 * grid[i] * grid[i];
  Vec dual = linspace(-2.0, 2.0, 21);
  Vec g = llt_conjugate(grid, values, dual);
  for (std::size_t j = 0; j < dual.size(); ++j) {
    CHECK(g[j] <= 0.5 * dual[j] * dual[j] + 1e-12);
    CHECK(g[j] >= 0.5 * dual[j] * dual[j] - 2e-5);
  }
}

TEST_CASE("two-dimensional transform factors into two one-dimensional passes") {
  std::mt19937 rng(37);
  std::uniform_real_distribution<double> unif(-1.5, 1.5);
  SampledConvex f;
  f.grid1 = linspace(-2.0, 2.0, 17);
  f.grid2 = linspace(-1.0, 3.0, 13);
  double a1 = 0.7, a2 = 0.4, p1 = unif(rng), p2 = unif(rng);
  f.values2.assign(f.grid1.size(), Vec(f.grid2.size()));
  for (std::size_t i = 0; i < f.grid1.size(); ++i)
    for (std::size_t j = 0; j < f.grid2.size(); ++j)
      f.values2[i][j] = a1 * f.grid1[i] * f.grid1[i] + p1 * f.grid1[i] +
                        a2 * f.grid2[j] * f.grid2[j] + p2 * f.grid2[j];
  Vec w1 = linspace(-2.0, 2.0, 9), w2 = linspace(-2.0, 2.0, 11);
  std::vector<Vec> fast = llt_conjugate2(f, w1, w2);
  for (std::size_t r = 0; r < w1.size(); ++r) {
    for (std::size_t c = 0; c < w2.size(); ++c) {
      double best = -kInf;
      for (std::size_t i = 0; i < f.grid1.size(); ++i)
        for (std::size_t j = 0; j < f.grid2.size(); ++j)
          best = std::max(best,
                          w1[r] * f.grid1[i] + w2[c] * f.grid2[j] - f.values2[i][j]);
      CHECK(fast[r][c] == doctest::Approx(best).epsilon(1e-12));
    }
  }
}

TEST_CASE("normal cone of a box") {
  Box b{{Interval{0.0, 1.0}, Interval{-2.0, 2.0}, Interval{3.0, 3.0}}};

  Box inside = normal_cone_box(b, {0.5, 0.0, 3.0});
  CHECK(inside.coords[0].lo == 0.0);
  CHECK(inside.coords[0].hi == 0.0);
  CHECK(inside.coords[1].is_point());
  // a point coordinate frees the whole line
  CHECK(inside.coords[2].lo == -kInf);
  CHECK(inside.coords[2].hi == kInf);

  Box right = normal_cone_box(b, {1.0, 2.0, 3.0});
  CHECK(right.coords[0].lo == 0.0);
  CHECK(right.coords[0].hi == kInf);
  CHECK(right.coords[1].lo == 0.0);
  CHECK(right.coords[1].hi == kInf);

  Box left = normal_cone_box(b, {0.0, -2.0, 3.0});
  CHECK(left.coords[0].lo == -kInf);
  CHECK(left.coords[0].hi == 0.0);

  CHECK_THROWS_AS(normal_cone_box(b, {1.5, 0.0, 3.0}), std::domain_error);
  // snap treats a point just outside as sitting on the edge
  Box snapped = normal_cone_box(b, {1.0 + 1e-9, 0.0, 3.0}, 1e-8);
  CHECK(snapped.coords[0].hi == kInf);
}

TEST_CASE("Hamiltonian sign conventions") {
  ConvexFn box_phi(std::vector<Plq>{Plq::indicator(0.0, 1.0)});
  ConvexFn quad_psi(std::vector<Plq>{Plq::quadratic(0.5)});
  ConvexFn abs_psi(std::vector<Plq>{Plq::abs_value()});
  ConvexFn quad_star = quad_psi.conjugate();  // y^2/2
  ConvexFn abs_star = abs_psi.conjugate();    // indicator of [-1, 1]

  // finite case: H = phi(x) - psi*(y)
  CHECK(hamiltonian_value(box_phi, quad_star, {0.5}, {2.0}) == doctest::Approx(-2.0));
  // psi*(y) = +inf drives H to -inf even where phi is +inf too
  CHECK(hamiltonian_value(box_phi, abs_star, {0.5}, {2.0}) == -kInf);
  CHECK(hamiltonian_value(box_phi, abs_star, {5.0}, {2.0}) == -kInf);
  // phi(x) = +inf with finite psi*(y) gives +inf
  CHECK(hamiltonian_value(box_phi, abs_star, {5.0}, {0.5}) == kInf);
  CHECK(hamiltonian_value(box_phi, quad_star, {5.0}, {2.0}) == kInf);
}

TEST_CASE("dual integrand swaps the two cost slots through conjugation") {
  ConvexFn phi(std::vector<Plq>{Plq::quadratic(0.5)});
  ConvexFn psi(std::vector<Plq>{Plq::quadratic(1.0)});
  DualIntegrandParts d = dual_integrand(phi, psi);
  // phi* acts on the dual slope, psi* on the dual state
  CHECK(d.phi_star({3.0}) == doctest::Approx(4.5));
  CHECK(d.psi_star({2.0}) == doctest::Approx(1.0));  // (u^2)* = y^2/4
}

TEST_CASE("dual endpoint parts") {
  ConvexFn k0(std::vector<Plq>{Plq::point(1.0)});
  ConvexFn kT(std::vector<Plq>{Plq::linear(3.0)});
  DualEndpointParts e = dual_endpoint(k0, kT);
  // k0 a point indicator: head is the linear form a0 . y
  CHECK(e.head({2.0}) == doctest::Approx(2.0));
  CHECK(e.head({-4.0}) == doctest::Approx(-4.0));
  // kT linear with slope 3: kT* is the point indicator at 3, composed with -1
  CHECK(e.tail({-3.0}) == doctest::Approx(0.0));
  CHECK(e.tail({3.0}) == kInf);
}

TEST_CASE("separable convex functions evaluate, conjugate and clamp per coordinate") {
  ConvexFn f(std::vector<Plq>{Plq::quadratic(0.5), Plq::abs_value()});
  CHECK(f({2.0, -3.0}) == doctest::Approx(5.0));
  CHECK(f.dim() == 2);
  ConvexFn g = f.conjugate();
  CHECK(g({2.0, 0.5}) == doctest::Approx(2.0));
  CHECK(g({2.0, 1.5}) == kInf);
  Box dom = g.domain();
  CHECK(dom.coords[0].hi == kInf);
  CHECK(dom.coords[1].lo == doctest::Approx(-1.0));
  CHECK(dom.coords[1].hi == doctest::Approx(1.0));

  auto sub = f.subdifferential({1.0, 0.0});
  REQUIRE(sub.has_value());
  CHECK(sub->coords[0].lo == doctest::Approx(1.0));
  CHECK(sub->coords[1].lo == doctest::Approx(-1.0));
  CHECK(sub->coords[1].hi == doctest::Approx(1.0));
}
