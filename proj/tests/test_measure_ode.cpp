#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "bolza/measure_ode.hpp"

using namespace bolza;

namespace {

// constant-in-time affine field y' = a y + b in one dimension
LipschitzField affine1(const Grid& g, double a, double b) {
  std::vector<std::vector<Vec>> A(g.cells(), {{a}});
  std::vector<Vec> B(g.cells(), Vec{b});
  return LipschitzField::affine(g, A, B);
}

DriverMeasure lebesgue_driver(const Grid& g) {
  DriverMeasure m;
  m.base = BaseMeasure::lebesgue(g);
  return m;
}

ContinuousArc zero_arc(const Grid& g, std::size_t d) {
  return ContinuousArc::constant(Grid{g.nodes, d}, Vec(d, 0.0));
}

double bv_sup_norm(const BVArc& y) {
  double s = 0.0;
  auto see = [&](const Vec& v) {
    double n = 0.0;
    for (double w : v) n += w * w;
    s = std::max(s, std::sqrt(n));
  };
  for (double t : y.diff.base.grid.nodes) {
    see(y.eval(t));
    see(y.eval_right(t));
  }
  see(y.eval_T_plus());
  return s;
}

}  // namespace

TEST_CASE("a zero field keeps the solution constant through atoms") {
  Grid g = Grid::uniform(1.0, 4);
  DriverMeasure m = lebesgue_driver(g);
  m.atoms = {{0.3, 2.0}, {0.7, 1.0}};
  BVArc y = picard_solve(affine1(g, 0.0, 0.0), m, zero_arc(g, 1), {1.5}, 1e-12);
  CHECK(y.eval(0.55)[0] == 1.5);
  CHECK(y.eval_T_plus()[0] == 1.5);
  CHECK(total_variation(y.diff) == 0.0);
}

TEST_CASE("y' = y reproduces the exponential") {
  Grid g = Grid::uniform(1.0, 1000);
  BVArc y = picard_solve(affine1(g, 1.0, 0.0), lebesgue_driver(g), zero_arc(g, 1),
                         {1.0}, 1e-10);
  CHECK(std::abs(y.eval_T_plus()[0] - std::exp(1.0)) <= 1e-6);
  CHECK(std::abs(y.eval(0.5)[0] - std::exp(0.5)) <= 1e-6);
}

TEST_CASE("atoms of the driver produce exact explicit jumps") {
  Grid g = Grid::uniform(1.0, 2);
  DriverMeasure m = lebesgue_driver(g);
  m.atoms = {{0.25, 3.0}};

  // state-independent field: the solution is an explicit running integral
  BVArc y = picard_solve(affine1(g, 0.0, 2.0), m, zero_arc(g, 1), {0.5}, 1e-12);
  CHECK(y.eval(0.25)[0] == doctest::Approx(0.5 + 2.0 * 0.25).epsilon(1e-14));
  CHECK(y.eval_right(0.25)[0] == doctest::Approx(1.0 + 2.0 * 3.0).epsilon(1e-14));
  CHECK(y.eval_T_plus()[0] == doctest::Approx(0.5 + 2.0 * (1.0 + 3.0)).epsilon(1e-14));

  // state-dependent field: the jump is mass * F(tau, y(tau)) exactly
  BVArc z = picard_solve(affine1(g, 1.0, 0.0), m, zero_arc(g, 1), {1.0}, 1e-11);
  double left = z.eval(0.25)[0], right = z.eval_right(0.25)[0];
  CHECK(right - left == doctest::Approx(3.0 * left).epsilon(1e-9));
}

TEST_CASE("solutions respect the a-priori growth bound") {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t d = 1 + trial % 3;
    double T = 0.5 + 0.5 * std::abs(unif(rng));
    Grid fg = Grid::uniform(T, 2 + trial % 3, d);
    Grid dg = Grid::uniform(T, 2 + (trial + 1) % 4, d);

    std::vector<std::vector<Vec>> A(fg.cells());
    std::vector<Vec> B(fg.cells());
    for (std::size_t i = 0; i < fg.cells(); ++i) {
      A[i].assign(d, Vec(d));
      for (auto& row : A[i])
        for (auto& v : row) v = 0.7 * unif(rng);
      B[i] = Vec(d);
      for (auto& v : B[i]) v = unif(rng);
    }
    LipschitzField F = LipschitzField::affine(fg, std::move(A), std::move(B));

    DriverMeasure m;
    m.base = BaseMeasure::lebesgue(dg);
    for (auto& mass : m.base.cell_mass) mass *= 0.3 + std::abs(unif(rng));
    if (trial % 2 == 0) m.atoms.push_back({T * (0.2 + 0.3 * std::abs(unif(rng))), 0.4});
    m.validate();

    Vec vconst(d), a(d);
    for (auto& v : vconst) v = 0.5 * unif(rng);
    for (auto& v : a) v = unif(rng);
    double r = 0.0;
    for (double v : vconst) r += v * v;
    r = std::sqrt(r);
    ContinuousArc v = ContinuousArc::constant(Grid{dg.nodes, d}, vconst);

    BVArc y = picard_solve(F, m, v, a, 1e-9);
    CAPTURE(trial);
    CHECK(bv_sup_norm(y) <= gronwall_bound(F, m, r, a) + 1e-9);
  }
}

TEST_CASE("the fixed point does not depend on the starting iterate") {
  Grid g = Grid::uniform(1.0, 50);
  DriverMeasure m = lebesgue_driver(g);
  m.atoms = {{0.5, 0.5}};
  LipschitzField F = affine1(g, 0.9, -0.2);
  ContinuousArc v = zero_arc(g, 1);
  double tol = 1e-10;
  BVArc y1 = picard_solve(F, m, v, {0.4}, tol);
  Vec other = {1.4};
  BVArc y2 = picard_solve(F, m, v, {0.4}, tol, &other);
  CHECK(bv_sup_dist(y1, y2) <= 2 * tol);
}

TEST_CASE("the returned arc is a fixed point up to the tolerance") {
  Grid g = Grid::uniform(1.0, 40);
  DriverMeasure m = lebesgue_driver(g);
  m.atoms = {{0.3, 1.0}};
  LipschitzField F = affine1(g, -0.8, 0.5);
  ContinuousArc v = ContinuousArc::constant(g, {0.2});
  double tol = 1e-10;
  BVArc y = picard_solve(F, m, v, {1.0}, tol);
  BVArc z = picard_apply(F, m, v, {1.0}, y);
  CHECK(bv_sup_dist(y, z) <= 2 * tol);
}

TEST_CASE("time reversal is an involution and solves terminal problems") {
  Grid g = Grid::uniform(1.0, 200);
  LipschitzField F = affine1(g, 0.8, 0.3);
  DriverMeasure m = lebesgue_driver(g);
  for (std::size_t i = 0; i < m.base.cell_mass.size(); ++i)
    m.base.cell_mass[i] *= (i % 2 == 0) ? 1.25 : 0.75;

  LipschitzField FF = reverse_field(reverse_field(F));
  for (double t : {0.1, 0.45, 0.9})
    for (double w : {-1.0, 0.3, 2.0})
      CHECK(FF.eval(t, {w})[0] == doctest::Approx(F.eval(t, {w})[0]).epsilon(1e-14));
  DriverMeasure mm = reverse_driver(reverse_driver(m));
  CHECK(mm.base.cell_mass == m.base.cell_mass);
  REQUIRE(mm.base.grid.nodes.size() == m.base.grid.nodes.size());
  // T - (T - x) can land an ulp away from x
  for (std::size_t i = 0; i < m.base.grid.nodes.size(); ++i)
    CHECK(std::abs(mm.base.grid.nodes[i] - m.base.grid.nodes[i]) <=
          1e-15 * (1.0 + m.base.grid.T()));

  ContinuousArc v;
  v.grid = g;
  for (double t : g.nodes) v.nodes.push_back({0.1 * t});
  ContinuousArc vv = reverse_arc(reverse_arc(v));
  for (std::size_t i = 0; i < v.nodes.size(); ++i)
    CHECK(vv.nodes[i][0] == doctest::Approx(v.nodes[i][0]).epsilon(1e-14));

  // integrate forward, then back from the terminal value: recovers the start
  double tol = 1e-11;
  Vec a = {0.7};
  BVArc fwd = picard_solve(F, m, zero_arc(g, 1), a, tol);
  Vec terminal = fwd.eval_T_plus();
  BVArc back = picard_solve(reverse_field(F), reverse_driver(m), zero_arc(g, 1),
                            terminal, tol);
  CHECK(std::abs(back.eval_T_plus()[0] - a[0]) <= 1e-9);
  // and the whole path matches under reflection
  CHECK(std::abs(back.eval(0.3)[0] - fwd.eval(0.7)[0]) <= 1e-8);
}

TEST_CASE("the solution depends continuously on the input arc") {
  Grid g = Grid::uniform(1.0, 100);
  LipschitzField F = affine1(g, 1.0, 0.0);
  DriverMeasure m = lebesgue_driver(g);
  ContinuousArc v = ContinuousArc::constant(g, {0.5});
  std::vector<ContinuousArc> seq;
  for (int n = 0; n < 5; ++n)
    seq.push_back(ContinuousArc::constant(g, {0.5 + 0.5 / double(1 << n)}));
  double tol = 1e-10;
  std::vector<ContinuityRow> rows = continuity_probe(F, m, {1.0}, v, seq, tol);
  REQUIRE(rows.size() == 5);
  double gamma = gamma_total(F, m);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].v_dist == doctest::Approx(0.5 / double(1 << i)).epsilon(1e-12));
    // linear field: the output gap is at most e^gamma * gamma * input gap
    CHECK(rows[i].y_dist <= std::exp(gamma) * gamma * rows[i].v_dist + 10 * tol);
    if (i > 0) CHECK(rows[i].y_dist < rows[i - 1].y_dist);
  }
}

TEST_CASE("a field that violates its declared growth bound is rejected") {
  Grid g = Grid::uniform(1.0, 4);
  LipschitzField F = LipschitzField::from_callback(
      g, Vec(g.cells(), 1.0), [](double, const Vec& y) { return Vec{2.0 * y[0]}; });
  CHECK_THROWS_AS(picard_solve(F, lebesgue_driver(g), zero_arc(g, 1), {2.0}, 1e-9),
                  FieldBoundViolation);
}

TEST_CASE("an understated Lipschitz bound exhausts the contraction budget") {
  Grid g = Grid::uniform(1.0, 50);
  // growth is honest (|3 cos| <= 3) but the true Lipschitz constant is 120
  LipschitzField F = LipschitzField::from_callback(
      g, Vec(g.cells(), 3.0),
      [](double, const Vec& y) { return Vec{3.0 * std::cos(40.0 * y[0])}; });
  CHECK_THROWS_AS(picard_solve(F, lebesgue_driver(g), zero_arc(g, 1), {0.0}, 1e-10),
                  ContractionFailure);
}

TEST_CASE("the field-times-driver budget rounds up across grids") {
  Grid fg{{0.0, 0.5, 1.0}, 1};
  LipschitzField F = LipschitzField::from_callback(
      fg, {2.0, 4.0}, [](double, const Vec&) { return Vec{0.0}; });

  DriverMeasure match;
  match.base = BaseMeasure{fg, {0.5, 0.5}};
  match.atoms = {{0.25, 3.0}};
  CHECK(gamma_total(F, match) == doctest::Approx(9.0).epsilon(1e-14));

  DriverMeasure coarse;
  coarse.base = BaseMeasure{Grid{{0.0, 1.0}, 1}, {1.0}};
  coarse.atoms = {{0.25, 3.0}};
  CHECK(gamma_total(F, coarse) == doctest::Approx(10.0).epsilon(1e-14));
}
