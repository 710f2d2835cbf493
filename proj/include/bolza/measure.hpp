#pragma once

#include <cstdint>
#include <vector>

#include "bolza/extended.hpp"

namespace bolza {

// Partition of [0, T] into cells [t_i, t_{i+1}), i = 0..N-1, shared by every
// object of a problem instance. `d` is the state dimension of the data that
// lives on the grid.
struct Grid {
  Vec nodes;       // t_0 = 0 < t_1 < ... < t_N = T
  std::size_t d = 1;

  static Grid uniform(double T, std::size_t cells, std::size_t d = 1);

  std::size_t cells() const { return nodes.size() - 1; }
  double T() const { return nodes.back(); }
  double cell_length(std::size_t i) const { return nodes[i + 1] - nodes[i]; }
  double midpoint(std::size_t i) const { return 0.5 * (nodes[i] + nodes[i + 1]); }

  // Cell of t under the right-open convention [t_i, t_{i+1}); t = T maps to
  // the last cell.
  std::size_t cell_right_open(double t) const;
  // Cell of t under the left-open convention (t_i, t_{i+1}]; t = 0 maps to
  // cell 0. Point lookups of piecewise-constant-in-time data (integrands,
  // domain maps) use this convention so that the value at a node is the value
  // of the cell arriving at it, matching left-continuous trajectories.
  std::size_t cell_left_open(double t) const;

  void validate() const;
  bool matches(const Grid& other, double tol = 1e-12) const;
};

// Atomless positive measure on [0, T]: one positive mass per grid cell,
// spread uniformly (in Lebesgue time) inside the cell.
struct BaseMeasure {
  Grid grid;
  Vec cell_mass;  // strictly positive, one entry per cell

  static BaseMeasure lebesgue(const Grid& g);

  double total() const;
  // Mass of [0, t).
  double mass_before(double t) const;
  void validate() const;
};

struct Atom {
  double t = 0.0;
  Vec mass;  // in R^d, nonzero after canonicalization
};

// R^d-valued measure on [0, T]: an absolutely continuous part given by a
// per-cell density with respect to the base measure, plus finitely many
// atoms. This class is the singular-measure representation used everywhere;
// the base measure itself never carries atoms.
struct DiscreteRadonMeasure {
  BaseMeasure base;
  std::vector<Vec> density;  // cells() rows of d entries
  std::vector<Atom> atoms;   // sorted by t after canonicalization

  static DiscreteRadonMeasure zeros(const BaseMeasure& mu);

  std::size_t d() const { return base.grid.d; }
  // Sorts atoms, merges duplicates at equal locations, drops zero masses.
  void canonicalize(double drop_tol = 0.0);
  // Measure of [0, t); atoms at positions < t included.
  Vec value_before(double t) const;
  Vec total() const;  // measure of [0, T]
  void validate() const;
};

// Lebesgue decomposition report of a DiscreteRadonMeasure with respect to its
// base: the density, the canonical atom list, unit directions of the atoms
// and the total variation of the singular part.
struct Decomposition {
  std::vector<Vec> density;
  std::vector<Atom> atoms;
  std::vector<Vec> directions;   // atoms[i].mass / |atoms[i].mass|
  double singular_variation = 0.0;  // sum of euclidean atom masses
};
Decomposition lebesgue_decompose(const DiscreteRadonMeasure& theta);

// Total variation: sum over cells of |density| times cell mass plus the
// euclidean masses of the atoms.
double total_variation(const DiscreteRadonMeasure& theta);

// Left-continuous trajectory of bounded variation: x_t = x0 + Dx([0, t)).
// The value "just past the horizon", x_{T+} = x0 + Dx([0, T]), is exposed
// separately; both x_T and x_{T+} are legitimate queries and differ exactly
// by the atom sitting at T.
struct BVArc {
  Vec x0;
  DiscreteRadonMeasure diff;

  std::size_t d() const { return diff.d(); }
  Vec eval(double t) const;        // t in [0, T]
  Vec eval_right(double t) const;  // x_{t+}: atoms at positions <= t included
  Vec eval_T_plus() const { return eval_right(diff.base.grid.T()); }
  // Integral of the trajectory in Lebesgue time over [a, b] within one cell;
  // exact for the piecewise-linear-plus-jumps shape of the arc.
  Vec integrate_time(double a, double b) const;
  void validate() const;
};

// Continuous piecewise-linear trajectory given by its node values.
struct ContinuousArc {
  Grid grid;
  std::vector<Vec> nodes;  // grid.nodes.size() rows of d entries

  static ContinuousArc constant(const Grid& g, const Vec& value);

  std::size_t d() const { return grid.d; }
  Vec eval(double t) const;
  Vec midpoint_value(std::size_t cell) const;
  // Slope over a cell as a density with respect to `mu` (whose grid this arc
  // shares): (node[i+1] - node[i]) / mu_i.
  Vec mu_slope(std::size_t cell, const BaseMeasure& mu) const;
  double sup_norm() const;
  void validate() const;
};

// Integral of y against the measure theta: sum over cells of the exact
// trapezoid of the linear y times the uniform cell density, plus y(tau).s for
// every atom. Exact for piecewise-linear y. Grids must match.
double pair_measure_continuous(const DiscreteRadonMeasure& theta, const ContinuousArc& y);

// Pairing of an arc with (v_minus, v): x0.v_minus + integral of v against Dx.
double pair_arc_v(const BVArc& x, const Vec& v_minus, const ContinuousArc& v);

// | integral of v dDx  -  ( x_{T+}.v_T - x_0.v_0 - integral of x dDv ) |,
// the two sides evaluated by independent exact rules. Stays below 1e-12 for
// data of moderate size.
double integration_by_parts_residual(const BVArc& x, const ContinuousArc& v);

// Measure arithmetic over a shared base; atoms at equal locations merge.
DiscreteRadonMeasure operator+(const DiscreteRadonMeasure& a, const DiscreteRadonMeasure& b);
// The same measure expressed against another base on a matching grid.
DiscreteRadonMeasure rebase_measure(const DiscreteRadonMeasure& theta, const BaseMeasure& mu);
DiscreteRadonMeasure scale_measure(const DiscreteRadonMeasure& theta, double c);
BVArc negate_arc(const BVArc& x);

// A continuous piecewise-linear arc as a BV arc: same initial value, density
// equal to the mu-slope on each cell, no atoms.
BVArc to_bv_arc(const ContinuousArc& y, const BaseMeasure& mu);

}  // namespace bolza
