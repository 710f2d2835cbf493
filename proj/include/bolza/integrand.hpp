#pragma once

#include <utility>
#include <vector>

#include "bolza/convex_fn.hpp"
#include "bolza/measure.hpp"

namespace bolza {

// One cell of the running cost K_t(x, u) = phi(x) + psi(u), with the derived
// objects the library needs everywhere cached at construction: conjugates
// (dual integrand and Hamiltonian), horizon functions (singular costs), and
// the two domain boxes.
struct IntegrandCell {
  ConvexFn phi, psi;
  ConvexFn phi_star, psi_star;  // conjugates
  ConvexFn phi_rec, psi_rec;    // horizon functions
  Box dom1, dom2;               // dom phi and dom psi* = the Hamiltonian domains

  static IntegrandCell make(ConvexFn phi, ConvexFn psi);
};

// Piecewise-constant-in-time running cost on a grid. Point lookups at grid
// nodes resolve to the cell arriving from the left (cells read as
// (t_i, t_{i+1}]), matching left-continuous trajectories; t = 0 resolves to
// the first cell.
struct TimeIntegrand {
  Grid grid;
  std::vector<IntegrandCell> cells;

  static TimeIntegrand from_parts(const Grid& g,
                                  std::vector<std::pair<ConvexFn, ConvexFn>> parts);

  const IntegrandCell& cell(std::size_t i) const { return cells[i]; }
  const IntegrandCell& at_time(double t) const { return cells[grid.cell_left_open(t)]; }
  void validate() const;
};

// Endpoint cost k(a, b) = k0(a) + kT(b), or the indicator of a fixed pair
// (a0, b0) (stored as point indicators so that every code path below applies;
// the flag is kept for serialization and for the subdifferential convention
// of the transversality check).
struct EndpointFn {
  ConvexFn k0, kT;
  bool fixed_pair = false;
  Vec a0, b0;
  ConvexFn dual_head, dual_tail;  // k0*, kT*(-.)
  ConvexFn k0_rec, kT_rec;

  static EndpointFn separable(ConvexFn k0, ConvexFn kT);
  static EndpointFn fixed(const Vec& a0, const Vec& b0);

  std::size_t dim() const { return k0.dim(); }
  double eval(const Vec& a, const Vec& b) const { return [&] { ExtSum s; s.add(k0(a)); s.add(kT(b)); return s.value(); }(); }
  double eval_dual(const Vec& at, const Vec& bt) const { ExtSum s; s.add(dual_head(at)); s.add(dual_tail(bt)); return s.value(); }
  double eval_recession(const Vec& a, const Vec& b) const { ExtSum s; s.add(k0_rec(a)); s.add(kT_rec(b)); return s.value(); }
};

// A full problem instance: base measure, running cost and endpoint cost on a
// shared grid.
struct BolzaProblem {
  BaseMeasure mu;
  TimeIntegrand K;
  EndpointFn k;

  std::size_t d() const { return mu.grid.d; }
  const Grid& grid() const { return mu.grid; }
  void validate() const;
};

// Running cost of the pair (x, theta):
//   sum over cells of  mu_i * [ phi_i(x(mid_i)) + psi_i(density_i) ]
//   plus, for every atom (tau, s) of theta, the horizon cost psi^inf_tau(s)
// (one-homogeneous, so this equals |s| * K^inf_tau(0, s/|s|)). +inf as soon
// as any term is +inf.
double eval_JK(const BolzaProblem& P, const BVArc& x, const DiscreteRadonMeasure& theta);

// Integral of the Hamiltonian along the pair of trajectories: +inf when any
// cell evaluates to +inf, otherwise -inf when any cell evaluates to -inf.
double eval_IH(const BolzaProblem& P, const BVArc& x, const ContinuousArc& y);

// The two Hamiltonian domain maps as per-cell boxes: dom1 = dom phi (where
// H < +inf in x), dom2 = dom psi* (where H > -inf in y).
struct DomainMaps {
  std::vector<Box> dom1, dom2;
};
DomainMaps domain_maps(const TimeIntegrand& K);

// Box-valued map, constant on cells, with explicit values at the nodes.
struct PiecewiseBoxMap {
  Grid grid;
  std::vector<Box> cell_values;  // one per cell
  std::vector<Box> node_values;  // one per node

  enum class NodeRule { left, right, intersection };
  static PiecewiseBoxMap from_cells(const Grid& g, std::vector<Box> cells, NodeRule rule);
  void validate() const;
};

enum class RegularitySide { two_sided, left };

// Report for one interior breakpoint of a piecewise-constant box map.
struct RegularityNode {
  std::size_t node = 0;
  double t = 0.0;
  bool outer_regular = true;
  int outer_witness_coord = -1;
  double outer_witness_point = 0.0;
  bool inner_semicontinuous = true;
  int isc_witness_coord = -1;
  double isc_witness_point = 0.0;
};

// Exact regularity checks at each interior node. With B-, B+ the neighbouring
// cell values and B the node value:
//   two_sided: outer-regular iff cl B- intersect cl B+ is a subset of cl B,
//              inner-semicontinuous iff B is a subset of cl B- intersect cl B+;
//   left:      outer-regular iff cl B- is a subset of cl B,
//              inner-semicontinuous iff B is a subset of cl B-.
// Failures carry the witnessing coordinate and a point witnessing it.
std::vector<RegularityNode> check_regularity(const PiecewiseBoxMap& S, RegularitySide side);

// Running cost of the horizon problem: cell (phi, psi) becomes
// (phi^inf, psi^inf). Applying it twice is idempotent.
TimeIntegrand recession_integrand(const TimeIntegrand& K);

}  // namespace bolza
