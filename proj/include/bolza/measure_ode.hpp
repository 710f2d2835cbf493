#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include "bolza/measure.hpp"

namespace bolza {

// A sampled field evaluation exceeded the declared growth bound.
struct FieldBoundViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// The Picard iteration failed to settle within its contraction budget,
// indicating that the declared bound c does not actually contract.
struct ContractionFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Field F_t(y) with a declared per-cell Lipschitz/growth bound c:
//   |F_t(y1) - F_t(y2)| <= c_t |y1 - y2|,   |F_t(y)| <= c_t (1 + |y|).
// Affine-per-cell fields (F_t(y) = A_i y + b_i on cell i) derive c exactly;
// callback fields carry a declared c whose growth half is spot-checked on
// every evaluation, aborting with a witness when violated.
struct LipschitzField {
  Grid grid;
  std::vector<std::vector<Vec>> A;  // affine case: per cell, d rows of d entries
  std::vector<Vec> b;               // affine case: per cell, d entries
  Vec c;                            // per cell bound, nonnegative
  std::function<Vec(double, const Vec&)> callback;

  static LipschitzField affine(const Grid& g, std::vector<std::vector<Vec>> A,
                               std::vector<Vec> b);
  static LipschitzField from_callback(const Grid& g, Vec c,
                                      std::function<Vec(double, const Vec&)> f);

  std::size_t d() const { return grid.d; }
  bool is_affine() const { return !A.empty(); }
  // Value at (t, y); the cell of t is the one arriving at it.
  Vec eval(double t, const Vec& y) const;
  void validate() const;
};

// Nonnegative driving measure: a base part plus optional positive atoms
// (unlike the base measure of a Bolza instance, the driver may carry atoms).
struct DriverAtom {
  double t = 0.0;
  double mass = 0.0;
};
struct DriverMeasure {
  BaseMeasure base;
  std::vector<DriverAtom> atoms;  // sorted by t, masses > 0

  double total() const;
  void validate() const;
};

// gamma_T = integral of c over [0, T] against the driver (atoms included),
// rounded up across mismatched grids. Controls both the contraction budget
// and the a-priori bound.
double gamma_total(const LipschitzField& F, const DriverMeasure& driver);

// A-priori bound (|a| + (1 + r) gamma_T) e^{gamma_T} on the sup norm of the
// solution, where r bounds the sup norm of v.
double gronwall_bound(const LipschitzField& F, const DriverMeasure& driver, double r,
                      const Vec& a);

// Fixed point of y_t = a + integral over [0, t] of F_s(y_s + v_s) d(driver),
// by Picard iteration from y = a, stopped when the sup-norm change is <= tol.
// The returned arc lives on the driver grid refined by the atom locations;
// it is left-continuous with explicit jumps y_{tau+} - y_tau =
// mass * F_tau(y_tau + v_tau) after each atom. Within cells the integral is
// the trapezoid of the node samples, so the fixed point solves the implicit
// trapezoid scheme (time-symmetric, second order). The iteration budget is
// derived from the factorial contraction estimate gamma^nu / nu!; exhausting
// it means the declared bound c does not contract and is an error.
// `initial_iterate`, when given, replaces the constant starting arc y = a
// (the fixed point is the same; the option exists for uniqueness probes).
BVArc picard_solve(const LipschitzField& F, const DriverMeasure& driver,
                   const ContinuousArc& v, const Vec& a, double tol,
                   const Vec* initial_iterate = nullptr);

// One application of the Picard map to an arc living on the refined grid of
// the driver; picard_solve's result changes by at most about its tol under
// one more application.
BVArc picard_apply(const LipschitzField& F, const DriverMeasure& driver,
                   const ContinuousArc& v, const Vec& a, const BVArc& y);

// Sup distance over [0, T] (including right limits and T+) of two arcs on a
// shared grid, Euclidean in space.
double bv_sup_dist(const BVArc& x1, const BVArc& x2);
// Sup distance of two continuous piecewise-linear arcs, any grids on [0, T].
double arc_sup_dist(const ContinuousArc& p, const ContinuousArc& q);

// Rows (|v_n - v|_sup, |y^{v_n} - y^v|_sup) for a sequence of perturbed
// inputs; the second column inherits continuity of v -> y^v.
struct ContinuityRow {
  double v_dist = 0.0;
  double y_dist = 0.0;
};
std::vector<ContinuityRow> continuity_probe(const LipschitzField& F,
                                            const DriverMeasure& driver, const Vec& a,
                                            const ContinuousArc& v,
                                            const std::vector<ContinuousArc>& v_sequence,
                                            double tol);

// Terminal-value problems are solved by time reversal: s -> T - s flips the
// field sign and reverses the driver and the input arc.
LipschitzField reverse_field(const LipschitzField& F);
DriverMeasure reverse_driver(const DriverMeasure& m);
ContinuousArc reverse_arc(const ContinuousArc& v);

}  // namespace bolza
