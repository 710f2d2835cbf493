#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "bolza/integrand.hpp"
#include "bolza/measure.hpp"

namespace bolza {

struct SolveConfig {
  std::size_t max_iters = 30000;
  std::size_t check_every = 200;
  double tol = 1e-9;
  unsigned seed = 0;  // recorded for reproducibility; the method itself is deterministic
};

// Where an infeasibility was detected: which constraint family, at which cell
// or node, which coordinate, and the offending value against its box.
struct InfeasibilityCertificate {
  std::string what;
  std::size_t index = 0;
  int coord = -1;
  Interval box;
  double point = 0.0;
};

struct SolveResult {
  double value = kInf;  // exact objective of the returned decision
  BVArc x;              // primal decision (solve_primal)
  ContinuousArc y;      // dual decision (solve_dual)
  std::size_t iterations = 0;
  bool converged = false;
  bool infeasible = false;
  std::optional<InfeasibilityCertificate> violation;
};

// Exact objectives of candidate decisions. The primal is
// J_K(x, Dx + u) + k(x0, x_{T+}); the dual is
// <u, y> - integral of K~(y, dy/dmu) - k~(y0, yT) with the state cost
// integrated by the trapezoid rule, so that every grid node of a feasible y
// is constrained to dom psi* exactly as a continuous arc would be.
double primal_objective(const BolzaProblem& P, const DiscreteRadonMeasure& u, const BVArc& x);
double dual_objective(const BolzaProblem& P, const DiscreteRadonMeasure& u,
                      const ContinuousArc& y);

// Problem with the roles of the two cost slots swapped: state cost psi*,
// velocity cost phi*, endpoint k~. Used for certification and for evaluating
// the dual functional through eval_JK.
BolzaProblem dual_problem(const BolzaProblem& P);

SolveResult solve_primal(const BolzaProblem& P, const DiscreteRadonMeasure& u,
                         const SolveConfig& cfg, const BVArc* warm_start = nullptr);
SolveResult solve_dual(const BolzaProblem& P, const DiscreteRadonMeasure& u,
                       const SolveConfig& cfg, const ContinuousArc* warm_start = nullptr);

struct GapResult {
  SolveResult primal;
  SolveResult dual;
  double gap = 0.0;  // primal value minus dual value
};
GapResult duality_gap(const BolzaProblem& P, const DiscreteRadonMeasure& u,
                      const SolveConfig& cfg);

struct SweepPoint {
  double eps = 0.0;
  double value = kInf;       // primal value at u = eps * u1
  double dual_value = -kInf;
  ContinuousArc y;           // dual optimizer
  bool converged = false;
};
struct SweepResult {
  std::vector<SweepPoint> points;
  // max over interior points of value(mid) - chord through the neighbours
  double convexity_violation = 0.0;
  // max over ordered pairs of value(e) + (e'-e)*<u1,y_e> - value(e')
  double subgradient_violation = 0.0;
};
SweepResult value_sweep(const BolzaProblem& P, const DiscreteRadonMeasure& u1,
                        const Vec& eps_list, const SolveConfig& cfg);

struct LinealityCheck {
  double value = kInf;      // horizon cost of the direction
  double value_neg = kInf;  // horizon cost of its negation
  bool in_cone = false;
  bool neg_in_cone = false;
  bool ok = true;  // not in cone, or negation also in cone
};
struct LinealityResult {
  std::vector<LinealityCheck> checks;
  bool verdict = true;
};
LinealityResult check_lineality(const BolzaProblem& P, const std::vector<BVArc>& directions);

}  // namespace bolza
