#include "bolza/optimality.hpp"

#include <stdexcept>

namespace bolza {

namespace {

void check_pair(const Grid& g, const BVArc& x, const ContinuousArc& y, const char* where) {
  if (!x.diff.base.grid.matches(g) || !y.grid.matches(g))
    throw std::invalid_argument(std::string(where) + ": grid mismatch");
}

}  // namespace

double residual_hamiltonian_ac(const BolzaProblem& P, const BVArc& x, const ContinuousArc& y,
                               double snap) {
  const Grid& g = P.grid();
  check_pair(g, x, y, "residual_hamiltonian_ac");
  double total = 0.0;
  for (std::size_t i = 0; i < g.cells(); ++i) {
    const IntegrandCell& c = P.K.cell(i);
    Vec xi = x.eval(g.midpoint(i));
    Vec yi = y.midpoint_value(i);
    auto dphi = c.phi.subdifferential(xi, snap);
    auto dpsi_star = c.psi_star.subdifferential(yi, snap);
    if (!dphi || !dpsi_star) return kInf;
    total += P.mu.cell_mass[i] *
             (dphi->dist(y.mu_slope(i, P.mu)) + dpsi_star->dist(x.diff.density[i]));
  }
  return total;
}

double residual_singular(const TimeIntegrand& K, const BVArc& x, const ContinuousArc& y,
                         double snap) {
  check_pair(K.grid, x, y, "residual_singular");
  double total = 0.0;
  for (const Atom& a : x.diff.atoms) {
    const IntegrandCell& c = K.cell(K.grid.cell_left_open(a.t));
    try {
      total += normal_cone_box(c.dom2, y.eval(a.t), snap).dist(a.mass);
    } catch (const std::domain_error&) {
      return kInf;  // y(tau) outside cl dom(psi*)
    }
  }
  return total;
}

double residual_transversality(const EndpointFn& k, const BVArc& x, const ContinuousArc& y,
                               double snap) {
  auto d0 = k.k0.subdifferential(x.x0, snap);
  auto dT = k.kT.subdifferential(x.eval_T_plus(), snap);
  if (!d0 || !dT) return kInf;
  Vec neg_yT = y.nodes.back();
  for (double& v : neg_yT) v = -v;
  return d0->dist(y.nodes.front()) + dT->dist(neg_yT);
}

CertificateReport certify(const BolzaProblem& P, const BVArc& x, const ContinuousArc& y,
                          double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("certify: tol must be positive");
  check_pair(P.grid(), x, y, "certify");
  CertificateReport r;
  r.tol = tol;
  r.hamiltonian_residual_L1 = residual_hamiltonian_ac(P, x, y, tol);
  r.singular_residual = residual_singular(P.K, x, y, tol);
  r.transversality_residual = residual_transversality(P.k, x, y, tol);

  BolzaProblem D = dual_problem(P);
  BVArc yb = to_bv_arc(y, P.mu);
  ExtSum gap;
  gap.add(eval_JK(P, x, x.diff));
  gap.add(P.k.eval(x.x0, x.eval_T_plus()));
  gap.add(eval_JK(D, yb, yb.diff));
  gap.add(P.k.eval_dual(y.nodes.front(), y.nodes.back()));
  r.fenchel_gap = gap.value();

  r.verdict = r.hamiltonian_residual_L1 <= tol && r.singular_residual <= tol &&
              r.transversality_residual <= tol && r.fenchel_gap <= tol;

  DomainMaps dm = domain_maps(P.K);
  auto outer_ok = [&](const std::vector<Box>& cells, RegularitySide side) {
    PiecewiseBoxMap S = PiecewiseBoxMap::from_cells(P.grid(), cells,
                                                    PiecewiseBoxMap::NodeRule::left);
    for (const RegularityNode& n : check_regularity(S, side))
      if (!n.outer_regular) return false;
    return true;
  };
  r.hypotheses_verified = outer_ok(dm.dom1, RegularitySide::left) &&
                          outer_ok(dm.dom2, RegularitySide::two_sided);
  return r;
}

}  // namespace bolza
