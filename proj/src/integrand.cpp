#include "bolza/integrand.hpp"

#include <stdexcept>
#include <utility>

namespace bolza {

IntegrandCell IntegrandCell::make(ConvexFn phi, ConvexFn psi) {
  if (phi.dim() != psi.dim())
    throw std::invalid_argument("IntegrandCell: phi and psi dimensions differ");
  IntegrandCell c;
  c.phi = std::move(phi);
  c.psi = std::move(psi);
  c.phi_star = c.phi.conjugate();
  c.psi_star = c.psi.conjugate();
  c.phi_rec = c.phi.recession();
  c.psi_rec = c.psi.recession();
  c.dom1 = c.phi.domain();
  c.dom2 = c.psi_star.domain();
  return c;
}

TimeIntegrand TimeIntegrand::from_parts(const Grid& g,
                                        std::vector<std::pair<ConvexFn, ConvexFn>> parts) {
  g.validate();
  if (parts.size() == 1 && g.cells() > 1) {
    // A single pair applies to every cell.
    parts.reserve(g.cells());
    for (std::size_t i = 1; i < g.cells(); ++i) parts.push_back(parts.front());
  }
  if (parts.size() != g.cells())
    throw std::invalid_argument("TimeIntegrand: need one (phi, psi) pair per cell");
  TimeIntegrand K;
  K.grid = g;
  K.cells.reserve(parts.size());
  for (auto& [phi, psi] : parts) {
    if (phi.dim() != g.d)
      throw std::invalid_argument("TimeIntegrand: cell dimension mismatch");
    K.cells.push_back(IntegrandCell::make(std::move(phi), std::move(psi)));
  }
  return K;
}

void TimeIntegrand::validate() const {
  grid.validate();
  if (cells.size() != grid.cells())
    throw std::invalid_argument("TimeIntegrand: cell count mismatch");
  for (const auto& c : cells)
    if (c.phi.dim() != grid.d || c.psi.dim() != grid.d)
      throw std::invalid_argument("TimeIntegrand: cell dimension mismatch");
}

EndpointFn EndpointFn::separable(ConvexFn k0, ConvexFn kT) {
  if (k0.dim() != kT.dim())
    throw std::invalid_argument("EndpointFn: k0 and kT dimensions differ");
  EndpointFn k;
  k.k0 = std::move(k0);
  k.kT = std::move(kT);
  auto dual = dual_endpoint(k.k0, k.kT);
  k.dual_head = std::move(dual.head);
  k.dual_tail = std::move(dual.tail);
  k.k0_rec = k.k0.recession();
  k.kT_rec = k.kT.recession();
  return k;
}

EndpointFn EndpointFn::fixed(const Vec& a0, const Vec& b0) {
  if (a0.size() != b0.size())
    throw std::invalid_argument("EndpointFn: endpoint dimensions differ");
  std::vector<Plq> h, t;
  h.reserve(a0.size());
  t.reserve(b0.size());
  for (double v : a0) h.push_back(Plq::point(v, 0.0));
  for (double v : b0) t.push_back(Plq::point(v, 0.0));
  EndpointFn k = separable(ConvexFn(std::move(h)), ConvexFn(std::move(t)));
  k.fixed_pair = true;
  k.a0 = a0;
  k.b0 = b0;
  return k;
}

void BolzaProblem::validate() const {
  mu.validate();
  K.validate();
  if (!K.grid.matches(mu.grid)) throw std::invalid_argument("BolzaProblem: grid mismatch");
  if (k.dim() != mu.grid.d) throw std::invalid_argument("BolzaProblem: endpoint dimension mismatch");
}

double eval_JK(const BolzaProblem& P, const BVArc& x, const DiscreteRadonMeasure& theta) {
  const Grid& g = P.grid();
  if (!theta.base.grid.matches(g) || !x.diff.base.grid.matches(g))
    throw std::invalid_argument("eval_JK: grid mismatch");
  for (std::size_t i = 0; i < g.cells(); ++i)
    if (std::abs(theta.base.cell_mass[i] - P.mu.cell_mass[i]) >
        1e-12 * (1.0 + std::abs(P.mu.cell_mass[i])))
      throw std::invalid_argument("eval_JK: theta base differs from problem measure");

  ExtSum s;
  for (std::size_t i = 0; i < g.cells(); ++i) {
    double m = P.mu.cell_mass[i];
    if (m == 0.0) continue;
    const IntegrandCell& c = P.K.cell(i);
    Vec xi = x.eval(g.midpoint(i));
    ExtSum cell;
    cell.add(c.phi(xi));
    cell.add(c.psi(theta.density[i]));
    double v = cell.value();
    s.add(std::isinf(v) ? v : m * v);
  }
  for (const Atom& a : theta.atoms) {
    const IntegrandCell& c = P.K.at_time(a.t);
    s.add(c.psi_rec(a.mass));
  }
  return s.value();
}

double eval_IH(const BolzaProblem& P, const BVArc& x, const ContinuousArc& y) {
  const Grid& g = P.grid();
  if (!y.grid.matches(g) || !x.diff.base.grid.matches(g))
    throw std::invalid_argument("eval_IH: grid mismatch");
  ExtSum s;
  for (std::size_t i = 0; i < g.cells(); ++i) {
    double m = P.mu.cell_mass[i];
    if (m == 0.0) continue;
    const IntegrandCell& c = P.K.cell(i);
    double h = hamiltonian_value(c.phi, c.psi_star, x.eval(g.midpoint(i)), y.midpoint_value(i));
    s.add(std::isinf(h) ? h : m * h);
  }
  return s.value();
}

DomainMaps domain_maps(const TimeIntegrand& K) {
  DomainMaps maps;
  maps.dom1.reserve(K.cells.size());
  maps.dom2.reserve(K.cells.size());
  for (const auto& c : K.cells) {
    maps.dom1.push_back(c.dom1);
    maps.dom2.push_back(c.dom2);
  }
  return maps;
}

PiecewiseBoxMap PiecewiseBoxMap::from_cells(const Grid& g, std::vector<Box> cells,
                                            NodeRule rule) {
  g.validate();
  if (cells.size() != g.cells())
    throw std::invalid_argument("PiecewiseBoxMap: need one box per cell");
  PiecewiseBoxMap m;
  m.grid = g;
  m.cell_values = std::move(cells);
  std::size_t n = g.cells();
  m.node_values.resize(n + 1);
  for (std::size_t j = 0; j <= n; ++j) {
    const Box& left = m.cell_values[j == 0 ? 0 : j - 1];
    const Box& right = m.cell_values[j == n ? n - 1 : j];
    switch (rule) {
      case NodeRule::left: m.node_values[j] = left; break;
      case NodeRule::right: m.node_values[j] = right; break;
      case NodeRule::intersection: m.node_values[j] = left.intersect(right); break;
    }
  }
  return m;
}

void PiecewiseBoxMap::validate() const {
  grid.validate();
  if (cell_values.size() != grid.cells() || node_values.size() != grid.nodes.size())
    throw std::invalid_argument("PiecewiseBoxMap: size mismatch");
  for (const auto& b : cell_values)
    if (b.dim() != grid.d) throw std::invalid_argument("PiecewiseBoxMap: box dimension mismatch");
  for (const auto& b : node_values)
    if (b.dim() != grid.d) throw std::invalid_argument("PiecewiseBoxMap: box dimension mismatch");
}

std::vector<RegularityNode> check_regularity(const PiecewiseBoxMap& S, RegularitySide side) {
  S.validate();
  std::vector<RegularityNode> out;
  std::size_t n = S.grid.cells();
  for (std::size_t j = 1; j < n; ++j) {
    const Box& before = S.cell_values[j - 1];
    const Box& after = S.cell_values[j];
    const Box& at = S.node_values[j];
    Box limit = side == RegularitySide::two_sided ? before.intersect(after) : before;

    RegularityNode r;
    r.node = j;
    r.t = S.grid.nodes[j];
    r.outer_regular = limit.subset_of(at, &r.outer_witness_coord, &r.outer_witness_point);
    r.inner_semicontinuous =
        at.subset_of(limit, &r.isc_witness_coord, &r.isc_witness_point);
    out.push_back(r);
  }
  return out;
}

TimeIntegrand recession_integrand(const TimeIntegrand& K) {
  std::vector<std::pair<ConvexFn, ConvexFn>> parts;
  parts.reserve(K.cells.size());
  for (const auto& c : K.cells) parts.emplace_back(c.phi_rec, c.psi_rec);
  return TimeIntegrand::from_parts(K.grid, std::move(parts));
}

}  // namespace bolza
