#include "bolza/measure.hpp"

#include <algorithm>
#include <stdexcept>

namespace bolza {

Grid Grid::uniform(double T, std::size_t cells, std::size_t d) {
  if (!(T > 0.0) || cells == 0) throw std::invalid_argument("Grid::uniform: bad shape");
  Grid g;
  g.d = d;
  g.nodes.resize(cells + 1);
  for (std::size_t i = 0; i <= cells; ++i)
    g.nodes[i] = T * static_cast<double>(i) / static_cast<double>(cells);
  g.nodes.back() = T;
  return g;
}

void Grid::validate() const {
  if (nodes.size() < 2) throw std::invalid_argument("Grid: needs at least one cell");
  if (nodes.front() != 0.0) throw std::invalid_argument("Grid: first node must be 0");
  if (d == 0) throw std::invalid_argument("Grid: dimension must be positive");
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    if (!std::isfinite(nodes[i]) || !(nodes[i - 1] < nodes[i]))
      throw std::invalid_argument("Grid: nodes not strictly increasing at index " +
                                  std::to_string(i));
  }
}

bool Grid::matches(const Grid& other, double tol) const {
  if (d != other.d || nodes.size() != other.nodes.size()) return false;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (!approx(nodes[i], other.nodes[i], tol)) return false;
  return true;
}

std::size_t Grid::cell_right_open(double t) const {
  if (t < nodes.front() || t > nodes.back())
    throw std::out_of_range("Grid: time outside [0, T]");
  auto it = std::upper_bound(nodes.begin(), nodes.end(), t);
  std::size_t idx = static_cast<std::size_t>(it - nodes.begin());
  if (idx == 0) return 0;
  if (idx >= nodes.size()) return cells() - 1;  // t == T
  return idx - 1;
}

std::size_t Grid::cell_left_open(double t) const {
  if (t < nodes.front() || t > nodes.back())
    throw std::out_of_range("Grid: time outside [0, T]");
  auto it = std::lower_bound(nodes.begin(), nodes.end(), t);
  std::size_t idx = static_cast<std::size_t>(it - nodes.begin());
  if (idx == 0) return 0;
  return idx - 1;
}

BaseMeasure BaseMeasure::lebesgue(const Grid& g) {
  BaseMeasure mu;
  mu.grid = g;
  mu.cell_mass.resize(g.cells());
  for (std::size_t i = 0; i < g.cells(); ++i) mu.cell_mass[i] = g.cell_length(i);
  return mu;
}

double BaseMeasure::total() const {
  double s = 0.0;
  for (double m : cell_mass) s += m;
  return s;
}

double BaseMeasure::mass_before(double t) const {
  if (t < 0.0 || t > grid.T()) throw std::out_of_range("BaseMeasure: time outside [0, T]");
  double s = 0.0;
  for (std::size_t i = 0; i < grid.cells(); ++i) {
    if (t >= grid.nodes[i + 1]) {
      s += cell_mass[i];
    } else if (t > grid.nodes[i]) {
      s += cell_mass[i] * (t - grid.nodes[i]) / grid.cell_length(i);
      break;
    } else {
      break;
    }
  }
  return s;
}

void BaseMeasure::validate() const {
  grid.validate();
  if (cell_mass.size() != grid.cells())
    throw std::invalid_argument("BaseMeasure: one mass per cell required");
  for (double m : cell_mass)
    if (!(m > 0.0) || !std::isfinite(m))
      throw std::invalid_argument("BaseMeasure: cell masses must be positive");
}

DiscreteRadonMeasure DiscreteRadonMeasure::zeros(const BaseMeasure& mu) {
  DiscreteRadonMeasure th;
  th.base = mu;
  th.density.assign(mu.grid.cells(), Vec(mu.grid.d, 0.0));
  return th;
}

void DiscreteRadonMeasure::canonicalize(double drop_tol) {
  std::stable_sort(atoms.begin(), atoms.end(),
                   [](const Atom& a, const Atom& b) { return a.t < b.t; });
  std::vector<Atom> merged;
  for (const Atom& a : atoms) {
    if (!merged.empty() && merged.back().t == a.t) {
      for (std::size_t i = 0; i < a.mass.size(); ++i) merged.back().mass[i] += a.mass[i];
    } else {
      merged.push_back(a);
    }
  }
  atoms.clear();
  for (const Atom& a : merged)
    if (norm2(a.mass) > drop_tol) atoms.push_back(a);
}

Vec DiscreteRadonMeasure::value_before(double t) const {
  Vec out(d(), 0.0);
  const Grid& g = base.grid;
  for (std::size_t i = 0; i < g.cells(); ++i) {
    double frac;
    if (t >= g.nodes[i + 1])
      frac = 1.0;
    else if (t > g.nodes[i])
      frac = (t - g.nodes[i]) / g.cell_length(i);
    else
      break;
    double m = base.cell_mass[i] * frac;
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += m * density[i][k];
    if (frac < 1.0) break;
  }
  for (const Atom& a : atoms) {
    if (a.t >= t) break;
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += a.mass[k];
  }
  return out;
}

Vec DiscreteRadonMeasure::total() const {
  Vec out(d(), 0.0);
  for (std::size_t i = 0; i < base.grid.cells(); ++i)
    for (std::size_t k = 0; k < out.size(); ++k)
      out[k] += base.cell_mass[i] * density[i][k];
  for (const Atom& a : atoms)
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += a.mass[k];
  return out;
}

void DiscreteRadonMeasure::validate() const {
  base.validate();
  if (density.size() != base.grid.cells())
    throw std::invalid_argument("DiscreteRadonMeasure: one density row per cell required");
  for (const Vec& row : density)
    if (row.size() != base.grid.d)
      throw std::invalid_argument("DiscreteRadonMeasure: density dimension mismatch");
  double prev = -1.0;
  for (const Atom& a : atoms) {
    if (a.t < 0.0 || a.t > base.grid.T())
      throw std::invalid_argument("DiscreteRadonMeasure: atom outside [0, T]");
    if (a.mass.size() != base.grid.d)
      throw std::invalid_argument("DiscreteRadonMeasure: atom dimension mismatch");
    if (a.t <= prev)
      throw std::invalid_argument("DiscreteRadonMeasure: atoms not sorted/distinct");
    prev = a.t;
  }
}

Decomposition lebesgue_decompose(const DiscreteRadonMeasure& theta) {
  DiscreteRadonMeasure canon = theta;
  canon.canonicalize();
  Decomposition dec;
  dec.density = canon.density;
  dec.atoms = canon.atoms;
  for (const Atom& a : canon.atoms) {
    double n = norm2(a.mass);
    Vec dir(a.mass.size());
    for (std::size_t k = 0; k < dir.size(); ++k) dir[k] = a.mass[k] / n;
    dec.directions.push_back(dir);
    dec.singular_variation += n;
  }
  return dec;
}

double total_variation(const DiscreteRadonMeasure& theta) {
  double s = 0.0;
  for (std::size_t i = 0; i < theta.base.grid.cells(); ++i)
    s += theta.base.cell_mass[i] * norm2(theta.density[i]);
  for (const Atom& a : theta.atoms) s += norm2(a.mass);
  return s;
}

Vec BVArc::eval(double t) const {
  Vec out = diff.value_before(t);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] += x0[k];
  return out;
}

Vec BVArc::eval_right(double t) const {
  Vec out = eval(t);
  for (const Atom& a : diff.atoms) {
    if (a.t > t) break;
    if (a.t == t)
      for (std::size_t k = 0; k < out.size(); ++k) out[k] += a.mass[k];
  }
  return out;
}

Vec BVArc::integrate_time(double a, double b) const {
  if (!(a <= b)) throw std::invalid_argument("BVArc::integrate_time: empty interval");
  // Split at interior grid nodes and atoms; between cuts the arc is affine.
  std::vector<double> cuts{a};
  for (double tn : diff.base.grid.nodes)
    if (tn > a && tn < b) cuts.push_back(tn);
  for (const Atom& at : diff.atoms)
    if (at.t > a && at.t < b) cuts.push_back(at.t);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  Vec out(d(), 0.0);
  for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
    Vec left = eval_right(cuts[s]);
    Vec right = eval(cuts[s + 1]);
    double len = cuts[s + 1] - cuts[s];
    for (std::size_t k = 0; k < out.size(); ++k)
      out[k] += 0.5 * (left[k] + right[k]) * len;
  }
  return out;
}

void BVArc::validate() const {
  diff.validate();
  if (x0.size() != diff.base.grid.d)
    throw std::invalid_argument("BVArc: initial point dimension mismatch");
}

ContinuousArc ContinuousArc::constant(const Grid& g, const Vec& value) {
  ContinuousArc y;
  y.grid = g;
  y.nodes.assign(g.nodes.size(), value);
  return y;
}

Vec ContinuousArc::eval(double t) const {
  std::size_t i = grid.cell_right_open(t);
  double len = grid.cell_length(i);
  double lam = (t - grid.nodes[i]) / len;
  Vec out(d());
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = (1.0 - lam) * nodes[i][k] + lam * nodes[i + 1][k];
  return out;
}

Vec ContinuousArc::midpoint_value(std::size_t cell) const {
  Vec out(d());
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = 0.5 * (nodes[cell][k] + nodes[cell + 1][k]);
  return out;
}

Vec ContinuousArc::mu_slope(std::size_t cell, const BaseMeasure& mu) const {
  Vec out(d());
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = (nodes[cell + 1][k] - nodes[cell][k]) / mu.cell_mass[cell];
  return out;
}

double ContinuousArc::sup_norm() const {
  double s = 0.0;
  for (const Vec& v : nodes) s = std::max(s, norm_inf(v));
  return s;
}

void ContinuousArc::validate() const {
  grid.validate();
  if (nodes.size() != grid.nodes.size())
    throw std::invalid_argument("ContinuousArc: one value per grid node required");
  for (const Vec& v : nodes)
    if (v.size() != grid.d)
      throw std::invalid_argument("ContinuousArc: node dimension mismatch");
}

double pair_measure_continuous(const DiscreteRadonMeasure& theta, const ContinuousArc& y) {
  if (!theta.base.grid.matches(y.grid))
    throw std::invalid_argument("pair_measure_continuous: grids differ");
  double s = 0.0;
  for (std::size_t i = 0; i < theta.base.grid.cells(); ++i) {
    // Exact for linear y against the uniform in-cell density.
    double m = theta.base.cell_mass[i];
    for (std::size_t k = 0; k < theta.d(); ++k)
      s += m * theta.density[i][k] * 0.5 * (y.nodes[i][k] + y.nodes[i + 1][k]);
  }
  for (const Atom& a : theta.atoms) s += dot(y.eval(a.t), a.mass);
  return s;
}

double pair_arc_v(const BVArc& x, const Vec& v_minus, const ContinuousArc& v) {
  return dot(x.x0, v_minus) + pair_measure_continuous(x.diff, v);
}

double integration_by_parts_residual(const BVArc& x, const ContinuousArc& v) {
  if (!x.diff.base.grid.matches(v.grid))
    throw std::invalid_argument("integration_by_parts_residual: grids differ");
  double v_dx = pair_measure_continuous(x.diff, v);
  // integral of x against Dv: Dv has the piecewise-constant Lebesgue density
  // (v_{i+1} - v_i) / cell_length.
  double x_dv = 0.0;
  const Grid& g = v.grid;
  for (std::size_t i = 0; i < g.cells(); ++i) {
    Vec xint = x.integrate_time(g.nodes[i], g.nodes[i + 1]);
    double len = g.cell_length(i);
    for (std::size_t k = 0; k < g.d; ++k)
      x_dv += xint[k] * (v.nodes[i + 1][k] - v.nodes[i][k]) / len;
  }
  double lhs = v_dx;
  double rhs = dot(x.eval_T_plus(), v.nodes.back()) - dot(x.x0, v.nodes.front()) - x_dv;
  return std::abs(lhs - rhs);
}

DiscreteRadonMeasure operator+(const DiscreteRadonMeasure& a, const DiscreteRadonMeasure& b) {
  if (!a.base.grid.matches(b.base.grid))
    throw std::invalid_argument("measure sum: grids differ");
  DiscreteRadonMeasure bb = rebase_measure(b, a.base);
  DiscreteRadonMeasure s = a;
  for (std::size_t i = 0; i < s.density.size(); ++i)
    for (std::size_t k = 0; k < s.base.grid.d; ++k) s.density[i][k] += bb.density[i][k];
  s.atoms.insert(s.atoms.end(), bb.atoms.begin(), bb.atoms.end());
  s.canonicalize();
  return s;
}

DiscreteRadonMeasure rebase_measure(const DiscreteRadonMeasure& theta, const BaseMeasure& mu) {
  if (!theta.base.grid.matches(mu.grid))
    throw std::invalid_argument("rebase_measure: grids differ");
  DiscreteRadonMeasure out = theta;
  for (std::size_t i = 0; i < out.density.size(); ++i) {
    double m_old = theta.base.cell_mass[i], m_new = mu.cell_mass[i];
    if (m_old != m_new)
      for (double& v : out.density[i]) v *= m_old / m_new;
  }
  out.base = mu;
  return out;
}

DiscreteRadonMeasure scale_measure(const DiscreteRadonMeasure& theta, double c) {
  DiscreteRadonMeasure s = theta;
  for (auto& row : s.density)
    for (double& v : row) v *= c;
  for (Atom& a : s.atoms)
    for (double& v : a.mass) v *= c;
  s.canonicalize();
  return s;
}

BVArc negate_arc(const BVArc& x) {
  BVArc n = x;
  for (double& v : n.x0) v = -v;
  n.diff = scale_measure(n.diff, -1.0);
  return n;
}

BVArc to_bv_arc(const ContinuousArc& y, const BaseMeasure& mu) {
  if (!y.grid.matches(mu.grid)) throw std::invalid_argument("to_bv_arc: grids differ");
  BVArc x;
  x.x0 = y.nodes.front();
  x.diff.base = mu;
  x.diff.density.reserve(mu.grid.cells());
  for (std::size_t i = 0; i < mu.grid.cells(); ++i)
    x.diff.density.push_back(y.mu_slope(i, mu));
  return x;
}

}  // namespace bolza
