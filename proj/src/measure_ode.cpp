#include "bolza/measure_ode.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace bolza {

namespace {

double frobenius(const std::vector<Vec>& A) {
  double s = 0.0;
  for (const Vec& row : A)
    for (double v : row) s += v * v;
  return std::sqrt(s);
}

// Shared discretization of a driver: its grid refined by the atom locations,
// with cell masses split in proportion to Lebesgue length and the atom mass
// attached to its node.
struct RefinedDriver {
  Vec nodes;
  Vec mass;       // per refined cell
  Vec atom_mass;  // per refined node, zero when none
};

RefinedDriver refine(const DriverMeasure& driver) {
  const Grid& g = driver.base.grid;
  RefinedDriver r;
  r.nodes = g.nodes;
  for (const DriverAtom& a : driver.atoms) {
    auto it = std::lower_bound(r.nodes.begin(), r.nodes.end(), a.t);
    if (it == r.nodes.end() || *it != a.t) r.nodes.insert(it, a.t);
  }
  std::size_t M = r.nodes.size() - 1;
  r.mass.resize(M);
  for (std::size_t j = 0; j < M; ++j) {
    std::size_t i = g.cell_right_open(r.nodes[j]);
    r.mass[j] = driver.base.cell_mass[i] * (r.nodes[j + 1] - r.nodes[j]) / g.cell_length(i);
  }
  r.atom_mass.assign(M + 1, 0.0);
  for (const DriverAtom& a : driver.atoms) {
    std::size_t j = static_cast<std::size_t>(
        std::lower_bound(r.nodes.begin(), r.nodes.end(), a.t) - r.nodes.begin());
    r.atom_mass[j] += a.mass;
  }
  return r;
}

// One Picard sweep: from the node values and jumps of the previous iterate,
// produce the next ones. Trapezoid of the node samples inside cells; a jump
// of mass * F_tau(y_tau + v_tau) lands right after each atom.
void sweep(const LipschitzField& F, const RefinedDriver& r, const std::vector<Vec>& vnode,
           const Vec& a, const std::vector<Vec>& ynode, const std::vector<Vec>& jump,
           std::vector<Vec>& nnode, std::vector<Vec>& njump) {
  std::size_t M = r.nodes.size() - 1, d = a.size();
  Vec running = a, arg(d), gl(d);
  nnode[0] = a;
  for (std::size_t j = 0; j <= M; ++j) {
    if (r.atom_mass[j] != 0.0) {
      for (std::size_t k = 0; k < d; ++k) arg[k] = ynode[j][k] + vnode[j][k];
      njump[j] = F.eval(r.nodes[j], arg);
      for (double& val : njump[j]) val *= r.atom_mass[j];
    } else {
      njump[j].assign(d, 0.0);
    }
    if (j == M) break;
    for (std::size_t k = 0; k < d; ++k) running[k] += njump[j][k];
    double tm = 0.5 * (r.nodes[j] + r.nodes[j + 1]);
    for (std::size_t k = 0; k < d; ++k) arg[k] = ynode[j][k] + jump[j][k] + vnode[j][k];
    gl = F.eval(tm, arg);
    for (std::size_t k = 0; k < d; ++k) arg[k] = ynode[j + 1][k] + vnode[j + 1][k];
    Vec gr = F.eval(tm, arg);
    for (std::size_t k = 0; k < d; ++k) running[k] += r.mass[j] * 0.5 * (gl[k] + gr[k]);
    nnode[j + 1] = running;
  }
}

BVArc build_arc(const RefinedDriver& r, std::size_t d, const Vec& a,
                const std::vector<Vec>& ynode, const std::vector<Vec>& jump) {
  std::size_t M = r.nodes.size() - 1;
  BVArc out;
  out.x0 = a;
  out.diff.base.grid = Grid{r.nodes, d};
  out.diff.base.cell_mass = r.mass;
  out.diff.density.assign(M, Vec(d, 0.0));
  for (std::size_t j = 0; j < M; ++j)
    for (std::size_t k = 0; k < d; ++k)
      out.diff.density[j][k] = (ynode[j + 1][k] - ynode[j][k] - jump[j][k]) / r.mass[j];
  for (std::size_t j = 0; j <= M; ++j)
    if (norm2(jump[j]) != 0.0) out.diff.atoms.push_back({r.nodes[j], jump[j]});
  out.diff.canonicalize();
  return out;
}

void check_inputs(const LipschitzField& F, const DriverMeasure& driver, const ContinuousArc& v,
                  const Vec& a) {
  F.validate();
  driver.validate();
  v.validate();
  double T = driver.base.grid.T();
  if (a.size() != F.d()) throw std::invalid_argument("picard_solve: initial value dimension");
  if (v.d() != F.d()) throw std::invalid_argument("picard_solve: input arc dimension");
  if (std::abs(F.grid.T() - T) > 1e-12 * (1.0 + std::abs(T)) ||
      std::abs(v.grid.T() - T) > 1e-12 * (1.0 + std::abs(T)))
    throw std::invalid_argument("picard_solve: horizon mismatch");
}

std::vector<Vec> sample_v(const ContinuousArc& v, const Vec& nodes) {
  std::vector<Vec> out(nodes.size());
  double T = v.grid.T();
  for (std::size_t j = 0; j < nodes.size(); ++j) out[j] = v.eval(std::min(nodes[j], T));
  return out;
}

// Left and right values of x at each time of the sorted list ts, by one
// incremental walk.
void sample_bv(const BVArc& x, const Vec& ts, std::vector<Vec>& left, std::vector<Vec>& right) {
  std::size_t d = x.d();
  const Grid& g = x.diff.base.grid;
  left.assign(ts.size(), Vec());
  right.assign(ts.size(), Vec());
  Vec cur = x.x0;
  double pos = 0.0;
  std::size_t ci = 0, ai = 0;
  const auto& atoms = x.diff.atoms;
  auto ac_add = [&](double upto) {
    while (pos < upto) {
      double edge = std::min(upto, g.nodes[ci + 1]);
      double frac = (edge - pos) / g.cell_length(ci);
      for (std::size_t k = 0; k < d; ++k)
        cur[k] += x.diff.density[ci][k] * x.diff.base.cell_mass[ci] * frac;
      pos = edge;
      if (pos >= g.nodes[ci + 1] && ci + 1 < g.cells()) ++ci;
    }
  };
  for (std::size_t q = 0; q < ts.size(); ++q) {
    double t = ts[q];
    ac_add(t);
    while (ai < atoms.size() && atoms[ai].t < t) {
      for (std::size_t k = 0; k < d; ++k) cur[k] += atoms[ai].mass[k];
      ++ai;
    }
    left[q] = cur;
    right[q] = cur;
    if (ai < atoms.size() && atoms[ai].t == t)
      for (std::size_t k = 0; k < d; ++k) right[q][k] += atoms[ai].mass[k];
  }
}

}  // namespace

LipschitzField LipschitzField::affine(const Grid& g, std::vector<std::vector<Vec>> A,
                                      std::vector<Vec> b) {
  LipschitzField F;
  F.grid = g;
  F.A = std::move(A);
  F.b = std::move(b);
  F.c.resize(g.cells());
  for (std::size_t i = 0; i < g.cells(); ++i)
    F.c[i] = std::max(frobenius(F.A[i]), norm2(F.b[i]));
  F.validate();
  return F;
}

LipschitzField LipschitzField::from_callback(const Grid& g, Vec c,
                                             std::function<Vec(double, const Vec&)> f) {
  LipschitzField F;
  F.grid = g;
  F.c = std::move(c);
  F.callback = std::move(f);
  F.validate();
  return F;
}

Vec LipschitzField::eval(double t, const Vec& y) const {
  std::size_t i = grid.cell_left_open(t);
  if (is_affine()) {
    Vec out = b[i];
    for (std::size_t r = 0; r < grid.d; ++r)
      for (std::size_t k = 0; k < grid.d; ++k) out[r] += A[i][r][k] * y[k];
    return out;
  }
  Vec out = callback(t, y);
  if (out.size() != grid.d)
    throw std::runtime_error("field callback returned wrong dimension");
  double lim = c[i] * (1.0 + norm2(y)) * (1.0 + 1e-9) + 1e-12;
  if (!(norm2(out) <= lim))
    throw FieldBoundViolation("field growth bound violated: t=" + std::to_string(t) +
                              " |y|=" + std::to_string(norm2(y)) +
                              " |F|=" + std::to_string(norm2(out)) +
                              " allowed=" + std::to_string(lim));
  return out;
}

void LipschitzField::validate() const {
  grid.validate();
  if (c.size() != grid.cells())
    throw std::invalid_argument("field: one growth bound per cell required");
  for (double v : c)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw std::invalid_argument("field: growth bounds must be finite and nonnegative");
  if (is_affine()) {
    if (A.size() != grid.cells() || b.size() != grid.cells())
      throw std::invalid_argument("field: affine data must cover every cell");
    for (std::size_t i = 0; i < grid.cells(); ++i) {
      if (A[i].size() != grid.d || b[i].size() != grid.d)
        throw std::invalid_argument("field: affine data dimension mismatch");
      for (const Vec& row : A[i])
        if (row.size() != grid.d)
          throw std::invalid_argument("field: affine data dimension mismatch");
    }
  } else if (!callback) {
    throw std::invalid_argument("field: either affine data or a callback required");
  }
}

double DriverMeasure::total() const {
  double s = base.total();
  for (const DriverAtom& a : atoms) s += a.mass;
  return s;
}

void DriverMeasure::validate() const {
  base.validate();
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (!(atoms[i].mass > 0.0)) throw std::invalid_argument("driver: atom masses must be positive");
    if (atoms[i].t < 0.0 || atoms[i].t > base.grid.T())
      throw std::invalid_argument("driver: atom outside the horizon");
    if (i > 0 && !(atoms[i - 1].t < atoms[i].t))
      throw std::invalid_argument("driver: atoms must be sorted with distinct locations");
  }
}

double gamma_total(const LipschitzField& F, const DriverMeasure& driver) {
  const Grid& dg = driver.base.grid;
  const Grid& fg = F.grid;
  double gamma = 0.0;
  std::size_t j = 0;
  for (std::size_t i = 0; i < dg.cells(); ++i) {
    double s0 = dg.nodes[i], s1 = dg.nodes[i + 1];
    while (j + 1 < fg.cells() && fg.nodes[j + 1] <= s0) ++j;
    double cmax = 0.0;
    for (std::size_t k = j; k < fg.cells() && fg.nodes[k] < s1; ++k)
      cmax = std::max(cmax, F.c[k]);
    gamma += cmax * driver.base.cell_mass[i];
  }
  for (const DriverAtom& a : driver.atoms) gamma += F.c[fg.cell_left_open(a.t)] * a.mass;
  return gamma;
}

double gronwall_bound(const LipschitzField& F, const DriverMeasure& driver, double r,
                      const Vec& a) {
  double gamma = gamma_total(F, driver);
  return (norm2(a) + (1.0 + r) * gamma) * std::exp(gamma);
}

BVArc picard_solve(const LipschitzField& F, const DriverMeasure& driver, const ContinuousArc& v,
                   const Vec& a, double tol, const Vec* initial_iterate) {
  check_inputs(F, driver, v, a);
  if (!(tol > 0.0)) throw std::invalid_argument("picard_solve: tol must be positive");
  RefinedDriver r = refine(driver);
  std::size_t M = r.nodes.size() - 1, d = a.size();
  std::vector<Vec> vnode = sample_v(v, r.nodes);

  // Iteration budget from the contraction estimate gamma^nu / nu!: enough
  // sweeps that the remaining error factor drops below tol relative to the
  // a-priori solution scale, times a safety factor.
  double gamma = gamma_total(F, driver);
  double scale = 2.0 * (gronwall_bound(F, driver, v.sup_norm(), a) + norm2(a) + 1.0);
  std::size_t nu = 1;
  double fact = gamma;
  while ((fact >= 0.5 || fact * scale >= tol) && nu < 400) {
    ++nu;
    fact *= gamma / static_cast<double>(nu);
  }
  std::size_t budget = 4 * nu;

  std::vector<Vec> ynode(M + 1, initial_iterate ? *initial_iterate : a);
  std::vector<Vec> jump(M + 1, Vec(d, 0.0));
  std::vector<Vec> nnode(M + 1), njump(M + 1);
  bool converged = false;
  for (std::size_t it = 0; it < budget && !converged; ++it) {
    sweep(F, r, vnode, a, ynode, jump, nnode, njump);
    double change = 0.0;
    for (std::size_t j = 0; j <= M; ++j)
      for (std::size_t k = 0; k < d; ++k)
        change = std::max({change, std::abs(nnode[j][k] - ynode[j][k]),
                           std::abs(njump[j][k] - jump[j][k])});
    ynode.swap(nnode);
    jump.swap(njump);
    converged = change <= tol;
  }
  if (!converged)
    throw ContractionFailure(
        "picard_solve: contraction budget exhausted; the declared bound c does not contract");
  return build_arc(r, d, a, ynode, jump);
}

BVArc picard_apply(const LipschitzField& F, const DriverMeasure& driver, const ContinuousArc& v,
                   const Vec& a, const BVArc& y) {
  check_inputs(F, driver, v, a);
  RefinedDriver r = refine(driver);
  std::size_t M = r.nodes.size() - 1, d = a.size();
  std::vector<Vec> vnode = sample_v(v, r.nodes);
  std::vector<Vec> ynode, yright;
  sample_bv(y, r.nodes, ynode, yright);
  std::vector<Vec> jump(M + 1);
  for (std::size_t j = 0; j <= M; ++j) {
    jump[j] = yright[j];
    for (std::size_t k = 0; k < d; ++k) jump[j][k] -= ynode[j][k];
  }
  std::vector<Vec> nnode(M + 1), njump(M + 1);
  sweep(F, r, vnode, a, ynode, jump, nnode, njump);
  return build_arc(r, d, a, nnode, njump);
}

double bv_sup_dist(const BVArc& x1, const BVArc& x2) {
  if (!x1.diff.base.grid.matches(x2.diff.base.grid))
    throw std::invalid_argument("bv_sup_dist: grid mismatch");
  Vec ts = x1.diff.base.grid.nodes;
  for (const auto& arc : {&x1, &x2})
    for (const Atom& a : arc->diff.atoms) {
      auto it = std::lower_bound(ts.begin(), ts.end(), a.t);
      if (it == ts.end() || *it != a.t) ts.insert(it, a.t);
    }
  std::vector<Vec> l1, r1, l2, r2;
  sample_bv(x1, ts, l1, r1);
  sample_bv(x2, ts, l2, r2);
  double best = 0.0;
  Vec diff(x1.d());
  for (std::size_t q = 0; q < ts.size(); ++q) {
    for (std::size_t k = 0; k < diff.size(); ++k) diff[k] = l1[q][k] - l2[q][k];
    best = std::max(best, norm2(diff));
    for (std::size_t k = 0; k < diff.size(); ++k) diff[k] = r1[q][k] - r2[q][k];
    best = std::max(best, norm2(diff));
  }
  return best;
}

double arc_sup_dist(const ContinuousArc& p, const ContinuousArc& q) {
  Vec ts = p.grid.nodes;
  for (double t : q.grid.nodes) {
    auto it = std::lower_bound(ts.begin(), ts.end(), t);
    if (it == ts.end() || *it != t) ts.insert(it, t);
  }
  double best = 0.0;
  Vec diff(p.d());
  for (double t : ts) {
    Vec a = p.eval(std::min(t, p.grid.T()));
    Vec b = q.eval(std::min(t, q.grid.T()));
    for (std::size_t k = 0; k < diff.size(); ++k) diff[k] = a[k] - b[k];
    best = std::max(best, norm2(diff));
  }
  return best;
}

std::vector<ContinuityRow> continuity_probe(const LipschitzField& F, const DriverMeasure& driver,
                                            const Vec& a, const ContinuousArc& v,
                                            const std::vector<ContinuousArc>& v_sequence,
                                            double tol) {
  BVArc base = picard_solve(F, driver, v, a, tol);
  std::vector<ContinuityRow> rows;
  rows.reserve(v_sequence.size());
  for (const ContinuousArc& vn : v_sequence) {
    BVArc yn = picard_solve(F, driver, vn, a, tol);
    rows.push_back({arc_sup_dist(vn, v), bv_sup_dist(yn, base)});
  }
  return rows;
}

LipschitzField reverse_field(const LipschitzField& F) {
  double T = F.grid.T();
  std::size_t N = F.grid.cells();
  LipschitzField R;
  R.grid.d = F.grid.d;
  R.grid.nodes.resize(N + 1);
  for (std::size_t j = 0; j <= N; ++j) R.grid.nodes[j] = T - F.grid.nodes[N - j];
  R.grid.nodes.front() = 0.0;
  R.grid.nodes.back() = T;
  R.c.resize(N);
  for (std::size_t i = 0; i < N; ++i) R.c[i] = F.c[N - 1 - i];
  if (F.is_affine()) {
    R.A.resize(N);
    R.b.resize(N);
    for (std::size_t i = 0; i < N; ++i) {
      R.A[i] = F.A[N - 1 - i];
      for (Vec& row : R.A[i])
        for (double& val : row) val = -val;
      R.b[i] = F.b[N - 1 - i];
      for (double& val : R.b[i]) val = -val;
    }
  } else {
    LipschitzField orig = F;
    R.callback = [orig, T](double s, const Vec& y) {
      Vec out = orig.eval(std::max(0.0, T - s), y);
      for (double& val : out) val = -val;
      return out;
    };
  }
  return R;
}

DriverMeasure reverse_driver(const DriverMeasure& m) {
  double T = m.base.grid.T();
  std::size_t N = m.base.grid.cells();
  DriverMeasure r;
  r.base.grid.d = m.base.grid.d;
  r.base.grid.nodes.resize(N + 1);
  for (std::size_t j = 0; j <= N; ++j) r.base.grid.nodes[j] = T - m.base.grid.nodes[N - j];
  r.base.grid.nodes.front() = 0.0;
  r.base.grid.nodes.back() = T;
  r.base.cell_mass.resize(N);
  for (std::size_t i = 0; i < N; ++i) r.base.cell_mass[i] = m.base.cell_mass[N - 1 - i];
  for (auto it = m.atoms.rbegin(); it != m.atoms.rend(); ++it)
    r.atoms.push_back({T - it->t, it->mass});
  return r;
}

ContinuousArc reverse_arc(const ContinuousArc& v) {
  double T = v.grid.T();
  std::size_t N = v.grid.cells();
  ContinuousArc r;
  r.grid.d = v.grid.d;
  r.grid.nodes.resize(N + 1);
  r.nodes.resize(N + 1);
  for (std::size_t j = 0; j <= N; ++j) {
    r.grid.nodes[j] = T - v.grid.nodes[N - j];
    r.nodes[j] = v.nodes[N - j];
  }
  r.grid.nodes.front() = 0.0;
  r.grid.nodes.back() = T;
  return r;
}

}  // namespace bolza
