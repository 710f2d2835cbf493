#include "bolza/solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "bolza/pdhg.hpp"

namespace bolza {

namespace {

// One location that may carry an atom of the decision measure: every grid
// node, plus the locations of any off-node atoms of u.
struct Site {
  double t = 0.0;
  std::size_t cell = 0;         // left-open cell, governs the horizon cost
  Vec u_mass;                   // atom of u here (zeros when none)
  std::size_t first_state = 0;  // first cell midpoint strictly after t
};

// Primal transcription layout. Variables per coordinate, in order:
// x0, w_0..w_{N-1} (density w.r.t. mu), s_0..s_{S-1} (site masses).
struct Layout {
  const BolzaProblem* P = nullptr;
  std::vector<Site> sites;
  std::vector<std::size_t> node_site;  // grid node index -> site index

  std::size_t cells() const { return P->grid().cells(); }
  std::size_t n_vars() const { return 1 + cells() + sites.size(); }
  double mass(std::size_t i) const { return P->mu.cell_mass[i]; }
};

Layout make_layout(const BolzaProblem& P, const DiscreteRadonMeasure& u) {
  Layout lay;
  lay.P = &P;
  const Grid& g = P.grid();
  for (double t : g.nodes) lay.sites.push_back({t, g.cell_left_open(t), Vec(g.d, 0.0), 0});
  for (const Atom& a : u.atoms) {
    auto it = std::lower_bound(lay.sites.begin(), lay.sites.end(), a.t,
                               [](const Site& s, double t) { return s.t < t; });
    if (it != lay.sites.end() && it->t == a.t) {
      it->u_mass = a.mass;
    } else {
      lay.sites.insert(it, {a.t, g.cell_left_open(a.t), a.mass, 0});
    }
  }
  lay.node_site.resize(g.nodes.size());
  for (std::size_t j = 0, si = 0; j < g.nodes.size(); ++j) {
    while (lay.sites[si].t != g.nodes[j]) ++si;
    lay.node_site[j] = si;
  }
  for (Site& s : lay.sites) {
    std::size_t i = 0;
    while (i < g.cells() && g.midpoint(i) <= s.t) ++i;
    s.first_state = i;
  }
  return lay;
}

// States of the transcription: rows 0..N-1 are the arc values at cell
// midpoints, row N is x_{T+}; all linear in the variables via prefix sums.
struct PrefixStateOp final : LinearOp {
  const Layout* lay;

  explicit PrefixStateOp(const Layout* l) : lay(l) {}

  std::size_t rows() const override { return lay->cells() + 1; }
  std::size_t cols() const override { return lay->n_vars(); }

  void apply(const Vec& z, Vec& out) const override {
    const Grid& g = lay->P->grid();
    std::size_t N = lay->cells(), S = lay->sites.size(), si = 0;
    double base = z[0];
    for (std::size_t i = 0; i < N; ++i) {
      double mid = g.midpoint(i);
      while (si < S && lay->sites[si].t < mid) base += z[1 + N + si++];
      out[i] = base + 0.5 * lay->mass(i) * z[1 + i];
      base += lay->mass(i) * z[1 + i];
    }
    while (si < S) base += z[1 + N + si++];
    out[N] = base;
  }

  void apply_adjoint(const Vec& lam, Vec& out) const override {
    std::size_t N = lay->cells(), S = lay->sites.size();
    Vec suffix(N + 1);
    suffix[N] = lam[N];
    for (std::size_t i = N; i-- > 0;) suffix[i] = lam[i] + suffix[i + 1];
    out[0] = suffix[0];
    for (std::size_t l = 0; l < N; ++l)
      out[1 + l] = lay->mass(l) * (0.5 * lam[l] + suffix[l + 1]);
    for (std::size_t j = 0; j < S; ++j)
      out[1 + N + j] = suffix[lay->sites[j].first_state];
  }

  Vec row_abs_sums() const override {
    const Grid& g = lay->P->grid();
    std::size_t N = lay->cells(), S = lay->sites.size(), si = 0;
    Vec r(N + 1);
    double acc = 1.0;  // the x0 column
    for (std::size_t i = 0; i < N; ++i) {
      while (si < S && lay->sites[si].t < g.midpoint(i)) {
        acc += 1.0;
        ++si;
      }
      r[i] = acc + 0.5 * lay->mass(i);
      acc += lay->mass(i);
    }
    r[N] = acc + static_cast<double>(S - si);
    return r;
  }

  Vec col_abs_sums() const override {
    std::size_t N = lay->cells(), S = lay->sites.size();
    Vec c(n_cols());
    c[0] = static_cast<double>(N + 1);
    for (std::size_t l = 0; l < N; ++l)
      c[1 + l] = lay->mass(l) * (0.5 + static_cast<double>(N - 1 - l) + 1.0);
    for (std::size_t j = 0; j < S; ++j)
      c[1 + N + j] = static_cast<double>(N - lay->sites[j].first_state) + 1.0;
    return c;
  }

 private:
  std::size_t n_cols() const { return lay->n_vars(); }
};

// Dual transcription: rows are the mu-slopes of y over cells.
struct DiffOp final : LinearOp {
  const BaseMeasure* mu;

  explicit DiffOp(const BaseMeasure* m) : mu(m) {}

  std::size_t rows() const override { return mu->grid.cells(); }
  std::size_t cols() const override { return mu->grid.cells() + 1; }

  void apply(const Vec& z, Vec& out) const override {
    for (std::size_t i = 0; i < rows(); ++i)
      out[i] = (z[i + 1] - z[i]) / mu->cell_mass[i];
  }

  void apply_adjoint(const Vec& lam, Vec& out) const override {
    std::size_t N = rows();
    out[0] = -lam[0] / mu->cell_mass[0];
    for (std::size_t j = 1; j < N; ++j)
      out[j] = lam[j - 1] / mu->cell_mass[j - 1] - lam[j] / mu->cell_mass[j];
    out[N] = lam[N - 1] / mu->cell_mass[N - 1];
  }

  Vec row_abs_sums() const override {
    Vec r(rows());
    for (std::size_t i = 0; i < rows(); ++i) r[i] = 2.0 / mu->cell_mass[i];
    return r;
  }

  Vec col_abs_sums() const override {
    std::size_t N = rows();
    Vec c(N + 1);
    c[0] = 1.0 / mu->cell_mass[0];
    for (std::size_t j = 1; j < N; ++j)
      c[j] = 1.0 / mu->cell_mass[j - 1] + 1.0 / mu->cell_mass[j];
    c[N] = 1.0 / mu->cell_mass[N - 1];
    return c;
  }
};

// Per-coordinate slice of the primal transcription (the problem is fully
// coordinate-separable).
struct CoordView {
  const Layout* lay;
  const DiscreteRadonMeasure* u;
  std::size_t k = 0;

  const Plq& phi(std::size_t i) const { return lay->P->K.cell(i).phi.coords[k]; }
  const Plq& psi(std::size_t i) const { return lay->P->K.cell(i).psi.coords[k]; }
  const Plq& psi_rec(std::size_t i) const { return lay->P->K.cell(i).psi_rec.coords[k]; }
  const Plq& k0() const { return lay->P->k.k0.coords[k]; }
  const Plq& kT() const { return lay->P->k.kT.coords[k]; }
  double u_density(std::size_t i) const { return (*u).density[i][k]; }
  double u_site(std::size_t j) const { return lay->sites[j].u_mass[k]; }
};

// Exact objective of one coordinate slice: same terms eval_JK and the
// endpoint cost would produce, with states from the incremental prefix walk.
double coord_objective(const CoordView& v, const Vec& z) {
  const Layout& lay = *v.lay;
  const Grid& g = lay.P->grid();
  std::size_t N = lay.cells(), S = lay.sites.size(), si = 0;
  ExtSum total;
  total.add(v.k0()(z[0]));
  double base = z[0];
  for (std::size_t i = 0; i < N; ++i) {
    double mid = g.midpoint(i);
    while (si < S && lay.sites[si].t < mid) base += z[1 + N + si++];
    double state = base + 0.5 * lay.mass(i) * z[1 + i];
    ExtSum cell;
    cell.add(v.phi(i)(state));
    cell.add(v.psi(i)(z[1 + i] + v.u_density(i)));
    double val = cell.value();
    total.add(std::isinf(val) ? val : lay.mass(i) * val);
    base += lay.mass(i) * z[1 + i];
  }
  while (si < S) base += z[1 + N + si++];
  for (std::size_t j = 0; j < S; ++j)
    total.add(v.psi_rec(lay.sites[j].cell)(z[1 + N + j] + v.u_site(j)));
  total.add(v.kT()(base));
  return total.value();
}

double clamp_to(double z, double lo, double hi) { return std::min(std::max(z, lo), hi); }

// Pull every explicit variable into its own domain, then walk the derived
// states and push boundary violations back onto the nearest upstream lever:
// first the cell density, then the site mass at the cell's left node.
// Targets sit a small margin inside finite box edges so that downstream
// evaluation, whatever its summation order, lands inside. Returns the first
// unresolvable violation.
std::optional<InfeasibilityCertificate> repair_coord(const CoordView& v, Vec& z) {
  const Layout& lay = *v.lay;
  const Grid& g = lay.P->grid();
  std::size_t N = lay.cells(), S = lay.sites.size();

  z[0] = clamp_to(z[0], v.k0().lo(), v.k0().hi());
  for (std::size_t i = 0; i < N; ++i)
    z[1 + i] = clamp_to(z[1 + i], v.psi(i).lo() - v.u_density(i),
                        v.psi(i).hi() - v.u_density(i));
  for (std::size_t j = 0; j < S; ++j) {
    const Plq& h = v.psi_rec(lay.sites[j].cell);
    z[1 + N + j] = clamp_to(z[1 + N + j], h.lo() - v.u_site(j), h.hi() - v.u_site(j));
  }

  auto inside_target = [](double lo, double hi, double state) {
    if (lo == hi) return lo;
    double a = std::isfinite(lo) ? lo + 1e-12 * (1.0 + std::abs(lo)) : -kInf;
    double b = std::isfinite(hi) ? hi - 1e-12 * (1.0 + std::abs(hi)) : kInf;
    if (a > b) return 0.5 * (lo + hi);
    return clamp_to(state, a, b);
  };
  auto outside = [](double lo, double hi, double state) {
    double snap = 1e-15 * (1.0 + std::abs(state));
    return state < lo - snap || state > hi + snap;
  };

  double base = z[0];
  std::size_t si = 0;
  for (std::size_t i = 0; i < N; ++i) {
    double mid = g.midpoint(i);
    while (si < S && lay.sites[si].t < mid) base += z[1 + N + si++];
    double m = lay.mass(i);
    double lo = v.phi(i).lo(), hi = v.phi(i).hi();
    double state = base + 0.5 * m * z[1 + i];
    if (outside(lo, hi, state)) {
      double target = inside_target(lo, hi, state);
      double wlo = v.psi(i).lo() - v.u_density(i), whi = v.psi(i).hi() - v.u_density(i);
      z[1 + i] = clamp_to(z[1 + i] + 2.0 * (target - state) / m, wlo, whi);
      state = base + 0.5 * m * z[1 + i];
      if (outside(lo, hi, state)) {
        // the site at this cell's left node is already inside `base`
        std::size_t j = lay.node_site[i];
        const Plq& h = v.psi_rec(lay.sites[j].cell);
        double s_old = z[1 + N + j];
        double s_new = clamp_to(s_old + (target - state), h.lo() - v.u_site(j),
                                h.hi() - v.u_site(j));
        z[1 + N + j] = s_new;
        base += s_new - s_old;
        state = base + 0.5 * m * z[1 + i];
      }
      if (outside(lo, hi, state))
        return InfeasibilityCertificate{"state outside dom(phi)", i,
                                        static_cast<int>(v.k), Interval{lo, hi}, state};
    }
    base += m * z[1 + i];
  }
  while (si < S) base += z[1 + N + si++];

  double lo = v.kT().lo(), hi = v.kT().hi();
  if (outside(lo, hi, base)) {
    double target = inside_target(lo, hi, base);
    std::size_t j = lay.node_site[g.nodes.size() - 1];  // the site at t = T
    const Plq& h = v.psi_rec(lay.sites[j].cell);
    for (int round = 0; round < 3 && outside(lo, hi, base); ++round) {
      double s_new = clamp_to(z[1 + N + j] + (target - base), h.lo() - v.u_site(j),
                              h.hi() - v.u_site(j));
      base += s_new - z[1 + N + j];
      z[1 + N + j] = s_new;
    }
    if (outside(lo, hi, base))
      return InfeasibilityCertificate{"terminal value outside dom(kT)", N,
                                      static_cast<int>(v.k), Interval{lo, hi}, base};
  }
  return std::nullopt;
}

// Value-preserving cleanup of a solved coordinate: convert cell densities to
// an atom at the cell's right node, push atom mass onto the next site, and
// zero negligible masses, accepting a change only when the exactly
// re-evaluated objective does not increase. On costs that are linear in the
// variation this selects the canonical representative with the jump as late
// as feasibility allows; on strictly convex costs every move is rejected.
void consolidate_coord(const CoordView& v, Vec& z) {
  const Layout& lay = *v.lay;
  std::size_t N = lay.cells(), S = lay.sites.size();
  double cur = coord_objective(v, z);
  if (std::isinf(cur)) return;
  auto try_move = [&](Vec& cand) {
    double val = coord_objective(v, cand);
    if (val <= cur + 1e-12 * (1.0 + std::abs(cur))) {
      z = cand;
      cur = val;
      return true;
    }
    return false;
  };
  for (int pass = 0; pass < 8; ++pass) {
    bool changed = false;
    for (std::size_t i = 0; i < N; ++i) {
      if (z[1 + i] == 0.0) continue;
      Vec cand = z;
      cand[1 + N + lay.node_site[i + 1]] += lay.mass(i) * cand[1 + i];
      cand[1 + i] = 0.0;
      changed |= try_move(cand);
    }
    for (std::size_t j = 0; j + 1 < S; ++j) {
      if (z[1 + N + j] == 0.0) continue;
      Vec cand = z;
      cand[1 + N + j + 1] += cand[1 + N + j];
      cand[1 + N + j] = 0.0;
      changed |= try_move(cand);
    }
    for (std::size_t j = 0; j < S; ++j) {
      if (z[1 + N + j] == 0.0 || std::abs(z[1 + N + j]) > 1e-11) continue;
      Vec cand = z;
      cand[1 + N + j] = 0.0;
      changed |= try_move(cand);
    }
    if (!changed) break;
  }
}

BVArc assemble_arc(const Layout& lay, const std::vector<Vec>& zs) {
  const Grid& g = lay.P->grid();
  std::size_t N = lay.cells(), d = g.d;
  BVArc x;
  x.x0.resize(d);
  for (std::size_t k = 0; k < d; ++k) x.x0[k] = zs[k][0];
  x.diff.base = lay.P->mu;
  x.diff.density.assign(N, Vec(d, 0.0));
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t k = 0; k < d; ++k) x.diff.density[i][k] = zs[k][1 + i];
  for (std::size_t j = 0; j < lay.sites.size(); ++j) {
    Vec mass(d, 0.0);
    bool nonzero = false;
    for (std::size_t k = 0; k < d; ++k) {
      mass[k] = zs[k][1 + N + j];
      nonzero |= mass[k] != 0.0;
    }
    if (nonzero) x.diff.atoms.push_back({lay.sites[j].t, std::move(mass)});
  }
  x.diff.canonicalize();
  return x;
}

// Rebase u onto the problem's base measure so that densities mix correctly
// with the decision variables (no-op when the bases already agree).
DiscreteRadonMeasure checked_u(const BolzaProblem& P, const DiscreteRadonMeasure& u) {
  if (u.density.empty() && u.atoms.empty()) return DiscreteRadonMeasure::zeros(P.mu);
  if (!u.base.grid.matches(P.grid()))
    throw std::invalid_argument("solve: u is not on the problem grid");
  DiscreteRadonMeasure c = rebase_measure(u, P.mu);
  c.canonicalize();
  return c;
}

}  // namespace

double primal_objective(const BolzaProblem& P, const DiscreteRadonMeasure& u, const BVArc& x) {
  ExtSum s;
  s.add(eval_JK(P, x, x.diff + u));
  s.add(P.k.eval(x.x0, x.eval_T_plus()));
  return s.value();
}

double dual_objective(const BolzaProblem& P, const DiscreteRadonMeasure& u,
                      const ContinuousArc& y) {
  const Grid& g = P.grid();
  if (!y.grid.matches(g)) throw std::invalid_argument("dual_objective: grid mismatch");
  ExtSum cost;
  for (std::size_t i = 0; i < g.cells(); ++i) {
    const IntegrandCell& c = P.K.cell(i);
    double m = P.mu.cell_mass[i];
    ExtSum cell;
    cell.add(c.phi_star(y.mu_slope(i, P.mu)));
    cell.add(0.5 * c.psi_star(y.nodes[i]));
    cell.add(0.5 * c.psi_star(y.nodes[i + 1]));
    double val = cell.value();
    cost.add(std::isinf(val) ? val : m * val);
  }
  cost.add(P.k.eval_dual(y.nodes.front(), y.nodes.back()));
  double c = cost.value();
  if (c == kInf) return -kInf;
  return pair_measure_continuous(u, y) - c;
}

BolzaProblem dual_problem(const BolzaProblem& P) {
  std::vector<std::pair<ConvexFn, ConvexFn>> parts;
  parts.reserve(P.K.cells.size());
  for (const auto& c : P.K.cells) parts.emplace_back(c.psi_star, c.phi_star);
  BolzaProblem D;
  D.mu = P.mu;
  D.K = TimeIntegrand::from_parts(P.grid(), std::move(parts));
  D.k = EndpointFn::separable(P.k.dual_head, P.k.dual_tail);
  return D;
}

SolveResult solve_primal(const BolzaProblem& P, const DiscreteRadonMeasure& u_in,
                         const SolveConfig& cfg, const BVArc* warm_start) {
  P.validate();
  DiscreteRadonMeasure u = checked_u(P, u_in);
  Layout lay = make_layout(P, u);
  PrefixStateOp op(&lay);
  const Grid& g = P.grid();
  std::size_t N = lay.cells(), S = lay.sites.size(), d = g.d;

  PdhgConfig pcfg;
  pcfg.max_iters = cfg.max_iters;
  pcfg.check_every = cfg.check_every;
  pcfg.tol = cfg.tol;

  SolveResult res;
  res.converged = true;
  std::vector<Vec> zs(d);
  for (std::size_t k = 0; k < d; ++k) {
    CoordView view{&lay, &u, k};
    std::vector<SeparableTerm> G, Phi;
    G.reserve(lay.n_vars());
    G.push_back({view.k0(), 1.0, 0.0});
    for (std::size_t i = 0; i < N; ++i) G.push_back({view.psi(i), lay.mass(i), view.u_density(i)});
    for (std::size_t j = 0; j < S; ++j)
      G.push_back({view.psi_rec(lay.sites[j].cell), 1.0, view.u_site(j)});
    Phi.reserve(N + 1);
    for (std::size_t i = 0; i < N; ++i) Phi.push_back({view.phi(i), lay.mass(i), 0.0});
    Phi.push_back({view.kT(), 1.0, 0.0});
    Vec c(lay.n_vars(), 0.0);

    auto score = [&](const Vec& z) {
      Vec r = z;
      if (repair_coord(view, r)) return kInf;
      return coord_objective(view, r);
    };

    Vec warm;
    const Vec* warm_ptr = nullptr;
    if (warm_start) {
      warm.assign(lay.n_vars(), 0.0);
      warm[0] = warm_start->x0[k];
      for (std::size_t i = 0; i < N && i < warm_start->diff.density.size(); ++i)
        warm[1 + i] = warm_start->diff.density[i][k];
      for (const Atom& a : warm_start->diff.atoms) {
        auto it = std::lower_bound(lay.sites.begin(), lay.sites.end(), a.t,
                                   [](const Site& s, double t) { return s.t < t; });
        std::size_t j = it == lay.sites.end() ? S - 1
                                              : static_cast<std::size_t>(it - lay.sites.begin());
        warm[1 + N + j] += a.mass[k];
      }
      warm_ptr = &warm;
    }

    PdhgResult pr = pdhg_minimize(op, G, Phi, c, pcfg, score, warm_ptr);
    res.iterations = std::max(res.iterations, pr.iterations);
    res.converged = res.converged && pr.converged;

    Vec z = pr.best_z;
    auto cert = repair_coord(view, z);
    if (cert) {
      res.infeasible = true;
      if (!res.violation) res.violation = *cert;
    } else {
      consolidate_coord(view, z);
    }
    zs[k] = std::move(z);
  }

  res.x = assemble_arc(lay, zs);
  res.value = primal_objective(P, u, res.x);
  if (res.value == kInf && !res.violation) {
    // locate one violated box for the report
    for (std::size_t k = 0; k < d && !res.violation; ++k) {
      CoordView view{&lay, &u, k};
      for (std::size_t i = 0; i < N; ++i) {
        double state = res.x.eval(g.midpoint(i))[k];
        if (view.phi(i)(state) == kInf) {
          res.violation = InfeasibilityCertificate{
              "state outside dom(phi)", i, static_cast<int>(k),
              Interval{view.phi(i).lo(), view.phi(i).hi()}, state};
          break;
        }
      }
    }
    res.infeasible = true;
  }
  if (res.infeasible) res.converged = false;
  return res;
}

SolveResult solve_dual(const BolzaProblem& P, const DiscreteRadonMeasure& u_in,
                       const SolveConfig& cfg, const ContinuousArc* warm_start) {
  P.validate();
  DiscreteRadonMeasure u = checked_u(P, u_in);
  const Grid& g = P.grid();
  std::size_t N = g.cells(), d = g.d;
  BaseMeasure mu = P.mu;
  DiffOp op(&mu);

  PdhgConfig pcfg;
  pcfg.max_iters = cfg.max_iters;
  pcfg.check_every = cfg.check_every;
  pcfg.tol = cfg.tol;
  // Node costs and slope weights carry cell masses while the difference rows
  // carry their inverses; enlarging tau by the mean inverse mass rebalances
  // the two prox families and keeps iteration counts near linear in N.
  double total_mass = 0.0;
  for (double m : mu.cell_mass) total_mass += m;
  if (total_mass > 0.0) pcfg.step_scale = static_cast<double>(N) / total_mass;

  SolveResult res;
  res.converged = true;
  res.y.grid = g;
  res.y.nodes.assign(N + 1, Vec(d, 0.0));

  for (std::size_t k = 0; k < d; ++k) {
    // Node costs: the trapezoid shares of the two adjacent cells' psi*, plus
    // the dual endpoint terms at the ends.
    std::vector<Plq> node_cost(N + 1);
    bool empty_node = false;
    std::size_t empty_at = 0;
    try {
      for (std::size_t j = 0; j <= N; ++j) {
        empty_at = j;
        Plq t = j == 0 ? P.k.dual_head.coords[k]
                       : P.K.cell(j - 1).psi_star.coords[k].scaled(0.5 * mu.cell_mass[j - 1]);
        if (j > 0 && j < N)
          t = t + P.K.cell(j).psi_star.coords[k].scaled(0.5 * mu.cell_mass[j]);
        if (j == 0) t = t + P.K.cell(0).psi_star.coords[k].scaled(0.5 * mu.cell_mass[0]);
        if (j == N) t = t + P.k.dual_tail.coords[k];
        node_cost[j] = std::move(t);
      }
    } catch (const std::invalid_argument&) {
      empty_node = true;
    }
    if (empty_node) {
      res.infeasible = true;
      res.converged = false;
      res.value = -kInf;
      res.violation = InfeasibilityCertificate{
          "no continuous arc satisfies the adjacent dom(psi*) constraints", empty_at,
          static_cast<int>(k), Interval{1.0, -1.0}, 0.0};
      return res;
    }

    std::vector<SeparableTerm> G, Phi;
    G.reserve(N + 1);
    for (std::size_t j = 0; j <= N; ++j) G.push_back({node_cost[j], 1.0, 0.0});
    Phi.reserve(N);
    for (std::size_t i = 0; i < N; ++i)
      Phi.push_back({P.K.cell(i).phi_star.coords[k], mu.cell_mass[i], 0.0});

    // linear payoff <u, y> in terms of node values
    Vec c(N + 1, 0.0);
    for (std::size_t i = 0; i < N; ++i) {
      double t = 0.5 * mu.cell_mass[i] * u.density[i][k];
      c[i] += t;
      c[i + 1] += t;
    }
    for (const Atom& a : u.atoms) {
      if (a.t >= g.T()) {
        c[N] += a.mass[k];
        continue;
      }
      std::size_t i = g.cell_right_open(a.t);
      double lam = (a.t - g.nodes[i]) / g.cell_length(i);
      c[i] += (1.0 - lam) * a.mass[k];
      c[i + 1] += lam * a.mass[k];
    }

    auto repair = [&](Vec& y) -> std::optional<InfeasibilityCertificate> {
      for (std::size_t j = 0; j <= N; ++j)
        y[j] = clamp_to(y[j], node_cost[j].lo(), node_cost[j].hi());
      for (std::size_t i = 0; i < N; ++i) {
        const Plq& fs = P.K.cell(i).phi_star.coords[k];
        double lo = std::max(y[i] + mu.cell_mass[i] * fs.lo(), node_cost[i + 1].lo());
        double hi = std::min(y[i] + mu.cell_mass[i] * fs.hi(), node_cost[i + 1].hi());
        if (lo > hi)
          return InfeasibilityCertificate{"dual slope range and node domain conflict", i,
                                          static_cast<int>(k), Interval{lo, hi}, y[i + 1]};
        y[i + 1] = clamp_to(y[i + 1], lo, hi);
      }
      return std::nullopt;
    };

    // pdhg minimizes cost - <c, y>; the dual value is the negative
    auto score = [&](const Vec& y) {
      Vec r = y;
      if (repair(r)) return kInf;
      ExtSum cost;
      for (std::size_t j = 0; j <= N; ++j) cost.add(node_cost[j](r[j]));
      for (std::size_t i = 0; i < N; ++i) {
        double v = (r[i + 1] - r[i]) / mu.cell_mass[i];
        double fv = P.K.cell(i).phi_star.coords[k](v);
        cost.add(std::isinf(fv) ? fv : mu.cell_mass[i] * fv);
      }
      double total = cost.value();
      return std::isinf(total) ? total : total - dot(c, r);
    };

    Vec warm;
    const Vec* warm_ptr = nullptr;
    if (warm_start) {
      if (!warm_start->grid.matches(g))
        throw std::invalid_argument("solve_dual: warm start grid mismatch");
      warm.resize(N + 1);
      for (std::size_t j = 0; j <= N; ++j) warm[j] = warm_start->nodes[j][k];
      warm_ptr = &warm;
    }

    PdhgResult pr = pdhg_minimize(op, G, Phi, c, pcfg, score, warm_ptr);
    res.iterations = std::max(res.iterations, pr.iterations);
    res.converged = res.converged && pr.converged;

    Vec y = pr.best_z;
    auto cert = repair(y);
    if (cert) {
      res.infeasible = true;
      if (!res.violation) res.violation = *cert;
    }
    for (std::size_t j = 0; j <= N; ++j) res.y.nodes[j][k] = y[j];
  }

  res.value = dual_objective(P, u, res.y);
  if (res.value == -kInf) res.infeasible = true;
  if (res.infeasible) res.converged = false;
  return res;
}

GapResult duality_gap(const BolzaProblem& P, const DiscreteRadonMeasure& u,
                      const SolveConfig& cfg) {
  GapResult r;
  r.primal = solve_primal(P, u, cfg);
  r.dual = solve_dual(P, u, cfg);
  r.gap = r.primal.value - r.dual.value;
  return r;
}

SweepResult value_sweep(const BolzaProblem& P, const DiscreteRadonMeasure& u1,
                        const Vec& eps_list, const SolveConfig& cfg) {
  SweepResult out;
  Vec eps = eps_list;
  std::sort(eps.begin(), eps.end());
  for (double e : eps) {
    DiscreteRadonMeasure ue = scale_measure(u1, e);
    SolveResult p = solve_primal(P, ue, cfg);
    SolveResult y = solve_dual(P, ue, cfg);
    out.points.push_back({e, p.value, y.value, y.y, p.converged && y.converged});
  }
  for (std::size_t i = 1; i + 1 < out.points.size(); ++i) {
    double e0 = out.points[i - 1].eps, e1 = out.points[i].eps, e2 = out.points[i + 1].eps;
    double v0 = out.points[i - 1].value, v1 = out.points[i].value, v2 = out.points[i + 1].value;
    if (!std::isfinite(v0) || !std::isfinite(v1) || !std::isfinite(v2)) continue;
    double lam = (e2 - e1) / (e2 - e0);
    out.convexity_violation =
        std::max(out.convexity_violation, v1 - (lam * v0 + (1.0 - lam) * v2));
  }
  for (const SweepPoint& a : out.points) {
    if (!std::isfinite(a.value) || a.y.nodes.empty()) continue;
    double g = pair_measure_continuous(u1, a.y);
    for (const SweepPoint& b : out.points) {
      if (!std::isfinite(b.value)) continue;
      out.subgradient_violation =
          std::max(out.subgradient_violation, a.value + (b.eps - a.eps) * g - b.value);
    }
  }
  return out;
}

LinealityResult check_lineality(const BolzaProblem& P, const std::vector<BVArc>& directions) {
  TimeIntegrand Kinf = recession_integrand(P.K);
  BolzaProblem Pinf;
  Pinf.mu = P.mu;
  Pinf.K = std::move(Kinf);
  Pinf.k = EndpointFn::separable(P.k.k0_rec, P.k.kT_rec);

  LinealityResult out;
  for (const BVArc& x : directions) {
    BVArc neg = negate_arc(x);
    LinealityCheck c;
    c.value = primal_objective(Pinf, DiscreteRadonMeasure::zeros(P.mu), x);
    c.value_neg = primal_objective(Pinf, DiscreteRadonMeasure::zeros(P.mu), neg);
    c.in_cone = c.value <= 1e-12;
    c.neg_in_cone = c.value_neg <= 1e-12;
    c.ok = !c.in_cone || c.neg_in_cone;
    out.checks.push_back(c);
    out.verdict = out.verdict && c.ok;
  }
  return out;
}

}  // namespace bolza
