#include "bolza/convex_fn.hpp"

#include <algorithm>
#include <stdexcept>

namespace bolza {

Box normal_cone_box(const Box& box, const Vec& z, double snap) {
  if (z.size() != box.dim())
    throw std::invalid_argument("normal_cone_box: dimension mismatch");
  Box cone;
  cone.coords.reserve(box.dim());
  for (std::size_t i = 0; i < box.dim(); ++i) {
    const Interval& c = box.coords[i];
    double zi = z[i];
    if (zi < c.lo - snap || zi > c.hi + snap)
      throw std::domain_error("normal_cone_box: point outside the box in coordinate " +
                              std::to_string(i));
    bool at_lo = c.lo > -kInf && zi <= c.lo + snap;
    bool at_hi = c.hi < kInf && zi >= c.hi - snap;
    if (at_lo && at_hi) {
      cone.coords.push_back(Interval::all());
    } else if (at_hi) {
      cone.coords.push_back({0.0, kInf});
    } else if (at_lo) {
      cone.coords.push_back({-kInf, 0.0});
    } else {
      cone.coords.push_back(Interval::point(0.0));
    }
  }
  return cone;
}

Vec llt_conjugate(const Vec& grid, const Vec& values, const Vec& dual_grid) {
  if (grid.size() != values.size())
    throw std::invalid_argument("llt_conjugate: grid/value length mismatch");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i - 1] < grid[i]))
      throw std::invalid_argument("llt_conjugate: grid not strictly increasing");

  // Lower convex hull of the finite samples (Andrew scan). Only hull vertices
  // can attain the discrete maximum of w*z - f.
  std::vector<std::size_t> hull;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (values[i] == kInf) continue;
    if (!std::isfinite(values[i]))
      throw std::invalid_argument("llt_conjugate: values must be finite or +inf");
    while (hull.size() >= 2) {
      std::size_t a = hull[hull.size() - 2], b = hull.back();
      double cross = (grid[b] - grid[a]) * (values[i] - values[a]) -
                     (grid[i] - grid[a]) * (values[b] - values[a]);
      if (cross <= 0.0)
        hull.pop_back();  // b lies on or above the chord a--i
      else
        break;
    }
    hull.push_back(i);
  }
  if (hull.empty()) throw std::invalid_argument("llt_conjugate: all samples are +inf");

  Vec out(dual_grid.size());
  std::size_t h = 0;
  for (std::size_t j = 0; j < dual_grid.size(); ++j) {
    if (j > 0 && dual_grid[j] < dual_grid[j - 1])
      throw std::invalid_argument("llt_conjugate: dual grid not sorted");
    double w = dual_grid[j];
    // Advance while the next hull edge has slope below w.
    while (h + 1 < hull.size()) {
      std::size_t a = hull[h], b = hull[h + 1];
      if (values[b] - values[a] <= w * (grid[b] - grid[a]))
        ++h;
      else
        break;
    }
    // The edge test above is exact in real arithmetic; take the max over the
    // bracketing vertices and their neighbours to absorb roundoff ties.
    double best = -kInf;
    std::size_t from = (h > 0) ? h - 1 : 0;
    std::size_t to = std::min(h + 1, hull.size() - 1);
    for (std::size_t k = from; k <= to; ++k) {
      std::size_t i = hull[k];
      best = std::max(best, w * grid[i] - values[i]);
    }
    out[j] = best;
  }
  return out;
}

std::vector<Vec> llt_conjugate2(const SampledConvex& f, const Vec& dual_grid1,
                                const Vec& dual_grid2) {
  if (!f.is_2d()) throw std::invalid_argument("llt_conjugate2: input is not 2-d");
  const std::size_t n1 = f.grid1.size();
  // Inner pass in z2 for every z1 row: G[r][j] = max_{z2} (w2*z2 - f(z1_r, z2)).
  std::vector<Vec> inner(n1);
  std::vector<bool> row_ok(n1, false);
  for (std::size_t r = 0; r < n1; ++r) {
    bool any = false;
    for (double v : f.values2[r]) any = any || v < kInf;
    if (!any) continue;
    inner[r] = llt_conjugate(f.grid2, f.values2[r], dual_grid2);
    row_ok[r] = true;
  }
  // Outer pass in z1 for every w2 column.
  std::vector<Vec> out(dual_grid1.size(), Vec(dual_grid2.size()));
  Vec column(n1);
  for (std::size_t j = 0; j < dual_grid2.size(); ++j) {
    for (std::size_t r = 0; r < n1; ++r)
      column[r] = row_ok[r] ? -inner[r][j] : kInf;
    Vec g = llt_conjugate(f.grid1, column, dual_grid1);
    for (std::size_t i = 0; i < dual_grid1.size(); ++i) out[i][j] = g[i];
  }
  return out;
}

double hamiltonian_value(const ConvexFn& phi, const ConvexFn& psi_star, const Vec& x,
                         const Vec& y) {
  double ps = psi_star(y);
  if (ps == kInf) return -kInf;
  double ph = phi(x);
  if (ph == kInf) return kInf;
  return ph - ps;
}

DualIntegrandParts dual_integrand(const ConvexFn& phi, const ConvexFn& psi) {
  return {phi.conjugate(), psi.conjugate()};
}

DualEndpointParts dual_endpoint(const ConvexFn& k0, const ConvexFn& kT) {
  return {k0.conjugate(), kT.conjugate().reflected()};
}

}  // namespace bolza
