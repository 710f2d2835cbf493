#pragma once

#include <vector>

#include "bolza/extended.hpp"
#include "bolza/plq.hpp"

namespace bolza {

// Convex function on R^d stored as a sum of one coordinate term per axis:
// f(x) = sum_i f_i(x_i). Conjugation, recession, subdifferentials and
// proximal maps all factor through the coordinate terms.
struct ConvexFn {
  std::vector<Plq> coords;

  ConvexFn() = default;
  explicit ConvexFn(std::vector<Plq> c) : coords(std::move(c)) {}
  static ConvexFn zeros(std::size_t d) { return ConvexFn(std::vector<Plq>(d)); }

  std::size_t dim() const { return coords.size(); }

  double operator()(const Vec& x) const {
    ExtSum s;
    for (std::size_t i = 0; i < coords.size(); ++i) s.add(coords[i](x[i]));
    return s.value();
  }

  ConvexFn conjugate() const {
    ConvexFn g;
    g.coords.reserve(coords.size());
    for (const Plq& f : coords) g.coords.push_back(f.conjugate());
    return g;
  }

  ConvexFn recession() const {
    ConvexFn g;
    g.coords.reserve(coords.size());
    for (const Plq& f : coords) g.coords.push_back(f.recession());
    return g;
  }

  ConvexFn reflected() const {
    ConvexFn g;
    g.coords.reserve(coords.size());
    for (const Plq& f : coords) g.coords.push_back(f.reflected());
    return g;
  }

  Box domain() const {
    Box b;
    b.coords.reserve(coords.size());
    for (const Plq& f : coords) b.coords.push_back({f.lo(), f.hi()});
    return b;
  }

  // Per-coordinate subdifferential box at x; nullopt when empty (x outside
  // the domain beyond `snap`).
  std::optional<Box> subdifferential(const Vec& x, double snap = 0.0) const {
    Box b;
    b.coords.reserve(coords.size());
    for (std::size_t i = 0; i < coords.size(); ++i) {
      auto iv = coords[i].subdifferential(x[i], snap);
      if (!iv) return std::nullopt;
      b.coords.push_back(*iv);
    }
    return b;
  }
};

// Normal cone of a box at a point of it, as a box of cone coordinates:
// {0} strictly inside, [0,inf) at a right endpoint, (-inf,0] at a left
// endpoint, the whole line where the box coordinate is a single point.
// Points within `snap` of an endpoint are treated as sitting on it; a point
// outside the box beyond `snap` is an error.
Box normal_cone_box(const Box& box, const Vec& z, double snap = 0.0);

// Values of a convex function sampled on a uniform grid; +inf entries mark
// points outside the domain. The 2-d variant stores values row-major with
// z1 varying over rows.
struct SampledConvex {
  Vec grid1;             // sample abscissae, strictly increasing
  Vec values;            // same length as grid1 (1-d case)
  Vec grid2;             // empty in the 1-d case
  std::vector<Vec> values2;  // grid1.size() rows of grid2.size() values

  bool is_2d() const { return !grid2.empty(); }
};

// Discrete Legendre transform: g(w) = max_i (w*z_i - f_i) for each w of
// `dual_grid` (sorted ascending), in O(n + m) via the monotone-slope merge
// over the lower convex hull of the samples. Produces the same doubles as the
// quadratic-cost double loop. Throws when every sample is +inf.
Vec llt_conjugate(const Vec& grid, const Vec& values, const Vec& dual_grid);

// 2-d discrete Legendre transform, factored into two 1-d passes.
std::vector<Vec> llt_conjugate2(const SampledConvex& f, const Vec& dual_grid1,
                                const Vec& dual_grid2);

// Hamiltonian of the separable integrand K(x,u) = phi(x) + psi(u):
//   H(x,y) = phi(x) - psi*(y),
// evaluated with the conventions H = -inf whenever psi*(y) = +inf, and
// H = +inf when phi(x) = +inf while psi*(y) is finite. `psi_star` must be the
// conjugate of psi.
double hamiltonian_value(const ConvexFn& phi, const ConvexFn& psi_star, const Vec& x,
                         const Vec& y);

// Integrand of the dual problem: K~(y,v) = K*(v,y) swaps the roles of the two
// blocks, so the dual running cost is phi*(v) + psi*(y).
struct DualIntegrandParts {
  ConvexFn phi_star;  // acts on the dual slope v
  ConvexFn psi_star;  // acts on the dual state y
};
DualIntegrandParts dual_integrand(const ConvexFn& phi, const ConvexFn& psi);

// Endpoint cost of the dual problem: k~(a~, b~) = k0*(a~) + kT*(-b~).
struct DualEndpointParts {
  ConvexFn head;  // k0*
  ConvexFn tail;  // kT*(-.)
};
DualEndpointParts dual_endpoint(const ConvexFn& k0, const ConvexFn& kT);

}  // namespace bolza
