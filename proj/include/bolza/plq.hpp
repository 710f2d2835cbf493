#pragma once

#include <optional>
#include <vector>

#include "bolza/extended.hpp"

namespace bolza {

// Piecewise linear-quadratic convex function of one variable.
//
// The function equals a*z^2 + p*z + q (a >= 0) on each piece, is +inf outside
// the domain [lo, hi], and is closed: the value at a finite domain endpoint
// is the one-sided limit of the adjacent piece. Breakpoints lie strictly
// inside the domain and carry no stored values of their own; convexity forces
// continuity across them, which from_parts() validates.
//
// The class is closed under the transforms used throughout the library:
//
//   conjugate()            Legendre-Fenchel transform, exact
//   recession()            horizon function, exact
//   precompose_affine()    f(alpha*z + beta), alpha != 0
//   scaled()               c*f, c > 0
//   prox()                 argmin_w f(w) + (w-z)^2 / (2*step), exact
//
class Plq {
 public:
  struct Piece {
    double a = 0.0;  // quadratic coefficient, >= 0
    double p = 0.0;  // slope
    double q = 0.0;  // offset
    double eval(double z) const { return (a * z + p) * z + q; }
    double slope(double z) const { return 2.0 * a * z + p; }
  };

  // The zero function on the whole line.
  Plq() : pieces_(1) {}

  static Plq zero() { return Plq(); }
  static Plq linear(double p, double q = 0.0);
  static Plq quadratic(double a, double p = 0.0, double q = 0.0);
  static Plq abs_value(double scale = 1.0);
  static Plq indicator(double lo, double hi);
  static Plq point(double z0, double value = 0.0);
  // General constructor; validates convexity, continuity and properness.
  static Plq from_parts(double lo, double hi, std::vector<double> breaks,
                        std::vector<Piece> pieces);

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  const std::vector<double>& breaks() const { return breaks_; }
  const std::vector<Piece>& pieces() const { return pieces_; }
  bool is_point_domain() const { return lo_ == hi_; }

  // Function value; +inf outside the domain.
  double operator()(double z) const;

  // One-sided slopes inside the domain (finite); at a breakpoint they differ.
  double slope_left(double z) const;
  double slope_right(double z) const;

  // Slope of the function towards +inf / -inf (inf when superlinear or when
  // the domain is bounded on that side).
  double asymptotic_slope_pos() const;
  double asymptotic_slope_neg() const;

  // Subdifferential as a closed interval, with -inf/+inf ends at domain
  // endpoints. Empty (nullopt) outside the domain. Points within `snap` of a
  // breakpoint or domain endpoint are treated as sitting on it.
  std::optional<Interval> subdifferential(double z, double snap = 0.0) const;

  Plq conjugate() const;
  Plq recession() const;

  // argmin_w f(w) + (w - z)^2 / (2*step); exact, unique (step > 0).
  double prox(double z, double step) const;

  // g(z) = f(alpha*z + beta) with alpha != 0.
  Plq precompose_affine(double alpha, double beta) const;
  // c*f with c > 0.
  Plq scaled(double c) const;
  // f(-z).
  Plq reflected() const { return precompose_affine(-1.0, 0.0); }

  // Merge representation-level artifacts: collinear neighbouring pieces,
  // breakpoints outside the domain, point domains.
  void canonicalize(double tol = 1e-12);

  // Structural comparison after canonicalization, tolerant to roundoff.
  bool approx_equal(const Plq& other, double tol = 1e-9) const;

 private:
  std::size_t piece_index_right(double z) const;  // piece governing [z, z+eps)
  std::size_t piece_index_left(double z) const;   // piece governing (z-eps, z]
  void validate() const;

  double lo_ = -kInf;
  double hi_ = kInf;
  std::vector<double> breaks_;
  std::vector<Piece> pieces_;  // breaks_.size() + 1 entries
};

// Pointwise sum; domain is the intersection (throws when empty).
Plq operator+(const Plq& f, const Plq& g);

}  // namespace bolza
