#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "bolza/extended.hpp"
#include "bolza/plq.hpp"

namespace bolza {

// Linear operator with the absolute row/column sums needed for diagonal step
// preconditioning.
struct LinearOp {
  virtual ~LinearOp() = default;
  virtual std::size_t rows() const = 0;
  virtual std::size_t cols() const = 0;
  virtual void apply(const Vec& z, Vec& out) const = 0;           // out = L z
  virtual void apply_adjoint(const Vec& lam, Vec& out) const = 0; // out = L' lam
  virtual Vec row_abs_sums() const = 0;
  virtual Vec col_abs_sums() const = 0;
};

// One separable term weight * f(argument + shift); G has one per variable,
// Phi one per operator row.
struct SeparableTerm {
  Plq f;
  double weight = 1.0;
  double shift = 0.0;
};

struct PdhgConfig {
  std::size_t max_iters = 20000;
  std::size_t check_every = 100;
  double tol = 1e-9;
  double relaxation = 1.8;   // in (0, 2)
  double step_scale = 1.0;   // multiplies every tau, divides every sigma
};

struct PdhgResult {
  Vec z;            // last iterate
  Vec best_z;       // checkpoint iterate with the best score (= z without a score)
  double best_score = kInf;
  std::size_t iterations = 0;
  bool converged = false;
};

// Diagonally preconditioned primal-dual (Chambolle-Pock) iteration for
//   minimize  sum_j G_j(z_j)  -  c.z  +  sum_i Phi_i((Lz)_i)
// with all proximal maps exact via the piecewise linear-quadratic calculus.
// `score`, when given, is an exact objective evaluator sampled at checkpoints;
// the best-scored iterate is kept.
PdhgResult pdhg_minimize(const LinearOp& L, const std::vector<SeparableTerm>& G,
                         const std::vector<SeparableTerm>& Phi, const Vec& c,
                         const PdhgConfig& cfg,
                         const std::function<double(const Vec&)>& score = {},
                         const Vec* warm_start = nullptr);

}  // namespace bolza
