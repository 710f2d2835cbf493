#include "bolza/pdhg.hpp"

#include <cmath>
#include <stdexcept>

namespace bolza {

namespace {

// prox of step * term at q, exact.
double term_prox(const SeparableTerm& t, double q, double step) {
  return t.f.prox(q + t.shift, step * t.weight) - t.shift;
}

}  // namespace

PdhgResult pdhg_minimize(const LinearOp& L, const std::vector<SeparableTerm>& G,
                         const std::vector<SeparableTerm>& Phi, const Vec& c,
                         const PdhgConfig& cfg,
                         const std::function<double(const Vec&)>& score,
                         const Vec* warm_start) {
  std::size_t n = L.cols(), m = L.rows();
  if (G.size() != n || Phi.size() != m || c.size() != n)
    throw std::invalid_argument("pdhg_minimize: term count mismatch");
  if (!(cfg.relaxation > 0.0 && cfg.relaxation < 2.0))
    throw std::invalid_argument("pdhg_minimize: relaxation must lie in (0, 2)");

  // Pock-Chambolle diagonal steps: tau_j = 1/sum_i |L_ij|, sigma_i = 1/sum_j |L_ij|.
  // A common rescaling tau *= beta, sigma /= beta keeps the step condition.
  if (!(cfg.step_scale > 0.0))
    throw std::invalid_argument("pdhg_minimize: step_scale must be positive");
  Vec tau = L.col_abs_sums(), sigma = L.row_abs_sums();
  for (double& t : tau) t = (t > 0.0 ? 1.0 / t : 1.0) * cfg.step_scale;
  for (double& s : sigma) s = (s > 0.0 ? 1.0 / s : 1.0) / cfg.step_scale;

  Vec z(n, 0.0), lam(m, 0.0);
  if (warm_start) {
    if (warm_start->size() != n)
      throw std::invalid_argument("pdhg_minimize: warm start size mismatch");
    z = *warm_start;
  }
  // Start inside dom G so that scores are meaningful from the first checkpoint.
  for (std::size_t j = 0; j < n; ++j) z[j] = term_prox(G[j], z[j], tau[j]);

  Vec zc = z, lamc = lam;  // previous checkpoint
  Vec znew(n), zbar(n), adj(n), img(m), lamnew(m);

  PdhgResult res;
  res.best_z = z;
  if (score) res.best_score = score(z);

  for (std::size_t k = 1; k <= cfg.max_iters; ++k) {
    L.apply_adjoint(lam, adj);
    for (std::size_t j = 0; j < n; ++j)
      znew[j] = term_prox(G[j], z[j] - tau[j] * (adj[j] - c[j]), tau[j]);
    for (std::size_t j = 0; j < n; ++j) zbar[j] = 2.0 * znew[j] - z[j];
    L.apply(zbar, img);
    for (std::size_t i = 0; i < m; ++i) {
      double xi = lam[i] + sigma[i] * img[i];
      // Moreau: prox of sigma * Phi* from the prox of Phi / sigma.
      lamnew[i] = xi - sigma[i] * term_prox(Phi[i], xi / sigma[i], 1.0 / sigma[i]);
    }
    double rho = cfg.relaxation;
    for (std::size_t j = 0; j < n; ++j) z[j] += rho * (znew[j] - z[j]);
    for (std::size_t i = 0; i < m; ++i) lam[i] += rho * (lamnew[i] - lam[i]);

    if (k % cfg.check_every == 0 || k == cfg.max_iters) {
      res.iterations = k;
      if (score) {
        double v = score(z);
        if (v < res.best_score) {
          res.best_score = v;
          res.best_z = z;
        }
      }
      // Stationarity measured by checkpoint-to-checkpoint movement of both
      // iterates, scaled by the step sizes.
      double move = 0.0;
      for (std::size_t j = 0; j < n; ++j)
        move = std::max(move, std::abs(z[j] - zc[j]) / (1.0 + std::abs(z[j])));
      for (std::size_t i = 0; i < m; ++i)
        move = std::max(move, std::abs(lam[i] - lamc[i]) / (1.0 + std::abs(lam[i])));
      zc = z;
      lamc = lam;
      if (move <= cfg.tol) {
        res.converged = true;
        break;
      }
    }
  }

  // Final prox pass keeps the reported iterate inside dom G exactly.
  L.apply_adjoint(lam, adj);
  for (std::size_t j = 0; j < n; ++j)
    z[j] = term_prox(G[j], z[j] - tau[j] * (adj[j] - c[j]), tau[j]);
  res.z = z;
  if (score) {
    double v = score(z);
    if (v < res.best_score) {
      res.best_score = v;
      res.best_z = z;
    }
  } else {
    res.best_z = z;
  }
  return res;
}

}  // namespace bolza
