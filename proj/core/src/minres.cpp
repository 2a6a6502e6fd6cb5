#include "tch/minres.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "tch/sparse.hpp"

namespace tch {

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged:
      return "converged";
    case SolveStatus::max_iterations:
      return "max_iterations";
    case SolveStatus::breakdown:
      return "breakdown";
  }
  return "unknown";
}

SolveReport minres(const LinearMap& op, const LinearMap& prec, std::span<const double> b,
                   std::span<double> x, const MinresOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = b.size();
  if (x.size() != n) throw std::invalid_argument("minres: x and b differ in length");

  SolveReport rep;
  if (!opt.use_initial_guess) std::fill(x.begin(), x.end(), 0.0);

  const auto finish = [&](SolveReport& r) -> SolveReport& {
    if (opt.compute_true_residual) {
      std::vector<double> ax(n);
      op(x, ax);
      double rr = 0.0;
      for (std::size_t i = 0; i < n; ++i) rr += (b[i] - ax[i]) * (b[i] - ax[i]);
      const double bn = norm2(b);
      r.true_residual = bn > 0.0 ? std::sqrt(rr) / bn : std::sqrt(rr);
    }
    r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
  };

  std::vector<double> r1(b.begin(), b.end());
  std::vector<double> y(n);
  // Preconditioned norm of b, the reference for the stopping test.
  double bnorm_p = 0.0;
  if (opt.use_initial_guess) {
    prec(r1, y);
    bnorm_p = dot(r1, y);
    op(x, y);
    for (std::size_t i = 0; i < n; ++i) r1[i] -= y[i];
  }
  std::vector<double> r2 = r1;
  prec(r1, y);
  double beta1 = dot(r1, y);
  if (!opt.use_initial_guess) bnorm_p = beta1;
  if (!std::isfinite(beta1) || beta1 < 0.0 || !std::isfinite(bnorm_p) || bnorm_p < 0.0) {
    rep.history.push_back(1.0);
    rep.status = SolveStatus::breakdown;
    rep.converged = false;
    rep.residual_norm = std::numeric_limits<double>::quiet_NaN();
    return finish(rep);
  }
  bnorm_p = std::sqrt(bnorm_p);
  beta1 = std::sqrt(beta1);
  if (bnorm_p == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    rep.history.push_back(1.0);
    rep.residual_norm = 0.0;
    rep.converged = true;
    return finish(rep);
  }
  rep.residual_norm = beta1 / bnorm_p;
  rep.history.push_back(rep.residual_norm);
  if (beta1 == 0.0 || rep.residual_norm <= opt.tol) {
    rep.converged = true;
    return finish(rep);
  }

  std::vector<double> v(n), w(n, 0.0), w1(n), w2(n, 0.0);
  double oldb = 0.0;
  double beta = beta1;
  double dbar = 0.0;
  double epsln = 0.0;
  double phibar = beta1;
  double cs = -1.0;
  double sn = 0.0;

  if (opt.lanczos != nullptr) {
    *opt.lanczos = {};
    opt.lanczos->beta.push_back(beta1);
  }

  rep.status = SolveStatus::max_iterations;
  for (int itn = 1; itn <= opt.max_iterations; ++itn) {
    const double s = 1.0 / beta;
    for (std::size_t i = 0; i < n; ++i) v[i] = s * y[i];
    if (opt.lanczos != nullptr) {
      std::vector<double> q(n);
      for (std::size_t i = 0; i < n; ++i) q[i] = s * r2[i];
      opt.lanczos->q.push_back(std::move(q));
      opt.lanczos->v.push_back(v);
    }
    op(v, y);
    if (itn >= 2) axpy(-beta / oldb, r1, y);
    const double alfa = dot(v, y);
    axpy(-alfa / beta, r2, y);
    r1.swap(r2);
    r2 = y;
    prec(r2, y);
    oldb = beta;
    double beta_sq = dot(r2, y);
    if (!std::isfinite(beta_sq) || beta_sq < 0.0) {
      rep.iterations = itn;
      rep.status = SolveStatus::breakdown;
      break;
    }
    beta = std::sqrt(beta_sq);
    if (opt.lanczos != nullptr) {
      opt.lanczos->alpha.push_back(alfa);
      opt.lanczos->beta.push_back(beta);
    }

    const double oldeps = epsln;
    const double delta = cs * dbar + sn * alfa;
    const double gbar = sn * dbar - cs * alfa;
    epsln = sn * beta;
    dbar = -cs * beta;
    const double gamma = std::hypot(gbar, beta);
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
      rep.iterations = itn;
      rep.status = SolveStatus::breakdown;
      break;
    }
    cs = gbar / gamma;
    sn = beta / gamma;
    const double phi = cs * phibar;
    phibar = sn * phibar;

    w1.swap(w2);
    w2.swap(w);
    const double ginv = 1.0 / gamma;
    for (std::size_t i = 0; i < n; ++i) {
      w[i] = (v[i] - oldeps * w1[i] - delta * w2[i]) * ginv;
      x[i] += phi * w[i];
    }

    rep.iterations = itn;
    rep.residual_norm = phibar / bnorm_p;
    rep.history.push_back(rep.residual_norm);
    if (!std::isfinite(rep.residual_norm)) {
      rep.status = SolveStatus::breakdown;
      break;
    }
    if (rep.residual_norm <= opt.tol) {
      rep.status = SolveStatus::converged;
      break;
    }
    if (beta == 0.0) {
      // Invariant Krylov space without reaching the tolerance: the
      // tridiagonal system is exhausted.
      rep.status = SolveStatus::breakdown;
      break;
    }
  }
  rep.converged = rep.status == SolveStatus::converged;
  return finish(rep);
}

}  // namespace tch
