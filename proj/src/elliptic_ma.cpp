#include "sglab/elliptic_ma.hpp"

#include <algorithm>
#include <cmath>

#include "sglab/errors.hpp"

namespace sglab {

ScalarField hessian_det(const Hessian& h) {
  auto prod = multiply(h.xx, h.yy) - multiply(h.xy, h.xy);
  return dealias(prod);
}

ScalarField hessian_det(const ScalarField& psi) { return hessian_det(hessian(psi)); }

ScalarField cofactor_contraction(const Hessian& a, const Hessian& b) {
  auto sum = multiply(a.yy, b.xx) + multiply(a.xx, b.yy);
  sum = axpy(sum, -2.0, multiply(a.xy, b.xy));
  return dealias(sum);
}

double det_expansion_residual(const ScalarField& phi, const ScalarField& eta, double eps) {
  const Hessian hp = hessian(phi);
  const Hessian he = hessian(eta);
  const Hessian hsum{axpy(hp.xx, eps, he.xx), axpy(hp.xy, eps, he.xy), axpy(hp.yy, eps, he.yy)};
  auto lhs = hessian_det(hsum);
  auto rhs = axpy(axpy(hessian_det(hp), eps, cofactor_contraction(hp, he)), eps * eps,
                  hessian_det(he));
  return norm(lhs - rhs, NormKind::L2());
}

namespace {

double h1_seminorm(const ScalarField& f) {
  return std::sqrt(spectral_weighted_sq(f, [](double k) { return k * k; }));
}

}  // namespace

MASolution solve_sg_potential(const ScalarField& rho, double eps, double tol, int max_iter) {
  if (eps < 0.0) throw PreconditionError("epsilon must be nonnegative");
  MASolution out{inv_laplacian(rho), {}};
  Hessian h = hessian(out.psi);
  out.report.hessian_linf = hessian_linf(h);
  if (eps == 0.0) {
    out.report.iterations = 1;
    out.report.converged = true;
    out.report.residual = norm(laplacian(out.psi) - rho, NormKind::L2());
    return out;
  }
  ScalarField det = hessian_det(h);
  double update = 0.0;
  for (int k = 1; k <= max_iter; ++k) {
    ScalarField next = inv_laplacian(axpy(rho, -eps, det));
    const double diff = h1_seminorm(next - out.psi);
    update = diff / std::max(h1_seminorm(next), 1e-14);
    out.psi = next;
    h = hessian(out.psi);
    out.report.hessian_linf = hessian_linf(h);
    out.report.updates.push_back(update);
    out.report.iterations = k;
    det = hessian_det(h);
    if (update <= tol) {
      out.report.converged = true;
      out.report.residual = norm(axpy(laplacian(out.psi) - rho, eps, det), NormKind::L2());
      return out;
    }
    // A reached fixed point is accepted whatever its Hessian size (rank-one
    // profiles have det = 0 and converge at once); only a still-moving
    // iterate outside the contractive regime is declared divergent.
    if (eps * out.report.hessian_linf > 0.5) {
      throw DivergenceError(k, eps * out.report.hessian_linf);
    }
  }
  throw NonConvergenceError(max_iter, update);
}

ScalarField solve_corrector_potential(const ScalarField& rho1, const ScalarField& phibar) {
  return inv_laplacian(rho1 - hessian_det(phibar));
}

ScalarField elliptic_consistency_defect(const ScalarField& rhobar, const ScalarField& phibar,
                                        const ScalarField& rho1, const ScalarField& phi1,
                                        double eps) {
  const ScalarField psi = axpy(phibar, eps, phi1);
  const ScalarField rho = axpy(rhobar, eps, rho1);
  return axpy(laplacian(psi) - rho, eps, hessian_det(psi));
}

ScalarField elliptic_consistency_closed_form(const ScalarField& phibar, const ScalarField& phi1,
                                             double eps) {
  const Hessian hb = hessian(phibar);
  const Hessian h1 = hessian(phi1);
  return axpy(eps * eps * cofactor_contraction(hb, h1), eps * eps * eps, hessian_det(h1));
}

BootstrapStatus bootstrap_status(const ScalarField& rho, const ScalarField& psi, double eps,
                                 double alpha, double m0) {
  if (!(m0 > 0.0)) throw PreconditionError("M0 must be positive");
  BootstrapStatus s;
  const double hess = hessian_linf(hessian(psi));
  s.grad_margin = 0.25 - eps * norm(rho, NormKind::GradLinf());
  s.hessian_margin = 0.25 - eps * hess;
  const double calpha = norm(rho, NormKind::Calpha(alpha));
  const double logp = std::max(0.0, std::log(calpha / m0));
  s.log_estimate_ratio = hess / (m0 * (1.0 + logp));
  s.inside = s.grad_margin > 0.0 && s.hessian_margin > 0.0;
  return s;
}

}  // namespace sglab
