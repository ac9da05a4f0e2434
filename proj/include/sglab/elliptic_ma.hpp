#pragma once

// Poisson equation with a quadratic Monge-Ampere correction,
//   Lap psi = rho - eps det D^2 psi,
// solved by Picard iteration, plus the determinant algebra around it.

#include <vector>

#include "sglab/torus_spectral.hpp"

namespace sglab {

// Dealiased psi_xx psi_yy - psi_xy^2.
ScalarField hessian_det(const ScalarField& psi);
ScalarField hessian_det(const Hessian& h);

// Dealiased (cof A) : B = A_yy B_xx - 2 A_xy B_xy + A_xx B_yy.
ScalarField cofactor_contraction(const Hessian& a, const Hessian& b);

// L2 norm of det D^2(phi + eps eta) - [det D^2 phi + eps (cof D^2 phi):D^2 eta
// + eps^2 det D^2 eta].
double det_expansion_residual(const ScalarField& phi, const ScalarField& eta, double eps);

struct MASolveReport {
  int iterations = 0;
  double residual = 0.0;      // ||Lap psi - rho + eps det D^2 psi||_L2
  double hessian_linf = 0.0;  // ||D^2 psi||_Linf
  bool converged = false;
  std::vector<double> updates;  // relative H1 update per iteration
};

struct MASolution {
  ScalarField psi;
  MASolveReport report;
};

inline constexpr double kDefaultMaTolerance = 1e-12;
inline constexpr int kDefaultMaMaxIter = 100;

// psi^{k+1} = Lap^{-1}(rho - eps det D^2 psi^k), psi^0 = Lap^{-1} rho, until
// the relative H1 update drops to tol. Throws DivergenceError as soon as an
// unconverged iterate has eps ||D^2 psi^k||_Linf > 1/2 and
// NonConvergenceError after max_iter updates.
MASolution solve_sg_potential(const ScalarField& rho, double eps,
                              double tol = kDefaultMaTolerance,
                              int max_iter = kDefaultMaMaxIter);

// phi_1 = Lap^{-1}(rho_1 - det D^2 phibar)
ScalarField solve_corrector_potential(const ScalarField& rho1, const ScalarField& phibar);

// Elliptic defect of the first-order expansion psi~ = phibar + eps phi1,
// rho~ = rhobar + eps rho1: Lap psi~ - rho~ + eps det D^2 psi~.
ScalarField elliptic_consistency_defect(const ScalarField& rhobar, const ScalarField& phibar,
                                        const ScalarField& rho1, const ScalarField& phi1,
                                        double eps);
// Closed form of the same defect when phibar and phi1 solve their equations:
// eps^2 (cof D^2 phibar):D^2 phi1 + eps^3 det D^2 phi1.
ScalarField elliptic_consistency_closed_form(const ScalarField& phibar, const ScalarField& phi1,
                                             double eps);

struct BootstrapStatus {
  double grad_margin = 0.0;     // 1/4 - eps ||grad rho||_Linf
  double hessian_margin = 0.0;  // 1/4 - eps ||D^2 psi||_Linf
  double log_estimate_ratio = 0.0;
  bool inside = false;
};

// log_estimate_ratio = ||D^2 psi||_Linf / [m0 (1 + log+(||rho||_Calpha / m0))].
// Throws PreconditionError unless m0 > 0.
BootstrapStatus bootstrap_status(const ScalarField& rho, const ScalarField& psi, double eps,
                                 double alpha, double m0);

}  // namespace sglab
