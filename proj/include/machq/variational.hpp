#pragma once

// Euler-Lagrange residuals of the density-weighted action and recovery of
// the density exponent.
//
// For a family in rho mode the residual field is
//
//   rho dQ/drho - d_mu( rho dQ/d(d_mu rho) ) + box( rho dQ/d(box rho) )
//
// with the pointwise partials supplied by the slot form and the outer
// derivatives taken by the grid operators; in R mode the weight rho is
// replaced by R^2.  For the (m=-1, n=0, p=1) family the residual collapses
// to -C r (2r-1) box(rho)/rho, so r = 1/2 is the unique nonzero root; for
// (m=-2, n=0, p=2) in R mode it equals (-2C/R) [(box R)^2 - R box^2 R].
//
// The outer box term is assembled even for families where it is constant,
// so the implementation stays family-generic.
//
// Sign note: static test fields use box = -lap, so residuals carry the
// opposite sign from the Euclidean convention.

#include <array>
#include <string>
#include <vector>

#include "machq/ansatz.hpp"
#include "machq/grid.hpp"

namespace machq {

struct ELReport {
  ScalarField residual;
  double l2 = 0.0;   // cell-volume weighted
  double linf = 0.0;
  ExponentFamily family;
  std::array<double, kMaxRank> grid_spacing{};
};

ELReport el_residual_rho(const ExponentFamily& fam, const ScalarField& rho);
ELReport el_residual_R(const ExponentFamily& fam, const ScalarField& R);

// JSON text {family, l2, linf, grid} for machine-readable reports.
std::string el_report_json(const ELReport& report);

struct ExponentSolve {
  double r_hat = 0.0;
  double objective = 0.0; // sum over fields of l2(residual)^2 at r_hat
  bool converged = false; // false when the minimizer sits on the search boundary
  int evaluations = 0;
};

// Minimizes sum_fields l2(el_residual_rho(family(r), field))^2 over r by
// golden-section search down to `tol` interval width.  The search interval
// must exclude zero.  A minimizer within 10*tol of either endpoint is
// reported as non-converged.
ExponentSolve solve_exponent_r(const ExponentFamily& family_template,
                               const std::vector<ScalarField>& test_fields,
                               double r_lo, double r_hi, double tol = 1e-8);

// Hamilton-Jacobi bracket  dS.dS - m0^2 - Qfrak.  On grids without a time
// axis, `energy` supplies the folded-in d_t S so dS.dS = E^2 - |grad S|^2.
ScalarField hj_residual(const ScalarField& S, const ScalarField& rho,
                        const ExponentFamily& fam, double m0, double energy = 0.0);

// Same bracket with a precomputed dimensionless Q field (Qfrak = m0^2 Q).
ScalarField hj_residual_with_q(const ScalarField& S, const ScalarField& q,
                               double m0, double energy = 0.0);

} // namespace machq
