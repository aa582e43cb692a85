#pragma once

// Quantum potential and effective-mass fields.
//
// Conventions (natural units, c = 1, signature (+,-,-,-)):
//   Q      = (C/m0^2) box(sqrt rho) / sqrt rho        dimensionless
//   Qfrak  = m0^2 Q = C box(sqrt rho) / sqrt rho
//   Q_nr   = -(hbar^2 / 2 m0) lap(sqrt rho) / sqrt rho  energy-valued
// The coupling C defaults to hbar^2, which makes Q the standard Bohmian
// quantum potential; it stays a free parameter because nothing in the
// construction fixes it.
//
// Effective masses:
//   M^2 linear      = m0^2 (1 + Q)
//   M^2 quadratic   = m0^2 (1 + Q + (hbar^4 / 2 m0^4) box^2(sqrt rho)/sqrt rho)
//   M^2 exponential = m0^2 exp(Q)
//   M_nr            = alpha exp(2 Q_nr / m0)
//
// Nodes: where rho < eps = 1e-12 * max(rho), rho is lifted to eps and the
// node index is reported alongside the result; rho <= 0 anywhere is a
// domain error.  Non-positive linear/quadratic M^2 is reported, never
// clamped: it signals Q outside the small-correction regime rather than a
// numerical failure.

#include <cstddef>
#include <vector>

#include "machq/grid.hpp"

namespace machq {

enum class MassOrder { linear, quadratic, exponential };

struct MassParams {
  double m0 = 1.0;
  double hbar = 1.0;
  double alpha = 1.0;
  double coupling = 1.0; // C; defaults to hbar^2 via make_mass_params
  MassOrder order = MassOrder::exponential;
};

MassParams make_mass_params(double m0, double hbar, double alpha = 1.0,
                            MassOrder order = MassOrder::exponential);

struct QuantumPotential {
  ScalarField q;
  std::vector<std::size_t> clamped_nodes; // lifted by the node regularization
};

QuantumPotential quantum_potential_rel(const ScalarField& rho, const MassParams& params);
QuantumPotential quantum_potential_nr(const ScalarField& rho, const MassParams& params);

// Qfrak = m0^2 * Q for a dimensionless relativistic Q field.
ScalarField qfrak_field(const ScalarField& q, const MassParams& params);

struct MassSqField {
  ScalarField m2;
  double nonpositive_fraction = 0.0; // of nodes, for linear/quadratic orders
  std::vector<std::size_t> clamped_nodes;
};

MassSqField machian_mass_sq(const ScalarField& rho, const MassParams& params);

// M = alpha exp(2 Q_nr / m0) from a precomputed nonrelativistic potential.
ScalarField machian_mass_nr(const ScalarField& q_nr, const MassParams& params);

// (box R)^2 - R box^2 R; identically zero exactly when the field satisfies
// the fourth-order constraint (exponentials do, gaussians do not).
ScalarField constraint_defect(const ScalarField& R);

} // namespace machq
