#pragma once

// Monomial potential family
//
//   Qfrak = C * f^m * (d_mu f d^mu f)^(n/2) * (box f)^p
//
// with f = rho^r in rho mode, or f = R directly in R mode.  The gradient
// factor is the Lorentz scalar (d_mu f d^mu f)^(n/2); n must be even so the
// product is a scalar.  The family is invariant under rho -> gamma*rho
// exactly when m + n + p = 0.
//
// Two evaluation routes are provided on purpose: evaluate_potential applies
// grid stencils directly to f, while the pointwise slot form substitutes
//   box(rho^r)       = r rho^(r-1) box rho + r(r-1) rho^(r-2) (d rho . d rho)
//   (d f . d f)      = r^2 rho^(2r-2) (d rho . d rho)
// and treats Qfrak as a function of the three slot values
// (rho, d_mu rho, box rho).  The Euler-Lagrange machinery differentiates the
// slot form; the two routes agree within stencil accuracy.

#include <array>
#include <string>
#include <vector>

#include "machq/grid.hpp"

namespace machq {

enum class PotentialVariable { rho, R };

struct ExponentFamily {
  double coupling = 1.0; // C
  double exponent = 0.5; // r, nonzero
  int m = -1;
  int n = 0; // even, non-negative
  int p = 1;
  PotentialVariable variable = PotentialVariable::rho;
};

// Throws std::invalid_argument on odd/negative n or r == 0.
ExponentFamily make_family(double coupling, double exponent, int m, int n, int p,
                           PotentialVariable variable = PotentialVariable::rho);

bool scale_invariant(const ExponentFamily& fam); // m + n + p == 0

// Non-fatal style warnings (e.g. non-negative m, which cannot cancel the
// constant factors of the derivative terms under rescaling).
std::vector<std::string> lint_family(const ExponentFamily& fam);

// Parses "C=1,r=0.5,m=-1,n=0,p=1,var=rho".
ExponentFamily parse_family(const std::string& text);
std::string family_to_string(const ExponentFamily& fam);

// --- field evaluation ---------------------------------------------------------

// Qfrak field via stencils on f.  Requires base > 0 where fractional powers
// occur; p < 0 additionally requires |box f| bounded away from zero, else a
// std::domain_error names the first offending node.
ScalarField evaluate_potential(const ExponentFamily& fam, const ScalarField& base);

// Expanded form for the (m=-1, n=0, p=1) family shape, any r:
//   Qfrak = C ( r(r-1) (d rho . d rho)/rho^2 + r box rho / rho ).
// Agrees with evaluate_potential within stencil accuracy.
ScalarField expanded_potential(const ExponentFamily& fam, const ScalarField& rho);

struct ScaleDefect {
  double value = 0.0;
  bool is_relative = true; // false when the potential vanished identically
};

// || Qfrak[gamma*base] - Qfrak[base] ||_inf / || Qfrak[base] ||_inf.
// Analytically equals gamma^(r(m+n+p)) - 1 in rho mode.
ScaleDefect scale_defect(const ExponentFamily& fam, const ScalarField& base,
                         double gamma);

// --- pointwise slot form -------------------------------------------------------

// One point of the three slots Qfrak depends on.  `dbase` holds the lowered
// (coordinate) derivatives; the leading component is timelike when
// `has_time` is set and the metric signature is (+,-,-,-).
struct SlotPoint {
  double base = 1.0;                  // rho or R value
  std::array<double, kMaxRank> dbase{}; // d_mu of the base
  double box_base = 0.0;              // box of the base
  int rank = kMaxRank;
  bool has_time = true;
};

double lorentz_square(const SlotPoint& s);

// Qfrak at one slot point (chain-rule substituted form).
double potential_at(const ExponentFamily& fam, const SlotPoint& s);

struct SlotPartials {
  double d_base = 0.0;                   // dQfrak / d rho
  std::array<double, kMaxRank> d_grad{}; // dQfrak / d(d_mu rho), raised index
  double d_box = 0.0;                    // dQfrak / d(box rho)
};

// Closed-form partial derivatives of potential_at with respect to the three
// slots.  The gradient slot returns raised components, ready to contract
// with a plain coordinate divergence.
SlotPartials potential_partials(const ExponentFamily& fam, const SlotPoint& s);

} // namespace machq
