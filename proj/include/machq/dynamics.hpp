#pragma once

// Particle trajectories under position-dependent mass fields.
//
//   nonrelativistic:  d2x/dt2 = g_ext - (1/2) grad M / M
//   relativistic:     du^a/dlambda = (1/2) [ d^a M - u^a (u_nu d^nu M) ] / M
//
// Raised components x^mu, u^mu are integrated; the index is lowered only
// inside the force term, so with signature (+,-,-,-) the raised spatial
// force on a particle at rest in M = exp(2kx) is -k, matching the
// nonrelativistic limit.  The projector form keeps u.u = 1 along the
// continuous flow; the integrator records the numerical drift.
//
// Off-node sampling is multilinear; gradients are differenced on the grid
// first and interpolated afterwards, preserving the stencil order of the
// force field.  The integrator is classical fixed-step RK4.

#include <array>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "machq/grid.hpp"

namespace machq {

enum class ParticleMode { nr, rel };

struct ParticleState {
  ParticleMode mode = ParticleMode::nr;
  // nr: x[0..2] position, u[0..2] velocity, parameter = t
  // rel: x = x^mu, u = u^mu (renormalized to u.u = 1), parameter = lambda
  std::array<double, 4> x{};
  std::array<double, 4> u{};
  double parameter = 0.0;
};

struct PathSample {
  double parameter = 0.0;
  std::array<double, 4> x{};
  std::array<double, 4> u{};
  double uu = 0.0; // u.u (rel mode), 0 otherwise
};

enum class StopReason { completed, hull_exit, norm_drift };

struct Path {
  ParticleMode mode = ParticleMode::nr;
  std::vector<PathSample> samples; // strictly increasing parameter
  double step = 0.0;
  double max_norm_drift = 0.0; // max |u.u - 1| seen (rel mode)
  StopReason stop = StopReason::completed;
};

// Thrown when a sampled position leaves the hull of a clamped grid.
struct HullExit : std::out_of_range {
  int axis;
  explicit HullExit(int axis_, const std::string& what) : std::out_of_range(what), axis(axis_) {}
};

// Multilinear sampler for a field and its grid-differenced gradient.
// Positions are grid-axis coordinates; periodic axes wrap, clamped axes
// raise HullExit outside [origin, origin + (n-1)h].
class MassSampler {
 public:
  explicit MassSampler(const ScalarField& field);

  double value_at(const std::array<double, 4>& pos) const;
  double gradient_at(int axis, const std::array<double, 4>& pos) const;
  const GridSpec& spec() const { return field_.spec; }

 private:
  ScalarField field_;
  std::vector<ScalarField> gradient_;
};

// -(1/2) grad M / M at a spatial position (components beyond the grid rank
// are zero).  Throws HullExit outside the hull and std::domain_error where
// the interpolated M is not positive.
std::array<double, 3> mass_gradient_accel(const MassSampler& M,
                                          const std::array<double, 3>& x);
std::array<double, 3> mass_gradient_accel(const ScalarField& M,
                                          const std::array<double, 3>& x);

// Right-hand side of the relativistic equation at (x, u); exposed for tests
// and diagnostics.
std::array<double, 4> rel_four_force(const MassSampler& M,
                                     const std::array<double, 4>& x,
                                     const std::array<double, 4>& u);

// Minkowski square u_mu u^mu of raised components.
double minkowski_square(const std::array<double, 4>& u);

struct ExternalAccel {
  std::array<double, 3> constant{};
  std::vector<ScalarField> sampled; // optional per-axis fields, spatial grid
};

// Fixed-step RK4 for d2x/dt2 = g - (1/2) grad M / M on a static mass field.
// A trajectory leaving the hull is returned truncated with stop = hull_exit.
Path integrate_nr(const ScalarField& M, const ExternalAccel& g,
                  const ParticleState& state0, double dt, int steps);

// Fixed-step RK4 for the relativistic flat-space equation; M may be static
// or carry a time axis.  u0 is renormalized to u.u = 1 (proper-time gauge).
// Integration aborts with stop = norm_drift if |u.u - 1| exceeds 1e-6.
Path integrate_rel_flat(const ScalarField& M, const ParticleState& state0,
                        double dlambda, int steps);

// Guidance velocity field grad S / m, one component per spatial axis.
std::vector<ScalarField> bohmian_velocity(const ScalarField& S, double mass);

// Integrates dx/dt = grad S / m through the interpolated velocity field.
Path integrate_guidance(const ScalarField& S, double mass,
                        const std::array<double, 3>& x0, double dt, int steps);

// CSV: parameter, position components, velocity components[, u.u].
void write_path_csv(std::ostream& os, const Path& path);

} // namespace machq
