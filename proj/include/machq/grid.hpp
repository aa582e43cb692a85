#pragma once

// Uniform rectilinear grids and finite-difference operators for real scalar
// fields, with an optional leading time axis.  Metric signature is fixed to
// (+,-,-,-) with c = 1, so the d'Alembertian is d_t^2 - laplacian and a
// static field has box f = -lap f exactly (same code path, negated).
//
// Layout is row-major with axis 0 first; when has_time_axis is set, axis 0
// is time.  Norms and inner products are weighted by the cell volume
// (product of spacings) so they are stable under grid refinement.
//
// All operations are pure functions of immutable inputs and safe to call
// concurrently.  Reductions run in a fixed serial order, so results are
// bitwise reproducible for identical inputs.

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace machq {

enum class Boundary {
  periodic,      // indices wrap modulo the axis length
  clamped_ghost, // ghost nodes linearly extrapolated from the two edge nodes
};

std::string to_string(Boundary b);
Boundary boundary_from_string(const std::string& s);

constexpr int kMaxRank = 4;

struct GridSpec {
  int rank = 1;
  bool has_time_axis = false; // axis 0 is time when true
  std::array<int, kMaxRank> shape{};
  std::array<double, kMaxRank> origin{};
  std::array<double, kMaxRank> spacing{};
  Boundary boundary = Boundary::periodic;
  int stencil_order = 4; // 2 or 4

  std::size_t num_points() const {
    std::size_t n = 1;
    for (int a = 0; a < rank; ++a) n *= static_cast<std::size_t>(shape[a]);
    return n;
  }

  int spatial_begin() const { return has_time_axis ? 1 : 0; }
  bool axis_is_time(int axis) const { return has_time_axis && axis == 0; }

  // Signature sign of an axis: +1 for time, -1 for space.  Raised derivative
  // components and the box operator both use it.
  double metric_sign(int axis) const { return axis_is_time(axis) ? 1.0 : -1.0; }

  double coordinate(int axis, int index) const {
    return origin[axis] + index * spacing[axis];
  }

  double cell_volume() const {
    double v = 1.0;
    for (int a = 0; a < rank; ++a) v *= spacing[a];
    return v;
  }

  bool operator==(const GridSpec&) const = default;
};

// Throws std::invalid_argument on rank/shape/spacing/order violations.
void validate(const GridSpec& spec);

// Convenience factories.  Spacing is extent/n so that for even n the
// midpoint of a centered domain lands exactly on a node; for clamped
// boundaries the hull is [origin, origin + (n-1)h].
GridSpec grid_1d(int n, double extent, Boundary boundary = Boundary::periodic,
                 int order = 4, double center = 0.0);
// Adds a leading time axis [0, t_span) with nt nodes to a spatial grid.
GridSpec with_time_axis(const GridSpec& spatial, int nt, double t_span);

struct ScalarField {
  GridSpec spec;
  std::vector<double> values; // row-major, axis 0 outermost

  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
};

ScalarField make_uniform_field(const GridSpec& spec, double value);

// Throws std::invalid_argument if sizes mismatch or values are not finite.
void validate(const ScalarField& f);

std::array<std::size_t, kMaxRank> strides(const GridSpec& spec);
std::size_t flat_index(const GridSpec& spec, const std::array<int, kMaxRank>& idx);

// Calls fn(flat, coords) for every node in row-major order.
template <class Fn>
void for_each_node(const GridSpec& spec, Fn&& fn) {
  std::array<int, kMaxRank> idx{};
  std::array<double, kMaxRank> x{};
  for (int a = 0; a < spec.rank; ++a) x[a] = spec.origin[a];
  const std::size_t total = spec.num_points();
  for (std::size_t flat = 0; flat < total; ++flat) {
    fn(flat, x);
    for (int a = spec.rank - 1; a >= 0; --a) {
      if (++idx[a] < spec.shape[a]) {
        x[a] = spec.coordinate(a, idx[a]);
        break;
      }
      idx[a] = 0;
      x[a] = spec.origin[a];
    }
  }
}

// --- differential operators -------------------------------------------------

// Central first derivative along `axis` at the grid's stencil order.
// Throws std::out_of_range if axis >= rank.
ScalarField partial(const ScalarField& f, int axis);

// Central second derivative along `axis`.
ScalarField second_partial(const ScalarField& f, int axis);

// Sum of second derivatives over the spatial axes.
ScalarField laplacian(const ScalarField& f);

// d_t^2 - laplacian; equals -laplacian bitwise on static grids.
ScalarField dalembertian(const ScalarField& f);

// dalembertian applied twice.
ScalarField bidalembertian(const ScalarField& f);

// --- pointwise algebra -------------------------------------------------------

ScalarField add(const ScalarField& a, const ScalarField& b);
ScalarField sub(const ScalarField& a, const ScalarField& b);
ScalarField mul(const ScalarField& a, const ScalarField& b);
ScalarField divide(const ScalarField& a, const ScalarField& b);
ScalarField scale(const ScalarField& f, double s);
ScalarField shift(const ScalarField& f, double s);

// Elementwise power.  Non-integer exponents require strictly positive values;
// negative integer exponents require nonzero values.  Violations raise
// std::domain_error naming the first offending flat index.
ScalarField power(const ScalarField& f, double exponent);
ScalarField sqrt_field(const ScalarField& f);

// Cell-volume weighted norms; linf is the plain max of |values|.
double inner(const ScalarField& a, const ScalarField& b);
double l2_norm(const ScalarField& f);
double linf_norm(const ScalarField& f);

// Max of |values| over nodes at least `margin` nodes away from every
// clamped boundary (periodic axes are never trimmed).  Used to measure
// convergence away from one-sided boundary stencils.
double linf_norm_interior(const ScalarField& f, int margin);

} // namespace machq
