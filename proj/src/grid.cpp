#include "machq/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace machq {

std::string to_string(Boundary b) {
  return b == Boundary::periodic ? "periodic" : "clamped-ghost";
}

Boundary boundary_from_string(const std::string& s) {
  if (s == "periodic") return Boundary::periodic;
  if (s == "clamped-ghost" || s == "clamped") return Boundary::clamped_ghost;
  throw std::invalid_argument("unknown boundary '" + s +
                              "' (expected periodic or clamped-ghost)");
}

void validate(const GridSpec& spec) {
  if (spec.rank < 1 || spec.rank > kMaxRank)
    throw std::invalid_argument("grid rank must be in 1..4, got " +
                                std::to_string(spec.rank));
  if (spec.stencil_order != 2 && spec.stencil_order != 4)
    throw std::invalid_argument("stencil order must be 2 or 4, got " +
                                std::to_string(spec.stencil_order));
  for (int a = 0; a < spec.rank; ++a) {
    if (spec.shape[a] < spec.stencil_order + 1)
      throw std::invalid_argument(
          "axis " + std::to_string(a) + " has " + std::to_string(spec.shape[a]) +
          " nodes; need at least stencil_order+1 = " +
          std::to_string(spec.stencil_order + 1));
    if (!(spec.spacing[a] > 0.0) || !std::isfinite(spec.spacing[a]))
      throw std::invalid_argument("axis " + std::to_string(a) +
                                  " spacing must be positive and finite");
    if (!std::isfinite(spec.origin[a]))
      throw std::invalid_argument("axis " + std::to_string(a) +
                                  " origin must be finite");
  }
}

GridSpec grid_1d(int n, double extent, Boundary boundary, int order, double center) {
  GridSpec g;
  g.rank = 1;
  g.has_time_axis = false;
  g.shape[0] = n;
  g.spacing[0] = extent / n;
  g.origin[0] = center - extent / 2.0;
  g.boundary = boundary;
  g.stencil_order = order;
  validate(g);
  return g;
}

GridSpec with_time_axis(const GridSpec& spatial, int nt, double t_span) {
  if (spatial.has_time_axis)
    throw std::invalid_argument("grid already has a time axis");
  if (spatial.rank + 1 > kMaxRank)
    throw std::invalid_argument("adding a time axis exceeds max rank 4");
  GridSpec g;
  g.rank = spatial.rank + 1;
  g.has_time_axis = true;
  g.shape[0] = nt;
  g.spacing[0] = t_span / nt;
  g.origin[0] = 0.0;
  for (int a = 0; a < spatial.rank; ++a) {
    g.shape[a + 1] = spatial.shape[a];
    g.spacing[a + 1] = spatial.spacing[a];
    g.origin[a + 1] = spatial.origin[a];
  }
  g.boundary = spatial.boundary;
  g.stencil_order = spatial.stencil_order;
  validate(g);
  return g;
}

ScalarField make_uniform_field(const GridSpec& spec, double value) {
  validate(spec);
  return ScalarField{spec, std::vector<double>(spec.num_points(), value)};
}

void validate(const ScalarField& f) {
  validate(f.spec);
  if (f.values.size() != f.spec.num_points())
    throw std::invalid_argument("field has " + std::to_string(f.values.size()) +
                                " values but grid has " +
                                std::to_string(f.spec.num_points()) + " nodes");
  for (std::size_t i = 0; i < f.values.size(); ++i)
    if (!std::isfinite(f.values[i]))
      throw std::invalid_argument("field value at flat index " +
                                  std::to_string(i) + " is not finite");
}

std::array<std::size_t, kMaxRank> strides(const GridSpec& spec) {
  std::array<std::size_t, kMaxRank> s{};
  std::size_t acc = 1;
  for (int a = spec.rank - 1; a >= 0; --a) {
    s[a] = acc;
    acc *= static_cast<std::size_t>(spec.shape[a]);
  }
  return s;
}

std::size_t flat_index(const GridSpec& spec, const std::array<int, kMaxRank>& idx) {
  const auto st = strides(spec);
  std::size_t flat = 0;
  for (int a = 0; a < spec.rank; ++a)
    flat += static_cast<std::size_t>(idx[a]) * st[a];
  return flat;
}

namespace {

void require_axis(const GridSpec& spec, int axis) {
  if (axis < 0 || axis >= spec.rank)
    throw std::out_of_range("axis " + std::to_string(axis) +
                            " out of range for rank " + std::to_string(spec.rank));
}

// Walks every 1-D line along `axis` and hands the kernel a sampler for
// offsets within the stencil radius.  Clamped-ghost boundaries extrapolate
// linearly from the two edge nodes: ghost_k = (k+1) f_edge - k f_inner,
// which keeps derivatives of affine fields exact at every node.
template <class Kernel>
ScalarField apply_stencil(const ScalarField& f, int axis, Kernel kernel) {
  const GridSpec& spec = f.spec;
  require_axis(spec, axis);
  const auto st = strides(spec);
  const std::size_t stride = st[axis];
  const int n = spec.shape[axis];
  const std::size_t total = spec.num_points();
  const bool periodic = spec.boundary == Boundary::periodic;

  ScalarField out{spec, std::vector<double>(total)};
  const double* v = f.values.data();

  for (std::size_t flat = 0; flat < total; ++flat) {
    const int ia = static_cast<int>((flat / stride) % static_cast<std::size_t>(n));
    const std::size_t line0 = flat - static_cast<std::size_t>(ia) * stride;
    auto at = [&](int offset) -> double {
      int j = ia + offset;
      if (j >= 0 && j < n) return v[line0 + static_cast<std::size_t>(j) * stride];
      if (periodic) {
        j = ((j % n) + n) % n;
        return v[line0 + static_cast<std::size_t>(j) * stride];
      }
      if (j < 0) {
        const double f0 = v[line0];
        const double f1 = v[line0 + stride];
        const double k = static_cast<double>(-j);
        return f0 + k * (f0 - f1); // exact for constant lines
      }
      const double f0 = v[line0 + static_cast<std::size_t>(n - 1) * stride];
      const double f1 = v[line0 + static_cast<std::size_t>(n - 2) * stride];
      const double k = static_cast<double>(j - (n - 1));
      return f0 + k * (f0 - f1);
    };
    out.values[flat] = kernel(at);
  }
  return out;
}

} // namespace

// Stencil sums are grouped symmetrically so that a constant field
// differentiates to exactly zero in floating point.
ScalarField partial(const ScalarField& f, int axis) {
  require_axis(f.spec, axis);
  const double h = f.spec.spacing[axis];
  if (f.spec.stencil_order == 2) {
    const double w = 1.0 / (2.0 * h);
    return apply_stencil(f, axis, [w](auto at) {
      return (at(1) - at(-1)) * w;
    });
  }
  const double w = 1.0 / (12.0 * h);
  return apply_stencil(f, axis, [w](auto at) {
    return (8.0 * (at(1) - at(-1)) - (at(2) - at(-2))) * w;
  });
}

ScalarField second_partial(const ScalarField& f, int axis) {
  require_axis(f.spec, axis);
  const double h = f.spec.spacing[axis];
  if (f.spec.stencil_order == 2) {
    const double w = 1.0 / (h * h);
    return apply_stencil(f, axis, [w](auto at) {
      return ((at(1) + at(-1)) - 2.0 * at(0)) * w;
    });
  }
  const double w = 1.0 / (12.0 * h * h);
  return apply_stencil(f, axis, [w](auto at) {
    return (16.0 * (at(1) + at(-1)) - (at(2) + at(-2)) - 30.0 * at(0)) * w;
  });
}

ScalarField laplacian(const ScalarField& f) {
  const GridSpec& spec = f.spec;
  ScalarField out;
  bool first = true;
  for (int a = spec.spatial_begin(); a < spec.rank; ++a) {
    ScalarField d2 = second_partial(f, a);
    if (first) {
      out = std::move(d2);
      first = false;
    } else {
      for (std::size_t i = 0; i < out.values.size(); ++i)
        out.values[i] += d2.values[i];
    }
  }
  return out;
}

ScalarField dalembertian(const ScalarField& f) {
  if (!f.spec.has_time_axis) {
    ScalarField out = laplacian(f);
    for (double& v : out.values) v = 0.0 - v; // keeps +0.0 on exact zeros
    return out;
  }
  ScalarField out = second_partial(f, 0);
  ScalarField lap = laplacian(f);
  for (std::size_t i = 0; i < out.values.size(); ++i)
    out.values[i] -= lap.values[i];
  return out;
}

ScalarField bidalembertian(const ScalarField& f) {
  return dalembertian(dalembertian(f));
}

namespace {

void require_same_grid(const ScalarField& a, const ScalarField& b) {
  if (!(a.spec == b.spec))
    throw std::invalid_argument("fields live on different grids");
}

template <class Op>
ScalarField zip(const ScalarField& a, const ScalarField& b, Op op) {
  require_same_grid(a, b);
  ScalarField out{a.spec, std::vector<double>(a.values.size())};
  for (std::size_t i = 0; i < a.values.size(); ++i)
    out.values[i] = op(a.values[i], b.values[i]);
  return out;
}

} // namespace

ScalarField add(const ScalarField& a, const ScalarField& b) {
  return zip(a, b, [](double x, double y) { return x + y; });
}

ScalarField sub(const ScalarField& a, const ScalarField& b) {
  return zip(a, b, [](double x, double y) { return x - y; });
}

ScalarField mul(const ScalarField& a, const ScalarField& b) {
  return zip(a, b, [](double x, double y) { return x * y; });
}

ScalarField divide(const ScalarField& a, const ScalarField& b) {
  return zip(a, b, [](double x, double y) { return x / y; });
}

ScalarField scale(const ScalarField& f, double s) {
  ScalarField out{f.spec, std::vector<double>(f.values.size())};
  for (std::size_t i = 0; i < f.values.size(); ++i) out.values[i] = f.values[i] * s;
  return out;
}

ScalarField shift(const ScalarField& f, double s) {
  ScalarField out{f.spec, std::vector<double>(f.values.size())};
  for (std::size_t i = 0; i < f.values.size(); ++i) out.values[i] = f.values[i] + s;
  return out;
}

ScalarField power(const ScalarField& f, double exponent) {
  const bool integral = std::floor(exponent) == exponent;
  ScalarField out{f.spec, std::vector<double>(f.values.size())};
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    const double x = f.values[i];
    if (!integral && !(x > 0.0))
      throw std::domain_error("power: non-positive value " + std::to_string(x) +
                              " at flat index " + std::to_string(i) +
                              " under fractional exponent " + std::to_string(exponent));
    if (integral && exponent < 0.0 && x == 0.0)
      throw std::domain_error("power: zero value at flat index " + std::to_string(i) +
                              " under negative exponent " + std::to_string(exponent));
    if (exponent == 0.5)
      out.values[i] = std::sqrt(x);
    else if (exponent == 1.0)
      out.values[i] = x;
    else if (exponent == 2.0)
      out.values[i] = x * x;
    else if (exponent == -1.0)
      out.values[i] = 1.0 / x;
    else
      out.values[i] = std::pow(x, exponent);
  }
  return out;
}

ScalarField sqrt_field(const ScalarField& f) { return power(f, 0.5); }

double inner(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a, b);
  double acc = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i)
    acc += a.values[i] * b.values[i];
  return acc * a.spec.cell_volume();
}

double l2_norm(const ScalarField& f) { return std::sqrt(inner(f, f)); }

double linf_norm(const ScalarField& f) {
  double m = 0.0;
  for (double v : f.values) m = std::max(m, std::abs(v));
  return m;
}

double linf_norm_interior(const ScalarField& f, int margin) {
  const GridSpec& spec = f.spec;
  if (spec.boundary == Boundary::periodic || margin <= 0) return linf_norm(f);
  const auto st = strides(spec);
  double m = 0.0;
  for (std::size_t flat = 0; flat < f.values.size(); ++flat) {
    bool interior = true;
    for (int a = 0; a < spec.rank; ++a) {
      const int ia =
          static_cast<int>((flat / st[a]) % static_cast<std::size_t>(spec.shape[a]));
      if (ia < margin || ia >= spec.shape[a] - margin) {
        interior = false;
        break;
      }
    }
    if (interior) m = std::max(m, std::abs(f.values[flat]));
  }
  return m;
}

} // namespace machq
