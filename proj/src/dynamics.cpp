#include "machq/dynamics.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace machq {

namespace {

struct CellAnchor {
  std::array<int, kMaxRank> base{};
  std::array<double, kMaxRank> frac{};
};

CellAnchor locate(const GridSpec& spec, const std::array<double, 4>& pos) {
  CellAnchor c;
  for (int a = 0; a < spec.rank; ++a) {
    const int n = spec.shape[a];
    double u = (pos[a] - spec.origin[a]) / spec.spacing[a];
    if (spec.boundary == Boundary::periodic) {
      u = std::fmod(u, static_cast<double>(n));
      if (u < 0.0) u += static_cast<double>(n);
      int i0 = static_cast<int>(std::floor(u));
      if (i0 >= n) i0 = n - 1;
      c.base[a] = i0;
      c.frac[a] = u - i0;
    } else {
      if (u < 0.0 || u > static_cast<double>(n - 1))
        throw HullExit(a, "position left the grid hull on axis " + std::to_string(a));
      int i0 = static_cast<int>(std::floor(u));
      if (i0 >= n - 1) i0 = n - 2;
      c.base[a] = i0;
      c.frac[a] = u - i0;
    }
  }
  return c;
}

double interpolate(const ScalarField& f, const CellAnchor& c) {
  const GridSpec& spec = f.spec;
  const auto st = strides(spec);
  const int corners = 1 << spec.rank;
  double acc = 0.0;
  for (int mask = 0; mask < corners; ++mask) {
    double w = 1.0;
    std::size_t flat = 0;
    for (int a = 0; a < spec.rank; ++a) {
      const bool hi = mask & (1 << a);
      w *= hi ? c.frac[a] : 1.0 - c.frac[a];
      int idx = c.base[a] + (hi ? 1 : 0);
      if (idx >= spec.shape[a]) idx = 0; // periodic wrap of the top corner
      flat += static_cast<std::size_t>(idx) * st[a];
    }
    acc += w * f.values[flat];
  }
  return acc;
}

} // namespace

MassSampler::MassSampler(const ScalarField& field) : field_(field) {
  validate(field_);
  gradient_.reserve(static_cast<std::size_t>(field_.spec.rank));
  for (int a = 0; a < field_.spec.rank; ++a) gradient_.push_back(partial(field_, a));
}

double MassSampler::value_at(const std::array<double, 4>& pos) const {
  return interpolate(field_, locate(field_.spec, pos));
}

double MassSampler::gradient_at(int axis, const std::array<double, 4>& pos) const {
  if (axis < 0 || axis >= field_.spec.rank)
    throw std::out_of_range("gradient axis out of range");
  return interpolate(gradient_[static_cast<std::size_t>(axis)],
                     locate(field_.spec, pos));
}

std::array<double, 3> mass_gradient_accel(const MassSampler& M,
                                          const std::array<double, 3>& x) {
  const GridSpec& spec = M.spec();
  if (spec.has_time_axis)
    throw std::invalid_argument("spatial acceleration needs a static mass field");
  const std::array<double, 4> pos{x[0], x[1], x[2], 0.0};
  const double m = M.value_at(pos);
  if (!(m > 0.0))
    throw std::domain_error("interpolated mass is not positive at the sample point");
  std::array<double, 3> a{};
  for (int ax = 0; ax < spec.rank; ++ax)
    a[static_cast<std::size_t>(ax)] = -0.5 * M.gradient_at(ax, pos) / m;
  return a;
}

std::array<double, 3> mass_gradient_accel(const ScalarField& M,
                                          const std::array<double, 3>& x) {
  return mass_gradient_accel(MassSampler(M), x);
}

double minkowski_square(const std::array<double, 4>& u) {
  return u[0] * u[0] - u[1] * u[1] - u[2] * u[2] - u[3] * u[3];
}

std::array<double, 4> rel_four_force(const MassSampler& M,
                                     const std::array<double, 4>& x,
                                     const std::array<double, 4>& u) {
  const GridSpec& spec = M.spec();
  // grid coordinates: (t, x...) for a field with a time axis, else the
  // spatial block x^1..x^rank
  std::array<double, 4> pos{};
  if (spec.has_time_axis) {
    for (int a = 0; a < spec.rank; ++a) pos[a] = x[a];
  } else {
    for (int a = 0; a < spec.rank; ++a) pos[a] = x[a + 1];
  }
  const double m = M.value_at(pos);
  if (!(m > 0.0))
    throw std::domain_error("interpolated mass is not positive along the worldline");

  // raised gradient V^mu = d^mu M / M: V^0 = +d_t M / M, V^i = -d_i M / M
  std::array<double, 4> v{};
  if (spec.has_time_axis) {
    v[0] = M.gradient_at(0, pos) / m;
    for (int a = 1; a < spec.rank; ++a) v[a] = -M.gradient_at(a, pos) / m;
  } else {
    for (int a = 0; a < spec.rank; ++a) v[a + 1] = -M.gradient_at(a, pos) / m;
  }

  const double u_dot_v = u[0] * v[0] - u[1] * v[1] - u[2] * v[2] - u[3] * v[3];
  std::array<double, 4> f{};
  for (int mu = 0; mu < 4; ++mu) f[mu] = 0.5 * (v[mu] - u[mu] * u_dot_v);
  return f;
}

// --- integrators ---------------------------------------------------------------

namespace {

// One state vector (position block + velocity block) for the RK4 driver.
template <int N>
using StateVec = std::array<double, 2 * N>;

template <int N, class Deriv>
StateVec<N> rk4_step(const StateVec<N>& y, double h, const Deriv& deriv) {
  StateVec<N> k1 = deriv(y);
  StateVec<N> y2;
  for (int i = 0; i < 2 * N; ++i) y2[i] = y[i] + 0.5 * h * k1[i];
  StateVec<N> k2 = deriv(y2);
  for (int i = 0; i < 2 * N; ++i) y2[i] = y[i] + 0.5 * h * k2[i];
  StateVec<N> k3 = deriv(y2);
  for (int i = 0; i < 2 * N; ++i) y2[i] = y[i] + h * k3[i];
  StateVec<N> k4 = deriv(y2);
  StateVec<N> out;
  for (int i = 0; i < 2 * N; ++i)
    out[i] = y[i] + h * (1.0 / 6.0) * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
  return out;
}

} // namespace

Path integrate_nr(const ScalarField& M, const ExternalAccel& g,
                  const ParticleState& state0, double dt, int steps) {
  if (state0.mode != ParticleMode::nr)
    throw std::invalid_argument("integrate_nr needs an nr-mode state");
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (M.spec.has_time_axis)
    throw std::invalid_argument("integrate_nr needs a static mass field");
  if (steps < 0) throw std::invalid_argument("steps must be non-negative");

  const MassSampler sampler(M);
  std::vector<MassSampler> g_samplers;
  for (const ScalarField& f : g.sampled) g_samplers.emplace_back(f);

  auto deriv = [&](const StateVec<3>& y) {
    const std::array<double, 3> x{y[0], y[1], y[2]};
    const auto a = mass_gradient_accel(sampler, x);
    StateVec<3> d;
    d[0] = y[3];
    d[1] = y[4];
    d[2] = y[5];
    for (int i = 0; i < 3; ++i) d[3 + i] = g.constant[static_cast<std::size_t>(i)] + a[static_cast<std::size_t>(i)];
    if (!g_samplers.empty()) {
      const std::array<double, 4> pos{x[0], x[1], x[2], 0.0};
      for (std::size_t i = 0; i < g_samplers.size() && i < 3; ++i)
        d[3 + i] += g_samplers[i].value_at(pos);
    }
    return d;
  };

  Path path;
  path.mode = ParticleMode::nr;
  path.step = dt;

  StateVec<3> y{state0.x[0], state0.x[1], state0.x[2],
                state0.u[0], state0.u[1], state0.u[2]};
  double t = state0.parameter;
  auto record = [&]() {
    PathSample s;
    s.parameter = t;
    s.x = {y[0], y[1], y[2], 0.0};
    s.u = {y[3], y[4], y[5], 0.0};
    path.samples.push_back(s);
  };
  record();

  for (int step = 0; step < steps; ++step) {
    try {
      y = rk4_step<3>(y, dt, deriv);
    } catch (const HullExit&) {
      path.stop = StopReason::hull_exit;
      return path;
    }
    t = state0.parameter + (step + 1) * dt;
    record();
  }
  return path;
}

Path integrate_rel_flat(const ScalarField& M, const ParticleState& state0,
                        double dlambda, int steps) {
  if (state0.mode != ParticleMode::rel)
    throw std::invalid_argument("integrate_rel_flat needs a rel-mode state");
  if (!(dlambda > 0.0)) throw std::invalid_argument("dlambda must be positive");
  if (steps < 0) throw std::invalid_argument("steps must be non-negative");

  const MassSampler sampler(M);

  auto deriv = [&](const StateVec<4>& y) {
    const std::array<double, 4> x{y[0], y[1], y[2], y[3]};
    const std::array<double, 4> u{y[4], y[5], y[6], y[7]};
    const auto f = rel_four_force(sampler, x, u);
    StateVec<4> d;
    for (int i = 0; i < 4; ++i) d[i] = u[static_cast<std::size_t>(i)];
    for (int i = 0; i < 4; ++i) d[4 + i] = f[static_cast<std::size_t>(i)];
    return d;
  };

  // proper-time gauge: renormalize the initial four-velocity to u.u = 1
  std::array<double, 4> u0 = state0.u;
  const double uu0 = minkowski_square(u0);
  if (!(uu0 > 0.0))
    throw std::invalid_argument("initial four-velocity must be timelike (u.u > 0)");
  const double inv = 1.0 / std::sqrt(uu0);
  for (double& c : u0) c *= inv;

  Path path;
  path.mode = ParticleMode::rel;
  path.step = dlambda;

  StateVec<4> y{state0.x[0], state0.x[1], state0.x[2], state0.x[3],
                u0[0], u0[1], u0[2], u0[3]};
  double lambda = state0.parameter;
  auto record = [&]() {
    PathSample s;
    s.parameter = lambda;
    s.x = {y[0], y[1], y[2], y[3]};
    s.u = {y[4], y[5], y[6], y[7]};
    s.uu = minkowski_square(s.u);
    path.samples.push_back(s);
    path.max_norm_drift = std::max(path.max_norm_drift, std::abs(s.uu - 1.0));
  };
  record();

  for (int step = 0; step < steps; ++step) {
    try {
      y = rk4_step<4>(y, dlambda, deriv);
    } catch (const HullExit&) {
      path.stop = StopReason::hull_exit;
      return path;
    }
    lambda = state0.parameter + (step + 1) * dlambda;
    record();
    if (path.max_norm_drift > 1e-6) {
      path.stop = StopReason::norm_drift;
      return path;
    }
  }
  return path;
}

std::vector<ScalarField> bohmian_velocity(const ScalarField& S, double mass) {
  if (!(mass > 0.0)) throw std::invalid_argument("guidance mass must be positive");
  std::vector<ScalarField> v;
  for (int a = S.spec.spatial_begin(); a < S.spec.rank; ++a)
    v.push_back(scale(partial(S, a), 1.0 / mass));
  return v;
}

Path integrate_guidance(const ScalarField& S, double mass,
                        const std::array<double, 3>& x0, double dt, int steps) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (S.spec.has_time_axis)
    throw std::invalid_argument("guidance tracing needs a static phase field");
  const auto vfields = bohmian_velocity(S, mass);
  std::vector<MassSampler> v_samplers;
  for (const ScalarField& f : vfields) v_samplers.emplace_back(f);

  auto velocity = [&](const std::array<double, 3>& x) {
    const std::array<double, 4> pos{x[0], x[1], x[2], 0.0};
    std::array<double, 3> v{};
    for (std::size_t a = 0; a < v_samplers.size() && a < 3; ++a)
      v[a] = v_samplers[a].value_at(pos);
    return v;
  };

  Path path;
  path.mode = ParticleMode::nr;
  path.step = dt;

  std::array<double, 3> x = x0;
  double t = 0.0;
  auto record = [&]() {
    PathSample s;
    s.parameter = t;
    s.x = {x[0], x[1], x[2], 0.0};
    const auto v = velocity(x);
    s.u = {v[0], v[1], v[2], 0.0};
    path.samples.push_back(s);
  };

  try {
    record();
    for (int step = 0; step < steps; ++step) {
      // RK4 on the first-order flow dx/dt = v(x)
      const auto k1 = velocity(x);
      std::array<double, 3> xs{};
      for (int i = 0; i < 3; ++i) xs[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)] + 0.5 * dt * k1[static_cast<std::size_t>(i)];
      const auto k2 = velocity(xs);
      for (int i = 0; i < 3; ++i) xs[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)] + 0.5 * dt * k2[static_cast<std::size_t>(i)];
      const auto k3 = velocity(xs);
      for (int i = 0; i < 3; ++i) xs[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)] + dt * k3[static_cast<std::size_t>(i)];
      const auto k4 = velocity(xs);
      for (int i = 0; i < 3; ++i)
        x[static_cast<std::size_t>(i)] += dt * (1.0 / 6.0) *
            (k1[static_cast<std::size_t>(i)] + 2.0 * (k2[static_cast<std::size_t>(i)] + k3[static_cast<std::size_t>(i)]) + k4[static_cast<std::size_t>(i)]);
      t = (step + 1) * dt;
      record();
    }
  } catch (const HullExit&) {
    path.stop = StopReason::hull_exit;
  }
  return path;
}

void write_path_csv(std::ostream& os, const Path& path) {
  char buf[40];
  auto fmt = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  if (path.mode == ParticleMode::rel) {
    os << "lambda,x0,x1,x2,x3,u0,u1,u2,u3,uu\n";
    for (const PathSample& s : path.samples) {
      os << fmt(s.parameter);
      for (double c : s.x) os << "," << fmt(c);
      for (double c : s.u) os << "," << fmt(c);
      os << "," << fmt(s.uu) << "\n";
    }
  } else {
    os << "t,x,y,z,vx,vy,vz\n";
    for (const PathSample& s : path.samples) {
      os << fmt(s.parameter);
      for (int i = 0; i < 3; ++i) os << "," << fmt(s.x[static_cast<std::size_t>(i)]);
      for (int i = 0; i < 3; ++i) os << "," << fmt(s.u[static_cast<std::size_t>(i)]);
      os << "\n";
    }
  }
}

} // namespace machq
