#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <string>
#include <sstream>

#include "machq/dynamics.hpp"
#include "machq/fieldgen.hpp"
#include "machq/grid.hpp"
#include "machq/potential.hpp"

using namespace machq;

TEST_CASE("mass gradient acceleration") {
  SUBCASE("constant mass gives zero") {
    GridSpec g = grid_1d(64, 4.0, Boundary::clamped_ghost);
    ScalarField M = make_field(g, ConstantField{2.0});
    const auto a = mass_gradient_accel(M, {0.3, 0.0, 0.0});
    CHECK(a[0] == 0.0);
    CHECK(a[1] == 0.0);
  }
  SUBCASE("M = exp(2kx) gives -k everywhere, on and off nodes") {
    const double k = 0.3;
    GridSpec g = grid_1d(256, 4.0, Boundary::clamped_ghost);
    ScalarField M = make_field(g, ExponentialField{{2.0 * k}});
    MassSampler sampler(M);
    for (double x : {-0.9, -0.3141, 0.0, 0.2718, 1.1}) {
      const auto a = mass_gradient_accel(sampler, {x, 0.0, 0.0});
      CHECK(a[0] == doctest::Approx(-k).epsilon(1e-8));
    }
  }
  SUBCASE("M = 1 + 0.1 x at x = 0 gives -0.05") {
    GridSpec g = grid_1d(128, 4.0, Boundary::clamped_ghost);
    ScalarField M{g, std::vector<double>(g.num_points())};
    for (int i = 0; i < g.shape[0]; ++i)
      M.values[static_cast<std::size_t>(i)] = 1.0 + 0.1 * g.coordinate(0, i);
    const auto a = mass_gradient_accel(M, {0.0, 0.0, 0.0});
    CHECK(a[0] == doctest::Approx(-0.05).epsilon(1e-12));
  }
  SUBCASE("out of hull names the axis") {
    GridSpec g = grid_1d(64, 4.0, Boundary::clamped_ghost);
    ScalarField M = make_field(g, ConstantField{1.0});
    try {
      mass_gradient_accel(M, {10.0, 0.0, 0.0});
      FAIL("expected HullExit");
    } catch (const HullExit& e) {
      CHECK(e.axis == 0);
      CHECK(std::string(e.what()).find("axis 0") != std::string::npos);
    }
  }
  SUBCASE("ties the nr mass chain: accel of alpha exp(2 Q/m0) is -grad Q / m0") {
    GridSpec g = grid_1d(1024, 12.0, Boundary::clamped_ghost);
    ScalarField rho = make_field(g, GaussianField{1.0, {}});
    MassParams p = make_mass_params(1.0, 1.0, 1.3);
    ScalarField qnr = quantum_potential_nr(rho, p).q;
    ScalarField M = machian_mass_nr(qnr, p);
    MassSampler m_sampler(M);
    MassSampler q_sampler(qnr);
    for (double x : {-2.5, -1.0, 0.4, 1.7}) {
      const auto a = mass_gradient_accel(m_sampler, {x, 0.0, 0.0});
      const double want = -q_sampler.gradient_at(0, {x, 0.0, 0.0}) / p.m0;
      CHECK(a[0] == doctest::Approx(want).epsilon(1e-4));
    }
  }
}

TEST_CASE("nonrelativistic integration") {
  SUBCASE("constant mass, no gravity: straight line") {
    GridSpec g = grid_1d(64, 16.0, Boundary::clamped_ghost);
    ScalarField M = make_field(g, ConstantField{1.0});
    ParticleState s0;
    s0.mode = ParticleMode::nr;
    s0.u = {1.0, 0.0, 0.0, 0.0};
    Path p = integrate_nr(M, ExternalAccel{}, s0, 1e-2, 100);
    REQUIRE(p.stop == StopReason::completed);
    CHECK(p.samples.back().x[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p.samples.back().u[0] == 1.0);
  }
  SUBCASE("constant mass with gravity: parabola, WEP restored") {
    GridSpec g = grid_1d(64, 16.0, Boundary::clamped_ghost);
    ScalarField M = make_field(g, ConstantField{1.0});
    ParticleState s0;
    s0.mode = ParticleMode::nr;
    ExternalAccel grav;
    grav.constant = {0.0, 0.0, -9.8};
    Path p = integrate_nr(M, grav, s0, 1e-3, 1000);
    CHECK(p.samples.back().x[2] == doctest::Approx(-4.9).epsilon(1e-9));
    CHECK(p.samples.back().x[0] == 0.0);
  }
  SUBCASE("exp mass: x(1) = -k/2 within 1e-8") {
    const double k = 0.3;
    GridSpec g = grid_1d(256, 4.0, Boundary::clamped_ghost);
    ScalarField M = make_field(g, ExponentialField{{2.0 * k}});
    ParticleState s0;
    s0.mode = ParticleMode::nr;
    Path p = integrate_nr(M, ExternalAccel{}, s0, 1e-3, 1000);
    REQUIRE(p.stop == StopReason::completed);
    CHECK(std::abs(p.samples.back().x[0] + 0.5 * k) < 1e-8);
    CHECK(p.samples.size() == 1001);
    // parameter strictly increasing
    for (std::size_t i = 1; i < p.samples.size(); ++i)
      CHECK(p.samples[i].parameter > p.samples[i - 1].parameter);
  }
  SUBCASE("hull exit truncates with the flag") {
    GridSpec g = grid_1d(64, 2.0, Boundary::clamped_ghost);
    ScalarField M = make_field(g, ConstantField{1.0});
    ParticleState s0;
    s0.mode = ParticleMode::nr;
    s0.u = {5.0, 0.0, 0.0, 0.0};
    Path p = integrate_nr(M, ExternalAccel{}, s0, 1e-2, 100);
    CHECK(p.stop == StopReason::hull_exit);
    CHECK(p.samples.size() < 101);
  }
  SUBCASE("forward-backward reversibility") {
    const double k = 0.3;
    GridSpec g = grid_1d(256, 4.0, Boundary::clamped_ghost);
    ScalarField M = make_field(g, ExponentialField{{2.0 * k}});
    ParticleState s0;
    s0.mode = ParticleMode::nr;
    s0.x = {0.5, 0.0, 0.0, 0.0};
    s0.u = {0.2, 0.0, 0.0, 0.0};
    Path fwd = integrate_nr(M, ExternalAccel{}, s0, 1e-3, 1000);
    ParticleState s1 = s0;
    s1.x = fwd.samples.back().x;
    for (int i = 0; i < 3; ++i) s1.u[static_cast<std::size_t>(i)] = -fwd.samples.back().u[static_cast<std::size_t>(i)];
    Path back = integrate_nr(M, ExternalAccel{}, s1, 1e-3, 1000);
    CHECK(std::abs(back.samples.back().x[0] - s0.x[0]) < 1e-9);
  }
}

TEST_CASE("relativistic integration") {
  SUBCASE("constant mass: straight worldline, zero drift") {
    GridSpec g = grid_1d(64, 16.0, Boundary::clamped_ghost);
    ScalarField M = make_field(g, ConstantField{1.0});
    ParticleState s0;
    s0.mode = ParticleMode::rel;
    s0.u = {1.2, 0.5, 0.0, 0.0}; // renormalized internally
    Path p = integrate_rel_flat(M, s0, 1e-2, 100);
    REQUIRE(p.stop == StopReason::completed);
    CHECK(p.max_norm_drift == 0.0);
    CHECK(p.samples.back().uu == doctest::Approx(1.0).epsilon(1e-12));
    // straight: x1 = u1 * lambda
    CHECK(p.samples.back().x[1] ==
          doctest::Approx(p.samples.back().u[1] * 1.0).epsilon(1e-12));
  }
  SUBCASE("the raised spatial force at rest on M = exp(2kx) is -k") {
    const double k = 0.3;
    GridSpec g = grid_1d(256, 4.0, Boundary::clamped_ghost);
    ScalarField M = make_field(g, ExponentialField{{2.0 * k}});
    MassSampler sampler(M);
    const auto f = rel_four_force(sampler, {0.0, 0.0, 0.0, 0.0}, {1.0, 0.0, 0.0, 0.0});
    CHECK(f[0] == 0.0);
    CHECK(f[1] == doctest::Approx(-k).epsilon(1e-8));
    CHECK(f[2] == 0.0);
  }
  SUBCASE("u.u drift over 1e4 steps stays below 1e-8") {
    GridSpec g = grid_1d(1024, 20.0, Boundary::clamped_ghost, 4, -4.0);
    ScalarField M = make_field(g, ExponentialField{{0.2}});
    ParticleState s0;
    s0.mode = ParticleMode::rel;
    s0.u = {1.0, 0.0, 0.0, 0.0};
    Path p = integrate_rel_flat(M, s0, 1e-3, 10000);
    REQUIRE(p.stop == StopReason::completed);
    CHECK(p.samples.size() == 10001);
    CHECK(p.max_norm_drift < 1e-8);
  }
  SUBCASE("slow start matches the nonrelativistic path to 1e-4") {
    const double k = 0.001;
    GridSpec g = grid_1d(256, 4.0, Boundary::clamped_ghost);
    ScalarField M = make_field(g, ExponentialField{{2.0 * k}});
    ParticleState sn;
    sn.mode = ParticleMode::nr;
    sn.u = {0.01, 0.0, 0.0, 0.0};
    Path pn = integrate_nr(M, ExternalAccel{}, sn, 1e-3, 1000);
    ParticleState sr;
    sr.mode = ParticleMode::rel;
    sr.u = {1.0, 0.01, 0.0, 0.0};
    Path pr = integrate_rel_flat(M, sr, 1e-3, 1000);
    double worst = 0.0, span = 0.0;
    for (std::size_t i = 0; i < pn.samples.size(); ++i) {
      worst = std::max(worst, std::abs(pn.samples[i].x[0] - pr.samples[i].x[1]));
      span = std::max(span, std::abs(pn.samples[i].x[0]));
    }
    CHECK(worst / span < 1e-4);
  }
  SUBCASE("forward-backward reversibility") {
    GridSpec g = grid_1d(512, 8.0, Boundary::clamped_ghost);
    ScalarField M = make_field(g, ExponentialField{{0.2}});
    ParticleState s0;
    s0.mode = ParticleMode::rel;
    s0.x = {0.0, 0.5, 0.0, 0.0};
    s0.u = {1.0, 0.1, 0.0, 0.0};
    Path fwd = integrate_rel_flat(M, s0, 1e-3, 1000);
    REQUIRE(fwd.stop == StopReason::completed);
    ParticleState s1 = s0;
    s1.x = fwd.samples.back().x;
    for (int mu = 0; mu < 4; ++mu) s1.u[static_cast<std::size_t>(mu)] = -fwd.samples.back().u[static_cast<std::size_t>(mu)];
    Path back = integrate_rel_flat(M, s1, 1e-3, 1000);
    CHECK(std::abs(back.samples.back().x[1] - s0.x[1]) < 1e-9);
  }
  SUBCASE("a mass field with a time axis reproduces the static result") {
    const double k = 0.1;
    GridSpec gs = grid_1d(256, 4.0, Boundary::clamped_ghost);
    ScalarField M_static = make_field(gs, ExponentialField{{2.0 * k}});
    GridSpec g4 = with_time_axis(gs, 64, 2.0);
    ScalarField M_4d = make_field(g4, ExponentialField{{0.0, 2.0 * k}});

    ParticleState s0;
    s0.mode = ParticleMode::rel;
    s0.u = {1.0, 0.0, 0.0, 0.0};
    Path a = integrate_rel_flat(M_static, s0, 1e-3, 1000);
    Path b = integrate_rel_flat(M_4d, s0, 1e-3, 1000);
    REQUIRE(a.stop == StopReason::completed);
    REQUIRE(b.stop == StopReason::completed);
    CHECK(std::abs(a.samples.back().x[1] - b.samples.back().x[1]) < 1e-12);
    CHECK(std::abs(a.samples.back().u[1] - b.samples.back().u[1]) < 1e-12);
  }
  SUBCASE("spacelike initial velocity is rejected") {
    GridSpec g = grid_1d(64, 4.0, Boundary::clamped_ghost);
    ScalarField M = make_field(g, ConstantField{1.0});
    ParticleState s0;
    s0.mode = ParticleMode::rel;
    s0.u = {0.1, 0.9, 0.0, 0.0};
    CHECK_THROWS_AS(integrate_rel_flat(M, s0, 1e-2, 1), std::invalid_argument);
  }
}

TEST_CASE("two-dimensional mass fields interpolate and integrate") {
  // M = exp(2k(x+y)): acceleration (-k, -k) everywhere
  const double k = 0.25;
  GridSpec g;
  g.rank = 2;
  g.shape = {128, 128};
  g.spacing = {4.0 / 128, 4.0 / 128};
  g.origin = {-2.0, -2.0};
  g.boundary = Boundary::clamped_ghost;
  g.stencil_order = 4;
  ScalarField M = make_field(g, ExponentialField{{2.0 * k, 2.0 * k}});

  MassSampler sampler(M);
  const auto a = mass_gradient_accel(sampler, {0.1, -0.2, 0.0});
  CHECK(a[0] == doctest::Approx(-k).epsilon(1e-6));
  CHECK(a[1] == doctest::Approx(-k).epsilon(1e-6));

  ParticleState s0;
  s0.mode = ParticleMode::nr;
  Path p = integrate_nr(M, ExternalAccel{}, s0, 1e-3, 1000);
  REQUIRE(p.stop == StopReason::completed);
  CHECK(p.samples.back().x[0] == doctest::Approx(-0.5 * k).epsilon(1e-7));
  CHECK(p.samples.back().x[1] == doctest::Approx(-0.5 * k).epsilon(1e-7));
}

TEST_CASE("bohmian guidance velocity") {
  GridSpec g = grid_1d(256, 8.0, Boundary::clamped_ghost);
  SUBCASE("S = p x gives v = p/m") {
    ScalarField S = make_field(g, PlanePhaseField{1.0, {-0.6, 0.0, 0.0}});
    const auto v = bohmian_velocity(S, 2.0);
    REQUIRE(v.size() == 1);
    for (double val : v[0].values) CHECK(val == doctest::Approx(0.3).epsilon(1e-12));
  }
  SUBCASE("constant S gives zero") {
    ScalarField S = make_field(g, ConstantField{4.2});
    const auto v = bohmian_velocity(S, 1.0);
    CHECK(linf_norm(v[0]) == 0.0);
  }
  SUBCASE("S = alpha x^2 / 2 gives v = alpha x / m") {
    const double alpha = 0.8, m = 1.6;
    ScalarField S{g, std::vector<double>(g.num_points())};
    for (int i = 0; i < g.shape[0]; ++i) {
      const double x = g.coordinate(0, i);
      S.values[static_cast<std::size_t>(i)] = 0.5 * alpha * x * x;
    }
    const auto v = bohmian_velocity(S, m);
    // boundary nodes see the linear ghost extrapolation; interior is exact
    for (int i = 2; i < g.shape[0] - 2; ++i) {
      const double x = g.coordinate(0, i);
      CHECK(v[0].values[static_cast<std::size_t>(i)] ==
            doctest::Approx(alpha * x / m).epsilon(1e-10));
    }
  }
  SUBCASE("guidance tracing follows the flow") {
    // v(x) = p/m constant: x(t) = x0 + (p/m) t
    ScalarField S = make_field(g, PlanePhaseField{1.0, {-0.6, 0.0, 0.0}});
    Path p = integrate_guidance(S, 2.0, {-1.0, 0.0, 0.0}, 1e-2, 100);
    REQUIRE(p.stop == StopReason::completed);
    CHECK(p.samples.back().x[0] == doctest::Approx(-0.7).epsilon(1e-10));
  }
}

TEST_CASE("path CSV output") {
  GridSpec g = grid_1d(64, 16.0, Boundary::clamped_ghost);
  ScalarField M = make_field(g, ConstantField{1.0});
  ParticleState s0;
  s0.mode = ParticleMode::rel;
  s0.u = {1.0, 0.0, 0.0, 0.0};
  Path p = integrate_rel_flat(M, s0, 0.5, 2);
  std::ostringstream os;
  write_path_csv(os, p);
  const std::string text = os.str();
  CHECK(text.find("lambda,x0,x1,x2,x3,u0,u1,u2,u3,uu") == 0);
  // header + 3 samples
  int lines = 0;
  for (char c : text)
    if (c == '\n') ++lines;
  CHECK(lines == 4);
}
