#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <string>
#include <random>

#include "machq/ansatz.hpp"
#include "machq/fieldgen.hpp"
#include "machq/grid.hpp"

using namespace machq;

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

TEST_CASE("family construction rules") {
  CHECK_THROWS_AS(make_family(1.0, 0.5, -1, 1, 0), std::invalid_argument); // odd n
  CHECK_THROWS_AS(make_family(1.0, 0.5, -1, -2, 3), std::invalid_argument);
  CHECK_THROWS_AS(make_family(1.0, 0.0, -1, 0, 1), std::invalid_argument); // r = 0
  CHECK(scale_invariant(make_family(1.0, 0.5, -1, 0, 1)));
  CHECK(!scale_invariant(make_family(1.0, 0.5, -1, 0, 2)));
  CHECK(lint_family(make_family(1.0, 0.5, -1, 0, 1)).empty());
  CHECK(!lint_family(make_family(1.0, 0.5, 1, 0, -1)).empty());
}

TEST_CASE("family string round trip") {
  ExponentFamily fam = parse_family("C=2,r=0.25,m=-2,n=2,p=0,var=R");
  CHECK(fam.coupling == 2.0);
  CHECK(fam.exponent == 0.25);
  CHECK(fam.m == -2);
  CHECK(fam.n == 2);
  CHECK(fam.p == 0);
  CHECK(fam.variable == PotentialVariable::R);
  CHECK_THROWS_AS(parse_family("C=1,bogus=3"), std::invalid_argument);
}

TEST_CASE("evaluate on closed-form cases") {
  SUBCASE("constant density gives zero for p >= 1") {
    GridSpec g = grid_1d(64, 4.0);
    ScalarField rho = make_field(g, ConstantField{5.0});
    ExponentFamily fam = make_family(1.0, 0.5, -1, 0, 1);
    CHECK(linf_norm(evaluate_potential(fam, rho)) == 0.0);
  }
  SUBCASE("rho = exp(2kx) gives -k^2") {
    const double k = 0.4;
    GridSpec g = grid_1d(256, 4.0, Boundary::clamped_ghost);
    ScalarField rho = make_field(g, ExponentialField{{2.0 * k}});
    ScalarField q = evaluate_potential(make_family(1.0, 0.5, -1, 0, 1), rho);
    ScalarField dev = shift(q, k * k);
    CHECK(linf_norm_interior(dev, 16) < 1e-9);
  }
  SUBCASE("R-mode (-2,0,2) on exp(kx) gives k^4") {
    const double k = 0.5;
    GridSpec g = grid_1d(256, 4.0, Boundary::clamped_ghost);
    ScalarField R = make_field(g, ExponentialField{{k}});
    ExponentFamily fam = make_family(1.0, 0.5, -2, 0, 2, PotentialVariable::R);
    ScalarField q = evaluate_potential(fam, R);
    ScalarField dev = shift(q, -k * k * k * k);
    CHECK(linf_norm_interior(dev, 16) < 1e-9);
  }
}

TEST_CASE("expanded form matches the direct evaluation") {
  GridSpec g = grid_1d(512, kTwoPi, Boundary::periodic);
  ScalarField rho = make_field(g, RandomPeriodicField{11, 4, 2.0});
  for (double r : {0.5, 2.0}) {
    ExponentFamily fam = make_family(1.0, r, -1, 0, 1);
    ScalarField a = evaluate_potential(fam, rho);
    ScalarField b = expanded_potential(fam, rho);
    CHECK(linf_norm(sub(a, b)) < 1e-7); // stencil-order difference only
  }
  SUBCASE("r = 1 collapses to C box(rho)/rho") {
    ExponentFamily fam = make_family(1.0, 1.0, -1, 0, 1);
    ScalarField a = evaluate_potential(fam, rho);
    ScalarField b = expanded_potential(fam, rho);
    CHECK(linf_norm(sub(a, b)) < 1e-13 * linf_norm(a));
  }
  SUBCASE("constant rho gives zero") {
    ScalarField c = make_field(g, ConstantField{2.0});
    ExponentFamily fam = make_family(1.0, 0.5, -1, 0, 1);
    CHECK(linf_norm(expanded_potential(fam, c)) == 0.0);
  }
  SUBCASE("only the (-1,0,1) shape is accepted") {
    ExponentFamily fam = make_family(1.0, 0.5, -2, 0, 2);
    CHECK_THROWS_AS(expanded_potential(fam, rho), std::invalid_argument);
  }
}

TEST_CASE("scale defects") {
  // modest resolution keeps stencil rounding amplification below 1e-12
  GridSpec g = grid_1d(64, kTwoPi, Boundary::periodic);
  ScalarField rho = make_field(g, RandomPeriodicField{5, 4, 2.0});

  SUBCASE("gamma = 1 is exactly zero") {
    ExponentFamily fam = make_family(1.0, 0.5, -1, 0, 1);
    CHECK(scale_defect(fam, rho, 1.0).value == 0.0);
  }
  SUBCASE("invariant families stay below 1e-12") {
    for (const ExponentFamily& fam :
         {make_family(1.0, 0.5, -1, 0, 1), make_family(1.0, 0.5, -2, 0, 2),
          make_family(1.0, 0.5, -4, 2, 2)}) {
      REQUIRE(scale_invariant(fam));
      for (double gamma : {1e-3, 7.3, 1e3}) {
        auto d = scale_defect(fam, rho, gamma);
        CHECK(d.is_relative);
        CHECK(d.value < 1e-12);
      }
    }
  }
  SUBCASE("non-invariant families show gamma^(r(m+n+p)) - 1") {
    ExponentFamily fam = make_family(1.0, 0.5, -1, 0, 2); // m+n+p = 1
    auto d = scale_defect(fam, rho, 2.0);
    CHECK(d.value == doctest::Approx(std::sqrt(2.0) - 1.0).epsilon(1e-9));
    for (double gamma : {1e-3, 7.3, 1e3}) {
      ExponentFamily down = make_family(1.0, 0.5, -2, 0, 1); // m+n+p = -1
      CHECK(scale_defect(down, rho, gamma).value > 1e-6);
    }
  }
  SUBCASE("identically zero potential flags the absolute fallback") {
    ScalarField c = make_field(g, ConstantField{1.0});
    ExponentFamily fam = make_family(1.0, 0.5, -1, 0, 1);
    auto d = scale_defect(fam, c, 2.0);
    CHECK(!d.is_relative);
    CHECK(d.value == 0.0);
  }
}

TEST_CASE("pointwise partials closed forms for (-1,0,1,r)") {
  const double C = 1.7, r = 0.5, X = 1.3;
  ExponentFamily fam = make_family(C, r, -1, 0, 1);
  SlotPoint s;
  s.rank = 4;
  s.has_time = true;
  s.base = X;
  s.dbase = {0.2, -0.4, 0.1, 0.05};
  s.box_base = 0.7;

  SlotPartials d = potential_partials(fam, s);
  CHECK(d.d_box == doctest::Approx(C * r / X).epsilon(1e-14));
  // dQ/d(d_mu rho) = 2 C r (r-1) d^mu(rho) / rho^2, raised components
  const double coeff = 2.0 * C * r * (r - 1.0) / (X * X);
  CHECK(d.d_grad[0] == doctest::Approx(coeff * s.dbase[0]).epsilon(1e-13));
  CHECK(d.d_grad[1] == doctest::Approx(-coeff * s.dbase[1]).epsilon(1e-13));

  SUBCASE("all derivative slots zero with p >= 1 kills Q and dQ/drho") {
    s.dbase = {};
    s.box_base = 0.0;
    CHECK(potential_at(fam, s) == 0.0);
    CHECK(potential_partials(fam, s).d_base == 0.0);
  }
}

TEST_CASE("partials agree with finite differences of the slot form") {
  std::mt19937_64 rng(1234);
  auto u01 = [&]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  const ExponentFamily fams[] = {
      make_family(1.0, 0.5, -1, 0, 1),
      make_family(1.0, 2.0, -1, 0, 1),
      make_family(0.8, 0.5, -2, 0, 2, PotentialVariable::R),
      make_family(1.0, 0.5, -4, 2, 2),
  };
  for (const ExponentFamily& fam : fams) {
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      SlotPoint s;
      s.rank = 4;
      s.has_time = true;
      s.base = 0.5 + 2.5 * u01();
      for (int a = 0; a < 4; ++a) s.dbase[a] = 2.0 * u01() - 1.0;
      s.box_base = 4.0 * u01() - 2.0;

      const SlotPartials an = potential_partials(fam, s);
      auto central = [&](auto setter, double v0) {
        const double h = 1e-6 * std::max(1.0, std::abs(v0));
        SlotPoint hi = s, lo = s;
        setter(hi, v0 + h);
        setter(lo, v0 - h);
        return (potential_at(fam, hi) - potential_at(fam, lo)) / (2.0 * h);
      };
      auto rel = [](double a, double b) {
        return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-9});
      };
      worst = std::max(worst, rel(an.d_base, central([](SlotPoint& q, double v) { q.base = v; }, s.base)));
      worst = std::max(worst, rel(an.d_box, central([](SlotPoint& q, double v) { q.box_base = v; }, s.box_base)));
      for (int a = 0; a < 4; ++a)
        worst = std::max(worst,
                         rel(an.d_grad[a], central([a](SlotPoint& q, double v) { q.dbase[a] = v; },
                                                   s.dbase[a])));
    }
    CHECK(worst < 1e-6);
  }
}
