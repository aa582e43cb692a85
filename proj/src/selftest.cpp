#include "machq/selftest.hpp"

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <ostream>
#include <random>
#include <sstream>

#include "machq/ansatz.hpp"
#include "machq/dynamics.hpp"
#include "machq/fieldgen.hpp"
#include "machq/grid.hpp"
#include "machq/potential.hpp"
#include "machq/variational.hpp"

namespace machq {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof buf, format, args);
  va_end(args);
  return buf;
}

struct Check {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.str().empty()) detail << "; ";
    detail << (ok ? "" : "FAILED: ") << what;
  }
};

double closed_form_linf(const ExponentFamily& fam, const ScalarField& rho,
                        int margin) {
  const ELReport rep = el_residual_rho(fam, rho);
  const ScalarField box_rho = dalembertian(rho);
  ScalarField dev{rho.spec, std::vector<double>(rho.values.size())};
  const double c = fam.coupling * fam.exponent * (2.0 * fam.exponent - 1.0);
  for (std::size_t i = 0; i < dev.values.size(); ++i)
    dev.values[i] = rep.residual.values[i] + c * box_rho.values[i] / rho.values[i];
  return linf_norm_interior(dev, margin);
}

CriterionResult criterion_1_exponent_recovery() {
  Check c;
  GridSpec g = grid_1d(512, kTwoPi, Boundary::periodic, 4);
  std::vector<ScalarField> fields;
  for (std::uint64_t seed : {1ull, 2ull, 3ull})
    fields.push_back(make_field(g, RandomPeriodicField{seed, 4, 2.0}));
  ExponentFamily tmpl = make_family(1.0, 0.5, -1, 0, 1);

  ExponentSolve res = solve_exponent_r(tmpl, fields, 0.1, 2.0, 1e-8);
  ExponentFamily at1 = tmpl;
  at1.exponent = 1.0;
  double obj1 = 0.0;
  for (const ScalarField& f : fields) {
    const double l2 = el_residual_rho(at1, f).l2;
    obj1 += l2 * l2;
  }
  c.require(res.converged, "interior minimum");
  c.require(res.r_hat >= 0.4995 && res.r_hat <= 0.5005,
            fmt("r_hat=%.7f in [0.4995,0.5005]", res.r_hat));
  c.require(obj1 >= 1e3 * res.objective,
            fmt("objective ratio %.3g >= 1e3", obj1 / res.objective));
  return {1, "exponent recovery", c.pass, c.detail.str(), 0.0};
}

CriterionResult criterion_2_closed_form() {
  Check c;
  GridSpec gp1 = grid_1d(512, kTwoPi, Boundary::periodic, 4);
  GridSpec gp2 = grid_1d(1024, kTwoPi, Boundary::periodic, 4);
  ScalarField per1 = make_field(gp1, RandomPeriodicField{7, 4, 2.0});
  ScalarField per2 = make_field(gp2, RandomPeriodicField{7, 4, 2.0});
  GridSpec gc1 = grid_1d(512, 12.0, Boundary::clamped_ghost, 4);
  GridSpec gc2 = grid_1d(1024, 12.0, Boundary::clamped_ghost, 4);
  ScalarField gau1 = make_field(gc1, GaussianField{1.0, {}});
  ScalarField gau2 = make_field(gc2, GaussianField{1.0, {}});

  // a deviation at the rounding floor satisfies any K h^4 bound; otherwise
  // the measured halving rate must sit in [3.5, 4.5]
  auto check_pair = [&](const char* label, double e1, double e2) {
    if (e2 < 1e-10) {
      c.require(true, fmt("%s floor %.2g", label, e2));
      return;
    }
    const double rate = std::log2(e1 / e2);
    c.require(rate >= 3.5 && rate <= 4.5,
              fmt("%s e=%.3g rate=%.2f", label, e1, rate));
  };
  for (double r : {0.25, 1.0, 2.0}) {
    ExponentFamily fam = make_family(1.0, r, -1, 0, 1);
    check_pair(fmt("rp r=%.2f", r).c_str(), closed_form_linf(fam, per1, 0),
               closed_form_linf(fam, per2, 0));
    check_pair(fmt("gauss r=%.2f", r).c_str(), closed_form_linf(fam, gau1, 24),
               closed_form_linf(fam, gau2, 48));
  }
  return {2, "closed-form residual identity", c.pass, c.detail.str(), 0.0};
}

CriterionResult criterion_3_scale_invariance() {
  Check c;
  GridSpec g = grid_1d(64, kTwoPi, Boundary::periodic, 4);
  ScalarField rho = make_field(g, RandomPeriodicField{5, 4, 2.0});
  ExponentFamily fam = make_family(1.0, 0.5, -1, 0, 1);
  for (double gamma : {1e-3, 7.3, 1e3}) {
    const ScaleDefect d = scale_defect(fam, rho, gamma);
    c.require(d.is_relative && d.value < 1e-12,
              fmt("gamma=%g defect=%.3g", gamma, d.value));
  }
  ExponentFamily off = make_family(1.0, 0.5, -1, 0, 2); // m+n+p = 1
  const ScaleDefect d2 = scale_defect(off, rho, 2.0);
  const double want = std::sqrt(2.0) - 1.0;
  c.require(std::abs(d2.value - want) <= 1e-9,
            fmt("(-1,0,2) gamma=2 defect=%.12f vs sqrt(2)-1", d2.value));
  return {3, "scale invariance", c.pass, c.detail.str(), 0.0};
}

CriterionResult criterion_4_quantum_potential() {
  Check c;
  GridSpec g = grid_1d(1024, 16.0, Boundary::periodic, 4); // x=0 at node 512
  ScalarField rho = make_field(g, GaussianField{1.0, {}});
  MassParams p = make_mass_params(1.0, 1.0);
  const double q_rel = quantum_potential_rel(rho, p).q.values[512];
  const double q_nr = quantum_potential_nr(rho, p).q.values[512];
  c.require(std::abs(q_rel - 0.5) <= 1e-6, fmt("Q_rel(0)=%.9f", q_rel));
  c.require(std::abs(q_nr - 0.25) <= 1e-6, fmt("Q_nr(0)=%.9f", q_nr));

  ScalarField flat = make_field(g, ConstantField{2.0});
  c.require(linf_norm(quantum_potential_rel(flat, p).q) == 0.0, "constant rho -> 0");
  c.require(linf_norm(quantum_potential_nr(flat, p).q) == 0.0, "constant rho -> 0 (nr)");
  return {4, "quantum potential oracle", c.pass, c.detail.str(), 0.0};
}

CriterionResult criterion_5_effective_mass() {
  Check c;
  // gaussian linear order at the peak
  GridSpec gg = grid_1d(1024, 16.0, Boundary::periodic, 4);
  ScalarField gauss = make_field(gg, GaussianField{1.0, {}});
  auto lin = machian_mass_sq(gauss, make_mass_params(1.0, 1.0, 1.0, MassOrder::linear));
  c.require(std::abs(lin.m2.values[512] - 1.5) <= 1e-6,
            fmt("linear M2(0)=%.9f", lin.m2.values[512]));

  // exponential vs quadratic on the constraint surface, k = 0.2
  const double k = 0.2, q = -k * k;
  GridSpec ge = grid_1d(512, 8.0, Boundary::clamped_ghost, 4);
  ScalarField rho = make_field(ge, ExponentialField{{2.0 * k}});
  auto me = machian_mass_sq(rho, make_mass_params(1.0, 1.0, 1.0, MassOrder::exponential));
  auto mq = machian_mass_sq(rho, make_mass_params(1.0, 1.0, 1.0, MassOrder::quadratic));
  const double diff = linf_norm_interior(sub(me.m2, mq.m2), 16);
  c.require(diff <= std::abs(q * q * q),
            fmt("|M2_exp - M2_quad|=%.3g <= |Q|^3=%.3g", diff, std::abs(q * q * q)));

  // constraint defect: analytic derivatives, then the numeric route
  ScalarField R = make_field(ge, ExponentialField{{k}});
  ScalarField box_ref = analytic_reference(ge, ExponentialField{{k}}, DiffOp::box);
  ScalarField box2_ref = analytic_reference(ge, ExponentialField{{k}}, DiffOp::box2);
  ScalarField defect_ref = sub(mul(box_ref, box_ref), mul(R, box2_ref));
  c.require(linf_norm(defect_ref) <= 1e-8,
            fmt("analytic defect=%.3g", linf_norm(defect_ref)));
  const double h = ge.spacing[0];
  const double numeric = linf_norm_interior(constraint_defect(R), 16);
  c.require(numeric <= 10.0 * h * h * h * h,
            fmt("numeric defect=%.3g <= 10 h^4=%.3g", numeric, 10 * h * h * h * h));

  GridSpec gg4 = grid_1d(512, 8.0, Boundary::clamped_ghost, 4);
  ScalarField Rg = make_field(gg4, GaussianField{1.0, {}});
  const double gdef = linf_norm_interior(constraint_defect(Rg), 16);
  c.require(gdef > 0.01, fmt("gaussian defect=%.3g > 0.01", gdef));
  return {5, "effective mass", c.pass, c.detail.str(), 0.0};
}

CriterionResult criterion_6_R_form() {
  Check c;
  ExponentFamily fam = make_family(1.0, 0.5, -2, 0, 2, PotentialVariable::R);

  GridSpec g = grid_1d(128, 8.0, Boundary::clamped_ghost, 4);
  ScalarField R = make_field(g, GaussianField{1.0, {}});
  ELReport rep = el_residual_R(fam, R);
  ScalarField defect = constraint_defect(R);
  double worst = 0.0;
  for (std::size_t i = 0; i < R.values.size(); ++i) {
    const double rhs = -2.0 / R.values[i] * defect.values[i];
    worst = std::max(worst, std::abs(rep.residual.values[i] - rhs));
  }
  c.require(worst <= 1e-12 * rep.linf,
            fmt("identity rel dev=%.3g", worst / rep.linf));
  c.require(linf_norm_interior(rep.residual, 8) > 0.01,
            fmt("gaussian linf=%.3g > 0.01", linf_norm_interior(rep.residual, 8)));

  GridSpec ge = grid_1d(512, 8.0, Boundary::clamped_ghost, 4);
  ScalarField Re = make_field(ge, ExponentialField{{0.2}});
  const double evan = linf_norm_interior(el_residual_R(fam, Re).residual, 16);
  c.require(evan <= 1e-6, fmt("exponential linf=%.3g", evan));
  return {6, "R-form residual", c.pass, c.detail.str(), 0.0};
}

CriterionResult criterion_7_dynamics() {
  Check c;
  // u.u drift over 1e4 steps at dlambda = 1e-3
  {
    GridSpec g = grid_1d(1024, 20.0, Boundary::clamped_ghost, 4, -4.0);
    ScalarField M = make_field(g, ExponentialField{{0.2}});
    ParticleState s0;
    s0.mode = ParticleMode::rel;
    s0.u = {1.0, 0.0, 0.0, 0.0};
    Path p = integrate_rel_flat(M, s0, 1e-3, 10000);
    c.require(p.stop == StopReason::completed && p.max_norm_drift <= 1e-8,
              fmt("drift=%.3g over 1e4 steps", p.max_norm_drift));
  }
  // nonrelativistic closed form x(1) = -k/2 for M = exp(2kx), k = 0.3
  {
    const double k = 0.3;
    GridSpec g = grid_1d(256, 4.0, Boundary::clamped_ghost, 4);
    ScalarField M = make_field(g, ExponentialField{{2.0 * k}});
    ParticleState s0;
    s0.mode = ParticleMode::nr;
    Path p = integrate_nr(M, ExternalAccel{}, s0, 1e-3, 1000);
    const double err = std::abs(p.samples.back().x[0] + 0.5 * k);
    c.require(p.stop == StopReason::completed && err <= 1e-8,
              fmt("|x(1)+k/2|=%.3g", err));
  }
  // slow start: relativistic and nonrelativistic paths agree
  {
    const double k = 0.001;
    GridSpec g = grid_1d(256, 4.0, Boundary::clamped_ghost, 4);
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
    c.require(worst / span <= 1e-4, fmt("rel-vs-nr=%.3g", worst / span));
  }
  // forward-backward reversibility
  {
    const double k = 0.3;
    GridSpec g = grid_1d(256, 4.0, Boundary::clamped_ghost, 4);
    ScalarField M = make_field(g, ExponentialField{{2.0 * k}});
    ParticleState s0;
    s0.mode = ParticleMode::nr;
    s0.x = {0.5, 0.0, 0.0, 0.0};
    s0.u = {0.2, 0.0, 0.0, 0.0};
    Path fwd = integrate_nr(M, ExternalAccel{}, s0, 1e-3, 1000);
    ParticleState s1 = s0;
    s1.x = fwd.samples.back().x;
    for (int i = 0; i < 3; ++i)
      s1.u[static_cast<std::size_t>(i)] = -fwd.samples.back().u[static_cast<std::size_t>(i)];
    Path back = integrate_nr(M, ExternalAccel{}, s1, 1e-3, 1000);
    const double ret = std::abs(back.samples.back().x[0] - s0.x[0]);
    c.require(ret <= 1e-9, fmt("return distance=%.3g", ret));
  }
  return {7, "dynamics", c.pass, c.detail.str(), 0.0};
}

CriterionResult criterion_8_gradient_checks() {
  Check c;
  std::mt19937_64 rng(20240817);
  auto u01 = [&]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  const ExponentFamily fams[] = {
      make_family(1.0, 0.5, -1, 0, 1),
      make_family(1.0, 2.0, -1, 0, 1),
      make_family(1.0, 0.5, -2, 0, 2, PotentialVariable::R),
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
        worst = std::max(worst, rel(an.d_grad[a],
                                    central([a](SlotPoint& q, double v) { q.dbase[a] = v; },
                                            s.dbase[a])));
    }
    c.require(worst < 1e-6, fmt("%s worst=%.3g", family_to_string(fam).c_str(), worst));
  }
  return {8, "gradient checks", c.pass, c.detail.str(), 0.0};
}

CriterionResult criterion_9_hamilton_jacobi() {
  Check c;
  GridSpec gs = grid_1d(128, 8.0, Boundary::clamped_ghost, 4);
  GridSpec g = with_time_axis(gs, 64, 4.0);
  // on-shell plane phase: E^2 - p^2 = 1.5625 - 0.5625 = m0^2 = 1
  ScalarField S = make_field(g, PlanePhaseField{1.25, {0.75, 0.0, 0.0}});
  ScalarField rho = make_field(g, ConstantField{2.0});
  ExponentFamily fam = make_family(1.0, 0.5, -1, 0, 1);
  const double linf = linf_norm(hj_residual(S, rho, fam, 1.0));
  c.require(linf <= 1e-10, fmt("bracket linf=%.3g", linf));
  return {9, "hamilton-jacobi bracket", c.pass, c.detail.str(), 0.0};
}

} // namespace

std::vector<CriterionResult> run_selftest() {
  using Clock = std::chrono::steady_clock;
  std::vector<CriterionResult> results;
  CriterionResult (*criteria[])() = {
      criterion_1_exponent_recovery, criterion_2_closed_form,
      criterion_3_scale_invariance,  criterion_4_quantum_potential,
      criterion_5_effective_mass,    criterion_6_R_form,
      criterion_7_dynamics,          criterion_8_gradient_checks,
      criterion_9_hamilton_jacobi,
  };
  for (auto* fn : criteria) {
    const auto t0 = Clock::now();
    CriterionResult r = fn();
    r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    results.push_back(std::move(r));
  }
  // criterion 1 carries its own runtime budget
  for (CriterionResult& r : results)
    if (r.id == 1 && r.seconds > 10.0) {
      r.pass = false;
      r.detail += fmt("; FAILED: runtime %.1fs > 10s", r.seconds);
    }
  return results;
}

int print_selftest(std::ostream& os) {
  int failures = 0;
  for (const CriterionResult& r : run_selftest()) {
    if (!r.pass) ++failures;
    os << (r.pass ? "[PASS] " : "[FAIL] ") << r.id << " " << r.name << ": "
       << r.detail << fmt(" (%.2fs)", r.seconds) << "\n";
  }
  return failures;
}

} // namespace machq
