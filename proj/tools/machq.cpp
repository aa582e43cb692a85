// machq - command-line surface for the scalar-field quantum-potential and
// trajectory toolkit.  Subcommands read fields from the analytic catalog or
// from files, write results only under --out-dir, and produce bitwise
// identical output for identical argument strings.
//
// Exit codes: 0 ok, 2 input/domain error, 3 non-convergence.

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "machq/ansatz.hpp"
#include "machq/dynamics.hpp"
#include "machq/fieldgen.hpp"
#include "machq/grid.hpp"
#include "machq/potential.hpp"
#include "machq/selftest.hpp"
#include "machq/variational.hpp"

namespace {

using namespace machq;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNoConvergence = 3;

struct CommonOpts {
  std::string grid = "1d,n=256,L=8";
  int order = 4;
  std::string boundary = "periodic";
  std::uint64_t seed = 42;
  std::string out_dir = ".";
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_order = true) {
  cmd->add_option("--grid", opts.grid,
                  "grid spec: 1d|2d|3d,n=<N>,L=<extent>[,t=<Nt>,T=<span>]");
  if (with_order)
    cmd->add_option("--order", opts.order, "stencil order (2 or 4)")
        ->check(CLI::IsMember({2, 4}));
  cmd->add_option("--boundary", opts.boundary, "periodic or clamped")
      ->check(CLI::IsMember({"periodic", "clamped", "clamped-ghost"}));
  cmd->add_option("--seed", opts.seed, "seed for random_periodic sources");
  cmd->add_option("--out-dir", opts.out_dir, "output directory");
}

GridSpec parse_grid(const CommonOpts& opts) {
  std::vector<std::string> parts;
  std::string token;
  std::istringstream is(opts.grid);
  while (std::getline(is, token, ',')) parts.push_back(token);
  if (parts.empty()) throw std::invalid_argument("empty --grid");

  int dims = 0;
  if (parts[0] == "1d") dims = 1;
  else if (parts[0] == "2d") dims = 2;
  else if (parts[0] == "3d") dims = 3;
  else throw std::invalid_argument("--grid must start with 1d, 2d or 3d");

  int n = 256, nt = 0;
  double extent = 8.0, t_span = 0.0;
  for (std::size_t i = 1; i < parts.size(); ++i) {
    const auto eq = parts[i].find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("grid token '" + parts[i] + "' is not key=value");
    const std::string key = parts[i].substr(0, eq);
    const std::string val = parts[i].substr(eq + 1);
    if (key == "n") n = std::stoi(val);
    else if (key == "L") extent = std::stod(val);
    else if (key == "t") nt = std::stoi(val);
    else if (key == "T") t_span = std::stod(val);
    else throw std::invalid_argument("unknown grid key '" + key + "'");
  }

  // n nodes with spacing L/n starting at -L/2, so x = 0 is a node for even
  // n under either boundary; the clamped hull is [-L/2, L/2 - h]
  GridSpec g;
  g.rank = dims;
  g.has_time_axis = false;
  for (int a = 0; a < dims; ++a) {
    g.shape[a] = n;
    g.spacing[a] = extent / n;
    g.origin[a] = -extent / 2.0;
  }
  g.boundary = boundary_from_string(opts.boundary == "clamped" ? "clamped-ghost"
                                                               : opts.boundary);
  g.stencil_order = opts.order;
  validate(g);
  if (nt > 0) {
    if (!(t_span > 0.0)) throw std::invalid_argument("t=<Nt> needs T=<span>");
    g = with_time_axis(g, nt, t_span);
  }
  return g;
}

// Field source: a catalog string, or file:<path> for a saved field.
ScalarField resolve_field(const std::string& source, const CommonOpts& opts,
                          const GridSpec& grid) {
  if (source.rfind("file:", 0) == 0) return load_field(source.substr(5));
  FieldKind kind = parse_field_kind(source);
  if (auto* rp = std::get_if<RandomPeriodicField>(&kind)) {
    if (source.find("seed=") == std::string::npos) rp->seed = opts.seed;
  }
  return make_field(grid, kind);
}

std::filesystem::path out_path(const CommonOpts& opts, const std::string& name) {
  std::filesystem::create_directories(opts.out_dir);
  return std::filesystem::path(opts.out_dir) / name;
}

void write_summary(const CommonOpts& opts, const std::string& name,
                   const ScalarField& f) {
  double lo = f.values.empty() ? 0.0 : f.values[0];
  double hi = lo;
  for (double v : f.values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  nlohmann::json j{{"min", lo}, {"max", hi}, {"l2", l2_norm(f)}};
  std::ofstream os(out_path(opts, name));
  os << j.dump(2) << "\n";
}

std::array<double, 4> parse_vector4(const std::string& text) {
  std::array<double, 4> v{};
  std::istringstream is(text);
  std::string token;
  std::size_t i = 0;
  while (std::getline(is, token, ',')) {
    if (i >= 4) throw std::invalid_argument("too many vector components");
    v[i++] = std::stod(token);
  }
  return v;
}

// --- subcommands -----------------------------------------------------------

struct PotentialArgs {
  CommonOpts common;
  std::string rho;
  double m0 = 1.0, hbar = 1.0;
  double coupling = -1.0; // <= 0 means the hbar^2 default
  bool rel = false, nr = false, dump_qfrak = false;
};

int cmd_potential(const PotentialArgs& a) {
  GridSpec grid = parse_grid(a.common);
  ScalarField rho = resolve_field(a.rho, a.common, grid);
  MassParams params = make_mass_params(a.m0, a.hbar);
  if (a.coupling > 0.0) params.coupling = a.coupling;
  const bool want_rel = a.rel || !a.nr; // relativistic by default

  if (want_rel) {
    QuantumPotential q = quantum_potential_rel(rho, params);
    save_field(q.q, out_path(a.common, "q_rel.json").string());
    write_summary(a.common, "q_rel.summary.json", q.q);
    if (a.dump_qfrak) {
      ScalarField qf = qfrak_field(q.q, params);
      save_field(qf, out_path(a.common, "qfrak.json").string());
      write_summary(a.common, "qfrak.summary.json", qf);
    }
    if (!q.clamped_nodes.empty())
      std::cerr << "note: " << q.clamped_nodes.size()
                << " nodes lifted by the density regularization\n";
  }
  if (a.nr) {
    QuantumPotential q = quantum_potential_nr(rho, params);
    save_field(q.q, out_path(a.common, "q_nr.json").string());
    write_summary(a.common, "q_nr.summary.json", q.q);
  }
  return kExitOk;
}

struct MassArgs {
  CommonOpts common;
  std::string rho;
  std::string qnr;
  double m0 = 1.0, hbar = 1.0, alpha = 1.0;
  std::string order = "exp"; // linear | quadratic | exp
  bool nr = false;
};

int cmd_mass(const MassArgs& a) {
  GridSpec grid = parse_grid(a.common);
  if (a.nr) {
    if (a.qnr.empty())
      throw std::invalid_argument("--nr needs --qnr <source> (a Q_nr field)");
    ScalarField qnr = resolve_field(a.qnr, a.common, grid);
    MassParams params = make_mass_params(a.m0, a.hbar, a.alpha);
    ScalarField m = machian_mass_nr(qnr, params);
    save_field(m, out_path(a.common, "mass_nr.json").string());
    write_summary(a.common, "mass_nr.summary.json", m);
    return kExitOk;
  }
  if (a.rho.empty()) throw std::invalid_argument("mass needs --rho <source>");
  MassOrder order;
  if (a.order == "linear") order = MassOrder::linear;
  else if (a.order == "quadratic") order = MassOrder::quadratic;
  else if (a.order == "exp" || a.order == "exponential") order = MassOrder::exponential;
  else throw std::invalid_argument("--order must be linear, quadratic or exp");

  ScalarField rho = resolve_field(a.rho, a.common, grid);
  MassParams params = make_mass_params(a.m0, a.hbar, a.alpha, order);
  MassSqField m = machian_mass_sq(rho, params);
  save_field(m.m2, out_path(a.common, "mass_sq.json").string());
  write_summary(a.common, "mass_sq.summary.json", m.m2);
  if (m.nonpositive_fraction > 0.0)
    std::cerr << "warning: M^2 non-positive on " << m.nonpositive_fraction * 100.0
              << "% of nodes (outside the small-correction regime)\n";
  return kExitOk;
}

struct ElArgs {
  CommonOpts common;
  std::string family = "C=1,r=0.5,m=-1,n=0,p=1,var=rho";
  std::string rho;
  std::string R;
};

int cmd_el(const ElArgs& a) {
  GridSpec grid = parse_grid(a.common);
  ExponentFamily fam = parse_family(a.family);
  for (const std::string& warning : lint_family(fam))
    std::cerr << "lint: " << warning << "\n";

  const std::string source = fam.variable == PotentialVariable::R
                                 ? (a.R.empty() ? a.rho : a.R)
                                 : a.rho;
  if (source.empty())
    throw std::invalid_argument("el needs a --rho (or --R) field source");
  ScalarField base = resolve_field(source, a.common, grid);
  ELReport rep = fam.variable == PotentialVariable::R ? el_residual_R(fam, base)
                                                      : el_residual_rho(fam, base);
  save_field(rep.residual, out_path(a.common, "el_residual.json").string());
  {
    std::ofstream os(out_path(a.common, "el_report.json"));
    os << el_report_json(rep) << "\n";
  }
  char line[128];
  std::snprintf(line, sizeof line, "l2 = %.17g\nlinf = %.17g\n", rep.l2, rep.linf);
  std::cout << line;
  if (fam.variable == PotentialVariable::rho && fam.m == -1 && fam.n == 0 &&
      fam.p == 1) {
    const ScalarField box_rho = dalembertian(base);
    const double c = fam.coupling * fam.exponent * (2.0 * fam.exponent - 1.0);
    double worst = 0.0;
    for (std::size_t i = 0; i < base.values.size(); ++i)
      worst = std::max(worst, std::abs(rep.residual.values[i] +
                                       c * box_rho.values[i] / base.values[i]));
    std::snprintf(line, sizeof line, "closed_form_linf_dev = %.17g\n", worst);
    std::cout << line;
  }
  return kExitOk;
}

struct SolveRArgs {
  CommonOpts common;
  std::string family = "C=1,r=0.5,m=-1,n=0,p=1,var=rho";
  std::vector<std::string> fields;
  double r_lo = 0.1, r_hi = 2.0, tol = 1e-8;
};

int cmd_solve_r(const SolveRArgs& a) {
  GridSpec grid = parse_grid(a.common);
  ExponentFamily fam = parse_family(a.family);
  std::vector<ScalarField> fields;
  if (a.fields.empty()) {
    for (std::uint64_t seed : {1ull, 2ull, 3ull})
      fields.push_back(make_field(grid, RandomPeriodicField{seed, 4, 2.0}));
  } else {
    for (const std::string& src : a.fields)
      fields.push_back(resolve_field(src, a.common, grid));
  }
  ExponentSolve res = solve_exponent_r(fam, fields, a.r_lo, a.r_hi, a.tol);
  char line[128];
  std::snprintf(line, sizeof line, "r_hat = %.17g\nobjective = %.17g\n", res.r_hat,
                res.objective);
  std::cout << line;
  nlohmann::json j{{"r_hat", res.r_hat},
                   {"objective", res.objective},
                   {"converged", res.converged},
                   {"evaluations", res.evaluations}};
  std::ofstream os(out_path(a.common, "solve_r.json"));
  os << j.dump(2) << "\n";
  if (!res.converged) {
    std::cerr << "error: minimizer at the search boundary (r_hat = " << res.r_hat
              << "); widen the interval\n";
    return kExitNoConvergence;
  }
  return kExitOk;
}

struct TraceArgs {
  CommonOpts common;
  std::string mode = "nr"; // nr | rel | guidance
  std::string mass;
  std::string phase;
  double guidance_mass = 1.0;
  std::string x0 = "0,0,0";
  std::string v0 = "0,0,0";
  std::string u0 = "1,0,0,0";
  std::string g = "0,0,0";
  double dt = 1e-3;
  int steps = 1000;
};

int cmd_trace(const TraceArgs& a) {
  GridSpec grid = parse_grid(a.common);
  Path path;
  if (a.mode == "nr") {
    if (a.mass.empty()) throw std::invalid_argument("trace --mode nr needs --mass");
    ScalarField M = resolve_field(a.mass, a.common, grid);
    ParticleState s0;
    s0.mode = ParticleMode::nr;
    s0.x = parse_vector4(a.x0);
    s0.u = parse_vector4(a.v0);
    ExternalAccel grav;
    const auto gv = parse_vector4(a.g);
    grav.constant = {gv[0], gv[1], gv[2]};
    path = integrate_nr(M, grav, s0, a.dt, a.steps);
  } else if (a.mode == "rel") {
    if (a.mass.empty()) throw std::invalid_argument("trace --mode rel needs --mass");
    ScalarField M = resolve_field(a.mass, a.common, grid);
    ParticleState s0;
    s0.mode = ParticleMode::rel;
    s0.x = parse_vector4(a.x0);
    s0.u = parse_vector4(a.u0);
    path = integrate_rel_flat(M, s0, a.dt, a.steps);
  } else if (a.mode == "guidance") {
    if (a.phase.empty())
      throw std::invalid_argument("trace --mode guidance needs --S");
    ScalarField S = resolve_field(a.phase, a.common, grid);
    const auto x0 = parse_vector4(a.x0);
    path = integrate_guidance(S, a.guidance_mass, {x0[0], x0[1], x0[2]}, a.dt,
                              a.steps);
  } else {
    throw std::invalid_argument("--mode must be nr, rel or guidance");
  }

  std::ofstream os(out_path(a.common, "path.csv"));
  write_path_csv(os, path);
  if (path.stop == StopReason::hull_exit) {
    const std::size_t steps_taken =
        path.samples.empty() ? 0 : path.samples.size() - 1;
    std::cerr << "warning: trajectory left the grid hull; path truncated after "
              << steps_taken << " steps\n";
  }
  if (path.stop == StopReason::norm_drift) {
    std::cerr << "error: four-velocity norm drift exceeded 1e-6 (max "
              << path.max_norm_drift << "); reduce the step\n";
    return kExitNoConvergence;
  }
  return kExitOk;
}

struct GuidanceArgs {
  CommonOpts common;
  std::string phase;
  double mass = 1.0;
};

int cmd_guidance(const GuidanceArgs& a) {
  GridSpec grid = parse_grid(a.common);
  ScalarField S = resolve_field(a.phase, a.common, grid);
  const auto v = bohmian_velocity(S, a.mass);
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string name = "velocity_" + std::to_string(i);
    save_field(v[i], out_path(a.common, name + ".json").string());
    write_summary(a.common, name + ".summary.json", v[i]);
  }
  return kExitOk;
}

int cmd_selftest(const CommonOpts& common) {
  const auto results = run_selftest();
  int failures = 0;
  nlohmann::json items = nlohmann::json::array();
  for (const CriterionResult& r : results) {
    if (!r.pass) ++failures;
    std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.id << " " << r.name << ": "
              << r.detail << "\n";
    items.push_back(
        {{"id", r.id}, {"name", r.name}, {"pass", r.pass}, {"detail", r.detail}});
  }
  nlohmann::json j{{"criteria", items}, {"failures", failures}};
  std::ofstream os(out_path(common, "selftest_report.json"));
  os << j.dump(2) << "\n";
  std::cout << (failures == 0 ? "all criteria passed\n"
                              : std::to_string(failures) + " criteria failed\n");
  return failures == 0 ? kExitOk : 1;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"machq - scalar-field quantum potential and trajectory toolkit"};
  app.require_subcommand(1);

  PotentialArgs pot;
  CLI::App* c_pot = app.add_subcommand("potential", "quantum potential fields");
  add_common(c_pot, pot.common);
  c_pot->add_option("--rho", pot.rho, "density source")->required();
  c_pot->add_option("--m0", pot.m0, "rest mass");
  c_pot->add_option("--hbar", pot.hbar, "hbar");
  c_pot->add_option("--C", pot.coupling, "coupling (default hbar^2)");
  c_pot->add_flag("--rel", pot.rel, "relativistic dimensionless Q (default)");
  c_pot->add_flag("--nr", pot.nr, "nonrelativistic energy-valued Q");
  c_pot->add_flag("--dump-qfrak", pot.dump_qfrak, "also write Qfrak = m0^2 Q");

  // mass reuses --order for the expansion order; the stencil order moves to
  // --stencil-order on this subcommand only
  MassArgs mass;
  CLI::App* c_mass = app.add_subcommand("mass", "effective mass fields");
  add_common(c_mass, mass.common, /*with_order=*/false);
  c_mass->add_option("--order", mass.order, "linear | quadratic | exp")
      ->check(CLI::IsMember({"linear", "quadratic", "exp", "exponential"}));
  c_mass->add_option("--stencil-order", mass.common.order, "stencil order (2 or 4)")
      ->check(CLI::IsMember({2, 4}));
  c_mass->add_option("--rho", mass.rho, "density source");
  c_mass->add_option("--qnr", mass.qnr, "Q_nr field source (with --nr)");
  c_mass->add_option("--m0", mass.m0, "rest mass");
  c_mass->add_option("--hbar", mass.hbar, "hbar");
  c_mass->add_option("--alpha", mass.alpha, "mass-scale constant (with --nr)");
  c_mass->add_flag("--nr", mass.nr, "nonrelativistic M = alpha exp(2 Q_nr / m0)");

  ElArgs el;
  CLI::App* c_el = app.add_subcommand("el", "Euler-Lagrange residual report");
  add_common(c_el, el.common);
  c_el->add_option("--family", el.family, "potential family string");
  c_el->add_option("--rho", el.rho, "density source (rho-variable families)");
  c_el->add_option("--R", el.R, "amplitude source (R-variable families)");

  SolveRArgs solver;
  CLI::App* c_solve = app.add_subcommand("solve-r", "recover the density exponent");
  add_common(c_solve, solver.common);
  c_solve->add_option("--family", solver.family, "family template");
  c_solve->add_option(
      "--field", solver.fields,
      "test field source (repeatable; default random_periodic seeds 1-3)");
  c_solve->add_option("--r-lo", solver.r_lo, "search interval lower edge");
  c_solve->add_option("--r-hi", solver.r_hi, "search interval upper edge");
  c_solve->add_option("--tol", solver.tol, "interval width tolerance");

  TraceArgs trace;
  CLI::App* c_trace = app.add_subcommand("trace", "integrate a trajectory");
  add_common(c_trace, trace.common);
  c_trace->add_option("--mode", trace.mode, "nr | rel | guidance");
  c_trace->add_option("--mass", trace.mass, "mass field source (nr/rel)");
  c_trace->add_option("--S", trace.phase, "phase field source (guidance)");
  c_trace->add_option("--m", trace.guidance_mass, "guidance mass");
  c_trace->add_option("--x0", trace.x0, "initial position (comma separated)");
  c_trace->add_option("--v0", trace.v0, "initial velocity (nr)");
  c_trace->add_option("--u0", trace.u0, "initial four-velocity (rel)");
  c_trace->add_option("--g", trace.g, "constant external acceleration");
  c_trace->add_option("--dt", trace.dt, "step (dt or dlambda)");
  c_trace->add_option("--steps", trace.steps, "number of steps");

  GuidanceArgs guidance;
  CLI::App* c_guidance = app.add_subcommand("guidance", "guidance velocity field");
  add_common(c_guidance, guidance.common);
  c_guidance->add_option("--S", guidance.phase, "phase field source")->required();
  c_guidance->add_option("--m", guidance.mass, "particle mass");

  CommonOpts selftest_common;
  CLI::App* c_selftest =
      app.add_subcommand("selftest", "run the built-in verification suite");
  add_common(c_selftest, selftest_common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (c_pot->parsed()) return cmd_potential(pot);
    if (c_mass->parsed()) return cmd_mass(mass);
    if (c_el->parsed()) return cmd_el(el);
    if (c_solve->parsed()) return cmd_solve_r(solver);
    if (c_trace->parsed()) return cmd_trace(trace);
    if (c_guidance->parsed()) return cmd_guidance(guidance);
    if (c_selftest->parsed()) return cmd_selftest(selftest_common);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitOk;
}
