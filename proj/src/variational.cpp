#include "machq/variational.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace machq {

namespace {

ELReport el_residual_generic(const ExponentFamily& fam, const ScalarField& base) {
  const GridSpec& spec = base.spec;
  const std::size_t total = spec.num_points();
  const bool r_mode = fam.variable == PotentialVariable::R;

  std::vector<ScalarField> grads(static_cast<std::size_t>(spec.rank));
  for (int a = 0; a < spec.rank; ++a)
    grads[static_cast<std::size_t>(a)] = partial(base, a);
  const ScalarField box_base = dalembertian(base);

  // weight rho (rho mode) or R^2 (R mode)
  std::vector<double> weight(total);
  for (std::size_t i = 0; i < total; ++i) {
    const double x = base.values[i];
    weight[i] = r_mode ? x * x : x;
  }

  ScalarField term1{spec, std::vector<double>(total)};
  std::vector<ScalarField> flux(static_cast<std::size_t>(spec.rank));
  for (auto& f : flux) f = ScalarField{spec, std::vector<double>(total)};
  ScalarField box_arg{spec, std::vector<double>(total)};

  SlotPoint pt;
  pt.rank = spec.rank;
  pt.has_time = spec.has_time_axis;
  for (std::size_t i = 0; i < total; ++i) {
    pt.base = base.values[i];
    for (int a = 0; a < spec.rank; ++a)
      pt.dbase[a] = grads[static_cast<std::size_t>(a)].values[i];
    pt.box_base = box_base.values[i];
    const SlotPartials d = potential_partials(fam, pt);
    term1.values[i] = weight[i] * d.d_base;
    for (int a = 0; a < spec.rank; ++a)
      flux[static_cast<std::size_t>(a)].values[i] = weight[i] * d.d_grad[a];
    box_arg.values[i] = weight[i] * d.d_box;
  }

  ScalarField residual = std::move(term1);
  for (int a = 0; a < spec.rank; ++a) {
    const ScalarField div_a = partial(flux[static_cast<std::size_t>(a)], a);
    for (std::size_t i = 0; i < total; ++i) residual.values[i] -= div_a.values[i];
  }
  const ScalarField box_term = dalembertian(box_arg);
  for (std::size_t i = 0; i < total; ++i) residual.values[i] += box_term.values[i];

  ELReport report;
  report.l2 = l2_norm(residual);
  report.linf = linf_norm(residual);
  report.residual = std::move(residual);
  report.family = fam;
  report.grid_spacing = spec.spacing;
  return report;
}

} // namespace

ELReport el_residual_rho(const ExponentFamily& fam, const ScalarField& rho) {
  if (fam.variable != PotentialVariable::rho)
    throw std::invalid_argument("el_residual_rho needs a rho-variable family");
  return el_residual_generic(fam, rho);
}

ELReport el_residual_R(const ExponentFamily& fam, const ScalarField& R) {
  if (fam.variable != PotentialVariable::R)
    throw std::invalid_argument("el_residual_R needs an R-variable family");
  return el_residual_generic(fam, R);
}

std::string el_report_json(const ELReport& report) {
  nlohmann::json j;
  j["family"] = {{"C", report.family.coupling}, {"r", report.family.exponent},
                 {"m", report.family.m},        {"n", report.family.n},
                 {"p", report.family.p},
                 {"var", report.family.variable == PotentialVariable::R ? "R" : "rho"}};
  j["l2"] = report.l2;
  j["linf"] = report.linf;
  const GridSpec& spec = report.residual.spec;
  j["grid"] = {
      {"shape", std::vector<int>(spec.shape.begin(), spec.shape.begin() + spec.rank)},
      {"spacing",
       std::vector<double>(spec.spacing.begin(), spec.spacing.begin() + spec.rank)},
      {"boundary", to_string(spec.boundary)},
      {"stencil_order", spec.stencil_order}};
  return j.dump(2);
}

ExponentSolve solve_exponent_r(const ExponentFamily& family_template,
                               const std::vector<ScalarField>& test_fields,
                               double r_lo, double r_hi, double tol) {
  if (test_fields.empty())
    throw std::invalid_argument("solve_exponent_r needs at least one test field");
  if (!(r_lo < r_hi)) throw std::invalid_argument("empty search interval");
  if (r_lo <= 0.0 && r_hi >= 0.0)
    throw std::invalid_argument("search interval must exclude r = 0");
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");

  ExponentSolve result;
  auto objective = [&](double r) {
    ExponentFamily fam = family_template;
    fam.exponent = r;
    double acc = 0.0;
    for (const ScalarField& field : test_fields) {
      const double l2 = el_residual_rho(fam, field).l2;
      acc += l2 * l2;
    }
    ++result.evaluations;
    return acc;
  };

  constexpr double kGolden = 0.6180339887498948482;
  double a = r_lo, b = r_hi;
  double x1 = b - kGolden * (b - a);
  double x2 = a + kGolden * (b - a);
  double f1 = objective(x1);
  double f2 = objective(x2);
  while (b - a > tol) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kGolden * (b - a);
      f1 = objective(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kGolden * (b - a);
      f2 = objective(x2);
    }
  }
  if (f1 < f2) {
    result.r_hat = x1;
    result.objective = f1;
  } else {
    result.r_hat = x2;
    result.objective = f2;
  }
  result.converged =
      (result.r_hat - r_lo > 10.0 * tol) && (r_hi - result.r_hat > 10.0 * tol);
  return result;
}

namespace {

ScalarField hj_bracket(const ScalarField& S, const ScalarField& qfrak, double m0,
                       double energy) {
  if (!(S.spec == qfrak.spec))
    throw std::invalid_argument("S and potential fields live on different grids");
  const GridSpec& spec = S.spec;
  const std::size_t total = spec.num_points();

  ScalarField out{spec, std::vector<double>(total, 0.0)};
  for (int a = 0; a < spec.rank; ++a) {
    const ScalarField da = partial(S, a);
    const double sign = spec.metric_sign(a);
    for (std::size_t i = 0; i < total; ++i)
      out.values[i] += sign * da.values[i] * da.values[i];
  }
  const double e2 = spec.has_time_axis ? 0.0 : energy * energy;
  const double m2 = m0 * m0;
  for (std::size_t i = 0; i < total; ++i)
    out.values[i] += e2 - m2 - qfrak.values[i];
  return out;
}

} // namespace

ScalarField hj_residual(const ScalarField& S, const ScalarField& rho,
                        const ExponentFamily& fam, double m0, double energy) {
  if (!(S.spec == rho.spec))
    throw std::invalid_argument("S and rho live on different grids");
  const ScalarField qfrak = evaluate_potential(fam, rho);
  return hj_bracket(S, qfrak, m0, energy);
}

ScalarField hj_residual_with_q(const ScalarField& S, const ScalarField& q, double m0,
                               double energy) {
  return hj_bracket(S, scale(q, m0 * m0), m0, energy);
}

} // namespace machq
