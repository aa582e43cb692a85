#include "machq/potential.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace machq {

MassParams make_mass_params(double m0, double hbar, double alpha, MassOrder order) {
  if (!(m0 > 0.0) || !(hbar > 0.0) || !(alpha > 0.0))
    throw std::invalid_argument("mass parameters m0, hbar, alpha must be positive");
  return MassParams{m0, hbar, alpha, hbar * hbar, order};
}

namespace {

// Node guard: derivatives are taken on the raw sqrt(rho); only the ratio's
// denominator is lifted to sqrt(eps) with eps = 1e-12 max(rho), so near-node
// points damp instead of amplifying.  Clamping rho itself before
// differentiating would flatten the tail and pollute the stencils with a
// kink.  Lifted nodes are reported; non-positive rho is a domain error.
struct RegularizedRoot {
  ScalarField root;  // sqrt(rho), from the raw density
  ScalarField denom; // sqrt(rho) lifted to sqrt(eps)
  std::vector<std::size_t> clamped;
};

RegularizedRoot regularize(const ScalarField& rho) {
  double max_rho = 0.0;
  for (std::size_t i = 0; i < rho.values.size(); ++i) {
    const double v = rho.values[i];
    if (!(v > 0.0))
      throw std::domain_error("density is non-positive at flat index " +
                              std::to_string(i) + " (value " + std::to_string(v) + ")");
    max_rho = std::max(max_rho, v);
  }
  const double root_eps = std::sqrt(1e-12 * max_rho);
  RegularizedRoot out;
  out.root = sqrt_field(rho);
  out.denom = out.root;
  for (std::size_t i = 0; i < out.denom.values.size(); ++i) {
    if (out.denom.values[i] < root_eps) {
      out.denom.values[i] = root_eps;
      out.clamped.push_back(i);
    }
  }
  return out;
}

} // namespace

QuantumPotential quantum_potential_rel(const ScalarField& rho, const MassParams& params) {
  auto reg = regularize(rho);
  const ScalarField box_root = dalembertian(reg.root);
  const double c = params.coupling / (params.m0 * params.m0);
  ScalarField q{rho.spec, std::vector<double>(rho.values.size())};
  for (std::size_t i = 0; i < q.values.size(); ++i)
    q.values[i] = c * box_root.values[i] / reg.denom.values[i];
  return QuantumPotential{std::move(q), std::move(reg.clamped)};
}

QuantumPotential quantum_potential_nr(const ScalarField& rho, const MassParams& params) {
  auto reg = regularize(rho);
  const ScalarField lap_root = laplacian(reg.root);
  const double c = -params.hbar * params.hbar / (2.0 * params.m0);
  ScalarField q{rho.spec, std::vector<double>(rho.values.size())};
  for (std::size_t i = 0; i < q.values.size(); ++i)
    q.values[i] = c * lap_root.values[i] / reg.denom.values[i];
  return QuantumPotential{std::move(q), std::move(reg.clamped)};
}

ScalarField qfrak_field(const ScalarField& q, const MassParams& params) {
  return scale(q, params.m0 * params.m0);
}

MassSqField machian_mass_sq(const ScalarField& rho, const MassParams& params) {
  auto reg = regularize(rho);
  const ScalarField& root = reg.root;
  const ScalarField box_root = dalembertian(root);
  const double m0sq = params.m0 * params.m0;
  const double cq = params.coupling / m0sq;

  MassSqField out;
  out.clamped_nodes = std::move(reg.clamped);
  out.m2 = ScalarField{rho.spec, std::vector<double>(rho.values.size())};

  if (params.order == MassOrder::quadratic) {
    const ScalarField box2_root = bidalembertian(root);
    const double h4 = params.hbar * params.hbar * params.hbar * params.hbar;
    const double cq2 = 0.5 * h4 / (m0sq * m0sq);
    for (std::size_t i = 0; i < out.m2.values.size(); ++i) {
      const double q = cq * box_root.values[i] / reg.denom.values[i];
      const double q2 = cq2 * box2_root.values[i] / reg.denom.values[i];
      out.m2.values[i] = m0sq * (1.0 + q + q2);
    }
  } else {
    for (std::size_t i = 0; i < out.m2.values.size(); ++i) {
      const double q = cq * box_root.values[i] / reg.denom.values[i];
      out.m2.values[i] = params.order == MassOrder::exponential
                             ? m0sq * std::exp(q)
                             : m0sq * (1.0 + q);
    }
  }

  if (params.order != MassOrder::exponential) {
    std::size_t nonpositive = 0;
    for (double v : out.m2.values)
      if (!(v > 0.0)) ++nonpositive;
    out.nonpositive_fraction =
        static_cast<double>(nonpositive) / static_cast<double>(out.m2.values.size());
  }
  return out;
}

ScalarField machian_mass_nr(const ScalarField& q_nr, const MassParams& params) {
  ScalarField out{q_nr.spec, std::vector<double>(q_nr.values.size())};
  const double c = 2.0 / params.m0;
  for (std::size_t i = 0; i < out.values.size(); ++i)
    out.values[i] = params.alpha * std::exp(c * q_nr.values[i]);
  return out;
}

ScalarField constraint_defect(const ScalarField& R) {
  const ScalarField box1 = dalembertian(R);
  const ScalarField box2 = dalembertian(box1);
  ScalarField out{R.spec, std::vector<double>(R.values.size())};
  for (std::size_t i = 0; i < out.values.size(); ++i)
    out.values[i] = box1.values[i] * box1.values[i] - R.values[i] * box2.values[i];
  return out;
}

} // namespace machq
