#include "machq/ansatz.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace machq {

namespace {

// Integer power by repeated multiplication; x^0 == 1 even for x == 0.
double ipow(double x, int e) {
  if (e < 0) {
    if (x == 0.0) throw std::domain_error("zero base under negative integer power");
    return 1.0 / ipow(x, -e);
  }
  double acc = 1.0;
  double b = x;
  int k = e;
  while (k > 0) {
    if (k & 1) acc *= b;
    b *= b;
    k >>= 1;
  }
  return acc;
}

} // namespace

ExponentFamily make_family(double coupling, double exponent, int m, int n, int p,
                           PotentialVariable variable) {
  if (n < 0 || n % 2 != 0)
    throw std::invalid_argument("gradient power n must be even and non-negative, got " +
                                std::to_string(n));
  if (exponent == 0.0) throw std::invalid_argument("exponent r must be nonzero");
  return ExponentFamily{coupling, exponent, m, n, p, variable};
}

bool scale_invariant(const ExponentFamily& fam) { return fam.m + fam.n + fam.p == 0; }

std::vector<std::string> lint_family(const ExponentFamily& fam) {
  std::vector<std::string> warnings;
  if (fam.m >= 0)
    warnings.push_back("m = " + std::to_string(fam.m) +
                       " is non-negative; the density power cannot cancel the "
                       "constant factors of the derivative terms under rescaling");
  if (fam.p < 0)
    warnings.push_back("p = " + std::to_string(fam.p) +
                       " is negative; evaluation divides by box(f) and fails "
                       "wherever it crosses zero");
  return warnings;
}

ExponentFamily parse_family(const std::string& text) {
  ExponentFamily fam;
  std::istringstream is(text);
  std::string token;
  while (std::getline(is, token, ',')) {
    const auto eq = token.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("family token '" + token + "' is not key=value");
    const std::string key = token.substr(0, eq);
    const std::string val = token.substr(eq + 1);
    if (key == "C")
      fam.coupling = std::stod(val);
    else if (key == "r")
      fam.exponent = std::stod(val);
    else if (key == "m")
      fam.m = std::stoi(val);
    else if (key == "n")
      fam.n = std::stoi(val);
    else if (key == "p")
      fam.p = std::stoi(val);
    else if (key == "var")
      fam.variable = (val == "R") ? PotentialVariable::R : PotentialVariable::rho;
    else
      throw std::invalid_argument("unknown family key '" + key + "'");
  }
  return make_family(fam.coupling, fam.exponent, fam.m, fam.n, fam.p, fam.variable);
}

std::string family_to_string(const ExponentFamily& fam) {
  std::ostringstream os;
  os << "C=" << fam.coupling << ",r=" << fam.exponent << ",m=" << fam.m
     << ",n=" << fam.n << ",p=" << fam.p
     << ",var=" << (fam.variable == PotentialVariable::R ? "R" : "rho");
  return os.str();
}

// --- field evaluation ----------------------------------------------------------

ScalarField evaluate_potential(const ExponentFamily& fam, const ScalarField& base) {
  const GridSpec& spec = base.spec;
  const ScalarField f = fam.variable == PotentialVariable::rho
                            ? power(base, fam.exponent)
                            : base;

  // Lorentz square of the gradient of f, only needed when n > 0.
  ScalarField g;
  if (fam.n > 0) {
    bool first = true;
    for (int a = 0; a < spec.rank; ++a) {
      ScalarField da = partial(f, a);
      const double s = spec.metric_sign(a);
      if (first) {
        g = ScalarField{spec, std::vector<double>(spec.num_points(), 0.0)};
        first = false;
      }
      for (std::size_t i = 0; i < g.values.size(); ++i)
        g.values[i] += s * da.values[i] * da.values[i];
    }
  }

  const ScalarField boxf = dalembertian(f);

  ScalarField out{spec, std::vector<double>(spec.num_points())};
  const bool need_positive_f = fam.m < 0;
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    const double fv = f.values[i];
    if (need_positive_f && fv == 0.0)
      throw std::domain_error("potential evaluation: f vanishes at flat index " +
                              std::to_string(i) + " with negative power m");
    const double bv = boxf.values[i];
    if (fam.p < 0 && std::abs(bv) < 1e-300)
      throw std::domain_error("potential evaluation: box(f) ~ 0 at flat index " +
                              std::to_string(i) + " with negative power p");
    double q = fam.coupling * ipow(fv, fam.m) * ipow(bv, fam.p);
    if (fam.n > 0) q *= ipow(g.values[i], fam.n / 2);
    out.values[i] = q;
  }
  return out;
}

ScalarField expanded_potential(const ExponentFamily& fam, const ScalarField& rho) {
  if (fam.variable != PotentialVariable::rho || fam.m != -1 || fam.n != 0 || fam.p != 1)
    throw std::invalid_argument(
        "expanded form is defined only for the (m=-1, n=0, p=1) rho family");
  const GridSpec& spec = rho.spec;
  const double r = fam.exponent;
  const double c_grad = fam.coupling * r * (r - 1.0);
  const double c_box = fam.coupling * r;

  ScalarField g{spec, std::vector<double>(spec.num_points(), 0.0)};
  for (int a = 0; a < spec.rank; ++a) {
    ScalarField da = partial(rho, a);
    const double s = spec.metric_sign(a);
    for (std::size_t i = 0; i < g.values.size(); ++i)
      g.values[i] += s * da.values[i] * da.values[i];
  }
  const ScalarField boxr = dalembertian(rho);

  ScalarField out{spec, std::vector<double>(spec.num_points())};
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    const double x = rho.values[i];
    out.values[i] = c_grad * g.values[i] / (x * x) + c_box * boxr.values[i] / x;
  }
  return out;
}

ScaleDefect scale_defect(const ExponentFamily& fam, const ScalarField& base,
                         double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  const ScalarField q0 = evaluate_potential(fam, base);
  const ScalarField q1 = evaluate_potential(fam, scale(base, gamma));
  const double diff = linf_norm(sub(q1, q0));
  const double denom = linf_norm(q0);
  if (denom == 0.0) return ScaleDefect{diff, false};
  return ScaleDefect{diff / denom, true};
}

// --- pointwise slot form ---------------------------------------------------------

double lorentz_square(const SlotPoint& s) {
  double g = 0.0;
  for (int a = 0; a < s.rank; ++a) {
    const double sign = (s.has_time && a == 0) ? 1.0 : -1.0;
    g += sign * s.dbase[a] * s.dbase[a];
  }
  return g;
}

double potential_at(const ExponentFamily& fam, const SlotPoint& s) {
  const double C = fam.coupling;
  const double g = lorentz_square(s);
  const double X = s.base;
  const double B = s.box_base;
  if (fam.variable == PotentialVariable::R) {
    double q = C * ipow(X, fam.m) * ipow(B, fam.p);
    if (fam.n > 0) q *= ipow(g, fam.n / 2);
    return q;
  }
  const double r = fam.exponent;
  // slot substitution: (df.df) = r^2 X^(2r-2) g,  box f = r X^(r-1) B + r(r-1) X^(r-2) g
  const double gf = r * r * std::pow(X, 2.0 * r - 2.0) * g;
  const double Bf = r * std::pow(X, r - 1.0) * B + r * (r - 1.0) * std::pow(X, r - 2.0) * g;
  double q = C * std::pow(X, r * fam.m) * ipow(Bf, fam.p);
  if (fam.n > 0) q *= ipow(gf, fam.n / 2);
  return q;
}

SlotPartials potential_partials(const ExponentFamily& fam, const SlotPoint& s) {
  const double C = fam.coupling;
  const double g = lorentz_square(s);
  const double X = s.base;
  const double B = s.box_base;
  const int m = fam.m, n = fam.n, p = fam.p;
  SlotPartials out;

  auto raised = [&](int a) {
    const double sign = (s.has_time && a == 0) ? 1.0 : -1.0;
    return sign * s.dbase[a];
  };

  if (fam.variable == PotentialVariable::R) {
    const double gn = (n > 0) ? ipow(g, n / 2) : 1.0;
    const double Bp = ipow(B, p);
    out.d_base = C * m * ipow(X, m - 1) * gn * Bp;
    const double grad_coeff =
        (n > 0) ? C * ipow(X, m) * (n / 2) * ipow(g, n / 2 - 1) * Bp : 0.0;
    for (int a = 0; a < s.rank; ++a) out.d_grad[a] = grad_coeff * 2.0 * raised(a);
    out.d_box = (p == 0) ? 0.0 : C * ipow(X, m) * gn * p * ipow(B, p - 1);
    return out;
  }

  const double r = fam.exponent;
  // Qfrak = A * D^p with
  //   A = C r^n X^a1 g^(n/2),  a1 = r m + (r-1) n
  //   D = r X^(r-1) B + r(r-1) X^(r-2) g          (the substituted box f)
  const double a1 = r * m + (r - 1.0) * n;
  const double gn = (n > 0) ? ipow(g, n / 2) : 1.0;
  const double rn = ipow(r, n);
  const double Xa1 = std::pow(X, a1);
  const double A = C * rn * Xa1 * gn;
  const double D = r * std::pow(X, r - 1.0) * B + r * (r - 1.0) * std::pow(X, r - 2.0) * g;
  const double Dp = ipow(D, p);
  const double pDpm1 = (p == 0) ? 0.0 : p * ipow(D, p - 1);

  const double dA_dX = C * rn * a1 * std::pow(X, a1 - 1.0) * gn;
  const double dD_dX = r * (r - 1.0) * std::pow(X, r - 2.0) * B +
                       r * (r - 1.0) * (r - 2.0) * std::pow(X, r - 3.0) * g;
  out.d_base = dA_dX * Dp + A * pDpm1 * dD_dX;

  const double dD_dg = r * (r - 1.0) * std::pow(X, r - 2.0);
  double dQ_dg = A * pDpm1 * dD_dg;
  if (n > 0) dQ_dg += C * rn * Xa1 * (n / 2) * ipow(g, n / 2 - 1) * Dp;
  for (int a = 0; a < s.rank; ++a) out.d_grad[a] = dQ_dg * 2.0 * raised(a);

  out.d_box = A * pDpm1 * r * std::pow(X, r - 1.0);
  return out;
}

} // namespace machq
