#pragma once

// Analytic field catalog with closed-form derivatives, used as oracles for
// the finite-difference operators, plus field file I/O.
//
// File format: a JSON object {rank, has_time_axis, shape, origin, spacing,
// boundary, stencil_order} carrying either an inline "values" array or a
// "values_file" key naming a sidecar of raw little-endian 64-bit floats
// (row-major, resolved relative to the JSON file).  Rank-1 fields may also
// be stored as CSV with columns coordinate,value.

#include <array>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "machq/grid.hpp"

namespace machq {

struct ConstantField {
  double value = 0.0;
};

// rho(x) = exp(-|x - center|^2 / (2 sigma^2)); peak value 1 at the center.
struct GaussianField {
  double sigma = 1.0;
  std::array<double, kMaxRank> center{};
};

// f(x) = exp(k . x) over all axes.
struct ExponentialField {
  std::array<double, kMaxRank> wave{};
};

// S(t, x) = E t - p . x; on static grids the E t term is absent.
struct PlanePhaseField {
  double energy = 1.0;
  std::array<double, 3> momentum{};
};

// rho = offset + sum_i a_i sin(k_i . (x - origin) + phi_i) with integer
// wavenumbers per axis, so periodic boundaries are exact.  Amplitudes are
// drawn in [0.05, 0.3]; the offset must exceed their sum so rho stays
// positive.  Deterministic in the seed.
struct RandomPeriodicField {
  std::uint64_t seed = 42;
  int n_modes = 4;
  double offset = 2.0;
};

using FieldKind = std::variant<ConstantField, GaussianField, ExponentialField,
                               PlanePhaseField, RandomPeriodicField>;

ScalarField make_field(const GridSpec& spec, const FieldKind& kind);

enum class DiffOp { grad, lap, box, box2 };

// Closed-form derivative of the catalog entry sampled exactly at the nodes
// (no finite differences).  `axis` selects the component for grad and is
// ignored otherwise.
ScalarField analytic_reference(const GridSpec& spec, const FieldKind& kind,
                               DiffOp op, int axis = 0);

// Round trip save -> load is bitwise exact for every format.
enum class FieldFileFormat { json_inline, raw_sidecar };
void save_field(const ScalarField& f, const std::string& path,
                FieldFileFormat format = FieldFileFormat::json_inline);
ScalarField load_field(const std::string& path);

// Parses catalog parameters in CLI form, e.g. "gaussian,sigma=1.0,center=0",
// "constant,c=2", "exponential,k=0.3", "plane_phase,E=1.25,p=0.75",
// "random_periodic,seed=42,modes=4,offset=2.0".  Vector-valued parameters
// take colon-separated components (k=0.3:0.1).
FieldKind parse_field_kind(const std::string& text);

} // namespace machq
