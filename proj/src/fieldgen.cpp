#include "machq/fieldgen.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace machq {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

struct Mode {
  double amplitude;
  double phase;
  std::array<double, kMaxRank> wave; // k components, 2*pi*integer / L per axis
};

// Portable uniform in [0,1): fixed arithmetic on raw mt19937_64 draws so the
// sequence does not depend on the standard library's distribution code.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::vector<Mode> make_modes(const GridSpec& spec, const RandomPeriodicField& rp) {
  if (rp.n_modes < 1)
    throw std::invalid_argument("random_periodic needs at least one mode");
  std::mt19937_64 rng(rp.seed);
  std::vector<Mode> modes(static_cast<std::size_t>(rp.n_modes));
  double amplitude_sum = 0.0;
  for (Mode& m : modes) {
    m.amplitude = 0.05 + 0.25 * uniform01(rng);
    m.phase = kTwoPi * uniform01(rng);
    for (int a = 0; a < spec.rank; ++a) {
      const int harmonic = 1 + static_cast<int>(uniform01(rng) * 3.0); // 1..3
      const double extent = spec.shape[a] * spec.spacing[a];
      m.wave[a] = kTwoPi * harmonic / extent;
    }
    amplitude_sum += m.amplitude;
  }
  if (!(rp.offset > amplitude_sum))
    throw std::invalid_argument(
        "random_periodic offset " + std::to_string(rp.offset) +
        " must exceed the mode amplitude sum " + std::to_string(amplitude_sum));
  return modes;
}

double mode_phase_at(const Mode& m, const GridSpec& spec,
                     const std::array<double, kMaxRank>& x) {
  double th = m.phase;
  for (int a = 0; a < spec.rank; ++a) th += m.wave[a] * (x[a] - spec.origin[a]);
  return th;
}

} // namespace

ScalarField make_field(const GridSpec& spec, const FieldKind& kind) {
  validate(spec);
  ScalarField out{spec, std::vector<double>(spec.num_points())};

  if (const auto* c = std::get_if<ConstantField>(&kind)) {
    for (double& v : out.values) v = c->value;
    return out;
  }
  if (const auto* g = std::get_if<GaussianField>(&kind)) {
    if (!(g->sigma > 0.0))
      throw std::invalid_argument("gaussian sigma must be positive");
    const double inv2s2 = 1.0 / (2.0 * g->sigma * g->sigma);
    for_each_node(spec, [&](std::size_t i, const std::array<double, kMaxRank>& x) {
      double r2 = 0.0;
      for (int a = 0; a < spec.rank; ++a) {
        const double d = x[a] - g->center[a];
        r2 += d * d;
      }
      out.values[i] = std::exp(-r2 * inv2s2);
    });
    return out;
  }
  if (const auto* e = std::get_if<ExponentialField>(&kind)) {
    for_each_node(spec, [&](std::size_t i, const std::array<double, kMaxRank>& x) {
      double kx = 0.0;
      for (int a = 0; a < spec.rank; ++a) kx += e->wave[a] * x[a];
      out.values[i] = std::exp(kx);
    });
    return out;
  }
  if (const auto* p = std::get_if<PlanePhaseField>(&kind)) {
    const int sb = spec.spatial_begin();
    for_each_node(spec, [&](std::size_t i, const std::array<double, kMaxRank>& x) {
      double s = spec.has_time_axis ? p->energy * x[0] : 0.0;
      for (int a = sb; a < spec.rank; ++a) s -= p->momentum[a - sb] * x[a];
      out.values[i] = s;
    });
    return out;
  }
  const auto& rp = std::get<RandomPeriodicField>(kind);
  const auto modes = make_modes(spec, rp);
  for_each_node(spec, [&](std::size_t i, const std::array<double, kMaxRank>& x) {
    double v = rp.offset;
    for (const Mode& m : modes) v += m.amplitude * std::sin(mode_phase_at(m, spec, x));
    out.values[i] = v;
  });
  return out;
}

ScalarField analytic_reference(const GridSpec& spec, const FieldKind& kind,
                               DiffOp op, int axis) {
  validate(spec);
  if (op == DiffOp::grad && (axis < 0 || axis >= spec.rank))
    throw std::out_of_range("grad axis out of range");
  ScalarField out{spec, std::vector<double>(spec.num_points())};

  if (std::get_if<ConstantField>(&kind)) return out;

  if (const auto* p = std::get_if<PlanePhaseField>(&kind)) {
    if (op == DiffOp::grad) {
      const int sb = spec.spatial_begin();
      const double g = spec.axis_is_time(axis) ? p->energy : -p->momentum[axis - sb];
      for (double& v : out.values) v = g;
    }
    return out; // lap, box, box2 of an affine phase vanish
  }

  if (const auto* e = std::get_if<ExponentialField>(&kind)) {
    double lap_c = 0.0, box_c = 0.0;
    for (int a = 0; a < spec.rank; ++a) {
      const double k2 = e->wave[a] * e->wave[a];
      if (!spec.axis_is_time(a)) lap_c += k2;
      box_c += spec.metric_sign(a) * k2;
    }
    ScalarField f = make_field(spec, kind);
    double c = 0.0;
    switch (op) {
      case DiffOp::grad: c = e->wave[axis]; break;
      case DiffOp::lap: c = lap_c; break;
      case DiffOp::box: c = box_c; break;
      case DiffOp::box2: c = box_c * box_c; break;
    }
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = c * f.values[i];
    return out;
  }

  if (const auto* g = std::get_if<GaussianField>(&kind)) {
    const double a1 = 1.0 / (2.0 * g->sigma * g->sigma); // f = exp(-a1 r^2)
    const ScalarField f = make_field(spec, kind);
    for_each_node(spec, [&](std::size_t i, const std::array<double, kMaxRank>& x) {
      std::array<double, kMaxRank> d{};
      for (int ax = 0; ax < spec.rank; ++ax) d[ax] = x[ax] - g->center[ax];
      double c = 0.0;
      if (op == DiffOp::grad) {
        c = -2.0 * a1 * d[axis];
      } else {
        // per-axis second-derivative and fourth-derivative ratios
        std::array<double, kMaxRank> h2{};
        double lap_c = 0.0, box_c = 0.0, sum_h2sq = 0.0, sum_q = 0.0;
        for (int ax = 0; ax < spec.rank; ++ax) {
          const double d2 = d[ax] * d[ax];
          h2[ax] = 4.0 * a1 * a1 * d2 - 2.0 * a1;
          if (!spec.axis_is_time(ax)) lap_c += h2[ax];
          box_c += spec.metric_sign(ax) * h2[ax];
          sum_h2sq += h2[ax] * h2[ax];
          sum_q += 16.0 * a1 * a1 * a1 * a1 * d2 * d2 -
                   48.0 * a1 * a1 * a1 * d2 + 12.0 * a1 * a1;
        }
        if (op == DiffOp::lap) c = lap_c;
        if (op == DiffOp::box) c = box_c;
        // box^2 of a separable product: cross terms plus pure 4th derivatives
        if (op == DiffOp::box2) c = box_c * box_c - sum_h2sq + sum_q;
      }
      out.values[i] = c * f.values[i];
    });
    return out;
  }

  const auto& rp = std::get<RandomPeriodicField>(kind);
  const auto modes = make_modes(spec, rp);
  for_each_node(spec, [&](std::size_t i, const std::array<double, kMaxRank>& x) {
    double v = 0.0;
    for (const Mode& m : modes) {
      const double th = mode_phase_at(m, spec, x);
      double lap_c = 0.0, box_c = 0.0;
      for (int a = 0; a < spec.rank; ++a) {
        const double k2 = m.wave[a] * m.wave[a];
        if (!spec.axis_is_time(a)) lap_c += k2;
        box_c -= spec.metric_sign(a) * k2; // box sin = -sum s_a k_a^2 sin
      }
      switch (op) {
        case DiffOp::grad: v += m.amplitude * m.wave[axis] * std::cos(th); break;
        case DiffOp::lap: v += m.amplitude * (-lap_c) * std::sin(th); break;
        case DiffOp::box: v += m.amplitude * box_c * std::sin(th); break;
        case DiffOp::box2: v += m.amplitude * box_c * box_c * std::sin(th); break;
      }
    }
    out.values[i] = v;
  });
  return out;
}

// --- file I/O ----------------------------------------------------------------

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_raw_doubles(const std::string& path, const std::vector<double>& values) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  for (double v : values) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    if constexpr (std::endian::native == std::endian::big) {
      bits = __builtin_bswap64(bits);
    }
    os.write(reinterpret_cast<const char*>(&bits), sizeof bits);
  }
}

std::vector<double> read_raw_doubles(const std::string& path, std::size_t count) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open sidecar '" + path + "'");
  std::vector<double> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint64_t bits = 0;
    is.read(reinterpret_cast<char*>(&bits), sizeof bits);
    if (!is)
      throw std::runtime_error("sidecar '" + path + "' truncated at value " +
                               std::to_string(i));
    if constexpr (std::endian::native == std::endian::big) {
      bits = __builtin_bswap64(bits);
    }
    values[i] = std::bit_cast<double>(bits);
  }
  return values;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

void save_field_csv(const ScalarField& f, const std::string& path) {
  if (f.spec.rank != 1)
    throw std::invalid_argument("CSV field format is 1-D only");
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  os << "# machq-field n=" << f.spec.shape[0]
     << " origin=" << format_double(f.spec.origin[0])
     << " spacing=" << format_double(f.spec.spacing[0])
     << " boundary=" << to_string(f.spec.boundary)
     << " order=" << f.spec.stencil_order << "\n";
  os << "coordinate,value\n";
  for (int i = 0; i < f.spec.shape[0]; ++i)
    os << format_double(f.spec.coordinate(0, i)) << ","
       << format_double(f.values[static_cast<std::size_t>(i)]) << "\n";
}

ScalarField load_field_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open '" + path + "'");
  GridSpec spec;
  spec.rank = 1;
  spec.boundary = Boundary::periodic;
  spec.stencil_order = 4;
  bool have_header = false;

  std::string line;
  std::vector<double> coords, values;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ls(line.substr(1));
      std::string token;
      while (ls >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = token.substr(0, eq);
        const std::string val = token.substr(eq + 1);
        if (key == "origin") spec.origin[0] = std::stod(val);
        if (key == "spacing") spec.spacing[0] = std::stod(val);
        if (key == "boundary") spec.boundary = boundary_from_string(val);
        if (key == "order") spec.stencil_order = std::stoi(val);
        if (key == "origin" || key == "spacing") have_header = true;
      }
      continue;
    }
    if (line.rfind("coordinate", 0) == 0) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw std::runtime_error("malformed CSV line: " + line);
    coords.push_back(std::stod(line.substr(0, comma)));
    values.push_back(std::stod(line.substr(comma + 1)));
  }
  if (values.size() < 2) throw std::runtime_error("CSV field needs at least 2 rows");
  spec.shape[0] = static_cast<int>(values.size());
  if (!have_header) {
    spec.origin[0] = coords.front();
    spec.spacing[0] =
        (coords.back() - coords.front()) / static_cast<double>(values.size() - 1);
  }
  ScalarField f{spec, std::move(values)};
  validate(f);
  return f;
}

} // namespace

void save_field(const ScalarField& f, const std::string& path, FieldFileFormat format) {
  validate(f);
  if (ends_with(path, ".csv")) {
    save_field_csv(f, path);
    return;
  }
  nlohmann::json j;
  j["rank"] = f.spec.rank;
  j["has_time_axis"] = f.spec.has_time_axis;
  j["shape"] = std::vector<int>(f.spec.shape.begin(), f.spec.shape.begin() + f.spec.rank);
  j["origin"] =
      std::vector<double>(f.spec.origin.begin(), f.spec.origin.begin() + f.spec.rank);
  j["spacing"] =
      std::vector<double>(f.spec.spacing.begin(), f.spec.spacing.begin() + f.spec.rank);
  j["boundary"] = to_string(f.spec.boundary);
  j["stencil_order"] = f.spec.stencil_order;
  if (format == FieldFileFormat::raw_sidecar) {
    const std::string sidecar = std::filesystem::path(path).filename().string() + ".f64";
    const std::string sidecar_path =
        (std::filesystem::path(path).parent_path() / sidecar).string();
    write_raw_doubles(sidecar_path, f.values);
    j["values_file"] = sidecar;
  } else {
    j["values"] = f.values;
  }
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  os << j.dump(2) << "\n";
}

ScalarField load_field(const std::string& path) {
  if (ends_with(path, ".csv")) return load_field_csv(path);
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open '" + path + "'");
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("malformed field header in '" + path + "': " + e.what());
  }
  GridSpec spec;
  try {
    spec.rank = j.at("rank").get<int>();
    spec.has_time_axis = j.at("has_time_axis").get<bool>();
    const auto shape = j.at("shape").get<std::vector<int>>();
    const auto origin = j.at("origin").get<std::vector<double>>();
    const auto spacing = j.at("spacing").get<std::vector<double>>();
    if (static_cast<int>(shape.size()) != spec.rank ||
        static_cast<int>(origin.size()) != spec.rank ||
        static_cast<int>(spacing.size()) != spec.rank)
      throw std::runtime_error("header arrays do not match rank");
    for (int a = 0; a < spec.rank; ++a) {
      spec.shape[a] = shape[static_cast<std::size_t>(a)];
      spec.origin[a] = origin[static_cast<std::size_t>(a)];
      spec.spacing[a] = spacing[static_cast<std::size_t>(a)];
    }
    spec.boundary = boundary_from_string(j.at("boundary").get<std::string>());
    spec.stencil_order = j.at("stencil_order").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("malformed field header in '" + path + "': " + e.what());
  }
  validate(spec);

  std::vector<double> values;
  if (j.contains("values_file")) {
    const auto sidecar =
        std::filesystem::path(path).parent_path() / j["values_file"].get<std::string>();
    values = read_raw_doubles(sidecar.string(), spec.num_points());
  } else if (j.contains("values")) {
    values = j["values"].get<std::vector<double>>();
  } else {
    throw std::runtime_error("field file '" + path +
                             "' has neither values nor values_file");
  }
  if (values.size() != spec.num_points())
    throw std::runtime_error("field file '" + path + "' has " +
                             std::to_string(values.size()) + " values but grid has " +
                             std::to_string(spec.num_points()) + " nodes");
  ScalarField f{spec, std::move(values)};
  validate(f);
  return f;
}

// --- CLI catalog parsing -----------------------------------------------------

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

std::array<double, kMaxRank> parse_vector(const std::string& s) {
  std::array<double, kMaxRank> v{};
  const auto parts = split(s, ':');
  if (parts.size() > kMaxRank)
    throw std::invalid_argument("vector parameter has more than 4 components");
  if (parts.size() == 1) {
    v.fill(std::stod(parts[0]));
  } else {
    for (std::size_t i = 0; i < parts.size(); ++i) v[i] = std::stod(parts[i]);
  }
  return v;
}

} // namespace

FieldKind parse_field_kind(const std::string& text) {
  const auto parts = split(text, ',');
  if (parts.empty() || parts[0].empty())
    throw std::invalid_argument("empty field specification");
  // accept both "gaussian,sigma=1" and "kind=gaussian,sigma=1"
  const std::string name = parts[0].rfind("kind=", 0) == 0 ? parts[0].substr(5)
                                                           : parts[0];

  auto get = [&](const std::string& key) -> std::optional<std::string> {
    for (std::size_t i = 1; i < parts.size(); ++i) {
      const auto eq = parts[i].find('=');
      if (eq != std::string::npos && parts[i].substr(0, eq) == key)
        return parts[i].substr(eq + 1);
    }
    return std::nullopt;
  };

  if (name == "constant") {
    ConstantField c;
    if (const auto v = get("c")) c.value = std::stod(*v);
    return c;
  }
  if (name == "gaussian") {
    GaussianField g;
    if (const auto v = get("sigma")) g.sigma = std::stod(*v);
    if (const auto v = get("center")) g.center = parse_vector(*v);
    if (!(g.sigma > 0.0)) throw std::invalid_argument("gaussian sigma must be > 0");
    return g;
  }
  if (name == "exponential") {
    ExponentialField e;
    if (const auto v = get("k"))
      e.wave = parse_vector(*v);
    else
      throw std::invalid_argument("exponential needs k=...");
    return e;
  }
  if (name == "plane_phase") {
    PlanePhaseField p;
    if (const auto v = get("E")) p.energy = std::stod(*v);
    if (const auto v = get("p")) {
      const auto w = parse_vector(*v);
      for (int i = 0; i < 3; ++i) p.momentum[static_cast<std::size_t>(i)] = w[i];
    }
    return p;
  }
  if (name == "random_periodic") {
    RandomPeriodicField rp;
    if (const auto v = get("seed")) rp.seed = std::stoull(*v);
    if (const auto v = get("modes")) rp.n_modes = std::stoi(*v);
    if (const auto v = get("offset")) rp.offset = std::stod(*v);
    return rp;
  }
  throw std::invalid_argument("unknown field kind '" + name + "'");
}

} // namespace machq
