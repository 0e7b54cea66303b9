// Copyright 2026 The beamdesign Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "beamdesign/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

namespace beamdesign {

namespace {

constexpr double kMm = 1e-3;

Json position_mm(const Position& p) {
  return Json::array({p.x() / kMm, p.y() / kMm, p.z() / kMm});
}

Json position_m(const Position& p) {
  return Json::array({p.x(), p.y(), p.z()});
}

Position read_position(const Json& j, double scale) {
  if (!j.is_array() || j.size() < 2 || j.size() > 3) {
    throw ConfigurationError("position must be [x, y] or [x, y, z]");
  }
  Position p(j[0].get<double>(), j[1].get<double>(),
             j.size() == 3 ? j[2].get<double>() : 0.0);
  return p * scale;
}

Json vector_json(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Eigen::VectorXd read_vector(const Json& j) {
  Eigen::VectorXd v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v(i) = j[i].get<double>();
  return v;
}

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  return it->get<T>();
}

const Json& section(const Json& doc, const char* key) {
  static const Json empty = Json::object();
  auto it = doc.find(key);
  if (it == doc.end()) return empty;
  if (!it->is_object()) {
    throw ConfigurationError(std::string("section '") + key +
                             "' must be an object");
  }
  return *it;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& text) {
  if (text == "inf" || text == "+inf") {
    return std::numeric_limits<double>::infinity();
  }
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ValidationError("malformed number '" + text + "'");
  }
  return v;
}

// ---------------------------------------------------------------------------
// Enumerations

const char* to_string(DbConvention c) {
  return c == DbConvention::amplitude_20log10 ? "20log10" : "10log10";
}

const char* to_string(Averaging a) {
  return a == Averaging::db_of_mean ? "db-of-mean" : "mean-of-db";
}

std::optional<DbConvention> parse_db_convention(const std::string& text) {
  if (text == "20log10") return DbConvention::amplitude_20log10;
  if (text == "10log10") return DbConvention::power_10log10;
  return std::nullopt;
}

std::optional<Averaging> parse_averaging(const std::string& text) {
  if (text == "db-of-mean") return Averaging::db_of_mean;
  if (text == "mean-of-db") return Averaging::mean_of_db;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Run configuration

void RunConfig::validate() const {
  auto positive = [](double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ConfigurationError(std::string(what) + " must be positive");
    }
  };
  positive(medium.carrier_frequency_hz, "carrier_frequency_hz");
  positive(medium.sound_speed_m_per_s, "sound_speed_m_per_s");
  positive(medium.spreading_unit_m, "spreading_unit_mm");
  positive(array.arc_radius_m, "arc_radius_mm");
  positive(array.spacing_m, "element spacing");
  if (array.element_count < 1) {
    throw ConfigurationError("element_count must be >= 1");
  }
  positive(grid.tumor_radius_m, "tumor_radius_mm");
  positive(grid.box_width_m, "box_width_mm");
  positive(grid.box_height_m, "box_height_mm");
  positive(grid.grid_spacing_m, "grid_spacing_mm");
  positive(gamma, "gamma");
  if (!(delta >= 0.0 && delta < 1.0)) {
    throw ConfigurationError("delta must lie in [0, 1)");
  }
  if (!(epsilon >= 0.0)) throw ConfigurationError("epsilon must be >= 0");
  if (uncertainty_weights.size() != 0 &&
      uncertainty_weights.size() != array.element_count) {
    throw ConfigurationError("uncertainty_weights length must equal M");
  }
  if (uncertainty_weights.size() != 0 &&
      !(uncertainty_weights.array() > 0.0).all()) {
    throw ConfigurationError("uncertainty_weights must be positive");
  }
  for (double e : healthy_epsilon) {
    if (!(e >= 0.0)) throw ConfigurationError("healthy_epsilon must be >= 0");
  }
  for (double e : tumor_epsilon) {
    if (!(e >= 0.0)) throw ConfigurationError("tumor_epsilon must be >= 0");
  }
  if (fixed_level && !(*fixed_level > 0.0)) {
    throw ConfigurationError("fixed_level must be positive");
  }
  if (healthy_weights.size() != 0 && !(healthy_weights.array() > 0.0).all()) {
    throw ConfigurationError("healthy_weights must be positive");
  }
  positive(gap_tol, "gap_tol");
  positive(feas_tol, "feas_tol");
  if (max_iter < 1) throw ConfigurationError("max_iter must be >= 1");
  if (synthesis_samples < 1) {
    throw ConfigurationError("synthesis_samples must be >= 1");
  }
}

UncertaintyModel RunConfig::uncertainty() const {
  UncertaintyModel u = UncertaintyModel::isotropic(array.element_count, epsilon);
  if (uncertainty_weights.size() != 0) u.weights = uncertainty_weights;
  u.healthy_epsilon = healthy_epsilon;
  u.tumor_epsilon = tumor_epsilon;
  return u;
}

SolverOptions RunConfig::solver_options() const {
  SolverOptions o;
  o.gap_tol = gap_tol;
  o.feas_tol = feas_tol;
  o.max_iter = max_iter;
  return o;
}

Json to_json(const RunConfig& c) {
  Json doc = Json::object();
  doc["medium"] = {
      {"carrier_frequency_hz", c.medium.carrier_frequency_hz},
      {"sound_speed_m_per_s", c.medium.sound_speed_m_per_s},
      {"spreading_unit_mm", c.medium.spreading_unit_m / kMm},
  };
  doc["array"] = {
      {"element_count", c.array.element_count},
      {"arc_radius_mm", c.array.arc_radius_m / kMm},
      {"element_spacing_mm", c.array.spacing_m / kMm},
      {"arc_center_mm", position_mm(c.array.arc_center)},
      {"center_angle_deg", c.array.center_angle_rad * 180.0 / M_PI},
  };
  doc["grid"] = {
      {"tumor_center_mm", position_mm(c.grid.tumor_center)},
      {"tumor_radius_mm", c.grid.tumor_radius_m / kMm},
      {"box_width_mm", c.grid.box_width_m / kMm},
      {"box_height_mm", c.grid.box_height_m / kMm},
      {"grid_spacing_mm", c.grid.grid_spacing_m / kMm},
  };
  Json design = {
      {"variant", to_string(c.variant)},
      {"gamma", c.gamma},
      {"delta", c.delta},
      {"epsilon", c.epsilon},
  };
  design["uncertainty_weights"] = c.uncertainty_weights.size()
                                      ? vector_json(c.uncertainty_weights)
                                      : Json(nullptr);
  design["healthy_epsilon"] = c.healthy_epsilon;
  design["tumor_epsilon"] = c.tumor_epsilon;
  design["fixed_level"] = c.fixed_level ? Json(*c.fixed_level) : Json(nullptr);
  design["healthy_weights"] =
      c.healthy_weights.size() ? vector_json(c.healthy_weights) : Json(nullptr);
  doc["design"] = design;
  doc["solver"] = {
      {"gap_tol", c.gap_tol},
      {"feas_tol", c.feas_tol},
      {"max_iter", c.max_iter},
  };
  doc["output"] = {
      {"out_dir", c.out_dir},
      {"seed", c.seed},
      {"synthesis_samples", c.synthesis_samples},
      {"db_convention", to_string(c.db_convention)},
      {"average", to_string(c.averaging)},
  };
  if (!c.annotations.empty()) doc["annotations"] = c.annotations;
  return doc;
}

RunConfig run_config_from_json(const Json& doc) {
  if (!doc.is_object()) throw ConfigurationError("config must be an object");
  static const char* known[] = {"medium", "array",  "grid",
                                "design", "solver", "output",
                                "annotations"};
  for (const auto& [key, value] : doc.items()) {
    (void)value;
    if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
      throw ConfigurationError("unknown config section '" + key + "'");
    }
  }
  RunConfig c;
  try {
    const Json& med = section(doc, "medium");
    c.medium.carrier_frequency_hz =
        get_or(med, "carrier_frequency_hz", c.medium.carrier_frequency_hz);
    c.medium.sound_speed_m_per_s =
        get_or(med, "sound_speed_m_per_s", c.medium.sound_speed_m_per_s);
    c.medium.spreading_unit_m =
        get_or(med, "spreading_unit_mm", c.medium.spreading_unit_m / kMm) * kMm;

    const Json& arr = section(doc, "array");
    c.array.element_count = get_or(arr, "element_count", c.array.element_count);
    c.array.arc_radius_m =
        get_or(arr, "arc_radius_mm", c.array.arc_radius_m / kMm) * kMm;
    const bool has_mm = arr.contains("element_spacing_mm");
    const bool has_wl = arr.contains("element_spacing_wavelengths");
    if (has_mm && has_wl) {
      throw ConfigurationError(
          "give element_spacing_mm or element_spacing_wavelengths, not both");
    }
    if (has_mm) {
      c.array.spacing_m = arr["element_spacing_mm"].get<double>() * kMm;
    } else {
      c.array.spacing_m = get_or(arr, "element_spacing_wavelengths", 0.5) *
                          c.medium.wavelength_m();
    }
    if (arr.contains("arc_center_mm")) {
      c.array.arc_center = read_position(arr["arc_center_mm"], kMm);
    }
    c.array.center_angle_rad =
        get_or(arr, "center_angle_deg", c.array.center_angle_rad * 180.0 / M_PI) *
        M_PI / 180.0;

    const Json& grid = section(doc, "grid");
    if (grid.contains("tumor_center_mm")) {
      c.grid.tumor_center = read_position(grid["tumor_center_mm"], kMm);
    }
    c.grid.tumor_radius_m =
        get_or(grid, "tumor_radius_mm", c.grid.tumor_radius_m / kMm) * kMm;
    c.grid.box_width_m =
        get_or(grid, "box_width_mm", c.grid.box_width_m / kMm) * kMm;
    c.grid.box_height_m =
        get_or(grid, "box_height_mm", c.grid.box_height_m / kMm) * kMm;
    c.grid.grid_spacing_m =
        get_or(grid, "grid_spacing_mm", c.grid.grid_spacing_m / kMm) * kMm;

    const Json& des = section(doc, "design");
    const std::string variant =
        get_or<std::string>(des, "variant", to_string(c.variant));
    const auto v = parse_variant(variant);
    if (!v) throw ConfigurationError("unknown variant '" + variant + "'");
    c.variant = *v;
    c.gamma = get_or(des, "gamma", c.gamma);
    c.delta = get_or(des, "delta", c.delta);
    c.epsilon = get_or(des, "epsilon", c.epsilon);
    if (des.contains("uncertainty_weights") &&
        !des["uncertainty_weights"].is_null()) {
      c.uncertainty_weights = read_vector(des["uncertainty_weights"]);
    }
    c.healthy_epsilon =
        get_or(des, "healthy_epsilon", std::vector<double>{});
    c.tumor_epsilon = get_or(des, "tumor_epsilon", std::vector<double>{});
    if (des.contains("fixed_level") && !des["fixed_level"].is_null()) {
      c.fixed_level = des["fixed_level"].get<double>();
    }
    if (des.contains("healthy_weights") && !des["healthy_weights"].is_null()) {
      c.healthy_weights = read_vector(des["healthy_weights"]);
    }

    const Json& sol = section(doc, "solver");
    c.gap_tol = get_or(sol, "gap_tol", c.gap_tol);
    c.feas_tol = get_or(sol, "feas_tol", c.feas_tol);
    c.max_iter = get_or(sol, "max_iter", c.max_iter);

    const Json& out = section(doc, "output");
    c.out_dir = get_or<std::string>(out, "out_dir", c.out_dir);
    c.seed = get_or<std::uint64_t>(out, "seed", c.seed);
    c.synthesis_samples =
        get_or(out, "synthesis_samples", c.synthesis_samples);
    const std::string db =
        get_or<std::string>(out, "db_convention", to_string(c.db_convention));
    const auto conv = parse_db_convention(db);
    if (!conv) throw ConfigurationError("unknown db_convention '" + db + "'");
    c.db_convention = *conv;
    const std::string avg =
        get_or<std::string>(out, "average", to_string(c.averaging));
    const auto a = parse_averaging(avg);
    if (!a) throw ConfigurationError("unknown average '" + avg + "'");
    c.averaging = *a;

    if (doc.contains("annotations")) c.annotations = doc["annotations"];
  } catch (const nlohmann::json::exception& e) {
    throw ConfigurationError(std::string("malformed config: ") + e.what());
  }
  c.validate();
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot open config '" + path + "'");
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigurationError("config '" + path + "' is not valid JSON: " +
                             e.what());
  }
  return run_config_from_json(doc);
}

std::string config_hash(const RunConfig& config) {
  const std::string text = to_json(config).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream ss;
  ss << std::hex << std::setw(16) << std::setfill('0') << h;
  return ss.str();
}

// ---------------------------------------------------------------------------
// Geometry, grids, designs

Json to_json(const ArrayGeometry& g) {
  Json elements = Json::array();
  for (const auto& p : g.elements) elements.push_back(position_m(p));
  return {
      {"carrier_frequency_hz", g.medium.carrier_frequency_hz},
      {"sound_speed_m_per_s", g.medium.sound_speed_m_per_s},
      {"spreading_unit_m", g.medium.spreading_unit_m},
      {"elements_m", elements},
  };
}

ArrayGeometry array_geometry_from_json(const Json& doc) {
  ArrayGeometry g;
  g.medium.carrier_frequency_hz = doc.at("carrier_frequency_hz").get<double>();
  g.medium.sound_speed_m_per_s = doc.at("sound_speed_m_per_s").get<double>();
  g.medium.spreading_unit_m = get_or(doc, "spreading_unit_m", 1.0);
  for (const auto& p : doc.at("elements_m")) g.elements.push_back(read_position(p, 1.0));
  g.validate();
  return g;
}

Json to_json(const RegionGrids& r) {
  Json healthy = Json::array(), tumor = Json::array();
  for (const auto& p : r.healthy_points) healthy.push_back(position_m(p));
  for (const auto& p : r.tumor_points) tumor.push_back(position_m(p));
  return {
      {"tumor_center_m", position_m(r.tumor_center)},
      {"tumor_radius_m", r.tumor_radius_m},
      {"lattice_columns", r.lattice_columns},
      {"lattice_rows", r.lattice_rows},
      {"healthy_points_m", healthy},
      {"tumor_points_m", tumor},
  };
}

RegionGrids region_grids_from_json(const Json& doc) {
  RegionGrids r;
  r.tumor_center = read_position(doc.at("tumor_center_m"), 1.0);
  r.tumor_radius_m = doc.at("tumor_radius_m").get<double>();
  r.lattice_columns = get_or(doc, "lattice_columns", 0);
  r.lattice_rows = get_or(doc, "lattice_rows", 0);
  for (const auto& p : doc.at("healthy_points_m")) {
    r.healthy_points.push_back(read_position(p, 1.0));
  }
  for (const auto& p : doc.at("tumor_points_m")) {
    r.tumor_points.push_back(read_position(p, 1.0));
  }
  r.validate();
  return r;
}

Json to_json(const CovarianceDesign& d) {
  Json r = Json::array();
  for (int i = 0; i < d.R.rows(); ++i) {
    Json row = Json::array();
    for (int j = 0; j < d.R.cols(); ++j) {
      row.push_back(Json::array({d.R(i, j).real(), d.R(i, j).imag()}));
    }
    r.push_back(row);
  }
  return {
      {"variant", to_string(d.variant)},
      {"status", to_string(d.status)},
      {"gamma", d.gamma},
      {"delta", d.delta},
      {"t", d.t},
      {"P", d.level ? Json(*d.level) : Json(nullptr)},
      {"point_gaps", vector_json(d.point_gaps)},
      {"multipliers", vector_json(d.multipliers)},
      {"objective", d.objective},
      {"duality_gap", d.duality_gap},
      {"iterations", d.iterations},
      {"verified_min_eigenvalue", d.verified_min_eigenvalue},
      {"R", r},
  };
}

CovarianceDesign covariance_design_from_json(const Json& doc) {
  CovarianceDesign d;
  try {
    const auto v = parse_variant(doc.at("variant").get<std::string>());
    if (!v) throw IntegrityError("unknown design variant");
    d.variant = *v;
    const std::string status = doc.at("status").get<std::string>();
    bool known = false;
    for (auto s : {SolveStatus::optimal, SolveStatus::infeasible,
                   SolveStatus::unbounded, SolveStatus::numerical_failure}) {
      if (status == to_string(s)) {
        d.status = s;
        known = true;
      }
    }
    if (!known) throw IntegrityError("unknown solve status '" + status + "'");
    d.gamma = doc.at("gamma").get<double>();
    d.delta = doc.at("delta").get<double>();
    d.t = doc.at("t").get<double>();
    if (!doc.at("P").is_null()) d.level = doc["P"].get<double>();
    d.point_gaps = read_vector(doc.at("point_gaps"));
    d.multipliers = read_vector(doc.at("multipliers"));
    d.objective = doc.at("objective").get<double>();
    d.duality_gap = doc.at("duality_gap").get<double>();
    d.iterations = doc.at("iterations").get<int>();
    d.verified_min_eigenvalue = get_or(doc, "verified_min_eigenvalue", 0.0);
    const Json& r = doc.at("R");
    const int m = static_cast<int>(r.size());
    d.R.resize(m, m);
    for (int i = 0; i < m; ++i) {
      if (static_cast<int>(r[i].size()) != m) {
        throw IntegrityError("covariance is not square");
      }
      for (int j = 0; j < m; ++j) {
        d.R(i, j) = Complex(r[i][j].at(0).get<double>(),
                            r[i][j].at(1).get<double>());
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw IntegrityError(std::string("malformed design document: ") + e.what());
  }
  return d;
}

// ---------------------------------------------------------------------------
// Sparse LMI format

void write_sparse_lmi(std::ostream& out, const SdpProblem& problem) {
  const SdpProblem plain = problem.expanded();
  out << "# sparse LMI: maximize c^T y s.t. F0_k + sum_i y_i F_ik >= 0\n";
  out << "variables " << plain.variable_count() << '\n';
  for (int i = 0; i < plain.variable_count(); ++i) {
    out << "var " << i << ' ' << format_double(plain.objective(i)) << ' '
        << plain.variable_names[i] << '\n';
  }
  out << "blocks " << plain.blocks.size() << '\n';
  for (size_t k = 0; k < plain.blocks.size(); ++k) {
    const auto& b = plain.blocks[k];
    out << "block " << k << ' ' << b.size << ' ' << to_string(b.kind) << ' '
        << b.multiplier << ' ' << (b.label.empty() ? "-" : b.label) << '\n';
  }
  auto entries = [&](size_t k, int var, const SparseHermitian& coeff) {
    for (const auto& e : coeff) {
      out << k << ' ' << var << ' ' << e.row << ' ' << e.col << ' '
          << format_double(e.value.real()) << ' '
          << format_double(e.value.imag()) << '\n';
    }
  };
  out << "entries\n";
  for (size_t k = 0; k < plain.blocks.size(); ++k) {
    const auto& b = plain.blocks[k];
    entries(k, -1, to_sparse(b.constant));
    for (const auto& term : b.terms) entries(k, term.variable, term.coefficient);
  }
}

SdpProblem read_sparse_lmi(std::istream& in) {
  SdpProblem p;
  std::string line;
  auto next = [&]() {
    while (std::getline(in, line)) {
      if (!line.empty() && line[0] != '#') return true;
    }
    return false;
  };
  auto fail = [](const std::string& what) {
    throw ValidationError("sparse LMI: " + what);
  };
  if (!next()) fail("empty input");
  std::istringstream head(line);
  std::string word;
  int nvars = 0;
  if (!(head >> word >> nvars) || word != "variables" || nvars < 0) {
    fail("expected 'variables <n>'");
  }
  p.objective = Eigen::VectorXd::Zero(nvars);
  p.variable_names.resize(nvars);
  for (int i = 0; i < nvars; ++i) {
    if (!next()) fail("truncated variable list");
    std::istringstream ss(line);
    int id = 0;
    std::string obj;
    if (!(ss >> word >> id >> obj) || word != "var" || id != i) {
      fail("bad variable line '" + line + "'");
    }
    p.objective(i) = parse_double(obj);
    std::string name;
    std::getline(ss >> std::ws, name);
    p.variable_names[i] = name;
  }
  if (!next()) fail("missing block list");
  int nblocks = 0;
  std::istringstream bh(line);
  if (!(bh >> word >> nblocks) || word != "blocks" || nblocks < 0) {
    fail("expected 'blocks <n>'");
  }
  for (int k = 0; k < nblocks; ++k) {
    if (!next()) fail("truncated block list");
    std::istringstream ss(line);
    int id = 0, size = 0, mult = -1;
    std::string kind, label;
    if (!(ss >> word >> id >> size >> kind >> mult) || word != "block" ||
        id != k || size < 1) {
      fail("bad block line '" + line + "'");
    }
    std::getline(ss >> std::ws, label);
    LmiBlock b;
    b.size = size;
    b.label = label == "-" ? "" : label;
    b.multiplier = mult;
    b.constant = ComplexMatrix::Zero(size, size);
    for (auto kd : {BlockKind::generic, BlockKind::healthy,
                    BlockKind::tumor_lower, BlockKind::tumor_upper,
                    BlockKind::scalar, BlockKind::psd, BlockKind::nonnegative}) {
      if (kind == to_string(kd)) b.kind = kd;
    }
    p.blocks.push_back(std::move(b));
  }
  if (!next() || line != "entries") fail("missing 'entries' section");
  std::vector<std::map<int, SparseHermitian>> terms(nblocks);
  while (next()) {
    std::istringstream ss(line);
    int k = 0, var = 0, row = 0, col = 0;
    std::string re, im;
    if (!(ss >> k >> var >> row >> col >> re >> im)) {
      fail("bad entry line '" + line + "'");
    }
    if (k < 0 || k >= nblocks || var < -1 || var >= nvars || row < 0 ||
        col < row || col >= p.blocks[k].size) {
      fail("entry out of range '" + line + "'");
    }
    const Complex value(parse_double(re), parse_double(im));
    if (var == -1) {
      p.blocks[k].constant(row, col) += value;
      if (row != col) p.blocks[k].constant(col, row) += std::conj(value);
    } else {
      terms[k][var].push_back({row, col, value});
    }
  }
  for (int k = 0; k < nblocks; ++k) {
    for (auto& [var, coeff] : terms[k]) {
      p.blocks[k].terms.push_back({var, std::move(coeff)});
    }
  }
  p.validate();
  return p;
}

// ---------------------------------------------------------------------------
// Steering matrix

void write_steering_matrix(std::ostream& out, const SteeringField& field) {
  const int m = field.element_count();
  const int ns = field.healthy_count();
  const int nt = field.tumor_count();
  out << "# steering " << m << " x " << ns + nt << " (healthy " << ns
      << ", tumor " << nt << ")\n";
  for (int r = 0; r < m; ++r) {
    for (int c = 0; c < ns + nt; ++c) {
      const Complex v = c < ns ? field.healthy(r, c) : field.tumor(r, c - ns);
      if (c) out << ' ';
      out << format_double(v.real()) << ',' << format_double(v.imag());
    }
    out << '\n';
  }
}

ComplexMatrix read_steering_matrix(std::istream& in) {
  std::vector<std::vector<Complex>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string tok;
    std::vector<Complex> row;
    while (ss >> tok) {
      const auto comma = tok.find(',');
      if (comma == std::string::npos) {
        throw ValidationError("steering entry '" + tok + "' lacks ','");
      }
      row.emplace_back(parse_double(tok.substr(0, comma)),
                       parse_double(tok.substr(comma + 1)));
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ValidationError("steering rows have different lengths");
    }
    rows.push_back(std::move(row));
  }
  ComplexMatrix a(rows.size(), rows.empty() ? 0 : rows.front().size());
  for (size_t r = 0; r < rows.size(); ++r) {
    for (size_t c = 0; c < rows[r].size(); ++c) a(r, c) = rows[r][c];
  }
  return a;
}

// ---------------------------------------------------------------------------
// CSV outputs

void write_power_map_csv(std::ostream& out, const PowerMap& map,
                         DbConvention convention) {
  out << "x_mm,y_mm,p_linear,p_dB,scenario\n";
  for (int i = 0; i < map.size(); ++i) {
    out << format_double(map.positions[i].x() / kMm) << ','
        << format_double(map.positions[i].y() / kMm) << ','
        << format_double(map.power(i)) << ','
        << format_double(map.db(i, convention)) << ','
        << to_string(map.scenario) << '\n';
  }
}

PowerMap read_power_map_csv(std::istream& in) {
  PowerMap map;
  std::string line;
  if (!std::getline(in, line) || line != "x_mm,y_mm,p_linear,p_dB,scenario") {
    throw ValidationError("power map: unexpected header");
  }
  std::vector<double> power;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 5) throw ValidationError("power map: bad row '" + line + "'");
    map.positions.emplace_back(parse_double(f[0]) * kMm,
                               parse_double(f[1]) * kMm, 0.0);
    power.push_back(parse_double(f[2]));
    map.scenario =
        f[4] == "worst_case" ? Scenario::worst_case : Scenario::nominal;
  }
  map.power = Eigen::Map<Eigen::VectorXd>(power.data(), power.size());
  map.regions.assign(power.size(), Region::healthy);
  return map;
}

void write_worst_case_csv(std::ostream& out, const PowerMap& map) {
  out << "x_mm,y_mm,region,p_nominal,p_worst,multiplier,case\n";
  for (int i = 0; i < map.size(); ++i) {
    out << format_double(map.positions[i].x() / kMm) << ','
        << format_double(map.positions[i].y() / kMm) << ','
        << to_string(map.regions[i]) << ','
        << format_double(map.nominal_power.size() ? map.nominal_power(i)
                                                  : map.power(i))
        << ',' << format_double(map.power(i)) << ','
        << format_double(i < static_cast<int>(map.multipliers.size())
                             ? map.multipliers[i]
                             : 0.0)
        << ','
        << (i < static_cast<int>(map.case_tags.size()) ? map.case_tags[i]
                                                       : "nominal")
        << '\n';
  }
}

void write_report_csv(std::ostream& out, const ReportTable& table) {
  out << "scenario,design,omega_t_db,omega_s_db\n";
  for (const auto& r : table.rows) {
    out << r.scenario << ',' << r.design << ',' << format_double(r.tumor_db)
        << ',' << format_double(r.healthy_db) << '\n';
  }
}

std::string format_report(const ReportTable& table) {
  std::ostringstream ss;
  ss << "Average power (" << to_string(table.convention) << ", "
     << to_string(table.averaging) << ")\n";
  ss << std::left << std::setw(26) << "Scenario" << std::right
     << std::setw(12) << "Omega_T" << std::setw(12) << "Omega_S" << '\n';
  for (const auto& r : table.rows) {
    ss << std::left << std::setw(26) << (r.scenario + ", " + r.design)
       << std::right << std::fixed << std::setprecision(2) << std::setw(12)
       << r.tumor_db << std::setw(12) << r.healthy_db << '\n';
  }
  return ss.str();
}

void write_waveforms_csv(std::ostream& out, const WaveformBlock& block) {
  for (int n = 0; n < block.samples.rows(); ++n) {
    for (int k = 0; k < block.samples.cols(); ++k) {
      if (k) out << ',';
      out << format_double(block.samples(n, k).real()) << ','
          << format_double(block.samples(n, k).imag());
    }
    out << '\n';
  }
}

}  // namespace beamdesign
