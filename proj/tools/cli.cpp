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

#include "cli.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "beamdesign/io.hpp"
#include "beamdesign/version.hpp"
#include "beamdesign/worstcase.hpp"

#ifndef BEAMDESIGN_CONFIG_DIR
#define BEAMDESIGN_CONFIG_DIR "configs"
#endif

namespace beamdesign::cli {

namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int exit_code(SolveStatus status) {
  switch (status) {
    case SolveStatus::optimal: return kOptimal;
    case SolveStatus::infeasible: return kInfeasible;
    case SolveStatus::unbounded: return kUnbounded;
    case SolveStatus::numerical_failure: return kNumericalFailure;
  }
  return kNumericalFailure;
}

// Flags shared by the subcommands, applied on top of the config file.
struct Overrides {
  std::string config;
  std::string variant;
  std::optional<double> gap_tol, feas_tol, delta, epsilon, gamma, level;
  std::optional<int> max_iter, element_count;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string db_convention;
  std::string average;
  bool verbose = false;
};

std::string resolve_config_path(const std::string& name) {
  if (fs::exists(name)) return name;
  for (const fs::path& candidate :
       {fs::path(BEAMDESIGN_CONFIG_DIR) / name,
        fs::path(BEAMDESIGN_CONFIG_DIR) / (name + ".json")}) {
    if (fs::exists(candidate)) return candidate.string();
  }
  throw ConfigurationError("config '" + name + "' not found");
}

RunConfig build_config(const Overrides& o) {
  RunConfig c = o.config.empty() ? RunConfig{}
                                 : load_run_config(resolve_config_path(o.config));
  if (!o.variant.empty()) {
    const auto v = parse_variant(o.variant);
    if (!v) throw ConfigurationError("unknown variant '" + o.variant + "'");
    c.variant = *v;
  }
  if (o.gap_tol) c.gap_tol = *o.gap_tol;
  if (o.feas_tol) c.feas_tol = *o.feas_tol;
  if (o.max_iter) c.max_iter = *o.max_iter;
  if (o.delta) c.delta = *o.delta;
  if (o.epsilon) c.epsilon = *o.epsilon;
  if (o.gamma) c.gamma = *o.gamma;
  if (o.level) c.fixed_level = *o.level;
  if (o.element_count) {
    c.array.element_count = *o.element_count;
    if (c.uncertainty_weights.size() != *o.element_count) {
      c.uncertainty_weights.resize(0);
    }
  }
  if (o.seed) c.seed = *o.seed;
  if (!o.out_dir.empty()) c.out_dir = o.out_dir;
  if (!o.db_convention.empty()) {
    const auto v = parse_db_convention(o.db_convention);
    if (!v) throw ConfigurationError("unknown db convention");
    c.db_convention = *v;
  }
  if (!o.average.empty()) {
    const auto v = parse_averaging(o.average);
    if (!v) throw ConfigurationError("unknown averaging");
    c.averaging = *v;
  }
  c.validate();
  return c;
}

struct Scene {
  ArrayGeometry geometry;
  RegionGrids grids;
  SteeringField field;
};

Scene build_scene(const RunConfig& c) {
  Scene s;
  s.geometry = build_curvilinear_array(c.array, c.medium);
  s.grids = build_region_grids(c.grid);
  s.field = build_steering_field(s.geometry, s.grids, c.uncertainty());
  return s;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
  f << text;
}

template <class Fn>
void write_file(const fs::path& path, Fn&& fn) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
  fn(f);
}

void write_json(const fs::path& path, const Json& doc) {
  write_text(path, doc.dump(2) + "\n");
}

void write_provenance(const fs::path& dir, const RunConfig& c,
                      const std::vector<std::string>& args) {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::ostringstream ts;
  ts << std::put_time(std::gmtime(&tt), "%Y-%m-%dT%H:%M:%SZ");
  Json doc = {
      {"tool", "beamdesign"},
      {"version", kVersion},
      {"eigen_version", std::to_string(EIGEN_WORLD_VERSION) + "." +
                            std::to_string(EIGEN_MAJOR_VERSION) + "." +
                            std::to_string(EIGEN_MINOR_VERSION)},
      {"config_hash", config_hash(c)},
      {"command_line", args},
      {"timestamp_utc", ts.str()},
  };
  write_json(dir / "provenance.json", doc);
}

fs::path prepare_out_dir(const RunConfig& c) {
  fs::path dir(c.out_dir);
  fs::create_directories(dir);
  return dir;
}

DesignDescription describe(const RunConfig& c, const Scene& s,
                           DesignVariant variant) {
  DesignDescription d;
  d.variant = variant;
  d.field = s.field;
  d.gamma = c.gamma;
  d.delta = c.delta;
  d.healthy_weights = c.healthy_weights.size()
                          ? c.healthy_weights
                          : default_healthy_weights(s.grids);
  return d;
}

// Runs the configured variant. The fixed-level variants take P from the
// config or, when absent, from a robust design on the same scene.
CovarianceDesign run_variant(const RunConfig& c, const Scene& s,
                             DesignVariant variant, std::ostream& log,
                             bool verbose) {
  DesignOptions opt;
  opt.solver = c.solver_options();
  if (verbose) opt.solver.log = &log;
  DesignDescription d = describe(c, s, variant);
  if (variant == DesignVariant::weighted_robust ||
      variant == DesignVariant::sum_energy_robust) {
    if (c.fixed_level) {
      d.fixed_level = *c.fixed_level;
    } else {
      log << "fixed level not configured; solving the robust design for P\n";
      const CovarianceDesign robust =
          run_design(describe(c, s, DesignVariant::robust), opt);
      if (robust.status != SolveStatus::optimal || !robust.level) {
        log << "robust design for P ended " << to_string(robust.status)
            << '\n';
        CovarianceDesign failed;
        failed.variant = variant;
        failed.status = robust.status;
        failed.gamma = c.gamma;
        failed.delta = c.delta;
        return failed;
      }
      d.fixed_level = *robust.level;
    }
  }
  return run_design(d, opt);
}

Json design_document(const CovarianceDesign& d, const RunConfig& c) {
  Json doc = to_json(d);
  doc["config"] = to_json(c);
  return doc;
}

void report_design(std::ostream& out, const CovarianceDesign& d,
                   const fs::path& path) {
  out << to_string(d.variant) << ": " << to_string(d.status);
  if (d.status == SolveStatus::optimal) {
    out << ", t = " << format_double(d.t);
    if (d.level) out << ", P = " << format_double(*d.level);
  }
  out << " (" << d.iterations << " iterations) -> " << path.string() << '\n';
}

struct LoadedDesign {
  CovarianceDesign design;
  RunConfig config;
};

LoadedDesign load_design(const std::string& path, const Overrides& o) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot open design '" + path + "'");
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw IntegrityError("design '" + path + "' is not valid JSON");
  }
  LoadedDesign ld;
  ld.design = covariance_design_from_json(doc);
  if (!o.config.empty()) {
    ld.config = build_config(o);
  } else {
    if (!doc.contains("config")) {
      throw ConfigurationError("design lacks an embedded config; pass --config");
    }
    ld.config = run_config_from_json(doc["config"]);
    Overrides rest = o;
    rest.config.clear();
    RunConfig merged = ld.config;
    if (!rest.out_dir.empty()) merged.out_dir = rest.out_dir;
    if (rest.seed) merged.seed = *rest.seed;
    if (!rest.db_convention.empty()) {
      const auto v = parse_db_convention(rest.db_convention);
      if (!v) throw ConfigurationError("unknown db convention");
      merged.db_convention = *v;
    }
    if (!rest.average.empty()) {
      const auto v = parse_averaging(rest.average);
      if (!v) throw ConfigurationError("unknown averaging");
      merged.averaging = *v;
    }
    ld.config = merged;
  }
  if (ld.design.status != SolveStatus::optimal) {
    throw IntegrityError("design status is " +
                         std::string(to_string(ld.design.status)));
  }
  ld.design.check_integrity();
  if (ld.design.element_count() != ld.config.array.element_count) {
    throw IntegrityError("design size differs from the configured array");
  }
  return ld;
}

void add_common(CLI::App* cmd, Overrides& o, bool solver) {
  cmd->add_option("--config", o.config,
                  "Run configuration (path or bundled preset name)");
  cmd->add_option("--out-dir", o.out_dir, "Output directory");
  cmd->add_option("--seed", o.seed, "Random seed");
  cmd->add_option("--db-convention", o.db_convention,
                  "dB convention: 20log10 or 10log10")
      ->check(CLI::IsMember({"20log10", "10log10"}));
  cmd->add_option("--average", o.average,
                  "Region averaging: db-of-mean or mean-of-db")
      ->check(CLI::IsMember({"db-of-mean", "mean-of-db"}));
  if (!solver) return;
  cmd->add_option("--variant", o.variant,
                  "nominal_eq5 | robust | weighted_robust | "
                  "sum_energy_robust | nominal_generalized");
  cmd->add_option("--gap-tol", o.gap_tol, "Relative duality-gap tolerance");
  cmd->add_option("--feas-tol", o.feas_tol,
                  "Feasibility tolerance on block eigenvalues");
  cmd->add_option("--max-iter", o.max_iter, "Interior-point iteration limit");
  cmd->add_option("--delta", o.delta, "Tumor band tightness");
  cmd->add_option("--epsilon", o.epsilon, "Uncertainty bound (squared norm)");
  cmd->add_option("--gamma", o.gamma, "Total transmit power");
  cmd->add_option("--level", o.level, "Fixed tumor level P");
  cmd->add_option("--M", o.element_count, "Number of array elements");
  cmd->add_flag("--verbose", o.verbose, "Print solver iterations");
}

int cmd_design(const Overrides& o, const std::vector<std::string>& args,
               std::ostream& out, std::ostream& err) {
  const RunConfig c = build_config(o);
  const Scene s = build_scene(c);
  const CovarianceDesign d = run_variant(c, s, c.variant, err, o.verbose);
  const fs::path dir = prepare_out_dir(c);
  const fs::path path = dir / (std::string("design_") + to_string(c.variant) + ".json");
  write_json(path, design_document(d, c));
  write_provenance(dir, c, args);
  report_design(out, d, path);
  return exit_code(d.status);
}

std::vector<std::pair<std::string, std::string>> evaluate_design(
    const CovarianceDesign& d, const RunConfig& c, const Scene& s,
    const std::string& mode, const std::string& tag, const fs::path& dir,
    std::vector<PowerMap>& keep) {
  std::vector<std::pair<std::string, std::string>> written;
  if (mode == "nominal" || mode == "both") {
    keep.push_back(nominal_power_map(d.R, s.field, s.grids));
    keep.back().design_label = tag;
    const fs::path p = dir / ("power_map_nominal_" + tag + ".csv");
    write_file(p, [&](std::ostream& f) {
      write_power_map_csv(f, keep.back(), c.db_convention);
    });
    written.push_back({"nominal", p.string()});
  }
  if (mode == "worst" || mode == "both") {
    keep.push_back(worst_case_power_map(d, s.field, s.grids));
    keep.back().design_label = tag;
    const fs::path p = dir / ("power_map_worst_" + tag + ".csv");
    write_file(p, [&](std::ostream& f) {
      write_power_map_csv(f, keep.back(), c.db_convention);
    });
    const fs::path q = dir / ("worst_case_points_" + tag + ".csv");
    write_file(q, [&](std::ostream& f) { write_worst_case_csv(f, keep.back()); });
    written.push_back({"worst", p.string()});
  }
  return written;
}

void write_report(const fs::path& dir, const ReportTable& table,
                  std::ostream& out) {
  write_file(dir / "report.csv",
             [&](std::ostream& f) { write_report_csv(f, table); });
  const std::string text = format_report(table);
  write_text(dir / "report.txt", text);
  out << text;
}

int cmd_evaluate(const Overrides& o, const std::string& design_path,
                 const std::string& mode, const std::vector<std::string>& args,
                 std::ostream& out) {
  const LoadedDesign ld = load_design(design_path, o);
  const Scene s = build_scene(ld.config);
  const fs::path dir = prepare_out_dir(ld.config);
  const std::string tag = to_string(ld.design.variant);
  std::vector<PowerMap> maps;
  maps.reserve(2);
  evaluate_design(ld.design, ld.config, s, mode, tag, dir, maps);
  std::vector<LabelledMap> entries;
  for (const auto& m : maps) {
    entries.push_back({m.scenario == Scenario::nominal ? "Nominal" : "Perturbed",
                       tag, &m});
  }
  write_report(dir, region_report(entries, ld.config.db_convention,
                                   ld.config.averaging),
               out);
  write_provenance(dir, ld.config, args);
  return kOptimal;
}

int cmd_synthesize(const Overrides& o, const std::string& design_path,
                   std::optional<int> samples,
                   const std::vector<std::string>& args, std::ostream& out) {
  const LoadedDesign ld = load_design(design_path, o);
  const int n = samples.value_or(ld.config.synthesis_samples);
  if (n < 1) throw UsageError("--samples must be >= 1");
  const WaveformBlock block =
      synthesize_waveforms(ld.design.R, n, ld.config.seed);
  const fs::path dir = prepare_out_dir(ld.config);
  const fs::path p = dir / "waveforms.csv";
  write_file(p, [&](std::ostream& f) { write_waveforms_csv(f, block); });
  write_provenance(dir, ld.config, args);
  const double dev =
      (block.sample_covariance - block.target).cwiseAbs().maxCoeff();
  out << n << " snapshots x " << block.samples.cols()
      << " channels -> " << p.string() << " (max covariance deviation "
      << format_double(dev) << ")\n";
  return kOptimal;
}

int cmd_reproduce(const Overrides& o, const std::vector<std::string>& args,
                  std::ostream& out, std::ostream& err) {
  Overrides with_preset = o;
  if (with_preset.config.empty()) with_preset.config = "reference_scenario";
  const RunConfig c = build_config(with_preset);
  const Scene s = build_scene(c);
  const fs::path dir = prepare_out_dir(c);
  write_json(dir / "geometry.json", to_json(s.geometry));
  write_json(dir / "grids.json", to_json(s.grids));

  const CovarianceDesign nr = run_variant(
      c, s, DesignVariant::nominal_generalized, err, o.verbose);
  const fs::path nr_path = dir / "design_nominal_generalized.json";
  write_json(nr_path, design_document(nr, c));
  report_design(out, nr, nr_path);
  const CovarianceDesign rs =
      run_variant(c, s, DesignVariant::robust, err, o.verbose);
  const fs::path rs_path = dir / "design_robust.json";
  write_json(rs_path, design_document(rs, c));
  report_design(out, rs, rs_path);
  write_provenance(dir, c, args);
  if (nr.status != SolveStatus::optimal) return exit_code(nr.status);
  if (rs.status != SolveStatus::optimal) return exit_code(rs.status);
  nr.check_integrity();
  rs.check_integrity();

  std::vector<PowerMap> maps;
  maps.reserve(4);
  evaluate_design(nr, c, s, "both", "Rnr", dir, maps);
  evaluate_design(rs, c, s, "worst", "Rstar", dir, maps);
  const ReportTable table = region_report(
      {{"Nominal", "R_nr", &maps[0]},
       {"Perturbed", "R_nr", &maps[1]},
       {"Perturbed", "R*", &maps[2]}},
      c.db_convention, c.averaging);
  write_report(dir, table, out);
  return kOptimal;
}

int cmd_export_lmi(const Overrides& o, std::ostream& out) {
  const RunConfig c = build_config(o);
  const Scene s = build_scene(c);
  DesignDescription d = describe(c, s, c.variant);
  if (c.variant == DesignVariant::weighted_robust ||
      c.variant == DesignVariant::sum_energy_robust) {
    if (!c.fixed_level) {
      throw ConfigurationError("export of a fixed-level variant needs --level");
    }
    d.fixed_level = *c.fixed_level;
  }
  const SdpProblem p = assemble(d);
  const fs::path dir = prepare_out_dir(c);
  const fs::path path = dir / (std::string("problem_") + to_string(c.variant) + ".lmi");
  write_file(path, [&](std::ostream& f) { write_sparse_lmi(f, p); });
  const fs::path steer = dir / "steering.txt";
  write_file(steer, [&](std::ostream& f) { write_steering_matrix(f, s.field); });
  out << p.variable_count() << " variables, " << p.blocks.size()
      << " blocks -> " << path.string() << '\n';
  return kOptimal;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Robust transmit covariance design for transducer arrays"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Overrides o;
  std::string design_path;
  std::string mode = "worst";
  std::optional<int> samples;

  auto* design = app.add_subcommand("design", "Solve one design variant");
  add_common(design, o, true);
  auto* evaluate = app.add_subcommand("evaluate", "Power maps and report");
  add_common(evaluate, o, false);
  evaluate->add_option("--design", design_path, "Design document")->required();
  evaluate->add_option("--mode", mode, "nominal | worst | both")
      ->check(CLI::IsMember({"nominal", "worst", "both"}));
  auto* synth = app.add_subcommand("synthesize", "Waveform synthesis");
  add_common(synth, o, false);
  synth->add_option("--design", design_path, "Design document")->required();
  synth->add_option("--samples", samples, "Number of snapshots N");
  auto* reproduce = app.add_subcommand(
      "reproduce-paper", "Nominal and robust designs with all evaluations");
  add_common(reproduce, o, true);
  auto* export_lmi =
      app.add_subcommand("export-lmi", "Write the sparse LMI problem");
  add_common(export_lmi, o, true);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion& e) {
    out << kVersion << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (*design) return cmd_design(o, args, out, err);
    if (*evaluate) return cmd_evaluate(o, design_path, mode, args, out);
    if (*synth) return cmd_synthesize(o, design_path, samples, args, out);
    if (*reproduce) return cmd_reproduce(o, args, out, err);
    if (*export_lmi) return cmd_export_lmi(o, out);
  } catch (const IntegrityError& e) {
    err << "integrity error: " << e.what() << '\n';
    return kIntegrity;
  } catch (const ConfigurationError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kUsage;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const AssemblyError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kUsage;
  } catch (const SingularityError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

}  // namespace beamdesign::cli
