#pragma once

// Declarative analysis configuration. Parsing is strict: unknown keys, wrong
// types and out-of-range values raise ConfigError before any computation.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "markovlens/divisibility.hpp"
#include "markovlens/dynamics.hpp"
#include "markovlens/grid.hpp"
#include "markovlens/io.hpp"
#include "markovlens/witnesses.hpp"

namespace markovlens {

const std::vector<std::string>& preset_names();
const std::vector<std::string>& task_names();

struct FamilyConfig {
  std::string preset;
  Eigen::Index dim = 2;
  /// Raw parameter object, validated against the preset.
  io::Json params = io::Json::object();
};

struct GridConfig {
  double t_max = 0.0;
  std::size_t n_points = 400;
  std::vector<double> times;
};

struct WitnessConfig {
  AncillaKind ancilla_kind = AncillaKind::d;
  int n_samples = 64;
  int n_refine = 16;
  std::uint64_t seed = 0;
};

struct ExtendConfig {
  std::string mode = "breakpoint";
  std::size_t breakpoint_index = 0;
  std::optional<double> s;
  std::optional<double> t;
  bool require_tp = true;
  int max_iter = 5000;
  bool use_dykstra = true;
};

struct AnalysisConfig {
  FamilyConfig family;
  GridConfig grid;
  Tolerances tolerances;
  /// Allowed positive derivative before a witness trajectory counts as
  /// increasing in reports.
  double fd_tol = 1e-6;
  /// Finite-difference step for generator extraction.
  double fd_step = 1e-3;
  IntegrationOptions integration;
  std::set<std::string> tasks;
  WitnessConfig witness;
  std::optional<Matrix> blp_rho1;
  std::optional<Matrix> blp_rho2;
  ExtendConfig extend;
  std::filesystem::path output = "markovlens_out";
};

AnalysisConfig parse_config(const io::Json& j);
/// Reads and parses a JSON file; relative output paths stay relative to the
/// working directory.
AnalysisConfig load_config(const std::filesystem::path& path);

ScalarSignal parse_signal(const io::Json& j, const std::string& where);

TimeGrid build_grid(const AnalysisConfig& cfg);
/// Family from the preset; invalid parameters raise ConfigError naming the
/// offending time.
MapFamily build_family(const AnalysisConfig& cfg);

}  // namespace markovlens
