#pragma once

// Task runners behind the command-line tool. Each runner computes one
// artifact family and writes it into the output directory.

#include <filesystem>
#include <string>
#include <vector>

#include "markovlens/config.hpp"
#include "markovlens/cp_extension.hpp"
#include "markovlens/divisibility.hpp"
#include "markovlens/io.hpp"
#include "markovlens/witnesses.hpp"

namespace markovlens {

io::Json verdict_to_json(const DivisibilityVerdict& v, const AnalysisConfig& cfg);
std::string rank_profile_csv(const RankProfile& p);
/// t, status (ok | singular | invalid), canonical rates in descending order.
std::string rates_csv(const MapFamily& family, const TimeGrid& grid, double fd_step,
                      double rank_rtol);
std::string witness_csv(const WitnessRecord& r);
io::Json witness_to_json(const WitnessRecord& r, double fd_tol);

struct ExtendOutcome {
  double s;
  double t;
  SubspaceMapSpec spec;
  FeasibilityResult result;
  ExtensionReport verification;
};

ExtendOutcome run_extend(const MapFamily& family, const TimeGrid& grid, const AnalysisConfig& cfg);
io::Json extend_to_json(const ExtendOutcome& e);

/// Runs every task in cfg.tasks and returns the written paths in order.
std::vector<std::filesystem::path> run_tasks(const AnalysisConfig& cfg, int threads);

/// Plain-text summary of the artifacts in `dir`. Raises ConfigError when the
/// directory holds no known artifact.
std::string render_report(const std::filesystem::path& dir);

}  // namespace markovlens
