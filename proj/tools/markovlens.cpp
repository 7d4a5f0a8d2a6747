#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "markovlens/analysis.hpp"
#include "markovlens/config.hpp"
#include "markovlens/error.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kNumericalError = 3;

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("markovlens");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("MARKOVLENS_LOG")) {
    const auto level = spdlog::level::from_str(env);
    // from_str maps unknown names to off; only accept the literal "off".
    if (level != spdlog::level::off || std::string(env) == "off") spdlog::set_level(level);
    else spdlog::warn("MARKOVLENS_LOG={} not recognized, using warn", env);
  }
}

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  int threads = 1;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "JSON analysis configuration")->required();
  sub->add_option("--out", c.out, "output directory (overrides config)");
  sub->add_option("--seed", c.seed, "random seed (overrides config)");
  sub->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);
}

int run_config(const Common& c, const std::optional<std::string>& only_task) {
  markovlens::AnalysisConfig cfg = markovlens::load_config(c.config);
  if (!c.out.empty()) cfg.output = c.out;
  if (c.seed) {
    cfg.witness.seed = *c.seed;
    cfg.tolerances.positivity_seed = *c.seed;
  }
  if (only_task) cfg.tasks = {*only_task};
  spdlog::info("preset {} dim {} -> {}", cfg.family.preset, cfg.family.dim, cfg.output.string());
  for (const auto& path : markovlens::run_tasks(cfg, c.threads))
    spdlog::info("wrote {}", path.string());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"markovlens: divisibility and backflow analysis of quantum dynamical maps"};
  app.require_subcommand(1);

  Common analyze_opts, scan_opts, extend_opts;
  CLI::App* analyze = app.add_subcommand("analyze", "run the tasks listed in the config");
  add_common(analyze, analyze_opts);
  CLI::App* scan = app.add_subcommand("witness-scan", "random search for backflow witnesses");
  add_common(scan, scan_opts);
  CLI::App* extend = app.add_subcommand("extend", "CPTP extension of a subspace propagator");
  add_common(extend, extend_opts);
  std::string report_dir;
  CLI::App* report = app.add_subcommand("report", "summarize artifacts in a directory");
  report->add_option("--in", report_dir, "analysis output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*analyze) return run_config(analyze_opts, std::nullopt);
    if (*scan) return run_config(scan_opts, "witness_scan");
    if (*extend) return run_config(extend_opts, "extend");
    std::cout << markovlens::render_report(report_dir);
    return kOk;
  } catch (const markovlens::ConfigError& e) {
    spdlog::error("{}", e.what());
    return kConfigError;
  } catch (const markovlens::Error& e) {
    spdlog::error("numerical failure: {}", e.what());
    return kNumericalError;
  } catch (const std::filesystem::filesystem_error& e) {
    spdlog::error("io: {}", e.what());
    return kNumericalError;
  }
}
