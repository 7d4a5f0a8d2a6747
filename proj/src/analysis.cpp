#include "markovlens/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "markovlens/error.hpp"

namespace markovlens {

using io::Json;
using io::format_double;
using io::number_or_null;

Json verdict_to_json(const DivisibilityVerdict& v, const AnalysisConfig& cfg) {
  Json j;
  j["schema_version"] = 1;
  j["status"] = to_string(v.status);
  j["family"] = {{"preset", cfg.family.preset}, {"dim", cfg.family.dim}};
  j["grid"] = {{"n_points", v.profile.times.size()}, {"t_max", v.profile.times.back()}};
  const Tolerances& t = cfg.tolerances;
  j["tolerances"] = {{"rank_rtol", t.rank_rtol},   {"kernel_tol", t.kernel_tol},
                     {"image_tol", t.image_tol},   {"choi_tol", t.choi_tol},
                     {"tp_tol", t.tp_tol},         {"bisect_tol", t.bisect_tol},
                     {"positivity_samples", t.positivity_samples}};
  j["invertible_everywhere"] = v.invertible_everywhere;
  j["image_nonincreasing"] = v.image_nonincreasing;
  j["image_residual"] = number_or_null(v.image_residual);
  j["worst_kernel_residual"] = number_or_null(v.worst_kernel_residual);
  j["first_violation_time"] =
      v.first_violation_time ? number_or_null(*v.first_violation_time) : Json(nullptr);
  j["worst_choi_min"] = v.pairs.empty() ? Json(nullptr) : number_or_null(v.worst_choi_min);
  j["worst_choi_pair"] = v.worst_choi_pair
                             ? Json::array({v.worst_choi_pair->first, v.worst_choi_pair->second})
                             : Json(nullptr);
  j["worst_tp_residual"] = number_or_null(v.worst_tp_residual);
  j["worst_composition_residual"] = number_or_null(v.worst_composition_residual);
  j["positivity_min"] = v.positivity_min ? number_or_null(*v.positivity_min) : Json(nullptr);
  j["breakpoints"] = v.profile.breakpoints;
  const auto& ranks = v.profile.ranks;
  j["rank_summary"] = {{"initial", ranks.front()},
                       {"final", ranks.back()},
                       {"min", *std::min_element(ranks.begin(), ranks.end())},
                       {"threshold", v.profile.threshold}};
  Json projectors = Json::array();
  for (const auto& p : v.projectors) {
    projectors.push_back({{"t_star", p.t_star},
                          {"steps", p.steps},
                          {"final_eps", p.final_eps},
                          {"cauchy_residual", number_or_null(p.cauchy_residual)},
                          {"idempotence_residual", number_or_null(p.idempotence_residual)},
                          {"tp_on_domain_residual", number_or_null(p.tp_on_domain_residual)},
                          {"tp_full_residual", number_or_null(p.tp_full_residual)},
                          {"choi_min", number_or_null(p.choi_min)},
                          {"image_residual", number_or_null(p.image_residual)},
                          {"natural", io::matrix_to_json(p.projector.natural())}});
  }
  j["projectors"] = projectors;
  j["n_pairs"] = v.pairs.size();
  j["notes"] = v.notes;
  return j;
}

std::string rank_profile_csv(const RankProfile& p) {
  std::vector<std::string> header = {"t"};
  const auto m = p.singular_values.front().size();
  for (Eigen::Index k = 0; k < m; ++k) header.push_back("sv_" + std::to_string(k + 1));
  header.push_back("rank");
  header.push_back("breakpoint");
  io::CsvTable table(header);
  for (std::size_t i = 0; i < p.times.size(); ++i) {
    std::vector<std::string> row = {format_double(p.times[i])};
    for (Eigen::Index k = 0; k < m; ++k) row.push_back(format_double(p.singular_values[i](k)));
    row.push_back(std::to_string(p.ranks[i]));
    const bool bp = std::find(p.breakpoints.begin(), p.breakpoints.end(), p.times[i]) !=
                    p.breakpoints.end();
    row.push_back(bp ? "1" : "0");
    table.add_row(std::move(row));
  }
  return table.str();
}

std::string rates_csv(const MapFamily& family, const TimeGrid& grid, double fd_step,
                      double rank_rtol) {
  const Eigen::Index d = family.dim();
  const Eigen::Index nr = d * d - 1;
  std::vector<std::string> header = {"t", "status"};
  for (Eigen::Index k = 0; k < nr; ++k) header.push_back("gamma_" + std::to_string(k + 1));
  io::CsvTable table(header);
  const double thr = rank_threshold(family, rank_rtol);
  for (double t : grid.times()) {
    std::vector<std::string> row = {format_double(t), "ok"};
    try {
      const GKLSDecomposition g =
          canonical_gkls(generator_from_family(family, t, fd_step, thr), 1e-6);
      for (Eigen::Index k = 0; k < nr; ++k) row.push_back(format_double(g.rates(k)));
    } catch (const SingularGenerator&) {
      row[1] = "singular";
    } catch (const ValidationError&) {
      row[1] = "invalid";
    }
    row.resize(header.size());
    table.add_row(std::move(row));
  }
  return table.str();
}

std::string witness_csv(const WitnessRecord& r) {
  io::CsvTable table({"t", "norm", "derivative"});
  for (std::size_t i = 0; i < r.times.size(); ++i) {
    const bool interior = i > 0 && i + 1 < r.times.size();
    table.add_row({format_double(r.times[i]), format_double(r.norms[i]),
                   interior ? format_double(r.derivatives[i - 1]) : ""});
  }
  return table.str();
}

Json witness_to_json(const WitnessRecord& r, double fd_tol) {
  const double allowance = std::max(r.tolerance, fd_tol);
  Json j;
  j["ancilla_kind"] = to_string(r.ancilla_kind);
  j["max_backflow"] = number_or_null(r.max_backflow);
  j["max_backflow_time"] = r.max_backflow_time;
  j["bracket"] = {r.bracket.first, r.bracket.second};
  j["fd_tolerance"] = allowance;
  j["result"] = r.max_backflow > allowance ? "violation_found" : "no_violation_found";
  j["certified"] = false;
  j["kink_times"] = r.kink_times;
  j["max_at_kink"] = r.max_at_kink;
  j["n_times"] = r.times.size();
  j["witness"] = io::matrix_to_json(r.witness);
  return j;
}

ExtendOutcome run_extend(const MapFamily& family, const TimeGrid& grid, const AnalysisConfig& cfg) {
  const ExtendConfig& e = cfg.extend;
  double s = 0.0, t = 0.0;
  if (e.mode == "breakpoint") {
    const RankProfile p = rank_profile(family, grid, cfg.tolerances.rank_rtol,
                                       cfg.tolerances.bisect_tol);
    if (e.breakpoint_index >= p.breakpoints.size())
      throw ConfigError("extend.breakpoint_index " + std::to_string(e.breakpoint_index) +
                        " but the family has " + std::to_string(p.breakpoints.size()) +
                        " breakpoints on this grid");
    s = p.breakpoints[e.breakpoint_index];
    t = e.t.value_or(s);
  } else {
    s = *e.s;
    t = *e.t;
  }
  if (!(s >= 0.0 && t >= s)) throw ConfigError("extend needs 0 <= s <= t");
  const PropagatorResult pr = propagator(family, t, s, cfg.tolerances);
  ExtendOutcome out{s, t, restrict_map(pr.v, pr.domain, e.require_tp), {}, {}};
  ExtendOptions opts;
  opts.max_iter = e.max_iter;
  opts.use_dykstra = e.use_dykstra;
  opts.warm_start = HermitianMatrix::hermitian_part(to_choi(pr.v).matrix()).matrix();
  out.result = extend_cp(out.spec, opts);
  out.verification = verify_extension(*out.result.choi, out.spec, 1e-7);
  return out;
}

Json extend_to_json(const ExtendOutcome& e) {
  const FeasibilityResult& r = e.result;
  Json j;
  j["status"] = to_string(r.status);
  j["s"] = e.s;
  j["t"] = e.t;
  j["require_tp"] = e.spec.require_tp;
  j["iterations"] = r.iterations;
  j["action_residual"] = number_or_null(r.action_residual);
  j["tp_residual"] = number_or_null(r.tp_residual);
  j["psd_slack"] = number_or_null(r.psd_slack);
  j["verification"] = {{"passes", e.verification.passes},
                       {"tolerance", 1e-7},
                       {"min_eigenvalue", e.verification.min_eigenvalue},
                       {"action_residual", e.verification.action_residual},
                       {"tp_residual", e.verification.tp_residual}};
  const std::size_t tail = std::min<std::size_t>(r.history.size(), 20);
  j["history_tail"] = std::vector<double>(r.history.end() - static_cast<std::ptrdiff_t>(tail),
                                          r.history.end());
  if (r.status == FeasibilityStatus::INFEASIBLE_EVIDENCE)
    j["note"] = "residual floor stagnated; heuristic evidence, not a certificate of infeasibility";
  Json domain = Json::array(), images = Json::array();
  for (std::size_t a = 0; a < e.spec.domain.size(); ++a) {
    domain.push_back(io::matrix_to_json(e.spec.domain[a]));
    images.push_back(io::matrix_to_json(e.spec.images[a]));
  }
  j["spec"] = {{"dim", e.spec.dim()}, {"domain", domain}, {"images", images}};
  return j;
}

std::vector<std::filesystem::path> run_tasks(const AnalysisConfig& cfg, int threads) {
  const TimeGrid grid = build_grid(cfg);
  const MapFamily family = build_family(cfg);
  std::filesystem::create_directories(cfg.output);
  std::vector<std::filesystem::path> written;
  auto emit = [&](const std::string& name, const std::string& text) {
    const auto path = cfg.output / name;
    io::write_file_atomic(path, text);
    written.push_back(path);
  };
  auto emit_json = [&](const std::string& name, const Json& j) { emit(name, j.dump(2) + "\n"); };
  auto wants = [&](const char* task) { return cfg.tasks.count(task) > 0; };

  if (wants("verdict")) {
    const DivisibilityVerdict v = cp_divisibility_verdict(family, grid, cfg.tolerances);
    emit_json("verdict.json", verdict_to_json(v, cfg));
    emit("rank_profile.csv", rank_profile_csv(v.profile));
  }
  if (wants("rates")) {
    emit("rates.csv", rates_csv(family, grid, cfg.fd_step, cfg.tolerances.rank_rtol));
  }
  if (wants("blp")) {
    const Eigen::Index d = family.dim();
    Matrix r1, r2;
    if (cfg.blp_rho1) {
      r1 = *cfg.blp_rho1;
      r2 = *cfg.blp_rho2;
    } else {
      if (d < 2) throw ConfigError("blp needs dim >= 2 or explicit states");
      Vector plus = Vector::Zero(d), minus = Vector::Zero(d);
      plus(0) = plus(1) = minus(0) = 1.0 / std::sqrt(2.0);
      minus(1) = -1.0 / std::sqrt(2.0);
      r1 = plus * plus.adjoint();
      r2 = minus * minus.adjoint();
    }
    DensityMatrix rho1, rho2;
    try {
      rho1 = DensityMatrix(r1);
      rho2 = DensityMatrix(r2);
    } catch (const ContractViolation& e) {
      throw ConfigError(std::string("blp: ") + e.what());
    }
    if (rho1.dim() != d || rho2.dim() != d) throw ConfigError("blp states must be d x d");
    const WitnessRecord rec = blp_sigma(family, rho1, rho2, grid);
    emit("blp.csv", witness_csv(rec));
    emit_json("blp.json", witness_to_json(rec, cfg.fd_tol));
  }
  if (wants("witness_scan")) {
    ScanOptions so;
    so.ancilla_kind = cfg.witness.ancilla_kind;
    so.n_samples = cfg.witness.n_samples;
    so.n_refine = cfg.witness.n_refine;
    so.seed = cfg.witness.seed;
    so.threads = threads;
    const WitnessRecord rec = witness_scan(family, grid, so);
    emit("witness_trajectory.csv", witness_csv(rec));
    Json j = witness_to_json(rec, cfg.fd_tol);
    j["n_samples"] = so.n_samples;
    j["n_refine"] = so.n_refine;
    j["seed"] = so.seed;
    emit_json("best_witness.json", j);
  }
  if (wants("extend")) {
    const ExtendOutcome e = run_extend(family, grid, cfg);
    emit_json("feasibility.json", extend_to_json(e));
    if (e.result.status == FeasibilityStatus::FEASIBLE)
      emit_json("choi.json", {{"dim", e.spec.dim()},
                              {"convention", "sum_ij |i><j| (x) Phi(|i><j|)"},
                              {"choi", io::matrix_to_json(e.result.choi->matrix())}});
  }
  return written;
}

namespace {

std::string short_value(const Json& v) {
  if (v.is_null()) return "-";
  if (v.is_number_float()) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v.get<double>());
    return buf;
  }
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array() && v.size() <= 6) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + short_value(v[i]);
    return out + "]";
  }
  if (v.is_array()) return "[" + std::to_string(v.size()) + " items]";
  return v.dump();
}

std::size_t csv_rows(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) ++n;
  return n > 0 ? n - 1 : 0;
}

Json read_json(const std::filesystem::path& p) {
  std::ifstream in(p);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("report: cannot parse " + p.string() + ": " + e.what());
  }
}

}  // namespace

std::string render_report(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir))
    throw ConfigError("report: " + dir.string() + " is not a directory");
  struct Row {
    std::string artifact, field, value;
  };
  std::vector<Row> rows;
  auto fields = [&](const std::string& name, std::initializer_list<const char*> keys) {
    const auto p = dir / name;
    if (!std::filesystem::exists(p)) return;
    const Json j = read_json(p);
    for (const char* k : keys)
      if (j.contains(k)) rows.push_back({name, k, short_value(j[k])});
  };
  auto csv = [&](const std::string& name) {
    const auto p = dir / name;
    if (std::filesystem::exists(p)) rows.push_back({name, "rows", std::to_string(csv_rows(p))});
  };

  fields("verdict.json", {"status", "invertible_everywhere", "image_nonincreasing",
                          "breakpoints", "worst_choi_min", "worst_kernel_residual",
                          "first_violation_time", "positivity_min"});
  csv("rank_profile.csv");
  csv("rates.csv");
  fields("blp.json", {"result", "max_backflow", "max_backflow_time"});
  csv("blp.csv");
  fields("best_witness.json",
         {"ancilla_kind", "result", "max_backflow", "max_backflow_time", "seed"});
  csv("witness_trajectory.csv");
  fields("feasibility.json", {"status", "iterations", "action_residual", "tp_residual",
                              "psd_slack", "require_tp"});
  fields("choi.json", {"dim"});
  if (rows.empty())
    throw ConfigError("report: no analysis artifacts in " + dir.string());

  std::size_t w1 = 8, w2 = 5;
  for (const auto& r : rows) {
    w1 = std::max(w1, r.artifact.size());
    w2 = std::max(w2, r.field.size());
  }
  std::ostringstream os;
  auto line = [&](const std::string& a, const std::string& b, const std::string& c) {
    os << a << std::string(w1 - a.size() + 2, ' ') << b << std::string(w2 - b.size() + 2, ' ')
       << c << '\n';
  };
  line("artifact", "field", "value");
  line(std::string(w1, '-'), std::string(w2, '-'), "-----");
  for (const auto& r : rows) line(r.artifact, r.field, r.value);
  return os.str();
}

}  // namespace markovlens
