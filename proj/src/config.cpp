#include "markovlens/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "markovlens/error.hpp"
#include "markovlens/random.hpp"

namespace markovlens {

using io::Json;

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {
      "identity",     "amplitude_damping",      "amplitude_damping_rates", "pauli_lambda",
      "pauli_rates",  "equilibrium_relaxation", "gkls"};
  return names;
}

const std::vector<std::string>& task_names() {
  static const std::vector<std::string> names = {"verdict", "rates", "blp", "witness_scan",
                                                 "extend"};
  return names;
}

namespace {

std::string join(const std::vector<std::string>& xs) {
  std::string out;
  for (const auto& x : xs) out += (out.empty() ? "" : ", ") + x;
  return out;
}

// Reads keys from a JSON object and rejects any key that was never asked for.
class Reader {
 public:
  Reader(const Json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + " must be an object");
  }

  const Json* get(const std::string& key) {
    seen_.push_back(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  const Json& require(const std::string& key) {
    const Json* v = get(key);
    if (!v) throw ConfigError(where_ + "." + key + " is required");
    return *v;
  }

  double number(const std::string& key, std::optional<double> fallback = std::nullopt) {
    const Json* v = get(key);
    if (!v) {
      if (!fallback) throw ConfigError(where_ + "." + key + " is required");
      return *fallback;
    }
    if (!v->is_number()) throw ConfigError(where_ + "." + key + " must be a number");
    const double x = v->get<double>();
    if (!std::isfinite(x)) throw ConfigError(where_ + "." + key + " must be finite");
    return x;
  }

  double positive(const std::string& key, std::optional<double> fallback = std::nullopt) {
    const double x = number(key, fallback);
    if (!(x > 0.0)) throw ConfigError(where_ + "." + key + " must be > 0");
    return x;
  }

  std::int64_t integer(const std::string& key, std::int64_t fallback, std::int64_t min) {
    const Json* v = get(key);
    if (!v) return fallback;
    if (!v->is_number_integer()) throw ConfigError(where_ + "." + key + " must be an integer");
    const auto x = v->get<std::int64_t>();
    if (x < min)
      throw ConfigError(where_ + "." + key + " must be >= " + std::to_string(min));
    return x;
  }

  bool boolean(const std::string& key, bool fallback) {
    const Json* v = get(key);
    if (!v) return fallback;
    if (!v->is_boolean()) throw ConfigError(where_ + "." + key + " must be a boolean");
    return v->get<bool>();
  }

  std::string string(const std::string& key, std::optional<std::string> fallback = std::nullopt) {
    const Json* v = get(key);
    if (!v) {
      if (!fallback) throw ConfigError(where_ + "." + key + " is required");
      return *fallback;
    }
    if (!v->is_string()) throw ConfigError(where_ + "." + key + " must be a string");
    return v->get<std::string>();
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (std::find(seen_.begin(), seen_.end(), it.key()) == seen_.end())
        throw ConfigError("unknown key " + where_ + "." + it.key() + " (allowed: " +
                          join(seen_) + ")");
  }

  const std::string& where() const { return where_; }

 private:
  const Json& j_;
  std::string where_;
  std::vector<std::string> seen_;
};

const std::vector<std::string> kSignalTypes = {"exp_decay",   "cosine_clipped", "piecewise_linear",
                                               "inverse_gap", "sinusoidal",     "constant"};

Tolerances parse_tolerances(Reader& r, AnalysisConfig& cfg) {
  Tolerances t;
  t.rank_rtol = r.positive("rank_rtol", t.rank_rtol);
  t.kernel_tol = r.positive("kernel_tol", t.kernel_tol);
  t.image_tol = r.positive("image_tol", t.image_tol);
  t.choi_tol = r.positive("choi_tol", t.choi_tol);
  t.tp_tol = r.positive("tp_tol", t.tp_tol);
  t.bisect_tol = r.positive("bisect_tol", t.bisect_tol);
  t.positivity_samples = static_cast<int>(r.integer("positivity_samples", t.positivity_samples, 1));
  t.positivity_seed = static_cast<std::uint64_t>(r.integer("positivity_seed", 0, 0));
  t.exhaustive_pairs = r.boolean("exhaustive_pairs", false);
  cfg.fd_tol = r.positive("fd_tol", cfg.fd_tol);
  cfg.fd_step = r.positive("fd_step", cfg.fd_step);
  r.finish();
  return t;
}

void parse_family(const Json& j, FamilyConfig& f) {
  Reader r(j, "family");
  f.preset = r.string("preset");
  if (std::find(preset_names().begin(), preset_names().end(), f.preset) == preset_names().end())
    throw ConfigError("unknown preset '" + f.preset + "' (valid presets: " +
                      join(preset_names()) + ")");
  f.dim = static_cast<Eigen::Index>(r.integer("dim", 2, 1));
  const Json* p = r.get("params");
  f.params = p ? *p : Json::object();
  if (!f.params.is_object()) throw ConfigError("family.params must be an object");
  r.finish();
}

void parse_grid(const Json& j, GridConfig& g) {
  Reader r(j, "grid");
  if (const Json* times = r.get("times")) {
    if (!times->is_array()) throw ConfigError("grid.times must be an array of numbers");
    for (const auto& t : *times) {
      if (!t.is_number()) throw ConfigError("grid.times must be an array of numbers");
      g.times.push_back(t.get<double>());
    }
    if (g.times.size() < 3) throw ConfigError("grid.times needs at least 3 points");
    g.t_max = g.times.back();
    if (r.get("t_max") || r.get("n_points"))
      throw ConfigError("grid.times excludes grid.t_max and grid.n_points");
  } else {
    g.t_max = r.positive("t_max");
    g.n_points = static_cast<std::size_t>(r.integer("n_points", 400, 3));
  }
  r.finish();
}

}  // namespace

ScalarSignal parse_signal(const Json& j, const std::string& where) {
  if (j.is_number()) return ScalarSignal::constant(j.get<double>());
  Reader r(j, where);
  const std::string type = r.string("type");
  try {
    ScalarSignal s;
    if (type == "exp_decay") {
      s = ScalarSignal::exp_decay(r.number("rate"));
    } else if (type == "cosine_clipped") {
      s = ScalarSignal::cosine_clipped(r.number("omega"), r.number("t_star"));
    } else if (type == "piecewise_linear") {
      const Json& knots = r.require("knots");
      if (!knots.is_array() || knots.empty())
        throw ConfigError(where + ".knots must be a nonempty array of [t, value] pairs");
      std::vector<std::pair<double, double>> ks;
      for (const auto& k : knots) {
        if (!k.is_array() || k.size() != 2 || !k[0].is_number() || !k[1].is_number())
          throw ConfigError(where + ".knots must be a nonempty array of [t, value] pairs");
        ks.emplace_back(k[0].get<double>(), k[1].get<double>());
      }
      s = ScalarSignal::piecewise_linear(std::move(ks));
    } else if (type == "inverse_gap") {
      s = ScalarSignal::inverse_gap(r.number("t1"));
    } else if (type == "sinusoidal") {
      s = ScalarSignal::sinusoidal(r.number("amplitude"), r.number("omega"), r.number("phase", 0.0),
                                   r.number("offset", 0.0));
    } else if (type == "constant") {
      s = ScalarSignal::constant(r.number("value"));
    } else {
      throw ConfigError("unknown signal type '" + type + "' at " + where +
                        " (valid types: " + join(kSignalTypes) + ")");
    }
    r.finish();
    return s;
  } catch (const ContractViolation& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

AnalysisConfig parse_config(const Json& j) {
  AnalysisConfig cfg;
  Reader r(j, "config");
  parse_family(r.require("family"), cfg.family);
  parse_grid(r.require("grid"), cfg.grid);
  if (const Json* t = r.get("tolerances")) {
    Reader tr(*t, "tolerances");
    cfg.tolerances = parse_tolerances(tr, cfg);
  }
  if (const Json* in = r.get("integration")) {
    Reader ir(*in, "integration");
    cfg.integration.max_substep = ir.positive("max_substep", cfg.integration.max_substep);
    cfg.integration.tol = ir.positive("tol", cfg.integration.tol);
    ir.finish();
  }
  if (const Json* tasks = r.get("tasks")) {
    if (!tasks->is_array() || tasks->empty())
      throw ConfigError("tasks must be a nonempty array (valid tasks: " + join(task_names()) + ")");
    for (const auto& t : *tasks) {
      if (!t.is_string() || std::find(task_names().begin(), task_names().end(),
                                      t.get<std::string>()) == task_names().end())
        throw ConfigError("unknown task " + t.dump() + " (valid tasks: " + join(task_names()) + ")");
      cfg.tasks.insert(t.get<std::string>());
    }
  } else {
    cfg.tasks = {"verdict"};
  }
  if (const Json* w = r.get("witness")) {
    Reader wr(*w, "witness");
    try {
      cfg.witness.ancilla_kind = ancilla_kind_from_string(wr.string("ancilla_kind", "d"));
    } catch (const ContractViolation& e) {
      throw ConfigError(std::string("witness.ancilla_kind: ") + e.what());
    }
    cfg.witness.n_samples = static_cast<int>(wr.integer("n_samples", 64, 1));
    cfg.witness.n_refine = static_cast<int>(wr.integer("n_refine", 16, 0));
    cfg.witness.seed = static_cast<std::uint64_t>(wr.integer("seed", 0, 0));
    wr.finish();
  }
  if (const Json* b = r.get("blp")) {
    Reader br(*b, "blp");
    cfg.blp_rho1 = io::matrix_from_json(br.require("rho1"), "blp.rho1");
    cfg.blp_rho2 = io::matrix_from_json(br.require("rho2"), "blp.rho2");
    br.finish();
  }
  if (const Json* e = r.get("extend")) {
    Reader er(*e, "extend");
    cfg.extend.mode = er.string("mode", "breakpoint");
    if (cfg.extend.mode != "breakpoint" && cfg.extend.mode != "propagator")
      throw ConfigError("extend.mode must be 'breakpoint' or 'propagator'");
    cfg.extend.breakpoint_index = static_cast<std::size_t>(er.integer("breakpoint_index", 0, 0));
    if (er.get("s")) cfg.extend.s = er.number("s");
    if (er.get("t")) cfg.extend.t = er.number("t");
    cfg.extend.require_tp = er.boolean("require_tp", true);
    cfg.extend.max_iter = static_cast<int>(er.integer("max_iter", 5000, 1));
    cfg.extend.use_dykstra = er.boolean("use_dykstra", true);
    if (cfg.extend.mode == "propagator" && (!cfg.extend.s || !cfg.extend.t))
      throw ConfigError("extend.mode 'propagator' needs extend.s and extend.t");
    er.finish();
  }
  if (r.get("output")) cfg.output = r.string("output");
  r.finish();
  return cfg;
}

AnalysisConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("invalid JSON in " + path.string() + ": " + e.what());
  }
  return parse_config(j);
}

TimeGrid build_grid(const AnalysisConfig& cfg) {
  try {
    if (!cfg.grid.times.empty()) return TimeGrid(cfg.grid.times);
    return TimeGrid::uniform(cfg.grid.t_max, cfg.grid.n_points);
  } catch (const ContractViolation& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }
}

namespace {

void require_dim(const FamilyConfig& f, Eigen::Index d) {
  if (f.dim != d)
    throw ConfigError("preset " + f.preset + " needs family.dim = " + std::to_string(d));
}

MapFamily make_family(const AnalysisConfig& cfg) {
  const FamilyConfig& f = cfg.family;
  const double t_max = cfg.grid.t_max;
  Reader p(f.params, "family.params");
  auto signal = [&p](const std::string& key) {
    return parse_signal(p.require(key), "family.params." + key);
  };
  auto optional_signal = [&p](const std::string& key) {
    const Json* v = p.get(key);
    return v ? parse_signal(*v, "family.params." + key) : ScalarSignal::constant(0.0);
  };

  if (f.preset == "identity") {
    p.finish();
    return identity_family(f.dim, t_max);
  }
  if (f.preset == "amplitude_damping") {
    require_dim(f, 2);
    const ScalarSignal g = signal("G");
    p.finish();
    return preset_amplitude_damping(g, t_max);
  }
  if (f.preset == "amplitude_damping_rates") {
    require_dim(f, 2);
    const ScalarSignal rate = signal("rate");
    const ScalarSignal shift = optional_signal("shift");
    p.finish();
    return preset_amplitude_damping_rates(rate, shift, t_max);
  }
  if (f.preset == "pauli_lambda") {
    require_dim(f, 2);
    const ScalarSignal l1 = signal("lambda1"), l2 = signal("lambda2"), l3 = signal("lambda3");
    p.finish();
    return preset_pauli_lambda(l1, l2, l3, t_max);
  }
  if (f.preset == "pauli_rates") {
    require_dim(f, 2);
    const ScalarSignal g1 = signal("gamma1"), g2 = signal("gamma2"), g3 = signal("gamma3");
    p.finish();
    return preset_pauli_rates(g1, g2, g3, t_max);
  }
  if (f.preset == "equilibrium_relaxation") {
    const ScalarSignal fs = signal("F");
    Matrix omega;
    if (const Json* o = p.get("omega")) {
      omega = io::matrix_from_json(*o, "family.params.omega");
      if (p.get("omega_seed")) throw ConfigError("family.params: give omega or omega_seed, not both");
      require_dim(f, omega.rows());
    } else {
      const auto seed = static_cast<std::uint64_t>(p.integer("omega_seed", 0, 0));
      Rng rng = make_rng(seed, 0x0e);
      omega = random_density(f.dim, rng);
    }
    p.finish();
    return preset_equilibrium_relaxation(DensityMatrix(omega), fs, t_max);
  }
  // gkls
  const Matrix h = io::matrix_from_json(p.require("hamiltonian"), "family.params.hamiltonian");
  require_dim(f, h.rows());
  std::vector<JumpTerm> jumps;
  if (const Json* js = p.get("jumps")) {
    if (!js->is_array()) throw ConfigError("family.params.jumps must be an array");
    for (std::size_t k = 0; k < js->size(); ++k) {
      const std::string where = "family.params.jumps[" + std::to_string(k) + "]";
      Reader jr((*js)[k], where);
      JumpTerm jt{io::matrix_from_json(jr.require("op"), where + ".op"),
                  parse_signal(jr.require("rate"), where + ".rate")};
      jr.finish();
      jumps.push_back(std::move(jt));
    }
  }
  p.finish();
  const HermitianMatrix ham(h);
  return integrate_generator(gkls_generator(ham.matrix(), std::move(jumps)), h.rows(),
                             build_grid(cfg), cfg.integration);
}

}  // namespace

MapFamily build_family(const AnalysisConfig& cfg) {
  try {
    return make_family(cfg);
  } catch (const ContractViolation& e) {
    throw ConfigError(std::string("family: ") + e.what());
  }
}

}  // namespace markovlens
