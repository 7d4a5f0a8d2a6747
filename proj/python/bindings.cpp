#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "markovlens/analysis.hpp"
#include "markovlens/config.hpp"
#include "markovlens/cp_extension.hpp"
#include "markovlens/divisibility.hpp"
#include "markovlens/error.hpp"
#include "markovlens/witnesses.hpp"

namespace py = pybind11;
using namespace markovlens;

namespace {

TimeGrid grid_from(const std::vector<double>& times) { return TimeGrid(times); }

py::dict profile_dict(const RankProfile& p) {
  py::dict d;
  d["times"] = p.times;
  d["ranks"] = p.ranks;
  d["singular_values"] = p.singular_values;
  d["threshold"] = p.threshold;
  d["breakpoints"] = p.breakpoints;
  return d;
}

std::string verdict_json(const MapFamily& family, const std::vector<double>& times,
                         const Tolerances& tol) {
  AnalysisConfig cfg;
  cfg.family.preset = family.kind();
  cfg.family.dim = family.dim();
  cfg.tolerances = tol;
  return verdict_to_json(cp_divisibility_verdict(family, grid_from(times), tol), cfg).dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Divisibility, backflow witnesses and CP extension for quantum dynamical maps";

  // Translators run newest first, so ConfigError wins over its base class.
  py::register_exception<Error>(m, "MarkovlensError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<ScalarSignal>(m, "ScalarSignal")
      .def_static("exp_decay", &ScalarSignal::exp_decay, py::arg("rate"))
      .def_static("cosine_clipped", &ScalarSignal::cosine_clipped, py::arg("omega"), py::arg("t_star"))
      .def_static("piecewise_linear", &ScalarSignal::piecewise_linear, py::arg("knots"))
      .def_static("inverse_gap", &ScalarSignal::inverse_gap, py::arg("t1"))
      .def_static("sinusoidal", &ScalarSignal::sinusoidal, py::arg("amplitude"), py::arg("omega"),
                  py::arg("phase") = 0.0, py::arg("offset") = 0.0)
      .def_static("constant", &ScalarSignal::constant, py::arg("value"))
      .def("__call__", &ScalarSignal::value)
      .def("integral", &ScalarSignal::integral)
      .def_property_readonly("tag", &ScalarSignal::tag);

  py::class_<MapFamily>(m, "MapFamily")
      .def_property_readonly("dim", &MapFamily::dim)
      .def_property_readonly("t_max", &MapFamily::t_max)
      .def_property_readonly("kind", &MapFamily::kind)
      .def(
          "natural", [](const MapFamily& f, double t) { return f(t).natural(); }, py::arg("t"),
          "Natural (column-stacking) matrix of the map at time t.")
      .def(
          "choi", [](const MapFamily& f, double t) { return to_choi(f(t)).matrix(); }, py::arg("t"))
      .def(
          "apply", [](const MapFamily& f, double t, const Matrix& x) { return f(t).apply(x); },
          py::arg("t"), py::arg("x"));

  m.def("amplitude_damping", &preset_amplitude_damping, py::arg("G"), py::arg("t_max"));
  m.def("amplitude_damping_rates", &preset_amplitude_damping_rates, py::arg("rate"),
        py::arg("shift") = ScalarSignal::constant(0.0), py::arg("t_max"));
  m.def("pauli_lambda", &preset_pauli_lambda, py::arg("lambda1"), py::arg("lambda2"),
        py::arg("lambda3"), py::arg("t_max"));
  m.def("pauli_rates", &preset_pauli_rates, py::arg("gamma1"), py::arg("gamma2"), py::arg("gamma3"),
        py::arg("t_max"));
  m.def(
      "equilibrium_relaxation",
      [](const Matrix& omega, const ScalarSignal& f, double t_max) {
        return preset_equilibrium_relaxation(DensityMatrix(omega), f, t_max);
      },
      py::arg("omega"), py::arg("F"), py::arg("t_max"));
  m.def(
      "family_from_config",
      [](const std::string& json) {
        const AnalysisConfig cfg = parse_config(io::Json::parse(json));
        return build_family(cfg);
      },
      py::arg("config_json"));

  m.def(
      "trace_norm", [](const Matrix& h) { return trace_norm(HermitianMatrix(h)); }, py::arg("h"));
  m.def(
      "to_choi", [](const Matrix& natural) {
        const auto d = static_cast<Eigen::Index>(std::lround(std::sqrt(natural.rows())));
        return to_choi(Superoperator(d, natural)).matrix();
      },
      py::arg("natural"));
  m.def(
      "from_choi", [](const Matrix& c) {
        const auto d = static_cast<Eigen::Index>(std::lround(std::sqrt(c.rows())));
        return from_choi(ChoiMatrix(d, c)).natural();
      },
      py::arg("choi"));

  py::class_<Tolerances>(m, "Tolerances")
      .def(py::init<>())
      .def_readwrite("rank_rtol", &Tolerances::rank_rtol)
      .def_readwrite("kernel_tol", &Tolerances::kernel_tol)
      .def_readwrite("image_tol", &Tolerances::image_tol)
      .def_readwrite("choi_tol", &Tolerances::choi_tol)
      .def_readwrite("tp_tol", &Tolerances::tp_tol)
      .def_readwrite("bisect_tol", &Tolerances::bisect_tol)
      .def_readwrite("positivity_samples", &Tolerances::positivity_samples)
      .def_readwrite("positivity_seed", &Tolerances::positivity_seed);

  m.def(
      "rank_profile",
      [](const MapFamily& f, const std::vector<double>& times, double rtol, double bisect_tol) {
        return profile_dict(rank_profile(f, grid_from(times), rtol, bisect_tol));
      },
      py::arg("family"), py::arg("times"), py::arg("rtol") = kRankTol, py::arg("bisect_tol") = 1e-6);

  m.def("_verdict_json", &verdict_json, py::arg("family"), py::arg("times"),
        py::arg("tolerances") = Tolerances{});

  m.def(
      "limit_projector",
      [](const MapFamily& f, double t_star, double t_prev) {
        const LimitProjector lp = limit_projector(f, t_star, {}, t_prev);
        py::dict d;
        d["natural"] = lp.projector.natural();
        d["t_star"] = lp.t_star;
        d["steps"] = lp.steps;
        d["final_eps"] = lp.final_eps;
        d["cauchy_residual"] = lp.cauchy_residual;
        d["idempotence_residual"] = lp.idempotence_residual;
        d["tp_on_domain_residual"] = lp.tp_on_domain_residual;
        d["choi_min"] = lp.choi_min;
        return d;
      },
      py::arg("family"), py::arg("t_star"), py::arg("t_prev") = 0.0);

  m.def(
      "_witness_scan_json",
      [](const MapFamily& f, const std::vector<double>& times, const std::string& kind,
         int n_samples, int n_refine, std::uint64_t seed, int threads) {
        ScanOptions o;
        o.ancilla_kind = ancilla_kind_from_string(kind);
        o.n_samples = n_samples;
        o.n_refine = n_refine;
        o.seed = seed;
        o.threads = threads;
        py::gil_scoped_release release;
        const WitnessRecord r = witness_scan(f, grid_from(times), o);
        return witness_to_json(r, 1e-6).dump();
      },
      py::arg("family"), py::arg("times"), py::arg("ancilla_kind") = "d", py::arg("n_samples") = 64,
      py::arg("n_refine") = 16, py::arg("seed") = 0, py::arg("threads") = 1);

  m.def(
      "extend_cp",
      [](const std::vector<Matrix>& domain, const std::vector<Matrix>& images, bool require_tp,
         int max_iter, bool use_dykstra) {
        if (domain.empty()) throw ContractViolation("cp_extension", "empty domain");
        // Orthonormalize the domain and carry the images along linearly.
        const Eigen::Index d = domain.front().rows();
        Matrix cols(d * d, static_cast<Eigen::Index>(domain.size()));
        Matrix imgs(d * d, static_cast<Eigen::Index>(images.size()));
        if (images.size() != domain.size())
          throw ContractViolation("cp_extension", "domain and images differ in length");
        for (std::size_t a = 0; a < domain.size(); ++a) {
          cols.col(static_cast<Eigen::Index>(a)) = vec(domain[a]);
          imgs.col(static_cast<Eigen::Index>(a)) = vec(images[a]);
        }
        const SubspaceBasis basis = gram_schmidt_hermitian(domain);
        const Matrix coeff = cols.completeOrthogonalDecomposition().solve(basis.vec_columns());
        const Matrix mapped = imgs * coeff;
        SubspaceMapSpec spec{basis, {}, require_tp};
        for (std::size_t a = 0; a < basis.size(); ++a)
          spec.images.push_back(unvec(mapped.col(static_cast<Eigen::Index>(a)), d));
        ExtendOptions o;
        o.max_iter = max_iter;
        o.use_dykstra = use_dykstra;
        const FeasibilityResult r = extend_cp(spec, o);
        const ExtensionReport v = verify_extension(*r.choi, spec, 1e-7);
        py::dict out;
        out["status"] = to_string(r.status);
        out["choi"] = r.choi->matrix();
        out["iterations"] = r.iterations;
        out["action_residual"] = r.action_residual;
        out["tp_residual"] = r.tp_residual;
        out["psd_slack"] = r.psd_slack;
        out["verified"] = v.passes;
        return out;
      },
      py::arg("domain"), py::arg("images"), py::arg("require_tp") = true, py::arg("max_iter") = 5000,
      py::arg("use_dykstra") = true);

  m.def(
      "_analyze",
      [](const std::string& json, int threads) {
        return run_tasks(parse_config(io::Json::parse(json)), threads);
      },
      py::arg("config_json"), py::arg("threads") = 1);
  m.def("report", &render_report, py::arg("directory"));
}
