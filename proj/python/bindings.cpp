#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "robust_t/cli.hpp"
#include "robust_t/coset_spectra.hpp"
#include "robust_t/criterion.hpp"
#include "robust_t/error.hpp"
#include "robust_t/expander_forge.hpp"
#include "robust_t/finite_group.hpp"
#include "robust_t/json_io.hpp"
#include "robust_t/projection_lab.hpp"

namespace py = pybind11;
using namespace robust_t;

namespace {

// Reports cross the boundary as JSON text; the Python side decodes them.
std::string dumps(const nlohmann::json& j) { return dump_json(j, -1); }

GroupPtr group_by_kind(const std::string& kind, std::uint32_t q, std::size_t n) {
  if (kind == "heisenberg") return build_heisenberg(q);
  if (kind == "product") return build_elementary_abelian_pair(q);
  if (kind == "sym") return build_symmetric(n);
  if (kind == "dihedral") return build_dihedral(n);
  throw Error("python.group", "unknown group kind", {{"kind", kind}});
}

NormedSpace space_for(std::size_t dim, double p) { return NormedSpace::lp(dim, p); }

// Python exception classes, owned by the module for the interpreter lifetime.
PyObject* error_type = nullptr;
PyObject* hypothesis_type = nullptr;

void raise(PyObject* type, const Error& e) {
  py::object cls = py::reinterpret_borrow<py::object>(type);
  py::object exc = cls(e.what());
  exc.attr("code") = e.code();
  exc.attr("context") = e.context();
  PyErr_SetObject(type, exc.ptr());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of robust_t";

  error_type = py::exception<Error>(m, "Error", PyExc_RuntimeError).ptr();
  hypothesis_type = py::exception<HypothesisError>(m, "HypothesisError", error_type).ptr();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const HypothesisError& e) {
      raise(hypothesis_type, e);
    } catch (const Error& e) {
      raise(error_type, e);
    }
  });

  m.def("group_json", [](const std::string& kind, std::uint32_t q, std::size_t n) {
    const GroupPtr g = group_by_kind(kind, q, n);
    nlohmann::json j = g->to_json();
    j["group_id"] = g->fingerprint();
    return dumps(j);
  }, py::arg("kind"), py::arg("q") = 3, py::arg("n") = 3);

  m.def("angle_report_json", [](const std::string& kind, std::uint32_t q, std::size_t n,
                                const std::vector<std::string>& k1, const std::vector<std::string>& k2,
                                const std::vector<double>& r) {
    const GroupPtr g = group_by_kind(kind, q, n);
    const SubgroupPair pair = generated_pair(g, k1, k2);
    return dumps(angle_report(pair.k1, pair.k2, r).to_json());
  }, py::arg("kind"), py::arg("q"), py::arg("n"), py::arg("k1"), py::arg("k2"), py::arg("r"));

  m.def("threshold", &threshold, py::arg("n"));
  m.def("s_constants", [](double eps, std::size_t n) {
    const SConstants s = s_constants(eps, n);
    return py::make_tuple(s.s1, s.s2, s.s0);
  }, py::arg("epsilon"), py::arg("n"));
  m.def("class_params", [](double c, double c_prime) {
    const ClassParams p = class_params(c, c_prime);
    return py::make_tuple(p.delta, p.theta);
  }, py::arg("c"), py::arg("c_prime"));
  m.def("schatten_M", &schatten_M, py::arg("p1"), py::arg("p2"), py::arg("r"));

  m.def("criterion_steinberg_json", [](std::size_t n, std::size_t mm, std::uint64_t q, std::optional<double> eps,
                                       std::optional<double> c_prime) {
    EvaluateOptions opt;
    opt.epsilon = eps;
    opt.c_prime = c_prime;
    return dumps(evaluate(steinberg_scheme(n, mm, q), opt).to_json());
  }, py::arg("n"), py::arg("m"), py::arg("q"), py::arg("epsilon") = py::none(), py::arg("c_prime") = py::none());

  m.def("criterion_scheme_json", [](const std::string& scheme, std::optional<double> eps,
                                    std::optional<double> c_prime) {
    EvaluateOptions opt;
    opt.epsilon = eps;
    opt.c_prime = c_prime;
    return dumps(evaluate(GeneratorScheme::from_json(nlohmann::json::parse(scheme)), opt).to_json());
  }, py::arg("scheme"), py::arg("epsilon") = py::none(), py::arg("c_prime") = py::none());

  m.def("op_norm", [](const Eigen::MatrixXd& a, double p, std::uint64_t seed) {
    const NormInterval iv = op_norm(a, space_for(static_cast<std::size_t>(a.rows()), p), seed);
    return py::make_tuple(iv.lower, iv.upper);
  }, py::arg("a"), py::arg("p") = 2.0, py::arg("seed") = 0);

  m.def("cos_angle", [](const Eigen::MatrixXd& p1, const Eigen::MatrixXd& p2, const Eigen::MatrixXd& p12, double p) {
    return cos_angle(p1, p2, p12, space_for(static_cast<std::size_t>(p1.rows()), p));
  }, py::arg("p1"), py::arg("p2"), py::arg("p12"), py::arg("p") = 2.0);

  m.def("iterate_json", [](const std::string& family, std::size_t check_n, std::uint64_t seed) {
    const ProjectionFamily fam = ProjectionFamily::from_json(nlohmann::json::parse(family), seed);
    IterateOptions opt;
    opt.check_n = check_n;
    opt.seed = seed;
    return dumps(iterate_averaged(fam, opt).to_json());
  }, py::arg("family"), py::arg("check_n") = 60, py::arg("seed") = 0);

  m.def("expander_json", [](std::size_t n, std::uint32_t q, std::size_t k, const std::vector<double>& p_values,
                            std::uint64_t seed, std::size_t restarts) {
    py::gil_scoped_release release;
    const ElementaryQuotient quotient = build_quotient(n, q, k);
    const SpectralGapResult gap = spectral_gap(quotient.graph, {seed});
    PoincareOptions opt;
    opt.p_values = p_values;
    opt.seed = seed;
    opt.restarts = restarts;
    return dumps(poincare_constants(quotient.graph, opt, &gap).to_json());
  }, py::arg("n"), py::arg("q"), py::arg("k"), py::arg("p_values") = std::vector<double>{},
     py::arg("seed") = 0, py::arg("restarts") = 32);

  m.def("run_cli", [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return py::make_tuple(code, out.str(), err.str());
  }, py::arg("args"));
}
