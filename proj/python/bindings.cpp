// Python bindings. Terms cross the boundary as DSL text; structured results
// as plain dicts built from the same JSON the CLI emits.

#include "mathdsl/binding.hpp"
#include "mathdsl/calculus.hpp"
#include "mathdsl/cli.hpp"
#include "mathdsl/lagrange.hpp"
#include "mathdsl/numeric.hpp"
#include "mathdsl/parser.hpp"
#include "mathdsl/serialize.hpp"
#include "mathdsl/types.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace mathdsl;

namespace {

py::object to_py(const Json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

TypeEnv declarations(const std::map<std::string, std::string>& decls) {
  TypeEnv env;
  for (const auto& [name, type] : decls) env.emplace(name, parse_type(type));
  return env;
}

NumericConfig config(std::optional<std::uint64_t> seed, std::optional<double> tol,
                     std::optional<std::vector<double>> eps_grid) {
  NumericConfig cfg;
  if (seed) cfg.seed = *seed;
  if (tol) cfg.tol = *tol;
  if (eps_grid) cfg.eps_grid = *eps_grid;
  cfg.validate();
  return cfg;
}

py::object value_to_py(const Value& v) {
  if (v.is_num()) return py::float_(v.as_num());
  if (v.is_tup()) {
    py::list items;
    for (const auto& item : v.as_tup()) items.append(value_to_py(item));
    return py::tuple(items);
  }
  return py::str(format_value(v));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Typed DSL for mathematical analysis";

  static py::exception<DiagnosticError> error(m, "DiagnosticError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const DiagnosticError& e) {
      py::object exc = py::handle(error.ptr())(e.what());
      exc.attr("diagnostic") = to_py(to_json(e.diagnostic()));
      PyErr_SetObject(error.ptr(), exc.ptr());
    }
  });

  m.def("pretty", [](const std::string& text) { return pretty(parse_term(text)); },
        "Parse an expression or formula and print it canonically.", py::arg("text"));

  m.def("alpha_eq",
        [](const std::string& a, const std::string& b) {
          return alpha_eq(parse_term(a), parse_term(b));
        },
        py::arg("a"), py::arg("b"));

  m.def("free_vars",
        [](const std::string& text, const std::vector<std::string>& ambient) {
          const NameSet names = free_vars(parse_term(text), NameSet(ambient.begin(), ambient.end()));
          return std::vector<std::string>(names.begin(), names.end());
        },
        py::arg("text"), py::arg("ambient") = std::vector<std::string>{});

  m.def("substitute",
        [](const std::string& text, const std::string& name, const std::string& replacement) {
          return pretty(subst(parse_expr(text), name, parse_expr(replacement)));
        },
        "Capture-avoiding substitution.", py::arg("text"), py::arg("name"),
        py::arg("replacement"));

  m.def("infer",
        [](const std::string& text, const std::map<std::string, std::string>& decls,
           bool labels) { return pretty(infer(parse_expr(text), declarations(decls)), labels); },
        py::arg("text"), py::arg("decls") = std::map<std::string, std::string>{},
        py::arg("labels") = false);

  m.def("differentiate",
        [](const std::string& text, std::optional<std::size_t> index) {
          const Expr f = parse_expr(text);
          return pretty(simplify(index ? partial_derivative(*index, f) : differentiate(f)));
        },
        "Symbolic derivative, simplified. With index, the partial derivative in that slot.",
        py::arg("text"), py::arg("index") = py::none());

  m.def("simplify", [](const std::string& text) { return pretty(simplify(parse_expr(text))); },
        py::arg("text"));

  m.def("evaluate", [](const std::string& text) { return value_to_py(eval(parse_expr(text))); },
        "Evaluate a closed expression: float, tuple, or the text of a function.",
        py::arg("text"));

  m.def("expr_equal",
        [](const std::string& a, const std::string& b, std::optional<std::uint64_t> seed) {
          return to_py(to_json(expr_equal(parse_expr(a), parse_expr(b), config(seed, {}, {}))));
        },
        py::arg("a"), py::arg("b"), py::arg("seed") = py::none());

  m.def("check_limit",
        [](const std::string& f, double at, double value, const std::string& dom,
           std::optional<std::uint64_t> seed, std::optional<double> tol,
           std::optional<std::vector<double>> eps_grid) {
          const auto v = check_limit(parse_expr(f), at, value, DomainSet::parse(dom),
                                     config(seed, tol, eps_grid));
          return to_py(to_json(v));
        },
        "Sampled epsilon-delta check of `f has limit value at at`.", py::arg("f"), py::arg("at"),
        py::arg("value"), py::arg("dom") = "R", py::arg("seed") = py::none(),
        py::arg("tol") = py::none(), py::arg("eps_grid") = py::none());

  m.def("numeric_limit",
        [](const std::string& f, double at, const std::string& dom) {
          return numeric_limit(parse_expr(f), at, DomainSet::parse(dom), NumericConfig{});
        },
        py::arg("f"), py::arg("at"), py::arg("dom") = "R");

  m.def("elaborate_traditional",
        [](const std::string& text, const std::map<std::string, std::string>& decls,
           const std::string& state, bool repair) {
          const auto el = elaborate_traditional(text, declarations(decls),
                                                StateSignature::parse(state), repair);
          py::list diags;
          for (const auto& d : el.diagnostics) diags.append(to_py(to_json(d)));
          py::dict out;
          out["formula"] = pretty(el.formula);
          out["diagnostics"] = diags;
          return out;
        },
        py::arg("text"), py::arg("decls"), py::arg("state") = "t,q,qdot",
        py::arg("repair") = false);

  m.def("diagnose_implicit_binders",
        [](const std::string& text, const std::vector<std::string>& ambient) {
          const auto r = diagnose_implicit_binders(parse_formula(text),
                                                   NameSet(ambient.begin(), ambient.end()));
          py::list suggestions, errors;
          for (const auto& d : r.suggestions) suggestions.append(to_py(to_json(d)));
          for (const auto& d : r.errors) errors.append(to_py(to_json(d)));
          py::dict out;
          out["suggestions"] = suggestions;
          out["errors"] = errors;
          out["repaired"] = r.repaired ? py::object(py::str(pretty(*r.repaired))) : py::none();
          return out;
        },
        py::arg("text"), py::arg("ambient") = std::vector<std::string>{});

  m.def("check_path",
        [](const std::string& lagrangian, const std::string& path, double t0, double t1,
           std::size_t grid, double threshold, bool fd) {
          LagrangianSystem sys{parse_expr(lagrangian), parse_expr(path), t0, t1, grid};
          PathCheckOptions opts;
          opts.threshold = threshold;
          opts.finite_difference = fd;
          return to_py(to_json(check_path(sys, opts)));
        },
        "Euler-Lagrange residual of a one-coordinate path on a time grid.",
        py::arg("lagrangian"), py::arg("path"), py::arg("t0") = 0.0, py::arg("t1") = 1.0,
        py::arg("grid") = 201, py::arg("threshold") = 1e-6, py::arg("fd") = false);

  m.def("run_cli",
        [](const std::vector<std::string>& args) {
          std::vector<std::string> argv{"mathdsl"};
          argv.insert(argv.end(), args.begin(), args.end());
          std::ostringstream out, err;
          const int code = run_cli(argv, out, err);
          return py::make_tuple(code, out.str(), err.str());
        },
        "Run the command-line front end; returns (exit_code, stdout, stderr).", py::arg("args"));
}
