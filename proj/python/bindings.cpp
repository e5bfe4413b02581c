#include "spdesens/cli.hpp"
#include "spdesens/config.hpp"
#include "spdesens/exponent_plan.hpp"
#include "spdesens/faadibruno.hpp"
#include "spdesens/gamma.hpp"
#include "spdesens/solver.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace spdesens;

namespace {

Problem problem_from(const std::string& config_path, std::optional<std::uint64_t> seed) {
  RunConfig cfg = load_config(config_path);
  if (seed) cfg.problem.seed = *seed;
  return cfg.problem;
}

/// Grid times, values (steps+1 x d) and the blowup flag of one path.
py::dict path_dict(const PathSample& p) {
  Eigen::MatrixXd values(static_cast<Eigen::Index>(p.size()), static_cast<Eigen::Index>(p.dim()));
  for (std::size_t i = 0; i < p.size(); ++i) values.row(static_cast<Eigen::Index>(i)) = p.value(i).transpose();
  py::dict d;
  d["t"] = p.times();
  d["u"] = values;
  d["blown_up"] = p.blown_up();
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Spectral jump-diffusion simulator with pathwise sensitivities";
  m.attr("__version__") = SPDESENS_VERSION;

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<PlanViolation>(m, "PlanViolation", PyExc_ValueError);

  m.def("set_partitions", [](int n) {
    std::vector<std::vector<std::vector<int>>> out;
    for (const auto& p : set_partitions(n)) {
      auto& blocks = out.emplace_back();
      for (const auto& b : p.blocks) {
        auto& block = blocks.emplace_back();
        for (int k : b) block.push_back(k + 1);
      }
    }
    return out;
  }, py::arg("n"), "Set partitions of {1..n} as lists of blocks.");
  m.def("bell_number", &bell_number, py::arg("n"));
  m.def("term_count", &term_count, py::arg("n"));
  m.def("gamma", &gamma_eval, py::arg("r"), py::arg("order") = 0,
        "gamma(r) = int_0^r sin(s^2) ds or its derivative of the given order.");
  m.def("semigroup_apply", [](const std::vector<double>& eigenvalues, double t, const StateVector& x) {
    return StateVector(semigroup_apply(SpectralOperator(eigenvalues), t, x));
  }, py::arg("eigenvalues"), py::arg("t"), py::arg("x"));

  m.def("simulate", [](const std::string& config, std::uint64_t path, std::optional<std::uint64_t> seed) {
    const Problem pr = problem_from(config, seed);
    return path_dict(solve_mild(pr.op, pr.coefficients, pr.u0, pr.noise(path)));
  }, py::arg("config"), py::arg("path") = 0, py::arg("seed") = py::none(),
     "Simulate one path of the configured problem.");

  m.def("solve_system", [](const std::string& config, const std::vector<StateVector>& directions,
                           std::uint64_t path, std::optional<std::uint64_t> seed) {
    const Problem pr = problem_from(config, seed);
    const SensitivitySystem sys = solve_system(pr.op, pr.coefficients, pr.u0, directions, pr.noise(path));
    py::dict out;
    out["base"] = path_dict(sys.base);
    for (SubsetMask s = 1; s <= sys.full_mask(); ++s) out[py::str(mask_to_string(s))] = path_dict(sys.path(s));
    return out;
  }, py::arg("config"), py::arg("directions"), py::arg("path") = 0, py::arg("seed") = py::none(),
     "Base path and one sensitivity path per nonempty subset of the directions.");

  m.def("exponent_plan_check", [](int n, const std::string& mm, const std::string& p, const std::string& q,
                                  std::optional<std::vector<std::string>> budget) {
    std::optional<std::vector<Exponent>> b;
    if (budget) {
      b.emplace();
      for (const auto& s : *budget) b->push_back(parse_exponent(s));
    }
    const PlanReport r = exponent_plan_check(n, parse_rational(mm), parse_rational(p), parse_rational(q), b);
    py::list constraints;
    for (const auto& c : r.constraints) {
      py::dict d;
      d["name"] = c.name;
      d["inequality"] = c.inequality;
      d["lhs"] = c.lhs_infinite ? std::string("inf") : to_string(c.lhs);
      d["rhs"] = to_string(c.rhs);
      d["holds"] = c.holds;
      constraints.append(d);
    }
    py::dict out;
    out["pass"] = r.pass;
    out["binding"] = r.binding;
    out["constraints"] = constraints;
    return out;
  }, py::arg("n"), py::arg("m"), py::arg("p"), py::arg("q"), py::arg("budget") = py::none(),
     "Exact check of the exponent constraints; numbers are given as decimal or a/b strings.");

  m.def("run", [](const std::vector<std::string>& args) {
    std::ostringstream out;
    std::ostringstream err;
    int code = 0;
    {
      py::gil_scoped_release release;
      code = run(args, out, err);
    }
    return py::make_tuple(code, out.str(), err.str());
  }, py::arg("args"), "Run a command-line invocation; returns (exit code, stdout, stderr).");
}
