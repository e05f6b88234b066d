// SPDX-License-Identifier: Apache-2.0
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>

#include "mkhbm/concentration.hpp"
#include "mkhbm/error.hpp"
#include "mkhbm/experiments.hpp"
#include "mkhbm/momentum_theory.hpp"
#include "mkhbm/problems.hpp"
#include "mkhbm/solvers.hpp"

namespace py = pybind11;
using namespace mkhbm;

namespace {

// Structured results cross the boundary as JSON text; the package decodes them.
std::string dump(const nlohmann::json& j) { return j.dump(); }

ProblemInstance generate(const std::string& kind, std::size_t n, std::size_t d, double kappa, double rho,
                         double noise_radius, std::uint64_t seed) {
  ProblemSpec s;
  s.kind = parse_problem_kind(kind);
  s.n = n;
  s.d = d;
  s.kappa = kappa;
  s.rho = rho;
  s.noise_radius = noise_radius;
  s.seed = seed;
  return generate_problem(s);
}

MomentumParams params_for(const std::string& rule, const SpectrumSummary& s, double gamma, double alpha,
                          double beta) {
  if (rule == "perturbed") return hbm_params_perturbed(s.lambda_max, s.lambda_min, gamma);
  if (rule == "optimal") return hbm_params_optimal(s.lambda_max, s.lambda_min);
  if (rule == "nag") return nag_params(s.lambda_max, s.lambda_min, gamma);
  if (rule == "manual") return manual_params(Method::HBM, alpha, beta);
  fail(ErrorKind::Parameter, "unknown parameter rule '" + rule + "'");
}

}  // namespace

PYBIND11_MODULE(_mkhbm, m) {
  m.doc() = "Minibatch heavy-ball momentum for least squares";

  static py::exception<Error> error(m, "Error", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, (std::string(to_string(e.kind())) + ": " + e.what()).c_str());
    }
  });

  py::class_<MomentumParams>(m, "MomentumParams")
      .def_readonly("alpha", &MomentumParams::alpha)
      .def_readonly("beta", &MomentumParams::beta)
      .def_readonly("gamma", &MomentumParams::gamma)
      .def_readonly("L", &MomentumParams::L)
      .def_readonly("ell", &MomentumParams::ell)
      .def_property_readonly("method", [](const MomentumParams& p) { return std::string(to_string(p.method)); })
      .def("to_json", [](const MomentumParams& p) { return dump(to_json(p)); });

  py::class_<ProblemInstance>(m, "Problem")
      .def_property_readonly("n", &ProblemInstance::rows)
      .def_property_readonly("d", &ProblemInstance::cols)
      .def_readonly("b", &ProblemInstance::b)
      .def_readonly("x_star", &ProblemInstance::x_star)
      .def_readonly("consistent", &ProblemInstance::consistent)
      .def_readonly("sigma", &ProblemInstance::sigma)
      .def("gram", [](const ProblemInstance& p) { return p.a.gram(); })
      .def("spectrum_json", [](const ProblemInstance& p) { return dump(to_json(p.spectrum)); })
      .def("save", [](const ProblemInstance& p, const std::string& dir) { save_problem(p, dir); });

  m.def("generate", &generate, py::arg("kind"), py::arg("n"), py::arg("d"), py::arg("kappa") = 30.0,
        py::arg("rho") = 0.8, py::arg("noise_radius") = 0.0, py::arg("seed") = 1);
  m.def("load", [](const std::string& dir) { return load_problem(dir); });
  m.def("spectrum_exponential", &spectrum_exponential);
  m.def("spectrum_algebraic", &spectrum_algebraic);

  m.def(
      "params",
      [](const ProblemInstance& p, const std::string& rule, double gamma, double alpha, double beta) {
        const double g = gamma > 0.0 ? gamma : 1e-3 * p.spectrum.lambda_min;
        return params_for(rule, p.spectrum, g, alpha, beta);
      },
      py::arg("problem"), py::arg("rule") = "perturbed", py::arg("gamma") = 0.0, py::arg("alpha") = 0.0,
      py::arg("beta") = 0.0);
  m.def("block_modulus", [](double lambda, const MomentumParams& p) { return block_eig(lambda, p).modulus(); });
  m.def("critical_batch", [](const ProblemInstance& p, const MomentumParams& prm) {
    return critical_batch_heuristic(p.spectrum.frob_sq, p.spectrum.op_sq, p.cols(), prm).batch;
  });
  m.def(
      "theory_report",
      [](const ProblemInstance& p, const MomentumParams& prm, const std::string& sampling, double k_star) {
        return dump(to_json(theory_report(p, prm, parse_sampling_scheme(sampling), k_star)));
      },
      py::arg("problem"), py::arg("params"), py::arg("sampling") = "rownorm", py::arg("k_star") = 0.0);

  m.def(
      "run",
      [](const ProblemInstance& p, const MomentumParams& prm, const std::string& method, std::size_t batch,
         std::size_t iters, std::uint64_t seed, const std::string& sampling) {
        SolverConfig c;
        c.method = parse_solver_method(method);
        c.params = prm;
        c.batch_size = batch;
        c.max_iters = iters;
        c.seed = seed;
        c.sampling = parse_sampling_scheme(sampling);
        RunTrace t;
        {
          py::gil_scoped_release release;
          t = run_solver(p, c);
        }
        return py::make_tuple(t.err_norms, t.status == RunStatus::Diverged);
      },
      py::arg("problem"), py::arg("params"), py::arg("method") = "mbhbm", py::arg("batch") = 1,
      py::arg("iters") = 300, py::arg("seed") = 0, py::arg("sampling") = "rownorm");

  m.def("preset_names", &preset_names);
  m.def(
      "run_preset",
      [](const std::string& name, std::size_t trials, std::size_t iters, std::uint64_t seed, std::size_t jobs) {
        PresetOptions o;
        o.trials = trials;
        o.iters = iters;
        o.seed = seed;
        o.jobs = jobs;
        const ExperimentConfig cfg = make_preset(name, o);
        py::gil_scoped_release release;
        return dump(report_json(run_experiment(cfg)));
      },
      py::arg("name"), py::arg("trials") = 10, py::arg("iters") = 300, py::arg("seed") = 0, py::arg("jobs") = 1);
}
