// Copyright 2026 The steinzo Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Python bindings: experiment runs, paired comparisons, a minimize() entry
// point over Python noisy losses, and the benchmark problems.

#include <map>
#include <string>
#include <utility>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "steinzo/analysis.hpp"
#include "steinzo/experiment.hpp"
#include "steinzo/pdmap.hpp"
#include "steinzo/problems.hpp"
#include "steinzo/solvers.hpp"

namespace py = pybind11;
using namespace steinzo;

namespace {

ExperimentConfig config_from(const std::map<std::string, std::string>& settings) {
  ExperimentConfig c;
  for (const auto& [k, v] : settings) apply_setting(c, k, v);
  return c;
}

py::dict curve_dict(const AggregateCurve& c) {
  py::dict d;
  d["k"] = c.x;
  d["mean"] = c.mean;
  d["std_error"] = c.std_error;
  d["n_replicates"] = c.n_replicates;
  return d;
}

py::dict run_py(const std::map<std::string, std::string>& settings, unsigned jobs, bool write_files) {
  const ExperimentConfig config = config_from(settings);
  ExperimentResult r;
  {
    py::gil_scoped_release release;
    r = run_experiment(config, jobs, write_files);
  }
  py::dict out;
  out["loss"] = curve_dict(r.loss_curve);
  out["normalized"] = curve_dict(r.normalized_curve);
  out["queries"] = r.queries;
  out["f_opt"] = r.f_opt;
  out["n_ok"] = r.n_ok();
  std::vector<double> finals;
  std::vector<bool> diverged;
  for (const auto& rep : r.replicates) {
    finals.push_back(rep.final_normalized());
    diverged.push_back(rep.diverged);
  }
  out["final_normalized"] = finals;
  out["diverged"] = diverged;
  return out;
}

py::dict compare_py(const std::map<std::string, std::string>& a, const std::map<std::string, std::string>& b,
                    unsigned jobs) {
  const ExperimentConfig ca = config_from(a), cb = config_from(b);
  ComparisonTable t;
  {
    py::gil_scoped_release release;
    t = compare_solvers(ca, cb, jobs, false);
  }
  py::dict out;
  out["solver_a"] = t.solver_a;
  out["solver_b"] = t.solver_b;
  std::vector<double> fa, fb;
  for (const auto& row : t.rows) {
    fa.push_back(row.final_a);
    fb.push_back(row.final_b);
  }
  out["final_a"] = fa;
  out["final_b"] = fb;
  out["mean_difference"] = t.mean_difference;
  out["wins_a"] = t.wins_a;
  out["wins_b"] = t.wins_b;
  out["ties"] = t.ties;
  out["win_rate_a"] = t.win_rate_a;
  return out;
}

PdMapKind pd_map_from(const std::string& kind, double floor, bool relative, double eps0, double decay) {
  if (kind == "eigen_clamp") return EigenClamp{floor, relative};
  if (kind == "damp_shift") return DampShift{floor};
  if (kind == "sqrt") return SqrtMap{eps0, decay};
  throw InvalidInput("unknown pd map '" + kind + "' (eigen_clamp, damp_shift, sqrt)");
}

SolverKind solver_from(const std::string& name) {
  for (auto k : {SolverKind::kFirstOrder, SolverKind::kStein2, SolverKind::kTwoSpsa}) {
    if (name == solver_name(k)) return k;
  }
  throw InvalidInput("unknown solver '" + name + "' (first_order, stein2, 2spsa)");
}

// The loss is a Python callable f(theta, rng) -> float, where rng() returns a
// standard normal draw from the oracle's noise stream. Runs hold the GIL.
py::dict minimize_py(const py::function& fun, const Vector& theta0, const std::string& solver, double a,
                     double stability, double alpha, double c, double gamma, const std::string& pd_map,
                     double delta_floor, bool relative, std::uint64_t queries_per_iter,
                     std::uint64_t iterations, std::uint64_t seed) {
  SolverConfig cfg;
  cfg.schedule = GainSchedule(a, stability, alpha, c, gamma);
  cfg.pd_map = pd_map_from(pd_map, delta_floor, relative, 1.0, 1.0);
  cfg.queries_per_iter = queries_per_iter;
  cfg.max_iterations = iterations;
  NoisyOracle oracle(
      static_cast<std::size_t>(theta0.size()),
      [&fun](const Vector& theta, RandomStream& noise) {
        py::cpp_function draw([&noise]() { return noise.normal(); });
        return fun(theta, draw).cast<double>();
      },
      RandomStream(seed, 0));
  RandomStream perturb(seed, 1);
  const RunTrace t = run_solver(solver_from(solver), oracle, cfg, theta0, perturb);
  std::vector<Vector> thetas;
  for (const auto& r : t.records) thetas.push_back(r.theta);
  py::dict out;
  out["theta"] = t.records.back().theta;
  out["path"] = thetas;
  out["queries"] = oracle.query_count();
  if (t.final_hbar.size() > 0) out["hbar"] = t.final_hbar;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Zeroth-order Stein second-order stochastic optimization";

  static py::exception<DivergenceError> divergence(m, "DivergenceError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const DivergenceError& e) {
      py::set_error(divergence, e.what());
    } catch (const ParseError& e) {
      py::set_error(PyExc_ValueError, e.what());
    } catch (const InvalidInput& e) {
      py::set_error(PyExc_ValueError, e.what());
    } catch (const Error& e) {
      py::set_error(PyExc_RuntimeError, e.what());
    }
  });

  m.def("run", &run_py, py::arg("settings"), py::arg("jobs") = 1, py::arg("write_files") = false,
        "Run a replicated experiment from key=value settings.");
  m.def("compare", &compare_py, py::arg("settings_a"), py::arg("settings_b"), py::arg("jobs") = 1,
        "Paired comparison of two experiment settings.");
  m.def("minimize", &minimize_py, py::arg("fun"), py::arg("theta0"), py::arg("solver") = "stein2",
        py::arg("a") = 1.0, py::arg("A") = 0.0, py::arg("alpha") = 0.602, py::arg("c") = 1.0,
        py::arg("gamma") = 0.101, py::arg("pd_map") = "eigen_clamp", py::arg("delta_floor") = 0.2,
        py::arg("relative") = false, py::arg("queries_per_iter") = 12, py::arg("iterations") = 1000,
        py::arg("seed") = 1, "Minimize fun(theta, rng) from noisy evaluations only.");

  m.def(
      "apply_pd_map",
      [](const Matrix& h, const std::string& kind, double floor, bool relative, double eps0, double decay,
         std::uint64_t k) { return apply_pd_map(pd_map_from(kind, floor, relative, eps0, decay), h, k); },
      py::arg("h"), py::arg("kind") = "eigen_clamp", py::arg("delta_floor") = 1e-8,
      py::arg("relative") = true, py::arg("epsilon0") = 1.0, py::arg("decay") = 1.0, py::arg("k") = 0);

  py::class_<SkewedQuartic>(m, "SkewedQuartic")
      .def(py::init<std::size_t, double>(), py::arg("p"), py::arg("noise_sigma2") = 0.1)
      .def_property_readonly("dimension", &SkewedQuartic::dimension)
      .def("value", &SkewedQuartic::value)
      .def("gradient", &SkewedQuartic::gradient)
      .def("hessian", &SkewedQuartic::hessian);

  m.def(
      "load_libsvm",
      [](const std::string& path, std::size_t dimension) {
        const Dataset d = load_libsvm_file(path, dimension ? std::optional<std::size_t>(dimension) : std::nullopt);
        Matrix x = Matrix::Zero(static_cast<Eigen::Index>(d.samples.size()), static_cast<Eigen::Index>(d.dimension));
        Vector y(static_cast<Eigen::Index>(d.samples.size()));
        for (std::size_t i = 0; i < d.samples.size(); ++i) {
          y[static_cast<Eigen::Index>(i)] = d.samples[i].label;
          for (const auto& [j, v] : d.samples[i].features) {
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
          }
        }
        return py::make_tuple(x, y);
      },
      py::arg("path"), py::arg("dimension") = 0, "Dense (X, y) from a LIBSVM file.");
}
