#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>

#include "sinkdist/alpha_sinkhorn.hpp"
#include "sinkdist/emd.hpp"
#include "sinkdist/errors.hpp"
#include "sinkdist/ground_metric.hpp"
#include "sinkdist/histogram.hpp"
#include "sinkdist/kernels.hpp"
#include "sinkdist/sinkhorn.hpp"

namespace py = pybind11;
using namespace sinkdist;

namespace {

SinkhornConfig make_config(double lambda, double tolerance, int max_iterations, std::optional<int> iterations) {
  return iterations ? SinkhornConfig::fixed(lambda, *iterations)
                    : SinkhornConfig::with_tolerance(lambda, tolerance, max_iterations);
}

const char* boundary_name(AlphaBoundary b) {
  switch (b) {
    case AlphaBoundary::kIndependence:
      return "independence";
    case AlphaBoundary::kLambdaMax:
      return "lambda_max";
    default:
      return "none";
  }
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Entropy-regularized optimal transport distances";

  // DomainError derives from std::domain_error, which pybind11 maps to ValueError already;
  // the others get their own Python types.
  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
  py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  m.def("normalize", [](const Vector& raw) { return normalize(raw).weights(); }, py::arg("raw"));
  m.def("entropy", [](const Vector& r) { return entropy(Histogram(r)); }, py::arg("r"));
  m.def("sample_simplex", [](Eigen::Index d, std::uint64_t seed) { return sample_simplex(d, seed).weights(); },
        py::arg("d"), py::arg("seed"));

  m.def("grid_euclidean_metric", [](Eigen::Index w, Eigen::Index h) { return grid_euclidean_metric(w, h).entries(); },
        py::arg("width"), py::arg("height"));
  m.def("random_points_metric",
        [](Eigen::Index d, std::uint64_t seed) { return random_points_metric(d, seed).entries(); }, py::arg("d"),
        py::arg("seed"));
  m.def("median_normalize", [](const Matrix& mm) { return median_normalize(CostMatrix(mm)).entries(); },
        py::arg("m"));
  m.def("power_transform", [](const Matrix& mm, double a) { return power_transform(CostMatrix(mm), a).entries(); },
        py::arg("m"), py::arg("a"));

  py::class_<EmdSolution>(m, "EmdSolution")
      .def_readonly("cost", &EmdSolution::cost)
      .def_property_readonly("plan", [](const EmdSolution& s) { return s.plan.entries(); })
      .def_readonly("row_potential", &EmdSolution::row_potential)
      .def_readonly("col_potential", &EmdSolution::col_potential)
      .def_readonly("pivots", &EmdSolution::pivots);
  m.def(
      "emd",
      [](const Vector& r, const Vector& c, const Matrix& mm) {
        py::gil_scoped_release unlocked;
        return solve_emd(Histogram(r), Histogram(c), CostMatrix(mm));
      },
      py::arg("r"), py::arg("c"), py::arg("m"));

  py::class_<SinkhornResult>(m, "SinkhornResult")
      .def_readonly("divergence", &SinkhornResult::divergence)
      .def_readonly("iterations", &SinkhornResult::iterations)
      .def_readonly("converged", &SinkhornResult::converged)
      .def_readonly("marginal_error", &SinkhornResult::marginal_error)
      .def_readonly("log_domain", &SinkhornResult::log_domain)
      .def_readonly("u", &SinkhornResult::u)
      .def_readonly("v", &SinkhornResult::v);

  m.def(
      "sinkhorn",
      [](const Vector& r, const Vector& c, const Matrix& mm, double lambda, double tolerance, int max_iterations,
         std::optional<int> iterations) {
        const SinkhornConfig cfg = make_config(lambda, tolerance, max_iterations, iterations);
        py::gil_scoped_release unlocked;
        return sinkhorn_divergence(Histogram(r), Histogram(c), CostMatrix(mm), cfg);
      },
      py::arg("r"), py::arg("c"), py::arg("m"), py::arg("lam"), py::arg("tolerance") = 0.01,
      py::arg("max_iterations") = 100000, py::arg("iterations") = std::nullopt);

  m.def(
      "sinkhorn_plan",
      [](const Vector& r, const Vector& c, const Matrix& mm, double lambda, double tolerance) {
        const GibbsKernel k(CostMatrix(mm), lambda, Histogram(r));
        const auto res = sinkhorn_divergence(k, Histogram(c), SinkhornConfig::with_tolerance(lambda, tolerance));
        return recover_plan(res, k).entries();
      },
      py::arg("r"), py::arg("c"), py::arg("m"), py::arg("lam"), py::arg("tolerance") = 1e-9);

  m.def(
      "sinkhorn_batch",
      [](const Vector& r, const Matrix& targets, const Matrix& mm, double lambda, double tolerance) {
        std::vector<SinkhornResult> out;
        {
          py::gil_scoped_release unlocked;
          out = sinkhorn_batch(Histogram(r), targets, CostMatrix(mm), SinkhornConfig::with_tolerance(lambda, tolerance));
        }
        Vector d(static_cast<Eigen::Index>(out.size()));
        for (std::size_t k = 0; k < out.size(); ++k) d[static_cast<Eigen::Index>(k)] = out[k].divergence;
        return d;
      },
      py::arg("r"), py::arg("targets"), py::arg("m"), py::arg("lam"), py::arg("tolerance") = 0.01);

  py::class_<AlphaSolveReport>(m, "AlphaSolveReport")
      .def_readonly("value", &AlphaSolveReport::value)
      .def_readonly("lambda_star", &AlphaSolveReport::lambda_star)
      .def_readonly("achieved_entropy", &AlphaSolveReport::achieved_entropy)
      .def_readonly("target_entropy", &AlphaSolveReport::target_entropy)
      .def_property_readonly("boundary", [](const AlphaSolveReport& a) { return boundary_name(a.boundary); })
      .def_property_readonly("plan", [](const AlphaSolveReport& a) { return a.plan.entries(); });
  m.def(
      "sinkhorn_alpha",
      [](const Vector& r, const Vector& c, const Matrix& mm, double alpha) {
        py::gil_scoped_release unlocked;
        return sinkhorn_alpha(Histogram(r), Histogram(c), CostMatrix(mm), AlphaBall(alpha));
      },
      py::arg("r"), py::arg("c"), py::arg("m"), py::arg("alpha"));

  m.def(
      "baseline_distance",
      [](const std::string& name, const Vector& r, const Vector& c) {
        const auto kind = parse_baseline_kind(name);
        if (!kind) throw py::value_error("unknown baseline '" + name + "'");
        return baseline_distance(*kind, Histogram(r), Histogram(c));
      },
      py::arg("name"), py::arg("r"), py::arg("c"));
  m.def(
      "independence_kernel_distance",
      [](const Vector& r, const Vector& c, const Matrix& mm) {
        return independence_kernel_distance(Histogram(r), Histogram(c), CostMatrix(mm));
      },
      py::arg("r"), py::arg("c"), py::arg("m"));
}
