#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "intfb/analysis.hpp"
#include "intfb/error.hpp"
#include "intfb/harness.hpp"
#include "intfb/oracle.hpp"

namespace py = pybind11;
using namespace intfb;

namespace {

py::object to_python(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

nlohmann::json from_python(const py::object& obj) {
  return nlohmann::json::parse(py::module_::import("json").attr("dumps")(obj).cast<std::string>());
}

py::dict record_dict(const TrajectoryRecord& rec) {
  py::dict d;
  d["t"] = rec.times;
  d["W"] = rec.w;
  d["consensus_err"] = rec.consensus_err;
  d["constraint_res"] = rec.constraint_res;
  d["V"] = rec.v;
  d["sum_y_norm"] = rec.sum_y_norm;
  d["y1_norm"] = rec.y1_norm;
  return d;
}

}  // namespace

PYBIND11_MODULE(_intfb, m) {
  m.doc() = "Consensus optimization with integral feedback";

  static py::exception<Error> error_type(m, "IntfbError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error_type)(e.what());
      exc.attr("code") = to_string(e.code());
      exc.attr("stage") = e.stage();
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    }
  });

  py::class_<Graph>(m, "Graph")
      .def_static("from_neighbor_lists", &Graph::from_neighbor_lists, py::arg("lists"), py::arg("index_base") = 0)
      .def_static("from_edges", &Graph::from_edges, py::arg("m"), py::arg("edges"))
      .def_property_readonly("agent_count", &Graph::agent_count)
      .def_property_readonly("edges", &Graph::edges)
      .def("degrees", &Graph::degrees)
      .def("is_connected", &Graph::is_connected)
      .def("laplacian", &Graph::laplacian);

  py::class_<LinearConstraint>(m, "LinearConstraint")
      .def_static("build", &LinearConstraint::build, py::arg("A"), py::arg("b"),
                  py::arg("tol") = LinearConstraint::kDefaultRankTol)
      .def_property_readonly("rank", &LinearConstraint::rank)
      .def("projector", &LinearConstraint::projector)
      .def("feasible_point", &LinearConstraint::feasible_point)
      .def("randomize_feasible", &LinearConstraint::randomize_feasible, py::arg("seed"), py::arg("scale"))
      .def("residual", &LinearConstraint::residual);

  py::class_<Problem>(m, "Problem")
      .def_property_readonly("agent_count", &Problem::agent_count)
      .def_property_readonly("dim", &Problem::dim)
      .def_property_readonly("graph", &Problem::graph)
      .def_property_readonly("constraints", &Problem::constraints)
      .def("laplacian", &Problem::laplacian)
      .def("block_projector", &Problem::block_projector)
      .def("stacked_gradient", &Problem::stacked_gradient)
      .def("integral_rhs", [](const Problem& p, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
        const IntegralRate r = rhs_integral({x, y}, p, 0.0);
        return py::make_tuple(r.dx, r.dy);
      });

  m.def("paper_example", &build_paper_example_5agent, py::arg("seed") = 1);
  m.def("relaxed_example", &build_relaxed_example_5agent, py::arg("seed") = 1);
  m.def(
      "random_instance",
      [](int agents, int n, int n_i, std::uint64_t seed) {
        RandomInstanceSpec spec;
        spec.m = agents;
        spec.n = n;
        spec.n_i = n_i;
        spec.seed = seed;
        return generate_random_instance(spec);
      },
      py::arg("m"), py::arg("n"), py::arg("n_i") = 0, py::arg("seed") = 1);

  m.def(
      "solve",
      [](const Problem& p, double tol) {
        const OracleResult r = solve(p, tol);
        py::dict d;
        d["x_star"] = r.x_star;
        d["f_star"] = r.f_star;
        d["stationarity"] = r.stationarity;
        d["feasibility"] = r.feasibility;
        d["method"] = r.method;
        return d;
      },
      py::arg("problem"), py::arg("tol") = 1e-10);

  m.def("equilibrium_y_star", [](const Problem& p, const Eigen::VectorXd& x_star) {
    return equilibrium_y_star(p, x_star);
  });

  m.def(
      "run",
      [](const py::object& config) {
        const ExperimentConfig cfg = ExperimentConfig::from_json(from_python(config));
        ExperimentResult r;
        {
          py::gil_scoped_release release;
          r = run_experiment(cfg);
        }
        py::dict d;
        d["summary"] = to_python(r.summary);
        d["series"] = record_dict(r.record);
        d["csv"] = to_csv(r.record);
        d["passed"] = r.passed;
        return d;
      },
      py::arg("config"));

  m.def("fig1_config", [](std::uint64_t seed, const std::string& flow) {
    return to_python(paper_fig1_config(seed, flow).to_json());
  }, py::arg("seed") = 1, py::arg("flow") = "integral");
  m.def("fig2_config", [](std::uint64_t seed, const std::string& flow, int agents) {
    return to_python(paper_fig2_config(seed, flow, agents).to_json());
  }, py::arg("seed") = 1, py::arg("flow") = "integral", py::arg("m") = 30);

  m.def("check", [] {
    py::list out;
    for (const auto& c : run_check_suite()) out.append(py::make_tuple(c.name, c.passed, c.detail));
    return out;
  });
}
