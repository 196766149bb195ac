#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "kgp/asymptotics.hpp"
#include "kgp/cli.hpp"
#include "kgp/energy.hpp"
#include "kgp/error.hpp"
#include "kgp/minimizer.hpp"
#include "kgp/radial.hpp"
#include "kgp/townes.hpp"

namespace py = pybind11;
using namespace kgp;

namespace {

py::array_t<double> to_numpy(std::span<const double> v) {
  py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

py::dict breakdown_dict(const EnergyBreakdown& e) {
  py::dict d;
  d["kinetic"] = e.kinetic;
  d["kirchhoff"] = e.kirchhoff;
  d["potential"] = e.potential;
  d["interaction"] = e.interaction;
  d["total"] = e.total;
  return d;
}

py::dict record_dict(const SweepRecord& r) {
  py::dict d;
  d["b"] = r.b;
  d["eps"] = r.eps;
  d["energy"] = breakdown_dict(r.energy);
  d["scaled_energy"] = r.scaled_energy;
  d["beta_est"] = r.beta_est;
  d["profile_h1"] = r.profile_h1;
  d["kinetic_scaled"] = r.kinetic_scaled;
  d["potential_scaled"] = r.potential_scaled;
  d["upper_bound"] = r.upper_bound;
  d["mu"] = r.mu;
  d["residual"] = r.residual;
  d["iterations"] = r.iterations;
  d["converged"] = r.converged;
  d["monotone"] = r.monotone;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Kirchhoff-type Gross-Pitaevskii ground states on radial grids";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<InfimumNotAttained>(m, "InfimumNotAttained", PyExc_ValueError);
  py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<RadialGrid, std::shared_ptr<RadialGrid>>(m, "Grid")
      .def(py::init([](std::size_t n, double radius, const std::string& grading, double core) {
             return std::const_pointer_cast<RadialGrid>(
                 RadialGrid::make({n, radius, grading_from_string(grading), core}));
           }),
           py::arg("n") = 4096, py::arg("radius") = 30.0, py::arg("grading") = "sinh", py::arg("core") = 0.5)
      .def_property_readonly("nodes", [](const RadialGrid& g) { return to_numpy(g.nodes()); })
      .def_property_readonly("radius", &RadialGrid::radius)
      .def("__len__", &RadialGrid::size);

  py::class_<RadialFunction>(m, "Profile")
      .def(py::init([](std::shared_ptr<RadialGrid> grid, const std::vector<double>& values) {
             return RadialFunction(grid, values);
           }),
           py::arg("grid"), py::arg("values"))
      .def_property_readonly("values", [](const RadialFunction& u) { return to_numpy(u.values()); })
      .def_property_readonly("grid",
                             [](const RadialFunction& u) { return std::const_pointer_cast<RadialGrid>(u.grid_ptr()); })
      .def("normalized", [](const RadialFunction& u) { return normalized(u); })
      .def("rescaled", [](const RadialFunction& u, double eps) { return rescale_profile(u, eps); }, py::arg("eps"));

  m.def("gaussian", [](std::shared_ptr<RadialGrid> g) { return gaussian_profile(g); }, py::arg("grid"));
  m.def("mass", &mass);
  m.def("kinetic", &kinetic);
  m.def("quartic", &quartic);
  m.def("singular_moment", &singular_moment, py::arg("u"), py::arg("p"));
  m.def("h1_distance", &h1_distance);

  py::class_<GroundStateData>(m, "GroundState")
      .def_readonly("q", &GroundStateData::q)
      .def_readonly("q0", &GroundStateData::q0)
      .def_readonly("a_star", &GroundStateData::a_star)
      .def_readonly("q_origin", &GroundStateData::q_origin)
      .def_readonly("kinetic_q", &GroundStateData::kinetic_q)
      .def_readonly("half_quartic_q", &GroundStateData::half_quartic_q)
      .def_readonly("consistency_spread", &GroundStateData::consistency_spread)
      .def("moment", &GroundStateData::moment, py::arg("p"));

  m.def(
      "townes",
      [](std::shared_ptr<RadialGrid> grid, double tol) {
        if (!grid) grid = std::const_pointer_cast<RadialGrid>(RadialGrid::make({}));
        return shoot_q(grid, tol);
      },
      py::arg("grid") = nullptr, py::arg("tol") = 1e-15);
  m.def("gn_defect", [](const RadialFunction& u, double a_star) { return gn_defect(u, a_star); }, py::arg("u"),
        py::arg("a_star"));

  py::class_<ModelParams>(m, "ModelParams")
      .def(py::init([](double a, double b, double p, bool with_potential) {
             ModelParams params{a, b, p, with_potential};
             params.validate();
             return params;
           }),
           py::arg("a"), py::arg("b"), py::arg("p") = 1.0, py::arg("with_potential") = true)
      .def_readonly("a", &ModelParams::a)
      .def_readonly("b", &ModelParams::b)
      .def_readonly("p", &ModelParams::p)
      .def_readonly("with_potential", &ModelParams::with_potential);

  m.def(
      "energy", [](const RadialFunction& u, const ModelParams& params) { return breakdown_dict(energy(u, params)); },
      py::arg("u"), py::arg("params"));
  m.def(
      "upper_bound", [](const ModelParams& params, const GroundStateData& gs) { return upper_bound(params, gs); },
      py::arg("params"), py::arg("ground_state"));
  m.def("theorem2_limit", &theorem2_limit, py::arg("p"), py::arg("m_p"));
  m.def("theorem3_limit", &theorem3_limit, py::arg("a"), py::arg("a_star"));
  m.def("beta_limit", &beta_limit, py::arg("p"), py::arg("m_p"));

  py::class_<MinimizeResult>(m, "MinimizeResult")
      .def_readonly("profile", &MinimizeResult::profile)
      .def_readonly("frame_profile", &MinimizeResult::frame_profile)
      .def_property_readonly("energy", [](const MinimizeResult& r) { return breakdown_dict(r.breakdown); })
      .def_readonly("mu", &MinimizeResult::mu)
      .def_readonly("residual", &MinimizeResult::residual)
      .def_readonly("iterations", &MinimizeResult::iterations)
      .def_readonly("converged", &MinimizeResult::converged)
      .def_property_readonly("frame", [](const MinimizeResult& r) { return to_string(r.frame_used.kind); })
      .def_property_readonly("eps", [](const MinimizeResult& r) { return r.frame_used.eps; })
      .def_readonly("energy_trace", &MinimizeResult::energy_trace);

  m.def(
      "minimize",
      [](const ModelParams& params, const RadialFunction& init, const GroundStateData& gs, const std::string& frame,
         int max_iters, double residual_tol, bool record_trace) {
        FlowOptions opts;
        opts.max_iters = max_iters;
        opts.residual_tol = residual_tol;
        opts.record_trace = record_trace;
        if (frame_kind_from_string(frame) == FrameKind::blowup) {
          opts.frame = Frame::blowup(blowup_scale(params, gs.a_star));
        }
        py::gil_scoped_release release;
        return minimize(params, init, opts, gs.a_star);
      },
      py::arg("params"), py::arg("init"), py::arg("ground_state"), py::arg("frame") = "physical",
      py::arg("max_iters") = 20000, py::arg("residual_tol") = 1e-7, py::arg("record_trace") = false);

  m.def(
      "sweep",
      [](const GroundStateData& gs, const std::string& regime, double a_ratio, double p, std::vector<double> b_list,
         bool warm_start) {
        SweepSpec spec;
        spec.regime = regime_from_string(regime);
        spec.a_ratio = a_ratio;
        spec.p = p;
        spec.b_list = b_list.empty() ? default_b_list(spec.regime) : std::move(b_list);
        spec.warm_start = warm_start;
        std::vector<SweepRecord> records;
        {
          py::gil_scoped_release release;
          records = run_sweep(gs, spec);
        }
        py::list out;
        for (const auto& r : records) out.append(record_dict(r));
        return out;
      },
      py::arg("ground_state"), py::arg("regime") = "critical", py::arg("a_ratio") = 1.0, py::arg("p") = 1.0,
      py::arg("b_list") = std::vector<double>{}, py::arg("warm_start") = true);

  m.def(
      "fit_power_limit",
      [](const std::vector<double>& b, const std::vector<double>& y) {
        const auto f = fit_power_limit(b, y);
        py::dict d;
        d["estimate"] = f.estimate;
        d["rate"] = f.rate;
        d["coefficient"] = f.coefficient;
        d["residual"] = f.residual;
        d["samples_used"] = f.samples_used;
        return d;
      },
      py::arg("b"), py::arg("y"));

  m.def(
      "run",
      [](const std::string& config_json) {
        const auto config = cli::parse_config(config_json);
        std::ostringstream log;
        py::gil_scoped_release release;
        return cli::run(config, log);
      },
      py::arg("config_json"), "Run a CLI subcommand from a JSON config; returns the exit code.");
}
