// Python bindings for the strip porous-medium laboratory: section profiles,
// eigenvalues and the critical speed, the explicit steppers, traveling-wave
// relaxation, and the barrier amplitude/shift system.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pmetube/barriers.hpp"
#include "pmetube/diagnostics.hpp"
#include "pmetube/dynamics.hpp"
#include "pmetube/section.hpp"
#include "pmetube/waves.hpp"

namespace py = pybind11;
using namespace pmetube;

namespace {

py::array_t<double> vec_to_array(const std::vector<double>& v) {
  py::array_t<double> out(
      py::array::ShapeContainer{static_cast<py::ssize_t>(v.size())});
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

py::array_t<double> field_to_array(const std::vector<double>& v, int rows, int cols) {
  py::array_t<double> out(py::array::ShapeContainer{rows, cols});
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

}  // namespace

PYBIND11_MODULE(pmetube, m) {
  m.doc() = "porous-medium flow in a strip: profiles, waves, barriers, diagnostics";

  py::register_exception<error>(m, "PmetubeError");

  py::class_<SectionProfile>(m, "SectionProfile")
      .def_property_readonly("L", [](const SectionProfile& p) { return p.grid.length; })
      .def_property_readonly("n", [](const SectionProfile& p) { return p.grid.n; })
      .def_readonly("m", &SectionProfile::m)
      .def_readonly("lambda1", &SectionProfile::lambda1)
      .def_readonly("cstar", &SectionProfile::cstar)
      .def_readonly("sup_phi", &SectionProfile::sup_phi)
      .def_property_readonly("z",
                             [](const SectionProfile& p) {
                               std::vector<double> z(p.grid.n);
                               for (int i = 0; i < p.grid.n; ++i) z[i] = p.grid.node(i);
                               return vec_to_array(z);
                             })
      .def_property_readonly("phi",
                             [](const SectionProfile& p) { return vec_to_array(p.phi); });

  py::class_<WaveProfile>(m, "WaveProfile")
      .def_readonly("m", &WaveProfile::m)
      .def_readonly("xi_min", &WaveProfile::xi_min)
      .def_readonly("xi_max", &WaveProfile::xi_max)
      .def_readonly("n_xi", &WaveProfile::n_xi)
      .def_readonly("speed", &WaveProfile::speed)
      .def_readonly("locked_speed", &WaveProfile::locked_speed)
      .def_readonly("drift_rate", &WaveProfile::drift_rate)
      .def_readonly("xi0", &WaveProfile::xi0)
      .def_readonly("normalized", &WaveProfile::normalized)
      .def_property_readonly("values",
                             [](const WaveProfile& w) {
                               return field_to_array(w.values, w.section.n, w.n_xi);
                             })
      .def_property_readonly("front",
                             [](const WaveProfile& w) { return vec_to_array(w.front); });

  py::class_<BarrierPath>(m, "BarrierPath")
      .def_readonly("dtau", &BarrierPath::dtau)
      .def_readonly("predicted_shift", &BarrierPath::predicted_shift)
      .def_property_readonly("f", [](const BarrierPath& p) { return vec_to_array(p.f); })
      .def_property_readonly("g", [](const BarrierPath& p) { return vec_to_array(p.g); })
      .def("f_at", &BarrierPath::f_at)
      .def("g_at", &BarrierPath::g_at);

  py::class_<EpsilonBookkeeping>(m, "EpsilonBookkeeping")
      .def_readonly("eps", &EpsilonBookkeeping::eps)
      .def_readonly("a_eps", &EpsilonBookkeeping::a_eps)
      .def_readonly("b_eps", &EpsilonBookkeeping::b_eps)
      .def_readonly("lam_eps", &EpsilonBookkeeping::lam_eps)
      .def_readonly("c_eps", &EpsilonBookkeeping::c_eps);

  m.def("analytic_lambda1", &analytic_lambda1, py::arg("L"));
  m.def(
      "numeric_lambda1",
      [](double L, int n) { return numeric_lambda1(SectionGrid::make(L, n)); },
      py::arg("L"), py::arg("n"));
  m.def("critical_speed", &critical_speed, py::arg("m"), py::arg("lambda1"));
  m.def("shoot_profile", &shoot_profile, py::arg("L"), py::arg("m"), py::arg("n"));
  m.def(
      "relax_profile",
      [](double L, double m_, int n, double tol) { return relax_profile(L, m_, n, tol); },
      py::arg("L"), py::arg("m"), py::arg("n"), py::arg("tol") = 1e-10);
  m.def("dilate_profile", &dilate_profile, py::arg("profile"), py::arg("lam"));
  m.def("barenblatt_1d", &barenblatt_1d, py::arg("y"), py::arg("t"), py::arg("m"),
        py::arg("C"));

  m.def(
      "relax_wave",
      [](const SectionProfile& p, double c, double xi_min, double xi_max, int n_xi,
         double tol, double tau_max) {
        WaveRelaxOptions opts;
        opts.tau_max = tau_max;
        return relax_wave(p, c, xi_min, xi_max, n_xi, tol, opts);
      },
      py::arg("profile"), py::arg("c"), py::arg("xi_min"), py::arg("xi_max"),
      py::arg("n_xi"), py::arg("tol") = 1e-3, py::arg("tau_max") = 60.0);
  m.def("normalize_wave", &normalize_wave, py::arg("wave"));
  m.def("reflect_wave", &reflect_wave, py::arg("wave"));
  m.def(
      "front_curve",
      [](py::array_t<double, py::array::c_style | py::array::forcecast> values,
         double ymin, double hy, double threshold) {
        if (values.ndim() != 2) throw invalid_parameter("front_curve: need a 2-D array");
        return vec_to_array(front_curve(values.data(),
                                        static_cast<int>(values.shape(0)),
                                        static_cast<int>(values.shape(1)), ymin, hy,
                                        threshold));
      },
      py::arg("values"), py::arg("ymin"), py::arg("hy"), py::arg("threshold"));

  m.def("delta_schedule", &delta_schedule, py::arg("delta0"), py::arg("m"), py::arg("tau"));
  m.def("super_closed_form", &super_closed_form, py::arg("f0"), py::arg("g0"),
        py::arg("cstar"), py::arg("m"), py::arg("tau"));
  m.def(
      "integrate_barrier",
      [](const std::string& kind, double m_, double cstar, double f0, double g0,
         double delta0, double tau_end, double dtau) {
        BarrierParams p;
        p.kind = kind == "sub" ? BarrierKind::sub : BarrierKind::super;
        p.m = m_;
        p.cstar = cstar;
        p.f0 = f0;
        p.g0 = g0;
        p.delta0 = delta0;
        return integrate_barrier(p, tau_end, dtau);
      },
      py::arg("kind"), py::arg("m"), py::arg("cstar"), py::arg("f0"), py::arg("g0"),
      py::arg("delta0") = 0.0, py::arg("tau_end") = 30.0, py::arg("dtau") = 1e-3);
  m.def(
      "asymptotic_shift",
      [](const std::string& kind, double m_, double cstar, double f0, double g0,
         double delta0) {
        BarrierParams p;
        p.kind = kind == "sub" ? BarrierKind::sub : BarrierKind::super;
        p.m = m_;
        p.cstar = cstar;
        p.f0 = f0;
        p.g0 = g0;
        p.delta0 = delta0;
        return asymptotic_shift(p);
      },
      py::arg("kind"), py::arg("m"), py::arg("cstar"), py::arg("f0"), py::arg("g0"),
      py::arg("delta0") = 0.0);
  m.def("epsilon_bookkeeping", &epsilon_bookkeeping, py::arg("eps"), py::arg("m"),
        py::arg("cstar"));

  m.def(
      "evolve",
      [](double L, double m_, int n, double y_min, double y_max, int ny, double tau_end,
         double snapshot_dtau, const std::string& datum, double amplitude, double width) {
        const SectionProfile prof = relax_profile(L, m_, n, 1e-10);
        RunConfig cfg;
        cfg.grid = TubeGrid::make(SectionGrid::make(L, n), y_min, y_max, ny);
        cfg.m = m_;
        cfg.tau_end = tau_end;
        cfg.snapshot_dtau = snapshot_dtau;
        if (datum == "phi-bump") cfg.datum.kind = DatumKind::phi_bump;
        else if (datum == "plateau") cfg.datum.kind = DatumKind::plateau;
        else if (datum == "two-bump") cfg.datum.kind = DatumKind::two_bump;
        else throw invalid_parameter("unknown datum kind: " + datum);
        cfg.datum.amplitude = amplitude;
        cfg.datum.width = width;
        const RunRecord rec = run_evolution(cfg, prof);
        py::list snaps;
        for (const auto& f : rec.snapshots) {
          snaps.append(field_to_array(f.values, f.nz(), f.ny()));
        }
        return py::make_tuple(vec_to_array(rec.snapshot_times), snaps, prof);
      },
      py::arg("L"), py::arg("m"), py::arg("n"), py::arg("y_min"), py::arg("y_max"),
      py::arg("ny"), py::arg("tau_end"), py::arg("snapshot_dtau") = 0.5,
      py::arg("datum") = "phi-bump", py::arg("amplitude") = 0.5, py::arg("width") = 1.0);

  m.attr("__version__") = "1.0.0";
}
