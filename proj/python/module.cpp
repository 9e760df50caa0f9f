// Python bindings for the main operations: lattice calculus, be-able flows,
// operator construction and spectra, splitting/constraint machinery, KvN
// evolution with the Born check, and transport kernels.

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "blab/emergent.hpp"
#include "blab/kernel.hpp"
#include "blab/kvn.hpp"
#include "blab/runner.hpp"

namespace py = pybind11;
using namespace blab;

namespace {

Ordering ordering_from_string(const std::string& s) {
  if (s == "pleft") return Ordering::PLeft;
  if (s == "weyl") return Ordering::Weyl;
  throw Error("ordering must be 'pleft' or 'weyl'");
}

InterpOrder interp_from_string(const std::string& s) {
  if (s == "nearest") return InterpOrder::Nearest;
  if (s == "linear") return InterpOrder::Linear;
  throw Error("interpolation order must be 'nearest' or 'linear'");
}

}  // namespace

PYBIND11_MODULE(_beablelab, m) {
  m.doc() = "deterministic be-able dynamics laboratory";
  m.attr("__version__") = kVersion;

  py::register_exception<Error>(m, "BlabError");

  py::class_<Lattice>(m, "Lattice")
      .def_readonly("n_points", &Lattice::n_points)
      .def_readonly("period", &Lattice::period)
      .def_readonly("spacing", &Lattice::spacing)
      .def_readonly("points", &Lattice::points);

  py::class_<PhaseLattice>(m, "PhaseLattice")
      .def_readonly("q", &PhaseLattice::q)
      .def_readonly("p", &PhaseLattice::p)
      .def_readonly("p_max", &PhaseLattice::p_max)
      .def("size", &PhaseLattice::size)
      .def("p_point", &PhaseLattice::p_point)
      .def("flat", &PhaseLattice::flat);

  m.def("make_lattice", &make_lattice, py::arg("n_points"),
        py::arg("period") = kTwoPi);
  m.def("make_phase_lattice", &make_phase_lattice, py::arg("n_q"),
        py::arg("n_p"), py::arg("p_max"));
  m.def("spectral_derivative", &spectral_derivative);
  m.def("derivative_matrix", &derivative_matrix);
  m.def("quadrature",
        static_cast<Complex (*)(const Lattice&, const CVector&)>(&quadrature));

  py::class_<FlowField>(m, "FlowField")
      .def_readonly("name", &FlowField::name)
      .def("f", [](const FlowField& f, double q) { return f.f(q); })
      .def("df", [](const FlowField& f, double q) { return f.df(q); });

  m.def("catalog_field", &catalog_field, py::arg("name"), py::arg("params"));
  m.def(
      "custom_field",
      [](const std::string& name, py::function f, py::function df) {
        FlowField field;
        field.name = name;
        field.f = [f](double q) { return f(q).cast<double>(); };
        field.df = [df](double q) { return df(q).cast<double>(); };
        field.parallel_safe = false;  // Python callbacks stay on one thread
        return field;
      },
      py::arg("name"), py::arg("f"), py::arg("df"));

  py::class_<Trajectory>(m, "Trajectory")
      .def_readonly("times", &Trajectory::times)
      .def_readonly("states", &Trajectory::states)
      .def_readonly("unwrapped_states", &Trajectory::unwrapped_states);

  m.def("integrate_trajectory", &integrate_trajectory, py::arg("field"),
        py::arg("q0"), py::arg("t_final"), py::arg("dt"),
        py::arg("period") = kTwoPi);
  m.def("flow_map", &flow_map, py::arg("field"), py::arg("q0"),
        py::arg("delta_t"), py::arg("dt"), py::arg("period") = kTwoPi);
  m.def("poisson_bracket", &poisson_bracket);
  m.def("ensemble_sample", &ensemble_sample, py::arg("field"), py::arg("lattice"),
        py::arg("density0"), py::arg("n_samples"), py::arg("t_final"),
        py::arg("seed"), py::arg("dt") = 1e-3, py::arg("max_threads") = 0);

  py::class_<OperatorMatrix>(m, "OperatorMatrix")
      .def_readonly("m", &OperatorMatrix::m)
      .def_readonly("hermitian", &OperatorMatrix::hermitian)
      .def_readonly("lattice_n", &OperatorMatrix::lattice_n);

  m.def("make_operator", &make_operator);
  m.def("momentum_operator", &momentum_operator);
  m.def(
      "build_hamiltonian",
      [](const FlowField& f, const Lattice& lat, const std::string& ordering) {
        return build_hamiltonian(f, lat, ordering_from_string(ordering));
      },
      py::arg("field"), py::arg("lattice"), py::arg("ordering") = "weyl");
  m.def("hermitize_g", &hermitize_g);

  py::class_<Spectrum>(m, "Spectrum")
      .def_readonly("values", &Spectrum::values)
      .def_readonly("vectors", &Spectrum::vectors);
  m.def("spectrum", &spectrum);
  m.def("evolution_operator", &evolution_operator);
  m.def("heisenberg_commutator_norm", &heisenberg_commutator_norm,
        py::arg("op"), py::arg("observable"), py::arg("t"),
        py::arg("band_fraction") = 0.25);

  py::class_<SplitPair>(m, "SplitPair")
      .def_readonly("h_plus", &SplitPair::h_plus)
      .def_readonly("h_minus", &SplitPair::h_minus)
      .def_readonly("rho", &SplitPair::rho)
      .def_readonly("source", &SplitPair::source);
  py::class_<SplitResiduals>(m, "SplitResiduals")
      .def_readonly("difference", &SplitResiduals::difference)
      .def_readonly("min_eig_plus", &SplitResiduals::min_eig_plus)
      .def_readonly("min_eig_minus", &SplitResiduals::min_eig_minus)
      .def_readonly("comm_plus_minus", &SplitResiduals::comm_plus_minus)
      .def_readonly("comm_rho_plus", &SplitResiduals::comm_rho_plus)
      .def_readonly("comm_rho_minus", &SplitResiduals::comm_rho_minus);

  m.def("split_hamiltonian",
        static_cast<SplitPair (*)(const OperatorMatrix&, double,
                                  const FlowField&, const Lattice&)>(
            &split_hamiltonian),
        py::arg("h"), py::arg("rho"), py::arg("field"), py::arg("lattice"));
  m.def("validate_split", &validate_split);

  py::class_<Constraint>(m, "Constraint")
      .def_readonly("phi", &Constraint::phi)
      .def_readonly("e_obs", &Constraint::e_obs)
      .def_readonly("e_planck", &Constraint::e_planck)
      .def_readonly("prefactor", &Constraint::prefactor);
  m.def("build_constraint", &build_constraint);

  py::class_<PhysicalSubspace>(m, "PhysicalSubspace")
      .def_readonly("basis", &PhysicalSubspace::basis)
      .def_readonly("dimension", &PhysicalSubspace::dimension);
  m.def("physical_subspace", &physical_subspace);
  m.def("subspace_report_json", &subspace_report_json);

  py::class_<Liouvillian>(m, "Liouvillian")
      .def("apply", &Liouvillian::apply)
      .def("spectral_bound", &Liouvillian::spectral_bound)
      .def("dense", &Liouvillian::dense)
      .def("hermiticity_residual", &Liouvillian::hermiticity_residual);
  m.def("build_liouvillian", &build_liouvillian, py::keep_alive<0, 1>());

  py::class_<PhaseWavefunction>(m, "PhaseWavefunction")
      .def_readonly("amplitudes", &PhaseWavefunction::amplitudes)
      .def_readonly("norm", &PhaseWavefunction::norm);
  m.def("make_phase_wavefunction", &make_phase_wavefunction);
  m.def("evolve_phase", &evolve_phase);
  m.def("reduce_density", &reduce_density);
  m.def("reduce_wavefunction",
        [](const PhaseWavefunction& psi) {
          return reduce_wavefunction(psi).amplitudes;
        });
  m.def("config_profile", &config_profile);
  m.def("momentum_profile", &momentum_profile);

  py::class_<BornReport>(m, "BornReport")
      .def_readonly("times", &BornReport::times)
      .def_readonly("max_deviation", &BornReport::max_deviation)
      .def_readonly("norm_a", &BornReport::norm_a)
      .def_readonly("norm_b", &BornReport::norm_b)
      .def_readonly("mass_a", &BornReport::mass_a)
      .def_readonly("mass_b", &BornReport::mass_b)
      .def_readonly("passed", &BornReport::passed)
      .def_readonly("boundary_warning", &BornReport::boundary_warning);

  m.def(
      "born_check",
      [](const FlowField& field, std::size_t n_q, std::size_t n_p, double p_max,
         const std::string& phi_name, const std::string& chi_name,
         const std::vector<double>& times, double tolerance) {
        BornSetup setup;
        setup.field = field;
        setup.phase = make_phase_lattice(n_q, n_p, p_max);
        setup.phi = config_profile(phi_name, {}, setup.phase.q);
        setup.chi = momentum_profile(chi_name, {}, setup.phase);
        setup.times = times;
        setup.tolerance = tolerance;
        return born_check(setup);
      },
      py::arg("field"), py::arg("n_q"), py::arg("n_p"), py::arg("p_max"),
      py::arg("phi"), py::arg("chi"), py::arg("times"), py::arg("tolerance"));

  py::class_<TransportKernel>(m, "TransportKernel")
      .def_readonly("n", &TransportKernel::n)
      .def_readonly("delta_t", &TransportKernel::delta_t)
      .def("apply",
           static_cast<RVector (TransportKernel::*)(const RVector&) const>(
               &TransportKernel::apply))
      .def("apply_complex",
           static_cast<CVector (TransportKernel::*)(const CVector&) const>(
               &TransportKernel::apply))
      .def("dense", &TransportKernel::dense);

  m.def(
      "build_transport_kernel",
      [](const FlowField& f, const Lattice& lat, double dt,
         const std::string& order) {
        return build_transport_kernel(f, lat, dt, interp_from_string(order));
      },
      py::arg("field"), py::arg("lattice"), py::arg("delta_t"),
      py::arg("order") = "linear");
  m.def("symplectic_action", &symplectic_action);

  py::class_<Scenario>(m, "Scenario")
      .def_readonly("name", &Scenario::name)
      .def_readonly("n_q", &Scenario::n_q)
      .def_readonly("n_p", &Scenario::n_p)
      .def_readonly("rho_value", &Scenario::rho_value)
      .def_readonly("e_obs", &Scenario::e_obs)
      .def_readonly("e_planck", &Scenario::e_planck)
      .def_readonly("seed", &Scenario::seed);
  m.def("parse_scenario", &parse_scenario);
}
