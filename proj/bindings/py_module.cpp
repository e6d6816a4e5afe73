#include "sivfs/effective.hpp"
#include "sivfs/hamiltonian.hpp"
#include "sivfs/models.hpp"
#include "sivfs/optics.hpp"
#include "sivfs/pipeline.hpp"
#include "sivfs/units.hpp"

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace sivfs;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Fine structure, optical selection rules and ODMR models of spin-3/2 "
            "silicon-vacancy centers in 6H-SiC";

  py::register_exception<std::invalid_argument>(m, "ValidationError", PyExc_ValueError);

  m.attr("MU_B_GHZ_PER_T") = units::mu_b_ghz_per_t;
  m.attr("K_B_GHZ_PER_K") = units::k_b_ghz_per_k;
  m.attr("GHZ_PER_MEV") = units::ghz_per_mev;

  // --- spin algebra ---------------------------------------------------
  py::class_<AngularMomentumSet>(m, "AngularMomentumSet")
      .def_readonly("j", &AngularMomentumSet::j)
      .def_readonly("jx", &AngularMomentumSet::jx)
      .def_readonly("jy", &AngularMomentumSet::jy)
      .def_readonly("jz", &AngularMomentumSet::jz)
      .def("jplus", &AngularMomentumSet::jplus)
      .def("jminus", &AngularMomentumSet::jminus)
      .def("casimir", &AngularMomentumSet::casimir);
  m.def("angular_momentum_matrices", &angular_momentum_matrices, py::arg("j"));
  m.def("embed", &embed, py::arg("op_l"), py::arg("op_s"));
  m.def("basis_index", &basis::index, py::arg("lz"), py::arg("sz_twice"));
  m.def("basis_level", &basis::level, py::arg("index"));

  // --- hamiltonian ------------------------------------------------------
  py::class_<CenterParams>(m, "CenterParams")
      .def(py::init<>())
      .def(py::init([](double delta_a, double lambda_so, double b_ss, double d_tilde, double xi_e, double g) {
             return CenterParams{delta_a, lambda_so, b_ss, d_tilde, xi_e, g};
           }),
           py::arg("delta_a") = 0.0, py::arg("lambda_so") = 0.0, py::arg("b_ss") = 0.0, py::arg("d_tilde") = 0.0,
           py::arg("xi_e") = 0.0, py::arg("g_factor") = 2.0)
      .def_readwrite("delta_a", &CenterParams::delta_a)
      .def_readwrite("lambda_so", &CenterParams::lambda_so)
      .def_readwrite("b_ss", &CenterParams::b_ss)
      .def_readwrite("d_tilde", &CenterParams::d_tilde)
      .def_readwrite("xi_e", &CenterParams::xi_e)
      .def_readwrite("g_factor", &CenterParams::g_factor)
      .def("hierarchy_holds", &CenterParams::hierarchy_holds, py::arg("ratio") = 10.0);

  py::class_<StrainTensor>(m, "StrainTensor")
      .def(py::init<>())
      .def(py::init([](double uxx, double uyy, double uzz, double uxy, double uxz, double uyz) {
             return StrainTensor{uxx, uyy, uzz, uxy, uxz, uyz};
           }),
           py::arg("u_xx") = 0.0, py::arg("u_yy") = 0.0, py::arg("u_zz") = 0.0, py::arg("u_xy") = 0.0,
           py::arg("u_xz") = 0.0, py::arg("u_yz") = 0.0)
      .def_readwrite("u_xx", &StrainTensor::u_xx)
      .def_readwrite("u_yy", &StrainTensor::u_yy)
      .def_readwrite("u_zz", &StrainTensor::u_zz)
      .def_readwrite("u_xy", &StrainTensor::u_xy)
      .def_readwrite("u_xz", &StrainTensor::u_xz)
      .def_readwrite("u_yz", &StrainTensor::u_yz);

  py::class_<MagneticField>(m, "MagneticField")
      .def(py::init<>())
      .def(py::init([](double bz) { return MagneticField{bz}; }), py::arg("b_z_mt"))
      .def_readwrite("b_z_mt", &MagneticField::b_z_mt);

  py::enum_<MultipletLabel>(m, "MultipletLabel")
      .value("A2Like", MultipletLabel::A2Like)
      .value("ELike", MultipletLabel::ELike)
      .value("Mixed", MultipletLabel::Mixed);

  py::class_<EigenSystem>(m, "EigenSystem")
      .def_readonly("eigenvalues", &EigenSystem::eigenvalues)
      .def_readonly("eigenvectors", &EigenSystem::eigenvectors)
      .def_readonly("w_e", &EigenSystem::w_e)
      .def_readonly("labels", &EigenSystem::labels);

  m.def("center_params_from_json", &center_params_from_json, py::arg("text"));
  m.def("load_center_params", &load_center_params, py::arg("path"));
  m.def("h_orbital", &h_orbital);
  m.def("h_spin_orbit", &h_spin_orbit);
  m.def("h_spin_spin", &h_spin_spin);
  m.def("h_deformation", &h_deformation);
  m.def("h_zeeman", &h_zeeman);
  m.def("build_hamiltonian", &build_hamiltonian, py::arg("params"), py::arg("strain") = StrainTensor{},
        py::arg("field") = MagneticField{});
  m.def("eigensystem", &eigensystem, py::arg("h"));
  m.def("find_level_anticrossings", &find_level_anticrossings, py::arg("d_mhz"), py::arg("g_factor"),
        py::arg("b_min_mt"), py::arg("b_max_mt"));
  m.def("find_level_anticrossings_scan", &find_level_anticrossings_scan, py::arg("d_mhz"), py::arg("g_factor"),
        py::arg("b_min_mt"), py::arg("b_max_mt"), py::arg("step_mt") = 1e-3);

  // --- effective multiplets ------------------------------------------------
  py::class_<EffectiveA2>(m, "EffectiveA2")
      .def_readonly("epsilon_a2", &EffectiveA2::epsilon_a2)
      .def_readonly("d_prime", &EffectiveA2::d_prime);
  py::class_<EffectiveE>(m, "EffectiveE")
      .def_readonly("epsilon_e", &EffectiveE::epsilon_e)
      .def_readonly("lambda_so", &EffectiveE::lambda_so)
      .def_readonly("d_dprime", &EffectiveE::d_dprime)
      .def_readonly("d_dprime_perp", &EffectiveE::d_dprime_perp)
      .def_readonly("strain_x", &EffectiveE::strain_x)
      .def_readonly("strain_y", &EffectiveE::strain_y);
  py::class_<LowdinReport>(m, "LowdinReport")
      .def_readonly("dev_a2_ghz", &LowdinReport::dev_a2_ghz)
      .def_readonly("dev_e_ghz", &LowdinReport::dev_e_ghz)
      .def_readonly("mixed_states", &LowdinReport::mixed_states)
      .def_readonly("classification_clean", &LowdinReport::classification_clean)
      .def_readonly("shear_ignored", &LowdinReport::shear_ignored);
  m.def("effective_a2_params", &effective_a2_params, py::arg("params"));
  m.def("effective_e_params", &effective_e_params, py::arg("params"), py::arg("strain") = StrainTensor{});
  m.def("effective_a2_hamiltonian", py::overload_cast<const EffectiveA2&>(&effective_a2_hamiltonian));
  m.def("effective_e_hamiltonian",
        py::overload_cast<const CenterParams&, const StrainTensor&>(&effective_e_hamiltonian), py::arg("params"),
        py::arg("strain") = StrainTensor{});
  m.def("validate_against_exact", &validate_against_exact, py::arg("params"), py::arg("strain") = StrainTensor{});

  // --- optics ------------------------------------------------------------------
  py::enum_<MultipletSelect>(m, "MultipletSelect")
      .value("Lowest", MultipletSelect::Lowest)
      .value("A2Like", MultipletSelect::A2Like)
      .value("ELike", MultipletSelect::ELike);
  py::enum_<DepolarizationBranch>(m, "DepolarizationBranch")
      .value("A2Lowest", DepolarizationBranch::A2Lowest)
      .value("ELowest", DepolarizationBranch::ELowest);
  py::enum_<PolarizationRegime>(m, "PolarizationRegime")
      .value("Circular", PolarizationRegime::Circular)
      .value("Linear", PolarizationRegime::Linear)
      .value("Intermediate", PolarizationRegime::Intermediate);

  py::class_<DipoleAmplitudes>(m, "DipoleAmplitudes")
      .def_readonly("dx2", &DipoleAmplitudes::dx2)
      .def_readonly("dy2", &DipoleAmplitudes::dy2)
      .def_readonly("dz2", &DipoleAmplitudes::dz2)
      .def_readonly("sigma_plus2", &DipoleAmplitudes::sigma_plus2)
      .def_readonly("sigma_minus2", &DipoleAmplitudes::sigma_minus2);
  py::class_<PerturbativeTilt>(m, "PerturbativeTilt")
      .def_readonly("theta_a2_deg", &PerturbativeTilt::theta_a2_deg)
      .def_readonly("theta_e_deg", &PerturbativeTilt::theta_e_deg)
      .def_readonly("small_parameters", &PerturbativeTilt::small_parameters);
  py::class_<ThetaMap>(m, "ThetaMap")
      .def_readonly("lambda_ratio", &ThetaMap::lambda_ratio)
      .def_readonly("strain_ratio", &ThetaMap::strain_ratio)
      .def_readonly("theta_deg", &ThetaMap::theta_deg);
  py::class_<LevelPolarization>(m, "LevelPolarization")
      .def_readonly("energy_ghz", &LevelPolarization::energy_ghz)
      .def_readonly("degeneracy", &LevelPolarization::degeneracy)
      .def_readonly("polarization", &LevelPolarization::polarization);
  py::class_<RegimeReport>(m, "RegimeReport")
      .def_readonly("regime", &RegimeReport::regime)
      .def_readonly("so_scale_ghz", &RegimeReport::so_scale_ghz)
      .def_readonly("strain_scale_ghz", &RegimeReport::strain_scale_ghz)
      .def_readonly("lowest_multiplet", &RegimeReport::lowest_multiplet);

  m.def("dipole_amplitudes", &dipole_amplitudes, py::arg("eigensystem"));
  m.def("tilt_angle_exact", &tilt_angle_exact, py::arg("params"), py::arg("strain"), py::arg("select"));
  m.def("tilt_angle_perturbative", &tilt_angle_perturbative, py::arg("params"), py::arg("strain") = StrainTensor{});
  m.def("theta_map", &theta_map, py::arg("lambda_grid"), py::arg("strain_grid"));
  m.def("theta_contour", &theta_contour, py::arg("map"), py::arg("level_deg"));
  m.def("contour_strain_free_intercept", &contour_strain_free_intercept, py::arg("map"), py::arg("level_deg"));
  m.def("classify_regime", &classify_regime, py::arg("params"), py::arg("strain") = StrainTensor{});
  m.def("angular_intensity", &angular_intensity, py::arg("i0"), py::arg("cos2theta"), py::arg("phi_m_deg"));
  m.def("thermal_cos2theta", &thermal_cos2theta, py::arg("t_kelvin"), py::arg("theta0_deg"), py::arg("delta_a_mev"),
        py::arg("branch"));
  m.def("cos2theta_to_theta_deg", &cos2theta_to_theta_deg);
  m.def("theta_deg_to_cos2theta", &theta_deg_to_cos2theta);

  // --- fitting -----------------------------------------------------------------------
  py::class_<FitResult>(m, "FitResult")
      .def_readonly("names", &FitResult::names)
      .def_readonly("params", &FitResult::params)
      .def_readonly("uncertainties", &FitResult::uncertainties)
      .def_readonly("residual_norm", &FitResult::residual_norm)
      .def_readonly("converged", &FitResult::converged)
      .def_readonly("iterations", &FitResult::iterations)
      .def_readonly("flags", &FitResult::flags)
      .def("param", &FitResult::param)
      .def("uncertainty", &FitResult::uncertainty)
      .def("to_json", [](const FitResult& r) { return fit_result_to_json(r); });

  py::class_<DataSeries>(m, "DataSeries")
      .def(py::init<>())
      .def(py::init([](std::vector<double> x, std::vector<double> y, std::vector<double> sigma) {
             DataSeries s;
             s.x = std::move(x);
             s.y = std::move(y);
             s.sigma = std::move(sigma);
             return s;
           }),
           py::arg("x"), py::arg("y"), py::arg("sigma") = std::vector<double>{})
      .def_readwrite("x", &DataSeries::x)
      .def_readwrite("y", &DataSeries::y)
      .def_readwrite("sigma", &DataSeries::sigma);

  py::class_<OdmrLineshapeParams>(m, "OdmrLineshapeParams")
      .def(py::init([](double tc0, double gamma, double d0, double dd, double scale) {
             return OdmrLineshapeParams{tc0, gamma, d0, dd, scale};
           }),
           py::arg("t_c0_k"), py::arg("gamma_k_per_mhz"), py::arg("d0_mhz"), py::arg("delta_d_mhz"),
           py::arg("scale") = 1.0)
      .def_readwrite("t_c0_k", &OdmrLineshapeParams::t_c0_k)
      .def_readwrite("gamma_k_per_mhz", &OdmrLineshapeParams::gamma_k_per_mhz)
      .def_readwrite("d0_mhz", &OdmrLineshapeParams::d0_mhz)
      .def_readwrite("delta_d_mhz", &OdmrLineshapeParams::delta_d_mhz)
      .def_readwrite("scale", &OdmrLineshapeParams::scale);

  py::class_<OdmrPoint>(m, "OdmrPoint")
      .def(py::init([](double nu, double t, double s, double sigma) {
             return OdmrPoint{nu, t, s, sigma};
           }),
           py::arg("nu_mhz"), py::arg("t_k"), py::arg("signal"), py::arg("sigma") = 0.0)
      .def_readwrite("nu_mhz", &OdmrPoint::nu_mhz)
      .def_readwrite("t_k", &OdmrPoint::t_k)
      .def_readwrite("signal", &OdmrPoint::signal)
      .def_readwrite("sigma", &OdmrPoint::sigma);

  py::class_<RabiParams>(m, "RabiParams")
      .def(py::init([](double a, double b, double omega, double phi, double t2) {
             return RabiParams{a, b, omega, phi, t2};
           }),
           py::arg("a_offset"), py::arg("b_amp"), py::arg("omega_rad_per_ns"), py::arg("phi_rad"),
           py::arg("t2_star_ns"))
      .def_readwrite("a_offset", &RabiParams::a_offset)
      .def_readwrite("b_amp", &RabiParams::b_amp)
      .def_readwrite("omega_rad_per_ns", &RabiParams::omega_rad_per_ns)
      .def_readwrite("phi_rad", &RabiParams::phi_rad)
      .def_readwrite("t2_star_ns", &RabiParams::t2_star_ns);

  m.def("angular_model", &angular_model);
  m.def("fit_angular", &fit_angular, py::arg("scan"));
  m.def("arrhenius_model", &arrhenius_model);
  m.def("fit_arrhenius", &fit_arrhenius, py::arg("contrast"));
  m.def("odmr_lineshape", &odmr_lineshape, py::arg("nu_mhz"), py::arg("t_kelvin"), py::arg("params"));
  m.def("fit_odmr", &fit_odmr, py::arg("points"));
  m.def("rabi_model", &rabi_model, py::arg("tau_ns"), py::arg("params"));
  m.def("fit_rabi", &fit_rabi, py::arg("trace"));
  m.def(
      "delta_a_from_two_temperatures",
      [](std::pair<double, double> pt1, std::pair<double, double> pt2, DepolarizationBranch branch) {
        return delta_a_from_two_temperatures({pt1.first, pt1.second}, {pt2.first, pt2.second}, branch);
      },
      py::arg("pt1"), py::arg("pt2"), py::arg("branch"),
      "Each point is (temperature K, cos 2theta); returns delta_a in meV");
  m.def("synth_angular", &synth_angular);
  m.def("synth_arrhenius", &synth_arrhenius);
  m.def("synth_odmr", &synth_odmr);
  m.def("synth_rabi", &synth_rabi);
  m.def("linspace", &linspace);

  // --- pipeline -------------------------------------------------------------------------
  py::class_<Spectrum>(m, "Spectrum")
      .def(py::init<>())
      .def_readwrite("wavelength_nm", &Spectrum::wavelength_nm)
      .def_readwrite("intensity", &Spectrum::intensity)
      .def_readwrite("valid", &Spectrum::valid)
      .def_readwrite("beta_deg", &Spectrum::beta_deg)
      .def_readwrite("alpha_deg", &Spectrum::alpha_deg)
      .def_readwrite("temperature_k", &Spectrum::temperature_k)
      .def_readonly("clipped", &Spectrum::clipped);
  py::class_<CalibrationCurve>(m, "CalibrationCurve")
      .def_readonly("wavelength_nm", &CalibrationCurve::wavelength_nm)
      .def_readonly("factor", &CalibrationCurve::factor)
      .def_readonly("valid", &CalibrationCurve::valid);
  py::class_<AngularSeries>(m, "AngularSeries")
      .def(py::init<>())
      .def_readwrite("phi_deg", &AngularSeries::phi_deg)
      .def_readwrite("intensity", &AngularSeries::intensity)
      .def_readonly("clipped", &AngularSeries::clipped);
  py::class_<WavelengthWindow>(m, "WavelengthWindow")
      .def(py::init([](double center, double half) { return WavelengthWindow{center, half}; }),
           py::arg("center_nm"), py::arg("half_width_nm"))
      .def_readwrite("center_nm", &WavelengthWindow::center_nm)
      .def_readwrite("half_width_nm", &WavelengthWindow::half_width_nm);
  py::class_<ZplWindows>(m, "ZplWindows")
      .def(py::init<>())
      .def_readwrite("v1_zpl", &ZplWindows::v1_zpl)
      .def_readwrite("v2_zpl", &ZplWindows::v2_zpl)
      .def_readwrite("v3_zpl", &ZplWindows::v3_zpl)
      .def_readwrite("v3_base", &ZplWindows::v3_base);
  py::class_<MixtureRatios>(m, "MixtureRatios")
      .def_readonly("a", &MixtureRatios::a)
      .def_readonly("b", &MixtureRatios::b)
      .def_readonly("c", &MixtureRatios::c)
      .def_readonly("sigma_a", &MixtureRatios::sigma_a)
      .def_readonly("sigma_b", &MixtureRatios::sigma_b)
      .def_readonly("sigma_c", &MixtureRatios::sigma_c)
      .def_readonly("flags", &MixtureRatios::flags);

  m.def("read_spectrum_csv", &read_spectrum_csv);
  m.def("write_spectrum_csv", &write_spectrum_csv);
  m.def("correction_factor", &correction_factor, py::arg("i_0_90"), py::arg("i_90_90"), py::arg("i_0_0"),
        py::arg("i_90_0"), py::arg("noise_floor") = 0.0);
  m.def("apply_calibration", &apply_calibration, py::arg("raw"), py::arg("calibration"), py::arg("alpha_deg"));
  m.def("psb_subtract",
        py::overload_cast<const AngularSeries&, const AngularSeries&, double>(&psb_subtract), py::arg("at_zpl"),
        py::arg("reference"), py::arg("a"));
  m.def("psb_subtract3",
        py::overload_cast<const AngularSeries&, const AngularSeries&, double, const AngularSeries&, double>(
            &psb_subtract),
        py::arg("at_zpl"), py::arg("reference1"), py::arg("b"), py::arg("reference2"), py::arg("c"));
  m.def("estimate_mixture_ratios", &estimate_mixture_ratios, py::arg("at_0deg"), py::arg("at_90deg"),
        py::arg("windows") = ZplWindows{});
}
