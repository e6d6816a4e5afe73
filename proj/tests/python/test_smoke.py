"""Smoke tests for the python bindings: a thin pass over each module."""

import math

import pytest

sivfs = pytest.importorskip("sivfs")


def test_angular_momentum_matrices():
    s = sivfs.angular_momentum_matrices(1.5)
    assert s.jz[0, 0] == pytest.approx(1.5)
    casimir = s.casimir()
    assert casimir[0, 0] == pytest.approx(1.5 * 2.5)
    with pytest.raises(ValueError):
        sivfs.angular_momentum_matrices(0.7)


def test_hamiltonian_and_eigensystem():
    p = sivfs.CenterParams(delta_a=100.0)
    es = sivfs.eigensystem(sivfs.build_hamiltonian(p))
    assert es.eigenvalues[0] == pytest.approx(-200.0 / 3.0)
    assert es.eigenvalues[-1] == pytest.approx(100.0 / 3.0)
    assert list(es.labels).count(sivfs.MultipletLabel.A2Like) == 4

    v3 = sivfs.CenterParams(delta_a=-100.0, d_tilde=0.3)
    es3 = sivfs.eigensystem(sivfs.build_hamiltonian(v3))
    assert es3.labels[0] == sivfs.MultipletLabel.ELike


def test_level_anticrossings():
    fields = sivfs.find_level_anticrossings(64.0, 2.0, 0.0, 6.0)
    assert [round(b, 3) for b in fields] == [2.286, 4.573]
    fields_v3 = sivfs.find_level_anticrossings(-14.0, 2.0, 0.0, 6.0)
    assert [round(b, 3) for b in fields_v3] == [0.5, 1.0]


def test_effective_multiplets():
    p = sivfs.CenterParams(delta_a=100.0, lambda_so=10.0, b_ss=0.2, d_tilde=0.5)
    a2 = sivfs.effective_a2_params(p)
    assert a2.d_prime == pytest.approx(1.3)
    report = sivfs.validate_against_exact(sivfs.CenterParams(delta_a=100.0, lambda_so=1.0))
    assert report.dev_a2_ghz < 1e-3


def test_tilt_angles():
    p = sivfs.CenterParams(delta_a=100.0, lambda_so=15.0)
    tilt = sivfs.tilt_angle_perturbative(p)
    assert tilt.theta_e_deg == pytest.approx(76.41, abs=5e-3)
    clean = sivfs.CenterParams(delta_a=100.0, d_tilde=0.3)
    assert sivfs.tilt_angle_exact(clean, sivfs.StrainTensor(), sivfs.MultipletSelect.ELike) == pytest.approx(90.0)


def test_thermal_depolarization_round_trip():
    theta0 = sivfs.cos2theta_to_theta_deg(0.96)
    c300 = sivfs.thermal_cos2theta(300.0, theta0, 50.4, sivfs.DepolarizationBranch.A2Lowest)
    assert c300 == pytest.approx(0.72, abs=2e-3)
    delta = sivfs.delta_a_from_two_temperatures((15.0, 0.96), (300.0, 0.72), sivfs.DepolarizationBranch.A2Lowest)
    assert delta == pytest.approx(50.4, abs=0.1)


def test_fits():
    grid = sivfs.linspace(0.0, 1000.0, 200)
    truth = sivfs.RabiParams(0.0, 1.0, 2.0 * math.pi / 100.0, 0.0, 219.0)
    trace = sivfs.synth_rabi(grid, truth, 0.03, 1)
    fit = sivfs.fit_rabi(trace)
    assert fit.converged
    assert fit.param("t2_star_ns") == pytest.approx(219.0, abs=16.0)

    scan = sivfs.synth_angular(sivfs.linspace(0.0, 180.0, 19), 1.0, 0.96, 0.01, 2)
    angular = sivfs.fit_angular(scan)
    assert angular.param("cos2theta") == pytest.approx(0.96, abs=0.02)


def test_pipeline():
    spec = sivfs.Spectrum()
    spec.wavelength_nm = [800.0 + i for i in range(11)]
    spec.intensity = [2.0] * 11
    curve = sivfs.correction_factor(spec, spec, spec, spec)
    assert all(abs(f - 1.0) < 1e-14 for f in curve.factor)
    recovered = sivfs.apply_calibration(spec, curve, 45.0)
    assert recovered.intensity[0] == pytest.approx(2.0)
