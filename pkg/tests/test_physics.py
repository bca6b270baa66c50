"""Closed-form physics against the arbitrary-precision oracle.

Scalar examples pin exact values; the property loops sweep seeded random
inputs over the physically meaningful ranges.
"""

import numpy as np
import pytest

import oracle
from thzreflect import (
    C_M_PER_S,
    EmpiricalTrend,
    MaterialClass,
    TrendParams,
    empirical_slab_reflection,
    fresnel_te,
    permittivity_drude,
    permittivity_empirical,
    permittivity_lorentz,
    phase_thickness,
    predict_reflection,
    rough_slab_reflection,
    roughness_factor,
    slab_interference_magnitude,
    trend_to_params,
)

GLASS = TrendParams(
    material_class=MaterialClass.DIELECTRIC,
    k1=0.0, b1=-14.7072,
    k2=-0.1444, b2=2.9835,
    k3=0.0767, b3=3.0687,
    k4=0.0684, b4=-2.4791,
)
STEEL = TrendParams(
    material_class=MaterialClass.METAL,
    k1=0.0, b1=-15.0567,
    k2=0.0, b2=4.4962,
    k3=None, b3=None,
    k4=0.0, b4=-1.0056,
)


def close(a, b, rel=1e-12):
    b = complex(b)
    return abs(complex(a) - b) <= rel * max(abs(b), 1.0)


# ---------------------------------------------------------------- permittivity

def test_empirical_permittivity_zero_conductivity():
    assert permittivity_empirical(5.0, 0.0, 350.0) == 5.0 - 0.0j
    assert permittivity_empirical(1.0, 0.0, 42.0) == 1.0 - 0.0j


def test_empirical_permittivity_conductive():
    got = permittivity_empirical(6.31, 0.42, 350.0)
    assert close(got, oracle.eta_empirical(6.31, 0.42, 350))
    assert got.imag < 0.0


def test_empirical_permittivity_rejects_bad_frequency():
    with pytest.raises(ValueError):
        permittivity_empirical(5.0, 0.1, 0.0)


def test_lorentz_vanishing_strength():
    assert close(permittivity_lorentz(1e-30, 1000.0, 0.01, 333.0), 1.0)


def test_lorentz_exact_rational_point():
    # denominator 1000 - 0.01 * 300^2 + j300 = 100 + j300
    got = permittivity_lorentz(1000.0, 1000.0, 0.01, 300.0)
    assert close(got, 2.0 - 3.0j, rel=1e-14)
    assert close(got, oracle.eta_lorentz(1000, 1000, 0.01, 300))


def test_lorentz_glass_trend_point_is_lossy():
    _, p2, p3, p4 = trend_to_params(GLASS, 350.0)
    eta = permittivity_lorentz(p2, p3, p4, 350.0)
    assert np.isfinite(eta.real) and np.isfinite(eta.imag)
    assert eta.imag < 0.0
    assert close(eta, oracle.eta_lorentz(p2, p3, p4, 350))


def test_drude_vanishing_plasma_term():
    assert close(permittivity_drude(1e-30, 0.1, 350.0), 1.0)


def test_drude_stainless_steel_point():
    got = permittivity_drude(10**4.4962, 10**-1.0056, 350.0)
    assert close(got, oracle.eta_drude(10**4.4962, 10**-1.0056, 350))
    assert got.real < -1e4 and got.imag < -1e4


def test_drude_dc_limit():
    got = permittivity_drude(100.0, 1.0, 1e-6)
    assert abs(got.real - (1.0 - 100.0)) < 1e-3


# -------------------------------------------------------------------- fresnel

def test_fresnel_index_matched_vanishes():
    assert abs(fresnel_te(1.0 + 0.0j, 37.0)) < 1e-15
    assert abs(fresnel_te(1.0 + 0.0j, 0.0)) < 1e-15


def test_fresnel_normal_incidence():
    assert close(fresnel_te(4.0 + 0.0j, 0.0), -1.0 / 3.0, rel=1e-14)


def test_fresnel_lossy_against_oracle():
    got = fresnel_te(2.25 - 0.1j, 30.0)
    assert close(got, oracle.fresnel_te(2.25 - 0.1j, 30))
    assert 0.0 < abs(got) < 1.0


def test_fresnel_angle_domain():
    with pytest.raises(ValueError):
        fresnel_te(2.0 + 0.0j, 90.0)
    with pytest.raises(ValueError):
        fresnel_te(2.0 + 0.0j, -0.5)


# ------------------------------------------------------------ phase thickness

def test_phase_half_wave_slab():
    f = 350.0
    lam = C_M_PER_S / (f * 1e9)
    q = phase_thickness(1.0 + 0.0j, f, 0.0, lam / 2.0)
    assert close(q, np.pi, rel=1e-12)


def test_phase_oblique_cosine():
    f = 300.0
    lam = C_M_PER_S / (f * 1e9)
    q = phase_thickness(1.0 + 0.0j, f, 60.0, lam)
    assert close(q, np.pi, rel=1e-12)


def test_phase_against_oracle():
    got = phase_thickness(2.9 - 0.05j, 350.0, 30.0, 0.003)
    assert close(got, oracle.phase_thickness(2.9 - 0.05j, 350, 30, 0.003))


def test_phase_validates_geometry():
    for bad in [(0.0, 30.0, 0.005), (350.0, 90.0, 0.005), (350.0, 30.0, 0.0)]:
        with pytest.raises(ValueError):
            phase_thickness(2.0 + 0.0j, *bad)


# ----------------------------------------------------------- slab interference

def test_interference_null_at_pi():
    assert slab_interference_magnitude(0.5 + 0.0j, np.pi) < 1e-12


def test_interference_thick_lossy_limit():
    r = -1.0 / 3.0
    got = slab_interference_magnitude(r, 1.0 - 25.0j)
    assert abs(got - abs(r)) < 1e-6


def test_interference_against_oracle():
    got = slab_interference_magnitude(-0.4 + 0.05j, 1.2 - 0.3j)
    ref = float(oracle.slab_magnitude(-0.4 + 0.05j, 1.2 - 0.3j))
    assert abs(got - ref) < 1e-12


def test_interference_degenerate_denominator():
    # r = 1 with real q makes 1 - r^2 e^{-j2q} hit zero at q = 0
    with pytest.raises(ValueError):
        slab_interference_magnitude(1.0 + 0.0j, 0.0)


def test_interference_periodicity_in_real_phase():
    rng = np.random.default_rng(7)
    for _ in range(200):
        eta = rng.uniform(1.5, 12.0)
        theta = rng.uniform(0.0, 85.0)
        r = fresnel_te(eta + 0.0j, theta)
        q = rng.uniform(0.0, 20.0)
        a = slab_interference_magnitude(r, q)
        b = slab_interference_magnitude(r, q + np.pi)
        assert abs(a - b) < 1e-12


# ------------------------------------------------------------------- roughness

def test_roughness_smooth_surface():
    assert roughness_factor(0.0, 350.0, 30.0) == 1.0


def test_roughness_glass_scale_is_negligible():
    got = roughness_factor(10**-14.7072, 350.0, 30.0)
    assert abs(got - float(oracle.roughness(10**-14.7072, 350, 30))) < 1e-14
    assert 0.0 < 1.0 - got < 1e-9


def test_roughness_unit_argument():
    # p1 f^2 cos^2(0) = 1 exactly
    p1 = 1.0 / 350.0**2
    got = roughness_factor(p1, 350.0, 0.0)
    assert abs(got - 0.46575960759364043) < 1e-13


def test_roughness_monotone_in_argument():
    rng = np.random.default_rng(11)
    for _ in range(50):
        f = rng.uniform(300.0, 400.0)
        theta = rng.uniform(0.0, 80.0)
        p1s = np.sort(rng.uniform(0.0, 1e-4, 20))
        vals = [roughness_factor(p1, f, theta) for p1 in p1s]
        assert vals[0] <= 1.0
        assert np.all(np.diff(vals) <= 1e-15)
    assert roughness_factor(0.0, 300.0, 0.0) == 1.0


# ----------------------------------------------------------------- trend types

def test_trend_params_class_consistency():
    with pytest.raises(ValueError):
        TrendParams(MaterialClass.METAL, 0.0, -15.0, 0.0, 4.5, 0.1, 3.0, 0.0, -1.0)
    with pytest.raises(ValueError):
        TrendParams(MaterialClass.DIELECTRIC, 0.0, -14.0, 0.0, 3.0, None, None, 0.0, -2.5)


def test_trend_params_dict_round_trip():
    for trend in (GLASS, STEEL):
        assert TrendParams.from_dict(trend.to_dict()) == trend


def test_trend_to_params_identity_map():
    flat = TrendParams(MaterialClass.DIELECTRIC, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    assert trend_to_params(flat, 350.0) == (1.0, 1.0, 1.0, 1.0)


def test_trend_to_params_glass_row():
    p1, p2, p3, p4 = trend_to_params(GLASS, 350.0)
    ref = oracle.trend_params(
        {"p2": -0.1444, "p3": 0.0767, "p4": 0.0684},
        {"p1": -14.7072, "p2": 2.9835, "p3": 3.0687, "p4": -2.4791},
        350,
    )
    for got, name in ((p1, "p1"), (p2, "p2"), (p3, "p3"), (p4, "p4")):
        assert abs(got - float(ref[name])) <= 1e-12 * float(ref[name])


def test_trend_to_params_metal_is_flat():
    p1, p2, p3, p4 = trend_to_params(STEEL, 400.0)
    assert p3 is None
    assert p2 == 10**4.4962 and p4 == 10**-1.0056
    again = trend_to_params(STEEL, 300.0)
    assert (p2, p4) == (again[1], again[3])


def test_trend_to_params_overflow():
    hot = TrendParams(MaterialClass.DIELECTRIC, 0.0, -14.0, 0.0, 301.0, 0.0, 3.0, 0.0, -2.5)
    with pytest.raises(OverflowError):
        trend_to_params(hot, 350.0)


# ------------------------------------------------------------ composed models

def test_composed_glass_point_against_oracle():
    p1, p2, p3, p4 = trend_to_params(GLASS, 350.0)
    got = rough_slab_reflection(p1, p2, p3, p4, 350.0, 30.0, 0.005)
    ref = float(oracle.gamma_dispersive("dielectric", p1, p2, p3, p4, 350, 30, 0.005))
    assert abs(got - ref) <= 1e-12 * ref
    assert got == predict_reflection(GLASS, 350.0, 30.0, 0.005)


def test_composed_steel_point_near_one():
    got = predict_reflection(STEEL, 350.0, 30.0, 0.002)
    p1, p2, _, p4 = trend_to_params(STEEL, 350.0)
    ref = float(oracle.gamma_dispersive("metal", p1, p2, None, p4, 350, 30, 0.002))
    assert abs(got - ref) <= 1e-12
    assert abs(got - 1.0) < 0.05


def test_composed_vanishing_contrast_gives_zero():
    got = rough_slab_reflection(0.0, 1e-30, 1000.0, 0.003, 350.0, 30.0, 0.005)
    assert got < 1e-12


def test_composed_requires_p3_for_dielectrics():
    with pytest.raises(ValueError):
        rough_slab_reflection(0.0, 100.0, None, 0.003, 350.0, 30.0, 0.005)


def test_composed_validates_geometry():
    with pytest.raises(ValueError):
        predict_reflection(GLASS, -1.0, 30.0, 0.005)
    with pytest.raises(ValueError):
        predict_reflection(GLASS, 350.0, 95.0, 0.005)
    with pytest.raises(ValueError):
        predict_reflection(GLASS, 350.0, 30.0, -0.005)


def test_baseline_examples():
    assert empirical_slab_reflection(1.0, 0.0, 350.0, 25.0, 0.004) < 1e-15
    # quarter-wave slab in a lossless eps = 4 medium reflects 0.6
    f = 300.0
    d = C_M_PER_S / (8.0 * f * 1e9)
    got = empirical_slab_reflection(4.0, 0.0, f, 0.0, d)
    assert abs(got - 0.6) < 1e-12
    got = empirical_slab_reflection(6.31, 0.3, 350.0, 30.0, 0.005)
    ref = float(oracle.gamma_empirical(6.31, 0.3, 350, 30, 0.005))
    assert abs(got - ref) <= 1e-12


def test_empirical_trend_round_trip_and_predict():
    trend = EmpiricalTrend(k_eps=0.1, b_eps=0.7, k_sig=-0.2, b_sig=-0.5)
    assert EmpiricalTrend.from_dict(trend.to_dict()) == trend
    eps_r, sigma = trend.params_at(350.0)
    direct = empirical_slab_reflection(eps_r, sigma, 350.0, 40.0, 0.005)
    assert trend.predict(350.0, 40.0, 0.005) == direct


# ----------------------------------------------------------------- properties

def test_passivity_bounds_reflection():
    """Any passive permittivity keeps |R| <= 1 and the slab magnitude in [0, 1]."""
    rng = np.random.default_rng(2024)
    for _ in range(500):
        eta = complex(rng.uniform(0.05, 30.0), -rng.uniform(0.0, 40.0))
        theta = rng.uniform(0.0, 89.9)
        f = rng.uniform(300.0, 400.0)
        d = rng.uniform(1e-4, 0.02)
        r = fresnel_te(eta, theta)
        assert abs(r) <= 1.0 + 1e-12
        q = phase_thickness(eta, f, theta, d)
        gamma = slab_interference_magnitude(r, q)
        assert -1e-15 <= gamma <= 1.0 + 1e-12


def test_unit_path_consistency():
    """Composing the pieces by hand in SI units reproduces the GHz API."""
    rng = np.random.default_rng(5)
    for _ in range(100):
        p1 = 10 ** rng.uniform(-16.0, -13.0)
        p2 = 10 ** rng.uniform(2.3, 3.2)
        p3 = 10 ** rng.uniform(2.6, 3.3)
        p4 = 10 ** rng.uniform(-2.9, -2.2)
        f = rng.uniform(300.0, 400.0)
        theta = rng.uniform(0.0, 85.0)
        d = rng.uniform(0.001, 0.01)
        eta = permittivity_lorentz(p2, p3, p4, f)
        s = np.sqrt(eta - np.sin(np.deg2rad(theta)) ** 2)
        if s.imag > 0:
            s = -s
        q_manual = 2.0 * np.pi * d * (f * 1e9) / C_M_PER_S * s
        manual = roughness_factor(p1, f, theta) * slab_interference_magnitude(
            fresnel_te(eta, theta), q_manual
        )
        api = rough_slab_reflection(p1, p2, p3, p4, f, theta, d)
        assert abs(api - manual) <= 1e-12 * max(manual, 1e-6)
