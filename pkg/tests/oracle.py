"""Arbitrary-precision reference implementations for the test suite.

Everything here is written directly from the closed-form expressions using
mpmath at 50 significant digits, independently of the package code, so the
fast float64 implementations can be checked against it.
"""

from __future__ import annotations

import mpmath as mp

mp.mp.dps = 50

C_M_PER_S = mp.mpf(299792458)
EPS0_F_PER_M = mp.mpf("8.8541878128e-12")
J = mp.mpc(0, 1)


def sqrt_lossy(z):
    """Principal square root reflected so the imaginary part is <= 0."""
    w = mp.sqrt(mp.mpc(z))
    if mp.im(w) > 0:
        w = -w
    return w


def i0_scaled(x):
    """exp(-x) * I0(x) via mpmath's Bessel implementation."""
    x = mp.mpf(x)
    return mp.exp(-x) * mp.besseli(0, x)


def i0_scaled_series(x, terms=50):
    """exp(-x) * sum_m (x/2)^(2m) / (m!)^2, truncated power series."""
    x = mp.mpf(x)
    term = mp.mpf(1)
    total = mp.mpf(1)
    for m in range(1, terms):
        term = term * (x / 2) ** 2 / mp.mpf(m) ** 2
        total += term
    return mp.exp(-x) * total


def i0_scaled_asymptotic(x, terms=12):
    """(2 pi x)^(-1/2) * (1 + 1/(8x) + 9/(128 x^2) + ...), large-x form."""
    x = mp.mpf(x)
    term = mp.mpf(1)
    total = mp.mpf(1)
    for k in range(1, terms):
        term = term * mp.mpf(2 * k - 1) ** 2 / (8 * k * x)
        total += term
    return total / mp.sqrt(2 * mp.pi * x)


def eta_empirical(eps_r, sigma_s_per_m, f_ghz):
    f_hz = mp.mpf(f_ghz) * mp.mpf("1e9")
    return mp.mpc(eps_r) - J * mp.mpf(sigma_s_per_m) / (2 * mp.pi * f_hz * EPS0_F_PER_M)


def eta_lorentz(p2, p3, p4, f_ghz):
    f = mp.mpf(f_ghz)
    return 1 + mp.mpf(p2) / (mp.mpf(p3) - mp.mpf(p4) * f * f + J * f)


def eta_drude(p2, p4, f_ghz):
    f = mp.mpf(f_ghz) / 1000
    return 1 - mp.mpf(p2) / (mp.mpf(p4) - J * f)


def fresnel_te(eta, theta_deg):
    th = mp.radians(mp.mpf(theta_deg))
    s = sqrt_lossy(mp.mpc(eta) - mp.sin(th) ** 2)
    return (mp.cos(th) - s) / (mp.cos(th) + s)


def phase_thickness(eta, f_ghz, theta_deg, d_m):
    lam = C_M_PER_S / (mp.mpf(f_ghz) * mp.mpf("1e9"))
    th = mp.radians(mp.mpf(theta_deg))
    s = sqrt_lossy(mp.mpc(eta) - mp.sin(th) ** 2)
    return 2 * mp.pi * mp.mpf(d_m) / lam * s


def slab_magnitude(r, q):
    e = mp.exp(-2 * J * mp.mpc(q))
    r = mp.mpc(r)
    return abs(r * (1 - e) / (1 - r * r * e))


def roughness(p1, f_ghz, theta_deg):
    th = mp.radians(mp.mpf(theta_deg))
    x = mp.mpf(p1) * mp.mpf(f_ghz) ** 2 * mp.cos(th) ** 2
    return i0_scaled(x)


def trend_params(k, b, f_ghz):
    """p_l = 10^(k_l * f + b_l) with f in THz; k/b keyed by parameter name."""
    f = mp.mpf(f_ghz) / 1000
    return {name: mp.power(10, mp.mpf(k.get(name, 0)) * f + mp.mpf(b[name]))
            for name in b}


def gamma_dispersive(material_class, p1, p2, p3, p4, f_ghz, theta_deg, d_m):
    """Rough-slab reflection magnitude with the class-dispatched permittivity."""
    if material_class == "metal":
        eta = eta_drude(p2, p4, f_ghz)
    else:
        eta = eta_lorentz(p2, p3, p4, f_ghz)
    r = fresnel_te(eta, theta_deg)
    q = phase_thickness(eta, f_ghz, theta_deg, d_m)
    return roughness(p1, f_ghz, theta_deg) * slab_magnitude(r, q)


def gamma_empirical(eps_r, sigma_s_per_m, f_ghz, theta_deg, d_m):
    """Smooth-slab reflection magnitude with the conductivity permittivity."""
    eta = eta_empirical(eps_r, sigma_s_per_m, f_ghz)
    r = fresnel_te(eta, theta_deg)
    q = phase_thickness(eta, f_ghz, theta_deg, d_m)
    return slab_magnitude(r, q)
