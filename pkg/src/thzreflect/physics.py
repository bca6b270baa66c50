"""Closed-form reflection physics for slabs in the 300-400 GHz band.

Everything here is a pure function of its arguments. Frequencies are
gigahertz at every public boundary; only the free-space wavelength is
computed in SI units internally. The time convention is e^{+jwt}, so a
passive medium has Im(eta) <= 0 and transmitted waves decay on the
Im <= 0 square-root branch.

Scalar inputs give scalar outputs; array inputs broadcast.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .specfun import bessel_i0_scaled, complex_sqrt_lossy

__all__ = [
    "C_M_PER_S",
    "EPS0_F_PER_M",
    "MaterialClass",
    "TrendParams",
    "EmpiricalTrend",
    "permittivity_empirical",
    "permittivity_lorentz",
    "permittivity_drude",
    "fresnel_te",
    "phase_thickness",
    "slab_interference_magnitude",
    "roughness_factor",
    "trend_to_params",
    "rough_slab_reflection",
    "empirical_slab_reflection",
    "predict_reflection",
]

C_M_PER_S = 299792458.0
EPS0_F_PER_M = 8.8541878128e-12

# Degenerate-denominator threshold; unreachable for passive media but kept
# as an explicit guard rather than letting a division silently overflow.
_DEGENERATE = 1e-300

# Rounding can graze 1 from above by a few ulp when a fit explores
# near-total-reflection parameters; only a clear breach of [0, 1] trips.
_RANGE_TOL = 1e-12


def _check_range(gamma) -> None:
    arr = np.asarray(gamma)
    if np.any(arr < 0.0) or np.any(arr > 1.0 + _RANGE_TOL) or not np.all(
        np.isfinite(arr)
    ):
        raise AssertionError("reflection magnitude left [0, 1]")


class MaterialClass(str, Enum):
    """Dispersion family selector: resonant dielectric or free-carrier metal."""

    DIELECTRIC = "dielectric"
    METAL = "metal"


def _validate_geometry(f_ghz, theta_deg, d_m) -> None:
    if np.any(np.asarray(f_ghz, dtype=float) <= 0.0):
        raise ValueError("frequency must be positive (GHz)")
    theta = np.asarray(theta_deg, dtype=float)
    if np.any((theta < 0.0) | (theta >= 90.0)):
        raise ValueError("incidence angle must lie in [0, 90) degrees")
    if np.any(np.asarray(d_m, dtype=float) <= 0.0):
        raise ValueError("thickness must be positive (m)")


def permittivity_empirical(eps_r, sigma, f_ghz):
    """Frequency-flat relative permittivity with ohmic loss.

    eta = eps_r - j sigma / (2 pi f eps0), with sigma in S/m and f
    converted to Hz inside.

    Args:
        eps_r: real relative permittivity, >= 1 for physical media.
        sigma: conductivity in S/m, >= 0.
        f_ghz: frequency in GHz, > 0.

    Returns:
        Complex permittivity with Im <= 0.
    """
    f = np.asarray(f_ghz, dtype=float)
    if np.any(f <= 0.0):
        raise ValueError("frequency must be positive (GHz)")
    eta = eps_r - 1j * np.asarray(sigma, dtype=float) / (
        2.0 * np.pi * f * 1e9 * EPS0_F_PER_M
    )
    return complex(eta) if eta.ndim == 0 else eta


def permittivity_lorentz(p2, p3, p4, f_ghz):
    """Single-resonance dielectric permittivity, f in GHz.

    eta = 1 + p2 / (p3 - p4 f^2 + j f). The +j f damping term keeps
    Im(eta) <= 0 under the e^{+jwt} convention.
    """
    f = np.asarray(f_ghz, dtype=float)
    eta = 1.0 + np.asarray(p2) / (np.asarray(p3) - np.asarray(p4) * f * f + 1j * f)
    return complex(eta) if eta.ndim == 0 else eta


def permittivity_drude(p2, p4, f_ghz):
    """Free-carrier metal permittivity, f in THz.

    eta = 1 - p2 / (p4 - j f_thz). Conductor parameters live on terahertz
    scales, so the damping axis uses f/1000; the -j f sign keeps
    Im(eta) <= 0 under the e^{+jwt} convention.
    """
    f_thz = np.asarray(f_ghz, dtype=float) / 1000.0
    eta = 1.0 - np.asarray(p2) / (np.asarray(p4) - 1j * f_thz)
    return complex(eta) if eta.ndim == 0 else eta


def fresnel_te(eta, theta_deg):
    """TE (perpendicular polarization) face reflection coefficient.

    R = (cos t - s) / (cos t + s) with s = sqrt(eta - sin^2 t) taken on
    the decaying (Im <= 0) branch.

    Raises:
        ValueError: if theta is outside [0, 90) or the denominator is
            degenerate (|cos t + s| < 1e-300).
    """
    theta = np.asarray(theta_deg, dtype=float)
    if np.any((theta < 0.0) | (theta >= 90.0)):
        raise ValueError("incidence angle must lie in [0, 90) degrees")
    rad = np.deg2rad(theta)
    cos_t = np.cos(rad)
    s = complex_sqrt_lossy(np.asarray(eta, dtype=complex) - np.sin(rad) ** 2)
    den = cos_t + s
    if np.any(np.abs(den) < _DEGENERATE):
        raise ValueError("degenerate Fresnel denominator")
    r = (cos_t - s) / den
    return complex(r) if r.ndim == 0 else r


def phase_thickness(eta, f_ghz, theta_deg, d_m):
    """One-way complex phase q accumulated across the slab.

    q = (2 pi d / lambda) sqrt(eta - sin^2 t) with lambda = c / f in SI
    units; the square root shares the Im <= 0 branch with fresnel_te, so
    e^{-j2q} never grows.
    """
    _validate_geometry(f_ghz, theta_deg, d_m)
    f = np.asarray(f_ghz, dtype=float)
    rad = np.deg2rad(np.asarray(theta_deg, dtype=float))
    s = complex_sqrt_lossy(np.asarray(eta, dtype=complex) - np.sin(rad) ** 2)
    q = 2.0 * np.pi * np.asarray(d_m, dtype=float) * (f * 1e9) / C_M_PER_S * s
    return complex(q) if q.ndim == 0 else q


def slab_interference_magnitude(r, q):
    """|Gamma| of a single slab from face reflection r and phase q.

    Sums the internal multiple reflections in closed form:
    |r (1 - e^{-j2q}) / (1 - r^2 e^{-j2q})|. For |r| < 1 and Im(q) <= 0
    the result is strictly below 1.

    Raises:
        ValueError: on a degenerate denominator (only reachable for
            non-passive inputs).
    """
    e = np.exp(-2j * np.asarray(q, dtype=complex))
    rr = np.asarray(r, dtype=complex)
    den = 1.0 - rr * rr * e
    if np.any(np.abs(den) < _DEGENERATE):
        raise ValueError("degenerate interference denominator")
    mag = np.abs(rr * (1.0 - e) / den)
    return float(mag) if mag.ndim == 0 else mag


def roughness_factor(p1, f_ghz, theta_deg):
    """Specular attenuation from surface roughness, in (0, 1].

    rho = e^{-x} I0(x) with x = p1 f^2 cos^2 t and f in GHz, evaluated
    through the scaled Bessel routine so large x never overflows.
    """
    f = np.asarray(f_ghz, dtype=float)
    rad = np.deg2rad(np.asarray(theta_deg, dtype=float))
    x = np.asarray(p1) * f * f * np.cos(rad) ** 2
    return bessel_i0_scaled(x)


@dataclass(frozen=True)
class TrendParams:
    """Log-linear frequency trends of the dispersion parameters.

    Each parameter follows lg p_l = k_l f + b_l with f in THz. The
    roughness scale p1 is frequency-flat (k1 = 0 by construction) and
    metals are flat in every parameter and carry no resonance term, so
    k3/b3 are None for them.
    """

    material_class: MaterialClass
    k1: float
    b1: float
    k2: float
    b2: float
    k3: float | None
    b3: float | None
    k4: float
    b4: float

    def __post_init__(self) -> None:
        cls = MaterialClass(self.material_class)
        object.__setattr__(self, "material_class", cls)
        res = (self.k3, self.b3)
        if cls is MaterialClass.METAL:
            if any(v is not None for v in res):
                raise ValueError("metal trends carry no resonance (k3/b3) term")
        elif any(v is None for v in res):
            raise ValueError("dielectric trends require k3 and b3")

    def to_dict(self) -> dict:
        return {
            "material_class": self.material_class.value,
            "k1": self.k1,
            "b1": self.b1,
            "k2": self.k2,
            "b2": self.b2,
            "k3": self.k3,
            "b3": self.b3,
            "k4": self.k4,
            "b4": self.b4,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrendParams":
        return cls(
            material_class=MaterialClass(d["material_class"]),
            k1=float(d["k1"]),
            b1=float(d["b1"]),
            k2=float(d["k2"]),
            b2=float(d["b2"]),
            k3=None if d.get("k3") is None else float(d["k3"]),
            b3=None if d.get("b3") is None else float(d["b3"]),
            k4=float(d["k4"]),
            b4=float(d["b4"]),
        )


def trend_to_params(trend: TrendParams, f_ghz):
    """Evaluate the parameter trends at the given frequencies.

    Returns (p1, p2, p3, p4) with p_l = 10^(k_l f_thz + b_l); p3 is None
    for metals.

    Raises:
        OverflowError: if any exponent magnitude exceeds 300.
    """
    f_thz = np.asarray(f_ghz, dtype=float) / 1000.0

    def materialize(k: float, b: float):
        expo = k * f_thz + b
        if np.any(np.abs(expo) > 300.0):
            raise OverflowError("trend exponent outside +-300")
        p = 10.0 ** expo
        return float(p) if p.ndim == 0 else p

    p1 = materialize(trend.k1, trend.b1)
    p2 = materialize(trend.k2, trend.b2)
    p4 = materialize(trend.k4, trend.b4)
    if trend.material_class is MaterialClass.METAL:
        return p1, p2, None, p4
    return p1, p2, materialize(trend.k3, trend.b3), p4


def rough_slab_reflection(
    p1,
    p2,
    p3,
    p4,
    f_ghz,
    theta_deg,
    d_m,
    material_class: MaterialClass = MaterialClass.DIELECTRIC,
):
    """Reflection magnitude of a rough slab with dispersive permittivity.

    Composes the class-dispatched permittivity (Lorentz for dielectrics,
    Drude for metals, which ignore p3), the TE face reflection, the slab
    interference sum, and the roughness attenuation. The result lands in
    [0, 1] naturally; if rounding ever pushed it outside, that would be a
    bug, hence the hard check instead of a clamp.

    Args:
        p1: roughness scale, >= 0.
        p2, p3, p4: dispersion parameters, > 0 (p3 None for metals).
        f_ghz: frequency in GHz.
        theta_deg: incidence angle in degrees, [0, 90).
        d_m: slab thickness in meters.
        material_class: selects the permittivity family.

    Returns:
        |Gamma| with the same broadcast shape as the inputs.
    """
    _validate_geometry(f_ghz, theta_deg, d_m)
    cls = MaterialClass(material_class)
    if cls is MaterialClass.METAL:
        eta = permittivity_drude(p2, p4, f_ghz)
    else:
        if p3 is None:
            raise ValueError("p3 is required for dielectric materials")
        eta = permittivity_lorentz(p2, p3, p4, f_ghz)
    r = fresnel_te(eta, theta_deg)
    q = phase_thickness(eta, f_ghz, theta_deg, d_m)
    gamma = roughness_factor(p1, f_ghz, theta_deg) * slab_interference_magnitude(r, q)
    _check_range(gamma)
    return gamma


def empirical_slab_reflection(eps_r, sigma, f_ghz, theta_deg, d_m):
    """Reflection magnitude of a smooth slab with ohmic-loss permittivity.

    Same interference structure as rough_slab_reflection but with the
    frequency-flat permittivity and no roughness factor; serves as the
    comparison baseline.
    """
    _validate_geometry(f_ghz, theta_deg, d_m)
    eta = permittivity_empirical(eps_r, sigma, f_ghz)
    r = fresnel_te(eta, theta_deg)
    q = phase_thickness(eta, f_ghz, theta_deg, d_m)
    gamma = slab_interference_magnitude(r, q)
    _check_range(gamma)
    return gamma


def predict_reflection(trend: TrendParams, f_ghz, theta_deg, d_m):
    """Reflection magnitude at (f, theta) for a material's fitted trends."""
    p1, p2, p3, p4 = trend_to_params(trend, f_ghz)
    return rough_slab_reflection(
        p1, p2, p3, p4, f_ghz, theta_deg, d_m, trend.material_class
    )


@dataclass(frozen=True)
class EmpiricalTrend:
    """Log-linear trends of the baseline parameters (eps_r, sigma).

    lg eps_r = k_eps f + b_eps and lg sigma = k_sig f + b_sig, f in THz.
    Both slopes are free; the baseline has no roughness term.
    """

    k_eps: float
    b_eps: float
    k_sig: float
    b_sig: float

    def params_at(self, f_ghz):
        f_thz = np.asarray(f_ghz, dtype=float) / 1000.0
        eps_r = 10.0 ** (self.k_eps * f_thz + self.b_eps)
        sigma = 10.0 ** (self.k_sig * f_thz + self.b_sig)
        if f_thz.ndim == 0:
            return float(eps_r), float(sigma)
        return eps_r, sigma

    def predict(self, f_ghz, theta_deg, d_m):
        eps_r, sigma = self.params_at(f_ghz)
        return empirical_slab_reflection(eps_r, sigma, f_ghz, theta_deg, d_m)

    def to_dict(self) -> dict:
        return {
            "k_eps": self.k_eps,
            "b_eps": self.b_eps,
            "k_sig": self.k_sig,
            "b_sig": self.b_sig,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EmpiricalTrend":
        return cls(
            k_eps=float(d["k_eps"]),
            b_eps=float(d["b_eps"]),
            k_sig=float(d["k_sig"]),
            b_sig=float(d["b_sig"]),
        )
