"""Sub-band fitting of dispersion-parameter trends.

The measured span is tiled into sub-bands. Each band's parameters are
fitted in log10 space with the LM solver, initialized from a sliding
window of previous band fits weighted by how well each one already
explains the new band. A straight line per parameter through the fitted
log10 values against band-center frequency (THz) gives the trends.

Bands are processed strictly in ascending frequency; the whole pipeline
is deterministic for fixed inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .fitting import FitError, LMConfig, levenberg_marquardt
from .physics import (
    EmpiricalTrend,
    MaterialClass,
    TrendParams,
    empirical_slab_reflection,
    predict_reflection,
    rough_slab_reflection,
)

__all__ = [
    "UnderConstrainedBandError",
    "InsufficientBandsError",
    "SubBand",
    "BandFit",
    "TrendFitConfig",
    "TrendFitResult",
    "EmpiricalFitResult",
    "GLOBAL_INIT_LOG10",
    "partition_bands",
    "weighted_initial_guess",
    "fit_band",
    "trend_regression",
    "fit_trend",
    "fit_empirical_trend",
]


class UnderConstrainedBandError(FitError):
    """A band holds fewer samples than free parameters."""


class InsufficientBandsError(FitError):
    """Too few converged band fits to regress a trend."""


# Per-class starting log10 vectors, centered on the magnitudes typical of
# building materials in this band; used when no previous band informs the
# first fit.
GLOBAL_INIT_LOG10 = {
    MaterialClass.DIELECTRIC: (-14.5, 2.9, 3.0, -2.6),
    MaterialClass.METAL: (-15.0, 4.45, -1.0),
}
_EMPIRICAL_INIT_LOG10 = (0.5, 0.0)


@dataclass(frozen=True)
class SubBand:
    """One frequency tile, half-open [f_lo, f_hi) except the last band."""

    index: int  # 1-based position in the partition
    f_lo: float
    f_hi: float

    @property
    def f_center(self) -> float:
        return 0.5 * (self.f_lo + self.f_hi)


@dataclass(frozen=True)
class BandFit:
    """One band's solver outcome.

    params holds the materialized values in family order: dielectric
    (p1, p2, p3, p4), metal (p1, p2, p4), baseline (eps_r, sigma). rmse
    is re-evaluable from params on the band's own samples.
    """

    band: SubBand
    log10_params: np.ndarray
    params: tuple
    rmse: float
    cost: float
    n_samples: int
    converged: bool
    iterations: int
    status: str


@dataclass(frozen=True)
class TrendFitConfig:
    """Pipeline settings.

    init_scoring picks the data each windowed fit is scored on when
    weighting initializers: "current" scores previous parameters on the
    new band's samples (they are about to predict it), "own" reuses each
    fit's residual on its own band.
    """

    delta_f: float = 10.0
    window: int = 3
    lm: LMConfig = field(default_factory=LMConfig)
    init_scoring: str = "current"
    weight_regression: bool = False

    def __post_init__(self) -> None:
        if self.delta_f <= 0.0:
            raise ValueError("delta_f must be positive")
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if self.init_scoring not in ("current", "own"):
            raise ValueError("init_scoring must be 'current' or 'own'")


@dataclass(frozen=True)
class TrendFitResult:
    trend: TrendParams
    band_fits: tuple[BandFit, ...]
    rmse: float
    n_samples: int


@dataclass(frozen=True)
class EmpiricalFitResult:
    trend: EmpiricalTrend
    band_fits: tuple[BandFit, ...]
    rmse: float
    n_samples: int


@dataclass(frozen=True)
class _Family:
    """Shape of one fittable model: parameter count, defaults, forward map."""

    n_params: int
    init_log10: tuple
    slope_free: tuple  # per parameter: regress a slope, or intercept only
    forward: Callable  # (log10 vector, f_ghz, theta_deg, d_m) -> gamma


def _materialize(vec: np.ndarray) -> np.ndarray:
    # the solver roams all of R^n; clip before exponentiating so a wild
    # trial stays finite and gets rejected on cost, not on overflow
    return 10.0 ** np.clip(vec, -300.0, 300.0)


def _dielectric_forward(vec, f, theta, d):
    p1, p2, p3, p4 = _materialize(vec)
    return rough_slab_reflection(
        p1, p2, p3, p4, f, theta, d, MaterialClass.DIELECTRIC
    )


def _metal_forward(vec, f, theta, d):
    p1, p2, p4 = _materialize(vec)
    return rough_slab_reflection(p1, p2, None, p4, f, theta, d, MaterialClass.METAL)


def _empirical_forward(vec, f, theta, d):
    eps_r, sigma = _materialize(vec)
    return empirical_slab_reflection(eps_r, sigma, f, theta, d)


def _family_for(material_class) -> _Family:
    cls = MaterialClass(material_class)
    if cls is MaterialClass.METAL:
        return _Family(3, GLOBAL_INIT_LOG10[cls], (False, False, False), _metal_forward)
    return _Family(
        4, GLOBAL_INIT_LOG10[cls], (False, True, True, True), _dielectric_forward
    )


_EMPIRICAL_FAMILY = _Family(2, _EMPIRICAL_INIT_LOG10, (True, True), _empirical_forward)


def _sample_arrays(samples: Sequence) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    f = np.array([s.f_ghz for s in samples], dtype=float)
    t = np.array([s.theta_deg for s in samples], dtype=float)
    g = np.array([s.gamma for s in samples], dtype=float)
    return f, t, g


def partition_bands(f_start: float, f_end: float, delta_f: float) -> list[SubBand]:
    """Tile [f_start, f_end] into ceil(span/delta_f) bands.

    All bands are delta_f wide except the last, which is truncated at
    f_end when the span does not divide evenly.
    """
    if f_end <= f_start:
        raise ValueError("empty frequency range")
    if delta_f <= 0.0:
        raise ValueError("delta_f must be positive")
    # the 1e-9 guard keeps an exactly divisible span from gaining a band
    # through float fuzz in the division
    count = max(int(np.ceil((f_end - f_start) / delta_f - 1e-9)), 1)
    bands = []
    for i in range(count):
        lo = f_start + i * delta_f
        hi = min(f_start + (i + 1) * delta_f, f_end)
        bands.append(SubBand(index=i + 1, f_lo=lo, f_hi=hi))
    return bands


def _window_init(
    prev_fits: Sequence[BandFit],
    window: int,
    family: _Family,
    f: np.ndarray,
    t: np.ndarray,
    g: np.ndarray,
    d_m: float,
    scoring: str,
) -> np.ndarray:
    recent = list(prev_fits)[-window:]
    if not recent:
        return np.array(family.init_log10, dtype=float)
    errors = np.empty(len(recent))
    for i, bf in enumerate(recent):
        if scoring == "own":
            errors[i] = bf.cost
        else:
            resid = family.forward(bf.log10_params, f, t, d_m) - g
            errors[i] = float(resid @ resid)
    tiny = errors < 1e-12
    if tiny.any():
        # an essentially perfect previous fit takes the whole weight;
        # several of them share it evenly
        weights = tiny.astype(float) / tiny.sum()
    else:
        inv = 1.0 / errors
        weights = inv / inv.sum()
    stack = np.stack([bf.log10_params for bf in recent])
    return weights @ stack


def weighted_initial_guess(
    prev_fits: Sequence[BandFit],
    band_samples: Sequence,
    window: int,
    material_class,
    d_m: float,
    scoring: str = "current",
) -> np.ndarray:
    """Initial log10 vector for the next band's fit.

    Previous fits inside the sliding window are scored (sum of squared
    residuals), weighted by normalized inverse error, and averaged in
    log10 space. With no previous fits the per-class global default is
    returned. Weights sum to 1 whenever the window is non-empty.
    """
    family = _family_for(material_class)
    f, t, g = _sample_arrays(band_samples)
    return _window_init(prev_fits, window, family, f, t, g, d_m, scoring)


def _fit_band_arrays(
    band: SubBand,
    f: np.ndarray,
    t: np.ndarray,
    g: np.ndarray,
    init: np.ndarray,
    family: _Family,
    d_m: float,
    lm_config: LMConfig,
) -> BandFit:
    def residual(vec):
        try:
            return family.forward(vec, f, t, d_m) - g
        except (AssertionError, ValueError):
            # an unphysical trial point is an infinitely bad one
            return np.full(g.shape, np.inf)

    result = levenberg_marquardt(residual, np.asarray(init, dtype=float), lm_config)
    params = tuple(float(v) for v in _materialize(result.params))
    return BandFit(
        band=band,
        log10_params=result.params,
        params=params,
        rmse=result.rmse,
        cost=result.cost,
        n_samples=int(f.size),
        converged=result.converged,
        iterations=result.iterations,
        status=result.status,
    )


def fit_band(
    band: SubBand,
    band_samples: Sequence,
    init_log10,
    material_class,
    d_m: float,
    lm_config: LMConfig | None = None,
) -> BandFit:
    """LM fit of one band's samples in log10 parameter space.

    Raises:
        UnderConstrainedBandError: with fewer samples than parameters.
    """
    family = _family_for(material_class)
    if len(band_samples) < family.n_params:
        raise UnderConstrainedBandError(
            f"band {band.index} has {len(band_samples)} samples, "
            f"needs >= {family.n_params}"
        )
    f, t, g = _sample_arrays(band_samples)
    return _fit_band_arrays(
        band, f, t, g, np.asarray(init_log10), family, d_m, lm_config or LMConfig()
    )


def _regress(
    x: np.ndarray,
    stack: np.ndarray,
    slope_free: Sequence[bool],
    weights: np.ndarray | None,
) -> tuple[list[float], list[float]]:
    w = np.ones(x.size) if weights is None else np.asarray(weights, dtype=float)
    wsum = float(w.sum())
    xbar = float(w @ x) / wsum
    ks: list[float] = []
    bs: list[float] = []
    for col in range(stack.shape[1]):
        y = stack[:, col]
        ybar = float(w @ y) / wsum
        k = 0.0
        if slope_free[col] and x.size >= 2:
            dx = x - xbar
            denom = float(w @ (dx * dx))
            if denom > 0.0:
                k = float(w @ (dx * (y - ybar))) / denom
        ks.append(k)
        bs.append(ybar - k * xbar)
    return ks, bs


def _regress_fits(
    fits: Sequence[BandFit],
    slope_free: Sequence[bool],
    weight_by_rmse: bool,
) -> tuple[list[float], list[float]]:
    centers_thz = np.array([bf.band.f_center for bf in fits]) / 1000.0
    stack = np.stack([bf.log10_params for bf in fits])
    weights = None
    if weight_by_rmse:
        rmses = np.array([bf.rmse for bf in fits])
        weights = 1.0 / np.maximum(rmses, 1e-12) ** 2
    return _regress(centers_thz, stack, slope_free, weights)


def trend_regression(
    band_fits: Sequence[BandFit],
    material_class,
    weight_by_rmse: bool = False,
    intercept_only: bool = False,
) -> TrendParams:
    """Straight-line fit of each log10 parameter against band center (THz).

    Ordinary least squares per parameter over the converged band fits.
    The roughness scale is always intercept-only (its slope is fixed at
    zero), and metals are intercept-only in every parameter; pass
    intercept_only=True to force the same for a single-band run.

    Raises:
        InsufficientBandsError: fewer than 2 converged fits when a slope
            is requested, or none at all.
    """
    cls = MaterialClass(material_class)
    family = _family_for(cls)
    usable = [bf for bf in band_fits if bf.converged]
    slope_free = (
        (False,) * family.n_params if intercept_only else family.slope_free
    )
    needed = 2 if any(slope_free) else 1
    if len(usable) < needed:
        raise InsufficientBandsError(
            f"{len(usable)} converged band fits, need >= {needed}"
        )
    ks, bs = _regress_fits(usable, slope_free, weight_by_rmse)
    if cls is MaterialClass.METAL:
        return TrendParams(
            material_class=cls,
            k1=ks[0],
            b1=bs[0],
            k2=ks[1],
            b2=bs[1],
            k3=None,
            b3=None,
            k4=ks[2],
            b4=bs[2],
        )
    return TrendParams(
        material_class=cls,
        k1=ks[0],
        b1=bs[0],
        k2=ks[1],
        b2=bs[1],
        k3=ks[2],
        b3=bs[2],
        k4=ks[3],
        b4=bs[3],
    )


def _run_bands(
    samples: Sequence,
    family: _Family,
    d_m: float,
    f_start: float | None,
    f_end: float | None,
    cfg: TrendFitConfig,
):
    if not samples:
        raise ValueError("no samples to fit")
    f_all, t_all, g_all = _sample_arrays(samples)
    lo = float(f_all.min()) if f_start is None else float(f_start)
    hi = float(f_all.max()) if f_end is None else float(f_end)
    bands = partition_bands(lo, hi, cfg.delta_f)
    fits: list[BandFit] = []
    for band in bands:
        if band.index == len(bands):
            mask = (f_all >= band.f_lo) & (f_all <= band.f_hi)
        else:
            mask = (f_all >= band.f_lo) & (f_all < band.f_hi)
        if int(mask.sum()) < family.n_params:
            raise UnderConstrainedBandError(
                f"band {band.index} [{band.f_lo:g}, {band.f_hi:g}] GHz has "
                f"{int(mask.sum())} samples, needs >= {family.n_params}"
            )
        f, t, g = f_all[mask], t_all[mask], g_all[mask]
        init = _window_init(fits, cfg.window, family, f, t, g, d_m, cfg.init_scoring)
        fits.append(_fit_band_arrays(band, f, t, g, init, family, d_m, cfg.lm))
    in_range = (f_all >= bands[0].f_lo) & (f_all <= bands[-1].f_hi)
    return bands, fits, (f_all[in_range], t_all[in_range], g_all[in_range])


def _require_converged(bands, fits) -> None:
    usable = sum(1 for bf in fits if bf.converged)
    needed = 1 if len(bands) == 1 else 2
    if usable < needed:
        raise InsufficientBandsError(
            f"only {usable} of {len(bands)} band fits converged"
        )


def fit_trend(
    samples: Sequence,
    material_class,
    d_m: float,
    f_start: float | None = None,
    f_end: float | None = None,
    config: TrendFitConfig | None = None,
) -> TrendFitResult:
    """Fit per-band dispersion parameters and regress their trends.

    Samples outside [f_start, f_end] are ignored; the range defaults to
    the data's span. Non-converged bands stay in the diagnostics but are
    left out of the regression. A partition with a single band falls back
    to intercept-only trends (one global fit).

    Raises:
        UnderConstrainedBandError: a band has too few samples.
        InsufficientBandsError: fewer than two bands converged (one, for
            a single-band partition).
    """
    cfg = config or TrendFitConfig()
    cls = MaterialClass(material_class)
    family = _family_for(cls)
    bands, fits, (f, t, g) = _run_bands(samples, family, d_m, f_start, f_end, cfg)
    _require_converged(bands, fits)
    trend = trend_regression(
        fits, cls, weight_by_rmse=cfg.weight_regression,
        intercept_only=len(bands) == 1,
    )
    pred = predict_reflection(trend, f, t, d_m)
    rmse = float(np.sqrt(np.mean((pred - g) ** 2)))
    return TrendFitResult(
        trend=trend, band_fits=tuple(fits), rmse=rmse, n_samples=int(f.size)
    )


def fit_empirical_trend(
    samples: Sequence,
    d_m: float,
    f_start: float | None = None,
    f_end: float | None = None,
    config: TrendFitConfig | None = None,
) -> EmpiricalFitResult:
    """Baseline fit: smooth slab with (eps_r, sigma) on their own trends.

    Runs the identical band pipeline as fit_trend so comparisons against
    the dispersive model are apples to apples; both baseline parameters
    regress with free slopes.
    """
    cfg = config or TrendFitConfig()
    bands, fits, (f, t, g) = _run_bands(
        samples, _EMPIRICAL_FAMILY, d_m, f_start, f_end, cfg
    )
    _require_converged(bands, fits)
    usable = [bf for bf in fits if bf.converged]
    slope_free = (False, False) if len(bands) == 1 else (True, True)
    ks, bs = _regress_fits(usable, slope_free, cfg.weight_regression)
    trend = EmpiricalTrend(k_eps=ks[0], b_eps=bs[0], k_sig=ks[1], b_sig=bs[1])
    pred = trend.predict(f, t, d_m)
    rmse = float(np.sqrt(np.mean((pred - g) ** 2)))
    return EmpiricalFitResult(
        trend=trend, band_fits=tuple(fits), rmse=rmse, n_samples=int(f.size)
    )
