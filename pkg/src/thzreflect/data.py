"""Measurement ingestion, synthetic data, splits, and the material database.

CSV conventions (UTF-8, comma separated, '.' decimal):
  pre-ratioed samples: header freq_ghz,angle_deg,gamma
  raw sweeps:          header freq_ghz,angle_deg,s21_mag
Lines starting with '#' are comments; extra columns are ignored.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .physics import MaterialClass, TrendParams, predict_reflection
from .subband import partition_bands

__all__ = [
    "DataError",
    "SweepRecord",
    "MeasurementSample",
    "Dataset",
    "MaterialRecord",
    "DEFAULT_FREQ_GRID",
    "DEFAULT_THETA_GRID",
    "OUTLIER_GAMMA",
    "NOISE_FLOOR",
    "linear_grid",
    "ratio_reflection",
    "stratified_split",
    "material_names",
    "get_material",
    "synthesize_dataset",
    "load_samples",
    "load_sweeps",
    "save_samples",
]


class DataError(ValueError):
    """Malformed, inconsistent, or out-of-range measurement data."""


# Measured metal-reference ratios can slightly exceed 1; anything past
# this gate is an outlier, not a reflection coefficient.
OUTLIER_GAMMA = 1.5

# Reference sweep magnitudes below this are indistinguishable from noise
# and make the ratio meaningless.
NOISE_FLOOR = 1e-7

# Default synthesis grids: 300..400 GHz at 1201 points, angles 10:10:80.
DEFAULT_FREQ_GRID = np.linspace(300.0, 400.0, 1201)
DEFAULT_THETA_GRID = np.arange(10.0, 90.0, 10.0)

_STRATUM_WIDTH_GHZ = 10.0


@dataclass(frozen=True)
class SweepRecord:
    """One point of a raw transmission sweep (linear magnitude)."""

    f_ghz: float
    s21_mag: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "f_ghz", float(self.f_ghz))
        object.__setattr__(self, "s21_mag", float(self.s21_mag))
        if not np.isfinite(self.f_ghz) or self.f_ghz <= 0.0:
            raise DataError(f"sweep frequency must be positive, got {self.f_ghz}")
        if not np.isfinite(self.s21_mag) or self.s21_mag < 0.0:
            raise DataError(f"sweep magnitude must be >= 0, got {self.s21_mag}")


@dataclass(frozen=True)
class MeasurementSample:
    """One (frequency, angle, reflection magnitude) triple."""

    f_ghz: float
    theta_deg: float
    gamma: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "f_ghz", float(self.f_ghz))
        object.__setattr__(self, "theta_deg", float(self.theta_deg))
        object.__setattr__(self, "gamma", float(self.gamma))
        if not np.isfinite(self.f_ghz) or self.f_ghz <= 0.0:
            raise DataError(f"frequency must be positive, got {self.f_ghz}")
        if not (0.0 <= self.theta_deg < 90.0):
            raise DataError(
                f"incidence angle must lie in [0, 90), got {self.theta_deg}"
            )
        if not (0.0 <= self.gamma <= OUTLIER_GAMMA):
            raise DataError(
                f"reflection magnitude must lie in [0, {OUTLIER_GAMMA}], "
                f"got {self.gamma}"
            )


@dataclass(frozen=True)
class Dataset:
    """Immutable bundle of samples plus the metadata a fit needs."""

    samples: tuple
    material: str
    thickness_m: float
    material_class: MaterialClass
    note: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "samples", tuple(self.samples))
        object.__setattr__(self, "material_class", MaterialClass(self.material_class))
        if not self.samples:
            raise DataError("dataset is empty")
        if self.thickness_m <= 0.0:
            raise DataError("thickness must be positive")

    def __len__(self) -> int:
        return len(self.samples)


@dataclass(frozen=True)
class MaterialRecord:
    """One database row: fitted trends plus bookkeeping."""

    name: str
    material_class: MaterialClass
    trend: TrendParams
    thickness_m: float
    reference_rmse: float


def linear_grid(start: float, step: float, end: float) -> np.ndarray:
    """Inclusive start:step:end grid, tolerant of float endpoint fuzz."""
    if step <= 0.0:
        raise ValueError("step must be positive")
    if end < start:
        raise ValueError("grid end precedes start")
    n = int(np.floor((end - start) / step + 1e-6)) + 1
    return start + step * np.arange(n)


def ratio_reflection(
    material_sweeps: dict,
    reference_sweeps: dict,
    noise_floor: float = NOISE_FLOOR,
) -> tuple[list[MeasurementSample], int]:
    """Reflection magnitudes as the pointwise material/reference ratio.

    Both arguments map incidence angle (degrees) to a frequency-sorted
    list of SweepRecord. Points whose reference magnitude sits below the
    noise floor, and ratios beyond the outlier gate, are dropped.

    Returns:
        (samples, dropped) with samples ordered by angle then frequency.

    Raises:
        DataError: mismatched angle sets or frequency grids (tolerance
            1e-6 GHz), non-increasing sweep frequencies, or every point
            dropped.
    """
    if set(material_sweeps) != set(reference_sweeps):
        raise DataError("material and reference sweeps cover different angles")
    samples: list[MeasurementSample] = []
    dropped = 0
    for theta in sorted(material_sweeps):
        mat = material_sweeps[theta]
        ref = reference_sweeps[theta]
        if len(mat) != len(ref):
            raise DataError(f"sweep lengths differ at {theta} deg")
        f_mat = np.array([r.f_ghz for r in mat])
        f_ref = np.array([r.f_ghz for r in ref])
        if np.any(np.diff(f_mat) <= 0.0) or np.any(np.diff(f_ref) <= 0.0):
            raise DataError(f"sweep frequencies not strictly increasing at {theta} deg")
        if np.any(np.abs(f_mat - f_ref) > 1e-6):
            raise DataError(f"frequency grids differ at {theta} deg")
        for rec_m, rec_r in zip(mat, ref):
            if rec_r.s21_mag < noise_floor:
                dropped += 1
                continue
            gamma = rec_m.s21_mag / rec_r.s21_mag
            if gamma > OUTLIER_GAMMA:
                dropped += 1
                continue
            samples.append(MeasurementSample(rec_m.f_ghz, theta, gamma))
    if not samples:
        raise DataError("every sample was dropped (reference below noise floor?)")
    return samples, dropped


def _cell_rng(seed: int, ordinal: int) -> np.random.Generator:
    # counter-based generator keyed per cell: the split is reproducible
    # across platforms and independent of cell visitation order
    key = np.array([seed % 2**64, ordinal], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def stratified_split(
    ds: Dataset, train_fraction: float, seed: int
) -> tuple[Dataset, Dataset]:
    """Deterministic stratified train/test split.

    Strata are (frequency band x angle) cells, bands 10 GHz wide over the
    data's span. Each cell contributes round(fraction * count) samples to
    the train side, drawn without replacement; cells with fewer than two
    samples go to train whole. Union and order reproduce the input.
    """
    if not (0.0 < train_fraction < 1.0):
        raise DataError("train fraction must lie in (0, 1)")
    f = np.array([s.f_ghz for s in ds.samples])
    lo, hi = float(f.min()), float(f.max())
    if hi > lo:
        bands = partition_bands(lo, hi, _STRATUM_WIDTH_GHZ)
    else:
        bands = None  # all samples share one frequency

    def band_index(freq: float) -> int:
        if bands is None:
            return 0
        for band in bands:
            if freq < band.f_hi or band.index == len(bands):
                return band.index
        return len(bands)

    cells: dict[tuple, list[int]] = {}
    for i, s in enumerate(ds.samples):
        cells.setdefault((band_index(s.f_ghz), s.theta_deg), []).append(i)

    in_train = np.zeros(len(ds.samples), dtype=bool)
    for ordinal, key in enumerate(sorted(cells)):
        idx = cells[key]
        n = len(idx)
        if n < 2:
            in_train[idx] = True
            continue
        n_train = int(np.floor(train_fraction * n + 0.5))
        perm = _cell_rng(seed, ordinal).permutation(n)
        for j in perm[:n_train]:
            in_train[idx[j]] = True

    train = [s for i, s in enumerate(ds.samples) if in_train[i]]
    test = [s for i, s in enumerate(ds.samples) if not in_train[i]]
    if not train or not test:
        raise DataError("split produced an empty train or test side")

    def make(part):
        return Dataset(
            samples=part,
            material=ds.material,
            thickness_m=ds.thickness_m,
            material_class=ds.material_class,
            note=ds.note,
        )

    return make(train), make(test)


def _load_database() -> tuple[dict[str, MaterialRecord], dict[str, str]]:
    raw = json.loads(
        resources.files("thzreflect").joinpath("materials.json").read_text("utf-8")
    )
    records: dict[str, MaterialRecord] = {}
    for entry in raw["materials"]:
        trend = TrendParams.from_dict(entry["trend"])
        records[entry["name"]] = MaterialRecord(
            name=entry["name"],
            material_class=trend.material_class,
            trend=trend,
            thickness_m=float(entry["thickness_m"]),
            reference_rmse=float(entry["reference_rmse"]),
        )
    return records, dict(raw.get("aliases", {}))


_DB_CACHE: tuple[dict[str, MaterialRecord], dict[str, str]] | None = None


def _database() -> tuple[dict[str, MaterialRecord], dict[str, str]]:
    global _DB_CACHE
    if _DB_CACHE is None:
        _DB_CACHE = _load_database()
    return _DB_CACHE


def material_names() -> list[str]:
    """Database rows in their stable shipped order."""
    records, _ = _database()
    return list(records)


def get_material(name: str) -> MaterialRecord:
    """Look up a built-in material by name or alias, case-insensitively.

    Raises:
        DataError: unknown name; the message lists the valid ones.
    """
    records, aliases = _database()
    if name in records:
        return records[name]
    if name in aliases:
        return records[aliases[name]]
    folded = name.casefold()
    for known, record in records.items():
        if known.casefold() == folded:
            return record
    for alias, target in aliases.items():
        if alias.casefold() == folded:
            return records[target]
    raise DataError(
        f"unknown material {name!r}; valid names: {', '.join(records)}"
    )


def synthesize_dataset(
    material: MaterialRecord,
    d_m: float | None = None,
    f_grid=None,
    theta_grid=None,
    noise_sigma: float = 0.0,
    seed: int = 0,
) -> Dataset:
    """Forward-model samples on a grid, optionally with Gaussian noise.

    Noise is clamped at zero from below (magnitudes cannot be negative);
    grids default to the measurement campaign's 1201-point sweep and
    10:10:80 angles. Deterministic for a fixed seed.
    """
    if noise_sigma < 0.0:
        raise DataError("noise sigma must be >= 0")
    d = material.thickness_m if d_m is None else float(d_m)
    freqs = DEFAULT_FREQ_GRID if f_grid is None else np.asarray(f_grid, dtype=float)
    thetas = (
        DEFAULT_THETA_GRID if theta_grid is None else np.asarray(theta_grid, dtype=float)
    )
    gamma = np.concatenate(
        [
            np.atleast_1d(predict_reflection(material.trend, freqs, theta, d))
            for theta in thetas
        ]
    )
    if noise_sigma > 0.0:
        rng = np.random.Generator(
            np.random.Philox(key=np.array([seed % 2**64, 0], dtype=np.uint64))
        )
        gamma = np.maximum(gamma + noise_sigma * rng.standard_normal(gamma.size), 0.0)
    samples = []
    pos = 0
    for theta in thetas:
        for f in freqs:
            samples.append(MeasurementSample(float(f), float(theta), gamma[pos]))
            pos += 1
    return Dataset(
        samples=samples,
        material=material.name,
        thickness_m=d,
        material_class=material.material_class,
        note=f"synthetic seed={seed} noise={noise_sigma:g}",
    )


def _open_rows(path) -> tuple[list[str], list[tuple[int, list[str]]]]:
    header: list[str] | None = None
    rows: list[tuple[int, list[str]]] = []
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or row[0].lstrip().startswith("#"):
                continue
            if header is None:
                header = [c.strip() for c in row]
                continue
            rows.append((lineno, row))
    if header is None:
        raise DataError(f"{path}: no header row")
    return header, rows


def _columns(header: list[str], wanted: tuple[str, ...], path) -> list[int]:
    try:
        return [header.index(name) for name in wanted]
    except ValueError:
        raise DataError(
            f"{path}: header must contain columns {', '.join(wanted)}; "
            f"got {', '.join(header)}"
        ) from None


def load_samples(path) -> list[MeasurementSample]:
    """Read pre-ratioed samples from CSV.

    Rows past the outlier gate (gamma > 1.5) are silently dropped; any
    other malformed value raises.
    """
    header, rows = _open_rows(path)
    cols = _columns(header, ("freq_ghz", "angle_deg", "gamma"), path)
    samples = []
    for lineno, row in rows:
        try:
            f, theta, gamma = (float(row[c]) for c in cols)
        except (ValueError, IndexError) as exc:
            raise DataError(f"{path}:{lineno}: bad row: {exc}") from None
        if gamma > OUTLIER_GAMMA:
            continue
        try:
            samples.append(MeasurementSample(f, theta, gamma))
        except DataError as exc:
            raise DataError(f"{path}:{lineno}: {exc}") from None
    if not samples:
        raise DataError(f"{path}: no usable samples")
    return samples


def load_sweeps(path) -> dict[float, list[SweepRecord]]:
    """Read raw sweeps from CSV, grouped by angle and sorted by frequency."""
    header, rows = _open_rows(path)
    cols = _columns(header, ("freq_ghz", "angle_deg", "s21_mag"), path)
    sweeps: dict[float, list[SweepRecord]] = {}
    for lineno, row in rows:
        try:
            f, theta, mag = (float(row[c]) for c in cols)
            record = SweepRecord(f, mag)
        except (ValueError, IndexError, DataError) as exc:
            raise DataError(f"{path}:{lineno}: bad row: {exc}") from None
        sweeps.setdefault(theta, []).append(record)
    if not sweeps:
        raise DataError(f"{path}: no sweep rows")
    for theta in sweeps:
        sweeps[theta].sort(key=lambda r: r.f_ghz)
    return sweeps


def save_samples(samples, path, note: str = "") -> None:
    """Write samples as CSV with the standard header and schema comment."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write("# thzreflect-samples v1 schema=freq_ghz,angle_deg,gamma\n")
        if note:
            fh.write(f"# {note}\n")
        fh.write("freq_ghz,angle_deg,gamma\n")
        for s in samples:
            fh.write(f"{s.f_ghz!r},{s.theta_deg!r},{s.gamma!r}\n")
