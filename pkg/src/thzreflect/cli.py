"""Command line front end.

Subcommands: fit, predict, eval, synth, export, materials. Value options
resolve in the order: command line, THZREFLECT_<OPTION> environment
variable, --config file (key=value lines), built-in default. Every run
that writes artifacts also writes a manifest.json echoing the resolved
configuration, and reruns with identical inputs produce byte-identical
files.

Exit codes: 0 success, 2 usage, 3 data/ingestion, 4 fit failure,
5 internal error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .data import (
    DataError,
    Dataset,
    get_material,
    linear_grid,
    load_samples,
    load_sweeps,
    material_names,
    ratio_reflection,
    save_samples,
    stratified_split,
    synthesize_dataset,
)
from .evaluate import abs_error_cdf, confidence_bound, rmse
from .fitting import FitError
from .physics import MaterialClass, TrendParams, predict_reflection
from .subband import TrendFitConfig, fit_trend

ENV_PREFIX = "THZREFLECT_"


class UsageError(Exception):
    """Bad flag, environment, or config value; maps to exit code 2."""


def _parse_grid(text: str) -> np.ndarray:
    """A single value or start:step:end, endpoints inclusive."""
    parts = text.split(":")
    try:
        if len(parts) == 1:
            return np.array([float(parts[0])])
        if len(parts) == 3:
            start, step, end = (float(p) for p in parts)
            return linear_grid(start, step, end)
    except ValueError as exc:
        raise UsageError(f"bad grid {text!r}: {exc}") from None
    raise UsageError(f"bad grid {text!r}: expected value or start:step:end")


def _cast_float(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise UsageError(f"expected a number, got {text!r}") from None


def _cast_positive(text: str) -> float:
    value = _cast_float(text)
    if value <= 0.0:
        raise UsageError(f"expected a positive number, got {text!r}")
    return value


def _cast_nonneg(text: str) -> float:
    value = _cast_float(text)
    if value < 0.0:
        raise UsageError(f"expected a non-negative number, got {text!r}")
    return value


def _cast_seed(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise UsageError(f"seed must be an integer, got {text!r}") from None
    if value < 0:
        raise UsageError("seed must be >= 0")
    return value


def _cast_window(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise UsageError(f"window must be an integer, got {text!r}") from None
    if value < 1:
        raise UsageError("window must be >= 1")
    return value


def _cast_frac(text: str) -> float:
    value = _cast_float(text)
    if not (0.0 < value < 1.0):
        raise UsageError("train fraction must lie in (0, 1)")
    return value


def _cast_class(text: str) -> str:
    if text not in ("dielectric", "metal"):
        raise UsageError("material class must be 'dielectric' or 'metal'")
    return text


def _cast_scoring(text: str) -> str:
    if text not in ("current", "own"):
        raise UsageError("init scoring must be 'current' or 'own'")
    return text


def _cast_str(text: str) -> str:
    return text


def _read_config(path: str) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}") from None
    cfg = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"config line is not key=value: {line!r}")
        key, value = line.split("=", 1)
        cfg[key.strip()] = value.strip()
    return cfg


def _resolve(args, spec: dict) -> dict:
    """Merge CLI, environment, config file, and defaults per option."""
    file_cfg = _read_config(args.config) if getattr(args, "config", None) else {}
    resolved = {}
    for dest, (cast, default, required) in spec.items():
        raw = getattr(args, dest, None)
        if raw is not None:
            value = cast(raw) if isinstance(raw, str) else raw
        else:
            env = os.environ.get(ENV_PREFIX + dest.upper())
            if env is not None:
                value = cast(env)
            elif dest in file_cfg:
                value = cast(file_cfg[dest])
            else:
                value = default
        if required and value is None:
            raise UsageError(f"--{dest.replace('_', '-')} is required")
        resolved[dest] = value
    return resolved


def _jsonable(value):
    if isinstance(value, np.ndarray):
        return [float(v) for v in value]
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    return value


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_manifest(out_dir: Path, command: str, resolved: dict, extra: dict) -> None:
    config = {k: _jsonable(v) for k, v in resolved.items()}
    config.update({k: _jsonable(v) for k, v in extra.items()})
    _write_json(
        out_dir / "manifest.json",
        {"schema": "thzreflect-manifest v1", "command": command, "config": config},
    )


def _out_dir(resolved: dict) -> Path:
    path = Path(resolved["out_dir"])
    path.mkdir(parents=True, exist_ok=True)
    return path


def _default_thickness(material_class) -> float:
    return 0.002 if MaterialClass(material_class) is MaterialClass.METAL else 0.005


def _load_trend_file(path: str) -> tuple[TrendParams, float | None]:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        trend = TrendParams.from_dict(raw["trend"])
        thickness = raw.get("thickness_m")
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise DataError(f"cannot read trend file {path}: {exc}") from None
    return trend, None if thickness is None else float(thickness)


def _trend_source(resolved: dict) -> tuple[TrendParams, float, str]:
    """Trend + thickness from --material or --params (exactly one)."""
    name, params = resolved.get("material"), resolved.get("params")
    if (name is None) == (params is None):
        raise UsageError("provide exactly one of --material or --params")
    if name is not None:
        record = get_material(name)
        thickness = record.thickness_m
        trend = record.trend
        label = record.name
    else:
        trend, thickness = _load_trend_file(params)
        label = Path(params).stem
    if resolved.get("thickness_m") is not None:
        thickness = resolved["thickness_m"]
    if thickness is None:
        thickness = _default_thickness(trend.material_class)
    return trend, thickness, label


def _write_prediction_rows(fh, trend, freqs, thetas, thickness) -> None:
    fh.write("# thzreflect-table v1 schema=freq_ghz,angle_deg,gamma\n")
    fh.write("freq_ghz,angle_deg,gamma\n")
    for theta in thetas:
        gamma = np.atleast_1d(
            predict_reflection(trend, freqs, float(theta), thickness)
        )
        for f, g in zip(freqs, gamma):
            fh.write(f"{float(f)!r},{float(theta)!r},{float(g)!r}\n")


# option tables: dest -> (cast, default, required after resolution)

_FIT_SPEC = {
    "data": (_cast_str, None, False),
    "material_csv": (_cast_str, None, False),
    "reference_csv": (_cast_str, None, False),
    "material": (_cast_str, "custom", False),
    "material_class": (_cast_class, None, True),
    "thickness_m": (_cast_positive, None, True),
    "delta_f": (_cast_positive, 10.0, False),
    "window": (_cast_window, 3, False),
    "train_frac": (_cast_frac, 0.6, False),
    "seed": (_cast_seed, 0, False),
    "init_scoring": (_cast_scoring, "current", False),
    "out_dir": (_cast_str, None, True),
}

_PREDICT_SPEC = {
    "material": (_cast_str, None, False),
    "params": (_cast_str, None, False),
    "freq_ghz": (_parse_grid, None, True),
    "angle_deg": (_parse_grid, None, True),
    "thickness_m": (_cast_positive, None, False),
    "out_dir": (_cast_str, None, False),
}

_EVAL_SPEC = {
    "params": (_cast_str, None, True),
    "data": (_cast_str, None, True),
    "thickness_m": (_cast_positive, None, False),
    "out_dir": (_cast_str, None, True),
}

_SYNTH_SPEC = {
    "material": (_cast_str, None, True),
    "freq_ghz": (_parse_grid, None, False),
    "angle_deg": (_parse_grid, None, False),
    "thickness_m": (_cast_positive, None, False),
    "noise": (_cast_nonneg, 0.0, False),
    "seed": (_cast_seed, 0, False),
    "out_dir": (_cast_str, None, True),
}

_EXPORT_SPEC = {
    "material": (_cast_str, None, False),
    "params": (_cast_str, None, False),
    "freq_ghz": (_parse_grid, None, False),
    "angle_deg": (_parse_grid, None, False),
    "thickness_m": (_cast_positive, None, False),
    "out_dir": (_cast_str, None, True),
}


def cmd_fit(args) -> int:
    resolved = _resolve(args, _FIT_SPEC)
    modes = [resolved["data"] is not None, resolved["material_csv"] is not None]
    if modes[0] == modes[1]:
        raise UsageError("provide either --data or --material-csv/--reference-csv")
    if modes[1] and resolved["reference_csv"] is None:
        raise UsageError("--material-csv requires --reference-csv")

    if resolved["data"] is not None:
        samples = load_samples(resolved["data"])
    else:
        samples, dropped = ratio_reflection(
            load_sweeps(resolved["material_csv"]),
            load_sweeps(resolved["reference_csv"]),
        )
        if dropped:
            print(f"dropped {dropped} points at the ratio stage", file=sys.stderr)

    ds = Dataset(
        samples=samples,
        material=resolved["material"],
        thickness_m=resolved["thickness_m"],
        material_class=resolved["material_class"],
    )
    train, test = stratified_split(ds, resolved["train_frac"], resolved["seed"])

    out = _out_dir(resolved)
    _write_manifest(out, "fit", resolved, {"no_figures": args.no_figures})
    save_samples(train.samples, out / "train.csv", note="train split")
    save_samples(test.samples, out / "test.csv", note="test split")

    cfg = TrendFitConfig(
        delta_f=resolved["delta_f"],
        window=resolved["window"],
        init_scoring=resolved["init_scoring"],
        weight_regression=args.weight_regression,
    )
    result = fit_trend(
        train.samples, ds.material_class, ds.thickness_m, config=cfg
    )
    if len(result.band_fits) == 1:
        print(
            "warning: span fits in a single sub-band; trends degenerate "
            "to one global fit",
            file=sys.stderr,
        )

    n_conv = sum(1 for bf in result.band_fits if bf.converged)
    _write_json(
        out / "trend.json",
        {
            "schema": "thzreflect-trend v1",
            "material": ds.material,
            "thickness_m": ds.thickness_m,
            "trend": result.trend.to_dict(),
            "train_rmse": result.rmse,
            "n_train": result.n_samples,
            "n_test": len(test),
            "bands_total": len(result.band_fits),
            "bands_converged": n_conv,
        },
    )

    with open(out / "bands.csv", "w", encoding="utf-8") as fh:
        names = ["lg_p1", "lg_p2", "lg_p3", "lg_p4"]
        if ds.material_class is MaterialClass.METAL:
            names = ["lg_p1", "lg_p2", "lg_p4"]
        cols = (
            "band_index,f_lo_ghz,f_hi_ghz,f_center_ghz,n_samples,"
            "converged,iterations,status,rmse," + ",".join(names)
        )
        fh.write(f"# thzreflect-bands v1 schema={cols}\n")
        fh.write(cols + "\n")
        for bf in result.band_fits:
            vals = ",".join(repr(float(v)) for v in bf.log10_params)
            fh.write(
                f"{bf.band.index},{bf.band.f_lo!r},{bf.band.f_hi!r},"
                f"{bf.band.f_center!r},{bf.n_samples},{int(bf.converged)},"
                f"{bf.iterations},{bf.status},{bf.rmse!r},{vals}\n"
            )

    if not args.no_figures:
        from . import report

        report.save_trend_figure(result, out / "trend.png")

    print(
        f"train rmse {result.rmse:.6g} on {result.n_samples} samples; "
        f"{n_conv}/{len(result.band_fits)} bands converged; "
        f"outputs in {out}"
    )
    return 0


def cmd_predict(args) -> int:
    resolved = _resolve(args, _PREDICT_SPEC)
    trend, thickness, label = _trend_source(resolved)
    freqs = resolved["freq_ghz"]
    thetas = resolved["angle_deg"]

    if resolved["out_dir"] is not None:
        out = _out_dir(resolved)
        with open(out / "predictions.csv", "w", newline="", encoding="utf-8") as fh:
            _write_prediction_rows(fh, trend, freqs, thetas, thickness)
        _write_manifest(
            out, "predict", resolved, {"label": label, "thickness_used_m": thickness}
        )
        print(f"wrote {freqs.size * thetas.size} predictions to {out}")
        return 0

    if freqs.size == 1 and thetas.size == 1:
        value = predict_reflection(
            trend, float(freqs[0]), float(thetas[0]), thickness
        )
        print(repr(float(value)))
        return 0

    _write_prediction_rows(sys.stdout, trend, freqs, thetas, thickness)
    return 0


def cmd_eval(args) -> int:
    resolved = _resolve(args, _EVAL_SPEC)
    trend, file_thickness = _load_trend_file(resolved["params"])
    thickness = resolved["thickness_m"]
    if thickness is None:
        thickness = file_thickness
    if thickness is None:
        thickness = _default_thickness(trend.material_class)

    samples = load_samples(resolved["data"])
    f = np.array([s.f_ghz for s in samples])
    t = np.array([s.theta_deg for s in samples])
    g = np.array([s.gamma for s in samples])
    pred = predict_reflection(trend, f, t, thickness)
    cdf = abs_error_cdf(pred, g)
    value_rmse = rmse(pred, g)
    bound = confidence_bound(cdf, 0.9)
    per_angle = {
        f"{angle:g}": rmse(pred[t == angle], g[t == angle])
        for angle in np.unique(t)
    }

    out = _out_dir(resolved)
    _write_manifest(
        out, "eval", resolved,
        {"no_figures": args.no_figures, "thickness_used_m": thickness},
    )
    _write_json(
        out / "report.json",
        {
            "schema": "thzreflect-eval v1",
            "rmse": value_rmse,
            "bound90": bound,
            "n_samples": int(g.size),
            "per_angle_rmse": per_angle,
        },
    )
    with open(out / "cdf.csv", "w", newline="", encoding="utf-8") as fh:
        fh.write("# thzreflect-cdf v1 schema=abs_error,cum_prob\n")
        fh.write("abs_error,cum_prob\n")
        for e, p in zip(cdf.errors, cdf.probabilities):
            fh.write(f"{float(e)!r},{float(p)!r}\n")
    if not args.no_figures:
        from . import report

        report.save_cdf_figure([("model", cdf)], out / "cdf.png")

    print(f"rmse {value_rmse:.6g}  90% bound {bound:.6g}  n {g.size}")
    return 0


def cmd_synth(args) -> int:
    resolved = _resolve(args, _SYNTH_SPEC)
    record = get_material(resolved["material"])
    ds = synthesize_dataset(
        record,
        d_m=resolved["thickness_m"],
        f_grid=resolved["freq_ghz"],
        theta_grid=resolved["angle_deg"],
        noise_sigma=resolved["noise"],
        seed=resolved["seed"],
    )
    out = _out_dir(resolved)
    _write_manifest(
        out, "synth", resolved,
        {"material_resolved": record.name, "thickness_used_m": ds.thickness_m},
    )
    save_samples(ds.samples, out / "samples.csv", note=ds.note)
    print(f"wrote {len(ds)} samples to {out / 'samples.csv'}")
    return 0


def cmd_export(args) -> int:
    resolved = _resolve(args, _EXPORT_SPEC)
    trend, thickness, label = _trend_source(resolved)
    freqs = resolved["freq_ghz"]
    if freqs is None:
        freqs = linear_grid(300.0, 1.0, 400.0)
    thetas = resolved["angle_deg"]
    if thetas is None:
        thetas = linear_grid(10.0, 10.0, 80.0)
    out = _out_dir(resolved)
    with open(out / "rt_table.csv", "w", newline="", encoding="utf-8") as fh:
        _write_prediction_rows(fh, trend, freqs, thetas, thickness)
    _write_manifest(
        out, "export", resolved,
        {
            "format": args.format,
            "label": label,
            "thickness_used_m": thickness,
            "freq_ghz_used": freqs,
            "angle_deg_used": thetas,
        },
    )
    print(
        f"wrote {freqs.size}x{thetas.size} lookup table to {out / 'rt_table.csv'}"
    )
    return 0


def cmd_materials(args) -> int:
    rows = [get_material(name) for name in material_names()]
    header = (
        f"{'name':<16} {'class':<11} {'d_m':>7} "
        f"{'k2':>8} {'b2':>9} {'k3':>8} {'b3':>9} {'k4':>8} {'b4':>9} "
        f"{'b1':>9} {'rmse':>7}"
    )
    print(header)
    for rec in rows:
        tr = rec.trend

        def cell(v, width=8):
            return f"{'-':>{width}}" if v is None else f"{v:>{width}.4f}"

        print(
            f"{rec.name:<16} {rec.material_class.value:<11} "
            f"{rec.thickness_m:>7.3f} "
            f"{cell(tr.k2)} {cell(tr.b2, 9)} {cell(tr.k3)} {cell(tr.b3, 9)} "
            f"{cell(tr.k4)} {cell(tr.b4, 9)} {cell(tr.b1, 9)} "
            f"{rec.reference_rmse:>7.4f}"
        )
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="thzreflect",
        description="Reflection-coefficient modeling and fitting "
        "for the 300-400 GHz band",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, figures=False):
        p.add_argument("--config", help="key=value config file")
        if figures:
            p.add_argument(
                "--no-figures",
                dest="no_figures",
                action="store_true",
                help="skip PNG rendering",
            )

    p = sub.add_parser("fit", help="fit trend parameters from measurements")
    p.add_argument("--data", help="pre-ratioed samples CSV")
    p.add_argument("--material-csv", dest="material_csv", help="raw material sweeps")
    p.add_argument("--reference-csv", dest="reference_csv", help="raw reference sweeps")
    p.add_argument("--material", help="label for the outputs (default custom)")
    p.add_argument(
        "--material-class",
        dest="material_class",
        help="dielectric or metal (required)",
    )
    p.add_argument("--thickness-m", dest="thickness_m", help="slab thickness (required)")
    p.add_argument("--delta-f", dest="delta_f", help="sub-band width GHz (default 10)")
    p.add_argument("--window", help="initializer window in bands (default 3)")
    p.add_argument(
        "--train-frac", dest="train_frac", help="train fraction (default 0.6)"
    )
    p.add_argument("--seed", help="split seed (default 0)")
    p.add_argument(
        "--init-scoring",
        dest="init_scoring",
        help="score window fits on 'current' band data or their 'own'",
    )
    p.add_argument(
        "--weight-regression",
        dest="weight_regression",
        action="store_true",
        help="weight the trend regression by inverse band rmse",
    )
    p.add_argument("--out-dir", dest="out_dir", help="output directory (required)")
    common(p, figures=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="evaluate a model on frequencies and angles")
    p.add_argument("--material", help="built-in material name")
    p.add_argument("--params", help="trend.json from a fit run")
    p.add_argument(
        "--freq-ghz", dest="freq_ghz", help="frequency or start:step:end grid"
    )
    p.add_argument(
        "--angle-deg", dest="angle_deg", help="angle or start:step:end grid"
    )
    p.add_argument("--thickness-m", dest="thickness_m", help="slab thickness override")
    p.add_argument("--out-dir", dest="out_dir", help="write CSV here instead of stdout")
    common(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval", help="score a fitted model on a test CSV")
    p.add_argument("--params", help="trend.json from a fit run (required)")
    p.add_argument("--data", help="test samples CSV (required)")
    p.add_argument("--thickness-m", dest="thickness_m", help="slab thickness override")
    p.add_argument("--out-dir", dest="out_dir", help="output directory (required)")
    common(p, figures=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("synth", help="generate synthetic measurement data")
    p.add_argument("--material", help="built-in material name (required)")
    p.add_argument("--freq-ghz", dest="freq_ghz", help="grid (default 1201-pt sweep)")
    p.add_argument("--angle-deg", dest="angle_deg", help="grid (default 10:10:80)")
    p.add_argument("--thickness-m", dest="thickness_m", help="slab thickness override")
    p.add_argument("--noise", help="Gaussian noise sigma (default 0)")
    p.add_argument("--seed", help="noise seed (default 0)")
    p.add_argument("--out-dir", dest="out_dir", help="output directory (required)")
    common(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("export", help="write a ray-tracer lookup table")
    p.add_argument("--material", help="built-in material name")
    p.add_argument("--params", help="trend.json from a fit run")
    p.add_argument("--freq-ghz", dest="freq_ghz", help="grid (default 300:1:400)")
    p.add_argument("--angle-deg", dest="angle_deg", help="grid (default 10:10:80)")
    p.add_argument("--thickness-m", dest="thickness_m", help="slab thickness override")
    p.add_argument(
        "--format", choices=["rt-table"], default="rt-table", help="table format"
    )
    p.add_argument("--out-dir", dest="out_dir", help="output directory (required)")
    common(p)
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("materials", help="list the built-in material database")
    p.set_defaults(func=cmd_materials)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except FitError as exc:
        print(f"fit error: {exc}", file=sys.stderr)
        return 4
    except Exception as exc:  # noqa: BLE001 - last-resort boundary
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 5


if __name__ == "__main__":
    sys.exit(main())
