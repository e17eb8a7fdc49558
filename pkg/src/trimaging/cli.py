"""Scenario-driven command line: synthesize data, render imaging maps, and
run the Monte Carlo validation suite.

Subcommands: image | validate | synth, each driven by a JSON scenario file.
Exit codes: 0 success, 2 configuration error, 3 numerical error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import figures
from .errors import ConfigError, TrimagingError
from .forward import MdmSet, ScattererSet, synthesize_mdm
from .imaging import STATISTICS, ImageGridSpec, ImageMap, render_map
from .scene import ArrayLayout, FrequencyPlan, Position2D, linear_array
from .validate import McConfig, mc_report, run_average

DEFAULT_GRID = {"x_min": -4.0, "x_max": 4.0, "y_min": -9.0, "y_max": -3.0, "step": 0.1}
DEFAULT_STATISTICS = ("glr", "rao", "wald", "li")
DEFAULT_FORMATS = ("csv", "png")
FORMATS = ("csv", "png", "pgm")

PEAK_SEPARATION_M = 1.0


@dataclass
class SceneConfig:
    layout: ArrayLayout
    plan: FrequencyPlan
    noise_db: tuple
    noise_var: tuple
    scene: ScattererSet | None
    model: str
    grid: ImageGridSpec
    statistics: tuple
    mc: McConfig
    output_dir: str
    formats: tuple


# ---------------------------------------------------------------------------
# config parsing


def _fail(path: str, reason: str):
    raise ConfigError(f"{path}: {reason}")


def _expect_keys(obj: dict, allowed, path: str):
    for key in obj:
        if key not in allowed:
            _fail(f"{path}.{key}" if path else key, "unknown key")


def _get_number(obj, key, path, required=True, default=None):
    if key not in obj:
        if required:
            _fail(f"{path}.{key}" if path else key, "missing required field")
        return default
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        _fail(f"{path}.{key}" if path else key, "expected a number")
    return float(v)


def _parse_position(v, path) -> Position2D:
    if not (isinstance(v, list) and len(v) == 2 and all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in v)):
        _fail(path, "expected [x, y]")
    return Position2D(float(v[0]), float(v[1]))


def _parse_array(obj, path):
    if not isinstance(obj, dict):
        _fail(path, "expected an object")
    if "elements" in obj:
        _expect_keys(obj, ("elements",), path)
        elems = obj["elements"]
        if not isinstance(elems, list) or not elems:
            _fail(f"{path}.elements", "expected a nonempty list of [x, y]")
        return tuple(_parse_position(e, f"{path}.elements[{i}]") for i, e in enumerate(elems))
    _expect_keys(obj, ("count", "spacing", "origin", "direction"), path)
    count = _get_number(obj, "count", path)
    if count != int(count) or count < 1:
        _fail(f"{path}.count", "expected a positive integer")
    spacing = _get_number(obj, "spacing", path)
    origin = _parse_position(obj.get("origin", [0.0, 0.0]), f"{path}.origin")
    direction = obj.get("direction", [1.0, 0.0])
    dpos = _parse_position(direction, f"{path}.direction")
    try:
        return linear_array(int(count), spacing, (origin.x, origin.y), (dpos.x, dpos.y))
    except ValueError as exc:
        _fail(path, str(exc))


def _parse_tau(v, n_freq, path):
    """Scalar, [re, im] pair, or per-frequency list of either."""

    def one(entry, p):
        if isinstance(entry, (int, float)) and not isinstance(entry, bool):
            return complex(entry)
        if (
            isinstance(entry, list)
            and len(entry) == 2
            and all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in entry)
        ):
            return complex(entry[0], entry[1])
        _fail(p, "expected a number or [re, im]")

    if isinstance(v, list) and len(v) == n_freq and any(isinstance(e, list) for e in v):
        return [one(e, f"{path}[{i}]") for i, e in enumerate(v)]
    if isinstance(v, list) and len(v) == 2 and all(
        isinstance(c, (int, float)) and not isinstance(c, bool) for c in v
    ):
        return [complex(v[0], v[1])] * n_freq
    if isinstance(v, list):
        if len(v) != n_freq:
            _fail(path, f"per-frequency list must have length {n_freq}")
        return [one(e, f"{path}[{i}]") for i, e in enumerate(v)]
    return [one(v, path)] * n_freq


def parse_config(path: str) -> SceneConfig:
    """Load, validate, and normalize a JSON scenario file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"{path}: no such file")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})")
    if not isinstance(raw, dict):
        raise ConfigError("top level: expected an object")
    return config_from_dict(raw)


def config_from_dict(raw: dict) -> SceneConfig:
    _expect_keys(
        raw,
        (
            "arrays",
            "wavelengths_m",
            "frequencies_hz",
            "noise_db",
            "scatterers",
            "model",
            "grid",
            "statistics",
            "mc",
            "output",
        ),
        "",
    )

    arrays = raw.get("arrays", {})
    if not isinstance(arrays, dict):
        _fail("arrays", "expected an object")
    _expect_keys(arrays, ("tx", "rx"), "arrays")
    tx = (
        _parse_array(arrays["tx"], "arrays.tx")
        if "tx" in arrays
        else linear_array(11, 0.5, (-2.5, 0.0))
    )
    rx = (
        _parse_array(arrays["rx"], "arrays.rx")
        if "rx" in arrays
        else linear_array(17, 0.5, (-4.0, 1.0))
    )
    try:
        layout = ArrayLayout(tx_elements=tx, rx_elements=rx)
    except ValueError as exc:
        _fail("arrays", str(exc))

    has_wl = "wavelengths_m" in raw
    has_fr = "frequencies_hz" in raw
    if has_wl == has_fr:
        _fail("wavelengths_m", "exactly one of wavelengths_m / frequencies_hz is required")
    try:
        if has_wl:
            plan = FrequencyPlan.from_wavelengths(raw["wavelengths_m"])
        else:
            plan = FrequencyPlan(tuple(raw["frequencies_hz"]))
    except (TypeError, ValueError) as exc:
        _fail("wavelengths_m" if has_wl else "frequencies_hz", str(exc))
    n_freq = plan.n_freq

    if "noise_db" not in raw:
        _fail("noise_db", "missing required field")
    noise_db = raw["noise_db"]
    if not isinstance(noise_db, list) or not all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in noise_db
    ):
        _fail("noise_db", "expected a list of numbers")
    if len(noise_db) != n_freq:
        _fail("noise_db", f"length {len(noise_db)} does not match {n_freq} frequencies")
    noise_db = tuple(float(v) for v in noise_db)
    noise_var = tuple(10.0 ** (v / 10.0) for v in noise_db)

    scatterers = raw.get("scatterers", [])
    if not isinstance(scatterers, list):
        _fail("scatterers", "expected a list")
    scene = None
    if scatterers:
        positions, tau_cols = [], []
        for i, entry in enumerate(scatterers):
            p = f"scatterers[{i}]"
            if not isinstance(entry, dict):
                _fail(p, "expected an object")
            _expect_keys(entry, ("position", "tau"), p)
            if "position" not in entry:
                _fail(f"{p}.position", "missing required field")
            if "tau" not in entry:
                _fail(f"{p}.tau", "missing required field")
            positions.append(_parse_position(entry["position"], f"{p}.position"))
            tau_cols.append(_parse_tau(entry["tau"], n_freq, f"{p}.tau"))
        tau = np.array(tau_cols, dtype=complex).T  # (L, M)
        try:
            scene = ScattererSet(tuple(positions), tau)
        except ValueError as exc:
            _fail("scatterers", str(exc))

    if "model" not in raw:
        _fail("model", "missing required field")
    model = raw["model"]
    if model not in ("BA", "FL"):
        _fail("model", f"expected 'BA' or 'FL', got {model!r}")

    grid_raw = raw.get("grid", DEFAULT_GRID)
    if not isinstance(grid_raw, dict):
        _fail("grid", "expected an object")
    _expect_keys(grid_raw, ("x_min", "x_max", "y_min", "y_max", "step"), "grid")
    merged = dict(DEFAULT_GRID, **grid_raw)
    try:
        grid = ImageGridSpec(
            x_min=float(merged["x_min"]),
            x_max=float(merged["x_max"]),
            y_min=float(merged["y_min"]),
            y_max=float(merged["y_max"]),
            step=float(merged["step"]),
        )
    except (TypeError, ValueError) as exc:
        _fail("grid", str(exc))

    stats = raw.get("statistics", list(DEFAULT_STATISTICS))
    if not isinstance(stats, list) or not stats:
        _fail("statistics", "expected a nonempty list")
    allowed = STATISTICS + ("xi",)  # the raw ratio is testable but not mapped
    for s in stats:
        if s not in allowed:
            _fail("statistics", f"unknown statistic {s!r} (choose from {', '.join(allowed)})")
    stats = tuple(stats)

    mc_raw = raw.get("mc", {})
    if not isinstance(mc_raw, dict):
        _fail("mc", "expected an object")
    _expect_keys(
        mc_raw,
        ("runs", "base_seed", "noise_scalings", "ks_cells", "ks_samples", "cfar_runs"),
        "mc",
    )
    runs = _get_number(mc_raw, "runs", "mc", required=False, default=100)
    if runs != int(runs) or runs < 1:
        _fail("mc.runs", "expected a positive integer")
    base_seed = _get_number(mc_raw, "base_seed", "mc", required=False, default=0)
    if base_seed != int(base_seed) or base_seed < 0:
        _fail("mc.base_seed", "expected a nonnegative integer")
    scalings = mc_raw.get("noise_scalings", [0.1, 1.0, 10.0])
    if not isinstance(scalings, list) or not all(
        isinstance(v, (int, float)) and not isinstance(v, bool) and v > 0 for v in scalings
    ):
        _fail("mc.noise_scalings", "expected a list of positive numbers")
    ks_cells_raw = mc_raw.get("ks_cells", [])
    if not isinstance(ks_cells_raw, list):
        _fail("mc.ks_cells", "expected a list of [x, y]")
    ks_cells = tuple(
        _parse_position(c, f"mc.ks_cells[{i}]") for i, c in enumerate(ks_cells_raw)
    )
    ks_samples = _get_number(mc_raw, "ks_samples", "mc", required=False, default=2000)
    if ks_samples != int(ks_samples) or ks_samples < 10:
        _fail("mc.ks_samples", "expected an integer >= 10")
    cfar_runs = _get_number(mc_raw, "cfar_runs", "mc", required=False, default=2000)
    if cfar_runs != int(cfar_runs) or cfar_runs < 10:
        _fail("mc.cfar_runs", "expected an integer >= 10")
    mc = McConfig(
        runs=int(runs),
        base_seed=int(base_seed),
        statistics=stats,
        noise_scalings=tuple(float(v) for v in scalings),
        ks_cells=ks_cells,
        ks_samples=int(ks_samples),
        cfar_runs=int(cfar_runs),
    )

    out_raw = raw.get("output", {})
    if not isinstance(out_raw, dict):
        _fail("output", "expected an object")
    _expect_keys(out_raw, ("dir", "formats"), "output")
    out_dir = out_raw.get("dir", "trimaging-out")
    if not isinstance(out_dir, str) or not out_dir:
        _fail("output.dir", "expected a nonempty string")
    formats = out_raw.get("formats", list(DEFAULT_FORMATS))
    if not isinstance(formats, list) or not formats:
        _fail("output.formats", "expected a nonempty list")
    for f in formats:
        if f not in FORMATS:
            _fail("output.formats", f"unknown format {f!r} (choose from {', '.join(FORMATS)})")
    if "csv" not in formats:
        formats = ["csv"] + list(formats)  # the delimited grid is always written

    return SceneConfig(
        layout=layout,
        plan=plan,
        noise_db=noise_db,
        noise_var=noise_var,
        scene=scene,
        model=model,
        grid=grid,
        statistics=stats,
        mc=mc,
        output_dir=out_dir,
        formats=tuple(formats),
    )


# ---------------------------------------------------------------------------
# writers


def _fmt(v: float) -> str:
    return f"{v:.9g}"


def write_map_csv(image_map: ImageMap, path: str):
    """Grid CSV: header row carries x coordinates, first column carries y."""
    xs = image_map.spec.x_coords()
    ys = image_map.spec.y_coords()
    lines = ["y\\x," + ",".join(_fmt(x) for x in xs)]
    for j, y in enumerate(ys):
        lines.append(_fmt(y) + "," + ",".join(_fmt(v) for v in image_map.values[j]))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def read_map_csv(path: str):
    """Inverse of write_map_csv: returns (x_coords, y_coords, values)."""
    with open(path, "r", encoding="utf-8") as fh:
        rows = [line.rstrip("\n").split(",") for line in fh if line.strip()]
    xs = np.array([float(v) for v in rows[0][1:]])
    ys = np.array([float(r[0]) for r in rows[1:]])
    vals = np.array([[float(v) for v in r[1:]] for r in rows[1:]])
    return xs, ys, vals


def write_map_pgm(image_map: ImageMap, path: str):
    """16-bit binary PGM, min-max normalized per map, top row = largest y.
    Returns the (min, max) normalization bounds."""
    vals = np.where(image_map.mask, np.nan, image_map.values)
    finite = vals[~np.isnan(vals)]
    vmin = float(finite.min()) if finite.size else 0.0
    vmax = float(finite.max()) if finite.size else 0.0
    span = vmax - vmin
    scaled = (vals - vmin) / span if span > 0 else np.zeros_like(vals)
    pix = np.nan_to_num(scaled, nan=0.0)
    pix = np.round(pix * 65535).astype(">u2")[::-1, :]  # flip to north-up
    h, w = pix.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n65535\n".encode("ascii"))
        fh.write(pix.tobytes())
    return vmin, vmax


def write_mdm_csv(mdm: MdmSet, freq_index: int, path: str):
    """One matrix as CSV with interleaved real/imag columns, written at full
    precision so re-ingestion reproduces the realization exactly."""
    m = mdm.matrices[freq_index]
    lines = []
    for row in m:
        cells = []
        for v in row:
            cells.append(f"{v.real:.17g}")
            cells.append(f"{v.imag:.17g}")
        lines.append(",".join(cells))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_mdm_csv(path: str) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as fh:
        rows = [line.strip().split(",") for line in fh if line.strip()]
    data = np.array([[float(v) for v in r] for r in rows])
    return data[:, 0::2] + 1j * data[:, 1::2]


def load_synth_run(out_dir: str, run: int) -> MdmSet:
    """Re-ingest one synthesized run written by cmd_synth."""
    mats, variances = [], []
    ell = 0
    while True:
        base = os.path.join(out_dir, f"mdm_r{run:04d}_f{ell}")
        if not os.path.exists(base + ".csv"):
            break
        mats.append(read_mdm_csv(base + ".csv"))
        with open(base + ".json", "r", encoding="utf-8") as fh:
            side = json.load(fh)
        variances.append(side["noise_var"])
        ell += 1
    if not mats:
        raise FileNotFoundError(f"no MDM files for run {run} in {out_dir}")
    return MdmSet(matrices=tuple(mats), noise_var=tuple(variances))


def _write_manifest(out_dir: str, manifest: dict):
    path = os.path.join(out_dir, "manifest.json")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _map_outputs(cfg: SceneConfig, name: str, image_map: ImageMap, out_dir: str):
    entry = {"statistic": name, "log_applied": image_map.log_applied}
    files = []
    csv_path = os.path.join(out_dir, f"map_{name}.csv")
    write_map_csv(image_map, csv_path)
    entry["csv"] = os.path.basename(csv_path)
    files.append(csv_path)
    if "pgm" in cfg.formats:
        pgm_path = os.path.join(out_dir, f"map_{name}.pgm")
        vmin, vmax = write_map_pgm(image_map, pgm_path)
        entry["pgm"] = os.path.basename(pgm_path)
        entry["pgm_bounds"] = {"min": vmin, "max": vmax}
        files.append(pgm_path)
    if "png" in cfg.formats:
        png_path = os.path.join(out_dir, f"map_{name}.png")
        figures.save_map_png(
            image_map,
            png_path,
            layout=cfg.layout,
            scatterers=cfg.scene.positions if cfg.scene else None,
        )
        entry["png"] = os.path.basename(png_path)
        files.append(png_path)
    x, y, v = image_map.argmax_cell()
    entry["argmax"] = {"x": x, "y": y, "value": v}
    entry["top_peaks"] = [
        {"x": px, "y": py, "value": pv}
        for px, py, pv in image_map.top_local_maxima(2, PEAK_SEPARATION_M)
    ]
    entry["masked_cells"] = int(image_map.mask.sum())
    return entry, files


# ---------------------------------------------------------------------------
# subcommands


def cmd_image(cfg: SceneConfig, n_threads: int = 1):
    """Render one map per requested statistic (averaged when runs > 1)."""
    for s in cfg.statistics:
        if s not in STATISTICS:
            raise ConfigError(
                f"statistics: {s!r} has no rendered map (it is validate-only)"
            )
    out_dir = cfg.output_dir
    os.makedirs(out_dir, exist_ok=True)
    if cfg.mc.runs > 1:
        maps, _ = run_average(
            cfg.scene, cfg.layout, cfg.plan, cfg.noise_var, cfg.model, cfg.grid,
            cfg.mc, n_threads=n_threads,
        )
    else:
        mdm = synthesize_mdm(
            cfg.layout, cfg.scene, cfg.plan, cfg.noise_var, cfg.model, cfg.mc.base_seed
        )
        maps = {
            s: render_map(s, mdm, cfg.layout, cfg.plan, cfg.grid) for s in cfg.statistics
        }
    manifest = {
        "command": "image",
        "model": cfg.model,
        "runs": cfg.mc.runs,
        "seed": cfg.mc.base_seed,
        "statistics": list(cfg.statistics),
        "maps": {},
    }
    files = []
    for name in cfg.statistics:
        entry, made = _map_outputs(cfg, name, maps[name], out_dir)
        manifest["maps"][name] = entry
        files.extend(made)
    files.append(_write_manifest(out_dir, manifest))
    return files


def cmd_validate(cfg: SceneConfig, n_threads: int = 1):
    """KS goodness-of-fit and CFAR tables for the configured scenario."""
    out_dir = cfg.output_dir
    os.makedirs(out_dir, exist_ok=True)
    files = []
    report = mc_report(
        cfg.scene, cfg.layout, cfg.plan, cfg.noise_var, cfg.model, cfg.grid,
        cfg.mc, n_threads=n_threads,
    )
    ks_rows = report.ks_results
    pfa_rows = report.pfa_table

    if ks_rows:
        ks_path = os.path.join(out_dir, "ks_results.csv")
        lines = ["statistic,freq_index,probe_x,probe_y,n_samples,ks_distance,critical_1pct,passed"]
        for r in ks_rows:
            fi = "" if r.freq_index is None else str(r.freq_index)
            lines.append(
                f"{r.statistic},{fi},{_fmt(r.probe[0])},{_fmt(r.probe[1])},"
                f"{r.n_samples},{_fmt(r.distance)},{_fmt(r.critical_value)},{int(r.passed)}"
            )
        with open(ks_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
        files.append(ks_path)
        if "png" in cfg.formats:
            files.append(figures.save_ks_png(ks_rows, os.path.join(out_dir, "ks.png")))
    if pfa_rows:
        pfa_path = os.path.join(out_dir, "pfa_table.csv")
        lines = ["statistic,scaling,pfa,std_err,n_trials,threshold,target,within_3se"]
        for r in pfa_rows:
            lines.append(
                f"{r.statistic},{_fmt(r.scaling)},{_fmt(r.pfa)},{_fmt(r.std_err)},"
                f"{r.n_trials},{_fmt(r.threshold)},{_fmt(r.target)},{int(r.within_band)}"
            )
        with open(pfa_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
        files.append(pfa_path)
        if "png" in cfg.formats:
            files.append(figures.save_pfa_png(pfa_rows, os.path.join(out_dir, "pfa.png")))
    manifest = {
        "command": "validate",
        "model": cfg.model,
        "seed": cfg.mc.base_seed,
        "ks_experiments": len(ks_rows),
        "ks_passed": report.ks_passed,
        "cfar_statistics": sorted({r.statistic for r in pfa_rows}),
        "files": [os.path.basename(f) for f in files],
    }
    files.append(_write_manifest(out_dir, manifest))
    return files


def cmd_synth(cfg: SceneConfig):
    """Write raw MDM realizations (one CSV + sidecar per run per frequency)."""
    out_dir = cfg.output_dir
    os.makedirs(out_dir, exist_ok=True)
    files = []
    for run in range(cfg.mc.runs):
        mdm = synthesize_mdm(
            cfg.layout, cfg.scene, cfg.plan, cfg.noise_var, cfg.model,
            cfg.mc.base_seed, run_index=run,
        )
        for ell in range(cfg.plan.n_freq):
            base = os.path.join(out_dir, f"mdm_r{run:04d}_f{ell}")
            write_mdm_csv(mdm, ell, base + ".csv")
            sidecar = {
                "run": run,
                "freq_index": ell,
                "n_rx": cfg.layout.n_rx,
                "n_tx": cfg.layout.n_tx,
                "noise_var": cfg.noise_var[ell],
                "wavelength_m": cfg.plan.wavelengths_m[ell],
                "seed": cfg.mc.base_seed,
                "model": cfg.model,
            }
            with open(base + ".json", "w", encoding="utf-8", newline="\n") as fh:
                json.dump(sidecar, fh, indent=2, sort_keys=True)
                fh.write("\n")
            files.extend([base + ".csv", base + ".json"])
    manifest = {
        "command": "synth",
        "model": cfg.model,
        "runs": cfg.mc.runs,
        "seed": cfg.mc.base_seed,
        "n_freq": cfg.plan.n_freq,
        "files": [os.path.basename(f) for f in files],
    }
    files.append(_write_manifest(out_dir, manifest))
    return files


# ---------------------------------------------------------------------------
# entry point


def _apply_overrides(cfg: SceneConfig, args) -> SceneConfig:
    mc = cfg.mc
    changes = {}
    if args.seed is not None:
        changes["base_seed"] = args.seed
    if args.runs is not None:
        if args.runs < 1:
            raise ConfigError("--runs: expected a positive integer")
        changes["runs"] = args.runs
    stats = cfg.statistics
    if args.statistics is not None:
        stats = tuple(s.strip() for s in args.statistics.split(",") if s.strip())
        if not stats:
            raise ConfigError("--statistics: expected a comma-separated list")
        for s in stats:
            if s not in STATISTICS:
                raise ConfigError(f"--statistics: unknown statistic {s!r}")
        changes["statistics"] = stats
    if changes:
        mc = McConfig(
            runs=changes.get("runs", mc.runs),
            base_seed=changes.get("base_seed", mc.base_seed),
            statistics=changes.get("statistics", mc.statistics),
            noise_scalings=mc.noise_scalings,
            ks_cells=mc.ks_cells,
            ks_samples=mc.ks_samples,
            cfar_runs=mc.cfar_runs,
        )
        cfg.mc = mc
        cfg.statistics = stats
    if args.out is not None:
        cfg.output_dir = args.out
    return cfg


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trimaging",
        description="Wideband time-reversal imaging: synthesis, maps, validation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("image", "render per-statistic imaging maps"),
        ("validate", "run KS goodness-of-fit and CFAR experiments"),
        ("synth", "write raw synthesized data matrices"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="JSON scenario file")
        p.add_argument("--seed", type=int, default=None, help="override mc.base_seed")
        p.add_argument("--out", default=None, help="override output.dir")
        p.add_argument("--runs", type=int, default=None, help="override mc.runs")
        p.add_argument(
            "--statistics", default=None, help="comma-separated statistic list override"
        )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        n_threads = int(os.environ.get("TRIMAGING_THREADS", "1"))
    except ValueError:
        n_threads = 1
    try:
        cfg = _apply_overrides(parse_config(args.config), args)
        if args.command == "image":
            files = cmd_image(cfg, n_threads=max(1, n_threads))
        elif args.command == "validate":
            files = cmd_validate(cfg, n_threads=max(1, n_threads))
        else:
            files = cmd_synth(cfg)
        for f in files:
            print(f)
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except TrimagingError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
