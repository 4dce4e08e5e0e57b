"""Run orchestration and persistence: series CSV, long-format norms, checkpoints, manifest."""
from __future__ import annotations

import csv
import json
import math
import os
import time
from pathlib import Path

import numpy as np

from .. import __version__
from ..grid import GridSpec, fft_workers, make_grid
from ..inequalities import RandomBandLimited
from ..invariants import InvariantRecord, check_kk_identity, check_virial_identities, refinement_ratio
from ..nonlinearity import critical_alpha, weight_grid
from ..norms import NormReport
from ..scattering import decay_fit, s_norm_monitor, scattering_report
from ..series import CSV_COLUMNS, DiagnosticSeries, Recorder, Snapshot
from ..solver import SolverState, StepPolicy, evolve
from .checkpoint import checkpoint_read, checkpoint_write
from .config import RunConfig, from_dict

SERIES_CSV = "series.csv"
NORMS_CSV = "norms.csv"
MANIFEST = "manifest.json"
CHECKPOINT_DIR = "checkpoints"


def initial_field(grid: GridSpec, init: dict) -> np.ndarray:
    fam = init["family"]
    if fam == "zero" or init["amplitude"] == 0:
        return np.zeros(grid.shape, dtype=complex)
    x1, x2 = grid.mesh
    c1, c2 = init["center"]
    if fam == "gaussian":
        k1, k2 = init["wavevector"]
        r2 = (x1 - c1) ** 2 + (x2 - c2) ** 2
        return init["amplitude"] * np.exp(-r2 / init["sigma"] ** 2 + 1j * (k1 * x1 + k2 * x2))
    if fam == "random_band":
        f = RandomBandLimited(init["seed"], init["cutoff"], init["sigma"]).sample(grid)
        return init["amplitude"] * f
    raise ValueError(f"unknown init family {fam!r}")


class CheckpointWriter:
    """Observer writing a checkpoint file every ``every`` steps and at the final step."""

    def __init__(self, directory: Path, every: int, b: float, t_end: float):
        self.directory = Path(directory)
        self.every = int(every)
        self.b = b
        self.t_end = t_end

    def __call__(self, state, series: DiagnosticSeries) -> None:
        final = abs(state.t - self.t_end) < 1e-9 * max(1.0, self.t_end)
        if state.step_count % self.every and not final:
            return
        if series.snapshots and series.snapshots[-1].step_count == state.step_count:
            return
        path = self.directory / f"step_{state.step_count:08d}.snls"
        checkpoint_write(path, state.grid, state.u, state.t, self.b)
        series.snapshots.append(Snapshot(state.t, state.step_count, path=str(path)))


def _fmt(x) -> str:
    return repr(float(x)) if x != "" else ""


def write_series(series: DiagnosticSeries, directory: Path) -> None:
    with open(directory / SERIES_CSV, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for row in series.csv_rows():
            w.writerow([_fmt(x) for x in row])
    with open(directory / NORMS_CSV, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "name", "value"])
        for rec, norms in zip(series.records, series.norms):
            for name in sorted(norms):
                w.writerow([repr(rec.t), name, repr(norms[name].value)])


def _json_dump(obj, path: Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, allow_nan=True)
        fh.write("\n")


def run(config: RunConfig) -> DiagnosticSeries:
    """Execute ``config``; outputs go to ``config['output']['directory']``.

    A validity-window or overflow abort still writes the partial series and
    a manifest with ``status = "aborted"`` before the exception propagates.
    """
    out = Path(config["output"]["directory"])
    out.mkdir(parents=True, exist_ok=True)
    g, m, s, v = config["grid"], config["model"], config["solver"], config["validity"]
    grid = make_grid(g["n"], g["half_width"])
    params = config.params
    weight = weight_grid(grid, params) if m["nonlinear"] else None
    state = SolverState(grid, initial_field(grid, config["init"]))
    policy = StepPolicy(s["dt"], s["t_end"], s["snapshot_stride"], s["order_check"])

    observers = [Recorder(weight, params if weight is not None else None, v["shell"], "norms" in config["observers"])]
    if "checkpoints" in config["observers"] and s["checkpoint_stride"] > 0:
        (out / CHECKPOINT_DIR).mkdir(exist_ok=True)
        observers.append(CheckpointWriter(out / CHECKPOINT_DIR, s["checkpoint_stride"], m["b"], s["t_end"]))

    series = DiagnosticSeries(grid, params, config.config_hash)
    status, abort = "aborted", None
    t0 = time.perf_counter()
    try:
        evolve(state, policy, weight, params, observers, v["boundary_mass_threshold"], v["shell"], series)
        status = "completed"
    except Exception as exc:
        abort = f"{type(exc).__name__}: {exc}"
        raise
    finally:
        elapsed = time.perf_counter() - t0
        if "csv" in config["output"]["formats"]:
            write_series(series, out)
        _json_dump(manifest(config, series, status, abort, elapsed), out / MANIFEST)
    return series


def manifest(config: RunConfig, series: DiagnosticSeries, status: str, abort, elapsed: float) -> dict:
    thr = config["validity"]["boundary_mass_threshold"]
    frac = [r.boundary_mass_fraction for r in series.records]
    return {
        "abort": abort,
        "checkpoints": [
            {"file": os.path.relpath(sn.path, config["output"]["directory"]), "step": sn.step_count, "t": sn.t}
            for sn in series.snapshots
            if sn.path is not None
        ],
        "code_version": __version__,
        "config": config.to_dict(),
        "config_hash": config.config_hash,
        "derived": {"alpha": critical_alpha(config["model"]["b"])},
        "fft_workers": fft_workers(),
        "order_check": series.order_check,
        "records": len(series.records),
        "runtime_seconds": elapsed,
        "status": status,
        "validity": {
            "boundary_mass_threshold": thr,
            "max_boundary_mass_fraction": max(frac) if frac else None,
            "window_end": series.validity_window(thr) if series.records else None,
        },
    }


def read_manifest(directory) -> dict:
    with open(Path(directory) / MANIFEST, encoding="utf-8") as fh:
        return json.load(fh)


def load_series(directory) -> DiagnosticSeries:
    """Rebuild a series (records, norms, checkpoint references) from a run directory."""
    directory = Path(directory)
    man = read_manifest(directory)
    cfg = from_dict(man["config"])
    if cfg.config_hash != man["config_hash"]:
        raise ValueError(f"{directory}: manifest config does not match its hash")
    grid = make_grid(cfg["grid"]["n"], cfg["grid"]["half_width"])
    series = DiagnosticSeries(grid, cfg.params, man["config_hash"])
    norms_by_t: dict[float, dict[str, NormReport]] = {}
    norms_path = directory / NORMS_CSV
    if norms_path.exists():
        with open(norms_path, newline="", encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                t = float(row["t"])
                norms_by_t.setdefault(t, {})[row["name"]] = NormReport(row["name"], float(row["value"]))
    rec_fields = [f for f in CSV_COLUMNS if f in InvariantRecord.__dataclass_fields__]
    with open(directory / SERIES_CSV, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            rec = InvariantRecord(**{k: float(row[k]) for k in rec_fields})
            series.append(rec, norms_by_t.get(rec.t, {}))
    for c in man["checkpoints"]:
        series.snapshots.append(Snapshot(c["t"], c["step"], path=str(directory / c["file"])))
    series.order_check = man.get("order_check")
    return series


# ----------------------------------------------------------------- reports ----


def diagnose(series: DiagnosticSeries, threshold: float | None = None) -> dict:
    """Identity residuals, conservation drifts, decay fits and global-bound monitors."""
    t = series.times
    rep: dict = {"records": int(t.size)}
    if t.size == 0:
        return rep
    mass = series.column("mass")
    H = series.column("hamiltonian")
    rep["mass_drift"] = float(np.max(np.abs(mass - mass[0])) / mass[0]) if mass[0] > 0 else 0.0
    rep["hamiltonian_drift"] = float(np.max(np.abs(H - H[0])) / abs(H[0])) if H[0] != 0 else 0.0
    rep["G_max"] = float(np.max(series.column("G")))
    if threshold is not None:
        rep["validity_window_end"] = series.validity_window(threshold)
    if t.size >= 9:
        fine = check_virial_identities(series)
        coarse_times = t[::2][1:-1]
        coarse = check_virial_identities(series, stride=2)
        fine_c = check_virial_identities(series, at_times=coarse_times)
        rep["virial"] = {
            "fine": fine.as_dict(),
            "coarse": coarse.as_dict(),
            "ratios": {k: refinement_ratio(getattr(coarse, k), getattr(fine_c, k)) for k in ("r1", "r2", "r3")},
        }
    if t.size >= 2 and abs(t[0]) < 1e-14:
        rep["kk"] = check_kk_identity(series).as_dict()
    names = set(series.norm_names())
    if names:
        window = (0.5 * t[-1], float(t[-1]))
        fits = {}
        for q, col in ((4, "l4"), (6, "l6"), (8, "l8")):
            if col in names and np.sum((t >= window[0]) & (t <= window[1])) >= 8 and t[0] < window[0]:
                if np.any(series.column(col) <= 0):
                    fits[col] = {"error": "norm vanishes; no decay to fit"}
                    continue
                try:
                    fits[col] = decay_fit(t, series.column(col), q, window).to_dict()
                except ValueError as exc:
                    fits[col] = {"error": str(exc)}
        rep["decay_fits"] = fits
        if {"h1", "w14", "w_l2", "w_l4"} <= names and t.size >= 2:
            rep["s_norms"] = s_norm_monitor(series).to_dict()
    return rep


def scatter(series: DiagnosticSeries, t_max: float | None = None) -> dict:
    """Scattering report over the stored checkpoints with ``0 < t <= t_max``."""
    snaps = [s for s in series.snapshots if s.t > 0 and (t_max is None or s.t <= t_max + 1e-12)]
    times = [s.t for s in snaps]
    fields = [checkpoint_read(s.path).field if s.field is None else s.field for s in snaps]
    return scattering_report(series.grid, times, fields).to_dict()


def write_report(obj: dict, path) -> None:
    _json_dump(_finite(obj), Path(path))


def _finite(obj):
    """JSON has no inf/nan; encode them as strings so reports stay strict JSON."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    return obj
