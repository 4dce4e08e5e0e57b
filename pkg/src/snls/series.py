"""Time series produced by a run, and the observers that fill it."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .grid import GridSpec, gradient, integrate
from .invariants import InvariantRecord, record_invariants
from .nonlinearity import ModelParams, SingularWeight
from .norms import NormReport, lp_norm
from .scattering import conformal_v_gradient, vector_modulus, weighted_w

# Column order of the time-series CSV.
CSV_COLUMNS = (
    "t", "mass", "hamiltonian", "V", "M_mom", "K", "G",
    "l4", "h1", "sigma", "w14", "linf", "boundary_mass_fraction",
)


@dataclass(eq=False)
class Snapshot:
    """A stored field; ``field`` is kept in memory, ``path`` points at a checkpoint."""

    t: float
    step_count: int
    field: np.ndarray | None = None
    path: str | None = None


@dataclass(eq=False)
class DiagnosticSeries:
    grid: GridSpec
    params: ModelParams | None
    config_hash: str = ""
    records: list[InvariantRecord] = field(default_factory=list)
    norms: list[dict[str, NormReport]] = field(default_factory=list)
    snapshots: list[Snapshot] = field(default_factory=list)
    final_state: object = None
    order_check: dict | None = None

    @property
    def times(self) -> np.ndarray:
        return np.array([r.t for r in self.records])

    def append(self, record: InvariantRecord, norms: dict[str, NormReport] | None = None) -> None:
        if self.records and not record.t > self.records[-1].t:
            raise ValueError(f"record at t={record.t} does not advance past t={self.records[-1].t}")
        self.records.append(record)
        self.norms.append({} if norms is None else dict(norms))

    def column(self, name: str) -> np.ndarray:
        if not self.records:
            return np.array([])
        if hasattr(self.records[0], name):
            return np.array([getattr(r, name) for r in self.records])
        try:
            return np.array([n[name].value for n in self.norms])
        except KeyError:
            raise KeyError(f"no column named {name!r} in this series") from None

    def norm_names(self) -> list[str]:
        return list(self.norms[0]) if self.norms else []

    def validity_window(self, threshold: float) -> float:
        """Last recorded time before the boundary-shell mass fraction first exceeds ``threshold``."""
        t_ok = self.records[0].t
        for r in self.records:
            if r.boundary_mass_fraction > threshold:
                break
            t_ok = r.t
        return t_ok

    def csv_rows(self):
        for r, n in zip(self.records, self.norms):
            row = r.as_dict()
            row.update({k: v.value for k, v in n.items()})
            yield [row.get(c, "") for c in CSV_COLUMNS]

    def snapshot_fields(self) -> tuple[np.ndarray, list[np.ndarray]]:
        times, out = [], []
        for s in self.snapshots:
            if s.field is not None:
                f = s.field
            else:
                from .runner.checkpoint import checkpoint_read

                f = checkpoint_read(s.path)[0]
            times.append(s.t)
            out.append(f)
        return np.array(times), out


Observer = Callable[["object", DiagnosticSeries], None]


def state_norms(grid: GridSpec, u: np.ndarray, t: float, grad, w, V: float) -> dict[str, NormReport]:
    """Every per-record norm; the CSV keeps a fixed subset, the rest go to the long table."""
    g1, g2 = grad
    gmod2 = np.abs(g1) ** 2 + np.abs(g2) ** 2
    l2 = lp_norm(grid, u, 2)
    grad_l2 = math.sqrt(integrate(grid, gmod2))
    grad_l4 = integrate(grid, gmod2**2) ** 0.25
    h1 = math.sqrt(l2 * l2 + grad_l2 * grad_l2)
    wmod = vector_modulus(w)
    if t != 0:
        v1, v2 = conformal_v_gradient(grid, u, t, grad)
        cgrad = 2 * abs(t) * math.sqrt(integrate(grid, np.abs(v1) ** 2 + np.abs(v2) ** 2))
    else:
        cgrad = math.sqrt(V)
    l4 = lp_norm(grid, u, 4)
    vals = {
        "l2": (l2, {"p": 2}),
        "l4": (l4, {"p": 4}),
        "l6": (lp_norm(grid, u, 6), {"p": 6}),
        "l8": (lp_norm(grid, u, 8), {"p": 8}),
        "linf": (lp_norm(grid, u, math.inf), {"p": math.inf}),
        "h1": (h1, {}),
        "sigma": (math.sqrt(h1 * h1 + V), {}),
        "grad_l2": (grad_l2, {"p": 2}),
        "grad_l4": (grad_l4, {"p": 4}),
        "w14": (l4 + grad_l4, {"p": 4}),
        "w_l2": (math.sqrt(integrate(grid, wmod**2)), {"p": 2}),
        "w_l4": (integrate(grid, wmod**4) ** 0.25, {"p": 4}),
        "conformal_grad": (cgrad, {}),
    }
    return {k: NormReport(k, float(v), p) for k, (v, p) in vals.items()}


class Recorder:
    """Observer computing the invariant record (and, unless disabled, all norms) of each observed state."""

    def __init__(
        self, weight: SingularWeight | None, params: ModelParams | None, shell: float = 0.1, norms: bool = True
    ):
        self.weight = weight
        self.params = params
        self.shell = shell
        self.norms = norms

    def __call__(self, state, series: DiagnosticSeries) -> None:
        grid, u, t = state.grid, state.u, state.t
        grad = gradient(grid, u)
        w = weighted_w(grid, u, t)
        rec = record_invariants(grid, u, t, self.weight, self.params, self.shell, grad=grad, w=w)
        series.append(rec, state_norms(grid, u, t, grad, w, rec.V) if self.norms else None)


class SnapshotKeeper:
    """Keeps a copy of the field every ``every`` steps and at the final step."""

    def __init__(self, every: int, t_end: float | None = None):
        if every < 1:
            raise ValueError("snapshot interval must be at least one step")
        self.every = int(every)
        self.t_end = t_end

    def __call__(self, state, series: DiagnosticSeries) -> None:
        final = self.t_end is not None and abs(state.t - self.t_end) < 1e-9 * max(1.0, abs(self.t_end))
        if state.step_count % self.every == 0 or final:
            if series.snapshots and series.snapshots[-1].step_count == state.step_count:
                return
            series.snapshots.append(Snapshot(state.t, state.step_count, field=state.u.copy()))
