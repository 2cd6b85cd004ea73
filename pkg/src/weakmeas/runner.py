"""Run configured experiments and write result tables."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import platform
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .config import ExperimentConfig
from .exact import exact_report
from .hilbert import QubitState, sigma_x, sigma_y, sigma_z
from .ion import run_ion_protocol
from .sampling import (
    RNG_NAME,
    estimate_g,
    estimate_g_unconditional,
    joint_outcome_probs,
    sample_shots,
    task_seed,
)
from .weak_values import (
    OrthogonalPostSelectionError,
    intensity_first_order,
    postselected_intensity_first_order,
    weak_value,
)

_OBSERVABLES = {"sigma_x": sigma_x, "sigma_y": sigma_y, "sigma_z": sigma_z}


class EngineError(RuntimeError):
    """An engine rejected the configured parameters."""


@dataclass
class ResultTable:
    columns: list[str]
    rows: list[list[float]] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        for row in self.rows:
            if len(row) != len(self.columns):
                raise ValueError(f"row of length {len(row)} for {len(self.columns)} columns")

    def column(self, name: str) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([row[i] for row in self.rows], dtype=float)

    def to_dict(self) -> dict:
        return {"metadata": self.metadata, "columns": self.columns, "rows": self.rows}


def build_id() -> str:
    """Content hash of the package sources, stable across runs of the same code."""
    h = hashlib.sha1()
    pkg = resources.files("weakmeas")
    for name in sorted(p.name for p in pkg.iterdir() if p.name.endswith(".py")):
        h.update(name.encode())
        h.update(pkg.joinpath(name).read_bytes())
    return h.hexdigest()[:12]


def _metadata(cfg: ExperimentConfig) -> dict:
    return {
        "experiment": cfg.experiment,
        "config": cfg.source,
        "config_sections": cfg.raw,
        "seed": None if cfg.sampling is None else cfg.sampling.seed,
        "versions": {"weakmeas": __version__, "numpy": np.__version__,
                     "python": platform.python_version()},
        "rng": RNG_NAME,
        "build_id": build_id(),
    }


def _run_weak_value(cfg: ExperimentConfig) -> ResultTable:
    A = _OBSERVABLES[cfg.observable]()
    targets = [QubitState.ground(), QubitState.excited()]
    if cfg.postselect is not None:
        targets.append(cfg.postselect)
    table = ResultTable(["postselect", "defined", "value_re", "value_im",
                         "overlap_re", "overlap_im", "overlap_prob"])
    for i, sf in enumerate(targets):
        try:
            wv = weak_value(A, cfg.qubit, sf)
        except OrthogonalPostSelectionError:
            table.rows.append([float(i), 0.0, math.nan, math.nan, 0.0, 0.0, 0.0])
            continue
        table.rows.append([float(i), 1.0, wv.value.real, wv.value.imag,
                           wv.overlap.real, wv.overlap.imag, wv.overlap_prob])
    return table


def _run_intensity_sweep(cfg: ExperimentConfig) -> ResultTable:
    A = sigma_x()
    table = ResultTable(["g", "I0", "I_s", "I_comp", "I_g", "I_total"])
    for c in cfg.couplings():
        rep = intensity_first_order(cfg.qubit, cfg.pointer, A, c.g, cfg.m)
        table.rows.append([c.g, rep.i0, rep.i_s, rep.i_comp, rep.i_g, rep.i_total])
    return table


def _run_exact_vs_first_order(cfg: ExperimentConfig) -> ResultTable:
    table = ResultTable(["g", "I_s_first", "I_s_exact", "I_comp_first", "I_comp_exact",
                         "I_total", "residual"])
    c_m = cfg.pointer.amps[cfg.m]
    for c in cfg.couplings():
        first = postselected_intensity_first_order(cfg.qubit, c_m, c.g, cfg.m)
        ex = exact_report(cfg.qubit, cfg.pointer, c.g, cfg.m)
        residual = max(abs(first.i_s - ex.i_s), abs(first.i_comp - ex.i_comp))
        table.rows.append([c.g, first.i_s, ex.i_s, first.i_comp, ex.i_comp, ex.i_total, residual])
    return table


def _run_ion_protocol(cfg: ExperimentConfig) -> ResultTable:
    ion = cfg.ion
    table = ResultTable(["g", "P_up_r", "P_up_r_down", "P_up_r_up", "leakage",
                         "I1_exact", "I_s_exact", "I_comp_exact"])
    for c in cfg.couplings():
        res = run_ion_protocol(cfg.qubit, cfg.pointer, c.g, mode=ion.mode, omega0=ion.omega0,
                               delta=ion.delta, omega_s=ion.omega_s, theta=ion.theta,
                               omega_r=ion.omega_r)
        ex = exact_report(cfg.qubit, cfg.pointer, c.g, 1)
        table.rows.append([c.g, res.p_up_r, res.p_up_r_down, res.p_up_r_up, res.leakage,
                           ex.i_total, ex.i_s, ex.i_comp])
    return table


def _run_estimate(cfg: ExperimentConfig) -> ResultTable:
    s = cfg.sampling
    table = ResultTable(["g", "task", "g_hat", "std_error", "n_used",
                         "g_hat_uncond", "std_error_uncond", "covers_g", "uncond_covers_zero"])
    c_m = cfg.pointer.amps[cfg.m]
    task = 0
    for c in cfg.couplings():
        probs = joint_outcome_probs(cfg.qubit, cfg.pointer, c.g)
        for _ in range(s.repeats):
            # per-task seed is recoverable from the master seed and the task column
            rec = sample_shots(probs, s.shots, task_seed(s.seed, task))
            post = estimate_g(rec, cfg.qubit, cfg.m)
            unc = estimate_g_unconditional(rec, cfg.qubit, c_m, cfg.m)
            table.rows.append([c.g, float(task), post.g_hat, post.std_error,
                               float(post.n_used), unc.g_hat, unc.std_error,
                               float(post.covers(c.g)), float(unc.covers(0.0))])
            task += 1
    return table


_DISPATCH = {
    "weak_value": _run_weak_value,
    "intensity_sweep": _run_intensity_sweep,
    "exact_vs_first_order": _run_exact_vs_first_order,
    "ion_protocol": _run_ion_protocol,
    "estimate": _run_estimate,
}


def run_experiment(cfg: ExperimentConfig) -> ResultTable:
    try:
        table = _DISPATCH[cfg.experiment](cfg)
    except ValueError as exc:
        points = [c.g for c in cfg.couplings()] if cfg.experiment != "weak_value" else []
        raise EngineError(f"{cfg.experiment} failed ({type(exc).__name__}: {exc}); "
                          f"qubit=({cfg.qubit.alpha}, {cfg.qubit.beta}), m={cfg.m}, "
                          f"g values={points}") from exc
    table.metadata = _metadata(cfg)
    return table


def _fmt(x: float) -> str:
    return format(float(x), ".16e")


def table_to_csv(table: ResultTable) -> str:
    """CSV text: ``#``-prefixed JSON metadata line, header row, then data rows."""
    buf = io.StringIO()
    buf.write("# " + json.dumps(table.metadata, sort_keys=True) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([_fmt(x) for x in row])
    return buf.getvalue()


def table_to_json(table: ResultTable) -> str:
    return json.dumps(table.to_dict(), indent=2, sort_keys=False) + "\n"


def emit(table: ResultTable, fmt: str, path) -> None:
    """Write ``table`` as ``csv`` or ``json``; ``path`` may be ``"-"`` for stdout."""
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown format {fmt!r}")
    text = table_to_csv(table) if fmt == "csv" else table_to_json(table)
    if str(path) == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def load_table(path) -> ResultTable:
    """Read a table written by :func:`emit` (either format)."""
    text = Path(path).read_text(encoding="utf-8")
    if text.startswith("# "):
        head, _, body = text.partition("\n")
        rows = list(csv.reader(io.StringIO(body)))
        return ResultTable(rows[0], [[float(x) for x in r] for r in rows[1:]],
                           json.loads(head[2:]))
    data = json.loads(text)
    return ResultTable(data["columns"], data["rows"], data["metadata"])


def summarize(table: ResultTable) -> str:
    lines = [f"experiment: {table.metadata.get('experiment')}",
             f"rows: {len(table.rows)}  columns: {', '.join(table.columns)}"]
    for name in table.columns:
        col = table.column(name)
        if col.size and np.all(np.isfinite(col)):
            lines.append(f"  {name:>20s}  min {col.min(): .6g}  max {col.max(): .6g}")
    return "\n".join(lines)
