"""Experiment configuration files.

Configs are INI-style documents (``configparser`` syntax; full-line ``#`` or ``;``
comments, inline ``#`` comments).  Recognised sections and keys::

    [experiment]  type = weak_value | intensity_sweep | exact_vs_first_order
                         | ion_protocol | estimate
                  observable = sigma_x | sigma_y | sigma_z      (weak_value only)
    [qubit]       alpha_re, alpha_im, beta_re, beta_im
    [postselect]  alpha_re, alpha_im, beta_re, beta_im          (optional)
    [pointer]     n_max, levels = "n: re im; n: re im; ...", m
    [coupling]    g  and/or  g0, t
    [sweep]       param = g | g0 | t, start, stop, points, scale = linear | log
    [ion]         omega0, delta, omega_s, theta, omega_r, mode = effective | full_jc
    [sampling]    shots, seed, repeats
    [output]      path, format = csv | json

Angles are radians and frequencies angular (hbar = 1).  Qubit and pointer
amplitudes are normalized on load.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field

import numpy as np

from .hilbert import DEFAULT_N_MAX, FockPointerState, QubitState, ValidationError
from .weak_values import CouplingSpec

EXPERIMENTS = ("weak_value", "intensity_sweep", "exact_vs_first_order", "ion_protocol", "estimate")
OBSERVABLES = ("sigma_x", "sigma_y", "sigma_z")

SCHEMA: dict[str, set[str]] = {
    "experiment": {"type", "observable"},
    "qubit": {"alpha_re", "alpha_im", "beta_re", "beta_im"},
    "postselect": {"alpha_re", "alpha_im", "beta_re", "beta_im"},
    "pointer": {"n_max", "levels", "m"},
    "coupling": {"g", "g0", "t"},
    "sweep": {"param", "start", "stop", "points", "scale"},
    "ion": {"omega0", "delta", "omega_s", "theta", "omega_r", "mode"},
    "sampling": {"shots", "seed", "repeats"},
    "output": {"path", "format"},
}

REQUIRED: dict[str, tuple[str, ...]] = {
    "weak_value": ("qubit",),
    "intensity_sweep": ("qubit", "pointer"),
    "exact_vs_first_order": ("qubit", "pointer"),
    "ion_protocol": ("qubit", "pointer", "ion"),
    "estimate": ("qubit", "pointer", "sampling"),
}


class ConfigError(ValueError):
    """One or more validation problems; ``errors`` lists all of them."""

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass(frozen=True)
class SweepSpec:
    param: str
    start: float
    stop: float
    points: int
    scale: str = "linear"

    def values(self) -> np.ndarray:
        if self.scale == "log":
            return np.geomspace(self.start, self.stop, self.points)
        return np.linspace(self.start, self.stop, self.points)


@dataclass(frozen=True)
class IonConfig:
    omega0: float = 1.0
    delta: float | None = None
    omega_s: float = 1.0
    theta: float = -math.pi / 2
    omega_r: float = 1.0
    mode: str = "effective"


@dataclass(frozen=True)
class SamplingConfig:
    shots: int
    seed: int
    repeats: int = 1


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    qubit: QubitState
    observable: str = "sigma_x"
    postselect: QubitState | None = None
    pointer: FockPointerState | None = None
    m: int = 1
    coupling: CouplingSpec | None = None
    sweep: SweepSpec | None = None
    ion: IonConfig | None = None
    sampling: SamplingConfig | None = None
    output_path: str | None = None
    output_format: str = "csv"
    source: str = field(default="", compare=False)
    raw: dict[str, dict[str, str]] = field(default_factory=dict, compare=False)

    def couplings(self) -> list[CouplingSpec]:
        """Coupling at every sweep point (one point without a sweep)."""
        if self.sweep is None:
            return [self.coupling]
        out = []
        for v in self.sweep.values():
            v = float(v)
            if self.sweep.param == "g":
                out.append(CouplingSpec.from_g(v))
            elif self.sweep.param == "g0":
                out.append(CouplingSpec.from_rate(v, self.coupling.t))
            else:
                out.append(CouplingSpec.from_rate(self.coupling.g0, v))
        return out


class _Reader:
    """Typed access to one section, accumulating errors instead of raising."""

    def __init__(self, sections: dict[str, dict[str, str]], errors: list[str]):
        self.sections = sections
        self.errors = errors

    def get(self, section, key, kind=float, default=None, required=False):
        raw = self.sections.get(section, {}).get(key)
        if raw is None:
            if required:
                self.errors.append(f"[{section}] missing required key {key!r}")
            return default
        try:
            value = kind(raw)
        except ValueError:
            self.errors.append(f"[{section}] {key} = {raw!r} is not a valid {kind.__name__}")
            return default
        if kind is float and not math.isfinite(value):
            self.errors.append(f"[{section}] {key} must be finite")
            return default
        return value


def _parse_levels(text: str, n_max: int, errors: list[str]) -> dict[int, complex]:
    levels: dict[int, complex] = {}
    for chunk in filter(None, (c.strip() for c in text.split(";"))):
        try:
            n_part, amp_part = chunk.split(":")
            n = int(n_part)
            nums = [float(x) for x in amp_part.split()]
            if len(nums) not in (1, 2):
                raise ValueError
        except ValueError:
            errors.append(f"[pointer] malformed level entry {chunk!r}; expected 'n: re [im]'")
            continue
        if not 0 <= n <= n_max:
            errors.append(f"[pointer] level {n} outside [0, n_max={n_max}]")
            continue
        if n in levels:
            errors.append(f"[pointer] level {n} given twice")
        levels[n] = complex(nums[0], nums[1] if len(nums) == 2 else 0.0)
    return levels


def _qubit(r: _Reader, section: str) -> QubitState | None:
    vals = [r.get(section, k, default=0.0) for k in ("alpha_re", "alpha_im", "beta_re", "beta_im")]
    try:
        return QubitState.from_unnormalized(complex(vals[0], vals[1]), complex(vals[2], vals[3]))
    except ValidationError as exc:
        r.errors.append(f"[{section}] {exc}")
        return None


def parse_config(text: str) -> ExperimentConfig:
    """Parse and fully validate a config document.

    Raises :class:`ConfigError` listing every problem found.
    """
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError([f"malformed config: {exc}"]) from exc

    errors: list[str] = []
    sections = {s: dict(parser[s]) for s in parser.sections()}
    for s, keys in sections.items():
        if s not in SCHEMA:
            errors.append(f"unknown section [{s}]")
            continue
        for k in keys:
            if k not in SCHEMA[s]:
                errors.append(f"[{s}] unknown key {k!r}")

    r = _Reader(sections, errors)
    experiment = r.get("experiment", "type", str, required=True)
    if experiment is not None and experiment not in EXPERIMENTS:
        errors.append(f"[experiment] type {experiment!r} not one of {', '.join(EXPERIMENTS)}")
        experiment = None
    if experiment is not None:
        missing = [s for s in REQUIRED[experiment] if s not in sections]
        if missing:
            errors.append(f"experiment {experiment!r} requires sections "
                          f"{', '.join('[' + s + ']' for s in REQUIRED[experiment])}; "
                          f"missing {', '.join('[' + s + ']' for s in missing)}")

    observable = r.get("experiment", "observable", str, default="sigma_x")
    if observable not in OBSERVABLES:
        errors.append(f"[experiment] observable {observable!r} not one of {', '.join(OBSERVABLES)}")

    qubit = _qubit(r, "qubit") if "qubit" in sections else None
    postselect = _qubit(r, "postselect") if "postselect" in sections else None

    pointer, m = None, 1
    if "pointer" in sections:
        n_max = r.get("pointer", "n_max", int, default=DEFAULT_N_MAX)
        if n_max is not None and n_max < 0:
            errors.append("[pointer] n_max must be nonnegative")
            n_max = None
        m = r.get("pointer", "m", int, default=1)
        text_levels = r.get("pointer", "levels", str, required=True)
        if n_max is not None and text_levels is not None:
            levels = _parse_levels(text_levels, n_max, errors)
            if levels:
                try:
                    pointer = FockPointerState.from_levels(levels, n_max, normalize=True)
                except ValidationError as exc:
                    errors.append(f"[pointer] {exc}")
        if pointer is not None and m is not None and not 0 <= m <= pointer.n_max:
            errors.append(f"[pointer] m = {m} outside [0, n_max={pointer.n_max}]")

    sweep = None
    if "sweep" in sections:
        param = r.get("sweep", "param", str, required=True)
        start = r.get("sweep", "start", required=True)
        stop = r.get("sweep", "stop", required=True)
        points = r.get("sweep", "points", int, required=True)
        scale = r.get("sweep", "scale", str, default="linear")
        ok = None not in (param, start, stop, points)
        if param is not None and param not in ("g", "g0", "t"):
            errors.append(f"[sweep] param {param!r} not one of g, g0, t")
            ok = False
        if points is not None and points < 2:
            errors.append(f"[sweep] points = {points}: points >= 2 required")
            ok = False
        if scale not in ("linear", "log"):
            errors.append(f"[sweep] scale {scale!r} not one of linear, log")
            ok = False
        if scale == "log" and None not in (start, stop) and (start <= 0 or stop <= 0):
            errors.append("[sweep] log scale needs positive start and stop")
            ok = False
        if ok:
            sweep = SweepSpec(param, start, stop, points, scale)

    coupling = None
    g = r.get("coupling", "g")
    g0 = r.get("coupling", "g0")
    t = r.get("coupling", "t")
    if (g0 is None) != (t is None):
        errors.append("[coupling] g0 and t must be given together")
    elif g0 is not None and g is not None:
        if not math.isclose(g, g0 * t, rel_tol=1e-12, abs_tol=1e-15):
            errors.append(f"[coupling] inconsistent coupling: g = {g!r} but g0*t = {g0 * t!r}")
        else:
            coupling = CouplingSpec(g0, t, g0 * t)
    elif g0 is not None:
        coupling = CouplingSpec.from_rate(g0, t)
    elif g is not None:
        coupling = CouplingSpec.from_g(g)
    if coupling is not None and coupling.g < 0:
        errors.append("[coupling] g must be nonnegative")

    needs_coupling = experiment not in (None, "weak_value")
    if needs_coupling:
        if sweep is None and coupling is None and not _errors_about(errors, "coupling"):
            errors.append(f"experiment {experiment!r} needs [coupling] g (or g0, t) or a [sweep]")
        if sweep is not None and sweep.param in ("g0", "t") and (g0 is None or t is None):
            errors.append(f"[sweep] param {sweep.param!r} needs [coupling] g0 and t")
        if sweep is not None and sweep.param == "g" and min(sweep.start, sweep.stop) < 0:
            errors.append("[sweep] g values must be nonnegative")

    ion = None
    if "ion" in sections:
        mode = r.get("ion", "mode", str, default="effective")
        if mode not in ("effective", "full_jc"):
            errors.append(f"[ion] mode {mode!r} not one of effective, full_jc")
        delta = r.get("ion", "delta")
        if mode == "full_jc" and not delta:
            errors.append("[ion] full_jc mode needs a nonzero delta")
        ion = IonConfig(r.get("ion", "omega0", default=1.0), delta,
                        r.get("ion", "omega_s", default=1.0),
                        r.get("ion", "theta", default=-math.pi / 2),
                        r.get("ion", "omega_r", default=1.0), mode)
        for name in ("omega0", "omega_s", "omega_r"):
            value = getattr(ion, name)
            if value is not None and value <= 0:
                errors.append(f"[ion] {name} must be positive")

    sampling = None
    if "sampling" in sections:
        shots = r.get("sampling", "shots", int, required=True)
        seed = r.get("sampling", "seed", int, required=True)
        repeats = r.get("sampling", "repeats", int, default=1)
        if shots is not None and shots < 1:
            errors.append("[sampling] shots must be >= 1")
        if seed is not None and not 0 <= seed < 2 ** 64:
            errors.append("[sampling] seed must be an unsigned 64-bit integer")
        if repeats is not None and repeats < 1:
            errors.append("[sampling] repeats must be >= 1")
        if None not in (shots, seed, repeats):
            sampling = SamplingConfig(shots, seed, repeats)

    fmt = r.get("output", "format", str, default="csv")
    if fmt not in ("csv", "json"):
        errors.append(f"[output] format {fmt!r} not one of csv, json")

    if errors:
        raise ConfigError(errors)
    return ExperimentConfig(
        experiment=experiment, qubit=qubit, observable=observable, postselect=postselect,
        pointer=pointer, m=m, coupling=coupling, sweep=sweep, ion=ion, sampling=sampling,
        output_path=r.get("output", "path", str), output_format=fmt, source=text, raw=sections)


def _errors_about(errors: list[str], section: str) -> bool:
    return any(e.startswith(f"[{section}]") for e in errors)


def load_config(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
