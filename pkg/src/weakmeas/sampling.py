"""Seeded shot sampling and a first-order estimator for the coupling ``g``.

Randomness comes from numpy's ``Generator`` over the ``PCG64`` bit
generator, drawing all counts in one ``multinomial`` call.  Counts for a given
seed are stable for a fixed numpy version; the version is recorded in every
emitted result (see :mod:`weakmeas.runner`).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Hashable, Sequence

import numpy as np

from .exact import evolve_exact
from .hilbert import FockPointerState, QubitState, ValidationError

NEGATIVE_TOL = 1e-9
SUM_TOL = 1e-9
RNG_NAME = "numpy.random.Generator(PCG64).multinomial"


class UnidentifiableError(ValidationError):
    """``Im(alpha* beta) = 0``: ``g`` has no first-order signature."""


class NoSignalError(ValidationError):
    """Pointer outcome ``m = 0`` carries no signal (``P_w = 0``)."""


class RenormalizationWarning(UserWarning):
    pass


@dataclass(frozen=True)
class ShotRecord:
    counts: dict[Hashable, int]
    total: int
    seed: int
    labels: tuple[Hashable, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if sum(self.counts.values()) != self.total:
            raise ValidationError("counts do not sum to total")
        if not self.labels:
            object.__setattr__(self, "labels", tuple(self.counts))

    def __getitem__(self, label: Hashable) -> int:
        return self.counts.get(label, 0)


@dataclass(frozen=True)
class GEstimate:
    g_hat: float
    std_error: float
    n_used: int

    def covers(self, value: float, k: float = 3.0) -> bool:
        return abs(self.g_hat - value) <= k * self.std_error


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def task_seed(master_seed: int, index: int) -> int:
    """Independent 64-bit seed for task ``index`` of a run seeded with ``master_seed``."""
    return int(np.random.SeedSequence([master_seed, index]).generate_state(1, np.uint64)[0])


def sample_shots(probs: Sequence[tuple[Hashable, float]], n: int, seed: int) -> ShotRecord:
    """Multinomial draw of ``n`` shots over labelled outcome probabilities."""
    if n < 0:
        raise ValidationError(f"shot count must be nonnegative, got {n}")
    labels = [label for label, _ in probs]
    if len(set(labels)) != len(labels):
        raise ValidationError("duplicate outcome labels")
    p = np.array([float(q) for _, q in probs])
    if np.any(~np.isfinite(p)):
        raise ValidationError("probabilities must be finite")
    if np.any(p < -NEGATIVE_TOL):
        bad = [lab for lab, q in zip(labels, p) if q < -NEGATIVE_TOL]
        raise ValidationError(f"negative probabilities for outcomes {bad}")
    p = np.clip(p, 0.0, None)
    total = p.sum()
    if total == 0:
        raise ValidationError("probabilities sum to zero")
    if abs(total - 1.0) > SUM_TOL:
        warnings.warn(f"probabilities sum to {total!r}; renormalizing", RenormalizationWarning,
                      stacklevel=2)
    p = p / total
    counts = make_rng(seed).multinomial(n, p)
    return ShotRecord({lab: int(c) for lab, c in zip(labels, counts)}, int(n), int(seed),
                      tuple(labels))


def joint_outcome_probs(s0: QubitState, phi0: FockPointerState,
                        g: float) -> list[tuple[tuple[int, str], float]]:
    """Exact probabilities of ``(pointer level, qubit outcome)`` pairs."""
    probs = evolve_exact(s0, phi0, g).probabilities()
    return [((m, q), float(probs[i, m])) for m in range(phi0.dim) for i, q in enumerate("ge")]


def _sensitivity(s0: QubitState, m: int) -> float:
    if m == 0:
        raise NoSignalError("pointer outcome m = 0 has P_w = 0 and carries no signal")
    if m < 0:
        raise ValidationError(f"m must be nonnegative, got {m}")
    im = (s0.alpha.conjugate() * s0.beta).imag
    if abs(im) < 1e-15:
        raise UnidentifiableError("Im(alpha* beta) = 0: g is unidentifiable at first order")
    return 2.0 * m * im


def estimate_g(record: ShotRecord, s0: QubitState, m: int) -> GEstimate:
    """Invert the first-order post-selected intensity within pointer outcome ``m``.

    ``p = N(m, g) / N(m)`` estimates ``|alpha|^2 + 2 g m Im(alpha* beta)``.
    """
    slope = _sensitivity(s0, m)
    hits, n_used = record[(m, "g")], record[(m, "g")] + record[(m, "e")]
    if n_used == 0:
        raise ValidationError(f"no shots with pointer outcome m = {m}")
    p = hits / n_used
    g_hat = (p - abs(s0.alpha) ** 2) / slope
    return GEstimate(g_hat, float(np.sqrt(p * (1 - p) / n_used) / abs(slope)), n_used)


def estimate_g_unconditional(record: ShotRecord, s0: QubitState, c_m: complex,
                             m: int) -> GEstimate:
    """Same inversion on total-ensemble data, where the qubit outcome is ignored.

    The pointer fraction ``N(m) / N`` is compared to ``|c_m|^2`` with the
    post-selected sensitivity ``2 m Im(alpha* beta) |c_m|^2``.  When the
    first-order shift cancels in the total ensemble the estimate is centred
    on zero whatever the true ``g``.
    """
    i0 = abs(c_m) ** 2
    if i0 == 0:
        raise ValidationError(f"c_{m} = 0")
    slope = _sensitivity(s0, m) * i0
    hits = sum(c for lab, c in record.counts.items() if isinstance(lab, tuple) and lab[0] == m)
    if record.total == 0:
        raise ValidationError("empty record")
    f = hits / record.total
    return GEstimate((f - i0) / slope, float(np.sqrt(f * (1 - f) / record.total) / abs(slope)),
                     record.total)
