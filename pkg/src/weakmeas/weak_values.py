"""First-order weak-measurement algebra.

The pointer observable is the number operator, so for a Fock-basis readout
``|m>`` the pointer weak value is exactly ``m``.  All first-order numbers are
reported raw (never clamped), tagged with ``order="first_order"``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Literal, NamedTuple

import numpy as np

from .hilbert import (
    DenseOperator,
    FockPointerState,
    QubitState,
    ValidationError,
    expm_propagate,
    number,
    op_tensor,
    tensor_product,
)

OVERLAP_EPS = 1e-14
REALITY_TOL = 1e-12
FIRST_ORDER_WARN = 0.3

Order = Literal["first_order", "exact"]


class OrthogonalPostSelectionError(ValidationError):
    """Post-selected state is orthogonal to the initial state."""


class UndefinedPointerWeakValueError(ValidationError):
    """The pointer readout has zero overlap with the initial pointer state."""


class FirstOrderValidityWarning(UserWarning):
    pass


@dataclass(frozen=True)
class WeakValueResult:
    value: complex
    overlap: complex
    overlap_prob: float


@dataclass(frozen=True)
class PointerWeakValue:
    value: complex
    basis_index: int | None


@dataclass(frozen=True)
class CouplingSpec:
    """Dimensionless coupling ``g = g0 * t``."""

    g0: float
    t: float
    g: float

    def __post_init__(self):
        if self.g < 0:
            raise ValidationError(f"g must be nonnegative, got {self.g}")
        if not math.isclose(self.g, self.g0 * self.t, rel_tol=1e-15, abs_tol=1e-15):
            raise ValidationError(f"inconsistent coupling: g = {self.g} but g0*t = {self.g0 * self.t}")

    @classmethod
    def from_g(cls, g: float) -> "CouplingSpec":
        return cls(g0=g, t=1.0, g=g)

    @classmethod
    def from_rate(cls, g0: float, t: float) -> "CouplingSpec":
        return cls(g0=g0, t=t, g=g0 * t)


@dataclass(frozen=True)
class IntensityReport:
    """Pointer probabilities for one readout outcome.

    ``i0`` is the uncoupled pointer probability, ``i_total`` the
    unconditional probability after coupling, ``i_s`` / ``i_comp`` the joint
    probabilities with the qubit found in ``|g>`` / ``|e>``, and ``i_g`` the
    coupling-induced shift of ``i_s``.
    """

    i0: float
    i_total: float
    i_s: float
    i_comp: float
    i_g: float
    order: Order


class RealityCheck(NamedTuple):
    holds: bool
    residual: float


def weak_value(A: DenseOperator, s0: QubitState, sf: QubitState) -> WeakValueResult:
    """``<sf|A|s0> / <sf|s0>`` together with the post-selection overlap."""
    if A.dim != 2:
        raise ValidationError(f"observable must be 2x2, got dim {A.dim}")
    for s in (s0, sf):
        if not s.normalized:
            raise ValidationError("weak_value needs normalized states")
    overlap = complex(np.vdot(sf.vector, s0.vector))
    if abs(overlap) < OVERLAP_EPS:
        raise OrthogonalPostSelectionError(
            f"|<sf|s0>| = {abs(overlap):.3e}: weak value undefined for orthogonal post-selection")
    numerator = complex(np.vdot(sf.vector, A.matrix @ s0.vector))
    return WeakValueResult(numerator / overlap, overlap, abs(overlap) ** 2)


def pointer_weak_value(phi0: FockPointerState, m: int) -> PointerWeakValue:
    """Pointer weak value of the number operator for Fock readout ``|m>``."""
    if not 0 <= m <= phi0.n_max:
        raise ValidationError(f"m = {m} outside [0, {phi0.n_max}]")
    c_m = phi0.amps[m]
    if abs(c_m) < OVERLAP_EPS:
        raise UndefinedPointerWeakValueError(f"c_{m} = 0: pointer weak value undefined")
    # number operator is diagonal, so <m|N|phi0> = m c_m and the ratio is m exactly
    return PointerWeakValue(complex(m), m)


def general_pointer_weak_value(phi0: FockPointerState, readout: np.ndarray,
                               pointer_op: DenseOperator | None = None) -> PointerWeakValue:
    """``<x|P|phi0> / <x|phi0>`` for an arbitrary readout vector ``x``."""
    x = np.asarray(readout, dtype=complex)
    P = number(phi0.n_max) if pointer_op is None else pointer_op
    overlap = complex(np.vdot(x, phi0.amps))
    if abs(overlap) < OVERLAP_EPS:
        raise UndefinedPointerWeakValueError("readout orthogonal to the pointer state")
    return PointerWeakValue(complex(np.vdot(x, P.matrix @ phi0.amps)) / overlap, None)


def _warn_first_order(g: float, n_max: int) -> None:
    if g * n_max > FIRST_ORDER_WARN:
        warnings.warn(f"g * n_max = {g * n_max:.3g} > {FIRST_ORDER_WARN}; "
                      "first-order intensities may be inaccurate",
                      FirstOrderValidityWarning, stacklevel=3)


def intensity_first_order(s0: QubitState, phi0: FockPointerState, A: DenseOperator,
                          g: float, m: int) -> IntensityReport:
    """First-order pointer intensities for Fock readout ``|m>``.

    The unconditional intensity is ``i0 * (1 + 2 g Im(P_w <A>))``.  The
    post-selected splits use the ``{|g>, |e>}`` basis and the expanded
    modulus ``i0 * (|o|^2 + 2 g Im(P_w o* a))`` with ``o = <q|s0>`` and
    ``a = <q|A|s0>``, which equals ``i0 |o|^2 (1 + 2 g P_w Im(A_w))`` whenever
    the weak value exists.
    """
    _warn_first_order(g, phi0.n_max)
    p_w = pointer_weak_value(phi0, m).value
    i0 = abs(phi0.amps[m]) ** 2
    a_s0 = A.matrix @ s0.vector
    expect = complex(np.vdot(s0.vector, a_s0))
    i_total = i0 * (1.0 + 2.0 * g * (p_w * expect).imag)
    splits = []
    for q in (0, 1):
        o, a = s0.vector[q], a_s0[q]
        splits.append(i0 * (abs(o) ** 2 + 2.0 * g * (p_w * np.conj(o) * a).imag))
    i_g = splits[0] - i0 * abs(s0.alpha) ** 2
    return IntensityReport(i0, i_total, splits[0], splits[1], i_g, "first_order")


def postselected_intensity_first_order(s0: QubitState, c_m: complex, g: float,
                                       m: int) -> IntensityReport:
    """Closed-form first-order splits for ``A = sigma_x`` and readout ``|m>``."""
    i0 = abs(c_m) ** 2
    i_g = 2.0 * g * m * (np.conj(s0.alpha) * s0.beta).imag * i0
    i_s = i0 * abs(s0.alpha) ** 2 + i_g
    i_comp = i0 * abs(s0.beta) ** 2 - i_g
    return IntensityReport(i0, i0, i_s, i_comp, i_g, "first_order")


def reality_condition_check(A: DenseOperator, s0: QubitState, P_w: complex) -> RealityCheck:
    """Whether ``P_w <s0|A|s0>`` is real, i.e. the first-order shift cancels."""
    residual = abs((complex(P_w) * A.expectation(s0)).imag)
    return RealityCheck(residual <= REALITY_TOL, residual)


def intensity_exact(s0: QubitState, phi0: FockPointerState, A: DenseOperator, g: float,
                    readout: int | np.ndarray,
                    pointer_op: DenseOperator | None = None) -> IntensityReport:
    """Exact intensities from ``exp(-i g A x P)`` by dense exponentiation.

    ``readout`` is either a Fock index or an arbitrary pointer vector
    ``|x>``; ``pointer_op`` defaults to the number operator.
    """
    P = number(phi0.n_max) if pointer_op is None else pointer_op
    if isinstance(readout, (int, np.integer)):
        x = np.zeros(phi0.dim, dtype=complex)
        x[readout] = 1.0
    else:
        x = np.asarray(readout, dtype=complex)
    psi = expm_propagate(op_tensor(A, P), g, tensor_product(s0, phi0))
    amps = psi.tensor() @ x.conj()
    i0 = abs(np.vdot(x, phi0.amps)) ** 2
    i_s, i_comp = (float(abs(a) ** 2) for a in amps)
    return IntensityReport(i0, i_s + i_comp, i_s, i_comp, i_s - i0 * abs(s0.alpha) ** 2, "exact")
