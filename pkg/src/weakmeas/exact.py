"""Closed-form evolution under ``H = g0 N sigma_x``.

``N`` commutes with ``H``, so each Fock level ``|n>`` evolves independently
by the qubit rotation ``exp(-i g n sigma_x)``:

    alpha|g> + beta|e>  ->  eta_g(n)|g> + eta_e(n)|e>
    eta_g(n) = alpha cos(gn) - i beta sin(gn)
    eta_e(n) = beta cos(gn) - i alpha sin(gn)

Joint states are laid out qubit-major, dims ``(2, n_max + 1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .hilbert import FockPointerState, JointState, QubitState, ValidationError
from .weak_values import IntensityReport

QubitOutcome = Literal["g", "e"]
_OUTCOME_INDEX = {"g": 0, "e": 1}


@dataclass(frozen=True)
class EtaPair:
    eta_g: complex
    eta_e: complex
    n: int
    g: float


def eta_coefficients(s0: QubitState, g: float, n: int) -> EtaPair:
    if n < 0:
        raise ValidationError(f"Fock index must be nonnegative, got {n}")
    c, s = math.cos(g * n), math.sin(g * n)
    return EtaPair(s0.alpha * c - 1j * s0.beta * s, s0.beta * c - 1j * s0.alpha * s, n, g)


def evolve_exact(s0: QubitState, phi0: FockPointerState, g: float) -> JointState:
    """``exp(-i g N sigma_x) (s0 x phi0)`` evaluated level by level."""
    gn = g * np.arange(phi0.dim)
    c, s = np.cos(gn), np.sin(gn)
    eta_g = s0.alpha * c - 1j * s0.beta * s
    eta_e = s0.beta * c - 1j * s0.alpha * s
    amps = np.stack([phi0.amps * eta_g, phi0.amps * eta_e])
    return JointState((2, phi0.dim), amps.reshape(-1), normalized=s0.normalized and phi0.normalized)


def _check_index(psi_f: JointState, m: int) -> None:
    if len(psi_f.dims) != 2 or psi_f.dims[0] != 2:
        raise ValidationError(f"expected qubit x Fock state, got dims {psi_f.dims}")
    if not 0 <= m < psi_f.dims[1]:
        raise IndexError(f"Fock index {m} outside [0, {psi_f.dims[1] - 1}]")


def fock_probability(psi_f: JointState, m: int) -> float:
    """Unconditional probability of finding the pointer in ``|m>``."""
    _check_index(psi_f, m)
    col = psi_f.tensor()[:, m]
    return float(np.vdot(col, col).real)


def conditional_probability(psi_f: JointState, m: int, qubit_outcome: QubitOutcome,
                            renormalized: bool = False) -> float:
    """Probability of pointer ``|m>`` together with the qubit outcome.

    By default the joint probability ``I_m |eta|^2`` is returned.  With
    ``renormalized=True`` it is divided by ``I_m``, giving the outcome
    probability within the pointer sub-ensemble.
    """
    _check_index(psi_f, m)
    p = float(abs(psi_f.tensor()[_OUTCOME_INDEX[qubit_outcome], m]) ** 2)
    if renormalized:
        i_m = fock_probability(psi_f, m)
        if i_m == 0:
            raise ValidationError(f"pointer level {m} has zero probability")
        return p / i_m
    return p


def eta_g_probability(s0: QubitState, g: float, n: int) -> float:
    """``|eta_g(n)|^2 = |alpha|^2 cos^2 + |beta|^2 sin^2 + sin(2gn) Im(alpha* beta)``."""
    x = g * n
    return (abs(s0.alpha) ** 2 * math.cos(x) ** 2 + abs(s0.beta) ** 2 * math.sin(x) ** 2
            + math.sin(2 * x) * (s0.alpha.conjugate() * s0.beta).imag)


def exact_report(s0: QubitState, phi0: FockPointerState, g: float, m: int) -> IntensityReport:
    psi = evolve_exact(s0, phi0, g)
    i0 = float(abs(phi0.amps[m]) ** 2)
    i_s = conditional_probability(psi, m, "g")
    i_comp = conditional_probability(psi, m, "e")
    return IntensityReport(i0, fock_probability(psi, m), i_s, i_comp,
                           i_s - i0 * abs(s0.alpha) ** 2, "exact")
