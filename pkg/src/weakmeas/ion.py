"""Pulse-level model of the two-ion weak measurement.

Register layout is ``ion1 (x) CM mode (x) ion2`` with dims
``(2, n_max + 1, 2)``; internal levels are ordered ``|down> = 0, |up> = 1``
for both ions.  The measured qubit lives on ion 1 in the rotated basis

    |e> = (|up> + |down>) / sqrt(2),   |g> = (|up> - |down>) / sqrt(2)

in which ``tau_z`` acts as ``sigma_x``.

Phase conventions
-----------------
A red-sideband pulse with Rabi frequency ``W``, detuning ``d`` and start
time ``t0`` is generated by ``W (e^{i d t} a tau+ + e^{-i d t} a^dag tau-)``
with absolute time ``t``.  It couples the pairs ``{|up, n>, |down, n+1>}``
and is solved exactly per pair in the frame ``diag(e^{i d t/2}, e^{-i d t/2})``
where the generator is constant: ``W sqrt(n+1) sigma_x + (d/2) sigma_z``.
On resonance a ``W t = pi/2`` pulse maps ``|down, n+1>`` to
``-i |up, n>`` with no further global phase; this is the only phase
convention the logic tables depend on.

Far off resonance the sideband generates ``(W^2/d) (N tau_z + |up><up|)``.
The ``|up><up|`` light shift is removed by the frame rotation
``exp(+i g0 t |up><up|)`` (:func:`stark_compensation`), leaving
``g0 N tau_z`` with ``g0 = W^2 / d`` and a positive sign, as confirmed by
direct numerical integration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .hilbert import (
    FockPointerState,
    JointState,
    QubitState,
    ValidationError,
    annihilation,
    creation,
    identity,
    lowering,
    op_tensor_all,
    raising,
    tensor_all,
    warn_if_truncated,
)
from .weak_values import IntensityReport

PulseKind = Literal["red_sideband_ion1", "red_sideband_ion2", "carrier_ion1"]
ION1, MODE, ION2 = 0, 1, 2
DOWN, UP = 0, 1
TOP_LEVEL_TOL = 1e-8
ION2_PREP_TOL = 1e-10
SUPPORT_TOL = 1e-14

_SQRT_HALF = 1 / math.sqrt(2)
# columns: |g>, |e> expressed in (|down>, |up>)
GE_TO_UPDOWN = np.array([[-_SQRT_HALF, _SQRT_HALF],
                         [_SQRT_HALF, _SQRT_HALF]], dtype=complex)


class TruncationError(ValidationError):
    """Population would be pushed past the top Fock level."""


class PreconditionError(ValidationError):
    pass


@dataclass(frozen=True)
class PulseSpec:
    kind: PulseKind
    rabi: float
    duration: float
    detuning: float = 0.0
    phase: float = 0.0
    start: float = 0.0

    def __post_init__(self):
        if self.kind not in ("red_sideband_ion1", "red_sideband_ion2", "carrier_ion1"):
            raise ValidationError(f"unknown pulse kind {self.kind!r}")
        if self.rabi < 0:
            raise ValidationError(f"Rabi frequency must be nonnegative, got {self.rabi}")
        if self.duration < 0:
            raise ValidationError(f"duration must be nonnegative, got {self.duration}")


@dataclass(frozen=True)
class IonRegister:
    state: JointState

    def __post_init__(self):
        dims = self.state.dims
        if len(dims) != 3 or dims[ION1] != 2 or dims[ION2] != 2:
            raise ValidationError(f"ion register needs dims (2, n_max+1, 2), got {dims}")
        if not self.state.normalized:
            raise ValidationError("ion register must be normalized")

    @property
    def n_max(self) -> int:
        return self.state.dims[MODE] - 1

    @property
    def tensor(self) -> np.ndarray:
        return self.state.tensor()

    def _replace(self, amps: np.ndarray) -> "IonRegister":
        return IonRegister(self.state.with_amps(amps.reshape(-1), norm_tol=1e-10))


@dataclass(frozen=True)
class ShelvingReadout:
    p_fluoresce: float
    target: Literal["ion1", "ion2"]


@dataclass(frozen=True)
class IonProtocolResult:
    """Fluorescence probabilities after the full pulse sequence.

    ``p_up_r`` is P(ion 2 bright), ``p_up_r_down`` and ``p_up_r_up`` the joint
    probabilities with ion 1 dark / bright.  ``leakage`` is the CM population
    outside ``{|0>, |1>}`` just before the readout pulse.
    """

    p_up_r: float
    p_up_r_down: float
    p_up_r_up: float
    leakage: float
    i0: float

    def as_report(self, s0: QubitState) -> IntensityReport:
        i_g = self.p_up_r_down - self.i0 * abs(s0.alpha) ** 2
        return IntensityReport(self.i0, self.p_up_r, self.p_up_r_down, self.p_up_r_up, i_g, "exact")


def qubit_to_ion(s0: QubitState) -> np.ndarray:
    """Amplitudes of ``alpha|g> + beta|e>`` on ``(|down>, |up>)``."""
    return GE_TO_UPDOWN @ s0.vector


def ion1_in_ge_basis(reg: IonRegister) -> np.ndarray:
    """Register tensor with ion 1 re-expressed in the ``(|g>, |e>)`` basis."""
    return np.tensordot(GE_TO_UPDOWN.conj().T, reg.tensor, axes=([1], [ION1]))


def prepare_register(s0: QubitState, phi0: FockPointerState) -> IonRegister:
    """Ion 1 in ``s0``, CM mode in ``phi0``, ion 2 in ``|down_r>``."""
    ion1 = JointState((2,), qubit_to_ion(s0))
    ion2 = JointState((2,), np.array([1.0, 0.0]))
    return IonRegister(tensor_all(ion1, phi0, ion2))


def sideband_hamiltonian(kind: PulseKind, rabi: float, detuning: float, n_max: int):
    """Time-dependent red-sideband generator on the full register, as ``t -> matrix``.

    Used as the independent oracle for the block solution.
    """
    a, ad = annihilation(n_max), creation(n_max)
    i2 = identity(2)
    if kind == "red_sideband_ion1":
        up = op_tensor_all(raising(), a, i2).matrix
        down = op_tensor_all(lowering(), ad, i2).matrix
    elif kind == "red_sideband_ion2":
        up = op_tensor_all(i2, a, raising()).matrix
        down = op_tensor_all(i2, ad, lowering()).matrix
    else:
        raise ValidationError(f"{kind!r} is not a sideband pulse")

    def H(t: float) -> np.ndarray:
        return rabi * (np.exp(1j * detuning * t) * up + np.exp(-1j * detuning * t) * down)

    return H


def _sideband(tensor: np.ndarray, ion_axis: int, pulse: PulseSpec) -> np.ndarray:
    psi = np.moveaxis(tensor, (ion_axis, MODE), (0, 1)).copy()
    n_max = psi.shape[1] - 1
    d, w = pulse.detuning, pulse.rabi
    t0, t1 = pulse.start, pulse.start + pulse.duration
    for n in range(n_max):
        # pair (|up, n>, |down, n+1>), over every state of the spectator ion
        c = np.stack([psi[UP, n], psi[DOWN, n + 1]])
        c = c * np.array([np.exp(-0.5j * d * t0), np.exp(0.5j * d * t0)])[:, None]
        k = w * math.sqrt(n + 1)
        big_w = math.hypot(k, d / 2)
        cos_, sinc = math.cos(big_w * pulse.duration), (
            math.sin(big_w * pulse.duration) / big_w if big_w else pulse.duration)
        U = np.array([[cos_ - 1j * sinc * d / 2, -1j * sinc * k],
                      [-1j * sinc * k, cos_ + 1j * sinc * d / 2]])
        c = U @ c
        c = c * np.array([np.exp(0.5j * d * t1), np.exp(-0.5j * d * t1)])[:, None]
        psi[UP, n], psi[DOWN, n + 1] = c[0], c[1]
    return np.moveaxis(psi, (0, 1), (ion_axis, MODE))


def _check_top_level(reg: IonRegister, ion_axis: int) -> None:
    top = np.moveaxis(reg.tensor, (ion_axis, MODE), (0, 1))[UP, reg.n_max]
    if np.max(np.abs(top), initial=0.0) > TOP_LEVEL_TOL:
        raise TruncationError(
            f"|up, n_max={reg.n_max}> populated (max |amp| = {np.max(np.abs(top)):.3e}); "
            "the sideband would couple it past the cutoff")


def jc_evolve(reg: IonRegister, pulse: PulseSpec) -> IonRegister:
    """Exact first-red-sideband evolution on ion 1 and the CM mode."""
    if pulse.kind != "red_sideband_ion1":
        raise ValidationError(f"jc_evolve needs a red_sideband_ion1 pulse, got {pulse.kind!r}")
    _check_top_level(reg, ION1)
    out = reg._replace(_sideband(reg.tensor, ION1, pulse))
    warn_if_truncated(out.state, MODE)
    return out


def effective_evolve(reg: IonRegister, g0: float, t: float) -> IonRegister:
    """Apply ``exp(-i g0 t N tau_z)`` to ion 1 and the CM mode."""
    n = np.arange(reg.n_max + 1)
    phase = np.exp(-1j * g0 * t * np.outer([-1.0, 1.0], n))
    return reg._replace(reg.tensor * phase[:, :, None])


def stark_compensation(reg: IonRegister, g0: float, t: float) -> IonRegister:
    """Undo the ``g0 |up><up|`` light shift: ``exp(+i g0 t |up><up|)`` on ion 1."""
    tensor = reg.tensor.copy()
    tensor[UP] *= np.exp(1j * g0 * t)
    return reg._replace(tensor)


def carrier_unitary(rabi: float, phase: float, duration: float) -> np.ndarray:
    """``exp(-i t W (e^{-i theta} sigma+ + e^{i theta} sigma-))`` on ``(|down>, |up>)``."""
    x = rabi * duration
    return np.array([[math.cos(x), -1j * math.sin(x) * np.exp(1j * phase)],
                     [-1j * math.sin(x) * np.exp(-1j * phase), math.cos(x)]])


def carrier_rotation(reg: IonRegister, pulse: PulseSpec) -> IonRegister:
    if pulse.kind != "carrier_ion1":
        raise ValidationError(f"carrier_rotation needs a carrier_ion1 pulse, got {pulse.kind!r}")
    U = carrier_unitary(pulse.rabi, pulse.phase, pulse.duration)
    return reg._replace(np.tensordot(U, reg.tensor, axes=([1], [ION1])))


def readout_map(reg: IonRegister, pulse: PulseSpec) -> IonRegister:
    """Red-sideband pulse on ion 2 mapping CM ``|1>`` onto ``|up_r>``.

    Components above ``|1>`` follow the same exact pair solution; use
    :func:`fock_leakage` on the input to quantify them.
    """
    if pulse.kind != "red_sideband_ion2":
        raise ValidationError(f"readout_map needs a red_sideband_ion2 pulse, got {pulse.kind!r}")
    bright = float(np.sum(np.abs(reg.tensor[:, :, UP]) ** 2))
    if bright > ION2_PREP_TOL:
        raise PreconditionError(f"ion 2 not prepared in |down_r>: P(up_r) = {bright:.3e}")
    return reg._replace(_sideband(reg.tensor, ION2, pulse))


def fock_leakage(reg: IonRegister, support: tuple[int, ...] = (0, 1)) -> float:
    probs = reg.state.marginal([MODE])
    return float(probs.sum() - probs[list(support)].sum())


def shelving_readout(reg: IonRegister, target: Literal["ion1", "ion2"]) -> ShelvingReadout:
    axis = ION1 if target == "ion1" else ION2
    return ShelvingReadout(float(reg.state.marginal([axis])[UP]), target)


def run_ion_protocol(s0: QubitState, phi0: FockPointerState, g: float,
                     mode: Literal["effective", "full_jc"] = "effective",
                     omega0: float = 1.0, delta: float | None = None,
                     omega_s: float = 1.0, theta: float = -math.pi / 2,
                     omega_r: float = 1.0) -> IonProtocolResult:
    """Prepare, couple, rotate, map and read out.

    In ``effective`` mode the coupling is ``exp(-i g N tau_z)``.  In
    ``full_jc`` mode ion 1 is driven on the red sideband with ``omega0`` and
    ``delta`` for ``t = g delta / omega0^2`` and then Stark-compensated.  The
    carrier pulse uses ``omega_s t = pi/4`` and the readout ``omega_r t = pi/2``.
    """
    if phi0.n_max < 1:
        raise PreconditionError("pointer needs n_max >= 1")
    if np.any(np.abs(phi0.amps[2:]) > SUPPORT_TOL):
        raise PreconditionError("pointer must be supported on {|0>, |1>}")
    if mode == "effective":
        reg = effective_evolve(prepare_register(s0, phi0), g, 1.0)
    elif mode == "full_jc":
        if delta is None or delta == 0:
            raise ValidationError("full_jc mode needs a nonzero detuning")
        g0 = omega0 ** 2 / delta
        t = g / g0
        # |up, 1> couples to |down, 2>; keep headroom above it
        reg = prepare_register(s0, phi0.padded(3))
        reg = jc_evolve(reg, PulseSpec("red_sideband_ion1", omega0, t, detuning=delta))
        reg = stark_compensation(reg, g0, t)
    else:
        raise ValidationError(f"unknown mode {mode!r}")
    reg = carrier_rotation(reg, PulseSpec("carrier_ion1", omega_s, math.pi / (4 * omega_s),
                                          phase=theta))
    leakage = fock_leakage(reg)
    reg = readout_map(reg, PulseSpec("red_sideband_ion2", omega_r, math.pi / (2 * omega_r)))
    joint = reg.state.marginal([ION1, ION2])
    return IonProtocolResult(float(joint[:, UP].sum()), float(joint[DOWN, UP]),
                             float(joint[UP, UP]), leakage, float(abs(phi0.amps[1]) ** 2))
