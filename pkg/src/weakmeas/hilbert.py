"""Dense state vectors and operators on small truncated Hilbert spaces.

Conventions used everywhere in the package:

* hbar = 1, Hamiltonians are angular frequencies.
* Qubit basis order: ``|g> = 0``, ``|e> = 1``.  Ion internal levels:
  ``|down> = 0``, ``|up> = 1``.  Fock index equals occupation number.
* Joint states are stored as flat vectors in row-major (C) order over
  ``dims``; the first subsystem varies slowest, so for dims ``(d0, d1, d2)``
  the index of ``(i, j, k)`` is ``(i * d1 + j) * d2 + k``.
"""

from __future__ import annotations

import math
import os
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

DEFAULT_MAX_DIM = 4096
DEFAULT_N_MAX = 16
NORM_TOL = 1e-12
HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-10
TRUNCATION_TOL = 1e-8
PROPAGATION_NORM_TOL = 1e-8


class CapacityError(ValueError):
    """Total Hilbert-space dimension exceeds the configured cap."""


class ValidationError(ValueError):
    """Input failed a structural or numerical precondition."""


class TruncationWarning(UserWarning):
    """Population reached the top level of a truncated Fock ladder."""


def max_dim() -> int:
    """Dimension cap, overridable through ``WEAKMEAS_MAX_DIM``."""
    raw = os.environ.get("WEAKMEAS_MAX_DIM")
    if raw is None:
        return DEFAULT_MAX_DIM
    value = int(raw)
    if value < 1:
        raise ValueError(f"WEAKMEAS_MAX_DIM must be positive, got {raw!r}")
    return value


def _check_capacity(dim: int) -> None:
    cap = max_dim()
    if dim > cap:
        raise CapacityError(f"total dimension {dim} exceeds cap {cap}")


def _finite(arr: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{what} contains NaN or Inf")


@dataclass(frozen=True)
class QubitState:
    """Qubit ``alpha|g> + beta|e>``."""

    alpha: complex
    beta: complex
    normalized: bool = True

    def __post_init__(self):
        object.__setattr__(self, "alpha", complex(self.alpha))
        object.__setattr__(self, "beta", complex(self.beta))
        _finite(self.vector, "qubit amplitudes")
        if self.normalized:
            norm2 = abs(self.alpha) ** 2 + abs(self.beta) ** 2
            if abs(norm2 - 1.0) > NORM_TOL:
                raise ValidationError(f"qubit not normalized: |alpha|^2+|beta|^2 = {norm2!r}")

    @classmethod
    def from_unnormalized(cls, alpha: complex, beta: complex) -> "QubitState":
        norm = math.hypot(abs(alpha), abs(beta))
        if norm == 0:
            raise ValidationError("cannot normalize the zero vector")
        return cls(alpha / norm, beta / norm)

    @classmethod
    def ground(cls) -> "QubitState":
        return cls(1.0, 0.0)

    @classmethod
    def excited(cls) -> "QubitState":
        return cls(0.0, 1.0)

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.alpha, self.beta], dtype=complex)

    def as_joint(self) -> "JointState":
        return JointState((2,), self.vector, normalized=self.normalized)


@dataclass(frozen=True)
class FockPointerState:
    """Pointer ``sum_n c_n |n>`` truncated at ``n_max``."""

    amps: np.ndarray
    normalized: bool = True

    def __post_init__(self):
        amps = np.array(self.amps, dtype=complex).reshape(-1)
        if amps.size == 0:
            raise ValidationError("pointer needs at least one Fock level")
        _finite(amps, "pointer amplitudes")
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)
        if self.normalized:
            norm2 = float(np.vdot(amps, amps).real)
            if abs(norm2 - 1.0) > NORM_TOL:
                raise ValidationError(f"pointer not normalized: sum |c_n|^2 = {norm2!r}")

    @classmethod
    def from_levels(cls, levels: dict[int, complex], n_max: int = DEFAULT_N_MAX,
                    normalize: bool = False) -> "FockPointerState":
        """Build from a sparse ``{n: c_n}`` map."""
        if n_max < 0:
            raise ValidationError("n_max must be nonnegative")
        amps = np.zeros(n_max + 1, dtype=complex)
        for n, c in levels.items():
            if not 0 <= n <= n_max:
                raise ValidationError(f"Fock level {n} outside [0, {n_max}]")
            amps[n] = c
        if normalize:
            norm = np.linalg.norm(amps)
            if norm == 0:
                raise ValidationError("cannot normalize the zero vector")
            amps = amps / norm
        return cls(amps)

    @classmethod
    def number_state(cls, n: int, n_max: int = DEFAULT_N_MAX) -> "FockPointerState":
        return cls.from_levels({n: 1.0}, n_max)

    @property
    def n_max(self) -> int:
        return self.amps.size - 1

    @property
    def dim(self) -> int:
        return self.amps.size

    def padded(self, n_max: int) -> "FockPointerState":
        """Same state on a ladder of at least ``n_max + 1`` levels."""
        if n_max <= self.n_max:
            return self
        amps = np.zeros(n_max + 1, dtype=complex)
        amps[: self.dim] = self.amps
        return FockPointerState(amps, normalized=self.normalized)

    def as_joint(self) -> "JointState":
        return JointState((self.dim,), self.amps, normalized=self.normalized)


@dataclass(frozen=True)
class JointState:
    """Dense amplitude vector over a tensor product of subsystems."""

    dims: tuple[int, ...]
    amps: np.ndarray
    normalized: bool = True
    norm_tol: float = field(default=NORM_TOL, repr=False, compare=False)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims or any(d < 1 for d in dims):
            raise ValidationError(f"invalid dims {dims}")
        total = math.prod(dims)
        _check_capacity(total)
        amps = np.array(self.amps, dtype=complex).reshape(-1)
        if amps.size != total:
            raise ValidationError(f"amplitude length {amps.size} != prod(dims) = {total}")
        _finite(amps, "joint amplitudes")
        amps.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "amps", amps)
        if self.normalized:
            norm = self.norm()
            if abs(norm - 1.0) > self.norm_tol:
                raise ValidationError(f"joint state not normalized: norm = {norm!r}")

    @classmethod
    def basis(cls, dims: Sequence[int], index: Sequence[int]) -> "JointState":
        amps = np.zeros(math.prod(dims), dtype=complex)
        amps[np.ravel_multi_index(tuple(index), tuple(dims))] = 1.0
        return cls(tuple(dims), amps)

    @property
    def dim(self) -> int:
        return self.amps.size

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def tensor(self) -> np.ndarray:
        """Amplitudes reshaped to ``dims`` (read-only view)."""
        return self.amps.reshape(self.dims)

    def with_amps(self, amps: np.ndarray, normalized: bool | None = None,
                  norm_tol: float = NORM_TOL) -> "JointState":
        if normalized is None:
            normalized = self.normalized
        return JointState(self.dims, amps, normalized=normalized, norm_tol=norm_tol)

    def probabilities(self) -> np.ndarray:
        """Born probabilities shaped like ``dims``."""
        return np.abs(self.tensor()) ** 2

    def marginal(self, keep: Sequence[int]) -> np.ndarray:
        """Joint outcome probabilities of the subsystems listed in ``keep``."""
        keep = tuple(keep)
        drop = tuple(i for i in range(len(self.dims)) if i not in keep)
        probs = self.probabilities().sum(axis=drop) if drop else self.probabilities()
        # sum() preserves ascending axis order; reorder to match ``keep``
        order = sorted(keep)
        return np.transpose(probs, [order.index(k) for k in keep])


StateLike = JointState | QubitState | FockPointerState


def _as_joint(state: StateLike) -> JointState:
    if isinstance(state, JointState):
        return state
    return state.as_joint()


@dataclass(frozen=True)
class DenseOperator:
    """Square complex matrix with verified hermitian/unitary flags."""

    matrix: np.ndarray
    hermitian: bool = False
    unitary: bool = False
    dims: tuple[int, ...] | None = field(default=None)

    def __post_init__(self):
        mat = np.array(self.matrix, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValidationError(f"operator must be square, got shape {mat.shape}")
        _check_capacity(mat.shape[0])
        _finite(mat, "operator entries")
        if self.hermitian:
            err = float(np.max(np.abs(mat - mat.conj().T), initial=0.0))
            if err > HERMITIAN_TOL:
                raise ValidationError(f"operator flagged hermitian but max|M - M^dag| = {err:.3e}")
        if self.unitary:
            err = float(np.max(np.abs(mat.conj().T @ mat - np.eye(mat.shape[0])), initial=0.0))
            if err > UNITARY_TOL:
                raise ValidationError(f"operator flagged unitary but max|U^dag U - 1| = {err:.3e}")
        dims = (mat.shape[0],) if self.dims is None else tuple(int(d) for d in self.dims)
        if math.prod(dims) != mat.shape[0]:
            raise ValidationError(f"dims {dims} inconsistent with matrix size {mat.shape[0]}")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "dims", dims)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __matmul__(self, other):
        if isinstance(other, DenseOperator):
            return DenseOperator(self.matrix @ other.matrix, dims=self.dims)
        if isinstance(other, JointState):
            return other.with_amps(self.matrix @ other.amps, normalized=False)
        return NotImplemented

    def dagger(self) -> "DenseOperator":
        return DenseOperator(self.matrix.conj().T, hermitian=self.hermitian,
                             unitary=self.unitary, dims=self.dims)

    def expectation(self, state: StateLike) -> complex:
        psi = _as_joint(state).amps
        return complex(np.vdot(psi, self.matrix @ psi))


def tensor_product(a: StateLike, b: StateLike) -> JointState:
    """Kronecker product; ``a`` becomes the slower-varying factor."""
    a, b = _as_joint(a), _as_joint(b)
    if a.normalized != b.normalized:
        raise ValidationError("operands must be both normalized or both unnormalized")
    dims = a.dims + b.dims
    _check_capacity(math.prod(dims))
    return JointState(dims, np.kron(a.amps, b.amps), normalized=a.normalized)


def tensor_all(*states: StateLike) -> JointState:
    out = _as_joint(states[0])
    for s in states[1:]:
        out = tensor_product(out, s)
    return out


def op_tensor(a: DenseOperator, b: DenseOperator) -> DenseOperator:
    """Kronecker product of operators, consistent with :func:`tensor_product`."""
    _check_capacity(a.dim * b.dim)
    return DenseOperator(np.kron(a.matrix, b.matrix), hermitian=a.hermitian and b.hermitian,
                         unitary=a.unitary and b.unitary, dims=a.dims + b.dims)


def op_tensor_all(*ops: DenseOperator) -> DenseOperator:
    out = ops[0]
    for op in ops[1:]:
        out = op_tensor(out, op)
    return out


def inner(a: StateLike, b: StateLike) -> complex:
    """``<a|b>``."""
    return complex(np.vdot(_as_joint(a).amps, _as_joint(b).amps))


def partial_inner(bra: StateLike, psi: JointState, subsystem: int) -> JointState:
    """Contract ``<bra|`` against one subsystem of ``psi``; the result is unnormalized."""
    bra = _as_joint(bra)
    if bra.dims != (psi.dims[subsystem],):
        raise ValidationError(f"bra dims {bra.dims} do not match subsystem {subsystem} "
                              f"of dims {psi.dims}")
    out = np.tensordot(bra.amps.conj(), psi.tensor(), axes=([0], [subsystem]))
    dims = psi.dims[:subsystem] + psi.dims[subsystem + 1:]
    if not dims:
        dims = (1,)
    return JointState(dims, out.reshape(-1), normalized=False)


# --- standard operators -------------------------------------------------------

def identity(dim: int) -> DenseOperator:
    return DenseOperator(np.eye(dim), hermitian=True, unitary=True)


def sigma_x() -> DenseOperator:
    return DenseOperator([[0, 1], [1, 0]], hermitian=True, unitary=True)


def sigma_y() -> DenseOperator:
    return DenseOperator([[0, -1j], [1j, 0]], hermitian=True, unitary=True)


def sigma_z() -> DenseOperator:
    return DenseOperator([[1, 0], [0, -1]], hermitian=True, unitary=True)


def raising() -> DenseOperator:
    """``|1><0|``: on ion levels this is ``|up><down|``."""
    return DenseOperator([[0, 0], [1, 0]])


def lowering() -> DenseOperator:
    return DenseOperator([[0, 1], [0, 0]])


def annihilation(n_max: int) -> DenseOperator:
    """Truncated ``a`` with ``a|n> = sqrt(n)|n-1>``."""
    return DenseOperator(np.diag(np.sqrt(np.arange(1, n_max + 1)), k=1))


def creation(n_max: int) -> DenseOperator:
    return DenseOperator(np.diag(np.sqrt(np.arange(1, n_max + 1)), k=-1))


def number(n_max: int) -> DenseOperator:
    return DenseOperator(np.diag(np.arange(n_max + 1, dtype=float)), hermitian=True)


# --- propagation --------------------------------------------------------------

def _require_hermitian(mat: np.ndarray, tol: float = HERMITIAN_TOL) -> None:
    err = float(np.max(np.abs(mat - mat.conj().T), initial=0.0))
    if err > tol:
        raise ValidationError(f"generator is not hermitian: max|H - H^dag| = {err:.3e}")


def _expm_hermitian(mat: np.ndarray, t: float) -> np.ndarray:
    """``exp(-i H t)`` by eigendecomposition."""
    w, v = np.linalg.eigh(mat)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def propagator(H: DenseOperator, t: float) -> DenseOperator:
    _require_hermitian(H.matrix)
    return DenseOperator(_expm_hermitian(H.matrix, t), dims=H.dims)


def expm_propagate(H: DenseOperator, t: float, psi: JointState) -> JointState:
    """Return ``exp(-i H t) psi`` for a time-independent hermitian ``H``."""
    if H.dim != psi.dim:
        raise ValidationError(f"operator dim {H.dim} != state dim {psi.dim}")
    _require_hermitian(H.matrix)
    return psi.with_amps(_expm_hermitian(H.matrix, t) @ psi.amps, norm_tol=UNITARY_TOL)


# Fourth-order commutator-free exponential integrator: two exponentials per
# step, generator sampled at the two Gauss-Legendre nodes.
_CF4_NODES = (0.5 - math.sqrt(3) / 6, 0.5 + math.sqrt(3) / 6)
_CF4_A = (3 - 2 * math.sqrt(3)) / 12
_CF4_B = (3 + 2 * math.sqrt(3)) / 12


def timeordered_propagate(H_of_t: Callable[[float], np.ndarray | DenseOperator],
                          t0: float, t1: float, psi: JointState, steps: int) -> JointState:
    """Integrate ``i d psi/dt = H(t) psi`` from ``t0`` to ``t1``.

    Uses a fourth-order commutator-free Magnus scheme with ``steps`` equal
    sub-intervals.  Each step applies
    ``exp(-i h (a H1 + b H2)) exp(-i h (b H1 + a H2))`` (rightmost first), with
    ``H1, H2`` the generator at the Gauss nodes.
    """
    if t1 < t0:
        raise ValidationError(f"t1 = {t1} precedes t0 = {t0}")
    if steps < 1:
        raise ValidationError(f"steps must be >= 1, got {steps}")

    def sample(t: float) -> np.ndarray:
        h = H_of_t(t)
        mat = h.matrix if isinstance(h, DenseOperator) else np.asarray(h, dtype=complex)
        if mat.shape != (psi.dim, psi.dim):
            raise ValidationError(f"generator shape {mat.shape} != ({psi.dim}, {psi.dim})")
        _require_hermitian(mat)
        return mat

    h = (t1 - t0) / steps
    vec = psi.amps.copy()
    for k in range(steps):
        start = t0 + k * h
        H1 = sample(start + _CF4_NODES[0] * h)
        H2 = sample(start + _CF4_NODES[1] * h)
        vec = _expm_hermitian(_CF4_B * H1 + _CF4_A * H2, h) @ vec
        vec = _expm_hermitian(_CF4_A * H1 + _CF4_B * H2, h) @ vec
    return psi.with_amps(vec, norm_tol=PROPAGATION_NORM_TOL)


def warn_if_truncated(psi: JointState, fock_axis: int, tol: float = TRUNCATION_TOL) -> None:
    top = psi.marginal([fock_axis])[-1]
    if top > tol:
        warnings.warn(f"population {top:.3e} on top Fock level {psi.dims[fock_axis] - 1}; "
                      "increase n_max", TruncationWarning, stacklevel=2)
