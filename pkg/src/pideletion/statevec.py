"""Dense pure states, density matrices and the operations that act on them.

Basis index ``i`` of a ``2**n`` vector encodes the bit string ``x_1 ... x_n``
big-endian, so qubit position 1 is the most significant bit. Positions are
1-based throughout, matching the usual ``Tr_p`` notation.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

#: Hard cap for dense density matrices (4096 x 4096 complex is ~256 MB).
MAX_DENSE_QUBITS = 12

ATOL = 1e-10
PSD_SLACK = 1e-8
PROB_THRESHOLD = 1e-12

#: Label of the "no valid outcome" element of a decoding measurement.
EMPTY = "empty"

Label = Union[int, str]


class DenseSizeError(ValueError):
    """Raised when a dense object would exceed :data:`MAX_DENSE_QUBITS`."""


def _check_dense_size(n_qubits: int) -> None:
    if n_qubits > MAX_DENSE_QUBITS:
        raise DenseSizeError(
            f"{n_qubits} qubits exceeds the dense cap of {MAX_DENSE_QUBITS}; "
            "use the weight-coefficient (SymmetricState) routines instead"
        )


@dataclass(frozen=True)
class PureState:
    n_qubits: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if self.n_qubits < 1:
            raise ValueError("a pure state needs at least one qubit")
        if amps.shape[0] != 2**self.n_qubits:
            raise ValueError(
                f"expected {2**self.n_qubits} amplitudes, got {amps.shape[0]}"
            )
        if abs(np.vdot(amps, amps).real - 1.0) > ATOL:
            raise ValueError("pure state is not normalized")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    def density(self) -> "DensityMatrix":
        return DensityMatrix(self.n_qubits, np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True)
class DensityMatrix:
    """A ``2**n x 2**n`` density matrix.

    Construction only checks the shape. Call :meth:`validate` to check the
    Hermitian, unit-trace and PSD invariants; the eigenvalue test is too
    expensive to run on every intermediate result.
    """

    n_qubits: int
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.n_qubits < 0:
            raise ValueError("n_qubits must be non-negative")
        _check_dense_size(self.n_qubits)
        m = np.asarray(self.entries, dtype=complex)
        dim = 2**self.n_qubits
        if m.shape != (dim, dim):
            raise ValueError(f"expected a {dim}x{dim} matrix, got shape {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    def trace(self) -> complex:
        return complex(np.trace(self.entries))

    def validate(self, atol: float = ATOL, psd_slack: float = PSD_SLACK) -> "DensityMatrix":
        m = self.entries
        herm_err = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
        if herm_err > atol:
            raise ValueError(f"matrix is not Hermitian (max deviation {herm_err:.3e})")
        if abs(self.trace() - 1.0) > atol:
            raise ValueError(f"trace is {self.trace():.12g}, expected 1")
        lo = np.linalg.eigvalsh((m + m.conj().T) / 2).min()
        if lo < -psd_slack:
            raise ValueError(f"matrix is not PSD (smallest eigenvalue {lo:.3e})")
        return self

    def is_valid(self, atol: float = ATOL, psd_slack: float = PSD_SLACK) -> bool:
        try:
            self.validate(atol, psd_slack)
        except ValueError:
            return False
        return True

    @classmethod
    def maximally_mixed(cls, n_qubits: int) -> "DensityMatrix":
        dim = 2**n_qubits
        return cls(n_qubits, np.eye(dim, dtype=complex) / dim)


@dataclass(frozen=True)
class ProjectorSet:
    """Labelled projective measurement on ``n_qubits`` qubits."""

    n_qubits: int
    projectors: Mapping[Label, np.ndarray] = field(repr=False)

    def __post_init__(self):
        dim = 2**self.n_qubits
        total = np.zeros((dim, dim), dtype=complex)
        frozen = {}
        for label, p in self.projectors.items():
            p = np.asarray(p, dtype=complex)
            if p.shape != (dim, dim):
                raise ValueError(f"projector {label!r} has shape {p.shape}, expected {(dim, dim)}")
            d = _diagonal_or_none(p)
            if d is not None:
                if np.max(np.abs(d * d - d), initial=0.0) > ATOL:
                    raise ValueError(f"element {label!r} is not idempotent")
            elif np.max(np.abs(p @ p - p), initial=0.0) > ATOL:
                raise ValueError(f"element {label!r} is not idempotent")
            if np.max(np.abs(p - p.conj().T), initial=0.0) > ATOL:
                raise ValueError(f"element {label!r} is not Hermitian")
            p.setflags(write=False)
            frozen[label] = p
            total += p
        if np.max(np.abs(total - np.eye(dim)), initial=0.0) > ATOL:
            raise ValueError("projectors do not sum to the identity")
        object.__setattr__(self, "projectors", frozen)

    @property
    def labels(self) -> list:
        return list(self.projectors)


def _diagonal_or_none(p: np.ndarray):
    d = np.diagonal(p)
    if np.count_nonzero(p) == np.count_nonzero(d):
        return d
    return None


def basis_state(bits: Sequence[int] | str) -> PureState:
    """Computational basis state ``|x_1 ... x_n>``."""
    bits = [int(b) for b in bits]
    if not bits:
        raise ValueError("bits must be nonempty")
    if any(b not in (0, 1) for b in bits):
        raise ValueError("bits must be 0 or 1")
    index = int("".join(map(str, bits)), 2)
    amps = np.zeros(2 ** len(bits), dtype=complex)
    amps[index] = 1.0
    return PureState(len(bits), amps)


def _trace_out(m: np.ndarray, n: int, p: int) -> np.ndarray:
    # axes (x_1..x_n, y_1..y_n); contract x_p with y_p
    t = m.reshape((2,) * (2 * n))
    t = np.trace(t, axis1=p - 1, axis2=n + p - 1)
    dim = 2 ** (n - 1)
    return t.reshape(dim, dim)


def partial_trace(rho: DensityMatrix, p: int) -> DensityMatrix:
    """Trace out the qubit at 1-based position ``p``."""
    n = rho.n_qubits
    if n < 2:
        raise ValueError("partial trace needs at least two qubits")
    if not 1 <= p <= n:
        raise ValueError(f"position {p} out of range [1, {n}]")
    return DensityMatrix(n - 1, _trace_out(rho.entries, n, p))


def delete(rho: DensityMatrix, positions: Iterable[int]) -> DensityMatrix:
    """Deletion error: trace out every qubit in ``positions``.

    Positions refer to the input register and are traced in decreasing order
    so that the remaining indices stay valid.
    """
    pos = sorted(set(int(p) for p in positions), reverse=True)
    n = rho.n_qubits
    if not pos:
        raise ValueError("deletion positions must be nonempty")
    if len(pos) >= n:
        raise ValueError("cannot delete every qubit")
    if pos[0] > n or pos[-1] < 1:
        raise ValueError(f"deletion positions {sorted(pos)} out of range [1, {n}]")
    m = rho.entries
    for p in pos:
        m = _trace_out(m, n, p)
        n -= 1
    return DensityMatrix(n, m)


def measure(rho: DensityMatrix, projs: ProjectorSet) -> list:
    """Projective measurement.

    Returns ``(label, probability, post_state)`` triples in the order of
    ``projs``; ``post_state`` is ``None`` when the probability is at or below
    :data:`PROB_THRESHOLD`.
    """
    if projs.n_qubits != rho.n_qubits:
        raise ValueError(
            f"measurement acts on {projs.n_qubits} qubits, state has {rho.n_qubits}"
        )
    out = []
    m = rho.entries
    for label, p in projs.projectors.items():
        d = _diagonal_or_none(p)
        if d is not None:
            prob = float(np.real(np.dot(d, np.diagonal(m))))
        else:
            pm = p @ m
            prob = float(np.real(np.trace(pm)))
        post = None
        if prob > PROB_THRESHOLD:
            projected = m * np.outer(d, d.conj()) if d is not None else pm @ p
            post = DensityMatrix(rho.n_qubits, projected / prob)
        out.append((label, prob, post))
    return out


def is_unitary(u: np.ndarray, atol: float = ATOL) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return np.max(np.abs(u @ u.conj().T - np.eye(u.shape[0]))) <= atol


def apply_unitary(rho: DensityMatrix, u: np.ndarray) -> DensityMatrix:
    u = np.asarray(u, dtype=complex)
    if u.shape != (rho.dim, rho.dim):
        raise ValueError(f"unitary of shape {u.shape} does not act on {rho.n_qubits} qubits")
    if not is_unitary(u):
        raise ValueError("matrix is not unitary")
    return DensityMatrix(rho.n_qubits, u @ rho.entries @ u.conj().T)


def fidelity(rho: DensityMatrix, psi: PureState) -> float:
    """Overlap ``<psi|rho|psi>``."""
    if rho.n_qubits != psi.n_qubits:
        raise ValueError("state and density matrix act on different qubit counts")
    v = psi.amplitudes
    f = np.vdot(v, rho.entries @ v)
    if abs(f.imag) > ATOL:
        raise ValueError(f"overlap has imaginary part {f.imag:.3e}; rho is not Hermitian")
    return float(f.real)
