"""Encoding, deletion, and measurement-based decoding for PI deletion codes.

Permutation-invariant states are held as weight coefficients ``c(w)`` (one
complex number per Hamming weight), so encoding and the closed-form
post-deletion mixture cost ``O(N)``. Dense vectors are built only for
decoding and for cross-checks against the dense engine.
"""
from __future__ import annotations

import functools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional, Sequence

import numpy as np

from .codes import CodeSpec, binomial, check_conditions, deletion_sum
from .statevec import (
    ATOL,
    EMPTY,
    MAX_DENSE_QUBITS,
    PROB_THRESHOLD,
    DenseSizeError,
    DensityMatrix,
    ProjectorSet,
    PureState,
    apply_unitary,
    delete,
    measure,
)

logger = logging.getLogger(__name__)

#: Residual norm below which a Gram-Schmidt candidate is skipped.
GS_THRESHOLD = 1e-8
#: Probability of the empty outcome above which the input is rejected.
EMPTY_REJECT = 1e-10


class ConditionError(ValueError):
    """The code spec fails one of the deletion-correction conditions."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class OutOfCodeError(ValueError):
    """The decoding measurement returned the empty outcome."""


@dataclass(frozen=True)
class LogicalState:
    amps: np.ndarray = field(repr=False)

    def __post_init__(self):
        a = np.asarray(self.amps, dtype=complex).reshape(-1)
        if a.size < 2:
            raise ValueError("a logical state needs at least two levels")
        if abs(np.vdot(a, a).real - 1.0) > ATOL:
            raise ValueError("logical state is not normalized")
        a.setflags(write=False)
        object.__setattr__(self, "amps", a)

    @property
    def L(self) -> int:
        return self.amps.size

    @classmethod
    def basis(cls, L: int, i: int) -> "LogicalState":
        a = np.zeros(L, dtype=complex)
        a[i] = 1.0
        return cls(a)

    @classmethod
    def uniform(cls, L: int) -> "LogicalState":
        return cls(np.full(L, 1 / math.sqrt(L), dtype=complex))

    @classmethod
    def random(cls, L: int, rng: np.random.Generator) -> "LogicalState":
        v = rng.normal(size=L) + 1j * rng.normal(size=L)
        return cls(v / np.linalg.norm(v))

    def density(self) -> np.ndarray:
        return np.outer(self.amps, self.amps.conj())


@dataclass(frozen=True)
class SymmetricState:
    """``sum_x c(wt(x)) |x>`` on ``n_qubits`` qubits; missing weights have ``c = 0``.

    Not required to be normalized (post-deletion branches are not).
    """

    n_qubits: int
    coeffs: Mapping[int, complex]

    def __post_init__(self):
        cleaned = {}
        for w, c in self.coeffs.items():
            w = int(w)
            if not 0 <= w <= self.n_qubits:
                raise ValueError(f"weight {w} outside [0, {self.n_qubits}]")
            cleaned[w] = complex(c)
        object.__setattr__(self, "coeffs", dict(sorted(cleaned.items())))

    def coeff(self, w: int) -> complex:
        return self.coeffs.get(w, 0j)

    def norm_sq(self) -> float:
        return sum(abs(c) ** 2 * binomial(self.n_qubits, w) for w, c in self.coeffs.items())

    def inner(self, other: "SymmetricState") -> complex:
        if other.n_qubits != self.n_qubits:
            raise ValueError("states live on different qubit counts")
        return sum(
            self.coeff(w).conjugate() * c * binomial(self.n_qubits, w)
            for w, c in other.coeffs.items()
        )


@dataclass(frozen=True)
class DeletionMixture:
    """``sum_k C(t,k) |Psi_k><Psi_k|``; ``branches[k] = (C(t,k), Psi_k)``."""

    t: int
    branches: tuple

    def trace(self) -> float:
        return sum(weight * state.norm_sq() for weight, state in self.branches)

    def to_dense(self) -> DensityMatrix:
        n = self.branches[0][1].n_qubits
        m = np.zeros((2**n, 2**n), dtype=complex)
        for weight, state in self.branches:
            v = dense_vector(state)
            m += weight * np.outer(v, v.conj())
        return DensityMatrix(n, m)


@dataclass(frozen=True)
class CorrectionData:
    """Branch ``k`` of the decoder: norm ``l_k`` and orthonormal level vectors ``u_i^k``."""

    spec: CodeSpec = field(repr=False)
    k: int
    l_sq: Fraction
    u_vectors: tuple = field(repr=False)

    @property
    def l_k(self) -> float:
        return math.sqrt(self.l_sq)

    def unitary(self) -> np.ndarray:
        """Dense ``U_k``: rows ``1..L`` are ``<u_i^k|``, the rest complete it."""
        return _unitary_for(self.spec, self.k)


@dataclass(frozen=True)
class DecodeResult:
    outcome: object
    probability: float
    sigma: np.ndarray = field(repr=False)
    leakage: float = 0.0
    off_block: float = 0.0

    def fidelity(self, psi: LogicalState) -> float:
        return logical_fidelity(self.sigma, psi)


def logical_fidelity(sigma: np.ndarray, psi: LogicalState) -> float:
    f = np.vdot(psi.amps, sigma @ psi.amps)
    return float(f.real)


def _popcounts(n: int) -> np.ndarray:
    idx = np.arange(2**n, dtype=np.int64)
    counts = np.zeros_like(idx)
    for b in range(n):
        counts += (idx >> b) & 1
    return counts


def dense_vector(s: SymmetricState) -> np.ndarray:
    if s.n_qubits > MAX_DENSE_QUBITS:
        raise DenseSizeError(f"{s.n_qubits} qubits exceeds the dense cap of {MAX_DENSE_QUBITS}")
    table = np.zeros(s.n_qubits + 1, dtype=complex)
    for w, c in s.coeffs.items():
        table[w] = c
    return table[_popcounts(s.n_qubits)]


def to_dense(s: SymmetricState) -> PureState:
    return PureState(s.n_qubits, dense_vector(s))


def from_dense(psi: PureState, atol: float = ATOL) -> SymmetricState:
    """Recover weight coefficients; raises if the amplitudes are not weight-determined."""
    counts = _popcounts(psi.n_qubits)
    coeffs = {}
    for w in range(psi.n_qubits + 1):
        vals = psi.amplitudes[counts == w]
        if np.max(np.abs(vals - vals[0])) > atol:
            raise ValueError(f"state is not permutation invariant (weight {w})")
        if abs(vals[0]) > 0:
            coeffs[w] = complex(vals[0])
    return SymmetricState(psi.n_qubits, coeffs)


def _require_conditions(spec: CodeSpec) -> None:
    report = _conditions(spec)
    if not report.ok:
        raise ConditionError(f"code spec fails its conditions: {report.witness}", report)


@functools.lru_cache(maxsize=64)
def _conditions(spec: CodeSpec):
    return check_conditions(spec)


def encode(spec: CodeSpec, psi: LogicalState) -> SymmetricState:
    """Weight coefficients ``c(w) = alpha_i * sqrt(|f(w)|^2)`` for ``w`` in level ``i``."""
    if psi.L != spec.L:
        raise ValueError(f"logical state has {psi.L} levels, code has {spec.L}")
    _require_conditions(spec)
    coeffs = {}
    for i, lvl in enumerate(spec.levels):
        for w in lvl:
            coeffs[w] = psi.amps[i] * math.sqrt(spec.f_sq[w])
    return SymmetricState(spec.N, coeffs)


def deleted_mixture(s: SymmetricState, t: int) -> DeletionMixture:
    """State left after any ``t`` deletions, as ``C(t,k)``-weighted branches ``c_k(w) = c(w+k)``."""
    n = s.n_qubits
    if not 1 <= t < n:
        raise ValueError(f"t must satisfy 1 <= t < {n}, got {t}")
    branches = []
    for k in range(t + 1):
        coeffs = {w: s.coeff(w + k) for w in range(n - t + 1) if s.coeff(w + k) != 0}
        branches.append((binomial(t, k), SymmetricState(n - t, coeffs)))
    return DeletionMixture(t, tuple(branches))


def correction_data(spec: CodeSpec, k: int) -> CorrectionData:
    if not 0 <= k <= spec.t:
        raise ValueError(f"outcome k={k} out of range [0, {spec.t}]")
    _require_conditions(spec)
    l_sq = deletion_sum(spec, 0, k)
    l_k = math.sqrt(l_sq)
    n = spec.N - spec.t
    vectors = []
    for lvl in spec.levels:
        coeffs = {
            w - k: math.sqrt(spec.f_sq[w]) / l_k
            for w in lvl
            if 0 <= w - k <= n
        }
        vectors.append(SymmetricState(n, coeffs))
    return CorrectionData(spec, k, l_sq, tuple(vectors))


def _window_weights(spec: CodeSpec, k: int) -> list:
    n = spec.N - spec.t
    return [w - k for w in spec.weights if 0 <= w - k <= n]


def build_measurement(spec: CodeSpec) -> ProjectorSet:
    """Projectors onto ``W_k`` (strings with ``wt + k`` a code weight), plus the empty outcome."""
    n = spec.N - spec.t
    if n > MAX_DENSE_QUBITS:
        raise DenseSizeError(f"{n} qubits exceeds the dense cap of {MAX_DENSE_QUBITS}")
    if not _conditions(spec).d3_ok:
        raise ConditionError("weight-gap condition fails; outcome windows overlap", _conditions(spec))
    counts = _popcounts(n)
    dim = 2**n
    covered = np.zeros(dim, dtype=bool)
    projs = {}
    for k in range(spec.t + 1):
        mask = np.isin(counts, _window_weights(spec, k))
        if np.any(mask & covered):
            raise ConditionError(f"outcome window {k} overlaps an earlier one")
        covered |= mask
        projs[k] = np.diag(mask.astype(complex))
    projs[EMPTY] = np.diag((~covered).astype(complex))
    return ProjectorSet(n, projs)


def complete_unitary(rows: Sequence[np.ndarray], dim: int) -> np.ndarray:
    """Unitary whose first rows are ``conj(rows[i])``.

    The remaining rows come from Gram-Schmidt over ``e_0, e_1, ...`` in index
    order (with one re-orthogonalization pass), skipping candidates whose
    residual norm is below :data:`GS_THRESHOLD`.
    """
    kets = [np.asarray(r, dtype=complex).reshape(-1) for r in rows]
    if len(kets) > dim:
        raise ValueError(f"{len(kets)} rows do not fit in dimension {dim}")
    for v in kets:
        if v.size != dim:
            raise ValueError(f"row of length {v.size} does not match dimension {dim}")
    # rows[i] holds conj(ket_i), so rows[:m] @ r are the projection coefficients
    rows = np.zeros((dim, dim), dtype=complex)
    m = len(kets)
    if m:
        rows[:m] = np.conj(np.vstack(kets))
        gram = rows[:m] @ rows[:m].conj().T
        if np.max(np.abs(gram - np.eye(m))) > ATOL:
            raise ValueError("rows are not orthonormal")
    for j in range(dim):
        if m == dim:
            break
        r = np.zeros(dim, dtype=complex)
        r[j] = 1.0
        for _ in range(2):
            coef = rows[:m] @ r
            r -= np.conj(np.conj(coef) @ rows[:m])
        norm = np.linalg.norm(r)
        if norm < GS_THRESHOLD:
            continue
        rows[m] = np.conj(r) / norm
        m += 1
    if m != dim:
        raise ArithmeticError("Gram-Schmidt completion did not reach full rank")
    return rows


@functools.lru_cache(maxsize=256)
def _unitary_for(spec: CodeSpec, k: int) -> np.ndarray:
    data = correction_data(spec, k)
    n = spec.N - spec.t
    if n > MAX_DENSE_QUBITS:
        raise DenseSizeError(f"{n} qubits exceeds the dense cap of {MAX_DENSE_QUBITS}")
    u = complete_unitary([dense_vector(v) for v in data.u_vectors], 2**n)
    u.setflags(write=False)
    return u


@functools.lru_cache(maxsize=64)
def _measurement_for(spec: CodeSpec) -> ProjectorSet:
    return build_measurement(spec)


def _logical_qubits(L: int) -> int:
    return max(1, math.ceil(math.log2(L)))


def _extract_logical(spec: CodeSpec, rotated: DensityMatrix):
    # keep the last ceil(log2 L) qubits, i.e. the leading 2^q x 2^q block
    q = _logical_qubits(spec.L)
    n = rotated.n_qubits
    reduced = rotated
    if n > q:
        reduced = delete(rotated, range(1, n - q + 1))
    m = reduced.entries
    L = spec.L
    sigma = np.array(m[:L, :L])
    leakage = float(np.real(np.trace(m)) - np.real(np.trace(sigma)))
    return sigma, leakage


def _check_input(spec: CodeSpec, rho: DensityMatrix) -> None:
    n = spec.N - spec.t
    if rho.n_qubits != n:
        raise ValueError(f"decoder expects {n} qubits, got {rho.n_qubits}")
    _require_conditions(spec)


def _decode_outcome(spec: CodeSpec, label, prob: float, post: DensityMatrix) -> DecodeResult:
    rotated = apply_unitary(post, _unitary_for(spec, label))
    sigma, leakage = _extract_logical(spec, rotated)
    outside = np.array(rotated.entries)
    outside[: spec.L, : spec.L] = 0
    return DecodeResult(label, prob, sigma, leakage, float(np.max(np.abs(outside))))


def decode_branches(spec: CodeSpec, rho: DensityMatrix) -> list:
    """Decode every measurement outcome with probability above the threshold."""
    _check_input(spec, rho)
    results = []
    for label, prob, post in measure(rho, _measurement_for(spec)):
        if label == EMPTY:
            if prob > EMPTY_REJECT:
                raise OutOfCodeError(f"empty outcome has probability {prob:.3e}")
            continue
        if post is None:
            logger.debug("dropping outcome %s with probability %.3e", label, prob)
            continue
        results.append(_decode_outcome(spec, label, prob, post))
    return results


def decode(
    spec: CodeSpec, rho: DensityMatrix, rng: Optional[np.random.Generator] = None
) -> DecodeResult:
    """Run the decoder with a sampled measurement outcome."""
    _check_input(spec, rho)
    rng = np.random.default_rng(0) if rng is None else rng
    outcomes = measure(rho, _measurement_for(spec))
    probs = np.array([max(p, 0.0) for _, p, _ in outcomes])
    pick = rng.choice(len(outcomes), p=probs / probs.sum())
    label, prob, post = outcomes[pick]
    empty_prob = next(p for lbl, p, _ in outcomes if lbl == EMPTY)
    if label == EMPTY or empty_prob > EMPTY_REJECT:
        raise OutOfCodeError(f"empty outcome has probability {empty_prob:.3e}")
    return _decode_outcome(spec, label, prob, post)


def correct_fewer_deletions(
    spec: CodeSpec,
    rho: DensityMatrix,
    s: int,
    rng: Optional[np.random.Generator] = None,
) -> DecodeResult:
    """Decode after only ``s <= t`` deletions by deleting ``t - s`` more qubits first."""
    return decode(spec, pad_deletions(spec, rho, s), rng)


def pad_deletions(spec: CodeSpec, rho: DensityMatrix, s: int) -> DensityMatrix:
    """Delete positions ``1..t-s`` of a state that has lost only ``s`` qubits."""
    if not 1 <= s <= spec.t:
        raise ValueError(f"s must satisfy 1 <= s <= {spec.t}, got {s}")
    if rho.n_qubits != spec.N - s:
        raise ValueError(f"expected {spec.N - s} qubits after {s} deletions, got {rho.n_qubits}")
    if s == spec.t:
        return rho
    return delete(rho, range(1, spec.t - s + 1))
