"""End-to-end verification of deletion codes on the dense engine.

Every check here runs both the fast weight-coefficient path and the dense
path and compares them, so a bug in one of them shows up as a disagreement.
"""
from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .codes import CodeSpec, GnuParams, binomial, gnu_code, spec_to_dict
from .encdec import (
    ConditionError,
    LogicalState,
    _conditions,
    _measurement_for,
    correction_data,
    decode_branches,
    deleted_mixture,
    dense_vector,
    encode,
    pad_deletions,
)
from .statevec import (
    ATOL,
    EMPTY,
    MAX_DENSE_QUBITS,
    DenseSizeError,
    DensityMatrix,
    PureState,
    delete,
)

PASS_THRESHOLD = 1e-9
EMPTY_TOL = 1e-12

Probe = Union[LogicalState, PureState]


def default_probes(L: int, n_random: int = 8, seed: int = 0) -> list:
    """Basis states, the uniform superposition, then ``n_random`` seeded random states."""
    rng = np.random.default_rng(seed)
    probes = [LogicalState.basis(L, i) for i in range(L)]
    probes.append(LogicalState.uniform(L))
    probes.extend(LogicalState.random(L, rng) for _ in range(n_random))
    return probes


def deletion_positions(N: int, t: int, mode: str = "all", samples: int = 16, seed: int = 0) -> list:
    """All ``t``-subsets of ``1..N`` in lexicographic order, or a seeded sample of them."""
    combos = list(itertools.combinations(range(1, N + 1), t))
    if mode == "all":
        return combos
    if mode != "sampled":
        raise ValueError(f"unknown position mode {mode!r}")
    if samples >= len(combos):
        return combos
    rng = np.random.default_rng(seed)
    picked = sorted(rng.choice(len(combos), size=samples, replace=False))
    return [combos[i] for i in picked]


def _encoded_vector(spec: CodeSpec, probe: Probe) -> np.ndarray:
    if isinstance(probe, PureState):
        if probe.n_qubits != spec.N:
            raise ValueError(f"probe has {probe.n_qubits} qubits, code has {spec.N}")
        return probe.amplitudes
    return dense_vector(encode(spec, probe))


def _representative_coeffs(vec: np.ndarray, N: int) -> np.ndarray:
    # c(w) read off the string 0..01..1 of weight w; exact for PI states
    return np.array([vec[(1 << w) - 1] for w in range(N + 1)])


def _branch_vectors(coeffs: np.ndarray, N: int, t: int) -> list:
    n = N - t
    idx_weights = np.array([bin(i).count("1") for i in range(2**n)])
    return [coeffs[idx_weights + k] for k in range(t + 1)]


def factorization_deviation(vec: np.ndarray, N: int, t: int) -> float:
    """Max deviation of ``|Psi> = sum_y |y> (x) |Psi_wt(y)>`` for a dense N-qubit vector."""
    coeffs = _representative_coeffs(vec, N)
    branches = _branch_vectors(coeffs, N, t)
    blocks = np.asarray(vec).reshape(2**t, 2 ** (N - t))
    return max(
        float(np.max(np.abs(blocks[y] - branches[bin(y).count("1")])))
        for y in range(2**t)
    )


def mixture_deviation(vec: np.ndarray, N: int, t: int, positions: Iterable[Sequence[int]]) -> float:
    """Max entrywise gap between dense deletion and the closed-form mixture, over ``positions``."""
    coeffs = _representative_coeffs(vec, N)
    branches = _branch_vectors(coeffs, N, t)
    mixture = sum(binomial(t, k) * np.outer(b, b.conj()) for k, b in enumerate(branches))
    rho = DensityMatrix(N, np.outer(vec, np.conj(vec)))
    return max(float(np.max(np.abs(delete(rho, P).entries - mixture))) for P in positions)


def closed_form_deviations(
    spec: CodeSpec,
    probes: Optional[Sequence[Probe]] = None,
    exhaustive_positions: bool = True,
    samples: int = 16,
    seed: int = 0,
) -> dict:
    if spec.N > MAX_DENSE_QUBITS:
        raise DenseSizeError(f"N={spec.N} exceeds the dense cap of {MAX_DENSE_QUBITS}")
    probes = default_probes(spec.L, seed=seed) if probes is None else probes
    mode = "all" if exhaustive_positions else "sampled"
    positions = deletion_positions(spec.N, spec.t, mode, samples, seed)
    fac = mix = 0.0
    for probe in probes:
        vec = _encoded_vector(spec, probe)
        fac = max(fac, factorization_deviation(vec, spec.N, spec.t))
        mix = max(mix, mixture_deviation(vec, spec.N, spec.t, positions))
    return {"factorization": fac, "mixture": mix}


def lemma2_oracle(
    spec: CodeSpec,
    probes: Optional[Sequence[Probe]] = None,
    exhaustive_positions: bool = True,
    samples: int = 16,
    seed: int = 0,
    atol: float = ATOL,
) -> bool:
    """Dense deletion agrees with the closed-form mixture and the factorization holds.

    Probes may be logical states (encoded with ``spec``) or raw N-qubit
    :class:`PureState` objects, which is how non-PI negative controls get in.
    """
    dev = closed_form_deviations(spec, probes, exhaustive_positions, samples, seed)
    return max(dev.values()) <= atol


def orthonormality_deviation(spec: CodeSpec) -> float:
    """Max ``|<u_a^k1|u_b^k2> - delta|`` over every branch and level pair (dense)."""
    vecs = []
    for k in range(spec.t + 1):
        vecs.extend(dense_vector(u) for u in correction_data(spec, k).u_vectors)
    m = np.column_stack(vecs)
    return float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[1]))))


def probability_closure(spec: CodeSpec) -> Fraction:
    """``sum_k C(t,k) l_k^2`` in exact arithmetic (equals 1 for a valid code)."""
    return sum(
        (binomial(spec.t, k) * correction_data(spec, k).l_sq for k in range(spec.t + 1)),
        Fraction(0),
    )


@dataclass
class VerificationReport:
    spec: CodeSpec
    conditions: dict
    records: list
    worst_fidelity: float
    oracles: dict
    passed: bool
    seed: int
    elapsed_ms: int
    kl: Optional[dict] = None
    threshold: float = PASS_THRESHOLD

    def to_dict(self) -> dict:
        return {
            "spec": spec_to_dict(self.spec),
            "pass": self.passed,
            "worst_fidelity": self.worst_fidelity,
            "conditions": self.conditions,
            "records": self.records,
            "oracles": self.oracles,
            "kl": self.kl,
            "seed": self.seed,
            "elapsed_ms": self.elapsed_ms,
        }


def verify_code(
    spec: CodeSpec,
    probes: Optional[Sequence[LogicalState]] = None,
    positions: str = "all",
    samples: int = 16,
    seed: int = 0,
    n_random: int = 8,
    threshold: float = PASS_THRESHOLD,
    atol: float = ATOL,
) -> VerificationReport:
    """Encode, delete at every selected position set, decode every branch, and record fidelities.

    Raises :class:`ConditionError` when the spec fails its conditions, so a
    broken spec never yields a vacuous pass.
    """
    start = time.perf_counter()
    cond = _conditions(spec)
    if not cond.ok:
        raise ConditionError(f"refusing to verify: {cond.witness}", cond)
    if spec.N > MAX_DENSE_QUBITS:
        raise DenseSizeError(f"N={spec.N} exceeds the dense cap of {MAX_DENSE_QUBITS}")
    if probes is None:
        probes = default_probes(spec.L, n_random, seed)
    if not probes:
        raise ValueError("need at least one probe")
    position_sets = deletion_positions(spec.N, spec.t, positions, samples, seed)

    expected_p = {
        k: float(binomial(spec.t, k) * correction_data(spec, k).l_sq)
        for k in range(spec.t + 1)
    }
    empty_mask = np.real(np.diag(_measurement_for(spec).projectors[EMPTY])) > 0.5

    records = []
    worst = 1.0
    prob_sum_dev = branch_prob_dev = p_empty_max = 0.0
    mixture_dev = fac_dev = block_dev = leak_max = position_dev = 0.0
    for pi, probe in enumerate(probes):
        vec = dense_vector(encode(spec, probe))
        rho = DensityMatrix(spec.N, np.outer(vec, vec.conj()))
        closed = deleted_mixture(encode(spec, probe), spec.t).to_dense().entries
        fac_dev = max(fac_dev, factorization_deviation(vec, spec.N, spec.t))
        first_sigma = {}
        for P in position_sets:
            deleted = delete(rho, P)
            mixture_dev = max(mixture_dev, float(np.max(np.abs(deleted.entries - closed))))
            p_empty = float(np.real(np.diag(deleted.entries)[empty_mask].sum()))
            p_empty_max = max(p_empty_max, abs(p_empty))
            branches = decode_branches(spec, deleted)
            prob_sum_dev = max(prob_sum_dev, abs(sum(b.probability for b in branches) - 1.0))
            for b in branches:
                fid = b.fidelity(probe)
                worst = min(worst, fid)
                branch_prob_dev = max(branch_prob_dev, abs(b.probability - expected_p[b.outcome]))
                block_dev = max(block_dev, b.off_block)
                leak_max = max(leak_max, abs(b.leakage))
                if b.outcome in first_sigma:
                    position_dev = max(
                        position_dev, float(np.max(np.abs(b.sigma - first_sigma[b.outcome])))
                    )
                else:
                    first_sigma[b.outcome] = b.sigma
                records.append(
                    {
                        "probe": pi,
                        "positions": list(P),
                        "outcome": b.outcome,
                        "probability": b.probability,
                        "fidelity": fid,
                    }
                )

    closure = probability_closure(spec)
    ortho = orthonormality_deviation(spec)
    oracles = {
        "mixture_max_dev": mixture_dev,
        "factorization_max_dev": fac_dev,
        "orthonormality_max_dev": ortho,
        "branch_probability_max_dev": branch_prob_dev,
        "probability_sum_max_dev": prob_sum_dev,
        "empty_outcome_max_prob": p_empty_max,
        "probability_closure_exact": f"{closure.numerator}/{closure.denominator}",
        "block_structure_max_dev": block_dev,
        "logical_leakage_max": leak_max,
        "position_independence_max_dev": position_dev,
    }
    checks = [
        mixture_dev <= atol,
        fac_dev <= atol,
        ortho <= atol,
        branch_prob_dev <= atol,
        prob_sum_dev <= atol,
        p_empty_max <= EMPTY_TOL,
        closure == 1,
        block_dev <= atol,
        leak_max <= atol,
        position_dev <= atol,
    ]
    oracles["all_ok"] = all(checks)
    passed = worst >= 1 - threshold and all(checks)
    elapsed = int(round((time.perf_counter() - start) * 1000))
    return VerificationReport(
        spec=spec,
        conditions=cond.to_dict(),
        records=records,
        worst_fidelity=worst,
        oracles=oracles,
        passed=passed,
        seed=seed,
        elapsed_ms=elapsed,
        threshold=threshold,
    )


def verify_fewer_deletions(
    spec: CodeSpec, s: int, probes: Optional[Sequence[LogicalState]] = None, seed: int = 0
) -> float:
    """Worst branch fidelity when only ``s < t`` qubits are lost, over every position set."""
    probes = default_probes(spec.L, seed=seed) if probes is None else probes
    worst = 1.0
    for probe in probes:
        vec = dense_vector(encode(spec, probe))
        rho = DensityMatrix(spec.N, np.outer(vec, vec.conj()))
        for P in itertools.combinations(range(1, spec.N + 1), s):
            padded = pad_deletions(spec, delete(rho, P), s)
            for b in decode_branches(spec, padded):
                worst = min(worst, b.fidelity(probe))
    return worst


# Knill-Laflamme check -------------------------------------------------------


@dataclass(frozen=True)
class PauliError:
    """Pauli operator acting as ``letters[p]`` on each 1-based position ``p``."""

    letters: tuple

    def __post_init__(self):
        letters = tuple(sorted((int(p), str(c).upper()) for p, c in dict(self.letters).items()))
        if not letters:
            raise ValueError("a Pauli error needs nonempty support")
        for p, c in letters:
            if c not in "XYZ" or len(c) != 1:
                raise ValueError(f"unknown Pauli letter {c!r} at position {p}")
        object.__setattr__(self, "letters", letters)

    @property
    def support(self) -> frozenset:
        return frozenset(p for p, _ in self.letters)

    def label(self) -> str:
        return "".join(f"{c}{p}" for p, c in self.letters)

    def apply(self, vec: np.ndarray, n_qubits: int) -> np.ndarray:
        xmask = zmask = 0
        n_y = 0
        for p, c in self.letters:
            if not 1 <= p <= n_qubits:
                raise ValueError(f"position {p} out of range [1, {n_qubits}]")
            bit = 1 << (n_qubits - p)
            if c in "XY":
                xmask |= bit
            if c in "ZY":
                zmask |= bit
            n_y += c == "Y"
        idx = np.arange(2**n_qubits)
        parity = np.zeros_like(idx)
        z = idx & zmask
        while np.any(z):
            parity ^= z & 1
            z >>= 1
        out = np.empty_like(vec)
        out[idx ^ xmask] = (1j**n_y) * np.where(parity, -1, 1) * vec
        return out


def pauli_errors(n_qubits: int, max_weight: int) -> list:
    """All Pauli errors with support size ``1..max_weight``."""
    errors = []
    for w in range(1, max_weight + 1):
        for support in itertools.combinations(range(1, n_qubits + 1), w):
            for letters in itertools.product("XYZ", repeat=w):
                errors.append(PauliError(tuple(zip(support, letters))))
    return errors


@dataclass
class KLReport:
    passed: bool
    error_weight: int
    n_errors: int
    max_offdiag: float
    max_diag_mismatch: float
    worst_pair: Optional[tuple]
    identity_diag: tuple

    def to_dict(self) -> dict:
        return {
            "pass": self.passed,
            "error_weight": self.error_weight,
            "n_errors": self.n_errors,
            "max_offdiag": self.max_offdiag,
            "max_diag_mismatch": self.max_diag_mismatch,
            "worst_pair": list(self.worst_pair) if self.worst_pair else None,
            "identity_diag": list(self.identity_diag),
        }


def kl_check(spec: CodeSpec, error_weight: int, atol: float = ATOL) -> KLReport:
    """Knill-Laflamme conditions for all Pauli errors of weight at most ``error_weight``.

    For each pair ``(E, F)`` (identity included) the 2x2 matrix
    ``<a_L|E^dag F|b_L>`` must have vanishing off-diagonal entries and equal
    diagonal entries.
    """
    if spec.L != 2:
        raise ValueError(f"Knill-Laflamme check needs a two-level code, got L={spec.L}")
    if spec.N > MAX_DENSE_QUBITS:
        raise DenseSizeError(f"N={spec.N} exceeds the dense cap of {MAX_DENSE_QUBITS}")
    if error_weight < 1:
        raise ValueError("error_weight must be at least 1")
    zero = dense_vector(encode(spec, LogicalState.basis(2, 0)))
    one = dense_vector(encode(spec, LogicalState.basis(2, 1)))
    errors = pauli_errors(spec.N, error_weight)
    labels = ["I"] + [e.label() for e in errors]
    e0 = np.array([zero] + [e.apply(zero, spec.N) for e in errors])
    e1 = np.array([one] + [e.apply(one, spec.N) for e in errors])
    g00 = e0.conj() @ e0.T
    g11 = e1.conj() @ e1.T
    g01 = e0.conj() @ e1.T
    g10 = e1.conj() @ e0.T
    off = np.maximum(np.abs(g01), np.abs(g10))
    diag = np.abs(g00 - g11)
    max_off = float(off.max())
    max_diag = float(diag.max())
    worst = None
    if max(max_off, max_diag) > 0:
        score = np.maximum(off, diag)
        i, j = np.unravel_index(np.argmax(score), score.shape)
        worst = (labels[i], labels[j])
    return KLReport(
        passed=max_off <= atol and max_diag <= atol,
        error_weight=error_weight,
        n_errors=len(labels),
        max_offdiag=max_off,
        max_diag_mismatch=max_diag,
        worst_pair=worst,
        identity_diag=(float(g00[0, 0].real), float(g11[0, 0].real)),
    )


@dataclass
class CombinedReport:
    t: int
    u: Fraction
    deletion: VerificationReport
    kl: KLReport
    fewer_deletions: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        fewer_ok = all(f >= 1 - self.deletion.threshold for f in self.fewer_deletions.values())
        return self.deletion.passed and self.kl.passed and fewer_ok

    def to_dict(self) -> dict:
        out = self.deletion.to_dict()
        out["kl"] = self.kl.to_dict()
        out["pass"] = self.passed
        out["combined"] = {
            "qubit_errors": self.t,
            "deletions": 2 * self.t,
            "u": f"{self.u.numerator}/{self.u.denominator}",
            "fewer_deletions_worst_fidelity": {str(s): f for s, f in self.fewer_deletions.items()},
        }
        return out


def combined_claim_check(
    t: int, u=1, seed: int = 0, n_random: int = 8, threshold: float = PASS_THRESHOLD
) -> CombinedReport:
    """The ``(2t+1, 2t+1, u)`` code against ``2t`` deletions and weight-``t`` Pauli errors."""
    u = Fraction(u)
    g = 2 * t + 1
    params = GnuParams(g, g, u)
    if params.N > MAX_DENSE_QUBITS:
        raise DenseSizeError(
            f"(2t+1)^2 u = {params.N} exceeds the dense cap of {MAX_DENSE_QUBITS}"
        )
    spec = gnu_code(params, 2 * t)
    probes = default_probes(2, n_random, seed)
    deletion = verify_code(spec, probes, seed=seed, threshold=threshold)
    kl = kl_check(spec, t)
    fewer = {s: verify_fewer_deletions(spec, s, probes) for s in range(1, 2 * t)}
    return CombinedReport(t, u, deletion, kl, fewer)
