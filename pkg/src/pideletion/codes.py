"""Permutation-invariant deletion code specifications and their exact checks.

A code is described by disjoint weight classes ``A_0, ..., A_{L-1}`` and the
squared amplitude ``|f(w)|^2`` attached to each weight. All condition checks
run on :class:`fractions.Fraction` so the equalities are decided exactly.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from types import MappingProxyType
from typing import Iterable, Mapping, Optional, Sequence

__all__ = [
    "CodeSpec",
    "ConditionReport",
    "GnuParams",
    "binomial",
    "check_conditions",
    "gnu_code",
    "lemma_comb_check",
    "search_symmetric",
    "spec_from_dict",
    "spec_to_dict",
    "symmetric_single_deletion_code",
]


def binomial(n: int, w: int) -> int:
    """``C(n, w)``, with the convention that it is 0 when ``w < 0`` or ``w > n``."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if w < 0 or w > n:
        return 0
    return math.comb(n, w)


def _frac(value) -> Fraction:
    if isinstance(value, float):
        raise TypeError("squared amplitudes must be exact (int, Fraction or 'p/q' string)")
    return Fraction(value)


@dataclass(frozen=True, eq=True)
class CodeSpec:
    """Weight classes, squared amplitudes, block length ``N`` and deletion count ``t``."""

    N: int
    t: int
    levels: tuple
    f_sq: Mapping[int, Fraction] = field(compare=False)

    def __post_init__(self):
        levels = tuple(tuple(sorted(int(w) for w in lvl)) for lvl in self.levels)
        f_sq = {int(w): _frac(v) for w, v in self.f_sq.items()}
        if self.N < 2:
            raise ValueError(f"N must be at least 2, got {self.N}")
        if not 1 <= self.t < self.N:
            raise ValueError(f"t must satisfy 1 <= t < N, got t={self.t}, N={self.N}")
        if len(levels) < 2:
            raise ValueError("a code needs at least two levels")
        seen = set()
        for i, lvl in enumerate(levels):
            if not lvl:
                raise ValueError(f"level {i} is empty")
            if len(set(lvl)) != len(lvl):
                raise ValueError(f"level {i} repeats a weight")
            for w in lvl:
                if not 0 <= w <= self.N:
                    raise ValueError(f"weight {w} in level {i} is outside [0, {self.N}]")
                if w in seen:
                    raise ValueError(f"weight {w} appears in more than one level")
                seen.add(w)
        if set(f_sq) != seen:
            missing = sorted(seen - set(f_sq))
            extra = sorted(set(f_sq) - seen)
            raise ValueError(f"f_sq keys do not match the weights (missing {missing}, extra {extra})")
        for w, v in f_sq.items():
            if v <= 0:
                raise ValueError(f"f_sq[{w}] = {v} is not positive")
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "f_sq", MappingProxyType(dict(sorted(f_sq.items()))))

    def __eq__(self, other):
        if not isinstance(other, CodeSpec):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def _key(self):
        return (self.N, self.t, self.levels, tuple(self.f_sq.items()))

    @property
    def L(self) -> int:
        return len(self.levels)

    @property
    def weights(self) -> list:
        return sorted(self.f_sq)

    def level_of(self, w: int) -> Optional[int]:
        for i, lvl in enumerate(self.levels):
            if w in lvl:
                return i
        return None

    def with_t(self, t: int) -> "CodeSpec":
        return CodeSpec(self.N, t, self.levels, self.f_sq)


@dataclass(frozen=True)
class GnuParams:
    """Parameters of a ``(g, n, u)`` permutation-invariant code; ``N = g*n*u``."""

    g: int
    n: int
    u: Fraction

    def __post_init__(self):
        u = _frac(self.u)
        object.__setattr__(self, "u", u)
        if self.g < 2:
            raise ValueError(f"g >= 2 violated (g={self.g})")
        if self.n < 2:
            raise ValueError(f"n >= 2 violated (n={self.n})")
        if u < 1:
            raise ValueError(f"u >= 1 violated (u={u})")
        if (self.g * self.n * u).denominator != 1:
            raise ValueError(f"g*n*u = {self.g * self.n * u} is not an integer")

    @property
    def N(self) -> int:
        return int(self.g * self.n * self.u)

    @classmethod
    def parse(cls, text: str) -> "GnuParams":
        """Parse ``"g,n,u"`` where ``u`` may be a fraction like ``3/2``."""
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 3:
            raise ValueError(f"expected 'g,n,u', got {text!r}")
        return cls(int(parts[0]), int(parts[1]), Fraction(parts[2]))


@dataclass
class ConditionReport:
    d1_ok: bool
    d2_ok: bool
    d3_ok: bool
    d1_sums: list
    d2_sums: dict
    witness: Optional[dict]
    max_correctable_t: int

    @property
    def ok(self) -> bool:
        return self.d1_ok and self.d2_ok and self.d3_ok

    def to_dict(self) -> dict:
        return {
            "d1_ok": self.d1_ok,
            "d2_ok": self.d2_ok,
            "d3_ok": self.d3_ok,
            "d1_sums": [_fmt(s) for s in self.d1_sums],
            "d2_sums": {str(k): [_fmt(s) for s in sums] for k, sums in self.d2_sums.items()},
            "witness": self.witness,
            "max_correctable_t": self.max_correctable_t,
        }


def _fmt(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def _d1_sums(spec: CodeSpec) -> list:
    return [sum(spec.f_sq[w] * binomial(spec.N, w) for w in lvl) for lvl in spec.levels]


def deletion_sum(spec: CodeSpec, level: int, k: int, t: Optional[int] = None) -> Fraction:
    """``sum_{w in A_level} |f(w)|^2 C(N-t, w-k)``; the squared norm of a level after ``k`` lost ones."""
    t = spec.t if t is None else t
    return sum(
        (spec.f_sq[w] * binomial(spec.N - t, w - k) for w in spec.levels[level]),
        Fraction(0),
    )


def _d2(spec: CodeSpec, t: int):
    sums = {k: [deletion_sum(spec, i, k, t) for i in range(spec.L)] for k in range(t + 1)}
    for k, row in sums.items():
        if row[0] == 0:
            return sums, {"condition": "D2", "k": k, "reason": "level sum is zero", "level": 0}
        for i, s in enumerate(row[1:], start=1):
            if s != row[0]:
                return sums, {
                    "condition": "D2",
                    "k": k,
                    "levels": [0, i],
                    "sums": [_fmt(row[0]), _fmt(s)],
                }
    return sums, None


def _d3(spec: CodeSpec, t: int):
    ws = spec.weights
    for a, b in zip(ws, ws[1:]):
        if b - a <= t:
            return {"condition": "D3", "weights": [a, b]}
    return None


def _all_hold(spec: CodeSpec, t: int, d1_ok: bool) -> bool:
    return d1_ok and _d2(spec, t)[1] is None and _d3(spec, t) is None


def check_conditions(spec: CodeSpec) -> ConditionReport:
    """Decide the normalization, deletion-balance and weight-gap conditions exactly."""
    d1 = _d1_sums(spec)
    d1_witness = None
    for i, s in enumerate(d1):
        if s != 1:
            d1_witness = {"condition": "D1", "level": i, "sum": _fmt(s)}
            break
    d2_sums, d2_witness = _d2(spec, spec.t)
    d3_witness = _d3(spec, spec.t)
    d1_ok = d1_witness is None
    max_t = 0
    for t in range(1, spec.N):
        if _all_hold(spec, t, d1_ok):
            max_t = t
    return ConditionReport(
        d1_ok=d1_ok,
        d2_ok=d2_witness is None,
        d3_ok=d3_witness is None,
        d1_sums=d1,
        d2_sums=d2_sums,
        witness=d1_witness or d2_witness or d3_witness,
        max_correctable_t=max_t,
    )


def gnu_code(params: GnuParams, t: int) -> CodeSpec:
    """The ``(g, n, u)`` code: weights ``g*l``, split by the parity of ``l``."""
    g, n, N = params.g, params.n, params.N
    if t < 1:
        raise ValueError(f"t >= 1 violated (t={t})")
    if g < t + 1:
        raise ValueError(f"g >= t+1 violated (g={g}, t={t})")
    if n < t + 1:
        raise ValueError(f"n >= t+1 violated (n={n}, t={t})")
    even = tuple(g * l for l in range(0, n + 1, 2))
    odd = tuple(g * l for l in range(1, n + 1, 2))
    f_sq = {
        g * l: Fraction(binomial(n, l), 2 ** (n - 1) * binomial(N, g * l))
        for l in range(n + 1)
    }
    return CodeSpec(N, t, (even, odd), f_sq)


def _check_reflection_gap(N: int, levels: Sequence[Iterable[int]], gap: int = 1) -> list:
    levels = [sorted(set(int(w) for w in lvl)) for lvl in levels]
    for i, lvl in enumerate(levels):
        for w in lvl:
            if N - w not in lvl:
                raise ValueError(f"level {i} contains {w} but not its reflection {N - w}")
    ws = sorted(itertools.chain.from_iterable(levels))
    for a, b in zip(ws, ws[1:]):
        if b - a <= gap:
            raise ValueError(f"weights {a} and {b} differ by at most {gap}")
    return levels


def symmetric_single_deletion_code(N: int, levels: Sequence[Iterable[int]]) -> CodeSpec:
    """Single-deletion code from reflection-closed weight classes with gaps above 1.

    Each weight gets ``|f(w)|^2 = 1 / sum_{w' in its level} C(N, w')``.
    """
    levels = _check_reflection_gap(N, levels)
    f_sq = {}
    for lvl in levels:
        total = sum(binomial(N, w) for w in lvl)
        for w in lvl:
            f_sq[w] = Fraction(1, total)
    return CodeSpec(N, 1, tuple(tuple(lvl) for lvl in levels), f_sq)


def lemma_comb_check(n: int) -> bool:
    """True iff ``sum_l C(n,l) l^t (-1)^l == 0`` for every ``0 <= t <= n-1``."""
    if n < 1:
        raise ValueError("n must be positive")
    return all(
        sum(binomial(n, l) * l**t * (-1) ** l for l in range(n + 1)) == 0
        for t in range(n)
    )


SEARCH_MAX_N = 24


def _set_partitions(items: list, blocks: int):
    # every partition of ``items`` into exactly ``blocks`` nonempty groups,
    # groups ordered by their first element
    if blocks == 0:
        if not items:
            yield []
        return
    if len(items) < blocks:
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest, blocks - 1):
        yield [[first]] + part
    for part in _set_partitions(rest, blocks):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]


def search_symmetric(N: int, L: int) -> list:
    """Every single-deletion code built from ``L`` reflection-closed weight classes.

    Levels are unions of orbits ``{w, N-w}``; outputs are ordered canonically
    (levels by smallest weight) and deduplicated.
    """
    if N > SEARCH_MAX_N:
        raise ValueError(f"N={N} exceeds the search bound {SEARCH_MAX_N}")
    if N < 2:
        raise ValueError("N must be at least 2")
    if L < 2:
        raise ValueError("L must be at least 2")
    orbits = [
        tuple(sorted({w, N - w}))
        for w in range(N // 2 + 1)
        if abs(N - 2 * w) > 1 or w == N - w
    ]
    found = []
    seen = set()
    for r in range(L, len(orbits) + 1):
        for chosen in itertools.combinations(orbits, r):
            ws = sorted(itertools.chain.from_iterable(chosen))
            if any(b - a <= 1 for a, b in zip(ws, ws[1:])):
                continue
            for part in _set_partitions(list(chosen), L):
                levels = sorted(
                    (tuple(sorted(itertools.chain.from_iterable(block))) for block in part),
                    key=lambda lvl: lvl[0],
                )
                key = tuple(levels)
                if key in seen:
                    continue
                seen.add(key)
                found.append(symmetric_single_deletion_code(N, levels))
    found.sort(key=lambda s: s.levels)
    return found


def spec_to_dict(spec: CodeSpec) -> dict:
    return {
        "N": spec.N,
        "t": spec.t,
        "levels": [list(lvl) for lvl in spec.levels],
        "f_sq": {str(w): _fmt(v) for w, v in spec.f_sq.items()},
    }


def _parse_fraction(text, where: str) -> Fraction:
    if not isinstance(text, str):
        raise ValueError(f"{where}: expected a 'p/q' string, got {text!r}")
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"{where}: malformed rational {text!r}") from exc


def spec_from_dict(data: dict) -> CodeSpec:
    """Inverse of :func:`spec_to_dict`; errors name the offending field."""
    if not isinstance(data, dict):
        raise ValueError("spec must be a JSON object")
    for key in ("N", "t", "levels", "f_sq"):
        if key not in data:
            raise ValueError(f"missing field {key!r}")
    for key in ("N", "t"):
        if not isinstance(data[key], int) or isinstance(data[key], bool):
            raise ValueError(f"field {key!r} must be an integer")
    levels = data["levels"]
    if not isinstance(levels, list) or not all(isinstance(l, list) for l in levels):
        raise ValueError("field 'levels' must be a list of integer lists")
    for i, lvl in enumerate(levels):
        if not all(isinstance(w, int) and not isinstance(w, bool) for w in lvl):
            raise ValueError(f"field 'levels[{i}]' must contain integers")
    if not isinstance(data["f_sq"], dict):
        raise ValueError("field 'f_sq' must be an object")
    f_sq = {}
    for w, v in data["f_sq"].items():
        try:
            wi = int(w)
        except ValueError as exc:
            raise ValueError(f"field 'f_sq': key {w!r} is not an integer weight") from exc
        f_sq[wi] = _parse_fraction(v, f"field 'f_sq[{w}]'")
    return CodeSpec(data["N"], data["t"], tuple(tuple(l) for l in levels), f_sq)
