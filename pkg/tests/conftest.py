import itertools

import numpy as np
import pytest

from pideletion import GnuParams, gnu_code, symmetric_single_deletion_code


def random_density(n, rng, rank=None):
    dim = 2**n
    rank = dim if rank is None else rank
    a = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    m = a @ a.conj().T
    return m / np.trace(m)


def random_unitary(dim, rng):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(a)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def bits_of(index, n):
    return [(index >> (n - 1 - i)) & 1 for i in range(n)]


def index_of(bits):
    out = 0
    for b in bits:
        out = 2 * out + b
    return out


def brute_partial_trace(m, n, p):
    """Reference partial trace by explicit summation over bit strings (p is 1-based)."""
    out = np.zeros((2 ** (n - 1), 2 ** (n - 1)), dtype=complex)
    for i in range(2**n):
        for j in range(2**n):
            x, y = bits_of(i, n), bits_of(j, n)
            if x[p - 1] != y[p - 1]:
                continue
            xi = index_of(x[: p - 1] + x[p:])
            yj = index_of(y[: p - 1] + y[p:])
            out[xi, yj] += m[i, j]
    return out


@pytest.fixture(scope="session")
def code4():
    return gnu_code(GnuParams(2, 2, 1), 1)


@pytest.fixture(scope="session")
def code9():
    return gnu_code(GnuParams(3, 3, 1), 2)


def fleet():
    """Specs small enough for exhaustive dense checks (N <= 9)."""
    return [
        gnu_code(GnuParams(2, 2, 1), 1),
        gnu_code(GnuParams(2, 3, 1), 1),
        gnu_code(GnuParams(2, 2, 2), 1),
        gnu_code(GnuParams(3, 3, 1), 1),
        gnu_code(GnuParams(3, 3, 1), 2),
        symmetric_single_deletion_code(8, [[0, 8], [4]]),
        symmetric_single_deletion_code(8, [[0, 8], [2, 6], [4]]),
    ]


def fleet_ids():
    return [f"N{s.N}-t{s.t}-L{s.L}-{'_'.join(''.join(map(str, l)) for l in s.levels)}" for s in fleet()]


_ACCEPTANCE = []


@pytest.fixture
def criterion():
    """Record one acceptance line; the summary hook prints them all."""

    def record(number, title, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title}"
        if detail:
            line += f" ({detail})"
        _ACCEPTANCE.append(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
