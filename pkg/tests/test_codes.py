import itertools
import re
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from pideletion.codes import (
    CodeSpec,
    GnuParams,
    binomial,
    check_conditions,
    gnu_code,
    lemma_comb_check,
    search_symmetric,
    spec_from_dict,
    spec_to_dict,
    symmetric_single_deletion_code,
)


def brute_level_sum(spec, level, k):
    """sum over strings x of length N-t with wt(x)+k in the level of |f(wt(x)+k)|^2."""
    n = spec.N - spec.t
    total = Fraction(0)
    for x in itertools.product((0, 1), repeat=n):
        w = sum(x) + k
        if w in spec.levels[level]:
            total += spec.f_sq[w]
    return total


def test_binomial():
    assert binomial(4, 2) == 6
    assert binomial(3, -1) == 0
    assert binomial(3, 5) == 0
    assert binomial(0, 0) == 1


def test_gnu_221_is_four_qubit_code():
    spec = gnu_code(GnuParams(2, 2, 1), 1)
    assert spec.N == 4
    assert spec.levels == ((0, 4), (2,))
    assert dict(spec.f_sq) == {0: Fraction(1, 2), 2: Fraction(1, 6), 4: Fraction(1, 2)}
    report = check_conditions(spec)
    assert report.ok
    assert report.d2_sums == {0: [Fraction(1, 2)] * 2, 1: [Fraction(1, 2)] * 2}


def test_gnu_331_is_nine_qubit_code():
    spec = gnu_code(GnuParams(3, 3, 1), 2)
    assert spec.N == 9
    assert spec.levels == ((0, 6), (3, 9))
    assert dict(spec.f_sq) == {
        0: Fraction(1, 4),
        3: Fraction(1, 112),
        6: Fraction(1, 112),
        9: Fraction(1, 4),
    }
    assert check_conditions(spec).ok


@pytest.mark.parametrize(
    "args,t,message",
    [
        ((2, 2, Fraction(1, 2)), 1, "u >= 1"),
        ((1, 2, 1), 1, "g >= 2"),
        ((2, 2, Fraction(1, 3)), 1, "u >= 1"),
        ((3, 3, Fraction(7, 6)), 1, "not an integer"),
    ],
)
def test_gnu_params_rejected(args, t, message):
    with pytest.raises(ValueError, match=message):
        gnu_code(GnuParams(*args), t)


@pytest.mark.parametrize("g,n,t,message", [(2, 3, 2, "g >= t+1"), (3, 2, 2, "n >= t+1")])
def test_gnu_code_needs_enough_spacing(g, n, t, message):
    with pytest.raises(ValueError, match=re.escape(message)):
        gnu_code(GnuParams(g, n, 1), t)


def test_gnu_params_parse():
    p = GnuParams.parse("2, 4, 3/2")
    assert (p.g, p.n, p.u, p.N) == (2, 4, Fraction(3, 2), 12)


def test_adjacent_weights_fail_gap():
    spec = CodeSpec(4, 1, ((0,), (1,)), {0: 1, 1: Fraction(1, 4)})
    report = check_conditions(spec)
    assert not report.d3_ok
    assert report.witness is not None


def test_zero_sum_fails_deletion_balance():
    spec = CodeSpec(4, 1, ((0,), (4,)), {0: 1, 4: 1})
    report = check_conditions(spec)
    assert report.d1_ok
    assert not report.d2_ok
    assert report.d2_sums[1][0] == 0
    assert report.witness["condition"] == "D2"


def test_perturbed_four_qubit_code_has_d1_witness():
    spec = CodeSpec(4, 1, ((0, 4), (2,)), {0: Fraction(1, 2), 2: Fraction(1, 5), 4: Fraction(1, 2)})
    report = check_conditions(spec)
    assert not report.d1_ok
    assert report.witness == {"condition": "D1", "level": 1, "sum": "6/5"}


def test_max_correctable_t():
    assert check_conditions(gnu_code(GnuParams(3, 3, 1), 2)).max_correctable_t == 2
    assert check_conditions(gnu_code(GnuParams(2, 2, 1), 1)).max_correctable_t == 1


def test_code_spec_invariants():
    with pytest.raises(ValueError, match="more than one level"):
        CodeSpec(4, 1, ((0, 2), (2,)), {0: 1, 2: 1})
    with pytest.raises(ValueError, match="empty"):
        CodeSpec(4, 1, ((0,), ()), {0: 1})
    with pytest.raises(ValueError, match="missing"):
        CodeSpec(4, 1, ((0,), (2,)), {0: 1})
    with pytest.raises(ValueError, match="positive"):
        CodeSpec(4, 1, ((0,), (2,)), {0: 1, 2: 0})
    with pytest.raises(TypeError):
        CodeSpec(4, 1, ((0,), (2,)), {0: 1, 2: 0.5})
    with pytest.raises(ValueError):
        CodeSpec(4, 4, ((0,), (2,)), {0: 1, 2: 1})


def test_code_spec_hashable_and_equal():
    a = gnu_code(GnuParams(2, 2, 1), 1)
    b = CodeSpec(4, 1, ([4, 0], [2]), {"0": "1/2", 2: Fraction(1, 6), 4: Fraction(1, 2)})
    assert a == b and hash(a) == hash(b)


def _gnu_sweep():
    for t in (1, 2, 3, 4):
        for g in range(t + 1, 6):
            for n in range(t + 1, 6):
                for u in (Fraction(1), Fraction(3, 2), Fraction(2)):
                    N = g * n * u
                    if N.denominator == 1 and N <= 30:
                        yield g, n, u, t


@pytest.mark.parametrize("g,n,u,t", list(_gnu_sweep()))
def test_gnu_family_satisfies_conditions(g, n, u, t):
    assert check_conditions(gnu_code(GnuParams(g, n, u), t)).ok


@pytest.mark.parametrize("g,n,u,t", [(2, 2, 1, 1), (3, 3, 1, 2), (2, 3, 1, 1), (3, 2, 2, 1), (3, 3, 1, 1)])
def test_deletion_sums_match_string_enumeration(g, n, u, t):
    spec = gnu_code(GnuParams(g, n, u), t)
    report = check_conditions(spec)
    for k in range(t + 1):
        for i in range(spec.L):
            assert report.d2_sums[k][i] == brute_level_sum(spec, i, k)


def test_symmetric_eight_qubit():
    spec = symmetric_single_deletion_code(8, [[0, 8], [4]])
    assert dict(spec.f_sq) == {0: Fraction(1, 2), 4: Fraction(1, 70), 8: Fraction(1, 2)}
    assert spec.t == 1
    report = check_conditions(spec)
    assert report.ok
    assert report.d2_sums == {0: [Fraction(1, 2)] * 2, 1: [Fraction(1, 2)] * 2}


def test_symmetric_matches_gnu_on_four_qubits():
    sym = symmetric_single_deletion_code(4, [[0, 4], [2]])
    assert dict(sym.f_sq) == dict(gnu_code(GnuParams(2, 2, 1), 1).f_sq)


def test_symmetric_rejects_asymmetric_level():
    with pytest.raises(ValueError, match="reflection"):
        symmetric_single_deletion_code(8, [[0, 3], [5]])
    with pytest.raises(ValueError, match="contains 3 but not its reflection 5"):
        symmetric_single_deletion_code(8, [[3], [5]])


def test_symmetric_rejects_small_gap():
    with pytest.raises(ValueError, match="differ"):
        symmetric_single_deletion_code(8, [[0, 8], [1, 7]])


@pytest.mark.parametrize("N,L", [(4, 2), (6, 2), (8, 2), (8, 3), (10, 3), (12, 2)])
def test_symmetric_family_half_sums(N, L):
    for spec in search_symmetric(N, L):
        report = check_conditions(spec)
        assert report.ok
        for k in (0, 1):
            assert report.d2_sums[k] == [Fraction(1, 2)] * L


def test_lemma_comb_small():
    assert lemma_comb_check(1)
    assert lemma_comb_check(2)
    assert lemma_comb_check(12)


def test_lemma_comb_sum_fails_at_t_equal_n():
    # the identity is sharp: t = n gives (-1)^n n!
    n = 4
    assert sum(binomial(n, l) * l**n * (-1) ** l for l in range(n + 1)) == 24


@pytest.mark.parametrize("n", range(1, 21))
def test_lemma_comb_up_to_twenty(n):
    assert lemma_comb_check(n)


@given(st.integers(2, 14), st.integers(1, 6), st.data())
def test_gap_condition_monotone_in_t(N, t, data):
    t = min(t, N - 1)
    weights = data.draw(st.lists(st.integers(0, N), min_size=2, max_size=4, unique=True))
    spec = CodeSpec(N, t, ((weights[0],), tuple(weights[1:])), {w: 1 for w in weights})
    if check_conditions(spec).d3_ok:
        for smaller in range(1, t):
            assert check_conditions(spec.with_t(smaller)).d3_ok


def test_search_small_cases():
    four = [s.levels for s in search_symmetric(4, 2)]
    assert ((0, 4), (2,)) in four
    eight = [s.levels for s in search_symmetric(8, 3)]
    assert ((0, 8), (2, 6), (4,)) in eight
    assert search_symmetric(2, 2) == []


def test_search_bound():
    with pytest.raises(ValueError):
        search_symmetric(25, 2)


def test_search_is_exhaustive_for_n6():
    # orbits of N=6 with internal gap > 1: {0,6}, {1,5}, {2,4}, {3}
    got = {s.levels for s in search_symmetric(6, 2)}
    assert got == {((0, 6), (2, 4)), ((0, 6), (3,)), ((1, 5), (3,))}


def test_spec_json_round_trip(code9):
    data = spec_to_dict(code9)
    assert data["f_sq"] == {"0": "1/4", "3": "1/112", "6": "1/112", "9": "1/4"}
    assert spec_from_dict(data) == code9


@pytest.mark.parametrize(
    "mutate,field",
    [
        (lambda d: d.pop("t"), "'t'"),
        (lambda d: d.update(N="9"), "'N'"),
        (lambda d: d["f_sq"].update({"3": 0.25}), "f_sq[3]"),
        (lambda d: d["f_sq"].update({"3": "x/y"}), "f_sq[3]"),
        (lambda d: d.update(levels=[[0, 6], ["3"]]), "levels[1]"),
    ],
)
def test_spec_from_dict_names_bad_field(code9, mutate, field):
    data = spec_to_dict(code9)
    mutate(data)
    with pytest.raises(ValueError, match=field.replace("[", r"\[").replace("]", r"\]")):
        spec_from_dict(data)
