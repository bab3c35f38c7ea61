import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ttg.errors import ParseError, UnsupportedError, UsageError
from ttg.rings import (
    FinCommAlgebra,
    GradedAlgebra,
    direct_product,
    element_from_polynomial,
    localize,
    nilradical,
    parse_presentation,
    quotient,
    spec,
    spech,
    v_ideal,
)


def brute_nilpotents(alg):
    return [tuple(a) for a in alg.elements() if alg.is_nilpotent(a)]


def test_parse_field():
    alg = parse_presentation("F2[x]/(x)")
    assert alg.dim == 1
    assert len(spec(alg)[1]) == 1


def test_parse_split_semisimple_matches_crt():
    alg = parse_presentation("F2[x]/(x^2+x)")
    assert alg.dim == 2
    # CRT oracle: a + b x  ->  (value at 0, value at 1)
    crt = {tuple(a): (a[0] % 2, (a[0] + a[1]) % 2) for a in alg.elements()}
    assert len(set(crt.values())) == 4
    for a, b in itertools.product(alg.elements(), repeat=2):
        prod = alg.mul(a, b)
        ca, cb = crt[tuple(a)], crt[tuple(b)]
        assert crt[tuple(prod)] == (ca[0] * cb[0] % 2, ca[1] * cb[1] % 2)


def test_parse_dual_numbers():
    alg = parse_presentation("F3[x]/(x^2)")
    x = np.array([0, 1])
    assert alg.dim == 2
    assert not np.any(alg.mul(x, x))


def test_whitespace_insignificant():
    a = parse_presentation(" F2 [ x ] / ( x ^ 2 + x ) ")
    b = parse_presentation("F2[x]/(x^2+x)")
    assert np.array_equal(a.table, b.table)


@pytest.mark.parametrize(
    "text, col",
    [("F4[x]/(x)", 2), ("F3[x]/(2x^2+1)", 8), ("F2[y]/(x)", 4), ("F2[x]/(x) y", 11)],
)
def test_parse_errors_have_positions(text, col):
    with pytest.raises(ParseError) as err:
        parse_presentation(text)
    assert err.value.column == col
    assert err.value.line == 1


def test_irreducible_quadratic_rejected_at_spec():
    alg = parse_presentation("F2[x]/(x) x F2[x]/(x^2+x+1)")
    with pytest.raises(UnsupportedError) as err:
        spec(alg)
    assert err.value.column == 13


def test_spec_examples():
    space, primes = spec(parse_presentation("F2[x]/(x)"))
    assert len(space) == 1
    space, primes = spec(parse_presentation("F2[x]/(x) x F2[x]/(x)"))
    assert space.is_discrete() and len(primes) == 2
    # primes are F_2 x 0 style: each kills exactly one idempotent
    kills = sorted(tuple(int(q.contains(e)) for e in ([1, 0], [0, 1])) for q in primes)
    assert kills == [(0, 1), (1, 0)]
    space, primes = spec(parse_presentation("F3[x]/(x^2)"))
    assert len(primes) == 1
    assert primes[0].contains([0, 1]) and not primes[0].contains([1, 0])


def test_nilradical_examples():
    f2f2 = parse_presentation("F2[x]/(x) x F2[x]/(x)")
    assert nilradical(f2f2).dim == 0
    dual = parse_presentation("F3[x]/(x^2)")
    nil = nilradical(dual)
    assert sorted(brute_nilpotents(dual)) == [(0, 0), (0, 1), (0, 2)]
    assert nil.dim == 1 and nil.contains([0, 1])
    assert nilradical(parse_presentation("F2[x]/(x^2+x)")).dim == 0


def test_v_ideal_examples():
    alg = parse_presentation("F2[x]/(x) x F2[x]/(x)")
    space, primes = spec(alg)
    assert v_ideal(alg, [[0, 0]]).points == frozenset(space.points)
    assert v_ideal(alg, [[1, 0]]).points == {q.label for q in primes if q.contains([1, 0])}
    assert len(v_ideal(alg, [[1, 0]])) == 1
    assert v_ideal(alg, [1]).points == frozenset()


def test_localize_examples():
    alg = parse_presentation("F2[x]/(x) x F2[x]/(x)")
    same, m = localize(alg, [])
    assert same.dim == 2 and np.array_equal(m, np.eye(2, dtype=np.int64))
    loc, m = localize(alg, [[1, 0]])
    assert loc.dim == 1 and m.tolist() == [[1, 0]]
    zero, _ = localize(parse_presentation("F3[x]/(x^2)"), [[0, 1]])
    assert zero.dim == 0


def test_localize_idempotent():
    alg = parse_presentation("F5[x]/(x^3+4x)")
    s = [element_from_polynomial(alg, "x")]
    loc, m = localize(alg, s)
    again, m2 = localize(loc, [(m @ g) % 5 for g in s])
    # the second canonical map is an isomorphism of algebras
    assert loc.is_isomorphic_via(again, m2)


def test_quotient_by_prime_is_a_field_of_dim_one():
    for text in ["F2[x]/(x^2+x)", "F3[x]/(x^2)", "F5[x]/(x^3+4x) x F5[x]/(x^2)"]:
        alg = parse_presentation(text)
        for q in spec(alg)[1]:
            field, _, _ = quotient(alg, q.basis)
            assert field.dim == 1


def test_spec_of_product_is_disjoint_union():
    a = parse_presentation("F3[x]/(x^2+2x)")
    b = parse_presentation("F3[x]/(x^2)")
    ab = direct_product(a, b)
    assert len(spec(ab)[1]) == len(spec(a)[1]) + len(spec(b)[1])


def test_non_commutative_table_rejected():
    t = np.zeros((2, 2, 2), dtype=np.int64)
    t[0, 1, 1] = 1
    with pytest.raises(UsageError):
        FinCommAlgebra(2, t, [1, 0])


def graded_example():
    # G^0 = F_2, G^1 spanned by one element u with u^2 = 0
    return GradedAlgebra(
        2,
        {0: 1, 1: 1},
        {(0, 0): [[[1]]], (0, 1): [[[1]]], (1, 0): [[[1]]]},
        [1],
    )


def test_spech_examples():
    g = GradedAlgebra(2, {0: 2}, {(0, 0): parse_presentation("F2[x]/(x^2+x)").table}, [1, 0])
    space, proj, g0 = spech(g)
    assert len(space) == 2 and space.points == spec(g0)[0].points
    space, proj, _ = spech(graded_example())
    assert len(space) == 1
    assert all(len([q for q in proj if proj[q] == v]) == 1 for v in proj.values())


def test_graded_commutativity_checked():
    with pytest.raises(UsageError):
        # odd element squaring to a nonzero element breaks ab = -ba only off char 2
        GradedAlgebra(3, {0: 1, 1: 1, 2: 1}, {(0, 0): [[[1]]], (0, 1): [[[1]]], (1, 0): [[[1]]],
                                                 (0, 2): [[[1]]], (2, 0): [[[1]]], (1, 1): [[[1]]]}, [1])


@st.composite
def presentations(draw):
    p = draw(st.sampled_from([2, 3, 5]))
    nterms = draw(st.integers(1, 2))
    terms = []
    for _ in range(nterms):
        roots = draw(st.lists(st.integers(0, p - 1), min_size=1, max_size=3))
        # (x - r1)(x - r2)... expanded
        poly = [1]
        for r in roots:
            new = [0] * (len(poly) + 1)
            for k, c in enumerate(poly):
                new[k + 1] = (new[k + 1] + c) % p
                new[k] = (new[k] - r * c) % p
            poly = new
        mono = "+".join(
            (f"{c}" if k == 0 else (f"{c}x^{k}" if c != 1 else f"x^{k}"))
            for k, c in reversed(list(enumerate(poly)))
            if c
        )
        terms.append(f"F{p}[x]/({mono})")
    return " x ".join(terms), p


@settings(max_examples=30, deadline=None)
@given(presentations())
def test_spec_one_prime_per_local_factor(pres):
    text, p = pres
    alg = parse_presentation(text)
    space, primes = spec(alg)
    nil = nilradical(alg)
    # nilradical = intersection of primes; quotient by nilradical reduced
    for k in range(nil.dim):
        assert all(q.contains(nil.basis[:, k]) for q in primes)
    red, _, _ = quotient(alg, nil.basis)
    assert red.dim == len(primes)
    assert nilradical(red).dim == 0
