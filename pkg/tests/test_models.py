import itertools
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from ttg.errors import NotRigidError, ParseError, UsageError
from ttg.models import (
    AlgebraModel,
    FinitePoset,
    HomSpace,
    PosetModel,
    chain_poset,
    cone,
    direct_sum,
    find_isomorphism,
    hom_dim,
    hom_space,
    homology_dims,
    identity,
    is_nullhomotopic,
    is_zero,
    minimize,
    scalar_map,
    support,
    suspend,
    suspend_map,
    suspension_iso_left,
    suspension_iso_right,
    tensor,
)
from ttg.models.modelfile import load_model, parse_model
from ttg.models.split import split_summands
from ttg.rings import parse_presentation

DATA = Path(__file__).resolve().parents[1] / "src" / "ttg" / "data"


@pytest.fixture(scope="module")
def poset12():
    return load_model(DATA / "poset12.ttg")


@pytest.fixture(scope="module")
def f2xf2():
    return load_model(DATA / "f2xf2.ttg")


@pytest.fixture(scope="module")
def dual_numbers():
    return load_model(DATA / "f3_dual.ttg")


# -- brute-force oracle for hom spaces over a small algebra ----------------------


def brute_hom_dim(alg, src, tgt, k):
    """``dim [Σ^k X, Y]`` for complexes of rank-one free modules, by enumeration.

    A complex is ``{degree: differential element}`` on consecutive degrees,
    with ``A`` in each degree of ``range(lo, hi + 1)``.  Chain maps and
    homotopies are enumerated element-wise, so only the multiplication
    table of the algebra is used.
    """
    p = alg.p
    elems = [tuple(a) for a in alg.elements()]
    mul = {(a, b): tuple(alg.mul(np.array(a), np.array(b))) for a in elems for b in elems}
    zero = tuple([0] * alg.dim)

    def add(a, b):
        return tuple((x + y) % p for x, y in zip(a, b))

    def neg(a):
        return tuple((-x) % p for x in a)

    # Σ^k shifts degrees down by k and multiplies the differential by (-1)^k
    sdeg, sdiff = src
    sdeg = [n - k for n in sdeg]
    sdiff = {n - k: (neg(d) if k % 2 else d) for n, d in sdiff.items()}
    tdeg, tdiff = tgt

    def d(diffs, n):
        return diffs.get(n, zero)

    common = sorted(set(sdeg) & set(tdeg))
    maps = []
    for values in itertools.product(elems, repeat=len(common)):
        f = dict(zip(common, values))
        ok = True
        for n in set(sdeg) | set(tdeg):
            # d_Y f_n = f_{n+1} d_X
            lhs = mul[(d(tdiff, n), f.get(n, zero))] if n in tdeg and n + 1 in tdeg else zero
            rhs = mul[(f.get(n + 1, zero), d(sdiff, n))] if n in sdeg and n + 1 in sdeg else zero
            if lhs != rhs:
                ok = False
                break
        if ok:
            maps.append(tuple(f.get(n, zero) for n in common))
    # homotopies h_n : X^n -> Y^{n-1}; f ~ d h + h d
    hdeg = [n for n in sdeg if n - 1 in tdeg]
    nulls = set()
    for values in itertools.product(elems, repeat=len(hdeg)):
        h = dict(zip(hdeg, values))
        f = []
        for n in common:
            a = mul[(d(tdiff, n - 1), h.get(n, zero))] if n - 1 in tdeg else zero
            b = mul[(h.get(n + 1, zero), d(sdiff, n))] if n + 1 in sdeg else zero
            f.append(add(a, b))
        nulls.add(tuple(f))
    ratio = len(maps) // len(nulls)
    dim = 0
    while ratio > 1:
        ratio //= p
        dim += 1
    return dim


def free_rank_one(model, degrees, diffs, name=""):
    ranks = {n: 1 for n in degrees}
    return model.free_complex(ranks, {n: [[d]] for n, d in diffs.items()}, name)


@pytest.mark.parametrize("presentation", ["F3[x]/(x^2)", "F2[x]/(x^3)", "F2[x]/(x^2+x)"])
@pytest.mark.parametrize("k", [-1, 0, 1])
def test_hom_dims_match_enumeration(presentation, k):
    alg = parse_presentation(presentation)
    m = AlgebraModel(alg)
    x = tuple(alg.basis()[1])
    one = tuple(alg.one())
    shapes = [
        ([0], {}),
        ([-1, 0], {-1: x}),
        ([0, 1], {0: x}),
        ([-1, 0], {-1: one}),
    ]
    for s, t in itertools.product(shapes, repeat=2):
        X = free_rank_one(m, s[0], s[1])
        Y = free_rank_one(m, t[0], t[1])
        assert hom_dim(X, Y, k) == brute_hom_dim(alg, s, t, k), (s, t)


# -- the poset 1 -> 2 -----------------------------------------------------------


def test_poset_unit_endomorphisms(poset12):
    U = poset12.model.unit()
    assert hom_dim(U, U, 0) == 1
    for i in (-3, -2, -1, 1, 2, 3):
        assert hom_dim(U, U, i) == 0


def test_poset_supports(poset12):
    assert support(poset12.object("S1")) == ["x1"]
    assert support(poset12.object("S2")) == ["x2"]
    assert support(poset12.model.unit()) == ["x1", "x2"]
    assert support(poset12.object("S12")) == ["x1", "x2"]


def test_poset_extension_class(poset12):
    S1, S2 = poset12.object("S1"), poset12.object("S2")
    assert hom_dim(S1, suspend(S2, 1)) == 1
    assert hom_dim(S2, S1) == 0
    assert hom_dim(S1, S2) == 0


def test_unit_does_not_split(poset12):
    # S2 -> 𝟙 -> S1 is a triangle whose connecting map is nonzero
    U = poset12.model.unit()
    C = poset12.object("C")
    assert find_isomorphism(C, poset12.object("S1")) is not None
    assert find_isomorphism(U, poset12.object("S12")) is None


def test_poset_has_no_duals(poset12):
    with pytest.raises(NotRigidError):
        poset12.model.dual(poset12.object("S1"))


def test_poset_tensor_of_simples_vanishes(poset12):
    S1, S2 = poset12.object("S1"), poset12.object("S2")
    assert is_zero(tensor(S1, S2))
    assert not is_zero(tensor(S1, S1))


def test_diamond_resolution():
    poset = FinitePoset("abcd", [("a", "b"), ("a", "c"), ("b", "d"), ("c", "d")])
    m = PosetModel(poset, 2)
    Sa = m.simple("a")
    # 0 -> P_d -> P_b + P_c -> P_a, with S_d = P_d projective
    assert {n: Sa.rank(n) for n in Sa.degrees} == {-2: 1, -1: 2, 0: 1}
    assert m.simple("d").total_rank() == 1
    assert support(Sa) == ["xa"]
    hom = homology_dims(Sa, m.point_index("xa"))
    assert {n: v for n, v in hom.items() if v} == {0: 1}
    for e in "bcd":
        assert is_zero(tensor(m.simple(e), Sa))


def test_unit_without_least_element_is_a_unit():
    # 1 -> 3 <- 2 has no least element; the unit is a resolution
    poset = FinitePoset(["1", "2", "3"], [("1", "3"), ("2", "3")])
    m = PosetModel(poset, 3)
    U = m.unit()
    assert support(U) == ["x1", "x2", "x3"]
    for e in ("1", "2", "3"):
        S = m.simple(e)
        assert find_isomorphism(minimize(tensor(U, S)).small, S) is not None


# -- the algebra models --------------------------------------------------------


def test_algebra_unit_and_supports(f2xf2):
    m = f2xf2.model
    U = m.unit()
    assert hom_dim(U, U) == 2
    assert hom_dim(U, U, 1) == 0
    assert support(f2xf2.object("Ce")) == [m.points[1]]
    assert support(f2xf2.object("Cf")) == [m.points[0]]
    assert is_zero(f2xf2.object("K"))


def test_dual_numbers_koszul(dual_numbers):
    Kx = dual_numbers.object("Kx")
    m = dual_numbers.model
    assert hom_dim(Kx, Kx) == 2
    assert hom_dim(Kx, Kx, 1) == 1
    assert hom_dim(Kx, Kx, -1) == 1
    assert not is_zero(Kx)
    assert support(Kx) == list(m.points)


def test_double_dual(dual_numbers):
    m = dual_numbers.model
    Kx = dual_numbers.object("Kx")
    DKx = dual_numbers.object("DKx")
    assert DKx.degrees == [0, 1]
    DDKx = m.dual(DKx)
    assert DDKx.diffs()
    assert find_isomorphism(DDKx, Kx) is not None


def test_dual_of_suspension(dual_numbers):
    m = dual_numbers.model
    Kx = dual_numbers.object("Kx")
    f = m.dual_suspension_iso(Kx, 1)
    assert f.is_chain_map()


def test_anticommuting_suspension_square(dual_numbers):
    # Σ²(X⊗Y) -> ΣX⊗ΣY two ways: the composites differ by a sign
    X = dual_numbers.object("Kx")
    Y = dual_numbers.model.unit()
    a = suspension_iso_right(suspend(X, 1), Y, 1) @ suspend_map(suspension_iso_left(X, Y, 1), 1)
    b = suspension_iso_left(X, suspend(Y, 1), 1) @ suspend_map(suspension_iso_right(X, Y, 1), 1)
    assert a.is_chain_map() and b.is_chain_map()
    b = b.with_ends(a.source, a.target)
    assert not is_nullhomotopic(a)
    assert is_nullhomotopic(a + b)


def test_tensor_support_is_intersection(f2xf2, poset12):
    for mf in (f2xf2, poset12):
        names = mf.object_names + ["unit"]
        for x, y in itertools.product(names, repeat=2):
            X, Y = mf.object(x), mf.object(y)
            assert set(support(tensor(X, Y))) == set(support(X)) & set(support(Y))


# -- minimization and splitting ----------------------------------------------------


def _random_complex(model, data):
    """Tensor products and cones of scalar maps on the unit, shifted."""
    A = model.algebra
    U = model.unit()
    parts = []
    for _ in range(data.draw(st.integers(1, 2))):
        a = data.draw(st.sampled_from([tuple(v) for v in A.elements()]))
        C = cone(scalar_map(U, np.array(a)))
        parts.append(suspend(C, data.draw(st.integers(-1, 1))))
    X = parts[0]
    for P in parts[1:]:
        X = data.draw(st.sampled_from([tensor, direct_sum]))(X, P)
    return X


@pytest.mark.parametrize("presentation", ["F2[x]/(x) x F2[x]/(x)", "F3[x]/(x^2)"])
@settings(max_examples=15, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(data=st.data())
def test_minimize_is_homotopy_equivalence(presentation, data):
    m = AlgebraModel(parse_presentation(presentation))
    X = _random_complex(m, data)
    red = minimize(X)
    assert red.small.total_rank() <= X.total_rank()
    assert support(red.small) == support(X)
    assert is_nullhomotopic(red.proj @ red.incl - identity(red.small))
    assert is_nullhomotopic(red.incl @ red.proj - identity(X))


@pytest.mark.parametrize("presentation", ["F2[x]/(x) x F2[x]/(x)", "F3[x]/(x^2)"])
@settings(max_examples=15, deadline=None)
@given(data=st.data())
def test_decomposed_hom_matches_dense(presentation, data):
    m = AlgebraModel(parse_presentation(presentation))
    X = minimize(_random_complex(m, data)).small
    Y = minimize(_random_complex(m, data)).small
    assert hom_space(X, Y).dim == HomSpace(X, Y).dim


@settings(max_examples=10, deadline=None)
@given(data=st.data())
def test_split_summands_gives_inverse_isomorphisms(data):
    m = AlgebraModel(parse_presentation("F3[x]/(x^2)"))
    X = _random_complex(m, data)
    out = split_summands(X)
    if out is None:
        return
    Y, incl, proj = out
    assert incl.is_chain_map() and proj.is_chain_map()
    assert not (proj @ incl - identity(Y)).comps()
    assert not (incl @ proj - identity(X)).comps()


def test_koszul_square_splits(dual_numbers):
    # min(Kx ⊗ Kx) ≅ Kx ⊕ ΣKx only after a change of basis
    Kx = dual_numbers.object("Kx")
    M = minimize(tensor(Kx, Kx)).small
    target = direct_sum(Kx, suspend(Kx, 1))
    assert find_isomorphism(M, target) is not None


# -- model files --------------------------------------------------------------------


def test_shipped_models_load():
    for path in sorted(DATA.glob("*.ttg")):
        mf = load_model(path)
        for name in mf.object_names:
            mf.object(name).check()


@pytest.mark.parametrize(
    "text, line",
    [
        ('[model\nkind = "poset"\n', 1),
        ('[model]\nkind = "poset"\nelements = ["1"]\n[object.A]\nsum = ["B"]\n', 5),
        ('[model]\nkind = "banana"\n', 2),
        ('[model]\nkind = "algebra"\npresentation = "F4[x]/(x)"\n', 3),
        ('[model]\nkind = "poset"\nelements = ["1"]\n[object.A]\nsimple = "7"\n', 5),
    ],
)
def test_parse_errors_carry_position(text, line):
    with pytest.raises(ParseError) as err:
        mf = parse_model(text)
        for name in mf.object_names:
            mf.object(name)
    assert err.value.line == line
    assert err.value.column is not None and err.value.column >= 1


def test_nonprime_residue_field_rejected_when_parsing():
    text = '[model]\nkind = "algebra"\npresentation = "F2[x]/(x) x F2[x]/(x^2+x+1)"\n'
    with pytest.raises(ParseError, match="irreducible factor") as err:
        parse_model(text)
    # the second factor starts at column 28 of the line
    assert (err.value.line, err.value.column) == (3, 28)


def test_cyclic_objects_rejected():
    text = '[model]\nkind = "poset"\nelements = ["1"]\n[object.A]\nsum = ["B"]\n[object.B]\nsum = ["A"]\n'
    with pytest.raises(UsageError, match="cycle"):
        parse_model(text).object("A")


def test_chain_poset_name():
    assert chain_poset(2).name == "poset(1→2)"
