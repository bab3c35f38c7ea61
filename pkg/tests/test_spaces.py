import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ttg.errors import UsageError
from ttg.spaces import (
    FiniteSpectralSpace,
    FiltrationNode,
    Filtration,
    chain_filtration,
    check_spectral_map,
    closure,
    connected_components,
    filtration_to_dot,
    hochster_dual,
    irreducible_closed_sets,
    is_inclusion_reversing,
    is_thomason_closed,
    pullback_filtration,
    space_to_dot,
)


def discrete(n=2):
    return FiniteSpectralSpace([f"x{i + 1}" for i in range(n)])


def chain2():
    # g is generic, c is the closed point
    return FiniteSpectralSpace(["g", "c"], [("g", "c")])


def test_closure_examples():
    assert closure(discrete(), []).points == frozenset()
    assert closure(discrete(), ["x1"]).points == {"x1"}
    assert closure(chain2(), ["g"]).points == {"g", "c"}
    assert closure(chain2(), ["c"]).points == {"c"}


def test_closure_unknown_label():
    with pytest.raises(UsageError):
        closure(discrete(), ["nope"])


def test_antisymmetry_enforced():
    with pytest.raises(UsageError):
        FiniteSpectralSpace(["a", "b"], [("a", "b"), ("b", "a")])


def test_thomason_on_finite_spaces():
    s = discrete()
    for c in s.closed_sets():
        assert is_thomason_closed(c)
    assert is_thomason_closed(s.empty())


def test_hochster_dual():
    s = discrete()
    assert hochster_dual(s).points == s.points and hochster_dual(s).is_discrete()
    d = hochster_dual(chain2())
    assert d.specializes("c", "g") and not d.specializes("g", "c")
    assert hochster_dual(d) == chain2()


def test_check_spectral_map_examples():
    s = chain2()
    assert check_spectral_map(s, s, {"g": "g", "c": "c"}).valid
    assert check_spectral_map(s, s, {"g": "c", "c": "c"}).valid
    swap = check_spectral_map(s, s, {"g": "c", "c": "g"})
    assert not swap.valid
    assert swap.witness.points == {"c"}


def test_components_and_irreducibles():
    assert len(connected_components(discrete())) == 2
    assert len(connected_components(chain2())) == 1
    irr = {c.points for c in irreducible_closed_sets(chain2())}
    assert irr == {frozenset({"c"}), frozenset({"g", "c"})}
    assert connected_components(FiniteSpectralSpace([])) == []


def test_inclusion_reversal_orientation():
    # Balmer chain: c is the smaller prime; a Zariski chain: m contains (0)
    bal = FiniteSpectralSpace(["g", "c"], [("g", "c")])
    zar = FiniteSpectralSpace(["0", "m"], [("0", "m")], orientation="zariski")
    assert bal.contained_in("c", "g")
    assert zar.contained_in("0", "m")
    assert is_inclusion_reversing(bal, zar, {"g": "0", "c": "m"}) is None
    assert is_inclusion_reversing(bal, zar, {"g": "m", "c": "0"}) == ("c", "g")


def test_pullback_trivial_and_constant():
    s = chain2()
    trivial = Filtration(FiltrationNode(s.whole()))
    pulled = pullback_filtration(check_spectral_map(s, s, {"g": "g", "c": "c"}), trivial)
    assert [n.closed.points for n in pulled.nodes()] == [frozenset({"g", "c"})]
    target = chain_filtration([s.whole(), closure(s, ["c"])])
    const = check_spectral_map(s, s, {"g": "c", "c": "c"})
    pulled = pullback_filtration(const, target)
    assert len({n.closed.points for n in pulled.nodes()}) <= 2


def test_filtration_rejects_non_strict():
    s = chain2()
    with pytest.raises(UsageError):
        chain_filtration([s.whole(), s.whole()])


def test_dot_output_is_deterministic():
    s = chain2()
    assert space_to_dot(s) == space_to_dot(s)
    assert '"g" -> "c"' in space_to_dot(s)
    f = chain_filtration([s.whole(), closure(s, ["c"])], ["root", "fiber"])
    assert "n0 -> n1" in filtration_to_dot(f)


@st.composite
def random_posets(draw):
    n = draw(st.integers(1, 5))
    pts = [f"p{i}" for i in range(n)]
    # only i -> j with i < j keeps the relation acyclic
    pairs = draw(st.sets(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1))))
    rel = [(pts[i], pts[j]) for i, j in pairs if i < j]
    return FiniteSpectralSpace(pts, rel)


@settings(max_examples=50, deadline=None)
@given(random_posets(), st.data())
def test_closure_idempotent_monotone(space, data):
    a = data.draw(st.sets(st.sampled_from(space.points)))
    b = data.draw(st.sets(st.sampled_from(space.points)))
    ca = closure(space, a)
    assert closure(space, ca.points) == ca
    assert closure(space, a | b).points >= ca.points


@settings(max_examples=50, deadline=None)
@given(random_posets())
def test_dual_involution_and_components(space):
    assert hochster_dual(hochster_dual(space)) == space
    comps = connected_components(space)
    assert frozenset().union(*comps) == frozenset(space.points)


@settings(max_examples=30, deadline=None)
@given(random_posets(), st.data())
def test_spectral_maps_compose(space, data):
    idm = check_spectral_map(space, space, {x: x for x in space.points})
    y0 = data.draw(st.sampled_from(space.points))
    # constant maps are continuous: preimages are empty or everything
    const = check_spectral_map(space, space, {x: y0 for x in space.points})
    assert const.valid and idm.valid
    assert idm.compose(const).valid and const.compose(idm).valid
    assert idm.compose(idm).valid
