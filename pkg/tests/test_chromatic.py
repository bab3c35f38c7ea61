import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ttg.chromatic import (
    GENERIC,
    ChromaticObject,
    ChromaticSpace,
    a_ring_spectrum,
    check_localization,
    cone_of,
    descend,
    diagram_to_dot,
    localize_at,
    point_label,
    rho_object,
    rho_unit,
    support,
    unit_object,
    vn_selfmap,
)
from ttg.errors import UsageError
from ttg.spaces import filtration_to_dot


@pytest.fixture
def space():
    return ChromaticSpace((2, 3, 5), 6)


def test_points_and_order(space):
    assert len(space.points) == 1 + 3 * 6
    assert space.specializes(GENERIC, "C_{2,2}")
    assert space.specializes("C_{3,2}", "C_{3,inf}")
    assert not space.specializes("C_{3,4}", "C_{3,2}")
    assert not space.specializes("C_{2,2}", "C_{3,inf}")


def test_thomason_rule(space):
    assert not space.is_thomason(frozenset(["C_{2,inf}"]))
    assert not space.is_thomason(frozenset(["C_{2,inf}", "C_{3,inf}"]))
    assert space.is_thomason(frozenset(["C_{2,6}", "C_{2,inf}"]))
    assert space.is_thomason(frozenset(space.points))


def test_rho_unit_fibers(space):
    rho = rho_unit(space)
    assert rho.valid
    fibers = rho.fibers()
    assert fibers["(0)"] == [GENERIC]
    for p in space.primes:
        assert set(fibers[f"({p})"]) == set(space.column(p))
    assert rho_unit(space, graded=True).assignment == rho.assignment


@pytest.mark.parametrize("p", [2, 3, 5])
def test_localization_square(space, p):
    local = localize_at(space, p)
    assert set(local.points) == {GENERIC, *space.column(p)}
    assert localize_at(local, p).points == local.points
    report = check_localization(space, p)
    assert report["verdict"] == "pass"
    assert all(report["checks"].values())


def test_localize_at_missing_prime(space):
    with pytest.raises(UsageError):
        localize_at(space, 7)


def test_selfmap_degrees():
    # 2(p^n - 1)
    assert vn_selfmap(ChromaticObject(2, 3)).degree == 14
    assert vn_selfmap(ChromaticObject(3, 1)).degree == 4
    assert vn_selfmap(unit_object(5)).degree == 0
    assert vn_selfmap(ChromaticObject(2, 1), exponent=4).degree == 8


def test_selfmap_refused_above_type():
    with pytest.raises(UsageError, match="necessary condition"):
        vn_selfmap(ChromaticObject(2, 1), n=2)


def test_selfmap_below_type_is_nilpotent():
    v = vn_selfmap(ChromaticObject(2, 2), n=1)
    assert v.nilpotent
    with pytest.raises(UsageError):
        cone_of(v)


def test_moore_support_is_the_column(space):
    M = cone_of(vn_selfmap(unit_object(3)))
    assert M.type == 1
    assert set(support(space, M).points) == set(space.column(3))


@given(st.sampled_from([2, 3, 5]), st.integers(1, 4))
def test_cone_shrinks_support_by_one_point(p, t):
    space = ChromaticSpace((2, 3, 5), 6)
    X = ChromaticObject(p, t)
    Y = cone_of(vn_selfmap(X))
    assert Y.type == t + 1
    big, small = support(space, X), support(space, Y)
    assert small < big
    assert len(big.points - small.points) == 1


@pytest.mark.parametrize("steps, chain", [
    (0, [2]),
    (1, [2]),
    (3, [2, 3, 4]),
])
def test_descend_chains(space, steps, chain):
    filt = descend(space, 2, steps)
    got = filt.chain()
    assert [c for c in got] == [space.level_closure(2, n) for n in chain]
    assert len(filt.selfmaps) == steps
    assert filt.residue.labels() == ["C_{2,inf}"]
    assert not filt.residue_thomason


def test_descend_root_is_moore_support(space):
    filt = descend(space, 3, 1)
    assert filt.root.note.startswith("fiber over (3) = supp(cone(3·id))")
    assert filt.selfmaps[0].label == "3·id"


def test_descend_bounds(space):
    with pytest.raises(UsageError):
        descend(space, 2, 5)
    with pytest.raises(UsageError):
        descend(space, 7, 1)


def test_two_point_spec_ignores_exponent():
    X = ChromaticObject(2, 2)
    a = a_ring_spectrum(X, vn_selfmap(X))
    b = a_ring_spectrum(X, vn_selfmap(X, exponent=8))
    assert a == b
    assert a.space.specializes(a.generic, a.closed)


def test_rho_object(space):
    X = ChromaticObject(3, 2)
    rho = rho_object(space, X)
    assert rho.valid
    assert rho(point_label(3, 3)) == "nil"
    assert rho(point_label(3, 4)) == "√(v2)"
    assert rho(point_label(3, "inf")) == "√(v2)"
    assert set(rho.domain.points) == set(support(space, X).points)


def test_rho_object_refused_at_the_cap():
    space = ChromaticSpace((2,), 3)
    with pytest.raises(UsageError, match="level cap"):
        rho_object(space, ChromaticObject(2, 2))
    rho = rho_object(space, ChromaticObject(2, 1))
    assert rho.valid
    assert rho("C_{2,2}") == "nil"
    assert rho("C_{2,inf}") == "√(v1)"


def test_outputs_serialize(space):
    rho = rho_unit(space)
    dot = diagram_to_dot(rho)
    assert dot.startswith("digraph")
    assert '"T:(2)"' in dot
    json.dumps(rho.as_dict())
    filt = descend(space, 2, 3)
    data = json.loads(json.dumps(filt.as_dict()))
    assert data["residue"] == ["C_{2,inf}"]
    assert len(data["chain"]) == 3
    assert filtration_to_dot(filt).startswith("digraph")


def test_bad_space_arguments():
    with pytest.raises(UsageError):
        ChromaticSpace((4,), 3)
    with pytest.raises(UsageError):
        ChromaticSpace((2,), 1)
    with pytest.raises(UsageError):
        ChromaticSpace((), 3)
