import itertools
from pathlib import Path

import numpy as np
import pytest

from ttg.engine.balanced import SUBRING_CHOICES, balanced_endos, select_subring
from ttg.engine.colimit import affordable_depth, equal_in_r_phi, r_object, tower_of
from ttg.engine.compare import algebra_isomorphism, compare_comparison_maps
from ttg.engine.localize import localize_model, verify_localization
from ttg.engine.rho import (
    fiber_descent,
    koszul_preimage,
    rho_closed_set,
    rho_object,
    rho_unit,
    rho_unnatural,
    unit_action,
)
from ttg.engine.verify import PROPERTIES, VerifyContext, verify
from ttg.errors import UsageError
from ttg.models import direct_sum, identity, scalar_map, support
from ttg.models.modelfile import load_model
from ttg.rings import is_algebra_hom, parse_presentation, spec

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


# -- balanced endomorphisms --------------------------------------------------------


def test_unit_endomorphisms_are_all_balanced(poset12, f2xf2, dual_numbers):
    for mf, dim in ((poset12, 1), (f2xf2, 2), (dual_numbers, 2)):
        E = balanced_endos(mf.model.unit())
        assert E.dim(0) == dim
        assert E.is_balanced(0, E.element(0, E.unit))


def test_diagonal_balanced_endos_of_sum_of_simples(poset12):
    # Hom(S1, S2) = Hom(S2, S1) = 0 and S1 ⊗ S2 = 0: the diagonal pairs
    E = balanced_endos(poset12.object("S12"))
    assert E.dim(0) == 2
    assert E.degree_zero_algebra().is_commutative()


def test_balanced_contains_scalars(f2xf2):
    X = f2xf2.object("X")
    E = balanced_endos(X)
    for a in f2xf2.model.algebra.elements():
        f = scalar_map(E.minimal, a)
        assert E.is_balanced(0, f)


@pytest.mark.parametrize("choice", SUBRING_CHOICES)
def test_subrings_of_unit_are_everything(f2xf2, choice):
    E = balanced_endos(f2xf2.model.unit())
    assert select_subring(E, choice).dims == {0: 2}


def test_exotic_subring_inside_center(poset12, f2xf2, dual_numbers):
    cases = [(poset12, "S12"), (poset12, "C"), (f2xf2, "X"), (dual_numbers, "Kx")]
    for mf, name in cases:
        E = balanced_endos(mf.object(name), graded=True)
        center = select_subring(E, "center_cap_balanced")
        exotic = select_subring(E, "exotic")
        for k, b in exotic.basis.items():
            for i in range(b.shape[1]):
                assert center.contains(k, b[:, i]), (name, k)


def test_unknown_subring_choice(f2xf2):
    with pytest.raises(UsageError):
        select_subring(balanced_endos(f2xf2.model.unit()), "nonsense")


# -- colimit rings ---------------------------------------------------------------------


def test_unit_ring_is_endomorphism_ring(f2xf2):
    R = r_object(f2xf2.model.unit(), depth=1)
    assert R.dims == {0: 2}
    assert R.stabilized and R.exact
    assert algebra_isomorphism(R.degree_zero(), f2xf2.model.algebra) is not None


def test_sum_of_simples_ring(poset12):
    R = r_object(poset12.object("S12"), depth=2)
    assert R.stabilized
    target = parse_presentation("F2[x]/(x) x F2[x]/(x)")
    assert algebra_isomorphism(R.degree_zero(), target) is not None


def test_equal_to_itself_at_depth_zero(poset12):
    X = poset12.object("S12")
    T = tower_of(X)
    f = identity(T.level(1).obj)
    verdict = equal_in_r_phi(X, (1, 0, f), (1, 0, f), depth=2)
    assert verdict.equal and verdict.depth == 0


def test_map_equals_its_tensor_translate(f2xf2):
    X = f2xf2.object("X")
    T = tower_of(X)
    f = scalar_map(T.level(1).obj, np.array([1, 0]))
    assert equal_in_r_phi(X, (1, 0, f), (2, 0, T.step(1, 0, f)), depth=1)


def test_identity_and_zero_differ(f2xf2):
    U = f2xf2.model.unit()
    T = tower_of(U)
    M = T.level(1).obj
    verdict = equal_in_r_phi(U, (1, 0, identity(M)), (1, 0, scalar_map(M, np.array([0, 0]))), depth=2)
    assert not verdict
    assert repr(verdict) == "distinct-at-depth(2)"


def test_equality_is_monotone_in_depth(dual_numbers):
    X = dual_numbers.object("Kx")
    T = tower_of(X)
    E = T.level(1).ring(False)
    maps = E.basis_maps(0) + [scalar_map(E.minimal, a) for a in dual_numbers.model.algebra.elements()]
    for f, g in itertools.product(maps, repeat=2):
        if equal_in_r_phi(X, (1, 0, f), (1, 0, g), depth=1):
            assert equal_in_r_phi(X, (1, 0, f), (1, 0, g), depth=2)


def test_graded_ring_of_koszul_object(dual_numbers):
    R = r_object(dual_numbers.object("Kx"), depth=2, graded=True)
    assert R.stabilized
    assert R.dims[0] == 1


def test_affordable_depth_caps_large_towers(dual_numbers, f2xf2):
    assert affordable_depth(f2xf2.model.unit(), 3) == 3
    big = direct_sum(*[dual_numbers.object("Kx")] * 4)
    assert affordable_depth(big, 3) < 3


# -- comparison maps ---------------------------------------------------------------


def test_rho_unit_bijection_on_product(f2xf2):
    rho = rho_unit(f2xf2.model, depth=2)
    assert rho.valid and rho.is_bijective()


def test_rho_unit_constant_on_poset(poset12):
    rho = rho_unit(poset12.model, depth=2)
    assert rho.valid and rho.is_constant()
    assert len(rho.target.points) == 1


def test_rho_of_sum_of_simples_is_bijective(poset12):
    rho = rho_object(poset12.object("S12"), depth=2)
    assert rho.valid and rho.is_bijective()


def test_graded_and_ungraded_unit_maps(dual_numbers):
    a = rho_unit(dual_numbers.model, depth=2)
    b = rho_unit(dual_numbers.model, depth=2, graded=True)
    assert a.is_constant() and b.is_constant()
    assert a.assignment.keys() == b.assignment.keys()


def test_rho_unnatural_with_unit_scalars(dual_numbers, poset12):
    X = dual_numbers.object("Kx")
    A, alpha = unit_action(X)
    rho = rho_unnatural(X, A, alpha)
    assert rho.valid and rho.is_constant()
    S1 = poset12.object("S1")
    A, alpha = unit_action(S1)
    rho = rho_unnatural(S1, A, alpha)
    assert list(rho.domain.points) == ["x1"]


def test_rho_unnatural_rejects_non_homomorphism(f2xf2):
    U = f2xf2.model.unit()
    A, alpha = unit_action(U)
    with pytest.raises(UsageError):
        rho_unnatural(U, A, [alpha[0], alpha[0]])


def test_closed_set_map_of_whole_space(f2xf2, poset12):
    for mf in (f2xf2, poset12):
        m = mf.model
        a = rho_closed_set(m.space.whole(), [m.unit()], depth=2)
        b = rho_unit(m, depth=2)
        assert a.meta["approximation"] == "generator-approximation"
        assert a.assignment == b.assignment


def test_closed_set_generator_must_cover(poset12):
    m = poset12.model
    with pytest.raises(UsageError):
        rho_closed_set(m.space.closed(["x1"]), [poset12.object("S2")], depth=2)


def test_koszul_preimage_for_every_element(f2xf2):
    rho = rho_unit(f2xf2.model, depth=2)
    for a in rho.algebra.elements():
        res = koszul_preimage(rho, [a])
        assert res.agree
    assert koszul_preimage(rho, []).preimage == frozenset(rho.domain.points)
    assert koszul_preimage(rho, [rho.algebra.one()]).preimage == frozenset()


def test_koszul_preimage_of_idempotent(f2xf2):
    # V(e) is the prime containing e, whose preimage is supp(cone(e))
    rho = rho_unit(f2xf2.model, depth=2)
    e = np.array([1, 0])
    res = koszul_preimage(rho, [e])
    assert len(res.preimage) == 1
    primes = [q.label for q in spec(rho.algebra)[1] if q.contains(e)]
    assert res.v == frozenset(primes)


def test_fiber_descent_splits_product(f2xf2):
    filt = fiber_descent(f2xf2.model.unit(), depth=2)
    assert len(filt.root.closed) == 2
    leaves = sorted(tuple(c.closed.labels()) for c in filt.root.children)
    assert [len(x) for x in leaves] == [1, 1]


def test_fiber_descent_on_local_ring(dual_numbers):
    filt = fiber_descent(dual_numbers.model.unit(), depth=2)
    assert filt.root.children == []


def test_compare_comparison_maps_of_isomorphic_objects(f2xf2):
    X = f2xf2.object("X")
    a = rho_object(X, depth=2)
    b = rho_object(direct_sum(X, X), depth=2)
    ok, witness = compare_comparison_maps(a, b)
    assert ok, witness


# -- algebra isomorphisms ------------------------------------------------------------


def test_algebra_isomorphism_between_presentations():
    A = parse_presentation("F2[x]/(x^2+x)")
    B = parse_presentation("F2[x]/(x) x F2[x]/(x)")
    M = algebra_isomorphism(A, B)
    assert M is not None and is_algebra_hom(A, B, M)


def test_algebra_isomorphism_refuses_non_isomorphic():
    assert algebra_isomorphism(parse_presentation("F3[x]/(x^2)"), parse_presentation("F3[x]/(x^2+2)")) is None
    assert algebra_isomorphism(parse_presentation("F2[x]/(x)"), parse_presentation("F2[x]/(x^2)")) is None


def test_algebra_isomorphism_of_local_rings():
    # x^2 + 1 = (x + 1)^2 over F_2
    A = parse_presentation("F2[x]/(x^2)")
    B = parse_presentation("F2[x]/(x^2+1)")
    M = algebra_isomorphism(A, B)
    assert M is not None and is_algebra_hom(A, B, M)


# -- localization --------------------------------------------------------------------


def test_localize_product_at_idempotent(f2xf2):
    report = verify_localization(f2xf2.model, [np.array([1, 0])], depth=2)
    assert report["verdict"] == "pass", report
    assert report["rings"] == {"R": 2, "S^-1 R": 1, "R'": 1}
    assert report["checks"]["cartesian"]


def test_localize_at_one_is_identity(f2xf2):
    loc = localize_model(f2xf2.model, [np.array([1, 1])])
    assert loc.model.algebra.dim == 2
    assert verify_localization(f2xf2.model, [np.array([1, 1])], depth=2)["verdict"] == "pass"


def test_localize_at_unit_of_local_ring(dual_numbers):
    report = verify_localization(dual_numbers.model, [np.array([1, 1])], depth=2)
    assert report["verdict"] == "pass"


def test_localize_at_nilpotent_is_refused(dual_numbers):
    with pytest.raises(UsageError):
        localize_model(dual_numbers.model, [np.array([0, 1])])


def test_poset_restriction(poset12):
    loc = localize_model(poset12.model, ["2"])
    assert loc.kept_points() == {"x1"}
    report = verify_localization(poset12.model, ["2"], depth=2, samples=[poset12.object("S1")])
    assert report["verdict"] == "pass"


# -- verify ----------------------------------------------------------------------------


def test_registered_properties():
    assert set(PROPERTIES) == {
        "killscone", "local_E", "twisting", "functorial_E", "naturality", "xky", "dual_inv",
        "sum_inv", "dense", "proper", "connected_fwd", "connected_rigid", "constant", "inclusion_rev",
    }


def test_unknown_property(poset12):
    with pytest.raises(UsageError):
        verify(poset12.model, "nope")


def test_connected_rigid_fails_on_poset_as_expected(poset12):
    report = verify(poset12.model, "connected_rigid", depth=2)
    assert report.verdict == "expected-failure"
    assert report.witness["spec"] == ["p1"]
    assert report.witness["Z_components"] == [["x1"], ["x2"]]


def test_dense_on_product(f2xf2):
    ctx = VerifyContext(f2xf2.model, {"Ce": f2xf2.object("Ce")}, depth=2)
    assert verify(f2xf2.model, "dense", ctx=ctx).verdict == "pass"


def test_killscone_on_poset(poset12):
    samples = {n: poset12.object(n) for n in ("S1", "S12")}
    assert verify(poset12.model, "killscone", samples, depth=2).verdict == "pass"


def test_dual_inv_not_applicable_on_poset(poset12):
    assert verify(poset12.model, "dual_inv", depth=2).verdict == "not-applicable"


def test_supports_of_koszul_objects(f2xf2):
    assert support(f2xf2.object("K")) == []
