"""Comparison maps ``ρ: Z -> Spec(R)`` and the constructions built on them.

A point ``q`` is sent to the prime ``{a | cone(a) is not acyclic at q}``.
That set is found through the primitive idempotents: exactly one of them
acts invertibly at q, and the prime is the one not containing it.  The
answer is then cross-checked element by element (all elements when the
ring is small, a seeded sample otherwise).
"""

from __future__ import annotations

import itertools
from typing import Callable, Optional

import numpy as np

from ..errors import ConsistencyError, PropertyFailure, UsageError
from ..models import ChainMap, Complex, cone, direct_sum, hom_space, is_acyclic_at, minimize, support, tensor
from ..rings import FinCommAlgebra, GradedAlgebra, spec, v_ideal
from ..spaces import (
    ClosedSet,
    FiltrationNode,
    Filtration,
    FiniteSpectralSpace,
    check_spectral_map,
    is_inclusion_reversing,
)
from .balanced import BalancedEndoRing
from .colimit import DEFAULT_DEPTH, ColimitRing, affordable_depth, r_object

# rings with at most this many elements are cross-checked exhaustively
EXHAUSTIVE_LIMIT = 729
SAMPLE_COUNT = 32
# seed of the random elements used by the cross-check; the CLI sets it from --seed
SAMPLE_SEED = 0


def subspace(space: FiniteSpectralSpace, pts) -> FiniteSpectralSpace:
    """The subspace on ``pts`` with the induced specialization order."""
    pts = space.sort(pts)
    pairs = [(x, y) for x in pts for y in pts if x != y and space.specializes(x, y)]
    return FiniteSpectralSpace(pts, pairs, space.orientation, name=space.name)


def support_set(X: Complex) -> frozenset:
    return frozenset(support(X))


def cone_support(f: ChainMap) -> frozenset:
    return support_set(cone(f))


class ComparisonMap:
    """A validated comparison map from a closed set of Spc to Spec of a ring.

    Attributes:
        domain: the subspace of Spc carrying the map.
        target: ``Spec`` of the ring (``Spech`` for graded rings, which
            has the same points).
        assignment: point name -> prime label.
        primes: the ring's primes, in the order of ``target.points``.
        spectral: result of ``check_spectral_map``.
        reversal_witness: violating pair or None.
        meta: provenance (object, depth, graded, stabilized, approximation).
    """

    def __init__(self, domain, algebra: FinCommAlgebra, assignment: dict, meta: dict):
        self.domain = domain
        self.algebra = algebra
        self.target, self.primes = spec(algebra)
        self.assignment = dict(assignment)
        self.meta = dict(meta)
        self.spectral = check_spectral_map(domain, self.target, self.assignment)
        self.reversal_witness = is_inclusion_reversing(domain, self.target, self.assignment)

    def __call__(self, point):
        return self.assignment[point]

    @property
    def valid(self) -> bool:
        return bool(self.spectral) and self.reversal_witness is None

    def prime(self, label):
        for q in self.primes:
            if q.label == label:
                return q
        raise UsageError(f"no prime {label!r}")

    def preimage(self, labels) -> frozenset:
        labels = set(labels)
        return frozenset(x for x, y in self.assignment.items() if y in labels)

    def image(self) -> frozenset:
        return frozenset(self.assignment.values())

    def fibers(self) -> dict:
        return {y: self.domain.sort(self.preimage({y})) for y in self.target.points}

    def is_constant(self) -> bool:
        return len(self.image()) <= 1

    def is_bijective(self) -> bool:
        return len(self.image()) == len(self.target.points) == len(self.domain.points)

    def as_dict(self) -> dict:
        return {
            "domain": [str(x) for x in self.domain.points],
            "target": [str(y) for y in self.target.points],
            "assignment": {str(x): str(self.assignment[x]) for x in self.domain.points},
            "spectral": bool(self.spectral),
            "inclusion_reversing": self.reversal_witness is None,
            **{k: v for k, v in self.meta.items()},
        }

    def __repr__(self):
        body = ", ".join(f"{x}->{self.assignment[x]}" for x in self.domain.points)
        return f"ComparisonMap({body})"


def _ring_elements(alg: FinCommAlgebra, extra=()) -> list[np.ndarray]:
    """All elements of a small ring, else basis, extra vectors and a seeded sample."""
    p, n = alg.p, alg.dim
    if p**n <= EXHAUSTIVE_LIMIT:
        return [np.array(v, dtype=np.int64) for v in itertools.product(range(p), repeat=n)]
    rng = np.random.default_rng(SAMPLE_SEED)
    out = [np.eye(n, dtype=np.int64)[i] for i in range(n)] + [np.asarray(v) for v in extra]
    out += [rng.integers(0, p, size=n) for _ in range(SAMPLE_COUNT)]
    return out


def assign_primes(alg: FinCommAlgebra, rep: Callable, points, model) -> dict:
    """Send each point to the prime ``{a | cone(rep(a)) not acyclic there}``.

    ``rep(a)`` is an endomorphism representing the ring element ``a``.
    Raises ConsistencyError if the set is not one of the listed primes.
    """
    _, primes = spec(alg)
    out = {}
    if not primes:
        if points:
            raise ConsistencyError("zero ring with a nonempty domain")
        return out
    idem_cones = [cone(rep(q.idempotent)) for q in primes]
    elements = _ring_elements(alg, [q.idempotent for q in primes])
    elem_cones = [cone(rep(a)) for a in elements]
    for x in points:
        qi = model.point_index(x)
        hits = [q for q, C in zip(primes, idem_cones) if is_acyclic_at(C, qi)]
        if len(hits) != 1:
            raise ConsistencyError(f"point {x}: {len(hits)} primitive idempotents act invertibly")
        prime = hits[0]
        for a, C in zip(elements, elem_cones):
            in_rho = not is_acyclic_at(C, qi)
            if in_rho != prime.contains(a):
                raise ConsistencyError(
                    f"point {x}: the computed set is not a listed prime (element {a.tolist()})"
                )
        out[x] = prime.label
    return out


def _check_nonzero_degrees(ring, points, model):
    """Homogeneous elements of nonzero degree lie in every ``ρ^•(q)``."""
    for k in getattr(ring, "dims", {}):
        if k == 0:
            continue
        for f in ring.basis_maps(k):
            C = cone(f)
            for x in points:
                if is_acyclic_at(C, model.point_index(x)):
                    raise ConsistencyError(f"a degree-{k} class is invertible at {x}")


# -- unnatural maps --------------------------------------------------------------


def rho_unnatural(X: Complex, A: FinCommAlgebra, alpha: list, label: str = "") -> ComparisonMap:
    """``ρ_{X,A}`` for a ring homomorphism ``α: A -> E_X``.

    ``alpha`` lists the images of A's basis vectors as endomorphisms of X.
    The homomorphism property and the landing in ``E_X`` are checked.
    """
    m = X.model
    if len(alpha) != A.dim:
        raise UsageError("alpha must give one endomorphism per basis vector of A")
    hs = hom_space(X, X)
    E = BalancedEndoRing(X)

    def image(a) -> ChainMap:
        a = A.vec(a)
        out = ChainMap(X, X, {})
        for i, ai in enumerate(a):
            if int(ai) % A.p:
                out = out + alpha[i].scale(int(ai))
        return out

    from ..models import identity

    if not hs.is_null(image(A.one()) - identity(X)):
        raise UsageError("alpha does not preserve the identity")
    for i, j in itertools.product(range(A.dim), repeat=2):
        lhs = image(A.mul(A.basis()[i], A.basis()[j]))
        if not hs.is_null(lhs - alpha[i] @ alpha[j]):
            raise UsageError(f"alpha is not multiplicative on basis pair ({i}, {j})")
    for f in alpha:
        if not E.is_balanced(0, E.from_object(0, f)):
            raise UsageError("alpha does not land in the balanced endomorphisms")
    pts = m.space.sort(support(X))
    assignment = assign_primes(A, image, pts, m)
    meta = {"kind": "unnatural", "object": label or X.name or "X"}
    return ComparisonMap(subspace(m.space, pts), A, assignment, meta)


def unit_action(X: Complex) -> tuple[FinCommAlgebra, list]:
    """``End(𝟙)`` acting on X by scalars, as ``(A, alpha)``."""
    from ..models import scalar_map

    A = X.model.unit_endomorphism_algebra()
    return A, [scalar_map(X, b) for b in A.basis()]


# -- natural maps -------------------------------------------------------------


def rho_from_ring(R: ColimitRing, domain_pts=None, approximation: str = "") -> ComparisonMap:
    m = R.model
    if R.algebra is None:
        raise UsageError(f"R_{R.label} is not commutative at depth {R.depth}; increase the depth")
    alg = R.degree_zero()
    pts = m.space.sort(support(R.obj) if domain_pts is None else domain_pts)
    assignment = assign_primes(alg, lambda a: R.element_map(0, a), pts, m)
    if R.graded:
        _check_nonzero_degrees(R, pts, m)
    meta = {
        "kind": "object",
        "object": R.label,
        "depth": R.depth,
        "graded": R.graded,
        "stabilized": bool(R.stabilized),
        "exact": bool(R.exact),
    }
    if approximation:
        meta["approximation"] = approximation
    cmap = ComparisonMap(subspace(m.space, pts), alg, assignment, meta)
    cmap.ring = R
    return cmap


def rho_object(X: Complex, depth: int = DEFAULT_DEPTH, graded: bool = False, label: str = "") -> ComparisonMap:
    """``ρ_X : supp(X) -> Spec(R_X)`` (``Spech(R_X^•)`` when graded)."""
    return rho_from_ring(r_object(X, depth=depth, graded=graded, label=label))


def rho_unit(model, depth: int = DEFAULT_DEPTH, graded: bool = False) -> ComparisonMap:
    return rho_object(model.unit(), depth=depth, graded=graded, label="𝟙")


def default_generator(model, Z) -> Complex:
    """An object whose support is exactly the closed set Z."""
    pts = set(Z)
    if model.kind == "algebra":
        labels = [i for i, x in enumerate(model.points) if x in pts]
        return Complex(model, {0: labels} if labels else {}, {}, f"𝟙_{{{','.join(sorted(pts))}}}")
    parts = [model.simple(model.poset.elements[model.point_index(x)]) for x in model.space.sort(pts)]
    if not parts:
        return Complex(model, {}, {}, "0")
    return direct_sum(*parts, name=f"S_{{{','.join(model.space.sort(pts))}}}") if len(parts) > 1 else parts[0]


def rho_closed_set(Z, generators=None, depth: int = DEFAULT_DEPTH, graded: bool = False) -> ComparisonMap:
    """``ρ_Z`` with Φ replaced by the ⊗-closure of a finite generator list.

    Every generator must satisfy ``supp(g) ⊇ Z``.  The ring of the
    ⊗-closure of ``g_1, ..., g_n`` is computed as ``R_W`` for
    ``W = g_1 ⊗ ... ⊗ g_n``, whose tensor powers are cofinal in it.
    """
    space = Z.space
    pts = frozenset(Z)
    model = _model_of(Z, generators)
    if generators is None:
        generators = [default_generator(model, pts)]
    if not generators:
        raise UsageError("at least one generator is required")
    for g in generators:
        if not pts <= support_set(g):
            raise UsageError(f"generator {g.name or '?'} has support not containing {sorted(pts)}")
    W = generators[0]
    for g in generators[1:]:
        W = minimize(tensor(W, g)).small
    domain = frozenset.intersection(*[support_set(g) for g in generators])
    label = "⊗".join(g.name or "?" for g in generators)
    R = r_object(W, depth=depth, graded=graded, label=label)
    cmap = rho_from_ring(R, domain, approximation="generator-approximation")
    cmap.meta["kind"] = "closed-set"
    cmap.meta["closed_set"] = space.sort(pts)
    cmap.meta["generators"] = [g.name or "?" for g in generators]
    return cmap


def _model_of(Z, generators):
    model = getattr(Z, "model", None)
    if model is not None:
        return model
    if generators:
        return generators[0].model
    raise UsageError("cannot tell the model of the closed set; pass generators")


# -- Koszul objects and descent ---------------------------------------------------


class KoszulResult:
    def __init__(self, preimage: frozenset, koszul: Complex, vset: frozenset, support: frozenset):
        self.preimage = preimage
        self.koszul = koszul
        self.v = vset
        self.support = support

    @property
    def agree(self) -> bool:
        return self.preimage == self.support

    def as_dict(self) -> dict:
        return {
            "V": sorted(map(str, self.v)),
            "preimage": sorted(map(str, self.preimage)),
            "koszul_support": sorted(map(str, self.support)),
            "agree": self.agree,
        }


def koszul_object(X: Complex, maps: list) -> Complex:
    """``X ⊗ cone(f_1) ⊗ ... ⊗ cone(f_n)``, minimized along the way."""
    out = minimize(X).small
    for f in maps:
        out = minimize(tensor(out, minimize(cone(f)).small)).small
    return out.renamed(f"K({X.name or 'X'};{len(maps)})")


def koszul_preimage(cmap: ComparisonMap, classes: list) -> KoszulResult:
    """``ρ^{-1}(V(f_1, ..., f_n))`` next to ``supp(X ⊗ cone(f_1) ⊗ ...)``.

    ``cmap`` must come from ``rho_object``; ``classes`` are coordinate
    vectors of degree-0 elements of its ring.  A mismatch raises
    PropertyFailure carrying the report.
    """
    R = getattr(cmap, "ring", None)
    if R is None:
        raise UsageError("koszul_preimage needs a comparison map built from a colimit ring")
    alg = cmap.algebra
    classes = [alg.vec(c) for c in classes]
    vset = frozenset(v_ideal(alg, classes)) if classes else frozenset(cmap.target.points)
    pre = cmap.preimage(vset)
    K = koszul_object(R.obj, [R.element_map(0, c) for c in classes])
    res = KoszulResult(pre, K, vset, support_set(K))
    if not res.agree:
        raise PropertyFailure("Koszul preimage differs from the support of the Koszul object", res.as_dict())
    return res


def maximal_ideal_generators(alg: FinCommAlgebra, prime) -> list[np.ndarray]:
    """A basis of the prime (maximal, the ring being artinian)."""
    from ..linalg import kernel_array

    chi = np.asarray(prime.character, dtype=np.int64).reshape(1, -1)
    ker = kernel_array(chi, alg.p)
    return [ker[:, i] for i in range(ker.shape[1])]


def fiber_descent(X: Complex, depth: int = 2, max_steps: int = 3) -> Filtration:
    """Iterate: ring of X_k, closed points of its spectrum, Koszul pullbacks.

    Each node records the ring it came from; children are the supports of
    the Koszul objects attached to the maximal ideals, kept only when they
    shrink strictly.
    """
    m = X.model
    root_pts = frozenset(support(X))

    def node_for(Xk: Complex, pts: frozenset, step: int, note: str) -> FiltrationNode:
        node = FiltrationNode(ClosedSet(m.space, pts), note)
        if step >= max_steps or not pts:
            return node
        d = affordable_depth(Xk, depth)
        if d == 0:
            node.note = (note + "; " if note else "") + "ring too large to compute"
            return node
        cmap = rho_object(Xk, depth=d, label=Xk.name)
        R = cmap.ring
        flag = "" if R.stabilized else ", not stabilized"
        node.note = (note + "; " if note else "") + f"R dims {R.dims} at depth {d}{flag}"
        for prime in cmap.primes:
            gens = maximal_ideal_generators(cmap.algebra, prime)
            res = koszul_preimage(cmap, gens)
            if res.support < pts:
                child_note = f"step {step + 1}: V({prime.label}), {len(gens)} generator(s)"
                node.children.append(node_for(res.koszul, res.support, step + 1, child_note))
        return node

    return Filtration(node_for(X, root_pts, 0, "start"))
