"""Symbolic model of the spectrum of finite spectra and its chromatic filtration.

Nothing here computes Morava K-theory.  Objects carry their prime and
type as data, v_n-selfmaps are formal with their exponent defaulting to the
minimal value 1, and radicals stand in for "some power of f equals some
power of g".  The point is to exercise comparison maps on a spectrum with
a nontrivial specialization order.

Points are labelled ``SH_tor`` (the generic point), ``C_{p,n}`` for
``2 <= n <= levels`` and ``C_{p,inf}``.  Closure goes downward: the closure
of ``C_{p,n}`` is ``{C_{p,m} : m >= n}`` together with ``C_{p,inf}``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .errors import UsageError
from .spaces import (
    BALMER,
    ZARISKI,
    ClosedSet,
    Filtration,
    FiniteSpectralSpace,
    chain_filtration,
    check_spectral_map,
    closure,
    is_inclusion_reversing,
    map_to_dot,
)

DEFAULT_PRIMES = (2, 3, 5)
DEFAULT_LEVELS = 6
GENERIC = "SH_tor"
INF = "inf"


def point_label(p: int, n) -> str:
    return f"C_{{{p},{n}}}"


def _parse_point(label: str) -> Optional[tuple]:
    """``(p, n)`` for a ``C_{p,n}`` label (``n`` may be ``"inf"``), else None."""
    if not label.startswith("C_{") or not label.endswith("}"):
        return None
    p, n = label[3:-1].split(",")
    return int(p), (n if n == INF else int(n))


def _is_prime(p: int) -> bool:
    return p >= 2 and all(p % d for d in range(2, int(p**0.5) + 1))


class _ChromaticOrder(FiniteSpectralSpace):
    """Finite spaces of chromatic points, with the chromatic Thomason rule.

    A closed set is Thomason unless it contains some ``C_{p,inf}`` but no
    other point of that column and not the generic point: ``{C_{p,inf}}``
    is the support of no finite spectrum.
    """

    def is_thomason(self, pts: frozenset) -> bool:
        pts = frozenset(pts)
        if GENERIC in pts:
            return True
        for x in pts:
            parsed = _parse_point(x)
            if parsed and parsed[1] == INF:
                p = parsed[0]
                if not any(_parse_point(y) and _parse_point(y)[0] == p and _parse_point(y)[1] != INF for y in pts):
                    return False
        return True

    def subspace(self, pts: Iterable) -> "_ChromaticOrder":
        pts = self.check_points(pts)
        keep = [x for x in self.points if x in pts]
        pairs = [(x, y) for x in keep for y in keep if x != y and self.specializes(x, y)]
        return _ChromaticOrder(keep, pairs, BALMER, name=self.name)


class ChromaticSpace(_ChromaticOrder):
    """``Spc`` of finite spectra (or finite p-local spectra), cut at a level cap.

    Args:
        primes: the primes shown, each contributing one column.
        levels: the cap N; finite points ``C_{p,n}`` for ``2 <= n <= N``.
        local_at: set when the space is the p-local one (a single column).
    """

    def __init__(self, primes: Iterable[int] = DEFAULT_PRIMES, levels: int = DEFAULT_LEVELS, local_at: Optional[int] = None):
        primes = tuple(sorted(set(int(p) for p in primes)))
        if not primes:
            raise UsageError("at least one prime is required")
        bad = [p for p in primes if not _is_prime(p)]
        if bad:
            raise UsageError(f"not prime: {bad}")
        if levels < 2:
            raise UsageError("the level cap must be at least 2")
        self.primes = primes
        self.levels = int(levels)
        self.local_at = local_at
        points = [GENERIC]
        pairs = []
        for p in primes:
            col = [point_label(p, n) for n in range(2, levels + 1)] + [point_label(p, INF)]
            points += col
            pairs.append((GENERIC, col[0]))
            pairs += list(zip(col, col[1:]))
        name = f"Spc(SH^fin_({local_at}))" if local_at else "Spc(SH^fin)"
        super().__init__(points, pairs, BALMER, name=name)

    def column(self, p: int) -> list[str]:
        self._check_prime(p)
        return [point_label(p, n) for n in range(2, self.levels + 1)] + [point_label(p, INF)]

    def infinite_points(self) -> list[str]:
        return [point_label(p, INF) for p in self.primes]

    def level_closure(self, p: int, n: int) -> ClosedSet:
        """``closure{C_{p,n}}``; level 1 is the generic point."""
        self._check_prime(p)
        if n <= 1:
            return self.whole()
        if n > self.levels:
            raise UsageError(f"level {n} is beyond the cap {self.levels}")
        return closure(self, [point_label(p, n)])

    def _check_prime(self, p: int):
        if p not in self.primes:
            raise UsageError(f"prime {p} is not among {list(self.primes)}")

    def as_dict(self) -> dict:
        out = super().as_dict()
        out.update(primes=list(self.primes), levels=self.levels, non_thomason=self.infinite_points())
        if self.local_at:
            out["local_at"] = self.local_at
        return out


def spec_z(primes: Iterable[int], local_at: Optional[int] = None) -> FiniteSpectralSpace:
    """``Spec(Z)`` restricted to the listed primes, or ``Spec(Z_(p))``."""
    primes = tuple(primes)
    pts = ["(0)"] + [f"({p})" for p in primes]
    name = f"Spec(Z_({local_at}))" if local_at else "Spec(Z)"
    return FiniteSpectralSpace(pts, [("(0)", f"({p})") for p in primes], ZARISKI, name=name)


class SymbolicComparisonMap:
    """A comparison map between symbolic spaces, validated like the computed ones."""

    def __init__(self, domain, target, assignment: dict, meta: dict):
        self.domain = domain
        self.target = target
        self.assignment = dict(assignment)
        self.meta = dict(meta)
        self.spectral = check_spectral_map(domain, target, self.assignment)
        self.reversal_witness = is_inclusion_reversing(domain, target, self.assignment)

    def __call__(self, x):
        return self.assignment[x]

    @property
    def valid(self) -> bool:
        return bool(self.spectral) and self.reversal_witness is None

    def preimage(self, labels) -> frozenset:
        labels = set(labels)
        return frozenset(x for x, y in self.assignment.items() if y in labels)

    def fibers(self) -> dict:
        return {y: self.domain.sort(self.preimage({y})) for y in self.target.points}

    def as_dict(self) -> dict:
        return {
            "domain": list(self.domain.points),
            "target": list(self.target.points),
            "assignment": {x: self.assignment[x] for x in self.domain.points},
            "fibers": {y: list(v) for y, v in self.fibers().items()},
            "spectral": bool(self.spectral),
            "inclusion_reversing": self.reversal_witness is None,
            **self.meta,
        }


def rho_unit(space: ChromaticSpace, graded: bool = False) -> SymbolicComparisonMap:
    """``Spc -> Spec(Z)``: ``SH_tor -> (0)`` and each ``C_{p,n} -> (p)``.

    Positive-degree graded endomorphisms of the unit are nilpotent, so the
    graded map has the same points and the same assignment.
    """
    target = spec_z(space.primes, space.local_at)
    assignment = {GENERIC: "(0)"}
    for p in space.primes:
        for x in space.column(p):
            assignment[x] = f"({p})"
    meta = {"kind": "unit", "object": "𝟙", "graded": graded, "graded_equals_ungraded": True}
    return SymbolicComparisonMap(space, target, assignment, meta)


def localize_at(space: ChromaticSpace, p: int) -> ChromaticSpace:
    """The p-local space: one column and the generic point.  Idempotent."""
    if p not in space.primes:
        raise UsageError(f"cannot localize at {p}: not among the primes {list(space.primes)}")
    return ChromaticSpace((p,), space.levels, local_at=p)


def check_localization(space: ChromaticSpace, p: int) -> dict:
    """The square ``Spc_(p) -> Spc`` over ``Spec Z_(p) -> Spec Z``.

    Cartesian means the image of the local space is exactly the set of
    points whose prime avoids ``Z \\ (p)``, i.e. lies in ``{(0), (p)}``.
    """
    local = localize_at(space, p)
    rho, rho_p = rho_unit(space), rho_unit(local)
    image = set(local.points)
    allowed = rho.preimage({"(0)", f"({p})"})
    commutes = all(rho(x) == rho_p(x) for x in local.points)
    checks = {
        "spc_inclusion": image <= set(space.points),
        "cartesian": image == set(allowed),
        "square_commutes": commutes,
        "maps_valid": rho.valid and rho_p.valid,
    }
    return {
        "prime": p,
        "local_points": list(local.points),
        "checks": checks,
        "verdict": "pass" if all(checks.values()) else "fail",
    }


@dataclass(frozen=True)
class ChromaticObject:
    """A finite p-local spectrum known only through its prime and type."""

    p: int
    type: int
    label: str = ""

    def __post_init__(self):
        if self.type < 0:
            raise UsageError("the type must be nonnegative")

    def __str__(self):
        return self.label or f"X(p={self.p}, type={self.type})"


def unit_object(p: int) -> ChromaticObject:
    return ChromaticObject(p, 0, "𝟙")


@dataclass(frozen=True)
class VnSelfMap:
    """A formal v_n-selfmap ``Σ^d X -> X`` with exponent s (degree ``s·2(p^n-1)``)."""

    owner: ChromaticObject
    n: int
    exponent: int = 1
    nilpotent: bool = False
    balanced: bool = True

    @property
    def degree(self) -> int:
        return self.exponent * 2 * (self.owner.p**self.n - 1)

    @property
    def label(self) -> str:
        if self.n == 0 and self.exponent == 1:
            return f"{self.owner.p}·id"
        power = "" if self.exponent == 1 else f"^{self.exponent}"
        return f"v{self.n}{power}"

    @property
    def radical(self) -> str:
        """The closed point ``√(f)``; exponents do not change it."""
        return f"√(v{self.n})"

    def as_dict(self) -> dict:
        return {
            "object": str(self.owner),
            "p": self.owner.p,
            "n": self.n,
            "exponent": self.exponent,
            "degree": self.degree,
            "nilpotent": self.nilpotent,
            "balanced": self.balanced,
        }


def vn_selfmap(X: ChromaticObject, n: Optional[int] = None, exponent: int = 1) -> VnSelfMap:
    """A v_n-selfmap of X; ``n`` defaults to the type of X.

    X admits one exactly when its type is at least n.  Below the type the
    map is nilpotent in every Morava K-theory and is flagged as such.
    """
    n = X.type if n is None else n
    if n < 0:
        raise UsageError("n must be nonnegative")
    if exponent < 1:
        raise UsageError("the exponent must be at least 1")
    if n > X.type:
        raise UsageError(
            f"{X} has type {X.type}: a v_{n}-selfmap needs the object to lie in C_{n}, "
            f"which is a necessary condition"
        )
    return VnSelfMap(X, n, exponent, nilpotent=n < X.type)


def cone_of(v: VnSelfMap) -> ChromaticObject:
    """The cone of a non-nilpotent v_n-selfmap has type n + 1."""
    if v.nilpotent:
        raise UsageError("the cone of a nilpotent selfmap does not lower the support")
    X = v.owner
    return ChromaticObject(X.p, X.type + 1, f"cone({v.label} on {X})")


def support(space: ChromaticSpace, X: ChromaticObject) -> ClosedSet:
    """``supp(X) = closure{C_{p, type+1}}``; type 0 is supported everywhere."""
    return space.level_closure(X.p, X.type + 1)


@dataclass(frozen=True)
class TwoPointSpec:
    """``Spech(A_X^•)``: the homogeneous nilpotents specializing to ``√(f)``."""

    generic: str
    closed: str

    @property
    def space(self) -> FiniteSpectralSpace:
        return FiniteSpectralSpace([self.generic, self.closed], [(self.generic, self.closed)], ZARISKI, name="Spech(A_X)")

    def as_dict(self) -> dict:
        return {"points": [self.generic, self.closed], "specializations": [[self.generic, self.closed]]}


def a_ring_spectrum(X: ChromaticObject, selfmap: Optional[VnSelfMap] = None) -> TwoPointSpec:
    """The two-point spectrum of the graded central balanced endomorphisms of X."""
    if X.type < 1:
        raise UsageError("the two-point description needs an object of type at least 1")
    v = selfmap or vn_selfmap(X)
    if v.owner != X or v.nilpotent:
        raise UsageError("the selfmap must be a non-nilpotent v_n-selfmap of X")
    return TwoPointSpec("nil", v.radical)


def rho_object(space: ChromaticSpace, X: ChromaticObject, selfmap: Optional[VnSelfMap] = None) -> SymbolicComparisonMap:
    """``ρ_{X,A_X^•} : supp(X) -> Spech(A_X^•)``.

    A point lies over ``√(f)`` exactly when ``cone(f)`` is supported there,
    so ``closure{C_{n+2}}`` goes to the closed point and ``C_{n+1}`` to
    the generic one.  The degree-0 part of ``A_X^•`` is local, so the
    ungraded map is constant.
    """
    spec2 = a_ring_spectrum(X, selfmap)
    v = selfmap or vn_selfmap(X)
    if X.type + 2 > space.levels:
        # the cone's support would be {C_{p,inf}} alone, which is not Thomason
        raise UsageError(f"type {X.type} needs a level cap of at least {X.type + 2}")
    domain_set = support(space, X)
    deeper = support(space, cone_of(v))
    domain = space.subspace(domain_set.points)
    assignment = {x: (spec2.closed if x in deeper else spec2.generic) for x in domain.points}
    meta = {"kind": "object", "object": str(X), "graded": True, "selfmap": v.as_dict(), "degree_zero_local": True}
    return SymbolicComparisonMap(domain, spec2.space, assignment, meta)


class ChromaticFiltration(Filtration):
    """The chain of supports, with the residue the chain never reaches."""

    def __init__(self, root, selfmaps: list, residue: ClosedSet):
        super().__init__(root)
        self.selfmaps = selfmaps
        self.residue = residue

    @property
    def residue_thomason(self) -> bool:
        return self.residue.space.is_thomason(self.residue.points)

    def as_dict(self) -> dict:
        out = super().as_dict()
        return {
            "chain": [c.labels() for c in self.chain()],
            "tree": out,
            "selfmaps": [v.as_dict() for v in self.selfmaps],
            "residue": self.residue.labels(),
            "residue_thomason": self.residue_thomason,
        }


def descend(space: ChromaticSpace, p: int, steps: int) -> ChromaticFiltration:
    """``closure{C_{p,2}} ⊃ closure{C_{p,3}} ⊃ ...`` built from ``steps`` selfmaps.

    The root is the fiber of ``ρ_𝟙`` over ``(p)``.  The first selfmap is
    ``p·id`` on the unit, whose cone has exactly that support; each later
    one is a v_k-selfmap on the current type-k object and its cone removes
    the point ``C_{p,k+1}``.  So ``steps`` selfmaps give ``max(steps, 1)``
    nodes.  The closed point ``C_{p,inf}`` is never reached.
    """
    space._check_prime(p)
    if steps < 0 or steps > space.levels - 2:
        raise UsageError(f"steps must lie between 0 and {space.levels - 2} for level cap {space.levels}")
    sets = [ClosedSet(space, rho_unit(space).preimage({f"({p})"}))]
    notes = [f"fiber over ({p})"]
    maps = []
    X = unit_object(p)
    for k in range(steps):
        v = vn_selfmap(X)
        X = cone_of(v)
        maps.append(v)
        note = f"supp(cone({v.label})), degree {v.degree}"
        if k == 0:
            # the Moore object generates the fiber itself
            if support(space, X) != sets[0]:
                raise UsageError("the Moore object does not generate the fiber")
            notes[0] += f" = {note}"
            continue
        sets.append(support(space, X))
        notes.append(note)
    chain = chain_filtration(sets, notes)
    residue = ClosedSet(space, frozenset([point_label(p, INF)]))
    return ChromaticFiltration(chain.root, maps, residue)


def diagram_to_dot(rho: SymbolicComparisonMap, name: str = "chromatic") -> str:
    """The spectrum of finite spectra drawn above ``Spec(Z)``, with ρ dotted."""
    return map_to_dot(rho.domain, rho.target, rho.assignment, name)
