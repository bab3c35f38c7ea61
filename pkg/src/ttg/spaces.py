"""Finite spectral spaces presented as posets.

A finite T0 space is the same thing as a finite poset: ``x ⤳ y`` (read
"x specializes to y") means ``y`` lies in the closure of ``x``.  Closed
sets are the subsets stable under specialization.  Spaces carry an
orientation tag recording how specialization relates to inclusion of the
underlying primes:

* ``"balmer"``: tensor-triangular primes, where the closure of ``P`` is the
  set of primes contained in ``P`` (closed points are minimal primes);
* ``"zariski"``: prime ideals of a commutative ring, where the closure of
  ``p`` is the set of primes containing ``p``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Optional

from .errors import UsageError

BALMER = "balmer"
ZARISKI = "zariski"


class FiniteSpectralSpace:
    """A finite T0 space given by its specialization order.

    Args:
        points: point labels, in display order.
        specializations: pairs ``(x, y)`` meaning ``y`` is in the closure of
            ``x``; the reflexive-transitive closure is taken automatically.
        orientation: ``"balmer"`` or ``"zariski"``.
        name: optional display name.
    """

    def __init__(self, points, specializations=(), orientation=BALMER, name=""):
        points = tuple(points)
        if len(set(points)) != len(points):
            raise UsageError("duplicate point labels")
        if orientation not in (BALMER, ZARISKI):
            raise UsageError(f"unknown orientation {orientation!r}")
        self.points = points
        self.orientation = orientation
        self.name = name
        index = {x: i for i, x in enumerate(points)}
        down = {x: {x} for x in points}
        for x, y in specializations:
            if x not in index or y not in index:
                raise UsageError(f"unknown point in specialization ({x!r}, {y!r})")
            down[x].add(y)
        changed = True
        while changed:
            changed = False
            for x in points:
                extra = set()
                for y in down[x]:
                    extra |= down[y]
                if not extra <= down[x]:
                    down[x] |= extra
                    changed = True
        for x, y in itertools.combinations(points, 2):
            if y in down[x] and x in down[y]:
                raise UsageError(f"specialization is not antisymmetric at {x!r}, {y!r}")
        self._down = {x: frozenset(v) for x, v in down.items()}
        self._index = index

    # -- basic structure -------------------------------------------------
    def __contains__(self, x):
        return x in self._index

    def __iter__(self):
        return iter(self.points)

    def __len__(self):
        return len(self.points)

    def __repr__(self):
        return f"FiniteSpectralSpace({list(self.points)!r}, orientation={self.orientation!r})"

    def __eq__(self, other):
        if not isinstance(other, FiniteSpectralSpace):
            return NotImplemented
        return (
            set(self.points) == set(other.points)
            and self.orientation == other.orientation
            and self._down == other._down
        )

    def __hash__(self):
        return hash((frozenset(self.points), self.orientation))

    def check_points(self, pts: Iterable) -> frozenset:
        pts = frozenset(pts)
        unknown = [x for x in pts if x not in self._index]
        if unknown:
            raise UsageError(f"unknown point(s) {sorted(map(str, unknown))}")
        return pts

    def sort(self, pts: Iterable) -> list:
        return sorted(pts, key=self._index.__getitem__)

    def specializes(self, x, y) -> bool:
        """True when ``y`` lies in the closure of ``x``."""
        return y in self._down[x]

    def point_closure(self, x) -> frozenset:
        return self._down[x]

    def generizations(self, y) -> frozenset:
        return frozenset(x for x in self.points if y in self._down[x])

    def contained_in(self, x, y) -> bool:
        """Inclusion of the primes underlying ``x`` and ``y``."""
        if self.orientation == BALMER:
            return self.specializes(y, x)
        return self.specializes(x, y)

    def covering_pairs(self) -> list[tuple]:
        """Pairs ``(x, y)`` with ``y`` an immediate specialization of ``x``."""
        pairs = []
        for x in self.points:
            below = self._down[x] - {x}
            for y in self.sort(below):
                if not any(y in self._down[z] for z in below - {y}):
                    pairs.append((x, y))
        return pairs

    def closed_points(self) -> list:
        return [x for x in self.points if self._down[x] == {x}]

    def generic_points(self) -> list:
        return [x for x in self.points if self.generizations(x) == {x}]

    def is_discrete(self) -> bool:
        return all(len(self._down[x]) == 1 for x in self.points)

    # -- closed sets -----------------------------------------------------
    def closed(self, pts: Iterable) -> "ClosedSet":
        """Wrap an already closed subset, raising if it is not closed."""
        pts = self.check_points(pts)
        c = closure(self, pts)
        if c.points != pts:
            raise UsageError(f"{sorted(map(str, pts))} is not closed")
        return c

    def whole(self) -> "ClosedSet":
        return ClosedSet(self, frozenset(self.points))

    def empty(self) -> "ClosedSet":
        return ClosedSet(self, frozenset())

    def is_closed(self, pts: Iterable) -> bool:
        pts = frozenset(pts)
        return all(self._down[x] <= pts for x in pts)

    def closed_sets(self) -> list["ClosedSet"]:
        """All closed subsets (as unions of point closures), smallest first."""
        seen = {frozenset()}
        for x in self.points:
            for s in list(seen):
                seen.add(s | self._down[x])
        ordered = sorted(seen, key=lambda s: (len(s), self.sort(s)))
        return [ClosedSet(self, s) for s in ordered]

    def is_thomason(self, pts: frozenset) -> bool:
        """Thomason closed sets; every closed set of a finite space qualifies."""
        return True

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "orientation": self.orientation,
            "points": [str(x) for x in self.points],
            "specializations": [[str(x), str(y)] for x, y in self.covering_pairs()],
        }


@dataclass(frozen=True)
class ClosedSet:
    """A specialization-closed subset of a finite space."""

    space: FiniteSpectralSpace
    points: frozenset

    def __iter__(self):
        return iter(self.space.sort(self.points))

    def __len__(self):
        return len(self.points)

    def __contains__(self, x):
        return x in self.points

    def __le__(self, other):
        return self.points <= other.points

    def __lt__(self, other):
        return self.points < other.points

    def labels(self) -> list[str]:
        return [str(x) for x in self]

    def __repr__(self):
        return "{" + ", ".join(self.labels()) + "}"


def closure(space: FiniteSpectralSpace, points: Iterable) -> ClosedSet:
    """Smallest closed subset containing ``points``."""
    pts = space.check_points(points)
    out = set()
    for x in pts:
        out |= space.point_closure(x)
    return ClosedSet(space, frozenset(out))


def is_thomason_closed(c: ClosedSet) -> bool:
    if not c.space.is_closed(c.points):
        raise UsageError(f"{c!r} is not closed")
    return c.space.is_thomason(c.points)


def hochster_dual(space: FiniteSpectralSpace) -> FiniteSpectralSpace:
    """Same points with the specialization order reversed."""
    pairs = [(y, x) for x in space.points for y in space.point_closure(x) if x != y]
    orientation = ZARISKI if space.orientation == BALMER else BALMER
    name = f"dual({space.name})" if space.name else ""
    dual = FiniteSpectralSpace(space.points, pairs, orientation, name)
    return dual


def connected_components(space: FiniteSpectralSpace, subset: Optional[Iterable] = None) -> list[frozenset]:
    """Components of the comparability graph, restricted to ``subset``."""
    pts = list(space.points) if subset is None else space.sort(space.check_points(subset))
    remaining = set(pts)
    comps = []
    for x in pts:
        if x not in remaining:
            continue
        comp = {x}
        stack = [x]
        remaining.discard(x)
        while stack:
            y = stack.pop()
            for z in list(remaining):
                if space.specializes(y, z) or space.specializes(z, y):
                    remaining.discard(z)
                    comp.add(z)
                    stack.append(z)
        comps.append(frozenset(comp))
    return comps


def is_connected(space: FiniteSpectralSpace, subset: Optional[Iterable] = None) -> bool:
    """Connectedness in the usual sense; the empty space is not connected."""
    return len(connected_components(space, subset)) == 1


def irreducible_closed_sets(space: FiniteSpectralSpace) -> list[ClosedSet]:
    """Closures of single points (every irreducible closed set is one)."""
    return [ClosedSet(space, space.point_closure(x)) for x in space.points]


class SpectralMap:
    """A point assignment between finite spaces, with its validation result.

    ``valid`` is False when some closed set has a non-closed preimage; that
    closed set is stored in ``witness``.
    """

    def __init__(self, source, target, assignment, valid=True, witness=None, reason=""):
        self.source = source
        self.target = target
        self.assignment = dict(assignment)
        self.valid = valid
        self.witness = witness
        self.reason = reason

    def __call__(self, x):
        return self.assignment[x]

    def __bool__(self):
        return self.valid

    def preimage(self, pts: Iterable) -> frozenset:
        pts = frozenset(pts)
        return frozenset(x for x in self.source.points if self.assignment[x] in pts)

    def image(self) -> frozenset:
        return frozenset(self.assignment.values())

    def fibers(self) -> dict:
        return {y: self.preimage({y}) for y in self.target.points}

    def compose(self, other: "SpectralMap") -> "SpectralMap":
        """``other ∘ self``."""
        return check_spectral_map(
            self.source, other.target, {x: other(self(x)) for x in self.source.points}
        )

    def __repr__(self):
        body = ", ".join(f"{x}->{y}" for x, y in self.assignment.items())
        return f"SpectralMap({body}; valid={self.valid})"


def check_spectral_map(source: FiniteSpectralSpace, target: FiniteSpectralSpace, assignment: Mapping) -> SpectralMap:
    """Validate that ``assignment`` is continuous (hence spectral).

    Failure is reported through ``valid=False`` and a witness closed set
    of the target whose preimage is not closed.
    """
    missing = [x for x in source.points if x not in assignment]
    if missing:
        raise UsageError(f"assignment is not total; missing {missing}")
    for x in source.points:
        if assignment[x] not in target:
            raise UsageError(f"{x!r} is sent to unknown point {assignment[x]!r}")
    f = SpectralMap(source, target, {x: assignment[x] for x in source.points})
    for y in target.points:
        cl = target.point_closure(y)
        pre = f.preimage(cl)
        if not source.is_closed(pre):
            f.valid = False
            f.witness = ClosedSet(target, cl)
            f.reason = "preimage of a closed set is not closed"
            return f
        if target.is_thomason(cl) and not source.is_thomason(pre):
            f.valid = False
            f.witness = ClosedSet(target, cl)
            f.reason = "preimage of a Thomason closed set is not Thomason"
            return f
    return f


def is_inclusion_reversing(source: FiniteSpectralSpace, target: FiniteSpectralSpace, assignment: Mapping) -> Optional[tuple]:
    """Return a violating pair ``(P, Q)`` with P ⊆ Q but ρ(P) ⊉ ρ(Q), or None."""
    for x in source.points:
        for y in source.points:
            if source.contained_in(x, y):
                if not target.contained_in(assignment[y], assignment[x]):
                    return (x, y)
    return None


# -- filtrations --------------------------------------------------------


@dataclass
class FiltrationNode:
    closed: ClosedSet
    note: str = ""
    children: list = field(default_factory=list)

    def walk(self, depth=0):
        yield depth, self
        for child in self.children:
            yield from child.walk(depth + 1)


class Filtration:
    """A rooted tree of closed sets, each child strictly inside its parent."""

    def __init__(self, root: FiltrationNode):
        self.root = root
        self.validate()

    def validate(self):
        for _, node in self.root.walk():
            for child in node.children:
                if not child.closed < node.closed:
                    raise UsageError(
                        f"filtration child {child.closed!r} is not strictly inside {node.closed!r}"
                    )

    def nodes(self) -> list[FiltrationNode]:
        return [node for _, node in self.root.walk()]

    def chain(self) -> list[ClosedSet]:
        """The closed sets along the leftmost branch."""
        out = []
        node = self.root
        while True:
            out.append(node.closed)
            if not node.children:
                return out
            node = node.children[0]

    def as_dict(self) -> dict:
        def encode(node):
            return {
                "closed": node.closed.labels(),
                "note": node.note,
                "children": [encode(c) for c in node.children],
            }

        return encode(self.root)

    def render(self) -> str:
        lines = []
        for depth, node in self.root.walk():
            note = f"  [{node.note}]" if node.note else ""
            lines.append("  " * depth + repr(node.closed) + note)
        return "\n".join(lines)


def chain_filtration(closed_sets: list[ClosedSet], notes: Optional[list[str]] = None) -> Filtration:
    """Build a linear filtration from a decreasing list of closed sets."""
    notes = notes or [""] * len(closed_sets)
    root = FiltrationNode(closed_sets[0], notes[0])
    node = root
    for c, n in zip(closed_sets[1:], notes[1:]):
        child = FiltrationNode(c, n)
        node.children.append(child)
        node = child
    return Filtration(root)


def pullback_filtration(f: SpectralMap, target: Filtration) -> Filtration:
    """Node-wise preimages; children equal to their parent are collapsed."""
    if not f.valid:
        raise UsageError(f"cannot pull back along an invalid map ({f.reason})")

    def pull(node: FiltrationNode, parent_set: Optional[frozenset]):
        pre = f.preimage(node.closed.points)
        note = f"preimage of {node.closed!r}" + (f" ({node.note})" if node.note else "")
        kids = []
        for child in node.children:
            kids.extend(pull(child, pre))
        if parent_set is not None and pre == parent_set:
            return kids
        out = FiltrationNode(ClosedSet(f.source, pre), note)
        out.children = [k for k in kids if k.closed.points < pre]
        # keep only one representative per distinct set among siblings
        uniq, seen = [], set()
        for k in out.children:
            if k.closed.points not in seen:
                seen.add(k.closed.points)
                uniq.append(k)
        out.children = uniq
        return [out]

    roots = pull(target.root, None)
    return Filtration(roots[0])


# -- DOT output -------------------------------------------------------


def _quote(s) -> str:
    return '"' + str(s).replace('"', r"\"") + '"'


def space_to_dot(space: FiniteSpectralSpace, highlight: Iterable = (), name: str = "space") -> str:
    """Graphviz rendering: one node per point, one edge per covering relation."""
    hl = set(highlight)
    lines = [f"digraph {_quote(name)} {{", "  rankdir=TB;"]
    for x in space.points:
        style = ", style=filled, fillcolor=lightgrey" if x in hl else ""
        lines.append(f"  {_quote(x)} [shape=circle{style}];")
    for x, y in space.covering_pairs():
        lines.append(f"  {_quote(x)} -> {_quote(y)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def filtration_to_dot(filtration: Filtration, name: str = "filtration") -> str:
    """Graphviz rendering: one node per closed set, one edge per inclusion."""
    lines = [f"digraph {_quote(name)} {{", "  node [shape=box];"]
    ids = {}
    for k, (_, node) in enumerate(filtration.root.walk()):
        ids[id(node)] = f"n{k}"
        label = repr(node.closed) + (f"\\n{node.note}" if node.note else "")
        lines.append(f"  n{k} [label={_quote(label)}];")
    for _, node in filtration.root.walk():
        for child in node.children:
            lines.append(f"  {ids[id(node)]} -> {ids[id(child)]};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def map_to_dot(domain: FiniteSpectralSpace, target: FiniteSpectralSpace, assignment: Mapping, name: str = "map") -> str:
    """Two rows: the domain above the target, with the map drawn dotted."""
    lines = [f"digraph {_quote(name)} {{", "  rankdir=TB;"]
    lines.append("  subgraph cluster_domain {")
    lines.append(f"    label={_quote(domain.name)};")
    for x in domain.points:
        lines.append(f"    {_quote(x)} [shape=circle];")
    lines.append("  }")
    lines.append("  subgraph cluster_target {")
    lines.append(f"    label={_quote(target.name)};")
    for y in target.points:
        lines.append(f"    {_quote('T:' + str(y))} [label={_quote(y)}, shape=box];")
    lines.append("  }")
    for x, y in domain.covering_pairs():
        lines.append(f"  {_quote(x)} -> {_quote(y)};")
    for x, y in target.covering_pairs():
        lines.append(f"  {_quote('T:' + str(x))} -> {_quote('T:' + str(y))};")
    for x in domain.points:
        lines.append(f"  {_quote(x)} -> {_quote('T:' + str(assignment[x]))} [style=dotted, arrowhead=none];")
    lines.append("}")
    return "\n".join(lines) + "\n"
