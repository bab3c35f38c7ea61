"""Colimit rings ``R_X = colim(E_X -> E_{X⊗X} -> ...)`` at bounded depth.

Level 1 is the minimal model M of X and level n+1 is the minimal model of
``M ⊗ M_n``; the transition sends ``f`` to ``M ⊗ f`` (through the suspension
isomorphism ``σ_R`` in nonzero degree).  The ring at depth d is ``E_{M_d}``
modulo the classes that die at level d+1.

Stabilization is certified in two ways:

* the tower reaches a fixed point (``M_{n+1}`` equals ``M_n`` as a
  complex), so every later transition is the same linear map and the
  colimit is computed exactly;
* otherwise the images of consecutive levels in level d+1 agree for the
  last two steps (one step at depth 2).  This is evidence, not proof, and
  ``exact`` stays False.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from ..errors import ConsistencyError, UsageError
from ..linalg import LinearSolver, rank_array, rref_array
from ..models import (
    ChainMap,
    Complex,
    HomSpace,
    hom_space,
    identity,
    minimize,
    suspend,
    suspend_map,
    suspension_iso_right,
    tensor,
    tensor_maps,
)
from ..rings import FinCommAlgebra, GradedAlgebra
from .balanced import BalancedEndoRing, degree_span

DEFAULT_DEPTH = 3


class Level:
    """One object ``M_n`` of the tower with its lazily built rings."""

    def __init__(self, index: int, obj: Complex, incl: Optional[ChainMap], proj: Optional[ChainMap]):
        self.index = index
        self.obj = obj
        # incl: M_n -> M ⊗ M_{n-1} and proj back (None at level 1)
        self.incl = incl
        self.proj = proj
        self._spaces: dict = {}
        self._rings: dict = {}

    def space(self, k: int) -> HomSpace:
        if k not in self._spaces:
            self._spaces[k] = hom_space(suspend(self.obj, k), self.obj)
        return self._spaces[k]

    def ring(self, graded: bool) -> BalancedEndoRing:
        if graded not in self._rings:
            self._rings[graded] = BalancedEndoRing(self.obj, graded=graded)
        return self._rings[graded]


class Tower:
    """The tensor-power tower of X, extended on demand."""

    def __init__(self, X: Complex):
        self.source = X
        red = minimize(X)
        self.base = red.small
        self.levels = [Level(1, red.small, None, None)]
        self._id = identity(red.small)
        self._fixed: Optional[int] = None

    def level(self, n: int) -> Level:
        if n < 1:
            raise UsageError("tower levels start at 1")
        while len(self.levels) < n:
            prev = self.levels[-1]
            if self._fixed is not None:
                # past a fixed point every level repeats the same data
                self.levels.append(prev)
                continue
            red = minimize(tensor(self.base, prev.obj))
            self.levels.append(Level(prev.index + 1, red.small, red.incl, red.proj))
            if red.small == prev.obj:
                self._fixed = prev.index
        return self.levels[n - 1]

    def fixed_point(self, upto: int) -> Optional[int]:
        """First level n ≤ upto with ``M_{n+1} = M_n``, if any.

        From such a level on the objects and transition maps repeat, since
        minimal models are computed deterministically from the complex.
        """
        self.level(upto + 1)
        if self._fixed is not None and self._fixed <= upto:
            return self._fixed
        return None

    def step(self, n: int, k: int, f: ChainMap) -> ChainMap:
        """Transition of ``f: Σ^k M_n -> M_n`` to level n+1: ``M ⊗ f``."""
        src, nxt = self.level(n), self.level(n + 1)
        M = self.base
        big = tensor_maps(self._id, f) @ suspension_iso_right(M, src.obj, k)
        return nxt.proj @ big @ suspend_map(nxt.incl, k)

    def push(self, n: int, k: int, f: ChainMap, target: int) -> ChainMap:
        for j in range(n, target):
            f = self.step(j, k, f)
        return f


# size budget: summands of the representing level, and of any tensor product built
MAX_REP_RANK = 16
MAX_BUILD_RANK = 1024


def affordable_depth(X: Complex, depth: int) -> int:
    """Largest d <= depth whose ring stays within the size budget (0 if none).

    The balance test at level n works in ``M_n ⊗ M_n``, so the cost grows
    with the square of the rank of the representing level.
    """
    T = tower_of(X)
    r = T.base.total_rank()
    best = 0
    for d in range(1, depth + 1):
        for n in range(len(T.levels), d + 2):
            if T._fixed is None and r * T.levels[-1].obj.total_rank() > MAX_BUILD_RANK:
                return best
            T.level(n)
        rep = T._fixed if T._fixed is not None and T._fixed <= d else d
        if T.level(rep).obj.total_rank() > MAX_REP_RANK:
            return best
        best = d
    return best


def tower_of(X: Complex) -> Tower:
    cache = X.model._cache.setdefault("tower", {})
    if X.key not in cache:
        cache[X.key] = (Tower(X), X)
    return cache[X.key][0]


class ColimitRing:
    """``R_X`` (or ``R_X^•``) computed at a finite depth.

    Attributes:
        depth: level whose balanced endomorphisms represent the ring.
        dims: ``{degree: dim}`` of the ring.
        algebra: FinCommAlgebra (ungraded) or GradedAlgebra, or None when
            the quotient is not yet commutative.
        stabilized: stabilization flag (see module docstring).
        exact: True when a tower fixed point makes the result exact.
    """

    def __init__(self, X: Complex, depth: int = DEFAULT_DEPTH, graded: bool = False, label: str = ""):
        if depth < 1:
            raise UsageError("depth must be at least 1")
        self.obj = X
        self.label = label or X.name or "X"
        self.depth = depth
        self.graded = graded
        self.model = X.model
        self.p = p = X.model.p
        self.tower = T = tower_of(X)
        fixed = T.fixed_point(depth)
        self.exact = fixed is not None
        if fixed is not None:
            rep_level = fixed
            top = fixed + 1
        else:
            rep_level = depth
            top = depth + 1
        self.rep_level = rep_level
        self.top = top
        E = T.level(rep_level).ring(graded)
        self.endo = E
        # pushes of E-basis to the comparison level
        self._push_cache: dict = {}
        if fixed is not None:
            self._exact_quotient(E)
        else:
            self._depth_quotient(E)
        self._build_tables()
        self.stabilized = self.exact or self._check_stable()

    # -- quotient bases -------------------------------------------------------
    def _pushed(self, n: int, k: int, f: ChainMap, target: int) -> np.ndarray:
        g = self.tower.push(n, k, f, target)
        return self.tower.level(target).space(k).coords(g)

    def _image_matrix(self, n: int, k: int, target: int) -> np.ndarray:
        """Columns: images of a basis of ``E_{M_n}^k`` at level ``target``."""
        key = (n, k, target)
        if key not in self._push_cache:
            E = self.tower.level(n).ring(self.graded)
            if k not in E.degrees or not E.dim(k):
                dim = self.tower.level(target).space(k).dim if k in self._degrees_at(target) else 0
                self._push_cache[key] = np.zeros((dim, 0), dtype=np.int64)
            else:
                cols = [self._pushed(n, k, f, target) for f in E.basis_maps(k)]
                self._push_cache[key] = np.array(cols, dtype=np.int64).T % self.p
        return self._push_cache[key]

    def _degrees_at(self, n: int) -> list[int]:
        if not self.graded:
            return [0]
        span = degree_span(self.tower.level(n).obj)
        return list(range(-span, span + 1))

    def _depth_quotient(self, E: BalancedEndoRing):
        """Keep representatives whose images at the top level are independent."""
        self.reps = {}
        self._solvers = {}
        for k in E.degrees:
            if not E.dim(k):
                continue
            img = self._image_matrix(self.rep_level, k, self.top)
            if img.size == 0:
                continue
            _, piv = rref_array(img, self.p)
            if not piv:
                continue
            self.reps[k] = np.eye(E.dim(k), dtype=np.int64)[:, piv]
            self._solvers[k] = LinearSolver(img[:, piv], self.p)

    def _exact_quotient(self, E: BalancedEndoRing):
        """At a fixed point the colimit is E modulo the generalized kernel of the transition."""
        self.reps = {}
        self._solvers = {}
        n = self.rep_level
        for k in E.degrees:
            d = E.dim(k)
            if not d:
                continue
            # transition as a matrix on E-coordinates
            tmat = np.zeros((d, d), dtype=np.int64)
            for i, f in enumerate(E.basis_maps(k)):
                g = self.tower.step(n, k, f)
                tmat[:, i] = E.coords(k, g)
            power = np.eye(d, dtype=np.int64)
            for _ in range(d):
                power = (tmat @ power) % self.p
            # image of t^d: columns of power; a basis of E/ker(t^d)
            _, piv = rref_array(power, self.p)
            if not piv:
                continue
            self.reps[k] = np.eye(d, dtype=np.int64)[:, piv]
            self._solvers[k] = LinearSolver(power[:, piv], self.p)
            self._stable_power = getattr(self, "_stable_power", {})
            self._stable_power[k] = power

    def _quotient_coords(self, k: int, e_coords) -> np.ndarray:
        """Ring coordinates of the class of an E-element (E-coordinates)."""
        if k not in self._solvers:
            return np.zeros(0, dtype=np.int64)
        if self.exact:
            v = (self._stable_power[k] @ np.asarray(e_coords)) % self.p
        else:
            v = self._push_e(k, e_coords)
        x = self._solvers[k].solve(v)
        if x is None:
            raise ConsistencyError("class outside the computed quotient")
        return x

    def _push_e(self, k: int, e_coords) -> np.ndarray:
        img = self._image_matrix(self.rep_level, k, self.top)
        return (img @ np.asarray(e_coords)) % self.p

    # -- ring structure -----------------------------------------------------------
    def _build_tables(self):
        E = self.endo
        p = self.p
        self.dims = {k: r.shape[1] for k, r in self.reps.items()}
        tables = {}
        for k, rk in self.reps.items():
            for l, rl in self.reps.items():
                if k + l not in self.dims:
                    continue
                t = np.zeros((rk.shape[1], rl.shape[1], self.dims[k + l]), dtype=np.int64)
                for a in range(rk.shape[1]):
                    for b in range(rl.shape[1]):
                        prod = E.mul(k, rk[:, a], l, rl[:, b])
                        t[a, b] = self._quotient_coords(k + l, prod)
                tables[(k, l)] = t % p
        self.tables = tables
        self.unit = self._quotient_coords(0, E.unit) if 0 in self.dims else np.zeros(0, dtype=np.int64)
        self.commutative = _tables_commute(tables, p, graded=self.graded)
        self.algebra = None
        if self.commutative:
            if self.graded:
                self.algebra = GradedAlgebra(p, self.dims, tables, self.unit, sign_rule="graded", name=f"R_{self.label}")
            else:
                d = self.dims.get(0, 0)
                t00 = tables.get((0, 0), np.zeros((d, d, d), dtype=np.int64))
                self.algebra = FinCommAlgebra(p, t00, self.unit, name=f"R_{self.label}")

    def degree_zero(self) -> FinCommAlgebra:
        if self.algebra is None:
            raise UsageError(f"R_{self.label} is not commutative at depth {self.depth}")
        if isinstance(self.algebra, GradedAlgebra):
            return self.algebra.degree_zero()
        return self.algebra

    def _check_stable(self) -> bool:
        """Images of levels d-1 (and d-2) already fill the image of level d."""
        if self.depth < 2:
            return False
        d, top = self.rep_level, self.top
        lowest = max(1, d - 2)
        for k in self.dims or {0: 0}:
            dims = []
            for n in range(lowest, d + 1):
                img = self._image_matrix(n, k, top)
                dims.append(rank_array(img, self.p) if img.size else 0)
            if len(set(dims)) != 1:
                return False
        if not self.dims:
            # zero ring: check that lower levels also vanish at the top
            for n in range(lowest, d + 1):
                img = self._image_matrix(n, 0, top)
                if img.size and rank_array(img, self.p):
                    return False
        return True

    # -- elements --------------------------------------------------------------
    def element_map(self, k: int, c) -> ChainMap:
        """A representative ``Σ^k M_d -> M_d`` of the class with ring coordinates c."""
        E = self.endo
        if k not in self.reps:
            return ChainMap(suspend(E.minimal, k), E.minimal, {})
        return E.element(k, (self.reps[k] @ np.asarray(c, dtype=np.int64)) % self.p)

    def basis_maps(self, k: int = 0) -> list[ChainMap]:
        d = self.dims.get(k, 0)
        eye = np.eye(d, dtype=np.int64)
        return [self.element_map(k, eye[i]) for i in range(d)]

    def class_of(self, level: int, k: int, f: ChainMap) -> np.ndarray:
        """Ring coordinates of the class of a balanced ``f: Σ^k M_level -> M_level``."""
        if level > self.rep_level:
            if not self.exact:
                raise UsageError(f"level {level} is above the representing level {self.rep_level}")
            level = self.rep_level
        g = self.tower.push(level, k, f, self.rep_level) if level < self.rep_level else f
        return self._quotient_coords(k, self.endo.coords(k, g))

    @property
    def representing_object(self) -> Complex:
        return self.endo.minimal

    def describe(self) -> dict:
        return {
            "object": self.label,
            "depth": self.depth,
            "graded": self.graded,
            "dims": {str(k): v for k, v in sorted(self.dims.items())},
            "stabilized": bool(self.stabilized),
            "exact": bool(self.exact),
            "commutative": bool(self.commutative),
        }

    def __repr__(self):
        return f"ColimitRing({self.label}, depth={self.depth}, dims={self.dims}, stabilized={self.stabilized})"


def _tables_commute(tables: dict, p: int, graded: bool) -> bool:
    for (k, l), t in tables.items():
        other = tables.get((l, k))
        sign = (-1) ** (k * l) if graded else 1
        swapped = other.transpose(1, 0, 2) if other is not None else np.zeros_like(t)
        if not np.array_equal(t % p, (sign * swapped) % p):
            return False
    return True


def r_object(X: Complex, depth: int = DEFAULT_DEPTH, graded: bool = False, label: str = "") -> ColimitRing:
    return ColimitRing(X, depth=depth, graded=graded, label=label)


class Equality:
    """Verdict of ``equal_in_r_phi``: ``equal`` or distinct up to ``depth``."""

    def __init__(self, equal: bool, depth: int):
        self.equal = equal
        self.depth = depth

    def __bool__(self):
        return self.equal

    def __repr__(self):
        return "equal" if self.equal else f"distinct-at-depth({self.depth})"


def equal_in_r_phi(X: Complex, f: tuple, g: tuple, depth: int = DEFAULT_DEPTH) -> Equality:
    """Decide ``[f] = [g]`` in ``R_X`` by tensoring with powers of X.

    ``f`` and ``g`` are triples ``(level, degree, map)`` with the map an
    endomorphism of the tower object at that level.  Both are pushed to a
    common level and then up to ``depth`` further levels; equality at some
    level is final (monotone in depth).
    """
    T = tower_of(X)
    (n, k, a), (m, l, b) = f, g
    if k != l:
        za = equal_in_r_phi(X, f, (n, k, _zero(T, n, k)), depth)
        zb = equal_in_r_phi(X, g, (m, l, _zero(T, m, l)), depth)
        return Equality(za.equal and zb.equal, max(za.depth, zb.depth))
    start = max(n, m)
    a = T.push(n, k, a, start)
    b = T.push(m, k, b, start)
    for j in range(depth + 1):
        level = start + j
        if j:
            a = T.step(level - 1, k, a)
            b = T.step(level - 1, k, b)
        if T.level(level).space(k).is_null(a - b):
            return Equality(True, j)
    return Equality(False, depth)


def _zero(T: Tower, n: int, k: int) -> ChainMap:
    M = T.level(n).obj
    return ChainMap(suspend(M, k), M, {})
