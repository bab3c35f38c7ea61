"""Balanced endomorphisms: the rings ``E_X`` and ``E_X^•`` and their subrings.

A graded endomorphism of degree k is a chain map ``f: Σ^k X -> X``.  It is
balanced when the two composites

    Σ^k(X⊗X) ≅ Σ^k X ⊗ X --f⊗X--> X⊗X
    Σ^k(X⊗X) ≅ X ⊗ Σ^k X --X⊗f--> X⊗X

agree up to homotopy.  Everything is computed on the minimal model M of X
and on the minimal model T of M⊗M, then transported back when asked.
The product of ``f`` (degree k) and ``g`` (degree l) is ``f ∘ Σ^k g``.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from ..errors import ConsistencyError, UsageError
from ..linalg import LinearSolver, kernel_array
from ..models import (
    ChainMap,
    Complex,
    HomSpace,
    hom_space,
    identity,
    minimize,
    suspend,
    suspend_map,
    suspension_iso_left,
    suspension_iso_right,
    tensor,
    tensor_maps,
)
from ..rings import FinCommAlgebra, GradedAlgebra

SUBRING_CHOICES = ("center_cap_balanced", "exotic", "full_degree0_commutative_check")


def degree_span(X: Complex) -> int:
    """Largest |k| for which ``[Σ^k X, X]`` can be nonzero."""
    if X.is_trivially_zero():
        return 0
    return X.hi - X.lo


def graded_product(f: ChainMap, k: int, g: ChainMap) -> ChainMap:
    """``f · g = f ∘ Σ^k g`` for ``f`` of degree k."""
    return f @ suspend_map(g, k)


class GradedEndomorphisms:
    """``[M, M]_•`` for a complex M, one HomSpace per degree.

    Only the degrees in ``degrees`` are built; the ungraded ring uses [0].
    """

    def __init__(self, M: Complex, degrees):
        self.obj = M
        self.model = M.model
        self.degrees = [int(k) for k in degrees]
        self.spaces = {k: hom_space(suspend(M, k), M) for k in self.degrees}

    def dim(self, k: int) -> int:
        return self.spaces[k].dim if k in self.spaces else 0

    def element(self, k: int, c) -> ChainMap:
        return self.spaces[k].from_coords(c)

    def coords(self, k: int, f: ChainMap) -> np.ndarray:
        return self.spaces[k].coords(f)

    def product_coords(self, k: int, a, l: int, b) -> Optional[np.ndarray]:
        """Coordinates of the product in degree k+l, or None if that degree is absent."""
        if k + l not in self.spaces:
            return None
        f = self.element(k, a)
        g = self.element(l, b)
        return self.coords(k + l, graded_product(f, k, g))


class TensorSquare:
    """``T = min(M⊗M)`` with the maps used to test balance and centrality."""

    def __init__(self, M: Complex):
        self.obj = M
        red = minimize(tensor(M, M))
        self.big = red.big
        self.small = red.small
        self.incl = red.incl
        self.proj = red.proj
        self._spaces: dict = {}
        self._idM = identity(M)

    def space(self, k: int) -> HomSpace:
        if k not in self._spaces:
            self._spaces[k] = hom_space(suspend(self.small, k), self.small)
        return self._spaces[k]

    def left(self, f: ChainMap, k: int) -> ChainMap:
        """``f⊗M`` as a degree-k endomorphism of T."""
        M = self.obj
        g = tensor_maps(f, self._idM) @ suspension_iso_left(M, M, k)
        return self.proj @ g @ suspend_map(self.incl, k)

    def right(self, f: ChainMap, k: int) -> ChainMap:
        """``M⊗f`` as a degree-k endomorphism of T."""
        M = self.obj
        g = tensor_maps(self._idM, f) @ suspension_iso_right(M, M, k)
        return self.proj @ g @ suspend_map(self.incl, k)

    def defect(self, f: ChainMap, k: int) -> np.ndarray:
        """Coordinates of ``f⊗M - M⊗f`` in ``[Σ^k T, T]``."""
        return self.space(k).coords(self.left(f, k) - self.right(f, k))


class BalancedEndoRing:
    """The balanced endomorphisms of X in the requested degrees.

    Attributes:
        obj: the object X as given.
        minimal: its minimal model M, on which all maps live.
        degrees: degrees computed (``[0]`` for the ungraded ring).
        basis: ``{k: array}`` whose columns are coordinates, in the
            hom-space basis of ``[Σ^k M, M]``, of a basis of ``E^k``.
        tables: ``{(k, l): array}`` of shape ``(dim E^k, dim E^l, dim E^{k+l})``.
        unit: coordinates of the identity in ``E^0``.
    """

    def __init__(self, X: Complex, graded: bool = False, degree: Optional[int] = None):
        self.obj = X
        self.reduction = red = minimize(X)
        self.minimal = M = red.small
        self.graded = graded
        if degree is not None:
            degrees = [int(degree)]
        elif graded:
            span = degree_span(M)
            degrees = list(range(-span, span + 1))
        else:
            degrees = [0]
        if 0 not in degrees:
            degrees = sorted(set(degrees) | {0})
        self.degrees = degrees
        self.endos = GradedEndomorphisms(M, degrees)
        self.square = TensorSquare(M)
        p = self.p = X.model.p
        self.basis = {}
        for k in degrees:
            hs = self.endos.spaces[k]
            if hs.dim == 0:
                self.basis[k] = np.zeros((0, 0), dtype=np.int64)
                continue
            cols = [self.square.defect(f, k) for f in hs.basis]
            D = np.array(cols, dtype=np.int64).T
            if D.size == 0:
                self.basis[k] = np.eye(hs.dim, dtype=np.int64)
            else:
                self.basis[k] = kernel_array(D, p)
        self._solvers = {k: LinearSolver(b, p) for k, b in self.basis.items() if b.size}
        self.unit = self._unit_coords()
        self.tables = self._build_tables()

    # -- coordinates -----------------------------------------------------
    def dim(self, k: int = 0) -> int:
        b = self.basis.get(k)
        return 0 if b is None or b.size == 0 else b.shape[1]

    @property
    def dims(self) -> dict:
        return {k: self.dim(k) for k in self.degrees if self.dim(k)}

    def hom_coords(self, k: int, c) -> np.ndarray:
        """Hom-space coordinates of the E-element with E-coordinates c."""
        return (self.basis[k] @ np.asarray(c, dtype=np.int64)) % self.p

    def element(self, k: int, c) -> ChainMap:
        """The chain map ``Σ^k M -> M`` with E-coordinates c."""
        if self.dim(k) == 0:
            return ChainMap(suspend(self.minimal, k), self.minimal, {})
        return self.endos.element(k, self.hom_coords(k, c))

    def basis_maps(self, k: int = 0) -> list[ChainMap]:
        eye = np.eye(self.dim(k), dtype=np.int64)
        return [self.element(k, eye[i]) for i in range(self.dim(k))]

    def coords(self, k: int, f: ChainMap) -> np.ndarray:
        """E-coordinates of a map ``Σ^k M -> M``; raises if it is not balanced."""
        h = self.endos.coords(k, f)
        if self.dim(k) == 0:
            if np.any(h):
                raise UsageError("map is not balanced")
            return np.zeros(0, dtype=np.int64)
        x = self._solvers[k].solve(h)
        if x is None:
            raise UsageError("map is not balanced")
        return x

    def is_balanced(self, k: int, f: ChainMap) -> bool:
        return not np.any(self.square.defect(f, k))

    def from_object(self, k: int, f: ChainMap) -> ChainMap:
        """Move ``f: Σ^k X -> X`` to the minimal model."""
        r = self.reduction
        return r.proj @ f @ suspend_map(r.incl, k)

    def to_object(self, k: int, f: ChainMap) -> ChainMap:
        """Move ``f: Σ^k M -> M`` back to X."""
        r = self.reduction
        return r.incl @ f @ suspend_map(r.proj, k)

    def _unit_coords(self) -> np.ndarray:
        if self.endos.dim(0) == 0:
            return np.zeros(self.dim(0), dtype=np.int64)
        return self.coords(0, identity(self.minimal))

    # -- multiplication -------------------------------------------------------
    def _build_tables(self) -> dict:
        tables = {}
        for k in self.degrees:
            for l in self.degrees:
                s = k + l
                if s not in self.basis or not (self.dim(k) and self.dim(l) and self.dim(s)):
                    continue
                t = np.zeros((self.dim(k), self.dim(l), self.dim(s)), dtype=np.int64)
                fs, gs = self.basis_maps(k), self.basis_maps(l)
                for a, f in enumerate(fs):
                    for b, g in enumerate(gs):
                        prod = graded_product(f, k, g)
                        try:
                            t[a, b] = self.coords(s, prod)
                        except UsageError as exc:
                            raise ConsistencyError("product of balanced maps is not balanced") from exc
                tables[(k, l)] = t
        return tables

    def mul(self, k: int, a, l: int, b) -> np.ndarray:
        t = self.tables.get((k, l))
        if t is None:
            return np.zeros(self.dim(k + l), dtype=np.int64)
        return np.einsum("a,b,abc->c", np.asarray(a), np.asarray(b), t) % self.p

    def is_commutative(self, sign_rule: str = "graded") -> bool:
        for (k, l), t in self.tables.items():
            other = self.tables.get((l, k))
            sign = (-1) ** (k * l) if sign_rule == "graded" else 1
            swapped = other.transpose(1, 0, 2) if other is not None else np.zeros_like(t)
            if not np.array_equal(t % self.p, (sign * swapped) % self.p):
                return False
        return True

    def degree_zero_algebra(self, name: str = "") -> FinCommAlgebra:
        """``E^0`` as an algebra; raises if it is not commutative."""
        d = self.dim(0)
        t = self.tables.get((0, 0), np.zeros((d, d, d), dtype=np.int64))
        if not np.array_equal(t, t.transpose(1, 0, 2)):
            raise UsageError("E_X^0 is not commutative")
        return FinCommAlgebra(self.p, t, self.unit, name=name)

    def is_unit(self, k: int, c) -> bool:
        """A homogeneous element is a unit iff it is an isomorphism of M."""
        from ..models import cone, is_zero

        return is_zero(cone(self.element(k, c)))

    def __repr__(self):
        return f"BalancedEndoRing({self.obj.name or '?'}, dims={self.dims})"


class Subring:
    """A commutative (graded-commutative) subring of a BalancedEndoRing.

    ``basis[k]`` has as columns E-coordinates of the subring's basis in
    degree k; ``algebra`` is the resulting FinCommAlgebra (ungraded) or
    GradedAlgebra.
    """

    def __init__(self, ring: BalancedEndoRing, choice: str, basis: dict):
        self.ring = ring
        self.choice = choice
        self.basis = {k: b for k, b in basis.items() if b.size and b.shape[1]}
        p = ring.p
        self._solvers = {k: LinearSolver(b, p) for k, b in self.basis.items()}
        dims = {k: b.shape[1] for k, b in self.basis.items()}
        tables = {}
        for k in dims:
            for l in dims:
                if k + l not in dims:
                    continue
                t = np.zeros((dims[k], dims[l], dims[k + l]), dtype=np.int64)
                for a in range(dims[k]):
                    for b in range(dims[l]):
                        prod = ring.mul(k, self.basis[k][:, a], l, self.basis[l][:, b])
                        x = self._solvers[k + l].solve(prod)
                        if x is None:
                            raise ConsistencyError(f"{choice} subring is not closed under products")
                        t[a, b] = x
                tables[(k, l)] = t
        if ring.dim(0) == 0:
            unit = np.zeros(0, dtype=np.int64)
        else:
            unit = self._solvers[0].solve(ring.unit) if 0 in self._solvers else None
        if unit is None:
            raise ConsistencyError(f"{choice} subring does not contain the identity")
        self.unit = unit
        self.dims = dims
        self.tables = tables
        if ring.graded:
            self.algebra = GradedAlgebra(p, dims, tables, unit, sign_rule="graded", name=choice)
        else:
            d = dims.get(0, 0)
            self.algebra = FinCommAlgebra(p, tables.get((0, 0), np.zeros((d, d, d), dtype=np.int64)), unit, name=choice)

    def inclusion(self, k: int = 0) -> np.ndarray:
        """Matrix from subring coordinates to E-coordinates in degree k."""
        return self.basis[k]

    def contains(self, k: int, c) -> bool:
        if k not in self._solvers:
            return not np.any(np.asarray(c) % self.ring.p)
        return self._solvers[k].solve(np.asarray(c) % self.ring.p) is not None

    def degree_zero(self) -> FinCommAlgebra:
        if isinstance(self.algebra, GradedAlgebra):
            return self.algebra.degree_zero()
        return self.algebra


def _central_in(endos: GradedEndomorphisms, k: int, candidates: np.ndarray, lift) -> np.ndarray:
    """Columns (coordinate combinations of ``candidates``) that are graded-central.

    ``lift(c)`` turns a candidate coordinate vector into a degree-k
    endomorphism of ``endos.obj``.  Centrality is tested against every
    hom-space basis element in every computed degree.
    """
    p = endos.model.p
    n = candidates.shape[1]
    if n == 0:
        return candidates
    rows = []
    for l in endos.degrees:
        if k + l not in endos.spaces:
            continue
        for g in endos.spaces[l].basis:
            sign = -1 if (k * l) % 2 else 1
            block = []
            for i in range(n):
                f = lift(candidates[:, i])
                fg = graded_product(f, k, g)
                gf = graded_product(g, l, f)
                block.append(endos.coords(k + l, fg - gf.scale(sign)))
            rows.append(np.array(block, dtype=np.int64).T)
    if not rows:
        return candidates
    C = np.concatenate(rows, axis=0) % p
    if C.size == 0:
        return candidates
    ker = kernel_array(C, p)
    return (candidates @ ker) % p


def select_subring(E: BalancedEndoRing, choice: str) -> Subring:
    """A commutative subring of E chosen by tag; commutativity is table-checked."""
    if choice not in SUBRING_CHOICES:
        raise UsageError(f"unknown subring choice {choice!r}; expected one of {', '.join(SUBRING_CHOICES)}")
    p = E.p
    basis = {}
    if choice == "full_degree0_commutative_check":
        if not _degree0_commutative(E):
            raise UsageError("E_X^0 is not commutative; choose another subring")
        basis[0] = np.eye(E.dim(0), dtype=np.int64)
    elif choice == "center_cap_balanced":
        for k in E.degrees:
            if not E.dim(k):
                continue
            basis[k] = _central_in(E.endos, k, E.basis[k], lambda c, k=k: E.endos.element(k, c))
            basis[k] = _solve_columns(E, k, basis[k])
    else:
        sq = E.square
        square_endos = GradedEndomorphisms(sq.small, E.degrees)
        for k in E.degrees:
            hs = E.endos.spaces[k]
            if not hs.dim:
                continue
            central = _central_in(E.endos, k, np.eye(hs.dim, dtype=np.int64), lambda c, k=k: E.endos.element(k, c))
            if not central.shape[1]:
                continue

            def lift_square(c, k=k):
                return sq.left(E.endos.element(k, c), k)

            keep = _central_in_square(square_endos, k, central, lift_square)
            # the exotic subring sits inside E_X; membership is checked here
            basis[k] = _solve_columns(E, k, keep)
    sub = Subring(E, choice, basis)
    if not _subring_commutative(sub):
        raise ConsistencyError(f"{choice} subring is not graded-commutative")
    return sub


def _central_in_square(square_endos: GradedEndomorphisms, k: int, candidates: np.ndarray, lift) -> np.ndarray:
    """Combinations of ``candidates`` whose image under ``lift`` is central in ``[T, T]_•``."""
    p = square_endos.model.p
    n = candidates.shape[1]
    rows = []
    for l in square_endos.degrees:
        if k + l not in square_endos.spaces:
            continue
        for g in square_endos.spaces[l].basis:
            sign = -1 if (k * l) % 2 else 1
            block = []
            for i in range(n):
                f = lift(candidates[:, i])
                block.append(square_endos.coords(k + l, graded_product(f, k, g) - graded_product(g, l, f).scale(sign)))
            rows.append(np.array(block, dtype=np.int64).T)
    if not rows:
        return candidates
    C = np.concatenate(rows, axis=0) % p
    if C.size == 0:
        return candidates
    return (candidates @ kernel_array(C, p)) % p


def _solve_columns(E: BalancedEndoRing, k: int, hom_cols: np.ndarray) -> np.ndarray:
    """E-coordinates of hom-space coordinate columns; each must be balanced."""
    out = []
    for i in range(hom_cols.shape[1]):
        x = E._solvers[k].solve(hom_cols[:, i] % E.p) if k in E._solvers else None
        if x is None:
            raise ConsistencyError("subring element is not balanced")
        out.append(x)
    if not out:
        return np.zeros((E.dim(k), 0), dtype=np.int64)
    return np.array(out, dtype=np.int64).T


def _degree0_commutative(E: BalancedEndoRing) -> bool:
    t = E.tables.get((0, 0))
    return t is None or np.array_equal(t, t.transpose(1, 0, 2))


def _subring_commutative(sub: Subring) -> bool:
    for (k, l), t in sub.tables.items():
        other = sub.tables.get((l, k))
        sign = (-1) ** (k * l) if sub.ring.graded else 1
        swapped = other.transpose(1, 0, 2) if other is not None else np.zeros_like(t)
        if not np.array_equal(t % sub.ring.p, (sign * swapped) % sub.ring.p):
            return False
    return True


def balanced_endos(X: Complex, degree: Optional[int] = None, graded: bool = False) -> BalancedEndoRing:
    return BalancedEndoRing(X, graded=graded, degree=degree)
