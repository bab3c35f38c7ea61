"""Complexes of projectives over a basic algebra, and their chain maps.

Both backends reduce to the same shape.  There is a finite set of
indecomposable projectives ``P_u`` (labels ``u``), each ``Hom(P_u, P_v)`` is
a subspace of a fixed coordinate space ``F_p^D``, and composition through
``P_m`` is given by structure constants ``mult[m]``.  ``End(P_u)`` is local
and coordinate 0 is its residue, so an entry ``P_u -> P_u`` is an
isomorphism exactly when coordinate 0 is nonzero.

A map between direct sums of projectives is an array of shape
``(rows, cols, D)``: entry ``[i, j]`` is the component from source summand
``j`` to target summand ``i``.  Complexes are cohomological: ``d^n`` goes
from degree ``n`` to ``n + 1``.  Suspension shifts ``(ΣX)^n = X^{n+1}``
with differential ``-d``; the tensor differential on ``X^i ⊗ Y^j`` is
``d_X ⊗ 1 + (-1)^i 1 ⊗ d_Y``.
"""

from __future__ import annotations

import hashlib
from typing import Iterable, Optional

import numpy as np

from ..errors import UsageError
from ..spaces import FiniteSpectralSpace

EMPTY = np.zeros(0, dtype=np.int64)


class Model:
    """Shared structure of a backend; see the module docstring.

    Attributes:
        kind: ``"algebra"`` or ``"poset"``.
        p: characteristic.
        labels: names of the indecomposable projectives.
        D: coordinate dimension of hom spaces between indecomposables.
        mult: ``(L, D, D, D)`` composition constants, indexed by the label
            of the object composed through.
        hom_mask: ``(L, L, D)`` booleans; ``hom_mask[v, u]`` marks the
            coordinates allowed in ``Hom(P_u, P_v)``.
        tensor_table: ``(L, L)`` label of ``P_u ⊗ P_v`` or -1 when it is zero.
        points: names of the evaluation points (the primes).
        fiber: ``(points, L)`` booleans, whether ``P_u`` survives at a point.
    """

    kind = "abstract"
    rigid = False
    # False when some P_u ⊗ P_v is not projective; tensor then defers to
    # ``replaced_tensor`` and friends.
    projective_tensor = True

    def __init__(self, p, labels, D, mult, hom_mask, tensor_table, points, fiber, name=""):
        self.p = int(p)
        self.labels = tuple(labels)
        self.D = int(D)
        self.mult = np.array(mult, dtype=np.int64)
        self.hom_mask = np.array(hom_mask, dtype=bool)
        self.tensor_table = np.array(tensor_table, dtype=np.int64)
        self.points = tuple(points)
        self.fiber = np.array(fiber, dtype=bool)
        self.name = name
        self.space = FiniteSpectralSpace(self.points, (), "balmer", name=f"Spc({name})" if name else "Spc")
        ident = np.zeros((len(self.labels), self.D), dtype=np.int64)
        ident[:, 0] = 1
        self.ident = ident
        self._cache: dict = {}

    def __repr__(self):
        return f"{type(self).__name__}({self.name!r})"

    # -- entries --------------------------------------------------------
    def label_index(self, name) -> int:
        try:
            return self.labels.index(str(name))
        except ValueError:
            raise UsageError(f"unknown projective label {name!r}") from None

    def point_index(self, name) -> int:
        try:
            return self.points.index(str(name))
        except ValueError:
            raise UsageError(f"unknown point {name!r}") from None

    def entry_inverse(self, u: int, x: np.ndarray) -> np.ndarray:
        """Inverse of an automorphism ``x`` of ``P_u``."""
        from ..linalg import LinearSolver

        m = np.einsum("a,abc->cb", x, self.mult[u]) % self.p
        y = LinearSolver(m, self.p).solve(self.ident[u])
        if y is None:
            raise UsageError("entry is not invertible")
        return y

    def block_mask(self, rows, cols) -> np.ndarray:
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        if rows.size == 0 or cols.size == 0:
            return np.zeros((rows.size, cols.size, self.D), dtype=bool)
        return self.hom_mask[np.ix_(rows, cols)]

    # -- objects supplied by subclasses ---------------------------------
    def unit(self) -> "Complex":
        raise NotImplementedError

    def scalar_entry(self, a, u: int) -> np.ndarray:
        """Coordinates of the endomorphism of ``P_u`` given by ``a ∈ End(𝟙)``."""
        raise NotImplementedError

    def unit_endomorphism_algebra(self):
        """``End(𝟙)`` as a FinCommAlgebra."""
        raise NotImplementedError

    def dual(self, X: "Complex") -> "Complex":
        from ..errors import NotRigidError

        raise NotRigidError(f"{self.kind} model has no duals")


def compose_blocks(model: Model, outer: np.ndarray, inner: np.ndarray, mid_labels) -> np.ndarray:
    """``outer ∘ inner`` for block arrays; ``mid_labels`` label the middle sums."""
    t, m = outer.shape[:2]
    m2, s = inner.shape[:2]
    if m != m2:
        raise UsageError(f"cannot compose blocks of shapes {outer.shape} and {inner.shape}")
    if m == 0 or t == 0 or s == 0:
        return np.zeros((t, s, model.D), dtype=np.int64)
    if model.D == 1:
        return ((outer[:, :, 0] @ inner[:, :, 0]) % model.p)[:, :, None]
    # group the middle sums by label and multiply coordinate slices with BLAS
    labs = np.asarray(mid_labels, dtype=np.int64)
    out = np.zeros((t, s, model.D), dtype=np.float64)
    of = outer.astype(np.float64)
    inf = inner.astype(np.float64)
    for u in np.unique(labs):
        idx = np.flatnonzero(labs == u)
        for a, b in zip(*np.nonzero(np.any(model.mult[u], axis=2))):
            prod = of[:, idx, a] @ inf[idx, :, b]
            out += prod[:, :, None] * model.mult[u, a, b]
            out %= model.p
    return out.astype(np.int64)


class Complex:
    """A bounded complex of projectives.  Immutable.

    Args:
        model: the backend.
        terms: ``{degree: sequence of label indices}``.
        diffs: ``{degree n: array}`` for ``d^n`` of shape
            ``(len(terms[n+1]), len(terms[n]), D)``; missing entries are zero.
        name: display name.
        check: verify the masks and ``d∘d = 0``.
    """

    def __init__(self, model: Model, terms, diffs=None, name: str = "", check: bool = True):
        self.model = model
        self.name = name
        t = {}
        for n, labs in terms.items():
            labs = np.array(list(labs), dtype=np.int64)
            if labs.size:
                labs.flags.writeable = False
                t[int(n)] = labs
        self._terms = dict(sorted(t.items()))
        D = model.D
        d = {}
        for n, arr in (diffs or {}).items():
            n = int(n)
            arr = np.array(arr, dtype=np.int64) % model.p
            rows, cols = self.rank(n + 1), self.rank(n)
            if arr.size == 0 and (rows == 0 or cols == 0):
                continue
            if arr.ndim == 2 and D == 1:
                arr = arr[:, :, None]
            if arr.shape != (rows, cols, D):
                raise UsageError(
                    f"differential d^{n} has shape {arr.shape}, expected {(rows, cols, D)}"
                )
            if np.any(arr):
                arr.flags.writeable = False
                d[n] = arr
        self._diffs = d
        self._key = None
        if check:
            self.check()

    # -- access ----------------------------------------------------------
    @property
    def degrees(self) -> list[int]:
        return list(self._terms)

    @property
    def lo(self) -> Optional[int]:
        return self.degrees[0] if self._terms else None

    @property
    def hi(self) -> Optional[int]:
        return self.degrees[-1] if self._terms else None

    def labels(self, n: int) -> np.ndarray:
        return self._terms.get(n, EMPTY)

    def rank(self, n: int) -> int:
        return int(self.labels(n).size)

    def total_rank(self) -> int:
        return sum(v.size for v in self._terms.values())

    def d(self, n: int) -> np.ndarray:
        if n in self._diffs:
            return self._diffs[n]
        return np.zeros((self.rank(n + 1), self.rank(n), self.model.D), dtype=np.int64)

    def terms(self) -> dict:
        return dict(self._terms)

    def diffs(self) -> dict:
        return dict(self._diffs)

    def is_trivially_zero(self) -> bool:
        return not self._terms

    def check(self):
        m = self.model
        for n, arr in self._diffs.items():
            bad = arr.astype(bool) & ~m.block_mask(self.labels(n + 1), self.labels(n))
            if np.any(bad):
                i, j, _ = np.argwhere(bad)[0]
                raise UsageError(
                    f"d^{n} entry ({i}, {j}) is not a map "
                    f"{m.labels[self.labels(n)[j]]} -> {m.labels[self.labels(n + 1)[i]]}"
                )
        for n in self._diffs:
            if n + 1 in self._diffs:
                sq = compose_blocks(m, self._diffs[n + 1], self._diffs[n], self.labels(n + 1))
                if np.any(sq):
                    raise UsageError(f"d^{n + 1} ∘ d^{n} is not zero")

    @property
    def key(self) -> bytes:
        """Structural fingerprint; equal keys mean equal complexes."""
        if self._key is None:
            h = hashlib.sha1()
            h.update(repr((id(self.model), self.model.D)).encode())
            for n, labs in self._terms.items():
                h.update(f"t{n}:".encode() + labs.tobytes())
            for n, arr in self._diffs.items():
                h.update(f"d{n}:".encode() + arr.tobytes())
            self._key = h.digest()
        return self._key

    def __eq__(self, other):
        if not isinstance(other, Complex):
            return NotImplemented
        return self.model is other.model and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        m = self.model
        parts = []
        for n, labs in self._terms.items():
            parts.append(f"{n}:[{' '.join(m.labels[u] for u in labs)}]")
        nm = f"{self.name} " if self.name else ""
        return f"Complex({nm}{' '.join(parts) or '0'})"

    def describe(self) -> dict:
        m = self.model
        return {
            "name": self.name,
            "terms": {str(n): [m.labels[u] for u in labs] for n, labs in self._terms.items()},
        }

    def renamed(self, name: str) -> "Complex":
        out = Complex(self.model, self._terms, self._diffs, name, check=False)
        return out


class ChainMap:
    """A degree-0 chain map ``source -> target``.

    Graded maps of degree ``k`` are represented as chain maps
    ``Σ^k source -> target``.

    Args:
        comps: ``{n: array}`` of shape ``(target.rank(n), source.rank(n), D)``.
    """

    def __init__(self, source: Complex, target: Complex, comps=None, check: bool = False):
        if source.model is not target.model:
            raise UsageError("chain map between different models")
        self.source = source
        self.target = target
        self.model = source.model
        D = self.model.D
        c = {}
        for n, arr in (comps or {}).items():
            n = int(n)
            rows, cols = target.rank(n), source.rank(n)
            if rows == 0 or cols == 0:
                continue
            arr = np.array(arr, dtype=np.int64) % self.model.p
            if arr.ndim == 2 and D == 1:
                arr = arr[:, :, None]
            if arr.shape != (rows, cols, D):
                raise UsageError(f"component {n} has shape {arr.shape}, expected {(rows, cols, D)}")
            if np.any(arr):
                c[n] = arr
        self._comps = c
        if check:
            self.check()

    def comp(self, n: int) -> np.ndarray:
        if n in self._comps:
            return self._comps[n]
        return np.zeros((self.target.rank(n), self.source.rank(n), self.model.D), dtype=np.int64)

    def comps(self) -> dict:
        return dict(self._comps)

    def is_zero_map(self) -> bool:
        return not self._comps

    def check(self):
        m = self.model
        X, Y = self.source, self.target
        for n, arr in self._comps.items():
            if np.any(arr.astype(bool) & ~m.block_mask(Y.labels(n), X.labels(n))):
                raise UsageError(f"component {n} is not a map of projectives")
        degs = set(X.degrees) | set(Y.degrees)
        for n in degs:
            lhs = compose_blocks(m, Y.d(n), self.comp(n), Y.labels(n))
            rhs = compose_blocks(m, self.comp(n + 1), X.d(n), X.labels(n + 1))
            if not np.array_equal(lhs, rhs):
                raise UsageError(f"not a chain map in degree {n}")

    def is_chain_map(self) -> bool:
        try:
            self.check()
        except UsageError:
            return False
        return True

    def _same_ends(self, other: "ChainMap"):
        if self.source != other.source or self.target != other.target:
            raise UsageError("maps have different source or target")

    def __add__(self, other: "ChainMap") -> "ChainMap":
        self._same_ends(other)
        keys = set(self._comps) | set(other._comps)
        return ChainMap(self.source, self.target, {n: self.comp(n) + other.comp(n) for n in keys})

    def __sub__(self, other: "ChainMap") -> "ChainMap":
        self._same_ends(other)
        keys = set(self._comps) | set(other._comps)
        return ChainMap(self.source, self.target, {n: self.comp(n) - other.comp(n) for n in keys})

    def __neg__(self) -> "ChainMap":
        return ChainMap(self.source, self.target, {n: -a for n, a in self._comps.items()})

    def scale(self, c: int) -> "ChainMap":
        return ChainMap(self.source, self.target, {n: int(c) * a for n, a in self._comps.items()})

    def __matmul__(self, other: "ChainMap") -> "ChainMap":
        """Composition ``self ∘ other``."""
        if other.target != self.source:
            raise UsageError("cannot compose: target and source differ")
        m = self.model
        out = {}
        for n in set(self._comps) & set(other._comps):
            out[n] = compose_blocks(m, self._comps[n], other._comps[n], self.source.labels(n))
        return ChainMap(other.source, self.target, out)

    def with_ends(self, source: Complex, target: Complex) -> "ChainMap":
        """Same components viewed between structurally equal complexes."""
        if source != self.source or target != self.target:
            raise UsageError("complexes differ structurally")
        return ChainMap(source, target, self._comps)

    def __eq__(self, other):
        if not isinstance(other, ChainMap):
            return NotImplemented
        if self.source != other.source or self.target != other.target:
            return False
        keys = set(self._comps) | set(other._comps)
        return all(np.array_equal(self.comp(n), other.comp(n)) for n in keys)

    def __hash__(self):
        return hash((self.source.key, self.target.key))

    def __repr__(self):
        return f"ChainMap({self.source!r} -> {self.target!r})"


# -- basic constructions ---------------------------------------------------


def zero_complex(model: Model) -> Complex:
    return Complex(model, {}, {}, "0")


def identity(X: Complex) -> ChainMap:
    m = X.model
    comps = {}
    for n in X.degrees:
        labs = X.labels(n)
        arr = np.zeros((labs.size, labs.size, m.D), dtype=np.int64)
        arr[np.arange(labs.size), np.arange(labs.size)] = m.ident[labs]
        comps[n] = arr
    return ChainMap(X, X, comps)


def zero_map(X: Complex, Y: Complex) -> ChainMap:
    return ChainMap(X, Y, {})


def scalar_map(X: Complex, a) -> ChainMap:
    """Multiplication by ``a ∈ End(𝟙)`` on X."""
    m = X.model
    comps = {}
    for n in X.degrees:
        labs = X.labels(n)
        arr = np.zeros((labs.size, labs.size, m.D), dtype=np.int64)
        for k, u in enumerate(labs):
            arr[k, k] = m.scalar_entry(a, int(u))
        comps[n] = arr
    return ChainMap(X, X, comps)


def suspend(X: Complex, k: int = 1) -> Complex:
    """``Σ^k X``: terms shifted down by k, differential times (-1)^k."""
    if k == 0:
        return X
    sign = -1 if k % 2 else 1
    terms = {n - k: labs for n, labs in X.terms().items()}
    diffs = {n - k: sign * arr for n, arr in X.diffs().items()}
    name = f"Σ^{k}{X.name}" if X.name else ""
    return Complex(X.model, terms, diffs, name, check=False)


def suspend_map(f: ChainMap, k: int = 1) -> ChainMap:
    if k == 0:
        return f
    return ChainMap(suspend(f.source, k), suspend(f.target, k), {n - k: a for n, a in f.comps().items()})


def direct_sum(*objs: Complex, name: str = "") -> Complex:
    if not objs:
        raise UsageError("direct_sum needs at least one summand")
    m = objs[0].model
    degs = sorted(set().union(*[set(X.degrees) for X in objs]))
    terms = {n: np.concatenate([X.labels(n) for X in objs]) for n in degs}
    diffs = {}
    for n in degs:
        rows = sum(X.rank(n + 1) for X in objs)
        cols = sum(X.rank(n) for X in objs)
        if rows == 0 or cols == 0:
            continue
        arr = np.zeros((rows, cols, m.D), dtype=np.int64)
        r = c = 0
        for X in objs:
            arr[r : r + X.rank(n + 1), c : c + X.rank(n)] = X.d(n)
            r += X.rank(n + 1)
            c += X.rank(n)
        diffs[n] = arr
    if not name:
        name = "⊕".join(X.name or "?" for X in objs)
    return Complex(m, terms, diffs, name, check=False)


def sum_inclusion(objs: list[Complex], k: int, total: Optional[Complex] = None) -> ChainMap:
    """Inclusion of the k-th summand into ``direct_sum(*objs)``."""
    total = total or direct_sum(*objs)
    m = total.model
    comps = {}
    for n in total.degrees:
        off = sum(X.rank(n) for X in objs[:k])
        r = objs[k].rank(n)
        arr = np.zeros((total.rank(n), r, m.D), dtype=np.int64)
        arr[off + np.arange(r), np.arange(r)] = m.ident[objs[k].labels(n)]
        comps[n] = arr
    return ChainMap(objs[k], total, comps)


def sum_projection(objs: list[Complex], k: int, total: Optional[Complex] = None) -> ChainMap:
    total = total or direct_sum(*objs)
    inc = sum_inclusion(objs, k, total)
    return ChainMap(total, objs[k], {n: a.transpose(1, 0, 2) for n, a in inc.comps().items()})


def direct_sum_maps(maps: list[ChainMap], source: Optional[Complex] = None, target: Optional[Complex] = None) -> ChainMap:
    """Block-diagonal ``f_1 ⊕ ... ⊕ f_r``."""
    source = source or direct_sum(*[f.source for f in maps])
    target = target or direct_sum(*[f.target for f in maps])
    m = source.model
    comps = {}
    for n in set(source.degrees) & set(target.degrees):
        arr = np.zeros((target.rank(n), source.rank(n), m.D), dtype=np.int64)
        r = c = 0
        for f in maps:
            arr[r : r + f.target.rank(n), c : c + f.source.rank(n)] = f.comp(n)
            r += f.target.rank(n)
            c += f.source.rank(n)
        comps[n] = arr
    return ChainMap(source, target, comps)


def cone(f: ChainMap, name: str = "") -> Complex:
    """Mapping cone: ``cone^n = X^{n+1} ⊕ Y^n`` with d = [[-d_X, 0], [f, d_Y]]."""
    X, Y = f.source, f.target
    m = X.model
    degs = sorted(set(n - 1 for n in X.degrees) | set(Y.degrees))
    terms = {n: np.concatenate([X.labels(n + 1), Y.labels(n)]) for n in degs}
    diffs = {}
    for n in degs:
        xs, ys = X.rank(n + 1), Y.rank(n)
        xt, yt = X.rank(n + 2), Y.rank(n + 1)
        if xs + ys == 0 or xt + yt == 0:
            continue
        arr = np.zeros((xt + yt, xs + ys, m.D), dtype=np.int64)
        arr[:xt, :xs] = -X.d(n + 1)
        arr[xt:, :xs] = f.comp(n + 1)
        arr[xt:, xs:] = Y.d(n)
        diffs[n] = arr
    if not name:
        name = f"cone({X.name or '?'}→{Y.name or '?'})"
    return Complex(m, terms, diffs, name, check=False)


def cone_inclusion(f: ChainMap, C: Optional[Complex] = None) -> ChainMap:
    """The map ``Y -> cone(f)``."""
    X, Y = f.source, f.target
    C = C or cone(f)
    m = X.model
    comps = {}
    for n in Y.degrees:
        xs = X.rank(n + 1)
        arr = np.zeros((C.rank(n), Y.rank(n), m.D), dtype=np.int64)
        arr[xs + np.arange(Y.rank(n)), np.arange(Y.rank(n))] = m.ident[Y.labels(n)]
        comps[n] = arr
    return ChainMap(Y, C, comps)


def cone_projection(f: ChainMap, C: Optional[Complex] = None) -> ChainMap:
    """The map ``cone(f) -> ΣX``."""
    X = f.source
    C = C or cone(f)
    SX = suspend(X, 1)
    m = X.model
    comps = {}
    for n in SX.degrees:
        arr = np.zeros((SX.rank(n), C.rank(n), m.D), dtype=np.int64)
        r = SX.rank(n)
        arr[np.arange(r), np.arange(r)] = m.ident[SX.labels(n)]
        comps[n] = arr
    return ChainMap(C, SX, comps)


# -- tensor products ---------------------------------------------------------


class TensorLayout:
    """Bookkeeping for ``X ⊗ Y``: which summand pairs occupy which rows.

    ``blocks[n]`` lists ``(i, j, offset, keep)`` where ``keep`` is an index
    array into the ``rank_i(X) * rank_j(Y)`` pairs (row-major) that survive.
    """

    def __init__(self, X: Complex, Y: Complex):
        m = X.model
        self.blocks: dict[int, list] = {}
        self.terms: dict[int, np.ndarray] = {}
        degs = sorted({i + j for i in X.degrees for j in Y.degrees})
        for n in degs:
            entries = []
            labs = []
            off = 0
            for i in X.degrees:
                j = n - i
                if j not in Y.degrees:
                    continue
                t = m.tensor_table[np.ix_(X.labels(i), Y.labels(j))].reshape(-1)
                keep = np.flatnonzero(t >= 0)
                if keep.size == 0:
                    continue
                entries.append((i, j, off, keep))
                labs.append(t[keep])
                off += keep.size
            if entries:
                self.blocks[n] = entries
                self.terms[n] = np.concatenate(labs)

    def block(self, n: int, i: int):
        for (ii, j, off, keep) in self.blocks.get(n, []):
            if ii == i:
                return off, keep
        return None


def kron_blocks(model: Model, F: np.ndarray, G: np.ndarray, src_rows, src_cols) -> np.ndarray:
    """Entry-wise tensor of two block arrays, shape ``(r1*r2, c1*c2, D)``.

    ``src_rows``/``src_cols`` are the source labels of F and G (used to pick
    the multiplication constants of the tensor label).
    """
    r1, c1 = F.shape[:2]
    r2, c2 = G.shape[:2]
    if model.D == 1:
        return (np.kron(F[:, :, 0], G[:, :, 0]) % model.p)[:, :, None]
    t = model.tensor_table[np.ix_(np.asarray(src_rows), np.asarray(src_cols))]
    mult = model.mult[np.maximum(t, 0)]  # (c1, c2, D, D, D)
    out = np.einsum("ija,klb,jlabc->ikjlc", F, G, mult, optimize=True) % model.p
    return out.reshape(r1 * r2, c1 * c2, model.D)


def tensor(X: Complex, Y: Complex) -> Complex:
    """Total complex of ``X ⊗ Y`` with the Koszul sign ``(-1)^i`` on ``1 ⊗ d_Y``.

    Requires tensor products of indecomposable projectives to be projective
    (always true for the algebra backend, and for posets with joins); the
    poset backend replaces other tensors before calling this.
    """
    m = X.model
    if Y.model is not m:
        raise UsageError("tensor of complexes from different models")
    cache = m._cache.setdefault("tensor", {})
    key = (X.key, Y.key)
    if key in cache:
        return cache[key][0]
    if not m.projective_tensor:
        T = m.replaced_tensor(X, Y)
        cache[key] = (T, X, Y)
        return T
    layout = TensorLayout(X, Y)
    diffs = {}
    for n, entries in layout.blocks.items():
        if n + 1 not in layout.blocks:
            continue
        rows = layout.terms[n + 1].size
        cols = layout.terms[n].size
        arr = np.zeros((rows, cols, m.D), dtype=np.int64)
        for (i, j, off, keep) in entries:
            # d_X ⊗ 1 : (i, j) -> (i+1, j)
            tgt = layout.block(n + 1, i + 1)
            if tgt is not None and X.rank(i + 1):
                toff, tkeep = tgt
                blk = kron_blocks(m, X.d(i), identity_block(m, Y.labels(j)), X.labels(i), Y.labels(j))
                arr[toff : toff + tkeep.size, off : off + keep.size] += blk[np.ix_(tkeep, keep)]
            # (-1)^i 1 ⊗ d_Y : (i, j) -> (i, j+1)
            tgt = layout.block(n + 1, i)
            if tgt is not None and Y.rank(j + 1):
                toff, tkeep = tgt
                blk = kron_blocks(m, identity_block(m, X.labels(i)), Y.d(j), X.labels(i), Y.labels(j))
                sign = -1 if i % 2 else 1
                arr[toff : toff + tkeep.size, off : off + keep.size] += sign * blk[np.ix_(tkeep, keep)]
        diffs[n] = arr % m.p
    name = f"{X.name or '?'}⊗{Y.name or '?'}"
    T = Complex(m, layout.terms, diffs, name, check=False)
    T._layout = (X, Y, layout)
    cache[key] = (T, X, Y)
    return T


def identity_block(model: Model, labels) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.int64)
    arr = np.zeros((labels.size, labels.size, model.D), dtype=np.int64)
    arr[np.arange(labels.size), np.arange(labels.size)] = model.ident[labels]
    return arr


def tensor_maps(f: ChainMap, g: ChainMap) -> ChainMap:
    """``f ⊗ g : X ⊗ Y -> X' ⊗ Y'`` for degree-0 chain maps (no Koszul sign)."""
    m = f.model
    if not m.projective_tensor:
        return m.replaced_tensor_maps(f, g)
    S = tensor(f.source, g.source)
    T = tensor(f.target, g.target)
    _, _, ls = S._layout
    _, _, lt = T._layout
    comps = {}
    for n, entries in ls.blocks.items():
        if n not in lt.blocks:
            continue
        arr = np.zeros((T.rank(n), S.rank(n), m.D), dtype=np.int64)
        nonzero = False
        for (i, j, off, keep) in entries:
            tgt = lt.block(n, i)
            if tgt is None:
                continue
            fi, gj = f.comp(i), g.comp(j)
            if not np.any(fi) or not np.any(gj):
                continue
            toff, tkeep = tgt
            blk = kron_blocks(m, fi, gj, f.source.labels(i), g.source.labels(j))
            arr[toff : toff + tkeep.size, off : off + keep.size] = blk[np.ix_(tkeep, keep)]
            nonzero = True
        if nonzero:
            comps[n] = arr
    return ChainMap(S, T, comps)


def tensor_power(X: Complex, n: int) -> Complex:
    if n < 1:
        raise UsageError("tensor power needs n >= 1")
    out = X
    for _ in range(n - 1):
        out = tensor(out, X)
    return out


def suspension_iso_left(X: Complex, Y: Complex, k: int) -> ChainMap:
    """``Σ^k(X ⊗ Y) -> Σ^k X ⊗ Y``; the identity on matching summands."""
    if not X.model.projective_tensor:
        return X.model.replaced_suspension_iso(X, Y, k, left=True)
    T = tensor(X, Y)
    return _diagonal_sign_map(T, k, tensor(suspend(X, k), Y), lambda i: 1)


def suspension_iso_right(X: Complex, Y: Complex, k: int) -> ChainMap:
    """``Σ^k(X ⊗ Y) -> X ⊗ Σ^k Y``; the sign ``(-1)^{ik}`` on ``X^i ⊗ Y^j``."""
    if not X.model.projective_tensor:
        return X.model.replaced_suspension_iso(X, Y, k, left=False)
    T = tensor(X, Y)
    return _diagonal_sign_map(T, k, tensor(X, suspend(Y, k)), lambda i: -1 if (i * k) % 2 else 1)


def _diagonal_sign_map(T: Complex, k: int, tgt: Complex, sign_of_i) -> ChainMap:
    """Diagonal map ``Σ^k T -> tgt`` where both list the same summands.

    The sign is a function of the first-factor degree ``i`` of the summand
    ``X^i ⊗ Y^j`` of ``T``.
    """
    m = T.model
    src = suspend(T, k)
    _, _, layout = T._layout
    comps = {}
    for n in src.degrees:
        r = src.rank(n)
        if tgt.rank(n) != r:
            raise UsageError("suspension isomorphism: summand counts differ")
        arr = np.zeros((r, r, m.D), dtype=np.int64)
        labs = src.labels(n)
        for (i, j, off, keep) in layout.blocks.get(n + k, []):
            idx = off + np.arange(keep.size)
            arr[idx, idx] = sign_of_i(i) * m.ident[labs[idx]]
        comps[n] = arr % m.p
    return ChainMap(src, tgt, comps)
