"""Chain maps up to homotopy: hom spaces, null-homotopy, minimal models.

A degree-0 map ``X -> Y`` is a tuple of blocks ``f^n``; only coordinates
permitted by the model's hom masks are unknowns.  The chain condition and
the homotopy map ``h ↦ d h + h d`` are assembled as explicit matrices over
F_p, so ``[X, Y]`` is computed as cycles modulo boundaries.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from ..errors import ConsistencyError, UnsupportedError, UsageError
from ..linalg import LinearSolver, kernel_array, rank_array, rref_array
from .split import split_summands
from .core import (
    ChainMap,
    Complex,
    Model,
    compose_blocks,
    identity,
    suspend,
)


class BlockLayout:
    """Flattening of a family of blocks to the vector of their free coordinates."""

    def __init__(self, model: Model, blocks):
        self.model = model
        self.keys = []
        self.shapes = {}
        self.positions = {}
        start = 0
        for key, rows, cols in blocks:
            mask = model.block_mask(rows, cols)
            pos = np.flatnonzero(mask.reshape(-1))
            if pos.size == 0:
                continue
            self.keys.append(key)
            self.shapes[key] = mask.shape
            self.positions[key] = (start, pos)
            start += pos.size
        self.size = start

    def flatten(self, arrays: dict) -> np.ndarray:
        v = np.zeros(self.size, dtype=np.int64)
        for key in self.keys:
            if key in arrays:
                s, pos = self.positions[key]
                v[s : s + pos.size] = np.asarray(arrays[key]).reshape(-1)[pos]
        return v

    def unflatten(self, v: np.ndarray) -> dict:
        out = {}
        for key in self.keys:
            s, pos = self.positions[key]
            arr = np.zeros(int(np.prod(self.shapes[key])), dtype=np.int64)
            arr[pos] = v[s : s + pos.size]
            out[key] = arr.reshape(self.shapes[key])
        return out

    def leaked(self, arrays: dict) -> bool:
        """Whether some block has entries outside the permitted coordinates."""
        for key, arr in arrays.items():
            arr = np.asarray(arr)
            if not np.any(arr):
                continue
            if key not in self.positions:
                return True
            s, pos = self.positions[key]
            flat = arr.reshape(-1).copy()
            flat[pos] = 0
            if np.any(flat):
                return True
        return False


def left_operator(model: Model, outer: np.ndarray, mid_labels, ncols: int) -> np.ndarray:
    """Matrix of ``U ↦ outer ∘ U`` on flattened ``(m, ncols, D)`` arrays."""
    t, m = outer.shape[:2]
    D = model.D
    if D == 1:
        return np.kron(outer[:, :, 0], np.eye(ncols, dtype=np.int64))
    mult = model.mult[np.asarray(mid_labels, dtype=np.int64)]
    # result[t, s, c] = sum_{m,a,b} outer[t,m,a] U[m,s,b] mult[m,a,b,c]
    core = np.einsum("tma,mabc->tcmb", outer, mult, optimize=True) % model.p
    eye = np.eye(ncols, dtype=np.int64)
    op = np.einsum("tcmb,sr->tscmrb", core, eye)
    return op.reshape(t * ncols * D, m * ncols * D)


def right_operator(model: Model, inner: np.ndarray, mid_labels, nrows: int) -> np.ndarray:
    """Matrix of ``U ↦ U ∘ inner`` on flattened ``(nrows, m, D)`` arrays."""
    m, s = inner.shape[:2]
    D = model.D
    if D == 1:
        return np.kron(np.eye(nrows, dtype=np.int64), inner[:, :, 0].T)
    mult = model.mult[np.asarray(mid_labels, dtype=np.int64)]
    # result[o, s, c] = sum_{m,a,b} U[o,m,a] inner[m,s,b] mult[m,a,b,c]
    core = np.einsum("msb,mabc->scma", inner, mult, optimize=True) % model.p
    eye = np.eye(nrows, dtype=np.int64)
    op = np.einsum("scma,or->oscrma", core, eye)
    return op.reshape(nrows * s * D, nrows * m * D)


def _select(op: np.ndarray, rows: BlockLayout, rkey, cols: BlockLayout, ckey) -> Optional[np.ndarray]:
    if rkey not in rows.positions or ckey not in cols.positions:
        return None
    _, rpos = rows.positions[rkey]
    _, cpos = cols.positions[ckey]
    return op[np.ix_(rpos, cpos)]


def _place(M: np.ndarray, rows: BlockLayout, rkey, cols: BlockLayout, ckey, block, sign=1):
    if block is None:
        return
    rs, rpos = rows.positions[rkey]
    cs, cpos = cols.positions[ckey]
    M[rs : rs + rpos.size, cs : cs + cpos.size] += sign * block


def map_layout(X: Complex, Y: Complex, shift: int = 0) -> BlockLayout:
    """Blocks ``X^n -> Y^{n+shift}``."""
    m = X.model
    blocks = []
    for n in X.degrees:
        if Y.rank(n + shift):
            blocks.append((n, Y.labels(n + shift), X.labels(n)))
    return BlockLayout(m, blocks)


def chain_operator(X: Complex, Y: Complex, F: BlockLayout, E: BlockLayout) -> np.ndarray:
    """Matrix of ``f ↦ d_Y f - f d_X`` from F-blocks to E-blocks."""
    m = X.model
    M = np.zeros((E.size, F.size), dtype=np.int64)
    for n in E.keys:
        # E block n is X^n -> Y^{n+1}
        if n in F.positions:
            op = left_operator(m, Y.d(n), Y.labels(n), X.rank(n))
            _place(M, E, n, F, n, _select(op, E, n, F, n))
        if n + 1 in F.positions:
            op = right_operator(m, X.d(n), X.labels(n + 1), Y.rank(n + 1))
            _place(M, E, n, F, n + 1, _select(op, E, n, F, n + 1), sign=-1)
    return M % m.p


def homotopy_operator(X: Complex, Y: Complex, F: BlockLayout, H: BlockLayout) -> np.ndarray:
    """Matrix of ``h ↦ d_Y h + h d_X`` from H-blocks (X^n -> Y^{n-1}) to F-blocks."""
    m = X.model
    M = np.zeros((F.size, H.size), dtype=np.int64)
    for n in F.keys:
        if n in H.positions:
            op = left_operator(m, Y.d(n - 1), Y.labels(n - 1), X.rank(n))
            _place(M, F, n, H, n, _select(op, F, n, H, n))
        if n + 1 in H.positions:
            op = right_operator(m, X.d(n), X.labels(n + 1), Y.rank(n))
            _place(M, F, n, H, n + 1, _select(op, F, n, H, n + 1))
    return M % m.p


# dense exact linear algebra beyond this many matrix entries is refused
MAX_ENTRIES = 60_000_000


def check_size(rows: int, cols: int):
    if rows * cols > MAX_ENTRIES:
        raise UnsupportedError(
            f"hom-space computation too large ({rows} x {cols} dense system); "
            "reduce the depth or the object"
        )


class HomSpace:
    """``[X, Y]``: degree-0 chain maps modulo null-homotopic ones.

    ``basis`` holds chain maps whose classes form a basis; ``coords(f)``
    expresses any chain map in it.  This is the dense solver; use
    ``hom_space`` to get the cached, summand-wise version.
    """

    def __init__(self, X: Complex, Y: Complex):
        if X.model is not Y.model:
            raise UsageError("hom space between different models")
        self.source, self.target = X, Y
        self.model = m = X.model
        p = m.p
        self.F = F = map_layout(X, Y, 0)
        E = map_layout(X, Y, 1)
        H = map_layout(X, Y, -1)
        check_size(F.size, E.size + H.size + 2 * F.size)
        C = chain_operator(X, Y, F, E)
        Hop = homotopy_operator(X, Y, F, H)
        K = kernel_array(C, p) if E.size else np.eye(F.size, dtype=np.int64)
        nb = Hop.shape[1]
        aug = np.concatenate([Hop, K, np.eye(F.size, dtype=np.int64)], axis=1)
        red, pivots = rref_array(aug, p)
        width = nb + K.shape[1]
        piv = [c for c in pivots if c < width]
        self._rank = len(piv)
        self._transform = red[:, width:]
        # rows of the transform giving coordinates along K-part pivots
        self._rep_rows = [r for r, c in enumerate(piv) if c >= nb]
        reps = [K[:, c - nb] for c in piv if c >= nb]
        self.dim = len(reps)
        self._reps = np.array(reps, dtype=np.int64).T.reshape(F.size, self.dim)
        self._basis = None
        self._C = C

    @property
    def basis(self) -> list[ChainMap]:
        if self._basis is None:
            self._basis = [ChainMap(self.source, self.target, self.F.unflatten(self._reps[:, i])) for i in range(self.dim)]
        return self._basis

    def vector(self, f: ChainMap) -> np.ndarray:
        if f.source != self.source or f.target != self.target:
            raise UsageError("map does not belong to this hom space")
        comps = f.comps()
        if self.F.leaked(comps):
            raise UsageError("map has entries outside the hom masks")
        return self.F.flatten(comps)

    def coords_of_vectors(self, V: np.ndarray) -> np.ndarray:
        """Coordinates for each column of flattened maps ``V``."""
        p = self.model.p
        if self._C.size and np.any((self._C @ V) % p):
            raise ConsistencyError("argument is not a chain map")
        y = (self._transform @ V) % p
        if np.any(y[self._rank :]):
            raise ConsistencyError("chain map outside cycles + boundaries")
        return y[self._rep_rows]

    def coords(self, f: ChainMap) -> np.ndarray:
        """Coordinates of the class of ``f`` in ``basis``."""
        return self.coords_of_vectors(self.vector(f)[:, None])[:, 0]

    def is_null(self, f: ChainMap) -> bool:
        return not np.any(self.coords(f))

    def from_coords(self, c) -> ChainMap:
        v = (self._reps @ np.asarray(c, dtype=np.int64)) % self.model.p
        return ChainMap(self.source, self.target, self.F.unflatten(v))

    def rebind(self, X: Complex, Y: Complex) -> "HomSpace":
        out = object.__new__(type(self))
        out.__dict__.update(self.__dict__)
        out.source, out.target = X, Y
        out._basis = None
        return out


# -- direct-sum decompositions --------------------------------------------------


def summand_components(X: Complex) -> list[list[tuple[int, int]]]:
    """Connected components of the graph of nonzero differential entries.

    Each component spans a direct summand of X; summands are returned as
    sorted lists of ``(degree, index)``.
    """
    degs = X.degrees
    offset, start = {}, 0
    for n in degs:
        offset[n] = start
        start += X.rank(n)
    parent = list(range(start))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for n, arr in X.diffs().items():
        rows, cols = np.nonzero(np.any(arr != 0, axis=2))
        for r, c in zip(rows.tolist(), cols.tolist()):
            a, b = find(offset[n + 1] + r), find(offset[n] + c)
            if a != b:
                parent[max(a, b)] = min(a, b)
    groups: dict = {}
    for n in degs:
        for i in range(X.rank(n)):
            groups.setdefault(find(offset[n] + i), []).append((n, i))
    return sorted(groups.values())


def _component_complex(X: Complex, comp, shift: int) -> Complex:
    """The summand on ``comp``, with degrees lowered by ``shift`` (no signs)."""
    idx: dict = {}
    for n, i in comp:
        idx.setdefault(n, []).append(i)
    terms = {n - shift: X.labels(n)[ix] for n, ix in idx.items()}
    diffs = {}
    for n, ix in idx.items():
        if n + 1 in idx and n in X.diffs():
            block = X.d(n)[np.ix_(idx[n + 1], ix)]
            if np.any(block):
                diffs[n - shift] = block
    return Complex(X.model, terms, diffs, check=False)


class _Isotypic:
    """Summands of one complex grouped by (structure, lowest degree)."""

    def __init__(self, X: Complex):
        self.groups = {}
        for comp in summand_components(X):
            lo = comp[0][0]
            C = _component_complex(X, comp, lo)
            key = (C.key, lo)
            if key not in self.groups:
                self.groups[key] = (C, lo, {})
            per_degree = self.groups[key][2]
            for n, i in comp:
                per_degree.setdefault(n, []).append(i)
        # per degree, an array (copies, rank of the summand in that degree)
        self.index = {}
        for key, (C, lo, per_degree) in self.groups.items():
            self.index[key] = {n: np.array(v, dtype=np.int64).reshape(-1, C.rank(n - lo)) for n, v in per_degree.items()}

    def copies(self, key) -> int:
        return next(iter(self.index[key].values())).shape[0]


class DecomposedHomSpace:
    """``[X, Y]`` assembled from hom spaces between summands.

    Summands with the same structure in the same degrees share one dense
    computation, and coordinates are computed for all copies at once.
    The basis is ordered by summand-type pair, then target copy, source
    copy and finally the basis of the pair.
    """

    def __init__(self, X: Complex, Y: Complex):
        self.source, self.target = X, Y
        self.model = X.model
        self._sx, self._sy = _Isotypic(X), _Isotypic(Y)
        self.blocks = []
        start = 0
        for kx, (CX, ax, _) in self._sx.groups.items():
            for ky, (CY, ay, _) in self._sy.groups.items():
                if CX.hi + ax < CY.lo + ay - 1 or CY.hi + ay < CX.lo + ax - 1:
                    continue
                c = min(ax, ay)
                hs = hom_space(_shifted(CX, ax - c), _shifted(CY, ay - c))
                if hs.dim == 0:
                    continue
                nx, ny = self._sx.copies(kx), self._sy.copies(ky)
                self.blocks.append((kx, ky, c, hs, start, nx, ny))
                start += nx * ny * hs.dim
        self.dim = start
        self._basis = None

    def _block_vectors(self, f: ChainMap, kx, ky, c, hs) -> np.ndarray:
        """Flattened restrictions of f to every (target copy, source copy) pair."""
        ix, iy = self._sx.index[kx], self._sy.index[ky]
        nx, ny = self._sx.copies(kx), self._sy.copies(ky)
        parts = []
        for n in hs.F.keys:
            N = n + c
            cols, rows = ix[N], iy[N]
            comp = f.comp(N)
            block = comp[rows[:, :, None, None], cols[None, None, :, :]]
            block = block.transpose(0, 2, 1, 3, 4).reshape(ny * nx, -1)
            _, pos = hs.F.positions[n]
            parts.append(block[:, pos])
        return np.concatenate(parts, axis=1).T

    def coords(self, f: ChainMap) -> np.ndarray:
        if f.source != self.source or f.target != self.target:
            raise UsageError("map does not belong to this hom space")
        out = np.zeros(self.dim, dtype=np.int64)
        for kx, ky, c, hs, start, nx, ny in self.blocks:
            V = self._block_vectors(f, kx, ky, c, hs)
            out[start : start + nx * ny * hs.dim] = hs.coords_of_vectors(V).T.reshape(-1)
        return out

    def is_null(self, f: ChainMap) -> bool:
        return not np.any(self.coords(f))

    def from_coords(self, c) -> ChainMap:
        X, Y = self.source, self.target
        m = self.model
        c = np.asarray(c, dtype=np.int64)
        comps = {n: np.zeros((Y.rank(n), X.rank(n), m.D), dtype=np.int64) for n in X.degrees if Y.rank(n)}
        for kx, ky, sh, hs, start, nx, ny in self.blocks:
            coeff = c[start : start + nx * ny * hs.dim].reshape(ny * nx, hs.dim)
            if not np.any(coeff):
                continue
            vals = (coeff @ hs._reps.T) % m.p
            ix, iy = self._sx.index[kx], self._sy.index[ky]
            for n in hs.F.keys:
                N = n + sh
                s0, pos = hs.F.positions[n]
                shape = hs.F.shapes[n]
                flat = np.zeros((ny * nx, int(np.prod(shape))), dtype=np.int64)
                flat[:, pos] = vals[:, s0 : s0 + pos.size]
                block = flat.reshape(ny, nx, *shape).transpose(0, 2, 1, 3, 4)
                rows, cols = iy[N], ix[N]
                comps[N][rows[:, :, None, None], cols[None, None, :, :]] += block
        return ChainMap(X, Y, {n: a % m.p for n, a in comps.items()})

    @property
    def basis(self) -> list[ChainMap]:
        if self._basis is None:
            eye = np.eye(self.dim, dtype=np.int64)
            self._basis = [self.from_coords(eye[i]) for i in range(self.dim)]
        return self._basis

    def rebind(self, X: Complex, Y: Complex) -> "DecomposedHomSpace":
        out = object.__new__(type(self))
        out.__dict__.update(self.__dict__)
        out.source, out.target = X, Y
        out._basis = None
        return out


def _shifted(C: Complex, s: int) -> Complex:
    """C with degrees raised by s and unchanged differentials."""
    if s == 0:
        return C
    return Complex(C.model, {n + s: C.labels(n) for n in C.degrees}, {n + s: a for n, a in C.diffs().items()}, check=False)


def hom_space(X: Complex, Y: Complex):
    """``[X, Y]``, cached on the model by the pair of complexes.

    Complexes that split into several summands are handled summand-wise.
    """
    if X.model is not Y.model:
        raise UsageError("hom space between different models")
    cache = X.model._cache.setdefault("hom", {})
    key = (X.key, Y.key)
    if key not in cache:
        if len(summand_components(X)) > 1 or len(summand_components(Y)) > 1:
            hs = DecomposedHomSpace(X, Y)
        else:
            hs = HomSpace(X, Y)
        cache[key] = (hs, X, Y)
    hs, X0, Y0 = cache[key]
    if X0 is X and Y0 is Y:
        return hs
    return hs.rebind(X, Y)


def hom_dim(X: Complex, Y: Complex, k: int = 0) -> int:
    """``dim [Σ^k X, Y]``, the degree-k maps from X to Y."""
    return hom_space(suspend(X, k), Y).dim


def is_nullhomotopic(f: ChainMap) -> bool:
    X, Y = f.source, f.target
    m = f.model
    if len(summand_components(X)) > 1 or len(summand_components(Y)) > 1:
        return hom_space(X, Y).is_null(f)
    F = map_layout(X, Y, 0)
    H = map_layout(X, Y, -1)
    comps = f.comps()
    if F.leaked(comps):
        raise UsageError("map has entries outside the hom masks")
    v = F.flatten(comps)
    if not np.any(v):
        return True
    if H.size == 0:
        return False
    Hop = homotopy_operator(X, Y, F, H)
    return LinearSolver(Hop, m.p).solve(v) is not None


def is_zero(X: Complex) -> bool:
    """Whether X is contractible (zero in the homotopy category)."""
    if X.is_trivially_zero():
        return True
    return is_nullhomotopic(identity(X))


class Reduction:
    """A homotopy equivalence ``small ⇄ big`` with ``proj ∘ incl = id``."""

    def __init__(self, big: Complex, small: Complex, incl: ChainMap, proj: ChainMap):
        self.big = big
        self.small = small
        self.incl = incl
        self.proj = proj


def _find_iso_entry(model: Model, terms, diffs):
    for n in sorted(diffs):
        arr = diffs[n]
        rows, cols = terms[n + 1], terms[n]
        same = rows[:, None] == cols[None, :]
        hit = np.argwhere(same & (arr[:, :, 0] != 0))
        if hit.size:
            i, j = hit[0]
            return n, int(i), int(j)
    return None


def minimize(X: Complex) -> Reduction:
    """Cancel isomorphism entries of the differential (Gaussian elimination).

    The result has no differential entry that is an isomorphism between
    indecomposables; it is the minimal complex homotopy equivalent to X.
    """
    m = X.model
    cache = m._cache.setdefault("minimize", {})
    if X.key in cache:
        return cache[X.key][0]
    terms = {n: X.labels(n).copy() for n in X.degrees}
    diffs = {n: X.d(n).copy() for n in X.diffs()}
    # incl: small -> X and proj: X -> small, kept as component dicts
    incl = {n: identity(X).comp(n) for n in X.degrees}
    proj = {n: identity(X).comp(n) for n in X.degrees}
    p = m.p
    while True:
        hit = _find_iso_entry(m, terms, diffs)
        if hit is None:
            break
        n, i, j = hit
        u = int(terms[n][j])
        d = diffs[n]
        phi_inv = m.entry_inverse(u, d[i, j])[None, None, :]
        rows_keep = np.array([r for r in range(d.shape[0]) if r != i], dtype=np.int64)
        cols_keep = np.array([c for c in range(d.shape[1]) if c != j], dtype=np.int64)
        delta = d[i : i + 1][:, cols_keep]  # b-row, B-cols
        gamma = d[rows_keep][:, j : j + 1]  # C'-rows, b-col
        eps = d[np.ix_(rows_keep, cols_keep)]
        lab_u = np.array([u], dtype=np.int64)
        g_phi = compose_blocks(m, gamma, phi_inv, lab_u)  # γ φ^{-1}
        phi_d = compose_blocks(m, phi_inv, delta, lab_u)  # φ^{-1} δ
        new_d = (eps - compose_blocks(m, g_phi, delta, lab_u)) % p
        # step maps
        #   proj_step^n: [0 | 1] on columns (b, B); proj_step^{n+1}: [-γφ^{-1} | 1]
        #   incl_step^n: [-φ^{-1}δ ; 1];          incl_step^{n+1}: [0 ; 1]
        new_terms = dict(terms)
        new_terms[n] = terms[n][cols_keep]
        new_terms[n + 1] = terms[n + 1][rows_keep]
        new_diffs = dict(diffs)
        new_diffs[n] = new_d
        if n - 1 in diffs:
            new_diffs[n - 1] = diffs[n - 1][cols_keep]
        if n + 1 in diffs:
            new_diffs[n + 1] = diffs[n + 1][:, rows_keep]
        # update accumulated maps
        if n in proj:
            proj[n] = proj[n][cols_keep]
        if n + 1 in proj:
            old = proj[n + 1]
            proj[n + 1] = (old[rows_keep] - compose_blocks(m, g_phi, old[i : i + 1], lab_u)) % p
        if n in incl:
            old = incl[n]
            # old: X^n <- small^n with small^n = (b, B); new small^n = B
            incl[n] = (old[:, cols_keep] - compose_blocks(m, old[:, j : j + 1], phi_d, lab_u)) % p
        if n + 1 in incl:
            incl[n + 1] = incl[n + 1][:, rows_keep]
        terms, diffs = new_terms, new_diffs
        for k in list(terms):
            if terms[k].size == 0:
                del terms[k]
        diffs = {k: v for k, v in diffs.items() if v.size and np.any(v)}
    small = Complex(m, terms, diffs, f"min({X.name})" if X.name else "", check=False)
    inc = ChainMap(small, X, {n: a for n, a in incl.items() if small.rank(n)})
    prj = ChainMap(X, small, {n: a for n, a in proj.items() if small.rank(n)})
    split = split_summands(small)
    if split is not None:
        small, s_incl, s_proj = split
        inc, prj = inc @ s_incl, s_proj @ prj
    red = Reduction(X, small, inc, prj)
    cache[X.key] = (red, X)
    return red


def find_isomorphism(X: Complex, Y: Complex) -> Optional[ChainMap]:
    """Some homotopy equivalence ``X -> Y`` between minimal complexes, or None.

    Minimal complexes are homotopy equivalent exactly when they are
    isomorphic, and a degree-0 map between them is an isomorphism iff each
    component reduces to an invertible matrix over the residue fields.
    The search tries basis maps first and then small combinations.
    """
    if X.is_trivially_zero() and Y.is_trivially_zero():
        return ChainMap(X, Y, {})
    if sorted(X.degrees) != sorted(Y.degrees):
        return None
    for n in X.degrees:
        if sorted(X.labels(n).tolist()) != sorted(Y.labels(n).tolist()):
            return None
    hs = hom_space(X, Y)
    m = X.model
    rng = np.random.default_rng(0)
    candidates = list(hs.basis)
    for _ in range(64):
        c = rng.integers(0, m.p, size=hs.dim)
        candidates.append(hs.from_coords(c))
    for f in candidates:
        if _is_iso_on_residues(f):
            return f
    return None


def _is_iso_on_residues(f: ChainMap) -> bool:
    m = f.model
    for n in f.source.degrees:
        a = f.comp(n)[:, :, 0]
        if a.shape[0] != a.shape[1] or rank_array(a, m.p) < a.shape[0]:
            return False
        # blocks between different labels vanish on residues; rank suffices
    return True


# -- evaluation at points ------------------------------------------------------


def evaluate(X: Complex, q: int) -> tuple[dict, dict]:
    """The complex of F_p-vector spaces obtained at point ``q``.

    Returns ``(dims, diffs)`` with ``diffs[n]`` an integer matrix.
    """
    m = X.model
    keep = {n: np.flatnonzero(m.fiber[q][X.labels(n)]) for n in X.degrees}
    dims = {n: int(k.size) for n, k in keep.items() if k.size}
    diffs = {}
    for n in dims:
        if n + 1 in dims:
            diffs[n] = X.d(n)[np.ix_(keep[n + 1], keep[n])][:, :, 0] % m.p
    return dims, diffs


def evaluate_map(f: ChainMap, q: int) -> dict:
    m = f.model
    out = {}
    for n in set(f.source.degrees) & set(f.target.degrees):
        ks = np.flatnonzero(m.fiber[q][f.source.labels(n)])
        kt = np.flatnonzero(m.fiber[q][f.target.labels(n)])
        if ks.size and kt.size:
            out[n] = f.comp(n)[np.ix_(kt, ks)][:, :, 0] % m.p
    return out


def homology_dims(X: Complex, q: int) -> dict:
    dims, diffs = evaluate(X, q)
    p = X.model.p
    ranks = {n: rank_array(a, p) for n, a in diffs.items()}
    out = {}
    for n, dn in dims.items():
        h = dn - ranks.get(n, 0) - ranks.get(n - 1, 0)
        if h:
            out[n] = h
    return out


def is_acyclic_at(X: Complex, q: int) -> bool:
    return not homology_dims(X, q)


def support(X: Complex) -> list[str]:
    """Names of the points where X does not vanish."""
    m = X.model
    return [m.points[q] for q in range(len(m.points)) if not is_acyclic_at(X, q)]


def induced_on_homology(f: ChainMap, q: int) -> dict:
    """Matrices of ``H^n(f)`` at point q, for f an endomorphism.

    Bases of homology are chosen as complements of boundaries inside cycles.
    """
    if f.source != f.target:
        raise UsageError("induced_on_homology expects an endomorphism")
    X = f.source
    p = X.model.p
    dims, diffs = evaluate(X, q)
    fm = evaluate_map(f, q)
    out = {}
    for n, dn in dims.items():
        dout = diffs.get(n, np.zeros((0, dn), dtype=np.int64))
        Z = kernel_array(dout, p) if dout.size else np.eye(dn, dtype=np.int64)
        din = diffs.get(n - 1)
        B = din % p if din is not None else np.zeros((dn, 0), dtype=np.int64)
        aug = np.concatenate([B, Z], axis=1)
        _, piv = rref_array(aug, p)
        reps = [c - B.shape[1] for c in piv if c >= B.shape[1]]
        if not reps:
            continue
        R = Z[:, reps]
        basis = np.concatenate([B[:, [c for c in piv if c < B.shape[1]]], R], axis=1)
        solver = LinearSolver(basis, p)
        fn = fm.get(n, np.zeros((dn, dn), dtype=np.int64))
        img = (fn @ R) % p
        x, ok = solver.solve_many(img)
        if not np.all(ok):
            raise ConsistencyError("map does not preserve cycles")
        nb = basis.shape[1] - R.shape[1]
        out[n] = x[nb:] % p
    return out
