"""Perfect complexes over a split finite-dimensional commutative algebra.

``A`` decomposes as a product of local factors ``A e_i``, so every free
module is a sum of the indecomposable projectives ``P_i = A e_i``.  Each
``P_i`` uses the basis ``e_i`` followed by a basis of ``N e_i`` (N the
nilradical); coordinate 0 is then the residue at the i-th prime.
``Hom(P_i, P_j)`` is ``A e_i`` when ``i = j`` and zero otherwise.
"""

from __future__ import annotations

import numpy as np

from ..errors import UsageError
from ..linalg import LinearSolver, image_basis_array
from ..rings import FinCommAlgebra, _nilradical_basis, spec
from .core import ChainMap, Complex, Model


class AlgebraModel(Model):
    """``D^perf(A)`` for a split finite commutative algebra ``A``."""

    kind = "algebra"
    rigid = True

    def __init__(self, algebra: FinCommAlgebra, name: str = ""):
        self.algebra = A = algebra
        self.p = p = A.p
        _, primes = spec(A)
        self.primes = primes
        nil = _nilradical_basis(A)
        bases, solvers = [], []
        for q in primes:
            e = q.idempotent
            if nil.shape[1]:
                ne = (A.mult_matrix(e) @ nil) % p
                ne = image_basis_array(ne, p)
            else:
                ne = np.zeros((A.dim, 0), dtype=np.int64)
            basis = np.column_stack([e, ne]) % p
            bases.append(basis)
            solvers.append(LinearSolver(basis, p))
        self.local_bases = bases
        self._solvers = solvers
        L = len(primes)
        D = max((b.shape[1] for b in bases), default=1)
        mult = np.zeros((L, D, D, D), dtype=np.int64)
        hom_mask = np.zeros((L, L, D), dtype=bool)
        for i, b in enumerate(bases):
            d = b.shape[1]
            hom_mask[i, i, :d] = True
            for a in range(d):
                for c in range(d):
                    mult[i, a, c, :d] = self._coords(i, A.mul(b[:, a], b[:, c]))
        table = np.full((L, L), -1, dtype=np.int64)
        for i in range(L):
            table[i, i] = i
        labels = [q.label for q in primes]
        super().__init__(p, labels, D, mult, hom_mask, table, labels, np.eye(L, dtype=bool), name or A.name or "algebra")

    def _coords(self, i: int, a: np.ndarray) -> np.ndarray:
        x = self._solvers[i].solve(np.asarray(a, dtype=np.int64) % self.p)
        if x is None:
            raise UsageError("element does not lie in the local factor")
        return x

    def describe(self) -> dict:
        A = self.algebra
        out = {"kind": self.kind, "char": self.p, "dim": A.dim}
        if A.presentation is not None:
            out["presentation"] = A.presentation.text
        return out

    # -- entries and elements ----------------------------------------------
    def scalar_entry(self, a, u: int) -> np.ndarray:
        A = self.algebra
        a = A.vec(a)
        out = np.zeros(self.D, dtype=np.int64)
        e = self.primes[u].idempotent
        c = self._coords(u, A.mul(a, e))
        out[: c.size] = c
        return out

    def entry_element(self, u: int, x: np.ndarray) -> np.ndarray:
        """The element of A represented by entry coordinates on ``P_u``."""
        b = self.local_bases[u]
        return (b @ np.asarray(x)[: b.shape[1]]) % self.p

    def unit_endomorphism_algebra(self) -> FinCommAlgebra:
        return self.algebra

    # -- objects -------------------------------------------------------------
    def unit(self) -> Complex:
        cached = self._cache.get("unit")
        if cached is None:
            cached = Complex(self, {0: list(range(len(self.labels)))}, {}, "𝟙")
            self._cache["unit"] = cached
        return cached

    def free_complex(self, ranks: dict, diffs: dict, name: str = "") -> Complex:
        """A complex of free modules ``A^r`` with matrices of elements of A.

        ``diffs[n]`` is a ``ranks[n+1] x ranks[n]`` grid of algebra elements
        (coordinate vectors).  Each ``A`` splits as ``P_1 ⊕ ... ⊕ P_L``.
        """
        L = len(self.labels)
        A = self.algebra
        terms = {n: [i for _ in range(int(r)) for i in range(L)] for n, r in ranks.items() if int(r)}
        out = {}
        for n, grid in diffs.items():
            rows, cols = int(ranks.get(n + 1, 0)), int(ranks.get(n, 0))
            if rows == 0 or cols == 0:
                continue
            if len(grid) != rows or any(len(r) != cols for r in grid):
                raise UsageError(f"d^{n} must be a {rows} x {cols} grid")
            arr = np.zeros((rows * L, cols * L, self.D), dtype=np.int64)
            for t in range(rows):
                for s in range(cols):
                    a = A.vec(grid[t][s])
                    for i in range(L):
                        arr[t * L + i, s * L + i] = self.scalar_entry(a, i)
            out[n] = arr
        return Complex(self, terms, out, name)

    def scalar_complex_map(self, X: Complex, a) -> ChainMap:
        from .core import scalar_map

        return scalar_map(X, a)

    def dual(self, X: Complex) -> Complex:
        """``(DX)^n = (X^{-n})^*`` with ``d_D^n = (-1)^{n+1} (d^{-n-1})^T``."""
        terms = {-n: X.labels(n) for n in X.degrees}
        diffs = {}
        for m, d in X.diffs().items():
            n = -m - 1
            sign = -1 if (n + 1) % 2 else 1
            diffs[n] = (sign * d.transpose(1, 0, 2)) % self.p
        name = f"D{X.name}" if X.name else ""
        return Complex(self, terms, diffs, name, check=False)

    def dual_map(self, f: ChainMap) -> ChainMap:
        """``Df : DY -> DX`` for ``f : X -> Y``; components transpose."""
        DX, DY = self.dual(f.source), self.dual(f.target)
        return ChainMap(DY, DX, {-n: a.transpose(1, 0, 2) for n, a in f.comps().items()})

    def dual_suspension_iso(self, X: Complex, k: int) -> ChainMap:
        """``D(Σ^k X) -> Σ^{-k} DX``: the sign ``(-1)^{kn}`` in degree n."""
        from .core import suspend

        src = self.dual(suspend(X, k))
        tgt = suspend(self.dual(X), -k)
        comps = {}
        for n in src.degrees:
            labs = src.labels(n)
            arr = np.zeros((labs.size, labs.size, self.D), dtype=np.int64)
            s = -1 if (k * n) % 2 else 1
            arr[np.arange(labs.size), np.arange(labs.size)] = s * self.ident[labs]
            comps[n] = arr % self.p
        return ChainMap(src, tgt, comps)

    def _correspondence(self, target: "AlgebraModel", proj: np.ndarray) -> dict:
        corresp = {}
        for i, q in enumerate(self.primes):
            img = (proj @ q.idempotent) % self.p
            if not np.any(img):
                continue
            j = next(j for j, r in enumerate(target.primes) if np.array_equal(r.idempotent, img))
            corresp[i] = j
        return corresp

    def _change_block(self, target, proj, corresp, arr, row_labels, col_labels):
        rows = [k for k, u in enumerate(row_labels) if int(u) in corresp]
        cols = [k for k, u in enumerate(col_labels) if int(u) in corresp]
        out = np.zeros((len(rows), len(cols), target.D), dtype=np.int64)
        for r, kr in enumerate(rows):
            for c, kc in enumerate(cols):
                u = int(col_labels[kc])
                if not np.any(arr[kr, kc]):
                    continue
                a = (proj @ self.entry_element(u, arr[kr, kc])) % self.p
                out[r, c] = target.scalar_entry(a, corresp[u])
        return out

    def base_change_map(self, target: "AlgebraModel", proj: np.ndarray, f: ChainMap) -> ChainMap:
        """``f ⊗_A B`` between the base changes of its ends."""
        corresp = self._correspondence(target, proj)
        src = self.base_change(target, proj, f.source)
        tgt = self.base_change(target, proj, f.target)
        comps = {}
        for n, arr in f.comps().items():
            comps[n] = self._change_block(target, proj, corresp, arr, f.target.labels(n), f.source.labels(n))
        return ChainMap(src, tgt, comps)

    def base_change(self, target: "AlgebraModel", proj: np.ndarray, X: Complex) -> Complex:
        """``X ⊗_A B`` along an algebra map given by the matrix ``proj``.

        Only surjections onto products of some local factors arise here
        (localizations of artinian algebras), so each ``P_i`` either maps
        to a ``P_j`` of the target or to zero.
        """
        corresp = self._correspondence(target, proj)
        terms = {n: [corresp[int(u)] for u in X.labels(n) if int(u) in corresp] for n in X.degrees}
        diffs = {}
        for n, arr in X.diffs().items():
            diffs[n] = self._change_block(target, proj, corresp, arr, X.labels(n + 1), X.labels(n))
        return Complex(target, terms, diffs, X.name)
