"""Bounded derived category of representations of a finite poset.

A representation ``V`` assigns a vector space ``V_x`` to every element and a
linear map ``V_x -> V_y`` to every relation ``x <= y``, compatibly with
composition.  The projective ``P_u`` is ``k`` on the up-set of ``u``, so
``Hom(P_u, P_v)`` is ``k`` when ``v <= u`` and zero otherwise, and
``Hom(P_u, V) = V_u``.  Objects are bounded complexes of sums of ``P_u``.

The vertex-wise tensor product of ``P_u`` and ``P_v`` is ``k`` on
``up(u) ∩ up(v)``.  When that set is always empty or principal the tensor of
projective complexes is computed directly; otherwise it is formed at the
level of representations and replaced by a projective resolution.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from ..errors import ConsistencyError, UsageError
from ..linalg import LinearSolver, kernel_array, rank_array, rref_array
from ..rings import FinCommAlgebra, direct_product
from .core import ChainMap, Complex, Model, suspend, tensor
from .homotopy import chain_operator, evaluate, evaluate_map, map_layout, minimize


class FinitePoset:
    """A finite poset given by element names and relations ``x <= y``."""

    def __init__(self, elements, relations=()):
        self.elements = tuple(str(e) for e in elements)
        if len(set(self.elements)) != len(self.elements):
            raise UsageError("poset elements must be distinct")
        n = len(self.elements)
        if n == 0:
            raise UsageError("poset needs at least one element")
        idx = {e: i for i, e in enumerate(self.elements)}
        leq = np.eye(n, dtype=bool)
        for a, b in relations:
            a, b = str(a), str(b)
            if a not in idx or b not in idx:
                raise UsageError(f"relation {a} <= {b} names an unknown element")
            leq[idx[a], idx[b]] = True
        for k in range(n):
            leq |= leq[:, [k]] & leq[[k], :]
        both = leq & leq.T
        np.fill_diagonal(both, False)
        if np.any(both):
            i, j = np.argwhere(both)[0]
            raise UsageError(
                f"relations form a cycle through {self.elements[i]} and {self.elements[j]}"
            )
        self.leq = leq
        self.index = idx
        less = leq & ~np.eye(n, dtype=bool)
        # x ⋖ y: x < y with nothing strictly between
        self.covers = [
            (i, j)
            for i in range(n)
            for j in range(n)
            if less[i, j] and not np.any(less[i, :] & less[:, j])
        ]
        # linear extension: sort by number of elements below
        self.order = sorted(range(n), key=lambda i: (int(leq[:, i].sum()), i))

    def __len__(self):
        return len(self.elements)

    def __repr__(self):
        rel = ", ".join(f"{self.elements[a]}<{self.elements[b]}" for a, b in self.covers)
        return f"FinitePoset({list(self.elements)}; {rel})"

    def up(self, i: int) -> frozenset:
        return frozenset(np.flatnonzero(self.leq[i]).tolist())

    def least_element(self) -> Optional[int]:
        for i in range(len(self)):
            if self.leq[i].all():
                return i
        return None

    def meet_of_upsets(self, i: int, j: int) -> Optional[int]:
        """The least element of ``up(i) ∩ up(j)`` (-1 if empty, None if not principal)."""
        common = self.leq[i] & self.leq[j]
        if not common.any():
            return -1
        for k in np.flatnonzero(common):
            if np.array_equal(self.leq[k], common):
                return int(k)
        return None

    def components(self) -> list[list[int]]:
        n = len(self)
        comp = list(range(n))

        def find(a):
            while comp[a] != a:
                comp[a] = comp[comp[a]]
                a = comp[a]
            return a

        for a, b in self.covers:
            comp[find(a)] = find(b)
        groups: dict[int, list[int]] = {}
        for i in range(n):
            groups.setdefault(find(i), []).append(i)
        return sorted(groups.values())

    def restrict(self, keep) -> "FinitePoset":
        """The full subposet on the named elements."""
        keep = [str(k) for k in keep]
        for k in keep:
            if k not in self.index:
                raise UsageError(f"unknown poset element {k!r}")
        kept = [e for e in self.elements if e in keep]
        rel = [
            (a, b)
            for a in kept
            for b in kept
            if a != b and self.leq[self.index[a], self.index[b]]
        ]
        return FinitePoset(kept, rel)


class Representation:
    """A representation of a finite poset over F_p.

    Args:
        poset: the poset.
        dims: dimension at each element (sequence or mapping by name).
        maps: ``{(x, y): matrix}`` for covering relations ``x ⋖ y`` (names or
            indices); maps along longer relations are composites.  Missing
            covering maps are zero.
    """

    def __init__(self, poset: FinitePoset, dims, maps=None, p: int = 2, check: bool = True):
        self.poset = poset
        self.p = p
        if isinstance(dims, dict):
            d = [0] * len(poset)
            for k, v in dims.items():
                d[self._vertex(k)] = int(v)
            dims = d
        self.dims = [int(v) for v in dims]
        if len(self.dims) != len(poset) or min(self.dims) < 0:
            raise UsageError("representation needs one nonnegative dimension per element")
        cover_maps = {}
        for (a, b), mat in (maps or {}).items():
            i, j = self._vertex(a), self._vertex(b)
            if (i, j) not in poset.covers:
                raise UsageError(
                    f"{poset.elements[i]} <= {poset.elements[j]} is not a covering relation"
                )
            mat = np.array(mat, dtype=np.int64).reshape(self.dims[j], self.dims[i]) % p
            cover_maps[(i, j)] = mat
        self._full = {}
        for i in poset.order:
            self._full[(i, i)] = np.eye(self.dims[i], dtype=np.int64)
        # fill maps along all relations, checking that every path agrees
        for j in poset.order:
            for i in range(len(poset)):
                if i == j or not poset.leq[i, j]:
                    continue
                cand = None
                for (a, b) in poset.covers:
                    if b == j and poset.leq[i, a]:
                        m = cover_maps.get((a, b), np.zeros((self.dims[b], self.dims[a]), dtype=np.int64))
                        val = (m @ self._full[(i, a)]) % p
                        if cand is None:
                            cand = val
                        elif check and not np.array_equal(cand, val):
                            raise UsageError(
                                f"representation does not commute between "
                                f"{poset.elements[i]} and {poset.elements[j]}"
                            )
                self._full[(i, j)] = cand

    def _vertex(self, k) -> int:
        if isinstance(k, (int, np.integer)):
            return int(k)
        try:
            return self.poset.index[str(k)]
        except KeyError:
            raise UsageError(f"unknown poset element {k!r}") from None

    def map(self, i: int, j: int) -> np.ndarray:
        return self._full[(i, j)]

    def total_dim(self) -> int:
        return sum(self.dims)

    def __repr__(self):
        return f"Representation(dims={self.dims})"


def projective_sum(poset: FinitePoset, labels, p: int) -> Representation:
    """``⊕ P_u`` as a representation; basis at x = summands with ``u <= x``."""
    labels = list(labels)
    rep = Representation.__new__(Representation)
    rep.poset, rep.p = poset, p
    active = [[k for k, u in enumerate(labels) if poset.leq[u, x]] for x in range(len(poset))]
    rep.dims = [len(a) for a in active]
    rep._full = {}
    for i in range(len(poset)):
        for j in range(len(poset)):
            if poset.leq[i, j]:
                m = np.zeros((rep.dims[j], rep.dims[i]), dtype=np.int64)
                pos = {k: r for r, k in enumerate(active[j])}
                for c, k in enumerate(active[i]):
                    m[pos[k], c] = 1
                rep._full[(i, j)] = m
    return rep


def rep_kernel(M: Representation, maps: dict) -> tuple[Representation, dict]:
    """Kernel of a representation map given by per-vertex matrices.

    Returns the kernel and its inclusion (per-vertex matrices with columns
    forming a basis of ``ker`` at each vertex).
    """
    poset, p = M.poset, M.p
    basis = {}
    for x in range(len(poset)):
        if M.dims[x] == 0:
            basis[x] = np.zeros((0, 0), dtype=np.int64)
            continue
        mat = maps[x]
        basis[x] = kernel_array(mat, p) if mat.shape[0] else np.eye(M.dims[x], dtype=np.int64)
    K = Representation.__new__(Representation)
    K.poset, K.p = poset, p
    K.dims = [basis[x].shape[1] for x in range(len(poset))]
    K._full = {}
    for i in range(len(poset)):
        for j in range(len(poset)):
            if not poset.leq[i, j]:
                continue
            if K.dims[i] == 0 or K.dims[j] == 0:
                K._full[(i, j)] = np.zeros((K.dims[j], K.dims[i]), dtype=np.int64)
                continue
            img = (M.map(i, j) @ basis[i]) % p
            x, ok = LinearSolver(basis[j], p).solve_many(img)
            if not np.all(ok):
                raise ConsistencyError("kernel is not a subrepresentation")
            K._full[(i, j)] = x
    return K, basis


def top_generators(M: Representation) -> list[tuple[int, np.ndarray]]:
    """Generators of a projective cover: ``(vertex, vector)`` pairs.

    At each vertex the chosen vectors span a complement of the images of
    all strictly smaller vertices.
    """
    poset, p = M.poset, M.p
    gens = []
    for x in poset.order:
        n = M.dims[x]
        if n == 0:
            continue
        below = [M.map(y, x) for y in range(len(poset)) if y != x and poset.leq[y, x] and M.dims[y]]
        rad = np.concatenate(below, axis=1) % p if below else np.zeros((n, 0), dtype=np.int64)
        aug = np.concatenate([rad, np.eye(n, dtype=np.int64)], axis=1)
        _, piv = rref_array(aug, p)
        for c in piv:
            if c >= rad.shape[1]:
                v = np.zeros(n, dtype=np.int64)
                v[c - rad.shape[1]] = 1
                gens.append((x, v))
    return gens


def generator_matrix(M: Representation, gens, x: int) -> np.ndarray:
    """Columns ``M(u <= x) v`` for the generators ``(u, v)`` active at x."""
    cols = [M.map(u, x) @ v for (u, v) in gens if M.poset.leq[u, x]]
    if not cols:
        return np.zeros((M.dims[x], 0), dtype=np.int64)
    return np.stack(cols, axis=1) % M.p


def is_projective(M: Representation) -> bool:
    gens = top_generators(M)
    return sum(projective_sum(M.poset, [u for u, _ in gens], M.p).dims) == M.total_dim()


class RepComplex:
    """A bounded complex of representations.

    ``terms[n]`` is a Representation and ``diffs[n][x]`` the matrix of
    ``d^n`` at vertex x.
    """

    def __init__(self, poset: FinitePoset, p: int, terms: dict, diffs: dict):
        self.poset, self.p = poset, p
        self.terms = {n: r for n, r in sorted(terms.items()) if r.total_dim()}
        self.diffs = diffs

    def term(self, n: int) -> Representation:
        if n in self.terms:
            return self.terms[n]
        return Representation(self.poset, [0] * len(self.poset), p=self.p)

    def d(self, n: int, x: int) -> np.ndarray:
        if n in self.diffs and x in self.diffs[n]:
            return self.diffs[n][x]
        return np.zeros((self.term(n + 1).dims[x], self.term(n).dims[x]), dtype=np.int64)

    @property
    def degrees(self) -> list[int]:
        return list(self.terms)


class Resolution:
    """A surjective quasi-isomorphism ``q: Q -> V`` from a projective complex.

    ``labels[n]`` lists the projective summands of ``Q^n``, ``qval[n][k]``
    is the image in ``V^n`` of the generator of summand k (a vector at its
    vertex), and ``dentries[n]`` holds ``(row, col, scalar)`` entries of
    ``d_Q^n``.
    """

    def __init__(self, V: RepComplex):
        self.V = V
        self.labels: dict[int, list[int]] = {}
        self.qval: dict[int, list[np.ndarray]] = {}
        self.dentries: dict[int, list[tuple[int, int, int]]] = {}

    def q_at(self, n: int, x: int) -> np.ndarray:
        """Matrix of ``q^n`` at vertex x (columns = summands active at x)."""
        V = self.V.term(n)
        poset = self.V.poset
        cols = [
            V.map(u, x) @ v
            for u, v in zip(self.labels.get(n, []), self.qval.get(n, []))
            if poset.leq[u, x]
        ]
        if not cols:
            return np.zeros((V.dims[x], 0), dtype=np.int64)
        return np.stack(cols, axis=1) % self.V.p

    def dQ_at(self, n: int, x: int) -> np.ndarray:
        poset = self.V.poset
        src = self.labels.get(n, [])
        tgt = self.labels.get(n + 1, [])
        sa = [k for k, u in enumerate(src) if poset.leq[u, x]]
        ta = [k for k, u in enumerate(tgt) if poset.leq[u, x]]
        sp = {k: c for c, k in enumerate(sa)}
        tp = {k: r for r, k in enumerate(ta)}
        m = np.zeros((len(ta), len(sa)), dtype=np.int64)
        for (r, c, val) in self.dentries.get(n, []):
            if r in tp and c in sp:
                m[tp[r], sp[c]] = val
        return m % self.V.p

    def complex(self, model: "PosetModel", name: str = "") -> Complex:
        terms = {n: labs for n, labs in self.labels.items() if labs}
        diffs = {}
        for n, ents in self.dentries.items():
            if not ents or n not in terms or n + 1 not in terms:
                continue
            arr = np.zeros((len(terms[n + 1]), len(terms[n]), 1), dtype=np.int64)
            for (r, c, val) in ents:
                arr[r, c, 0] = val
            diffs[n] = arr
        return Complex(model, terms, diffs, name, check=True)


def resolve(V: RepComplex) -> Resolution:
    """Projective resolution of a bounded complex of representations.

    Works downward from the top degree: ``Q^n`` covers the representation
    of pairs ``(x, v) ∈ Q^{n+1} ⊕ V^n`` with ``d x = 0`` and ``q x = d v``.
    Below the bottom of V this is the kernel of ``d_Q``, which becomes
    projective after finitely many steps (incidence algebras have finite
    global dimension).  Finally contractible pieces are added so that q is
    surjective in every degree.
    """
    poset, p = V.poset, V.p
    res = Resolution(V)
    if not V.degrees:
        return res
    hi, lo = V.degrees[-1], V.degrees[0]
    n = hi
    limit = lo - len(poset) - 2
    while True:
        if n < limit:
            raise ConsistencyError("projective resolution did not terminate")
        Qn1 = projective_sum(poset, res.labels.get(n + 1, []), p)
        Vn = V.term(n)
        # module of pairs (x, v) with d x = 0 and q x = d v
        N = Representation.__new__(Representation)
        N.poset, N.p = poset, p
        N.dims = [Qn1.dims[x] + Vn.dims[x] for x in range(len(poset))]
        N._full = {}
        for i in range(len(poset)):
            for j in range(len(poset)):
                if poset.leq[i, j]:
                    blk = np.zeros((N.dims[j], N.dims[i]), dtype=np.int64)
                    blk[: Qn1.dims[j], : Qn1.dims[i]] = Qn1.map(i, j)
                    blk[Qn1.dims[j] :, Qn1.dims[i] :] = Vn.map(i, j)
                    N._full[(i, j)] = blk
        phi = {}
        for x in range(len(poset)):
            top = res.dQ_at(n + 1, x)
            bottom = np.concatenate([res.q_at(n + 1, x), -V.d(n, x)], axis=1)
            top = np.concatenate([top, np.zeros((top.shape[0], Vn.dims[x]), dtype=np.int64)], axis=1)
            phi[x] = np.concatenate([top, bottom], axis=0) % p
        K, incl = rep_kernel(N, phi)
        if K.total_dim() == 0 and n < lo:
            break
        gens = top_generators(K)
        labels, qval, ents = [], [], []
        for k, (u, g) in enumerate(gens):
            vec = (incl[u] @ g) % p
            xpart, vpart = vec[: Qn1.dims[u]], vec[Qn1.dims[u] :]
            labels.append(u)
            qval.append(vpart)
            active = [r for r, w in enumerate(res.labels.get(n + 1, [])) if poset.leq[w, u]]
            for pos, r in enumerate(active):
                if xpart[pos]:
                    ents.append((r, k, int(xpart[pos])))
        res.labels[n] = labels
        res.qval[n] = qval
        res.dentries[n] = ents
        if n < lo and sum(projective_sum(poset, labels, p).dims) == K.total_dim():
            break
        n -= 1
    # make q surjective by adding contractible pieces [P --1--> P]
    for n in V.degrees:
        gens = top_generators(V.term(n))
        Vn1 = V.term(n + 1)
        for (u, c) in gens:
            res.labels.setdefault(n, [])
            res.qval.setdefault(n, [])
            res.labels.setdefault(n + 1, [])
            res.qval.setdefault(n + 1, [])
            col = len(res.labels[n])
            row = len(res.labels[n + 1])
            res.labels[n].append(u)
            res.qval[n].append(c % p)
            res.labels[n + 1].append(u)
            res.qval[n + 1].append((V.d(n, u) @ c) % p if Vn1.dims[u] else np.zeros(0, dtype=np.int64))
            res.dentries.setdefault(n, []).append((row, col, 1))
    return res


def lift_through(Qs: Complex, res_t: Resolution, Qt: Complex, values: dict) -> ChainMap:
    """The chain map ``F: Qs -> Qt`` with ``q_t ∘ F = g``, where g is a chain map
    ``Qs -> V_t`` given by ``values[n][k]`` (image of the generator of
    summand k of ``Qs^n``, a vector of ``V_t^n`` at its vertex).
    """
    model = Qs.model
    poset, p = model.poset, model.p
    Vt = res_t.V
    F = map_layout(Qs, Qt, 0)
    E = map_layout(Qs, Qt, 1)
    chain = chain_operator(Qs, Qt, F, E)
    rows = [chain]
    rhs = [np.zeros(chain.shape[0], dtype=np.int64)]
    for n in Qs.degrees:
        ls = Qs.labels(n)
        lt = Qt.labels(n)
        for k, u in enumerate(ls):
            u = int(u)
            dim = Vt.term(n).dims[u]
            if dim == 0:
                continue
            block = np.zeros((dim, F.size), dtype=np.int64)
            if n in F.positions:
                start, pos = F.positions[n]
                ncols = len(ls)
                for slot, flat in enumerate(pos):
                    j, kk = divmod(int(flat), ncols)
                    if kk != k:
                        continue
                    v = int(lt[j])
                    block[:, start + slot] = Vt.term(n).map(v, u) @ res_t.qval[n][j]
            rows.append(block % p)
            rhs.append(np.asarray(values[n][k], dtype=np.int64) % p)
    A = np.concatenate(rows, axis=0)
    b = np.concatenate(rhs)
    x = LinearSolver(A, p).solve(b)
    if x is None:
        raise ConsistencyError("map does not lift along the resolution")
    return ChainMap(Qs, Qt, F.unflatten(x))


def evaluation_tensor(X: Complex, Y: Complex) -> tuple[RepComplex, dict]:
    """Vertex-wise tensor of two projective complexes as a RepComplex.

    Basis at vertex x in degree n: pairs ``(a, b)`` of summands active at x
    with ``a ∈ X^i``, ordered by i then row-major.  Also returns the layout
    ``{(n, x): [(i, na, nb, offset)]}``.
    """
    model = X.model
    poset, p = model.poset, model.p
    L = len(poset)
    evx = [evaluate(X, x) for x in range(L)]
    evy = [evaluate(Y, x) for x in range(L)]
    degs = sorted({i + j for i in X.degrees for j in Y.degrees})
    layout = {}
    dims = {n: [0] * L for n in degs}
    for n in degs:
        for x in range(L):
            entries = []
            off = 0
            for i in X.degrees:
                na = evx[x][0].get(i, 0)
                nb = evy[x][0].get(n - i, 0)
                if na and nb:
                    entries.append((i, na, nb, off))
                    off += na * nb
            layout[(n, x)] = entries
            dims[n][x] = off
    terms = {}
    for n in degs:
        rep = Representation.__new__(Representation)
        rep.poset, rep.p, rep.dims = poset, p, dims[n]
        rep._full = {}
        for a in range(L):
            for b in range(L):
                if not poset.leq[a, b]:
                    continue
                m = np.zeros((dims[n][b], dims[n][a]), dtype=np.int64)
                tgt = {i: (na, nb, off) for (i, na, nb, off) in layout[(n, b)]}
                for (i, na, nb, off) in layout[(n, a)]:
                    ti = tgt[i]
                    ix = _inclusion(X, i, a, b)
                    iy = _inclusion(Y, n - i, a, b)
                    m[ti[2] : ti[2] + ti[0] * ti[1], off : off + na * nb] = np.kron(ix, iy)
                rep._full[(a, b)] = m
        terms[n] = rep
    diffs = {}
    for n in degs:
        if n + 1 not in dims:
            continue
        diffs[n] = {}
        for x in range(L):
            m = np.zeros((dims[n + 1][x], dims[n][x]), dtype=np.int64)
            tgt = {i: (na, nb, off) for (i, na, nb, off) in layout[(n + 1, x)]}
            for (i, na, nb, off) in layout[(n, x)]:
                if i + 1 in tgt:
                    t = tgt[i + 1]
                    dx = evx[x][1].get(i, np.zeros((t[0], na), dtype=np.int64))
                    m[t[2] : t[2] + t[0] * t[1], off : off + na * nb] += np.kron(dx, np.eye(nb, dtype=np.int64))
                if i in tgt:
                    t = tgt[i]
                    dy = evy[x][1].get(n - i, np.zeros((t[1], nb), dtype=np.int64))
                    sign = -1 if i % 2 else 1
                    m[t[2] : t[2] + t[0] * t[1], off : off + na * nb] += sign * np.kron(np.eye(na, dtype=np.int64), dy)
            diffs[n][x] = m % p
    return RepComplex(poset, p, terms, diffs), layout


def _inclusion(X: Complex, n: int, a: int, b: int) -> np.ndarray:
    """Structure map ``X^n_a -> X^n_b`` of the evaluated projective sum."""
    poset = X.model.poset
    labs = X.labels(n)
    sa = [k for k, u in enumerate(labs) if poset.leq[u, a]]
    sb = {k: r for r, k in enumerate(k for k, u in enumerate(labs) if poset.leq[u, b])}
    m = np.zeros((len(sb), len(sa)), dtype=np.int64)
    for c, k in enumerate(sa):
        m[sb[k], c] = 1
    return m


class PosetModel(Model):
    """``D^b(rep_k P)`` presented by complexes of projectives ``P_u``."""

    kind = "poset"
    rigid = False

    def __init__(self, poset: FinitePoset, p: int = 2, name: str = ""):
        from ..linalg import is_prime

        if not is_prime(int(p)):
            raise UsageError(f"characteristic {p} is not prime")
        self.poset = poset
        n = len(poset)
        labels = [f"P{e}" for e in poset.elements]
        points = [f"x{e}" for e in poset.elements]
        mult = np.ones((n, 1, 1, 1), dtype=np.int64)
        hom_mask = poset.leq[:, :, None].copy()  # [v, u]: v <= u
        table = np.full((n, n), -1, dtype=np.int64)
        principal = True
        for i in range(n):
            for j in range(n):
                k = poset.meet_of_upsets(i, j)
                if k is None:
                    principal = False
                else:
                    table[i, j] = k
        fiber = poset.leq.T.copy()  # [x, u]: u <= x
        super().__init__(p, labels, 1, mult, hom_mask, table, points, fiber, name or "poset")
        self.projective_tensor = principal

    def describe(self) -> dict:
        return {
            "kind": self.kind,
            "char": self.p,
            "elements": list(self.poset.elements),
            "relations": [[self.poset.elements[a], self.poset.elements[b]] for a, b in self.poset.covers],
        }

    # -- objects ---------------------------------------------------------
    def projective(self, element) -> Complex:
        u = self.poset.index[str(element)] if not isinstance(element, int) else element
        return Complex(self, {0: [u]}, {}, f"P{self.poset.elements[u]}")

    def representation(self, dims, maps=None) -> Representation:
        return Representation(self.poset, dims, maps, p=self.p)

    def from_representation(self, rep: Representation, name: str = "") -> Complex:
        """A minimal projective resolution of ``rep`` placed in degrees <= 0."""
        V = RepComplex(self.poset, self.p, {0: rep}, {})
        res = resolve(V)
        Q = res.complex(self, name)
        small = minimize(Q).small
        return small.renamed(name) if name else small

    def simple(self, element, name: str = "") -> Complex:
        i = self.poset.index[str(element)]
        dims = [0] * len(self.poset)
        dims[i] = 1
        return self.from_representation(self.representation(dims), name or f"S{element}")

    def unit(self) -> Complex:
        cached = self._cache.get("unit")
        if cached is not None:
            return cached
        least = self.poset.least_element()
        if least is not None:
            U = Complex(self, {0: [least]}, {}, "𝟙")
        else:
            n = len(self.poset)
            maps = {(a, b): [[1]] for (a, b) in self.poset.covers}
            U = self.from_representation(self.representation([1] * n, maps), "𝟙")
        self._cache["unit"] = U
        return U

    def scalar_entry(self, a, u: int) -> np.ndarray:
        """``a`` is an int or a vector indexed by connected components."""
        comps = self.poset.components()
        if np.ndim(a) == 0:
            val = int(a)
        else:
            a = np.asarray(a).reshape(-1)
            which = next(c for c, group in enumerate(comps) if u in group)
            val = int(a[which]) if a.size == len(comps) else int(a[0])
        return np.array([val % self.p], dtype=np.int64)

    def unit_endomorphism_algebra(self) -> FinCommAlgebra:
        k = FinCommAlgebra(self.p, [[[1]]], [1], name=f"F{self.p}")
        comps = self.poset.components()
        if len(comps) == 1:
            return k
        return direct_product(*([k] * len(comps)))

    def restrict(self, keep) -> "PosetModel":
        sub = self.poset.restrict(keep)
        return PosetModel(sub, self.p, name=f"{self.name}|{','.join(sub.elements)}")

    def restriction_functor(self, sub: "PosetModel", X: Complex) -> Complex:
        """Restriction of representations to a full subposet.

        ``P_u`` restricts to a representation of the subposet which need not
        be projective; it is resolved there.
        """
        poset = self.poset
        keep = [poset.index[e] for e in sub.poset.elements]
        # evaluate as a complex of representations on the subposet, then resolve
        terms, diffs = {}, {}
        for n in X.degrees:
            labs = X.labels(n)
            dims = [int(np.sum(poset.leq[labs, x])) for x in keep]
            rep = Representation.__new__(Representation)
            rep.poset, rep.p, rep.dims = sub.poset, self.p, dims
            rep._full = {}
            for ia, a in enumerate(keep):
                for ib, b in enumerate(keep):
                    if poset.leq[a, b]:
                        rep._full[(ia, ib)] = _inclusion(X, n, a, b)
            terms[n] = rep
        for n in X.degrees:
            diffs[n] = {}
            for ix, x in enumerate(keep):
                _, dd = evaluate(X, x)
                dims_here = terms[n].dims[ix]
                rows = terms[n + 1].dims[ix] if n + 1 in terms else 0
                diffs[n][ix] = dd.get(n, np.zeros((rows, dims_here), dtype=np.int64))
        V = RepComplex(sub.poset, self.p, terms, diffs)
        res = resolve(V)
        return minimize(res.complex(sub, X.name)).small.renamed(X.name)

    # -- tensor when P_u ⊗ P_v need not be projective ----------------------
    def replaced_tensor(self, X: Complex, Y: Complex) -> Complex:
        V, layout = evaluation_tensor(X, Y)
        res = resolve(V)
        T = res.complex(self, f"{X.name or '?'}⊗{Y.name or '?'}")
        T._replacement = (X, Y, V, layout, res)
        return T

    def _tensor_parts(self, X: Complex, Y: Complex):
        T = tensor(X, Y)
        return T, T._replacement

    def replaced_tensor_maps(self, f: ChainMap, g: ChainMap) -> ChainMap:
        S, (_, _, Vs, ls, rs) = self._tensor_parts(f.source, g.source)
        T, (_, _, Vt, lt, rt) = self._tensor_parts(f.target, g.target)
        L = len(self.poset)
        # vertex-wise f ⊗ g between the evaluated tensor complexes
        phi = {}
        for n in Vs.degrees:
            for x in range(L):
                fx = evaluate_map(f, x)
                gx = evaluate_map(g, x)
                m = np.zeros((Vt.term(n).dims[x], Vs.term(n).dims[x]), dtype=np.int64)
                tgt = {i: (na, nb, off) for (i, na, nb, off) in lt.get((n, x), [])}
                for (i, na, nb, off) in ls.get((n, x), []):
                    if i not in tgt:
                        continue
                    t = tgt[i]
                    fi = fx.get(i, np.zeros((t[0], na), dtype=np.int64))
                    gj = gx.get(n - i, np.zeros((t[1], nb), dtype=np.int64))
                    m[t[2] : t[2] + t[0] * t[1], off : off + na * nb] = np.kron(fi, gj)
                phi[(n, x)] = m % self.p
        return self._lift_rep_map(S, rs, T, rt, phi)

    def replaced_suspension_iso(self, X: Complex, Y: Complex, k: int, left: bool) -> ChainMap:
        T, (_, _, V, layout, res) = self._tensor_parts(X, Y)
        if left:
            tgt, (_, _, _, _, rt) = self._tensor_parts(suspend(X, k), Y)
            sign_of = lambda i: 1
        else:
            tgt, (_, _, _, _, rt) = self._tensor_parts(X, suspend(Y, k))
            sign_of = lambda i: -1 if (i * k) % 2 else 1
        src = suspend(T, k)
        values = {}
        for n in src.degrees:
            vals = []
            for kk, u in enumerate(src.labels(n)):
                u = int(u)
                v = res.qval[n + k][kk]
                sign = np.zeros(len(v), dtype=np.int64)
                for (i, na, nb, off) in layout.get((n + k, u), []):
                    sign[off : off + na * nb] = sign_of(i)
                vals.append((sign * v) % self.p)
            values[n] = vals
        return lift_through(src, rt, tgt, values)

    def _lift_rep_map(self, S: Complex, rs: Resolution, T: Complex, rt: Resolution, phi: dict) -> ChainMap:
        values = {}
        for n in S.degrees:
            vals = []
            for k, u in enumerate(S.labels(n)):
                m = phi.get((n, int(u)))
                if m is None or m.size == 0:
                    vals.append(np.zeros(rt.V.term(n).dims[int(u)], dtype=np.int64))
                else:
                    vals.append((m @ rs.qval[n][k]) % self.p)
            values[n] = vals
        return lift_through(S, rt, T, values)


def chain_poset(n: int, p: int = 2) -> PosetModel:
    """The poset ``1 -> 2 -> ... -> n``."""
    elems = [str(i) for i in range(1, n + 1)]
    return PosetModel(FinitePoset(elems, [(elems[i], elems[i + 1]) for i in range(n - 1)]), p, name=f"poset(1→{n})" if n == 2 else f"chain{n}")
