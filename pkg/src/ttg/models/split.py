"""Splitting complexes into direct summands by scalar changes of basis.

A chain automorphism built from F_p-scalar matrices (mixing only
summands with the same label) is an isomorphism of complexes.  Random
scalar chain endomorphisms are decomposed by Fitting's lemma: the image
and kernel of a high power of ``φ - λ`` are complementary subcomplexes.
A split found this way is exact; failing to find one only means the
complex stays as it is.
"""

from __future__ import annotations

import numpy as np

from ..linalg import image_basis_array, kernel_array, rank_array
from .core import ChainMap, Complex

TRIES = 4
# components with more summands than this are left alone
MAX_COMPONENT = 48


def _groups(labels: np.ndarray) -> dict:
    out: dict = {}
    for i, u in enumerate(labels.tolist()):
        out.setdefault(u, []).append(i)
    return out


def scalar_endomorphisms(X: Complex) -> tuple[list, np.ndarray]:
    """Basis of the scalar chain endomorphisms of X.

    Returns ``(unknowns, K)``: ``unknowns`` lists ``(n, i, j)`` entries of
    the degree-n matrices, and the columns of K span the solutions.
    """
    m = X.model
    p = m.p
    unknowns = []
    index = {}
    for n in X.degrees:
        for idx in _groups(X.labels(n)).values():
            for i in idx:
                for j in idx:
                    index[(n, i, j)] = len(unknowns)
                    unknowns.append((n, i, j))
    rows = []
    for n, d in X.diffs().items():
        r1, r0 = X.rank(n + 1), X.rank(n)
        for c in range(m.D):
            B = d[:, :, c] % p
            if not np.any(B):
                continue
            # (S_{n+1} B - B S_n)[a, b] = sum_l S_{n+1}[a, l] B[l, b] - sum_l B[a, l] S_n[l, b]
            eq = np.zeros((r1 * r0, len(unknowns)), dtype=np.int64)
            for a in range(r1):
                for b in range(r0):
                    row = eq[a * r0 + b]
                    for l in range(r1):
                        if B[l, b] and (n + 1, a, l) in index:
                            row[index[(n + 1, a, l)]] += B[l, b]
                    for l in range(r0):
                        if B[a, l] and (n, l, b) in index:
                            row[index[(n, l, b)]] -= B[a, l]
            rows.append(eq % p)
    if not unknowns:
        return unknowns, np.zeros((0, 0), dtype=np.int64)
    if not rows:
        return unknowns, np.eye(len(unknowns), dtype=np.int64)
    return unknowns, kernel_array(np.concatenate(rows), p)


def _matrices(X: Complex, unknowns, v) -> dict:
    out = {n: np.zeros((X.rank(n), X.rank(n)), dtype=np.int64) for n in X.degrees}
    for (n, i, j), x in zip(unknowns, v.tolist()):
        out[n][i, j] = x
    return out


def _fitting_split(X: Complex, phi: dict) -> dict | None:
    """Basis changes ``P_n`` splitting X along ``φ - λ``, or None."""
    p = X.model.p
    for lam in range(p):
        im_dims, bases = 0, {}
        total = 0
        for n in X.degrees:
            r = X.rank(n)
            psi = (phi[n] - lam * np.eye(r, dtype=np.int64)) % p
            power = np.eye(r, dtype=np.int64)
            for _ in range(r):
                power = (power @ psi) % p
            im_cols, ker_cols = [], []
            for idx in _groups(X.labels(n)).values():
                blk = power[np.ix_(idx, idx)]
                im = image_basis_array(blk, p)
                ker = kernel_array(blk, p)
                for cols, target in ((im, im_cols), (ker, ker_cols)):
                    for c in range(cols.shape[1]):
                        v = np.zeros(r, dtype=np.int64)
                        v[idx] = cols[:, c]
                        target.append(v)
            im_dims += len(im_cols)
            total += r
            bases[n] = (im_cols, ker_cols)
        if 0 < im_dims < total:
            P = {}
            for n, (im_cols, ker_cols) in bases.items():
                P[n] = np.column_stack(im_cols + ker_cols) % p
                if rank_array(P[n], p) < P[n].shape[0]:
                    return None
            return P
    return None


def _inverse(P: np.ndarray, p: int) -> np.ndarray:
    from ..linalg import LinearSolver

    solver = LinearSolver(P, p)
    return solver.solve(np.eye(P.shape[0], dtype=np.int64))


def _column_labels(labels: np.ndarray, P: np.ndarray) -> np.ndarray:
    """Label of each new basis vector; each column is supported on one label."""
    return np.array([labels[int(np.flatnonzero(P[:, k])[0])] for k in range(P.shape[1])], dtype=np.int64)


def _apply_block(Y: Complex, idx: dict, Q: dict, Qinv: dict) -> Complex:
    """Change basis by ``Q[n]`` on the summands ``idx[n]``, identity elsewhere."""
    p = Y.model.p
    terms = {n: Y.labels(n).copy() for n in Y.degrees}
    for n, ix in idx.items():
        terms[n][ix] = _column_labels(Y.labels(n)[ix], Q[n])
    diffs = {}
    for n, d in Y.diffs().items():
        d = d.copy()
        if n in idx:
            ix = idx[n]
            d[:, ix, :] = np.einsum("rcd,ce->red", d[:, ix, :], Q[n]) % p
        if n + 1 in idx:
            ix = idx[n + 1]
            d[ix, :, :] = np.einsum("ab,bcd->acd", Qinv[n + 1], d[ix, :, :]) % p
        if np.any(d):
            diffs[n] = d
    return Complex(Y.model, terms, diffs, Y.name, check=False)


def _scalar_map(src: Complex, tgt: Complex, mats: dict) -> ChainMap:
    m = src.model
    comps = {}
    for n, M in mats.items():
        comps[n] = M[:, :, None] * m.ident[tgt.labels(n)][:, None, :]
    return ChainMap(src, tgt, comps)


def split_summands(X: Complex) -> tuple[Complex, ChainMap, ChainMap] | None:
    """An isomorphic complex with more summands, with the two isomorphisms.

    Returns ``(Y, incl: Y -> X, proj: X -> Y)`` or None when no split is
    found.
    """
    from .homotopy import summand_components

    p = X.model.p
    rng = np.random.default_rng(0)
    P = {n: np.eye(X.rank(n), dtype=np.int64) for n in X.degrees}
    Y = X
    changed = False
    progress = True
    while progress:
        progress = False
        for comp in summand_components(Y):
            if len(comp) < 2 or len(comp) > MAX_COMPONENT:
                continue
            idx: dict = {}
            for n, i in comp:
                idx.setdefault(n, []).append(i)
            sub = Complex(
                X.model,
                {n: Y.labels(n)[ix] for n, ix in idx.items()},
                {n: Y.d(n)[np.ix_(idx[n + 1], ix)] for n, ix in idx.items() if n + 1 in idx and n in Y.diffs()},
                check=False,
            )
            unknowns, K = scalar_endomorphisms(sub)
            if K.shape[1] < 2:
                continue
            Q = None
            for _ in range(TRIES):
                v = (K @ rng.integers(0, p, size=K.shape[1])) % p
                Q = _fitting_split(sub, _matrices(sub, unknowns, v))
                if Q is not None:
                    break
            if Q is None:
                continue
            Qinv = {n: _inverse(M, p) for n, M in Q.items()}
            Y = _apply_block(Y, idx, Q, Qinv)
            for n, ix in idx.items():
                P[n][:, ix] = (P[n][:, ix] @ Q[n]) % p
            changed = progress = True
            break
    if not changed:
        return None
    Pinv = {n: _inverse(M, p) for n, M in P.items()}
    return Y, _scalar_map(Y, X, P), _scalar_map(X, Y, Pinv)
