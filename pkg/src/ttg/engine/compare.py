"""Isomorphisms between small split commutative algebras.

The search splits both algebras into local factors, matches factors
(optionally as prescribed by comparison maps) and then enumerates linear
maps between the nilradicals of matched factors.
"""

from __future__ import annotations

import itertools
from typing import Optional

import numpy as np

from ..errors import UnsupportedError
from ..linalg import LinearSolver, image_basis_array, rank_array
from ..rings import FinCommAlgebra, _nilradical_basis, is_algebra_hom, spec

SEARCH_LIMIT = 200_000


def _local_basis(alg: FinCommAlgebra, e: np.ndarray, nil: np.ndarray) -> np.ndarray:
    p = alg.p
    if nil.shape[1]:
        ne = image_basis_array((alg.mult_matrix(e) @ nil) % p, p)
    else:
        ne = np.zeros((alg.dim, 0), dtype=np.int64)
    return np.column_stack([e, ne]).astype(np.int64) % p


def _local_iso(A, bA, B, bB) -> Optional[np.ndarray]:
    """An algebra iso ``A e -> B e'`` sending ``e`` to ``e'``, as a dim(A) x r matrix image."""
    p = A.p
    r = bA.shape[1] - 1
    if bB.shape[1] - 1 != r:
        return None
    if r == 0:
        return bB[:, :1]
    if p ** (r * r) > SEARCH_LIMIT:
        raise UnsupportedError(f"isomorphism search over {p}^{r * r} candidates is too large")
    solver = LinearSolver(bA, p)
    prods = {}
    for a, b in itertools.combinations_with_replacement(range(1, r + 1), 2):
        prods[(a, b)] = solver.solve(A.mul(bA[:, a], bA[:, b]))
    nilB = bB[:, 1:]
    for entries in itertools.product(range(p), repeat=r * r):
        M = np.array(entries, dtype=np.int64).reshape(r, r)
        if rank_array(M, p) < r:
            continue
        images = np.column_stack([bB[:, 0], (nilB @ M) % p])
        ok = True
        for (a, b), c in prods.items():
            lhs = (images @ c) % p
            if not np.array_equal(lhs, B.mul(images[:, a], images[:, b])):
                ok = False
                break
        if ok:
            return images
    return None


def algebra_isomorphism(A: FinCommAlgebra, B: FinCommAlgebra, matching: Optional[dict] = None) -> Optional[np.ndarray]:
    """A matrix of an algebra isomorphism A -> B, or None.

    ``matching`` maps prime labels of A to prime labels of B; factors not
    mentioned are matched in every possible way.
    """
    if A.p != B.p or A.dim != B.dim:
        return None
    p = A.p
    if A.dim == 0:
        return np.zeros((0, 0), dtype=np.int64)
    _, PA = spec(A)
    _, PB = spec(B)
    if len(PA) != len(PB):
        return None
    nA, nB = _nilradical_basis(A), _nilradical_basis(B)
    basesA = [_local_basis(A, q.idempotent, nA) for q in PA]
    basesB = [_local_basis(B, q.idempotent, nB) for q in PB]
    matching = dict(matching or {})
    idxB = {q.label: j for j, q in enumerate(PB)}
    fixed = {i: idxB[matching[q.label]] for i, q in enumerate(PA) if q.label in matching}
    if len(set(fixed.values())) != len(fixed):
        return None
    free_a = [i for i in range(len(PA)) if i not in fixed]
    free_b = [j for j in range(len(PB)) if j not in set(fixed.values())]
    solverA = LinearSolver(np.column_stack(basesA) if basesA else np.zeros((A.dim, 0), dtype=np.int64), p)
    for perm in itertools.permutations(free_b):
        pairing = dict(fixed)
        pairing.update(zip(free_a, perm))
        blocks = []
        for i in range(len(PA)):
            img = _local_iso(A, basesA[i], B, basesB[pairing[i]])
            if img is None:
                break
            blocks.append(img)
        else:
            images = np.column_stack(blocks) if blocks else np.zeros((B.dim, 0), dtype=np.int64)
            # express in A's standard basis: matrix sends local-basis coords to images
            M = np.zeros((B.dim, A.dim), dtype=np.int64)
            for j in range(A.dim):
                e = np.zeros(A.dim, dtype=np.int64)
                e[j] = 1
                M[:, j] = (images @ solverA.solve(e)) % p
            if is_algebra_hom(A, B, M) and rank_array(M, p) == A.dim:
                return M
    return None


def compare_comparison_maps(cX, cY) -> tuple[bool, dict]:
    """Is there an algebra iso ``R_X ≅ R_Y`` compatible with both comparison maps?

    Compatible means that each point goes to corresponding primes.
    Returns ``(ok, witness)``.
    """
    witness = {"dims": [cX.algebra.dim, cY.algebra.dim]}
    if set(cX.domain.points) != set(cY.domain.points):
        witness["reason"] = "different domains"
        witness["domains"] = [list(map(str, cX.domain.points)), list(map(str, cY.domain.points))]
        return False, witness
    matching: dict = {}
    for x in cX.domain.points:
        a, b = cX(x), cY(x)
        if matching.get(a, b) != b:
            witness["reason"] = f"point {x} forces two different prime matchings"
            return False, witness
        matching[a] = b
    if len(set(matching.values())) != len(matching):
        witness["reason"] = "comparison maps identify different fibres"
        return False, witness
    M = algebra_isomorphism(cX.algebra, cY.algebra, matching)
    if M is None:
        witness["reason"] = "no compatible algebra isomorphism"
        return False, witness
    witness["matching"] = {str(k): str(v) for k, v in matching.items()}
    return True, witness
