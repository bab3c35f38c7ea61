"""Dense linear algebra over prime fields F_p.

Matrices are numpy int64 arrays with entries reduced into ``[0, p)``.  The
public ``Matrix`` class carries its characteristic so that mixing fields is
caught early; the ``*_array`` helpers work on raw arrays and are what the
rest of the package uses in inner loops.
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from .errors import UsageError

__all__ = [
    "Matrix",
    "LinearSolver",
    "is_prime",
    "inverse_mod",
    "rref",
    "rank",
    "kernel_basis",
    "solve",
    "kron",
    "rref_array",
    "kernel_array",
    "image_basis_array",
    "rank_array",
]


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


def inverse_mod(a: int, p: int) -> int:
    a = int(a) % p
    if a == 0:
        raise ZeroDivisionError(f"0 has no inverse mod {p}")
    return pow(a, -1, p)


def rref_array(a: np.ndarray, p: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row-echelon form of a 2-d integer array over F_p."""
    a = np.array(a, dtype=np.int64) % p
    if a.ndim != 2:
        raise UsageError("rref expects a 2-dimensional array")
    nrows, ncols = a.shape
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        nz = np.flatnonzero(a[r:, c])
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            a[[r, i]] = a[[i, r]]
        lead = int(a[r, c])
        if lead != 1:
            a[r, c:] = (a[r, c:] * inverse_mod(lead, p)) % p
        col = a[:, c].copy()
        col[r] = 0
        hit = np.flatnonzero(col)
        if hit.size:
            a[hit, c:] = (a[hit, c:] - np.outer(col[hit], a[r, c:])) % p
        pivots.append(c)
        r += 1
    return a, pivots


def rank_array(a: np.ndarray, p: int) -> int:
    a = np.asarray(a)
    if a.size == 0:
        return 0
    return len(rref_array(a, p)[1])


def kernel_array(a: np.ndarray, p: int) -> np.ndarray:
    """Basis of the right kernel, returned as the columns of an array."""
    a = np.asarray(a, dtype=np.int64)
    ncols = a.shape[1]
    if a.shape[0] == 0:
        return np.eye(ncols, dtype=np.int64)
    red, pivots = rref_array(a, p)
    free = [c for c in range(ncols) if c not in set(pivots)]
    basis = np.zeros((ncols, len(free)), dtype=np.int64)
    for k, c in enumerate(free):
        basis[c, k] = 1
        for row, pc in enumerate(pivots):
            basis[pc, k] = (-red[row, c]) % p
    return basis


def image_basis_array(a: np.ndarray, p: int) -> np.ndarray:
    """Columns of ``a`` forming a basis of its column space."""
    a = np.asarray(a, dtype=np.int64)
    if a.shape[1] == 0:
        return a.copy()
    _, pivots = rref_array(a, p)
    return a[:, pivots] % p


class LinearSolver:
    """Solves ``m x = b`` repeatedly for a fixed matrix ``m`` over F_p.

    The row operations bringing ``m`` to reduced echelon form are recorded
    once, so each later solve is a matrix-vector product.
    """

    def __init__(self, m: np.ndarray, p: int):
        m = np.asarray(m, dtype=np.int64) % p
        self.p = p
        self.shape = m.shape
        nrows, ncols = m.shape
        aug = np.concatenate([m, np.eye(nrows, dtype=np.int64)], axis=1)
        red, pivots = rref_array(aug, p)
        self.pivots = [c for c in pivots if c < ncols]
        self.rank = len(self.pivots)
        self.transform = red[:, ncols:]
        self.reduced = red[:, :ncols]

    def solve(self, b: np.ndarray) -> Optional[np.ndarray]:
        """Return some solution of ``m x = b``, or None if inconsistent."""
        b = np.asarray(b, dtype=np.int64)
        if b.shape[0] != self.shape[0]:
            raise UsageError(
                f"right-hand side has length {b.shape[0]}, expected {self.shape[0]}"
            )
        y = (self.transform @ b) % self.p
        if np.any(y[self.rank:]):
            return None
        x = np.zeros((self.shape[1],) + b.shape[1:], dtype=np.int64)
        x[self.pivots] = y[: self.rank]
        return x

    def solve_many(self, bs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Solve for every column of ``bs``; returns (solutions, solvable mask)."""
        bs = np.asarray(bs, dtype=np.int64)
        y = (self.transform @ bs) % self.p
        ok = ~np.any(y[self.rank:], axis=0)
        x = np.zeros((self.shape[1], bs.shape[1]), dtype=np.int64)
        x[self.pivots] = y[: self.rank]
        return x, ok


class Matrix:
    """An immutable matrix over the prime field F_p."""

    __slots__ = ("p", "data")

    def __init__(self, entries, p: int):
        if not is_prime(int(p)):
            raise UsageError(f"characteristic {p} is not prime")
        arr = np.array(entries, dtype=np.int64)
        if arr.ndim == 1 and arr.size == 0:
            arr = arr.reshape(0, 0)
        if arr.ndim != 2:
            raise UsageError("a Matrix needs a 2-dimensional grid of entries")
        arr %= p
        arr.flags.writeable = False
        object.__setattr__(self, "p", int(p))
        object.__setattr__(self, "data", arr)

    def __setattr__(self, name, value):
        raise AttributeError("Matrix is immutable")

    @classmethod
    def identity(cls, n: int, p: int) -> "Matrix":
        return cls(np.eye(n, dtype=np.int64), p)

    @classmethod
    def zeros(cls, rows: int, cols: int, p: int) -> "Matrix":
        return cls(np.zeros((rows, cols), dtype=np.int64), p)

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    @property
    def T(self) -> "Matrix":
        return Matrix(self.data.T, self.p)

    def _check(self, other: "Matrix"):
        if not isinstance(other, Matrix):
            raise UsageError("expected a Matrix")
        if other.p != self.p:
            raise UsageError(f"characteristic mismatch: {self.p} vs {other.p}")

    def __matmul__(self, other):
        if isinstance(other, np.ndarray):
            return (self.data @ other) % self.p
        self._check(other)
        if self.cols != other.rows:
            raise UsageError(f"cannot multiply {self.shape} by {other.shape}")
        return Matrix(self.data @ other.data, self.p)

    def __add__(self, other):
        self._check(other)
        if self.shape != other.shape:
            raise UsageError(f"cannot add {self.shape} and {other.shape}")
        return Matrix(self.data + other.data, self.p)

    def __sub__(self, other):
        self._check(other)
        if self.shape != other.shape:
            raise UsageError(f"cannot subtract {self.shape} and {other.shape}")
        return Matrix(self.data - other.data, self.p)

    def __neg__(self):
        return Matrix(-self.data, self.p)

    def __mul__(self, scalar: int):
        return Matrix(self.data * int(scalar), self.p)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.p == other.p and self.shape == other.shape and bool(
            np.array_equal(self.data, other.data)
        )

    def __hash__(self):
        return hash((self.p, self.shape, self.data.tobytes()))

    def __repr__(self):
        return f"Matrix({self.data.tolist()}, p={self.p})"

    def tolist(self) -> list[list[int]]:
        return self.data.tolist()


def rref(m: Matrix) -> tuple[Matrix, list[int]]:
    """Reduced row-echelon form and the (strictly increasing) pivot columns."""
    red, pivots = rref_array(m.data, m.p)
    return Matrix(red, m.p), pivots


def rank(m: Matrix) -> int:
    return rank_array(m.data, m.p)


def kernel_basis(m: Matrix) -> list[np.ndarray]:
    """Basis of ``{v : m v = 0}`` as a list of 1-d arrays."""
    basis = kernel_array(m.data, m.p)
    return [basis[:, k].copy() for k in range(basis.shape[1])]


def solve(m: Matrix, b: Sequence[int]) -> Optional[np.ndarray]:
    """A solution of ``m x = b`` or None when the system is inconsistent."""
    b = np.asarray(b, dtype=np.int64)
    if b.ndim != 1 or b.shape[0] != m.rows:
        raise UsageError(
            f"right-hand side of length {b.shape[0] if b.ndim else 0} "
            f"does not match {m.rows} rows"
        )
    return LinearSolver(m.data, m.p).solve(b % m.p)


def kron(a: Matrix, b: Matrix) -> Matrix:
    """Kronecker product: block (i, j) is ``a[i][j] * b``."""
    a._check(b)
    return Matrix(np.kron(a.data, b.data), a.p)
