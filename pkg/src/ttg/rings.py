"""Finite-dimensional commutative algebras over F_p and their spectra.

Only split algebras are supported: every residue field must be F_p.  The
spectrum is computed without factoring anything when the algebra is given
by structure constants: Frobenius ``a -> a^p`` is F_p-linear, its fixed
points span the idempotents, and a high power of it has the nilradical as
kernel.  Algebras given by a presentation additionally factor their
polynomials so that an unsupported residue field is reported at the
offending term.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import ConsistencyError, ParseError, UnsupportedError, UsageError
from .linalg import (
    LinearSolver,
    image_basis_array,
    inverse_mod,
    is_prime,
    kernel_array,
    rank_array,
    rref_array,
)
from .spaces import ZARISKI, ClosedSet, FiniteSpectralSpace

__all__ = [
    "FinCommAlgebra",
    "Ideal",
    "PrimeIdeal",
    "GradedAlgebra",
    "Presentation",
    "parse_presentation",
    "spec",
    "nilradical",
    "v_ideal",
    "localize",
    "quotient",
    "spech",
    "direct_product",
]


# -- polynomials over F_p (coefficient lists, constant term first) -------


def poly_trim(c: list[int]) -> list[int]:
    c = list(c)
    while c and c[-1] == 0:
        c.pop()
    return c


def poly_mul(a: Sequence[int], b: Sequence[int], p: int) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return poly_trim(out)


def poly_mod(a: Sequence[int], f: Sequence[int], p: int) -> list[int]:
    """Remainder of ``a`` by the monic polynomial ``f``."""
    a = [x % p for x in a]
    d = len(f) - 1
    for k in range(len(a) - 1, d - 1, -1):
        c = a[k]
        if c:
            for j in range(d + 1):
                a[k - d + j] = (a[k - d + j] - c * f[j]) % p
    return poly_trim(a[:d])


def poly_eval(c: Sequence[int], x: int, p: int) -> int:
    v = 0
    for coeff in reversed(c):
        v = (v * x + coeff) % p
    return v


def poly_divide_linear(c: Sequence[int], root: int, p: int) -> list[int]:
    """Quotient of ``c`` by ``(x - root)``; assumes ``root`` is a root."""
    n = len(c) - 1
    q = [0] * n
    acc = 0
    for k in range(n, 0, -1):
        acc = (acc * root + c[k]) % p
        q[k - 1] = acc
    return q


def poly_to_str(c: Sequence[int]) -> str:
    terms = []
    for k in range(len(c) - 1, -1, -1):
        a = c[k]
        if not a:
            continue
        mono = "" if k == 0 else ("x" if k == 1 else f"x^{k}")
        if k == 0:
            terms.append(str(a))
        elif a == 1:
            terms.append(mono)
        else:
            terms.append(f"{a}{mono}")
    return "+".join(terms) if terms else "0"


def linear_factors(c: Sequence[int], p: int) -> tuple[list[tuple[int, int]], list[int]]:
    """Roots with multiplicity, and the cofactor without roots in F_p."""
    c = poly_trim(list(c))
    roots = []
    for a in range(p):
        mult = 0
        while len(c) > 1 and poly_eval(c, a, p) == 0:
            c = poly_divide_linear(c, a, p)
            mult += 1
        if mult:
            roots.append((a, mult))
    return roots, c


# -- algebras -------------------------------------------------------------


class FinCommAlgebra:
    """A finite-dimensional commutative associative unital F_p-algebra.

    Args:
        p: the characteristic.
        table: structure constants, ``e_i * e_j = sum_k table[i, j, k] e_k``.
        unit: coordinates of the identity element.
        labels: names of the basis vectors.
        name: display name.
        check: verify commutativity, associativity and the unit.
    """

    def __init__(self, p: int, table, unit, labels=None, name: str = "", check: bool = True):
        if not is_prime(int(p)):
            raise UsageError(f"characteristic {p} is not prime")
        table = np.array(table, dtype=np.int64) % p
        n = table.shape[0] if table.ndim == 3 else 0
        if table.size == 0:
            table = np.zeros((0, 0, 0), dtype=np.int64)
            n = 0
        if table.shape != (n, n, n):
            raise UsageError(f"structure constants must have shape (n, n, n), got {table.shape}")
        self.p = int(p)
        self.dim = n
        self.table = table
        self.table.flags.writeable = False
        self.unit = np.array(unit, dtype=np.int64).reshape(n) % p
        self.labels = tuple(labels) if labels is not None else tuple(f"e{i}" for i in range(n))
        if len(self.labels) != n:
            raise UsageError("one label per basis vector is required")
        self.name = name
        self.presentation: Optional[Presentation] = None
        self._spec = None
        if check:
            self._check_axioms()

    def _check_axioms(self):
        t = self.table
        if not np.array_equal(t, t.transpose(1, 0, 2)):
            raise UsageError("multiplication is not commutative")
        # (e_i e_j) e_k versus e_i (e_j e_k)
        left = np.einsum("ijm,mkn->ijkn", t, t) % self.p
        right = np.einsum("jkm,imn->ijkn", t, t) % self.p
        if not np.array_equal(left, right):
            raise UsageError("multiplication is not associative")
        if self.dim and not np.array_equal(
            np.einsum("i,ijk->jk", self.unit, t) % self.p, np.eye(self.dim, dtype=np.int64)
        ):
            raise UsageError("the unit does not act as the identity")

    # -- element arithmetic ------------------------------------------
    def vec(self, a) -> np.ndarray:
        if isinstance(a, (int, np.integer)):
            return (int(a) * self.unit) % self.p
        v = np.array(a, dtype=np.int64).reshape(-1) % self.p
        if v.shape[0] != self.dim:
            raise UsageError(f"element has {v.shape[0]} coordinates, expected {self.dim}")
        return v

    def zero(self) -> np.ndarray:
        return np.zeros(self.dim, dtype=np.int64)

    def one(self) -> np.ndarray:
        return self.unit.copy()

    def basis(self) -> list[np.ndarray]:
        return [np.eye(self.dim, dtype=np.int64)[i] for i in range(self.dim)]

    def mul(self, a, b) -> np.ndarray:
        return np.einsum("i,j,ijk->k", self.vec(a), self.vec(b), self.table) % self.p

    def power(self, a, k: int) -> np.ndarray:
        out = self.one()
        base = self.vec(a)
        while k:
            if k & 1:
                out = self.mul(out, base)
            base = self.mul(base, base)
            k >>= 1
        return out

    def mult_matrix(self, a) -> np.ndarray:
        """Matrix of ``x -> a*x``; column j is ``a * e_j``."""
        return np.einsum("i,ijk->kj", self.vec(a), self.table) % self.p

    def is_nilpotent(self, a) -> bool:
        return not np.any(self.power(a, max(self.dim, 1)))

    def is_unit(self, a) -> bool:
        return rank_array(self.mult_matrix(a), self.p) == self.dim

    def inverse(self, a) -> np.ndarray:
        x = LinearSolver(self.mult_matrix(a), self.p).solve(self.unit)
        if x is None:
            raise UsageError("element is not a unit")
        return x

    def elements(self) -> Iterable[np.ndarray]:
        for coords in itertools.product(range(self.p), repeat=self.dim):
            yield np.array(coords, dtype=np.int64)

    def element_str(self, a) -> str:
        a = self.vec(a)
        terms = []
        for c, lab in zip(a, self.labels):
            if c:
                terms.append(lab if c == 1 else f"{c}*{lab}")
        return " + ".join(terms) if terms else "0"

    def is_commutative(self) -> bool:
        return np.array_equal(self.table, self.table.transpose(1, 0, 2))

    def frobenius_matrix(self) -> np.ndarray:
        cols = [self.power(e, self.p) for e in self.basis()]
        if not cols:
            return np.zeros((0, 0), dtype=np.int64)
        return np.stack(cols, axis=1) % self.p

    def __repr__(self):
        nm = f" {self.name}" if self.name else ""
        return f"FinCommAlgebra{nm}(p={self.p}, dim={self.dim})"

    def is_isomorphic_via(self, other: "FinCommAlgebra", matrix) -> bool:
        """Check that ``matrix`` (self -> other) is a bijective algebra map."""
        m = np.array(matrix, dtype=np.int64) % self.p
        if m.shape != (other.dim, self.dim) or self.dim != other.dim:
            return False
        if rank_array(m, self.p) != self.dim:
            return False
        return is_algebra_hom(self, other, m)


def is_algebra_hom(src: FinCommAlgebra, dst: FinCommAlgebra, m) -> bool:
    m = np.array(m, dtype=np.int64) % src.p
    if not np.array_equal((m @ src.unit) % src.p, dst.unit):
        return False
    for i in range(src.dim):
        for j in range(src.dim):
            lhs = (m @ src.table[i, j]) % src.p
            rhs = dst.mul(m[:, i], m[:, j])
            if not np.array_equal(lhs, rhs):
                return False
    return True


def direct_product(*algebras: FinCommAlgebra, name: str = "") -> FinCommAlgebra:
    p = algebras[0].p
    n = sum(a.dim for a in algebras)
    table = np.zeros((n, n, n), dtype=np.int64)
    unit = np.zeros(n, dtype=np.int64)
    labels = []
    off = 0
    for k, a in enumerate(algebras):
        if a.p != p:
            raise UsageError("characteristic mismatch in product")
        s = slice(off, off + a.dim)
        table[s, s, s] = a.table
        unit[s] = a.unit
        labels += [f"{lab}[{k + 1}]" for lab in a.labels]
        off += a.dim
    return FinCommAlgebra(p, table, unit, labels, name)


# -- ideals ---------------------------------------------------------------


class Ideal:
    """An ideal given by generators; its F_p-span is computed on creation."""

    def __init__(self, algebra: FinCommAlgebra, gens: Iterable):
        self.algebra = algebra
        self.gens = [algebra.vec(g) for g in gens]
        if self.gens and algebra.dim:
            cols = np.concatenate([algebra.mult_matrix(g) for g in self.gens], axis=1)
            self.basis = image_basis_array(cols, algebra.p)
        else:
            self.basis = np.zeros((algebra.dim, 0), dtype=np.int64)

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def contains(self, a) -> bool:
        a = self.algebra.vec(a)
        if self.dim == 0:
            return not np.any(a)
        return rank_array(np.column_stack([self.basis, a]), self.algebra.p) == self.dim

    def __le__(self, other: "Ideal") -> bool:
        return all(other.contains(self.basis[:, k]) for k in range(self.dim))

    def __eq__(self, other):
        if not isinstance(other, Ideal):
            return NotImplemented
        return self.algebra is other.algebra and self <= other and other <= self

    def __hash__(self):
        return hash((id(self.algebra), self.dim))

    def __repr__(self):
        gens = ", ".join(self.algebra.element_str(self.basis[:, k]) for k in range(self.dim))
        return f"Ideal({gens or '0'})"


class PrimeIdeal(Ideal):
    """A prime of a split algebra: the kernel of a character ``A -> F_p``.

    Attributes:
        index: position of the local factor in the algebra's decomposition.
        idempotent: the primitive idempotent of that local factor.
        character: row vector ``chi`` with ``chi . a`` the residue of ``a``.
        label: display name.
    """

    def __init__(self, algebra, index, idempotent, character, label):
        self.index = index
        self.idempotent = idempotent
        self.character = np.array(character, dtype=np.int64) % algebra.p
        self.label = label
        kernel = kernel_array(self.character.reshape(1, -1), algebra.p)
        super().__init__(algebra, [kernel[:, k] for k in range(kernel.shape[1])])

    def residue(self, a) -> int:
        return int(self.character @ self.algebra.vec(a)) % self.algebra.p

    def contains(self, a) -> bool:
        return self.residue(a) == 0

    def __repr__(self):
        return f"PrimeIdeal({self.label})"


# -- presentations ----------------------------------------------------------


@dataclass
class PresentationTerm:
    p: int
    poly: list[int]
    start: int
    end: int
    text: str


@dataclass
class Presentation:
    text: str
    terms: list[PresentationTerm]


_TOKEN = re.compile(r"\s*(?:(\d+)|(.))")


class _Lexer:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def error(self, msg, pos=None):
        pos = self.pos if pos is None else pos
        line = self.text.count("\n", 0, pos) + 1
        col = pos - (self.text.rfind("\n", 0, pos) + 1) + 1
        return ParseError(msg, line, col)

    def expect(self, s: str):
        self.skip()
        if not self.text.startswith(s, self.pos):
            found = self.text[self.pos] if self.pos < len(self.text) else "end of input"
            raise self.error(f"expected {s!r}, found {found!r}")
        self.pos += len(s)

    def number(self) -> int:
        self.skip()
        m = re.match(r"\d+", self.text[self.pos:])
        if not m:
            raise self.error("expected a number")
        self.pos += len(m.group())
        return int(m.group())


def _parse_poly(lex: _Lexer, p: int) -> list[int]:
    coeffs: dict[int, int] = {}
    first = True
    while True:
        if not first:
            if lex.peek() != "+":
                break
            lex.expect("+")
        first = False
        start = lex.pos
        c = 1
        had_coeff = False
        if lex.peek().isdigit():
            c = lex.number()
            had_coeff = True
            if lex.peek() == "*":
                lex.expect("*")
        if lex.peek() == "x":
            lex.expect("x")
            k = 1
            if lex.peek() == "^":
                lex.expect("^")
                k = lex.number()
        elif had_coeff:
            k = 0
        else:
            raise lex.error("expected a monomial", start)
        coeffs[k] = coeffs.get(k, 0) + c
    deg = max(coeffs) if coeffs else 0
    return poly_trim([coeffs.get(k, 0) % p for k in range(deg + 1)])


def parse_presentation(text: str) -> FinCommAlgebra:
    """Parse ``F2[x]/(x^2+x) x F3...``-style products of quotients of F_p[x].

    The basis of each factor ``F_p[x]/(f)`` is ``1, x, ..., x^(d-1)``;
    factors are concatenated in the order written.
    """
    lex = _Lexer(text)
    terms: list[PresentationTerm] = []
    while True:
        lex.skip()
        start = lex.pos
        lex.expect("F")
        pstart = lex.pos
        p = lex.number()
        if not is_prime(p):
            raise lex.error(f"unsupported field: {p} is not prime", pstart)
        lex.expect("[")
        lex.expect("x")
        lex.expect("]")
        lex.expect("/")
        lex.expect("(")
        poly_start = lex.pos
        lex.skip()
        poly_start = lex.pos
        f = _parse_poly(lex, p)
        lex.expect(")")
        if not f or len(f) < 2:
            raise lex.error("the modulus must have degree at least 1", poly_start)
        if f[-1] != 1:
            raise lex.error(f"polynomial {poly_to_str(f)} is not monic mod {p}", poly_start)
        terms.append(PresentationTerm(p, f, start, lex.pos, text[start:lex.pos].strip()))
        if lex.peek() == "":
            break
        lex.expect("x")
    ps = {t.p for t in terms}
    if len(ps) != 1:
        raise lex.error(f"all factors must share one characteristic, found {sorted(ps)}", terms[0].start)
    p = terms[0].p
    parts = []
    for k, t in enumerate(terms):
        d = len(t.poly) - 1
        table = np.zeros((d, d, d), dtype=np.int64)
        for i in range(d):
            for j in range(d):
                mono = [0] * (i + j) + [1]
                r = poly_mod(mono, t.poly, p)
                table[i, j, : len(r)] = r
        unit = np.zeros(d, dtype=np.int64)
        unit[0] = 1
        labels = ["1"] + ["x" if i == 1 else f"x^{i}" for i in range(1, d)]
        parts.append(FinCommAlgebra(p, table, unit, labels, check=False))
    if len(parts) == 1:
        alg = parts[0]
    else:
        alg = direct_product(*parts)
    alg.name = " x ".join(t.text for t in terms)
    alg.presentation = Presentation(text, terms)
    alg._check_axioms()
    return alg


def element_from_polynomial(alg: FinCommAlgebra, poly_text: str) -> np.ndarray:
    """Image of a polynomial in x under F_p[x] -> A (presented algebras only)."""
    if alg.presentation is None:
        raise UsageError("polynomial elements need a presented algebra")
    lex = _Lexer(poly_text)
    if lex.peek() == "":
        raise ParseError("empty polynomial", 1, 1)
    f = _parse_poly(lex, alg.p)
    if lex.peek() != "":
        raise lex.error(f"unexpected {lex.peek()!r} in polynomial")
    out = []
    for t in alg.presentation.terms:
        r = poly_mod(f, t.poly, alg.p)
        d = len(t.poly) - 1
        out += r + [0] * (d - len(r))
    return np.array(out, dtype=np.int64)


# -- spectrum ---------------------------------------------------------------


def _primitive_idempotents(alg: FinCommAlgebra) -> list[np.ndarray]:
    p = alg.p
    frob = alg.frobenius_matrix()
    fixed = kernel_array((frob - np.eye(alg.dim, dtype=np.int64)) % p, p)
    idems = [alg.one()]
    for k in range(fixed.shape[1]):
        b = fixed[:, k]
        split = []
        for e in idems:
            be = alg.mul(b, e)
            for lam in range(p):
                part = e.copy()
                for mu in range(p):
                    if mu != lam:
                        factor = (be - mu * e) % p
                        part = (alg.mul(part, factor) * inverse_mod(lam - mu, p)) % p
                if np.any(part):
                    split.append(part)
        idems = split
    # deterministic order: descending lexicographic coordinates
    idems.sort(key=lambda v: tuple(-int(x) for x in v))
    return idems


def _nilradical_basis(alg: FinCommAlgebra) -> np.ndarray:
    if alg.dim == 0:
        return np.zeros((0, 0), dtype=np.int64)
    frob = alg.frobenius_matrix()
    k = 1
    while alg.p ** k < alg.dim:
        k += 1
    power = np.eye(alg.dim, dtype=np.int64)
    for _ in range(k):
        power = (power @ frob) % alg.p
    return kernel_array(power, alg.p)


def nilradical(alg: FinCommAlgebra) -> Ideal:
    """The ideal of nilpotent elements."""
    basis = _nilradical_basis(alg)
    ideal = Ideal(alg, [basis[:, k] for k in range(basis.shape[1])])
    return ideal


def _check_presentation_split(alg: FinCommAlgebra):
    pres = alg.presentation
    if pres is None:
        return
    for t in pres.terms:
        _, rest = linear_factors(t.poly, t.p)
        if len(rest) > 1:
            exc = UnsupportedError(
                f"unsupported presentation: {poly_to_str(t.poly)} has an irreducible factor "
                f"{poly_to_str(rest)} of degree {len(rest) - 1} > 1 over F_{t.p}"
            )
            # 1-based column inside the presentation text
            exc.column = t.start + 1
            raise exc


def _prime_labels(alg: FinCommAlgebra, idems: list[np.ndarray], chars: list[np.ndarray]) -> list[str]:
    pres = alg.presentation
    if pres is None:
        return [f"p{i + 1}" for i in range(len(idems))]
    # each idempotent lives in one term; the prime is (x - root) there
    labels = []
    offsets = np.cumsum([0] + [len(t.poly) - 1 for t in pres.terms])
    for e, chi in zip(idems, chars):
        term = next(k for k in range(len(pres.terms)) if np.any(e[offsets[k]:offsets[k + 1]]))
        x_vec = np.zeros(alg.dim, dtype=np.int64)
        if offsets[term + 1] - offsets[term] > 1:
            x_vec[offsets[term] + 1] = 1
        root = int(chi @ x_vec) % alg.p
        gen = "x" if root == 0 else f"x+{alg.p - root}"
        label = f"({gen})"
        if len(pres.terms) > 1:
            label = f"{term + 1}:{label}"
        labels.append(label)
    return labels


def spec(alg: FinCommAlgebra) -> tuple[FiniteSpectralSpace, list[PrimeIdeal]]:
    """Zariski spectrum of a split algebra: discrete, one point per local factor."""
    if alg._spec is not None:
        return alg._spec
    _check_presentation_split(alg)
    p = alg.p
    nil = _nilradical_basis(alg)
    idems = _primitive_idempotents(alg) if alg.dim else []
    chars = []
    for e in idems:
        # residue field of the local factor A e is A e / N e; it must be F_p
        ae = image_basis_array(alg.mult_matrix(e), p)
        ne = (alg.mult_matrix(e) @ nil) % p if nil.shape[1] else np.zeros((alg.dim, 0), dtype=np.int64)
        r_ae = ae.shape[1]
        r_ne = rank_array(ne, p) if ne.shape[1] else 0
        if r_ae - r_ne != 1:
            raise UnsupportedError(
                f"unsupported presentation: a residue field of {alg.name or 'the algebra'} "
                f"has dimension {r_ae - r_ne} over F_{p}"
            )
        # chi(a) = lambda where a e - lambda e lies in N
        cols = np.column_stack([e, nil]) if nil.shape[1] else e.reshape(-1, 1)
        solver = LinearSolver(cols, p)
        chi = np.zeros(alg.dim, dtype=np.int64)
        for j, bj in enumerate(alg.basis()):
            x = solver.solve(alg.mul(bj, e))
            if x is None:
                raise ConsistencyError("idempotent splitting failed")
            chi[j] = x[0]
        chars.append(chi)
    labels = _prime_labels(alg, idems, chars)
    primes = [PrimeIdeal(alg, i, e, chi, lab) for i, (e, chi, lab) in enumerate(zip(idems, chars, labels))]
    space = FiniteSpectralSpace(labels, (), ZARISKI, name=f"Spec({alg.name})" if alg.name else "Spec")
    alg._spec = (space, primes)
    return alg._spec


def prime_by_label(alg: FinCommAlgebra, label: str) -> PrimeIdeal:
    for q in spec(alg)[1]:
        if q.label == label:
            return q
    raise UsageError(f"no prime labelled {label!r}")


def v_ideal(alg: FinCommAlgebra, gens: Iterable) -> ClosedSet:
    """Primes containing every generator."""
    space, primes = spec(alg)
    gens = [alg.vec(g) for g in gens]
    pts = [q.label for q in primes if all(q.contains(g) for g in gens)]
    return ClosedSet(space, frozenset(pts))


def match_prime(alg: FinCommAlgebra, character) -> PrimeIdeal:
    """The prime whose character equals ``character`` (a row vector)."""
    chi = np.array(character, dtype=np.int64) % alg.p
    for q in spec(alg)[1]:
        if np.array_equal(q.character, chi):
            return q
    raise ConsistencyError("computed set is not one of the listed primes")


def quotient(alg: FinCommAlgebra, ideal_basis) -> tuple[FinCommAlgebra, np.ndarray, np.ndarray]:
    """A / I for an ideal spanned by the columns of ``ideal_basis``.

    Returns the quotient algebra, the projection matrix and a section
    (lift) matrix sending quotient coordinates to representatives.
    """
    p = alg.p
    n = alg.dim
    ib = np.array(ideal_basis, dtype=np.int64).reshape(n, -1) % p
    if ib.shape[1]:
        red, piv = rref_array(ib.T, p)
        red = red[: len(piv)]
    else:
        red, piv = np.zeros((0, n), dtype=np.int64), []
    keep = [c for c in range(n) if c not in set(piv)]
    proj = np.zeros((len(keep), n), dtype=np.int64)
    for j in range(n):
        v = np.zeros(n, dtype=np.int64)
        v[j] = 1
        for r, c in enumerate(piv):
            if v[c]:
                v = (v - v[c] * red[r]) % p
        proj[:, j] = v[keep]
    lift = np.zeros((n, len(keep)), dtype=np.int64)
    for k, c in enumerate(keep):
        lift[c, k] = 1
    m = len(keep)
    table = np.zeros((m, m, m), dtype=np.int64)
    for i in range(m):
        for j in range(m):
            table[i, j] = (proj @ alg.mul(lift[:, i], lift[:, j])) % p
    unit = (proj @ alg.unit) % p
    labels = [alg.labels[c] for c in keep]
    q = FinCommAlgebra(p, table, unit, labels, name=f"{alg.name}/I" if alg.name else "")
    return q, proj, lift


def localize(alg: FinCommAlgebra, gens: Iterable) -> tuple[FinCommAlgebra, np.ndarray]:
    """S^{-1}A for S generated by ``gens``, with the canonical map A -> S^{-1}A.

    For artinian A the localization is A modulo the union of the kernels of
    multiplication by powers of elements of S; that union is the kernel of
    multiplication by a high power of the product of the generators.
    """
    gens = [alg.vec(g) for g in gens]
    s = alg.one()
    for g in gens:
        s = alg.mul(s, g)
    s_pow = alg.power(s, max(alg.dim, 1))
    ker = kernel_array(alg.mult_matrix(s_pow), alg.p) if alg.dim else np.zeros((0, 0), dtype=np.int64)
    loc, proj, _ = quotient(alg, ker)
    loc.name = f"S^-1({alg.name})" if alg.name else "S^-1 A"
    return loc, proj


# -- graded algebras ------------------------------------------------------


class GradedAlgebra:
    """A Z-graded algebra with finitely many nonzero components.

    Args:
        p: the characteristic.
        dims: ``{degree: dimension}``.
        tables: ``{(i, j): array}`` of shape ``(dims[i], dims[j], dims[i+j])``;
            missing pairs multiply to zero.
        unit: coordinates of 1 in degree 0.
        sign_rule: ``"graded"`` for ab = (-1)^{|a||b|} ba, ``"plain"`` for ab = ba.
    """

    def __init__(self, p, dims, tables, unit, sign_rule="graded", name="", check=True):
        self.p = p
        self.dims = {int(k): int(v) for k, v in dims.items() if v}
        self.tables = {}
        for (i, j), t in tables.items():
            if i in self.dims and j in self.dims and (i + j) in self.dims:
                self.tables[(i, j)] = np.array(t, dtype=np.int64) % p
        self.unit = np.array(unit, dtype=np.int64) % p
        if sign_rule not in ("graded", "plain"):
            raise UsageError(f"unknown sign rule {sign_rule!r}")
        self.sign_rule = sign_rule
        self.name = name
        if check:
            self.check()

    def degrees(self) -> list[int]:
        return sorted(self.dims)

    def mul(self, i: int, a, j: int, b) -> np.ndarray:
        if (i, j) not in self.tables:
            return np.zeros(self.dims.get(i + j, 0), dtype=np.int64)
        return np.einsum("a,b,abc->c", a, b, self.tables[(i, j)]) % self.p

    def check(self):
        p = self.p
        for (i, j), t in self.tables.items():
            sign = (-1) ** (i * j) if self.sign_rule == "graded" else 1
            other = self.tables.get((j, i))
            swapped = other.transpose(1, 0, 2) if other is not None else np.zeros_like(t)
            if not np.array_equal(t, (sign * swapped) % p):
                raise UsageError(f"not graded-commutative in degrees ({i}, {j})")
        for i, j, k in itertools.product(self.dims, repeat=3):
            if (i + j + k) not in self.dims:
                continue
            for a, b, c in itertools.product(range(self.dims[i]), range(self.dims[j]), range(self.dims[k])):
                ea = np.eye(self.dims[i], dtype=np.int64)[a]
                eb = np.eye(self.dims[j], dtype=np.int64)[b]
                ec = np.eye(self.dims[k], dtype=np.int64)[c]
                left = self.mul(i + j, self.mul(i, ea, j, eb), k, ec)
                right = self.mul(i, ea, j + k, self.mul(j, eb, k, ec))
                if not np.array_equal(left, right):
                    raise UsageError("graded multiplication is not associative")

    def degree_zero(self) -> FinCommAlgebra:
        d = self.dims.get(0, 0)
        table = self.tables.get((0, 0), np.zeros((d, d, d), dtype=np.int64))
        return FinCommAlgebra(self.p, table, self.unit, name=f"({self.name})^0" if self.name else "")

    def check_nonzero_degrees_nilpotent(self):
        """Every homogeneous element of nonzero degree is nilpotent.

        With finitely many nonzero components this is automatic (powers leave
        the support); the powers of each basis element are still computed
        so that a malformed table is caught.
        """
        bound = max((abs(k) for k in self.dims), default=0)
        for k, d in self.dims.items():
            if k == 0:
                continue
            for a in range(d):
                x = np.eye(d, dtype=np.int64)[a]
                deg = k
                for _ in range(bound + 1):
                    if deg + k not in self.dims:
                        break
                    x = self.mul(deg, x, k, np.eye(d, dtype=np.int64)[a])
                    deg += k
                    if not np.any(x):
                        break
                else:
                    raise UnsupportedError(
                        f"unsupported graded shape: degree-{k} basis element {a} is not nilpotent"
                    )


def spech(g: GradedAlgebra):
    """Homogeneous spectrum under "nonzero degrees nilpotent".

    Returns the space (labels shared with ``spec(G^0)``), the projection
    ``p -> p^0`` as a dict, and the degree-zero algebra.  Each homogeneous
    prime is ``p^0 + (all components of nonzero degree)``.
    """
    g.check_nonzero_degrees_nilpotent()
    g0 = g.degree_zero()
    space0, primes0 = spec(g0)
    labels = [q.label for q in primes0]
    space = FiniteSpectralSpace(labels, (), ZARISKI, name=f"Spech({g.name})" if g.name else "Spech")
    projection = {lab: lab for lab in labels}
    return space, projection, g0
