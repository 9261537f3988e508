"""Exact linear algebra over the rationals and the Gaussian rationals.

Vectors are plain lists, matrices are lists of rows. Every routine works over
any field whose elements support the arithmetic operators and compare equal
to 0, so the same code serves ``Fraction`` and ``QI``.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence


class QI:
    """A Gaussian rational ``re + im*i`` with ``Fraction`` parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    @staticmethod
    def coerce(x) -> "QI":
        if isinstance(x, QI):
            return x
        if isinstance(x, complex):
            return QI(Fraction(x.real), Fraction(x.imag))
        return QI(x, 0)

    def __add__(self, o):
        o = QI.coerce(o)
        return QI(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return QI(-self.re, -self.im)

    def __sub__(self, o):
        o = QI.coerce(o)
        return QI(self.re - o.re, self.im - o.im)

    def __rsub__(self, o):
        return QI.coerce(o) - self

    def __mul__(self, o):
        o = QI.coerce(o)
        return QI(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = QI.coerce(o)
        n = o.re * o.re + o.im * o.im
        if n == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        return QI((self.re * o.re + self.im * o.im) / n, (self.im * o.re - self.re * o.im) / n)

    def __rtruediv__(self, o):
        return QI.coerce(o) / self

    def conj(self) -> "QI":
        return QI(self.re, -self.im)

    def norm(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def __eq__(self, o):
        if isinstance(o, (int, Fraction, QI, complex)):
            o = QI.coerce(o)
            return self.re == o.re and self.im == o.im
        return NotImplemented

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __repr__(self):
        return f"QI({self.re}, {self.im})"

    def __str__(self):
        return format_qi(self)


def format_qi(z) -> str:
    """Serialize as ``a/b+c/d i``; the imaginary part is always present."""
    z = QI.coerce(z)
    im = z.im
    sign = "-" if im < 0 else "+"
    return f"{z.re}{sign}{abs(im)} i"


def parse_qi(text: str) -> QI:
    s = text.strip().replace(" ", "")
    if not s.endswith("i"):
        return QI(Fraction(s), 0)
    body = s[:-1]
    # split at the last sign that is not the leading one
    cut = max(body.rfind("+", 1), body.rfind("-", 1))
    if cut <= 0:
        return QI(0, Fraction(body or "1"))
    re, im = body[:cut], body[cut:]
    if im in ("+", "-"):
        im += "1"
    return QI(Fraction(re), Fraction(im))


def is_zero(x) -> bool:
    return x == 0


def zeros(n: int) -> list:
    return [Fraction(0)] * n


def unit(n: int, i: int) -> list:
    v = zeros(n)
    v[i] = Fraction(1)
    return v


def dot(u: Sequence, w: Sequence):
    s = 0
    for a, b in zip(u, w):
        if a != 0 and b != 0:
            s = s + a * b
    return s


def add(u: Sequence, w: Sequence) -> list:
    return [a + b for a, b in zip(u, w)]


def sub(u: Sequence, w: Sequence) -> list:
    return [a - b for a, b in zip(u, w)]


def scale(c, u: Sequence) -> list:
    return [c * a for a in u]


def combo(coeffs: Sequence, vectors: Sequence[Sequence], n: int | None = None) -> list:
    if n is None:
        n = len(vectors[0]) if vectors else 0
    out = [Fraction(0)] * n
    for c, v in zip(coeffs, vectors):
        if c == 0:
            continue
        for j, a in enumerate(v):
            if a != 0:
                out[j] = out[j] + c * a
    return out


def transpose(m: Sequence[Sequence], ncols: int | None = None) -> list:
    if not m:
        return [[] for _ in range(ncols or 0)]
    return [list(col) for col in zip(*m)]


def rref(rows: Iterable[Sequence]) -> tuple[list[list], list[int]]:
    """Reduced row echelon form; returns the nonzero rows and pivot columns."""
    m = [list(r) for r in rows]
    if not m:
        return [], []
    ncols = len(m[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        p = None
        for i in range(r, len(m)):
            if m[i][c] != 0:
                p = i
                break
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        inv = 1 / m[r][c]
        m[r] = [a * inv for a in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def rank(rows: Iterable[Sequence]) -> int:
    return len(rref(rows)[1])


def nullspace(rows: Sequence[Sequence], ncols: int) -> list[list]:
    """Basis of ``{x : A x = 0}`` for the matrix with the given rows."""
    red, piv = rref(rows) if rows else ([], [])
    free = [c for c in range(ncols) if c not in set(piv)]
    basis = []
    for f in free:
        x = [Fraction(0)] * ncols
        x[f] = Fraction(1)
        for r, pc in zip(red, piv):
            x[pc] = -r[f]
        basis.append(x)
    return basis


def solve(rows: Sequence[Sequence], rhs: Sequence, ncols: int):
    """One solution of ``A x = b`` with free variables set to zero, or None."""
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    red, piv = rref(aug)
    if ncols in piv:
        return None
    x = [Fraction(0)] * ncols
    for r, pc in zip(red, piv):
        x[pc] = r[ncols]
    return x


def solve_left(basis: Sequence[Sequence], target: Sequence):
    """Coefficients c with ``sum c_k basis[k] == target``, or None."""
    if not basis:
        return [] if all(t == 0 for t in target) else None
    return solve(transpose(basis), target, len(basis))


def span_basis(vectors: Iterable[Sequence]) -> list[list]:
    red, _ = rref(vectors)
    return red


def in_span(basis: Sequence[Sequence], v: Sequence) -> bool:
    if all(a == 0 for a in v):
        return True
    if not basis:
        return False
    return rank(list(basis) + [list(v)]) == rank(basis)


def subspace_eq(a: Sequence[Sequence], b: Sequence[Sequence]) -> bool:
    ra, rb = rank(a) if a else 0, rank(b) if b else 0
    if ra != rb:
        return False
    if ra == 0:
        return True
    return rank(list(a) + list(b)) == ra


def annihilator(vectors: Sequence[Sequence], n: int) -> list[list]:
    """Basis of the vectors x with ``dot(x, v) == 0`` for every given v."""
    return nullspace([list(v) for v in vectors], n) if vectors else [unit(n, i) for i in range(n)]


def intersect(a: Sequence[Sequence], b: Sequence[Sequence], n: int) -> list[list]:
    """Basis of span(a) ∩ span(b)."""
    if not a or not b:
        return []
    # x in both iff x = sum p_i a_i = sum q_j b_j
    cols = [list(v) for v in a] + [[-x for x in v] for v in b]
    rows = transpose(cols)
    ker = nullspace(rows, len(cols))
    out = [combo(k[: len(a)], a, n) for k in ker]
    return span_basis(out)


def restrict(functional_rows: Sequence[Sequence], basis: Sequence[Sequence]) -> list[list]:
    """Matrix of functionals evaluated on a basis: entry [i][k] = f_i(basis_k)."""
    return [[dot(f, b) for b in basis] for f in functional_rows]


def det2(m) -> Fraction:
    return m[0][0] * m[1][1] - m[0][1] * m[1][0]
