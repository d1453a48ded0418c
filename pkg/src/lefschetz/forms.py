"""Exact linear algebra over Q: nullspaces and signatures of symmetric forms."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm
from typing import Sequence

__all__ = ["RationalSymmetricForm", "rational_nullspace", "signature"]


def rational_nullspace(rows: Sequence[Sequence[int | Fraction]]) -> list[list[int]]:
    """Basis of ``{x : M x = 0}`` as primitive integer vectors."""
    m = [[Fraction(x) for x in r] for r in rows]
    ncols = len(m[0]) if m else 0
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        pv = m[r][c]
        m[r] = [x / pv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    basis = []
    pivset = set(pivots)
    for free in (c for c in range(ncols) if c not in pivset):
        v = [Fraction(0)] * ncols
        v[free] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -m[i][free]
        den = lcm(*(x.denominator for x in v))
        iv = [int(x * den) for x in v]
        g = 0
        for x in iv:
            g = gcd(g, x)
        basis.append([x // g for x in iv])
    return basis


def _inertia(entries: Sequence[Sequence[int | Fraction]]) -> tuple[int, int, int]:
    """(n_plus, n_minus, n_zero) by symmetric Gaussian elimination.

    A zero diagonal with a nonzero off-diagonal entry ``s[i][j]`` is handled
    by the congruence ``row_i += row_j, col_i += col_j``, which puts
    ``2 s[i][j] != 0`` on the diagonal.
    """
    s = [[Fraction(x) for x in r] for r in entries]
    n = len(s)
    pos = neg = 0
    while s:
        k = next((i for i in range(len(s)) if s[i][i] != 0), None)
        if k is None:
            pair = next(((i, j) for i in range(len(s)) for j in range(len(s)) if s[i][j] != 0), None)
            if pair is None:
                break
            i, j = pair
            s[i] = [a + b for a, b in zip(s[i], s[j])]
            for row in s:
                row[i] += row[j]
            k = i
        p = s[k][k]
        if p > 0:
            pos += 1
        else:
            neg += 1
        col = [row[k] for row in s]
        keep = [i for i in range(len(s)) if i != k]
        s = [[s[i][j] - col[i] * s[k][j] / p for j in keep] for i in keep]
    return pos, neg, n - pos - neg


def signature(entries: Sequence[Sequence[int | Fraction]]) -> int:
    pos, neg, _ = _inertia(entries)
    return pos - neg


@dataclass(frozen=True)
class RationalSymmetricForm:
    """Symmetric bilinear form with exact rational Gram matrix."""

    entries: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(Fraction(x) for x in r) for r in self.entries)
        n = len(rows)
        if any(len(r) != n for r in rows):
            raise ValueError("Gram matrix must be square")
        if any(rows[i][j] != rows[j][i] for i in range(n) for j in range(i)):
            raise ValueError("Gram matrix must be symmetric")
        object.__setattr__(self, "entries", rows)

    @classmethod
    def symmetrize(cls, gram: Sequence[Sequence[int | Fraction]]) -> "RationalSymmetricForm":
        n = len(gram)
        return cls(tuple(tuple((Fraction(gram[i][j]) + Fraction(gram[j][i])) / 2 for j in range(n))
                         for i in range(n)))

    @property
    def dimension(self) -> int:
        return len(self.entries)

    def inertia(self) -> tuple[int, int, int]:
        return _inertia(self.entries)

    def signature(self) -> int:
        pos, neg, _ = self.inertia()
        return pos - neg

    def rank(self) -> int:
        pos, neg, _ = self.inertia()
        return pos + neg
