"""Curves, signed Dehn twists and monodromy words at the level of homology.

Matrices are numpy arrays of dtype ``object`` holding Python ints, so all
products are exact regardless of entry growth.  The intersection pairing
is ``<x, y> = x^T J y`` and a twist of chirality ``eps`` along ``c`` acts by
``x -> x + eps <x, c> c``.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace
from math import gcd
from typing import Iterable, Literal, Sequence, TextIO

import numpy as np

__all__ = [
    "SymplecticSpace",
    "Curve",
    "TwistLetter",
    "MonodromyWord",
    "WordFormatError",
    "twist_matrix",
    "word_matrices",
    "is_identity_factorization",
    "hurwitz_move",
    "mirror_word",
    "conjugate_word",
    "read_word",
    "write_word",
    "load_word",
    "save_word",
    "chain_curves",
    "random_primitive_curve",
    "random_symplectic",
]


def _int_matrix(rows) -> np.ndarray:
    arr = np.empty((len(rows), len(rows[0]) if len(rows) else 0), dtype=object)
    for i, r in enumerate(rows):
        for j, x in enumerate(r):
            arr[i, j] = int(x)
    return arr


@dataclass(frozen=True)
class SymplecticSpace:
    """``H_1`` of a genus-``g`` surface with basis ``a_1..a_g, b_1..b_g``."""

    g: int

    def __post_init__(self):
        if self.g < 1:
            raise ValueError("genus must be >= 1")

    @property
    def dim(self) -> int:
        return 2 * self.g

    @property
    def J(self) -> np.ndarray:
        g = self.g
        J = _int_matrix([[0] * (2 * g) for _ in range(2 * g)])
        for i in range(g):
            J[i, g + i] = 1
            J[g + i, i] = -1
        return J

    def identity(self) -> np.ndarray:
        return _int_matrix(np.eye(self.dim, dtype=int).tolist())

    def pairing(self, x: Sequence[int], y: Sequence[int]) -> int:
        g = self.g
        return sum(int(x[i]) * int(y[g + i]) - int(x[g + i]) * int(y[i]) for i in range(g))

    def is_symplectic(self, M: np.ndarray) -> bool:
        M = np.asarray(M, dtype=object)
        if M.shape != (self.dim, self.dim):
            return False
        return bool(np.array_equal(M.T @ self.J @ M, self.J))

    def inverse(self, M: np.ndarray) -> np.ndarray:
        """Exact inverse of a symplectic matrix, ``-J M^T J``."""
        J = self.J
        return -(J @ np.asarray(M, dtype=object).T @ J)

    def basis_labels(self) -> list[str]:
        return [f"a{i + 1}" for i in range(self.g)] + [f"b{i + 1}" for i in range(self.g)]


@dataclass(frozen=True)
class Curve:
    """Homology class of a simple closed curve plus separating data.

    ``separating`` is the genus split ``(h, g - h)``; it is set exactly when
    the class is zero.
    """

    homology: tuple[int, ...]
    separating: tuple[int, int] | None = None

    def __post_init__(self):
        h = tuple(int(x) for x in self.homology)
        object.__setattr__(self, "homology", h)
        zero = not any(h)
        if self.separating is not None:
            split = tuple(int(x) for x in self.separating)
            object.__setattr__(self, "separating", split)
            if not zero:
                raise ValueError("separating curve must have zero homology class")
            if len(split) != 2 or min(split) < 1 or sum(split) * 2 != len(h):
                raise ValueError(f"invalid genus split {split} for genus {len(h) // 2}")
        elif zero:
            raise ValueError("zero homology class requires separating data")
        else:
            g = 0
            for x in h:
                g = gcd(g, x)
            if g != 1:
                raise ValueError(f"nonseparating class {h} is not primitive")

    @classmethod
    def separating_curve(cls, g: int, h: int) -> "Curve":
        return cls((0,) * (2 * g), (h, g - h))

    @property
    def is_separating(self) -> bool:
        return self.separating is not None

    @property
    def genus(self) -> int:
        return len(self.homology) // 2


@dataclass(frozen=True)
class TwistLetter:
    """Dehn twist along ``curve``; chirality +1 right-handed, -1 left-handed (achiral).

    ``matrix`` optionally pins the homology action explicitly (generalized
    letters); otherwise it is the transvection along ``curve``.
    """

    curve: Curve
    chirality: int = 1
    matrix: tuple[tuple[int, ...], ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.chirality not in (1, -1):
            raise ValueError("chirality must be +1 or -1")

    @property
    def is_separating(self) -> bool:
        return self.curve.is_separating

    def inverse(self) -> "TwistLetter":
        m = None
        if self.matrix is not None:
            space = SymplecticSpace(self.curve.genus)
            m = _freeze(space.inverse(_int_matrix(self.matrix)))
        return TwistLetter(self.curve, -self.chirality, m)


def _freeze(M: np.ndarray) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(int(x) for x in row) for row in M)


@dataclass(frozen=True)
class MonodromyWord:
    g: int
    letters: tuple[TwistLetter, ...] = ()
    base: Literal["sphere"] = "sphere"

    def __post_init__(self):
        object.__setattr__(self, "letters", tuple(self.letters))
        if self.base != "sphere":
            raise ValueError("only sphere bases are supported")
        for k, letter in enumerate(self.letters):
            if letter.curve.genus != self.g:
                raise ValueError(f"letter {k} lives in genus {letter.curve.genus}, word has g={self.g}")

    def __len__(self) -> int:
        return len(self.letters)

    def __add__(self, other: "MonodromyWord") -> "MonodromyWord":
        if other.g != self.g:
            raise ValueError("cannot concatenate words of different genus")
        return MonodromyWord(self.g, self.letters + other.letters)

    def __mul__(self, n: int) -> "MonodromyWord":
        return MonodromyWord(self.g, self.letters * n)

    @property
    def space(self) -> SymplecticSpace:
        return SymplecticSpace(self.g)

    @property
    def n_plus(self) -> int:
        return sum(1 for t in self.letters if t.chirality == 1)

    @property
    def n_minus(self) -> int:
        return sum(1 for t in self.letters if t.chirality == -1)

    @classmethod
    def from_curves(cls, g: int, curves: Iterable[Sequence[int] | Curve],
                    chirality: int = 1) -> "MonodromyWord":
        letters = []
        for c in curves:
            curve = c if isinstance(c, Curve) else Curve(tuple(c))
            letters.append(TwistLetter(curve, chirality))
        return cls(g, tuple(letters))

    def text(self) -> str:
        buf = [f"word g={self.g} base={self.base}"]
        for t in self.letters:
            eps = "+1" if t.chirality == 1 else "-1"
            if t.is_separating:
                buf.append(f"twist {eps} sep {t.curve.separating[0]}")
            else:
                buf.append(f"twist {eps} c " + " ".join(str(x) for x in t.curve.homology))
        return "\n".join(buf) + "\n"

    def digest(self) -> str:
        return hashlib.sha256(self.text().encode()).hexdigest()


def twist_matrix(space: SymplecticSpace, letter: TwistLetter) -> np.ndarray:
    """Homology action ``I + eps * c (J c)^T``; identity for separating curves."""
    if letter.matrix is not None:
        return _int_matrix(letter.matrix)
    c = letter.curve.homology
    if len(c) != space.dim:
        raise ValueError(f"curve has {len(c)} coordinates, space needs {space.dim}")
    if letter.is_separating:
        return space.identity()
    cv = np.array(c, dtype=object)
    Jc = space.J @ cv
    M = space.identity()
    eps = letter.chirality
    for i in range(space.dim):
        for j in range(space.dim):
            M[i, j] += eps * cv[i] * Jc[j]
    return M


def word_matrices(space: SymplecticSpace, word: MonodromyWord) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Per-letter matrices and prefix products ``P_0 = I, P_j = M_1 ... M_j``."""
    mats = [twist_matrix(space, t) for t in word.letters]
    prefix = [space.identity()]
    for M in mats:
        prefix.append(prefix[-1] @ M)
    return mats, prefix


def is_identity_factorization(space: SymplecticSpace, word: MonodromyWord) -> bool:
    _, prefix = word_matrices(space, word)
    return bool(np.array_equal(prefix[-1], space.identity()))


def _transport(space: SymplecticSpace, M: np.ndarray, letter: TwistLetter) -> TwistLetter:
    """Letter whose action is ``M T M^{-1}``; the twist along the image class."""
    if letter.matrix is not None:
        return TwistLetter(letter.curve, letter.chirality,
                           _freeze(M @ _int_matrix(letter.matrix) @ space.inverse(M)))
    if letter.is_separating:
        return letter
    image = M @ np.array(letter.curve.homology, dtype=object)
    return TwistLetter(Curve(tuple(int(x) for x in image)), letter.chirality)


def hurwitz_move(word: MonodromyWord, j: int, direction: Literal["left", "right"] = "right") -> MonodromyWord:
    """Elementary Hurwitz move on the adjacent pair at positions ``j, j + 1`` (0-based).

    right: ``(t_j, t_{j+1}) -> (t_j t_{j+1} t_j^{-1}, t_j)``
    left:  ``(t_j, t_{j+1}) -> (t_{j+1}, t_{j+1}^{-1} t_j t_{j+1})``
    """
    n = len(word)
    if not 0 <= j < n - 1:
        raise IndexError(f"Hurwitz move position {j} out of range for word of length {n}")
    space = word.space
    a, b = word.letters[j], word.letters[j + 1]
    if direction == "right":
        pair = (_transport(space, twist_matrix(space, a), b), a)
    elif direction == "left":
        pair = (b, _transport(space, space.inverse(twist_matrix(space, b)), a))
    else:
        raise ValueError("direction must be 'left' or 'right'")
    letters = word.letters[:j] + pair + word.letters[j + 2:]
    return replace(word, letters=letters)


def mirror_word(word: MonodromyWord) -> MonodromyWord:
    """Orientation reversal: reverse the order and flip every chirality."""
    return replace(word, letters=tuple(t.inverse() for t in reversed(word.letters)))


def conjugate_word(word: MonodromyWord, C: np.ndarray) -> MonodromyWord:
    """Replace every letter's action ``M`` by ``C M C^{-1}``."""
    space = word.space
    C = np.asarray(C, dtype=object)
    return replace(word, letters=tuple(_transport(space, C, t) for t in word.letters))


# ------------------------------------------------------------------- file format

class WordFormatError(ValueError):
    def __init__(self, message: str, line: int = 0):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


def read_word(fh: TextIO) -> MonodromyWord:
    lines = [(k + 1, ln.split()) for k, ln in enumerate(fh)]
    lines = [(k, tok) for k, tok in lines if tok and not tok[0].startswith("#")]
    if not lines:
        raise WordFormatError("empty file", 1)
    k, head = lines[0]
    fields = dict(t.split("=", 1) for t in head[1:] if "=" in t)
    if head[0] != "word" or "g" not in fields or len(fields) != len(head) - 1:
        raise WordFormatError('expected header "word g=<g> base=sphere"', k)
    try:
        g = int(fields["g"])
    except ValueError:
        raise WordFormatError("genus must be an integer", k) from None
    if g < 1:
        raise WordFormatError("genus must be >= 1", k)
    base = fields.get("base", "sphere")
    if base != "sphere":
        raise WordFormatError(f"unsupported base {base!r}", k)
    letters = []
    for k, tok in lines[1:]:
        if tok[0] != "twist" or len(tok) < 3:
            raise WordFormatError("expected 'twist <eps> c <2g ints>' or 'twist <eps> sep <h>'", k)
        try:
            eps = int(tok[1])
            nums = [int(x) for x in tok[3:]]
        except ValueError:
            raise WordFormatError("entries must be exact integers", k) from None
        if eps not in (1, -1):
            raise WordFormatError("chirality must be +1 or -1", k)
        try:
            if tok[2] == "c":
                if len(nums) != 2 * g:
                    raise WordFormatError(f"expected {2 * g} integers, got {len(nums)}", k)
                curve = Curve(tuple(nums))
            elif tok[2] == "sep":
                if len(nums) != 1:
                    raise WordFormatError("expected 'sep <h>'", k)
                curve = Curve.separating_curve(g, nums[0])
            else:
                raise WordFormatError(f"unknown curve kind {tok[2]!r}", k)
        except WordFormatError:
            raise
        except ValueError as exc:
            raise WordFormatError(str(exc), k) from None
        letters.append(TwistLetter(curve, eps))
    return MonodromyWord(g, tuple(letters))


def write_word(word: MonodromyWord, fh: TextIO) -> None:
    if any(t.matrix is not None for t in word.letters):
        raise ValueError("generalized letters with explicit matrices cannot be serialized")
    fh.write(word.text())


def load_word(path) -> MonodromyWord:
    with open(path) as fh:
        return read_word(fh)


def save_word(word: MonodromyWord, path) -> None:
    with open(path, "w") as fh:
        write_word(word, fh)


# ----------------------------------------------------------------- generators

def chain_curves(g: int, length: int | None = None) -> list[tuple[int, ...]]:
    """Homology classes of a maximal chain ``a1, b1, a1 - a2, b2, a2 - a3, ..., bg, ag``.

    Consecutive classes pair to +-1, all others to 0.
    """
    def vec(**coef):
        v = [0] * (2 * g)
        for k, x in coef.items():
            idx = int(k[1:]) - 1 + (g if k[0] == "b" else 0)
            v[idx] += x
        return tuple(v)

    chain = [vec(a1=1), vec(b1=1)]
    for i in range(1, g):
        chain.append(vec(**{f"a{i}": 1, f"a{i + 1}": -1}))
        chain.append(vec(**{f"b{i + 1}": 1}))
    chain.append(vec(**{f"a{g}": 1}))
    return chain if length is None else chain[:length]


def random_primitive_curve(g: int, rng: np.random.Generator, bound: int = 4) -> Curve:
    while True:
        v = rng.integers(-bound, bound + 1, size=2 * g)
        d = 0
        for x in v:
            d = gcd(d, int(x))
        if d == 1:
            return Curve(tuple(int(x) for x in v))


def random_symplectic(space: SymplecticSpace, rng: np.random.Generator,
                      length: int = 6) -> np.ndarray:
    """Random product of signed transvections along the basis and chain classes."""
    gens = chain_curves(space.g)
    gens += [tuple(int(i == k + space.g) for i in range(space.dim)) for k in range(space.g)]
    M = space.identity()
    for _ in range(length):
        c = gens[int(rng.integers(len(gens)))]
        eps = 1 if rng.random() < 0.5 else -1
        M = M @ twist_matrix(space, TwistLetter(Curve(c), eps))
    if rng.random() < 0.1:
        M = -M
    return M
