"""Meyer signature cocycle and signatures of achiral Lefschetz fibrations.

``meyer_tau(A, B)`` is the signature of the symmetrized form
``((x1, y1), (x2, y2)) -> (x1 + y1)^T J (I - B) y2`` restricted to

    V = {(x, y) : (A^{-1} - I) x + (B - I) y = 0},

evaluated in exact integer/rational arithmetic.  A sphere-based word
``t_1 ... t_n`` with identity product then has

    sigma = sum_j tau(P_j, M_{j+1}) + sum of local terms,

where the local term is 0 for nonseparating vanishing cycles, -1 for a
separating right-handed twist and +1 for a separating left-handed one.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from .forms import RationalSymmetricForm, rational_nullspace
from .mcg import (
    MonodromyWord,
    SymplecticSpace,
    TwistLetter,
    is_identity_factorization,
    word_matrices,
)

__all__ = [
    "MEYER_SIGN",
    "NotSymplecticError",
    "OpenFibrationError",
    "SignatureReport",
    "meyer_form",
    "meyer_tau",
    "cocycle_defect",
    "conjugation_invariance",
    "local_signature",
    "fibration_signature",
    "pairing_report",
]

# Fixed once by sigma(E(1)) = -8 for (t_a t_b)^6 with right-handed twists.
MEYER_SIGN = 1


class NotSymplecticError(ValueError):
    pass


class OpenFibrationError(ValueError):
    """The word's monodromy product is not the identity."""

    def __init__(self, product: np.ndarray):
        self.product = product
        rows = "\n".join("  " + " ".join(f"{int(x):>4d}" for x in row) for row in product)
        super().__init__(f"monodromy product is not the identity:\n{rows}")


def _check(space: SymplecticSpace, *mats: np.ndarray) -> list[np.ndarray]:
    out = []
    for M in mats:
        M = np.asarray(M, dtype=object)
        if not space.is_symplectic(M):
            raise NotSymplecticError("matrix is not in Sp(2g, Z) for the standard form")
        out.append(M)
    return out


def meyer_form(space: SymplecticSpace, A: np.ndarray, B: np.ndarray) -> RationalSymmetricForm:
    """The symmetric form on ``V`` whose signature is ``tau(A, B)``."""
    A, B = _check(space, A, B)
    n = space.dim
    I = space.identity()
    system = np.concatenate([space.inverse(A) - I, B - I], axis=1)
    basis = rational_nullspace(system.tolist())
    if not basis:
        return RationalSymmetricForm(())
    V = np.array(basis, dtype=object).T  # (2n, d)
    X, Y = V[:n], V[n:]
    gram = (X + Y).T @ (space.J @ (I - B)) @ Y
    return RationalSymmetricForm.symmetrize(gram.tolist())


def meyer_tau(space: SymplecticSpace, A: np.ndarray, B: np.ndarray) -> int:
    return meyer_form(space, A, B).signature()


def cocycle_defect(space: SymplecticSpace, A, B, C) -> int:
    """``tau(A,B) + tau(AB,C) - tau(A,BC) - tau(B,C)``; zero for a cocycle."""
    A, B, C = _check(space, A, B, C)
    return (meyer_tau(space, A, B) + meyer_tau(space, A @ B, C)
            - meyer_tau(space, A, B @ C) - meyer_tau(space, B, C))


def conjugation_invariance(space: SymplecticSpace, A, B, C) -> bool:
    A, B, C = _check(space, A, B, C)
    Ci = space.inverse(C)
    return meyer_tau(space, C @ A @ Ci, C @ B @ Ci) == meyer_tau(space, A, B)


def local_signature(letter: TwistLetter) -> int:
    """Signature of a regular neighbourhood of the singular fiber.

    A nonseparating node gives the rank-one form ``[F]^2 = 0``.  A separating
    node splits the fiber into two components ``F1, F2`` with
    ``F1.F2 = +-1`` and ``F1^2 = F2^2 = -+1``: the form ``[[-1, 1], [1, -1]]``
    (signature -1) for a right-handed twist, and its negative for a
    left-handed one.
    """
    if not letter.is_separating:
        return 0
    return -letter.chirality


@dataclass(frozen=True)
class SignatureReport:
    sigma: int
    meyer_sum: int
    local_sum: int
    n_plus: int
    n_minus: int
    n_sep_plus: int
    n_sep_minus: int
    c1_pairing: Fraction
    delta_pairing: int
    word_hash: str = ""

    def __post_init__(self):
        if self.sigma != MEYER_SIGN * self.meyer_sum + self.local_sum:
            raise ValueError("sigma inconsistent with Meyer sum and local terms")
        if self.delta_pairing != self.n_plus - self.n_minus:
            raise ValueError("delta_pairing must equal n_plus - n_minus")
        if Fraction(self.c1_pairing) != Fraction(self.sigma + self.delta_pairing, 4):
            raise ValueError("c1_pairing must equal (sigma + delta) / 4")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["c1_pairing"] = str(Fraction(self.c1_pairing))
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False) + "\n"

    def summary(self) -> str:
        return f"sigma={self.sigma} c1={Fraction(self.c1_pairing)} delta={self.delta_pairing}"


def fibration_signature(space: SymplecticSpace, word: MonodromyWord) -> SignatureReport:
    """Signature of the closed 4-manifold described by a sphere-based word."""
    mats, prefix = word_matrices(space, word)
    if not np.array_equal(prefix[-1], space.identity()):
        raise OpenFibrationError(prefix[-1])
    meyer_sum = sum(meyer_tau(space, prefix[j], mats[j]) for j in range(1, len(mats)))
    local = sum(local_signature(t) for t in word.letters)
    sigma = MEYER_SIGN * meyer_sum + local
    n_plus, n_minus = word.n_plus, word.n_minus
    delta = n_plus - n_minus
    return SignatureReport(
        sigma=sigma,
        meyer_sum=meyer_sum,
        local_sum=local,
        n_plus=n_plus,
        n_minus=n_minus,
        n_sep_plus=sum(1 for t in word.letters if t.is_separating and t.chirality == 1),
        n_sep_minus=sum(1 for t in word.letters if t.is_separating and t.chirality == -1),
        c1_pairing=Fraction(sigma + delta, 4),
        delta_pairing=delta,
        word_hash=word.digest() if all(t.matrix is None for t in word.letters) else "",
    )


def pairing_report(report: SignatureReport) -> tuple[Fraction, int, bool]:
    """Restate ``<c1(lambda), phi>`` and the signed node count; check the formula.

    For words without left-handed letters the check also requires the
    chiral form ``sigma = 4 c1 - delta`` with ``delta`` the letter count.
    """
    c1 = Fraction(report.sigma + report.n_plus - report.n_minus, 4)
    delta = report.n_plus - report.n_minus
    ok = report.sigma == 4 * c1 - delta
    if report.n_minus == 0:
        ok = ok and report.sigma == 4 * c1 - report.n_plus
    return c1, delta, ok


def is_factorization(word: MonodromyWord) -> bool:
    return is_identity_factorization(word.space, word)
