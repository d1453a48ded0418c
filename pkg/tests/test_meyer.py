import json
from fractions import Fraction

import numpy as np
import pytest

from lefschetz.fixtures import FIXTURE_WORDS, elliptic, fixture_word, separating_g2
from lefschetz.mcg import (
    Curve,
    MonodromyWord,
    SymplecticSpace,
    TwistLetter,
    mirror_word,
    random_primitive_curve,
    random_symplectic,
    twist_matrix,
)
from lefschetz.meyer import (
    MEYER_SIGN,
    NotSymplecticError,
    OpenFibrationError,
    SignatureReport,
    cocycle_defect,
    conjugation_invariance,
    fibration_signature,
    local_signature,
    meyer_form,
    meyer_tau,
    pairing_report,
)

from oracles import float_tau


def test_identity_gives_zero(rng):
    for g in (1, 2, 3):
        sp = SymplecticSpace(g)
        I = sp.identity()
        for _ in range(5):
            A = random_symplectic(sp, rng)
            assert meyer_tau(sp, I, A) == 0
            assert meyer_tau(sp, A, I) == 0


def test_inverse_pair_gives_zero(rng):
    for g in (1, 2):
        sp = SymplecticSpace(g)
        for _ in range(10):
            A = random_symplectic(sp, rng)
            assert meyer_tau(sp, A, sp.inverse(A)) == 0


def test_same_twist_twice():
    # V = {x2 = y2}, the form reduces to -2 s s', signature -1
    sp = SymplecticSpace(1)
    T = twist_matrix(sp, TwistLetter(Curve((1, 0))))
    assert meyer_tau(sp, T, T) == -1
    assert meyer_form(sp, T, T).dimension == 3


def test_tau_matches_float_oracle(rng):
    for g in (1, 2, 3):
        sp = SymplecticSpace(g)
        for _ in range(40):
            A, B = random_symplectic(sp, rng, 3), random_symplectic(sp, rng, 3)
            assert meyer_tau(sp, A, B) == float_tau(A.astype(float), B.astype(float))


def test_tau_of_twists_matches_oracle(rng):
    sp = SymplecticSpace(2)
    for _ in range(40):
        a, b = (TwistLetter(random_primitive_curve(2, rng), int(rng.choice([-1, 1]))) for _ in range(2))
        A, B = twist_matrix(sp, a), twist_matrix(sp, b)
        assert meyer_tau(sp, A, B) == float_tau(A.astype(float), B.astype(float))


def test_cocycle_and_conjugation(rng):
    for g in (1, 2):
        sp = SymplecticSpace(g)
        for _ in range(30):
            A, B, C = (random_symplectic(sp, rng) for _ in range(3))
            assert cocycle_defect(sp, A, B, C) == 0
            assert conjugation_invariance(sp, A, B, C)


def test_tau_bound_and_antisymmetry_under_inverse(rng):
    sp = SymplecticSpace(2)
    for _ in range(30):
        A, B = random_symplectic(sp, rng), random_symplectic(sp, rng)
        t = meyer_tau(sp, A, B)
        assert abs(t) <= 2 * sp.g
        assert meyer_tau(sp, sp.inverse(B), sp.inverse(A)) == -t


def test_not_symplectic_rejected():
    sp = SymplecticSpace(1)
    with pytest.raises(NotSymplecticError):
        meyer_tau(sp, np.array([[2, 0], [0, 1]], dtype=object), sp.identity())


def test_local_signatures():
    assert local_signature(TwistLetter(Curve((1, 0)))) == 0
    assert local_signature(TwistLetter(Curve((1, 0)), -1)) == 0
    sep = Curve.separating_curve(2, 1)
    assert local_signature(TwistLetter(sep, 1)) == -1
    assert local_signature(TwistLetter(sep, -1)) == 1


def test_calibration_sign():
    assert MEYER_SIGN in (1, -1)
    assert fibration_signature(SymplecticSpace(1), elliptic(1)).sigma == -8


@pytest.mark.parametrize("name", sorted(FIXTURE_WORDS))
def test_fixture_signatures(name):
    factory, expected = FIXTURE_WORDS[name]
    w = factory()
    rep = fibration_signature(w.space, w)
    assert rep.sigma == expected
    c1, delta, ok = pairing_report(rep)
    assert ok and c1 == rep.c1_pairing and delta == rep.delta_pairing


def test_elliptic_c1():
    for n in (1, 2, 3):
        rep = fibration_signature(SymplecticSpace(1), elliptic(n))
        assert rep.c1_pairing == Fraction(n)
        assert rep.sigma == -8 * n


def test_mirror_negates_and_concatenation_vanishes():
    for name in FIXTURE_WORDS:
        w = fixture_word(name)
        s = fibration_signature(w.space, w).sigma
        m = mirror_word(w)
        assert fibration_signature(w.space, m).sigma == -s
        assert fibration_signature(w.space, w + m).sigma == 0


def test_separating_words():
    achiral, chiral = separating_g2(-1), separating_g2(1)
    ra = fibration_signature(achiral.space, achiral)
    rc = fibration_signature(chiral.space, chiral)
    assert (ra.n_sep_minus, rc.n_sep_plus) == (1, 1)
    assert ra.meyer_sum == -rc.meyer_sum == -8
    assert ra.local_sum == 1 and rc.local_sum == -1
    assert ra.n_minus == 1 and rc.n_minus == 12


def test_empty_word():
    w = MonodromyWord(1)
    rep = fibration_signature(w.space, w)
    assert rep.sigma == 0 and rep.c1_pairing == 0


def test_open_word_errors():
    w = MonodromyWord.from_curves(1, [(1, 0)])
    with pytest.raises(OpenFibrationError) as exc:
        fibration_signature(w.space, w)
    assert "1" in str(exc.value)


def test_report_serialization():
    w = elliptic(1)
    rep = fibration_signature(w.space, w)
    d = json.loads(rep.to_json())
    assert d["sigma"] == -8 and d["c1_pairing"] == "1" and d["word_hash"] == w.digest()
    assert rep.summary() == "sigma=-8 c1=1 delta=12"


def test_report_validates():
    with pytest.raises(ValueError):
        SignatureReport(sigma=1, meyer_sum=0, local_sum=0, n_plus=0, n_minus=0,
                        n_sep_plus=0, n_sep_minus=0, c1_pairing=Fraction(0), delta_pairing=0)
