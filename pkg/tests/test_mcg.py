import io

import numpy as np
import pytest

from lefschetz.fixtures import FIXTURE_WORDS, elliptic, fixture_word
from lefschetz.mcg import (
    Curve,
    MonodromyWord,
    SymplecticSpace,
    TwistLetter,
    WordFormatError,
    chain_curves,
    conjugate_word,
    hurwitz_move,
    is_identity_factorization,
    load_word,
    mirror_word,
    random_primitive_curve,
    random_symplectic,
    read_word,
    save_word,
    twist_matrix,
    word_matrices,
)


def product(word):
    return word_matrices(word.space, word)[1][-1]


def test_standard_form():
    sp = SymplecticSpace(2)
    J = sp.J
    assert np.array_equal(J.T, -J)
    assert sp.pairing((1, 0, 0, 0), (0, 0, 1, 0)) == 1
    assert sp.pairing((0, 0, 1, 0), (1, 0, 0, 0)) == -1


def test_twist_is_symplectic_transvection(rng):
    for g in (1, 2, 3):
        sp = SymplecticSpace(g)
        for _ in range(20):
            c = random_primitive_curve(g, rng)
            for eps in (1, -1):
                M = twist_matrix(sp, TwistLetter(c, eps))
                assert sp.is_symplectic(M)
                assert tuple(M @ np.array(c.homology, dtype=object)) == c.homology
                x = rng.integers(-3, 4, 2 * g).tolist()
                expect = np.array(x) + eps * sp.pairing(x, c.homology) * np.array(c.homology)
                assert list(M @ np.array(x, dtype=object)) == expect.tolist()


def test_twist_and_inverse_cancel(rng):
    sp = SymplecticSpace(2)
    t = TwistLetter(random_primitive_curve(2, rng))
    assert np.array_equal(twist_matrix(sp, t) @ twist_matrix(sp, t.inverse()), sp.identity())


def test_symplectic_inverse(rng):
    sp = SymplecticSpace(3)
    for _ in range(10):
        M = random_symplectic(sp, rng)
        assert sp.is_symplectic(M)
        assert np.array_equal(M @ sp.inverse(M), sp.identity())


def test_curve_validation():
    with pytest.raises(ValueError):
        Curve((2, 0))
    with pytest.raises(ValueError):
        Curve((0, 0))
    with pytest.raises(ValueError):
        Curve((1, 0, 0, 0), separating=(1, 1))
    with pytest.raises(ValueError):
        Curve.separating_curve(2, 0)
    assert Curve.separating_curve(2, 1).is_separating


def test_separating_twist_acts_trivially():
    sp = SymplecticSpace(2)
    assert np.array_equal(twist_matrix(sp, TwistLetter(Curve.separating_curve(2, 1))), sp.identity())


def test_chain_relation_holds():
    assert is_identity_factorization(SymplecticSpace(1), elliptic(1))
    for name in FIXTURE_WORDS:
        w = fixture_word(name)
        assert is_identity_factorization(w.space, w), name


def test_chain_curves_intersections():
    sp = SymplecticSpace(3)
    cs = chain_curves(3)
    assert len(cs) == 7
    for i in range(7):
        for j in range(7):
            expect = 1 if abs(i - j) == 1 else 0
            assert abs(sp.pairing(cs[i], cs[j])) == expect


def test_hurwitz_preserves_product(rng):
    w = MonodromyWord.from_curves(2, [random_primitive_curve(2, rng).homology for _ in range(6)])
    P = product(w)
    for _ in range(30):
        j = int(rng.integers(0, len(w) - 1))
        w = hurwitz_move(w, j, "right" if rng.random() < 0.5 else "left")
        assert np.array_equal(product(w), P)


def test_hurwitz_left_undoes_right(rng):
    w = MonodromyWord.from_curves(2, [random_primitive_curve(2, rng).homology for _ in range(4)])
    back = hurwitz_move(hurwitz_move(w, 1, "right"), 1, "left")
    assert back == w


def test_hurwitz_bounds():
    with pytest.raises(IndexError):
        hurwitz_move(elliptic(1), 11)
    with pytest.raises(ValueError):
        hurwitz_move(elliptic(1), 0, "up")


def test_mirror_inverts_product(rng):
    w = MonodromyWord.from_curves(2, [random_primitive_curve(2, rng).homology for _ in range(5)])
    assert np.array_equal(product(w) @ product(mirror_word(w)), w.space.identity())
    assert mirror_word(mirror_word(w)) == w


def test_conjugate_word(rng):
    w = fixture_word("g2_hyperelliptic")
    C = random_symplectic(w.space, rng)
    assert is_identity_factorization(w.space, conjugate_word(w, C))


def test_word_round_trip(tmp_path):
    for name in FIXTURE_WORDS:
        w = fixture_word(name)
        p = tmp_path / f"{name}.word"
        save_word(w, p)
        assert load_word(p) == w
        assert load_word(p).digest() == w.digest()


def test_bundled_word_files_match_factories():
    from importlib.resources import files
    for name in FIXTURE_WORDS:
        w = load_word(files("lefschetz") / "data" / "words" / f"{name}.word")
        assert w == fixture_word(name)


@pytest.mark.parametrize("text,line", [
    ("", 1),
    ("wurd g=1\n", 1),
    ("word g=x\n", 1),
    ("word g=1\ntwist +1 c 2 0\n", 2),
    ("word g=1\ntwist +2 c 1 0\n", 2),
    ("word g=1\ntwist +1 c 1 0 0\n", 2),
    ("word g=1\ntwist +1 c 1.5 0\n", 2),
    ("word g=2\n# comment\ntwist +1 knot 1\n", 3),
    ("word g=2 base=torus\n", 1),
])
def test_word_parse_errors(text, line):
    with pytest.raises(WordFormatError) as exc:
        read_word(io.StringIO(text))
    assert exc.value.line == line


def test_letter_genus_mismatch():
    with pytest.raises(ValueError):
        MonodromyWord(2, (TwistLetter(Curve((1, 0))),))
