"""Monodromy words used as fixtures, with the literature signatures they should produce."""

from __future__ import annotations

from .mcg import Curve, MonodromyWord, TwistLetter, chain_curves, mirror_word


def elliptic(n: int = 1) -> MonodromyWord:
    """``(t_a t_b)^(6n)``: the elliptic surface E(n), signature -8n."""
    return MonodromyWord.from_curves(1, [(1, 0), (0, 1)] * (6 * n))


def chain_word(g: int, length: int, power: int) -> MonodromyWord:
    return MonodromyWord.from_curves(g, chain_curves(g, length) * power)


def hyperelliptic_g2() -> MonodromyWord:
    """``(t1 t2 t3 t4 t5^2 t4 t3 t2 t1)^2`` in genus 2."""
    c = chain_curves(2)
    order = [0, 1, 2, 3, 4, 4, 3, 2, 1, 0] * 2
    return MonodromyWord.from_curves(2, [c[i] for i in order])


def separating_g2(chirality: int = -1) -> MonodromyWord:
    """Two-chain relation ``(t_a1 t_b1)^6 = t_delta`` closed off by a separating twist.

    ``chirality`` is the handedness of the separating letter.  With ``-1``
    the word is ``(t_a1 t_b1)^6 t_delta^{-1}``; with ``+1`` it is the mirror
    ``t_delta (t_b1^{-1} t_a1^{-1})^6``.  Both words are achiral.
    """
    a1, b1 = (1, 0, 0, 0), (0, 0, 1, 0)
    w = MonodromyWord.from_curves(2, [a1, b1] * 6)
    w = w + MonodromyWord(2, (TwistLetter(Curve.separating_curve(2, 1), -1),))
    return w if chirality == -1 else mirror_word(w)


def block_mixed_g2() -> MonodromyWord:
    """E(1) in the first handle followed by its mirror in the second."""
    first = MonodromyWord.from_curves(2, [(1, 0, 0, 0), (0, 0, 1, 0)] * 6)
    second = MonodromyWord.from_curves(2, [(0, 1, 0, 0), (0, 0, 0, 1)] * 6)
    return first + mirror_word(second)


# name -> (word factory, expected signature).  Separating words: -8 from the
# E(1) block plus the +-1 local term; the rest are classical values.
FIXTURE_WORDS = {
    "E1": (lambda: elliptic(1), -8),
    "E2": (lambda: elliptic(2), -16),
    "E3": (lambda: elliptic(3), -24),
    "E1_mirror": (lambda: mirror_word(elliptic(1)), 8),
    "g2_chain5": (lambda: chain_word(2, 5, 6), -18),
    "g2_chain4": (lambda: chain_word(2, 4, 10), -24),
    "g2_hyperelliptic": (hyperelliptic_g2, -12),
    "g2_separating_achiral": (lambda: separating_g2(-1), -7),
    "g2_separating_mirror": (lambda: separating_g2(1), 7),
    "g2_block_mixed": (block_mixed_g2, 0),
    "g3_chain7": (lambda: chain_word(3, 7, 8), -32),
}


def fixture_word(name: str) -> MonodromyWord:
    return FIXTURE_WORDS[name][0]()
