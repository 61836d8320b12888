"""Constants asserted by the suites, each tagged with where it comes from.

Provenance labels:

* ``paper-explicit``: the constant is written out in the statement or proof.
* ``proof-traced``: obtained by following the proof step by step on the grid
  with the dyadic content; the derivation is in the docstring.
* ``derived``: follows from the comparability bracket of the two contents.
* ``empirical``: no cap is known; the suite only reports the observed value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..content import comparability_bracket
from ..operators import grid_ball_constant

PAPER = "paper-explicit"
TRACED = "proof-traced"
DERIVED = "derived"
EMPIRICAL = "empirical"


@dataclass(frozen=True)
class Cap:
    value: float
    provenance: str
    note: str = ""

    def to_dict(self) -> dict:
        return {"value": self.value, "provenance": self.provenance, "note": self.note}


def quasi_subadditivity() -> Cap:
    return Cap(2.0, PAPER, "integral of f+g is at most 2 times the sum of the integrals")


def holder() -> Cap:
    return Cap(2.0, PAPER, "Hoelder inequality for the Choquet integral")


def dyadic_sublinearity() -> Cap:
    return Cap(1.0, PAPER, "dyadic content is strongly subadditive")


def embedding(delta1: float, delta2: float) -> Cap:
    return Cap((delta2 / delta1) ** (1 / delta2), PAPER,
               "dyadic content obeys Hd2(E) <= Hd1(E)**(d2/d1), so no bracket factor is needed")


def quasi_norm(p: float) -> Cap:
    if p == 1:
        return Cap(2.0, TRACED, "p = 1: the quasi-subadditivity constant")
    return Cap(4.0, TRACED, "p > 1: factor 2 from splitting |f+g|**p and 2 from quasi-subadditivity")


def ball_sublinearity(n: int, delta: float) -> Cap:
    c_low, c_high = comparability_bracket(n, delta)
    return Cap(c_high / c_low, DERIVED, "greedy ball cover is within [c_low, c_high] of the dyadic content")


def maximal_comparison(delta: float, kappa: float) -> Cap:
    return Cap(2.0 ** (delta - kappa), PAPER,
               "B(y, r) containing x lies in B(x, 2r); exact on the grid for ladders closed under doubling")


def sharp_bound() -> Cap:
    return Cap(4.0, PAPER, "sharp maximal function against 4 times the uncentered one")


def sharp_bound_grid(n: int, L: int, stride: int = 1) -> Cap:
    """Sharp bound with averages normalized by ``r**n`` rather than the ball content.

    Quasi-subadditivity splits ``integral |f - f_B|`` into ``2 integral |f|`` and
    ``2 f_B Hn(B)``; the second term is ``2 (Hn(B) / r**n) integral |f|``, so the
    constant is ``2 + 2K`` with ``K`` the largest ``Hn(B) / r**n`` over the
    candidate balls. It reduces to 4 when ``Hn(B) = r**n``.
    """
    from ..operators import RadiusLadder, candidate_ball_constant

    K = candidate_ball_constant(n, L, float(n), RadiusLadder.default(n, L, stride))
    return Cap(2.0 + 2.0 * K, TRACED, f"2 + 2K with candidate ball constant K={K:.6g}")


def hedberg_ball_part(delta: float, alpha: float, kappa: float) -> Cap:
    return Cap(2.0 ** delta / (2.0 ** alpha - 2.0 ** kappa), PAPER,
               "annular sum over B(x, r) for r a cell width times a power of two")


def fractional_pointwise(n: int, L: int, delta: float, kappa: float, q: float) -> Cap:
    """Pointwise fractional bound with ``d = delta``.

    Write ``I = integral of f over B`` and ``Hd(B) <= K r**delta`` with ``K`` the
    grid ball constant. Hoelder for the dyadic content holds with constant 1
    (sublinearity plus Young's inequality), so
    ``I <= (integral of f**q)**(1/q) * Hd(B)**(1/q')``. Splitting
    ``I = I**(q kappa/delta) * I**(1 - q kappa/delta)`` and collecting powers of
    ``r`` leaves ``C = K**((q - 1) kappa / delta)``; the maximum over the ladder
    is then taken on both sides.
    """
    K = grid_ball_constant(n, L, delta)
    return Cap(K ** ((q - 1) * kappa / delta), TRACED,
               f"K**((q-1)kappa/delta) with grid ball constant K={K:.6g}")


def hedberg_tail_part(n: int, L: int, delta: float, alpha: float, p: float) -> Cap:
    """Constant ``B`` in ``integral over |x-y| >= r <= B * ||f||_p * r**(alpha - delta/p)``.

    ``p = 1``: the kernel is at most ``r**(alpha - delta)`` off the ball, so
    ``B = 1``. ``p > 1``: Hoelder with constant 1, then the layer-cake of
    ``|x-y|**eta`` with ``eta = p(alpha - delta)/(p - 1)`` over superlevel
    sets of content at most ``K t**(delta/eta)`` gives
    ``(K * p (delta - alpha) / (delta - p alpha))**((p - 1)/p)``.
    """
    if p == 1:
        return Cap(1.0, TRACED, "kernel bounded by r**(alpha-delta) outside the ball")
    K = grid_ball_constant(n, L, delta)
    c = K * p * (delta - alpha) / (delta - p * alpha)
    return Cap(c ** ((p - 1) / p), TRACED, f"grid ball constant K={K:.6g}")


def hedberg(n: int, L: int, delta: float, alpha: float, kappa: float, p: float) -> Cap:
    """Pointwise Hedberg constant on the grid.

    With ``A`` the ball-part and ``B`` the tail constant,
    ``R f(x) <= A r**(alpha-kappa) M f(x) + B ||f|| r**(alpha-delta/p)`` for
    every radius ``r`` that is a cell width times a power of two. The two terms
    balance at ``r*``; rounding ``r*`` up to the admissible radius costs at most
    ``2**(alpha-kappa)`` on the first term. When ``r*`` falls below one cell,
    ``r = h`` is used, and Hoelder bounds ``(h/r*)**(alpha-kappa)`` by
    ``K**((p-1)(alpha-kappa)/(delta-kappa p))``.
    """
    K = grid_ball_constant(n, L, delta)
    A = hedberg_ball_part(delta, alpha, kappa).value
    B = hedberg_tail_part(n, L, delta, alpha, p).value
    snap = max(2.0 ** (alpha - kappa), K ** ((p - 1) * (alpha - kappa) / (delta - kappa * p)))
    return Cap(A * snap + B, TRACED, f"A={A:.6g}, B={B:.6g}, snap={snap:.6g}, K={K:.6g}")


def unbounded() -> Cap:
    return Cap(math.inf, EMPIRICAL, "no explicit constant; pass iff the ratio is finite")
