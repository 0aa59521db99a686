"""Scalar q-deformation primitives.

Everything is written in terms of ``t = log q``: the q-bracket is
``[x]_q = sinh(x t) / sinh(t)``, which is the stable form of
``(q^x - q^-x)/(q - 1/q)`` and stays fully accurate as ``q -> 1``.
Classical (q = 1) values are never produced by substitution; callers take
explicit limits instead, so every function here rejects ``q = 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DegenerateParameterError


@dataclass(frozen=True)
class DeformationParams:
    """Deformation parameter q (real, positive, != 1) and the two labels
    alpha, beta attached to the deformed generators."""

    q: float
    alpha: float = 0.0
    beta: float = 0.0

    def __post_init__(self) -> None:
        if not (self.q > 0.0):
            raise DegenerateParameterError("q must be positive")
        if self.q == 1.0:
            raise DegenerateParameterError(
                "q = 1 is the classical point; use the classical code paths")


def q_bracket(x: float, q: float) -> float:
    """``[x]_q = (q^x - q^-x) / (q - q^-1)``.  Odd in x, invariant under
    q <-> 1/q, and -> x as q -> 1."""
    if not (q > 0.0):
        raise DegenerateParameterError("q-bracket needs q > 0")
    if q == 1.0:
        raise DegenerateParameterError("q-bracket is singular at q = 1")
    t = math.log(q)
    return math.sinh(x * t) / math.sinh(t)


def kappa(q: float) -> float:
    """``(q - q^-1) / log(q^2) = sinh(log q) / log q``; -> 1 as q -> 1."""
    if not (q > 0.0):
        raise DegenerateParameterError("kappa needs q > 0")
    if q == 1.0:
        raise DegenerateParameterError("kappa is 0/0 at q = 1 (limit value 1)")
    t = math.log(q)
    return math.sinh(t) / t


def q_product_square(z: complex, w: complex, q: float) -> complex:
    """The deformed square ``(z - w/q)(z - w q)`` that replaces the double
    pole ``(z - w)**2`` of the undeformed current product."""
    return (z - w / q) * (z - w * q)


def c_coeff(m, alpha: float, beta: float, g0, k: int, q: float) -> float:
    """Central-term coefficient ``C_m^{alpha,beta}(g0; k)``.

    With ``x = m - g0 + k`` and ``a = (alpha + beta)/2`` this is::

        [ (a+1) x ]_q / [ a+1 ]_q  +  [ (a-1) x ]_q / [ a-1 ]_q
          - (q^(x-1) + q^-(x-1)) * [ a x ]_q / [ a ]_q

    It vanishes at x = 0 and behaves as
    ``-(2/3) (log q)^2 x (x-1) (x-2) + O(log^4 q)`` near q = 1.

    A vanishing denominator bracket (alpha + beta in {-2, 0, 2}) is
    rejected: the defining expression is 0/0 there and no regularization
    is adopted.
    """
    if not (q > 0.0):
        raise DegenerateParameterError("c_coeff needs q > 0")
    if q == 1.0:
        raise DegenerateParameterError("c_coeff is singular at q = 1")
    x = float(m) - float(g0) + k
    a = 0.5 * (alpha + beta)
    for y in (a + 1.0, a - 1.0, a):
        if y == 0.0:
            raise DegenerateParameterError(
                f"denominator bracket [{y}]_q vanishes (alpha + beta = "
                f"{alpha + beta:g}); the coefficient is undefined there")
    t = math.log(q)
    total = 0.0
    for y, weight in ((a + 1.0, 1.0), (a - 1.0, 1.0), (a, -2.0 * math.cosh((x - 1.0) * t))):
        total += weight * math.sinh(y * x * t) / math.sinh(y * t)
    return total
