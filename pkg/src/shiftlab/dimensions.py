"""Closed-form Hausdorff dimensions of hitting sets and run-length level sets.

All values are reported absolutely and as a multiple of ``dim_H Sigma``.
Sets that are empty or countable are tagged rather than given a number:
``EMPTY`` has no value, ``COUNTABLE`` has value 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from scipy.optimize import minimize_scalar

from .errors import InvalidPair
from .sft import Sft, entropy


class Regime(str, Enum):
    FORMULA = "FORMULA"
    EMPTY = "EMPTY"
    COUNTABLE = "COUNTABLE"
    FULL = "FULL"


@dataclass(frozen=True)
class DimensionValue:
    """A dimension value with its regime tag.

    ``relative`` is the value divided by ``dim_H Sigma``; both are None for
    an empty set.
    """

    value: Optional[float]
    relative: Optional[float]
    tag: Regime
    b_star: Optional[float] = None

    def to_dict(self) -> dict:
        out = {"tag": self.tag.value, "value": self.value, "relative": self.relative}
        if self.b_star is not None:
            out["b_star"] = self.b_star
        return out


def hausdorff_dimension(sft: Sft) -> float:
    """``dim_H Sigma = h / ln m`` for the metric ``d(x, y) = m**-(first difference)``."""
    return entropy(sft) / math.log(sft.m)


def _make(relative: Optional[float], tag: Regime, dim: float, b_star=None) -> DimensionValue:
    if relative is None:
        return DimensionValue(None, None, tag, b_star)
    return DimensionValue(relative * dim, relative, tag, b_star)


def dim_hea(tau: float, sft: Sft) -> DimensionValue:
    """Dimension of the eventually-always-hitting set for targets with rate ``tau``."""
    if tau < 0 or math.isnan(tau):
        raise ValueError("tau must be >= 0")
    dim = hausdorff_dimension(sft)
    if tau > 1:
        return _make(0.0, Regime.COUNTABLE, dim)
    return _make(((1 - tau) / (1 + tau)) ** 2, Regime.FORMULA, dim)


def level_set_fraction(a: float, b: float, tau: float) -> float:
    """``(b(1 - tau a) - a) / ((1 + tau b)(b - a))`` with its limits.

    Equals 1 at ``a = b = 0`` and tends to 0 as ``b -> inf``.
    """
    if a == 0 and b == 0:
        return 1.0
    if math.isinf(b):
        return 0.0
    return (b * (1 - tau * a) - a) / ((1 + tau * b) * (b - a))


def dim_level_set(a: float, b: float, tau: float, sft: Sft) -> DimensionValue:
    """Dimension of ``{liminf L_N/Phi(N) >= a, limsup L_N/Phi(N) = b}``.

    ``tau = lim Phi(N)/N`` may be 0 (slowly shrinking, regular targets),
    positive, or ``math.inf``.  Raises InvalidPair if ``a > b``.
    """
    if a < 0 or b < 0 or tau < 0:
        raise ValueError("a, b, tau must be >= 0")
    if a > b:
        raise InvalidPair(f"a={a} exceeds b={b}")
    dim = hausdorff_dimension(sft)
    if tau == 0:
        return _make(1.0, Regime.FULL, dim)
    if math.isinf(tau):
        if b > 0:
            return _make(0.0, Regime.COUNTABLE if a > 0 else Regime.FORMULA, dim)
        return _make(1.0, Regime.FULL, dim)
    if a >= 1 / tau:
        if not math.isinf(b):
            return _make(None, Regime.EMPTY, dim)
        return _make(0.0, Regime.COUNTABLE if a > 1 / tau else Regime.FORMULA, dim)
    if not math.isinf(b) and (b < a / (1 - tau * a) or 0 < a == b):
        # a = b > 0 lies strictly below the boundary; checked apart from rounding
        return _make(None, Regime.EMPTY, dim)
    if a == 0 and b == 0:
        return _make(1.0, Regime.FULL, dim)
    return _make(level_set_fraction(a, b, tau), Regime.FORMULA, dim)


def level_set_sup(a: float, tau: float = 1.0, b_max: float = 1e3) -> tuple[float, float]:
    """Numerical ``sup_b`` of the level-set fraction over ``[a/(1 - tau a), b_max]``.

    Returns ``(sup, argmax)``.
    """
    lo = a / (1 - tau * a)
    res = minimize_scalar(
        lambda b: -level_set_fraction(a, b, tau),
        bounds=(lo, b_max),
        method="bounded",
        options={"xatol": 1e-10},
    )
    best, arg = -res.fun, float(res.x)
    edge = level_set_fraction(a, lo, tau)
    if edge > best:
        best, arg = edge, lo
    return best, arg


def dim_u_a(a: float, sft: Sft, verify: bool = True) -> DimensionValue:
    """Dimension of ``{liminf L_N / N >= a}``.

    For ``a < 1`` the supremum over ``b`` of the level-set formula is attained
    at ``b* = 2a/(1-a)``, which is reported in ``b_star``.  With ``verify``
    the closed form is checked against a numerical maximisation.
    """
    if a < 0:
        raise ValueError("a must be >= 0")
    dim = hausdorff_dimension(sft)
    if a > 1:
        return _make(0.0, Regime.COUNTABLE, dim)
    value = ((1 - a) / (1 + a)) ** 2
    if a == 1:
        return _make(0.0, Regime.FORMULA, dim)
    b_star = 2 * a / (1 - a)
    if verify:
        sup, _ = level_set_sup(a, 1.0)
        if abs(sup - value) > 1e-6:
            raise ArithmeticError(f"closed form {value} disagrees with numerical supremum {sup}")
    return _make(value, Regime.FULL if a == 0 else Regime.FORMULA, dim, b_star)
