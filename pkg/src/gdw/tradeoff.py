"""Quantum and classical trade-off functions for a two-dit random access code.

``M(z)`` is the best probability of guessing the second dit when the first is
guessed with probability ``z``. The quantum curve is concave and symmetric
under ``z -> M(z)``; the classical one is the straight line ``(d+1)/d - z``.
"""

from __future__ import annotations

import math

import numpy as np

from gdw.errors import DomainError, InvalidDimensionError
from gdw.structures import Kind

__all__ = [
    "CLAMP_SLOP",
    "tradeoff_q",
    "tradeoff_q_trig",
    "tradeoff_c",
    "tradeoff",
    "optimal_asp_single",
    "tradeoff_fixed_point",
    "tradeoff_curve",
]

# Optimizers probing the box edge may overshoot by floating-point noise.
CLAMP_SLOP = 1e-12


def _check_dim(d: int) -> None:
    if d < 2:
        raise InvalidDimensionError(f"dimension must be >= 2, got {d}")


def _clamp(d: int, z: float) -> float:
    _check_dim(d)
    lo = 1.0 / d
    if not (lo - CLAMP_SLOP <= z <= 1.0 + CLAMP_SLOP):
        raise DomainError(f"z={z!r} outside [1/{d}, 1]")
    return min(max(z, lo), 1.0)


def mq_array(d: int, z: np.ndarray) -> np.ndarray:
    """Unchecked vectorized quantum trade-off, for callers that already clipped ``z``."""
    return 1.0 - (d - 1) / d * (np.sqrt(z) - np.sqrt((1.0 - z) / (d - 1))) ** 2


def mc_array(d: int, z: np.ndarray) -> np.ndarray:
    return (d + 1) / d - z


def tradeoff_q(d: int, z: float) -> float:
    z = _clamp(d, z)
    return 1.0 - (d - 1) / d * (math.sqrt(z) - math.sqrt((1.0 - z) / (d - 1))) ** 2


def tradeoff_q_trig(d: int, z: float) -> float:
    """Angle form of :func:`tradeoff_q`; kept as an independent cross-check."""
    z = _clamp(d, z)
    return math.cos(math.acos(1.0 / math.sqrt(d)) - math.acos(math.sqrt(z))) ** 2


def tradeoff_c(d: int, z: float) -> float:
    z = _clamp(d, z)
    return (d + 1) / d - z


def tradeoff(d: int, kind: Kind | str, z: float) -> float:
    return tradeoff_q(d, z) if Kind(kind) is Kind.QUANTUM else tradeoff_c(d, z)


def optimal_asp_single(d: int, kind: Kind | str) -> float:
    """Optimal success probability of a single ``d``-dimensional system."""
    _check_dim(d)
    if Kind(kind) is Kind.QUANTUM:
        return 0.5 * (1.0 + 1.0 / math.sqrt(d))
    return 0.5 * (1.0 + 1.0 / d)


def tradeoff_fixed_point(d: int) -> float:
    """The point where ``tradeoff_q(d, z) == z``; equals the quantum optimum."""
    _check_dim(d)
    return 0.5 * (1.0 + 1.0 / math.sqrt(d))


def tradeoff_curve(d: int, kind: Kind | str, n: int) -> list[tuple[float, float]]:
    """``n + 1`` evenly spaced samples ``(z, M(z))`` over ``[1/d, 1]``."""
    _check_dim(d)
    if n < 1:
        raise DomainError(f"curve needs at least one interval, got {n}")
    zs = np.linspace(1.0 / d, 1.0, n + 1)
    return [(float(z), tradeoff(d, kind, float(z))) for z in zs]
