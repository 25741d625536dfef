"""Brute-force checks that anchor the closed forms on small instances.

None of these call the solver or reuse its search; they enumerate.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from gdw.errors import DomainError
from gdw.mub import build_mub, curve_state, measurement_overlap
from gdw.structures import ProductStructure
from gdw.tradeoff import mc_array, mq_array, tradeoff_fixed_point

__all__ = [
    "OracleReport",
    "classical_rac_exhaustive",
    "tradeoff_grid_check",
    "two_factor_grid_bound",
    "grid_bound_report",
    "classical_rac_report",
]


@dataclass(frozen=True)
class OracleReport:
    name: str
    instance: str
    oracle_value: float
    analytic_value: float
    abs_diff: float
    # Largest |w - M(z)| seen along a sweep; 0 for oracles without a curve.
    max_deviation: float = 0.0

    @classmethod
    def build(cls, name, instance, oracle_value, analytic_value, **extra) -> OracleReport:
        return cls(
            name,
            instance,
            float(oracle_value),
            float(analytic_value),
            abs(float(oracle_value) - float(analytic_value)),
            **extra,
        )


def classical_rac_exhaustive(d: int, identity_decoding: bool = False) -> float:
    """Best classical success probability of the two-dit code, by enumeration.

    Every encoding ``[d]^2 -> [d]`` is paired with every pair of decoders
    ``[d] -> [d]`` and scored by counting over all ``(x1, x2, y)``; ``d = 3``
    has about 1.4e7 strategies. ``identity_decoding`` pins both decoders to
    the identity.
    """
    if d not in (2, 3):
        raise DomainError(f"exhaustive classical search supports d in {{2, 3}}, got {d}")
    inputs = np.array(list(itertools.product(range(d), repeat=2)))  # (d^2, 2)
    encodings = np.array(list(itertools.product(range(d), repeat=d * d)))  # (d^(d^2), d^2)
    if identity_decoding:
        decoders = np.arange(d)[None, :]
    else:
        decoders = np.array(list(itertools.product(range(d), repeat=d)))  # (d^d, d)
    # guesses[e, D, x] = decoder D applied to the message of encoding e on input x
    guesses = decoders[:, encodings]  # (D, E, d^2)
    hits1 = (guesses == inputs[None, None, :, 0]).sum(axis=2).T  # (E, D)
    hits2 = (guesses == inputs[None, None, :, 1]).sum(axis=2).T
    best = 0
    for e in range(encodings.shape[0]):
        # all (decoder for y=1, decoder for y=2) pairs
        best = max(best, int((hits1[e][:, None] + hits2[e][None, :]).max()))
    return best / (2 * d * d)


def _curve_overlaps(d: int, ts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    k = round(math.log(d, 4)) if d > 1 else 0
    if 4**k == d:
        mubs = build_mub(k)
        x1, x2 = 1, d  # arbitrary pair of target states
        z, w = [], []
        for t in ts:
            state = curve_state(mubs, x1, x2, float(t))
            z.append(measurement_overlap(mubs, 1, x1, state))
            w.append(measurement_overlap(mubs, 2, x2, state))
        return np.array(z), np.array(w)
    # No +/-1 pair exists here; use e_1 and the uniform vector, which are
    # members of the standard and Fourier bases and overlap by 1/sqrt(d).
    psi = np.zeros(d)
    psi[0] = 1.0
    phi = np.full(d, 1.0 / math.sqrt(d))
    states = ts[:, None] * psi + (1.0 - ts)[:, None] * phi
    states /= np.linalg.norm(states, axis=1, keepdims=True)
    return (states @ psi) ** 2, (states @ phi) ** 2


def tradeoff_grid_check(d: int, resolution: int) -> OracleReport:
    """Sweep ``t`` over ``[0, 1]`` and compare overlaps with the trade-off curve.

    ``oracle_value`` is the best ``(z + w) / 2`` along the sweep and
    ``analytic_value`` the fixed point; ``max_deviation`` is the largest
    ``|w - M(z)|``, i.e. both how far the family overshoots the curve and how
    far it falls short of attaining it.
    """
    if d < 2:
        raise DomainError(f"dimension must be >= 2, got {d}")
    if resolution < 1000:
        raise DomainError(f"resolution must be >= 1000, got {resolution}")
    ts = np.linspace(0.0, 1.0, resolution + 1)
    z, w = _curve_overlaps(d, ts)
    curve = mq_array(d, np.clip(z, 1.0 / d, 1.0))
    deviation = float(np.max(np.abs(w - curve)))
    return OracleReport.build(
        "tradeoff",
        f"d={d},resolution={resolution}",
        np.max(0.5 * (z + w)),
        tradeoff_fixed_point(d),
        max_deviation=deviation,
    )


def two_factor_grid_bound(structure: ProductStructure, resolution: int, chunk: int = 512) -> float:
    """Maximum of the two-factor objective over a ``resolution x resolution`` grid."""
    if structure.r != 2:
        raise DomainError(f"grid bound needs exactly two factors, got {structure}")
    if resolution < 2:
        raise DomainError(f"resolution must be >= 2, got {resolution}")
    axes, curves = [], []
    for f in structure.factors:
        z = np.linspace(1.0 / f.dim, 1.0, resolution)
        axes.append(z)
        curves.append(mq_array(f.dim, z) if f.is_quantum else mc_array(f.dim, z))
    (z1, z2), (m1, m2) = axes, curves
    best = -np.inf
    for lo in range(0, resolution, chunk):
        block = 0.5 * (np.outer(z1[lo : lo + chunk], z2) + np.outer(m1[lo : lo + chunk], m2))
        best = max(best, float(block.max()))
    return best


def grid_bound_report(
    structure: ProductStructure, resolution: int, solver_value: float
) -> OracleReport:
    value = two_factor_grid_bound(structure, resolution)
    return OracleReport.build("grid-bound", f"{structure},resolution={resolution}", value, solver_value)


def classical_rac_report(d: int) -> OracleReport:
    return OracleReport.build("classical-rac", f"d={d}", classical_rac_exhaustive(d), 0.5 * (1 + 1 / d))

