"""Optimal success probabilities for every product structure.

For a structure with factors ``d_1 ... d_r`` the bound is

    max over z in box   1/2 * (prod_k z_k + prod_k M_k(z_k))

with ``z_k`` in ``[1/d_k, 1]`` and ``M_k`` the quantum or classical trade-off
of factor ``k``. The objective has several global maxima (it is symmetric
under ``z -> M(z)``) and square-root cusps at ``z_k = 1``, so it is maximized
by a deterministic multistart compass search rather than a gradient method.
"""

from __future__ import annotations

import enum
import itertools
import math
import os
import warnings
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

from gdw.errors import DomainError
from gdw.structures import Filter, ProductStructure, enumerate_structures
from gdw.tradeoff import CLAMP_SLOP, mc_array, mq_array, optimal_asp_single

__all__ = [
    "Status",
    "SolverConfig",
    "BoundResult",
    "objective",
    "solve_bound",
    "bound_table",
    "worker_count",
]

# Full corner/fixed-point grids are used while they stay this small (3**6).
GRID_CAP = 729


class Status(str, enum.Enum):
    CONVERGED = "Converged"
    MAX_ITERATIONS = "MaxIterations"


@dataclass(frozen=True)
class SolverConfig:
    box_tolerance: float = 1e-10
    objective_tolerance: float = 1e-12
    multistart_grid: int = 3
    random_starts: int = 64
    seed: int = 0
    max_sweeps: int = 20_000

    def __post_init__(self):
        if self.box_tolerance <= 0 or self.objective_tolerance <= 0:
            raise ValueError("tolerances must be positive")
        if self.multistart_grid < 1 or self.random_starts < 1 or self.max_sweeps < 1:
            raise ValueError("start counts and sweep limit must be >= 1")


@dataclass(frozen=True)
class BoundResult:
    structure: ProductStructure
    asp: float
    argmax: tuple[float, ...]
    starts_used: int
    status: Status = Status.CONVERGED
    evaluations: int = field(default=0, compare=False)

    def to_dict(self) -> dict:
        return {
            "structure": self.structure.render(),
            "asp": self.asp,
            "argmax": list(self.argmax),
            "starts_used": self.starts_used,
            "status": self.status.value,
        }


class _Objective:
    """Vectorized objective over a batch of points, shape ``(n, r)``."""

    def __init__(self, structure: ProductStructure):
        self.structure = structure
        self.dims = np.array(structure.dims, dtype=float)
        self.lo = 1.0 / self.dims
        self.hi = np.ones_like(self.lo)
        self._tradeoffs = [
            (lambda z, d=f.dim: mq_array(d, z)) if f.is_quantum else (lambda z, d=f.dim: mc_array(d, z))
            for f in structure.factors
        ]

    def __call__(self, z: np.ndarray) -> np.ndarray:
        first = np.prod(z, axis=1)
        second = np.ones(z.shape[0])
        for k, m in enumerate(self._tradeoffs):
            second = second * m(z[:, k])
        return 0.5 * (first + second)


def objective(structure: ProductStructure, z) -> float:
    """Success probability of the parallel code at the operating point ``z``."""
    z = np.asarray(z, dtype=float)
    if z.shape != (structure.r,):
        raise DomainError(f"expected {structure.r} coordinates, got shape {z.shape}")
    f = _Objective(structure)
    if np.any(z < f.lo - CLAMP_SLOP) or np.any(z > 1.0 + CLAMP_SLOP):
        raise DomainError(f"z={z.tolist()} outside the box {list(zip(f.lo, f.hi))}")
    return float(f(np.clip(z, f.lo, f.hi)[None, :])[0])


def _grid_values(d: int, n: int) -> list[float]:
    lo, fp = 1.0 / d, 0.5 * (1.0 + 1.0 / math.sqrt(d))
    if n == 1:
        return [fp]
    if n == 2:
        return [lo, 1.0]
    extra = np.linspace(lo, 1.0, n - 1)[1:-1].tolist()
    return sorted({lo, fp, 1.0, *extra})


def _starts(structure: ProductStructure, config: SolverConfig) -> np.ndarray:
    per_var = [_grid_values(d, config.multistart_grid) for d in structure.dims]
    if math.prod(len(v) for v in per_var) <= GRID_CAP:
        grid = [list(p) for p in itertools.product(*per_var)]
    else:
        # Too many combinations: uniform rows plus every "one coordinate
        # differs" pattern, which covers the biased optima seen in practice.
        n = len(per_var[0]) if len({len(v) for v in per_var}) == 1 else min(map(len, per_var))
        grid = []
        for a in range(n):
            grid.append([v[a] for v in per_var])
            for b in range(n):
                if a != b:
                    for i in range(structure.r):
                        grid.append([v[b] if k == i else v[a] for k, v in enumerate(per_var)])

    key = zlib.crc32(structure.render().encode())
    rng = np.random.default_rng([config.seed, key])
    sampler = qmc.Sobol(d=structure.r, scramble=True, rng=rng)
    lo = np.array([1.0 / d for d in structure.dims])
    with warnings.catch_warnings():
        # Sobol balance warnings for non-power-of-two counts are irrelevant here.
        warnings.simplefilter("ignore", UserWarning)
        pts = qmc.scale(sampler.random(config.random_starts), lo, np.ones_like(lo))
    return np.vstack([np.array(grid, dtype=float), pts])


def _compass_search(
    f: _Objective, x0: np.ndarray, box_tol: float, max_sweeps: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray, int]:
    """Batched compass search, one independent search per row of ``x0``.

    Each sweep polls the full stencil ``x +/- step * width_k`` for every
    coordinate ``k`` and moves to the best strictly improving point; a sweep
    without improvement halves the step. A search stops once its step falls
    below ``box_tol``.
    """
    lo, hi = f.lo, f.hi
    width = hi - lo
    n, r = x0.shape
    x = np.clip(x0, lo, hi)
    fx = f(x)
    step = np.full(n, 0.25)
    # Stencil offsets in units of step, shape (2r, r).
    stencil = np.vstack([np.diag(width), -np.diag(width)])
    active = step * width.max() >= box_tol
    evals = n
    sweeps = 0
    while active.any() and sweeps < max_sweeps:
        sweeps += 1
        idx = np.flatnonzero(active)
        trial = x[idx, None, :] + step[idx, None, None] * stencil[None, :, :]
        np.clip(trial, lo, hi, out=trial)
        ft = f(trial.reshape(-1, r)).reshape(idx.size, 2 * r)
        evals += ft.size
        best = ft.argmax(axis=1)
        fbest = ft[np.arange(idx.size), best]
        improved = fbest > fx[idx]
        moved = idx[improved]
        x[moved] = trial[improved, best[improved]]
        fx[moved] = fbest[improved]
        step[idx[~improved]] *= 0.5
        active = step * width.max() >= box_tol
    return x, fx, ~active, evals


def solve_bound(structure: ProductStructure, config: SolverConfig | None = None) -> BoundResult:
    """Global maximum of :func:`objective` over the box for ``structure``.

    Single-factor structures use the closed form. Otherwise every start is
    refined by compass search; among refined points within
    ``objective_tolerance`` of the best, the lexicographically smallest is
    reported so degenerate optima give reproducible output.
    """
    config = config or SolverConfig()
    if structure.r == 1:
        (factor,) = structure.factors
        value = optimal_asp_single(factor.dim, factor.kind)
        if factor.is_quantum:
            z = (0.5 * (1.0 + 1.0 / math.sqrt(factor.dim)),)
        else:
            z = (1.0 / factor.dim,)
        return BoundResult(structure, value, z, starts_used=0)

    f = _Objective(structure)
    starts = _starts(structure, config)
    x, fx, done, evals = _compass_search(f, starts, config.box_tolerance, config.max_sweeps)

    best = fx.max()
    near = np.flatnonzero(fx >= best - config.objective_tolerance)
    order = np.lexsort(x[near].T[::-1])
    pick = near[order[0]]
    z = x[pick]
    status = Status.CONVERGED if done[pick] else Status.MAX_ITERATIONS
    return BoundResult(
        structure,
        float(f(z[None, :])[0]),
        tuple(float(v) for v in z),
        starts_used=starts.shape[0],
        status=status,
        evaluations=evals,
    )


def worker_count() -> int:
    env = os.environ.get("GDW_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def bound_table(
    d: int,
    filter: Filter | str = Filter.ALL,
    config: SolverConfig | None = None,
    structures: list[ProductStructure] | None = None,
    threads: int | None = None,
) -> list[BoundResult]:
    """Bounds for every structure of ``d``, highest first.

    Ties are broken by canonical structure order. ``structures`` restricts the
    table to an explicit subset. Results do not depend on ``threads``.
    """
    config = config or SolverConfig()
    if structures is None:
        structures = enumerate_structures(d, filter)
    threads = threads or worker_count()
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(lambda s: solve_bound(s, config), structures))
    else:
        results = [solve_bound(s, config) for s in structures]
    return sorted(results, key=lambda res: (-res.asp, res.structure.sort_key))
