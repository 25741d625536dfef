"""Monte Carlo model of the single-detector random access code experiment.

Every round draws the two input dits ``x1, x2``, the queried basis ``y`` and
the projected index ``j`` uniformly. Alice sends the optimal encoding of
``(x1, x2)``; Bob's single detector projects onto ``m_j^y`` and clicks with
probability ``1 - exp(-nu * mu * q)``, where ``q`` is the overlap, ``mu`` the
mean photon number of the Poissonian source and ``nu`` the total efficiency.

Rounds are processed in fixed-size blocks. Block ``b`` draws from a Philox
stream keyed by the seed with ``b`` in the counter's top word, so each round's
randomness is a function of ``(seed, round index)`` only and tallies do not
depend on the thread count.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from gdw.errors import DomainError
from gdw.mub import MubPair, build_mub
from gdw.solver import worker_count
from gdw.tradeoff import CLAMP_SLOP

__all__ = [
    "BLOCK_ROUNDS",
    "SimConfig",
    "ClickTally",
    "simulate",
    "optimal_overlaps",
    "depolarize",
    "fom_closed_form",
    "fom_first_order",
    "expected_click_rates",
    "expected_d1",
]

BLOCK_ROUNDS = 1 << 16
LOG_HEADER = ("round", "x1", "x2", "y", "j", "click")
# Below this nu*mu the exact figure of merit is 0/0 in floating point.
SERIES_CUTOFF = 1e-9


@dataclass(frozen=True)
class SimConfig:
    k: int = 1
    mu: float = 0.4
    nu: float = 0.13
    visibility: float = 1.0
    rounds: int = 1_000_000
    seed: int = 0
    # Sample photon numbers and thin them instead of using the aggregate click probability.
    photon_sampling: bool = False

    def __post_init__(self):
        if self.k < 1:
            raise DomainError(f"k must be >= 1, got {self.k}")
        if self.mu < 0:
            raise DomainError(f"mu must be >= 0, got {self.mu}")
        if not 0.0 <= self.nu <= 1.0:
            raise DomainError(f"nu must lie in [0, 1], got {self.nu}")
        if not 0.0 < self.visibility <= 1.0:
            raise DomainError(f"visibility must lie in (0, 1], got {self.visibility}")
        if self.rounds < 1:
            raise DomainError(f"rounds must be >= 1, got {self.rounds}")
        if not 0 <= self.seed < 2**64:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {self.seed}")

    @property
    def dim(self) -> int:
        return 4**self.k

    @property
    def nu_mu(self) -> float:
        return self.nu * self.mu

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class ClickTally:
    X1: int = 0
    X2: int = 0
    D1: int = 0
    D2: int = 0

    def __post_init__(self):
        if not (0 <= self.D1 <= self.X1 and 0 <= self.D2 <= self.X2):
            raise DomainError(f"inconsistent tally {self}")

    def __add__(self, other: ClickTally) -> ClickTally:
        return ClickTally(
            self.X1 + other.X1, self.X2 + other.X2, self.D1 + other.D1, self.D2 + other.D2
        )

    @property
    def rounds(self) -> int:
        return self.X1 + self.X2

    def fom(self) -> float:
        return self.D1 / (self.D1 + self.D2)

    def to_dict(self) -> dict:
        return {"X1": self.X1, "X2": self.X2, "D1": self.D1, "D2": self.D2}


def depolarize(q, d: int, visibility: float):
    """White-noise model ``V * q + (1 - V) / d``."""
    return visibility * q + (1.0 - visibility) / d


def optimal_overlaps(mubs: MubPair, x1, x2, y, j) -> np.ndarray:
    """Vectorized ``|<m_j^y | Psi_{x1 x2}>|**2`` for the optimal encoding."""
    d = mubs.dim
    sgn = np.where(mubs.dot_many(1, x1, 2, x2) >= 0, 1, -1)
    amp = mubs.dot_many(y, j, 1, x1) + sgn * mubs.dot_many(y, j, 2, x2)
    norm_sq = 2.0 * (1.0 + 1.0 / mubs.sqrt_dim)
    return amp.astype(np.float64) ** 2 / (d * d * norm_sq)


def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed, counter=block << 192))


def _run_block(config: SimConfig, mubs: MubPair, block: int, keep_rows: bool):
    start = block * BLOCK_ROUNDS
    n = min(BLOCK_ROUNDS, config.rounds - start)
    rng = _block_rng(config.seed, block)
    d = config.dim
    # Draw a full block and truncate, so a round's values never depend on the run length.
    x1 = rng.integers(1, d + 1, BLOCK_ROUNDS)[:n]
    x2 = rng.integers(1, d + 1, BLOCK_ROUNDS)[:n]
    y = rng.integers(1, 3, BLOCK_ROUNDS)[:n]
    j = rng.integers(1, d + 1, BLOCK_ROUNDS)[:n]
    q = depolarize(optimal_overlaps(mubs, x1, x2, y, j), d, config.visibility)
    if config.photon_sampling:
        photons = rng.poisson(config.mu, BLOCK_ROUNDS)[:n]
        thin = np.zeros(BLOCK_ROUNDS)
        thin[:n] = config.nu * q
        click = rng.binomial(np.append(photons, np.zeros(BLOCK_ROUNDS - n, np.int64)), thin)[:n] > 0
    else:
        click = rng.random(BLOCK_ROUNDS)[:n] < -np.expm1(-config.nu_mu * q)
    hit = np.where(y == 1, x1, x2) == j
    tally = ClickTally(
        X1=int(hit.sum()),
        X2=int(n - hit.sum()),
        D1=int((click & hit).sum()),
        D2=int((click & ~hit).sum()),
    )
    rows = None
    if keep_rows:
        rows = np.column_stack([np.arange(start + 1, start + n + 1), x1, x2, y, j, click.astype(np.int64)])
    return tally, rows


def simulate(
    config: SimConfig,
    log_path=None,
    threads: int | None = None,
    mubs: MubPair | None = None,
) -> ClickTally:
    """Run ``config.rounds`` rounds and return the click tally.

    With ``log_path`` every round is also written as a CSV row
    ``round,x1,x2,y,j,click`` (1-based indices).
    """
    mubs = mubs or build_mub(config.k)
    if mubs.dim != config.dim:
        raise DomainError(f"MUB dimension {mubs.dim} does not match k={config.k}")
    blocks = range(math.ceil(config.rounds / BLOCK_ROUNDS))
    keep = log_path is not None
    threads = threads or worker_count()

    def work(b):
        return _run_block(config, mubs, b, keep)

    fh = open(log_path, "w", newline="") if keep else None
    try:
        if fh:
            csv.writer(fh).writerow(LOG_HEADER)
        total = ClickTally()
        if threads > 1:
            pool = ThreadPoolExecutor(threads)
            results = pool.map(work, blocks)
        else:
            pool = None
            results = map(work, blocks)
        for tally, rows in results:
            total = total + tally
            if fh:
                np.savetxt(fh, rows, fmt="%d", delimiter=",")
        if pool:
            pool.shutdown()
    finally:
        if fh:
            fh.close()
    return total


def _check_q(q: float, d: int) -> None:
    if d < 2:
        raise DomainError(f"dimension must be >= 2, got {d}")
    if not (1.0 / d - CLAMP_SLOP <= q <= 1.0 + CLAMP_SLOP):
        raise DomainError(f"q={q!r} outside [1/{d}, 1]")


def expected_click_rates(q: float, d: int, nu_mu: float) -> tuple[float, float]:
    """Expected ``D1/X1`` and ``D2/X2`` for a strategy with success probability ``q``."""
    _check_q(q, d)
    if nu_mu < 0:
        raise DomainError(f"nu*mu must be >= 0, got {nu_mu}")
    return -math.expm1(-nu_mu * q), -math.expm1(-nu_mu * (1.0 - q) / (d - 1))


def fom_first_order(q: float, d: int, nu_mu: float) -> float:
    """First-order expansion of :func:`fom_closed_form` in small ``nu*mu``."""
    return q - 0.5 * ((1.0 - q) / (d - 1)) * q * (d * q - 1.0) * nu_mu


def fom_closed_form(q: float, d: int, nu_mu: float) -> float:
    """Expected figure of merit ``D1 / (D1 + D2)`` with a Poissonian source.

    Tends to ``q`` as ``nu*mu -> 0`` and to ``1/d`` as ``nu*mu -> inf``.
    """
    rate1, rate2 = expected_click_rates(q, d, nu_mu)
    if nu_mu < SERIES_CUTOFF:
        return fom_first_order(q, d, nu_mu)
    return rate1 / (rate1 + (d - 1) * rate2)


def expected_d1(config: SimConfig) -> float:
    q = depolarize(0.5 * (1.0 + 1.0 / math.sqrt(config.dim)), config.dim, config.visibility)
    return config.rounds / config.dim * expected_click_rates(q, config.dim, config.nu_mu)[0]
