"""Success-probability estimates from click counts and irreducibility verdicts."""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field

from gdw.errors import ClickLogError, DomainError, NoClicksError
from gdw.simulate import LOG_HEADER, ClickTally
from gdw.solver import BoundResult
from gdw.structures import Factor, Kind, ProductStructure

__all__ = [
    "ERROR_MODEL",
    "Verdict",
    "BoundCheck",
    "CertificationReport",
    "estimate_asp",
    "certify",
    "certify_estimate",
    "ingest_click_log",
]

ERROR_MODEL = "first-order propagation of independent Poisson errors sqrt(D1), sqrt(D2)"


class Verdict(str, enum.Enum):
    IRREDUCIBLE_QUANTUM = "IrreducibleQuantum"
    VIOLATES_ONLY = "ViolatesOnly"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class BoundCheck:
    structure: ProductStructure
    asp: float
    z_score: float
    violated: bool

    def to_dict(self) -> dict:
        return {
            "structure": self.structure.render(),
            "asp": self.asp,
            "z_score": self.z_score,
            "violated": self.violated,
        }


@dataclass(frozen=True)
class CertificationReport:
    p_hat: float
    sigma: float
    dim: int
    bounds: tuple[BoundCheck, ...]
    verdict: Verdict
    sigma_threshold: float
    violated: tuple[str, ...] = ()
    complete: bool = True
    error_model: str = field(default=ERROR_MODEL)

    @property
    def certified(self) -> bool:
        return self.verdict is Verdict.IRREDUCIBLE_QUANTUM

    def verdict_label(self) -> str:
        if self.verdict is Verdict.IRREDUCIBLE_QUANTUM:
            return f"IrreducibleQuantum({self.dim})"
        if self.verdict is Verdict.VIOLATES_ONLY:
            return f"ViolatesOnly({', '.join(self.violated)})"
        return "Inconclusive"

    def to_dict(self) -> dict:
        return {
            "p_hat": self.p_hat,
            "sigma": self.sigma,
            "dim": self.dim,
            "sigma_threshold": self.sigma_threshold,
            "verdict": self.verdict.value,
            "verdict_label": self.verdict_label(),
            "violated": list(self.violated),
            "complete": self.complete,
            "error_model": self.error_model,
            "bounds": [b.to_dict() for b in self.bounds],
        }


def estimate_asp(tally: ClickTally) -> tuple[float, float]:
    """``p = D1 / (D1 + D2)`` and its first-order Poisson standard error.

    With independent ``sigma_Di = sqrt(Di)`` the propagated error of the ratio
    is ``sqrt(D1 * D2 / (D1 + D2)) / (D1 + D2)``.
    """
    n = tally.D1 + tally.D2
    if n == 0:
        raise NoClicksError("no clicks recorded; the success probability is undefined")
    p_hat = tally.D1 / n
    sigma = math.sqrt(tally.D1 * tally.D2 / n) / n
    return p_hat, sigma


def _z_score(p_hat: float, asp: float, sigma: float) -> float:
    diff = p_hat - asp
    if sigma > 0:
        return diff / sigma
    if diff == 0:
        return 0.0
    return math.copysign(math.inf, diff)


def certify_estimate(
    p_hat: float,
    sigma: float,
    d: int,
    bounds: list[BoundResult],
    sigma_threshold: float = 3.0,
    complete: bool = True,
) -> CertificationReport:
    """Compare an estimate against every bound other than the full ``Q_d``.

    A bound is violated when ``(p_hat - asp) / sigma >= sigma_threshold``; the
    system is certified irreducible when every such bound is violated.
    ``complete=False`` records that ``bounds`` is an explicit subset.
    """
    if not bounds:
        raise DomainError("certification needs at least one bound")
    if sigma < 0:
        raise DomainError(f"sigma must be >= 0, got {sigma}")
    full = ProductStructure((Factor(d, Kind.QUANTUM),), d)
    checks = []
    for b in bounds:
        if b.structure.total_dim != d:
            raise DomainError(f"bound {b.structure} is not a structure of d={d}")
        if b.structure == full:
            continue
        z = _z_score(p_hat, b.asp, sigma)
        checks.append(BoundCheck(b.structure, b.asp, z, z >= sigma_threshold))
    if not checks:
        raise DomainError(f"no bound other than {full} was supplied")
    checks.sort(key=lambda c: (-c.asp, c.structure.sort_key))
    violated = tuple(c.structure.render() for c in checks if c.violated)
    if len(violated) == len(checks):
        verdict = Verdict.IRREDUCIBLE_QUANTUM
    elif violated:
        verdict = Verdict.VIOLATES_ONLY
    else:
        verdict = Verdict.INCONCLUSIVE
    return CertificationReport(
        p_hat, sigma, d, tuple(checks), verdict, sigma_threshold, violated, complete
    )


def certify(
    tally: ClickTally,
    d: int,
    bounds: list[BoundResult],
    sigma_threshold: float = 3.0,
    complete: bool = True,
) -> CertificationReport:
    """:func:`certify_estimate` applied to the estimate from ``tally``."""
    p_hat, sigma = estimate_asp(tally)
    return certify_estimate(p_hat, sigma, d, bounds, sigma_threshold, complete)


def ingest_click_log(path, dim: int | None = None) -> ClickTally:
    """Count ``X1, X2, D1, D2`` from a ``round,x1,x2,y,j,click`` CSV log.

    Rows are streamed, so memory use does not grow with the log. When ``dim``
    is given, indices outside ``[1, dim]`` are rejected.
    """
    x1_count = x2_count = d1 = d2 = 0
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != LOG_HEADER:
            raise ClickLogError(f"expected header {','.join(LOG_HEADER)!r}, got {header!r}", 1)
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(LOG_HEADER):
                raise ClickLogError(f"expected {len(LOG_HEADER)} fields, got {len(row)}", line)
            try:
                _, x1, x2, y, j, click = (int(v) for v in row)
            except ValueError:
                raise ClickLogError(f"non-integer field in {row!r}", line) from None
            if y not in (1, 2):
                raise ClickLogError(f"basis index y={y} must be 1 or 2", line)
            if click not in (0, 1):
                raise ClickLogError(f"click field must be 0 or 1, got {click}", line)
            if dim is not None and not all(1 <= v <= dim for v in (x1, x2, j)):
                raise ClickLogError(f"index outside [1, {dim}] in {row!r}", line)
            if min(x1, x2, j) < 1:
                raise ClickLogError(f"indices are 1-based, got {row!r}", line)
            if (x1 if y == 1 else x2) == j:
                x1_count += 1
                d1 += click
            else:
                x2_count += 1
                d2 += click
    return ClickTally(x1_count, x2_count, d1, d2)
