"""Monte Carlo harness for the VBZC estimators: bias and MSE against a plug-in truth.

Every replication draws its own sample from a seed derived from
``(master_seed, point index, n, replication)``, so results do not depend on
how the work is scheduled. The truth at each point is the estimator applied
to one very large sample.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .errors import DomainError, ZengaError
from .estimator import estimate_vbzc
from .models import BivariateSample, LognormalParams, lognormal_sample
from .numerics import QuantilePoint, as_point

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_ORACLE_SALT = 0x5EED_0F_7247_7A11

CSV_COLUMNS = ("u1", "u2", "n", "est12", "est21", "bias12", "bias21", "mse12", "mse21", "failed")

#: Published Monte Carlo results: (u1, u2) -> n -> (estimates, absolute bias, MSE). Reference only;
#: the generating parameters behind it are not stated, so nothing is asserted against it.
PUBLISHED_MC_TABLE: dict[tuple[float, float], dict[int, tuple[tuple[float, float], ...]]] = {
    (0.3, 0.3): {
        50: ((0.8265, 0.8274), (0.0174, 0.0129), (0.0022, 0.0020)),
        100: ((0.8388, 0.8369), (0.0017, 0.0051), (0.0009, 0.0009)),
        200: ((0.8370, 0.8375), (0.0040, 0.0054), (0.0005, 0.0005)),
        500: ((0.8401, 0.8390), (0.0017, 0.0021), (0.0002, 0.0002)),
    },
    (0.5, 0.5): {
        50: ((0.7879, 0.7912), (0.0238, 0.0218), (0.0039, 0.0036)),
        100: ((0.7984, 0.8008), (0.0145, 0.0114), (0.0019, 0.0015)),
        200: ((0.8051, 0.8058), (0.0072, 0.0039), (0.0008, 0.0009)),
        500: ((0.8069, 0.8090), (0.0029, 0.0034), (0.0003, 0.0003)),
    },
    (0.7, 0.7): {
        50: ((0.7568, 0.7577), (0.0436, 0.0424), (0.0087, 0.0074)),
        100: ((0.7801, 0.7739), (0.0208, 0.0279), (0.0041, 0.0038)),
        200: ((0.7895, 0.7889), (0.0157, 0.0121), (0.0018, 0.0018)),
        500: ((0.7971, 0.7961), (0.0077, 0.0074), (0.0007, 0.0007)),
    },
}
PUBLISHED_POINTS = tuple(PUBLISHED_MC_TABLE)
PUBLISHED_SIZES = (50, 100, 200, 500)


def splitmix64(x: int) -> int:
    """One step of the splitmix64 output function."""
    z = (x + _GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(master_seed: int, *indices: int) -> int:
    """A stable 64-bit seed from a master seed and integer indices."""
    h = splitmix64(int(master_seed) & MASK64)
    for k in indices:
        h = splitmix64(h ^ (int(k) & MASK64))
    return h


def draw(dgp: Any, n: int, seed: int) -> BivariateSample:
    """Sample from a :class:`LognormalParams` or any object with ``sample(n, seed)``."""
    if isinstance(dgp, LognormalParams):
        return lognormal_sample(dgp, n, seed)
    if hasattr(dgp, "sample"):
        return dgp.sample(n, seed)
    raise DomainError(f"cannot sample from {type(dgp).__name__}")


@dataclass(frozen=True)
class McConfig:
    dgp: Any = field(default_factory=LognormalParams)
    points: tuple[QuantilePoint, ...] = tuple(QuantilePoint(*p) for p in PUBLISHED_POINTS)
    sizes: tuple[int, ...] = PUBLISHED_SIZES
    replications: int = 500
    master_seed: int = 20240601
    oracle_n: int = 1_000_000
    oracle_seed: int | None = None
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(as_point(p) for p in self.points))
        object.__setattr__(self, "sizes", tuple(int(n) for n in self.sizes))
        if self.replications < 1:
            raise DomainError("need at least one replication")
        if not self.sizes or min(self.sizes) < 2:
            raise DomainError("sample sizes must be at least 2")
        if not self.points:
            raise DomainError("need at least one evaluation point")
        if self.workers < 1:
            raise DomainError("workers must be at least 1")

    @property
    def resolved_oracle_seed(self) -> int:
        if self.oracle_seed is not None:
            return int(self.oracle_seed)
        return derive_seed(self.master_seed, _ORACLE_SALT)


@dataclass(frozen=True)
class McSummary:
    """One (point, n) cell: moments over the replications that produced an estimate."""

    point: QuantilePoint
    n: int
    mean_estimates: tuple[float, float]
    abs_bias: tuple[float, float]
    mse: tuple[float, float]
    n_failed: int
    truth: tuple[float, float]
    replications: int

    @property
    def usable(self) -> bool:
        return self.n_failed < self.replications


def reference_truth(dgp: Any, u, oracle_n: int = 1_000_000, oracle_seed: int = 0) -> tuple[float, float]:
    """Plug-in truth: :func:`estimate_vbzc` on one sample of ``oracle_n`` draws."""
    if oracle_n < 100_000:
        raise DomainError(f"oracle sample must have at least 1e5 draws, got {oracle_n}")
    est = estimate_vbzc(draw(dgp, oracle_n, oracle_seed), u)
    return est.i12, est.i21


def _cell(args) -> np.ndarray:
    """Estimates for one (point, n) cell; row r is replication r, ``nan`` marks a failure."""
    dgp, point, point_index, n, reps, master = args
    out = np.full((reps, 2), np.nan)
    for r in range(reps):
        sample = draw(dgp, n, derive_seed(master, point_index, n, r))
        try:
            est = estimate_vbzc(sample, point)
        except ZengaError:
            continue
        out[r] = (est.i12, est.i21)
    return out


def summarize(point: QuantilePoint, n: int, estimates: np.ndarray, truth: tuple[float, float]) -> McSummary:
    ok = ~np.isnan(estimates).any(axis=1)
    good = estimates[ok]
    failed = int((~ok).sum())
    if good.shape[0] == 0:
        nan2 = (math.nan, math.nan)
        return McSummary(point, n, nan2, nan2, nan2, failed, truth, estimates.shape[0])
    t = np.asarray(truth)
    mean = good.mean(axis=0)
    mse = ((good - t) ** 2).mean(axis=0)
    bias = np.abs(mean - t)
    return McSummary(
        point, n, tuple(mean.tolist()), tuple(bias.tolist()), tuple(mse.tolist()), failed, truth, estimates.shape[0]
    )


def run_replications(config: McConfig, truths: Sequence[tuple[float, float]] | None = None) -> list[McSummary]:
    """Bias and MSE for every (point, n) cell of ``config``.

    ``truths`` (one pair per point) skips the oracle runs. Cells are
    evaluated in parallel when ``config.workers > 1``; the output is
    identical either way.
    """
    if truths is None:
        truths = [reference_truth(config.dgp, p, config.oracle_n, config.resolved_oracle_seed) for p in config.points]
    if len(truths) != len(config.points):
        raise DomainError("need one truth per point")
    tasks = [
        (config.dgp, p, i, n, config.replications, config.master_seed)
        for i, p in enumerate(config.points)
        for n in config.sizes
    ]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_cell, tasks))
    else:
        results = [_cell(t) for t in tasks]
    out = []
    for (dgp, p, i, n, _, _), est in zip(tasks, results):
        out.append(summarize(p, n, est, tuple(truths[i])))
    return out


def _fmt(x: float) -> str:
    return "nan" if math.isnan(x) else repr(float(x))


def summaries_to_csv(rows: Sequence[McSummary]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for s in rows:
        w.writerow(
            [
                _fmt(s.point.u1),
                _fmt(s.point.u2),
                s.n,
                _fmt(s.mean_estimates[0]),
                _fmt(s.mean_estimates[1]),
                _fmt(s.abs_bias[0]),
                _fmt(s.abs_bias[1]),
                _fmt(s.mse[0]),
                _fmt(s.mse[1]),
                s.n_failed,
            ]
        )
    return buf.getvalue()


def write_summaries(rows: Sequence[McSummary], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(summaries_to_csv(rows))


def count_inversions(values: Sequence[float]) -> int:
    """Adjacent increases in a sequence that should be non-increasing."""
    v = list(values)
    return sum(1 for a, b in zip(v, v[1:]) if b > a)


def qualitative_check(rows: Sequence[McSummary], allowed: int = 1) -> dict[tuple[float, float], dict[str, int]]:
    """Per point, the number of increases in n for each bias and MSE column.

    The contract holds when every count is at most ``allowed``.
    """
    by_point: dict[tuple[float, float], list[McSummary]] = {}
    for s in rows:
        by_point.setdefault((s.point.u1, s.point.u2), []).append(s)
    report = {}
    for key, cells in by_point.items():
        cells = sorted(cells, key=lambda c: c.n)
        report[key] = {
            "bias12": count_inversions([c.abs_bias[0] for c in cells]),
            "bias21": count_inversions([c.abs_bias[1] for c in cells]),
            "mse12": count_inversions([c.mse[0] for c in cells]),
            "mse21": count_inversions([c.mse[1] for c in cells]),
        }
    return report


__all__ = [
    "CSV_COLUMNS",
    "McConfig",
    "McSummary",
    "PUBLISHED_POINTS",
    "PUBLISHED_SIZES",
    "PUBLISHED_MC_TABLE",
    "count_inversions",
    "derive_seed",
    "qualitative_check",
    "reference_truth",
    "run_replications",
    "splitmix64",
    "summaries_to_csv",
    "summarize",
    "write_summaries",
]
