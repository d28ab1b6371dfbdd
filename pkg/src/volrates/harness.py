"""Monte Carlo rate experiments.

Every replication ``m`` at sample size ``n`` is simulated from its own seed,
``derive_seed(base_seed, n, m)``, so results do not depend on execution
order or on how work is split across threads.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import stats

from .estimators import EstimatorConfig, FrequencyRule, estimate
from .models import ModelSpec, simulate_path, verify_class_membership

__all__ = [
    "ClassMembershipError",
    "RateUnknownError",
    "ExperimentPlan",
    "CellSummary",
    "RateFit",
    "RateExponent",
    "RateReport",
    "derive_seed",
    "collect_errors",
    "summarize",
    "fit_rate",
    "theoretical_exponent",
    "minimax_rate",
    "run_experiment",
]


class ClassMembershipError(ValueError):
    pass


class RateUnknownError(ValueError):
    """No rate is available for this estimator and activity index."""


def derive_seed(base_seed: int, n: int, replication: int) -> int:
    """64-bit seed mixed from ``(base_seed, n, replication)`` by ``numpy.random.SeedSequence``."""
    state = np.random.SeedSequence([int(base_seed), int(n), int(replication)]).generate_state(2)
    return (int(state[0]) << 32) | int(state[1])


@dataclass(frozen=True)
class ExperimentPlan:
    model: ModelSpec
    estimators: tuple[EstimatorConfig, ...]
    n_grid: tuple[int, ...]
    replications: int = 100
    base_seed: int = 0
    threads: int = 1

    def __post_init__(self):
        object.__setattr__(self, "estimators", tuple(self.estimators))
        object.__setattr__(self, "n_grid", tuple(int(n) for n in self.n_grid))
        if not self.estimators:
            raise ValueError("plan needs at least one estimator")
        if len(self.n_grid) < 3:
            raise ValueError("n_grid needs at least 3 points for a slope fit")
        if any(b <= a for a, b in zip(self.n_grid, self.n_grid[1:])) or self.n_grid[0] < 2:
            raise ValueError("n_grid must be strictly increasing and start at n >= 2")
        if self.replications < 1:
            raise ValueError("replications must be positive")


def _replicate(model, estimators, n, base_seed, reps):
    errors = np.empty((len(reps), len(estimators)))
    degenerate = np.zeros((len(reps), len(estimators)), dtype=bool)
    for row, m in enumerate(reps):
        path = simulate_path(model, n, derive_seed(base_seed, n, m))
        for col, cfg in enumerate(estimators):
            res = estimate(path, cfg)
            errors[row, col] = res.value - path.true_c1
            degenerate[row, col] = res.degenerate
    return errors, degenerate


def collect_errors(model: ModelSpec, estimators: Sequence[EstimatorConfig], n: int,
                   replications: int, base_seed: int = 0, threads: int = 1
                   ) -> tuple[np.ndarray, np.ndarray]:
    """Errors ``estimate - true_c1``, shape ``(replications, len(estimators))``, plus degenerate flags."""
    estimators = tuple(estimators)
    reps = np.arange(replications)
    if threads <= 1:
        return _replicate(model, estimators, n, base_seed, reps)
    chunks = np.array_split(reps, threads)
    with ThreadPoolExecutor(threads) as pool:
        parts = list(pool.map(lambda c: _replicate(model, estimators, n, base_seed, c), chunks))
    # chunks come back in submission order, so rows stay keyed by replication index
    return np.vstack([p[0] for p in parts]), np.vstack([p[1] for p in parts])


@dataclass(frozen=True)
class CellSummary:
    estimator: str
    n: int
    count: int
    mean_abs: float
    median_abs: float
    rmse: float
    p90: float
    degenerate: int


def summarize(label: str, n: int, errors: np.ndarray, degenerate: np.ndarray | None = None) -> CellSummary:
    a = np.abs(np.asarray(errors, dtype=float))
    return CellSummary(
        label, int(n), int(a.size), float(a.mean()), float(np.median(a)),
        float(math.sqrt(np.mean(a**2))), float(np.quantile(a, 0.9)),
        int(0 if degenerate is None else np.count_nonzero(degenerate)),
    )


@dataclass(frozen=True)
class RateFit:
    slope: float | None
    stderr: float | None
    degenerate: bool = False


def fit_rate(n_values: Sequence[float], medians: Sequence[float]) -> RateFit:
    """Least-squares slope of ``log median`` on ``log n``."""
    n_values = np.asarray(n_values, dtype=float)
    medians = np.asarray(medians, dtype=float)
    if n_values.size < 3 or n_values.size != medians.size:
        raise ValueError("need at least 3 matching points")
    if np.any(medians <= 0) or not np.all(np.isfinite(medians)):
        return RateFit(None, None, True)
    x, y = np.log(n_values), np.log(medians)
    res = stats.linregress(x, y)
    return RateFit(float(res.slope), float(res.stderr))


@dataclass(frozen=True)
class RateExponent:
    exponent: float
    log_factor: bool = False


def theoretical_exponent(r: float, cfg: EstimatorConfig) -> RateExponent:
    """Power of n in the uniform rate for ``cfg`` on the ``(r, A)`` class.

    Realized volatility is only rate-consistent without jumps; its exponent
    assumes a continuous model.
    """
    if not 0.0 <= r < 2.0:
        raise ValueError("r must lie in [0, 2)")
    if cfg.variant == "realized":
        return RateExponent(0.5)
    if cfg.variant == "truncated":
        if r < 1.0 and cfg.varpi >= 1.0 / (4.0 - 2.0 * r):
            return RateExponent(0.5)
        return RateExponent(cfg.varpi * (2.0 - r))
    if cfg.variant == "spectral":
        if r <= 1.0:
            return RateExponent(0.5)
        return RateExponent((2.0 - r) / 2.0, True)
    if r < 1.0:
        return RateExponent(0.5)
    raise RateUnknownError(f"no known rate for multipower variation with r={r:g} >= 1")


def minimax_rate(n: float, r: float) -> float:
    """``sqrt(n)`` for ``r <= 1``, ``(n log n)^((2-r)/2)`` otherwise."""
    if r <= 1.0:
        return math.sqrt(n)
    return (n * math.log(n)) ** ((2.0 - r) / 2.0)


@dataclass(frozen=True)
class RateReport:
    cells: tuple[CellSummary, ...]
    fits: dict
    theory: dict
    r: float
    replications: int
    base_seed: int

    def cells_for(self, label: str) -> list[CellSummary]:
        return [c for c in self.cells if c.estimator == label]

    def write_csv(self, path: str | Path) -> None:
        names = list(CellSummary.__dataclass_fields__)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(names)
            for c in self.cells:
                w.writerow([_fmt(getattr(c, k)) for k in names])

    def summary(self) -> dict:
        return {
            "r": self.r,
            "replications": self.replications,
            "base_seed": self.base_seed,
            "log": "natural",
            "estimators": {
                label: {
                    "fitted_slope": fit.slope,
                    "slope_stderr": fit.stderr,
                    "degenerate_fit": fit.degenerate,
                    "theory_exponent": None if self.theory[label] is None else self.theory[label].exponent,
                    "theory_log_factor": None if self.theory[label] is None else self.theory[label].log_factor,
                }
                for label, fit in self.fits.items()
            },
        }

    def write_json(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.summary(), indent=2, sort_keys=True) + "\n")


def _fmt(v) -> str:
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def _check_class(plan: ExperimentPlan) -> None:
    for cfg in plan.estimators:
        rule = cfg.freq_rule
        if cfg.variant == "spectral" and isinstance(rule, FrequencyRule):
            rep = verify_class_membership(plan.model, rule.r, rule.A)
            if not rep.passed:
                raise ClassMembershipError(f"model outside the class used by {cfg.label}: {rep}")


def run_experiment(plan: ExperimentPlan) -> RateReport:
    _check_class(plan)
    labels = [c.label for c in plan.estimators]
    cells = []
    for n in plan.n_grid:
        errs, degen = collect_errors(plan.model, plan.estimators, n, plan.replications,
                                     plan.base_seed, plan.threads)
        for j, label in enumerate(labels):
            cells.append(summarize(label, n, errs[:, j], degen[:, j]))
    fits, theory = {}, {}
    for label, cfg in zip(labels, plan.estimators):
        mine = [c for c in cells if c.estimator == label]
        fits[label] = fit_rate([c.n for c in mine], [c.median_abs for c in mine])
        try:
            theory[label] = theoretical_exponent(plan.model.class_r, cfg)
        except RateUnknownError:
            theory[label] = None
    return RateReport(tuple(cells), fits, theory, plan.model.class_r, plan.replications, plan.base_seed)
