"""Integrated-volatility estimators and their tuning rules."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import integrate, special

from .models import JumpComponent, SamplePath

__all__ = [
    "VARIANTS",
    "FrequencyRule",
    "EstimatorConfig",
    "EstimateResult",
    "realized_volatility",
    "truncated_rv",
    "multipower",
    "gaussian_abs_moment",
    "empirical_cf",
    "spectral_estimator",
    "spectral_frequency",
    "spectral_bias",
    "spectral_bias_bound",
    "estimate",
]

VARIANTS = ("realized", "truncated", "multipower", "spectral")

# |phi_hat| below this is treated as the zero of the indicator
DEGENERATE_CF = 1e-12


@dataclass(frozen=True)
class FrequencyRule:
    """Frequency ``u_n`` chosen from the class parameters ``(r, A)``."""

    r: float
    A: float

    def __post_init__(self):
        if not 0.0 <= self.r < 2.0 or not self.A > 0:
            raise ValueError("frequency rule needs r in [0, 2) and A > 0")

    def __call__(self, n: int) -> float:
        return spectral_frequency(n, self.r, self.A)


@dataclass(frozen=True)
class EstimatorConfig:
    variant: str = "realized"
    varpi: float = 0.4
    trunc_scale: float = 1.0
    k: int = 2
    freq_rule: float | FrequencyRule | None = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown estimator variant {self.variant!r}")
        if self.variant == "truncated":
            if not 0.0 < self.varpi < 0.5:
                raise ValueError(f"varpi must lie in (0, 1/2), got {self.varpi}")
            if not self.trunc_scale > 0:
                raise ValueError("trunc_scale must be positive")
        if self.variant == "multipower" and (int(self.k) != self.k or self.k < 2):
            raise ValueError(f"multipower order must be an integer >= 2, got {self.k}")
        if self.variant == "spectral":
            if self.freq_rule is None:
                raise ValueError("spectral estimator needs a frequency or a FrequencyRule")
            if not isinstance(self.freq_rule, FrequencyRule) and not self.freq_rule > 0:
                raise ValueError("explicit spectral frequency must be positive")

    def threshold(self, n: int) -> float:
        return self.trunc_scale * n ** (-self.varpi)

    def frequency(self, n: int) -> float:
        if isinstance(self.freq_rule, FrequencyRule):
            return self.freq_rule(n)
        return float(self.freq_rule)

    @property
    def label(self) -> str:
        if self.variant == "truncated":
            return f"truncated(varpi={self.varpi:g},scale={self.trunc_scale:g})"
        if self.variant == "multipower":
            return f"multipower(k={self.k})"
        if self.variant == "spectral":
            rule = self.freq_rule
            if isinstance(rule, FrequencyRule):
                return f"spectral(r={rule.r:g},A={rule.A:.6g})"
            return f"spectral(u={rule:g})"
        return "realized"


@dataclass(frozen=True)
class EstimateResult:
    value: float
    tuning_used: float | None = None
    degenerate: bool = False


def _increments(path: SamplePath | np.ndarray) -> np.ndarray:
    if isinstance(path, SamplePath):
        return path.increments
    return np.diff(np.asarray(path, dtype=float))


def realized_volatility(path: SamplePath) -> EstimateResult:
    d = _increments(path)
    if d.size < 1:
        raise ValueError("path needs at least one increment")
    return EstimateResult(float(np.dot(d, d)))


def truncated_rv(path: SamplePath, cfg: EstimatorConfig | None = None, *,
                 threshold: float | None = None) -> EstimateResult:
    """Sum of squared increments with ``|increment| <= v_n``.

    ``v_n = trunc_scale * n^(-varpi)`` unless an explicit ``threshold`` is given.
    """
    d = _increments(path)
    if d.size < 1:
        raise ValueError("path needs at least one increment")
    if threshold is None:
        if cfg is None or cfg.variant != "truncated":
            raise ValueError("truncated_rv needs a truncated EstimatorConfig or a threshold")
        threshold = cfg.threshold(d.size)
    kept = d[np.abs(d) <= threshold]
    return EstimateResult(float(np.dot(kept, kept)), float(threshold))


def gaussian_abs_moment(p: float) -> float:
    """``E|U|^p`` for a standard normal ``U``."""
    if not p > 0:
        raise ValueError(f"p must be positive, got {p}")
    return 2.0 ** (p / 2.0) * special.gamma((p + 1.0) / 2.0) / math.sqrt(math.pi)


def multipower(path: SamplePath, cfg: EstimatorConfig | None = None, *, k: int | None = None) -> EstimateResult:
    if k is None:
        k = 2 if cfg is None else cfg.k
    if int(k) != k or k < 2:
        raise ValueError(f"multipower order must be an integer >= 2, got {k}")
    k = int(k)
    d = np.abs(_increments(path))
    n = d.size
    if n < k:
        raise ValueError(f"path has {n} increments, fewer than k={k}")
    powered = d ** (2.0 / k)
    prod = np.ones(n - k + 1)
    for j in range(k):
        prod *= powered[j : n - k + 1 + j]
    return EstimateResult(float(prod.sum() / gaussian_abs_moment(2.0 / k) ** k), float(k))


def empirical_cf(path: SamplePath, u: float) -> complex:
    d = _increments(path)
    if d.size < 1:
        raise ValueError("path needs at least one increment")
    if u == 0:
        return 1.0 + 0.0j
    ud = u * d
    return complex(np.mean(np.cos(ud)), np.mean(np.sin(ud)))


def spectral_estimator(path: SamplePath, u: float) -> EstimateResult:
    """``-(2n/u^2) log|phi_hat_n(u)|``; value 0 with the degenerate flag when ``phi_hat`` vanishes."""
    if not u > 0:
        raise ValueError(f"frequency must be positive, got {u}")
    if not u * u > 0:
        raise ValueError(f"frequency {u} underflows when squared")
    n = _increments(path).size
    mod = abs(empirical_cf(path, u))
    if mod < DEGENERATE_CF:
        return EstimateResult(0.0, float(u), True)
    # divide last so that log|phi_hat| = 0 gives 0 even when 2n/u^2 overflows
    return EstimateResult(-2.0 * n * math.log(mod) / u**2, float(u))


def spectral_frequency(n: int, r: float, A: float) -> float:
    """``sqrt(n)`` when ``r <= 1``, else ``sqrt((r-1) n log n / A)``."""
    if n < 2:
        raise ValueError("n must be at least 2")
    if r <= 1.0:
        return math.sqrt(n)
    return math.sqrt((r - 1.0) * n * math.log(n)) / math.sqrt(A)


def _one_minus_cos_power(beta: float, upper: float) -> float:
    """``int_0^upper (1 - cos y) y^(-1-beta) dy`` by adaptive quadrature."""
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            # 1 - cos y = 2 sin^2(y/2); the y^(1-beta) factor goes into the algebraic weight
            head_end = min(1.0, upper)
            head, _ = integrate.quad(
                lambda y: 0.5 * np.sinc(y / (2.0 * math.pi)) ** 2,
                0.0, head_end, weight="alg", wvar=(1.0 - beta, 0.0))
            tail = 0.0
            if upper > 1.0:
                if math.isinf(upper):
                    power = 1.0 / beta
                    osc, _ = integrate.quad(lambda y: y ** (-1.0 - beta), 1.0, np.inf,
                                            weight="cos", wvar=1.0)
                else:
                    power = (1.0 - upper ** (-beta)) / beta
                    osc, _ = integrate.quad(lambda y: y ** (-1.0 - beta), 1.0, upper,
                                            weight="cos", wvar=1.0, limit=500)
                tail = power - osc
        except integrate.IntegrationWarning as exc:
            raise ArithmeticError(f"bias quadrature did not converge: {exc}") from exc
    return head + tail


def _gamma_component(comp: JumpComponent, u: float) -> float:
    """``2 int (1 - cos ux) F(dx)`` for one component."""
    if comp.kind == "compound-poisson":
        return 2.0 * comp.intensity * (1.0 - comp.jump_law.cos_mean(u))
    C = comp.levy_constant
    if C == 0.0:
        return 0.0
    beta = comp.stable_index
    upper = math.inf if comp.kind == "symmetric-stable" else u * comp.truncation
    # substitute y = u x on each half-line
    return 2.0 * 2.0 * C * u**beta * _one_minus_cos_power(beta, upper)


def spectral_bias(jumps: Sequence[JumpComponent], u: float) -> float:
    """Deterministic error ``gamma/u^2`` of the spectral estimator at frequency ``u``."""
    if not u > 0:
        raise ValueError("frequency must be positive")
    return sum(_gamma_component(c, u) for c in jumps) / u**2


def spectral_bias_bound(u: float, r: float, A: float, factor: float = 2.0) -> float:
    """``factor * A / u^(2-r)``, the bias bound for a Lévy measure in the ``(r, A)`` class."""
    return factor * A / u ** (2.0 - r)


def estimate(path: SamplePath, cfg: EstimatorConfig) -> EstimateResult:
    if cfg.variant == "realized":
        return realized_volatility(path)
    if cfg.variant == "truncated":
        return truncated_rv(path, cfg)
    if cfg.variant == "multipower":
        return multipower(path, cfg)
    return spectral_estimator(path, cfg.frequency(path.n))
