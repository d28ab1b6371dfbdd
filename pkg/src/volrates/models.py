"""Simulation of discretely observed Itô semimartingales on [0, 1].

A model is a drift, a volatility and a list of independent jump components.
Drift and jump conventions follow the usual characteristic triple with
truncation function ``1{|x| <= 1}``: the drift ``b`` is the characteristic
drift, so jumps of size at most one are compensated.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import integrate, special, stats

__all__ = [
    "Deterministic",
    "StochasticVolatility",
    "JumpLaw",
    "JumpComponent",
    "ModelSpec",
    "SamplePath",
    "ClassReport",
    "stable_levy_constant",
    "sample_stable_increment",
    "stable_increments",
    "simulate_path",
    "verify_class_membership",
    "levy_class_integral",
    "REFINEMENT",
]

# sub-steps per observation interval for stochastic volatility
REFINEMENT = 64


@dataclass(frozen=True)
class Deterministic:
    """Piecewise-linear function of time, constant outside its knots.

    A single knot gives a constant function.
    """

    values: tuple[float, ...] = (0.0,)
    times: tuple[float, ...] = (0.0,)

    def __post_init__(self):
        values = tuple(float(v) for v in np.atleast_1d(self.values))
        times = tuple(float(t) for t in np.atleast_1d(self.times))
        if len(values) != len(times) or not values:
            raise ValueError("knot times and values must have the same nonzero length")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("knot times must be strictly increasing")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "times", times)

    @classmethod
    def constant(cls, value: float) -> "Deterministic":
        return cls((float(value),), (0.0,))

    @property
    def is_constant(self) -> bool:
        return len(set(self.values)) == 1

    def _knots(self) -> tuple[np.ndarray, np.ndarray]:
        t = np.unique(np.concatenate([[0.0, 1.0], self.times]))
        t = t[(t >= 0.0) & (t <= 1.0)]
        return t, np.interp(t, self.times, self.values)

    def __call__(self, t):
        return np.interp(t, self.times, self.values)

    def antiderivative(self, t) -> np.ndarray:
        """``int_0^t f(s) ds`` for ``t`` in [0, 1], exact."""
        kt, kv = self._knots()
        cum = np.concatenate([[0.0], np.cumsum(0.5 * (kv[1:] + kv[:-1]) * np.diff(kt))])
        t = np.asarray(t, dtype=float)
        i = np.clip(np.searchsorted(kt, t, side="right") - 1, 0, kt.size - 2)
        dt = t - kt[i]
        slope = (kv[i + 1] - kv[i]) / (kt[i + 1] - kt[i])
        return cum[i] + kv[i] * dt + 0.5 * slope * dt**2

    def sup_abs(self) -> float:
        return float(np.max(np.abs(self._knots()[1])))

    def knot_values(self, at: np.ndarray) -> np.ndarray:
        return np.interp(at, self.times, self.values)


@dataclass(frozen=True)
class StochasticVolatility:
    """Clipped Ornstein-Uhlenbeck recipe for ``log c``.

    ``d log c = kappa (log level - log c) dt + vol_of_vol dB`` with ``B``
    independent of the driving Brownian motion, clipped to ``[floor, cap]``
    after every refinement step, so ``sup c <= cap`` by construction.
    """

    level: float = 1.0
    kappa: float = 5.0
    vol_of_vol: float = 0.5
    floor: float = 0.1
    cap: float = 2.0
    initial: float | None = None

    def __post_init__(self):
        if not 0 < self.floor <= self.level <= self.cap:
            raise ValueError("need 0 < floor <= level <= cap")
        if self.kappa <= 0 or self.vol_of_vol < 0:
            raise ValueError("kappa must be positive and vol_of_vol nonnegative")
        if self.initial is not None and not self.floor <= self.initial <= self.cap:
            raise ValueError("initial variance outside [floor, cap]")


@dataclass(frozen=True)
class JumpLaw:
    """Jump-size distribution of a compound Poisson component.

    ``kind`` is ``"atoms"`` (``values`` with probabilities ``probs``) or
    ``"normal"`` (``mean``, ``std``).
    """

    kind: str = "atoms"
    values: tuple[float, ...] = (1.0,)
    probs: tuple[float, ...] = (1.0,)
    mean: float = 0.0
    std: float = 1.0

    def __post_init__(self):
        if self.kind == "atoms":
            values = tuple(float(v) for v in self.values)
            probs = tuple(float(p) for p in self.probs)
            if len(values) != len(probs) or not values:
                raise ValueError("atoms need matching values and probs")
            if any(p < 0 for p in probs) or not math.isclose(sum(probs), 1.0, abs_tol=1e-12):
                raise ValueError("atom probabilities must be nonnegative and sum to 1")
            object.__setattr__(self, "values", values)
            object.__setattr__(self, "probs", probs)
        elif self.kind == "normal":
            if self.std <= 0:
                raise ValueError("normal jump law needs std > 0")
        else:
            raise ValueError(f"unknown jump law {self.kind!r}")

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.kind == "atoms":
            idx = rng.choice(len(self.values), size=size, p=self.probs)
            return np.asarray(self.values)[idx]
        return rng.normal(self.mean, self.std, size=size)

    def expect(self, fn) -> float:
        """``E fn(J)``; closed form for atoms, quadrature for the normal law."""
        if self.kind == "atoms":
            v = np.asarray(self.values)
            return float(np.dot(self.probs, fn(v)))
        val, _ = integrate.quad(
            lambda x: fn(np.asarray(x)) * stats.norm.pdf(x, self.mean, self.std),
            -np.inf,
            np.inf,
            points=None,
            limit=200,
        )
        return float(val)

    def small_jump_mean(self) -> float:
        """``E[J 1{|J| <= 1}]``, the compensator rate per unit intensity."""
        if self.kind == "atoms":
            v = np.asarray(self.values)
            return float(np.dot(self.probs, np.where(np.abs(v) <= 1.0, v, 0.0)))
        lo = (-1.0 - self.mean) / self.std
        hi = (1.0 - self.mean) / self.std
        mass = stats.norm.cdf(hi) - stats.norm.cdf(lo)
        return float(self.mean * mass + self.std * (stats.norm.pdf(lo) - stats.norm.pdf(hi)))

    def cos_mean(self, u: float) -> float:
        if self.kind == "atoms":
            return float(np.dot(self.probs, np.cos(u * np.asarray(self.values))))
        return math.cos(u * self.mean) * math.exp(-0.5 * (self.std * u) ** 2)


JUMP_KINDS = ("compound-poisson", "symmetric-stable", "truncated-stable")


@dataclass(frozen=True)
class JumpComponent:
    """One independent jump source.

    For the stable kinds the Lévy density is ``C/|x|^(1+beta)`` with
    ``C = scale^beta Gamma(1+beta) sin(pi beta/2)/pi``, so that an increment
    over ``dt`` has characteristic function ``exp(-dt scale^beta |u|^beta)``.
    ``truncated-stable`` keeps only jumps with ``|x| <= truncation``; its jumps
    below ``small_jump_cutoff`` are replaced by a Gaussian of matching
    variance (default cutoff: about 16 simulated jumps per observation
    interval).
    """

    kind: str
    intensity: float = 0.0
    jump_law: JumpLaw = field(default_factory=JumpLaw)
    stable_index: float = 1.0
    scale: float = 1.0
    truncation: float = 1.0
    small_jump_cutoff: float | None = None

    def __post_init__(self):
        if self.kind not in JUMP_KINDS:
            raise ValueError(f"unknown jump kind {self.kind!r}")
        if self.kind == "compound-poisson":
            if not self.intensity >= 0:
                raise ValueError(f"intensity must be nonnegative, got {self.intensity}")
        else:
            if not 0.0 < self.stable_index < 2.0:
                raise ValueError(f"stable_index must lie in (0, 2), got {self.stable_index}")
            if not self.scale >= 0:
                raise ValueError(f"scale must be nonnegative, got {self.scale}")
        if self.kind == "truncated-stable":
            if not self.truncation > 0:
                raise ValueError("truncation must be positive")
            if self.small_jump_cutoff is not None and not 0 < self.small_jump_cutoff < self.truncation:
                raise ValueError("small_jump_cutoff must lie in (0, truncation)")

    @classmethod
    def compound_poisson(cls, intensity: float, jump_law: JumpLaw | None = None) -> "JumpComponent":
        return cls("compound-poisson", intensity=intensity, jump_law=jump_law or JumpLaw())

    @classmethod
    def stable(cls, beta: float, scale: float = 1.0) -> "JumpComponent":
        return cls("symmetric-stable", stable_index=beta, scale=scale)

    @classmethod
    def truncated_stable(cls, beta: float, scale: float = 1.0, truncation: float = 1.0,
                         small_jump_cutoff: float | None = None) -> "JumpComponent":
        return cls("truncated-stable", stable_index=beta, scale=scale,
                   truncation=truncation, small_jump_cutoff=small_jump_cutoff)

    @property
    def levy_constant(self) -> float:
        return stable_levy_constant(self.stable_index, self.scale)


@dataclass(frozen=True)
class ModelSpec:
    drift: Deterministic = field(default_factory=Deterministic)
    volatility: Deterministic | StochasticVolatility = field(
        default_factory=lambda: Deterministic.constant(1.0)
    )
    jumps: tuple[JumpComponent, ...] = ()
    class_r: float = 0.0
    class_A: float = math.inf

    def __post_init__(self):
        object.__setattr__(self, "jumps", tuple(self.jumps))
        if isinstance(self.volatility, Deterministic) and min(self.volatility.values) < 0:
            raise ValueError("volatility must be nonnegative")
        if not 0.0 <= self.class_r < 2.0:
            raise ValueError(f"class_r must lie in [0, 2), got {self.class_r}")
        if not self.class_A > 0:
            raise ValueError(f"class_A must be positive, got {self.class_A}")

    @classmethod
    def constant(cls, c: float = 1.0, b: float = 0.0, jumps: Sequence[JumpComponent] = (),
                 r: float = 0.0, A: float = math.inf) -> "ModelSpec":
        return cls(Deterministic.constant(b), Deterministic.constant(c), tuple(jumps), r, A)


@dataclass(frozen=True)
class SamplePath:
    n: int
    values: np.ndarray
    true_c1: float
    seed: int | None = None
    diagnostics: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 1 or v.size != self.n + 1:
            raise ValueError(f"expected {self.n + 1} values, got shape {v.shape}")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def increments(self) -> np.ndarray:
        return np.diff(self.values)

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n + 1) / self.n


def stable_levy_constant(beta: float, scale: float) -> float:
    """Density constant ``C`` of ``C/|x|^(1+beta)`` matching CF ``exp(-scale^beta |u|^beta)``."""
    return scale**beta * special.gamma(1.0 + beta) * math.sin(math.pi * beta / 2.0) / math.pi


def stable_increments(beta: float, scale: float, dt: float, rng: np.random.Generator,
                      size=None) -> np.ndarray:
    """Chambers-Mallows-Stuck draws of a symmetric stable increment over ``dt``."""
    if not 0.0 < beta < 2.0:
        raise ValueError(f"beta must lie in (0, 2), got {beta}")
    if scale < 0 or dt <= 0:
        raise ValueError("need scale >= 0 and dt > 0")
    v = rng.uniform(-0.5 * math.pi, 0.5 * math.pi, size=size)
    w = rng.exponential(1.0, size=size)
    if beta == 1.0:
        s = np.tan(v)
    else:
        s = (np.sin(beta * v) / np.cos(v) ** (1.0 / beta)
             * (np.cos((1.0 - beta) * v) / w) ** ((1.0 - beta) / beta))
    return scale * dt ** (1.0 / beta) * s


def sample_stable_increment(beta: float, scale: float, dt: float, rng: np.random.Generator) -> float:
    return float(stable_increments(beta, scale, dt, rng))


def _truncated_stable_increments(comp: JumpComponent, n: int, rng: np.random.Generator,
                                 diagnostics: dict) -> np.ndarray:
    beta, T = comp.stable_index, comp.truncation
    C = comp.levy_constant
    if C == 0.0:
        return np.zeros(n)
    eps = comp.small_jump_cutoff
    if eps is None:
        # about 16 jumps per observation interval above the cutoff
        eps = min(0.5 * T, (8.0 * n * beta / C + T ** (-beta)) ** (-1.0 / beta))
    tail_rate = 2.0 * C * (eps ** (-beta) - T ** (-beta)) / beta
    counts = rng.poisson(tail_rate / n, size=n)
    total = int(counts.sum())
    u = rng.uniform(size=total)
    mags = (eps ** (-beta) - u * (eps ** (-beta) - T ** (-beta))) ** (-1.0 / beta)
    signs = rng.choice([-1.0, 1.0], size=total)
    owner = np.repeat(np.arange(n), counts)
    inc = np.bincount(owner, weights=mags * signs, minlength=n)
    small_var = 2.0 * C * eps ** (2.0 - beta) / (2.0 - beta)
    inc += math.sqrt(small_var / n) * rng.standard_normal(n)
    diagnostics.setdefault("small_jump_variance", []).append(small_var)
    diagnostics.setdefault("small_jump_cutoff", []).append(eps)
    return inc


def _jump_increments(comp: JumpComponent, n: int, rng: np.random.Generator,
                     diagnostics: dict) -> np.ndarray:
    if comp.kind == "compound-poisson":
        counts = rng.poisson(comp.intensity / n, size=n)
        sizes = comp.jump_law.sample(rng, int(counts.sum()))
        owner = np.repeat(np.arange(n), counts)
        inc = np.bincount(owner, weights=sizes, minlength=n).astype(float)
        comp_rate = comp.intensity * comp.jump_law.small_jump_mean()
        return inc - comp_rate / n
    if comp.kind == "symmetric-stable":
        return stable_increments(comp.stable_index, comp.scale, 1.0 / n, rng, size=n)
    return _truncated_stable_increments(comp, n, rng, diagnostics)


def _stochastic_variance(sv: StochasticVolatility, n: int, rng: np.random.Generator) -> np.ndarray:
    """Integrated variance of each observation interval under the clipped OU recipe."""
    m = n * REFINEMENT
    dt = 1.0 / m
    mu = math.log(sv.level)
    lo, hi = math.log(sv.floor), math.log(sv.cap)
    decay = math.exp(-sv.kappa * dt)
    sd = sv.vol_of_vol * math.sqrt((1.0 - decay**2) / (2.0 * sv.kappa))
    shocks = sd * rng.standard_normal(m)
    y = np.empty(m)
    cur = math.log(sv.initial if sv.initial is not None else sv.level)
    for k in range(m):  # clipping makes the recursion nonlinear
        y[k] = cur
        cur = min(max(mu + (cur - mu) * decay + shocks[k], lo), hi)
    return np.exp(y).reshape(n, REFINEMENT).sum(axis=1) * dt


def simulate_path(model: ModelSpec, n: int, seed: int) -> SamplePath:
    """Simulate ``X_{i/n}``, ``i = 0..n``, with ``X_0 = 0``.

    Each source of randomness (Brownian part, volatility, every jump
    component) gets its own Philox stream spawned from ``seed``.
    """
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    ss = np.random.SeedSequence(int(seed))
    streams = [np.random.Generator(np.random.Philox(s)) for s in ss.spawn(2 + len(model.jumps))]
    grid = np.arange(n + 1) / n
    diagnostics: dict = {}

    inc = np.diff(model.drift.antiderivative(grid))
    vol = model.volatility
    if isinstance(vol, StochasticVolatility):
        var = _stochastic_variance(vol, n, streams[1])
        true_c1 = float(var.sum())
    elif vol.is_constant:
        var = np.full(n, vol.values[0] / n)
        true_c1 = float(vol.values[0])
    else:
        var = np.maximum(np.diff(vol.antiderivative(grid)), 0.0)
        true_c1 = float(vol.antiderivative(1.0))
    inc = inc + np.sqrt(var) * streams[0].standard_normal(n)
    for comp, rng in zip(model.jumps, streams[2:]):
        inc += _jump_increments(comp, n, rng, diagnostics)
    values = np.concatenate([[0.0], np.cumsum(inc)])
    return SamplePath(n, values, true_c1, int(seed), diagnostics)


@dataclass(frozen=True)
class ClassReport:
    """Outcome of a class-membership check for ``|b| + c + int(|x|^r ^ 1) F(dx) <= A``."""

    r: float
    A: float
    drift_sup: float
    volatility_sup: float
    levy_integral: float
    total: float
    components: tuple[float, ...]
    converged: bool
    passed: bool
    notes: tuple[str, ...] = ()

    def __str__(self) -> str:
        status = "pass" if self.passed else "FAIL"
        return (f"class(r={self.r:g}, A={self.A:g}): sup|b|={self.drift_sup:.6g} "
                f"sup c={self.volatility_sup:.6g} levy={self.levy_integral:.6g} "
                f"total={self.total:.6g} -> {status}")


def _power_integral(p: float, a: float, b: float) -> tuple[float, bool]:
    """``int_a^b x^p dx`` by adaptive quadrature (``b`` may be ``inf``)."""
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            if a == 0.0:
                val, err = integrate.quad(lambda x: 1.0, 0.0, b, weight="alg", wvar=(p, 0.0))
            else:
                val, err = integrate.quad(lambda x: x**p, a, b, limit=200)
        except integrate.IntegrationWarning:
            return math.nan, False
    return val, err <= 1e-8 * max(1.0, abs(val))


def levy_class_integral(comp: JumpComponent, r: float) -> tuple[float, bool, str]:
    """``int (|x|^r ^ 1) F(dx)`` for one component; returns (value, converged, note)."""
    if comp.kind == "compound-poisson":
        val = comp.intensity * comp.jump_law.expect(
            lambda x: np.where(x == 0, 0.0, np.minimum(np.abs(x) ** r, 1.0)))
        return val, True, ""
    beta = comp.stable_index
    C = comp.levy_constant
    if C == 0.0:
        return 0.0, True, ""
    if r <= beta:
        return math.inf, True, f"diverges at the origin: r={r:g} <= stable index {beta:g}"
    T = comp.truncation if comp.kind == "truncated-stable" else math.inf
    near, ok1 = _power_integral(r - 1.0 - beta, 0.0, min(1.0, T))
    far, ok2 = (0.0, True) if T <= 1.0 else _power_integral(-1.0 - beta, 1.0, T)
    ok = ok1 and ok2
    return 2.0 * C * (near + far), ok, "" if ok else "quadrature did not converge"


def verify_class_membership(model: ModelSpec, r: float | None = None, A: float | None = None,
                            rtol: float = 1e-9) -> ClassReport:
    """Check ``sup_t (|b_t| + c_t + int (|x|^r ^ 1) F_t(dx)) <= A``."""
    r = model.class_r if r is None else r
    A = model.class_A if A is None else A
    if not 0.0 <= r <= 2.0 or not A > 0:
        raise ValueError("need r in [0, 2] and A > 0")
    vol = model.volatility
    if isinstance(vol, StochasticVolatility):
        b_sup = model.drift.sup_abs()
        c_sup = vol.cap
        bc = b_sup + c_sup
    else:
        knots = np.unique(np.concatenate([[0.0, 1.0], model.drift.times, vol.times]))
        knots = knots[(knots >= 0) & (knots <= 1)]
        b_sup = model.drift.sup_abs()
        c_sup = float(np.max(vol.knot_values(knots)))
        # |b| + c is convex on each linear piece, so its sup sits on a knot
        bc = float(np.max(np.abs(model.drift.knot_values(knots)) + vol.knot_values(knots)))
    parts, converged, notes = [], True, []
    for comp in model.jumps:
        val, ok, note = levy_class_integral(comp, r)
        parts.append(val)
        converged &= ok
        if note:
            notes.append(note)
    levy = float(sum(parts))
    total = bc + levy
    passed = converged and math.isfinite(total) and total <= A * (1.0 + rtol)
    return ClassReport(r, A, b_sup, c_sup, levy, total, tuple(parts), converged, passed, tuple(notes))
