"""Numerical instance of the two-point lower-bound construction.

For r in (1, 2) and a sample size n, two Lévy processes are built whose
integrated volatilities differ by ``a_n = (n log n)^(-(2-r)/2)`` while the
laws of their n increments are close in total variation. Everything lives
in the Fourier domain:

* ``h_n`` is the even plateau function (height ``a_n`` up to ``u_n``, cubic
  exponential decay beyond) and ``H_n`` its inverse Fourier transform;
* ``F_n = |H_n|/x^2`` and ``G_n = F_n + H_n/x^2`` are the two Lévy densities;
* the characteristic exponents of the increments differ only for
  ``|u| > u_n``, which is what keeps the total-variation proxy small.

Fourier convention: ``Fg(u) = int e^{iux} g(x) dx`` and
``F^{-1}h(x) = (1/2pi) int e^{-iux} h(u) du``. Natural logarithms throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

__all__ = [
    "GridError",
    "GridSpec",
    "HTabulation",
    "LevyDensities",
    "Exponents",
    "Diagnostics",
    "MinimaxPair",
    "perturbation_constants",
    "h_fn",
    "default_x_grid",
    "default_u_grid",
    "inverse_fourier_h",
    "levy_densities",
    "class_integral",
    "characteristic_exponents",
    "eta_exponent_exact",
    "marginal_cfs",
    "eta",
    "eta_prime",
    "density_difference",
    "indistinguishability_norms",
    "build_pair",
]

# e^{-t^3} < 1e-27 beyond this point
_TAIL_CUTOFF = 4.0
_CHUNK = 1 << 22


class GridError(ValueError):
    """A tabulation grid is too coarse or too short for the requested accuracy."""


@dataclass(frozen=True)
class GridSpec:
    """Symmetric uniform grid ``k * spacing`` for ``|k * spacing| <= extent``."""

    spacing: float
    extent: float

    def __post_init__(self):
        if not (self.spacing > 0 and self.extent > 0):
            raise GridError("grid spacing and extent must be positive")

    @property
    def half_count(self) -> int:
        return int(math.floor(self.extent / self.spacing + 1e-9))

    def points(self) -> np.ndarray:
        m = self.half_count
        return np.arange(-m, m + 1, dtype=float) * self.spacing

    def refined(self, factor: int = 2) -> "GridSpec":
        # keep the coarse node span so every coarse node is a fine node
        return GridSpec(self.spacing / factor, self.half_count * self.spacing)


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a)
    a.flags.writeable = False
    return a


def _trapezoid_weights(size: int, spacing: float) -> np.ndarray:
    w = np.full(size, spacing)
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def perturbation_constants(r: float, n: int) -> tuple[float, float]:
    """Return ``(a_n, u_n)`` with ``a_n = (n log n)^{-(2-r)/2}``, ``u_n = 2 sqrt(n log n)``."""
    if not 1.0 < r < 2.0:
        raise ValueError(f"r must lie in (1, 2), got {r}")
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    nlogn = n * math.log(n)
    return nlogn ** (-(2.0 - r) / 2.0), 2.0 * math.sqrt(nlogn)


def h_fn(u, a_n: float, u_n: float):
    """The plateau function: ``a_n`` on ``|u| <= u_n``, ``a_n exp(-(|u|-u_n)^3)`` beyond."""
    au = np.abs(np.asarray(u, dtype=float))
    excess = np.maximum(au - u_n, 0.0)
    out = a_n * np.exp(-(excess**3))
    return out if out.ndim else float(out)


def default_x_grid(u_n: float) -> GridSpec:
    # Spacing resolves sin(u_n x). The jump of the third derivative of h_n at
    # u_n leaves H_n a tail 6 a_n cos(u_n x)/(pi x^4), whose integral beyond X
    # stays below 1e-7 a_n once X^4 >= 6e7/(pi u_n).
    tail = (6e7 / (math.pi * u_n)) ** 0.25
    return GridSpec(math.pi / (4.0 * u_n), max(16.0, 64.0 / u_n, tail))


def default_u_grid(n: int, spacing: float = 0.25) -> GridSpec:
    return GridSpec(spacing, 8.0 * math.sqrt(n * math.log(n)))


def _tail_transforms(x: np.ndarray, nodes: int) -> tuple[np.ndarray, np.ndarray]:
    """``C(x) = int_0^inf cos(tx) e^{-t^3} dt`` and the matching sine integral."""
    t, w = np.polynomial.legendre.leggauss(nodes)
    t = 0.5 * _TAIL_CUTOFF * (t + 1.0)
    w = 0.5 * _TAIL_CUTOFF * w * np.exp(-(t**3))
    c = np.empty_like(x)
    s = np.empty_like(x)
    step = max(1, _CHUNK // nodes)
    for lo in range(0, x.size, step):
        tx = np.outer(x[lo : lo + step], t)
        c[lo : lo + step] = np.cos(tx) @ w
        s[lo : lo + step] = np.sin(tx) @ w
    return c, s


@dataclass(frozen=True)
class HTabulation:
    a_n: float
    u_n: float
    grid: GridSpec
    x: np.ndarray
    values: np.ndarray
    nodes: int


def _h_inverse_values(x: np.ndarray, a_n: float, u_n: float, nodes: int) -> np.ndarray:
    c, s = _tail_transforms(x, nodes)
    ux = u_n * x
    # the plateau contributes a_n sin(u_n x)/(pi x) in closed form
    plateau = u_n * np.sinc(ux / math.pi)
    return a_n / math.pi * (plateau + np.cos(ux) * c - np.sin(ux) * s)


def inverse_fourier_h(
    a_n: float,
    u_n: float,
    grid: GridSpec | None = None,
    nodes: int = 256,
    check: bool = True,
) -> HTabulation:
    """Tabulate ``H_n = F^{-1} h_n`` on a symmetric x-grid.

    The plateau integral is exact; the decaying tail
    ``int_0^inf cos((u_n + t) x) e^{-t^3} dt`` uses Gauss-Legendre with
    ``nodes`` points. With ``check`` the tabulation is repeated with half the
    nodes and rejected if any value moves by more than ``1e-8 a_n u_n``.
    """
    if grid is None:
        grid = default_x_grid(u_n)
    if grid.spacing > math.pi / (4.0 * u_n) * (1 + 1e-12):
        raise GridError(
            f"x spacing {grid.spacing:.3g} does not resolve frequency u_n={u_n:.4g}"
        )
    x = grid.points()
    values = _h_inverse_values(x, a_n, u_n, nodes)
    if check:
        coarse = _h_inverse_values(x, a_n, u_n, nodes // 2)
        drift = np.max(np.abs(values - coarse))
        if drift > 1e-8 * a_n * u_n:
            raise GridError(f"tail quadrature not converged (change {drift:.3g})")
    return HTabulation(a_n, u_n, grid, _readonly(x), _readonly(values), nodes)


@dataclass(frozen=True)
class LevyDensities:
    """``F = |H|/x^2`` and ``G = F + H/x^2``; both are ``inf`` at ``x = 0``."""

    x: np.ndarray
    H: np.ndarray
    F: np.ndarray
    G: np.ndarray


def levy_densities(tab: HTabulation, tol: float = 1e-10) -> LevyDensities:
    x, H = tab.x, tab.values
    with np.errstate(divide="ignore"):
        inv_x2 = np.where(x == 0.0, np.inf, 1.0 / np.where(x == 0.0, 1.0, x) ** 2)
    F = np.abs(H) * inv_x2
    G = (np.abs(H) + H) * inv_x2
    finite = x != 0.0
    if np.any(G[finite] < -tol):
        raise GridError("negative jump density for the second process")
    return LevyDensities(x, H, _readonly(F), _readonly(G))


def _power_weighted_integral(x: np.ndarray, g: np.ndarray, p: float) -> float:
    """``int x^p g(x) dx`` over ``[x[0], x[-1]]`` for ``g`` piecewise linear, ``p > -1``."""
    a, b = x[:-1], x[1:]
    ga, gb = g[:-1], g[1:]
    m0 = (b ** (p + 1) - a ** (p + 1)) / (p + 1)
    m1 = (b ** (p + 2) - a ** (p + 2)) / (p + 2) - a * m0
    return float(np.sum(ga * m0 + (gb - ga) / (b - a) * m1))


def class_integral(dens: LevyDensities, r: float, which: str = "F") -> float:
    """``int (|x|^r ^ 1) density(x) dx``.

    The ``|x|^{r-2}`` singularity at the origin is integrated exactly against
    a piecewise-linear interpolant of ``|H|`` (or ``|H| + H``).
    """
    x, H = dens.x, dens.H
    pos = x >= 0
    xh, Hh = x[pos], H[pos]
    num = np.abs(Hh) if which == "F" else np.abs(Hh) + Hh
    inner = xh <= 1.0
    near = _power_weighted_integral(xh[inner], num[inner], r - 2.0)
    # one cell straddles x = 1 and the remainder is regular
    k = int(np.count_nonzero(inner)) - 1
    xr = xh[k:]
    fr = np.minimum(xr, 1.0) ** r * num[k:] / xr**2
    far = float(np.trapezoid(fr, xr))
    return 2.0 * (near + far)


@dataclass(frozen=True)
class Exponents:
    """Tabulated exponent integrals on a u-grid.

    ``phi`` is ``int (1-cos ux)|H|/x^2``, ``eta`` is ``int (1-cos ux) H/x^2``
    (both by x-quadrature) and ``phi_prime`` is ``int sin(ux)|H|/x``. The two
    integrals of ``|H|`` carry a correction for the kinks at the roots of H.
    """

    u: np.ndarray
    phi: np.ndarray
    eta: np.ndarray
    phi_prime: np.ndarray


def _even_quadrature(x: np.ndarray, f: np.ndarray, u: np.ndarray, kernel) -> np.ndarray:
    """``int kernel(u, x) f(x) dx`` over a symmetric grid for an even integrand."""
    pos = x >= 0
    xh = x[pos]
    w = 2.0 * _trapezoid_weights(xh.size, xh[1] - xh[0]) * f[pos]
    out = np.empty(u.size)
    step = max(1, _CHUNK // xh.size)
    for lo in range(0, u.size, step):
        uc = u[lo : lo + step]
        out[lo : lo + step] = kernel(uc[:, None], xh[None, :]) @ w
    return out


_KINK_ORDER = 3
_TAYLOR_TERMS = 14


def _bernoulli_polys(top: int, a: np.ndarray) -> list[np.ndarray]:
    """Bernoulli polynomials ``B_0(a) .. B_top(a)``."""
    b = special.bernoulli(top)
    return [sum(special.comb(m, j) * b[j] * a ** (m - j) for j in range(m + 1)) for m in range(top + 1)]


def _neg_polylog(j: int, q):
    """``sum_{l>=0} l^j q^l`` in the Abel sense, for ``j <= 3``."""
    if j == 0:
        return 1.0 / (1.0 - q)
    if j == 1:
        return q / (1.0 - q) ** 2
    if j == 2:
        return q * (1.0 + q) / (1.0 - q) ** 3
    return q * (1.0 + 4.0 * q + q * q) / (1.0 - q) ** 4


def _ramp_defects(k: np.ndarray, r: np.ndarray, delta: np.ndarray, dx: float
                  ) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Trapezoid sum minus integral of ``(x-r)_+^p e^{ikx}`` on the grid ``j dx``.

    Returns ``(d, d - d0)``, each a list holding one ``(k.size, r.size)``
    array per ``p = 1 .. _KINK_ORDER``, where ``d0`` is the value at ``k = 0``.
    ``delta`` is the distance from ``r`` up to the next node. Away from
    ``k = 0`` the lattice sum is an arithmetic-geometric series; near it the
    Hurwitz zeta values ``-dx^m B_m(delta/dx)/m`` are summed as a Taylor
    series, which also gives ``d - d0`` without cancellation.
    """
    k = k[:, None]
    near = np.abs(k[:, 0] * dx) < 0.2
    far = ~near
    bern = _bernoulli_polys(_KINK_ORDER + _TAYLOR_TERMS, delta / dx)
    d_all, diff_all = [], []
    kf, kn = k[far], k[near]
    q = np.exp(1j * kf * dx)
    for p in range(1, _KINK_ORDER + 1):
        zeta = [-(dx ** (p + s + 1)) * bern[p + s + 1] / (p + s + 1) for s in range(_TAYLOR_TERMS)]
        d = np.empty((k.size, r.size), dtype=complex)
        diff = np.empty_like(d)
        ser = sum(special.comb(p, j) * delta ** (p - j) * dx**j * _neg_polylog(j, q) for j in range(p + 1))
        d[far] = dx * np.exp(1j * kf * (r + delta)) * ser - np.exp(1j * kf * r) * math.factorial(p) / (-1j * kf) ** (p + 1)
        diff[far] = d[far] - zeta[0]
        higher = sum((1j * kn) ** s / math.factorial(s) * zeta[s] for s in range(1, _TAYLOR_TERMS))
        phase = np.exp(1j * kn * r)
        d[near] = phase * (zeta[0] + higher)
        diff[near] = np.expm1(1j * kn * r) * zeta[0] + phase * higher
        d_all.append(d)
        diff_all.append(diff)
    return d_all, diff_all


def _sign_changes(x: np.ndarray, H: np.ndarray):
    """Simple roots of H on x > 0 with the first three derivatives there (local quintic fits)."""
    pos = x >= 0
    xh, Hh = x[pos], H[pos]
    dx = xh[1] - xh[0]
    i = np.nonzero(Hh[:-1] * Hh[1:] < 0)[0]
    i = i[(i >= 2) & (i + 3 < Hh.size)]
    stencil = np.stack([Hh[i + o] for o in range(-2, 4)], axis=1)
    coef = [np.linalg.solve(np.vander(np.arange(-2.0, 4.0), 6), stencil.T).T[:, ::-1]]
    for _ in range(3):
        prev = coef[-1]
        coef.append(prev[:, 1:] * np.arange(1, prev.shape[1]))

    def ev(c, t):
        return sum(c[:, j] * t**j for j in range(c.shape[1]))

    t = Hh[i] / (Hh[i] - Hh[i + 1])
    for _ in range(8):
        t = t - ev(coef[0], t) / ev(coef[1], t)
    derivs = [ev(coef[m], t) / dx**m for m in (1, 2, 3)]
    return xh[i] + t * dx, (1.0 - t) * dx, derivs, dx


def _kink_corrections(x: np.ndarray, H: np.ndarray, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Past each simple root r of H the integrand |H| k(u, x) gains the ramp
    # 2|H|, whose trapezoid error is only first order in the spacing. Both
    # |H| and the algebraic part of the kernel (1/x^2 or 1/x) are expanded to
    # third order about r, and each ramp's lattice error is summed exactly in
    # e^{iux}. What remains is of high order in the spacing.
    phi_fix = np.zeros(u.size)
    pp_fix = np.zeros(u.size)
    r, delta, (h1, h2, h3), dx = _sign_changes(x, H)
    if r.size == 0:
        return phi_fix, pp_fix
    s = np.sign(h1)
    c = (s * h1, s * h2 / 2.0, s * h3 / 6.0)
    inv_x2 = (r**-2, -2.0 * r**-3, 3.0 * r**-4)
    inv_x = (r**-1, -(r**-2), r**-3)
    c_phi = [sum(c[i] * inv_x2[p - i] for i in range(p + 1)) for p in range(_KINK_ORDER)]
    c_pp = [sum(c[i] * inv_x[p - i] for i in range(p + 1)) for p in range(_KINK_ORDER)]
    step = max(1, (1 << 20) // r.size)
    for lo in range(0, u.size, step):
        defects, rises = _ramp_defects(u[lo : lo + step], r, delta, dx)
        d_phi = sum(-cp * d.real for cp, d in zip(c_phi, rises))
        d_pp = sum(cp * d.imag for cp, d in zip(c_pp, defects))
        # factor 2 for the ramp height and 2 for the mirrored root at -r
        phi_fix[lo : lo + step] = -4.0 * d_phi.sum(axis=1)
        pp_fix[lo : lo + step] = -4.0 * d_pp.sum(axis=1)
    return phi_fix, pp_fix


def _one_minus_cos_over_x2(u, x):
    # (1 - cos ux)/x^2 = (u^2/2) sinc^2(ux / 2pi), smooth through x = 0
    return 0.5 * u**2 * np.sinc(u * x / (2.0 * math.pi)) ** 2


def _sin_over_x(u, x):
    return u * np.sinc(u * x / math.pi)


def characteristic_exponents(
    dens: LevyDensities, u: np.ndarray, a_n: float | None = None, u_n: float | None = None,
    rtol: float | None = None,
) -> Exponents:
    """Tabulate the exponent integrals on ``u``.

    When ``a_n``, ``u_n`` and ``rtol`` are given, the quadrature of ``eta`` is
    checked against ``a_n u^2/2`` on ``|u| <= u_n`` and against the bound
    ``|eta| <= a_n u^2/2`` beyond; failure raises :class:`GridError`.
    """
    u = np.asarray(u, dtype=float)
    absH = np.abs(dens.H)
    phi = _even_quadrature(dens.x, absH, u, _one_minus_cos_over_x2)
    eta_q = _even_quadrature(dens.x, dens.H, u, _one_minus_cos_over_x2)
    phi_p = _even_quadrature(dens.x, absH, u, _sin_over_x)
    phi_fix, pp_fix = _kink_corrections(dens.x, dens.H, u)
    phi = phi + phi_fix
    phi_p = phi_p + pp_fix
    if rtol is not None and a_n is not None and u_n is not None:
        err = plateau_relative_error(u, eta_q, a_n, u_n)
        if err > rtol:
            raise GridError(f"plateau identity off by {err:.3g} (tolerance {rtol:.1g})")
        outer = np.abs(u) > u_n
        if np.any(np.abs(eta_q[outer]) > 0.5 * a_n * u[outer] ** 2 * (1 + rtol)):
            raise GridError("exponent exceeds a_n u^2/2 beyond the plateau")
    return Exponents(_readonly(u), _readonly(phi), _readonly(eta_q), _readonly(phi_p))


def plateau_relative_error(u, eta_values, a_n: float, u_n: float) -> float:
    """Max relative deviation of ``eta_values`` from ``a_n u^2/2`` over ``0 < |u| <= u_n``.

    Points whose target is zero or subnormal carry no relative precision and are skipped.
    """
    u = np.asarray(u, dtype=float)
    target = 0.5 * a_n * u**2
    inner = (np.abs(u) <= u_n) & (target >= np.finfo(float).tiny)
    if not np.any(inner):
        return 0.0
    dev = np.abs(np.asarray(eta_values)[inner] - target[inner]) / target[inner]
    return float(np.max(dev))


def _gap_terms(w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """For ``w >= 0`` return ``2 int_0^w (w-t)(1-e^{-t^3}) dt`` and ``w - int_0^w e^{-t^3} dt``."""
    w = np.asarray(w, dtype=float)
    w3 = w**3
    i0 = special.gamma(1.0 / 3.0) / 3.0 * special.gammainc(1.0 / 3.0, w3)
    i1 = special.gamma(2.0 / 3.0) / 3.0 * special.gammainc(2.0 / 3.0, w3)
    gap = w**2 - 2.0 * w * i0 + 2.0 * i1
    slope = w - i0
    small = w < 0.1
    ws = w[small]
    gap[small] = ws**5 / 10.0 - ws**8 / 56.0 + ws**11 / 396.0
    slope[small] = ws**4 / 4.0 - ws**7 / 14.0 + ws**10 / 60.0
    return gap, slope


def eta_exponent_exact(u, a_n: float, u_n: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Exponent integral ``eta`` from ``eta'' = h_n``, ``eta(0) = eta'(0) = 0``.

    Returns ``(eta, gap, gap_prime)`` where ``gap = a_n u^2 - 2 eta`` vanishes
    identically on ``|u| <= u_n`` and ``gap_prime`` is its derivative in u.
    """
    u = np.asarray(u, dtype=float)
    w = np.maximum(np.abs(u) - u_n, 0.0)
    g, s = _gap_terms(w)
    gap = a_n * g
    gap_prime = 2.0 * a_n * s * np.sign(u)
    return 0.5 * a_n * u**2 - 0.5 * gap, gap, gap_prime


def marginal_cfs(u, n: int, a_n: float, phi_exp, eta_exp) -> tuple[np.ndarray, np.ndarray]:
    """Characteristic functions of the two increments over ``1/n``."""
    u = np.asarray(u, dtype=float)
    phi = np.exp(-(u**2 + a_n * u**2 + 2.0 * phi_exp) / (2.0 * n))
    psi = np.exp(-(u**2 + 2.0 * phi_exp + 2.0 * eta_exp) / (2.0 * n))
    return phi, psi


def eta(u, n: int, a_n: float, u_n: float, phi_exp) -> np.ndarray:
    """CF difference ``phi_n - psi_n``, exactly zero on ``|u| <= u_n``."""
    eta_e, gap, _ = eta_exponent_exact(u, a_n, u_n)
    _, psi = marginal_cfs(u, n, a_n, phi_exp, eta_e)
    return psi * np.expm1(-gap / (2.0 * n))


def eta_prime(u, n: int, a_n: float, u_n: float, phi_exp, phi_prime) -> np.ndarray:
    """Derivative of the CF difference, written so the plateau cancels exactly."""
    u = np.asarray(u, dtype=float)
    eta_e, gap, gap_p = eta_exponent_exact(u, a_n, u_n)
    phi, psi = marginal_cfs(u, n, a_n, phi_exp, eta_e)
    diff = psi * np.expm1(-gap / (2.0 * n))
    return -((u + a_n * u + phi_prime) * diff + 0.5 * gap_p * psi) / n


def density_difference(u: np.ndarray, eta_values: np.ndarray, x: np.ndarray) -> np.ndarray:
    """``k_n = F^{-1} eta_n`` on ``x`` for an even ``eta_n`` tabulated on a symmetric u-grid."""
    return _even_quadrature(u, eta_values, np.asarray(x, dtype=float), lambda xx, uu: np.cos(xx * uu)) / (
        2.0 * math.pi
    )


@dataclass(frozen=True)
class Diagnostics:
    norm_eta: float
    norm_eta_prime: float
    tv_bound: float
    eta_l2: float
    eta_prime_l2: float
    max_eta: float
    plateau_max_eta: float
    boundary_ratio: float


@dataclass(frozen=True)
class MinimaxPair:
    r: float
    n: int
    a_n: float
    u_n: float
    H: HTabulation
    densities: LevyDensities
    u_grid: GridSpec
    exponents: Exponents
    k_grid: GridSpec
    vol_x: float = field(init=False)
    vol_y: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "vol_x", 1.0 + self.a_n)

    @property
    def h_grid(self) -> np.ndarray:
        return h_fn(self.exponents.u, self.a_n, self.u_n)

    def eta_values(self) -> np.ndarray:
        e = self.exponents
        return eta(e.u, self.n, self.a_n, self.u_n, e.phi)

    def eta_prime_values(self) -> np.ndarray:
        e = self.exponents
        return eta_prime(e.u, self.n, self.a_n, self.u_n, e.phi, e.phi_prime)


def build_pair(
    r: float,
    n: int,
    x_grid: GridSpec | None = None,
    u_spacing: float = 0.25,
    k_grid: GridSpec | None = None,
    nodes: int = 256,
    plateau_rtol: float | None = 1e-5,
) -> MinimaxPair:
    a_n, u_n = perturbation_constants(r, n)
    tab = inverse_fourier_h(a_n, u_n, x_grid, nodes=nodes)
    dens = levy_densities(tab)
    ug = default_u_grid(n, min(u_spacing, u_n / 64.0))
    ex = characteristic_exponents(dens, ug.points(), a_n, u_n, plateau_rtol)
    if k_grid is None:
        k_grid = GridSpec(math.pi / (4.0 * ug.extent), max(4.0, 64.0 / u_n))
    return MinimaxPair(r, n, a_n, u_n, tab, dens, ug, ex, k_grid)


def indistinguishability_norms(pair: MinimaxPair, boundary_tol: float = 1e-3) -> Diagnostics:
    """Squared L2 norms of the CF difference and its derivative, and ``n int |k_n|``."""
    e = pair.exponents
    u = e.u
    du = pair.u_grid.spacing
    et = pair.eta_values()
    etp = pair.eta_prime_values()
    peak = float(np.max(np.abs(et)))
    boundary = max(abs(et[0]), abs(et[-1]))
    ratio = boundary / peak if peak > 0 else 0.0
    if ratio > boundary_tol:
        raise GridError(f"u-grid too short: boundary/peak = {ratio:.3g}")
    w = _trapezoid_weights(u.size, du)
    l2 = float(np.sum(w * et**2))
    l2p = float(np.sum(w * etp**2))
    xk = pair.k_grid.points()
    k = density_difference(u, et, xk)
    tv = pair.n * float(np.trapezoid(np.abs(k), xk))
    plateau = np.abs(u) <= pair.u_n
    return Diagnostics(
        norm_eta=pair.n**2 * l2,
        norm_eta_prime=pair.n**2 * l2p,
        tv_bound=tv,
        eta_l2=l2,
        eta_prime_l2=l2p,
        max_eta=peak,
        plateau_max_eta=float(np.max(np.abs(et[plateau]))),
        boundary_ratio=ratio,
    )
