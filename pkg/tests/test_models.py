import math

import numpy as np
import pytest
from scipy import special

from volrates.estimators import spectral_bias
from volrates.models import (
    Deterministic,
    JumpComponent,
    JumpLaw,
    ModelSpec,
    SamplePath,
    StochasticVolatility,
    levy_class_integral,
    sample_stable_increment,
    simulate_path,
    stable_increments,
    verify_class_membership,
)


def unit_cp(intensity=1.0):
    return JumpComponent.compound_poisson(intensity, JumpLaw("atoms", (1.0,), (1.0,)))


def test_constant_volatility_true_c1_is_exact():
    model = ModelSpec.constant(1.0)
    for seed in (0, 7, 123456789):
        assert simulate_path(model, 37, seed).true_c1 == 1.0


def test_zero_volatility_counting_path():
    model = ModelSpec.constant(0.0, jumps=[unit_cp()])
    for seed in range(20):
        p = simulate_path(model, 1, seed)
        assert p.true_c1 == 0.0
        d = p.values[1] - p.values[0]
        assert d == round(d)


def test_brownian_marginal_moments():
    model = ModelSpec.constant(1.0)
    x1 = np.array([simulate_path(model, 4096, s).values[-1] for s in range(2000)])
    assert abs(x1.mean()) <= 3 / math.sqrt(2000)
    assert abs(x1.var(ddof=1) - 1.0) <= 0.05


def test_simulation_is_deterministic():
    model = ModelSpec.constant(1.0, jumps=[JumpComponent.stable(1.5), unit_cp(3.0)])
    a = simulate_path(model, 500, 42)
    b = simulate_path(model, 500, 42)
    assert np.array_equal(a.values, b.values) and a.true_c1 == b.true_c1
    assert not np.array_equal(a.values, simulate_path(model, 500, 43).values)


def test_values_length_and_readonly():
    p = simulate_path(ModelSpec.constant(2.0), 10, 1)
    assert p.values.size == 11 and p.values[0] == 0.0
    with pytest.raises(ValueError):
        p.values[0] = 1.0
    with pytest.raises(ValueError):
        SamplePath(3, [0.0, 1.0], 0.0)


@pytest.mark.parametrize("n", [0, -3, 2.5])
def test_invalid_n(n):
    with pytest.raises(ValueError):
        simulate_path(ModelSpec.constant(1.0), n, 0)


def test_invalid_components():
    with pytest.raises(ValueError):
        JumpComponent.stable(2.0)
    with pytest.raises(ValueError):
        JumpComponent.stable(0.0)
    with pytest.raises(ValueError):
        JumpComponent.stable(1.2, scale=-1.0)
    with pytest.raises(ValueError):
        JumpComponent.compound_poisson(-1.0)
    with pytest.raises(ValueError):
        ModelSpec.constant(-0.1)


def test_piecewise_linear_volatility_integral_is_seed_free():
    vol = Deterministic((1.0, 3.0, 2.0), (0.0, 0.5, 1.0))
    model = ModelSpec(Deterministic.constant(0.0), vol)
    # trapezoid on two linear pieces: 0.5*(1+3)/2 + 0.5*(3+2)/2
    for seed in (1, 2, 3):
        assert simulate_path(model, 100, seed).true_c1 == pytest.approx(2.25, rel=1e-14)


def test_stochastic_volatility_stays_in_band():
    sv = StochasticVolatility(level=1.0, kappa=5.0, vol_of_vol=2.0, floor=0.2, cap=1.5)
    p = simulate_path(ModelSpec(volatility=sv), 64, 5)
    assert 0.2 <= p.true_c1 <= 1.5


def test_stable_scale_zero_gives_zero():
    rng = np.random.default_rng(0)
    for beta in (0.3, 1.0, 1.7):
        assert sample_stable_increment(beta, 0.0, 0.5, rng) == 0.0


def test_cauchy_median_abs():
    rng = np.random.default_rng(11)
    draws = stable_increments(1.0, 1.0, 1.0, rng, size=100_000)
    assert np.median(np.abs(draws)) == pytest.approx(math.tan(math.pi / 4), rel=0.03)


def test_stable_characteristic_function():
    rng = np.random.default_rng(12)
    draws = stable_increments(1.5, 1.0, 1.0, rng, size=100_000)
    for u in (0.5, 1.0, 2.0):
        emp = np.mean(np.cos(u * draws))
        assert abs(emp - math.exp(-(u**1.5))) < 0.02


def test_stable_time_scaling():
    # an increment over dt is dt^(1/beta) times a unit-time increment
    rng = np.random.default_rng(13)
    draws = stable_increments(0.8, 2.0, 0.01, rng, size=100_000)
    u = 5.0
    expected = math.exp(-0.01 * (2.0 * u) ** 0.8)
    assert abs(np.mean(np.cos(u * draws)) - expected) < 0.02


def test_truncated_stable_characteristic_function():
    comp = JumpComponent.truncated_stable(1.5, scale=1.0, truncation=1.0)
    model = ModelSpec.constant(0.0, jumps=[comp])
    ends = np.array([simulate_path(model, 1, s).values[-1] for s in range(20_000)])
    for u in (0.5, 2.0, 5.0):
        gamma = spectral_bias([comp], u) * u**2
        assert abs(np.mean(np.cos(u * ends)) - math.exp(-gamma / 2)) < 0.02


def test_truncated_stable_records_small_jump_part():
    comp = JumpComponent.truncated_stable(1.2, scale=1.0, truncation=0.5)
    p = simulate_path(ModelSpec.constant(0.0, jumps=[comp]), 256, 3)
    (eps,) = p.diagnostics["small_jump_cutoff"]
    (var,) = p.diagnostics["small_jump_variance"]
    assert 0 < eps <= 0.25
    assert var == pytest.approx(2 * comp.levy_constant * eps**0.8 / 0.8, rel=1e-12)


def test_compound_poisson_large_jumps_not_compensated():
    # jumps of size 2 exceed the truncation at 1, so no compensator is added
    law = JumpLaw("atoms", (2.0,), (1.0,))
    model = ModelSpec.constant(0.0, jumps=[JumpComponent.compound_poisson(0.5, law)])
    ends = [simulate_path(model, 8, s).values[-1] for s in range(2000)]
    assert np.all(np.mod(ends, 2.0) == 0.0)
    assert np.mean(ends) == pytest.approx(1.0, abs=0.1)


def test_class_counting_measure():
    model = ModelSpec.constant(0.0, jumps=[unit_cp()])
    rep = verify_class_membership(model, 0.0, 1.0)
    assert rep.levy_integral == 1.0 and rep.passed


def test_class_stable_below_index_diverges():
    model = ModelSpec.constant(0.0, jumps=[JumpComponent.stable(1.5)])
    for A in (1.0, 1e6, 1e300):
        rep = verify_class_membership(model, 1.4, A)
        assert not rep.passed and math.isinf(rep.levy_integral)


def test_class_stable_calibrated_to_one_half():
    beta, r = 1.5, 1.6
    # 2C (1/(r - beta) + 1/beta) = 0.5, then invert the density constant for the scale
    C = 0.5 / (2.0 * (1.0 / (r - beta) + 1.0 / beta))
    scale = (C * math.pi / (special.gamma(1 + beta) * math.sin(math.pi * beta / 2))) ** (1 / beta)
    model = ModelSpec.constant(0.0, jumps=[JumpComponent.stable(beta, scale)])
    rep = verify_class_membership(model, r, 0.5 + 1e-6)
    assert rep.passed and rep.converged
    assert rep.levy_integral == pytest.approx(0.5, abs=1e-6)


def test_truncated_stable_class_integral_closed_form():
    comp = JumpComponent.truncated_stable(1.2, scale=0.7, truncation=3.0)
    val, ok, _ = levy_class_integral(comp, 1.5)
    C = comp.levy_constant
    closed = 2 * C * (1 / (1.5 - 1.2) + (1 - 3.0**-1.2) / 1.2)
    assert ok and val == pytest.approx(closed, rel=1e-10)


def test_class_check_includes_drift_and_volatility():
    vol = Deterministic((0.5, 2.0), (0.0, 1.0))
    drift = Deterministic((-1.0, 0.0), (0.0, 1.0))
    model = ModelSpec(drift, vol)
    rep = verify_class_membership(model, 0.0, 10.0)
    assert rep.drift_sup == 1.0 and rep.volatility_sup == 2.0
    assert rep.total == pytest.approx(2.0)
    assert not verify_class_membership(model, 0.0, 1.9).passed


def test_grid_self_similarity():
    # two-sample CF comparison between an n-grid and a 2n-grid with paired sums
    model = ModelSpec.constant(0.5, jumps=[JumpComponent.stable(1.3, 0.6), unit_cp(2.0)])
    n, M = 16, 3000
    coarse = np.array([simulate_path(model, n, s).increments for s in range(M)]).ravel()
    fine = np.array([simulate_path(model, 2 * n, 10**6 + s).increments for s in range(M)])
    paired = (fine[:, 0::2] + fine[:, 1::2]).ravel()
    for u in (1.0, 3.0, 8.0):
        a = np.mean(np.exp(1j * u * coarse))
        b = np.mean(np.exp(1j * u * paired))
        assert abs(a - b) < 5 * math.sqrt(2.0 / coarse.size)
