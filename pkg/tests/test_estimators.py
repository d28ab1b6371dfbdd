import math

import numpy as np
import pytest

from volrates.estimators import (
    EstimatorConfig,
    FrequencyRule,
    empirical_cf,
    estimate,
    gaussian_abs_moment,
    multipower,
    realized_volatility,
    spectral_bias,
    spectral_bias_bound,
    spectral_estimator,
    spectral_frequency,
    truncated_rv,
)
from volrates.models import JumpComponent, JumpLaw, ModelSpec, SamplePath, simulate_path


def path_of(values):
    values = np.asarray(values, dtype=float)
    return SamplePath(values.size - 1, values, 0.0)


SMALL = path_of([0, 1, 0, 2])
FLAT = path_of([3.0] * 9)


@pytest.fixture(scope="module")
def brownian_paths():
    model = ModelSpec.constant(1.0)
    return [simulate_path(model, 4096, 5000 + s) for s in range(2000)]


def test_realized_small_and_flat():
    assert realized_volatility(SMALL).value == 6.0
    assert realized_volatility(FLAT).value == 0.0


def test_truncated_small():
    res = truncated_rv(SMALL, threshold=1.5)
    assert res.value == 2.0 and res.tuning_used == 1.5
    assert truncated_rv(SMALL, threshold=10.0).value == realized_volatility(SMALL).value


def test_truncated_uses_scaled_threshold():
    cfg = EstimatorConfig("truncated", varpi=0.25, trunc_scale=2.0)
    res = truncated_rv(SMALL, cfg)
    assert res.tuning_used == pytest.approx(2.0 * 3 ** -0.25)
    assert res.value == 2.0


@pytest.mark.parametrize("varpi", [0.0, 0.5, -0.1, 0.7])
def test_truncated_rejects_varpi(varpi):
    with pytest.raises(ValueError):
        EstimatorConfig("truncated", varpi=varpi)


def test_bipower_small():
    res = multipower(path_of([0, 1, 2, 4]), k=2)
    assert res.value == pytest.approx(1.5 * math.pi, rel=1e-14)
    assert multipower(FLAT, k=3).value == 0.0


def test_tripower_small():
    # |1|^(2/3) |1|^(2/3) |2|^(2/3) / m_{2/3}^3
    res = multipower(path_of([0, 1, 2, 4]), k=3)
    assert res.value == pytest.approx(2 ** (2 / 3) / gaussian_abs_moment(2 / 3) ** 3)


def test_multipower_errors():
    with pytest.raises(ValueError):
        multipower(SMALL, k=1)
    with pytest.raises(ValueError):
        multipower(SMALL, k=4)
    with pytest.raises(ValueError):
        EstimatorConfig("multipower", k=2.5)


def test_gaussian_moments():
    assert gaussian_abs_moment(2) == pytest.approx(1.0, rel=1e-15)
    assert gaussian_abs_moment(1) == pytest.approx(math.sqrt(2 / math.pi), rel=1e-15)
    assert gaussian_abs_moment(4) == pytest.approx(3.0, rel=1e-15)
    z = np.random.default_rng(1).standard_normal(1_000_000)
    assert abs(np.mean(np.abs(z)) - gaussian_abs_moment(1)) < 0.003
    for bad in (0.0, -1.0):
        with pytest.raises(ValueError):
            gaussian_abs_moment(bad)


def test_empirical_cf_basics():
    assert empirical_cf(SMALL, 0.0) == 1.0
    assert empirical_cf(FLAT, 17.3) == 1.0
    # increments 1, -1, 2 at u = pi
    assert empirical_cf(SMALL, math.pi) == pytest.approx((-1 - 1 + 1) / 3)


def test_spectral_flat_and_degenerate():
    assert spectral_estimator(FLAT, 2.0).value == 0.0
    u = 2.0
    # cos(0) + cos(pi) = 0 and the sines vanish, so phi_hat is zero
    p = path_of([0.0, 0.0, math.pi / u])
    res = spectral_estimator(p, u)
    assert res.degenerate and res.value == 0.0
    with pytest.raises(ValueError):
        spectral_estimator(SMALL, 0.0)


def test_frequency_rule_examples():
    assert spectral_frequency(100, 0.5, 3.0) == 10.0
    assert spectral_frequency(100, 1.5, 1.0) == pytest.approx(15.174271, rel=1e-7)
    assert spectral_frequency(100, 1.5, 4.0) == pytest.approx(15.174271 / 2, rel=1e-7)
    assert FrequencyRule(1.5, 4.0)(100) == spectral_frequency(100, 1.5, 4.0)


def test_config_validation():
    with pytest.raises(ValueError):
        EstimatorConfig("wavelet")
    with pytest.raises(ValueError):
        EstimatorConfig("spectral")
    with pytest.raises(ValueError):
        EstimatorConfig("spectral", freq_rule=-2.0)
    with pytest.raises(ValueError):
        FrequencyRule(2.0, 1.0)


def test_estimate_dispatch():
    assert estimate(SMALL, EstimatorConfig("realized")).value == 6.0
    assert estimate(SMALL, EstimatorConfig("truncated", 0.1, 1.5)).value == 2.0
    spec = estimate(SMALL, EstimatorConfig("spectral", freq_rule=1.0))
    assert spec.tuning_used == 1.0
    assert spec.value == pytest.approx(-6 * math.log(abs(empirical_cf(SMALL, 1.0))))


def test_bias_without_jumps_is_zero():
    assert spectral_bias([], 3.0) == 0.0


def test_bias_two_atom_closed_form():
    comp = JumpComponent.compound_poisson(1.0, JumpLaw("atoms", (-1.0, 1.0), (0.5, 0.5)))
    assert spectral_bias([comp], math.pi) == pytest.approx(4 / math.pi**2, abs=1e-12)


def test_bias_symmetric_stable_closed_form():
    # gamma = 2 * scale^beta * u^beta for the unit-time exponent scale^beta |u|^beta
    for beta, scale, u in [(1.5, 1.0, 10.0), (0.7, 2.0, 3.0), (1.9, 0.5, 100.0)]:
        comp = JumpComponent.stable(beta, scale)
        expected = 2 * scale**beta * u**beta / u**2
        assert spectral_bias([comp], u) == pytest.approx(expected, rel=1e-9)


def test_bias_truncation_lowers_gamma():
    full = JumpComponent.stable(1.2, 1.0)
    cut = JumpComponent.truncated_stable(1.2, 1.0, truncation=0.5)
    for u in (1.0, 10.0, 200.0):
        assert 0 < spectral_bias([cut], u) < spectral_bias([full], u)


def test_bias_bound_formula():
    assert spectral_bias_bound(100.0, 1.6, 2.0) == pytest.approx(4.0 / 100**0.4)


def test_bipower_consistency(brownian_paths):
    vals = [multipower(p, k=2).value for p in brownian_paths]
    assert abs(np.mean(vals) - 1.0) < 0.02


def test_cf_modulus_at_sqrt_n(brownian_paths):
    mods = [abs(empirical_cf(p, 64.0)) for p in brownian_paths]
    assert abs(np.mean(mods) - math.exp(-0.5)) < 0.01


def test_spectral_mean_at_sqrt_n(brownian_paths):
    vals = [spectral_estimator(p, 64.0).value for p in brownian_paths]
    assert abs(np.mean(vals) - 1.0) < 0.02
