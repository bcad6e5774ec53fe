import math

import pytest

import saddlefit as sf


def test_models_and_derive():
    assert set(sf.model_ids()) >= {"cir", "gbm", "biv", "heston"}
    lines = sf.derive("cir", 4)
    assert lines[1] == "d/dt k2 = sigma^2*k1 - 2*b*k2"
    assert len(sf.derive("heston", 3)) == 9


def test_build_polynomials():
    assert sf.drift("cir", [1.5, 58.0, math.sqrt(15.0)]) == ["87 - 1.5*x1"]
    d = sf.diffusion("heston", [0.1, 2.0, 0.04, -0.5, 0.3])
    assert d[0][0] == "x1^2*x2"


def test_gaussian_transition_is_exact():
    v = sf.transition_logdensity("bm", [1.0], [0.0], [0.0], 1.0)
    assert v == pytest.approx(-0.5 * math.log(2 * math.pi), abs=1e-12)


def test_cir_saddle_close_to_exact():
    theta = [1.5, 58.0, math.sqrt(15.0)]
    approx = sf.transition_logdensity("cir", theta, [50.0], [50.94], 1 / 12)
    exact = sf.exact_logdensity("cir", theta, 50.0, 50.94, 1 / 12)
    assert abs(approx - exact) < 0.01
    k = sf.cumulants("cir", theta, [50.0], 1 / 12)
    assert k[0] == pytest.approx(50.94002478, rel=1e-8)


def test_simulate_and_fit_roundtrip():
    theta = [0.12, 0.05, 0.02]
    t, x = sf.simulate("cir", theta, [0.049], 1 / 52, 30, seed=5)
    assert len(t) == 30 and len(x) == 30
    assert math.isfinite(sf.loglik("cir", t, x, theta))
    out = sf.fit("cir", t, x, theta, length=300, burn_in=100, seed=2)
    assert len(out["samples"]) == 300
    assert 0.0 <= out["acceptance_rate"] <= 1.0
    for lo, med, hi in zip(out["ci_lo"], out["median"], out["ci_hi"]):
        assert lo <= med <= hi


def test_integrated_error_callables():
    phi = lambda x: math.exp(-0.5 * x * x) / math.sqrt(2 * math.pi)
    shifted = lambda x: phi(x - 0.1)
    assert sf.integrated_error(phi, shifted, -math.inf, math.inf) == pytest.approx(0.0797552234, abs=1e-8)


def test_unknown_model_raises():
    with pytest.raises(ValueError):
        sf.derive("nope", 3)
