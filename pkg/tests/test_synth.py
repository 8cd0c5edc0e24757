import math

import numpy as np
import pytest

from conftest import make_dataset
from curveconf.dataset import ModelSpec, build_design, to_csv
from curveconf.errors import DomainError, TooLarge
from curveconf.interpret import turning_point
from curveconf.ols import fit
from curveconf.synth import (
    CURVATURE,
    DEFAULT_INTERCEPT,
    LINEAR,
    OPTIMUM_PERFORMANCE,
    REFERENCE,
    DgpParams,
    ExactDistribution,
    coverage_sim,
    exact_bootstrap,
    generate,
    normal_equations_oracle,
    slope_statistic,
    with_seed,
)


def test_noiseless_recovery():
    params = DgpParams(noise_sd=0.0)
    f = fit(*build_design(generate(params), params.model_spec()))
    truth = [params.intercept, params.b_true, params.a_true, -3330.0, -831.0, 15465.0]
    assert np.allclose(f.coefficients, truth, rtol=1e-8, atol=0)


def test_default_calibration():
    params = DgpParams()
    assert params.n == 110
    assert params.optimum == pytest.approx(6.326, abs=5e-4)
    spec = params.model_spec()
    top = (
        DEFAULT_INTERCEPT
        + LINEAR * params.optimum
        + CURVATURE * params.optimum**2
        + sum(params.control_effects[k] * REFERENCE[k] for k in REFERENCE)
    )
    assert top == pytest.approx(OPTIMUM_PERFORMANCE, abs=1e-6)
    ds = generate(params)
    below = int(np.sum(ds.column("turnover") < params.optimum))
    assert 4 <= below <= 14
    f = fit(*build_design(ds, spec))
    assert 0.05 <= f.adj_r2 <= 0.25


def test_adj_r2_calibration_sweep():
    r2 = np.array(
        [fit(*build_design(generate(with_seed(DgpParams(), s)), ModelSpec())).adj_r2 for s in range(100)]
    )
    in_band = np.mean((r2 >= 0.05) & (r2 <= 0.25))
    assert 0.05 <= r2.mean() <= 0.25
    assert abs(r2.mean() - 0.13) < 0.03
    # sampling sd of adj R^2 at n = 110 is about 0.06, so a few seeds fall outside
    assert in_band >= 0.8


def test_generate_is_pure():
    a = to_csv(generate(DgpParams(seed=9)))
    b = to_csv(generate(DgpParams(seed=9)))
    assert a == b
    assert a != to_csv(generate(DgpParams(seed=10)))


def test_params_validation():
    for kwargs in (
        {"n": 0},
        {"noise_sd": -1.0},
        {"turnover_distribution": (5.0, 3.0, 10.0)},
        {"turnover_distribution": (-1.0, 3.0, 10.0)},
        {"control_effects": {"salary": 1.0}},
    ):
        with pytest.raises(DomainError):
            DgpParams(**kwargs)


def test_oracle_on_exact_linear_data():
    x = np.arange(6.0)
    X = np.column_stack([np.ones(6), x])
    assert normal_equations_oracle(X, 3 + 2 * x) == pytest.approx([3, 2], abs=1e-12)


def test_oracle_random_designs():
    rng = np.random.default_rng(0)
    for _ in range(5):
        X = np.column_stack([np.ones(110), rng.normal(size=(110, 5))])
        y = rng.normal(size=110)
        got = normal_equations_oracle(X, y)
        want = np.linalg.lstsq(X, y, rcond=None)[0]
        assert np.allclose(got, want, rtol=1e-8, atol=1e-12)


def mean_performance(ds):
    return float(np.mean(ds.column("performance")))


def test_exact_bootstrap_mean_n2():
    ds = make_dataset([1.0, 2.0], [0.0, 2.0])
    dist = exact_bootstrap(ds, mean_performance)
    assert dist.as_dict() == {0.0: 0.25, 1.0: 0.5, 2.0: 0.25}
    assert dist.mean() == 1.0
    assert dist.cdf(1.0) == 0.75 and dist.cdf_below(1.0) == 0.25


def test_exact_bootstrap_point_mass():
    dist = exact_bootstrap(make_dataset([1.0], [7.0]), mean_performance)
    assert dist.as_dict() == {7.0: 1.0}
    assert dist.excluded == 0.0


def test_exact_bootstrap_too_large():
    with pytest.raises(TooLarge):
        exact_bootstrap(make_dataset(range(6), range(6)), mean_performance)


def test_exact_slope_excludes_singular_resamples():
    ds = make_dataset([1.0, 2.0, 4.0, 7.0], [3.0, 1.0, 4.0, 1.5])
    spec = ModelSpec(quadratic=False, controls=())
    dist = exact_bootstrap(ds, slope_statistic(spec))
    # resamples drawing one distinct turnover value are singular: 4 of 256
    assert dist.excluded == pytest.approx(4 / 256)
    assert math.fsum(dist.probs) == pytest.approx(1.0, abs=1e-12)
    assert np.all(np.diff(dist.values) > 0)


def test_exact_distribution_rejects_bad_probs():
    with pytest.raises(ValueError):
        ExactDistribution(np.array([0.0, 1.0]), np.array([0.5, 0.6]))


def test_coverage_noiseless_is_total():
    assert coverage_sim(DgpParams(noise_sd=0.0), trials=200) == 1.0


def test_coverage_near_total_level():
    assert coverage_sim(DgpParams(seed=3), trials=1000, level=0.999) >= 0.99


def test_coverage_validation():
    with pytest.raises(DomainError):
        coverage_sim(DgpParams(), trials=0)


def test_optimum_property():
    assert DgpParams(a_true=-1.0, b_true=20.0).optimum == 10.0
    assert DgpParams(a_true=0.0).optimum is None
    assert turning_point(CURVATURE, LINEAR) == DgpParams().optimum
