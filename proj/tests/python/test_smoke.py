"""Smoke tests for the python bindings."""

import json
import math

import numpy as np
import pytest

import circlechaos as cc

LN2 = math.log(2.0)


def test_kernel_values():
    assert cc.log_kernel_circle(0.5) == pytest.approx(2 * LN2, abs=1e-13)
    assert cc.log_kernel_circle(0.25) == pytest.approx(3 * LN2, abs=1e-13)
    assert cc.fourier_cov(4, 0.0) == pytest.approx(4 * LN2 + 2 * (1 + 1 / 2 + 1 / 3 + 1 / 4), abs=1e-13)
    assert cc.exact_cone_cov_interval(3.0, 0.2, 0.2) == pytest.approx(8.0, abs=1e-13)
    assert 0.17 < cc.localization_delta0() < 0.19
    with pytest.raises(Exception):
        cc.log_kernel_circle(0.0)


def test_sampling_and_measures():
    grid = cc.GridDomain.circle(64)
    spec = cc.CovarianceSpec(cc.Scheme.FourierPartial, 16)

    f1 = cc.sample_field(spec, grid, seed=7, replica=3)
    f2 = cc.sample_field(spec, grid, seed=7, replica=3)
    np.testing.assert_array_equal(f1.values, f2.values)
    assert f1.variance[0] == pytest.approx(cc.fourier_cov(16, 0.0), abs=1e-12)

    mu = cc.build_measure(f1, beta=0.5)
    assert mu.weights.min() >= 0.0
    assert mu.total_mass == pytest.approx(cc.integrate(mu, np.ones(64)), abs=1e-12)

    # mean-one sanity over a small replica budget
    masses = []
    for r in range(400):
        f = cc.sample_field(spec, grid, seed=11, replica=r)
        masses.append(cc.build_measure(f, beta=0.5).total_mass)
    se = math.sqrt(cc.analytic_mass_variance(spec, grid, 0.5) / len(masses))
    assert abs(np.mean(masses) - 1.0) < 4 * se


def test_cov_matrix_and_stats():
    grid = cc.GridDomain.circle(32)
    mat, jitter = cc.build_cov_matrix(cc.CovarianceSpec(cc.Scheme.WhiteNoiseCone, math.log(16)), grid)
    assert mat.shape == (32, 32)
    assert jitter <= 1e-8 * mat.diagonal().max()
    np.testing.assert_allclose(mat, mat.T)

    rng = np.random.default_rng(0)
    d, p = cc.ks_two_sample(rng.random(2000), rng.random(2000))
    assert 0.0 <= d <= 1.0
    assert p > 0.01

    target = 2 * math.gamma(0.5) / math.gamma(0.75) ** 2
    got = cc.second_moment_quadrature(0.5, cc.CovarianceSpec(cc.Scheme.LimitCircle, 1.0))
    assert got == pytest.approx(target, abs=1e-6)


def test_run_experiment(tmp_path):
    config = {
        "kind": "ZepsBounds",
        "m": 64,
        "replicas": 300,
        "eps_list": [0.125],
        "seed": 42,
        "out": str(tmp_path / "run"),
    }
    report = json.loads(cc.run_experiment(json.dumps(config)))
    assert report["seed"] == 42
    assert all(chk["pass"] for chk in report["checks"])
    assert (tmp_path / "run" / "report.json").exists()
    assert "CrossSchemeKS" in cc.list_experiments()
