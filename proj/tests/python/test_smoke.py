"""End-to-end smoke checks of the compiled python module."""

import math

import numpy as np
import pytest

import cgflab


def test_partition_algebra():
    assert cgflab.bell_number(4) == 15
    parts = cgflab.enumerate_partitions(4)
    assert len(parts) == 15
    assert cgflab.mobius_weight([[0], [1], [2]]) == 2
    # Moebius weights over all partitions cancel.
    assert sum(cgflab.mobius_weight(p) for p in parts) == 0


def test_sample_cumulants_match_sum_expansion():
    rng = np.random.default_rng(7)
    data = rng.gamma(2.0, 1.0, size=(400, 3)) + 0.3 * rng.normal(
        size=(400, 3)
    )
    sums = data.sum(axis=1)
    direct = cgflab.sample_cumulants_of_series(sums, 4)
    for order in range(1, 5):
        expanded = cgflab.cumulant_of_sum(data, [0, 1, 2], order)
        assert expanded == pytest.approx(direct[order - 1], rel=1e-10)
    # Column variance agrees with the plug-in second joint cumulant.
    assert cgflab.sample_joint_cumulant(data, [0, 0]) == pytest.approx(
        np.var(data[:, 0]), rel=1e-12
    )


def test_model_evaluation_and_sum_cumulants():
    gamma = np.array([[1.0, 0.5], [0.5, 2.0]])
    model = cgflab.EllipticalCgf(np.zeros(2), gamma, np.array([1.0, 0.1]))
    s = np.array([0.3, -0.2])
    q = 0.5 * s @ gamma @ s
    assert model.value(s) == pytest.approx(q + 0.1 * q * q / 2.0, rel=1e-12)
    assert model.gradient(np.zeros(2)) == pytest.approx(np.zeros(2))
    # kappa_4(S) = 3 c_2 T^2 with T the total sum of Gamma.
    T = gamma.sum()
    assert cgflab.sum_cumulants(model, [0, 1], 4) == pytest.approx(
        3.0 * 0.1 * T * T, rel=1e-12
    )
    text = model.to_json()
    back = cgflab.model_from_json(text)
    assert np.array_equal(back.Gamma, gamma)


def test_estimation_round_trip():
    gamma = np.array([[1.0, 0.4], [0.4, 1.0]])
    model = cgflab.EllipticalCgf(np.zeros(2), gamma, np.array([1.0, 0.1]))
    targets = [
        cgflab.sum_cumulants(model, [0, 1], 2),
        cgflab.sum_cumulants(model, [0, 1], 4),
    ]
    coeffs = cgflab.fit_coefficients(gamma, targets, [2, 4])
    assert coeffs == pytest.approx([1.0, 0.1], rel=1e-12)

    mix = cgflab.fit_gamma_mixture([1.0, 0.1], 1)
    assert mix.cumulant(1) == pytest.approx(1.0, rel=1e-6)
    assert mix.cumulant(2) == pytest.approx(0.1, rel=1e-4)


def test_kendall_and_covariance():
    assert cgflab.kendall_tau(
        np.array([1.0, 2.0, 3.0]), np.array([1.0, 3.0, 2.0])
    ) == pytest.approx(1.0 / 3.0)
    rng = np.random.default_rng(11)
    z = rng.normal(size=(4000, 2))
    data = np.column_stack([z[:, 0], 0.6 * z[:, 0] + 0.8 * z[:, 1]])
    est = cgflab.estimate_covariance(data)
    assert est["psd_projected"] is False
    assert est["correlation"][0, 1] == pytest.approx(0.6, abs=0.05)
    with pytest.raises(ValueError):
        cgflab.kendall_tau(np.ones(50), np.arange(50.0))


def test_approximations_gaussian_exactness():
    gamma = np.array([[1.0, 0.5], [0.5, 1.0]])
    model = cgflab.EllipticalCgf(
        np.array([1.0, 2.0]), gamma, np.array([1.0])
    )
    expected = 1.0 / (2.0 * math.pi * math.sqrt(np.linalg.det(gamma)))
    assert cgflab.saddlepoint_density(
        model, np.array([1.0, 2.0])
    ) == pytest.approx(expected, rel=1e-9)
    assert cgflab.sum_tail_cdf(model, [0, 1], 3.0) == pytest.approx(
        0.5, abs=1e-9
    )
    assert cgflab.cornish_fisher_quantile(
        3.0, 3.0, 0.0, 0.0, 0.5
    ) == pytest.approx(3.0)
    assert cgflab.gaussian_entropy(np.eye(1)) == pytest.approx(
        0.5 * math.log(2.0 * math.pi * math.e), rel=1e-12
    )


def test_simulation_determinism():
    gamma = np.array([[1.0, 0.3], [0.3, 1.0]])
    model = cgflab.EllipticalCgf(np.zeros(2), gamma, np.array([1.0]))
    mix = cgflab.GammaMixture.point_mass(1.0)
    a = cgflab.sample_model(model, mix, 100, 42)
    b = cgflab.sample_model(model, mix, 100, 42)
    assert np.array_equal(a, b)
    assert a.shape == (100, 2)

    bands = cgflab.monte_carlo_bands(
        model, mix, n=200, replicates=20, seed=5, levels=[0.1, 0.5, 0.9]
    )
    assert len(bands["levels"]) == 3
    assert bands["lower"][1] < 0.0 < bands["upper"][1]


def test_spatial_scale_matrix():
    params = dict(sigma0_sq=0.1, sigma1_sq=1.0, theta1=2.0, theta2=1.5)
    assert cgflab.powered_exp_cov(0.0, **params) == pytest.approx(1.1)
    locations = [(0.0, 0.0), (1.0, 0.0), (0.0, 2.0)]
    g = np.asarray(cgflab.build_gamma(locations, **params))
    assert g.shape == (3, 3)
    assert np.allclose(g, g.T)
    assert g[0, 1] == pytest.approx(
        cgflab.powered_exp_cov(1.0, **params), rel=1e-12
    )
