import math

import numpy as np
import pytest

import mrgap


def test_generators_and_csv(tmp_path):
    pts = mrgap.gen_cassini(102, 7)
    assert pts.shape == (102, 3)
    path = tmp_path / "c.csv"
    mrgap.save_csv(pts, path)
    np.testing.assert_array_equal(mrgap.load_csv(path), pts)

    cloud, rotation, slot = mrgap.gen_ellipsoid(50, 30, 1)
    assert cloud.shape == (50, 30)
    np.testing.assert_allclose(rotation.T @ rotation, np.eye(3), atol=1e-12)
    assert slot == 13

    torus = mrgap.gen_torus(100, 2)
    ring = np.hypot(torus[:, 0], torus[:, 1]) - 2.0
    np.testing.assert_allclose(ring**2 + torus[:, 2] ** 2, 0.64, atol=1e-12)


def test_noise_is_seeded():
    pts = mrgap.gen_circle(20, 3, 1.0, 1)
    a = mrgap.add_gaussian_noise(pts, 0.1, 5)
    np.testing.assert_array_equal(a, mrgap.add_gaussian_noise(pts, 0.1, 5))
    np.testing.assert_array_equal(mrgap.add_gaussian_noise(pts, 0.0, 5), pts)


def test_local_frame_is_orthonormal():
    pts = mrgap.gen_cassini(200, 3)
    basis, values = mrgap.local_frame(pts, 0, 0.3, 1)
    np.testing.assert_allclose(basis.T @ basis, np.eye(3), atol=1e-10)
    assert np.all(np.diff(values) <= 0)
    cov = mrgap.local_covariance(pts, 0, 0.3)
    np.testing.assert_allclose(basis @ np.diag(values) @ basis.T, cov, atol=1e-12)


def test_gp_single_point_closed_form():
    h = mrgap.GpHyperParams(1.3, 0.8, 0.2)
    w = np.array([[0.4]])
    z = np.array([[0.7]])
    s = h.A + h.sigma**2
    want = -0.49 / s - math.log(s) - 0.5 * math.log(2 * math.pi)
    assert mrgap.log_marginal(w, z, h) == pytest.approx(want, rel=1e-13)
    mean, cov = mrgap.gp_predict(np.zeros((0, 1)), np.zeros((0, 2)), w, h)
    assert mean.shape == (1, 2)
    assert cov[0, 0] == pytest.approx(h.A)
    assert len(mrgap.log_marginal_gradient(w, z, h)) == 3


def test_pipeline(tmp_path):
    truth = mrgap.gen_cassini(20000, 99)
    noisy = mrgap.add_gaussian_noise(mrgap.gen_cassini(102, 7), 0.04, 8)
    trace = mrgap.denoise(noisy, epsilon=0.3, delta=0.6, d=1, max_iter=2)
    assert trace.rounds == 2
    assert len(trace.clouds) == 3
    assert mrgap.grmse(trace.denoised, truth) < mrgap.grmse(noisy, truth)

    points, charts = mrgap.interpolate(trace, 20, seed=1)
    assert points.shape == (2040, 3)
    assert charts[:20] == [0] * 20

    path = tmp_path / "trace.json"
    trace.save(path)
    again = mrgap.load_trace(path)
    assert again.sigma_history == trace.sigma_history
    np.testing.assert_array_equal(mrgap.interpolate(again, 20, seed=1)[0], points)


def test_dimension_of_circle():
    d, entries = mrgap.estimate_dimension(mrgap.gen_circle(300, 3, 1.0, 5))
    assert d == 1
    assert [e["embed_dim"] for e in entries] == [3, 4, 5, 6]


def test_errors_map_to_python_exceptions():
    with pytest.raises(ValueError):
        mrgap.grmse(np.zeros((3, 2)), np.zeros((3, 3)))
    with pytest.raises(mrgap.InputError):
        mrgap.load_csv("/nonexistent/file.csv")
    with pytest.raises(ValueError):
        mrgap.denoise(np.zeros((1, 3)), epsilon=0.3, delta=0.6, d=1)
