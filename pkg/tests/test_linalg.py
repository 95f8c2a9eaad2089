import numpy as np
import pytest
import scipy.linalg

from mvkc.linalg import center_columns, exact_svd, randomized_svd, truncated_svd


def test_center_two_points():
    assert np.array_equal(center_columns([[1.0], [3.0]]), [[-1.0], [1.0]])


def test_center_idempotent():
    X = np.random.default_rng(0).normal(size=(20, 4))
    Xc = center_columns(X)
    assert np.allclose(center_columns(Xc), Xc, atol=1e-12)


def test_center_column_sums():
    X = np.random.default_rng(1).normal(size=(50, 7)) * 100
    sums = center_columns(X).sum(axis=0)
    assert np.all(np.abs(sums) < 1e-9 * 50 * np.abs(X).max())


def test_exact_svd_identity():
    res = exact_svd(np.eye(3))
    assert np.allclose(res.s, [1, 1, 1])


def test_exact_svd_zero():
    res = exact_svd(np.zeros((2, 2)))
    assert np.allclose(res.s, [0, 0])


def test_exact_svd_reconstructs():
    X = np.random.default_rng(2).normal(size=(30, 20))
    res = exact_svd(X)
    assert np.allclose(res.U @ np.diag(res.s) @ res.V.T, X, atol=1e-10)


def test_exact_svd_dimension_guard():
    with pytest.raises(ValueError):
        exact_svd(np.zeros((2049, 2049)))


def test_randomized_diag():
    X = np.diag([3.0, 2.0, 1.0])
    res = randomized_svd(X, 2, seed=0)
    assert np.allclose(res.s, [3, 2], atol=1e-10)


def test_randomized_exact_rank_recovery():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(50, 5)) @ rng.normal(size=(5, 40))
    res = randomized_svd(X, 5, seed=0)
    recon = res.U @ np.diag(res.s) @ res.V.T
    assert np.linalg.norm(recon - X) < 1e-8


def test_randomized_decaying_spectrum_near_optimal():
    rng = np.random.default_rng(4)
    n, d, r = 200, 80, 10
    Q1, _ = np.linalg.qr(rng.normal(size=(n, d)))
    Q2, _ = np.linalg.qr(rng.normal(size=(d, d)))
    s = (np.arange(1, d + 1, dtype=float)) ** -2.0
    X = Q1 @ np.diag(s) @ Q2.T
    res = randomized_svd(X, r, seed=1)
    err = np.linalg.norm(X - res.U @ np.diag(res.s) @ res.V.T)
    optimal = np.linalg.norm(s[r:])  # dense-SVD oracle's rank-r error
    assert err <= 1.05 * optimal


def test_randomized_seed_determinism():
    X = np.random.default_rng(5).normal(size=(60, 30))
    a = randomized_svd(X, 6, seed=42)
    b = randomized_svd(X, 6, seed=42)
    assert np.array_equal(a.U, b.U) and np.array_equal(a.s, b.s)
    c = randomized_svd(X, 6, seed=43)
    assert not np.array_equal(a.U, c.U)


@pytest.mark.parametrize("factory", [exact_svd, lambda X: randomized_svd(X, 8, seed=0)])
def test_svd_invariants(factory):
    rng = np.random.default_rng(6)
    d = 30
    s = np.exp(-0.4 * np.arange(d))
    X = np.linalg.qr(rng.normal(size=(80, d)))[0] @ np.diag(s) @ np.linalg.qr(rng.normal(size=(d, d)))[0]
    res = factory(X)
    r = len(res.s)
    # orthonormal blocks
    assert np.allclose(res.U.T @ res.U, np.eye(r), atol=1e-8)
    assert np.allclose(res.V.T @ res.V, np.eye(r), atol=1e-8)
    # nonincreasing singular values
    assert np.all(np.diff(res.s) <= 1e-12)
    # X.T u_i = s_i v_i per retained component
    for i in range(r):
        resid = np.linalg.norm(X.T @ res.U[:, i] - res.s[i] * res.V[:, i])
        assert resid <= 1e-6 * res.s[0]
    # sign convention: largest-magnitude entry of each left vector positive
    idx = np.argmax(np.abs(res.U), axis=0)
    assert np.all(res.U[idx, np.arange(r)] >= 0)


def test_rank_out_of_range():
    with pytest.raises(ValueError):
        randomized_svd(np.ones((4, 3)), 5)


def test_truncated_svd_dispatch_matches_exact():
    X = np.random.default_rng(7).normal(size=(40, 10))
    res = truncated_svd(X, 4)
    full = exact_svd(X)
    assert np.allclose(res.s, full.s[:4])
    assert np.allclose(res.U, full.U[:, :4])
