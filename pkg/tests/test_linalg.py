import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from latticetail.errors import InvalidLayer, RankDeficient
from latticetail.linalg import qrd, sub_gram_det

from conftest import complex_matrices


def check_factors(h, f):
    m = h.shape[1]
    assert np.linalg.norm(f.q.conj().T @ f.q - np.eye(m)) <= 1e-10 * m
    assert np.allclose(f.r, np.triu(f.r), atol=0)
    d = np.diagonal(f.r)
    assert np.all(d.imag == 0) and np.all(d.real > 0)
    assert np.linalg.norm(f.q @ f.r - h) <= 1e-9 * np.linalg.norm(h)


def test_identity():
    f = qrd(np.eye(2))
    assert np.allclose(f.q, np.eye(2)) and np.allclose(f.r, np.eye(2))


def test_negative_scalar_flips_sign_into_q():
    f = qrd([[-2.0]])
    assert f.q[0, 0] == pytest.approx(-1) and f.r[0, 0] == pytest.approx(2)


def test_random_tall_reconstruction(rng):
    h = rng.standard_normal((3, 2)) + 0j
    check_factors(h, qrd(h))


def test_rank_deficient():
    with pytest.raises(RankDeficient):
        qrd([[1, 2], [2, 4]])
    with pytest.raises(RankDeficient):
        qrd(np.ones((1, 2)))


@given(complex_matrices())
def test_factor_invariants(h):
    check_factors(h, qrd(h))


@given(complex_matrices(), st.lists(st.floats(-np.pi, np.pi), min_size=4, max_size=4))
def test_column_phase_leaves_diagonal(h, thetas):
    m = h.shape[1]
    ph = np.exp(1j * np.array(thetas[:m]))
    d0 = np.diagonal(qrd(h).r)
    d1 = np.diagonal(qrd(h * ph[None, :]).r)
    assert np.allclose(d0, d1, rtol=1e-10, atol=0)


@given(complex_matrices(), st.floats(1e-3, 1e3))
def test_sub_gram_det_homogeneous(h, b):
    r, rb = qrd(h).r, qrd(b * h).r
    for k in range(1, h.shape[1] + 1):
        assert sub_gram_det(rb, k) == pytest.approx(b ** (2 * k) * sub_gram_det(r, k), rel=1e-10)


def dense_gram_det(r, k):
    rk = r[-k:, -k:]
    return np.linalg.det(rk.conj().T @ rk).real


def test_sub_gram_det_examples():
    assert sub_gram_det(np.eye(3), 2) == 1
    assert sub_gram_det(np.diag([2.0, 3.0]), 1) == pytest.approx(dense_gram_det(np.diag([2.0, 3.0]), 1))
    assert sub_gram_det(np.diag([2.0, 3.0]), 1) == 9
    r = np.diag([1.0, 2.0])
    assert dense_gram_det(r, 2) == pytest.approx(4)
    assert sub_gram_det(qrd(2 * r).r, 2) == pytest.approx(dense_gram_det(2 * r, 2)) == pytest.approx(64)


@settings(max_examples=50)
@given(complex_matrices())
def test_full_layer_matches_dense_det(h):
    if h.shape[0] != h.shape[1]:
        h = h[: h.shape[1]]
    r = qrd(h).r
    assert sub_gram_det(r, h.shape[1]) == pytest.approx(abs(np.linalg.det(h)) ** 2, rel=1e-9)


def test_invalid_layer():
    with pytest.raises(InvalidLayer):
        sub_gram_det(np.eye(2), 0)
    with pytest.raises(InvalidLayer):
        sub_gram_det(np.eye(2), 3)
