"""Preprocessing: produce the triangular factor the sphere decoder runs on.

Every method returns ``H @ t = q_tilde @ r_tilde`` for a unimodular ``t``:
direct QRD (``t = I``), complex LLL reduction, and V-BLAST zero-forcing
layer sorting (``t`` a permutation).
"""
import enum
import math
from dataclasses import dataclass

import numpy as np

from . import gaussint
from .linalg import as_complex_matrix, qrd, sub_gram_dets


class Method(str, enum.Enum):
    DIRECT = "qrd"
    CLLL = "lll"
    VBLAST = "vblast"


@dataclass(frozen=True)
class PreprocOutput:
    method: Method
    r_tilde: np.ndarray
    t: np.ndarray
    q_tilde: np.ndarray


def _round_half_toward_zero(x):
    return math.copysign(math.ceil(abs(x) - 0.5), x)


def round_gauss(z):
    """Nearest Gaussian integer; exact half-way ties go toward smaller |Re|, |Im|."""
    return complex(_round_half_toward_zero(z.real), _round_half_toward_zero(z.imag))


def _size_reduce(r, t, k, j):
    mu = r[j, k] / r[j, j]
    c = round_gauss(mu)
    if c != 0:
        r[: j + 1, k] -= c * r[: j + 1, j]
        t[:, k] -= c * t[:, j]


def clll_reduce(r, delta=0.75, max_iter=None):
    """Complex LLL on the columns of upper-triangular ``r``.

    Returns the unimodular ``t`` such that the positive-diagonal QR factor of
    ``r @ t`` is size reduced and satisfies the Lovasz condition
    ``delta |R_{k-1,k-1}|^2 <= |R_{k,k}|^2 + |R_{k-1,k}|^2``.
    """
    if not 0.25 < delta <= 1:
        raise ValueError(f"delta must lie in (1/4, 1], got {delta}")
    r = np.array(r, dtype=np.complex128)
    m = r.shape[0]
    t = np.eye(m, dtype=np.complex128)
    if max_iter is None:
        max_iter = 10_000 * m * m
    k, it = 1, 0
    while k < m:
        it += 1
        if it > max_iter:
            raise RuntimeError("complex LLL did not terminate")
        _size_reduce(r, t, k, k - 1)
        if delta * abs(r[k - 1, k - 1]) ** 2 > abs(r[k, k]) ** 2 + abs(r[k - 1, k]) ** 2:
            r[:, [k - 1, k]] = r[:, [k, k - 1]]
            t[:, [k - 1, k]] = t[:, [k, k - 1]]
            # Givens rotation on rows k-1, k restores triangularity
            a, b = r[k - 1, k - 1], r[k, k - 1]
            nu = math.hypot(abs(a), abs(b))
            g = np.array([[a.conjugate(), b.conjugate()], [-b, a]]) / nu
            r[k - 1:k + 1, k - 1:] = g @ r[k - 1:k + 1, k - 1:]
            r[k, k - 1] = 0.0
            r[k - 1, k - 1] = nu
            ph = r[k, k] / abs(r[k, k])
            r[k, k:] *= ph.conjugate()
            r[k, k] = abs(r[k, k])
            k = max(k - 1, 1)
        else:
            for j in range(k - 2, -1, -1):
                _size_reduce(r, t, k, j)
            k += 1
    return t


def vblast_order(h):
    """Zero-forcing V-BLAST detection order (stream indices, first detected first).

    At each step the remaining stream whose pseudoinverse row has the smallest
    norm is detected and its column removed.
    """
    h = as_complex_matrix(h, "h")
    remaining = list(range(h.shape[1]))
    order = []
    while remaining:
        pinv = np.linalg.pinv(h[:, remaining])
        norms = np.sum(np.abs(pinv) ** 2, axis=1)
        pick = remaining[int(np.argmin(norms))]
        order.append(pick)
        remaining.remove(pick)
    return order


def vblast_permutation(h):
    """Permutation ``t`` placing the first-detected stream in the last column.

    The decoder's root layer works on column M, so detection order maps to
    columns M, M-1, ..., 1.
    """
    order = vblast_order(h)
    m = len(order)
    t = np.zeros((m, m), dtype=np.complex128)
    for pos, stream in enumerate(order):
        t[stream, m - 1 - pos] = 1.0
    return t


def preprocess(h, method=Method.DIRECT, delta=0.75):
    h = as_complex_matrix(h, "h")
    method = Method(method)
    m = h.shape[1]
    if method is Method.DIRECT:
        f = qrd(h)
        return PreprocOutput(method, f.r, np.eye(m, dtype=np.complex128), f.q)
    if method is Method.CLLL:
        t = clll_reduce(qrd(h).r, delta)
    else:
        t = vblast_permutation(h)
    f = qrd(h @ t)
    return PreprocOutput(method, f.r, t, f.q)


def clll_violations(r, delta=0.75, tol=1e-9):
    """List of violated complex-LLL conditions on ``r`` (empty when reduced)."""
    r = np.asarray(r)
    m = r.shape[0]
    bad = []
    for k in range(m):
        for j in range(k):
            mu = r[j, k] / r[j, j]
            if abs(mu.real) > 0.5 + tol or abs(mu.imag) > 0.5 + tol:
                bad.append(("size", j, k))
        if k and delta * abs(r[k - 1, k - 1]) ** 2 > (abs(r[k, k]) ** 2 + abs(r[k - 1, k]) ** 2) * (1 + tol):
            bad.append(("lovasz", k - 1, k))
    return bad


def is_permutation(t):
    t = np.asarray(t)
    if not np.all((t == 0) | (t == 1)):
        return False
    return bool(np.all(t.sum(axis=0) == 1) and np.all(t.sum(axis=1) == 1))


def lr_identity_check(h, out, rtol=1e-8):
    """Check R = Q' r_tilde t^{-1} where R is the direct factor and Q' = qrd(R t).q.

    Returns ``(ok, residual)`` with the Frobenius residual.
    """
    h = as_complex_matrix(h, "h")
    r = qrd(h).r
    q_prime = qrd(r @ out.t).q
    t_inv = gaussint.inverse_exact(out.t)
    residual = float(np.linalg.norm(r - q_prime @ out.r_tilde @ t_inv))
    return residual <= rtol * np.linalg.norm(r), residual


def scaling_invariance_check(h, method, b, rtol=1e-10):
    """Same transform for ``h`` and ``b h``, and sub-Gram dets scale by b^(2k)."""
    if b <= 0:
        raise ValueError("b must be positive")
    h = as_complex_matrix(h, "h")
    base = preprocess(h, method)
    scaled = preprocess(b * h, method)
    if not np.array_equal(base.t, scaled.t):
        return False
    g = sub_gram_dets(base.r_tilde)
    gb = sub_gram_dets(scaled.r_tilde)
    want = g * b ** (2.0 * np.arange(1, len(g) + 1))
    return bool(np.all(np.abs(gb - want) <= rtol * np.abs(want)))
