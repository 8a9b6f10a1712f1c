"""Exact arithmetic over the Gaussian integers Z[i].

Unimodular transforms are carried around as complex128 arrays whose entries
are integral; anything that must be exact (determinants, inverses, mapping
decoded vectors back) is done here in integer arithmetic.
"""
import numpy as np
from sympy.polys.domains import ZZ_I
from sympy.polys.matrices import DomainMatrix


def is_integral(a):
    a = np.asarray(a)
    return bool(np.all(a.real == np.round(a.real)) and np.all(a.imag == np.round(a.imag)))


def to_domain_matrix(t):
    t = np.asarray(t)
    if not is_integral(t):
        raise ValueError("matrix has non-integral entries")
    rows = [[ZZ_I(int(z.real), int(z.imag)) for z in row] for row in t]
    return DomainMatrix(rows, t.shape, ZZ_I)


def _from_domain_matrix(dm):
    rows, cols = dm.shape
    out = np.empty((rows, cols), dtype=np.complex128)
    for i, row in enumerate(dm.to_list()):
        for j, z in enumerate(row):
            out[i, j] = complex(int(z.x), int(z.y))
    return out


def det_exact(t):
    """Determinant over Z[i] as a Python ``(re, im)`` pair of ints."""
    d = to_domain_matrix(t).det()
    return int(d.x), int(d.y)


def is_unimodular(t):
    """True iff ``t`` is a Gaussian-integer matrix with |det t| = 1."""
    t = np.asarray(t)
    if t.ndim != 2 or t.shape[0] != t.shape[1] or not is_integral(t):
        return False
    re, im = det_exact(t)
    return re * re + im * im == 1


def inverse_exact(t):
    """Inverse of a unimodular matrix via adjugate / det, computed in Z[i]."""
    adj, det = to_domain_matrix(t).adj_det()
    re, im = int(det.x), int(det.y)
    if re * re + im * im != 1:
        raise ValueError(f"matrix is not unimodular (det = {re}{im:+d}i)")
    # 1/det = conj(det) for a unit
    unit_inv = ZZ_I(re, -im)
    return _from_domain_matrix(adj.mul(unit_inv))


def matvec(t, d):
    """Exact product ``t @ d`` for Gaussian-integer ``t`` and ``d``.

    ``d`` is a sequence of ``(re, im)`` pairs; the result uses the same form.
    """
    t = np.asarray(t)
    tr = np.round(t.real).astype(np.int64)
    ti = np.round(t.imag).astype(np.int64)
    dv = np.asarray(d, dtype=np.int64).reshape(-1, 2)
    re = tr @ dv[:, 0] - ti @ dv[:, 1]
    im = tr @ dv[:, 1] + ti @ dv[:, 0]
    return tuple((int(a), int(b)) for a, b in zip(re, im))


def to_complex(d):
    """Gaussian-integer vector of ``(re, im)`` pairs as a complex128 array."""
    return np.array([complex(a, b) for a, b in d], dtype=np.complex128)
