"""Complex dense linear algebra: positive-diagonal QR and sub-Gram determinants.

Matrices are plain ``numpy`` arrays of dtype ``complex128``.
"""
from dataclasses import dataclass

import numpy as np

from .errors import InvalidLayer, RankDeficient

RANK_TOL = 1e-12


def as_complex_matrix(a, name="matrix"):
    """Coerce ``a`` to a finite 2-D complex128 array."""
    m = np.array(a, dtype=np.complex128)
    if m.ndim == 1:
        m = m.reshape(-1, 1)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise ValueError(f"{name} must be a nonempty 2-D array, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} has non-finite entries")
    return m


def as_complex_vector(a, name="vector"):
    v = np.array(a, dtype=np.complex128).reshape(-1)
    if v.size < 1 or not np.all(np.isfinite(v)):
        raise ValueError(f"{name} must be a nonempty finite vector")
    return v


@dataclass(frozen=True)
class QRFactors:
    q: np.ndarray
    r: np.ndarray


def qrd(h):
    """Unique QR factorization ``h = q @ r`` with ``r`` having a positive real diagonal.

    Householder QR (LAPACK) followed by moving the phase of each diagonal entry
    of ``r`` into the matching column of ``q``.
    """
    h = as_complex_matrix(h, "h")
    n, m = h.shape
    if n < m:
        raise RankDeficient(f"need N >= M, got {n}x{m}")
    q, r = np.linalg.qr(h, mode="reduced")
    diag = np.diagonal(r)
    mag = np.abs(diag)
    if mag.min() <= RANK_TOL * np.linalg.norm(h):
        raise RankDeficient(f"smallest |R_ii| = {mag.min():.3e} below rank tolerance")
    phase = diag / mag
    r = np.triu(phase.conj()[:, None] * r)
    q = q * phase[None, :]
    # diagonal is real by construction; drop the rounding residue in Im
    r[np.diag_indices(m)] = mag
    return QRFactors(q=q, r=r)


def sub_gram_det(r, k):
    """det(R_k^H R_k) for the bottom-right k x k block of upper-triangular ``r``.

    For a triangular block this is the product of the squared diagonal entries,
    i.e. the volume of a fundamental region of the lattice spanned by ``R_k``.
    """
    r = np.asarray(r)
    m = r.shape[0]
    if not 1 <= k <= m:
        raise InvalidLayer(f"layer k={k} outside [1, {m}]")
    d = np.abs(np.diagonal(r)[m - k:])
    return float(np.prod(d * d))


def sub_gram_dets(r):
    """All layers at once: entry ``k-1`` holds ``sub_gram_det(r, k)``."""
    d = np.abs(np.diagonal(r))[::-1]
    return np.cumprod(d * d)
