"""Lattice geometry for complex lattices L(R) = {R d : d in Z[i]^k}.

Sphere volume and surface in k complex dimensions, the covering-radius upper
bound, the point-count sandwich around the volume heuristic, and brute-force
oracles used to ground-truth the sphere decoder.
"""
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidRadius, TooLarge
from .linalg import as_complex_matrix, as_complex_vector

BRUTE_MAX_K = 3
BRUTE_MAX_PREDICTED = 10**6
BRUTE_CHUNK = 200_000
CLP_BOX = 3


def sphere_volume(k, rho):
    """Volume pi^k rho^(2k) / k! of a radius-``rho`` ball in C^k."""
    if k < 1 or rho < 0:
        raise ValueError("need k >= 1 and rho >= 0")
    return math.pi**k * rho ** (2 * k) / math.factorial(k)


def sphere_surface(k, rho):
    """Surface area of the same ball, the rho-derivative of :func:`sphere_volume`."""
    if k < 1 or rho < 0:
        raise ValueError("need k >= 1 and rho >= 0")
    return 2 * k * math.pi**k * rho ** (2 * k - 1) / math.factorial(k)


def covering_radius_ub(r):
    """Upper bound sqrt(sum(R_ii^2) / 2) on the covering radius of L(r).

    Babai's nearest-plane residual has each complex component inside a square
    of side R_ii, so its squared norm never exceeds half the squared diagonal sum.
    """
    d = np.abs(np.diagonal(np.asarray(r)))
    return float(math.sqrt(0.5 * float(np.dot(d, d))))


@dataclass(frozen=True)
class SphereSpec:
    r_k: np.ndarray
    center: np.ndarray
    radius: float

    def __post_init__(self):
        if self.radius < 0:
            raise InvalidRadius(f"radius must be >= 0, got {self.radius}")

    @property
    def k(self):
        return self.r_k.shape[0]

    @property
    def volume(self):
        """Fundamental-region volume det(R_k^H R_k)."""
        d = np.abs(np.diagonal(self.r_k))
        return float(np.prod(d * d))


def sphere_spec(r, y, rho, k=None):
    """Layer-``k`` sphere of the triangular system: bottom-right block and tail of ``y``."""
    r = as_complex_matrix(r, "r")
    y = as_complex_vector(y, "y")
    m = r.shape[0]
    k = m if k is None else k
    return SphereSpec(r_k=r[m - k:, m - k:], center=y[m - k:], radius=float(rho))


def sandwich_bounds(spec, mu):
    """Lower/upper bounds on the number of lattice points inside ``spec``.

    lower = (V_k(rho) - mu A_k(rho)) / vol and upper = V_k(rho + mu) / vol,
    valid whenever ``mu`` is at least the covering radius of L(R_k).
    The lower bound is returned unclamped and may be negative.
    """
    k, rho, vol = spec.k, spec.radius, spec.volume
    lower = (sphere_volume(k, rho) - mu * sphere_surface(k, rho)) / vol
    upper = sphere_volume(k, rho + mu) / vol
    return lower, upper


def _gauss_box(center, halfwidth):
    """Gaussian integers d with |d - center| <= halfwidth, as a complex array."""
    lo_re, hi_re = math.ceil(center.real - halfwidth), math.floor(center.real + halfwidth)
    lo_im, hi_im = math.ceil(center.imag - halfwidth), math.floor(center.imag + halfwidth)
    re = np.arange(lo_re, hi_re + 1, dtype=np.float64)
    im = np.arange(lo_im, hi_im + 1, dtype=np.float64)
    pts = (re[:, None] + 1j * im[None, :]).reshape(-1)
    return pts[np.abs(pts - center) <= halfwidth]


def _as_gauss_tuple(d):
    return tuple((int(round(z.real)), int(round(z.imag))) for z in d)


def count_points_brute(spec):
    """Enumerate {d in Z[i]^k : ||y_k - R_k d||^2 <= rho^2} over a bounding box.

    The search runs in LLL-reduced coordinates e with d = T e (T unimodular,
    so this is a bijection on Z[i]^k). With B = R_k T every solution satisfies
    e = B^{-1}(y_k - v), ||v|| <= rho, so coordinate i of e lies within
    rho * ||row_i(B^{-1})|| of (B^{-1} y_k)_i. Candidates are mapped back to d
    exactly and filtered with the squared-norm test against the original R_k.
    Returns ``(count, points)`` with points as tuples of ``(re, im)`` pairs.
    """
    pts, _ = _enumerate_ball(spec)
    return len(pts), [_as_gauss_tuple(d) for d in pts]


def _enumerate_ball(spec):
    from .preproc import clll_reduce

    if spec.radius < 0:
        raise InvalidRadius(f"radius must be >= 0, got {spec.radius}")
    k = spec.k
    if k > BRUTE_MAX_K:
        raise TooLarge(f"brute force limited to k <= {BRUTE_MAX_K}, got {k}")
    if sphere_volume(k, spec.radius) / spec.volume > BRUTE_MAX_PREDICTED:
        raise TooLarge("predicted point count exceeds brute-force guard")

    rk, yk, rho2 = spec.r_k, spec.center, spec.radius**2
    t = clll_reduce(rk) if k > 1 else np.eye(1, dtype=np.complex128)
    binv = np.linalg.inv(rk @ t)
    centers = binv @ yk
    # slack keeps boundary points in the candidate set; the final test is exact
    widths = spec.radius * np.linalg.norm(binv, axis=1) * (1 + 1e-9) + 1e-12
    axes = [_gauss_box(c, w) for c, w in zip(centers, widths)]
    if any(a.size == 0 for a in axes):
        return np.empty((0, k), dtype=np.complex128), np.empty(0)

    pts, dists = [], []
    for chunk in _product_chunks(axes):
        # integer entries, so T e is exact in float64
        d = chunk @ t.T
        dist2 = _dist2(rk, yk, d)
        keep = dist2 <= rho2
        pts.append(d[keep])
        dists.append(dist2[keep])
    return np.concatenate(pts), np.concatenate(dists)


def _dist2(r, y, cands):
    resid = y[None, :] - cands @ r.T
    return np.sum(resid.real**2 + resid.imag**2, axis=1)


def _grid(axes):
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(axes))


def _product_chunks(axes):
    """Cartesian product of candidate coordinates, yielded as (n, k) arrays."""
    first, rest = axes[0], axes[1:]
    if not rest:
        yield first[:, None]
        return
    tails = _grid(rest)
    step = max(1, BRUTE_CHUNK // len(tails))
    for start in range(0, len(first), step):
        head = first[start:start + step]
        block = np.empty((len(head) * len(tails), len(axes)), dtype=np.complex128)
        block[:, 0] = np.repeat(head, len(tails))
        block[:, 1:] = np.tile(tails, (len(head), 1))
        yield block


def clp_brute(r, y):
    """Closest lattice point by exhaustive enumeration.

    The box round(R^{-1} y) +/- 3 (per real component) around the Babai
    rounding point, together with the Babai nearest-plane point, supplies an
    incumbent; the ball of that radius is then enumerated completely, so the
    result is exact even when the minimizer lies outside the box. Ties go to
    the lexicographically smallest sequence of ``(re, im)`` pairs, first
    coordinate most significant.
    """
    r = as_complex_matrix(r, "r")
    y = as_complex_vector(y, "y")
    m = r.shape[0]
    babai = np.linalg.solve(r, y)
    offs = np.arange(-CLP_BOX, CLP_BOX + 1, dtype=np.float64)
    axes = []
    for z in babai:
        re = np.round(z.real) + offs
        im = np.round(z.imag) + offs
        axes.append((re[:, None] + 1j * im[None, :]).reshape(-1))
    cands = _grid(axes)
    incumbent = min(float(_dist2(r, y, cands).min()),
                    float(_dist2(r, y, _nearest_plane(r, y)[None, :])[0]))
    pts, dist2 = _enumerate_ball(SphereSpec(r, y, math.sqrt(incumbent) * (1 + 1e-9)))
    best = dist2.min()
    return min(_as_gauss_tuple(d) for d in pts[dist2 == best])


def _nearest_plane(r, y):
    m = r.shape[0]
    d = np.zeros(m, dtype=np.complex128)
    for i in range(m - 1, -1, -1):
        z = (y[i] - r[i, i + 1:] @ d[i + 1:]) / r[i, i]
        d[i] = complex(round(z.real), round(z.imag))
    return d


def covering_radius_sampled(r, samples, rng):
    """Sampled lower bound on the covering radius of L(r).

    Draws points uniformly in the fundamental parallelotope and returns the
    largest distance to its nearest lattice point; nearest points are found
    by brute enumeration inside the ball of radius :func:`covering_radius_ub`.
    """
    r = as_complex_matrix(r, "r")
    m = r.shape[0]
    ub = covering_radius_ub(r)
    worst = 0.0
    for _ in range(samples):
        u = rng.random(m) + 1j * rng.random(m)
        x = r @ u
        _, pts = count_points_brute(SphereSpec(r, x, ub))
        lat = np.array([[complex(a, b) for a, b in p] for p in pts]) @ r.T
        worst = max(worst, float(np.min(np.linalg.norm(lat - x[None, :], axis=1))))
    return worst
