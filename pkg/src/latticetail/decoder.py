"""Fincke-Pohst sphere decoding without radius reduction, with per-layer counters.

The search radius stays fixed, so every lattice point inside the sphere is
visited and the layer counts are the exact cardinalities

    S_k = |{d_k in Z[i]^k : ||y_k - R_k d_k||^2 <= rho^2}|,  k = 1..M,

independent of the order in which children are visited.
"""
import math
from dataclasses import dataclass

from . import gaussint
from .errors import InvalidRadius
from .linalg import as_complex_matrix, as_complex_vector
from .preproc import Method, preprocess

INT64_MAX = 2**63 - 1


@dataclass(frozen=True)
class DecodeResult:
    solution: tuple | None
    objective: float | None
    layer_counts: tuple
    total: int
    censored: bool = False
    overflow: bool = False

    @property
    def found(self):
        return self.solution is not None


class _Abort(Exception):
    pass


def gaussian_integers_in_disk(center, radius):
    """All ``(re, im)`` Gaussian integers with |center - d| <= radius.

    Scans re ascending over ceil(Re c - radius)..floor(Re c + radius), then im
    ascending over the circle slice for that column. Both ranges are widened
    by one so the final ``<=`` test alone decides boundary points.
    """
    if radius < 0:
        raise InvalidRadius(f"radius must be >= 0, got {radius}")
    center = complex(center)
    r2 = radius * radius
    out = []
    for re in range(math.ceil(center.real - radius) - 1, math.floor(center.real + radius) + 2):
        dx = center.real - re
        rem = r2 - dx * dx
        if rem < 0:
            continue
        s = math.sqrt(rem)
        for im in range(math.ceil(center.imag - s) - 1, math.floor(center.imag + s) + 2):
            dy = center.imag - im
            if dx * dx + dy * dy <= r2:
                out.append((re, im))
    return out


def decode(r, y, rho, node_budget=None):
    """Enumerate all d with ||y - R d||^2 <= rho^2 and return the closest one.

    ``r`` must be upper triangular with positive real diagonal. Layer ``k``
    (1-based) works on row ``M - k``; the root layer handles ``d_M``.
    ``node_budget`` caps the total count; exceeding it aborts the search and
    returns a censored result whose counts are lower bounds.
    """
    if not rho > 0:
        raise InvalidRadius(f"rho must be > 0, got {rho}")
    r = as_complex_matrix(r, "r")
    y = as_complex_vector(y, "y")
    m = r.shape[0]
    if r.shape != (m, m) or y.shape != (m,):
        raise ValueError("r must be M x M and y of length M")

    rho2 = float(rho) ** 2
    rows = r.tolist()
    diag = [rows[i][i].real for i in range(m)]
    yl = y.tolist()
    limit = INT64_MAX if node_budget is None else min(int(node_budget), INT64_MAX)

    counts = [0] * m
    d = [0j] * m
    state = {"total": 0, "obj": math.inf, "key": None}

    def bump(i, n):
        counts[i] += n
        state["total"] += n
        if state["total"] > limit:
            raise _Abort

    def offset(i):
        row = rows[i]
        b = yl[i]
        for j in range(i + 1, m):
            b -= row[j] * d[j]
        return b

    def leaf(partial):
        # row 0: count the disk slice by slice and pick the nearest point
        b = offset(0)
        rii = diag[0]
        bim = b.imag
        cre, cim = b.real / rii, bim / rii
        t = math.sqrt(rho2 - partial) / rii
        n = 0
        for re in range(math.ceil(cre - t) - 1, math.floor(cre + t) + 2):
            er = b.real - rii * re
            base = partial + er * er
            if base > rho2:
                continue
            s = math.sqrt(rho2 - base) / rii
            lo, hi = math.ceil(cim - s), math.floor(cim + s)
            while _inside(base, bim, rii, lo - 1, rho2):
                lo -= 1
            while lo <= hi and not _inside(base, bim, rii, lo, rho2):
                lo += 1
            while _inside(base, bim, rii, hi + 1, rho2):
                hi += 1
            while hi >= lo and not _inside(base, bim, rii, hi, rho2):
                hi -= 1
            if hi >= lo:
                n += hi - lo + 1
        if not n:
            return
        bump(0, n)
        for re in (math.floor(cre), math.floor(cre) + 1):
            er = b.real - rii * re
            for im in (math.floor(cim), math.floor(cim) + 1):
                ei = bim - rii * im
                obj = partial + er * er + ei * ei
                if obj > rho2 or obj > state["obj"]:
                    continue
                key = ((re, im),) + tuple((int(z.real), int(z.imag)) for z in d[1:])
                if obj < state["obj"] or key < state["key"]:
                    state["obj"], state["key"] = obj, key

    def visit(i, partial):
        if i == 0:
            leaf(partial)
            return
        b = offset(i)
        rii = diag[i]
        cre, cim = b.real / rii, b.imag / rii
        t = math.sqrt(rho2 - partial) / rii
        for re in range(math.ceil(cre - t) - 1, math.floor(cre + t) + 2):
            er = b.real - rii * re
            base = partial + er * er
            if base > rho2:
                continue
            s = math.sqrt(rho2 - base) / rii
            for im in range(math.ceil(cim - s) - 1, math.floor(cim + s) + 2):
                ei = b.imag - rii * im
                metric = base + ei * ei
                if metric <= rho2:
                    bump(i, 1)
                    d[i] = complex(re, im)
                    visit(i - 1, metric)
        d[i] = 0j

    censored = False
    try:
        visit(m - 1, 0.0)
    except _Abort:
        censored = True

    # counts[i] belongs to row i, i.e. layer M - i
    layer_counts = tuple(counts[::-1])
    total = state["total"]
    overflow = censored and node_budget is None
    if censored or state["key"] is None:
        return DecodeResult(None, None, layer_counts, total, censored, overflow)
    return DecodeResult(state["key"], state["obj"], layer_counts, total)


def _inside(base, bim, rii, im, rho2):
    # same expression as the objective, so counting and selection agree
    ei = bim - rii * im
    return base + ei * ei <= rho2


def solve(h, r_vec, rho, method=Method.DIRECT, node_budget=None, delta=0.75):
    """Preprocess ``h``, decode the triangular system and map back with d = t d~.

    Layer counts refer to the preprocessed system.
    """
    h = as_complex_matrix(h, "h")
    r_vec = as_complex_vector(r_vec, "r_vec")
    if r_vec.shape[0] != h.shape[0]:
        raise ValueError(f"observation length {r_vec.shape[0]} != rows of h {h.shape[0]}")
    out = preprocess(h, method, delta)
    y = out.q_tilde.conj().T @ r_vec
    res = decode(out.r_tilde, y, rho, node_budget)
    if res.solution is None:
        return res
    return DecodeResult(gaussint.matvec(out.t, res.solution), res.objective,
                        res.layer_counts, res.total)

