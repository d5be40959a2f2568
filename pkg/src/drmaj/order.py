"""Majorisation comparators and order-theoretic checks.

Discrete vectors ``p`` and ``q`` on the simplex compare by sorted partial
sums: ``p`` precedes ``q`` (is more uncertain) when every partial sum of the
nonincreasing rearrangement of ``p`` is dominated by the corresponding sum
for ``q``.  Continuous DRs compare by pointwise dominance of their DR cdfs.
The comparable/incomparable structure is a lattice, not a chain, so every
comparison returns a four-way verdict.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np

from .rearrange import DensityFn, DrCdf, DrPdf, Grid, cdf_of_dr, dr_from_density_1d

__all__ = [
    "OrderVerdict",
    "ProbVector",
    "ProbMatrix",
    "DoublyStochastic",
    "ContractiveMap1D",
    "majorizes_discrete",
    "majorizes_matrix",
    "majorizes_cdf",
    "CdfComparison",
    "compare_cdfs",
    "default_comparison_grid",
    "slice_compare",
    "dilation_witness",
    "schur_preservation_check",
    "contractive_ordering_check",
]

#: normalisation tolerance for probability vectors
PROB_TOL = 1e-12


class OrderVerdict(enum.Enum):
    """Four-way outcome of a majorisation comparison of (first, second)."""

    PRECEDES = "precedes"  # first is majorised by second (more uncertain)
    SUCCEEDS = "succeeds"
    EQUAL = "equal"
    INCOMPARABLE = "incomparable"


class ProbVector:
    """Probability vector: nonnegative entries summing to 1 within 1e-12."""

    def __init__(self, values):
        v = np.asarray(values, dtype=np.float64).ravel()
        if v.size == 0:
            raise ValueError("probability vector must be nonempty")
        if np.any(v < -PROB_TOL):
            raise ValueError("probability entries must be nonnegative")
        total = float(v.sum())
        if abs(total - 1.0) > PROB_TOL:
            raise ValueError(f"probabilities sum to {total!r}, not 1")
        self.values = np.maximum(v, 0.0)

    def __len__(self):
        return self.values.size

    def sorted_desc(self):
        return np.sort(self.values)[::-1]


class ProbMatrix:
    """Joint probability table: nonnegative entries summing to 1 within 1e-12."""

    def __init__(self, values):
        v = np.asarray(values, dtype=np.float64)
        if v.ndim != 2:
            raise ValueError("probability table must be two-dimensional")
        if np.any(v < -PROB_TOL):
            raise ValueError("probability entries must be nonnegative")
        total = float(v.sum())
        if abs(total - 1.0) > PROB_TOL:
            raise ValueError(f"probabilities sum to {total!r}, not 1")
        self.values = np.maximum(v, 0.0)

    def ravel(self):
        return ProbVector(self.values.ravel())


@dataclass
class DoublyStochastic:
    """Square matrix with unit row and column sums (tolerance 1e-10)."""

    matrix: np.ndarray
    n_factors: int = 0

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("doubly stochastic matrix must be square")
        if np.any(m < -1e-12):
            raise ValueError("doubly stochastic entries must be nonnegative")
        if np.max(np.abs(m.sum(axis=0) - 1.0)) > 1e-10:
            raise ValueError("column sums must equal 1")
        if np.max(np.abs(m.sum(axis=1) - 1.0)) > 1e-10:
            raise ValueError("row sums must equal 1")
        self.matrix = m

    def apply(self, vec):
        return self.matrix @ np.asarray(vec, dtype=np.float64)


def _coerce_vec(p):
    return p if isinstance(p, ProbVector) else ProbVector(p)


def _verdict_from_gaps(d, tol):
    if np.max(np.abs(d)) <= tol:
        return OrderVerdict.EQUAL
    if np.min(d) >= -tol:
        return OrderVerdict.PRECEDES
    if np.max(d) <= tol:
        return OrderVerdict.SUCCEEDS
    return OrderVerdict.INCOMPARABLE


def majorizes_discrete(p, q, tol=1e-12):
    """Compare two probability vectors in the majorisation order.

    Vectors of unequal length are zero-padded to a common length.  Returns
    PRECEDES when ``p`` is majorised by ``q`` (every sorted partial sum of
    ``p`` is at most the matching one of ``q``), SUCCEEDS for the reverse,
    EQUAL when the sorted vectors coincide within ``tol``.
    """
    pv = _coerce_vec(p).sorted_desc()
    qv = _coerce_vec(q).sorted_desc()
    n = max(pv.size, qv.size)
    pv = np.pad(pv, (0, n - pv.size))
    qv = np.pad(qv, (0, n - qv.size))
    d = np.cumsum(qv) - np.cumsum(pv)
    if np.max(np.abs(pv - qv)) <= tol:
        return OrderVerdict.EQUAL
    return _verdict_from_gaps(d, tol)


def majorizes_matrix(x, y, tol=1e-12):
    """Majorisation of joint tables: flatten and compare as vectors."""
    xm = x if isinstance(x, ProbMatrix) else ProbMatrix(x)
    ym = y if isinstance(y, ProbMatrix) else ProbMatrix(y)
    return majorizes_discrete(xm.ravel(), ym.ravel(), tol=tol)


def default_comparison_grid(f1, f2, n_uniform=1024, eps=1e-8):
    """Union of both cdfs' knots plus uniform and near-origin points.

    The geometric points matter: cdf pairs can cross inside a thin interval
    near z = 0 that a uniform grid over the full support never samples.
    """
    z_hi = max(f1.effective_support(eps), f2.effective_support(eps))
    parts = [
        np.linspace(0.0, z_hi, int(n_uniform)),
        np.geomspace(z_hi * 1e-9, z_hi, 513),
    ]
    for f in (f1, f2):
        k = f.knots()
        if k is not None:
            parts.append(k[k <= z_hi])
    g = np.unique(np.concatenate(parts))
    return Grid(g)


def majorizes_cdf(f1, f2, grid=None, tol=None):
    """Compare two DR cdfs pointwise on a grid.

    PRECEDES means ``f1`` is majorised by ``f2``: ``F1(z) <= F2(z)``
    everywhere (within ``tol``).  Default tolerance is 1e-9 when both cdfs
    are closed-form and 1e-3 when either is tabulated.
    """
    if not isinstance(f1, DrCdf) or not isinstance(f2, DrCdf):
        raise TypeError("majorizes_cdf expects DrCdf arguments")
    if grid is None:
        grid = default_comparison_grid(f1, f2)
    pts = grid.points if isinstance(grid, Grid) else np.asarray(grid, dtype=np.float64)
    if pts.size < 64:
        raise ValueError("comparison grid too coarse: need at least 64 points")
    if tol is None:
        tol = 1e-9 if (f1.table is None and f2.table is None) else 1e-3
    d = f2(pts) - f1(pts)
    return _verdict_from_gaps(d, tol)


@dataclass(frozen=True)
class CdfComparison:
    """Comparison verdict plus the evidence behind it."""

    verdict: OrderVerdict
    max_gap: float  # largest |F1 - F2| seen on the grid
    crossing_z: tuple  # approximate sign-change locations of F1 - F2


def compare_cdfs(f1, f2, grid=None, tol=None):
    """Like majorizes_cdf, but also reports the gap size and crossings."""
    if not isinstance(f1, DrCdf) or not isinstance(f2, DrCdf):
        raise TypeError("compare_cdfs expects DrCdf arguments")
    if grid is None:
        grid = default_comparison_grid(f1, f2)
    pts = grid.points if isinstance(grid, Grid) else np.asarray(grid, dtype=np.float64)
    if pts.size < 64:
        raise ValueError("comparison grid too coarse: need at least 64 points")
    if tol is None:
        tol = 1e-9 if (f1.table is None and f2.table is None) else 1e-3
    d = f2(pts) - f1(pts)
    crossings = []
    sig = np.abs(d) > tol
    for i in np.nonzero((d[:-1] * d[1:] < 0.0) & (sig[:-1] | sig[1:]))[0]:
        # linear root of the bracketing segment
        crossings.append(
            float(pts[i] - d[i] * (pts[i + 1] - pts[i]) / (d[i + 1] - d[i]))
        )
    return CdfComparison(
        verdict=_verdict_from_gaps(d, tol),
        max_gap=float(np.max(np.abs(d))),
        crossing_z=tuple(crossings),
    )


def _slice_integrals(pdf, c_levels):
    """Integrals of (f - c)_+ over z, one per level c.

    The pdf is reduced to piecewise-linear segments whose area above each
    level is summed exactly.  Closed-form pdfs get sampling nodes adapted
    through the superlevel measure (geometric in value), so regions where
    the DR moves fast in value, such as an unbounded slope at z = 0 or a
    flat maximum, are resolved without a huge uniform grid.
    """
    if pdf.table is None:
        top = pdf.max_value
        z_end = pdf.support_hi()
        floor = min(float(np.min(c_levels)), top * 1e-9)
        u = np.geomspace(floor, top * (1.0 - 1e-12), 8193)
        adapted = np.asarray(pdf.measure_at(u), dtype=np.float64)
        z = np.unique(np.concatenate([adapted, np.linspace(0.0, z_end, 16385)]))
        z = z[(z >= 0.0) & (z <= z_end)]
        z = np.sort(np.concatenate([z, 0.5 * (z[1:] + z[:-1])]))
        v = pdf(z)
    else:
        z = pdf.table.grid
        v = pdf.table.values
    w = np.diff(z)
    v0 = v[:-1]
    v1 = v[1:]
    hi = np.maximum(v0, v1)
    lo = np.minimum(v0, v1)
    out = np.empty(c_levels.size)
    for i, c in enumerate(c_levels):
        above = lo >= c
        area = np.where(above, 0.5 * (v0 + v1) * w - c * w, 0.0)
        straddle = (~above) & (hi > c)
        if np.any(straddle):
            frac = (hi[straddle] - c) / (hi[straddle] - lo[straddle])
            area[straddle] = 0.5 * (hi[straddle] - c) * (w[straddle] * frac)
        out[i] = float(np.sum(area))
    return out


def slice_compare(f1, f2, c_grid=None, tol=None):
    """Compare DR pdfs by the slice functional ``c -> integral of (f - c)_+``.

    Equivalent to cdf dominance; provided as an independent route.  Returns
    the same four-way verdict, PRECEDES meaning ``f1`` is majorised by ``f2``.
    """
    if not isinstance(f1, DrPdf) or not isinstance(f2, DrPdf):
        raise TypeError("slice_compare expects DrPdf arguments")
    if c_grid is None:
        top = max(f1.max_value, f2.max_value)
        c_levels = np.geomspace(top * (1.0 - 1e-9), top * 1e-8, 512)
    else:
        c_levels = c_grid.points if isinstance(c_grid, Grid) else np.asarray(c_grid)
        c_levels = np.asarray(c_levels, dtype=np.float64)
    if np.any(c_levels <= 0):
        raise ValueError("slice levels must be positive")
    if tol is None:
        tol = 1e-6 if (f1.table is None and f2.table is None) else 1e-3
    s1 = _slice_integrals(f1, c_levels)
    s2 = _slice_integrals(f2, c_levels)
    # larger slice integrals everywhere = less uncertain = majorises
    return _verdict_from_gaps(s2 - s1, tol)


def dilation_witness(p, q, tol=1e-13):
    """Construct a doubly stochastic ``P`` with ``p = P q`` for ``p`` majorised by ``q``.

    Classic T-transform construction on the sorted copies: repeatedly average
    the largest remaining surplus coordinate with the first following deficit
    coordinate, which matches at least one coordinate per step and terminates
    within ``n - 1`` transforms.  Permutations conjugate the result back to
    the original orderings.

    Raises if ``p`` is not majorised by ``q``.
    """
    pv = _coerce_vec(p).values
    qv = _coerce_vec(q).values
    if pv.size != qv.size:
        raise ValueError("dilation witness requires equal-length vectors")
    verdict = majorizes_discrete(pv, qv, tol=1e-12)
    if verdict not in (OrderVerdict.PRECEDES, OrderVerdict.EQUAL):
        raise ValueError("no dilation witness: p is not majorised by q")
    n = pv.size
    perm_p = np.argsort(-pv, kind="stable")
    perm_q = np.argsort(-qv, kind="stable")
    x = pv[perm_p]
    y = qv[perm_q].astype(np.float64).copy()
    m = np.eye(n)
    n_factors = 0
    for _ in range(n):
        gaps = y - x
        if np.max(np.abs(gaps)) <= tol:
            break
        surplus = np.nonzero(gaps > tol)[0]
        deficit = np.nonzero(gaps < -tol)[0]
        j = int(surplus[-1])
        after = deficit[deficit > j]
        if after.size == 0:  # pragma: no cover - excluded by the majorisation check
            raise ValueError("no dilation witness: p is not majorised by q")
        k = int(after[0])
        delta = min(y[j] - x[j], x[k] - y[k])
        lam = 1.0 - delta / (y[j] - y[k])
        t = np.eye(n)
        t[j, j] = t[k, k] = lam
        t[j, k] = t[k, j] = 1.0 - lam
        y = t @ y
        m = t @ m
        n_factors += 1
    # p = Pi_p^T  M  Pi_q  q  with Pi selecting the sorted orders
    pi_p = np.zeros((n, n))
    pi_p[np.arange(n), perm_p] = 1.0
    pi_q = np.zeros((n, n))
    pi_q[np.arange(n), perm_q] = 1.0
    full = pi_p.T @ m @ pi_q
    return DoublyStochastic(full, n_factors=n_factors)


def schur_preservation_check(p, q, functional, slack=1e-12):
    """Whether a (Schur-concave) functional ranks ``p`` at or above ``q``.

    Requires ``p`` majorised by ``q`` (or equal); raises on incomparable or
    reversed inputs.
    """
    verdict = majorizes_discrete(p, q)
    if verdict not in (OrderVerdict.PRECEDES, OrderVerdict.EQUAL):
        raise ValueError("schur check requires p majorised by q")
    hp = float(functional(_coerce_vec(p).values))
    hq = float(functional(_coerce_vec(q).values))
    return hp >= hq - slack


class ContractiveMap1D:
    """Differentiable map with ``0 < |h'| <= 1`` on the support of interest."""

    def __init__(self, h, dh=None, name=""):
        self.h = h
        self.dh = dh
        self.name = name

    def __call__(self, x):
        return np.asarray(self.h(np.asarray(x, dtype=np.float64)), dtype=np.float64)

    def jacobian(self, x):
        x = np.asarray(x, dtype=np.float64)
        if self.dh is not None:
            return np.asarray(self.dh(x), dtype=np.float64)
        span = max(float(np.max(x) - np.min(x)), 1.0)
        e = span * 6e-6
        return (self(x + e) - self(x - e)) / (2.0 * e)

    def jacobian_range(self, lo, hi, n=10000):
        x = np.linspace(lo, hi, int(n))
        j = np.abs(self.jacobian(x))
        return float(j.min()), float(j.max())


def contractive_ordering_check(f, h, m_thresholds=8192, tol=None):
    """Verdict of ``X`` against ``h(X)`` in the majorisation order.

    ``h`` must be invertible and volume-contractive (``0 < |h'| <= 1``) on
    the support of ``f``; a contraction concentrates mass, so the expected
    verdict is PRECEDES (or EQUAL for a rigid motion).
    """
    if not isinstance(f, DensityFn) or f.dim != 1:
        raise TypeError("contractive_ordering_check expects a univariate DensityFn")
    if not isinstance(h, ContractiveMap1D):
        h = ContractiveMap1D(h)
    lo, hi = f.support[0]
    jmin, jmax = h.jacobian_range(lo, hi)
    # 1e-6 slack absorbs finite-difference noise when dh is not supplied
    if jmax > 1.0 + 1e-6:
        raise ValueError(f"not contractive: sampled |h'| reaches {jmax:.6g} > 1")
    if jmin <= 1e-12:
        raise ValueError("map is not invertible on the support (|h'| vanishes)")
    x = np.linspace(lo, hi, 8193)
    hx = h(x)
    dhx = h.jacobian(x)
    if not (np.all(np.diff(hx) > 0) or np.all(np.diff(hx) < 0)):
        raise ValueError("map is not monotone on the support")
    order = np.argsort(hx)
    y_grid = hx[order]
    g_vals = (f.eval(x) / np.abs(dhx))[order]

    def pushforward(y):
        return np.interp(y, y_grid, g_vals)

    g = DensityFn.from_univariate(
        pushforward, float(y_grid[0]), float(y_grid[-1]), integral_tol=None
    )
    fd = dr_from_density_1d(f, m_thresholds=m_thresholds)
    gd = dr_from_density_1d(g, m_thresholds=m_thresholds)
    return majorizes_cdf(cdf_of_dr(fd), cdf_of_dr(gd), tol=tol)
