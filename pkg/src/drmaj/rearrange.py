"""Decreasing rearrangements of univariate densities.

The decreasing rearrangement (DR) of a density ``f`` is the nonincreasing
function ``f~`` on ``[0, inf)`` sharing the value distribution of ``f``: for
every threshold ``y`` the superlevel sets ``{f >= y}`` and ``{f~ >= y}`` have
the same Lebesgue measure.  The measure function ``m(y) = |{f >= y}|`` is the
generalised inverse of ``f~``, so rearrangement reduces to computing ``m`` on
a threshold grid and swapping axes.

This module provides the carriers (grids, tabulated monotone functions,
densities, measure functions, DR pdfs and DR cdfs), the rearrangement and
integration operations, and lossless JSON/CSV serialisation for tabulated
functions.
"""

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Grid",
    "TabulatedFn",
    "DensityFn",
    "MeasureFn",
    "DrPdf",
    "DrCdf",
    "measure_function",
    "dr_from_density_1d",
    "cdf_of_dr",
    "functional_inverse",
    "pdf_of_cdf",
    "eval_pdf",
    "eval_cdf",
]

#: minimum gap between tabulated knots; steps are stored as two knots this far apart
KNOT_GAP = 1e-12

#: tolerance for monotonicity validation of tabulated data
MONOTONE_TOL = 1e-12

_INTEGRAL_CHECK_SEED = 202406


def _asarray1d(x, name="array"):
    a = np.asarray(x, dtype=np.float64)
    if a.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    return a


# ---------------------------------------------------------------------------
# grids and tabulated functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Grid:
    """Strictly increasing, finite evaluation grid."""

    points: np.ndarray

    def __post_init__(self):
        pts = _asarray1d(self.points, "grid points")
        if pts.size < 2:
            raise ValueError("grid needs at least 2 points")
        if not np.all(np.isfinite(pts)):
            raise ValueError("grid points must be finite")
        if np.any(np.diff(pts) <= 0):
            raise ValueError("grid points must be strictly increasing")
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return self.points.size

    @classmethod
    def uniform(cls, lo, hi, n):
        return cls(np.linspace(lo, hi, int(n)))

    @classmethod
    def geometric(cls, lo, hi, n):
        if lo <= 0 or hi <= 0:
            raise ValueError("geometric grid requires positive endpoints")
        return cls(np.geomspace(lo, hi, int(n)))


class TabulatedFn:
    """Piecewise-linear function given by knots and values.

    Parameters
    ----------
    grid : array_like
        Strictly increasing abscissae.  Step discontinuities are represented
        by two knots ``KNOT_GAP`` apart rather than duplicated abscissae.
    values : array_like
        Function values at the knots.
    monotone : {'nonincreasing', 'nondecreasing', 'none'}
        Declared monotonicity, validated with tolerance ``MONOTONE_TOL``.
    """

    def __init__(self, grid, values, monotone="none"):
        g = _asarray1d(grid, "grid")
        v = _asarray1d(values, "values")
        if g.size != v.size:
            raise ValueError("grid and values must have the same length")
        if g.size < 2:
            raise ValueError("tabulated function needs at least 2 knots")
        if not (np.all(np.isfinite(g)) and np.all(np.isfinite(v))):
            raise ValueError("grid and values must be finite")
        if np.any(np.diff(g) <= 0):
            raise ValueError("grid must be strictly increasing")
        if monotone not in ("nonincreasing", "nondecreasing", "none"):
            raise ValueError(f"unknown monotonicity tag {monotone!r}")
        if monotone == "nonincreasing" and np.any(np.diff(v) > MONOTONE_TOL):
            raise ValueError("values are not nonincreasing within tolerance")
        if monotone == "nondecreasing" and np.any(np.diff(v) < -MONOTONE_TOL):
            raise ValueError("values are not nondecreasing within tolerance")
        self.grid = g
        self.values = v
        self.monotone = monotone

    def __call__(self, z):
        return np.interp(z, self.grid, self.values)

    def __len__(self):
        return self.grid.size

    def __eq__(self, other):
        if not isinstance(other, TabulatedFn):
            return NotImplemented
        return (
            self.monotone == other.monotone
            and self.grid.size == other.grid.size
            and np.array_equal(self.grid, other.grid)
            and np.array_equal(self.values, other.values)
        )

    # -- serialisation ------------------------------------------------------

    def to_json_dict(self):
        return {
            "grid": self.grid.tolist(),
            "values": self.values.tolist(),
            "monotone": self.monotone,
        }

    @classmethod
    def from_json_dict(cls, d):
        return cls(d["grid"], d["values"], d.get("monotone", "none"))

    def to_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh)

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            return cls.from_json_dict(json.load(fh))

    def to_csv(self, path, monotone_comment=True):
        # 17 significant digits round-trips IEEE doubles exactly
        with open(path, "w", newline="") as fh:
            if monotone_comment:
                fh.write(f"# monotone: {self.monotone}\n")
            writer = csv.writer(fh)
            writer.writerow(["z", "value"])
            for z, v in zip(self.grid, self.values):
                writer.writerow([format(z, ".17g"), format(v, ".17g")])

    @classmethod
    def from_csv(cls, path):
        monotone = "none"
        with open(path, newline="") as fh:
            text = fh.read()
        lines = []
        for line in io.StringIO(text):
            if line.startswith("#"):
                if "monotone:" in line:
                    monotone = line.split("monotone:")[1].strip()
                continue
            lines.append(line)
        reader = csv.reader(io.StringIO("".join(lines)))
        header = next(reader)
        if [h.strip() for h in header] != ["z", "value"]:
            raise ValueError("expected 'z,value' header")
        rows = [(float(r[0]), float(r[1])) for r in reader if r]
        grid = [r[0] for r in rows]
        values = [r[1] for r in rows]
        return cls(grid, values, monotone)


def load_tabulated(path):
    """Load a TabulatedFn from a .json or .csv file (detected by suffix)."""
    p = str(path)
    if p.endswith(".json"):
        return TabulatedFn.from_json(p)
    if p.endswith(".csv"):
        return TabulatedFn.from_csv(p)
    raise ValueError(f"unrecognised table format: {p}")


# ---------------------------------------------------------------------------
# densities
# ---------------------------------------------------------------------------


class DensityFn:
    """Nonnegative density on a finite box.

    Parameters
    ----------
    dim : int
        Number of coordinates.
    fn : callable
        Vectorised evaluator mapping a ``(k, dim)`` array to ``(k,)`` values.
        For ``dim == 1`` a plain ``(k,) -> (k,)`` callable is also accepted.
    support : array_like
        ``(dim, 2)`` finite per-dimension bounds.
    integral_tol : float or None
        Monte Carlo integral check tolerance at construction (default 5e-2
        with a fixed internal seed); ``None`` skips the check.
    """

    def __init__(self, dim, fn, support, integral_tol=5e-2, mc_budget=65536, name=""):
        self.dim = int(dim)
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        support = np.asarray(support, dtype=np.float64).reshape(self.dim, 2)
        if not np.all(np.isfinite(support)):
            raise ValueError("unbounded support requires explicit truncation")
        if np.any(support[:, 1] <= support[:, 0]):
            raise ValueError("support bounds must satisfy lo < hi")
        self.support = support
        self._fn = fn
        self.name = name
        if integral_tol is not None:
            est = self._mc_integral(mc_budget)
            if abs(est - 1.0) > integral_tol:
                raise ValueError(
                    f"density integral check failed: MC estimate {est:.4f} "
                    f"differs from 1 by more than {integral_tol}"
                )

    @classmethod
    def from_univariate(cls, fn, lo, hi, **kw):
        return cls(1, fn, [[lo, hi]], **kw)

    def eval(self, points):
        pts = np.asarray(points, dtype=np.float64)
        if pts.ndim == 1:
            if self.dim == 1:
                out = self._eval1d(pts)
                return np.asarray(out, dtype=np.float64)
            pts = pts.reshape(1, -1)
        if pts.shape[1] != self.dim:
            raise ValueError(f"points must have {self.dim} columns")
        if self.dim == 1:
            out = self._eval1d(pts[:, 0])
        else:
            out = self._fn(pts)
        return np.asarray(out, dtype=np.float64)

    def _eval1d(self, z):
        try:
            return self._fn(z)
        except (TypeError, ValueError, IndexError):
            return self._fn(z.reshape(-1, 1))

    __call__ = eval

    def volume(self):
        return float(np.prod(self.support[:, 1] - self.support[:, 0]))

    def _mc_integral(self, budget):
        rng = np.random.Generator(np.random.Philox(key=_INTEGRAL_CHECK_SEED))
        u = rng.random((int(budget), self.dim))
        pts = self.support[:, 0] + u * (self.support[:, 1] - self.support[:, 0])
        vals = self.eval(pts if self.dim > 1 else pts[:, 0])
        if np.any(vals < -1e-12):
            raise ValueError("density takes negative values")
        return float(np.mean(vals) * self.volume())


# ---------------------------------------------------------------------------
# measure functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MeasureFn:
    """Superlevel-set measures ``m(y) = |{f >= y}|`` on a decreasing threshold grid."""

    thresholds: np.ndarray  # strictly decreasing, positive
    measures: np.ndarray  # nondecreasing in stored order

    def __post_init__(self):
        t = _asarray1d(self.thresholds, "thresholds")
        m = _asarray1d(self.measures, "measures")
        if t.size != m.size:
            raise ValueError("thresholds and measures must have the same length")
        if np.any(t <= 0):
            raise ValueError("thresholds must be positive")
        if np.any(np.diff(t) >= 0):
            raise ValueError("thresholds must be strictly decreasing")
        if np.any(np.diff(m) < -MONOTONE_TOL):
            raise ValueError("measures must be nondecreasing as thresholds fall")
        if np.any(m < -MONOTONE_TOL):
            raise ValueError("measures must be nonnegative")
        object.__setattr__(self, "thresholds", t)
        object.__setattr__(self, "measures", np.maximum(m, 0.0))

    def __call__(self, y):
        # thresholds are stored descending; interp wants ascending
        return np.interp(y, self.thresholds[::-1], self.measures[::-1])


def _superlevel_measures(z, fz, thresholds):
    """Measures of ``{f >= y}`` for the piecewise-linear interpolant of samples.

    ``z`` are strictly increasing sample abscissae, ``fz`` the sampled values
    and ``thresholds`` an array of positive levels (any order).  Each sample
    cell contributes ``w * clip((hi - y)/(hi - lo), 0, 1)``; the sum over cells
    is evaluated for all thresholds at once with sorted prefix sums.
    """
    w = np.diff(z)
    lo = np.minimum(fz[:-1], fz[1:])
    hi = np.maximum(fz[:-1], fz[1:])
    y = np.asarray(thresholds, dtype=np.float64)

    flat = hi - lo <= 0.0
    out = np.zeros(y.shape, dtype=np.float64)

    if np.any(flat):
        fv = lo[flat]
        fw = w[flat]
        order = np.argsort(fv, kind="stable")
        fv = fv[order]
        suffix = np.concatenate([np.cumsum(fw[order][::-1])[::-1], [0.0]])
        idx = np.searchsorted(fv, y, side="left")
        out += suffix[idx]

    if np.any(~flat):
        nl = lo[~flat]
        nh = hi[~flat]
        nw = w[~flat]
        delta = nh - nl
        a = nw * nh / delta
        b = nw / delta

        order_lo = np.argsort(nl, kind="stable")
        lo_sorted = nl[order_lo]
        w_by_lo = np.concatenate([np.cumsum(nw[order_lo][::-1])[::-1], [0.0]])
        a_by_lo = np.concatenate([np.cumsum(a[order_lo][::-1])[::-1], [0.0]])
        b_by_lo = np.concatenate([np.cumsum(b[order_lo][::-1])[::-1], [0.0]])

        order_hi = np.argsort(nh, kind="stable")
        hi_sorted = nh[order_hi]
        a_by_hi = np.concatenate([np.cumsum(a[order_hi][::-1])[::-1], [0.0]])
        b_by_hi = np.concatenate([np.cumsum(b[order_hi][::-1])[::-1], [0.0]])

        i_lo = np.searchsorted(lo_sorted, y, side="left")  # cells with lo >= y
        i_hi = np.searchsorted(hi_sorted, y, side="right")  # cells with hi > y

        full = w_by_lo[i_lo]
        ramp = (a_by_hi[i_hi] - y * b_by_hi[i_hi]) - (a_by_lo[i_lo] - y * b_by_lo[i_lo])
        out += full + np.maximum(ramp, 0.0)

    return out


def measure_function(f, thresholds, n_samples=32769):
    """Compute the measure function of a univariate density.

    Parameters
    ----------
    f : DensityFn
        Univariate density with finite support.
    thresholds : Grid or array_like
        Positive threshold levels; stored in decreasing order.
    n_samples : int
        Resolution of the sign-constant interval subdivision of the support.

    Returns
    -------
    MeasureFn
    """
    if not isinstance(f, DensityFn):
        raise TypeError("measure_function expects a DensityFn")
    if f.dim != 1:
        raise ValueError("measure_function is defined for univariate densities")
    pts = thresholds.points if isinstance(thresholds, Grid) else _asarray1d(thresholds)
    lo, hi = f.support[0]
    z = np.linspace(lo, hi, int(n_samples))
    fz = f.eval(z)
    maxf = float(fz.max())
    if np.any(pts <= 0):
        raise ValueError("thresholds must lie in (0, max f]")
    if np.any(pts > maxf * (1 + 1e-9)):
        raise ValueError("thresholds must lie in (0, max f]")
    desc = np.sort(pts)[::-1]
    m = _superlevel_measures(z, fz, desc)
    m = np.maximum.accumulate(m)  # guard fp wobble; mathematically nondecreasing
    return MeasureFn(desc, m)


# ---------------------------------------------------------------------------
# DR pdf / cdf carriers
# ---------------------------------------------------------------------------


def _probe_grid(z_hi, n=2049):
    return np.linspace(0.0, z_hi, n)


def _concave_flag(z, v):
    # slope differences across near-duplicate knots are pure fp noise, so
    # coarsen to gaps of at least 1e-7 of the span before testing
    span = max(float(z[-1] - z[0]), 1e-300)
    kept = [0]
    for i in range(1, z.size):
        if z[i] - z[kept[-1]] > span * 1e-7:
            kept.append(i)
    if kept[-1] != z.size - 1:
        kept[-1] = z.size - 1
    zz = z[kept]
    vv = v[kept]
    if zz.size < 3:
        return True
    slopes = np.diff(vv) / np.diff(zz)
    return bool(np.all(np.diff(slopes) <= 1e-9 * max(slopes.max(), 1.0)))


class DrPdf:
    """Decreasing rearrangement of a density: a nonincreasing pdf on ``[0, z_max]``.

    Exactly one of ``table`` (a nonincreasing TabulatedFn) or ``fn`` (a closed
    form evaluator) must be given.  Closed forms may carry an exact
    ``inverse`` callable mapping a density value to the superlevel measure;
    tabulated representations invert by interpolation.

    Evaluation at negative ``z`` raises; beyond ``z_max`` the pdf is 0.
    """

    def __init__(
        self,
        table=None,
        fn=None,
        z_max=None,
        inverse=None,
        mass_tol=1e-6,
        probe_hi=None,
        name="",
    ):
        if (table is None) == (fn is None):
            raise ValueError("provide exactly one of table or fn")
        self.name = name
        self.inverse = inverse
        if table is not None:
            if table.monotone != "nonincreasing":
                table = TabulatedFn(table.grid, table.values, "nonincreasing")
            if table.grid[0] != 0.0:
                raise ValueError("DR pdf tables must start at z = 0")
            if np.any(table.values < -MONOTONE_TOL):
                raise ValueError("DR pdf values must be nonnegative")
            self.table = table
            self.fn = None
            self.z_max = float(table.grid[-1])
            self.max_value = float(table.values[0])
            if mass_tol is not None:
                mass = float(np.trapezoid(table.values, table.grid))
                if abs(mass - 1.0) > mass_tol:
                    raise ValueError(
                        f"tabulated DR pdf mass {mass:.6g} differs from 1 "
                        f"by more than {mass_tol}"
                    )
        else:
            if z_max is None:
                raise ValueError("closed-form DR pdf requires z_max")
            self.table = None
            self.fn = fn
            self.z_max = float(z_max)
            if probe_hi is None:
                if math.isfinite(self.z_max):
                    probe_hi = self.z_max
                elif inverse is not None:
                    probe_hi = float(inverse(float(fn(np.array([0.0]))[0]) * 1e-12))
                else:
                    raise ValueError("probe_hi required for closed forms on [0, inf)")
            self.probe_hi = float(probe_hi)
            zp = _probe_grid(self.probe_hi)
            vp = self._eval_fn(zp)
            if np.any(vp < -1e-12):
                raise ValueError("DR pdf values must be nonnegative")
            scale = max(float(vp[0]), 1.0)
            if np.any(np.diff(vp) > 1e-9 * scale):
                raise ValueError("DR pdf must be nonincreasing")
            self.max_value = float(vp[0])

    def _eval_fn(self, z):
        out = np.asarray(self.fn(z), dtype=np.float64)
        if math.isfinite(self.z_max):
            out = np.where(np.asarray(z) > self.z_max, 0.0, out)
        return out

    def __call__(self, z):
        zz = np.asarray(z, dtype=np.float64)
        scalar = zz.ndim == 0
        zz = np.atleast_1d(zz)
        if np.any(zz < 0):
            raise ValueError("DR pdf is defined for z >= 0")
        if self.table is not None:
            out = np.interp(zz, self.table.grid, self.table.values, right=0.0)
        else:
            out = self._eval_fn(zz)
        return float(out[0]) if scalar else out

    def measure_at(self, v):
        """Superlevel measure ``|{f~ >= v}|``, the generalised inverse of the pdf.

        Values above the maximum map to 0; values below the tabulated range
        map to the end of the table.
        """
        vv = np.atleast_1d(np.asarray(v, dtype=np.float64))
        if self.inverse is not None:
            out = np.maximum(np.asarray(self.inverse(vv), dtype=np.float64), 0.0)
        elif self.table is not None:
            out = np.interp(vv, self.table.values[::-1], self.table.grid[::-1])
        else:
            zp = _probe_grid(self.probe_hi, 8193)
            vp = self._eval_fn(zp)
            out = np.interp(vv, vp[::-1], zp[::-1])
        return out if np.asarray(v).ndim else float(out[0])

    def tabulated(self, n=4096, z_hi=None):
        """Sample the pdf on a uniform grid as a TabulatedFn."""
        if z_hi is None:
            z_hi = self.z_max if math.isfinite(self.z_max) else self.probe_hi
        z = np.linspace(0.0, z_hi, int(n))
        vals = self(z)
        vals = np.minimum.accumulate(vals)  # fp guard
        return TabulatedFn(z, vals, "nonincreasing")

    def support_hi(self):
        """A finite z beyond which the pdf is numerically negligible."""
        if self.table is not None:
            return float(self.table.grid[-1])
        if math.isfinite(self.z_max):
            return self.z_max
        return self.probe_hi


class DrCdf:
    """Integral of a DR pdf: a nondecreasing cdf with ``F(0) = 0`` and sup 1.

    ``concave`` reports whether the tabulated or probed slopes are
    nonincreasing; construction enforces it only when ``require_concave``.
    Lattice joins of crossing cdfs are the one legitimate source of
    non-concave instances.
    """

    def __init__(
        self,
        table=None,
        fn=None,
        pdf=None,
        inverse=None,
        z_hi=None,
        z_max=None,
        require_concave=True,
        name="",
    ):
        if (table is None) == (fn is None):
            raise ValueError("provide exactly one of table or fn")
        self.name = name
        self.pdf = pdf
        self.inverse = inverse
        self.z_max = float(z_max) if z_max is not None else math.inf
        if table is not None:
            if table.monotone != "nondecreasing":
                table = TabulatedFn(table.grid, table.values, "nondecreasing")
            if table.grid[0] != 0.0:
                raise ValueError("DR cdf tables must start at z = 0")
            if abs(table.values[0]) > 1e-9:
                raise ValueError("DR cdf must satisfy F(0) = 0")
            top = float(table.values[-1])
            if not (1.0 - 1e-6 < top <= 1.0 + 1e-9):
                raise ValueError(f"DR cdf sup {top:.8f} is not within 1e-6 of 1")
            self.table = table
            self.fn = None
            self.z_hi = float(table.grid[-1])
            self.concave = _concave_flag(table.grid, table.values)
        else:
            if z_hi is None:
                raise ValueError("closed-form DR cdf requires z_hi with F(z_hi) ~ 1")
            self.table = None
            self.fn = fn
            self.z_hi = float(z_hi)
            f0 = float(np.atleast_1d(fn(np.array([0.0])))[0])
            ftop = float(np.atleast_1d(fn(np.array([self.z_hi])))[0])
            if abs(f0) > 1e-9:
                raise ValueError("DR cdf must satisfy F(0) = 0")
            if not (1.0 - 1e-6 < ftop <= 1.0 + 1e-9):
                raise ValueError(f"DR cdf value {ftop:.8f} at z_hi is not within 1e-6 of 1")
            zp = _probe_grid(self.z_hi)
            vp = np.asarray(fn(zp), dtype=np.float64)
            if np.any(np.diff(vp) < -1e-12):
                raise ValueError("DR cdf must be nondecreasing")
            slopes = np.diff(vp) / np.diff(zp)
            self.concave = bool(np.all(np.diff(slopes) <= 1e-9 * max(slopes.max(), 1.0)))
        if require_concave and not self.concave:
            raise ValueError("DR cdf is not concave; pass require_concave=False to allow")

    def __call__(self, z):
        zz = np.asarray(z, dtype=np.float64)
        scalar = zz.ndim == 0
        zz = np.atleast_1d(zz)
        if np.any(zz < 0):
            raise ValueError("DR cdf is defined for z >= 0")
        if self.table is not None:
            out = np.interp(zz, self.table.grid, self.table.values)
        else:
            capped = np.minimum(zz, self.z_max) if math.isfinite(self.z_max) else zz
            out = np.asarray(self.fn(capped), dtype=np.float64)
        return float(out[0]) if scalar else out

    def quantile_at(self, p):
        """Smallest z with ``F(z) >= p`` (interpolated)."""
        pp = np.atleast_1d(np.asarray(p, dtype=np.float64))
        if np.any((pp < 0) | (pp > 1)):
            raise ValueError("quantile levels must lie in [0, 1]")
        if self.inverse is not None:
            out = np.asarray(self.inverse(pp), dtype=np.float64)
        elif self.table is not None:
            out = np.interp(pp, self.table.values, self.table.grid)
        else:
            out = _bisect_increasing(self.fn, pp, 0.0, self.z_hi)
        return out if np.asarray(p).ndim else float(out[0])

    def effective_support(self, eps=1e-8):
        """z at which the cdf first reaches ``1 - eps``."""
        if self.table is not None:
            vals = self.table.values
            idx = int(np.searchsorted(vals, 1.0 - eps, side="left"))
            idx = min(idx, vals.size - 1)
            return float(self.table.grid[idx])
        hi = self.z_hi
        for _ in range(200):
            if float(np.atleast_1d(self.fn(np.array([hi])))[0]) >= 1.0 - eps:
                break
            hi *= 2.0
        out = _bisect_increasing(self.fn, np.array([1.0 - eps]), 0.0, hi)
        return float(out[0])

    def tabulated(self, n=4096, z_hi=None):
        if z_hi is None:
            z_hi = self.z_hi
        z = np.linspace(0.0, z_hi, int(n))
        vals = self(z)
        vals = np.maximum.accumulate(np.clip(vals, 0.0, 1.0))
        return TabulatedFn(z, vals, "nondecreasing")

    def knots(self):
        return self.table.grid if self.table is not None else None


def _bisect_increasing(fn, targets, lo, hi, iters=80):
    lo_arr = np.full_like(targets, lo, dtype=np.float64)
    hi_arr = np.full_like(targets, hi, dtype=np.float64)
    for _ in range(iters):
        mid = 0.5 * (lo_arr + hi_arr)
        vals = np.asarray(fn(mid), dtype=np.float64)
        go_right = vals < targets
        lo_arr = np.where(go_right, mid, lo_arr)
        hi_arr = np.where(go_right, hi_arr, mid)
    return 0.5 * (lo_arr + hi_arr)


# ---------------------------------------------------------------------------
# rearrangement
# ---------------------------------------------------------------------------


def _swap_axes_to_table(measures, thresholds, max_value):
    """Turn (threshold, measure) samples into a strictly increasing DR table."""
    zs = [0.0]
    vs = [max_value]
    n = measures.size
    i = 0
    while i < n:
        j = i
        while j + 1 < n and measures[j + 1] - measures[i] <= 0.0:
            j += 1
        # run i..j shares one measure; keep the entry values at both ends
        z = float(measures[i])
        if z > zs[-1]:
            zs.append(z)
            vs.append(float(thresholds[i]))
        if j > i:
            zs.append(max(z, zs[-1]) + KNOT_GAP)
            vs.append(float(thresholds[j]))
        i = j + 1
    zs = np.asarray(zs)
    vs = np.asarray(vs)
    # enforce strictly increasing abscissae
    for k in range(1, zs.size):
        if zs[k] <= zs[k - 1]:
            zs[k] = zs[k - 1] + KNOT_GAP
    vs = np.minimum.accumulate(vs)
    return TabulatedFn(zs, vs, "nonincreasing")


def dr_from_density_1d(f, m_thresholds=16384, n_samples=32769, normalize=True):
    """Decreasing rearrangement of a univariate density.

    Thresholds are placed geometrically between ``max f * (1 - 1e-6)`` and
    ``max f * 1e-6``; the superlevel measure at each threshold is computed by
    subdividing the support into sign-constant intervals of ``f - y`` at
    ``n_samples`` resolution, and the (measure, threshold) pairs are swapped
    into a tabulated nonincreasing pdf.

    Parameters
    ----------
    f : DensityFn
        Univariate density on a finite interval.
    m_thresholds : int
        Number of thresholds (at least 8).
    n_samples : int
        Support subdivision resolution.
    normalize : bool
        Rescale the table to unit mass after the preservation check.

    Returns
    -------
    DrPdf
    """
    if not isinstance(f, DensityFn):
        raise TypeError("dr_from_density_1d expects a DensityFn")
    if f.dim != 1:
        raise ValueError("dr_from_density_1d is defined for univariate densities")
    m_thresholds = int(m_thresholds)
    if m_thresholds < 8:
        raise ValueError("insufficient resolution: m_thresholds must be >= 8")
    lo, hi = f.support[0]
    z = np.linspace(lo, hi, int(n_samples))
    fz = np.asarray(f.eval(z), dtype=np.float64)
    if np.any(fz < -1e-12):
        raise ValueError("density takes negative values")
    fz = np.maximum(fz, 0.0)
    maxf = float(fz.max())
    if maxf <= 0:
        raise ValueError("density is identically zero on its support")
    thresholds = np.geomspace(maxf * (1.0 - 1e-6), maxf * 1e-6, m_thresholds)
    measures = _superlevel_measures(z, fz, thresholds)
    measures = np.maximum.accumulate(measures)
    table = _swap_axes_to_table(measures, thresholds, maxf)

    ref_mass = float(np.trapezoid(fz, z))
    mass = float(np.trapezoid(table.values, table.grid))
    if abs(mass - ref_mass) > 1e-4:
        raise ValueError(
            f"rearrangement does not preserve mass: {mass:.6g} vs {ref_mass:.6g}"
        )
    if normalize:
        table = TabulatedFn(table.grid, table.values / mass, "nonincreasing")
        return DrPdf(table=table, name=f.name and f"dr({f.name})")
    return DrPdf(table=table, mass_tol=None, name=f.name and f"dr({f.name})")


def cdf_of_dr(f, grid=None):
    """Integrate a DR pdf into its DR cdf.

    Cumulative trapezoidal integration on ``grid`` (default: the pdf's own
    knots for tabulated pdfs), clamped monotone.  The total must land within
    1e-4 of 1; the curve is then rescaled to end exactly at 1.

    Returns
    -------
    DrCdf
        Carries the source pdf in its ``pdf`` attribute.
    """
    if not isinstance(f, DrPdf):
        raise TypeError("cdf_of_dr expects a DrPdf")
    if grid is None:
        if f.table is not None:
            z = f.table.grid
        else:
            z = np.linspace(0.0, f.support_hi(), 16385)
    else:
        z = grid.points if isinstance(grid, Grid) else _asarray1d(grid)
        if z[0] != 0.0:
            z = np.concatenate([[0.0], z[z > 0]])
    vals = f(z)
    increments = 0.5 * (vals[1:] + vals[:-1]) * np.diff(z)
    cum = np.concatenate([[0.0], np.cumsum(increments)])
    cum = np.maximum.accumulate(cum)
    total = float(cum[-1])
    if abs(total - 1.0) > 1e-4:
        raise ValueError(f"cdf total {total:.6g} is not within 1e-4 of 1; extend the grid")
    cum /= total
    table = TabulatedFn(z, np.clip(cum, 0.0, 1.0), "nondecreasing")
    return DrCdf(table=table, pdf=f, name=f.name and f"cdf({f.name})")


def pdf_of_cdf(F, n=4097):
    """Recover a step DR pdf from a concave piecewise-linear DR cdf.

    The derivative of a concave piecewise-linear cdf is a nonincreasing step
    function; steps are stored with the adjacent-knot convention.
    """
    if not isinstance(F, DrCdf):
        raise TypeError("pdf_of_cdf expects a DrCdf")
    if F.table is None:
        table = F.tabulated(n)
    else:
        table = F.table
    g = table.grid
    v = table.values
    slopes = np.diff(v) / np.diff(g)
    slopes = np.maximum(slopes, 0.0)
    if np.any(np.diff(slopes) > 1e-9 * max(float(slopes.max()), 1.0)):
        raise ValueError("cdf is not concave; its derivative is not a DR pdf")
    slopes = np.minimum.accumulate(slopes)
    zs = [0.0]
    vs = [float(slopes[0])]
    for k in range(1, slopes.size):
        zs.append(float(g[k]))
        vs.append(float(slopes[k - 1]))
        zs.append(float(g[k]) + KNOT_GAP)
        vs.append(float(slopes[k]))
    zs.append(float(g[-1]))
    vs.append(float(slopes[-1]))
    zs = np.asarray(zs)
    for k in range(1, zs.size):
        if zs[k] <= zs[k - 1]:
            zs[k] = zs[k - 1] + KNOT_GAP
    table = TabulatedFn(zs, np.asarray(vs), "nonincreasing")
    return DrPdf(table=table, mass_tol=1e-3, name=F.name and f"pdf({F.name})")


def functional_inverse(g):
    """Invert a strictly monotone TabulatedFn by swapping grid and values.

    Consecutive ties in the values are collapsed first (keeping the knot at
    the far edge of each flat run, matching superlevel-measure semantics for
    nonincreasing input and quantile semantics for nondecreasing input).
    """
    if not isinstance(g, TabulatedFn):
        raise TypeError("functional_inverse expects a TabulatedFn")
    if g.monotone == "none":
        raise ValueError("inverse undefined: function is not declared monotone")
    vals = g.values
    grid = g.grid
    keep = np.ones(vals.size, dtype=bool)
    if g.monotone == "nonincreasing":
        keep[:-1] = np.diff(vals) < 0
        if np.any(np.diff(vals) > MONOTONE_TOL):
            raise ValueError("inverse undefined: function is not monotone")
        new_grid = vals[keep][::-1]
        new_vals = grid[keep][::-1]
    else:
        keep[1:] = np.diff(vals) > 0
        if np.any(np.diff(vals) < -MONOTONE_TOL):
            raise ValueError("inverse undefined: function is not monotone")
        new_grid = vals[keep]
        new_vals = grid[keep]
    if new_grid.size < 2:
        raise ValueError("inverse undefined: function is constant")
    if np.any(np.diff(new_grid) <= 0):
        # collapse any residual fp-equal values
        uniq, idx = np.unique(new_grid, return_index=True)
        new_grid = uniq
        new_vals = new_vals[idx]
    return TabulatedFn(new_grid, new_vals, g.monotone)


def eval_pdf(f, z):
    """Evaluate a DR pdf (error for z < 0; zero beyond the table)."""
    return f(z)


def eval_cdf(F, z):
    """Evaluate a DR cdf (error for z < 0; final value beyond the table)."""
    return F(z)
