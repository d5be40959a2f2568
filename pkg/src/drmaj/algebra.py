"""Mixing and tropical-algebra operations on decreasing rearrangements.

Inverse mixing adds the superlevel measures of weight-scaled components and
inverts back to a density: the alpha-mix of DRs f1, f2 has measure
``m(v) = m1(v / (1 - alpha)) + m2(v / alpha)``.  Direct mixing averages the
measures at unscaled values, ``(1 - alpha) m1(v) + alpha m2(v)``.  Measures
are clamped at 0 above each component's maximum, which is what produces the
kinks when the component maxima differ.

On DR cdfs, ``otimes`` is equal-weight inverse mixing, ``join``/``meet`` are
the pointwise lattice operations, and ``otimes_power`` applies the dilation
rule F(z/k).  A small expression language composes these from family specs
or tabulated files.
"""

import math
import os
import re
from dataclasses import dataclass

import numpy as np

from .families import dr_family, parse_family
from .order import default_comparison_grid
from .rearrange import (
    DensityFn,
    DrCdf,
    DrPdf,
    TabulatedFn,
    _swap_axes_to_table,
    cdf_of_dr,
    dr_from_density_1d,
    load_tabulated,
    pdf_of_cdf,
)

__all__ = [
    "MixWeight",
    "inverse_mix",
    "inverse_mix_many",
    "direct_mix",
    "inverse_mix_discrete",
    "direct_mix_discrete",
    "otimes",
    "otimes_power",
    "join",
    "meet",
    "convolve_dr",
    "scalar_scale",
    "detect_kink",
    "ExprError",
    "ExprResult",
    "eval_expr",
]

#: value-grid resolution for measure inversion; geometric spacing resolves
#: kinks, which are value-space events
VALUE_GRID_POINTS = 16384
VALUE_FLOOR_RATIO = 1e-12


@dataclass(frozen=True)
class MixWeight:
    """Mixing parameter alpha, strictly inside (0, 1)."""

    alpha: float

    def __post_init__(self):
        a = float(self.alpha)
        if not (0.0 < a < 1.0):
            raise ValueError(f"mixing weight must lie in (0, 1), got {a!r}")
        object.__setattr__(self, "alpha", a)

    @classmethod
    def coerce(cls, w):
        return w if isinstance(w, cls) else cls(float(w))


def _require_pdf(f, what):
    if not isinstance(f, DrPdf):
        raise TypeError(f"{what} expects DrPdf inputs")
    return f


def _value_thresholds(vmax, n_grid, floor_ratio):
    """Decreasing value grid: geometric overall, refined near the maximum.

    Square-root-shaped measures (smooth density modes) change fastest just
    below the maximum, where geometric spacing alone is too coarse.
    """
    base = np.geomspace(vmax * (1.0 - 1e-9), vmax * floor_ratio, int(n_grid))
    top = vmax * (1.0 - np.geomspace(1e-9, 0.1, 1025)[1:-1])
    return np.unique(np.concatenate([base, top]))[::-1]


def _pdf_from_measure(
    measure,
    vmax,
    n_grid=VALUE_GRID_POINTS,
    floor_ratio=VALUE_FLOOR_RATIO,
    exact_inverse=None,
    mass_tol=1e-5,
    name="",
):
    """Invert a nonincreasing measure function into a tabulated DrPdf."""
    if not math.isfinite(vmax) or vmax <= 0.0:
        raise ValueError("mixture has degenerate value range; cannot invert")
    thresholds = _value_thresholds(vmax, n_grid, floor_ratio)
    measures = np.asarray(measure(thresholds), dtype=np.float64)
    if not np.all(np.isfinite(measures)):
        raise ValueError("measure function produced non-finite values")
    table = _swap_axes_to_table(measures, thresholds, vmax)
    return DrPdf(table=table, inverse=exact_inverse, mass_tol=mass_tol, name=name)


def inverse_mix(f1, f2, w=0.5, n_grid=VALUE_GRID_POINTS, floor_ratio=VALUE_FLOOR_RATIO):
    """Alpha-inverse mixing of two DR pdfs.

    The component measures are evaluated at ``v/(1-alpha)`` and ``v/alpha``
    (clamped to 0 above each maximum) and summed; the sum is inverted on a
    geometric value grid.  Candidate kink locations, where one component's
    scaled maximum is crossed, are attached as ``kink_candidates``.
    """
    _require_pdf(f1, "inverse_mix")
    _require_pdf(f2, "inverse_mix")
    a = MixWeight.coerce(w).alpha
    return inverse_mix_many([f1, f2], [1.0 - a, a], n_grid=n_grid, floor_ratio=floor_ratio)


def inverse_mix_many(
    pdfs, weights, n_grid=VALUE_GRID_POINTS, floor_ratio=VALUE_FLOOR_RATIO
):
    """Weighted inverse mixing of any number of DR pdfs.

    ``weights`` must be positive and sum to 1; the mixed measure is
    ``sum_i m_i(v / w_i)``.
    """
    pdfs = [_require_pdf(f, "inverse_mix_many") for f in pdfs]
    wts = np.asarray(weights, dtype=np.float64)
    if wts.size != len(pdfs):
        raise ValueError("one weight per pdf required")
    if np.any(wts <= 0.0) or abs(float(wts.sum()) - 1.0) > 1e-9:
        raise ValueError("weights must be positive and sum to 1")
    measures = [f.measure_at for f in pdfs]
    scaled_maxima = [w * f.max_value for w, f in zip(wts, pdfs)]
    vmax = max(scaled_maxima)

    def mixed(v):
        v = np.asarray(v, dtype=np.float64)
        total = np.zeros_like(v)
        for m, w in zip(measures, wts):
            total = total + np.asarray(m(v / w), dtype=np.float64)
        return total

    out = _pdf_from_measure(
        mixed, vmax, n_grid=n_grid, floor_ratio=floor_ratio, exact_inverse=mixed
    )
    cand_v = sorted({m for m in scaled_maxima if m < vmax * (1.0 - 1e-12)}, reverse=True)
    out.kink_candidates = np.asarray([float(mixed(v)) for v in cand_v])
    return out


def direct_mix(f1, f2, w=0.5, n_grid=VALUE_GRID_POINTS, floor_ratio=VALUE_FLOOR_RATIO):
    """Direct (alpha-weighted) mixing of two DR pdfs.

    Averages the measures at unscaled values, ``(1-alpha) m1(v) + alpha
    m2(v)``, and inverts.  For the equal-weight self mix this is the
    identity; against :func:`inverse_mix` at alpha = 1/2 it satisfies
    ``direct(z) = 2 * inverse(2z)``.
    """
    _require_pdf(f1, "direct_mix")
    _require_pdf(f2, "direct_mix")
    a = MixWeight.coerce(w).alpha
    m1, m2 = f1.measure_at, f2.measure_at
    vmax = max(f1.max_value, f2.max_value)

    def mixed(v):
        v = np.asarray(v, dtype=np.float64)
        return (1.0 - a) * np.asarray(m1(v), dtype=np.float64) + a * np.asarray(
            m2(v), dtype=np.float64
        )

    out = _pdf_from_measure(
        mixed, vmax, n_grid=n_grid, floor_ratio=floor_ratio, exact_inverse=mixed
    )
    cand_v = sorted(
        {m for m in (f1.max_value, f2.max_value) if m < vmax * (1.0 - 1e-12)},
        reverse=True,
    )
    out.kink_candidates = np.asarray([float(mixed(v)) for v in cand_v])
    return out


def inverse_mix_discrete(p, q, w=0.5):
    """Discrete inverse mixing: pool ``(1-alpha) p`` with ``alpha q``, sorted.

    Returns the pooled probabilities in nonincreasing order; they sum to 1.
    """
    a = MixWeight.coerce(w).alpha
    pv = np.asarray(p, dtype=np.float64).ravel()
    qv = np.asarray(q, dtype=np.float64).ravel()
    pooled = np.concatenate([(1.0 - a) * pv, a * qv])
    if np.any(pooled < 0.0):
        raise ValueError("probabilities must be nonnegative")
    if abs(float(pv.sum()) - 1.0) > 1e-9 or abs(float(qv.sum()) - 1.0) > 1e-9:
        raise ValueError("inputs must each sum to 1")
    return np.sort(pooled)[::-1]


def direct_mix_discrete(p, q, w=0.5):
    """Discrete direct mixing: average the sorted vectors elementwise."""
    a = MixWeight.coerce(w).alpha
    pv = np.sort(np.asarray(p, dtype=np.float64).ravel())[::-1]
    qv = np.sort(np.asarray(q, dtype=np.float64).ravel())[::-1]
    n = max(pv.size, qv.size)
    pv = np.pad(pv, (0, n - pv.size))
    qv = np.pad(qv, (0, n - qv.size))
    if np.any(pv < 0.0) or np.any(qv < 0.0):
        raise ValueError("probabilities must be nonnegative")
    if abs(float(pv.sum()) - 1.0) > 1e-9 or abs(float(qv.sum()) - 1.0) > 1e-9:
        raise ValueError("inputs must each sum to 1")
    return (1.0 - a) * pv + a * qv


def _measure_of_cdf(F):
    """Superlevel measure of a DR cdf's derivative.

    Returns ``(measure callable, max value, jump levels)``.  Prefers the
    attached pdf (continuous measure, no jumps); otherwise differentiates a
    tabulation.  A non-concave table (a join of crossing cdfs) is handled by
    rearranging its segment slopes, which is the DR of its derivative; the
    resulting measure is a step function and its jump levels are returned so
    callers can resolve them in their value grids.
    """
    if F.pdf is not None:
        return F.pdf.measure_at, F.pdf.max_value, None
    table = F.table if F.table is not None else F.tabulated(8193)
    g = table.grid
    widths = np.diff(g)
    slopes = np.diff(table.values) / widths
    order = np.argsort(-slopes, kind="stable")
    s_desc = slopes[order]
    cum_w = np.concatenate([[0.0], np.cumsum(widths[order])])

    def measure(v):
        vv = np.atleast_1d(np.asarray(v, dtype=np.float64))
        count = np.searchsorted(-s_desc, -vv, side="right")
        out = cum_w[count]
        return out if np.asarray(v).ndim else float(out[0])

    return measure, float(s_desc[0]), np.unique(s_desc)


def otimes(F1, F2, n_grid=VALUE_GRID_POINTS, floor_ratio=VALUE_FLOOR_RATIO):
    """Tropical product of DR cdfs: equal-weight inverse mixing."""
    if not isinstance(F1, DrCdf) or not isinstance(F2, DrCdf):
        raise TypeError("otimes expects DrCdf arguments")
    parts = [_measure_of_cdf(F) for F in (F1, F2)]
    vmax = 0.5 * max(mv for _, mv, _ in parts)

    def mixed(v):
        v = np.asarray(v, dtype=np.float64)
        total = np.zeros_like(v)
        for m, _, _ in parts:
            total = total + np.asarray(m(2.0 * v), dtype=np.float64)
        return total

    hi = vmax * (1.0 - 1e-9)
    lo = vmax * floor_ratio
    thresholds = _value_thresholds(vmax, n_grid, floor_ratio)
    # step measures (rearranged joins) have flat pdf stretches; bracketing
    # each jump level keeps the swapped table, and hence the mass, exact
    jump_sets = [j / 2.0 for _, _, j in parts if j is not None]
    if jump_sets:
        j = np.concatenate(jump_sets)
        j = j[(j > lo) & (j < hi)]
        brackets = np.concatenate([j * (1.0 - 1e-9), j * (1.0 + 1e-9)])
        thresholds = np.unique(np.concatenate([thresholds, brackets]))[::-1]
    measures = np.asarray(mixed(thresholds), dtype=np.float64)
    table = _swap_axes_to_table(measures, thresholds, vmax)
    pdf = DrPdf(table=table, inverse=mixed, mass_tol=1e-5)
    # integrate on the fine knots but expose the cdf as a closed form: step
    # measures put near-vertical knot pairs in the table, and difference
    # quotients across those are too noisy for the tabular concavity probe
    zk = table.grid
    vk = table.values
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (vk[1:] + vk[:-1]) * np.diff(zk))])
    cum = np.maximum.accumulate(cum)
    total = float(cum[-1])
    if abs(total - 1.0) > 1e-4:
        raise ValueError(f"cdf total {total:.6g} is not within 1e-4 of 1")
    cum = np.clip(cum / total, 0.0, 1.0)
    return DrCdf(fn=lambda z: np.interp(z, zk, cum), z_hi=float(zk[-1]), pdf=pdf)


def otimes_power(F, k):
    """k-th tropical power of a DR cdf: the dilation F(z/k)."""
    if not isinstance(F, DrCdf):
        raise TypeError("otimes_power expects a DrCdf")
    k = float(k)
    if k < 1.0:
        raise ValueError("power must be at least 1")
    if k == 1.0:
        return F
    scaled_pdf = None
    if F.pdf is not None:
        p = F.pdf
        if p.table is not None:
            scaled_pdf = DrPdf(
                table=TabulatedFn(p.table.grid * k, p.table.values / k, "nonincreasing"),
                inverse=None if p.inverse is None else (lambda v: k * np.asarray(p.inverse(k * np.asarray(v)), dtype=np.float64)),
                mass_tol=1e-4,
                name=p.name,
            )
        else:
            scaled_pdf = DrPdf(
                fn=lambda z: np.asarray(p(np.asarray(z, dtype=np.float64) / k)) / k,
                z_max=p.z_max * k if math.isfinite(p.z_max) else math.inf,
                inverse=None if p.inverse is None else (lambda v: k * np.asarray(p.inverse(k * np.asarray(v)), dtype=np.float64)),
                probe_hi=p.probe_hi * k,
                name=p.name,
            )
    if F.table is not None:
        return DrCdf(
            table=TabulatedFn(F.table.grid * k, F.table.values, "nondecreasing"),
            pdf=scaled_pdf,
            require_concave=F.concave,
            name=F.name,
        )
    return DrCdf(
        fn=lambda z: F(np.asarray(z, dtype=np.float64) / k),
        pdf=scaled_pdf,
        inverse=None if F.inverse is None else (lambda pr: k * np.asarray(F.inverse(np.asarray(pr)), dtype=np.float64)),
        z_hi=F.z_hi * k,
        z_max=F.z_max * k if math.isfinite(F.z_max) else math.inf,
        name=F.name,
    )


def _lattice(F1, F2, op):
    if not isinstance(F1, DrCdf) or not isinstance(F2, DrCdf):
        raise TypeError("lattice operations expect DrCdf arguments")
    # when one input dominates pointwise the lattice collapses to an input,
    # which is returned as-is to keep its pdf and closed form
    g = default_comparison_grid(F1, F2).points
    d = F1(g) - F2(g)
    if np.all(d >= -1e-12):
        return F1 if op is np.maximum else F2
    if np.all(d <= 1e-12):
        return F2 if op is np.maximum else F1
    # crossing pair: close over the inputs rather than tabulate, so the
    # defining pointwise inequalities against F1 and F2 hold exactly
    z_hi = max(F1.effective_support(1e-8), F2.effective_support(1e-8))
    return DrCdf(
        fn=lambda z: op(F1(np.asarray(z, dtype=np.float64)), F2(np.asarray(z, dtype=np.float64))),
        z_hi=z_hi,
        require_concave=False,
    )


def join(F1, F2):
    """Pointwise maximum of two DR cdfs (the optimistic combination).

    The max of crossing concave cdfs can fail concavity; the result's
    ``concave`` flag reports whether it is a genuine DR cdf.
    """
    return _lattice(F1, F2, np.maximum)


def meet(F1, F2):
    """Pointwise minimum of two DR cdfs; always concave."""
    return _lattice(F1, F2, np.minimum)


def _mass_quantile(pdf, frac):
    """z below which the pdf holds ``frac`` of its mass, by dense trapezoids."""
    hi = pdf.z_max if math.isfinite(pdf.z_max) else pdf.support_hi()
    z = np.linspace(0.0, hi, 8193)
    v = pdf(z)
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (v[1:] + v[:-1]) * np.diff(z))])
    total = cum[-1]
    return float(np.interp(frac * total, cum, z)), hi


def convolve_dr(f1, f2, min_samples=512, m_thresholds=VALUE_GRID_POINTS):
    """DR cdf of the sum of independent variables with DR densities f1, f2.

    The densities are convolved on a shared uniform grid (step chosen so the
    narrower 1 - 1e-6 mass range gets ``min_samples`` points, trapezoid end
    correction applied), rearranged, and integrated.
    """
    _require_pdf(f1, "convolve_dr")
    _require_pdf(f2, "convolve_dr")
    q1, hi1 = _mass_quantile(f1, 1.0 - 1e-6)
    q2, hi2 = _mass_quantile(f2, 1.0 - 1e-6)
    h = min(q1, q2) / float(min_samples)
    n1 = int(math.ceil(hi1 / h)) + 1
    n2 = int(math.ceil(hi2 / h)) + 1
    a = f1(np.arange(n1) * h)
    b = f2(np.arange(n2) * h)
    conv = np.convolve(a, b)
    # rectangle sum -> trapezoid: halve the two boundary products
    k = conv.size
    corr = np.zeros(k)
    corr[:n2] += a[0] * b
    corr[:n1] += b[0] * a
    conv = (conv - 0.5 * corr) * h
    conv = np.maximum(conv, 0.0)
    z_out = np.arange(k) * h
    mass = float(np.trapezoid(conv, z_out))
    if mass < 1.0 - 1e-4:
        raise ValueError(
            f"convolution mass {mass:.6g} short of 1: extend support of the inputs"
        )

    def density(z):
        return np.interp(z, z_out, conv)

    g = DensityFn.from_univariate(density, 0.0, float(z_out[-1]), integral_tol=None)
    dr = dr_from_density_1d(g, m_thresholds=m_thresholds)
    return cdf_of_dr(dr)


def scalar_scale(F, beta, n=4097):
    """Pointwise scaling beta * F(z), returned as a table.

    Only beta = 1 yields a cdf; the result's ``is_cdf`` attribute flags this.
    """
    if not isinstance(F, DrCdf):
        raise TypeError("scalar_scale expects a DrCdf")
    beta = float(beta)
    if beta <= 0.0:
        raise ValueError("scale factor must be positive")
    base = F.table if F.table is not None else F.tabulated(n)
    out = TabulatedFn(base.grid.copy(), beta * base.values, "nondecreasing")
    out.is_cdf = beta == 1.0
    return out


def detect_kink(f, window=10, min_change=1e-3):
    """Locate a slope discontinuity of ``log f`` on a tabulated DR pdf.

    The knot with the largest jump between adjacent log-slopes is the
    candidate; straight lines fitted a couple of knots away on each side are
    intersected to refine the location (exact when both branches are
    log-linear).  Returns the kink's z, or None when the largest jump is
    below ``min_change``.
    """
    if isinstance(f, DrPdf):
        table = f.table if f.table is not None else f.tabulated(4097)
    elif isinstance(f, TabulatedFn):
        table = f
    else:
        raise TypeError("detect_kink expects a DrPdf or TabulatedFn")
    keep = table.values > table.values[0] * 1e-9
    z = table.grid[keep]
    logf = np.log(table.values[keep])
    if z.size < 6:
        raise ValueError("table too short for kink detection")
    slopes = np.diff(logf) / np.diff(z)
    change = np.abs(np.diff(slopes))
    k = int(np.argmax(change)) + 1  # knot between the two segments
    # a kink is a local outlier; smooth curvature moves neighbouring slope
    # changes by comparable amounts
    lo_n = max(0, k - 1 - 12)
    hi_n = min(change.size, k + 12)
    local = np.concatenate(
        [change[lo_n : max(lo_n, k - 2)], change[min(change.size, k + 1) : hi_n]]
    )
    background = float(local.max()) if local.size else 0.0
    if change[k - 1] < min_change or change[k - 1] < 10.0 * (background + 1e-15):
        return None
    lo = max(0, k - window)
    hi = min(z.size, k + window + 1)
    left = slice(lo, max(lo + 2, k - 1))
    right = slice(min(hi - 2, k + 2), hi)
    c1, b1 = np.polyfit(z[left], logf[left], 1)
    c2, b2 = np.polyfit(z[right], logf[right], 1)
    if abs(c1 - c2) < 1e-12:
        return float(z[k])
    return float((b2 - b1) / (c1 - c2))


class ExprError(ValueError):
    """Raised for malformed or unresolvable expressions."""


@dataclass
class ExprResult:
    """Evaluated expression: a DR cdf and, when well-defined, its pdf."""

    pdf: object
    cdf: DrCdf
    label: str


_CALL_RE = re.compile(r"^([A-Za-z_]\w*)\((.*)\)$", re.S)
_FAMILY_KEYS = {"n", "var", "theta"}
_OP_KWARGS = {
    "mix": {"alpha"},
    "dmix": {"alpha"},
    "pow": {"k"},
    "join": set(),
    "meet": set(),
    "conv": set(),
    "otimes": set(),
}


def _split_top(s):
    parts = []
    depth = 0
    cur = []
    for ch in s:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise ExprError("unbalanced parentheses")
        if ch == "," and depth == 0:
            parts.append("".join(cur).strip())
            cur = []
        else:
            cur.append(ch)
    if depth != 0:
        raise ExprError("unbalanced parentheses")
    tail = "".join(cur).strip()
    if tail:
        parts.append(tail)
    return parts


def _reassemble_family_args(parts, op_kwargs):
    """Glue family parameters split off by top-level commas back onto their spec.

    ``mvn:n=2,var=1`` splits into two parts; ``var=1`` is not a kwarg of any
    operation, so it belongs to the preceding family spec.
    """
    out = []
    for part in parts:
        m = re.match(r"^(\w+)\s*=", part)
        if m and m.group(1) in _FAMILY_KEYS and m.group(1) not in op_kwargs and out:
            out[-1] = out[-1] + "," + part
        else:
            out.append(part)
    return out


def _leaf(text):
    text = text.strip()
    try:
        spec = parse_family(text)
    except ValueError:
        spec = None
    if spec is not None:
        pdf, cdf = dr_family(spec)
        return ExprResult(pdf=pdf, cdf=cdf, label=spec.label())
    if os.path.exists(text):
        table = load_tabulated(text)
        if table.monotone == "nonincreasing":
            pdf = DrPdf(table=table, mass_tol=1e-3)
            return ExprResult(pdf=pdf, cdf=cdf_of_dr(pdf), label=text)
        cdf = DrCdf(table=table, require_concave=False)
        pdf = pdf_of_cdf(cdf) if cdf.concave else None
        return ExprResult(pdf=pdf, cdf=cdf, label=text)
    raise ExprError(f"unknown identifier: {text!r} (not a family spec or file)")


def _need_pdf(res):
    if res.pdf is None:
        raise ExprError(f"operand {res.label!r} has no well-defined DR pdf")
    return res.pdf


def eval_expr(text):
    """Evaluate a composition expression into an :class:`ExprResult`.

    Operations: ``mix(a,b,alpha=0.5)``, ``dmix(a,b,alpha=0.5)``,
    ``pow(a,k)``, ``join(a,b)``, ``meet(a,b)``, ``conv(a,b)``,
    ``otimes(a,b)``.  Leaves are family specs or paths to tabulated files.
    """
    text = text.strip()
    m = _CALL_RE.match(text)
    if m is None or m.group(1) not in _OP_KWARGS:
        return _leaf(text)
    op = m.group(1)
    allowed = _OP_KWARGS[op]
    raw_parts = _reassemble_family_args(_split_top(m.group(2)), allowed)
    args = []
    kwargs = {}
    for part in raw_parts:
        km = re.match(r"^(\w+)\s*=\s*([^\s(),]+)$", part)
        if km and km.group(1) in allowed:
            kwargs[km.group(1)] = float(km.group(2))
            continue
        try:
            args.append(float(part))
        except ValueError:
            args.append(eval_expr(part))
    label = f"{op}({', '.join(p for p in raw_parts)})"

    def binary():
        if len(args) != 2 or any(isinstance(a, float) for a in args):
            raise ExprError(f"{op} takes exactly two distribution operands")
        return args

    if op in ("mix", "dmix"):
        a, b = binary()
        alpha = kwargs.get("alpha", 0.5)
        fn = inverse_mix if op == "mix" else direct_mix
        pdf = fn(_need_pdf(a), _need_pdf(b), alpha)
        return ExprResult(pdf=pdf, cdf=cdf_of_dr(pdf), label=label)
    if op == "pow":
        dist = [a for a in args if isinstance(a, ExprResult)]
        nums = [a for a in args if isinstance(a, float)]
        if len(dist) != 1 or len(nums) + ("k" in kwargs) != 1:
            raise ExprError("pow takes one distribution and one power")
        k = kwargs.get("k", nums[0] if nums else None)
        cdf = otimes_power(dist[0].cdf, k)
        return ExprResult(pdf=cdf.pdf, cdf=cdf, label=label)
    if op in ("join", "meet"):
        a, b = binary()
        cdf = join(a.cdf, b.cdf) if op == "join" else meet(a.cdf, b.cdf)
        # collapsed lattices hand back an input cdf, which keeps its pdf
        return ExprResult(pdf=cdf.pdf, cdf=cdf, label=label)
    if op == "conv":
        a, b = binary()
        cdf = convolve_dr(_need_pdf(a), _need_pdf(b))
        return ExprResult(pdf=cdf.pdf, cdf=cdf, label=label)
    if op == "otimes":
        a, b = binary()
        cdf = otimes(a.cdf, b.cdf)
        return ExprResult(pdf=cdf.pdf, cdf=cdf, label=label)
    raise ExprError(f"unknown operation {op!r}")  # pragma: no cover
