"""Schur-concave entropies and moments of decreasing rearrangements.

Rearranging a density does not change integrals of pointwise gauges, so the
entropy of a DR pdf equals the differential entropy of every density that
rearranges to it. Closed-form DRs are integrated on the level side through
their exact superlevel measure; tabulated DRs fall back to trapezoid sums on
their knots with tails beyond the table contributing zero.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.optimize import brentq

from .order import ProbMatrix, ProbVector
from .rearrange import DrPdf

__all__ = [
    "EntropyKind",
    "SHANNON",
    "BinaryJointSpec",
    "StationaryEpsilon",
    "entropy_discrete",
    "entropy_dr",
    "moments_dr",
    "binary_joint",
    "max_entropy_epsilon",
]


@dataclass(frozen=True)
class EntropyKind:
    """Entropy gauge: ``shannon`` or ``tsallis`` with parameter gamma > 0.

    Shannon sums ``-p log p`` with ``0 log 0 = 0``; Tsallis sums
    ``(p / gamma) (1 - p**gamma)``, which tends to the Shannon gauge as
    gamma -> 0 and to the Gini/collision form ``1 - sum p**2`` at gamma = 1.
    """

    kind: str
    gamma: float | None = None

    def __post_init__(self):
        if self.kind not in ("shannon", "tsallis"):
            raise ValueError(f"unknown entropy kind {self.kind!r}")
        if self.kind == "tsallis":
            if self.gamma is None or not float(self.gamma) > 0.0:
                raise ValueError("tsallis entropy needs gamma > 0")
            object.__setattr__(self, "gamma", float(self.gamma))
        elif self.gamma is not None:
            raise ValueError("gamma applies to tsallis only")

    @classmethod
    def tsallis(cls, gamma):
        return cls("tsallis", float(gamma))

    @classmethod
    def parse(cls, text):
        """``"shannon"`` or ``"tsallis:GAMMA"``."""
        parts = str(text).strip().lower().split(":")
        if parts[0] == "shannon" and len(parts) == 1:
            return cls("shannon")
        if parts[0] == "tsallis" and len(parts) == 2:
            try:
                return cls.tsallis(float(parts[1]))
            except ValueError as exc:
                raise ValueError(f"bad tsallis gamma in {text!r}") from exc
        raise ValueError(f"cannot parse entropy kind {text!r}")

    def label(self):
        if self.kind == "shannon":
            return "shannon"
        return f"tsallis:{self.gamma:g}"


SHANNON = EntropyKind("shannon")


def _gauge(values, kind):
    """Pointwise integrand h(y) of the entropy functional."""
    y = np.asarray(values, dtype=np.float64)
    if kind.kind == "shannon":
        out = np.zeros_like(y)
        pos = y > 0.0
        out[pos] = -y[pos] * np.log(y[pos])
        return out
    g = kind.gamma
    return (y / g) * (1.0 - y**g)


def _gauge_slope(u, kind):
    """h'(u) for u > 0, used by the level-side (layer cake) quadrature."""
    if kind.kind == "shannon":
        return -math.log(u) - 1.0
    g = kind.gamma
    return (1.0 - (1.0 + g) * u**g) / g


def entropy_discrete(p, kind=SHANNON):
    """Entropy of a probability vector or joint table.

    Accepts ProbVector, ProbMatrix, or any array summing to 1 within 1e-9.
    """
    if isinstance(p, ProbMatrix):
        q = p.values.ravel()
    elif isinstance(p, ProbVector):
        q = p.values
    else:
        q = np.asarray(p, dtype=np.float64).ravel()
        if q.size == 0 or not np.all(np.isfinite(q)):
            raise ValueError("probability vector must be finite and nonempty")
        if np.any(q < 0.0):
            raise ValueError("negative probability entries")
        if abs(float(q.sum()) - 1.0) > 1e-9:
            raise ValueError(f"probabilities sum to {float(q.sum())!r}, not 1")
    return float(_gauge(q, kind).sum())


# ---------------------------------------------------------------------------
# DR functionals
# ---------------------------------------------------------------------------


def _level_breaks(f):
    """Quadrature split points in t = -log(u / vmax), from known pdf kinks."""
    vmax = float(f.max_value)
    breaks = []
    for zk in np.atleast_1d(getattr(f, "kink_candidates", ())):
        u = float(f(float(zk)))
        if 0.0 < u < vmax:
            breaks.append(-math.log(u / vmax))
    return sorted({b for b in breaks if b > 1e-12})


def _level_quad(f, g_of_u, what):
    """Integral of G(u) du over (0, max f], substituted as u = vmax e^{-t}.

    G carries the superlevel measure, so polynomial-in-log growth is damped
    by the u factor; a non-decaying tail shows up as quadrature failure.
    """
    vmax = float(f.max_value)

    def integrand(t):
        u = vmax * math.exp(-t)
        if u <= 0.0:
            return 0.0
        return g_of_u(u) * u

    limits = [0.0, *_level_breaks(f), math.inf]
    total = 0.0
    err = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        for a, b in zip(limits[:-1], limits[1:]):
            piece, piece_err = quad(integrand, a, b, limit=400)
            total += piece
            err += piece_err
    if not math.isfinite(total) or err > 1e-6 * max(1.0, abs(total)):
        raise ValueError(f"{what} quadrature did not converge: tail not decaying")
    # a u-side integrand still flat at t ~ 300 (u ~ vmax * e^-300) means the
    # integral diverges; fp underflow would truncate it to a confident
    # finite value that the quadrature error estimate cannot see
    probe = abs(integrand(300.0))
    if probe > 1e-12 * max(1.0, abs(total)) and abs(integrand(600.0)) > 0.5 * probe:
        raise ValueError(f"{what} quadrature did not converge: tail not decaying")
    return total


def _measure_scalar(f):
    inverse = f.inverse

    def m(u):
        return max(0.0, float(np.asarray(inverse(u), dtype=np.float64)))

    return m


def _pdf_samples(f):
    """Knots for z-side integration of a DR without an exact measure."""
    if f.table is not None:
        return f.table.grid, f.table.values
    hi = float(f.support_hi())
    z = np.unique(
        np.concatenate([np.linspace(0.0, hi, 4097), np.geomspace(hi * 1e-9, hi, 513)])
    )
    return z, np.asarray(f(z), dtype=np.float64)


def _check_tail(values, what):
    v = np.asarray(values, dtype=np.float64)
    if v[-1] > 1e-2 * v[0]:
        raise ValueError(
            f"{what}: pdf tail has not decayed within the tabulated support"
        )


def entropy_dr(f: DrPdf, kind=SHANNON) -> float:
    """Differential entropy ``int h(f~(z)) dz`` of a DR pdf."""
    if f.inverse is not None:
        m = _measure_scalar(f)
        return _level_quad(f, lambda u: m(u) * _gauge_slope(u, kind), "entropy")
    z, v = _pdf_samples(f)
    _check_tail(v, "entropy")
    return float(np.trapezoid(_gauge(v, kind), z))


def moments_dr(f: DrPdf) -> tuple[float, float]:
    """Mean and variance of the rearranged variable z under the DR density."""
    if f.inverse is not None:
        m = _measure_scalar(f)
        first = _level_quad(f, lambda u: 0.5 * m(u) ** 2, "mean")
        second = _level_quad(f, lambda u: m(u) ** 3 / 3.0, "second moment")
    else:
        z, v = _pdf_samples(f)
        _check_tail(v, "moments")
        first = float(np.trapezoid(z * v, z))
        second = float(np.trapezoid(z * z * v, z))
    return first, second - first * first


# ---------------------------------------------------------------------------
# binary joint tables and the entropy-maximising perturbation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BinaryJointSpec:
    """2x2 joint law with margins P(X1=0)=alpha, P(X2=0)=beta, shifted by epsilon.

    epsilon moves mass onto the diagonal: p00 and p11 gain epsilon, p01 and
    p10 lose it, so both margins stay fixed. Feasibility requires |epsilon|
    below the smallest cell of the independence table.
    """

    alpha: float
    beta: float
    epsilon: float = 0.0

    def __post_init__(self):
        a, b = float(self.alpha), float(self.beta)
        if not (0.0 < a < 1.0 and 0.0 < b < 1.0):
            raise ValueError("margins must lie strictly inside (0, 1)")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)
        object.__setattr__(self, "epsilon", float(self.epsilon))


def _independence(alpha, beta):
    return np.array(
        [
            [alpha * beta, alpha * (1.0 - beta)],
            [(1.0 - alpha) * beta, (1.0 - alpha) * (1.0 - beta)],
        ]
    )


def epsilon_bound(alpha, beta) -> float:
    """Supremum of |epsilon| keeping the perturbed table nonnegative."""
    return float(_independence(float(alpha), float(beta)).min())


def binary_joint(spec: BinaryJointSpec) -> ProbMatrix:
    """The perturbed 2x2 table [[p00, p01], [p10, p11]] as a ProbMatrix."""
    bound = epsilon_bound(spec.alpha, spec.beta)
    if abs(spec.epsilon) > bound:
        raise ValueError(
            f"epsilon {spec.epsilon!r} outside the feasible interval "
            f"(-{bound:g}, {bound:g})"
        )
    table = _independence(spec.alpha, spec.beta)
    table[0, 0] += spec.epsilon
    table[1, 1] += spec.epsilon
    table[0, 1] -= spec.epsilon
    table[1, 0] -= spec.epsilon
    return ProbMatrix(table)


class StationaryEpsilon(float):
    """Float carrying a ``boundary`` flag when the optimum hit the feasible edge."""

    boundary: bool

    def __new__(cls, value, boundary=False):
        out = super().__new__(cls, float(value))
        out.boundary = bool(boundary)
        return out

    def __repr__(self):
        tag = ", boundary" if self.boundary else ""
        return f"StationaryEpsilon({float(self)!r}{tag})"


def max_entropy_epsilon(alpha, beta, kind=SHANNON) -> StationaryEpsilon:
    """Epsilon maximising the joint entropy of ``binary_joint`` at fixed margins.

    Shannon is maximised at independence (epsilon = 0) for every margin pair.
    Tsallis gamma = 1 has the closed form -(2 beta - 1)(2 alpha - 1) / 4;
    other gammas are solved numerically. Stationary points outside the
    feasible interval are clamped to the nearest endpoint and flagged
    ``boundary``.
    """
    a, b = float(alpha), float(beta)
    if not (0.0 < a < 1.0 and 0.0 < b < 1.0):
        raise ValueError("margins must lie strictly inside (0, 1)")
    if kind.kind == "shannon":
        return StationaryEpsilon(0.0)
    bound = epsilon_bound(a, b)
    g = kind.gamma
    if g == 1.0:
        star = -0.25 * (2.0 * b - 1.0) * (2.0 * a - 1.0)
    else:
        star = _tsallis_stationary(a, b, g, bound)
    if abs(star) >= bound:
        return StationaryEpsilon(math.copysign(bound, star), boundary=True)
    return StationaryEpsilon(star)


def _tsallis_stationary(alpha, beta, gamma, bound):
    """Root of dH/d epsilon for the Tsallis gauge; +-inf when outside the box.

    H is concave in epsilon (each cell is affine, the gauge is concave), and
    dH/d epsilon is a negative multiple of
    s(e) = p00^g - p10^g - p01^g + p11^g, which increases in e; so H has a
    unique interior maximum exactly where s crosses zero.
    """
    base = _independence(alpha, beta)
    p00, p01 = base[0]
    p10, p11 = base[1]

    def s(e):
        return (
            (p00 + e) ** gamma
            - (p10 - e) ** gamma
            - (p01 - e) ** gamma
            + (p11 + e) ** gamma
        )

    lo = -bound * (1.0 - 1e-12)
    hi = bound * (1.0 - 1e-12)
    if s(lo) >= 0.0:
        return -math.inf
    if s(hi) <= 0.0:
        return math.inf
    return float(brentq(s, lo, hi, xtol=1e-15))
