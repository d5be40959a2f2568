"""Entropy gauges, DR entropies and moments, binary joint stationary points."""

import numpy as np
import pytest
from scipy.special import betaln, psi

from conftest import discrete_comparable_pair
from drmaj.entropy import (
    SHANNON,
    BinaryJointSpec,
    EntropyKind,
    StationaryEpsilon,
    binary_joint,
    entropy_discrete,
    entropy_dr,
    epsilon_bound,
    max_entropy_epsilon,
    moments_dr,
)
from drmaj.families import dr_beta32, dr_exp_iid, dr_exp_rate, dr_mvn
from drmaj.order import OrderVerdict, majorizes_discrete
from drmaj.rearrange import DrPdf, TabulatedFn


def test_entropy_kind_parsing():
    assert EntropyKind.parse("shannon") == SHANNON
    k = EntropyKind.parse("tsallis:0.5")
    assert k.gamma == 0.5
    assert k.label() == "tsallis:0.5"
    assert EntropyKind.tsallis(2).gamma == 2.0
    for bad in ("renyi", "tsallis", "tsallis:x", "tsallis:-1", "shannon:2"):
        with pytest.raises(ValueError):
            EntropyKind.parse(bad)
    with pytest.raises(ValueError, match="gamma applies to tsallis"):
        EntropyKind("shannon", gamma=1.0)


def test_discrete_entropy_values():
    assert entropy_discrete([0.5, 0.5]) == pytest.approx(np.log(2.0))
    assert entropy_discrete([1.0, 0.0]) == 0.0
    assert entropy_discrete(np.full(4, 0.25), EntropyKind.tsallis(1.0)) == pytest.approx(0.75)
    # gamma -> 0 recovers the Shannon gauge
    p = np.array([0.7, 0.2, 0.1])
    assert entropy_discrete(p, EntropyKind.tsallis(1e-9)) == pytest.approx(
        entropy_discrete(p), abs=1e-6
    )
    with pytest.raises(ValueError):
        entropy_discrete([0.5, 0.6])
    with pytest.raises(ValueError):
        entropy_discrete([1.2, -0.2])


def test_exp_dr_entropies():
    f, _ = dr_exp_iid(1)
    assert entropy_dr(f) == pytest.approx(1.0, abs=1e-9)
    for gamma in (0.5, 1.0, 2.0):
        got = entropy_dr(f, EntropyKind.tsallis(gamma))
        assert got == pytest.approx(1.0 / (1.0 + gamma), abs=1e-9)


def test_normal_dr_entropy_matches_differential_entropy():
    # rearrangement preserves the entropy integral of the original density
    for n in (1, 2, 3):
        f, _ = dr_mvn(n)
        want = 0.5 * n * np.log(2.0 * np.pi * np.e)
        assert entropy_dr(f) == pytest.approx(want, abs=1e-8)


def test_beta32_entropy_against_digamma_formula():
    a, b = 3.0, 2.0
    want = (
        betaln(a, b)
        - (a - 1.0) * (psi(a) - psi(a + b))
        - (b - 1.0) * (psi(b) - psi(a + b))
    )
    f, _ = dr_beta32()
    assert entropy_dr(f) == pytest.approx(want, abs=1e-6)


def test_dr_moments():
    f1, _ = dr_exp_iid(1)
    assert moments_dr(f1) == pytest.approx((1.0, 1.0), abs=1e-9)
    f2, _ = dr_exp_iid(2)
    mean, var = moments_dr(f2)
    assert mean == pytest.approx(3.0, abs=1e-8)
    assert var == pytest.approx(21.0, abs=1e-7)
    fr, _ = dr_exp_rate(0.5)
    assert moments_dr(fr) == pytest.approx((2.0, 4.0), abs=1e-8)


def test_tabulated_path_agrees_with_exact_measure():
    f, _ = dr_exp_rate(0.8)
    tab = DrPdf(table=f.tabulated(8193, z_hi=50.0), mass_tol=1e-4)
    assert entropy_dr(tab) == pytest.approx(entropy_dr(f), abs=1e-4)
    m_tab = moments_dr(tab)
    m_exact = moments_dr(f)
    assert m_tab[0] == pytest.approx(m_exact[0], abs=1e-4)
    assert m_tab[1] == pytest.approx(m_exact[1], abs=1e-3)


def test_undecayed_tail_is_rejected():
    # half-Cauchy: the mean diverges, though the entropy is finite (log 2pi)
    def half_cauchy(z):
        return 2.0 / (np.pi * (1.0 + np.asarray(z) ** 2))

    def inv(v):
        v = np.clip(np.asarray(v, dtype=np.float64), 1e-300, 2.0 / np.pi)
        return np.sqrt(np.maximum(2.0 / (np.pi * v) - 1.0, 0.0))

    f = DrPdf(fn=half_cauchy, z_max=np.inf, inverse=inv, probe_hi=1e6, mass_tol=None)
    with pytest.raises(ValueError, match="tail not decaying"):
        moments_dr(f)
    assert entropy_dr(f) == pytest.approx(np.log(2.0 * np.pi), abs=1e-8)

    z = np.linspace(0.0, 3.0, 512)
    tab = DrPdf(
        table=TabulatedFn(z, half_cauchy(z), "nonincreasing"), mass_tol=None
    )
    with pytest.raises(ValueError, match="tail has not decayed"):
        entropy_dr(tab)


def test_binary_joint_layout_and_margins():
    t = binary_joint(BinaryJointSpec(0.4, 0.3, 0.05))
    assert np.allclose(t.values, [[0.12 + 0.05, 0.28 - 0.05], [0.18 - 0.05, 0.42 + 0.05]])
    rng = np.random.default_rng(8)
    for _ in range(25):
        alpha, beta = rng.uniform(0.05, 0.95, size=2)
        bound = epsilon_bound(alpha, beta)
        eps = rng.uniform(-bound, bound)
        tab = binary_joint(BinaryJointSpec(alpha, beta, eps)).values
        assert np.allclose(tab.sum(axis=1), [alpha, 1.0 - alpha], atol=1e-12)
        assert np.allclose(tab.sum(axis=0), [beta, 1.0 - beta], atol=1e-12)
        assert np.all(tab >= 0.0)


def test_binary_joint_bound():
    assert epsilon_bound(0.5, 0.5) == pytest.approx(0.25)
    with pytest.raises(ValueError, match="epsilon"):
        binary_joint(BinaryJointSpec(0.5, 0.5, 0.3))
    with pytest.raises(ValueError):
        BinaryJointSpec(0.0, 0.5, 0.0)


def test_shannon_stationary_at_independence():
    for alpha in (0.1, 0.35, 0.5, 0.8):
        for beta in (0.2, 0.5, 0.65):
            star = max_entropy_epsilon(alpha, beta, SHANNON)
            assert star == 0.0
            assert not star.boundary


def test_tsallis_gamma1_closed_form():
    rng = np.random.default_rng(17)
    for _ in range(20):
        alpha, beta = rng.uniform(0.15, 0.85, size=2)
        want = -0.25 * (2.0 * beta - 1.0) * (2.0 * alpha - 1.0)
        if abs(want) >= epsilon_bound(alpha, beta):
            continue
        star = max_entropy_epsilon(alpha, beta, EntropyKind.tsallis(1.0))
        assert star == pytest.approx(want, abs=1e-12)
        assert not star.boundary


def test_stationary_point_clamps_to_boundary():
    star = max_entropy_epsilon(0.9, 0.9, EntropyKind.tsallis(1.0))
    assert isinstance(star, StationaryEpsilon)
    assert star.boundary
    assert star == pytest.approx(-epsilon_bound(0.9, 0.9), abs=1e-12)


@pytest.mark.parametrize("gamma", [0.5, 2.0])
def test_stationary_point_matches_brute_scan(gamma):
    kind = EntropyKind.tsallis(gamma)
    rng = np.random.default_rng(23)
    for _ in range(10):
        alpha, beta = rng.uniform(0.2, 0.8, size=2)
        bound = epsilon_bound(alpha, beta)
        star = max_entropy_epsilon(alpha, beta, kind)
        eps = np.linspace(-bound * (1 - 1e-9), bound * (1 - 1e-9), 20001)
        vals = [
            entropy_discrete(binary_joint(BinaryJointSpec(alpha, beta, e)), kind)
            for e in eps
        ]
        best = float(eps[int(np.argmax(vals))])
        assert star == pytest.approx(best, abs=1e-3)
        here = entropy_discrete(binary_joint(BinaryJointSpec(alpha, beta, float(star))), kind)
        assert here >= max(vals) - 1e-10


def test_entropies_respect_majorisation():
    rng = np.random.default_rng(404)
    kinds = [SHANNON] + [EntropyKind.tsallis(g) for g in (0.5, 1.0, 2.0)]
    for _ in range(40):
        p, q = discrete_comparable_pair(rng)
        assert majorizes_discrete(p, q) in (OrderVerdict.PRECEDES, OrderVerdict.EQUAL)
        for kind in kinds:
            assert entropy_discrete(p, kind) >= entropy_discrete(q, kind) - 1e-12
