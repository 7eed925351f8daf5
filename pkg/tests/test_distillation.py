from math import sqrt

import numpy as np
import pytest

from gridnet import oracle
from gridnet.distillation import (
    DistillationConfig,
    DomainError,
    FidelityDistribution,
    bbpssw,
    closed_form_t6,
    compare_t6,
    ladder_distribution,
    ladder_outcome,
    monte_carlo_ladder,
    sample_link,
    tier_fidelities,
)


def test_fixed_points_are_exact():
    assert bbpssw(1.0) == (1.0, 1.0)
    assert bbpssw(0.25) == (0.25, 0.5)


def test_against_dense_circuit():
    for f in (0.8, 0.3, 0.55, 0.95):
        assert np.allclose(bbpssw(f), oracle.bbpssw_dense(f), atol=1e-12)
    # exact rationals for f = 4/5: e = 1/15
    assert bbpssw(0.8) == pytest.approx((145 / 173, 173 / 225), abs=1e-15)


def test_improves_fidelity_above_one_half():
    for f in np.linspace(0.5, 1.0, 202)[1:-1]:
        assert bbpssw(f)[0] > f
    assert bbpssw(0.5)[0] == pytest.approx(0.5, abs=1e-15)


def test_degrades_fidelity_below_one_half():
    for f in np.linspace(0.25, 0.5, 202)[1:-1]:
        assert bbpssw(f)[0] < f


def test_domain():
    for f in (0.2, 1.01):
        with pytest.raises(DomainError):
            bbpssw(f)
    for kw in (dict(rounds=0), dict(rounds=9), dict(link_prob=1.2), dict(base_fidelity=0.1)):
        args = dict(rounds=2, link_prob=0.5, base_fidelity=0.8)
        with pytest.raises(DomainError):
            DistillationConfig(**{**args, **kw})


def test_ladder_sums_to_one():
    for t in range(1, 7):
        for p in np.linspace(0.1, 1.0, 10):
            for f in np.linspace(0.6, 1.0, 5):
                dist = ladder_distribution(DistillationConfig(t, float(p), float(f)))
                assert abs(dist.total() - 1.0) < 1e-9


def test_single_round():
    dist = ladder_distribution(DistillationConfig(1, 0.3, 0.9))
    assert dict(zip(dist.tiers, (w for _, w in dist.outcomes))) == pytest.approx({None: 0.7, 0: 0.3})


def test_two_rounds_explicit_form():
    p, f = 0.6, 0.85
    f2, q = bbpssw(f)
    dist = ladder_distribution(DistillationConfig(2, p, f))
    got = {fid: w for fid, w in dist.outcomes}
    assert got[None] == pytest.approx((1 - p) ** 2 + p * p * (1 - q), abs=1e-15)
    assert got[f] == pytest.approx(2 * p * (1 - p), abs=1e-15)
    assert got[f2] == pytest.approx(p * p * q, abs=1e-15)


def test_pairing_policy_scenarios():
    # six heralds, every step succeeds except the top one: the leftover f2 pair is kept
    def fail_at(level):
        return lambda lvl: lvl != level

    assert ladder_outcome(6, fail_at(1)) == 1
    assert ladder_outcome(6, lambda lvl: True) == 2
    assert ladder_outcome(5, fail_at(1)) == 0
    assert ladder_outcome(0, lambda lvl: True) is None
    assert ladder_outcome(2, lambda lvl: False) is None


@pytest.mark.parametrize("t", [2, 4, 6])
def test_ladder_matches_simulation(t):
    samples = 200_000
    config = DistillationConfig(t, 0.55, 0.9)
    dist = ladder_distribution(config)
    freq = monte_carlo_ladder(config, samples, np.random.default_rng(t))
    for tier, (_, p) in zip(dist.tiers, dist.outcomes):
        sigma = sqrt(p * (1 - p) / samples)
        assert abs(freq.get(tier, 0.0) - p) < 5 * sigma
    assert set(freq) <= set(dist.tiers)


def test_closed_form_differs_only_in_f0_tier():
    rows = {tier: (c, e) for tier, c, e in compare_t6(0.7, 0.8)}
    for tier in (None, 1, 2):
        assert rows[tier][0] == pytest.approx(rows[tier][1], abs=1e-14)
    # the closed form omits six-choose-five heralds with the second-level step failing
    p, f = 0.7, 0.8
    P0 = bbpssw(f)[1]
    P2 = bbpssw(bbpssw(f)[0])[1]
    missing = 6 * p**5 * (1 - p) * P0**2 * (1 - P2)
    assert rows[0][1] - rows[0][0] == pytest.approx(missing, abs=1e-14)
    assert sum(closed_form_t6(p, f).values()) == pytest.approx(1 - missing, abs=1e-14)


def test_tier_fidelities_increase():
    fids, probs = tier_fidelities(0.7, 4)
    assert all(b > a for a, b in zip(fids, fids[1:]))
    assert all(0.5 <= q <= 1 for q in probs)


def test_sample_link_point_masses():
    rng = np.random.default_rng(0)
    assert sample_link(FidelityDistribution(((0.9, 1.0),)), rng) == 0.9
    assert sample_link(FidelityDistribution(((None, 1.0),)), rng) is None
    assert np.isnan(sample_link(FidelityDistribution(((None, 1.0),)), rng, size=3)).all()


def test_sample_link_frequencies():
    dist = ladder_distribution(DistillationConfig(2, 0.6, 0.85))
    draws = sample_link(dist, np.random.default_rng(1), size=100_000)
    for fid, p in dist.outcomes:
        hits = np.isnan(draws) if fid is None else draws == fid
        sigma = sqrt(p * (1 - p) / draws.size)
        assert abs(hits.mean() - p) < 3 * sigma
