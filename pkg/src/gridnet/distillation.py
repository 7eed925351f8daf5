"""Link-level 2->1 recurrence distillation and the t-step pairing ladder."""
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from math import comb, fsum

import numpy as np

NO_LINK = None
MAX_ROUNDS = 8


class DomainError(ValueError):
    pass


def bbpssw(f):
    """Output fidelity and success probability of one BBPSSW step on two Werner(f) pairs."""
    if not 0.25 <= f <= 1.0:
        raise DomainError(f"fidelity {f} outside [1/4, 1]")
    e = (1.0 - f) / 3.0
    p_succ = f * f + 2.0 * f * e + 5.0 * e * e
    return (f * f + e * e) / p_succ, p_succ


@dataclass(frozen=True)
class DistillationConfig:
    rounds: int
    link_prob: float
    base_fidelity: float

    def __post_init__(self):
        if not isinstance(self.rounds, (int, np.integer)) or not 1 <= self.rounds <= MAX_ROUNDS:
            raise DomainError(f"rounds must be an integer in [1, {MAX_ROUNDS}]")
        if not 0.0 <= self.link_prob <= 1.0:
            raise DomainError(f"link_prob {self.link_prob} outside [0, 1]")
        if not 0.25 <= self.base_fidelity <= 1.0:
            raise DomainError(f"base_fidelity {self.base_fidelity} outside [1/4, 1]")


@dataclass(frozen=True)
class FidelityDistribution:
    """``outcomes`` pairs a fidelity (``None`` for no link) with its probability.

    ``tiers`` gives the number of successful distillation levels behind each
    fidelity, in the same order.
    """

    outcomes: tuple
    tiers: tuple = ()

    def total(self):
        return fsum(p for _, p in self.outcomes)

    def probability(self, fidelity):
        return fsum(p for f, p in self.outcomes if f == fidelity)


def tier_fidelities(base_fidelity, levels):
    """``[f_0, f_2, f_4, ...]``: fidelity and success probability per tier."""
    fids, probs = [base_fidelity], []
    for _ in range(levels):
        f, p = bbpssw(fids[-1])
        probs.append(p)
        fids.append(f)
    return fids, probs


def ladder_outcome(count, succeed):
    """Run the pairing policy on ``count`` fresh pairs.

    ``succeed(tier)`` returns whether one distillation at ``tier`` works.
    Pairs are matched within a tier from the lowest tier up, successes are
    promoted, failures are lost and an odd pair stays where it is.  Returns
    the best surviving tier or ``None``.
    """
    tiers = Counter({0: count}) if count else Counter()
    level = 0
    while level <= max(tiers, default=-1):
        pairs = tiers[level] // 2
        for _ in range(pairs):
            if succeed(level):
                tiers[level + 1] += 1
        tiers[level] -= 2 * pairs
        level += 1
    alive = [t for t, c in tiers.items() if c > 0]
    return max(alive) if alive else None


def _tier_distribution(count, succ_probs):
    """Exact distribution of the best tier for ``count`` heralded pairs."""
    # state: tuple of counts per tier still to be processed, carried level by level
    dist = {(): 1.0} if count == 0 else {}
    frontier = {(count,): 1.0} if count else {}
    level = 0
    final = Counter(dist)
    while frontier:
        nxt = Counter()
        for state, prob in frontier.items():
            here = state[level]
            pairs = here // 2
            keep = here - 2 * pairs
            q = succ_probs[level]
            for s in range(pairs + 1):
                w = prob * comb(pairs, s) * q**s * (1 - q) ** (pairs - s)
                if w == 0.0:
                    continue
                new = state[:level] + (keep, s)
                if s >= 2:
                    nxt[new] += w
                else:
                    final[new] += w
        frontier = nxt
        level += 1
    out = Counter()
    for state, prob in final.items():
        alive = [t for t, c in enumerate(state) if c > 0]
        out[max(alive) if alive else None] += prob
    return out


@lru_cache(maxsize=256)
def ladder_distribution(config):
    """Exact post-ladder link distribution for ``config``.

    The number of heralded pairs is Binomial(rounds, link_prob); each count
    is pushed through the pairing policy of :func:`ladder_outcome`.
    """
    t, p = config.rounds, config.link_prob
    levels = max(t.bit_length() - 1, 0)
    fids, succ = tier_fidelities(config.base_fidelity, levels)
    succ = succ + [0.0]
    by_tier = Counter()
    for h in range(t + 1):
        w = comb(t, h) * p**h * (1 - p) ** (t - h)
        if w == 0.0:
            continue
        for tier, q in _tier_distribution(h, succ).items():
            by_tier[tier] += w * q
    keys = sorted(by_tier, key=lambda k: -1 if k is None else k)
    outcomes = tuple((NO_LINK if k is None else fids[k], by_tier[k]) for k in keys)
    return FidelityDistribution(outcomes, tuple(keys))


def sample_link(dist, rng, size=None):
    """Draw link fidelities from ``dist``; ``nan`` marks no link when ``size`` is given."""
    probs = np.array([p for _, p in dist.outcomes])
    probs = probs / probs.sum()
    values = [f for f, _ in dist.outcomes]
    if size is None:
        return values[rng.choice(len(values), p=probs)]
    arr = np.array([np.nan if v is None else v for v in values])
    return arr[rng.choice(len(values), size=size, p=probs)]


def monte_carlo_ladder(config, samples, rng):
    """Frequencies of the best tier from direct simulation of the ladder."""
    fids, succ = tier_fidelities(config.base_fidelity, MAX_ROUNDS)
    counts = Counter()
    heralded = rng.binomial(config.rounds, config.link_prob, size=samples)
    for h in heralded.tolist():
        counts[ladder_outcome(h, lambda lvl: rng.random() < succ[lvl])] += 1
    return {k: c / samples for k, c in counts.items()}


def closed_form_t6(p, f0):
    """Reference closed forms for the t=6 ladder, keyed by tier (``None`` = no link).

    Kept for comparison only; the ``f0`` entry lacks the five-herald branch
    in which both first-level steps succeed and the second-level step fails.
    """
    P0 = bbpssw(f0)[1]
    P2 = bbpssw(bbpssw(f0)[0])[1]
    C = comb
    q = 1 - p
    nolink = (
        q**6
        + C(6, 2) * p**2 * q**4 * (1 - P0)
        + C(6, 4) * p**4 * q**2 * ((1 - P0) ** 2 + P0**2 * (1 - P2))
        + p**6 * ((1 - P0) ** 3 + C(3, 2) * (1 - P0) * P0**2 * (1 - P2))
    )
    f0_ = C(6, 1) * p * q**5 + C(6, 3) * p**3 * q**3 * (1 - P0) + C(6, 5) * p**5 * q * (1 - P0) ** 2
    f2 = (
        C(6, 2) * p**2 * q**4 * P0
        + C(6, 4) * p**4 * q**2 * (2 * P0 * (1 - P0))
        + p**6 * (C(3, 1) * (1 - P0) ** 2 * P0 + P0**3 * (1 - P2))
        + C(6, 5) * p**5 * q * (2 * P0 * (1 - P0))
        + C(6, 3) * p**3 * q**3 * P0
    )
    f4 = (
        C(6, 4) * p**4 * q**2 * P0**2 * P2
        + C(6, 5) * p**5 * q * P0**2 * P2
        + p**6 * (C(3, 2) * (1 - P0) * P0**2 * P2 + P0**3 * P2)
    )
    return {None: nolink, 0: f0_, 1: f2, 2: f4}


def compare_t6(p, f0):
    """Rows ``(tier, closed_form, enumerated)`` for the t=6 ladder."""
    dist = ladder_distribution(DistillationConfig(6, p, f0))
    enum = dict(zip(dist.tiers, (w for _, w in dist.outcomes)))
    closed = closed_form_t6(p, f0)
    return [(k, closed[k], enum.get(k, 0.0)) for k in (None, 0, 1, 2)]
