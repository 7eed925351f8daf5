"""Trial orchestration, sweeps and cycle statistics with reproducible seeding.

Every trial draws from its own stream
``SeedSequence(master_seed, spawn_key=(config_digest, trial))`` so results
do not depend on sweep order, on which other points are evaluated, or on
how trials are split across workers.
"""
import hashlib
import itertools
import json
import math
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .network import (
    ConfigError,
    GridSpec,
    build_grid,
    has_cycle,
    has_cycle_of_length,
    herald_links,
)
from .protocol import GLOBAL, ProtocolConfig, apply_x_rules, execute_round
from .state import coherent_information

SWEEPABLE = tuple(f.name for f in fields(ProtocolConfig))


@dataclass(frozen=True)
class SimulationSpec:
    protocol: ProtocolConfig
    trials: int
    master_seed: int = 0
    axes: dict = field(default_factory=dict)

    def __post_init__(self):
        if not isinstance(self.trials, (int, np.integer)) or self.trials < 1:
            raise ConfigError(f"trials: expected an integer >= 1, got {self.trials!r}")
        if not isinstance(self.master_seed, (int, np.integer)) or not 0 <= self.master_seed < 2**64:
            raise ConfigError("master_seed: expected a 64-bit unsigned integer")
        for key, values in self.axes.items():
            if key not in SWEEPABLE:
                raise ConfigError(f"axes: unknown axis {key!r}")
            if len(values) == 0:
                raise ConfigError(f"axes: axis {key!r} is empty")


@dataclass(frozen=True)
class AggregateStats:
    mean_rate: float
    abort_fraction: float
    mean_swaps: float
    std_error: float
    raw_mean_ci: float
    trials: int


def _canonical(config):
    g = config.grid
    return {
        "grid": [g.size, [list(c) for c in g.consumers]],
        "link_prob": repr(float(config.link_prob)),
        "link_fidelity": repr(float(config.link_fidelity)),
        "k_hop": str(config.k_hop),
        "region_level": str(config.region_level),
        "scheduler": config.scheduler,
        "distill_rounds": int(config.distill_rounds),
    }


def config_digest(config):
    """Stable 32-bit digest of a protocol configuration."""
    text = json.dumps(_canonical(config), sort_keys=True)
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:4], "little")


def trial_rng(master_seed, digest, trial):
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(digest, trial)))


def run_trials(spec, trace=None):
    """Execute ``spec.trials`` rounds of ``spec.protocol`` and aggregate."""
    config = spec.protocol
    digest = config_digest(config)
    t = config.distill_rounds
    rates, raw, swaps = [], [], []
    aborts = 0
    for trial in range(spec.trials):
        rng = trial_rng(spec.master_seed, digest, trial)
        lines = [] if trace is not None else None
        out = execute_round(config, rng, trace=lines)
        if trace is not None:
            trace.append(f"trial={trial} aborted={out.reason or 'no'}")
            trace.extend(lines)
        if out.aborted:
            aborts += 1
            ci = 0.0
        else:
            ci = coherent_information(out.final_state)
        rates.append(max(0.0, ci) / t)
        raw.append(ci / t)
        swaps.append(out.swaps_performed)
    n = spec.trials
    mean = math.fsum(rates) / n
    if n > 1:
        var = math.fsum((r - mean) ** 2 for r in rates) / (n - 1)
        err = math.sqrt(var / n)
    else:
        err = 0.0
    return AggregateStats(
        mean_rate=mean,
        abort_fraction=aborts / n,
        mean_swaps=math.fsum(swaps) / n,
        std_error=err,
        raw_mean_ci=math.fsum(raw) / n,
        trials=n,
    )


def sweep_points(spec):
    """Configurations of the Cartesian product of ``spec.axes``."""
    keys = sorted(spec.axes)
    for combo in itertools.product(*(spec.axes[k] for k in keys)):
        yield dict(zip(keys, combo)), replace(spec.protocol, **dict(zip(keys, combo)))


@dataclass(frozen=True)
class SweepTable:
    rows: list
    envelope: dict


def envelope_sweep(spec, envelope_keys=("link_fidelity", "link_prob")):
    """Evaluate every axis point and the best rate per ``envelope_keys`` value.

    Returns
    -------
    SweepTable
        ``rows`` holds ``(config, stats)`` in axis order; ``envelope`` maps
        a tuple of ``envelope_keys`` values to the best ``(config, stats)``.
    """
    rows = []
    envelope = {}
    for _, config in sweep_points(spec):
        stats = run_trials(SimulationSpec(config, spec.trials, spec.master_seed))
        rows.append((config, stats))
        key = tuple(getattr(config, k) for k in envelope_keys)
        best = envelope.get(key)
        if best is None or stats.mean_rate > best[1].mean_rate:
            envelope[key] = (config, stats)
    return SweepTable(rows, envelope)


def row_placement(distance, size):
    """Consumers in one row, centred in a grid of ``size``."""
    if distance >= size:
        raise ConfigError(f"distance {distance} does not fit a grid of size {size}")
    row = (size - 1) // 2
    c0 = (size - 1 - distance) // 2
    return GridSpec(size, ((row, c0), (row, c0 + distance)))


def distance_sweep(
    distances,
    link_prob,
    link_fidelity,
    trials,
    master_seed=0,
    size_offsets=(1, 3),
    regions=(0, 1, 2, "all"),
    distill_rounds=(1,),
    scheduler="consumer-greedy",
):
    """Best rate per Manhattan distance over grid size, region and ``t``.

    Returns a list of ``(distance, best_config, best_stats, rows)``.
    """
    out = []
    for d in distances:
        rows = []
        for off in size_offsets:
            grid = row_placement(d, d + off)
            for region in regions:
                for t in distill_rounds:
                    config = ProtocolConfig(
                        grid, link_prob, link_fidelity, GLOBAL, region, scheduler, t
                    )
                    stats = run_trials(SimulationSpec(config, trials, master_seed))
                    rows.append((config, stats))
        best = max(rows, key=lambda r: r[1].mean_rate)
        out.append((d, best[0], best[1], rows))
    return out


@dataclass(frozen=True)
class CycleRow:
    n: int
    p: float
    cycle_len: int
    fraction_pre: float
    fraction_post: float


def cycle_fraction_study(sizes, link_probs, cycle_lens, trials, master_seed=0):
    """Per ``(n, p, L)`` fractions of rounds with polygons.

    ``fraction_pre`` counts rounds whose raw heralded graph contains a cycle
    of exactly ``L`` edges.  ``fraction_post`` counts rounds in which a
    cycle survives the X-rule with ``k = (L - 2) / 2``, i.e. rounds holding a
    polygon the rule cannot resolve.
    """
    if trials < 1000:
        raise ConfigError(f"trials: cycle statistics need at least 1000 rounds, got {trials}")
    for L in cycle_lens:
        if L < 4 or L % 2:
            raise ConfigError(f"cycle_lens: grid polygons have even length >= 4, got {L}")
    rows = []
    for n in sizes:
        grid = build_grid(GridSpec(n, (0, n * n - 1)))
        for p in link_probs:
            pre = {L: 0 for L in cycle_lens}
            post = {L: 0 for L in cycle_lens}
            key = int.from_bytes(
                hashlib.sha256(f"cycles:{n}:{float(p)!r}".encode()).digest()[:4], "little"
            )
            for trial in range(trials):
                rng = trial_rng(master_seed, key, trial)
                graph = herald_links(grid, p, rng)
                for L in cycle_lens:
                    pre[L] += has_cycle_of_length(graph, L)
                    rules = apply_x_rules(graph, (L - 2) // 2)
                    post[L] += has_cycle(rules.graph)
            for L in cycle_lens:
                rows.append(CycleRow(n, p, L, pre[L] / trials, post[L] / trials))
    return rows
