"""Oracle-equivalence suites shared by the ``validate`` command and the tests."""
from dataclasses import dataclass
from math import sqrt

import numpy as np

from . import oracle
from . import state as st
from .distillation import (
    DistillationConfig,
    bbpssw,
    compare_t6,
    ladder_distribution,
    monte_carlo_ladder,
)
from .network import GridSpec
from .protocol import SCHEDULERS, ProtocolConfig, execute_round, herald

TOLERANCE = 1e-10


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: bool
    max_deviation: float
    detail: str = ""


def state_algebra_suite(seed=0):
    """Swap, mixed-swap, X-measure and merge formulas against explicit matrices."""
    rng = np.random.default_rng(seed)
    dev = 0.0
    for n in (2, 3, 4):
        for w in (0.0, 0.3, 0.6, 0.85, 1.0):
            rho, _ = oracle.ghz_swap_dense([w] * n)
            diag, off = oracle.labels_from_dense(rho)
            dev = max(dev, np.abs(diag - st.ghz_swap_equal(n, w).coeffs).max(), off)
    for _ in range(10):
        n = int(rng.integers(2, 5))
        ws = rng.uniform(0, 1, n)
        rho, _ = oracle.ghz_swap_dense(list(ws))
        diag, _ = oracle.labels_from_dense(rho)
        dev = max(dev, np.abs(diag - st.ghz_swap_mixed(list(ws)).coeffs).max())
    for _ in range(10):
        n = int(rng.integers(3, 6))
        coeffs = rng.dirichlet(np.ones(1 << n))
        state = st.GHZDiagonalState(tuple(range(n)), coeffs)
        pos = int(rng.integers(n))
        got = st.x_measure(state, pos)
        rho = oracle.dense_from_labels(coeffs)
        out, _, _ = oracle.oracle_project([(rho, tuple(range(n)))], [pos], oracle.PLUS)
        diag, off = oracle.labels_from_dense(out)
        dev = max(dev, np.abs(diag - got.coeffs).max(), off)
    for _ in range(10):
        n = int(rng.integers(2, 4))
        main = st.GHZDiagonalState(tuple(range(n)), rng.dirichlet(np.ones(1 << n)))
        arity = int(rng.integers(2, 5))
        ws = rng.uniform(0, 1, arity - 1)
        incident = [st.bell_diagonal(w, (100 + i, 200 + i)) for i, w in enumerate(ws)]
        node = [n - 1] + [100 + i for i in range(arity - 1)]
        got = st.merge_swap(main, incident, node)
        frags = [(oracle.dense_from_labels(main.coeffs), main.qubits)]
        frags += [(oracle.werner_weight_matrix(w), s.qubits) for w, s in zip(ws, incident)]
        out, _, _ = oracle.oracle_project(frags, node, oracle.ghz_vector(arity))
        diag, off = oracle.labels_from_dense(out)
        dev = max(dev, np.abs(diag - got.coeffs).max(), off)
    return SuiteResult("state-algebra", bool(dev < TOLERANCE), float(dev))


def protocol_suite(rounds=20, seed=0):
    """Full rounds on a 3x3 grid replayed with explicit density matrices."""
    rng = np.random.default_rng(seed)
    dev = 0.0
    checked = 0
    for i in range(rounds):
        a, b = (int(x) for x in rng.choice(9, 2, replace=False))
        config = ProtocolConfig(
            GridSpec(3, (a, b)),
            float(rng.uniform(0.5, 1.0)),
            float(rng.uniform(0.8, 1.0)),
            k_hop=1 if i % 2 else "global",
            scheduler=SCHEDULERS[i % 2],
        )
        graph = herald(config, rng)
        fast = execute_round(config, None, graph=graph)
        dense = execute_round(config, None, graph=graph, engine=oracle.DenseEngine())
        if fast.aborted != dense.aborted:
            return SuiteResult("protocol", False, float("inf"), "abort flags differ")
        if fast.aborted:
            continue
        checked += 1
        dev = max(dev, np.abs(fast.final_state.coeffs - dense.final_state.coeffs).max())
    return SuiteResult("protocol", bool(dev < TOLERANCE), float(dev), f"{checked} rounds compared")


def distillation_suite(samples=20000, seed=0):
    """BBPSSW against its circuit and the ladder against direct simulation."""
    dev = 0.0
    for f in np.linspace(0.25, 1.0, 7):
        exact = np.array(bbpssw(f))
        dev = max(dev, np.abs(exact - np.array(oracle.bbpssw_dense(f))).max())
    worst_sigma = 0.0
    rng = np.random.default_rng(seed)
    for t in (2, 4, 6):
        config = DistillationConfig(t, 0.7, 0.8)
        dist = ladder_distribution(config)
        dev = max(dev, abs(dist.total() - 1.0))
        freq = monte_carlo_ladder(config, samples, rng)
        for tier, (_, p) in zip(dist.tiers, dist.outcomes):
            sigma = sqrt(max(p * (1 - p), 1e-12) / samples)
            worst_sigma = max(worst_sigma, abs(freq.get(tier, 0.0) - p) / sigma)
    ok = bool(dev < TOLERANCE and worst_sigma < 5.0)
    return SuiteResult("distillation", ok, float(dev), f"ladder vs simulation within {worst_sigma:.2f} sigma")


def closed_form_t6_table(p=0.7, f0=0.8):
    """Reference t=6 closed forms next to the enumerated ladder (informational)."""
    names = {None: "no-link", 0: "f0", 1: "f2", 2: "f4"}
    lines = ["tier,closed_form,enumerated,difference"]
    for tier, closed, enum in compare_t6(p, f0):
        lines.append(f"{names[tier]},{closed:.10f},{enum:.10f},{closed - enum:+.3e}")
    return lines


def run_all():
    return [state_algebra_suite(), protocol_suite(), distillation_suite()]
