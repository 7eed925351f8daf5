"""One protocol round: heralding, X-rules, sequential GHZ swaps, consumer state.

The swap sequence is executed on a pluggable fragment backend.  The default
:class:`LabelEngine` tracks GHZ-diagonal label vectors; the dense oracle
engine replays the same sequence with explicit density matrices.
"""
from collections import deque
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import kernels
from . import state as st
from .distillation import DistillationConfig, ladder_distribution, sample_link
from .network import (
    DOWN,
    LEFT,
    RIGHT,
    UP,
    ConfigError,
    GridSpec,
    build_grid,
    connected,
    corner_memories,
    has_cycle,
    herald_links,
    memory_id,
    memory_node,
)

SCHEDULERS = ("consumer-greedy", "linear-sweep")
GLOBAL = "global"


@dataclass(frozen=True)
class ProtocolConfig:
    grid: GridSpec
    link_prob: float
    link_fidelity: float
    k_hop: object = GLOBAL
    region_level: object = "all"
    scheduler: str = "consumer-greedy"
    distill_rounds: int = 1

    def __post_init__(self):
        if not isinstance(self.grid, GridSpec):
            raise ConfigError("grid: expected a GridSpec")
        if not 0.0 <= self.link_prob <= 1.0:
            raise ConfigError(f"link_prob: {self.link_prob} outside [0, 1]")
        if not 0.25 <= self.link_fidelity <= 1.0:
            raise ConfigError(f"link_fidelity: {self.link_fidelity} outside [1/4, 1]")
        if self.k_hop != GLOBAL and (not isinstance(self.k_hop, int) or self.k_hop < 1):
            raise ConfigError(f"k_hop: expected an integer >= 1 or 'global', got {self.k_hop!r}")
        if self.region_level != "all" and (
            not isinstance(self.region_level, int) or self.region_level < 0
        ):
            raise ConfigError(f"region_level: expected an integer >= 0 or 'all', got {self.region_level!r}")
        if self.scheduler not in SCHEDULERS:
            raise ConfigError(f"scheduler: expected one of {SCHEDULERS}, got {self.scheduler!r}")
        if not isinstance(self.distill_rounds, int) or not 1 <= self.distill_rounds <= 8:
            raise ConfigError(f"distill_rounds: expected an integer in [1, 8], got {self.distill_rounds!r}")

    @property
    def max_cycle(self):
        return None if self.k_hop == GLOBAL else 2 * self.k_hop + 2


@dataclass(frozen=True)
class XRuleResult:
    graph: object
    measured: tuple
    pruned: tuple
    aborted: bool


@dataclass(frozen=True)
class RoundOutcome:
    aborted: bool
    reason: str
    final_state: object
    swaps_performed: int
    max_state_qubits: int


@dataclass(frozen=True)
class Visit:
    node: tuple
    action: str
    arity: int = 0


class LabelEngine:
    """Fragment backend on :class:`~gridnet.state.GHZDiagonalState`.

    With ``rng`` set, GHZ and X outcomes are drawn uniformly and tracked in
    the Pauli frame; otherwise the canonical outcome is used.
    """

    def __init__(self, rng=None):
        self.rng = rng

    def link(self, weight, qa, qb):
        return st.bell_diagonal(weight, (qa, qb))

    def qubits(self, frag):
        return frag.qubits

    def fuse(self, frags, node_qubits):
        outcome = 0 if self.rng is None else int(self.rng.integers(1 << len(frags)))
        return st.fuse(frags, node_qubits, outcome)

    def measure_x(self, frag, qubit):
        outcome = 0 if self.rng is None else int(self.rng.integers(2))
        return st.measure_x(frag, qubit, outcome)

    def to_state(self, frag):
        return frag.resolved()


class PauliEngine:
    """Fragment backend that propagates each link's Pauli error to the end.

    Werner noise is an independent Pauli error per link and every protocol
    step is Clifford, so each link's two generating errors map linearly onto
    the final Bell label.  A fragment is ``(qubits, links, img1, img2)``
    with the current label images of the link errors; the final state comes
    from a Walsh-Hadamard convolution of the per-link distributions.
    """

    def __init__(self):
        self.weights = {}

    def link(self, weight, qa, qb):
        i = len(self.weights)
        self.weights[i] = weight
        return ((qa, qb), np.array([i]), np.array([1], dtype=np.int64), np.array([2], dtype=np.int64))

    def qubits(self, frag):
        return frag[0]

    def fuse(self, frags, node_qubits):
        total = sum(len(f[0]) for f in frags) - len(frags)
        if total == 0:
            return None
        qubits, links, im1, im2 = [], [], [], []
        offset = 0
        for (qs, ls, a, b), q in zip(frags, node_qubits):
            n, s = len(qs), qs.index(q)
            if total >= 63:
                raise st.ProtocolViolation("fragment too large for packed labels")
            im1.append(kernels.fuse_images(a, n, s, offset, total))
            im2.append(kernels.fuse_images(b, n, s, offset, total))
            links.append(ls)
            qubits.extend(qs[:s] + qs[s + 1 :])
            offset += n - 1
        return (tuple(qubits), np.concatenate(links), np.concatenate(im1), np.concatenate(im2))

    def measure_x(self, frag, qubit):
        qs, ls, a, b = frag
        if len(qs) == 1:
            return None
        n, s = len(qs), qs.index(qubit)
        return (
            qs[:s] + qs[s + 1 :],
            ls,
            kernels.drop_images(a, n, s),
            kernels.drop_images(b, n, s),
        )

    def to_state(self, frag):
        qs, ls, a, b = frag
        w = np.array([self.weights[i] for i in ls.tolist()])
        coeffs = kernels.bell_from_images(w, a, b)
        return st.GHZDiagonalState(qs, coeffs)


def apply_x_rules(graph, k_hop, consumers=()):
    """Mark bottom-right memories of short polygons and check the abort rule.

    Every cycle of at most ``2k+2`` edges loses its bottom-right edge.  With
    finite ``k`` the round aborts if a cycle survives among helper nodes.
    ``pruned`` lists helper memories left with a single heralded partner.
    """
    max_len = None if k_hop == GLOBAL else 2 * k_hop + 2
    measured = corner_memories(graph, max_len)
    post = graph.without(measured)
    aborted = max_len is not None and has_cycle(post, exclude=consumers)
    gone = set(measured)
    pruned = []
    spec = graph.spec
    for node in graph.nodes():
        if node in consumers:
            continue
        left = [m for m, _, _, _ in graph.neighbors(node) if m not in gone]
        if len(left) == 1:
            pruned.append(left[0])
    return XRuleResult(post, tuple(measured), tuple(sorted(pruned)), aborted)


def plan_schedule(graph, config):
    """Helper nodes in visiting order for the post-rule ``graph``."""
    spec = config.grid
    consumers = set(spec.consumers)
    if config.scheduler == "linear-sweep":
        grid = _grid(spec, config.region_level)
        return [v for v in sorted(grid.active) if v not in consumers]
    start = spec.consumers[0]
    order, seen = [], {start}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for _, _, w, _ in graph.neighbors(u):
            if w in seen:
                continue
            seen.add(w)
            if w in consumers:
                continue
            order.append(w)
            queue.append(w)
    return order


@lru_cache(maxsize=64)
def _grid(spec, level):
    return build_grid(spec, level)


@lru_cache(maxsize=64)
def _sampler(rounds, link_prob, fidelity):
    dist = ladder_distribution(DistillationConfig(rounds, link_prob, fidelity))

    def draw(rng, count):
        f = sample_link(dist, rng, size=count)
        return (4.0 * f - 1.0) / 3.0

    return draw


def herald(config, rng):
    grid = _grid(config.grid, config.region_level)
    if config.distill_rounds > 1:
        sampler = _sampler(config.distill_rounds, config.link_prob, config.link_fidelity)
        return herald_links(grid, config.link_prob, rng, sampler=sampler)
    weight = (4.0 * config.link_fidelity - 1.0) / 3.0
    return herald_links(grid, config.link_prob, rng, weight=weight)


def execute_round(config, rng, engine=None, trace=None, graph=None):
    """Run one round and return its :class:`RoundOutcome`.

    ``graph`` replaces the heralding step when given.  ``trace``, if a list,
    receives one line per scheduled visit.
    """
    if graph is None:
        graph = herald(config, rng)
    consumers = config.grid.consumers
    rules = apply_x_rules(graph, config.k_hop, consumers)
    if rules.aborted:
        return RoundOutcome(True, "oversized-polygon", None, 0, 0)
    if not connected(rules.graph, *consumers):
        return RoundOutcome(True, "disconnected", None, 0, 0)
    if engine is None and trace is None:
        return _compiled_swaps(graph, rules, config)
    return run_swaps(graph, rules, config, engine or PauliEngine(), trace)


_STATUS = {
    1: "a node holds two memories of one fragment",
    2: "consumers do not share a fragment",
    3: "final fragment is not a consumer pair",
    4: "fragment too large for packed labels",
}


def _compiled_swaps(graph, rules, config):
    spec = config.grid
    links = graph.grid.links
    order = sorted(graph.weights)
    src = [links[i].source for i in order]
    dst = [links[i].target for i in order]
    weights = [graph.weights[i] for i in order]
    schedule = [spec.node_id(v) for v in plan_schedule(rules.graph, config)]
    a, b = (spec.node_id(v) for v in spec.consumers)
    status, coeffs, swaps, largest, ends = kernels.swap_round(
        src, dst, weights, list(rules.measured), schedule, spec.size**2, a, b
    )
    if status:
        raise st.ProtocolViolation(_STATUS[status])
    return RoundOutcome(False, "", st.GHZDiagonalState(ends, coeffs), swaps, largest)


def run_swaps(graph, rules, config, engine, trace=None):
    spec = config.grid
    consumers = spec.consumers
    frag_of = {}
    for i, w in graph.weights.items():
        link = graph.grid.links[i]
        frag = engine.link(w, link.source, link.target)
        frag_of[link.source] = frag_of[link.target] = frag
    largest = 2 if frag_of else 0

    def store(frag, dropped):
        for q in dropped:
            frag_of.pop(q, None)
        if frag is not None:
            for q in engine.qubits(frag):
                frag_of[q] = frag

    for mem in rules.measured:
        store(engine.measure_x(frag_of[mem], mem), [mem])

    swaps = 0
    for node in plan_schedule(rules.graph, config):
        mems = [memory_id(spec, node, d) for d in (UP, LEFT, DOWN, RIGHT)]
        mems = [m for m in mems if m in frag_of]
        frags = [frag_of[m] for m in mems]
        if len({id(f) for f in frags}) != len(frags):
            raise st.ProtocolViolation(f"node {node} holds two memories of one fragment")
        if len(mems) >= 2:
            out = engine.fuse(frags, mems)
            store(out, mems)
            swaps += 1
            action = f"ghz({len(mems)})"
        elif len(mems) == 1:
            out = engine.measure_x(frags[0], mems[0])
            store(out, mems)
            action = "X"
        else:
            out = None
            action = "skip"
        size = 0 if out is None else len(engine.qubits(out))
        largest = max(largest, size)
        if trace is not None:
            trace.append(f"node=({node[0]},{node[1]}) action={action} state_qubits={size}")

    ends = _consumer_memories(spec, frag_of, engine)
    frag = frag_of[ends[0]]
    for q in list(engine.qubits(frag)):
        if q not in ends and memory_node(spec, q) in consumers:
            frag = engine.measure_x(frag, q)
    if len(engine.qubits(frag)) != 2:
        raise st.ProtocolViolation(
            f"final fragment spans {len(engine.qubits(frag))} qubits, expected 2"
        )
    # Bell-diagonal labels are symmetric in the two qubits
    final = engine.to_state(frag)
    final = st.GHZDiagonalState(ends, final.coeffs, _checked=True)
    return RoundOutcome(False, "", final, swaps, largest)


def _consumer_memories(spec, frag_of, engine):
    a, b = spec.consumers
    b_mems = {memory_id(spec, b, d) for d in range(4)}
    for d in (UP, LEFT, DOWN, RIGHT):
        ma = memory_id(spec, a, d)
        if ma not in frag_of:
            continue
        qs = engine.qubits(frag_of[ma])
        hits = [q for q in qs if q in b_mems]
        if hits:
            mb = min(hits, key=lambda q: q % 4)
            return (ma, mb)
    raise st.ProtocolViolation("consumers do not share a fragment")


def sweep_size_bound(spec):
    """Extra qubits ``c`` allowed above the grid size for the linear sweep.

    Depends on the consumer degrees (2 corner, 3 edge, 4 interior) and
    whether the consumers are adjacent.
    """
    n = spec.size

    def degree(v):
        return sum(0 < x < n - 1 for x in v) + 2

    da, db = sorted(degree(v) for v in spec.consumers)
    adjacent = spec.distance == 1
    table = {
        (2, 2): 3,
        (2, 3): 4 if adjacent else 7,
        (2, 4): 7,
        (3, 3): 6,
        (3, 4): 8,
        (4, 4): 7 if adjacent else 9,
    }
    return table[(da, db)]
