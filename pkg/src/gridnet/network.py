"""Square-grid topology, link heralding, cycle detection and region selection.

Coordinates are ``(row, col)`` with row 0 at the top.  Nodes are numbered
row-major.  Every node exposes up to four memories, one per direction, with
id ``4 * node + direction`` and direction order up, left, down, right.
"""
from collections import deque
from dataclasses import dataclass, field

import numpy as np

UP, LEFT, DOWN, RIGHT = range(4)
DIRECTIONS = ("up", "left", "down", "right")
_STEP = {UP: (-1, 0), LEFT: (0, -1), DOWN: (1, 0), RIGHT: (0, 1)}
_OPPOSITE = {UP: DOWN, DOWN: UP, LEFT: RIGHT, RIGHT: LEFT}


class ConfigError(ValueError):
    """Invalid grid or protocol configuration."""


def manhattan(a, b):
    return abs(a[0] - b[0]) + abs(a[1] - b[1])


@dataclass(frozen=True)
class GridSpec:
    """An ``size x size`` grid with two consumer nodes.

    Consumers may be given as ``(row, col)`` pairs or as row-major node
    numbers; they are stored as coordinates.
    """

    size: int
    consumers: tuple

    def __post_init__(self):
        if not isinstance(self.size, (int, np.integer)) or self.size < 2:
            raise ConfigError(f"grid size must be an integer >= 2, got {self.size!r}")
        if len(self.consumers) != 2:
            raise ConfigError("exactly two consumers are required")
        coords = tuple(self._coord(c) for c in self.consumers)
        if coords[0] == coords[1]:
            raise ConfigError("consumers must be distinct")
        object.__setattr__(self, "size", int(self.size))
        object.__setattr__(self, "consumers", coords)

    def _coord(self, c):
        n = self.size
        if isinstance(c, (int, np.integer)):
            if not 0 <= c < n * n:
                raise ConfigError(f"consumer node {c} outside grid of size {n}")
            return divmod(int(c), n)
        r, col = (int(v) for v in c)
        if not (0 <= r < n and 0 <= col < n):
            raise ConfigError(f"consumer {(r, col)} outside grid of size {n}")
        return (r, col)

    @property
    def distance(self):
        return manhattan(*self.consumers)

    def node_id(self, coord):
        return coord[0] * self.size + coord[1]

    def coord(self, node_id):
        return divmod(node_id, self.size)


def memory_id(spec, coord, direction):
    return 4 * spec.node_id(coord) + direction


def memory_node(spec, mem):
    return spec.coord(mem // 4)


def memory_direction(mem):
    return mem % 4


@dataclass(frozen=True)
class Region:
    level: object
    nodes: frozenset


def select_region(spec, level):
    """Nodes lying on some consumer-to-consumer walk of length ``d + 2*level``.

    Level 0 is the union of all shortest paths (the consumers' bounding
    rectangle); the result saturates at the whole grid.
    """
    n = spec.size
    if level == "all":
        return Region("all", frozenset((r, c) for r in range(n) for c in range(n)))
    level = int(level)
    if level < 0:
        raise ConfigError("region level must be >= 0")
    a, b = spec.consumers
    bound = manhattan(a, b) + 2 * level
    nodes = frozenset(
        (r, c)
        for r in range(n)
        for c in range(n)
        if manhattan(a, (r, c)) + manhattan((r, c), b) <= bound
    )
    return Region(level, nodes)


@dataclass(frozen=True)
class Link:
    """A grid link; ``source`` is the top/left memory that emits the pair."""

    index: int
    a: tuple
    b: tuple
    source: int
    target: int


@dataclass(frozen=True)
class Grid:
    spec: GridSpec
    region: Region
    links: tuple

    @property
    def active(self):
        return self.region.nodes

    def is_consumer(self, coord):
        return coord in self.spec.consumers

    def idle_nodes(self):
        n = self.spec.size
        return [(r, c) for r in range(n) for c in range(n) if (r, c) not in self.active]


def build_grid(spec, region_level="all"):
    """Mark nodes outside the selected region idle and list the active links."""
    region = select_region(spec, region_level)
    for c in spec.consumers:
        if c not in region.nodes:
            raise ConfigError(f"consumer {c} outside region {region_level}")
    n = spec.size
    links = []
    for r in range(n):
        for c in range(n):
            for d in (RIGHT, DOWN):
                dr, dc = _STEP[d]
                other = (r + dr, c + dc)
                if other[0] >= n or other[1] >= n:
                    continue
                if (r, c) in region.nodes and other in region.nodes:
                    links.append(
                        Link(
                            len(links),
                            (r, c),
                            other,
                            memory_id(spec, (r, c), d),
                            memory_id(spec, other, _OPPOSITE[d]),
                        )
                    )
    return Grid(spec, region, tuple(links))


@dataclass(frozen=True, eq=False)
class HeraldedGraph:
    """Links that heralded in one round.

    ``weights`` maps link index to Werner weight; links absent from it did
    not herald.
    """

    grid: Grid
    weights: dict
    _adj: dict = field(default=None, repr=False)

    def __post_init__(self):
        adj = {}
        for i in self.weights:
            link = self.grid.links[i]
            adj.setdefault(link.a, []).append((link.source, link.target, link.b, i))
            adj.setdefault(link.b, []).append((link.target, link.source, link.a, i))
        for v in adj.values():
            v.sort()
        object.__setattr__(self, "_adj", adj)

    @property
    def spec(self):
        return self.grid.spec

    @property
    def edges(self):
        """Heralded memory pairs ``(source, target)``."""
        return [(self.grid.links[i].source, self.grid.links[i].target) for i in sorted(self.weights)]

    def neighbors(self, node):
        """``(local_mem, remote_mem, neighbor, link_index)`` sorted by local direction."""
        return self._adj.get(node, ())

    def partner(self, mem):
        node = memory_node(self.spec, mem)
        for local, remote, _, _ in self.neighbors(node):
            if local == mem:
                return remote
        return None

    def link_of(self, mem):
        node = memory_node(self.spec, mem)
        for local, _, _, i in self.neighbors(node):
            if local == mem:
                return i
        return None

    def without(self, memories):
        """Graph with the links touching ``memories`` removed."""
        drop = {self.link_of(m) for m in memories}
        return HeraldedGraph(self.grid, {i: w for i, w in self.weights.items() if i not in drop})

    def nodes(self):
        return list(self._adj)

    def dump(self):
        """Plain-text adjacency, one ``memA memB`` line per edge."""
        return "".join(f"{a} {b}\n" for a, b in self.edges)


def herald_links(grid, link_prob, rng, weight=1.0, sampler=None):
    """Attempt every active link once.

    Each link heralds independently with probability ``link_prob`` and
    carries Werner ``weight``.  If ``sampler`` is given it is called as
    ``sampler(rng, count)`` and must return one weight per link, ``nan`` for
    no link; ``link_prob`` is then ignored.
    """
    if not 0.0 <= link_prob <= 1.0:
        raise ConfigError(f"link probability {link_prob} outside [0, 1]")
    count = len(grid.links)
    if sampler is None and link_prob in (0.0, 1.0):
        # deterministic; no draws so the caller's stream is untouched
        hits = np.full(count, link_prob == 1.0)
        weights = {i: weight for i in np.flatnonzero(hits).tolist()}
    elif sampler is None:
        hits = rng.random(count) < link_prob
        weights = {i: weight for i in np.flatnonzero(hits).tolist()}
    else:
        drawn = sampler(rng, count)
        weights = {i: float(w) for i, w in enumerate(drawn) if not np.isnan(w)}
    return HeraldedGraph(grid, weights)


@dataclass(frozen=True)
class CycleReport:
    cycles: list
    oversized_present: bool


def _canonical_cycles(graph, nodes, max_len, start_filter=None):
    order = {v: i for i, v in enumerate(sorted(nodes))}
    adj = {v: [u for _, _, u, _ in graph.neighbors(v) if u in order] for v in order}
    for s in sorted(order):
        if start_filter is not None and not start_filter(s):
            continue
        si = order[s]
        path = [s]
        on_path = {s}
        stack = [iter(adj[s])]
        while stack:
            nxt = next(stack[-1], None)
            if nxt is None:
                stack.pop()
                on_path.discard(path.pop())
                continue
            if nxt == s and len(path) >= 3:
                if order[path[1]] < order[path[-1]]:
                    yield list(path)
                continue
            if nxt in on_path or order[nxt] < si:
                continue
            if max_len is not None and len(path) >= max_len:
                continue
            path.append(nxt)
            on_path.add(nxt)
            stack.append(iter(adj[nxt]))


def enumerate_cycles(graph, max_len, consumers=()):
    """All simple node cycles of length ``<= max_len``.

    ``oversized_present`` reports whether some longer cycle avoids every
    consumer node; the search stops at the first one found.
    """
    nodes = graph.nodes()
    cycles = [(c, len(c)) for c in _canonical_cycles(graph, nodes, max_len)]
    others = {v for v in nodes if v not in set(consumers)}
    oversized = max_len is not None and _long_cycle_exists(graph, others, max_len + 1)
    return CycleReport(cycles, oversized)


def _long_cycle_exists(graph, nodes, min_len):
    """Whether a simple cycle of at least ``min_len`` nodes lies within ``nodes``.

    Depth-first witness search; a branch is cut as soon as the start can no
    longer be reached, or reached late enough, through unvisited nodes.
    """
    adj = {v: [u for _, _, u, _ in graph.neighbors(v) if u in nodes] for v in nodes}

    def reach(s, tip, on_path):
        # nodes after s reachable from tip off the path, and whether one touches s
        seen, queue = {tip}, deque([tip])
        while queue:
            u = queue.popleft()
            for w in adj[u]:
                if w in seen or w in on_path or w < s:
                    continue
                seen.add(w)
                queue.append(w)
        return any(s in adj[u] for u in seen), len(seen)

    for s in sorted(nodes):
        if len(adj[s]) < 2:
            continue
        path, on_path = [s], {s}
        stack = [iter(adj[s])]
        while stack:
            nxt = next(stack[-1], None)
            if nxt is None:
                stack.pop()
                on_path.discard(path.pop())
                continue
            if nxt == s:
                if len(path) >= min_len:
                    return True
                continue
            if nxt in on_path or nxt < s:
                continue
            path.append(nxt)
            on_path.add(nxt)
            hit, room = reach(s, nxt, on_path)
            if not hit or len(path) + room - 1 < min_len:
                on_path.discard(path.pop())
                continue
            stack.append(iter(adj[nxt]))
    return False


def has_cycle_of_length(graph, length):
    """Whether some simple cycle has exactly ``length`` edges."""
    return any(len(c) == length for c in _canonical_cycles(graph, graph.nodes(), length))


def has_cycle(graph, exclude=()):
    """Whether the heralded node graph, minus ``exclude`` nodes, has a cycle."""
    exclude = set(exclude)
    parent = {}

    def find(x):
        while parent.setdefault(x, x) != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i in graph.weights:
        link = graph.grid.links[i]
        if link.a in exclude or link.b in exclude:
            continue
        ra, rb = find(link.a), find(link.b)
        if ra == rb:
            return True
        parent[ra] = rb
    return False


def bottom_right_memory(spec, cycle):
    """Memory to X-measure for a cycle: the left-pointing memory of its lowest, rightmost node."""
    if not cycle:
        raise ValueError("empty cycle")
    corner = max(cycle)
    i = cycle.index(corner)
    nbrs = {cycle[i - 1], cycle[(i + 1) % len(cycle)]}
    left = (corner[0], corner[1] - 1)
    if left not in nbrs:
        raise ValueError(f"{cycle} is not a grid cycle")
    return memory_id(spec, corner, LEFT)


def corner_memories(graph, max_len=None):
    """Bottom-right memories of every cycle of length ``<= max_len``.

    A node is the bottom-right corner of such a cycle iff its left and up
    neighbours are joined, through nodes strictly before it in row-major
    order, by a path of at most ``max_len - 2`` edges.  Equivalent to
    collecting :func:`bottom_right_memory` over :func:`enumerate_cycles`
    without enumerating.
    """
    spec = graph.spec
    limit = None if max_len is None else max_len - 2
    found = []
    for v in sorted(graph.nodes()):
        nbrs = {u: i for _, _, u, i in graph.neighbors(v)}
        left, up = (v[0], v[1] - 1), (v[0] - 1, v[1])
        if left not in nbrs or up not in nbrs:
            continue
        dist = {left: 0}
        queue = deque([left])
        hit = False
        while queue and not hit:
            u = queue.popleft()
            if limit is not None and dist[u] >= limit:
                continue
            for _, _, w, _ in graph.neighbors(u):
                if w >= v or w in dist:
                    continue
                dist[w] = dist[u] + 1
                if w == up:
                    hit = True
                    break
                queue.append(w)
        if hit:
            found.append(memory_id(spec, v, LEFT))
    return found


def connected(graph, a, b):
    if a == b:
        return True
    seen = {a}
    queue = deque([a])
    while queue:
        u = queue.popleft()
        for _, _, w, _ in graph.neighbors(u):
            if w == b:
                return True
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return False
