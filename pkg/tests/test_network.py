import itertools

import networkx as nx
import numpy as np
import pytest

from gridnet.network import (
    DOWN,
    LEFT,
    RIGHT,
    UP,
    ConfigError,
    GridSpec,
    HeraldedGraph,
    bottom_right_memory,
    build_grid,
    connected,
    corner_memories,
    enumerate_cycles,
    has_cycle,
    has_cycle_of_length,
    herald_links,
    memory_direction,
    memory_id,
    memory_node,
    select_region,
)


def graph_with(grid, pairs):
    """Heralded graph containing the links between the given node pairs."""
    index = {frozenset((l.a, l.b)): l.index for l in grid.links}
    return HeraldedGraph(grid, {index[frozenset(p)]: 1.0 for p in pairs})


def to_nx(graph):
    g = nx.Graph()
    for i in graph.weights:
        link = graph.grid.links[i]
        g.add_edge(link.a, link.b)
    return g


def nx_cycles(graph, max_len=None):
    cycles = nx.simple_cycles(to_nx(graph), length_bound=max_len)
    return sorted(tuple(sorted(c)) for c in cycles if len(c) >= 3)


def test_memory_layout_round_trips():
    spec = GridSpec(4, (0, 15))
    for node in itertools.product(range(4), repeat=2):
        for d in (UP, LEFT, DOWN, RIGHT):
            m = memory_id(spec, node, d)
            assert memory_node(spec, m) == node
            assert memory_direction(m) == d


def test_gridspec_accepts_ids_and_coordinates():
    assert GridSpec(3, (2, 3)).consumers == ((0, 2), (1, 0))
    assert GridSpec(3, ((0, 2), (1, 0))).distance == 3
    with pytest.raises(ConfigError):
        GridSpec(3, (0, 9))
    with pytest.raises(ConfigError):
        GridSpec(3, (4, 4))
    with pytest.raises(ConfigError):
        GridSpec(1, (0, 0))


def test_link_orientation_is_top_left_to_bottom_right():
    grid = build_grid(GridSpec(3, (0, 8)))
    assert len(grid.links) == 12
    for link in grid.links:
        assert link.a < link.b
        assert memory_direction(link.source) in (RIGHT, DOWN)
        assert memory_direction(link.target) in (LEFT, UP)


def test_region_adjacent_consumers_level0():
    spec = GridSpec(5, ((2, 2), (2, 3)))
    assert select_region(spec, 0).nodes == {(2, 2), (2, 3)}


def test_region_level0_is_bounding_rectangle():
    spec = GridSpec(4, ((0, 1), (2, 3)))
    expected = {(r, c) for r in range(3) for c in range(1, 4)}
    assert select_region(spec, 0).nodes == expected


def test_region_level1_adds_one_ring_of_detours():
    spec = GridSpec(5, ((2, 1), (2, 3)))
    got = select_region(spec, 1).nodes
    assert got == {(2, 0), (2, 4)} | {(r, c) for r in (1, 2, 3) for c in (1, 2, 3)}


def test_region_all_and_saturation():
    spec = GridSpec(3, (2, 3))
    assert len(select_region(spec, "all").nodes) == 9
    sizes = [len(select_region(spec, j).nodes) for j in range(6)]
    assert sizes[-1] == 9 and sizes[-2] == 9


@pytest.mark.parametrize("seed", range(20))
def test_region_monotone(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 7))
    a, b = rng.choice(n * n, 2, replace=False)
    spec = GridSpec(n, (int(a), int(b)))
    prev = select_region(spec, 0).nodes
    assert set(spec.consumers) <= prev
    for j in range(1, 2 * n):
        cur = select_region(spec, j).nodes
        assert prev <= cur
        prev = cur
    assert prev == select_region(spec, "all").nodes


def test_consumer_outside_region_is_rejected():
    spec = GridSpec(3, (0, 1))
    grid = build_grid(spec, 0)
    assert len(grid.links) == 1
    assert len(grid.idle_nodes()) == 7


def test_full_and_empty_heralding():
    grid = build_grid(GridSpec(4, (0, 15)))
    assert len(herald_links(grid, 1.0, None).weights) == 24
    assert herald_links(grid, 0.0, None).weights == {}


def test_idle_links_never_herald():
    grid = build_grid(GridSpec(4, (0, 3)), 0)
    graph = herald_links(grid, 1.0, None)
    assert {v for v in graph.nodes()} == {(0, c) for c in range(4)}


def test_heralding_frequency_and_chi_square():
    from scipy import stats

    grid = build_grid(GridSpec(3, (0, 8)))
    rng = np.random.default_rng(7)
    T, p, links = 100_000, 0.55, len(grid.links)
    hits = rng.random((T, links)) < p
    # same draw pattern as herald_links, one call per round
    rng = np.random.default_rng(7)
    counts = np.array([len(herald_links(grid, p, rng).weights) for _ in range(T)])
    assert np.array_equal(counts, hits.sum(axis=1))
    assert abs(counts.sum() / (T * links) - p) < 0.005
    observed = np.bincount(counts, minlength=links + 1)
    expected = T * stats.binom.pmf(np.arange(links + 1), links, p)
    keep = expected >= 5
    chi2 = ((observed[keep] - expected[keep]) ** 2 / expected[keep]).sum()
    assert stats.chi2.sf(chi2, keep.sum() - 1) > 0.001


def test_dump_format():
    grid = build_grid(GridSpec(2, (0, 3)))
    graph = herald_links(grid, 1.0, None)
    lines = graph.dump().splitlines()
    assert graph.dump() == "3 5\n2 8\n6 12\n11 13\n"
    for line in lines:
        a, b = map(int, line.split())
        assert graph.partner(a) == b and graph.partner(b) == a


def test_unit_square_gives_one_cycle_and_its_corner():
    grid = build_grid(GridSpec(2, (0, 3)))
    graph = herald_links(grid, 1.0, None)
    report = enumerate_cycles(graph, 4)
    assert len(report.cycles) == 1
    cycle, length = report.cycles[0]
    assert length == 4
    mem = bottom_right_memory(grid.spec, cycle)
    assert memory_node(grid.spec, mem) == (1, 1)
    assert memory_direction(mem) == LEFT
    assert corner_memories(graph, 4) == [mem]


def test_six_cycle_corner_is_max_row_max_col():
    spec = GridSpec(3, (0, 8))
    grid = build_grid(spec)
    ring = [(0, 0), (0, 1), (1, 1), (2, 1), (2, 0), (1, 0)]
    graph = graph_with(grid, zip(ring, ring[1:] + ring[:1]))
    report = enumerate_cycles(graph, 6)
    assert [len(c) for c, _ in report.cycles] == [6]
    mem = bottom_right_memory(spec, report.cycles[0][0])
    assert memory_node(spec, mem) == (2, 1)
    assert graph.partner(mem) is not None


def test_tree_has_no_cycles():
    grid = build_grid(GridSpec(3, (0, 8)))
    tree = [((0, 0), (0, 1)), ((0, 1), (0, 2)), ((0, 1), (1, 1)), ((1, 1), (2, 1)), ((1, 0), (1, 1))]
    graph = graph_with(grid, tree)
    assert enumerate_cycles(graph, None).cycles == []
    assert not has_cycle(graph)
    assert corner_memories(graph) == []


@pytest.mark.parametrize("n", [2, 3])
def test_cycles_match_networkx_exhaustively(n):
    grid = build_grid(GridSpec(n, (0, n * n - 1)))
    for mask in range(1 << len(grid.links)):
        graph = HeraldedGraph(grid, {i: 1.0 for i in range(len(grid.links)) if mask >> i & 1})
        for max_len in (4, 6, 8, None):
            got = sorted(tuple(sorted(c)) for c, _ in enumerate_cycles(graph, max_len).cycles)
            assert got == nx_cycles(graph, max_len)


def nx_oversized(graph, max_len, consumers):
    g = to_nx(graph)
    g.remove_nodes_from(consumers)
    return any(len(c) > max_len for c in nx.simple_cycles(g))


def test_oversized_flag_matches_networkx():
    rng = np.random.default_rng(3)
    for n in (3, 4, 5):
        spec = GridSpec(n, (0, n * n - 1))
        grid = build_grid(spec)
        for _ in range(80):
            graph = herald_links(grid, float(rng.uniform(0.5, 1.0)), rng)
            for max_len in (4, 6, 8):
                got = enumerate_cycles(graph, max_len, spec.consumers).oversized_present
                assert got == nx_oversized(graph, max_len, spec.consumers)


def test_cycles_match_networkx_on_random_grids():
    rng = np.random.default_rng(11)
    grid = build_grid(GridSpec(4, (0, 15)))
    for _ in range(100):
        graph = herald_links(grid, float(rng.uniform(0.4, 1.0)), rng)
        for max_len in (4, 6, 8):
            got = sorted(tuple(sorted(c)) for c, _ in enumerate_cycles(graph, max_len).cycles)
            assert got == nx_cycles(graph, max_len)
        assert has_cycle(graph) == bool(nx.cycle_basis(to_nx(graph)))


def test_corner_rule_matches_enumeration():
    rng = np.random.default_rng(5)
    for n in (3, 4, 5):
        grid = build_grid(GridSpec(n, (0, n * n - 1)))
        for _ in range(60):
            graph = herald_links(grid, float(rng.uniform(0.5, 1.0)), rng)
            for max_len in (4, 6, 8, None):
                cycles = enumerate_cycles(graph, max_len).cycles
                expected = sorted({bottom_right_memory(grid.spec, c) for c, _ in cycles})
                assert corner_memories(graph, max_len) == expected


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_full_heralding_has_all_unit_squares(n):
    grid = build_grid(GridSpec(n, (0, n * n - 1)))
    graph = herald_links(grid, 1.0, None)
    squares = [c for c, length in enumerate_cycles(graph, 4).cycles if length == 4]
    assert len(squares) == (n - 1) ** 2
    assert has_cycle_of_length(graph, 4)
    assert len(corner_memories(graph, 4)) == (n - 1) ** 2


def test_oversized_flag_ignores_cycles_through_consumers():
    spec = GridSpec(3, ((0, 0), (2, 2)))
    grid = build_grid(spec)
    ring = [(0, 0), (0, 1), (1, 1), (2, 1), (2, 0), (1, 0)]
    graph = graph_with(grid, zip(ring, ring[1:] + ring[:1]))
    assert not enumerate_cycles(graph, 4, spec.consumers).oversized_present
    assert enumerate_cycles(graph, 4, [(2, 2), (0, 2)]).oversized_present
    assert has_cycle(graph) and not has_cycle(graph, exclude=[(0, 0)])


def test_connectivity():
    spec = GridSpec(3, (0, 8))
    grid = build_grid(spec)
    graph = graph_with(grid, [((0, 0), (0, 1)), ((0, 1), (1, 1))])
    assert connected(graph, (0, 0), (1, 1))
    assert not connected(graph, (0, 0), (2, 2))
    assert connected(graph.without([memory_id(spec, (0, 1), LEFT)]), (0, 1), (1, 1))
    assert not connected(graph.without([memory_id(spec, (0, 1), LEFT)]), (0, 0), (1, 1))
