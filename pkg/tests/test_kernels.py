import numpy as np
import pytest

from gridnet import _pykernels as py
from gridnet import kernels
from gridnet.network import GridSpec
from gridnet.protocol import ProtocolConfig, apply_x_rules, herald, plan_schedule

cy = pytest.importorskip("gridnet._kernels")


def test_backend_selected():
    assert kernels.BACKEND in ("cython", "python")


@pytest.mark.parametrize("n", [2, 3, 4, 6, 9])
def test_measure_x_agrees(n, rng):
    coeffs = rng.dirichlet(np.ones(1 << n))
    for s in range(n):
        assert np.allclose(cy.measure_x(coeffs, n, s), py.measure_x(coeffs, n, s), atol=1e-15)


def test_fuse_agrees(rng):
    for _ in range(40):
        m = int(rng.integers(2, 5))
        ns = [int(x) for x in rng.integers(1, 5, m)]
        positions = [int(rng.integers(n)) for n in ns]
        coeffs = [rng.dirichlet(np.ones(1 << n)) for n in ns]
        a = cy.fuse(coeffs, ns, positions)
        b = py.fuse(coeffs, ns, positions)
        assert np.allclose(a, b, atol=1e-15)


def test_image_maps_agree(rng):
    for _ in range(60):
        n = int(rng.integers(2, 8))
        s = int(rng.integers(n))
        offset = int(rng.integers(0, 5))
        total = offset + n - 1 + int(rng.integers(0, 5))
        labels = rng.integers(0, 1 << n, 20).astype(np.int64)
        assert np.array_equal(
            np.asarray(cy.fuse_images(labels, n, s, offset, total)),
            np.asarray(py.fuse_images(labels, n, s, offset, total)),
        )
        if n >= 2:
            assert np.array_equal(
                np.asarray(cy.drop_images(labels, n, s)), np.asarray(py.drop_images(labels, n, s))
            )


def test_bell_from_images_agree(rng):
    for _ in range(40):
        k = int(rng.integers(1, 30))
        w = rng.uniform(0, 1, k)
        i1 = rng.integers(0, 4, k).astype(np.int64)
        i2 = rng.integers(0, 4, k).astype(np.int64)
        a = np.asarray(cy.bell_from_images(w, i1, i2))
        b = np.asarray(py.bell_from_images(w, i1, i2))
        assert np.allclose(a, b, atol=1e-15)
        assert a.sum() == pytest.approx(1.0)


def round_inputs(config, rng):
    graph = herald(config, rng)
    rules = apply_x_rules(graph, config.k_hop, config.grid.consumers)
    spec = config.grid
    links = graph.grid.links
    order = sorted(graph.weights)
    schedule = [spec.node_id(v) for v in plan_schedule(rules.graph, config)]
    a, b = (spec.node_id(v) for v in spec.consumers)
    return (
        [links[i].source for i in order],
        [links[i].target for i in order],
        [graph.weights[i] for i in order],
        list(rules.measured),
        schedule,
        spec.size**2,
        a,
        b,
    )


def test_swap_round_agrees(rng):
    for i in range(100):
        n = int(rng.integers(2, 7))
        a, b = (int(x) for x in rng.choice(n * n, 2, replace=False))
        config = ProtocolConfig(GridSpec(n, (a, b)), float(rng.uniform(0.4, 1.0)), 0.93, k_hop=1 + i % 2)
        args = round_inputs(config, rng)
        ra = cy.swap_round(*args)
        rb = py.swap_round(*args)
        assert ra[0] == rb[0] and ra[2:] == rb[2:]
        if ra[1] is not None:
            assert np.allclose(np.asarray(ra[1]), np.asarray(rb[1]), atol=1e-15)
