"""Compiled kernels against the NumPy fallback.

Run from the repository root after building the extension::

    python benchmarks/bench_kernels.py [--repeat 5]

Prints one row per kernel with the best time per call for each backend.
"""
import argparse
import timeit

import numpy as np

from gridnet import _pykernels as py
from gridnet import kernels
from gridnet.network import GridSpec
from gridnet.protocol import ProtocolConfig, apply_x_rules, execute_round, herald, plan_schedule

try:
    from gridnet import _kernels as cy
except ImportError:
    cy = None


def round_args(size, link_prob, seed=0):
    config = ProtocolConfig(GridSpec(size, (0, size * size - 1)), link_prob, 0.95)
    rng = np.random.default_rng(seed)
    while True:
        graph = herald(config, rng)
        rules = apply_x_rules(graph, config.k_hop, config.grid.consumers)
        spec, links = config.grid, graph.grid.links
        order = sorted(graph.weights)
        schedule = [spec.node_id(v) for v in plan_schedule(rules.graph, config)]
        args = (
            [links[i].source for i in order],
            [links[i].target for i in order],
            [graph.weights[i] for i in order],
            list(rules.measured),
            schedule,
            size * size,
            0,
            size * size - 1,
        )
        if py.swap_round(*args)[0] == 0:
            return args


def cases():
    rng = np.random.default_rng(1)
    coeffs12 = rng.dirichlet(np.ones(1 << 12))
    frags = [rng.dirichlet(np.ones(1 << n)) for n in (4, 3, 2)]
    k = 200
    w = rng.uniform(0.8, 1.0, k)
    i1 = rng.integers(0, 4, k).astype(np.int64)
    i2 = rng.integers(0, 4, k).astype(np.int64)
    out = [
        ("measure_x n=12", lambda m: m.measure_x(coeffs12, 12, 5)),
        ("fuse 4+3+2 qubits", lambda m: m.fuse(frags, [4, 3, 2], [3, 0, 1])),
        ("bell_from_images 200 links", lambda m: m.bell_from_images(w, i1, i2)),
    ]
    for size in (4, 6, 8):
        args = round_args(size, 0.8)
        out.append((f"swap_round grid {size}", lambda m, a=args: m.swap_round(*a)))
    return out


def end_to_end(size, trials, module):
    config = ProtocolConfig(GridSpec(size, (0, size * size - 1)), 0.8, 0.95)
    saved = kernels.swap_round
    kernels.swap_round = module.swap_round
    try:
        start = timeit.default_timer()
        for s in range(trials):
            execute_round(config, np.random.default_rng(s))
        return (timeit.default_timer() - start) / trials
    finally:
        kernels.swap_round = saved


def fmt(seconds):
    return f"{seconds * 1e6:10.1f} us"


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--rounds", type=int, default=300, help="rounds per end-to-end timing")
    args = parser.parse_args()
    if cy is None:
        print("compiled extension not built; only the fallback is timed")
    print(f"{'kernel':<28}{'fallback':>14}{'compiled':>14}{'speedup':>10}")
    for name, fn in cases():
        number = 50
        t_py = min(timeit.repeat(lambda: fn(py), number=number, repeat=args.repeat)) / number
        if cy is None:
            print(f"{name:<28}{fmt(t_py):>14}")
            continue
        t_cy = min(timeit.repeat(lambda: fn(cy), number=number, repeat=args.repeat)) / number
        print(f"{name:<28}{fmt(t_py):>14}{fmt(t_cy):>14}{t_py / t_cy:>9.1f}x")
    for size in (4, 6, 8):
        name = f"execute_round grid {size}"
        t_py = end_to_end(size, args.rounds, py)
        if cy is None:
            print(f"{name:<28}{fmt(t_py):>14}")
            continue
        t_cy = end_to_end(size, args.rounds, cy)
        print(f"{name:<28}{fmt(t_py):>14}{fmt(t_cy):>14}{t_py / t_cy:>9.1f}x")


if __name__ == "__main__":
    main()
