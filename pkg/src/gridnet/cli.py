"""Command-line front end: ``simulate``, ``sweep``, ``cycles`` and ``validate``.

Exit codes are 0 on success, 1 when a validation suite fails and 2 for any
configuration error.
"""
import argparse
import csv
import io
import json
import logging
import sys

from .distillation import DomainError
from .montecarlo import SimulationSpec, cycle_fraction_study, envelope_sweep, run_trials
from .network import ConfigError, GridSpec
from .protocol import ProtocolConfig

log = logging.getLogger("gridnet")

SIM_HEADER = ["fidelity", "link_prob", "grid", "region", "k", "mean_rate", "std_err", "abort_frac"]
SWEEP_HEADER = SIM_HEADER + ["scheduler", "distill_rounds", "envelope"]
CYCLE_HEADER = ["n", "p", "cycle_len", "fraction_pre", "fraction_post"]

PROTOCOL_KEYS = {
    "grid_size": None,
    "consumers": None,
    "link_prob": None,
    "link_fidelity": None,
    "k_hop": "global",
    "region_level": "all",
    "scheduler": "consumer-greedy",
    "distill_rounds": 1,
}
RUN_KEYS = {"trials": None, "master_seed": 0}
SWEEP_AXES = ("link_prob", "link_fidelity", "k_hop", "region_level", "scheduler", "distill_rounds", "grid_size")
CYCLE_KEYS = {"sizes": None, "link_probs": None, "cycle_lens": [4], "trials": None, "master_seed": 0}


def _check_keys(doc, allowed):
    if not isinstance(doc, dict):
        raise ConfigError("configuration must be a JSON object")
    for key in doc:
        if key not in allowed:
            raise ConfigError(f"{key}: unknown key")
    for key, default in allowed.items():
        if default is None and key not in doc:
            raise ConfigError(f"{key}: missing required key")
    return {k: doc.get(k, v) for k, v in allowed.items()}


def _number(value, key, kind=float):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key}: expected a number, got {value!r}")
    if kind is int and int(value) != value:
        raise ConfigError(f"{key}: expected an integer, got {value!r}")
    return kind(value)


def _level(value, key, word):
    if value == word:
        return value
    return _number(value, key, int)


def _consumers(value):
    if not isinstance(value, list) or len(value) != 2:
        raise ConfigError("consumers: expected a pair of node ids or [row, col] pairs")
    out = []
    for c in value:
        if isinstance(c, list):
            out.append(tuple(_number(v, "consumers", int) for v in c))
        else:
            out.append(_number(c, "consumers", int))
    return tuple(out)


def protocol_from(doc):
    try:
        grid = GridSpec(_number(doc["grid_size"], "grid_size", int), _consumers(doc["consumers"]))
    except ConfigError as err:
        msg = str(err)
        raise ConfigError(msg if ":" in msg.split()[0] else f"consumers: {msg}") from None
    return ProtocolConfig(
        grid=grid,
        link_prob=_number(doc["link_prob"], "link_prob"),
        link_fidelity=_number(doc["link_fidelity"], "link_fidelity"),
        k_hop=_level(doc["k_hop"], "k_hop", "global"),
        region_level=_level(doc["region_level"], "region_level", "all"),
        scheduler=doc["scheduler"],
        distill_rounds=_number(doc["distill_rounds"], "distill_rounds", int),
    )


def _dedup(values, key):
    if not isinstance(values, list):
        raise ConfigError(f"{key}: expected a list")
    if not values:
        raise ConfigError(f"{key}: axis is empty")
    out = []
    for v in values:
        if v not in out:
            out.append(v)
    if len(out) != len(values):
        log.warning("%s: duplicate values removed", key)
    return out


def load_config(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as err:
        raise ConfigError(f"config: cannot read {path}: {err.strerror}") from None
    except json.JSONDecodeError as err:
        raise ConfigError(f"config: invalid JSON ({err.msg} at line {err.lineno})") from None


def _apply_overrides(doc, args):
    if args.trials is not None:
        doc["trials"] = args.trials
    if args.seed is not None:
        doc["master_seed"] = args.seed
    return doc


def _simulation(doc, allow_axes):
    allowed = dict(PROTOCOL_KEYS, **RUN_KEYS)
    if allow_axes:
        allowed["axes"] = None
    doc = _check_keys(doc, allowed)
    config = protocol_from(doc)
    trials = _number(doc["trials"], "trials", int)
    seed = _number(doc["master_seed"], "master_seed", int)
    axes = {}
    if allow_axes:
        if not isinstance(doc["axes"], dict) or not doc["axes"]:
            raise ConfigError("axes: expected a non-empty object")
        for key, values in doc["axes"].items():
            if key not in SWEEP_AXES:
                raise ConfigError(f"axes.{key}: unknown axis")
            axes[key] = _dedup(values, f"axes.{key}")
    return config, trials, seed, axes


def _fmt(x):
    return repr(float(x))


def _sim_row(config, stats):
    return [
        _fmt(config.link_fidelity),
        _fmt(config.link_prob),
        str(config.grid.size),
        str(config.region_level),
        str(config.k_hop),
        _fmt(stats.mean_rate),
        _fmt(stats.std_error),
        _fmt(stats.abort_fraction),
    ]


def _emit(args, header, rows, records):
    if args.json:
        text = json.dumps(records, indent=2, sort_keys=True) + "\n"
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
        text = buf.getvalue()
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _record(header, row):
    return dict(zip(header, row))


def cmd_simulate(args):
    doc = _apply_overrides(load_config(args.config), args)
    config, trials, seed, _ = _simulation(doc, allow_axes=False)
    trace = [] if args.trace else None
    stats = run_trials(SimulationSpec(config, trials, seed), trace=trace)
    if args.trace:
        with open(args.trace, "w") as fh:
            fh.write("\n".join(trace) + "\n")
    row = _sim_row(config, stats)
    _emit(args, SIM_HEADER, [row], [_record(SIM_HEADER, row)])
    if args.out:
        print(
            f"mean_rate={stats.mean_rate:.6g} std_err={stats.std_error:.3g} "
            f"abort_frac={stats.abort_fraction:.4g} mean_swaps={stats.mean_swaps:.4g}"
        )
    return 0


def cmd_sweep(args):
    doc = _apply_overrides(load_config(args.config), args)
    config, trials, seed, axes = _simulation(doc, allow_axes=True)
    sizes = axes.pop("grid_size", [config.grid.size])
    rows, records = [], []
    for size in sizes:
        base = ProtocolConfig(
            GridSpec(_number(size, "axes.grid_size", int), config.grid.consumers),
            config.link_prob,
            config.link_fidelity,
            config.k_hop,
            config.region_level,
            config.scheduler,
            config.distill_rounds,
        )
        table = envelope_sweep(SimulationSpec(base, trials, seed, axes))
        best = {id(v[0]) for v in table.envelope.values()}
        for cfg, stats in table.rows:
            row = _sim_row(cfg, stats) + [cfg.scheduler, str(cfg.distill_rounds), str(int(id(cfg) in best))]
            rows.append(row)
            records.append(_record(SWEEP_HEADER, row))
    _emit(args, SWEEP_HEADER, rows, records)
    return 0


def cmd_cycles(args):
    doc = _apply_overrides(load_config(args.config), args)
    doc = _check_keys(doc, CYCLE_KEYS)
    sizes = [_number(v, "sizes", int) for v in _dedup(doc["sizes"], "sizes")]
    probs = [_number(v, "link_probs") for v in _dedup(doc["link_probs"], "link_probs")]
    lens = [_number(v, "cycle_lens", int) for v in _dedup(doc["cycle_lens"], "cycle_lens")]
    for n in sizes:
        if n < 2:
            raise ConfigError(f"sizes: grid size {n} below 2")
    for p in probs:
        if not 0.0 <= p <= 1.0:
            raise ConfigError(f"link_probs: {p} outside [0, 1]")
    trials = _number(doc["trials"], "trials", int)
    seed = _number(doc["master_seed"], "master_seed", int)
    table = cycle_fraction_study(sizes, probs, lens, trials, seed)
    rows = [[str(r.n), _fmt(r.p), str(r.cycle_len), _fmt(r.fraction_pre), _fmt(r.fraction_post)] for r in table]
    _emit(args, CYCLE_HEADER, rows, [_record(CYCLE_HEADER, r) for r in rows])
    return 0


def cmd_validate(args):
    from . import validation

    ok = True
    for result in validation.run_all():
        status = "PASS" if result.passed else "FAIL"
        ok &= result.passed
        print(f"suite={result.name} status={status} max_deviation={result.max_deviation:.3e} {result.detail}".rstrip())
    print("t=6 ladder, closed form vs enumeration (informational):")
    for line in validation.closed_form_t6_table():
        print("  " + line)
    return 0 if ok else 1


def build_parser():
    parser = argparse.ArgumentParser(prog="gridnet", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config=True):
        if config:
            p.add_argument("--config", required=True, metavar="PATH", help="JSON experiment file")
        p.add_argument("--trials", type=int, help="override the trial count")
        p.add_argument("--seed", type=int, help="override the master seed")
        p.add_argument("--out", metavar="PATH", help="write the table here instead of stdout")
        p.add_argument("--json", action="store_true", help="emit JSON instead of CSV")

    p = sub.add_parser("simulate", help="run one configuration")
    common(p)
    p.add_argument("--trace", metavar="PATH", help="write a per-round action log")
    p.set_defaults(func=cmd_simulate)
    p = sub.add_parser("sweep", help="Cartesian sweep with rate envelope")
    common(p)
    p.set_defaults(func=cmd_sweep)
    p = sub.add_parser("cycles", help="polygon statistics per grid size and link probability")
    common(p)
    p.set_defaults(func=cmd_cycles)
    p = sub.add_parser("validate", help="run the oracle-equivalence suites")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None):
    logging.basicConfig(format="%(levelname)s: %(message)s", level=logging.WARNING)
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, DomainError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
