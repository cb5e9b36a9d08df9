"""Command-line entry point: ``pid-opinion <command> ...``.

Every command prints one JSON verdict ``{"command", "status", "payload"}``
to stdout. Exit codes: 0 ok, 1 runtime failure, 2 usage error.

Node ids are 1-based everywhere on the command line and in CSV/JSON
outputs. Edge-list files keep the 0-based ids of the file format.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import cohesion, experiments, graph, sequences
from .dynamics import CHOICE_MODES, OpinionDomain, check_state, simulate
from .errors import BudgetExceededError, PIDError, PreconditionError
from .fileio import atomic_write_text, csv_text, parse_int_list, read_events_csv, read_int_list

log = logging.getLogger(__name__)

CONSTRUCT_MODES = ("equilibrium", "decross", "compress", "false-outcome", "truth-consensus")
# Flags whose values may begin with "-" (negative opinions); argparse would read them as options.
_LIST_FLAGS = ("--x0", "--seeds")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _one_based(ids):
    return [v + 1 for v in ids]


def _load_net(path: str) -> graph.InfluenceNetwork:
    return graph.from_edge_list(Path(path).read_text())


def _add_domain(p):
    p.add_argument("--lo", type=int, required=True)
    p.add_argument("--hi", type=int, required=True)
    p.add_argument("--theta", type=int, required=True)


def _add_generator(p):
    p.add_argument("--rows", type=int, default=10)
    p.add_argument("--cols", type=int, default=10)
    p.add_argument("--n", type=int)
    p.add_argument("--p", type=float)
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--beta", type=float)


def _generate(family: str, args, rng) -> graph.InfluenceNetwork:
    def need(name):
        v = getattr(args, name)
        if v is None:
            raise UsageError(f"{family} needs --{name}")
        return v

    if family == "lattice":
        return graph.lattice(args.rows, args.cols)
    if family == "er":
        return graph.erdos_renyi(need("n"), need("p"), rng)
    return graph.watts_strogatz(need("n"), args.k, need("beta"), rng)


def _domain(args) -> OpinionDomain:
    try:
        return OpinionDomain(args.lo, args.hi, args.theta)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _state(args, net, dom, rng=None) -> tuple[int, ...]:
    if args.x0 is not None:
        x0 = parse_int_list(args.x0)
    elif args.x0_file is not None:
        x0 = read_int_list(args.x0_file)
    elif rng is not None:
        x0 = rng.integers(dom.lo, dom.hi + 1, size=net.n).tolist()
    else:
        raise UsageError("an initial state is required (--x0 or --x0-file)")
    try:
        return check_state(net, dom, x0)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _add_state(p, random_ok: bool):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--x0", help="comma separated opinions, or a JSON array")
    g.add_argument("--x0-file", help="file holding the opinions")
    if random_ok:
        g.add_argument("--x0-random", action="store_true", help="i.i.d. uniform over [lo, hi] (default)")


def cmd_generate(args) -> dict:
    rng = np.random.default_rng(args.seed)
    try:
        net = _generate(args.family, args, rng)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    text = net.to_edge_list()
    payload = {
        "family": args.family,
        "n": net.n,
        "edges": len(net.edges()),
        "density": graph.density(net),
        "clustering": graph.clustering_coefficient(net),
    }
    if args.out:
        atomic_write_text(args.out, text)
        payload["path"] = str(args.out)
    else:
        payload["edge_list"] = text
    return payload


def cmd_analyze(args) -> dict:
    net = _load_net(args.net)
    return cohesion.analyze(net, args.budget, args.max_witnesses).to_json()


def cmd_simulate(args) -> dict:
    rng = np.random.default_rng(args.seed)
    dom = _domain(args)
    if args.net:
        net = _load_net(args.net)
    elif args.family:
        net = _generate(args.family, args, rng)
    else:
        raise UsageError("simulate needs --net or --family")
    x0 = _state(args, net, dom, rng)
    res = simulate(
        net, dom, x0, rng,
        max_steps=args.max_steps, check_every=args.check_every,
        choice=args.choice, record_events=args.events is not None,
    )
    if args.events:
        rows = [(t, i + 1, z) for t, i, z in res.events]
        atomic_write_text(args.events, csv_text(("t", "node", "new_opinion"), rows))
    return {
        "converged": res.converged,
        "steps": res.steps,
        "final": list(res.final),
        "classification": sequences.classify_endpoint(net, dom, res.final),
        "seed": args.seed,
    }


def _construct_sequence(args, net, dom, x0) -> tuple[list, dict]:
    extra = {}
    if args.mode == "equilibrium":
        return sequences.construct_equilibrium_sequence(net, dom, x0), extra
    if args.mode == "false-outcome":
        out = sequences.construct_false_outcome_sequence(net, dom, x0)
        return out.sequence, {"pipeline": out.pipeline}
    if args.mode == "truth-consensus":
        try:
            return sequences.construct_truth_consensus_sequence(net, dom, x0), extra
        except sequences.TruthPreconditionError as exc:
            exc.payload = {"side": exc.side, "witness": _one_based(exc.witness)}
            raise
    if args.seq:
        seq = [(i, z) for i, z in read_events_csv(args.seq)]
    else:
        seq = sequences.find_sequence(
            net, dom, x0, lambda x: all(v == dom.theta for v in x), max_states=args.max_states
        )
        if seq is None:
            raise PreconditionError("no truth-consensus sequence found within the search bound")
        extra["input_searched"] = True
    extra["input_crossings"] = sequences.count_crossings(x0, seq, dom.theta)
    seq = sequences.remove_crossing_updates(net, dom, x0, seq)
    if args.mode == "compress":
        seq = sequences.compress_to_pm1(net, dom, x0, seq)
    return seq, extra


def cmd_construct(args) -> dict:
    net = _load_net(args.net)
    dom = _domain(args)
    x0 = _state(args, net, dom)
    seq, extra = _construct_sequence(args, net, dom, x0)
    rep = sequences.verify_sequence_legal(net, dom, x0, seq)
    rows = [(k + 1, i + 1, z) for k, (i, z) in enumerate(seq)]
    text = csv_text(("step", "node", "new_opinion"), rows)
    payload = {
        "mode": args.mode,
        "legal": rep.legal,
        "length": len(seq),
        "crossings": sequences.count_crossings(x0, seq, dom.theta),
        "endpoint": list(rep.final),
        "classification": sequences.classify_endpoint(net, dom, rep.final),
        **extra,
    }
    if args.out:
        atomic_write_text(args.out, text)
        payload["path"] = str(args.out)
    else:
        payload["sequence"] = [[i, z] for _, i, z in rows]
    return payload


def cmd_sweep(args) -> dict:
    try:
        data = json.loads(Path(args.config).read_text())
        cfg = experiments.ExperimentConfig.from_dict(data)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad config: {exc}") from exc
    if args.full_scale:
        cfg = experiments.full_scale(cfg)
    jobs = args.jobs if args.jobs is not None else experiments.default_jobs()
    summaries = experiments.sweep(cfg, jobs)
    atomic_write_text(args.out, experiments.summary_csv(summaries))
    payload = {
        "path": str(args.out),
        "rows": len(summaries),
        "replicates": cfg.replicates,
        "nonconverged": sum(s.n_nonconverged for s in summaries),
        "degenerate_ci": any(s.degenerate for s in summaries),
    }
    if args.raw:
        atomic_write_text(args.raw, experiments.raw_csv(summaries))
        payload["raw_path"] = str(args.raw)
    return payload


def cmd_verify_seeds(args) -> dict:
    net = _load_net(args.net)
    seeds = [v - 1 for v in parse_int_list(args.seeds)]
    if any(not 0 <= v < net.n for v in seeds):
        raise UsageError(f"seed ids must lie in 1..{net.n}")
    witness = cohesion.uncovered_strictly_cohesive_set(net, seeds)
    payload = {"valid": witness is None, "witness_uncovered_set": None if witness is None else _one_based(witness)}
    try:
        best = cohesion.minimum_seed_sets(net, args.budget, max_witnesses=args.max_witnesses)
    except BudgetExceededError as exc:
        exc.payload = payload
        raise
    payload["minimum_seed_size"] = best.size
    payload["example_minimum_seeds"] = [_one_based(s) for s in best.witnesses]
    return payload


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pid-opinion", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)

    p = sub.add_parser("generate", help="write a random or lattice network as an edge list")
    p.add_argument("family", choices=("lattice", "er", "ws"))
    _add_generator(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="edge-list path (omit to embed the text in the verdict)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("analyze", help="strictly cohesive sets and minimum seed sets of a network")
    p.add_argument("--net", required=True)
    p.add_argument("--budget", type=int, default=cohesion.DEFAULT_NODE_BUDGET)
    p.add_argument("--max-witnesses", type=int, default=100)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("simulate", help="run the stochastic dynamics to equilibrium")
    p.add_argument("--net")
    p.add_argument("--family", choices=("lattice", "er", "ws"))
    _add_generator(p)
    _add_domain(p)
    _add_state(p, random_ok=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-steps", type=int, default=10**6)
    p.add_argument("--check-every", type=int)
    p.add_argument("--choice", choices=CHOICE_MODES, default="uniform")
    p.add_argument("--events", help="write the event log as CSV t,node,new_opinion")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("construct", help="build an explicit legal update sequence")
    p.add_argument("--mode", choices=CONSTRUCT_MODES, required=True)
    p.add_argument("--net", required=True)
    _add_domain(p)
    _add_state(p, random_ok=False)
    p.add_argument("--seq", help="input truth-consensus sequence CSV (decross/compress)")
    p.add_argument("--max-states", type=int, default=200_000, help="search bound when --seq is omitted")
    p.add_argument("--out", help="write the sequence as CSV step,node,new_opinion")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("sweep", help="Monte Carlo sweep over a generator parameter")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--raw", help="also write per-replicate records")
    p.add_argument("--jobs", type=int, help="worker processes (default: $PID_OPINION_JOBS or 1)")
    p.add_argument("--full-scale", action="store_true", help="1000 replicates over a 100-point grid")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify-seeds", help="check that seeds hit every strictly cohesive set")
    p.add_argument("--net", required=True)
    p.add_argument("--seeds", required=True, help="1-based node ids, comma separated")
    p.add_argument("--budget", type=int, default=cohesion.DEFAULT_NODE_BUDGET)
    p.add_argument("--max-witnesses", type=int, default=10)
    p.set_defaults(func=cmd_verify_seeds)
    return parser


def _glue_list_values(argv: Sequence[str]) -> list[str]:
    out = list(argv)
    for k in range(len(out) - 1):
        if out[k] in _LIST_FLAGS and out[k + 1].startswith("-"):
            out[k:k + 2] = [f"{out[k]}={out[k + 1]}", ""]
    return [a for a in out if a != ""]


def _emit(command, status, payload, stream=None) -> None:
    print(json.dumps({"command": command, "status": status, "payload": payload}), file=stream or sys.stdout)


def main(argv: Sequence[str] | None = None) -> int:
    argv = _glue_list_values(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        _emit(None, "error", {"error": str(exc), "kind": "usage"})
        return 2
    if args.command is None:
        parser.print_help()
        return 2
    logging.basicConfig(level=logging.WARNING - 10 * args.verbose, format="%(levelname)s %(name)s: %(message)s")
    try:
        payload = args.func(args)
    except UsageError as exc:
        _emit(args.command, "error", {"error": str(exc), "kind": "usage"})
        return 2
    except (PIDError, ValueError, OSError, OverflowError) as exc:
        body = {"error": str(exc), "kind": type(exc).__name__}
        body.update(getattr(exc, "payload", {}))
        _emit(args.command, "error", body)
        return 1
    _emit(args.command, "ok", payload)
    return 0


if __name__ == "__main__":
    sys.exit(main())
