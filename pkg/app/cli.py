"""
Command-line entry point: `python -m app.cli <subcommand> ...`.

Every run prints one JSON document (or one CSV line with a header for
`simulate --csv`) on stdout; logs go to stderr. Exit status is 0 on success,
1 for domain and input errors, 2 for file and format errors.
"""
import argparse
import csv
import io
import json
import logging
import sys
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from app.core.config import settings
from app.core.exceptions import DomainError, FormatError, InputError, InvariantViolation
from app.core.logging_setup import configure_logging
from app.models.code import Word
from app.models.experiment import ExperimentConfig, ExperimentId
from app.models.graph import Graph, SeedSpec
from app.services import canon_prop, covercode, degseq_prop, graphcore, lowerbound_kit, mc_harness

logger = logging.getLogger(__name__)

CSV_FIELDS = [
    "experiment", "n", "k", "m", "trials", "seed", "successes",
    "frequency", "ci_low", "ci_high", "elapsed_s",
]


def _emit(doc: Dict[str, Any]) -> None:
    sys.stdout.write(json.dumps(doc, indent=2) + "\n")


def _emit_csv(doc: Dict[str, Any]) -> None:
    fields = CSV_FIELDS if doc.get("experiment") and "successes" in doc else [
        key for key, value in doc.items() if not isinstance(value, (dict, list))
    ]
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fields, extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    writer.writerow({key: ("" if doc.get(key) is None else doc.get(key)) for key in fields})
    sys.stdout.write(buf.getvalue())


def _load(args) -> Graph:
    if args.input:
        return graphcore.read_graph(args.input)
    if args.n is None:
        raise InputError("Give a graph with --in, or --n and --seed to sample one")
    return graphcore.random_graph(args.n, SeedSpec(seed=args.seed, stream=args.stream))


def _source(args) -> Dict[str, Any]:
    if args.input:
        return {"in": args.input}
    return {"n": args.n, "seed": args.seed, "stream": args.stream}


def _schedule(args):
    return canon_prop.load_schedule(args.schedule) if args.schedule else canon_prop.default_schedule()


def _k(args, n: int) -> int:
    if args.k is not None:
        return args.k
    return canon_prop.choose_k(n, _schedule(args))


def _write(args, g: Graph) -> Optional[str]:
    if args.out:
        graphcore.write_graph(g, args.out)
    return args.out


# ---------------- Subcommands ----------------

def cmd_gen(args) -> Dict[str, Any]:
    if args.n is None:
        raise InputError("gen needs --n")
    g = graphcore.random_graph(args.n, SeedSpec(seed=args.seed, stream=args.stream))
    _write(args, g)
    return {
        "command": "gen",
        "n": g.n,
        "edges": g.edge_count(),
        "out": args.out,
        "config": {"n": args.n, "seed": args.seed, "stream": args.stream},
    }


def cmd_decide_qk(args) -> Dict[str, Any]:
    g = _load(args)
    k = _k(args, g.n)
    decision = canon_prop.decide_qk(g, k)
    return {
        "command": "decide-qk",
        "n": g.n,
        "k": k,
        "in_qk": decision.in_qk,
        "decision": decision.model_dump(mode="json"),
        "config": {**_source(args), "k": k, "schedule": args.schedule},
    }


def cmd_attack_qk(args) -> Dict[str, Any]:
    g = _load(args)
    k = _k(args, g.n)
    out, outcome = canon_prop.adversary_qk(g, k, exhaustive=args.fallback_exhaustive)
    _write(args, out)
    return {
        "command": "attack-qk",
        "n": g.n,
        "k": k,
        "success": outcome.success,
        "outcome": outcome.model_dump(mode="json"),
        "out": args.out,
        "config": {**_source(args), "k": k, "schedule": args.schedule, "exhaustive": args.fallback_exhaustive},
    }


def _codes(args, g: Graph):
    win = degseq_prop.window(g.n)
    return win, degseq_prop.default_codes(win, args.codes_down_len, args.codes_up_len)


def cmd_decide_deg(args) -> Dict[str, Any]:
    g = _load(args)
    win, codes = _codes(args, g)
    p = degseq_prop.profile(g, win)
    return {
        "command": "decide-deg",
        "n": g.n,
        "in_a": degseq_prop.decide_a(p, codes),
        "ydown": str(p.ydown),
        "yup": str(p.yup),
        "z": p.z,
        "window": win.model_dump(),
        "config": {**_source(args), "down_len": codes.down.length, "up_len": codes.up.length},
    }


def cmd_attack_deg(args) -> Dict[str, Any]:
    g = _load(args)
    _, codes = _codes(args, g)
    out, outcome = degseq_prop.adversary_a(g, codes, strict=args.strict_attack)
    _write(args, out)
    return {
        "command": "attack-deg",
        "n": g.n,
        "success": outcome.success,
        "outcome": outcome.model_dump(mode="json"),
        "out": args.out,
        "config": {
            **_source(args),
            "down_len": codes.down.length,
            "up_len": codes.up.length,
            "strict": args.strict_attack,
        },
    }


def cmd_code(args) -> Dict[str, Any]:
    if args.len is None:
        raise InputError("code needs --len")
    doc: Dict[str, Any] = {"command": "code", "length": args.len}
    if args.min_cover:
        cover = covercode.exhaustive_min_cover(args.len)
        doc["min_cover_size"] = len(cover)
        doc["min_cover"] = sorted(str(w) for w in cover)
        return doc
    code = covercode.build_code(args.len)
    doc.update(code.model_dump())
    if args.check:
        doc["covering"] = covercode.verify_covering(code)
        doc["codewords"] = covercode.count_codewords_exhaustive(code)
    if args.check or args.density:
        doc["density"] = covercode.density(code)
    if args.flip:
        if args.word is None:
            raise InputError("code --flip needs --word")
        w = Word.from_string(args.word)
        t = covercode.flip_to_code(code, w)
        doc["word"] = str(w)
        doc["flip"] = t
        doc["codeword"] = str(w if t is None else w.flipped(t))
    return doc


def cmd_simulate(args) -> Dict[str, Any]:
    if args.experiment is None or args.n is None:
        raise InputError("simulate needs --experiment and --n")
    cfg = ExperimentConfig(
        experiment=ExperimentId(args.experiment),
        n=args.n,
        trials=args.trials,
        seed=args.seed,
        k=args.k,
        m=args.m,
        schedule=args.schedule,
        down_len=args.codes_down_len,
        up_len=args.codes_up_len,
        strict_attack=args.strict_attack,
        exhaustive=args.fallback_exhaustive,
        part=args.part,
    )
    result = mc_harness.run_experiment(cfg, jobs=args.jobs)
    return result.model_dump(mode="json")


def cmd_stats(args) -> Dict[str, Any]:
    g = _load(args)
    stats = lowerbound_kit.seq_stats(g.degrees())
    t = lowerbound_kit.thresholds(g.n)
    doc: Dict[str, Any] = {
        "command": "stats",
        "n": g.n,
        "mean": stats.mean,
        "mu": stats.mu,
        "gamma": stats.gamma,
        "log_p": lowerbound_kit.log_p(stats),
    }
    try:
        doc["log_g"] = lowerbound_kit.log_g_estimate(stats)
    except DomainError as e:
        doc["log_g"] = None
        logger.warning(f"log_g skipped: {e}")
    doc["thresholds"] = t.model_dump()
    doc["vertex_classes"] = dict(sorted(lowerbound_kit.vertex_classes(stats, t).items()))
    doc["p_conditions"] = lowerbound_kit.check_P_conditions(stats, t).model_dump()
    doc["degree_range"] = lowerbound_kit.check_degree_range(g, t).model_dump()
    doc["config"] = _source(args)
    return doc


COMMANDS = {
    "gen": cmd_gen,
    "decide-qk": cmd_decide_qk,
    "attack-qk": cmd_attack_qk,
    "decide-deg": cmd_decide_deg,
    "attack-deg": cmd_attack_deg,
    "code": cmd_code,
    "simulate": cmd_simulate,
    "stats": cmd_stats,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="python -m app.cli", description=settings.PROJECT_NAME)
    parser.add_argument("--log-level", default=settings.LOG_LEVEL, help="Logging level for stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, help="Number of vertices")
    common.add_argument("--seed", type=int, default=0, help="64-bit master seed")
    common.add_argument("--stream", type=int, default=0, help="Stream index for a single sampled graph")
    common.add_argument("--in", dest="input", help="ASGRAPH v1 input file")
    common.add_argument("--out", help="ASGRAPH v1 output file")
    common.add_argument("--csv", action="store_true", help="Emit CSV instead of JSON")

    qk = argparse.ArgumentParser(add_help=False)
    qk.add_argument("--k", type=int, help="Fixed k for Q_k (odd, > 11, not divisible by 11)")
    qk.add_argument("--schedule", help="Two-column 'N_k k' schedule file")
    qk.add_argument("--fallback-exhaustive", action="store_true", help="Try every flip when the code flip fails (small n)")

    deg = argparse.ArgumentParser(add_help=False)
    deg.add_argument("--codes-down-len", type=int, help="Ydown code length; must equal the window width delta1")
    deg.add_argument("--codes-up-len", type=int, help="Yup code length; must equal the window width delta2")
    deg.add_argument("--strict-attack", action="store_true", help="Only the main add/delete move, no repairs")

    sub.add_parser("gen", parents=[common], help="Sample G(n, 1/2)")
    sub.add_parser("decide-qk", parents=[common, qk], help="Decide Q_k")
    sub.add_parser("attack-qk", parents=[common, qk], help="Single-flip attack towards Q_k")
    sub.add_parser("decide-deg", parents=[common, deg], help="Decide the degree-sequence property")
    sub.add_parser("attack-deg", parents=[common, deg], help="Single-flip attack towards the degree-sequence property")

    code = sub.add_parser("code", parents=[common], help="Covering code utilities")
    code.add_argument("--len", type=int, help="Code length N")
    code.add_argument("--word", help="Word as a 0/1 string, for --flip")
    mode = code.add_mutually_exclusive_group(required=True)
    mode.add_argument("--check", action="store_true", help="Exhaustively verify covering radius 1")
    mode.add_argument("--flip", action="store_true", help="Index whose flip moves --word into the code")
    mode.add_argument("--density", action="store_true", help="Code density 2^-r")
    mode.add_argument("--min-cover", action="store_true", help="Minimum covering code by exact search (N <= 5)")

    sim = sub.add_parser("simulate", parents=[common, qk, deg], help="Run a Monte Carlo experiment")
    sim.add_argument("--experiment", choices=[e.value for e in ExperimentId])
    sim.add_argument("--trials", type=int, default=1000)
    sim.add_argument("--m", type=int, help="Modulus for mod_uniformity")
    sim.add_argument("--part", help="degree_range statement: 1..5 or P1..P4")
    sim.add_argument("--jobs", type=int, default=settings.JOBS, help="Worker processes; results do not depend on it")

    sub.add_parser("stats", parents=[common], help="Degree-sequence statistics and typical-degree checks")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    try:
        doc = COMMANDS[args.command](args)
    except (FormatError, OSError) as e:
        logger.error(f"{args.command}: {e}")
        return 2
    except (DomainError, InputError, ValidationError, InvariantViolation) as e:
        logger.error(f"{args.command}: {e}")
        return 1
    if args.csv:
        _emit_csv(doc)
    else:
        _emit(doc)
    return 0


if __name__ == "__main__":
    sys.exit(main())
