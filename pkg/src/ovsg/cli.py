"""Command line entry point: ``ovsg reduce|play|verify|solve``.

Reports go to stdout (``--format structured`` prints one JSON object per
line); short human summaries go to stderr.

Exit codes: 0 success or algorithm win, 10 adversary win, 1 failed check,
2 usage, 3 parse error, 4 cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Optional

from . import corpus
from .degrees import audit_degrees
from .formula import FormulaError, ResourceLimitExceeded, evaluate_tqbf, normalize, parse_qbf
from .gadgets import GadgetError, build_online_instance, check_self_contained
from .game import Outcome, Transcript, replay
from .graph import GraphSizeError, from_networkx
from .offline import Problem, SolverCapExceeded, reduce_3sat, solve_offline_exact
from .serialize import InstanceFormatError, dumps_instance, loads_instance, rebuild, to_dot
from .solver import (BRUTE_FORCE_CAP, SolverCapError, enumerate_policies_bruteforce, solve_game_exact,
                     verify_certificate)
from .strategies import UnknownStrategy, check_precedence, make_adversary, make_algorithm, run_match

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_PARSE, EXIT_CAP, EXIT_ADVERSARY = 0, 1, 2, 3, 4, 10
SUITES = ("degrees", "self-contained", "correspondence", "solver-oracle", "all")


@dataclass
class RunConfig:
    vertex_cap: int = 12
    node_cap: int = 5_000_000
    memo_cap: int = 2_000_000
    seed: int = 0
    output_dir: str = "."
    format: str = "text"

    def __post_init__(self):
        for name in ("vertex_cap", "node_cap", "memo_cap"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.format not in ("text", "structured"):
            raise ValueError(f"unknown format {self.format!r}")

    @classmethod
    def load(cls, path: Optional[str]) -> "RunConfig":
        if not path:
            return cls()
        data = json.loads(Path(path).read_text())
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
        return cls(**data)


class Reporter:
    def __init__(self, fmt: str, out=None, err=None):
        self.fmt = fmt
        self.out = out or sys.stdout
        self.err = err or sys.stderr

    def record(self, **fields_):
        if self.fmt == "structured":
            print(json.dumps(fields_, sort_keys=True), file=self.out)
        else:
            print(" ".join(f"{k} = {v}" for k, v in fields_.items()), file=self.out)

    def check(self, name: str, ok: bool, detail: str = ""):
        if self.fmt == "structured":
            print(json.dumps({"check": name, "pass": ok, "detail": detail}, sort_keys=True), file=self.out)
        else:
            print(f"{'PASS' if ok else 'FAIL'} {name}" + (f"  {detail}" if detail else ""), file=self.out)

    def note(self, text: str):
        print(text, file=self.err)


# reduce -----------------------------------------------------------------------------

def cmd_reduce(args, cfg: RunConfig, rep: Reporter) -> int:
    q = normalize(parse_qbf(Path(args.formula).read_text()))
    p = Problem.parse(args.problem)
    if args.offline:
        red = reduce_3sat(p, q)
        graph, k, fakes, text = red.graph, red.k, 0, dumps_instance(red)
    else:
        inst = build_online_instance(q, p)
        graph, k, fakes, text = inst.graph, inst.k, len(inst.gadgets_of("fake-clause")), dumps_instance(inst)
    out = args.output or str(Path(cfg.output_dir) / (Path(args.formula).stem + f".{p.value}.json"))
    Path(out).write_text(text)
    if args.dot:
        Path(args.dot).write_text(to_dot(graph))
    rep.record(n=q.n, m=q.m, fake_clauses=fakes, vertices=len(graph), edges=graph.n_edges, k=k)
    rep.note(f"wrote {out}")
    return EXIT_OK


# play ---------------------------------------------------------------------------------

def cmd_play(args, cfg: RunConfig, rep: Reporter) -> int:
    loaded = loads_instance(Path(args.instance).read_text())
    inst = rebuild(loaded)
    if not hasattr(inst, "gadgets"):
        raise InstanceFormatError("play needs an online instance (built without --offline)")
    seed = cfg.seed
    if args.replay:
        t = Transcript.from_jsonl(Path(args.replay).read_text())
        state = replay(t, inst.graph)
        outcome = state.outcome()
        rep.record(replayed=args.replay, outcome=outcome.value, size=len(state.solution()), k=inst.k,
                   matches_footer=(t.outcome is None or t.outcome is outcome))
        return EXIT_OK if outcome is Outcome.ALGORITHM else EXIT_ADVERSARY
    algo = make_algorithm(args.algorithm, inst)
    adv = make_adversary(args.adversary, inst, algo, seed)
    state = run_match(inst, algo, adv, seed=seed)
    outcome = state.outcome()
    prec = check_precedence(inst, state.revealed)
    transcript = state.transcript()
    path = args.transcript or str(Path(cfg.output_dir) / f"transcript-{seed}.jsonl")
    Path(path).write_text(transcript.to_jsonl())
    rep.record(algorithm=args.algorithm, adversary=args.adversary, seed=seed, outcome=outcome.value,
               size=len(state.solution()), k=inst.k, tqbf=evaluate_tqbf(inst.formula),
               precedence_violations=len(prec.violations))
    for v in prec.violations:
        rep.record(violation=v)
    rep.note(f"transcript written to {path}")
    return EXIT_OK if outcome is Outcome.ALGORITHM else EXIT_ADVERSARY


# verify -------------------------------------------------------------------------------

def _suite_degrees(cfg, rep) -> bool:
    ok = True
    for q in corpus.sample_formulas(count=120, seed=cfg.seed):
        for p in (Problem.VC, Problem.DS):
            audit = audit_degrees(build_online_instance(q, p))
            if not audit.ok:
                ok = False
                rep.check(f"degrees {p.value} {q.prefix_string} {q}", False, str(audit.mismatches[:3]))
    rep.check("degrees", ok)
    return ok


def _suite_self_contained(cfg, rep) -> bool:
    ok = True
    for n in (2, 3):
        q = corpus.FALSE_WITNESS if n == 3 else corpus.RUNNING
        for p in Problem:
            seen = set()
            for gadget in build_online_instance(q, p).gadgets:
                if (gadget.kind, gadget.standalone_optimum) in seen and gadget.kind != "dr":
                    continue
                seen.add((gadget.kind, gadget.standalone_optimum))
                r = check_self_contained(p, gadget)
                ok &= r.ok
                rep.check(f"self-contained {p.value} n={n} {gadget.name}", r.ok,
                          f"optimum={r.standalone_optimum} forcings={r.assignments}")
    return ok


def _suite_correspondence(cfg, rep) -> bool:
    ok = True
    formulas = list(corpus.normalized_formulas(2, 1)) + [corpus.FALSE_WITNESS] + \
        corpus.sample_formulas(ns=(3,), max_m=2, count=8, seed=cfg.seed)
    for q in formulas:
        truth = evaluate_tqbf(q)
        for p in Problem:
            inst = build_online_instance(q, p)
            state = run_match(inst, seed=cfg.seed)
            won = state.outcome() is Outcome.ALGORITHM
            size_ok = not won or (len(state.solution()) == inst.k if p.minimize else len(state.solution()) >= inst.k)
            prec = check_precedence(inst, state.revealed)
            good = won == truth and size_ok and prec.ok
            ok &= good
            rep.check(f"correspondence {p.value} {q}", good, f"tqbf={truth} won={won} k={inst.k}")
    return ok


def _suite_solver_oracle(cfg, rep) -> bool:
    import networkx as nx

    ok = True
    for h in nx.graph_atlas_g()[1:19]:  # all graphs on 1..4 vertices
        g = from_networkx(h)
        for p in Problem:
            for k in range(len(g) + 1):
                a = solve_game_exact(g, p, k, cap=cfg.vertex_cap)
                b = enumerate_policies_bruteforce(g, p, k)
                good = a.algorithm_wins == b.algorithm_wins and verify_certificate(g, p, k, a)
                if not good:
                    rep.check(f"solver-oracle {p.value} k={k} edges={sorted(h.edges())}", False)
                ok &= good
    rep.check("solver-oracle", ok, "graphs on at most 4 vertices, all problems and budgets")
    return ok


def cmd_verify(args, cfg: RunConfig, rep: Reporter) -> int:
    if args.instance:
        try:
            inst = rebuild(loads_instance(Path(args.instance).read_text()))
        except InstanceFormatError as exc:
            rep.check(f"instance {args.instance}", False, str(exc))
            return EXIT_FAIL
        rep.check(f"instance {args.instance}", True, f"|V|={len(inst.graph)} k={inst.k}")
        if args.suite is None:
            return EXIT_OK
    suite = args.suite or "all"
    runners = {
        "degrees": _suite_degrees,
        "self-contained": _suite_self_contained,
        "correspondence": _suite_correspondence,
        "solver-oracle": _suite_solver_oracle,
    }
    names = list(runners) if suite == "all" else [suite]
    ok = True
    for name in names:
        t = time.time()
        ok &= runners[name](cfg, rep)
        rep.note(f"{name}: {time.time() - t:.1f}s")
    return EXIT_OK if ok else EXIT_FAIL


# solve --------------------------------------------------------------------------------

def cmd_solve(args, cfg: RunConfig, rep: Reporter) -> int:
    loaded = loads_instance(Path(args.graph).read_text())
    p = Problem.parse(args.problem) if args.problem else loaded.problem
    if p is None:
        raise InstanceFormatError("no problem given (use --problem)")
    k = args.k if args.k is not None else loaded.k
    if k is None:
        raise InstanceFormatError("no budget given (use --k)")
    cap = args.cap_vertices or cfg.vertex_cap
    g = loaded.graph
    if args.bruteforce:
        value = enumerate_policies_bruteforce(g, p, k, cap=args.cap_vertices or BRUTE_FORCE_CAP,
                                              node_cap=cfg.node_cap)
    else:
        value = solve_game_exact(g, p, k, cap=cap, memo_cap=cfg.memo_cap)
    fields_ = dict(problem=p.value, k=k, vertices=len(g), winner=value.winner.value,
                   method="bruteforce" if args.bruteforce else "exact")
    if not args.bruteforce:
        fields_["certificate_ok"] = verify_certificate(g, p, k, value)
        fields_["certificate_size"] = len(value.policy) if value.algorithm_wins else len(value.refutation)
    if args.offline_optimum:
        fields_["offline_optimum"] = solve_offline_exact(p, g, witness=False).size
    rep.record(**fields_)
    return EXIT_OK if value.algorithm_wins else EXIT_ADVERSARY


# entry ----------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    # global flags are accepted before or after the subcommand
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "structured"), default=argparse.SUPPRESS)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--cap-vertices", type=int, default=argparse.SUPPRESS)
    common.add_argument("--config", default=argparse.SUPPRESS, help="RunConfig JSON (default: $OVSG_CONFIG)")
    ap = argparse.ArgumentParser(prog="ovsg", parents=[common],
                                 description="Online vertex subset games and their reductions.")
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("reduce", parents=[common], help="build the online (or offline) reduction of a QDIMACS formula")
    r.add_argument("formula")
    r.add_argument("--problem", choices=("vc", "is", "ds"), required=True)
    r.add_argument("--offline", action="store_true")
    r.add_argument("--dot", default=None)
    r.add_argument("-o", "--output", default=None)

    pl = sub.add_parser("play", parents=[common], help="play a match on an instance file")
    pl.add_argument("instance")
    pl.add_argument("--algorithm", default="paper")
    pl.add_argument("--adversary", default="paper")
    pl.add_argument("--transcript", default=None)
    pl.add_argument("--replay", default=None)

    v = sub.add_parser("verify", parents=[common], help="run a verification suite")
    v.add_argument("suite", nargs="?", choices=SUITES, default=None)
    v.add_argument("--instance", default=None, help="check an instance file against its formula")

    s = sub.add_parser("solve", parents=[common], help="exact game value of a small graph")
    s.add_argument("graph")
    s.add_argument("--k", type=int, default=None)
    s.add_argument("--problem", choices=("vc", "is", "ds"), default=None)
    s.add_argument("--bruteforce", action="store_true")
    s.add_argument("--offline-optimum", action="store_true")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    for name in ("format", "seed", "cap_vertices", "config"):
        if not hasattr(args, name):
            setattr(args, name, None)
    try:
        cfg = RunConfig.load(args.config or os.environ.get("OVSG_CONFIG"))
    except (OSError, ValueError, TypeError) as exc:
        print(f"ovsg: bad config: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.format:
        cfg.format = args.format
    if args.seed is not None:
        cfg.seed = args.seed
    if args.cap_vertices is not None:
        if args.cap_vertices <= 0:
            print("ovsg: --cap-vertices must be positive", file=sys.stderr)
            return EXIT_USAGE
        cfg.vertex_cap = args.cap_vertices
    rep = Reporter(cfg.format)
    handlers = {"reduce": cmd_reduce, "play": cmd_play, "verify": cmd_verify, "solve": cmd_solve}
    try:
        return handlers[args.command](args, cfg, rep)
    except (FormulaError, InstanceFormatError, GadgetError) as exc:
        print(f"ovsg: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (SolverCapError, SolverCapExceeded, ResourceLimitExceeded, GraphSizeError) as exc:
        print(f"ovsg: cap exceeded: {exc}", file=sys.stderr)
        return EXIT_CAP
    except UnknownStrategy as exc:
        print(f"ovsg: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"ovsg: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
