"""Command-line interface: ``schemata solve|classify|ground``."""
from __future__ import annotations

import argparse
import sys
import warnings
from importlib import resources
from pathlib import Path
from typing import Dict, List, Optional

from .export import export_proof
from .ground import solve_prop, to_dimacs
from .schema import Schema, check_wellformed, realize
from .strategy import StrategyOptions, classify, run_strategy
from .syntax import ParseError, parse_problem
from .tableau import Options, Prover, SoundnessError, enumerate_baseline

EXIT_OK, EXIT_INPUT, EXIT_SOUNDNESS = 0, 2, 3


class IllFormed(ValueError):
    def __init__(self, errors: List[str]):
        super().__init__("; ".join(errors))
        self.errors = errors


def corpus_names() -> List[str]:
    d = resources.files("schemata") / "corpus"
    return sorted(p.name[:-4] for p in d.iterdir() if p.name.endswith(".sch"))


def corpus_text(name: str) -> str:
    return (resources.files("schemata") / "corpus" / f"{name}.sch").read_text()


def read_source(source: str) -> str:
    """A path, or ``corpus:NAME`` for a bundled problem."""
    if source.startswith("corpus:"):
        return corpus_text(source[len("corpus:"):])
    return Path(source).read_text()


def load_problem(text: str) -> Schema:
    s = parse_problem(text)
    errs = check_wellformed(s)
    if errs:
        raise IllFormed(errs)
    return s


def _env(s: Schema, n: Optional[int], env: Optional[str]) -> Dict[str, int]:
    out: Dict[str, int] = {}
    if env:
        for item in env.split(","):
            k, v = item.split("=")
            out[k.strip()] = int(v)
    if n is not None:
        if len(s.parameters) != 1:
            raise SystemExit("--n needs a single-parameter schema; use --env")
        out[s.parameters[0]] = n
    missing = set(s.parameters) - set(out)
    if missing:
        raise SystemExit(f"no value for {sorted(missing)}")
    return out


def cmd_solve(args: argparse.Namespace) -> int:
    s = load_problem(read_source(args.file))
    if args.emit_dimacs:
        n, path = args.emit_dimacs
        env = _env(s, int(n), None)
        Path(path).write_text(to_dimacs(realize(s, env)))
    if args.mode == "enumerate":
        v = enumerate_baseline(s, args.nmax)
        print(v.line())
        return EXIT_OK
    if args.mode == "strategy":
        with warnings.catch_warnings():
            warnings.simplefilter("ignore" if args.quiet else "default")
            v = run_strategy(s, StrategyOptions(node_budget=args.budget, time_limit=args.time_limit))
    else:
        v = Prover(s, Options(budget=args.budget, time_limit=args.time_limit)).run()
    tab = getattr(v, "tableau", None)
    if args.emit_proof and tab is not None:
        Path(args.emit_proof).write_bytes(export_proof(tab, args.format))
    if tab is not None and not args.quiet:
        print(f"nodes={len(tab.nodes)} loops={len(tab.loops)} rules={tab.counts()}", file=sys.stderr)
    print(v.line())
    return EXIT_OK


def cmd_classify(args: argparse.Namespace) -> int:
    s = load_problem(read_source(args.file))
    print(classify(s).to_json())
    return EXIT_OK


def cmd_ground(args: argparse.Namespace) -> int:
    s = load_problem(read_source(args.file))
    f = realize(s, _env(s, args.n, args.env))
    if args.dimacs:
        sys.stdout.write(to_dimacs(f))
        return EXIT_OK
    print(f)
    m = solve_prop(f)
    print("SAT" if m is not None else "UNSAT")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="schemata", description="Satisfiability of iterated propositional schemata.")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve", help="decide a schema")
    sp.add_argument("file", help="problem file or corpus:NAME")
    sp.add_argument("--mode", choices=["schdp", "strategy", "enumerate"], default="schdp")
    sp.add_argument("--budget", type=int, default=100_000, help="node budget")
    sp.add_argument("--time-limit", type=float, default=None, help="seconds")
    sp.add_argument("--nmax", type=int, default=10, help="largest parameter for enumerate")
    sp.add_argument("--emit-proof", metavar="PATH")
    sp.add_argument("--format", choices=["json", "dot"], default="json")
    sp.add_argument("--emit-dimacs", nargs=2, metavar=("N", "PATH"))
    sp.add_argument("-q", "--quiet", action="store_true", help="verdict line only")
    sp.set_defaults(func=cmd_solve)

    cp = sub.add_parser("classify", help="report the syntactic class as JSON")
    cp.add_argument("file")
    cp.set_defaults(func=cmd_classify)

    gp = sub.add_parser("ground", help="print the realization at one environment")
    gp.add_argument("file")
    gp.add_argument("--n", type=int)
    gp.add_argument("--env", help="k=v,... for several parameters")
    gp.add_argument("--dimacs", action="store_true")
    gp.set_defaults(func=cmd_ground)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except IllFormed as e:
        for msg in e.errors:
            print(f"ill-formed: {msg}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except SoundnessError as e:
        print(f"soundness check failed: {e}", file=sys.stderr)
        return EXIT_SOUNDNESS


if __name__ == "__main__":
    sys.exit(main())
