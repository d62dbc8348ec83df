"""Command-line front end: ``regiso <command> ...``.

Exit codes: 0 isomorphic / success, 1 not isomorphic, 2 usage or input
error, 3 resource limit.  Verdicts go to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import random
import subprocess
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import corpus as corpus_mod
from .automata import DEFAULT_CAP, Dfa, PartitionedDfa, determinize, format_automaton, parse_automaton
from .errors import RegisoError, ResourceLimit
from .gadgets import (
    boolean_tree_gadget, circuit_to_ses, circuit_to_tree_dags, eta_universality_gadget,
    parse_circuit,
)
from .heilbrunner import heilbrunner_expression
from .isocore import (
    one_color, ordered_tree_iso, ordered_tree_iso_prefix_closed, ses_disjoint_union, ses_iso_run,
    word_iso,
)
from .slp import slp_eq, slp_factor, slp_from_rules, slp_length
from .treeiso import finite_tree_canon, tree_iso_nfa
from .words import Concat, Ses, Symbol, Var, format_ses, parse_ses, variables_in

EXIT_YES, EXIT_NO, EXIT_ERROR, EXIT_LIMIT = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _read(path) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror or e}") from None


def _write(path, text: str):
    try:
        Path(path).write_text(text)
    except OSError as e:
        raise UsageError(f"cannot write {path}: {e.strerror or e}") from None


def _automaton(path, want=None):
    a = parse_automaton(_read(path))
    if want is not None and not isinstance(a, want):
        raise UsageError(f"{path}: expected a {want.__name__}, got {type(a).__name__}")
    return a


def _dfa(path, cap) -> Dfa:
    a = _automaton(path)
    if isinstance(a, PartitionedDfa):
        raise UsageError(f"{path}: expected an automaton with finals, got a pdfa")
    if isinstance(a, Dfa):
        return a
    return determinize(a, cap)


def _verdict(flag: bool) -> int:
    print("isomorphic" if flag else "not-isomorphic")
    return EXIT_YES if flag else EXIT_NO


def _slp_of(path):
    s = parse_ses(_read(path))
    rules = {}
    for x, e in s.rhs.items():
        items = list(e.items) if isinstance(e, Concat) else [e]
        out = []
        for it in items:
            if isinstance(it, Symbol):
                out.append(("T", it.token))
            elif isinstance(it, Var):
                out.append(it.name)
            else:
                raise UsageError(f"{path}: variable {x!r} uses more than concatenation")
        rules[x] = out
    root = s.start
    if root is None:
        used = {v for e in s.rhs.values() for v in variables_in(e)}
        tops = [x for x in s.rhs if x not in used]
        if len(tops) != 1:
            raise UsageError(f"{path}: several root variables; add a 'start:' line")
        root = tops[0]
    return slp_from_rules(rules, root)


# ---------------------------------------------------------------------------
# commands


def cmd_tree_iso(args):
    a1, a2 = _automaton(args.a1), _automaton(args.a2)
    return _verdict(tree_iso_nfa(a1, a2, args.cap))


def cmd_tree_canon(args):
    print(finite_tree_canon(_automaton(args.a)))
    return EXIT_YES


def cmd_slp(args):
    if args.op == "len":
        if len(args.files) != 1:
            raise UsageError("slp len takes one file")
        print(slp_length(_slp_of(args.files[0])))
        return EXIT_YES
    if len(args.files) != 2:
        raise UsageError(f"slp {args.op} takes two files")
    p, t = (_slp_of(f) for f in args.files)
    if args.op == "eq":
        flag = slp_eq(p, t)
        print("equal" if flag else "different")
    else:
        flag = slp_factor(p, t)
        print("factor" if flag else "no-factor")
    return EXIT_YES if flag else EXIT_NO


def cmd_heilbrunner(args):
    s = heilbrunner_expression(_automaton(args.a, PartitionedDfa))
    text = format_ses(s)
    if args.output:
        _write(args.output, text)
    else:
        sys.stdout.write(text)
    return EXIT_YES


def _ses_iso(s: Ses, x: str, y: str, trace: bool) -> int:
    run = ses_iso_run(s, x, y, keep_systems=trace)
    if trace:
        for k, sys_k in enumerate(run.systems, 1):
            sys.stderr.write(f"# round {k}\n")
            sys.stderr.write(format_ses(sys_k.lo_ses()))
            sys.stderr.write(format_ses(sys_k.up_ses()))
    return _verdict(run.verdict)


def _pair_iso(s1: Ses, s2: Ses, trace: bool) -> int:
    u, m1, m2 = ses_disjoint_union(s1, s2)
    return _ses_iso(u, m1[s1.start], m2[s2.start], trace)


def cmd_word_iso(args):
    a1 = _automaton(args.a1, PartitionedDfa)
    a2 = _automaton(args.a2, PartitionedDfa)
    if not args.trace:
        return _verdict(word_iso(a1, a2))
    return _pair_iso(heilbrunner_expression(a1), heilbrunner_expression(a2), True)


def cmd_order_iso(args):
    a1 = one_color(_dfa(args.a1, args.cap))
    a2 = one_color(_dfa(args.a2, args.cap))
    return _pair_iso(heilbrunner_expression(a1), heilbrunner_expression(a2), args.trace)


def cmd_ses_iso(args):
    return _ses_iso(parse_ses(_read(args.s)), args.x, args.y, args.trace)


def cmd_otree_iso(args):
    a1, a2 = _dfa(args.a1, args.cap), _dfa(args.a2, args.cap)
    decide = ordered_tree_iso_prefix_closed if args.prefix_closed else ordered_tree_iso
    return _verdict(decide(a1, a2))


def _outputs(args, n):
    if not args.output or len(args.output) != n:
        raise UsageError(f"-o needs {n} output path(s)")
    return args.output


def cmd_gadget(args):
    if args.kind_ == "circuit-tree":
        out = _outputs(args, 2)
        for path, a in zip(out, circuit_to_tree_dags(parse_circuit(_read(args.inputs[0])))):
            _write(path, format_automaton(a))
    elif args.kind_ == "circuit-ses":
        out = _outputs(args, 1)
        s, x, y = circuit_to_ses(parse_circuit(_read(args.inputs[0])))
        _write(out[0], f"# compare {x} with {y}\n" + format_ses(s))
        print(f"{x} {y}")
    elif args.kind_ == "eta":
        out = _outputs(args, 1)
        _write(out[0], format_automaton(eta_universality_gadget(_automaton(args.inputs[0]))))
    else:
        if len(args.inputs) != 2:
            raise UsageError("bool-tree takes two automata")
        out = _outputs(args, 2)
        pair = boolean_tree_gadget(_automaton(args.inputs[0]), _automaton(args.inputs[1]),
                                   args.kind)
        for path, a in zip(out, pair):
            _write(path, format_automaton(a))
    return EXIT_YES


def cmd_corpus(args):
    if args.op == "build":
        paths = corpus_mod.write_corpus(args.dir, corpus_mod.build_corpus(args.seed))
        print(f"wrote {len(paths)} files to {args.dir}")
        return EXIT_YES
    items = sorted(corpus_mod.read_corpus(args.dir).items())
    if not items:
        raise UsageError(f"no .ses files in {args.dir}")
    failed = 0
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as ex:
            results = list(ex.map(corpus_mod.check_contract, [s for _, s in items]))
    else:
        results = [corpus_mod.check_contract(s) for _, s in items]
    for (name, _), (problems, rounds, bound) in zip(items, results):
        status = "FAIL" if problems else "ok"
        failed += bool(problems)
        print(f"{status} {name} rounds={rounds} bound={bound}")
        for p in problems:
            print(f"  {p}", file=sys.stderr)
    print(f"{len(items) - failed}/{len(items)} files satisfy the main-step contract")
    return EXIT_NO if failed else EXIT_YES


def cmd_selftest(args):
    suite = Path(__file__).resolve().parents[2] / "tests" / "test_acceptance.py"
    if not suite.exists():
        raise UsageError("acceptance suite not found; run from a source checkout")
    cmd = [sys.executable, "-m", "pytest", "-q", "-s", str(suite)]
    if args.seed is not None:
        cmd += ["--seed", str(args.seed)]
    return EXIT_YES if subprocess.call(cmd) == 0 else EXIT_NO


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--cap", type=int, default=DEFAULT_CAP,
                        help="state cap for determinization (default %(default)s)")
    common.add_argument("--trace", action="store_true",
                        help="dump the two-level system of every round to stderr")
    common.add_argument("--seed", type=int, default=None, help="seed for generators")
    common.add_argument("--jobs", type=int, default=1, help="parallel workers for batch runs")

    p = argparse.ArgumentParser(prog="regiso", description="Isomorphism of regular structures.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        q = sub.add_parser(name, parents=[common], help=help_)
        q.set_defaults(func=func)
        return q

    q = add("tree-iso", cmd_tree_iso, "regular trees under the prefix order")
    q.add_argument("a1")
    q.add_argument("a2")
    q = add("tree-canon", cmd_tree_canon, "canonical code of a finite tree")
    q.add_argument("a")
    q = add("slp", cmd_slp, "straight-line programs given as concatenation-only SES files")
    q.add_argument("op", choices=("eq", "len", "factor"))
    q.add_argument("files", nargs="+")
    q = add("heilbrunner", cmd_heilbrunner, "SES for the regular word of a partitioned DFA")
    q.add_argument("a")
    q.add_argument("-o", "--output")
    q = add("word-iso", cmd_word_iso, "regular words of two partitioned DFAs")
    q.add_argument("a1")
    q.add_argument("a2")
    q = add("order-iso", cmd_order_iso, "languages under the lexicographic order")
    q.add_argument("a1")
    q.add_argument("a2")
    q = add("ses-iso", cmd_ses_iso, "two variables of one SES")
    q.add_argument("s")
    q.add_argument("x")
    q.add_argument("y")
    q = add("otree-iso", cmd_otree_iso, "ordered trees (prefix order, ordered siblings)")
    q.add_argument("a1")
    q.add_argument("a2")
    q.add_argument("--prefix-closed", action="store_true")
    q = add("gadget", cmd_gadget, "reduction instances")
    q.add_argument("kind_", metavar="kind", choices=("circuit-tree", "circuit-ses", "eta", "bool-tree"))
    q.add_argument("inputs", nargs="+")
    q.add_argument("--kind", choices=("and", "or"), default="and", help="bool-tree combinator")
    q.add_argument("-o", "--output", nargs="+")
    q = add("corpus", cmd_corpus, "build or check the main-step corpus")
    q.add_argument("op", choices=("build", "check"))
    q.add_argument("dir")
    add("selftest", cmd_selftest, "run the acceptance suite")
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_YES if e.code == 0 else EXIT_ERROR
    if getattr(args, "seed", None) is None and args.command == "corpus":
        args.seed = 0
    if args.seed is not None:
        random.seed(args.seed)
    try:
        return args.func(args)
    except ResourceLimit as e:
        print(f"regiso: resource limit: {e}", file=sys.stderr)
        return EXIT_LIMIT
    except (UsageError, RegisoError) as e:
        print(f"regiso: {e}", file=sys.stderr)
        return EXIT_ERROR
    except RecursionError:
        print("regiso: input too deeply nested", file=sys.stderr)
        return EXIT_ERROR


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
