"""Command-line front end.

Exit codes: 0 success, 1 negative answer, 2 usage or input error,
3 a self-check of an emitted derivation failed.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

from . import imll
from .lam import (
    LamSyntaxError,
    LinearityError,
    StepError,
    alpha_eq,
    linearity_diagnostic,
    parse_lam,
    print_lam,
    reduce,
    tidy_names,
)
from .prover import BudgetHit, ExhaustedComplete, Proved, SearchBudget, STRATEGIES, prove, reduction_goal
from .rules import DOWN, RULES, SBVR, UP, check_derivation, explain_derivation, from_certificate, to_certificate
from .simulate import SimulationGap, sidecar, simulate_trace
from .structure import StructureSyntaxError, equiv, is_legal, normalize, parse_structure, print_structure, size
from .translate import DEFAULT_OUTPUT, TranslationError, translate

OK, NEGATIVE, USAGE, INTERNAL = 0, 1, 2, 3

FRAGMENTS = {"down": DOWN, "up": UP, "sbvr": SBVR, "all": SBVR}


class _UsageError(Exception):
    pass


def _read_arg(text: str) -> str:
    """``-`` reads standard input, ``@path`` reads a file, anything else is literal."""
    if text == "-":
        return sys.stdin.read()
    if text.startswith("@"):
        return Path(text[1:]).read_text(encoding="utf-8")
    return text


def _term(text: str):
    m = parse_lam(_read_arg(text))
    diag = linearity_diagnostic(m)
    if diag:
        raise LinearityError(diag)
    return m


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _census(counts: Dict[str, int]) -> str:
    return ", ".join(f"{r}={counts[r]}" for r in RULES if r in counts) or "no steps"


def _out(line: str = "") -> None:
    sys.stdout.write(line + "\n")


def _err(line: str) -> None:
    sys.stderr.write(line + "\n")


# ---------------------------------------------------------------- subcommands

def cmd_parse_term(a: argparse.Namespace) -> int:
    src = sys.stdin.read() if a.file == "-" else Path(a.file).read_text(encoding="utf-8")
    m = parse_lam(src)
    diag = linearity_diagnostic(m)
    if diag:
        _err(f"not linear: {diag}")
        return NEGATIVE
    _out(print_lam(tidy_names(m)))
    return OK


def cmd_reduce(a: argparse.Namespace) -> int:
    m = _term(a.term)
    tr = reduce(m, a.strategy, a.max_steps)
    for t in tr.terms():
        _out(print_lam(t))
    if a.trace:
        doc = {
            "start": print_lam(tr.start),
            "steps": [
                {"rule": site.rule, "path": list(site.path), "term": print_lam(t)} for site, t in tr.steps
            ],
            "complete": tr.complete,
        }
        _write(a.trace, json.dumps(doc, ensure_ascii=False, indent=1) + "\n")
    if not tr.complete:
        _err(f"stopped after {len(tr.steps)} steps without reaching a normal form")
        return NEGATIVE
    return OK


def cmd_translate(a: argparse.Namespace) -> int:
    _out(print_structure(translate(_term(a.term), a.out_channel)))
    return OK


def cmd_simulate(a: argparse.Namespace) -> int:
    m = _term(a.term)
    tr = reduce(m, a.strategy)
    if a.to is not None:
        target = _term(a.to)
        terms = tr.terms()
        hit = next((i for i, t in enumerate(terms) if alpha_eq(t, target)), None)
        if hit is None:
            _err(f"{print_lam(target)} is not on the {a.strategy} reduction path of {print_lam(m)}")
            return NEGATIVE
        tr = type(tr)(tr.start, tr.steps[:hit], True)
    try:
        d = simulate_trace(tr, a.out_channel)
    except SimulationGap as gap:
        _err(f"simulation gap at {gap.rule}: {gap}")
        return INTERNAL
    problem = explain_derivation(d, SBVR)
    if problem is not None:
        _err(f"self-check failed: {problem}")
        return INTERNAL
    _out(f"conclusion: {print_structure(d.conclusion)}")
    _out(f"premise: {print_structure(d.premise)}")
    _out(f"steps: {len(d)} ({_census(d.rules_used())})")
    if a.cert:
        _write(a.cert, to_certificate(d))
        _write(a.cert + ".sidecar.json", sidecar(tr.start, tr.end, a.out_channel))
    return OK


def _budget(text: Optional[str]) -> SearchBudget:
    try:
        return SearchBudget.parse(text) if text else SearchBudget()
    except ValueError as e:
        raise _UsageError(str(e)) from None


def _report(outcome, cert: Optional[str]) -> int:
    _err(outcome.stats.to_json())
    if isinstance(outcome, Proved):
        d = outcome.derivation
        if explain_derivation(d, DOWN) is not None or not d.is_proof():
            _err("self-check failed: the proof does not check over the down fragment")
            return INTERNAL
        _out(f"proved in {len(d)} steps ({_census(d.rules_used())})")
        if cert:
            _write(cert, to_certificate(d))
        return OK
    if isinstance(outcome, ExhaustedComplete):
        _out("not provable")
    else:
        assert isinstance(outcome, BudgetHit)
        _out(f"unknown: budget exhausted ({outcome.reason})")
    return NEGATIVE


def cmd_prove(a: argparse.Namespace) -> int:
    goal = parse_structure(_read_arg(a.structure))
    return _report(prove(goal, _budget(a.budget), prune=not a.no_prune, strategy=a.strategy), a.cert)


def cmd_prove_reduction(a: argparse.Namespace) -> int:
    goal = reduction_goal(_term(a.term_m), _term(a.term_n), a.out_channel)
    _out(f"goal: {print_structure(goal)}")
    return _report(prove(goal, _budget(a.budget), strategy=a.strategy), a.cert)


def _fragment(text: str) -> frozenset:
    if text in FRAGMENTS:
        return FRAGMENTS[text]
    names = frozenset(filter(None, (s.strip() for s in text.split(","))))
    unknown = sorted(names - set(RULES))
    if unknown or not names:
        raise _UsageError(f"unknown rules in --allow: {', '.join(unknown) or text!r}")
    return names


def cmd_check(a: argparse.Namespace) -> int:
    allowed = _fragment(a.allow)
    text = Path(a.cert).read_text(encoding="utf-8") if a.cert != "-" else sys.stdin.read()
    try:
        d = from_certificate(text)
    except (KeyError, TypeError, json.JSONDecodeError) as e:
        raise _UsageError(f"malformed certificate: {e}") from None
    counts = d.rules_used()
    _out(f"rules: {_census(counts)}")
    outside = sorted(set(counts) - allowed)
    if outside:
        _out(f"rejected: rules outside the allowed set: {', '.join(outside)}")
        return NEGATIVE
    problem = explain_derivation(d, allowed)
    if problem is not None:
        _out(f"rejected: {problem}")
        return NEGATIVE
    _out(f"ok: {len(d)} steps, premise {print_structure(d.premise)}")
    return OK


def cmd_struct(a: argparse.Namespace) -> int:
    r = parse_structure(_read_arg(a.structure))
    if a.op == "eq":
        if a.other is None:
            raise _UsageError("struct eq needs two structures")
        same = equiv(r, parse_structure(_read_arg(a.other)))
        _out("true" if same else "false")
        return OK if same else NEGATIVE
    if a.other is not None:
        raise _UsageError(f"struct {a.op} takes one structure")
    if a.op == "normalize":
        _out(print_structure(normalize(r)))
    elif a.op == "size":
        _out(str(size(r)))
    else:
        ok = is_legal(r)
        _out("true" if ok else "false")
        return OK if ok else NEGATIVE
    return OK


def cmd_imll(a: argparse.Namespace) -> int:
    text = sys.stdin.read() if a.proof == "-" else Path(a.proof).read_text(encoding="utf-8")
    try:
        p = imll.proof_from_json(text)
    except json.JSONDecodeError as e:
        raise _UsageError(f"malformed proof file: {e}") from None
    except imll.ImllError as e:
        _err(f"invalid proof: {e}")
        return NEGATIVE
    d = imll.compile_proof(p)
    if not check_derivation(d, SBVR) or not imll.boundary_ok(p, d):
        _err("self-check failed on the compiled derivation")
        return INTERNAL
    _out(f"sequent: {p.sequent}")
    _out(f"conclusion: {print_structure(d.conclusion)}")
    _out(f"premise: {print_structure(d.premise)}")
    _out(f"steps: {len(d)} ({_census(d.rules_used())})")
    if a.cert:
        _write(a.cert, to_certificate(d))
    return OK


# ---------------------------------------------------------------- argument parsing

class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        raise _UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="seqren", description="Linear λ-terms, structures and derivations.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name: str, fn: Callable[[argparse.Namespace], int], help: str) -> argparse.ArgumentParser:
        sp = sub.add_parser(name, help=help)
        sp.set_defaults(fn=fn)
        return sp

    sp = add("parse-term", cmd_parse_term, "parse a term, check linearity, print it with tidy binders")
    sp.add_argument("file", help="file holding the term, or - for stdin")

    sp = add("reduce", cmd_reduce, "reduce a term to normal form")
    sp.add_argument("term")
    sp.add_argument("--strategy", default="leftmost_outermost", choices=["leftmost_outermost", "rightmost_innermost"])
    sp.add_argument("--max-steps", type=int, default=None)
    sp.add_argument("--trace", metavar="OUT.json")

    sp = add("translate", cmd_translate, "print the structure of a term")
    sp.add_argument("term")
    sp.add_argument("--out-channel", default=DEFAULT_OUTPUT)

    sp = add("simulate", cmd_simulate, "derive the translation of a term from that of its reduct")
    sp.add_argument("term")
    sp.add_argument("--to", metavar="TERM", help="stop at this reduct instead of the normal form")
    sp.add_argument("--strategy", default="leftmost_outermost", choices=["leftmost_outermost", "rightmost_innermost"])
    sp.add_argument("--out-channel", default=DEFAULT_OUTPUT)
    sp.add_argument("--cert", metavar="OUT.json")

    sp = add("prove", cmd_prove, "search for a proof in the down fragment")
    sp.add_argument("structure")
    sp.add_argument("--budget", help="e.g. depth=16,states=2000000,seconds=60")
    sp.add_argument("--strategy", default="dfs", choices=STRATEGIES)
    sp.add_argument("--no-prune", action="store_true")
    sp.add_argument("--cert", metavar="OUT.json")

    sp = add("prove-reduction", cmd_prove_reduction, "prove [T(M); not T(N)]")
    sp.add_argument("term_m", metavar="M")
    sp.add_argument("term_n", metavar="N")
    sp.add_argument("--out-channel", default=DEFAULT_OUTPUT)
    sp.add_argument("--budget")
    sp.add_argument("--strategy", default="dfs", choices=STRATEGIES)
    sp.add_argument("--cert", metavar="OUT.json")

    sp = add("check", cmd_check, "check a derivation certificate")
    sp.add_argument("cert")
    sp.add_argument("--allow", default="sbvr", help="down, up, sbvr or a comma-separated rule list")

    sp = add("struct", cmd_struct, "structure utilities")
    sp.add_argument("op", choices=["eq", "normalize", "size", "legal"])
    sp.add_argument("structure")
    sp.add_argument("other", nargs="?")

    sp = add("imll", cmd_imll, "IMLL proofs")
    sp.add_argument("action", choices=["compile"])
    sp.add_argument("proof", help="proof JSON file, or - for stdin")
    sp.add_argument("--cert", metavar="OUT.json")
    return p


def run(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(list(argv) if argv is not None else None)
        return args.fn(args)
    except _UsageError as e:
        _err(f"seqren: {e}")
        return USAGE
    except (LamSyntaxError, StructureSyntaxError, imll.ImllError) as e:
        _err(f"seqren: syntax error: {e}")
        return USAGE
    except (LinearityError, TranslationError, StepError) as e:
        _err(f"seqren: {e}")
        return NEGATIVE
    except OSError as e:
        _err(f"seqren: {e}")
        return USAGE


def main(argv: Optional[List[str]] = None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
