"""Acceptance criteria 1-10.

Each test records a PASS/FAIL verdict before asserting, so the terminal
summary lists every criterion even when some fail.  Run on its own with
``python3 tests/test_acceptance.py``.
"""

import random
import sys
import time

import pytest

from seqren.corpus import corpus_terms, prover_family, random_linear_term, random_structure, scramble
from seqren.derived import def_down, def_up, gen_interaction_down, gen_interaction_up, mixp, pmix
from seqren.imll import Ax, Cut, LolliIntro, TensorIntro, Var, boundary_ok, compile_proof, embed_sequent
from seqren.lam import alpha_eq, find_redexes, reduce, step
from seqren.prover import ExhaustedComplete, Proved, SearchBudget, exhaustive_oracle, prove, reduction_goal
from seqren.rules import DOWN, SBVR, UP, check_derivation, context_extrusion
from seqren.simulate import SimulationGap, recognize_step, simulate_trace
from seqren.structure import (
    HOLE,
    ONE,
    Atom,
    canonicalize,
    equiv,
    free_names,
    is_legal,
    negate,
    parse_structure,
    plug,
    positions,
    replace_at,
    size,
)
from seqren.translate import readback, translate

from checks import output_names_linear
from conftest import AFFINITY_BREAKS, record_verdict, watched_instances

P = parse_structure


def _random_context(rng, r):
    leaves = [p for p, n in positions(r) if isinstance(n, Atom)]
    return replace_at(r, rng.choice(leaves), HOLE)


def test_criterion_1_congruence_suite():
    rng = random.Random(1)
    t0 = time.monotonic()
    bad = []
    for i in range(500):
        r = random_structure(rng, max_atoms=20, max_binders=4)
        t = scramble(rng, r)
        u = scramble(rng, t)
        c = canonicalize(r)
        ctx = _random_context(rng, random_structure(rng, max_atoms=6, max_binders=2))
        ok = (
            canonicalize(c) == c
            and equiv(r, r)
            and equiv(r, t) and equiv(t, r) and equiv(t, u) and equiv(r, u)
            and equiv(plug(ctx, r), plug(ctx, t))
            and size(r) == size(t)
            and free_names(r) == free_names(t)
            and negate(negate(r)) == r
        )
        if not ok:
            bad.append(i)
    elapsed = time.monotonic() - t0
    ok = not bad and elapsed < 10
    record_verdict(1, ok, f"500 structures, {len(bad)} failures, {elapsed:.1f}s")
    assert ok


def test_criterion_2_reference_values():
    sizes = (size(P("{a}[b;~b]")), size(P("{a}[a;~a]")))
    legal = tuple(is_legal(P(t)) for t in ("{a}[~a;b]", "<{a}[a;~a];{a}(a;~a);~a>", "(a;{b}<a;~a>)"))
    ok = sizes == (2, 3) and legal == (True, True, False)
    record_verdict(2, ok, f"sizes {sizes}, legality {legal}")
    assert ok


DEF_DOWN = frozenset({"ai_down", "switch", "q_down"})
DEF_UP = frozenset({"ai_up", "switch", "q_up"})
EXTRUSION = frozenset({"q_down", "switch", "r_down"})


def _within(d, allowed):
    return check_derivation(d, allowed) and set(d.rules_used()) <= allowed


def test_criterion_3_derived_rules():
    rng = random.Random(3)
    t0 = time.monotonic()
    failures = []
    for i in range(200):
        r = random_structure(rng, max_atoms=6, max_binders=2)
        t = random_structure(rng, max_atoms=4, max_binders=1)
        ctx = _random_context(rng, random_structure(rng, max_atoms=4, max_binders=2))
        checks = {
            "gen_interaction_down": _within(gen_interaction_down(r), DOWN),
            "gen_interaction_up": _within(gen_interaction_up(r), UP),
            "def_down": _within(def_down(r, t, "z"), DEF_DOWN),
            "def_up": _within(def_up(r, t, "z"), DEF_UP),
            "mixp": _within(mixp(r, t), frozenset({"q_up"})),
            "pmix": _within(pmix(r, t), frozenset({"q_down"})),
            "context_extrusion": _within(context_extrusion(ctx, r, t), EXTRUSION),
        }
        failures += [(i, k) for k, v in checks.items() if not v]
    elapsed = time.monotonic() - t0
    ok = not failures and elapsed < 30
    record_verdict(3, ok, f"200 structures x 7 combinators, {len(failures)} failures, {elapsed:.1f}s")
    assert ok


def _traces():
    out = []
    for m in corpus_terms():
        tr = reduce(m)
        for i in range(len(tr.steps)):
            for j in range(i + 1, len(tr.steps) + 1):
                out.append(type(tr)(tr.terms()[i], tr.steps[i:j], True))
    return out


@pytest.mark.xfail(
    strict=True,
    reason="steps that push a substitution under an abstraction or into one side of an "
    "application need a binder to narrow its scope, which no rule derives",
)
def test_criterion_4_sbvr_completeness():
    t0 = time.monotonic()
    traces = _traces()
    good, gaps, wrong = 0, [], []
    for tr in traces:
        try:
            d = simulate_trace(tr)
        except SimulationGap as g:
            gaps.append(g.rule)
            continue
        used = d.rules_used()
        sub_vars = sum(1 for s, _ in tr.steps if s.rule == "sub_var")
        if (
            check_derivation(d, DOWN | {"q_up"})
            and equiv(d.conclusion, translate(tr.start))
            and equiv(d.premise, translate(tr.end))
            and used.get("q_up", 0) == sub_vars
        ):
            good += 1
        else:
            wrong.append(tr)
    elapsed = time.monotonic() - t0
    ok = not gaps and not wrong and len(corpus_terms()) >= 20 and elapsed < 60
    record_verdict(
        4, ok,
        f"{good}/{len(traces)} traces simulate; {len(gaps)} stop at a scope gap "
        f"({', '.join(sorted(set(gaps)))}); {len(wrong)} wrong; {elapsed:.1f}s",
    )
    assert ok


def test_criterion_5_bvr_completeness():
    pairs = {}
    for m in corpus_terms():
        terms = reduce(m).terms()
        for i, a in enumerate(terms):
            for b in terms[i + 1:]:
                goal = reduction_goal(a, b)
                if size(translate(a)) + size(translate(b)) <= 14:
                    pairs[canonicalize(goal)] = goal
    failures = []
    worst = 0.0
    for goal in pairs.values():
        out = prove(goal, SearchBudget(max_depth=16, wall_clock=60))
        worst = max(worst, out.stats.wall_time)
        if not (
            isinstance(out, Proved)
            and check_derivation(out.derivation, DOWN)
            and equiv(out.derivation.conclusion, goal)
            and equiv(out.derivation.premise, ONE)
        ):
            failures.append(goal)
    ok = bool(pairs) and not failures
    record_verdict(5, ok, f"{len(pairs)} pairs, {len(failures)} unproved, slowest {worst:.2f}s")
    assert ok


def test_criterion_6_prover_ground_truth():
    t0 = time.monotonic()
    family = prover_family()
    negative = P("[<a;b>;<~b;~a>]")
    has_negative = any(equiv(g, negative) for g in family)
    memo = {}
    disagreements, unknown = [], []
    for g in family:
        truth = exhaustive_oracle(g, memo=memo)
        out = prove(g, SearchBudget(max_depth=16, wall_clock=60))
        if not isinstance(out, (Proved, ExhaustedComplete)):
            unknown.append(g)
        elif isinstance(out, Proved) != truth:
            disagreements.append(g)
        elif isinstance(out, Proved) and not check_derivation(out.derivation, DOWN):
            disagreements.append(g)
    elapsed = time.monotonic() - t0
    ok = has_negative and not disagreements and not unknown and elapsed < 300
    record_verdict(
        6, ok,
        f"{len(family)} goals, {len(disagreements)} disagreements, {len(unknown)} budget hits, {elapsed:.0f}s",
    )
    assert ok


def test_criterion_8_translation_roundtrip():
    rng = random.Random(8)
    bad_roundtrip, bad_linear = 0, 0
    for _ in range(300):
        m = random_linear_term(rng, max_size=25)
        r = translate(m)
        back = readback(r)
        bad_roundtrip += back is None or not alpha_eq(back, m)
        bad_linear += not output_names_linear(r, "ch_o")
    ok = not bad_roundtrip and not bad_linear
    record_verdict(8, ok, f"300 terms, {bad_roundtrip} round-trip and {bad_linear} output-linearity failures")
    assert ok


def test_criterion_9_soundness_loop():
    rng = random.Random(9)
    bad, redexes = 0, 0
    for _ in range(200):
        m = random_linear_term(rng, max_size=20)
        found = [red for _, _, red in recognize_step(translate(m))]
        expected = [step(m, s) for s in find_redexes(m)]
        redexes += len(expected)
        matched = len(found) == len(expected) and all(
            any(alpha_eq(n, f) for f in found) for n in expected
        ) and all(any(alpha_eq(n, f) for n in expected) for f in found)
        bad += not matched
    ok = not bad
    record_verdict(9, ok, f"200 terms, {redexes} redexes, {bad} mismatches")
    assert ok


def test_criterion_10_imll_embedding():
    a, b = Var("a"), Var("b")
    samples = {
        "ax": Ax(a),
        "lolli over ax": LolliIntro(Ax(a), a),
        "tensor of axioms": TensorIntro(Ax(a), Ax(b)),
        "cut": Cut(Ax(a), TensorIntro(Ax(a), Ax(b)), a),
    }
    # (conclusion, premise) written out by hand
    expected = {
        "ax": ("<~a;a>", "<~a;a>"),
        "lolli over ax": ("[~a;a]", "<~a;a>"),
        "tensor of axioms": ("<(~a;~b);(a;b)>", "(<~a;a>;<~b;b>)"),
        "cut": ("<(~a;~b);(a;b)>", "(<~a;a>;<~a;a>;<~b;b>)"),
    }
    bad = []
    for name, p in samples.items():
        d = compile_proof(p)
        concl, prem = expected[name]
        s = p.sequent
        if not (
            check_derivation(d, SBVR)
            and boundary_ok(p, d)
            and equiv(embed_sequent(s.context, s.goal), P(concl))
            and equiv(d.conclusion, P(concl))
            and equiv(d.premise, P(prem))
        ):
            bad.append(name)
    ok = not bad
    record_verdict(10, ok, f"{len(samples)} proofs, failing: {', '.join(bad) or 'none'}")
    assert ok


def test_criterion_7_affinity():
    # sorted last: the watcher has by now seen every rule instance built in the run
    seen = watched_instances()
    ok = not AFFINITY_BREAKS and seen > 0
    record_verdict(7, ok, f"{seen} down/up instances watched, {len(AFFINITY_BREAKS)} size increases")
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s", "-p", "no:cacheprovider", "-W", "ignore::pytest.PytestAssertRewriteWarning"]))
