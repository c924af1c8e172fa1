import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from seqren.corpus import random_structure
from seqren.derived import def_down
from seqren.rules import (
    DOWN,
    RULES,
    SBVR,
    UP,
    CompositionError,
    Derivation,
    RuleInstance,
    check_derivation,
    check_step,
    compose,
    context_extrusion,
    dual,
    empty,
    enumerate_applications,
    explain_derivation,
    from_certificate,
    plug_in_context,
    single,
    to_certificate,
)
from seqren.structure import (
    HOLE,
    ONE,
    Atom,
    Ren,
    canonicalize,
    equiv,
    free_names,
    par,
    parse_structure,
    plug,
    seq,
    size,
)

from conftest import affinity_unwatched
from strategies import contexts, structures

P = parse_structure


def test_fragments():
    assert DOWN == {"ai_down", "switch", "q_down", "r_down"}
    assert UP == {"ai_up", "switch", "q_up", "r_up"}
    assert SBVR == set(RULES)


def test_ai_down_on_whole_redex():
    insts = enumerate_applications("ai_down", P("[a;~a]"))
    assert len(insts) == 1 and insts[0].premise == ONE


def test_switch_on_copar_in_par():
    got = {canonicalize(i.premise) for i in enumerate_applications("switch", P("[(a;b);c]"))}
    want = {canonicalize(P(t)) for t in ("([a;c];b)", "([b;c];a)", "(a;b;c)")}
    assert got == want


def test_q_down_and_q_up_shapes():
    assert canonicalize(P("<[a;c];[b;d]>")) in {
        canonicalize(i.premise) for i in enumerate_applications("q_down", P("[<a;b>;<c;d>]"))
    }
    assert canonicalize(P("(<a;c>;<b;d>)")) in {
        canonicalize(i.premise) for i in enumerate_applications("q_up", P("<(a;b);(c;d)>"))
    }


def test_r_down_and_r_up_shapes():
    assert any(
        equiv(i.premise, P("{a}[a;~a;b]")) for i in enumerate_applications("r_down", P("[{a}a;{a}[~a;b]]"))
    )
    assert any(
        equiv(i.premise, P("({a}a;{a}~a)")) for i in enumerate_applications("r_up", P("{a}(a;~a)"))
    )


def test_vacuous_r_down_is_an_identity_step():
    concl, prem = P("[{a}b;{a}~b]"), P("{a}[b;~b]")
    assert equiv(concl, prem)
    assert check_step(concl, RuleInstance("r_down", concl, prem))
    assert single("r_down", concl, prem).steps == ()


def test_check_step_examples():
    c = P("[a;~a]")
    assert check_step(c, RuleInstance("ai_down", c, ONE))
    assert not check_step(c, RuleInstance("ai_down", c, P("a")))
    whole = P("[{a}<a;b>;{a}[~a;~b]]")
    assert check_step(whole, RuleInstance("r_down", whole, P("{a}[<a;b>;~a;~b]")))


def test_check_step_rejects_wrong_conclusion_and_unknown_rule():
    c = P("[a;~a]")
    assert not check_step(P("[b;~b]"), RuleInstance("ai_down", c, ONE))
    assert not check_step(c, RuleInstance("cut", c, ONE))


def test_ai_up_reverse_check():
    assert check_step(ONE, RuleInstance("ai_up", ONE, P("(a;~a)")))
    assert check_step(P("b"), RuleInstance("ai_up", P("b"), P("(b;c;~c)")))
    assert not check_step(ONE, RuleInstance("ai_up", ONE, P("[a;~a]")))


def test_plug_in_context_example():
    proof = single("ai_down", P("[a;~a]"), ONE)
    d = plug_in_context(proof, seq(HOLE, Atom("b")))
    assert equiv(d.conclusion, P("<[a;~a];b>"))
    assert equiv(d.premise, P("b"))
    assert check_derivation(d, {"ai_down"})


def test_compose_examples():
    e = compose(empty(ONE), empty(ONE))
    assert e.steps == () and e.conclusion == ONE
    d = def_down(P("x"), P("~o"), "p")
    first = Derivation(d.conclusion, d.steps[:2])
    rest = Derivation(first.premise, d.steps[2:])
    assert check_derivation(compose(first, rest), {"ai_down", "switch", "q_down"})


def test_compose_mismatch_raises():
    with pytest.raises(CompositionError):
        compose(empty(P("a")), empty(P("b")))


def test_explain_points_at_failing_step():
    d = Derivation(P("[a;~a]"), (RuleInstance("ai_down", P("[a;~a]"), P("a")),))
    with affinity_unwatched():
        msg = explain_derivation(d, DOWN)
    assert msg.startswith("step 0")
    assert explain_derivation(single("ai_down", P("[a;~a]"), ONE), {"switch"}) == "step 0: rule ai_down is not allowed"


def test_context_extrusion_examples():
    r, t, u = P("a"), P("b"), P("c")
    assert context_extrusion(HOLE, r, t).steps == ()
    d = context_extrusion(seq(HOLE, u), r, t)
    assert [s.rule for s in d.steps] == ["q_down"]
    assert equiv(d.conclusion, P("[<a;c>;b]")) and equiv(d.premise, P("<[a;b];c>"))
    d = context_extrusion(Ren("a", HOLE), P("[a;x]"), P("~a"))
    assert d.steps[0].rule == "r_down"
    assert equiv(d.conclusion, P("[{a}[a;x];~a]"))
    assert check_derivation(d, {"q_down", "switch", "r_down"})


# ---------------------------------------------------------------- properties

@settings(max_examples=40)
@given(structures, st.sampled_from(sorted(set(RULES) - {"ai_up"})))
def test_enumerated_instances_check(r, rule):
    for inst in enumerate_applications(rule, r)[:25]:
        assert check_step(r, inst)
        if rule in DOWN:
            assert free_names(inst.premise) <= free_names(inst.conclusion)
            assert size(inst.premise) <= size(inst.conclusion)


@settings(max_examples=30)
@given(contexts(), structures, structures)
def test_context_extrusion_checks(ctx, r, t):
    d = context_extrusion(ctx, r, t)
    assert check_derivation(d, {"q_down", "switch", "r_down"})
    assert equiv(d.conclusion, par(plug(ctx, r), t))
    if not set(_hole_binders(ctx)) & free_names(t):
        assert equiv(d.premise, plug(ctx, par(r, t)))


def _hole_binders(r):
    """Names bound above the hole, or None when ``r`` has no hole."""
    if r == HOLE:
        return []
    if isinstance(r, Ren):
        below = _hole_binders(r.body)
        return None if below is None else [r.name] + below
    for c in getattr(r, "children", ()):
        below = _hole_binders(c)
        if below is not None:
            return below
    return None


def test_certificate_roundtrip_and_dual():
    rng = random.Random(3)
    from seqren.derived import gen_interaction_down

    for _ in range(20):
        r = random_structure(rng, max_atoms=5, max_binders=2)
        d = gen_interaction_down(r)
        text = to_certificate(d)
        back = from_certificate(text)
        assert check_derivation(back, DOWN)
        assert to_certificate(back) == text
        assert text.endswith("\n") and "\r" not in text
        assert check_derivation(dual(d), UP)
        assert equiv(dual(d).conclusion, ONE) or equiv(dual(d).premise, ONE)
