"""Compiling explicit-substitution reductions into derivations, and the
converse recognition of simulated steps on translated structures."""

from __future__ import annotations

import json
from typing import Iterable, List, Tuple

from .derived import def_down, mixp
from .lam import (
    Abs,
    App,
    ESub,
    LamTerm,
    LHole,
    ReductionTrace,
    Var,
    all_vars,
    barendregt,
    contract,
    free_vars,
    print_lam,
    redex_rule,
    replace_term,
    subterm_at,
)
from .rules import CompositionError, Derivation, compose, empty, normalized, plug_in_context, single
from .structure import (
    HOLE,
    ONE,
    Atom,
    Ren,
    Structure,
    all_names,
    canonicalize,
    copar,
    fresh_name,
    free_names,
    par,
    ren,
    subst_atom,
)
from .translate import (
    AbsImage,
    AppImage,
    ChannelSupply,
    Image,
    SubImage,
    VarImage,
    image_of,
    output_channel,
    readback,
    translate,
    translate_context,
)

SIM_RULES = ("s_intro", "s_abs", "s_app_l", "s_app_r", "s_var")
SIM_RULE_OF = {
    "beta_intro": "s_intro",
    "sub_var": "s_var",
    "sub_abs": "s_abs",
    "sub_app_left": "s_app_l",
    "sub_app_right": "s_app_r",
}


class SimulationGap(CompositionError):
    """Raised when a step needs a binder to shrink its scope, which no rule
    of the calculus can do under the implemented congruence."""

    def __init__(self, rule: str, partial: Derivation, target: Structure) -> None:
        CompositionError.__init__(self, partial.premise, target)
        self.args = (
            f"{rule}: the derivable part ends at a structure whose binder scopes are wider "
            f"than in the translated reduct; narrowing a scope is not derivable",
        )
        self.rule = rule
        self.partial = partial
        self.target = target


class NotAnImage(ValueError):
    pass


def _neg(name: str) -> Atom:
    return Atom(name, True)


def _link(c: str, o: str) -> Structure:
    return copar(Atom(c), _neg(o))


def _tr(m: LamTerm, o: str, avoid: Iterable[str]) -> Structure:
    return translate(m, o, ChannelSupply(avoid=frozenset(avoid) | {o}))


def _fresh_channel(avoid: Iterable[str]) -> str:
    return ChannelSupply(avoid=frozenset(avoid)).fresh()


def _forward_tail(q: str, p: str, o: str) -> Derivation:
    """Conclusion [(q;p̄);(p;ō)], premise (q;ō)."""
    concl = par(_link(q, p), _link(p, o))
    s1 = copar(par(_neg(p), _link(p, o)), Atom(q))
    s2 = copar(par(_neg(p), Atom(p)), _neg(o), Atom(q))
    d = compose(single("switch", concl, s1), single("switch", s1, s2))
    return compose(d, plug_in_context(single("ai_down", par(_neg(p), Atom(p)), ONE), copar(HOLE, _neg(o), Atom(q))))


def o_ren(m: LamTerm, o: str, p: str) -> Derivation:
    """Premise ⟦m⟧o, conclusion [⟦m⟧p; (p;ō)], in the down fragment."""
    m = barendregt(m)
    if p in free_vars(m) or p in all_vars(m):
        raise ValueError(f"{p} is not fresh for the term")
    avoid = {o, p}
    if isinstance(m, Var):
        return def_down(Atom(m.name), _neg(o), _neg(p))
    if isinstance(m, Abs):
        q = _fresh_channel(avoid)
        body = _tr(m.body, q, avoid | {q})
        concl = par(ren([m.var, q], par(body, _link(q, p))), _link(p, o))
        s1 = Ren(m.var, par(Ren(q, par(body, _link(q, p))), _link(p, o)))
        s2 = ren([m.var, q], par(body, _link(q, p), _link(p, o)))
        d = compose(single("r_down", concl, s1), plug_in_context(single("r_down", s1.body, s2.body), Ren(m.var, HOLE)))
        return compose(d, plug_in_context(_forward_tail(q, p, o), ren([m.var, q], par(body, HOLE))))
    if isinstance(m, App):
        q = _fresh_channel(avoid)
        r = _fresh_channel(avoid | {q})
        fun = _tr(m.fun, q, avoid | {q, r})
        arg = Ren(r, _tr(m.arg, r, avoid | {q, r}))
        concl = par(Ren(q, par(fun, arg, _link(q, p))), _link(p, o))
        s1 = Ren(q, par(fun, arg, _link(q, p), _link(p, o)))
        d = single("r_down", concl, s1)
        return compose(d, plug_in_context(_forward_tail(q, p, o), Ren(q, par(fun, arg, HOLE))))
    if isinstance(m, ESub):
        x = m.var
        body = _tr(m.body, p, avoid)
        arg = _tr(m.arg, x, avoid)
        concl = par(Ren(x, par(body, arg)), _link(p, o))
        s1 = Ren(x, par(body, arg, _link(p, o)))
        d = single("r_down", concl, s1)
        return compose(d, plug_in_context(o_ren(m.body, o, p), Ren(x, par(HOLE, arg))))
    raise TypeError(m)


def _s_var(m: ESub, o: str) -> Derivation:
    x = m.var
    arg = _tr(m.arg, x, {o})
    ctx = Ren(x, par(HOLE, arg))
    d = plug_in_context(mixp(Atom(x), _neg(o)), ctx)
    return compose(d, plug_in_context(o_ren(m.arg, o, x), Ren(x, HOLE)))


def _s_intro(m: App, o: str) -> Derivation:
    lam = m.fun
    assert isinstance(lam, Abs)
    x = lam.var
    p = _fresh_channel({o})
    p2 = _fresh_channel({o, p})
    avoid = {o, p, p2}
    body = _tr(lam.body, p2, avoid)
    arg = _tr(m.arg, x, avoid)
    inner = Ren(p2, par(body, _link(p2, p)))
    d = plug_in_context(
        single("r_down", par(Ren(x, inner), Ren(x, arg)), Ren(x, par(inner, arg))),
        Ren(p, par(HOLE, _link(p, o))),
    )
    ctx = Ren(p, par(Ren(x, par(Ren(p2, HOLE), arg)), _link(p, o)))
    d = compose(d, plug_in_context(o_ren(lam.body, p, p2), ctx))
    return compose(d, plug_in_context(o_ren(ESub(lam.body, x, m.arg), o, p), Ren(p, HOLE)))


def _s_abs(m: ESub, o: str) -> Derivation:
    lam = m.body
    assert isinstance(lam, Abs)
    x, y = m.var, lam.var
    p = _fresh_channel({o})
    body = _tr(lam.body, p, {o, p})
    arg = _tr(m.arg, x, {o, p})
    inner = Ren(p, par(body, _link(p, o)))
    concl = Ren(x, par(Ren(y, inner), arg))
    s1 = ren([x, y], par(inner, arg))
    s2 = ren([x, y, p], par(body, _link(p, o), arg))
    d = plug_in_context(single("r_down", concl.body, s1.body), Ren(x, HOLE))
    return compose(d, plug_in_context(single("r_down", par(inner, arg), s2.body.body), ren([x, y], HOLE)))


def _s_app(m: ESub, o: str, right: bool) -> Derivation:
    app = m.body
    assert isinstance(app, App)
    x = m.var
    p = _fresh_channel({o})
    q = _fresh_channel({o, p})
    avoid = {o, p, q}
    fun = _tr(app.fun, p, avoid)
    argq = _tr(app.arg, q, avoid)
    sub = _tr(m.arg, x, avoid)
    concl = Ren(x, par(Ren(p, par(fun, Ren(q, argq), _link(p, o))), sub))
    s1 = ren([x, p], par(fun, Ren(q, argq), _link(p, o), sub))
    d = plug_in_context(single("r_down", concl.body, s1.body), Ren(x, HOLE))
    if right:
        ctx = ren([x, p], par(fun, HOLE, _link(p, o)))
        d = compose(d, plug_in_context(single("r_down", par(Ren(q, argq), sub), Ren(q, par(argq, sub))), ctx))
    return d


def sim_step(rule: str, redex: LamTerm, o: str) -> Derivation:
    """Premise ⟦reduct⟧o, conclusion ⟦redex⟧o."""
    redex = barendregt(redex, {o})
    if SIM_RULE_OF.get(redex_rule(redex) or "") != rule:
        raise ValueError(f"{print_lam(redex)} is not a {rule} redex")
    reduct = contract(redex, redex_rule(redex))  # type: ignore[arg-type]
    if rule == "s_var":
        d = _s_var(redex, o)  # type: ignore[arg-type]
    elif rule == "s_intro":
        d = _s_intro(redex, o)  # type: ignore[arg-type]
    elif rule == "s_abs":
        d = _s_abs(redex, o)  # type: ignore[arg-type]
    else:
        d = _s_app(redex, o, rule == "s_app_r")  # type: ignore[arg-type]
    target = translate(reduct, o)
    try:
        return compose(d, empty(target))
    except CompositionError:
        raise SimulationGap(rule, d, target) from None


def simulate_trace(trace: ReductionTrace, o: str = "ch_o") -> Derivation:
    """Premise ⟦end⟧o, conclusion ⟦start⟧o."""
    d = empty(translate(trace.start, o))
    cur = trace.start
    for site, nxt in trace.steps:
        cur = barendregt(cur)
        redex = subterm_at(cur, site.path)
        ctx, hole_out = translate_context(replace_term(cur, site.path, LHole()), o)
        step_d = plug_in_context(sim_step(SIM_RULE_OF[site.rule], redex, hole_out), ctx)
        d = compose(d, step_d)
        cur = nxt
    return normalized(compose(d, empty(translate(trace.end, o))))


# ---------------------------------------------------------------- recognition

def _rename_if_in(name: str, forbidden: set, scope: Structure, others: Structure) -> Tuple[str, Structure]:
    if name not in forbidden:
        return name, scope
    new = fresh_name(name, forbidden | all_names(scope) | all_names(others))
    return new, subst_atom(scope, name, new)


def _sim_at(img: Image) -> List[Tuple[str, Structure]]:
    """s-rule instances whose conclusion is exactly ``img``."""
    out: List[Tuple[str, Structure]] = []
    o = img.out
    if isinstance(img, AppImage):
        f = image_of(img.fun, img.chan)
        if isinstance(f, AbsImage):
            x = f.var
            body = subst_atom(f.body, f.chan, o)
            arg = img.arg
            if x in free_names(arg) - {img.argchan}:
                x, body = _rename_if_in(x, set(free_names(arg)), body, arg)
            arg = subst_atom(arg, img.argchan, x)
            out.append(("s_intro", SubImage(x, body, arg, o).structure()))
    if isinstance(img, SubImage):
        x, arg = img.var, img.arg
        b = image_of(img.body, o)
        if isinstance(b, VarImage) and b.var == x:
            out.append(("s_var", subst_atom(arg, x, o)))
        elif isinstance(b, AbsImage):
            fa = set(free_names(arg))
            y, bb = _rename_if_in(b.var, fa, b.body, arg)
            c, bb = _rename_if_in(b.chan, fa | {y}, bb, arg)
            out.append(("s_abs", AbsImage(y, c, SubImage(x, bb, arg, c).structure(), o).structure()))
        elif isinstance(b, AppImage):
            fa = set(free_names(arg))
            c, fun = _rename_if_in(b.chan, fa, b.fun, arg)
            if x in free_names(fun):
                out.append(("s_app_l", AppImage(c, SubImage(x, fun, arg, c).structure(), b.argchan, b.arg, o).structure()))
            else:
                q, a = _rename_if_in(b.argchan, fa | {c}, b.arg, arg)
                out.append(("s_app_r", AppImage(c, fun, q, SubImage(x, a, arg, q).structure(), o).structure()))
    return out


def _children(img: Image):
    """(child structure, child output, rebuild) for each immediate subterm."""
    if isinstance(img, AbsImage):
        yield img.body, img.chan, lambda s: AbsImage(img.var, img.chan, s, img.out)
    elif isinstance(img, AppImage):
        yield img.fun, img.chan, lambda s: AppImage(img.chan, s, img.argchan, img.arg, img.out)
        yield img.arg, img.argchan, lambda s: AppImage(img.chan, img.fun, img.argchan, s, img.out)
    elif isinstance(img, SubImage):
        yield img.body, img.out, lambda s: SubImage(img.var, s, img.arg, img.out)
        yield img.arg, img.var, lambda s: SubImage(img.var, img.body, s, img.out)


def _recognize(img: Image) -> List[Tuple[str, Structure]]:
    found = _sim_at(img)
    for child, out, rebuild in _children(img):
        sub = image_of(child, out)
        assert sub is not None
        for rule, prem in _recognize(sub):
            found.append((rule, rebuild(prem).structure()))
    return found


def recognize_step(r: Structure) -> List[Tuple[str, Structure, LamTerm]]:
    """Every simulated step whose conclusion is ``r``, with its premise and
    the term that premise reads back to."""
    o = output_channel(r)
    img = image_of(canonicalize(r), o) if o is not None else None
    if img is None:
        raise NotAnImage("structure is not the translation of a linear term")
    out = []
    for rule, prem in _recognize(img):
        reduct = readback(prem)
        if reduct is None:
            raise NotAnImage(f"premise of {rule} does not read back")
        out.append((rule, prem, reduct))
    return out


def sidecar(term: LamTerm, reduct: LamTerm, o: str) -> str:
    doc = {"term": print_lam(term), "reduct": print_lam(reduct), "output": o}
    return json.dumps(doc, ensure_ascii=False, indent=1) + "\n"
