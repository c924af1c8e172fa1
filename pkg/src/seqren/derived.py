"""Combinators emitting fully expanded derivations for derivable rules."""

from __future__ import annotations

from typing import Union

from .rules import Derivation, compose, dual, empty, plug_in_context, single
from .structure import (
    HOLE,
    ONE,
    Atom,
    Par,
    Ren,
    Seq,
    Structure,
    Unit,
    copar,
    free_names,
    negate,
    normalize,
    par,
    seq,
)


def _split(r: Structure):
    kids = r.children  # type: ignore[attr-defined]
    return kids[0], type(r)(kids[1:]) if len(kids) > 2 else kids[1]


def gen_interaction_down(r: Structure) -> Derivation:
    """Premise 1, conclusion [r; ¬r], over {ai_down, switch, q_down, r_down}."""
    r = normalize(r)
    nr = negate(r)
    concl = par(r, nr)
    if isinstance(r, Unit):
        return empty(concl)
    if isinstance(r, Atom):
        return single("ai_down", concl, ONE)
    if isinstance(r, Ren):
        first = single("r_down", concl, Ren(r.name, par(r.body, negate(r.body))))
        return compose(first, plug_in_context(gen_interaction_down(r.body), Ren(r.name, HOLE)))
    head, tail = _split(r)
    nh, nt = negate(head), negate(tail)
    if isinstance(r, Seq):
        prem = seq(par(head, nh), par(tail, nt))
        first = single("q_down", concl, prem)
        d1 = plug_in_context(gen_interaction_down(head), seq(HOLE, par(tail, nt)))
        d2 = gen_interaction_down(tail)
        return compose(compose(first, d1), d2)
    if isinstance(r, Par):
        # [h; t; (¬h; ¬t)] -> ([h;¬h]; ¬t) beside t -> ([t;¬t]; [h;¬h])
        mid = par(copar(par(nh, head), nt), tail)
    else:
        # [(h; t); ¬h; ¬t] -> ([h;¬h]; t) beside ¬t -> ([t;¬t]; [h;¬h])
        mid = par(copar(par(head, nh), tail), nt)
    prem = copar(par(tail, nt), par(head, nh))
    steps = compose(single("switch", concl, mid), single("switch", mid, prem))
    d1 = plug_in_context(gen_interaction_down(head), copar(par(tail, nt), HOLE))
    d2 = gen_interaction_down(tail)
    return compose(compose(steps, d1), d2)


def gen_interaction_up(r: Structure) -> Derivation:
    """Conclusion 1, premise (r; ¬r), over {ai_up, switch, q_up, r_up}."""
    return dual(gen_interaction_down(negate(r)))


AtomLike = Union[str, Atom]


def _as_atom(a: AtomLike) -> Atom:
    return a if isinstance(a, Atom) else Atom(a)


def def_down(r: Structure, t: Structure, a: AtomLike) -> Derivation:
    """Premise ⟨r;t⟩, conclusion [⟨r;a⟩; (ā;t)].  ``a`` may be a negative atom."""
    at = _as_atom(a)
    if at.name in free_names(r) | free_names(t):
        raise ValueError(f"placeholder {at.name} must not occur in the rewritten structures")
    na = negate(at)
    concl = par(seq(r, at), copar(na, t))
    s1 = seq(r, par(at, copar(na, t)))
    s2 = seq(r, copar(par(at, na), t))
    d = compose(single("q_down", concl, s1), single("switch", s1, s2))
    return compose(d, plug_in_context(single("ai_down", par(at, na), ONE), seq(r, copar(HOLE, t))))


def def_up(r: Structure, t: Structure, a: AtomLike) -> Derivation:
    """Conclusion ⟨r;t⟩, premise (⟨r;ā⟩; [a;t]), over {ai_up, switch, q_up}."""
    return dual(def_down(negate(r), negate(t), _as_atom(a)))


def mixp(r: Structure, t: Structure) -> Derivation:
    """Premise (r;t), conclusion ⟨r;t⟩, one q_up."""
    return single("q_up", seq(r, t), copar(r, t))


def pmix(r: Structure, t: Structure) -> Derivation:
    """Premise ⟨r;t⟩, conclusion [r;t], one q_down."""
    return single("q_down", par(r, t), seq(r, t))
