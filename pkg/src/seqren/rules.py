"""The seven rules of SBVr as deep rewrites, derivations and the checker."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from .structure import (
    ONE,
    Atom,
    CoPar,
    Hole,
    Par,
    Path,
    Ren,
    Seq,
    Structure,
    all_names,
    canonical_pair,
    canonicalize,
    ckey,
    copar,
    equiv,
    fresh_name,
    free_names,
    normalize,
    par,
    parse_structure,
    plug,
    positions,
    print_structure,
    replace_at,
    seq,
    size,
    subst_atom,
)

RULES = ("ai_down", "ai_up", "switch", "q_down", "q_up", "r_down", "r_up")
DOWN = frozenset({"ai_down", "switch", "q_down", "r_down"})
UP = frozenset({"ai_up", "switch", "q_up", "r_up"})
SBVR = frozenset(RULES)
DUAL_RULE = {
    "ai_down": "ai_up", "ai_up": "ai_down",
    "q_down": "q_up", "q_up": "q_down",
    "r_down": "r_up", "r_up": "r_down",
    "switch": "switch",
}


@dataclass(frozen=True)
class RuleInstance:
    rule: str
    conclusion: Structure
    premise: Structure
    hint: Optional[Path] = None


@dataclass(frozen=True)
class Derivation:
    """Bottom-up chain: ``steps[0]`` rewrites the conclusion."""

    conclusion: Structure
    steps: Tuple[RuleInstance, ...] = ()

    @property
    def premise(self) -> Structure:
        return self.steps[-1].premise if self.steps else self.conclusion

    def is_proof(self) -> bool:
        return equiv(self.premise, ONE)

    def rules_used(self) -> Dict[str, int]:
        out: Dict[str, int] = {}
        for s in self.steps:
            out[s.rule] = out.get(s.rule, 0) + 1
        return out

    def __len__(self) -> int:
        return len(self.steps)


class CompositionError(ValueError):
    def __init__(self, lower: Structure, upper: Structure) -> None:
        super().__init__(
            "derivations do not meet: lower premise "
            f"{print_structure(lower)} is not equivalent to upper conclusion {print_structure(upper)}"
        )
        self.lower = lower
        self.upper = upper


# ---------------------------------------------------------------- helpers

def _subsets(n: int, min_size: int = 1) -> Iterator[Tuple[int, ...]]:
    for k in range(min_size, n + 1):
        yield from itertools.combinations(range(n), k)


def _disjoint_pairs(n: int, ordered: bool) -> Iterator[Tuple[Tuple[int, ...], Tuple[int, ...]]]:
    """Pairs of disjoint nonempty index sets."""
    for assign in itertools.product((0, 1, 2), repeat=n):
        g1 = tuple(i for i, a in enumerate(assign) if a == 1)
        g2 = tuple(i for i, a in enumerate(assign) if a == 2)
        if not g1 or not g2:
            continue
        if not ordered and g1[0] > g2[0]:
            continue
        yield g1, g2


def _pick(kids: Sequence[Structure], idx: Iterable[int]) -> List[Structure]:
    return [kids[i] for i in idx]


def _rest(kids: Sequence[Structure], *groups: Iterable[int]) -> List[Structure]:
    used = set().union(*map(set, groups))
    return [k for i, k in enumerate(kids) if i not in used]


def _seq_views(kids: Sequence[Structure], g: Tuple[int, ...]) -> List[Tuple[Structure, Structure]]:
    """Ways to read the par-group ``g`` as a seq ⟨A;B⟩."""
    whole = par(*_pick(kids, g))
    views = [(whole, ONE), (ONE, whole)]
    if len(g) == 1 and isinstance(kids[g[0]], Seq):
        s = kids[g[0]].children  # type: ignore[attr-defined]
        for i in range(1, len(s)):
            views.append((seq(*s[:i]), seq(*s[i:])))
    return views


def _copar_splits(x: Structure) -> List[Tuple[Structure, Structure]]:
    """Ways to read ``x`` as a copar (R;T), units included."""
    views = [(x, ONE), (ONE, x)]
    if isinstance(x, CoPar):
        d = x.children
        for k in range(1, len(d)):
            for g in itertools.combinations(range(len(d)), k):
                views.append((copar(*_pick(d, g)), copar(*_rest(d, g))))
    return views


def _ren_views(x: Structure) -> List[Tuple[str, Structure]]:
    """Ways to expose one binder of a renaming block: (name, body-without-it)."""
    names = []
    body = x
    while isinstance(body, Ren):
        names.append(body.name)
        body = body.body
    out = []
    for i, n in enumerate(names):
        others = names[:i] + names[i + 1:]
        b = body
        for m in reversed(others):
            b = Ren(m, b)
        out.append((n, b))
    return out


# ---------------------------------------------------------------- per-node rule shapes

def _ai_down_at(node: Structure) -> Iterator[Structure]:
    if not isinstance(node, Par):
        return
    kids = node.children
    for i, j in itertools.combinations(range(len(kids)), 2):
        a, b = kids[i], kids[j]
        if isinstance(a, Atom) and isinstance(b, Atom) and a.name == b.name and a.neg != b.neg:
            yield par(*_rest(kids, (i, j)))


def _switch_at(node: Structure) -> Iterator[Structure]:
    if not isinstance(node, Par):
        return
    kids = node.children
    n = len(kids)
    # the copar is one child, split into R and T
    for i, k in enumerate(kids):
        if not isinstance(k, CoPar):
            continue
        others = [j for j in range(n) if j != i]
        d = k.children
        for tk in range(1, len(d) + 1):
            for tg in itertools.combinations(range(len(d)), tk):
                r = copar(*_rest(d, tg))
                t = copar(*_pick(d, tg))
                for ug in _subsets(len(others)):
                    u_idx = [others[j] for j in ug]
                    rest = _rest(kids, [i], u_idx)
                    yield par(copar(par(r, *_pick(kids, u_idx)), t), *rest)
    # the copar is (1;T) with T a group of par children
    for g, u in _disjoint_pairs(n, ordered=True):
        rest = _rest(kids, g, u)
        yield par(copar(par(*_pick(kids, u)), par(*_pick(kids, g))), *rest)


def _q_down_at(node: Structure) -> Iterator[Structure]:
    if not isinstance(node, Par):
        return
    kids = node.children
    for g1, g2 in _disjoint_pairs(len(kids), ordered=False):
        rest = _rest(kids, g1, g2)
        for a, b in _seq_views(kids, g1):
            for c, d in _seq_views(kids, g2):
                yield par(seq(par(a, c), par(b, d)), *rest)


def _q_up_at(node: Structure) -> Iterator[Structure]:
    if not isinstance(node, Seq):
        return
    s = node.children
    n = len(s)
    for i in range(n):
        for m in range(i + 1, n):
            for j in range(m + 1, n + 1):
                p1 = seq(*s[i:m])
                p2 = seq(*s[m:j])
                for r, u in _copar_splits(p1):
                    for t, v in _copar_splits(p2):
                        mid = copar(seq(r, t), seq(u, v))
                        yield seq(*s[:i], mid, *s[j:])


def _r_down_at(node: Structure, avoid: set) -> Iterator[Structure]:
    if not isinstance(node, Par):
        return
    kids = node.children
    c = fresh_name("r", avoid)
    for g1, g2 in _disjoint_pairs(len(kids), ordered=False):
        rest = _rest(kids, g1, g2)
        v1: List[Tuple[Optional[str], Structure]] = [(None, par(*_pick(kids, g1)))]
        v2: List[Tuple[Optional[str], Structure]] = [(None, par(*_pick(kids, g2)))]
        if len(g1) == 1 and isinstance(kids[g1[0]], Ren):
            v1 += _ren_views(kids[g1[0]])
        if len(g2) == 1 and isinstance(kids[g2[0]], Ren):
            v2 += _ren_views(kids[g2[0]])
        for a1, b1 in v1:
            for a2, b2 in v2:
                if a1 is None and a2 is None:
                    continue
                x1 = subst_atom(b1, a1, c) if a1 else b1
                x2 = subst_atom(b2, a2, c) if a2 else b2
                yield par(Ren(c, par(x1, x2)), *rest)


def _r_up_at(node: Structure) -> Iterator[Structure]:
    if not isinstance(node, Ren):
        return
    for a, body in _ren_views(node):
        names = []
        inner = body
        while isinstance(inner, Ren):
            names.append(inner.name)
            inner = inner.body
        if not isinstance(inner, CoPar):
            continue
        d = inner.children
        for k in range(1, len(d)):
            for g in itertools.combinations(range(len(d)), k):
                if 0 not in g:
                    continue
                out = copar(Ren(a, copar(*_pick(d, g))), Ren(a, copar(*_rest(d, g))))
                for m in reversed(names):
                    out = Ren(m, out)
                yield out


def _bound_at(r: Structure, path: Path) -> List[str]:
    out = []
    for i in path:
        if isinstance(r, Ren):
            out.append(r.name)
            r = r.body
        else:
            r = r.children[i]  # type: ignore[attr-defined]
    return out


def _ai_up_at(node: Structure, names: Sequence[str]) -> Iterator[Structure]:
    pairs = [CoPar([Atom(n), Atom(n, True)]) for n in names]
    for p in pairs:
        yield par(node, p)
        yield copar(node, p)
        yield seq(p, node)
        yield seq(node, p)
        if isinstance(node, Seq):
            s = node.children
            for i in range(1, len(s)):
                yield seq(*s[:i], p, *s[i:])


def iter_premises(
    rule: str,
    conclusion: Structure,
    atoms: Optional[Iterable[str]] = None,
) -> Iterator[Tuple[Path, Structure]]:
    """Raw premises of ``rule`` on an already canonical ``conclusion``, with
    the position of the rewritten node.  Duplicates are not removed."""
    if rule not in RULES:
        raise ValueError(f"unknown rule {rule!r}")
    c = conclusion
    avoid = all_names(c)
    alphabet: List[str] = []
    if rule == "ai_up":
        alphabet = sorted(set(atoms) if atoms is not None else set(free_names(c)) | {fresh_name("a", avoid)})
    for path, node in positions(c):
        if rule == "ai_down":
            gen = _ai_down_at(node)
        elif rule == "switch":
            gen = _switch_at(node)
        elif rule == "q_down":
            gen = _q_down_at(node)
        elif rule == "q_up":
            gen = _q_up_at(node)
        elif rule == "r_down":
            gen = _r_down_at(node, avoid)
        elif rule == "r_up":
            gen = _r_up_at(node)
        else:
            gen = _ai_up_at(node, alphabet + _bound_at(c, path))
        for new in gen:
            yield path, replace_at(c, path, new)


def enumerate_applications(
    rule: str,
    conclusion: Structure,
    atoms: Optional[Iterable[str]] = None,
) -> List[RuleInstance]:
    """Every premise (distinct up to the congruence, excluding the trivial
    unit instance) reachable by one application of ``rule`` at any depth."""
    c = canonicalize(conclusion)
    seen = {ckey(c)}
    out: List[RuleInstance] = []
    for path, prem in iter_premises(rule, c, atoms):
        k, canon = canonical_pair(prem)
        if k in seen:
            continue
        seen.add(k)
        out.append(RuleInstance(rule, c, canon, path))
    out.sort(key=lambda inst: print_structure(inst.premise))
    return out


def _ai_up_reverse(conclusion: Structure, premise: Structure) -> bool:
    """Exact check for ai_up: delete a dual pair sitting in one copar."""
    p = canonicalize(premise)
    target = ckey(conclusion)
    for path, node in positions(p):
        if not isinstance(node, CoPar):
            continue
        kids = node.children
        for i, j in itertools.combinations(range(len(kids)), 2):
            a, b = kids[i], kids[j]
            if isinstance(a, Atom) and isinstance(b, Atom) and a.name == b.name and a.neg != b.neg:
                if ckey(replace_at(p, path, copar(*_rest(kids, (i, j))))) == target:
                    return True
    return False


_IDENTITY_OK = frozenset({"switch", "q_down", "q_up", "r_down", "r_up"})


def check_step(conclusion: Structure, inst: RuleInstance) -> bool:
    if inst.rule not in RULES:
        return False
    if not equiv(conclusion, inst.conclusion):
        return False
    if inst.rule in _IDENTITY_OK and equiv(conclusion, inst.premise):
        return True
    if inst.rule == "ai_up":
        return _ai_up_reverse(conclusion, inst.premise)
    target = ckey(inst.premise)
    return any(ckey(prem) == target for _, prem in iter_premises(inst.rule, canonicalize(conclusion)))


def explain_derivation(d: Derivation, allowed: Iterable[str] = SBVR) -> Optional[str]:
    """None when ``d`` checks, else a description of the first problem."""
    allowed = frozenset(allowed)
    cur = d.conclusion
    for n, s in enumerate(d.steps):
        if s.rule not in allowed:
            return f"step {n}: rule {s.rule} is not allowed"
        if not equiv(cur, s.conclusion):
            return (f"step {n}: conclusion {print_structure(s.conclusion)} does not match "
                    f"previous premise {print_structure(cur)}")
        if not check_step(cur, s):
            return (f"step {n}: {s.rule} does not rewrite {print_structure(cur)} "
                    f"into {print_structure(s.premise)}")
        cur = s.premise
    return None


def check_derivation(d: Derivation, allowed: Iterable[str] = SBVR) -> bool:
    return explain_derivation(d, allowed) is None


# ---------------------------------------------------------------- combinators

def empty(r: Structure) -> Derivation:
    return Derivation(r, ())


def single(rule: str, conclusion: Structure, premise: Structure) -> Derivation:
    if equiv(conclusion, premise) and rule in _IDENTITY_OK:
        return Derivation(conclusion, ())
    return Derivation(conclusion, (RuleInstance(rule, conclusion, premise),))


def compose(lower: Derivation, upper: Derivation) -> Derivation:
    if not equiv(lower.premise, upper.conclusion):
        raise CompositionError(lower.premise, upper.conclusion)
    return Derivation(lower.conclusion, lower.steps + upper.steps)


def chain(*ds: Derivation) -> Derivation:
    out = ds[0]
    for d in ds[1:]:
        out = compose(out, d)
    return out


def plug_in_context(d: Derivation, ctx: Structure) -> Derivation:
    steps = tuple(
        RuleInstance(s.rule, plug(ctx, s.conclusion), plug(ctx, s.premise)) for s in d.steps
    )
    return Derivation(plug(ctx, d.conclusion), steps)


def normalized(d: Derivation) -> Derivation:
    """The same chain with every structure in normal form."""
    steps = tuple(RuleInstance(s.rule, normalize(s.conclusion), normalize(s.premise)) for s in d.steps)
    return Derivation(normalize(d.conclusion), steps)


def dual(d: Derivation) -> Derivation:
    """Negate every structure, flip the chain and swap rule directions."""
    from .structure import negate

    steps = tuple(
        RuleInstance(DUAL_RULE[s.rule], negate(s.premise), negate(s.conclusion))
        for s in reversed(d.steps)
    )
    return Derivation(negate(d.premise), steps)


def affinity_violations(d: Derivation) -> List[int]:
    """Indices of down-fragment steps whose premise is bigger than the conclusion."""
    return [
        i for i, s in enumerate(d.steps)
        if s.rule in DOWN and size(s.premise) > size(s.conclusion)
    ]


# ---------------------------------------------------------------- context extrusion

def _hole_path(ctx: Structure) -> Path:
    for path, node in positions(ctx):
        if isinstance(node, Hole):
            return path
    raise ValueError("context has no hole")


def context_extrusion(ctx: Structure, r: Structure, t: Structure) -> Derivation:
    """Derivation from ``S{[R;T]}`` (premise) to ``[S{R};T]`` (conclusion)
    over {q_down, switch, r_down}.  Binders of S that would capture a free
    name of T are renamed first."""
    if isinstance(ctx, Hole):
        return empty(par(r, t))
    if isinstance(ctx, Ren):
        a, inner = ctx.name, ctx.body
        if a in free_names(t):
            b = fresh_name(a, all_names(ctx) | all_names(r) | all_names(t))
            inner = subst_atom(inner, a, b)
            r = subst_atom(r, a, b)
            a = b
        concl = par(Ren(a, plug(inner, r)), t)
        mid = Ren(a, par(plug(inner, r), t))
        first = single("r_down", concl, mid)
        rest = plug_in_context(context_extrusion(inner, r, t), Ren(a, Hole()))
        return compose(first, rest)
    kids = ctx.children  # type: ignore[attr-defined]
    hi = next(i for i, k in enumerate(kids) if _has_hole(k))
    sub = kids[hi]
    before, after = list(kids[:hi]), list(kids[hi + 1:])
    if isinstance(ctx, Par):
        others = before + after
        inner = context_extrusion(sub, r, t)
        return plug_in_context(inner, par(Hole(), *others))
    sr = plug(sub, r)
    if isinstance(ctx, CoPar):
        u = copar(*(before + after))
        concl = par(copar(sr, u), t)
        prem = copar(par(sr, t), u)
        first = single("switch", concl, prem)
        rest = plug_in_context(context_extrusion(sub, r, t), copar(Hole(), u))
        return compose(first, rest)
    if isinstance(ctx, Seq):
        b, a = seq(*before), seq(*after)
        concl = par(seq(b, sr, a), t)
        mid = seq(b, par(seq(sr, a), t))
        prem = seq(b, par(sr, t), a)
        first = compose(single("q_down", concl, mid), single("q_down", mid, prem))
        rest = plug_in_context(context_extrusion(sub, r, t), seq(b, Hole(), a))
        return compose(first, rest)
    raise TypeError(ctx)


def _has_hole(r: Structure) -> bool:
    from .structure import has_hole

    return has_hole(r)


# ---------------------------------------------------------------- certificates

def to_certificate(d: Derivation) -> str:
    doc = {
        "conclusion": print_structure(normalize(d.conclusion)),
        "steps": [{"rule": s.rule, "premise": print_structure(normalize(s.premise))} for s in d.steps],
    }
    return json.dumps(doc, ensure_ascii=False, indent=1) + "\n"


def from_certificate(text: str) -> Derivation:
    doc = json.loads(text)
    cur = parse_structure(doc["conclusion"])
    start = cur
    steps = []
    for s in doc["steps"]:
        prem = parse_structure(s["premise"])
        steps.append(RuleInstance(s["rule"], cur, prem))
        cur = prem
    return Derivation(start, tuple(steps))
