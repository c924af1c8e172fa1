"""The map from linear λ-terms to structures and its partial inverse."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import FrozenSet, List, Optional, Tuple

from .lam import (
    Abs,
    App,
    ESub,
    LamTerm,
    LHole,
    Var,
    all_vars,
    barendregt,
    check_linear,
    free_vars,
    linearity_diagnostic,
    tidy_names,
)
from .structure import (
    CHANNEL_PREFIX,
    HOLE,
    Atom,
    CoPar,
    Par,
    Ren,
    Seq,
    Structure,
    canonicalize,
    copar,
    equiv,
    free_names,
    par,
    ren,
    seq,
)

DEFAULT_OUTPUT = "ch_o"


@dataclass
class ChannelSupply:
    """Deterministic source of fresh channel names ``ch_p0, ch_p1, ...``."""

    counter: int = 0
    avoid: FrozenSet[str] = field(default_factory=frozenset)

    def fresh(self) -> str:
        while True:
            name = f"{CHANNEL_PREFIX}p{self.counter}"
            self.counter += 1
            if name not in self.avoid:
                return name


class TranslationError(ValueError):
    pass


def _fwd(x: str, o: str) -> Structure:
    return seq(Atom(x), Atom(o, True))


def _tr(m: LamTerm, o: str, sup: ChannelSupply, holes: List[str]) -> Structure:
    if isinstance(m, Var):
        return _fwd(m.name, o)
    if isinstance(m, LHole):
        holes.append(o)
        return HOLE
    if isinstance(m, Abs):
        p = sup.fresh()
        body = _tr(m.body, p, sup, holes)
        return ren([m.var, p], par(body, copar(Atom(p), Atom(o, True))))
    if isinstance(m, App):
        p, q = sup.fresh(), sup.fresh()
        f = _tr(m.fun, p, sup, holes)
        a = _tr(m.arg, q, sup, holes)
        return Ren(p, par(f, Ren(q, a), copar(Atom(p), Atom(o, True))))
    if isinstance(m, ESub):
        b = _tr(m.body, o, sup, holes)
        a = _tr(m.arg, m.var, sup, holes)
        return Ren(m.var, par(b, a))
    raise TypeError(m)


def _prepare(m: LamTerm, o: str) -> LamTerm:
    diag = linearity_diagnostic(m)
    if diag:
        raise TranslationError(f"term is not linear: {diag}")
    bad = sorted(n for n in all_vars(m) if n.startswith(CHANNEL_PREFIX))
    if bad:
        raise TranslationError(f"variable names may not start with {CHANNEL_PREFIX!r}: {bad}")
    if o in free_vars(m):
        raise TranslationError(f"output channel {o} occurs free in the term")
    return barendregt(m)


def translate(m: LamTerm, o: str = DEFAULT_OUTPUT, supply: Optional[ChannelSupply] = None) -> Structure:
    if supply is None:
        supply = ChannelSupply(avoid=frozenset({o}))
    return _tr(_prepare(m, o), o, supply, [])


def translate_context(
    ctx: LamTerm, o: str = DEFAULT_OUTPUT, supply: Optional[ChannelSupply] = None
) -> Tuple[Structure, str]:
    """Translate a term with one hole.  Returns the structure context and the
    output channel the hole's filler must use.  No renaming is applied, so the
    caller must supply a term whose binders are already distinct."""
    if supply is None:
        supply = ChannelSupply(avoid=frozenset({o}))
    holes: List[str] = []
    out = _tr(ctx, o, supply, holes)
    if len(holes) != 1:
        raise TranslationError(f"context must have exactly one hole, found {len(holes)}")
    return out, holes[0]


# ---------------------------------------------------------------- read-back

def output_channel(r: Structure) -> Optional[str]:
    """The unique free name with a negative occurrence, if there is one."""
    neg = set()
    stack = [(r, frozenset())]
    while stack:
        n, bound = stack.pop()
        if isinstance(n, Atom):
            if n.neg and n.name not in bound:
                neg.add(n.name)
        elif isinstance(n, Ren):
            stack.append((n.body, bound | {n.name}))
        elif isinstance(n, (Par, CoPar, Seq)):
            stack.extend((c, bound) for c in n.children)
    return next(iter(neg)) if len(neg) == 1 else None


class Image:
    """A structure recognised as the translation of a term at output ``out``."""

    out: str

    def structure(self) -> Structure:
        raise NotImplementedError

    def term(self) -> LamTerm:
        raise NotImplementedError


@dataclass(frozen=True)
class VarImage(Image):
    var: str
    out: str

    def structure(self) -> Structure:
        return _fwd(self.var, self.out)

    def term(self) -> LamTerm:
        return Var(self.var)


@dataclass(frozen=True)
class AbsImage(Image):
    var: str
    chan: str
    body: Structure
    out: str

    def structure(self) -> Structure:
        return ren([self.var, self.chan], par(self.body, _link(self.chan, self.out)))

    def term(self) -> LamTerm:
        return Abs(self.var, image_of(self.body, self.chan).term())


@dataclass(frozen=True)
class AppImage(Image):
    chan: str
    fun: Structure
    argchan: str
    arg: Structure
    out: str

    def structure(self) -> Structure:
        return Ren(self.chan, par(self.fun, Ren(self.argchan, self.arg), _link(self.chan, self.out)))

    def term(self) -> LamTerm:
        return App(image_of(self.fun, self.chan).term(), image_of(self.arg, self.argchan).term())


@dataclass(frozen=True)
class SubImage(Image):
    var: str
    body: Structure
    arg: Structure
    out: str

    def structure(self) -> Structure:
        return Ren(self.var, par(self.body, self.arg))

    def term(self) -> LamTerm:
        return ESub(image_of(self.body, self.out).term(), self.var, image_of(self.arg, self.var).term())


def _link(c: str, o: str) -> Structure:
    return copar(Atom(c), Atom(o, True))


def _is_out_pair(n: Structure, o: str) -> Optional[str]:
    """Match (c; ō) and return c."""
    if isinstance(n, CoPar) and len(n.children) == 2:
        a, b = n.children
        for x, y in ((a, b), (b, a)):
            if isinstance(x, Atom) and not x.neg and isinstance(y, Atom) and y.neg and y.name == o:
                return x.name
    return None


def _block(r: Structure) -> Tuple[List[str], Structure]:
    names = []
    while isinstance(r, Ren):
        names.append(r.name)
        r = r.body
    return names, r


def _match(r: Structure, o: str) -> Optional[Image]:
    """One level of matching on a canonical structure; children are checked lazily."""
    if isinstance(r, Seq) and len(r.children) == 2:
        x, y = r.children
        if isinstance(x, Atom) and not x.neg and isinstance(y, Atom) and y.neg and y.name == o and x.name != o:
            return VarImage(x.name, o)
        return None
    if not isinstance(r, Ren):
        return None
    names, body = _block(r)
    if not isinstance(body, Par):
        return None
    kids = list(body.children)
    for i, k in enumerate(kids):
        c = _is_out_pair(k, o)
        if c is None or c not in names:
            continue
        rest = kids[:i] + kids[i + 1:]
        others = [n for n in names if n != c]
        if len(others) == 1 and len(rest) == 1:
            if image_of(rest[0], c) is not None:
                return AbsImage(others[0], c, rest[0], o)
        if not others and len(rest) == 2:
            for fi in (0, 1):
                fun, arg = rest[fi], rest[1 - fi]
                if c not in free_names(fun) or image_of(fun, c) is None:
                    continue
                bound = _split_bound(arg)
                if bound is not None:
                    return AppImage(c, fun, bound[0], bound[1], o)
    if len(names) == 1 and len(kids) == 2:
        x = names[0]
        for bi in (0, 1):
            bod, arg = kids[bi], kids[1 - bi]
            if o in free_names(bod) and image_of(bod, o) is not None and image_of(arg, x) is not None:
                return SubImage(x, bod, arg, o)
    return None


def _split_bound(r: Structure) -> Optional[Tuple[str, Structure]]:
    """Split ⌊q⌋⟦N⟧q into (q, ⟦N⟧q); the block may have absorbed N's own binders."""
    names, body = _block(r)
    for q in names:
        rest = ren([n for n in names if n != q], body)
        if image_of(rest, q) is not None:
            return q, rest
    return None


_IMAGE_CACHE: dict = {}


def _free_polarities(r: Structure, name: str) -> List[bool]:
    """Polarity of every free occurrence of ``name``."""
    if isinstance(r, Atom):
        return [r.neg] if r.name == name else []
    if isinstance(r, Ren):
        return [] if r.name == name else _free_polarities(r.body, name)
    if isinstance(r, (Par, CoPar, Seq)):
        return [b for c in r.children for b in _free_polarities(c, name)]
    return []


def image_of(r: Structure, o: str) -> Optional[Image]:
    """Match a canonical structure against the translation clauses at output ``o``."""
    key = (r, o)
    if key not in _IMAGE_CACHE and _free_polarities(r, o) != [True]:
        return None
    if key not in _IMAGE_CACHE:
        if len(_IMAGE_CACHE) > 200_000:
            _IMAGE_CACHE.clear()
        _IMAGE_CACHE[key] = _match(r, o)
    return _IMAGE_CACHE[key]


def readback(r: Structure) -> Optional[LamTerm]:
    o = output_channel(r)
    if o is None:
        return None
    img = image_of(canonicalize(r), o)
    if img is None:
        return None
    m = img.term()
    if not check_linear(m):
        return None
    try:
        if not equiv(translate(m, o), r):
            return None
    except TranslationError:
        return None
    return tidy_names(m)
