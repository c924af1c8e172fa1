"""Structures of SBVr: syntax, negation, free names, size, substitution and
a canonical form that decides the congruence.

Atom names are plain strings.  Names starting with ``ch_`` live in the
channel namespace, everything else in the variable namespace.
"""

from __future__ import annotations

import itertools
import re
from typing import Callable, Dict, FrozenSet, Iterator, List, Optional, Sequence, Tuple

CHANNEL_PREFIX = "ch_"
NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


def namespace(name: str) -> str:
    return "channel" if name.startswith(CHANNEL_PREFIX) else "variable"


class Structure:
    __slots__ = ("_hash", "_fn", "_norm")

    def __init__(self) -> None:
        self._hash: Optional[int] = None
        self._fn: Optional[FrozenSet[str]] = None
        self._norm: Optional[Structure] = None

    def _fields(self) -> tuple:
        raise NotImplementedError

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if type(self) is not type(other):
            return False
        return hash(self) == hash(other) and self._fields() == other._fields()  # type: ignore[union-attr]

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((type(self).__name__,) + self._fields())
        return self._hash

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {print_structure(self)}>"

    def __str__(self) -> str:
        return print_structure(self)


class Unit(Structure):
    __slots__ = ()

    def _fields(self) -> tuple:
        return ()


class Hole(Structure):
    """The hole of a one-hole context."""

    __slots__ = ()

    def _fields(self) -> tuple:
        return ()


class Atom(Structure):
    __slots__ = ("name", "neg")

    def __init__(self, name: str, neg: bool = False) -> None:
        super().__init__()
        self.name = name
        self.neg = neg

    def _fields(self) -> tuple:
        return (self.name, self.neg)


class _Nary(Structure):
    __slots__ = ("children",)

    def __init__(self, children: Sequence[Structure]) -> None:
        super().__init__()
        self.children: Tuple[Structure, ...] = tuple(children)

    def _fields(self) -> tuple:
        return self.children


class Par(_Nary):
    __slots__ = ()


class CoPar(_Nary):
    __slots__ = ()


class Seq(_Nary):
    __slots__ = ()


class Ren(Structure):
    __slots__ = ("name", "body")

    def __init__(self, name: str, body: Structure) -> None:
        super().__init__()
        self.name = name
        self.body = body

    def _fields(self) -> tuple:
        return (self.name, self.body)


ONE = Unit()
HOLE = Hole()


def atom(name: str) -> Atom:
    return Atom(name, False)


def natom(name: str) -> Atom:
    return Atom(name, True)


def _mk(cls, children: Sequence[Structure]) -> Structure:
    """Build an n-ary node, tolerating fewer than two children."""
    kids = [c for c in children if not isinstance(c, Unit)]
    if not kids:
        return ONE
    if len(kids) == 1:
        return kids[0]
    return cls(kids)


def par(*children: Structure) -> Structure:
    return _mk(Par, children)


def copar(*children: Structure) -> Structure:
    return _mk(CoPar, children)


def seq(*children: Structure) -> Structure:
    return _mk(Seq, children)


def ren(names, body: Structure) -> Structure:
    if isinstance(names, str):
        names = [names]
    for n in reversed(list(names)):
        body = Ren(n, body)
    return body


# ---------------------------------------------------------------- basics

def negate(r: Structure) -> Structure:
    if isinstance(r, (Unit, Hole)):
        return r
    if isinstance(r, Atom):
        return Atom(r.name, not r.neg)
    if isinstance(r, Par):
        return CoPar([negate(c) for c in r.children])
    if isinstance(r, CoPar):
        return Par([negate(c) for c in r.children])
    if isinstance(r, Seq):
        return Seq([negate(c) for c in r.children])
    if isinstance(r, Ren):
        return Ren(r.name, negate(r.body))
    raise TypeError(r)


def free_names(r: Structure) -> FrozenSet[str]:
    if r._fn is not None:
        return r._fn
    if isinstance(r, (Unit, Hole)):
        fn: FrozenSet[str] = frozenset()
    elif isinstance(r, Atom):
        fn = frozenset((r.name,))
    elif isinstance(r, _Nary):
        fn = frozenset().union(*(free_names(c) for c in r.children))
    elif isinstance(r, Ren):
        fn = free_names(r.body) - {r.name}
    else:
        raise TypeError(r)
    r._fn = fn
    return fn


def all_names(r: Structure) -> set:
    """Every name appearing anywhere, bound or free."""
    out: set = set()
    stack = [r]
    while stack:
        n = stack.pop()
        if isinstance(n, Atom):
            out.add(n.name)
        elif isinstance(n, _Nary):
            stack.extend(n.children)
        elif isinstance(n, Ren):
            out.add(n.name)
            stack.append(n.body)
    return out


def size(r: Structure) -> int:
    if isinstance(r, (Unit, Hole)):
        return 0
    if isinstance(r, Atom):
        return 1
    if isinstance(r, _Nary):
        return sum(size(c) for c in r.children)
    if isinstance(r, Ren):
        return size(r.body) + (1 if r.name in free_names(r.body) else 0)
    raise TypeError(r)


def atom_count(r: Structure) -> int:
    if isinstance(r, Atom):
        return 1
    if isinstance(r, _Nary):
        return sum(atom_count(c) for c in r.children)
    if isinstance(r, Ren):
        return atom_count(r.body)
    return 0


def fresh_name(base: str, avoid) -> str:
    base = base.rstrip("0123456789").rstrip("_") or "n"
    if base not in avoid:
        return base
    for i in itertools.count(1):
        cand = f"{base}_{i}"
        if cand not in avoid:
            return cand
    raise AssertionError


def subst_atom(r: Structure, target: str, replacement: str) -> Structure:
    """Capture-avoiding renaming of the free name ``target`` to ``replacement``."""
    if target == replacement or target not in free_names(r):
        return r
    if isinstance(r, Atom):
        return Atom(replacement, r.neg) if r.name == target else r
    if isinstance(r, _Nary):
        return type(r)([subst_atom(c, target, replacement) for c in r.children])
    if isinstance(r, Ren):
        body = r.body
        name = r.name
        if name == replacement:
            name = fresh_name(name, all_names(body) | {target, replacement})
            body = subst_atom(body, r.name, name)
        return Ren(name, subst_atom(body, target, replacement))
    return r


def plug(ctx: Structure, r: Structure) -> Structure:
    """Fill the hole of ``ctx`` with ``r``; capture is permitted."""
    if isinstance(ctx, Hole):
        return r
    if isinstance(ctx, _Nary):
        return type(ctx)([plug(c, r) for c in ctx.children])
    if isinstance(ctx, Ren):
        return Ren(ctx.name, plug(ctx.body, r))
    return ctx


def has_hole(r: Structure) -> bool:
    if isinstance(r, Hole):
        return True
    if isinstance(r, _Nary):
        return any(has_hole(c) for c in r.children)
    if isinstance(r, Ren):
        return has_hole(r.body)
    return False


def compose_contexts(outer: Structure, inner: Structure) -> Structure:
    return plug(outer, inner)


# ---------------------------------------------------------------- positions

Path = Tuple[int, ...]


def subterm(r: Structure, path: Path) -> Structure:
    for i in path:
        r = r.body if isinstance(r, Ren) else r.children[i]  # type: ignore[attr-defined]
    return r


def replace_at(r: Structure, path: Path, new: Structure) -> Structure:
    if not path:
        return new
    i, rest = path[0], path[1:]
    if isinstance(r, Ren):
        return Ren(r.name, replace_at(r.body, rest, new))
    kids = list(r.children)  # type: ignore[attr-defined]
    kids[i] = replace_at(kids[i], rest, new)
    return type(r)(kids)


def positions(r: Structure, path: Path = ()) -> Iterator[Tuple[Path, Structure]]:
    yield path, r
    if isinstance(r, _Nary):
        for i, c in enumerate(r.children):
            yield from positions(c, path + (i,))
    elif isinstance(r, Ren):
        yield from positions(r.body, path + (0,))


def context_at(r: Structure, path: Path) -> Structure:
    return replace_at(r, path, HOLE)


# ---------------------------------------------------------------- normal form

def normalize(r: Structure) -> Structure:
    """Flatten, drop units, collapse singletons and drop vacuous binders."""
    if r._norm is not None:
        return r._norm
    if isinstance(r, (Unit, Atom, Hole)):
        out = r
    elif isinstance(r, _Nary):
        kids: List[Structure] = []
        cls = type(r)
        for c in r.children:
            c = normalize(c)
            if isinstance(c, Unit):
                continue
            if type(c) is cls:
                kids.extend(c.children)  # type: ignore[attr-defined]
            else:
                kids.append(c)
        out = _mk(cls, kids)
    elif isinstance(r, Ren):
        body = normalize(r.body)
        out = Ren(r.name, body) if r.name in free_names(body) else body
    else:
        raise TypeError(r)
    out._norm = out
    r._norm = out
    return out


_BIG = 10 ** 9
_K_UNIT = (0,)
_CACHE: Dict[tuple, tuple] = {}
_CACHE_LIMIT = 400_000


def _ren_block(r: Ren) -> Tuple[List[str], Structure]:
    names = []
    while isinstance(r, Ren):
        names.append(r.name)
        r = r.body  # type: ignore[assignment]
    return names, r


def _canon(r: Structure, lvl: int, env: Dict[str, int], pre: str) -> tuple:
    """Return (key, canonical structure) for a normalized ``r``."""
    if isinstance(r, Atom):
        if r.name in env:
            ix = env[r.name]
            nm = pre + str(ix) if ix < _BIG else r.name
            return (2, ix, r.neg), Atom(nm, r.neg)
        return (1, r.name, r.neg), r
    if isinstance(r, Unit):
        return _K_UNIT, ONE
    if isinstance(r, Hole):
        return (7,), HOLE
    sig = tuple(sorted((n, env[n]) for n in free_names(r) if n in env))
    ck = (r, lvl, sig, pre)
    hit = _CACHE.get(ck)
    if hit is not None:
        return hit
    if isinstance(r, _Nary):
        pairs = [_canon(c, lvl, env, pre) for c in r.children]
        if isinstance(r, Seq):
            tag = 5
        else:
            tag = 3 if isinstance(r, Par) else 4
            pairs.sort(key=lambda p: p[0])
        res = ((tag, tuple(p[0] for p in pairs)), type(r)([p[1] for p in pairs]))
    else:
        names, body = _ren_block(r)  # type: ignore[arg-type]
        res = _canon_block(names, body, lvl, env, pre)
    if len(_CACHE) > _CACHE_LIMIT:
        _CACHE.clear()
    _CACHE[ck] = res
    return res


def _canon_block(names: List[str], body: Structure, lvl: int, env: Dict[str, int], pre: str) -> tuple:
    k = len(names)

    def key_for(order: Sequence[str], pending: Sequence[str]) -> tuple:
        e = dict(env)
        for i, n in enumerate(order):
            e[n] = lvl + i
        for n in pending:
            e[n] = _BIG
        return _canon(body, lvl + k, e, pre)[0]

    if k <= 3:
        best = min(itertools.permutations(names), key=lambda o: key_for(o, ()))
    else:
        best_key = None
        best = None
        frontier: List[Tuple[str, ...]] = [()]
        while frontier:
            nxt = []
            for done in frontier:
                rest = [n for n in names if n not in done]
                if not rest:
                    fk = key_for(done, ())
                    if best_key is None or fk < best_key:
                        best_key, best = fk, done
                    continue
                scored = [(key_for(done + (n,), [m for m in rest if m != n]), n) for n in rest]
                low = min(s for s, _ in scored)
                nxt.extend(done + (n,) for s, n in scored if s == low)
            frontier = nxt
    e = dict(env)
    for i, n in enumerate(best):
        e[n] = lvl + i
    bkey, bstruct = _canon(body, lvl + k, e, pre)
    out = bstruct
    for i in reversed(range(k)):
        out = Ren(pre + str(lvl + i), out)
    return (6, k, bkey), out


def _prefix(r: Structure) -> str:
    fn = free_names(r)
    pre = "_"
    while any(re.fullmatch(re.escape(pre) + r"\d+", n) for n in fn):
        pre += "_"
    return pre


def canonical_pair(r: Structure) -> tuple:
    n = normalize(r)
    return _canon(n, 0, {}, _prefix(n))


def ckey(r: Structure) -> tuple:
    """Hashable key deciding the congruence."""
    return canonical_pair(r)[0]


def canonicalize(r: Structure) -> Structure:
    return canonical_pair(r)[1]


def equiv(r: Structure, t: Structure) -> bool:
    return r is t or ckey(r) == ckey(t)


def is_legal(r: Structure) -> bool:
    counts: Dict[object, int] = {}
    uid = itertools.count()

    def walk(n: Structure, env: Dict[str, int]) -> None:
        if isinstance(n, Atom):
            k = ("b", env[n.name]) if n.name in env else ("f", n.name)
            counts[k] = counts.get(k, 0) + 1
        elif isinstance(n, _Nary):
            for c in n.children:
                walk(c, env)
        elif isinstance(n, Ren):
            e = dict(env)
            e[n.name] = next(uid)
            walk(n.body, e)

    walk(r, {})
    return all(v <= 2 for v in counts.values())


# ---------------------------------------------------------------- text syntax

class StructureSyntaxError(ValueError):
    def __init__(self, msg: str, line: int, col: int) -> None:
        super().__init__(f"{msg} at line {line}, column {col}")
        self.line = line
        self.col = col


_TOKEN_RE = re.compile(r"\s*(?:([A-Za-z_][A-Za-z0-9_]*)|(\S))", re.S)


def _tokens(text: str) -> List[Tuple[str, str, int, int]]:
    toks = []
    pos = 0
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            break
        start = m.start(1) if m.group(1) is not None else m.start(2)
        line = text.count("\n", 0, start) + 1
        col = start - (text.rfind("\n", 0, start) + 1) + 1
        if m.group(1) is not None:
            toks.append(("name", m.group(1), line, col))
        else:
            toks.append(("sym", m.group(2), line, col))
        pos = m.end()
    end_line = text.count("\n") + 1
    end_col = len(text) - (text.rfind("\n") + 1) + 1
    toks.append(("eof", "", end_line, end_col))
    return toks


_CLOSE = {"[": "]", "(": ")", "<": ">"}
_CTOR = {"[": Par, "(": CoPar, "<": Seq}


def parse_structure(text: str) -> Structure:
    toks = _tokens(text)
    i = 0

    def err(msg: str, t) -> StructureSyntaxError:
        return StructureSyntaxError(msg, t[2], t[3])

    def parse() -> Structure:
        nonlocal i
        t = toks[i]
        if t[0] == "name":
            i += 1
            if t[1] == "1":
                return ONE
            return Atom(t[1])
        if t[0] == "sym" and t[1] == "1":
            i += 1
            return ONE
        if t[0] == "sym" and t[1] == "~":
            i += 1
            u = toks[i]
            if u[0] != "name":
                raise err("expected a name after '~'", u)
            i += 1
            return Atom(u[1], True)
        if t[0] == "sym" and t[1] in _CLOSE:
            i += 1
            kids = [parse()]
            while toks[i][0] == "sym" and toks[i][1] == ";":
                i += 1
                kids.append(parse())
            u = toks[i]
            if not (u[0] == "sym" and u[1] == _CLOSE[t[1]]):
                raise err(f"expected '{_CLOSE[t[1]]}' or ';'", u)
            i += 1
            if len(kids) < 2:
                raise err("a compound structure needs at least two components", u)
            return _CTOR[t[1]](kids)
        if t[0] == "sym" and t[1] == "{":
            i += 1
            u = toks[i]
            if u[0] == "sym" and u[1] == "~":
                raise err("a binder must name a positive atom", u)
            if u[0] != "name":
                raise err("expected a binder name", u)
            i += 1
            v = toks[i]
            if not (v[0] == "sym" and v[1] == "}"):
                raise err("expected '}'", v)
            i += 1
            return Ren(u[1], parse())
        if t[0] == "eof":
            raise err("unexpected end of input", t)
        raise err(f"unexpected character {t[1]!r}", t)

    r = parse()
    if toks[i][0] != "eof":
        raise err("trailing input", toks[i])
    return r


_OPEN = {Par: ("[", "]"), CoPar: ("(", ")"), Seq: ("<", ">")}


def print_structure(r: Structure) -> str:
    if isinstance(r, Unit):
        return "1"
    if isinstance(r, Hole):
        return "?"
    if isinstance(r, Atom):
        return ("~" if r.neg else "") + r.name
    if isinstance(r, _Nary):
        o, c = _OPEN[type(r)]
        return o + ";".join(print_structure(k) for k in r.children) + c
    if isinstance(r, Ren):
        return "{" + r.name + "}" + print_structure(r.body)
    raise TypeError(r)


def map_structure(r: Structure, f: Callable[[Structure], Structure]) -> Structure:
    """Bottom-up rebuild applying ``f`` at every node."""
    if isinstance(r, _Nary):
        r = type(r)([map_structure(c, f) for c in r.children])
    elif isinstance(r, Ren):
        r = Ren(r.name, map_structure(r.body, f))
    return f(r)
