"""Linear λ-terms with explicit substitutions and their reduction."""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

BETA_RULES = ("beta_intro", "sub_var", "sub_abs", "sub_app_left", "sub_app_right")


class LamTerm:
    __slots__ = ()


@dataclass(frozen=True)
class Var(LamTerm):
    name: str


@dataclass(frozen=True)
class Abs(LamTerm):
    var: str
    body: LamTerm


@dataclass(frozen=True)
class App(LamTerm):
    fun: LamTerm
    arg: LamTerm


@dataclass(frozen=True)
class ESub(LamTerm):
    """``body[var := arg]``"""

    body: LamTerm
    var: str
    arg: LamTerm


@dataclass(frozen=True)
class LHole(LamTerm):
    """Hole of a term context."""


@dataclass(frozen=True)
class RedexSite:
    path: Tuple[int, ...]
    rule: str


@dataclass(frozen=True)
class ReductionTrace:
    start: LamTerm
    steps: Tuple[Tuple[RedexSite, LamTerm], ...]
    complete: bool = True

    @property
    def end(self) -> LamTerm:
        return self.steps[-1][1] if self.steps else self.start

    def terms(self) -> List[LamTerm]:
        return [self.start] + [t for _, t in self.steps]


class LamSyntaxError(ValueError):
    def __init__(self, msg: str, pos: int, text: str) -> None:
        line = text.count("\n", 0, pos) + 1
        col = pos - (text.rfind("\n", 0, pos) + 1) + 1
        super().__init__(f"{msg} at line {line}, column {col}")
        self.line, self.col = line, col


class LinearityError(ValueError):
    pass


class StepError(ValueError):
    pass


# ---------------------------------------------------------------- basics

def children(m: LamTerm) -> Tuple[LamTerm, ...]:
    if isinstance(m, Abs):
        return (m.body,)
    if isinstance(m, App):
        return (m.fun, m.arg)
    if isinstance(m, ESub):
        return (m.body, m.arg)
    return ()


def with_children(m: LamTerm, kids: Sequence[LamTerm]) -> LamTerm:
    if isinstance(m, Abs):
        return Abs(m.var, kids[0])
    if isinstance(m, App):
        return App(kids[0], kids[1])
    if isinstance(m, ESub):
        return ESub(kids[0], m.var, kids[1])
    return m


def term_size(m: LamTerm) -> int:
    return 1 + sum(term_size(c) for c in children(m))


def free_vars(m: LamTerm) -> FrozenSet[str]:
    if isinstance(m, Var):
        return frozenset((m.name,))
    if isinstance(m, Abs):
        return free_vars(m.body) - {m.var}
    if isinstance(m, App):
        return free_vars(m.fun) | free_vars(m.arg)
    if isinstance(m, ESub):
        return (free_vars(m.body) - {m.var}) | free_vars(m.arg)
    return frozenset()


def _occurrences(m: LamTerm, x: str) -> int:
    if isinstance(m, Var):
        return int(m.name == x)
    if isinstance(m, Abs):
        return 0 if m.var == x else _occurrences(m.body, x)
    if isinstance(m, App):
        return _occurrences(m.fun, x) + _occurrences(m.arg, x)
    if isinstance(m, ESub):
        inner = 0 if m.var == x else _occurrences(m.body, x)
        return inner + _occurrences(m.arg, x)
    return 0


def linearity_diagnostic(m: LamTerm) -> Optional[str]:
    """None when ``m`` is linear, else a description of the first violation."""
    if isinstance(m, Var) or isinstance(m, LHole):
        return None
    if isinstance(m, Abs):
        n = _occurrences(m.body, m.var)
        if n != 1:
            return f"binder \\{m.var} is used {n} times"
        return linearity_diagnostic(m.body)
    if isinstance(m, App):
        shared = free_vars(m.fun) & free_vars(m.arg)
        if shared:
            return f"application shares free variables {sorted(shared)}"
        return linearity_diagnostic(m.fun) or linearity_diagnostic(m.arg)
    if isinstance(m, ESub):
        n = _occurrences(m.body, m.var)
        if n != 1:
            return f"substitution [{m.var} := ...] binds a variable used {n} times"
        shared = (free_vars(m.body) - {m.var}) & free_vars(m.arg)
        if shared:
            return f"substitution shares free variables {sorted(shared)}"
        return linearity_diagnostic(m.body) or linearity_diagnostic(m.arg)
    raise TypeError(m)


def check_linear(m: LamTerm) -> bool:
    return linearity_diagnostic(m) is None


def bound_vars(m: LamTerm) -> set:
    out = set()
    if isinstance(m, (Abs, ESub)):
        out.add(m.var)
    for c in children(m):
        out |= bound_vars(c)
    return out


def fresh_var(base: str, avoid) -> str:
    base = base.rstrip("0123456789") or "v"
    for i in itertools.count(0):
        cand = f"{base}{i}"
        if cand not in avoid:
            return cand
    raise AssertionError


def rename_free(m: LamTerm, x: str, y: str) -> LamTerm:
    """Replace free ``x`` by ``y`` (``y`` assumed not bound in ``m``)."""
    if isinstance(m, Var):
        return Var(y) if m.name == x else m
    if isinstance(m, Abs):
        return m if m.var == x else Abs(m.var, rename_free(m.body, x, y))
    if isinstance(m, App):
        return App(rename_free(m.fun, x, y), rename_free(m.arg, x, y))
    if isinstance(m, ESub):
        body = m.body if m.var == x else rename_free(m.body, x, y)
        return ESub(body, m.var, rename_free(m.arg, x, y))
    return m


def barendregt(m: LamTerm, avoid: Optional[set] = None) -> LamTerm:
    """α-rename so every binder is distinct and differs from every free variable."""
    used = set(free_vars(m)) | (avoid or set()) | all_vars(m)
    taken: set = set(free_vars(m)) | (avoid or set())

    def go(t: LamTerm) -> LamTerm:
        if isinstance(t, Var):
            return t
        if isinstance(t, (Abs, ESub)):
            x = t.var
            if x in taken:
                y = fresh_var(x, used | taken)
                used.add(y)
            else:
                y = x
            taken.add(y)
            body = t.body if y == x else rename_free(t.body, x, y)
            if isinstance(t, Abs):
                return Abs(y, go(body))
            return ESub(go(body), y, go(t.arg))
        if isinstance(t, App):
            return App(go(t.fun), go(t.arg))
        return t

    return go(m)


def tidy_names(m: LamTerm) -> LamTerm:
    """Rename binders to ``v0, v1, ...`` in pre-order, avoiding free variables."""
    avoid = set(free_vars(m)) | all_vars(m)

    def go(t: LamTerm) -> LamTerm:
        if isinstance(t, (Abs, ESub)):
            y = fresh_var("v", avoid)
            avoid.add(y)
            body = go(rename_free(t.body, t.var, y))
            if isinstance(t, Abs):
                return Abs(y, body)
            return ESub(body, y, go(t.arg))
        if isinstance(t, App):
            return App(go(t.fun), go(t.arg))
        return t

    return go(m)


def all_vars(m: LamTerm) -> set:
    out = set()
    if isinstance(m, Var):
        out.add(m.name)
    if isinstance(m, (Abs, ESub)):
        out.add(m.var)
    for c in children(m):
        out |= all_vars(c)
    return out


def alpha_key(m: LamTerm, env: Optional[Dict[str, int]] = None, depth: int = 0):
    env = env or {}
    if isinstance(m, Var):
        return ("b", depth - env[m.name]) if m.name in env else ("f", m.name)
    if isinstance(m, Abs):
        return ("L", alpha_key(m.body, {**env, m.var: depth}, depth + 1))
    if isinstance(m, App):
        return ("A", alpha_key(m.fun, env, depth), alpha_key(m.arg, env, depth))
    if isinstance(m, ESub):
        return ("S", alpha_key(m.body, {**env, m.var: depth}, depth + 1), alpha_key(m.arg, env, depth))
    return ("H",)


def alpha_eq(m: LamTerm, n: LamTerm) -> bool:
    return alpha_key(m) == alpha_key(n)


# ---------------------------------------------------------------- redexes

def subterm_at(m: LamTerm, path: Sequence[int]) -> LamTerm:
    for i in path:
        m = children(m)[i]
    return m


def replace_term(m: LamTerm, path: Sequence[int], new: LamTerm) -> LamTerm:
    if not path:
        return new
    kids = list(children(m))
    kids[path[0]] = replace_term(kids[path[0]], path[1:], new)
    return with_children(m, kids)


def redex_rule(m: LamTerm) -> Optional[str]:
    if isinstance(m, App) and isinstance(m.fun, Abs):
        return "beta_intro"
    if isinstance(m, ESub):
        b = m.body
        if isinstance(b, Var) and b.name == m.var:
            return "sub_var"
        if isinstance(b, Abs) and b.var != m.var:
            return "sub_abs"
        if isinstance(b, App):
            if m.var in free_vars(b.arg):
                return "sub_app_right"
            if m.var in free_vars(b.fun):
                return "sub_app_left"
    return None


def find_redexes(m: LamTerm) -> List[RedexSite]:
    """All redex sites in pre-order (outermost, then left to right)."""
    out: List[RedexSite] = []

    def go(t: LamTerm, path: Tuple[int, ...]) -> None:
        r = redex_rule(t)
        if r:
            out.append(RedexSite(path, r))
        for i, c in enumerate(children(t)):
            go(c, path + (i,))

    go(m, ())
    return out


def contract(m: LamTerm, rule: str) -> LamTerm:
    """Apply one clause at the root of ``m``."""
    if rule != redex_rule(m):
        raise StepError(f"no {rule} redex here")
    if rule == "beta_intro":
        f = m.fun  # type: ignore[attr-defined]
        return ESub(f.body, f.var, m.arg)  # type: ignore[attr-defined]
    assert isinstance(m, ESub)
    b, x, p = m.body, m.var, m.arg
    if rule == "sub_var":
        return p
    if rule == "sub_abs":
        assert isinstance(b, Abs)
        y, body = b.var, b.body
        if y in free_vars(p):
            y2 = fresh_var(y, all_vars(m))
            body = rename_free(body, y, y2)
            y = y2
        return Abs(y, ESub(body, x, p))
    assert isinstance(b, App)
    if rule == "sub_app_right":
        return App(b.fun, ESub(b.arg, x, p))
    return App(ESub(b.fun, x, p), b.arg)


def step(m: LamTerm, site: RedexSite) -> LamTerm:
    try:
        sub = subterm_at(m, site.path)
    except IndexError:
        raise StepError(f"path {list(site.path)} does not exist") from None
    return replace_term(m, site.path, contract(sub, site.rule))


def _innermost(sites: List[RedexSite]) -> List[RedexSite]:
    def below(a: RedexSite, b: RedexSite) -> bool:
        return len(b.path) > len(a.path) and b.path[: len(a.path)] == a.path

    return [s for s in sites if not any(below(s, t) for t in sites)]


def reduce(
    m: LamTerm,
    strategy: str = "leftmost_outermost",
    max_steps: Optional[int] = None,
    script: Optional[Sequence[RedexSite]] = None,
) -> ReductionTrace:
    diag = linearity_diagnostic(m)
    if diag:
        raise LinearityError(diag)
    if max_steps is None:
        max_steps = 4 * term_size(m) ** 2
    steps: List[Tuple[RedexSite, LamTerm]] = []
    cur = m
    if strategy == "scripted":
        for site in script or ():
            if site not in find_redexes(cur):
                raise StepError(f"invalid scripted site {site}")
            cur = step(cur, site)
            steps.append((site, cur))
        return ReductionTrace(m, tuple(steps), True)
    for _ in range(max_steps):
        sites = find_redexes(cur)
        if not sites:
            return ReductionTrace(m, tuple(steps), True)
        if strategy == "leftmost_outermost":
            site = sites[0]
        elif strategy == "rightmost_innermost":
            site = _innermost(sites)[-1]
        else:
            raise ValueError(f"unknown strategy {strategy!r}")
        cur = step(cur, site)
        steps.append((site, cur))
    return ReductionTrace(m, tuple(steps), not find_redexes(cur))


# ---------------------------------------------------------------- text syntax

_LTOK = re.compile(r"\s*(?:(:=)|([A-Za-z_][A-Za-z0-9_]*)|(\S))", re.S)


def _ltokens(text: str):
    out = []
    pos = 0
    while True:
        m = _LTOK.match(text, pos)
        if m is None:
            break
        if m.group(1):
            out.append(("sym", ":=", m.start(1)))
        elif m.group(2):
            out.append(("name", m.group(2), m.start(2)))
        else:
            out.append(("sym", m.group(3), m.start(3)))
        pos = m.end()
    out.append(("eof", "", len(text.rstrip()) if text.strip() else 0))
    return out


def parse_lam(text: str) -> LamTerm:
    toks = _ltokens(text)
    i = 0

    def peek():
        return toks[i]

    def expect(sym: str):
        nonlocal i
        t = toks[i]
        if t[0] != "sym" or t[1] != sym:
            raise LamSyntaxError(f"expected {sym!r}", t[2], text)
        i += 1

    def name() -> str:
        nonlocal i
        t = toks[i]
        if t[0] != "name":
            raise LamSyntaxError("expected a variable name", t[2], text)
        i += 1
        return t[1]

    def starts_atom(t) -> bool:
        return t[0] == "name" or (t[0] == "sym" and t[1] in "(\\")

    def term() -> LamTerm:
        t = peek()
        if t[0] == "sym" and t[1] == "\\":
            return lam()
        f = postfix()
        while starts_atom(peek()):
            if peek()[1] == "\\":
                f = App(f, lam())
                break
            f = App(f, postfix())
        return f

    def lam() -> LamTerm:
        expect("\\")
        x = name()
        expect(".")
        return Abs(x, term())

    def postfix() -> LamTerm:
        nonlocal i
        a = atomic()
        while peek()[0] == "sym" and peek()[1] == "[":
            i += 1
            x = name()
            expect(":=")
            p = term()
            expect("]")
            a = ESub(a, x, p)
        return a

    def atomic() -> LamTerm:
        nonlocal i
        t = peek()
        if t[0] == "name":
            i += 1
            return Var(t[1])
        if t[0] == "sym" and t[1] == "(":
            i += 1
            m = term()
            expect(")")
            return m
        if t[0] == "eof":
            raise LamSyntaxError("unexpected end of input", t[2], text)
        raise LamSyntaxError(f"unexpected {t[1]!r}", t[2], text)

    m = term()
    if peek()[0] != "eof":
        raise LamSyntaxError("trailing input", peek()[2], text)
    return m


def print_lam(m: LamTerm) -> str:
    if isinstance(m, Var):
        return m.name
    if isinstance(m, LHole):
        return "[]"
    if isinstance(m, Abs):
        return f"\\{m.var}. {print_lam(m.body)}"
    if isinstance(m, App):
        f = print_lam(m.fun)
        if isinstance(m.fun, Abs):
            f = f"({f})"
        a = print_lam(m.arg)
        if isinstance(m.arg, (App, Abs)):
            a = f"({a})"
        return f"{f} {a}"
    if isinstance(m, ESub):
        b = print_lam(m.body)
        if not isinstance(m.body, (Var, ESub)):
            b = f"({b})"
        return f"{b}[{m.var} := {print_lam(m.arg)}]"
    raise TypeError(m)
