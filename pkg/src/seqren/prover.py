"""Bounded bottom-up proof search in the down fragment."""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set, Tuple, Union

from .lam import LamTerm
from .rules import DOWN, Derivation, RuleInstance, compose, empty, iter_premises, plug_in_context
from .structure import (
    HOLE,
    ONE,
    Atom,
    CoPar,
    Par,
    Ren,
    Seq,
    Structure,
    atom_count,
    canonical_pair,
    canonicalize,
    ckey,
    copar,
    negate,
    par,
    seq,
    size,
)
from .translate import translate

_ORDER = ("ai_down", "q_down", "switch", "r_down")
_ONE_KEY = ckey(ONE)


@dataclass(frozen=True)
class SearchBudget:
    max_depth: int = 16
    max_states: int = 2_000_000
    wall_clock: float = 60.0

    def __post_init__(self) -> None:
        if self.max_depth <= 0 or self.max_states <= 0 or self.wall_clock <= 0:
            raise ValueError("budget values must be positive")

    @classmethod
    def parse(cls, text: str) -> "SearchBudget":
        """Parse ``depth=16,states=100000,seconds=60`` (any subset)."""
        names = {"depth": "max_depth", "states": "max_states", "seconds": "wall_clock"}
        kw: Dict[str, Union[int, float]] = {}
        for part in filter(None, (p.strip() for p in text.split(","))):
            key, sep, val = part.partition("=")
            if not sep or key.strip() not in names:
                raise ValueError(f"bad budget item {part!r}")
            field_name = names[key.strip()]
            kw[field_name] = float(val) if field_name == "wall_clock" else int(val)
        return cls(**kw)  # type: ignore[arg-type]


@dataclass
class SearchStats:
    states_expanded: int = 0
    memo_hits: int = 0
    depth_reached: int = 0
    wall_time: float = 0.0

    def to_json(self) -> str:
        return json.dumps(
            {
                "states_expanded": self.states_expanded,
                "memo_hits": self.memo_hits,
                "depth_reached": self.depth_reached,
                "wall_time": round(self.wall_time, 6),
            },
            sort_keys=True,
        )


@dataclass(frozen=True)
class Proved:
    derivation: Derivation
    stats: SearchStats = field(compare=False)


@dataclass(frozen=True)
class ExhaustedComplete:
    stats: SearchStats = field(compare=False)


@dataclass(frozen=True)
class BudgetHit:
    reason: str
    stats: SearchStats = field(compare=False)


SearchOutcome = Union[Proved, ExhaustedComplete, BudgetHit]


class _OutOfBudget(Exception):
    def __init__(self, reason: str) -> None:
        self.reason = reason


def balanced(r: Structure) -> bool:
    """Every free name occurs as often positively as negatively."""
    counts: Dict[str, int] = {}

    def walk(n: Structure, bound: frozenset) -> None:
        if isinstance(n, Atom):
            if n.name not in bound:
                counts[n.name] = counts.get(n.name, 0) + (-1 if n.neg else 1)
        elif isinstance(n, Ren):
            walk(n.body, bound | {n.name})
        elif isinstance(n, (Par, CoPar, Seq)):
            for c in n.children:
                walk(c, bound)

    walk(r, frozenset())
    return all(v == 0 for v in counts.values())


def _leaves(r: Structure):
    """Atoms with their connective ancestry and binder chain.

    Each leaf is (atom, path, binders) where ``path`` lists (node id, kind,
    child index) for every Par/CoPar/Seq above it and ``binders`` the ids of
    the enclosing renamings, innermost last, paired with their names."""
    out = []
    ids = iter(range(1 << 30))

    def walk(n: Structure, path: tuple, binders: tuple) -> None:
        if isinstance(n, Atom):
            out.append((n, path, binders))
        elif isinstance(n, Ren):
            walk(n.body, path, binders + ((next(ids), n.name),))
        elif isinstance(n, (Par, CoPar, Seq)):
            nid = next(ids)
            for i, c in enumerate(n.children):
                walk(c, path + ((nid, type(n), i),), binders)

    walk(r, (), ())
    return out


def _binder_of(name: str, binders: tuple) -> Optional[Tuple[int, int]]:
    """(binder id, depth) of the renaming that binds ``name``, innermost first."""
    for depth in range(len(binders) - 1, -1, -1):
        if binders[depth][1] == name:
            return binders[depth][0], depth
    return None


def _may_annihilate(x, y) -> bool:
    (a, pa, ba), (b, pb, bb) = x, y
    if a.neg == b.neg:
        return False
    i = 0
    while i < len(pa) and i < len(pb) and pa[i] == pb[i]:
        i += 1
    # lowest common connective must be a par
    if i >= len(pa) or i >= len(pb) or pa[i][0] != pb[i][0] or pa[i][1] is not Par:
        return False
    ka, kb = _binder_of(a.name, ba), _binder_of(b.name, bb)
    if ka is None or kb is None:
        return ka is None and kb is None and a.name == b.name
    if ka[0] == kb[0]:
        return True
    # distinct binders can only meet if neither encloses the other
    ids_a = {bid for bid, _ in ba}
    ids_b = {bid for bid, _ in bb}
    return ka[0] not in ids_b and kb[0] not in ids_a


def can_pair_atoms(r: Structure) -> bool:
    """Necessary condition for provability: atoms split into dual pairs that
    are currently related by par.  Going upwards no rule creates new par
    relations, so a state failing this test is dead."""
    leaves = _leaves(r)
    pos = [l for l in leaves if not l[0].neg]
    neg = [l for l in leaves if l[0].neg]
    if len(pos) != len(neg):
        return False
    adj = [[j for j, n in enumerate(neg) if _may_annihilate(p, n)] for p in pos]
    match: Dict[int, int] = {}

    def augment(i: int, seen: Set[int]) -> bool:
        for j in adj[i]:
            if j in seen:
                continue
            seen.add(j)
            if j not in match or augment(match[j], seen):
                match[j] = i
                return True
        return False

    return all(augment(i, set()) for i in range(len(pos)))


def _min_steps(r: Structure) -> int:
    return math.ceil(atom_count(r) / 2)


STRATEGIES = ("dfs", "iterative")


class _Search:
    def __init__(self, budget: SearchBudget, prune: bool, strategy: str) -> None:
        if strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {strategy!r}")
        self.budget = budget
        self.prune = prune
        self.strategy = strategy
        self.stats = SearchStats()
        self.t0 = time.monotonic()
        # per canonical key: largest remaining depth known to fail
        self.fails: Dict[tuple, int] = {}
        # keys whose whole reachable space is known to contain no proof
        self.dead: Set[tuple] = set()
        self.succ_cache: Dict[tuple, List[Tuple[str, Structure, tuple]]] = {}
        self.limit = 0

    def _tick(self) -> None:
        self.stats.states_expanded += 1
        if self.stats.states_expanded > self.budget.max_states:
            raise _OutOfBudget("states")
        if self.stats.states_expanded % 64 == 0 and time.monotonic() - self.t0 > self.budget.wall_clock:
            raise _OutOfBudget("wall_clock")

    def successors(self, r: Structure, key: tuple) -> List[Tuple[str, Structure, tuple]]:
        hit = self.succ_cache.get(key)
        if hit is not None:
            return hit
        out = []
        seen = {key}
        for rule in _ORDER:
            for _, raw in iter_premises(rule, r):
                if self.prune and not (balanced(raw) and can_pair_atoms(raw)):
                    continue
                k, prem = canonical_pair(raw)
                if k in seen:
                    continue
                seen.add(k)
                out.append((rule, prem, k))
        out.sort(key=lambda t: (atom_count(t[1]), size(t[1])))
        if len(self.succ_cache) > 200_000:
            self.succ_cache.clear()
        self.succ_cache[key] = out
        return out

    def dfs(self, r: Structure, key: tuple, depth: int, path: Set[tuple]) -> Tuple[Optional[List[Tuple[str, Structure]]], bool]:
        """Returns (steps or None, exhaustive) where ``exhaustive`` says the
        failure did not depend on the depth limit or on the current path."""
        self.stats.depth_reached = max(self.stats.depth_reached, self.limit - depth)
        if key == _ONE_KEY:
            return [], True
        if key in self.dead:
            self.stats.memo_hits += 1
            return None, True
        if self.prune and not (balanced(r) and can_pair_atoms(r)):
            self.dead.add(key)
            return None, True
        if self.fails.get(key, -1) >= depth:
            self.stats.memo_hits += 1
            return None, False
        if depth == 0 or (self.prune and _min_steps(r) > depth):
            return None, False
        self._tick()
        exhaustive = True
        path.add(key)
        try:
            for rule, prem, k in self.successors(r, key):
                if k in path:
                    exhaustive = False
                    continue
                steps, ex = self.dfs(prem, k, depth - 1, path)
                if steps is not None:
                    return [(rule, prem)] + steps, True
                exhaustive = exhaustive and ex
        finally:
            path.discard(key)
        if exhaustive:
            self.dead.add(key)
        else:
            self.fails[key] = max(self.fails.get(key, -1), depth)
        return None, exhaustive

    def solve(self, goal: Structure, limit: int) -> Tuple[Optional[Derivation], bool]:
        """Search one goal.  Returns (derivation, exhaustive)."""
        key = ckey(goal)
        depths = range(0, limit + 1) if self.strategy == "iterative" else [limit]
        for d in depths:
            if d < 0:
                break
            self.limit = d
            steps, ex = self.dfs(goal, key, d, set())
            if steps is not None:
                cur = goal
                insts = []
                for rule, prem in steps:
                    insts.append(RuleInstance(rule, cur, prem))
                    cur = prem
                return Derivation(goal, tuple(insts)), True
            if ex:
                return None, True
        return None, False


def _components(goal: Structure) -> Tuple[str, List[Structure]]:
    if isinstance(goal, (CoPar, Seq)):
        return type(goal).__name__, list(goal.children)
    if isinstance(goal, Ren):
        return "Ren", [goal.body]
    return "", [goal]


def _solve_decomposed(s: _Search, goal: Structure, limit: int) -> Tuple[Optional[Derivation], bool]:
    kind, parts = _components(goal)
    if not kind:
        return s.solve(goal, limit)
    if kind == "Ren":
        d, ex = _solve_decomposed(s, parts[0], limit)
        if d is None:
            return None, ex
        return plug_in_context(d, Ren(goal.name, HOLE)), True  # type: ignore[attr-defined]
    make = copar if kind == "CoPar" else seq
    lows = [_min_steps(p) if s.prune else 0 for p in parts]
    subs = []
    used = 0
    for i, p in enumerate(parts):
        rest_low = sum(lows[i + 1:])
        d, ex = _solve_decomposed(s, p, limit - used - rest_low)
        if d is None:
            return None, ex
        used += len(d)
        subs.append(d)
    out = empty(goal)
    for i, d in enumerate(subs):
        out = compose(out, plug_in_context(d, make(HOLE, *parts[i + 1:])))
    return out, True


def prove(
    goal: Structure,
    budget: Optional[SearchBudget] = None,
    prune: bool = True,
    strategy: str = "dfs",
) -> SearchOutcome:
    """Search for a proof of ``goal`` in the down fragment.

    ``dfs`` explores to the full depth bound in a fixed successor order;
    ``iterative`` deepens one level at a time and so returns shortest proofs."""
    budget = budget or SearchBudget()
    s = _Search(budget, prune, strategy)
    goal = canonicalize(goal)
    try:
        d, ex = _solve_decomposed(s, goal, budget.max_depth)
    except _OutOfBudget as e:
        s.stats.wall_time = time.monotonic() - s.t0
        return BudgetHit(e.reason, s.stats)
    s.stats.wall_time = time.monotonic() - s.t0
    if d is not None:
        return Proved(d, s.stats)
    if ex:
        return ExhaustedComplete(s.stats)
    return BudgetHit("depth", s.stats)


def reduction_goal(m: LamTerm, n: LamTerm, o: str = "ch_o") -> Structure:
    return par(translate(m, o), negate(translate(n, o)))


def prove_reduction(
    m: LamTerm, n: LamTerm, o: str = "ch_o", budget: Optional[SearchBudget] = None, **kw
) -> SearchOutcome:
    return prove(reduction_goal(m, n, o), budget, **kw)


def exhaustive_oracle(goal: Structure, max_atoms: int = 8, memo: Optional[Dict[tuple, bool]] = None) -> bool:
    """Unpruned exhaustive search over the down fragment.

    Read bottom-up, every step with a distinct premise deletes atoms, turns
    par-related atom pairs into copar or seq ones, or merges binders, so the
    state graph is acyclic and provability can be memoised per state.
    ``memo`` may be shared between calls.
    """
    if size(goal) > max_atoms:
        raise ValueError(f"goal of size {size(goal)} exceeds the oracle limit {max_atoms}")
    if memo is None:
        memo = {}
    key, start = canonical_pair(goal)
    memo[_ONE_KEY] = True
    on_path: Set[tuple] = set()

    def provable(k: tuple, r: Structure) -> bool:
        if k in memo:
            return memo[k]
        if k in on_path:
            raise RuntimeError("cycle in the down-fragment state graph")
        on_path.add(k)
        found = False
        for rule in sorted(DOWN):
            for _, raw in iter_premises(rule, r):
                pk, prem = canonical_pair(raw)
                if pk != k and provable(pk, prem):
                    found = True
                    break
            if found:
                break
        on_path.discard(k)
        memo[k] = found
        return found

    return provable(key, start)
