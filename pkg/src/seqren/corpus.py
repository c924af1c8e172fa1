"""Deterministic test material: a λ-term corpus, random generators and the
enumerated goal family used to cross-check the prover."""

from __future__ import annotations

import itertools
import os
import random
from typing import Iterator, List, Optional, Sequence, Tuple

from .lam import Abs, App, ESub, LamTerm, Var, parse_lam
from .structure import (
    ONE,
    Atom,
    CoPar,
    Par,
    Ren,
    Seq,
    Structure,
    ckey,
    free_names,
    fresh_name,
    normalize,
    size,
    subst_atom,
)

# every clause shape, open terms, nested substitutions, steps under binders
LAMBDA_CORPUS: Tuple[str, ...] = (
    r"(\x. x) y",
    r"x[x := y]",
    r"(\y. y x)[x := w]",
    r"(x a)[x := f]",
    r"(f x)[x := a]",
    r"(x[x := y])[y := w]",
    r"x[x := y[y := w]]",
    r"x[x := (\y. y) z]",
    r"(\x. x) (\y. y)",
    r"(\f. f a) (\z. z)",
    r"(\x. \y. x y) f a",
    r"(\x. \y. y x) a b",
    r"\z. (\x. x) z",
    r"f ((\x. x) a)",
    r"((\x. x) f) a",
    r"(\x. x) ((\y. y) a)",
    r"(\x. x (\y. y)) (\z. z)",
    r"(\x. \y. \z. x (y z)) f g a",
    r"(\p. p a b) (\u. \v. u v)",
    r"(x y)[x := \z. z]",
    r"(\x. x w)[w := a]",
    r"\a. (\b. b a) f",
)


def seed_from_env(default: int = 0) -> int:
    """Seed for corpus generation, overridable through ``SEQREN_SEED``."""
    try:
        return int(os.environ.get("SEQREN_SEED", default))
    except ValueError:
        return default


def corpus_terms() -> List[LamTerm]:
    return [parse_lam(t) for t in LAMBDA_CORPUS]


# ---------------------------------------------------------------- random λ-terms

def _min_size(k: int) -> int:
    return 2 if k == 0 else 2 * k - 1


def random_linear_term(rng: random.Random, max_size: int = 25, free: Sequence[str] = ()) -> LamTerm:
    """A random linear term with at most ``max_size`` nodes whose free
    variables are exactly ``free`` (by default none, ``a`` or ``a, b``)."""
    if not free:
        free = ["a", "b"][: rng.randint(0, 2)]
    counter = itertools.count()

    def new_var() -> str:
        return f"x{next(counter)}"

    def split(fv: List[str]) -> Tuple[List[str], List[str]]:
        left: List[str] = []
        right: List[str] = []
        for v in fv:
            (left if rng.random() < 0.5 else right).append(v)
        return left, right

    def gen(fv: List[str], budget: int) -> LamTerm:
        k = len(fv)
        if k == 1 and (budget < 3 or rng.random() < 0.35):
            return Var(fv[0])
        kinds = ["abs", "app", "app", "sub"]
        rng.shuffle(kinds)
        for kind in kinds:
            if kind == "abs" and budget - 1 >= _min_size(k + 1):
                x = new_var()
                return Abs(x, gen(fv + [x], budget - 1))
            if kind in ("app", "sub"):
                left, right = split(fv)
                extra = 1 if kind == "sub" else 0
                lo, hi = _min_size(len(left) + extra), _min_size(len(right))
                if lo + hi > budget - 1:
                    continue
                nl = rng.randint(lo, budget - 1 - hi)
                if kind == "app":
                    return App(gen(left, nl), gen(right, budget - 1 - nl))
                x = new_var()
                return ESub(gen(left + [x], nl), x, gen(right, budget - 1 - nl))
        # the budget is tight: fall back to a shape that always fits
        if k == 1:
            return Var(fv[0])
        if k == 0:
            x = new_var()
            return Abs(x, gen([x], budget - 1))
        return App(Var(fv[0]), gen(fv[1:], budget - 2))

    return gen(list(free), rng.randint(_min_size(len(free)), max(max_size, _min_size(len(free)))))


# ---------------------------------------------------------------- random structures

def _random_shape(rng: random.Random, leaves: Sequence[Structure]) -> Structure:
    nodes = list(leaves)
    rng.shuffle(nodes)
    while len(nodes) > 1:
        k = min(len(nodes), rng.randint(2, 3))
        idx = sorted(rng.sample(range(len(nodes)), k))
        kids = [nodes[i] for i in idx]
        rest = [n for i, n in enumerate(nodes) if i not in idx]
        rest.insert(rng.randint(0, len(rest)), rng.choice((Par, CoPar, Seq))(kids))
        nodes = rest
    return nodes[0]


def random_structure(
    rng: random.Random,
    max_atoms: int = 20,
    max_binders: int = 4,
    names: Sequence[str] = ("a", "b", "c", "d"),
) -> Structure:
    n_atoms = rng.randint(1, max_atoms)
    leaves: List[Structure] = [Atom(rng.choice(names), rng.random() < 0.5) for _ in range(n_atoms)]
    if rng.random() < 0.1:
        leaves.append(ONE)
    out = _random_shape(rng, leaves)
    for _ in range(rng.randint(0, max_binders)):
        out = _wrap_somewhere(rng, out, rng.choice(names))
    return out


def _wrap_somewhere(rng: random.Random, r: Structure, name: str) -> Structure:
    if isinstance(r, (Par, CoPar, Seq)) and rng.random() < 0.6:
        kids = list(r.children)
        i = rng.randrange(len(kids))
        kids[i] = _wrap_somewhere(rng, kids[i], name)
        return type(r)(kids)
    if isinstance(r, Ren) and rng.random() < 0.5:
        return Ren(r.name, _wrap_somewhere(rng, r.body, name))
    return Ren(name, r)


def scramble(rng: random.Random, r: Structure) -> Structure:
    """A random structure congruent to ``r``: children shuffled where order
    does not matter, associativity regrouped, units and vacuous renamings
    added, bound names changed and adjacent binders swapped."""
    if isinstance(r, Atom):
        out: Structure = r
    elif isinstance(r, Ren):
        body = scramble(rng, r.body)
        name = r.name
        if rng.random() < 0.4:
            new = fresh_name(name + "_s", free_names(body) | {name})
            body = subst_atom(body, name, new)
            name = new
        if isinstance(body, Ren) and body.name != name and rng.random() < 0.5:
            out = Ren(body.name, Ren(name, body.body))
        else:
            out = Ren(name, body)
    elif isinstance(r, (Par, CoPar, Seq)):
        kids = [scramble(rng, k) for k in r.children]
        if not isinstance(r, Seq):
            rng.shuffle(kids)
        if len(kids) > 2 and rng.random() < 0.5:
            i = rng.randrange(len(kids) - 1)
            kids[i:i + 2] = [type(r)(kids[i:i + 2])]
        if rng.random() < 0.2:
            kids.insert(rng.randint(0, len(kids)), ONE)
        out = type(r)(kids)
    else:
        out = r
    if rng.random() < 0.1:
        out = Ren(fresh_name("v", free_names(out)), out)
    return out


# ---------------------------------------------------------------- prover goal family

def _set_partitions(items: List[int]) -> Iterator[List[List[int]]]:
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for p in _set_partitions(rest):
        for i in range(len(p)):
            yield p[:i] + [[first] + p[i]] + p[i + 1:]
        yield [[first]] + p


def all_shapes(leaves: Sequence[Structure], _forbid: Optional[type] = None) -> Iterator[Structure]:
    """Every par/copar/seq structure over exactly these leaves (with repeats
    when leaves coincide)."""
    if len(leaves) == 1:
        yield leaves[0]
        return
    for p in _set_partitions(list(range(len(leaves)))):
        if len(p) < 2:
            continue
        blocks = [[leaves[i] for i in b] for b in p]
        for cls in (Par, CoPar, Seq):
            if cls is _forbid:
                continue
            for kids in itertools.product(*[list(all_shapes(b, cls)) for b in blocks]):
                if cls is Seq:
                    for perm in itertools.permutations(kids):
                        yield Seq(list(perm))
                else:
                    yield cls(list(kids))


def _dedupe(items: Iterator[Structure]) -> List[Structure]:
    seen = {}
    for s in items:
        k = ckey(s)
        if k not in seen:
            seen[k] = normalize(s)
    return list(seen.values())


def _multisets(n: int) -> List[List[Atom]]:
    """Atom multisets of size ``n`` over names a, b, c, one per class of
    renaming names and swapping a name's polarity."""
    names = "abc"
    out = []
    seen = set()
    for combo in itertools.combinations_with_replacement(range(6), n):
        counts = [[0, 0] for _ in names]
        for c in combo:
            counts[c // 2][c % 2] += 1
        sig = tuple(sorted((tuple(sorted(c, reverse=True)) for c in counts), reverse=True))
        if sig in seen:
            continue
        seen.add(sig)
        atoms = []
        for i, (pos, neg) in enumerate(sig):
            atoms += [Atom(names[i])] * pos + [Atom(names[i], True)] * neg
        out.append(atoms)
    return out


def _binder_variants(r: Structure, names: Sequence[str]) -> Iterator[Structure]:
    """``r`` with one renaming inserted above any node."""
    for name in names:
        yield from _insert(r, name)


def _insert(r: Structure, name: str) -> Iterator[Structure]:
    yield Ren(name, r)
    if isinstance(r, (Par, CoPar, Seq)):
        for i, k in enumerate(r.children):
            for v in _insert(k, name):
                kids = list(r.children)
                kids[i] = v
                yield type(r)(kids)
    elif isinstance(r, Ren):
        for v in _insert(r.body, name):
            yield Ren(r.name, v)


def prover_family(seed: int = 0, sample: int = 80) -> List[Structure]:
    """Goals of size at most 8 over at most three names:

    * every structure with at most three atoms,
    * every balanced structure with four atoms,
    * each of those with one renaming inserted anywhere, and a seeded 15%
      of them with a second one,
    * a seeded sample of ``sample`` renaming-free six-atom structures over
      a, b, c with each name once per polarity.
    """
    out: List[Structure] = []
    for n in (1, 2, 3):
        for ms in _multisets(n):
            out.extend(all_shapes(ms))
    four = []
    for ms in _multisets(4):
        if all(
            sum(1 for a in ms if a.name == x and not a.neg) == sum(1 for a in ms if a.name == x and a.neg)
            for x in "abc"
        ):
            four.extend(all_shapes(ms))
    four = _dedupe(iter(four))
    out.extend(four)
    one = _dedupe(v for r in four for v in _binder_variants(r, "ab"))
    out.extend(one)
    rng = random.Random(seed)
    out.extend(_dedupe(v for r in one if rng.random() < 0.15 for v in _binder_variants(r, "ab")))
    six = [Atom(x, neg) for x in "abc" for neg in (False, True)]
    out.extend(_dedupe(_random_shape(rng, six) for _ in range(sample)))
    return [g for g in _dedupe(iter(out)) if size(g) <= 8]
