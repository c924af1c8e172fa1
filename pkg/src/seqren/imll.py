"""Intuitionistic multiplicative linear logic: formulas, proof trees, the
embedding into structures and compilation of proofs into derivations."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

from .derived import gen_interaction_up, mixp, pmix
from .rules import Derivation, chain, compose, empty, normalized, plug_in_context, single
from .structure import HOLE, Atom, Structure, copar, equiv, negate, par, seq


class ImllError(ValueError):
    pass


# ---------------------------------------------------------------- formulas

@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Tensor:
    left: "ImllFormula"
    right: "ImllFormula"


@dataclass(frozen=True)
class Lolli:
    left: "ImllFormula"
    right: "ImllFormula"


ImllFormula = Union[Var, Tensor, Lolli]

_TOKEN = re.compile(r"\s*(?:(-o)|([A-Za-z_][A-Za-z0-9_]*)|(\S))")


def _tokens(text: str) -> List[Tuple[str, int]]:
    out, pos = [], 0
    while True:
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        tok = m.group(1) or m.group(2) or m.group(3)
        out.append((tok, m.start(m.lastindex)))
        pos = m.end()
    if text[pos:].strip():
        raise ImllError(f"unexpected input at {pos}: {text[pos:]!r}")
    return out


def parse_formula(text: str) -> ImllFormula:
    """``a * b -o c`` parses as ``(a * b) -o c``; ``-o`` groups to the right."""
    toks = _tokens(text)
    i = 0

    def peek() -> Optional[str]:
        return toks[i][0] if i < len(toks) else None

    def take(want: Optional[str] = None) -> str:
        nonlocal i
        if i >= len(toks):
            raise ImllError(f"unexpected end of formula {text!r}")
        tok, pos = toks[i]
        if want is not None and tok != want:
            raise ImllError(f"expected {want!r} at {pos}, found {tok!r}")
        i += 1
        return tok

    def atom() -> ImllFormula:
        tok = take()
        if tok == "(":
            f = lolli()
            take(")")
            return f
        if re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", tok):
            return Var(tok)
        raise ImllError(f"unexpected {tok!r} in formula {text!r}")

    def tensor() -> ImllFormula:
        f = atom()
        while peek() == "*":
            take()
            f = Tensor(f, atom())
        return f

    def lolli() -> ImllFormula:
        f = tensor()
        if peek() == "-o":
            take()
            return Lolli(f, lolli())
        return f

    f = lolli()
    if i != len(toks):
        raise ImllError(f"trailing input in formula {text!r}: {toks[i][0]!r}")
    return f


def print_formula(f: ImllFormula) -> str:
    if isinstance(f, Var):
        return f.name
    if isinstance(f, Tensor):
        left = print_formula(f.left)
        right = print_formula(f.right)
        if isinstance(f.left, Lolli):
            left = f"({left})"
        if not isinstance(f.right, Var):
            right = f"({right})"
        return f"{left} * {right}"
    left = print_formula(f.left)
    if isinstance(f.left, Lolli):
        left = f"({left})"
    return f"{left} -o {print_formula(f.right)}"


def _as_formula(f: Union[str, ImllFormula]) -> ImllFormula:
    return parse_formula(f) if isinstance(f, str) else f


# ---------------------------------------------------------------- sequents and proofs

@dataclass(frozen=True)
class Sequent:
    context: Tuple[ImllFormula, ...]
    goal: ImllFormula

    def __str__(self) -> str:
        ctx = ", ".join(print_formula(f) for f in self.context)
        return f"{ctx} |- {print_formula(self.goal)}".lstrip()

    def same_as(self, other: "Sequent") -> bool:
        return self.goal == other.goal and sorted(map(repr, self.context)) == sorted(map(repr, other.context))


def parse_sequent(text: str) -> Sequent:
    if "|-" not in text:
        raise ImllError(f"sequent needs '|-': {text!r}")
    lhs, rhs = text.split("|-", 1)
    ctx = _split_top(lhs) if lhs.strip() else []
    return Sequent(tuple(parse_formula(c) for c in ctx), parse_formula(rhs))


def _split_top(text: str) -> List[str]:
    parts, depth, cur = [], 0, ""
    for ch in text:
        if ch == "," and depth == 0:
            parts.append(cur)
            cur = ""
            continue
        depth += (ch == "(") - (ch == ")")
        cur += ch
    parts.append(cur)
    return parts


class ImllProof:
    sequent: Sequent


@dataclass(frozen=True)
class Ax(ImllProof):
    formula: ImllFormula

    @property
    def sequent(self) -> Sequent:
        return Sequent((self.formula,), self.formula)


@dataclass(frozen=True)
class TensorIntro(ImllProof):
    left: ImllProof
    right: ImllProof

    @property
    def sequent(self) -> Sequent:
        l, r = self.left.sequent, self.right.sequent
        return Sequent(l.context + r.context, Tensor(l.goal, r.goal))


def _occurrence(ctx: Sequence[ImllFormula], f: ImllFormula, index: Optional[int], what: str) -> int:
    if index is not None:
        if not 0 <= index < len(ctx) or ctx[index] != f:
            raise ImllError(f"{what}: position {index} of the context does not hold {print_formula(f)}")
        return index
    for i, g in enumerate(ctx):
        if g == f:
            return i
    raise ImllError(f"{what}: {print_formula(f)} is not in the context")


@dataclass(frozen=True)
class LolliIntro(ImllProof):
    sub: ImllProof
    discharged: ImllFormula
    index: Optional[int] = None

    @property
    def position(self) -> int:
        return _occurrence(self.sub.sequent.context, self.discharged, self.index, "lolli")

    @property
    def sequent(self) -> Sequent:
        s = self.sub.sequent
        i = self.position
        return Sequent(s.context[:i] + s.context[i + 1:], Lolli(self.discharged, s.goal))


@dataclass(frozen=True)
class Cut(ImllProof):
    left: ImllProof
    right: ImllProof
    formula: ImllFormula
    index: Optional[int] = None

    @property
    def position(self) -> int:
        return _occurrence(self.right.sequent.context, self.formula, self.index, "cut")

    @property
    def sequent(self) -> Sequent:
        l, r = self.left.sequent, self.right.sequent
        if l.goal != self.formula:
            raise ImllError(
                f"cut: left proof concludes {print_formula(l.goal)}, not {print_formula(self.formula)}"
            )
        i = self.position
        return Sequent(l.context + r.context[:i] + r.context[i + 1:], r.goal)


def validate(p: ImllProof) -> Sequent:
    """Check every node and return the root sequent."""
    for child in _children(p):
        validate(child)
    return p.sequent


def _children(p: ImllProof) -> List[ImllProof]:
    if isinstance(p, (TensorIntro, Cut)):
        return [p.left, p.right]
    if isinstance(p, LolliIntro):
        return [p.sub]
    return []


def axioms(p: ImllProof) -> List[ImllFormula]:
    """Axiom formulas, left to right."""
    if isinstance(p, Ax):
        return [p.formula]
    return [f for c in _children(p) for f in axioms(c)]


# ---------------------------------------------------------------- JSON format

def proof_from_json(data: Union[str, dict]) -> ImllProof:
    """Nodes are objects with a ``rule`` field:

    * ``{"rule": "ax", "formula": F}``
    * ``{"rule": "tensor", "left": P, "right": P}``
    * ``{"rule": "lolli", "discharge": F, "premise": P, "index"?: n}``
    * ``{"rule": "cut", "formula": F, "left": P, "right": P, "index"?: n}``

    Any node may carry ``"sequent": "A, B |- C"``, which is checked.
    """
    if isinstance(data, str):
        data = json.loads(data)
    if not isinstance(data, dict) or "rule" not in data:
        raise ImllError(f"proof node must be an object with a 'rule' field: {data!r}")
    rule = data["rule"]
    try:
        if rule == "ax":
            node: ImllProof = Ax(_as_formula(data["formula"]))
        elif rule == "tensor":
            node = TensorIntro(proof_from_json(data["left"]), proof_from_json(data["right"]))
        elif rule == "lolli":
            node = LolliIntro(proof_from_json(data["premise"]), _as_formula(data["discharge"]), data.get("index"))
        elif rule == "cut":
            node = Cut(
                proof_from_json(data["left"]), proof_from_json(data["right"]),
                _as_formula(data["formula"]), data.get("index"),
            )
        else:
            raise ImllError(f"unknown rule {rule!r}")
    except KeyError as e:
        raise ImllError(f"{rule} node is missing field {e.args[0]!r}") from None
    got = validate(node)
    if "sequent" in data and not got.same_as(parse_sequent(data["sequent"])):
        raise ImllError(f"{rule} node claims {data['sequent']!r} but derives {got}")
    return node


def proof_to_json(p: ImllProof) -> dict:
    out: dict
    if isinstance(p, Ax):
        out = {"rule": "ax", "formula": print_formula(p.formula)}
    elif isinstance(p, TensorIntro):
        out = {"rule": "tensor", "left": proof_to_json(p.left), "right": proof_to_json(p.right)}
    elif isinstance(p, LolliIntro):
        out = {"rule": "lolli", "discharge": print_formula(p.discharged), "premise": proof_to_json(p.sub)}
        if p.index is not None:
            out["index"] = p.index
    elif isinstance(p, Cut):
        out = {"rule": "cut", "formula": print_formula(p.formula),
               "left": proof_to_json(p.left), "right": proof_to_json(p.right)}
        if p.index is not None:
            out["index"] = p.index
    else:
        raise TypeError(p)
    out["sequent"] = str(p.sequent)
    return out


# ---------------------------------------------------------------- embedding

def embed_formula(f: ImllFormula) -> Structure:
    if isinstance(f, Var):
        return Atom(f.name)
    if isinstance(f, Tensor):
        return copar(embed_formula(f.left), embed_formula(f.right))
    if isinstance(f, Lolli):
        return par(negate(embed_formula(f.left)), embed_formula(f.right))
    raise TypeError(f)


def _embed_context(gamma: Sequence[ImllFormula]) -> Structure:
    return copar(*[negate(embed_formula(g)) for g in gamma])


def embed_sequent(gamma: Sequence[ImllFormula], a: ImllFormula) -> Structure:
    return seq(_embed_context(gamma), embed_formula(a))


def forwarder(f: ImllFormula) -> Structure:
    return embed_sequent([f], f)


def axiom_premise(p: ImllProof) -> Structure:
    return copar(*[forwarder(f) for f in axioms(p)])


# ---------------------------------------------------------------- compilation

def compile_proof(p: ImllProof) -> Derivation:
    """Derivation from the copar of axiom forwarders up to the embedded root
    sequent.  Only a cut introduces ai_up."""
    validate(p)
    return normalized(_compile(p))


def _compile(p: ImllProof) -> Derivation:
    s = p.sequent
    concl = embed_sequent(s.context, s.goal)
    if isinstance(p, Ax):
        return empty(concl)

    if isinstance(p, TensorIntro):
        l, r = p.left.sequent, p.right.sequent
        x, y = _embed_context(l.context), _embed_context(r.context)
        a, b = embed_formula(l.goal), embed_formula(r.goal)
        dl, dr = _compile(p.left), _compile(p.right)
        top = single("q_up", concl, copar(seq(x, a), seq(y, b)))
        return chain(
            top,
            plug_in_context(dl, copar(HOLE, seq(y, b))),
            plug_in_context(dr, copar(dl.premise, HOLE)),
        )

    if isinstance(p, LolliIntro):
        sub = p.sub.sequent
        i = p.position
        x = _embed_context(sub.context[:i] + sub.context[i + 1:])
        na = negate(embed_formula(p.discharged))
        b = embed_formula(sub.goal)
        d = compose(
            plug_in_context(pmix(na, b), seq(x, HOLE)),
            plug_in_context(mixp(x, na), seq(HOLE, b)),
        )
        return compose(d, _compile(p.sub))

    if isinstance(p, Cut):
        l, r = p.left.sequent, p.right.sequent
        i = p.position
        x = _embed_context(l.context)
        y = _embed_context(r.context[:i] + r.context[i + 1:])
        a = embed_formula(p.formula)
        na = negate(a)
        b = embed_formula(r.goal)
        xa = seq(x, a)
        right_goal = seq(copar(na, y), b)
        interact = plug_in_context(gen_interaction_up(a), seq(copar(seq(x, HOLE), y), b))
        s1 = seq(copar(na, xa, y), b)
        s2 = copar(xa, right_goal)
        dl, dr = _compile(p.left), _compile(p.right)
        return chain(
            interact,
            single("q_up", interact.premise, s1),
            single("q_up", s1, s2),
            plug_in_context(dl, copar(HOLE, right_goal)),
            plug_in_context(dr, copar(dl.premise, HOLE)),
        )
    raise TypeError(p)


def boundary_ok(p: ImllProof, d: Derivation) -> bool:
    s = p.sequent
    return equiv(d.conclusion, embed_sequent(s.context, s.goal)) and equiv(d.premise, axiom_premise(p))


__all__ = [
    "Ax", "Cut", "ImllError", "ImllFormula", "ImllProof", "Lolli", "LolliIntro", "Sequent",
    "Tensor", "TensorIntro", "Var", "axiom_premise", "axioms", "boundary_ok", "compile_proof",
    "embed_formula", "embed_sequent", "forwarder", "parse_formula", "parse_sequent",
    "print_formula", "proof_from_json", "proof_to_json", "validate",
]
