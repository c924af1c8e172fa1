import json

import pytest

from seqren.imll import (
    Ax,
    Cut,
    ImllError,
    Lolli,
    LolliIntro,
    Tensor,
    TensorIntro,
    Var,
    axiom_premise,
    boundary_ok,
    compile_proof,
    embed_formula,
    embed_sequent,
    parse_formula,
    parse_sequent,
    print_formula,
    proof_from_json,
    proof_to_json,
)
from seqren.rules import SBVR, check_derivation
from seqren.structure import equiv, parse_structure

F, P = parse_formula, parse_structure
a, b, c = Var("a"), Var("b"), Var("c")


def test_formula_syntax():
    assert F("a -o b -o c") == Lolli(a, Lolli(b, c))
    assert F("a * b * c") == Tensor(Tensor(a, b), c)
    assert F("a * b -o c") == Lolli(Tensor(a, b), c)
    assert F("(a -o b) * c") == Tensor(Lolli(a, b), c)
    for text in ("a -o b -o c", "(a -o b) * c", "a * (b * c)"):
        assert F(print_formula(F(text))) == F(text)
    with pytest.raises(ImllError):
        F("a -o")


def test_sequent_syntax():
    s = parse_sequent("a, b -o c |- c")
    assert s.context == (a, Lolli(b, c)) and s.goal == c
    assert parse_sequent("|- a").context == ()


def test_embed_formula_rows():
    assert embed_formula(F("a -o b")) == P("[~a;b]")
    assert embed_formula(F("a * b")) == P("(a;b)")
    assert embed_formula(a) == P("a")


def test_embed_sequent_rows():
    assert equiv(embed_sequent([a], a), P("<~a;a>"))
    assert equiv(embed_sequent([], F("a -o a")), P("[~a;a]"))
    assert equiv(embed_sequent([a, b], F("a * b")), P("<(~a;~b);(a;b)>"))


def test_axiom_compiles_to_empty_derivation():
    d = compile_proof(Ax(F("a -o b")))
    assert d.steps == () and equiv(d.conclusion, P("<(a;~b);[~a;b]>"))


def test_lolli_over_axiom():
    p = LolliIntro(Ax(a), a)
    d = compile_proof(p)
    assert equiv(d.conclusion, P("[~a;a]")) and equiv(d.premise, P("<~a;a>"))
    assert check_derivation(d, SBVR) and boundary_ok(p, d)


def test_tensor_of_axioms():
    p = TensorIntro(Ax(a), Ax(b))
    d = compile_proof(p)
    assert [s.rule for s in d.steps] == ["q_up"]
    assert equiv(d.premise, P("(<~a;a>;<~b;b>)"))
    assert check_derivation(d, SBVR) and boundary_ok(p, d)


def test_cut_instance():
    # a |- a  cut against  a, b |- a * b  gives  a, b |- a * b
    p = Cut(Ax(a), TensorIntro(Ax(a), Ax(b)), a)
    d = compile_proof(p)
    assert "ai_up" in d.rules_used()
    assert check_derivation(d, SBVR) and boundary_ok(p, d)
    assert equiv(d.premise, axiom_premise(p))


def test_cut_free_proofs_avoid_atomic_cut():
    p = LolliIntro(LolliIntro(TensorIntro(Ax(a), Ax(F("b -o c"))), a), F("b -o c"))
    d = compile_proof(p)
    assert "ai_up" not in d.rules_used()
    assert check_derivation(d, SBVR) and boundary_ok(p, d)


def test_discharge_by_index():
    p = LolliIntro(TensorIntro(Ax(a), Ax(a)), a, index=1)
    d = compile_proof(p)
    assert check_derivation(d, SBVR) and boundary_ok(p, d)
    with pytest.raises(ImllError):
        compile_proof(LolliIntro(TensorIntro(Ax(a), Ax(b)), a, index=1))


def test_json_roundtrip():
    doc = {
        "rule": "lolli",
        "discharge": "a",
        "premise": {"rule": "tensor", "left": {"rule": "ax", "formula": "a"}, "right": {"rule": "ax", "formula": "b"}},
        "sequent": "b |- a -o a * b",
    }
    p = proof_from_json(json.dumps(doc))
    assert proof_from_json(proof_to_json(p)) == p


@pytest.mark.parametrize(
    "doc",
    [
        {"formula": "a"},
        {"rule": "weaken", "formula": "a"},
        {"rule": "tensor", "left": {"rule": "ax", "formula": "a"}},
        {"rule": "ax", "formula": "a", "sequent": "b |- b"},
        {"rule": "cut", "formula": "b", "left": {"rule": "ax", "formula": "a"}, "right": {"rule": "ax", "formula": "b"}},
    ],
)
def test_json_errors(doc):
    with pytest.raises(ImllError):
        proof_from_json(doc)
