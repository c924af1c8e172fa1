import pytest
from hypothesis import given

from seqren.lam import (
    Abs,
    App,
    ESub,
    LamSyntaxError,
    LinearityError,
    RedexSite,
    StepError,
    Var,
    alpha_eq,
    check_linear,
    find_redexes,
    free_vars,
    linearity_diagnostic,
    parse_lam,
    print_lam,
    reduce,
    step,
    term_size,
    tidy_names,
)

from strategies import linear_terms

L = parse_lam


def test_parse_shapes():
    assert L(r"\x. x") == Abs("x", Var("x"))
    assert isinstance(L(r"(\x.x) y"), App)
    assert L("m[x := p]") == ESub(Var("m"), "x", Var("p"))
    # application is left associative and binds tighter than abstraction
    assert L(r"\x. f x y") == Abs("x", App(App(Var("f"), Var("x")), Var("y")))


@pytest.mark.parametrize("bad", [r"(\x. ", r"\. x", "x[x :=", "()", "x )"])
def test_syntax_errors(bad):
    with pytest.raises(LamSyntaxError) as e:
        L(bad)
    assert e.value.line == 1 and e.value.col >= 1


def test_linearity_examples():
    assert check_linear(L(r"\x.x"))
    assert not check_linear(L(r"\x.\y.x"))
    assert "y" in linearity_diagnostic(L(r"\x.\y.x"))
    assert not check_linear(L(r"\x. x x"))
    assert not check_linear(L("x y[y := x]"))
    assert not check_linear(L("f f"))


def test_find_redexes_examples():
    assert find_redexes(L(r"(\x.x) y")) == [RedexSite((), "beta_intro")]
    assert find_redexes(L("x[x := y]")) == [RedexSite((), "sub_var")]
    assert find_redexes(L("y[x := p]")) == []


def test_reduce_identity_application():
    tr = reduce(L(r"(\x.x) y"))
    assert [print_lam(t) for t in tr.terms()] == [r"(\x. x) y", "x[x := y]", "y"]
    assert tr.complete


def test_single_clause_steps():
    m = L(r"(\y. y x)[x := p]")
    assert [s.rule for s in find_redexes(m)] == ["sub_abs"]
    assert alpha_eq(step(m, find_redexes(m)[0]), L(r"\y. (y x)[x := p]"))
    m = L("(f x)[x := p]")
    assert [s.rule for s in find_redexes(m)] == ["sub_app_right"]
    assert step(m, find_redexes(m)[0]) == L("f x[x := p]")
    m = L("(x f)[x := p]")
    assert step(m, find_redexes(m)[0]) == L("x[x := p] f")


def test_sub_abs_avoids_capture():
    m = ESub(Abs("y", App(Var("y"), Var("x"))), "x", Var("y"))
    out = step(m, find_redexes(m)[0])
    assert free_vars(out) == {"y"}
    assert alpha_eq(out, L(r"\z. (z x)[x := y]"))


def test_strategies_and_scripts():
    m = L(r"(\x.x) ((\y.y) a)")
    lo = reduce(m, "leftmost_outermost")
    ri = reduce(m, "rightmost_innermost")
    assert lo.steps[0][0].path == () and ri.steps[0][0].path == (1,)
    assert lo.end == ri.end == Var("a")
    tr = reduce(m, "scripted", script=[RedexSite((1,), "beta_intro")])
    assert len(tr.steps) == 1
    with pytest.raises(StepError):
        reduce(m, "scripted", script=[RedexSite((0,), "beta_intro")])


def test_max_steps_and_linearity_guard():
    tr = reduce(L(r"(\x.x) y"), max_steps=1)
    assert len(tr.steps) == 1 and not tr.complete
    with pytest.raises(LinearityError):
        reduce(L(r"\x. x x"))


def test_tidy_names_and_alpha():
    assert print_lam(tidy_names(L(r"\q.\r. r q"))) == r"\v0. \v1. v1 v0"
    assert alpha_eq(L(r"\x.x"), L(r"\y.y"))
    assert not alpha_eq(L(r"\x. f x"), L(r"\x. g x"))


@given(linear_terms(max_size=25))
def test_print_parse_roundtrip(m):
    assert L(print_lam(m)) == m


@given(linear_terms(max_size=25))
def test_subject_reduction_and_free_variables(m):
    assert check_linear(m)
    for site in find_redexes(m):
        n = step(m, site)
        assert check_linear(n)
        assert free_vars(n) == free_vars(m)


@given(linear_terms(max_size=40))
def test_normalizes_within_default_bound(m):
    tr = reduce(m, max_steps=4 * term_size(m) ** 2)
    assert tr.complete
