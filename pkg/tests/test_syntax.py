import hypothesis
import hypothesis.strategies as st
import pytest

from banglab.syntax import (Abs, App, Bang, Ctx, Der, Sub, Var, alpha_eq,
                            enum_terms, free_vars, gen_term, lam, esub,
                            match_list_bang, msubst, parse_context,
                            parse_term, plug, print_term, subterm_at,
                            term_from_json, term_to_json, term_size,
                            ParseError, I, DELTA, OMEGA)

p = parse_term


def test_parse_delta():
    assert p("\\x. x !x") == lam("x", App(Var("x"), Bang(Var("x")))) == DELTA


def test_parse_atom():
    assert p("x") == Var("x")


def test_parse_distance_example():
    t = p("(\\x.x)[y<-w] !z")
    assert t == App(esub("y", lam("x", Var("x")), Var("w")), Bang(Var("z")))


def test_parse_errors_have_position():
    with pytest.raises(ParseError) as e:
        p("\\x.")
    assert e.value.line == 1
    with pytest.raises(ParseError):
        p("x[<-u]")
    # open terms are fine
    assert p("y z") == App(Var("y"), Var("z"))


def test_print_examples():
    assert print_term(Bang(Var("y"))) == "!y"
    assert print_term(Der(Bang(Var("x")))) == "der !x"
    assert print_term(OMEGA) == "(\\x. x !x) !(\\x. x !x)"


def test_print_parse_roundtrip_corpus():
    for s in ["x", "\\x. x !x", "(\\x.x)[y<-w] !z", "der (x y)", "!x[y<-z]",
              "x der y", "(\\x.\\y.x y) (der !z)", "x[x<-y[y<-!z]]"]:
        t = p(s)
        assert p(print_term(t)) == t


def test_alpha_eq():
    assert alpha_eq(p("\\x.x"), p("\\y.y"))
    assert alpha_eq(p("\\x.x y"), p("\\z.z y"))
    assert not alpha_eq(p("\\x.x"), p("\\x.y"))


def test_alpha_classes_hashable():
    assert len({p("\\x.x"), p("\\y.y"), p("\\x.y")}) == 2


def test_free_vars():
    assert free_vars(p("\\x.x !x")) == frozenset()
    assert free_vars(p("x[x<-!y]")) == {"y"}
    assert free_vars(p("x !x")) == {"x"}
    # fv(t[x<-u]) = fv(u) u (fv(t) minus x)
    assert free_vars(p("(x y)[x<-z]")) == {"y", "z"}


def test_msubst():
    assert msubst(p("x !x"), "x", I) == p("(\\z.z) !(\\z.z)")
    assert msubst(p("y[y<-x]"), "x", p("!z")) == p("y[y<-!z]")


def test_msubst_capture_avoided():
    # \y.x with x := y must not capture
    t = msubst(p("\\y.x"), "x", Var("y"))
    assert alpha_eq(t, Abs("w", Var("y")))
    assert free_vars(t) == {"y"}


def test_msubst_identity_when_not_free():
    t = p("\\x.x !y")
    assert msubst(t, "z", OMEGA) == t


def test_plug():
    assert plug(parse_context("[] !y"), I) == p("(\\z.z) !y")
    assert plug(parse_context("der []"), p("!t")) == p("der !t")


def test_plug_captures():
    c = parse_context("(\\x.[]) s", "testing")
    assert plug(c, Var("x")) == p("(\\x.x) s")


def test_plug_testing_hole_in_function_position():
    c = parse_context("(\\x.[] u) v", "full")
    pos = c.hole_position()
    t = plug(c, Var("q"))
    assert subterm_at(t, pos) == Var("q")
    # the hole's image sits in function position of an application
    parent = subterm_at(t, pos[:-1])
    assert isinstance(parent, App) and pos[-1] == 0


def test_testing_context_grammar_enforced():
    parse_context("[] s", "testing")
    parse_context("(\\x.[]) s", "testing")
    with pytest.raises(ValueError):
        parse_context("x []", "testing")
    with pytest.raises(ValueError):
        parse_context("\\x.[]", "testing")
    with pytest.raises(ValueError):
        parse_context("![]", "surface")
    parse_context("![]", "full")


def test_match_list_bang():
    c, s = match_list_bang(p("(!s)[y<-w]"))
    assert str(c) == "[][y<-w]" and s == Var("s")
    assert match_list_bang(p("\\x.!x")) is None
    c, s = match_list_bang(p("!s"))
    assert c.frames == () and s == Var("s")


def test_match_list_bang_roundtrip():
    for src in ["(!s)[y<-w]", "!s", "(!y)[y<-w]", "((!x)[x<-a])[x<-b]",
                "(!(x y))[x<-a][y<-b]"]:
        t = p(src)
        c, s = match_list_bang(t)
        assert plug(c, Bang(s)) == t


def test_match_list_bang_recovers_generated_contexts():
    from banglab.syntax import LIST, SubBody

    for seed in range(40):
        args = [gen_term(seed * 3 + k, 2 + (seed + k) % 3, "bang") for k in range(3)]
        names = ["u1", "u2", "u3"]
        layers = 1 + seed % 3
        L = Ctx(LIST, tuple(SubBody(names[i], args[i]) for i in range(layers)))
        s = gen_term(seed + 900, 3, "bang")
        got = match_list_bang(plug(L, Bang(s)))
        assert got is not None
        L2, s2 = got
        assert s2 == s and L2.frames == L.frames


def test_gen_term_deterministic():
    assert gen_term(1, 3) == gen_term(1, 3)
    assert gen_term(1, 3, "raw") == gen_term(1, 3, "raw")


def test_gen_term_size_one_is_variable():
    for seed in range(10):
        assert isinstance(gen_term(seed, 1), Var)


def test_gen_term_images():
    from banglab import cbnv

    t = gen_term(7, 10, "cbn-image")
    assert cbnv.in_image(cbnv.CBN, t)
    t = gen_term(7, 10, "cbv-image")
    assert cbnv.in_image(cbnv.CBV, t)


def test_enum_terms_small():
    assert list(enum_terms(0)) == []
    assert set(enum_terms(1, ("x",))) == {Var("x")}
    got = {print_term(t) for t in enum_terms(2, ("x",))}
    assert got == {"x", "\\x. x", "\\x1. x", "!x", "der x"}


def test_enum_terms_unique_mod_alpha():
    seen = list(enum_terms(4))
    assert len(seen) == len(set(seen))
    assert all(term_size(t) <= 4 for t in seen)


def test_json_roundtrip():
    for s in ["\\x. x !x", "(\\x.x)[y<-w] !z", "der !x"]:
        t = p(s)
        assert term_from_json(term_to_json(t)) == t


@hypothesis.given(st.integers(0, 10_000), st.integers(1, 12))
def test_print_parse_roundtrip_generated(seed, size):
    t = gen_term(seed, size, "raw")
    assert p(print_term(t)) == t


@hypothesis.given(st.integers(0, 2_000), st.integers(1, 10))
def test_msubst_fresh_var_is_identity(seed, size):
    t = gen_term(seed, size, "bang")
    assert msubst(t, "zz_unused", I) == t
