import hypothesis
import hypothesis.strategies as st
import pytest

from banglab import reduction
from banglab.syntax import Bang, Var, enum_terms, gen_term, parse_term
from banglab.typesys import (Arrow, B, Bounds, Derivation, EMPTY_ENV,
                             EMPTY_MULTI, Env, Judgment, Multi, N, TVar, V,
                             args, canonical_nf_derivation, canon_typing,
                             check_derivation, env_sum, multi, nf_shape,
                             parse_type, print_type, typable, typing_pairs,
                             typing_transport_check, typings_enumerate,
                             untypable_certificate, RuleViolation)

p = parse_term
a, b = TVar("a"), TVar("b")


def test_multitype_canonical_order():
    assert multi(Arrow(multi(a), b), multi(a)) == multi(multi(a), Arrow(multi(a), b))
    assert multi(a, a) != multi(a)  # non-idempotent
    assert print_type(multi(Arrow(multi(a), b), multi(a))) == "[[a], [a] -> b]"


def test_type_parse_print():
    assert parse_type("[a] -> [a]") == Arrow(multi(a), multi(a))
    assert parse_type("[]") == EMPTY_MULTI
    for s in ["a", "[a, b] -> c", "[[a] -> b] -> [a] -> b", "[[], [a]]"]:
        ty = parse_type(s)
        assert parse_type(print_type(ty)) == ty


def test_env_sum():
    e = Env.of({"x": multi(a)})
    assert env_sum([e, e]) == Env.of({"x": multi(a, a)})
    assert env_sum([]) == EMPTY_ENV
    assert env_sum([EMPTY_ENV, e]) == e
    assert env_sum([e, Env.of({"y": multi(b)})]).domain() == ("x", "y")
    # empty multitypes are dropped from the domain
    assert Env.of({"x": EMPTY_MULTI}) == EMPTY_ENV


def test_args():
    tau, m = TVar("t"), multi(TVar("m"))
    assert args(B, Arrow(multi(tau), Arrow(m, multi(a)))) == [multi(tau), m]
    assert args(B, multi(a)) == []
    sigma = TVar("s")
    assert args(N, Arrow(multi(sigma), sigma)) == []  # identity type observable
    assert args(N, Arrow(multi(sigma), TVar("r"))) == [multi(sigma)]
    assert args(V, multi(a)) == []


def self_application_derivation():
    m = multi(a)
    arr = Arrow(m, b)
    vf = Derivation(B, "var", Judgment(Env.of({"x": multi(arr)}), Var("x"), arr))
    va = Derivation(B, "var", Judgment(Env.of({"x": multi(m)}), Var("x"), m))
    return Derivation(B, "app",
                      Judgment(Env.of({"x": multi(arr, m)}), p("x x"), b), (vf, va))


def test_self_application_derivation_checks():
    assert check_derivation(self_application_derivation()) is None


def test_boxed_identity_derivation_checks():
    vd = Derivation(B, "var", Judgment(Env.of({"v": multi(a)}), Var("v"), a))
    bd = Derivation(B, "bang", Judgment(Env.of({"v": multi(a)}), Bang(Var("v")),
                                        multi(a)), (vd,))
    ad = Derivation(B, "abs", Judgment(EMPTY_ENV, p("\\x.!x"),
                                       Arrow(multi(a), multi(a))), (bd,), binder="v")
    assert check_derivation(ad) is None


def test_corrupted_der_arity_rejected():
    inner = Derivation(B, "var", Judgment(Env.of({"x": multi(multi(a, a))}),
                                          Var("x"), multi(a, a)))
    bad = Derivation(B, "der", Judgment(Env.of({"x": multi(multi(a, a))}),
                                        p("der x"), a), (inner,))
    report = check_derivation(bad)
    assert report is not None and "singleton" in report


def test_wrong_env_sum_rejected():
    d = self_application_derivation()
    bad = Derivation(B, "app", Judgment(Env.of({"x": multi(Arrow(multi(a), b))}),
                                        p("x x"), b), d.premises)
    assert check_derivation(bad) is not None


def test_enumeration_sound_and_two_resource_shaped():
    ds = list(typings_enumerate(B, p("x x")))
    assert ds
    for d in ds:
        assert check_derivation(d) is None
        env = d.conclusion.env
        assert env.domain() == ("x",)
        mt = env.get("x")
        assert len(mt) == 2
        arrows = [e for e in mt.elems if isinstance(e, Arrow)]
        assert any(e.dom == other for e in arrows for other in mt.elems
                   if other != e or mt.elems.count(e) > 1)


def test_enumeration_relevance():
    # no weakening anywhere: each node's env is the rule-computed sum
    for s in ["x x", "\\x.!x", "der !x", "(\\x.x) !y", "x[x<-!y]"]:
        for d in typings_enumerate(B, p(s)):
            assert check_derivation(d) is None


def test_bang_always_empty_typable():
    ds = list(typings_enumerate(B, p("!u")))
    assert any(d.conclusion.typing == (EMPTY_ENV, EMPTY_MULTI) for d in ds)
    # the banged subterm may itself be untypable
    assert (EMPTY_ENV, EMPTY_MULTI) in typing_pairs(B, Bang(p("!s u")))


def test_omega_has_no_typings():
    from banglab.syntax import OMEGA

    assert next(typings_enumerate(B, OMEGA), None) is None


def test_boxed_identity_arrow_typing_found():
    target = (EMPTY_ENV, Arrow(multi(a), multi(a)))
    assert any(d.conclusion.typing == target for d in typings_enumerate(B, p("\\x.!x")))


def test_n_system_identity():
    # the identity receives [[a] -> a] -> [a] -> a in the CBN system
    arr = Arrow(multi(a), a)
    target = canon_typing((EMPTY_ENV, Arrow(multi(arr), arr)))
    assert any(canon_typing(d.conclusion.typing) == target
               for d in typings_enumerate(N, p("\\x.x")))


def test_v_system_abs_empty_family():
    # any abstraction types with the empty multitype, body untyped
    ds = list(typings_enumerate(V, p("\\x.x x")))
    assert any(d.conclusion.typing == (EMPTY_ENV, EMPTY_MULTI) for d in ds)


def test_v_var_whole_multitype():
    assert (Env.of({"x": multi(a, b)}), multi(a, b)) in typing_pairs(V, Var("x"))
    assert (EMPTY_ENV, EMPTY_MULTI) in typing_pairs(V, Var("x"))


def test_typable():
    assert typable(p("x x")) == "yes"
    assert typable(p("!s u")) == "no"
    from banglab.syntax import OMEGA

    assert typable(OMEGA, fuel=100) == "unknown"


def test_typable_agrees_with_enumeration_small():
    for t in enum_terms(4):
        verdict = typable(t, 100)
        if verdict == "yes":
            out = reduction.normalize(t, reduction.SURFACE, 100)
            assert check_derivation(canonical_nf_derivation(out.term)) is None
        elif verdict == "no":
            assert next(typings_enumerate(B, t), None) is None


def test_untypable_certificate_sound():
    for t in enum_terms(4):
        if untypable_certificate(t):
            assert typable(t, 100) != "yes"
            assert next(typings_enumerate(B, t), None) is None


def test_transport_examples():
    assert typing_transport_check(p("der !x"), Var("x"))
    assert typing_transport_check(p("(\\z.z) !!u"), p("z[z<-!!u]"))
    assert typing_transport_check(Var("x"), Var("x"))


@hypothesis.given(st.integers(0, 400))
@hypothesis.settings(max_examples=30, deadline=None)
def test_transport_sampled(seed):
    t = gen_term(seed, 4 + seed % 5, "bang")
    if typable(t, 100) != "yes":
        return
    for u in reduction.reducts(t, reduction.FULL):
        assert typing_transport_check(t, u) or typing_transport_check(
            t, u, Bounds(card=3, pool=2, depth=3))


def test_nf_shape():
    assert nf_shape(EMPTY_MULTI, p("!u")) == "must-bang"
    d = next(d for d in typings_enumerate(B, p("\\x.!x"))
             if d.conclusion.typing == (EMPTY_ENV, Arrow(multi(a), multi(a))))
    assert nf_shape(Arrow(multi(a), multi(a)), p("\\x.!x"), d) == "must-abs"


def test_nf_shape_rejects_fake_evidence():
    fake = Derivation(B, "bang", Judgment(EMPTY_ENV, p("\\x.x"), EMPTY_MULTI))
    with pytest.raises(RuleViolation):
        nf_shape(EMPTY_MULTI, p("\\x.x"), fake)
    with pytest.raises(RuleViolation):
        nf_shape(EMPTY_MULTI, p("\\x.x"))
