import pytest

from banglab.inhabitation import (InhBounds, InhResult, inhabit, inhabit_env,
                                  inhabit_multitype)
from banglab.inhabitation import testable as is_testable
from banglab.syntax import Bang, alpha_eq, parse_term
from banglab.typesys import (Arrow, B, EMPTY_ENV, EMPTY_MULTI, Env, Multi, N,
                             TVar, V, check_derivation, multi, typing_pairs)

p = parse_term
a, b = TVar("a"), TVar("b")


def test_empty_multitype_inhabited():
    r = inhabit(B, EMPTY_MULTI)
    assert r.inhabited and r.witness == Bang(p("\\z.z"))


def test_identity_arrow_inhabited():
    r = inhabit(B, Arrow(multi(a), multi(a)))
    assert r.inhabited and alpha_eq(r.witness, p("\\x.!x"))
    assert r.derivation is not None and check_derivation(r.derivation) is None


def test_arrow_multitype_conflict_not_inhabited():
    r = inhabit(B, multi(Arrow(multi(a), b), multi(a)))
    assert r.status == "not-inhabited"
    assert "abstraction" in r.reason and "bang" in r.reason


def test_type_variable_not_inhabited():
    assert inhabit(B, a).status == "not-inhabited"
    assert inhabit(B, multi(a)).status == "not-inhabited"


def test_nested_empty_inhabited():
    r = inhabit(B, multi(EMPTY_MULTI))
    assert r.inhabited and r.witness == p("!!(\\z.z)")
    assert inhabit(B, multi(EMPTY_MULTI, EMPTY_MULTI)).inhabited


def test_witnesses_recheck_closed():
    goals = [EMPTY_MULTI, Arrow(multi(a), multi(a)), multi(EMPTY_MULTI),
             Arrow(EMPTY_MULTI, EMPTY_MULTI),
             Arrow(multi(a), Arrow(multi(b), multi(a, b)))]
    for g in goals:
        r = inhabit(B, g)
        if r.inhabited:
            assert (EMPTY_ENV, g) in typing_pairs(B, r.witness)


def test_monotone_in_bounds():
    small = InhBounds(max_size=3)
    big = InhBounds(max_size=8)
    goals = [EMPTY_MULTI, Arrow(multi(a), multi(a)), multi(a),
             multi(Arrow(multi(a), b), multi(a))]
    for g in goals:
        rs, rb = inhabit(B, g, small), inhabit(B, g, big)
        if rs.inhabited:
            assert rb.inhabited
        if rs.status == "not-inhabited":
            assert rb.status == "not-inhabited"


def test_n_multitype_shared_witness():
    # identity types ask one witness for every element
    arr = Arrow(multi(a), a)
    r = inhabit(N, Arrow(multi(arr), arr))
    assert r.inhabited and alpha_eq(r.witness, p("\\z.z"))
    r = inhabit_multitype(N, multi(arr))
    assert r.inhabited
    assert inhabit_multitype(N, EMPTY_MULTI).inhabited
    assert inhabit_multitype(N, multi(a)).status == "not-inhabited"
    assert inhabit_multitype(N, multi(multi(a))).status == "not-inhabited"


def test_v_inhabitation():
    assert inhabit(V, EMPTY_MULTI).inhabited
    assert inhabit(V, a).status == "not-inhabited"
    assert inhabit(V, Arrow(multi(a), a)).status == "not-inhabited"
    r = inhabit(V, multi(Arrow(EMPTY_MULTI, EMPTY_MULTI)))
    assert r.inhabited
    assert inhabit(V, multi(a)).status == "not-inhabited"


def test_inhabit_env():
    assert inhabit_env(B, EMPTY_ENV) == {}
    out = inhabit_env(B, Env.of({"x": multi(Arrow(multi(a), b), multi(a))}))
    assert out["x"].status == "not-inhabited"


def test_testable_examples():
    assert is_testable(B, (EMPTY_ENV, EMPTY_MULTI)).verdict == "yes"
    mix = Arrow(multi(Arrow(multi(a), b), multi(a)), b)
    assert is_testable(B, (EMPTY_ENV, mix)).verdict == "no"
    # args [a] is not inhabited, so the typing is untestable
    assert is_testable(B, (Env.of({"x": EMPTY_MULTI}), Arrow(multi(a), multi(a)))
                    ).verdict == "no"
    ok = is_testable(B, (EMPTY_ENV, Arrow(multi(EMPTY_MULTI), EMPTY_MULTI)))
    assert ok.verdict == "yes" and ok.args_witnesses[0] is not None
