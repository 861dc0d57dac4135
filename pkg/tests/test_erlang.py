import pytest
from hypothesis import given, strategies as st

from buffpi import erlang
from buffpi.erlang import Atom, IntLit, Let, Prim, Var
from buffpi.errors import ParseError
from buffpi.parser import parse_erl, parse_erl_expr, parse_erl_funcs, show_erl_program
from buffpi.suites import ERL_PROGRAMS

from oracles import erlang_receive


def ev(g, env):
    """Independent evaluator for the guard fragment used by the generators."""
    match g:
        case Atom(name):
            return name == "true"
        case IntLit(v):
            return v
        case Var(x):
            return env[x]
        case Let(x, b, body):
            return ev(body, {**env, x: ev(b, env)})
        case Prim("eq", (l, r)):
            return ev(l, env) == ev(r, env)
        case Prim("lt", (l, r)):
            return ev(l, env) < ev(r, env)
    raise AssertionError(g)


def visible(name):
    text, acc = ERL_PROGRAMS[name]
    g = parse_erl(text, accessible=acc)
    lts = erlang.erl_lts(g, erlang.erl_env(g), 200)
    return {str(lab) for _, lab, _ in lts.edges} - {"tau"}


def test_selective_receive_skips_non_matching_messages():
    # 2 arrives first but only 1 satisfies lt(x, 2)
    assert visible("selective") == {"out out 1"}


def test_function_application_by_hand():
    assert visible("apply") == {"out out 3"}
    assert visible("ping") == set()


@given(st.integers(0, 100_000))
def test_receive_matches_independent_model(seed):
    (mbox, clauses), = erlang.receive_cases(1, seed)
    want = erlang_receive([int(v) for v in mbox],
                          [lambda v, c=c: ev(c.guard, {c.var: v}) is True for c in clauses])
    got = erlang.receive_agreement(mbox, clauses)
    if want is None:
        assert got["rule"] == got["oracle"] == got["encoding"] == erlang.BLOCKED
    else:
        i, v, rest = want
        expect = (i, str(v), tuple(str(x) for x in rest))
        assert got["rule"] == got["oracle"] == got["encoding"] == expect


def test_receive_by_hand():
    g1 = parse_erl_expr("lt(x, 1)", ("x",))
    g2 = parse_erl_expr("eq(x, 3)", ("x",))
    from buffpi.erlang import Clause, Pid, Send

    cl = (Clause("x", g1, Send(Pid("k1"), Var("x"))), Clause("x", g2, Send(Pid("k2"), Var("x"))))
    got = erlang.receive_agreement(("2", "3", "0"), cl)
    assert got["rule"] == (2, "3", ("2", "0"))
    assert erlang.receive_agreement(("2", "2"), cl)["rule"] == erlang.BLOCKED


@pytest.mark.parametrize("name", sorted(ERL_PROGRAMS))
def test_show_then_parse_is_identity(name):
    funcs = parse_erl_funcs(ERL_PROGRAMS[name][0])
    assert parse_erl_funcs(show_erl_program(funcs)) == funcs


@pytest.mark.parametrize("text", [
    "start = fun () -> eq(1).",
    "start = fun () -> apply g().",
    "start = fun () -> receive x when eq(x, 1) -> x.",
    "start = fun () -> 1",
])
def test_malformed_programs(text):
    with pytest.raises(ParseError):
        parse_erl(text)


@given(st.integers(0, 100_000))
def test_substitution_commutes_with_encoding(seed):
    (inst,) = erlang.substitution_cases(1, seed)
    assert erlang.substitution_holds(*inst)
