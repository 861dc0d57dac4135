import pytest
from hypothesis import given, strategies as st

from buffpi.canon import canonicalize, check_validity
from buffpi.errors import NoMatch
from buffpi.parser import parse_config
from buffpi.printer import show_config
from buffpi.semantics import free_in, free_out, reachable_lts, run_trace, successors
from buffpi.suites import GOLDEN, golden_trace

from oracles import Fifo


def moves(text, env=()):
    return {(str(t.action), show_config(t.target)) for t in successors(canonicalize(parse_config(text)), env)}


def test_handshake_successors_by_hand():
    # the receiver cannot fire yet, the sender can only fill the buffer,
    # and the environment may write any known name or one fresh one
    got = moves("b<a>.0 | b(x).x<c>.0 ; { b -> (1, []) }")
    rest = "b(_1)._1<c>.0 | b<a>.0"
    assert got == {
        ("in b a", rest + " ; { b -> (1, [a]) }"),
        ("in b b", rest + " ; { b -> (1, [b]) }"),
        ("in b c", rest + " ; { b -> (1, [c]) }"),
        ("in b z", rest + " ; { b -> (1, [z]) }"),
        ("tau", "b(_1)._1<c>.0 ; { b -> (1, [a]) }"),
    }


def test_full_buffer_blocks_writers():
    got = moves("b<a>.0 ; { b -> (1, [c]) }")
    assert got == {("out b c", "b<a>.0 ; { b -> (1, []) }")}


def test_reader_takes_the_head():
    got = moves("b(x).x<x>.0 ; { b -> (3, [c, a]) }")
    assert ("tau", "c<c>.0 ; { b -> (3, [a]) }") in got
    assert not any(t == "tau" and "a<a>" in s for t, s in got)


def test_unbuffered_names_handshake_directly():
    got = moves("a<c>.0 | a(x).x<x>.0")
    assert ("tau", "c<c>.0 ; {}") in got
    assert ("out a c", "a(_1)._1<_1>.0 ; {}") in got


def test_local_buffer_is_invisible():
    got = moves("new b:1 in (b<a>.0 | b(x).x<c>.0)")
    assert {t for t, _ in got} == {"tau"}


def test_extrusion_through_the_environment():
    got = moves("new a in b<a>.0 ; { b -> (1, []) }")
    tau = [s for t, s in got if t == "tau"]
    assert tau == ["new _1 in 0 ; { b -> (1, [(new _1)]) }"]
    after = moves(tau[0])
    assert any(t.startswith("bout b") for t, _ in after)


@given(st.integers(1, 3), st.lists(st.tuples(st.booleans(), st.sampled_from("acd")), max_size=8))
def test_environment_sees_a_bounded_fifo(cap, script):
    model = Fifo(cap)
    cfg = canonicalize(parse_config(f"0 ; {{ b -> ({cap}, []) }}"))
    env = {"a", "c", "d"}
    for push, d in script:
        ts = successors(cfg, env)
        got_out = {t.action.objects[0] for t in ts if t.action.kind == "out"}
        got_in = {t.action.objects[0] for t in ts if t.action.kind == "in"}
        want = model.moves(env)
        assert got_out == {x for k, x in want if k == "out"}
        assert (got_in >= env) == any(k == "in" for k, _ in want)
        assert all(t.action.subject == "b" for t in ts)
        move = ("in", d) if push else ("out", model.items[0] if model.items else None)
        if move not in want:
            continue
        action = free_in("b", d) if push else free_out("b", move[1])
        cfg = next(t.target for t in ts if t.action == action)
        model.apply(move)
        assert [e.name for e in cfg.store["b"].queue] == model.items


@pytest.mark.parametrize("name", sorted(GOLDEN))
def test_golden_derivation(name):
    _, states = GOLDEN[name]
    trace = golden_trace(name)
    assert [str(t.action) for t in trace] == ["tau"] * len(states)
    assert [show_config(t.target) for t in trace] == [show_config(canonicalize(parse_config(s))) for s in states]


def test_golden_final_queues():
    q = lambda name: [(e.local, e.name) for e in golden_trace(name)[-1].target.store["b"].queue]
    two = q("global_clash")
    assert two[0] == (False, "a") and two[1][0] and two[2][0] and two[1][1] == two[2][1] != "a"
    three = q("nested_local")
    assert three[0][0] and three[1][0] and three[0][1] != three[1][1]


def test_every_successor_of_a_valid_config_is_valid():
    lts = reachable_lts(parse_config("new a in b<a>.b(x).x<x>.0 | b(y).y<a>.0 ; { b -> (2, []) }"), max_states=300)
    assert lts.size > 10 and all(check_validity(s) for s in lts.payload)


def test_trace_reports_the_failing_pattern():
    with pytest.raises(NoMatch):
        run_trace(parse_config("a<b>.0"), ["tau"])
    t = run_trace(parse_config("a<b>.0"), ["out a *"])
    assert str(t[0].action) == "out a b"


def test_exploration_bound_marks_truncation():
    lts = reachable_lts(parse_config("!b<a>.0 ; { b -> (inf, []) }"), max_states=3)
    assert lts.size == 3 and lts.truncated
