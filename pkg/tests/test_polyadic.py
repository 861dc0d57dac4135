import random

import pytest
from hypothesis import given, strategies as st

from buffpi.canon import canonicalize
from buffpi.checks import correspondence, substitution_holds, substitution_instances
from buffpi.errors import CapacityExceeded
from buffpi.parser import parse_config
from buffpi.polyadic import buffer_agent, encode_config, is_image_label, translate_action, translate_name
from buffpi.printer import show
from buffpi.semantics import TAU, Action, bound_out, free_in, free_out


def enc(text):
    return show(encode_config(parse_config(text)))


def test_names_become_pairs():
    assert translate_name("b", True) == ("b!i", "b!o")
    assert translate_name("a", False) == ("a", "a")


def test_encodings_by_hand():
    assert enc("b<a>.0 ; { b -> (2, [c]) }") == "b!o<a,a>.0 | F[2; (c,c); b!i, b!o]"
    assert enc("a<c>.0 | a(x).x<x>.0") == "a(_1,_2)._2<_1,_2>.0 | a<c,c>.0"
    assert enc("new a in b<a>.0 ; { b -> (1, []) }") == "new _1 in b!o<_1,_1>.0 | F[1; ; b!i, b!o]"


def test_action_translation():
    dom = {"b"}
    # the environment writes into a buffer by sending on its output end
    assert translate_action(free_in("b", "a"), dom) == Action("in", "b!o", ("a", "a"))
    assert translate_action(free_out("b", "a"), dom) == Action("out", "b!i", ("a", "a"))
    assert translate_action(free_out("a", "b"), dom) == Action("out", "a", ("b!i", "b!o"))
    assert translate_action(bound_out("b", "n"), dom).kind == "bout"
    assert translate_action(TAU, dom) == TAU


def test_image_labels():
    assert is_image_label(Action("out", "a", ("b!i", "b!o")))
    assert is_image_label(Action("in", "a", ("c", "c")))
    assert not is_image_label(Action("out", "a", ("b!i", "c")))


def test_buffer_agent_respects_capacity():
    with pytest.raises(CapacityExceeded):
        buffer_agent(1, [("a", "a"), ("c", "c")], ("b!i", "b!o"))


@pytest.mark.parametrize("text", [
    "b<a>.0 | b(x).x<c>.0 ; { b -> (1, []) }",
    "new a in b<a>.b(y).y<y>.0 ; { b -> (2, []) }",
    "new b:2 in (b<a>.0 | b(x).x<x>.0)",
    "b(x).(x<b>.0 + tau.0) ; { b -> (2, [a, b]) }",
    "!a(x).b<x>.0 ; { b -> (1, []) }",
])
def test_one_step_correspondence(text):
    assert correspondence(canonicalize(parse_config(text)), env={"d"}) == []


@given(st.integers(0, 100_000))
def test_substitution_commutes_with_encoding(seed):
    (inst,) = substitution_instances(1, seed)
    assert substitution_holds(*inst)
