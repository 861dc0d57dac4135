import random

import pytest
from hypothesis import given, strategies as st

from buffpi.canon import canonical_process, canonicalize, check_validity, congruent
from buffpi.checks import random_process
from buffpi.errors import ParseError
from buffpi.parser import parse_config, parse_pib, parse_process, parse_store
from buffpi.printer import show, show_config
from buffpi.syntax import Buffer, BufferStore, Config, Entry, free_names, par, subst

seeds = st.integers(0, 10_000)


def proc(seed, size=6):
    return random_process(random.Random(seed), size)


@given(seeds)
def test_canonical_form_is_idempotent(seed):
    c = canonical_process(proc(seed))
    assert canonical_process(c) == c


@given(seeds)
def test_printing_then_parsing_preserves_the_canonical_form(seed):
    p = proc(seed)
    c = canonical_process(p)
    assert canonical_process(parse_process(show(p))) == c
    assert parse_process(show(c)) == c


@given(st.lists(seeds, min_size=2, max_size=4), st.randoms(use_true_random=False))
def test_parallel_components_commute(ss, rnd):
    comps = [proc(s, 3) for s in ss]
    shuffled = list(comps)
    rnd.shuffle(shuffled)
    assert canonical_process(par(*comps)) == canonical_process(par(*shuffled))


@given(st.sampled_from(["u", "v", "w2", "k"]), st.sampled_from(["u", "v", "w2", "k"]))
def test_bound_names_are_interchangeable(n1, n2):
    tmpl = "new {0} in a<{0}>.{0}(y).y<{0}>.0 | b({0}).{0}<a>.0"
    assert canonical_process(parse_process(tmpl.format(n1))) == canonical_process(parse_process(tmpl.format(n2)))


@given(seeds)
def test_free_names_survive_canonicalization(seed):
    p = proc(seed)
    assert free_names(canonical_process(p)) == free_names(p)


@given(seeds, st.sampled_from(["a", "b", "q"]))
def test_substitution_does_not_capture(seed, new):
    p = proc(seed)
    q = subst(p, {"x": new})
    assert "x" not in free_names(q)
    assert free_names(q) <= (free_names(p) - {"x"}) | ({new} if "x" in free_names(p) else set())


def test_structural_laws_by_hand():
    assert congruent(parse_process("a<b>.0 | c(x).0"), parse_process("c(y).0 | 0 | a<b>.0"))
    assert congruent(parse_process("new x in x<b>.0"), parse_process("new y in y<b>.0"))
    assert congruent(parse_process("new x in (a<b>.0 | x<x>.0)"), parse_process("a<b>.0 | new z in z<z>.0"))
    assert not congruent(parse_process("new x in x<b>.0"), parse_process("new y in y<y>.0"))
    assert not congruent(parse_process("a<b>.0"), parse_process("a<c>.0"))
    assert congruent(parse_process("new x in 0"), parse_process("0"))


def test_choice_branch_order_is_kept():
    left = canonical_process(parse_process("a<b>.0 + c(x).0"))
    right = canonical_process(parse_process("c(x).0 + a<b>.0"))
    assert left != right


def test_store_syntax():
    st_ = parse_store("{ b -> (2, [a, (new c)]), d -> (inf, []) }")
    assert st_["b"] == Buffer(2, (Entry("a"), Entry("c", True)))
    assert st_["d"].capacity == float("inf")


@pytest.mark.parametrize("text", [
    "b<.0",
    "a(x).0 | ",
    "new b:0 in 0",
    "a<b>.0 + 0",
    "0 ; { b -> (1, [a, a]) }",
    "0 ; { b -> (1, []), b -> (2, []) }",
    "if a = b then 0",
])
def test_malformed_input_is_a_parse_error(text):
    with pytest.raises(ParseError):
        parse_config(text)


def test_parse_error_reports_position():
    with pytest.raises(ParseError) as e:
        parse_config("a<b>.0 |\n  c(.0")
    assert "2:" in str(e.value)


def test_validity_rejects_local_entry_without_binder():
    assert check_validity(parse_config("new a in b(x).0 ; { b -> (2, [(new a)]) }"))
    bad = Config(parse_process("b(x).0"), parse_store("{ b -> (2, [(new a)]) }"))
    assert not check_validity(bad)


def test_canonical_config_prints_stably():
    c = parse_pib("new q in b<q>.0 | b(y).y<c>.0", "{ b -> (5, []) }")
    assert canonicalize(parse_config(show_config(c))) == c
    # bound names are numbered in order of first occurrence in the sorted rendering
    assert show_config(c) == "new _2 in b(_1)._1<c>.0 | b<_2>.0 ; { b -> (5, []) }"
