import random

import numpy as np
import pytest
from hypothesis import given, strategies as st

from buffpi import _kernels
from buffpi.equivalence import (
    Bisimilar, BoundedOnly, NotBisimilar, naive_bisimilar, partition, random_lts, saturate, strong_bisim, weak_bisim,
)
from buffpi.lts import Lts
from buffpi.suites import lts_pairs

from oracles import brute_bisimilar, det_equivalent

LABELS = ("a", "b")


@st.composite
def det_system(draw, max_states=6):
    n = draw(st.integers(1, max_states))
    edges = []
    for s in range(n):
        for a in LABELS:
            if draw(st.booleans()):
                edges.append((s, a, draw(st.integers(0, n - 1))))
    return n, edges


@st.composite
def tiny_system(draw):
    n = draw(st.integers(1, 3))
    edges = draw(st.lists(st.tuples(st.integers(0, n - 1), st.sampled_from(LABELS), st.integers(0, n - 1)),
                          max_size=5, unique=True))
    return n, edges


def bisim(n1, e1, n2, e2, fn=strong_bisim):
    return isinstance(fn(Lts.from_edges(n1, e1), Lts.from_edges(n2, e2)), Bisimilar)


@given(det_system(), det_system())
def test_deterministic_systems_match_trace_equivalence(x, y):
    (n1, e1), (n2, e2) = x, y
    assert bisim(n1, e1, n2, e2) == det_equivalent(n1, e1, 0, n2, e2, 0, LABELS)


@given(tiny_system(), tiny_system())
def test_tiny_systems_match_relation_enumeration(x, y):
    (n1, e1), (n2, e2) = x, y
    assert bisim(n1, e1, n2, e2) == brute_bisimilar(n1, e1, 0, n2, e2, 0)


@given(st.integers(0, 5000))
def test_bisimilarity_is_an_equivalence(seed):
    rng = random.Random(seed)
    a, b, c = (random_lts(rng, 6, labels=("a", "tau")) for _ in range(3))
    for fn in (strong_bisim, weak_bisim):
        ok = lambda x, y: isinstance(fn(x, y), Bisimilar)
        assert ok(a, a)
        assert ok(a, b) == ok(b, a)
        if ok(a, b) and ok(b, c):
            assert ok(a, c)


@given(st.integers(0, 5000))
def test_engine_agrees_with_greatest_fixpoint(seed):
    (a, b), = lts_pairs(1, seed, max_states=12)
    assert isinstance(strong_bisim(a, b), Bisimilar) == naive_bisimilar(a, b)
    assert isinstance(weak_bisim(a, b), Bisimilar) == naive_bisimilar(a, b, weak=True)


def test_weak_laws_by_hand():
    # a.tau.0 ~ a.0 weakly only; tau.a + b differs from a + b even weakly
    at = Lts.from_edges(3, [(0, "a", 1), (1, "tau", 2)])
    a0 = Lts.from_edges(2, [(0, "a", 1)])
    assert isinstance(weak_bisim(at, a0), Bisimilar)
    assert isinstance(strong_bisim(at, a0), NotBisimilar)
    tab = Lts.from_edges(3, [(0, "tau", 1), (1, "a", 2), (0, "b", 2)])
    ab = Lts.from_edges(2, [(0, "a", 1), (0, "b", 1)])
    assert isinstance(weak_bisim(tab, ab), NotBisimilar)


def test_witness_is_a_distinguishing_trace():
    left = Lts.from_edges(3, [(0, "a", 1), (1, "b", 2)])
    right = Lts.from_edges(3, [(0, "a", 1), (1, "a", 2)])
    v = strong_bisim(left, right)
    assert isinstance(v, NotBisimilar)
    assert v.witness[0] == "a" and v.witness[-1] in ("a", "b") and len(v.witness) == 2


def test_truncated_systems_only_give_bounded_verdicts():
    a = Lts.from_edges(2, [(0, "a", 1)], truncated={1})
    b = Lts.from_edges(2, [(0, "a", 1)], truncated={1})
    assert isinstance(strong_bisim(a, b), BoundedOnly)


def _arrays(lts):
    names = sorted({lab for _, lab, _ in lts.edges})
    src = np.array([s for s, _, _ in lts.edges], dtype=np.int64)
    lab = np.array([names.index(l) for _, l, _ in lts.edges], dtype=np.int64)
    dst = np.array([t for _, _, t in lts.edges], dtype=np.int64)
    return src, lab, dst, names


@pytest.mark.skipif(_kernels.numba is None, reason="numba not installed")
@pytest.mark.parametrize("seed", range(20))
def test_kernel_backends_agree(seed):
    lts = random_lts(random.Random(seed), 40)
    src, lab, dst, names = _arrays(lts)
    tau = names.index("tau") if "tau" in names else len(names)
    before = _kernels.backend()
    try:
        out = {}
        for b in ("numpy", "numba"):
            _kernels.set_backend(b)
            out[b] = (partition(lts.size, src, lab, dst)[-1], _kernels.saturate(lts.size, src, lab, dst, tau))
    finally:
        _kernels.set_backend(before)
    assert np.array_equal(out["numpy"][0], out["numba"][0])
    for x, y in zip(out["numpy"][1], out["numba"][1]):
        assert np.array_equal(x, y)


def test_saturation_adds_empty_tau_moves():
    sat = saturate(Lts.from_edges(2, [(0, "tau", 1)]))
    edges = {(s, l, t) for s, l, t in sat.edges}
    assert {(0, "tau", 0), (1, "tau", 1), (0, "tau", 1)} <= edges
