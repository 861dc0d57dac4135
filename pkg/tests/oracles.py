"""Reference models written independently of the library.

They share no code with ``buffpi`` beyond the plain data they inspect, so a
bug in the library cannot make an oracle agree with it by construction.
"""

from __future__ import annotations

from itertools import product


class Fifo:
    """A bounded queue: the environment may push while there is room and
    pop the head while it is non-empty."""

    def __init__(self, capacity, items=()):
        self.capacity = capacity
        self.items = list(items)

    def moves(self, pool):
        out = set()
        if self.capacity == "inf" or len(self.items) < self.capacity:
            out |= {("in", d) for d in pool}
        if self.items:
            out.add(("out", self.items[0]))
        return out

    def apply(self, move):
        kind, d = move
        if kind == "in":
            self.items.append(d)
        else:
            assert self.items[0] == d
            self.items.pop(0)


def det_step(edges):
    table = {}
    for s, a, t in edges:
        assert (s, a) not in table, "not deterministic"
        table[(s, a)] = t
    return table


def det_equivalent(n1, e1, i1, n2, e2, i2, labels):
    """For deterministic systems bisimilarity is trace equivalence; decide it
    by walking the product of the two automata."""
    t1, t2 = det_step(e1), det_step(e2)
    seen = set()
    todo = [(i1, i2)]
    while todo:
        p, q = todo.pop()
        if (p, q) in seen:
            continue
        seen.add((p, q))
        for a in labels:
            x, y = t1.get((p, a)), t2.get((q, a))
            if (x is None) != (y is None):
                return False
            if x is not None:
                todo.append((x, y))
    return True


def brute_bisimilar(n1, e1, i1, n2, e2, i2):
    """Enumerate every relation between the two state sets (tiny systems only)
    and look for one that is a strong bisimulation containing the initial pair."""
    pairs = list(product(range(n1), range(n2)))
    succ1 = {s: [(a, t) for x, a, t in e1 if x == s] for s in range(n1)}
    succ2 = {s: [(a, t) for x, a, t in e2 if x == s] for s in range(n2)}

    def is_bisim(rel):
        for p, q in rel:
            for a, p2 in succ1[p]:
                if not any(b == a and (p2, q2) in rel for b, q2 in succ2[q]):
                    return False
            for a, q2 in succ2[q]:
                if not any(b == a and (p2, q2) in rel for b, p2 in succ1[p]):
                    return False
        return True

    for mask in range(1 << len(pairs)):
        rel = {pairs[k] for k in range(len(pairs)) if mask >> k & 1}
        if (i1, i2) in rel and is_bisim(rel):
            return True
    return False


def erlang_receive(mbox, guards):
    """First message (in arrival order) accepted by any clause, clauses tried
    left to right; returns (clause, message, rest) or None."""
    for k, v in enumerate(mbox):
        for i, g in enumerate(guards, start=1):
            if g(v):
                return i, v, tuple(mbox[:k]) + tuple(mbox[k + 1:])
    return None
