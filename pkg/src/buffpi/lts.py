"""Explicit labelled transition systems with exploration bounds."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable


@dataclass
class Lts:
    """States are opaque keys indexed from 0; state 0 is the initial one."""

    states: list = field(default_factory=list)
    edges: list = field(default_factory=list)
    initial: int = 0
    truncated: set = field(default_factory=set)
    payload: list = field(default_factory=list)
    edge_info: list = field(default_factory=list)

    @property
    def size(self) -> int:
        return len(self.states)

    def labels(self) -> set:
        return {lab for _, lab, _ in self.edges}

    def out_edges(self) -> list[list[tuple]]:
        adj: list[list[tuple]] = [[] for _ in self.states]
        for s, lab, t in self.edges:
            adj[s].append((lab, t))
        return adj

    def relabel(self, fn: Callable) -> "Lts":
        return Lts(list(self.states), [(s, fn(lab), t) for s, lab, t in self.edges], self.initial,
                   set(self.truncated), list(self.payload), list(self.edge_info))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple], initial: int = 0, truncated=()) -> "Lts":
        return cls(list(range(n)), sorted(set(edges), key=repr), initial, set(truncated), list(range(n)))


def explore(initial, expand: Callable, key: Callable[[object], Hashable],
            max_states: int = 10_000, max_depth: int | None = None) -> Lts:
    """Breadth-first exploration.

    ``expand(state, depth)`` returns ``(edges, cut)`` where ``edges`` is a list
    of ``(label, successor, info)`` and ``cut`` says that some successors were
    withheld by a bound.
    """
    lts = Lts()
    index: dict = {}

    def add(state) -> int | None:
        k = key(state)
        if k in index:
            return index[k]
        if len(lts.states) >= max_states:
            return None
        index[k] = len(lts.states)
        lts.states.append(k)
        lts.payload.append(state)
        return index[k]

    add(initial)
    depth = {0: 0}
    todo = deque([0])
    seen_edges = set()
    while todo:
        s = todo.popleft()
        if max_depth is not None and depth[s] >= max_depth:
            lts.truncated.add(s)
            continue
        edges, cut = expand(lts.payload[s], depth[s])
        if cut:
            lts.truncated.add(s)
        for label, succ, info in edges:
            t = add(succ)
            if t is None:
                lts.truncated.add(s)
                continue
            if t not in depth:
                depth[t] = depth[s] + 1
                todo.append(t)
            if (s, label, t) not in seen_edges:
                seen_edges.add((s, label, t))
                lts.edges.append((s, label, t))
                lts.edge_info.append(info)
    return lts
