"""Strong and weak bisimilarity on finite labelled transition systems."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import LabelMismatch
from .lts import Lts


@dataclass(frozen=True)
class Bisimilar:
    pass


@dataclass(frozen=True)
class NotBisimilar:
    """``witness`` is a label sequence; ``path`` the state pairs visited while
    replaying it (left state, right state), ending where ``witness[-1]`` is
    enabled on exactly one side."""

    witness: tuple
    path: tuple = field(default=(), compare=False)


@dataclass(frozen=True)
class BoundedOnly:
    depth: int


Verdict = Bisimilar | NotBisimilar | BoundedOnly


def _label_kinds(lts: Lts) -> set:
    return {type(lab).__name__ for _, lab, _ in lts.edges}


def _union(a: Lts, b: Lts):
    labels = sorted(a.labels() | b.labels(), key=repr)
    ids = {lab: i for i, lab in enumerate(labels)}
    n = a.size + b.size
    edges = [(s, ids[lab], t) for s, lab, t in a.edges]
    edges += [(s + a.size, ids[lab], t + a.size) for s, lab, t in b.edges]
    arr = np.array(edges, dtype=np.int64).reshape(-1, 3)
    return n, arr[:, 0], arr[:, 1], arr[:, 2], labels


def partition(n: int, src, lab, dst) -> list[np.ndarray]:
    """Block arrays after each refinement round until the partition is stable."""
    blocks = np.zeros(n, dtype=np.int64)
    history = [blocks]
    while True:
        new = _kernels.refine_round(n, src, lab, dst, blocks)
        history.append(new)
        if new.max(initial=-1) == blocks.max(initial=-1):
            break
        blocks = new
    if not _is_stable(n, src, lab, dst, history[-1]):  # hash collision: redo exactly
        history = _partition_exact(n, src, lab, dst)
    return history


def _signature_sets(n, src, lab, dst, blocks):
    sig = [set() for _ in range(n)]
    for s, a, t in zip(src.tolist(), lab.tolist(), dst.tolist()):
        sig[s].add((a, int(blocks[t])))
    return sig


def _is_stable(n, src, lab, dst, blocks) -> bool:
    sig = _signature_sets(n, src, lab, dst, blocks)
    rep = {}
    for s in range(n):
        b = int(blocks[s])
        if b in rep and sig[rep[b]] != sig[s]:
            return False
        rep.setdefault(b, s)
    return True


def _partition_exact(n, src, lab, dst):
    blocks = np.zeros(n, dtype=np.int64)
    history = [blocks]
    while True:
        sig = _signature_sets(n, src, lab, dst, blocks)
        ids: dict = {}
        new = np.array([ids.setdefault((int(blocks[s]), frozenset(sig[s])), len(ids)) for s in range(n)],
                       dtype=np.int64)
        history.append(new)
        if len(ids) == len(set(blocks.tolist())):
            return history
        blocks = new


def _succ(n, src, lab, dst):
    out = [dict() for _ in range(n)]
    for s, a, t in zip(src.tolist(), lab.tolist(), dst.tolist()):
        out[s].setdefault(a, []).append(t)
    return out


def _witness(p, q, history, succ, labels):
    """Replay the splitters that separated ``p`` (left) and ``q`` (right)."""

    def level(x, y):
        return next(k for k, bl in enumerate(history) if bl[x] != bl[y])

    word, path = [], [(p, q)]
    while True:
        prev = history[level(p, q) - 1]
        move = None
        for attacker, defender, left_moves in ((p, q, True), (q, p, False)):
            for a, targets in sorted(succ[attacker].items()):
                for t in sorted(targets):
                    if all(prev[u] != prev[t] for u in succ[defender].get(a, [])):
                        move = (a, t, defender, left_moves)
                        break
                if move:
                    break
            if move:
                break
        a, t, defender, left_moves = move
        word.append(labels[a])
        options = sorted(succ[defender].get(a, []), key=lambda u: (-level(t, u), u))
        if not options:
            return tuple(word), tuple(path)
        p, q = (t, options[0]) if left_moves else (options[0], t)
        path.append((p, q))


def _depths(lts: Lts) -> list:
    dist = [None] * lts.size
    dist[lts.initial] = 0
    adj = lts.out_edges()
    todo = deque([lts.initial])
    while todo:
        s = todo.popleft()
        for _, t in adj[s]:
            if dist[t] is None:
                dist[t] = dist[s] + 1
                todo.append(t)
    return dist


def _truncation_depth(lts: Lts):
    dist = _depths(lts)
    ds = [dist[s] for s in lts.truncated if dist[s] is not None]
    return min(ds) if ds else None


def _decide(a: Lts, b: Lts, sat_a: Lts, sat_b: Lts) -> Verdict:
    if a.edges and b.edges and _label_kinds(a) != _label_kinds(b):
        raise LabelMismatch(f"{_label_kinds(a)} vs {_label_kinds(b)}")
    n, src, lab, dst, labels = _union(sat_a, sat_b)
    history = partition(n, src, lab, dst)
    final = history[-1]
    p, q = sat_a.initial, sat_b.initial + sat_a.size
    trunc = [d for d in (_truncation_depth(a), _truncation_depth(b)) if d is not None]
    if final[p] == final[q]:
        return BoundedOnly(min(trunc)) if trunc else Bisimilar()
    word, path = _witness(p, q, history, _succ(n, src, lab, dst), labels)
    if trunc and min(trunc) <= len(word):
        return BoundedOnly(min(trunc))
    return NotBisimilar(word, tuple((x, y - sat_a.size) for x, y in path))


def strong_bisim(a: Lts, b: Lts) -> Verdict:
    """Partition refinement on the disjoint union of ``a`` and ``b``."""
    return _decide(a, b, a, b)


def saturate(lts: Lts, tau=None) -> Lts:
    """The weak system: ``s =a=> t`` for visible ``a`` and ``s => t`` for tau."""
    tau = _tau_label(lts) if tau is None else tau
    labels = sorted(lts.labels() | {tau}, key=repr)
    ids = {lab: i for i, lab in enumerate(labels)}
    arr = np.array([(s, ids[lab], t) for s, lab, t in lts.edges], dtype=np.int64).reshape(-1, 3)
    s, l, t = _kernels.saturate(lts.size, arr[:, 0], arr[:, 1], arr[:, 2], ids[tau])
    edges = [(int(x), labels[int(y)], int(z)) for x, y, z in zip(s, l, t)]
    return Lts(list(lts.states), edges, lts.initial, set(lts.truncated), list(lts.payload))


def _tau_label(*systems: Lts):
    from .semantics import TAU

    for lts in systems:
        for _, lab, _ in lts.edges:
            if getattr(lab, "kind", None) == "tau" or lab == "tau":
                return lab
    return TAU


def weak_bisim(a: Lts, b: Lts, tau=None) -> Verdict:
    """Strong bisimilarity of the tau-saturated systems."""
    if tau is None:
        tau = _tau_label(a, b)
    return _decide(a, b, saturate(a, tau), saturate(b, tau))


def enabled(lts: Lts, state: int) -> set:
    return {lab for s, lab, _ in lts.edges if s == state}


# ------------------------------------------------------------- reference


def _tau_closure(lts: Lts, tau) -> list[set]:
    adj = [[] for _ in range(lts.size)]
    for s, lab, t in lts.edges:
        if lab == tau:
            adj[s].append(t)
    out = []
    for s in range(lts.size):
        seen, todo = {s}, [s]
        while todo:
            for t in adj[todo.pop()]:
                if t not in seen:
                    seen.add(t)
                    todo.append(t)
        out.append(seen)
    return out


def _moves(lts: Lts, weak: bool, tau) -> list[dict]:
    """``moves[s][label]`` = set of targets (weak: ``=>a=>`` and ``=>``)."""
    moves = [dict() for _ in range(lts.size)]
    if not weak:
        for s, lab, t in lts.edges:
            moves[s].setdefault(lab, set()).add(t)
        return moves
    clo = _tau_closure(lts, tau)
    for s in range(lts.size):
        moves[s].setdefault(tau, set()).update(clo[s])
        for m in clo[s]:
            for m2, lab, t in lts.edges:
                if m2 == m and lab != tau:
                    for u in clo[t]:
                        moves[s].setdefault(lab, set()).add(u)
    return moves


def naive_bisimilar(a: Lts, b: Lts, weak: bool = False, tau=None) -> bool:
    """Greatest fixpoint by repeated deletion of violating pairs (reference
    implementation, quadratic in states; truncation is ignored)."""
    if tau is None:
        tau = _tau_label(a, b)
    ma, mb = _moves(a, weak, tau), _moves(b, weak, tau)
    rel = {(p, q) for p in range(a.size) for q in range(b.size)}

    def ok(p, q):
        for lab, ts in ma[p].items():
            for t in ts:
                if not any((t, u) in rel for u in mb[q].get(lab, ())):
                    return False
        for lab, us in mb[q].items():
            for u in us:
                if not any((t, u) in rel for t in ma[p].get(lab, ())):
                    return False
        return True

    changed = True
    while changed:
        bad = {pq for pq in rel if not ok(*pq)}
        changed = bool(bad)
        rel -= bad
    return (a.initial, b.initial) in rel


def random_lts(rng, max_states: int = 30, labels=("a", "b", "tau"), density: float = 1.5) -> Lts:
    """A seeded random LTS with at most ``max_states`` states."""
    n = rng.randint(1, max_states)
    m = int(n * density * rng.random()) + rng.randint(0, 2)
    edges = {(rng.randrange(n), rng.choice(labels), rng.randrange(n)) for _ in range(m)}
    return Lts.from_edges(n, edges)
