"""Exhaustive and randomized correctness checks over small term corpora."""

from __future__ import annotations

import random
from collections import OrderedDict, deque
from dataclasses import dataclass
from functools import lru_cache

from .canon import canonical_process, canonicalize, check_validity
from .errors import InvalidStore
from .equivalence import Bisimilar, BoundedOnly, NotBisimilar, strong_bisim
from .polyadic import _var_pair, encode_config, encode_process, is_image_label, poly_lts, poly_successors, translate_action, translate_name
from .printer import show, show_config
from .semantics import reachable_lts, step
from .syntax import (
    NIL, Buffer, BufferStore, Choice, Config, Entry, New, NewBuf, Par, Process, Repl, Tau, all_names,
    config_free_names, free_names, inp, out, prefixed, subst, substitute,
)

BUFFERED = "b"
OTHER = "a"


# ------------------------------------------------------------------ corpus


NAMES = (OTHER, BUFFERED)


def _prefixes():
    # binders reuse the two names (shadowing); canonicalization renames them
    yield Tau()
    for s in NAMES:
        for x in NAMES:
            yield inp(s, x)
    for s in NAMES:
        for o in NAMES:
            yield out(s, o)


@lru_cache(maxsize=None)
def _terms(k: int) -> tuple:
    """Processes with exactly ``k`` prefixes over the two-name alphabet."""
    if k == 0:
        return (NIL,)
    acc = [prefixed(pre, cont) for pre in _prefixes() for cont in _terms(k - 1)]
    for i in range(1, k // 2 + 1):
        for p in _terms(i):
            for q in _terms(k - i):
                acc.append(Par(p, q))
                if isinstance(p, Choice) and isinstance(q, Choice) and len(p.branches) == len(q.branches) == 1:
                    acc.append(Choice(p.branches + q.branches))
    if k == 1:
        acc.extend(Repl(p) for p in acc[:])
    return tuple(acc)


def _scopes(p, capacities):
    """Wrap a process in the configurations that bind the buffered name."""
    for n in capacities:
        yield Config(p, BufferStore.of({BUFFERED: Buffer(n)}))
        yield Config(New(OTHER, p), BufferStore.of({BUFFERED: Buffer(n)}))
        yield Config(NewBuf(BUFFERED, n, p))
    yield Config(p, BufferStore.of({BUFFERED: Buffer(1, (Entry(OTHER),))}))


def config_names(cfg: Config) -> set:
    s = cfg.store
    return all_names(cfg.process) | s.domain() | s.global_names() | s.local_names()


def corpus(max_prefixes: int = 3, capacities=(1, 2), max_names: int = 2) -> list[Config]:
    """Canonical configurations with at most ``max_prefixes`` prefixes and at
    most ``max_names`` distinct names (free, restricted, input-bound and store
    names all count).  The buffered name ``b`` is global or created by
    ``new b:n``; duplicates modulo canonical form are dropped and the order is
    deterministic."""
    procs = {}
    for k in range(max_prefixes + 1):
        for p in _terms(k):
            c = canonical_process(p)
            if len(all_names(c) | {BUFFERED}) <= max_names:
                procs.setdefault(show(c), c)
    seen = {}
    for p in procs.values():
        for cfg in _scopes(p, capacities):
            c = canonicalize(cfg)
            if len(config_names(c)) <= max_names:
                seen.setdefault(show_config(c), c)
    return list(seen.values())


# --------------------------------------------------------------- validity


def _explore(configs, max_states: int, repl_unfold: int):
    visited = set()
    for cfg in configs:
        root = canonicalize(cfg)
        env = frozenset(config_free_names(root))
        todo = deque([(root, 0)])
        count = 0
        while todo and count < max_states:
            state, used = todo.popleft()
            key = (show_config(state), env)
            if key in visited:
                continue
            visited.add(key)
            count += 1
            ts, cut = step(state, env, repl_unfold - used)
            yield state, env, ts, cut
            todo.extend((t.target, used + t.unfolds) for t in ts)


def reachable_states(configs, max_states: int = 500, repl_unfold: int = 2):
    """Every distinct ``(state, env)`` reachable from the configs, where ``env``
    is the set of free names of the root the state was reached from.

    States shared between roots with the same ``env`` are explored once.
    ``max_states`` bounds the exploration per root and ``repl_unfold`` the
    replicated copies consumed along a path."""
    for state, env, _, _ in _explore(configs, max_states, repl_unfold):
        yield state, env


def validity_violations(configs, max_states: int = 500, repl_unfold: int = 2) -> list[str]:
    """Reachable states that fail :func:`check_validity`."""
    return [show_config(c) for c, _ in reachable_states(configs, max_states, repl_unfold)
            if not check_validity(c)]


# ----------------------------------------------------- encoding correspondence


@dataclass(frozen=True)
class Mismatch:
    direction: str  # "forward" or "reflect"
    state: str
    action: str
    detail: str


class _EncodingCache:
    def __init__(self, size: int = 50_000):
        self.size = size
        self.data: OrderedDict = OrderedDict()

    def __call__(self, cfg: Config):
        key = show_config(cfg)
        hit = self.data.get(key)
        if hit is None:
            p = encode_config(cfg)
            hit = (p, show(p))
            self.data[key] = hit
            if len(self.data) > self.size:
                self.data.popitem(last=False)
        return hit


def correspondence(cfg: Config, env=(), transitions=None, encode=None) -> list[Mismatch]:
    """Forward simulation and reflection between one state and its encoding.

    ``transitions`` may pass the (unbounded) source transitions of ``cfg``
    when they are already known."""
    cfg = canonicalize(cfg)
    encode = encode or _EncodingCache(0)
    if transitions is None:
        if not check_validity(cfg):
            raise InvalidStore(show_config(cfg))
        transitions, _ = step(cfg, env)
    encoded, _ = encode(cfg)
    expected = {}
    for t in transitions:
        dom = cfg.store.domain() | t.target.store.domain()
        expected.setdefault(translate_action(t.action, dom), set()).add(encode(t.target)[1])
    dom = cfg.store.domain()
    penv = {n for d in env for n in translate_name(d, d in dom)}
    got = {}
    for beta, target in poly_successors(encoded, penv):
        got.setdefault(beta, set()).add(show(target))
    bad = []
    for beta, targets in expected.items():
        for m in sorted(targets - got.get(beta, set())):
            bad.append(Mismatch("forward", show_config(cfg), str(beta), m))
    for beta, targets in got.items():
        if is_image_label(beta):
            for m in sorted(targets - expected.get(beta, set())):
                bad.append(Mismatch("reflect", show_config(cfg), str(beta), m))
    return bad


def correspondence_mismatches(configs, max_states: int = 500, repl_unfold: int = 2) -> list[Mismatch]:
    """:func:`correspondence` on every reachable state of every config."""
    bad = []
    encode = _EncodingCache()
    for state, env, ts, cut in _explore(configs, max_states, repl_unfold):
        if cut:
            ts, _ = step(state, env)
        bad.extend(correspondence(state, env, ts, encode))
    return bad


# ------------------------------------------------------- full abstraction


def _kind(v) -> str:
    return {Bisimilar: "bisimilar", NotBisimilar: "distinct", BoundedOnly: "bounded"}[type(v)]


def abstraction_verdicts(c1: Config, c2: Config, max_states: int = 2000) -> tuple[str, str]:
    """Strong bisimilarity of two configs and of their encodings."""
    c1, c2 = canonicalize(c1), canonicalize(c2)
    env = sorted(config_free_names(c1) | config_free_names(c2))
    src = strong_bisim(reachable_lts(c1, max_states, env=env), reachable_lts(c2, max_states, env=env))
    dom = c1.store.domain() | c2.store.domain()
    penv = sorted({n for d in env for n in translate_name(d, d in dom)})
    enc = strong_bisim(poly_lts(encode_config(c1), penv, max_states), poly_lts(encode_config(c2), penv, max_states))
    return _kind(src), _kind(enc)


def congruent_variants(cfg: Config) -> list[Config]:
    """Syntactically different configurations congruent to ``cfg``."""
    p, store = cfg.process, cfg.store
    fresh_name = "c"
    variants = [
        Config(Par(NIL, p), store),
        Config(New(fresh_name, p), store),
        Config(Par(p, New(fresh_name, NIL)), store),
    ]
    if isinstance(p, Par):
        variants.append(Config(Par(p.right, p.left), store))
    if isinstance(p, New):
        variants.append(Config(New(p.name, Par(p.body, NIL)), store))
    return variants


def abstraction_pairs(configs, n_random: int = 50, n_congruent: int = 15, seed: int = 0) -> list[tuple]:
    """Seeded sample of finite-state config pairs.  Random pairs share the
    store domain so that their labels are comparable; congruent pairs come
    from :func:`congruent_variants`."""
    rng = random.Random(seed)
    finite = [c for c in configs if "!" not in show(c.process)]
    by_dom: dict = {}
    for c in finite:
        by_dom.setdefault(tuple(sorted(c.store.domain())), []).append(c)
    groups = [g for g in by_dom.values() if len(g) > 1]
    pairs = []
    for _ in range(n_random):
        g = rng.choice(groups)
        pairs.append(tuple(rng.sample(g, 2)))
    for c in rng.sample(finite, n_congruent):
        vs = congruent_variants(c)
        pairs.append((c, vs[rng.randrange(len(vs))]))
    return pairs


def nontrivial_bisimilar_pairs(configs) -> list[tuple]:
    """Pairs that are bisimilar without being congruent, built from small
    algebraic identities."""
    a, b = OTHER, BUFFERED
    st = BufferStore.of({b: Buffer(1)})
    t = prefixed(Tau())
    return [
        (Config(prefixed(out(a, a)), st), Config(Choice(((out(a, a), NIL), (out(a, a), NIL))), st)),
        (Config(Par(t, t), st), Config(Choice(((Tau(), t),)), st)),
        (Config(New(a, prefixed(inp(a, "x"))), st), Config(NIL, st)),
        (Config(New(a, Par(prefixed(out(a, a)), prefixed(inp(a, "x")))), st), Config(t, st)),
        (Config(Par(prefixed(out(b, a)), NIL), st), Config(prefixed(out(b, a)), st)),
    ]


# ------------------------------------------------------------ substitution


def random_process(rng: random.Random, size: int, names=("a", "b", "c", "x"), binders=("y", "z")) -> Process:
    """A random monadic process with roughly ``size`` constructors."""
    pool = list(names)

    def gen(k: int, scope: tuple) -> Process:
        avail = pool + list(scope)
        if k <= 0:
            return NIL
        roll = rng.random()
        if roll < 0.45:
            kind = rng.randrange(3)
            if kind == 0:
                b = rng.choice(binders)
                return prefixed(inp(rng.choice(avail), b), gen(k - 1, scope + (b,)))
            if kind == 1:
                return prefixed(out(rng.choice(avail), rng.choice(avail)), gen(k - 1, scope))
            return prefixed(Tau(), gen(k - 1, scope))
        if roll < 0.65:
            i = rng.randint(0, k - 1)
            return Par(gen(i, scope), gen(k - 1 - i, scope))
        if roll < 0.75:
            b = rng.choice(binders)
            left = prefixed(inp(rng.choice(avail), b), gen((k - 1) // 2, scope + (b,)))
            right = prefixed(out(rng.choice(avail), rng.choice(avail)), gen((k - 1) // 2, scope))
            return Choice(left.branches + right.branches)
        if roll < 0.85:
            n = rng.choice(pool)
            return New(n, gen(k - 1, scope))
        if roll < 0.93:
            n = rng.choice(pool)
            return NewBuf(n, rng.choice((1, 2)), gen(k - 1, scope))
        return Repl(prefixed(out(rng.choice(avail), rng.choice(avail)), gen(k - 2, scope)))

    return gen(size, ())


def substitution_instances(n: int, seed: int = 0, size: int = 6) -> list[tuple]:
    """``(process, buffered, variable, replacement)`` samples for the pair
    encoding's substitution property."""
    rng = random.Random(seed)
    out_ = []
    while len(out_) < n:
        p = random_process(rng, size)
        if "x" not in free_names(p):
            continue
        buffered = frozenset(n_ for n_ in ("b",) if rng.random() < 0.5)
        out_.append((p, buffered, "x", rng.choice(("a", "b", "c", "d"))))
    return out_


def substitution_holds(p: Process, buffered: frozenset, x: str, c: str) -> bool:
    """``[[P{c/x}]] = [[P]]{c1,c2/x1,x2}`` up to canonical form."""
    left = encode_process(substitute(p, c, x), buffered)
    c1, c2 = translate_name(c, c in buffered)
    x1, x2 = _var_pair(x)
    right = subst(encode_process(p, buffered, variables=(x,)), {x1: c1, x2: c2})
    return canonical_process(left) == canonical_process(right)


def substitution_failures(n: int = 500, seed: int = 0, size: int = 6) -> list[tuple]:
    return [inst for inst in substitution_instances(n, seed, size) if not substitution_holds(*inst)]


__all__ = [
    "random_process", "substitution_instances", "substitution_holds", "substitution_failures",
    "corpus", "config_names", "reachable_states", "validity_violations", "correspondence", "correspondence_mismatches", "Mismatch",
    "abstraction_verdicts", "abstraction_pairs", "congruent_variants", "nontrivial_bisimilar_pairs",
]
