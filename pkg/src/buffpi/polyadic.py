"""Encoding of buffered-pi configurations into the polyadic pi-calculus.

Every name ``c`` becomes a pair ``(c1, c2)``: the input name and the output
name.  Unbuffered names map to ``(c, c)``, buffered ones to ``(c!i, c!o)``
and input-bound variables (which may later receive either kind) to the
distinct pair ``(x!i, x!o)``.  A buffer becomes an agent
``F[n; L; b1, b2]`` that receives pairs on ``b2`` and emits them on ``b1``.
"""

from __future__ import annotations

from typing import NamedTuple

from .canon import _split, canonicalize, check_validity
from .errors import ArityMismatch, CapacityExceeded, InvalidStore, UnsupportedFeature
from .lts import Lts, explore
from .printer import show
from .semantics import TAU, Action, _agent_choice, step
from .syntax import (
    Agent, BufferStore, Choice, Config, IfEq, In, New, NewBuf, Out, Par, Process, Repl, Tau, all_names,
    free_names, fresh, news, par, prefixed,
)


class NamePair(NamedTuple):
    input_name: str
    output_name: str


def translate_name(n: str, buffered: bool) -> NamePair:
    if buffered:
        return NamePair(n + "!i", n + "!o")
    return NamePair(n, n)


def _var_pair(x: str) -> NamePair:
    return NamePair(x + "!i", x + "!o")


def buffer_agent(n, contents, pair: NamePair) -> Agent:
    """``F_{n,L}(b1, b2)`` as an agent constant, unfolded on demand."""
    contents = tuple(tuple(p) for p in contents)
    if len(contents) > n:
        raise CapacityExceeded(f"{len(contents)} pairs in a buffer of capacity {n}")
    return Agent(n, contents, pair[0], pair[1])


def unfold_agent(agent: Agent) -> Choice:
    """One-step unfolding of a buffer agent into its guarded choice."""
    return _agent_choice(agent)


def encode_process(p: Process, buffered: frozenset = frozenset(), variables=()) -> Process:
    """Structural translation; ``buffered`` lists the free buffered names and
    ``variables`` free names standing for input variables (translated as the
    pair ``x!i, x!o`` an enclosing input would bind)."""

    def tr(name: str, env: dict) -> NamePair:
        if name in env:
            return env[name]
        return translate_name(name, name in buffered)

    def enc(q: Process, env: dict) -> Process:
        match q:
            case Choice(branches):
                out_b = []
                for pre, cont in branches:
                    match pre:
                        case In(s, bs, m):
                            if len(bs) != 1:
                                raise UnsupportedFeature("the pair encoding expects monadic prefixes")
                            x = bs[0]
                            xp = _var_pair(x)
                            out_b.append((In(tr(s, env).input_name, tuple(xp), m), enc(cont, {**env, x: xp})))
                        case Out(s, os, m):
                            if len(os) != 1:
                                raise UnsupportedFeature("the pair encoding expects monadic prefixes")
                            out_b.append((Out(tr(s, env).output_name, tuple(tr(os[0], env)), m), enc(cont, env)))
                        case Tau():
                            out_b.append((pre, enc(cont, env)))
                return Choice(tuple(out_b))
            case Par(l, r):
                return Par(enc(l, env), enc(r, env))
            case New(c, body):
                pair = NamePair(c, c)
                return New(c, enc(body, {**env, c: pair}))
            case NewBuf(b, cap, body, _):
                pair = translate_name(b, True)
                inner = par(enc(body, {**env, b: pair}), buffer_agent(cap, (), pair))
                return news(sorted(set(pair)), prefixed(Tau(), inner))
            case Repl(body):
                return Repl(enc(body, env))
            case IfEq() | Agent():
                raise UnsupportedFeature(type(q).__name__)
        raise TypeError(q)

    return enc(p, {x: _var_pair(x) for x in variables})


def encode_store(store: BufferStore, restricted=frozenset()) -> list[Process]:
    """``[[B]]``: one buffer agent per buffered name (local entries read as global)."""
    buffered = store.domain()
    agents = []
    for b, buf in store.entries:
        contents = [tuple(translate_name(e.name, e.name in buffered)) for e in buf.queue]
        agents.append(buffer_agent(buf.capacity, contents, translate_name(b, True)))
    return agents


def encode_config(cfg: Config) -> Process:
    """``[[P, B]]`` with every outermost restriction extruded as a name pair."""
    if not check_validity(cfg):
        raise InvalidStore("store is not valid for the process")
    cfg = canonicalize(cfg)
    names, comps = _split(cfg.process)
    buffered = frozenset(cfg.store.domain())
    restricted = []
    for c in names:
        restricted.extend(dict.fromkeys(translate_name(c, c in buffered)))
    body = par(*(encode_process(c, buffered) for c in comps), *encode_store(cfg.store))
    return canonicalize(Config(news(restricted, body))).process


def translate_action(alpha: Action, store_domain) -> Action:
    """The action translation ``M``."""
    if alpha.kind == "tau":
        return TAU
    dom = set(store_domain)
    s = alpha.subject
    objs = []
    for d in alpha.objects:
        objs.extend(translate_name(d, d in dom))
    bound = []
    for d in alpha.bound:
        bound.extend(dict.fromkeys(translate_name(d, d in dom)))
    buffered = s in dom
    if alpha.kind == "in":
        subj = translate_name(s, buffered).output_name if buffered else s
    else:
        subj = translate_name(s, buffered).input_name if buffered else s
    return Action(alpha.kind, subj, tuple(objs), tuple(dict.fromkeys(bound)))


def pair_pool(p: Process, env=()) -> list[tuple]:
    """Object pairs offered to early inputs: translations of the names in
    ``env`` and of the free names of ``p``, plus one fresh ``(z, z)``.

    A free ``c!i``/``c!o`` couple is read back as the buffered name ``c``; any
    other free name as an unbuffered one.  Pairs that are not translations of
    a single name are never offered (no source action could produce them).
    """
    fn = free_names(p) | set(env)
    pairs = set()
    for n in fn:
        if n.endswith(("!i", "!o")):
            pairs.add(tuple(translate_name(n[:-2], True)))
        else:
            pairs.add((n, n))
    rep = fresh("z", {x for pair in pairs for x in pair} | all_names(p))
    return sorted(pairs) + [(rep, rep)]


def poly_successors(p: Process, env=(), tuples=None) -> list[tuple[Action, Process]]:
    """Early transitions of a polyadic process (no buffer store).

    Inputs are instantiated with ``tuples`` when given, else with
    :func:`pair_pool` of ``p`` and ``env``.
    """
    cfg = canonicalize(Config(p))
    _check_arity(cfg.process)
    if tuples is None:
        tuples = pair_pool(cfg.process, env)
    ts, _ = step(cfg, env, None, tuples)
    return [(t.action, t.target.process) for t in ts]


def _check_arity(p: Process) -> None:
    arities: dict[str, set] = {}

    def walk(q, bound):
        match q:
            case Choice(branches):
                for pre, cont in branches:
                    if isinstance(pre, In) and pre.subject not in bound:
                        arities.setdefault(pre.subject, set()).add(len(pre.binders))
                    elif isinstance(pre, Out) and pre.subject not in bound:
                        arities.setdefault(pre.subject, set()).add(len(pre.objects))
                    walk(cont, bound | set(pre.binders) if isinstance(pre, In) else bound)
            case Par(l, r):
                walk(l, bound)
                walk(r, bound)
            case New(_, b) | NewBuf(_, _, b) | Repl(b):
                walk(b, bound)
            case IfEq(_, _, a, b):
                walk(a, bound)
                walk(b, bound)
            case Agent(_, _, b1, b2):
                arities.setdefault(b1, set()).add(2)
                arities.setdefault(b2, set()).add(2)

    walk(p, set())
    bad = {n: a for n, a in arities.items() if len(a) > 1}
    if bad:
        raise ArityMismatch(f"inconsistent arities: {bad}")


def image_tuples(names, store_domain) -> list[tuple]:
    """Object pairs that are translations of the given source names."""
    dom = set(store_domain)
    return sorted({tuple(translate_name(d, d in dom)) for d in names})


def is_image_label(alpha: Action) -> bool:
    """Whether a polyadic label can be ``M`` of some source action."""
    if alpha.kind == "tau":
        return True
    if len(alpha.objects) != 2:
        return False
    if alpha.kind == "bout":
        ok_objs = set(alpha.objects) <= set(alpha.bound)
    else:
        a, b = alpha.objects
        ok_objs = a == b or (a.endswith("!i") and b == a[:-2] + "!o")
    s = alpha.subject
    if s.endswith("!i") and alpha.kind == "in":
        return False
    if s.endswith("!o") and alpha.kind != "in":
        return False
    return ok_objs


def poly_lts(p: Process, env=(), max_states: int = 20_000, max_depth=None, image_only: bool = True) -> Lts:
    """State space of a polyadic process, optionally keeping only labels in
    the image of the action translation."""
    start = canonicalize(Config(p))
    _check_arity(start.process)
    env = tuple(env)

    def expand(state, depth):
        ts, cut = step(state, (), None, pair_pool(state.process, env))
        edges = [(t.action, t.target, t.simulating) for t in ts
                 if not image_only or is_image_label(t.action)]
        return edges, cut

    return explore(start, expand, lambda c: show(c.process), max_states, max_depth)


__all__ = [
    "NamePair", "translate_name", "buffer_agent", "unfold_agent", "encode_process", "encode_store",
    "encode_config", "translate_action", "poly_successors", "pair_pool", "image_tuples", "is_image_label", "poly_lts",
]
