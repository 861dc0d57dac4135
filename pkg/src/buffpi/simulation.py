"""Step matching between a source language and its buffered-pi encoding.

An encoded configuration moves through *preparing* transitions (silent
bookkeeping) and *simulating* ones (the steps tagged by marks).  Two encoded
states stand for the same source configuration when their preparing
evolutions meet.  Components that can never fire again (a receive on a
private name nobody can write to, a result nobody reads) are discarded first,
since they do not affect behaviour.
"""

from __future__ import annotations

from collections import deque

from .canon import _split, canonicalize
from .errors import NotFromEncoding
from .printer import show_config
from .semantics import Action, Transition, step
from .syntax import (
    Agent, Choice, Config, IfEq, In, New, NewBuf, Out, Par, Process, Repl, Tau, is_marked, news, par,
)

SIMULATING = "simulating"
PREPARING = "preparing"


def classify_transition(t: Transition) -> str:
    """``SIMULATING`` when the move consumed a marked prefix or ``new b:n``."""
    if not is_marked(t.source.process):
        raise NotFromEncoding("source carries no simulation marks")
    return SIMULATING if t.simulating else PREPARING


# ------------------------------------------------------------ dead components


def _guards(p: Process) -> list:
    """Top prefixes of a component, ``None`` standing for an unconditional move."""
    match p:
        case Choice(branches):
            return [pre for pre, _ in branches]
        case Repl(body):
            return [g for c in _split(body)[1] for g in _guards(c)]
        case Agent():
            return [None]
        case NewBuf() | IfEq() | Par() | New():
            return [None]
    return [None]


def _occurrences(p: Process, acc: dict) -> None:
    """Record for every name how it occurs: ``i``/``o`` as a subject, ``x`` otherwise."""

    def note(n, how):
        acc.setdefault(n, set()).add(how)

    match p:
        case Choice(branches):
            for pre, cont in branches:
                match pre:
                    case In(s, bs):
                        note(s, "i")
                        for b in bs:
                            note(b, "x")
                    case Out(s, os):
                        note(s, "o")
                        for o in os:
                            note(o, "x")
                _occurrences(cont, acc)
        case Par(l, r):
            _occurrences(l, acc)
            _occurrences(r, acc)
        case New(n, body) | NewBuf(n, _, body):
            note(n, "x")
            _occurrences(body, acc)
        case Repl(body):
            _occurrences(body, acc)
        case IfEq(x, y, a, b):
            note(x, "x")
            note(y, "x")
            _occurrences(a, acc)
            _occurrences(b, acc)
        case Agent(_, contents, b1, b2):
            for pair in contents:
                for n in pair:
                    note(n, "x")
            note(b1, "o")
            note(b2, "i")


def _top_complements(comps) -> set:
    """Private names on which two different components (or two copies of a
    replicated one) offer complementary top prefixes."""
    ins: dict = {}
    outs: dict = {}
    for i, c in enumerate(comps):
        for g in _guards(c):
            if isinstance(g, In):
                ins.setdefault(g.subject, set()).add(i)
            elif isinstance(g, Out):
                outs.setdefault(g.subject, set()).add(i)
    hot = set()
    for n in ins.keys() & outs.keys():
        if len(ins[n] | outs[n]) > 1 or isinstance(comps[next(iter(ins[n]))], Repl):
            hot.add(n)
    return hot


def prune_dead(cfg: Config) -> Config:
    """Drop components that can never take part in a transition.

    A component is live when one of its guards is silent, free, buffered, or
    a private name that some live component may use in the complementary
    direction or pass around.  The rest are inert and removed.
    """
    cfg = canonicalize(cfg)
    names, comps = _split(cfg.process)
    private = set(names) - cfg.store.domain() - cfg.store.local_names()
    hot = _top_complements(comps)

    def enabled_by(g, uses) -> bool:
        if g is None or isinstance(g, Tau) or g.subject not in private or g.subject in hot:
            return True
        how = uses.get(g.subject, set())
        need = "o" if isinstance(g, In) else "i"
        return need in how or "x" in how

    live = [False] * len(comps)
    uses: dict = {}
    changed = True
    while changed:
        changed = False
        for i, c in enumerate(comps):
            if not live[i] and any(enabled_by(g, uses) for g in _guards(c)):
                live[i] = True
                _occurrences(c, uses)
                changed = True
    if all(live):
        return cfg
    kept = [c for c, ok in zip(comps, live) if ok]
    return canonicalize(Config(news(names, par(*kept)), cfg.store))


def class_key(cfg: Config) -> str:
    return show_config(prune_dead(cfg))


# ------------------------------------------------------------- closures


def preparing_closure(cfg: Config, env=(), limit: int = 20_000) -> dict:
    """States reachable from ``cfg`` by preparing (unmarked silent) moves,
    keyed by :func:`class_key`."""
    start = canonicalize(cfg)
    seen = {class_key(start): start}
    todo = deque([start])
    while todo:
        s = todo.popleft()
        ts, _ = step(s, env)
        for t in ts:
            if t.action.kind != "tau" or t.simulating:
                continue
            k = class_key(t.target)
            if k not in seen:
                if len(seen) >= limit:
                    raise RuntimeError(f"preparing closure exceeds {limit} states")
                seen[k] = t.target
                todo.append(t.target)
    return seen


def _preparing(a, sim) -> bool:
    return a.kind == "tau" and not sim


def preparing_normal_form(cfg: Config, env=(), limit: int = 20_000, cache: dict | None = None) -> Config:
    """Follow preparing moves (always the first one offered) until none is left."""
    s = canonicalize(cfg)
    path = []
    for _ in range(limit):
        k = show_config(s)
        if cache is not None and k in cache:
            s = cache[k]
            break
        path.append(k)
        ts, _ = step(s, env, keep=_preparing, first=True)
        if not ts:
            break
        s = ts[0].target
    else:
        raise RuntimeError(f"preparing run exceeds {limit} moves")
    if cache is not None:
        for k in path:
            cache[k] = s
    return s


def _matches(t: Transition, label: Action) -> bool:
    return t.action == label and (label.kind != "tau" or t.simulating)


def admits_step(source: Config, label: Action, target: Config, env=(), limit: int = 20_000,
                cache: dict | None = None) -> bool:
    """Whether ``source`` can do preparing moves, then one ``label`` move that
    is simulating (or visible), then preparing moves, and end in the class of
    ``target``.

    The quick path compares preparing normal forms, which settles the question
    whenever preparing moves commute; otherwise whole closures are searched.
    """
    cache = {} if cache is None else cache
    goal = class_key(preparing_normal_form(target, env, limit, cache))
    start = preparing_normal_form(source, env, limit, cache)
    ts, _ = step(start, env, keep=lambda a, sim: a == label and (label.kind != "tau" or sim))
    for t in ts:
        if class_key(preparing_normal_form(t.target, env, limit, cache)) == goal:
            return True
    goals = preparing_closure(target, env, limit)
    done = set()
    for s in preparing_closure(source, env, limit).values():
        for t in step(s, env)[0]:
            if not _matches(t, label):
                continue
            k = class_key(t.target)
            if k in done:
                continue
            done.add(k)
            if goals.keys() & preparing_closure(t.target, env, limit).keys():
                return True
    return False


__all__ = [
    "SIMULATING", "PREPARING", "classify_transition", "prune_dead", "class_key", "preparing_closure",
    "preparing_normal_form", "admits_step",
]
