"""Canonical forms, structural congruence and store validity.

A configuration is brought into canonical form in three passes:

1. every binder is renamed to a unique temporary (the name convention), with
   store keys and local queue entries following the outermost restriction
   they refer to;
2. the structure is normalised: nested parallel compositions are flattened,
   nil units dropped, unguarded restrictions pulled to the nearest enclosing
   guard (or to the top), unused restrictions garbage collected and
   unguarded name matches resolved;
3. components are ordered by a key that erases bound-name identity and the
   bound names are renumbered ``_1, _2, ...`` in order of first occurrence.
   Ties left after colour refinement are broken by trying the tied orders
   and keeping the smallest rendering.
"""

from __future__ import annotations

import functools
import hashlib
import itertools
from dataclasses import dataclass, field

from .printer import show, show_store
from .syntax import (
    Agent, Buffer, BufferStore, Choice, Config, Entry, IfEq, In, New, NewBuf, Out, Par, Process,
    Repl, Tau, free_names, news, par, top_restricted,
)

MAX_TIE_TRIALS = 120


# ------------------------------------------------------------ pass 1: freshen


def _freshen(cfg: Config) -> tuple[Process, BufferStore]:
    store = cfg.store
    referenced = store.local_names() | store.domain()
    claim: dict[str, str] = {}
    counter = itertools.count()

    def tmp() -> str:
        return f"%{next(counter)}"

    def walk(p: Process, env: dict, guarded: bool) -> Process:
        match p:
            case Choice(branches):
                out_b = []
                for pre, cont in branches:
                    match pre:
                        case In(s, bs, m):
                            inner = dict(env)
                            nbs = []
                            for b in bs:
                                t = tmp()
                                inner[b] = t
                                nbs.append(t)
                            out_b.append((In(env.get(s, s), tuple(nbs), m), walk(cont, inner, True)))
                        case Out(s, os, m):
                            out_b.append((Out(env.get(s, s), tuple(env.get(o, o) for o in os), m),
                                          walk(cont, env, True)))
                        case Tau():
                            out_b.append((pre, walk(cont, env, True)))
                return Choice(tuple(out_b))
            case Par(l, r):
                return Par(walk(l, env, guarded), walk(r, env, guarded))
            case New(n, body):
                t = tmp()
                if not guarded and n in referenced and n not in claim:
                    claim[n] = t
                return New(t, walk(body, {**env, n: t}, guarded))
            case NewBuf(n, cap, body, m):
                t = tmp()
                return NewBuf(t, cap, walk(body, {**env, n: t}, True), m)
            case Repl(body):
                return Repl(walk(body, env, True))
            case IfEq(x, y, a, b):
                return IfEq(env.get(x, x), env.get(y, y), walk(a, env, guarded), walk(b, env, guarded))
            case Agent(cap, contents, i, o):
                g = env.get
                return Agent(cap, tuple((g(a, a), g(b, b)) for a, b in contents), g(i, i), g(o, o))
        raise TypeError(p)

    proc = walk(cfg.process, {}, False)
    items = []
    for name, buf in store.entries:
        q = tuple(Entry(claim.get(e.name, e.name), True) if e.local else e for e in buf.queue)
        items.append((claim.get(name, name), Buffer(buf.capacity, q)))
    return proc, BufferStore(tuple(items))


# ---------------------------------------------------------- pass 2: normalise


def _level(p: Process, bound_inputs: frozenset) -> tuple[list[str], list[Process]]:
    """Split ``p`` into its prenex restrictions and normalised components."""
    match p:
        case Choice(()):
            return [], []
        case Choice(branches):
            out_b = []
            for pre, cont in branches:
                inner = bound_inputs | set(pre.binders) if isinstance(pre, In) else bound_inputs
                out_b.append((pre, _norm(cont, frozenset(inner))))
            return [], [Choice(tuple(out_b))]
        case Par(l, r):
            n1, c1 = _level(l, bound_inputs)
            n2, c2 = _level(r, bound_inputs)
            return n1 + n2, c1 + c2
        case New(n, body):
            ns, cs = _level(body, bound_inputs)
            return [n] + ns, cs
        case NewBuf(n, cap, body, m):
            return [], [NewBuf(n, cap, _norm(body, bound_inputs), m)]
        case Repl(body):
            return [], [Repl(_norm(body, bound_inputs))]
        case IfEq(x, y, a, b):
            if x not in bound_inputs and y not in bound_inputs:
                return _level(a if x == y else b, bound_inputs)
            return [], [IfEq(x, y, _norm(a, bound_inputs), _norm(b, bound_inputs))]
        case Agent():
            return [], [p]
    raise TypeError(p)


def _norm(p: Process, bound_inputs: frozenset) -> Process:
    names, comps = _level(p, bound_inputs)
    used = set().union(*(free_names(c) for c in comps)) if comps else set()
    return news([n for n in names if n in used], par(*comps))


def _split(p: Process) -> tuple[list[str], list[Process]]:
    names = []
    while isinstance(p, New):
        names.append(p.name)
        p = p.body
    comps = []
    stack = [p]
    while stack:
        q = stack.pop()
        if isinstance(q, Par):
            stack.append(q.right)
            stack.append(q.left)
        elif q != Choice(()):
            comps.append(q)
    return names, comps


# ------------------------------------------------------ pass 3: order & name


def _digest(s: str) -> str:
    return hashlib.blake2b(s.encode(), digest_size=6).hexdigest()


@dataclass
class _Namer:
    avoid: set
    assign: dict = field(default_factory=dict)
    counter: int = 0

    def copy(self) -> "_Namer":
        return _Namer(self.avoid, dict(self.assign), self.counter)

    def new(self, tmp: str) -> str:
        while True:
            self.counter += 1
            cand = f"_{self.counter}"
            if cand not in self.avoid:
                self.assign[tmp] = cand
                return cand

    def name(self, n: str, level: set) -> str:
        if n in self.assign:
            return self.assign[n]
        if n in level:
            return self.new(n)
        return n


def _key(p: Process, env: dict, nm: _Namer, depth: int = 0) -> str:
    """Structural key in which bound-name identity is erased."""

    def tok(n):
        if n in env:
            return env[n]
        if n in nm.assign:
            return nm.assign[n]
        if n.startswith("%"):
            return "#"
        return n

    fns = p._fs
    if fns is None:
        free_names(p)
        fns = p._fs
    memo = (depth, tuple(tok(n) for n in fns))
    table = p._k
    if table is None:
        table = {}
        object.__setattr__(p, "_k", table)
    hit = table.get(memo)
    if hit is None:
        hit = table[memo] = _key_of(p, env, nm, depth, tok)
    return hit


def _key_of(p: Process, env: dict, nm: _Namer, depth: int, tok) -> str:
    match p:
        case Choice(branches):
            parts = []
            for pre, cont in branches:
                match pre:
                    case In(s, bs, m):
                        inner = dict(env)
                        for i, b in enumerate(bs):
                            inner[b] = f"${depth + i}"
                        parts.append(f"i{tok(s)}({','.join(inner[b] for b in bs)}){m}."
                                     + _key(cont, inner, nm, depth + len(bs)))
                    case Out(s, os, m):
                        parts.append(f"o{tok(s)}<{','.join(tok(o) for o in os)}>{m}." + _key(cont, env, nm, depth))
                    case Tau(m):
                        parts.append(f"t{m}." + _key(cont, env, nm, depth))
            return "(" + "+".join(parts) + ")"
        case New() | Par():
            names, comps = _split(p)
            inner = dict(env)
            for n in names:
                inner[n] = "#"
            ks = sorted(_key(c, inner, nm, depth) for c in comps)
            return f"N{len(names)}[" + "|".join(ks) + "]"
        case NewBuf(n, cap, body, m):
            return f"B{cap}{m}(" + _key(body, {**env, n: f"${depth}"}, nm, depth + 1) + ")"
        case Repl(body):
            return "!(" + _key(body, env, nm, depth) + ")"
        case IfEq(x, y, a, b):
            return f"?{tok(x)}={tok(y)}(" + _key(a, env, nm, depth) + ")(" + _key(b, env, nm, depth) + ")"
        case Agent(cap, contents, i, o):
            pairs = ",".join(f"{tok(a)}:{tok(b)}" for a, b in contents)
            return f"F{cap}[{pairs}]{tok(i)},{tok(o)}"
    raise TypeError(p)


def _colours(names: list[str], comps: list[Process], nm: _Namer, extra: dict | None = None) -> dict:
    colours = {n: "#" for n in names}
    if len(names) < 2:
        return colours
    plain = [_key(c, colours, nm) for c in comps]
    if len(set(plain)) == len(plain):
        # components are already told apart; refinement cannot change the order
        return colours
    level = set(names)
    sig: dict = {n: [] for n in names}
    for c, k in zip(comps, plain):
        _occurrence_paths(c, level, _digest(k), sig, colours, nm)
    new = {}
    for n in names:
        parts = sorted(sig[n])
        if extra:
            parts.append(extra.get(n, ""))
        new[n] = "#" + _digest("&".join(parts))
    return new


def _occurrence_paths(p: Process, level: set, path: str, sig: dict, colours: dict, nm: _Namer) -> None:
    """Record, for every level name, the structural paths of its occurrences.

    A path lists the erased keys of the nested components it passes through,
    so it does not depend on how bound names are spelled or on the order of
    parallel components."""

    def note(n, where):
        if n in level:
            sig[n].append(where)

    match p:
        case Choice(branches):
            for i, (pre, cont) in enumerate(branches):
                here = f"{path}/{i}"
                match pre:
                    case In(s, bs):
                        note(s, here + "i")
                        tag = f"i{len(bs)}"
                    case Out(s, os):
                        note(s, here + "o")
                        for j, o in enumerate(os):
                            note(o, f"{here}o{j}")
                        tag = f"o{len(os)}"
                    case _:
                        tag = "t"
                _occurrence_paths(cont, level, _digest(here + tag), sig, colours, nm)
        case Par() | New():
            for c in _split(p)[1]:
                _occurrence_paths(c, level, _digest(path + "|" + _key(c, colours, nm)), sig, colours, nm)
        case NewBuf(_, cap, body, _):
            _occurrence_paths(body, level, _digest(f"{path}B{cap}"), sig, colours, nm)
        case Repl(body):
            _occurrence_paths(body, level, _digest(path + "!"), sig, colours, nm)
        case IfEq(x, y, a, b):
            note(x, path + "?l")
            note(y, path + "?r")
            _occurrence_paths(a, level, _digest(path + "?t"), sig, colours, nm)
            _occurrence_paths(b, level, _digest(path + "?e"), sig, colours, nm)
        case Agent(_, contents, i, o):
            for k, (a, b) in enumerate(contents):
                note(a, f"{path}F{k}a")
                note(b, f"{path}F{k}b")
            note(i, path + "Fi")
            note(o, path + "Fo")


def _exact(c: Process, nm: _Namer) -> str:
    # bound names erased, free names kept verbatim: equal exact keys mean the
    # components are alpha-equivalent, so swapping them cannot change a render
    return _key(c, {n: n for n in free_names(c)}, nm)


def _arrangements(group: list[int], comps: list[Process], nm: _Namer) -> list[tuple]:
    if len(group) > 5:
        return [tuple(group)]
    classes: dict = {}
    for i in group:
        classes.setdefault(_exact(comps[i], nm), []).append(i)
    if len(classes) == 1:
        return [tuple(group)]
    labels = [k for k, members in classes.items() for _ in members]
    out = []
    for perm in sorted(set(itertools.permutations(labels))):
        pools = {k: iter(v) for k, v in classes.items()}
        out.append(tuple(next(pools[k]) for k in perm))
    return out


def _orderings(comps: list[Process], keys: list[str], nm: _Namer):
    idx = sorted(range(len(comps)), key=lambda i: keys[i])
    groups = [list(g) for _, g in itertools.groupby(idx, key=lambda i: keys[i])]
    if all(len(g) == 1 for g in groups):
        yield [comps[i] for i in idx]
        return
    choices = [_arrangements(g, comps, nm) if len(g) > 1 else [tuple(g)] for g in groups]
    for n, combo in enumerate(itertools.product(*choices)):
        if n >= MAX_TIE_TRIALS:
            return
        yield [comps[i] for g in combo for i in g]


def _render_level(names: list[str], comps: list[Process], nm: _Namer, extra: dict | None = None,
                  tail=None):
    """Order and name one level; returns the rendered process.

    ``tail`` (top level only) renders the store after the components so that
    store-only names are numbered and participate in tie breaking.
    """
    level = set(names)
    colours = _colours(names, comps, nm, extra)
    keys = [_key(c, colours, nm) for c in comps]
    orders = list(_orderings(comps, keys, nm))
    best = None
    for order in orders:
        trial = nm.copy() if len(orders) > 1 else nm
        rendered = [_render(c, trial, level) for c in order]
        tail_val = tail(trial) if tail else None
        if len(orders) == 1:
            best = (None, rendered, trial, tail_val)
            break
        text = show(par(*rendered)) + ("" if tail_val is None else " ; " + show_store(tail_val))
        if best is None or text < best[0]:
            best = (text, rendered, trial, tail_val)
    _, rendered, trial, tail_val = best
    nm.assign, nm.counter = trial.assign, trial.counter
    finals = sorted((nm.assign[n] for n in names if n in nm.assign), key=lambda s: int(s[1:]))
    proc = news(finals, par(*rendered))
    text = show(proc) + ("" if tail_val is None else " ; " + show_store(tail_val))
    return proc, tail_val, text


def _render(p: Process, nm: _Namer, level: set) -> Process:
    def r(n):
        return nm.name(n, level)

    match p:
        case Choice(branches):
            out_b = []
            for pre, cont in branches:
                match pre:
                    case In(s, bs, m):
                        s2 = r(s)
                        nbs = tuple(nm.new(b) for b in bs)
                        out_b.append((In(s2, nbs, m), _render_cont(cont, nm, level)))
                    case Out(s, os, m):
                        s2 = r(s)
                        out_b.append((Out(s2, tuple(r(o) for o in os), m), _render_cont(cont, nm, level)))
                    case Tau():
                        out_b.append((pre, _render_cont(cont, nm, level)))
            return Choice(tuple(out_b))
        case NewBuf(n, cap, body, m):
            nn = nm.new(n)
            return NewBuf(nn, cap, _render_cont(body, nm, level), m)
        case Repl(body):
            return Repl(_render_cont(body, nm, level))
        case IfEq(x, y, a, b):
            x2, y2 = r(x), r(y)
            return IfEq(x2, y2, _render_cont(a, nm, level), _render_cont(b, nm, level))
        case Agent(cap, contents, i, o):
            cs = tuple((r(a), r(b)) for a, b in contents)
            return Agent(cap, cs, r(i), r(o))
    raise TypeError(p)


def _render_cont(p: Process, nm: _Namer, outer: set) -> Process:
    names, comps = _split(p)
    # names of enclosing levels that are still unnamed are named on first use
    nm_level = outer | set(names)
    if not names and len(comps) <= 1:
        return _render(comps[0], nm, nm_level) if comps else Choice(())
    proc, _ = _render_level_nested(names, comps, nm, outer)
    return proc


def _render_level_nested(names, comps, nm, outer):
    level = set(names)
    colours = _colours(names, comps, nm)
    keys = [_key(c, colours, nm) for c in comps]
    orders = list(_orderings(comps, keys, nm))
    best = None
    for order in orders:
        trial = nm.copy() if len(orders) > 1 else nm
        rendered = [_render(c, trial, level | outer) for c in order]
        if len(orders) == 1:
            best = (None, rendered, trial)
            break
        text = show(par(*rendered))
        if best is None or text < best[0]:
            best = (text, rendered, trial)
    _, rendered, trial = best
    nm.assign, nm.counter = trial.assign, trial.counter
    finals = sorted((nm.assign[n] for n in names if n in nm.assign), key=lambda s: int(s[1:]))
    return news(finals, par(*rendered)), None


# ---------------------------------------------------------------- interface


def canonicalize(cfg: Config) -> Config:
    """Return the canonical representative of ``cfg`` modulo structural congruence."""
    if cfg.text is not None:  # already canonical
        return cfg
    store = cfg.store
    if store.entries and not store.local_names():
        # a store that only mentions global names does not affect the process form
        names = store.domain() | store.global_names()
        if not any(n.startswith("_") for n in names) and not names & set(top_restricted(cfg.process)):
            cp = _canonicalize(Config(cfg.process))
            proc_text = cp.text.rsplit(" ; ", 1)[0]
            return Config(cp.process, store, f"{proc_text} ; {show_store(store)}")
    return _canonicalize(cfg)


@functools.lru_cache(maxsize=1 << 17)
def _canonicalize(cfg: Config) -> Config:
    proc, store = _freshen(cfg)
    names, comps = _level(proc, frozenset())
    used = set().union(*(free_names(c) for c in comps)) if comps else set()
    referenced = store.local_names() | store.domain()
    names = [n for n in names if n in used or n in referenced]
    level = set(names)

    avoid = (used - level) | store.global_names() | (store.domain() - level) | (store.local_names() - level)
    nm = _Namer(avoid)

    extra = {}
    for key, buf in store.entries:
        if key in level:
            extra[key] = extra.get(key, "") + f"K{buf.capacity}:{len(buf.queue)};"
        for i, e in enumerate(buf.queue):
            if e.local and e.name in level:
                extra[e.name] = extra.get(e.name, "") + f"Q{key if key not in level else '#'}:{i};"

    def tail(trial: _Namer) -> BufferStore:
        def keytok(k):
            return trial.assign.get(k, k if k not in level else "~")

        for k, buf in sorted(store.entries, key=lambda kv: (keytok(kv[0]), str(kv[1]))):
            trial.name(k, level)
            for e in buf.queue:
                if e.local:
                    trial.name(e.name, level)
        items = []
        for k, buf in store.entries:
            q = tuple(Entry(trial.assign.get(e.name, e.name), e.local) for e in buf.queue)
            items.append((trial.assign.get(k, k), Buffer(buf.capacity, q)))
        return BufferStore(tuple(items))

    proc, new_store, text = _render_level(names, comps, nm, extra, tail)
    return Config(proc, new_store, text)


def canonical_process(p: Process) -> Process:
    return canonicalize(Config(p)).process


def unfold_replications(cfg: Config) -> Config:
    """Replace every top-level ``!P`` by ``P | !P``."""
    names, comps = _split(cfg.process)
    new_comps = []
    for c in comps:
        if isinstance(c, Repl):
            new_comps.append(c.body)
        new_comps.append(c)
    return canonicalize(Config(news(names, par(*new_comps)), cfg.store))


def congruent(p: Process, q: Process, store: BufferStore = BufferStore(), k: int = 2) -> bool:
    """Decide ``p ≡ q`` relative to ``store`` (replication unfolded up to ``k`` times)."""
    cp = canonicalize(Config(p, store))
    cq = canonicalize(Config(q, store))
    if cp == cq:
        return True
    left, right = [cp], [cq]
    for _ in range(k):
        left.append(unfold_replications(left[-1]))
        right.append(unfold_replications(right[-1]))
    return any(a == b for a in left for b in right)


def check_validity(cfg: Config) -> bool:
    """Every local store entry names an outermost restriction of the process."""
    locals_ = cfg.store.local_names()
    if not locals_:
        return True
    bound = set(top_restricted(cfg.process))
    return locals_ <= bound
