"""Early labelled transition semantics of buffered-pi configurations.

Successors are computed on canonical configurations, where every unguarded
restriction already sits in the outermost prenex.  Rules realised:

* ``IU``/``OU`` for unbuffered free subjects, ``Com`` for complementary
  unbuffered prefixes of two components;
* ``IB``/``OB`` for buffered subjects (one tau step each), ``IBG``/``OBG`` for
  the environment acting on the buffer of a global buffered name;
* ``New``/``Open`` through the prenex: restricted names are global inside
  the premise, become local store entries again in the conclusion, and an
  output of a restricted object is a bound output that drops the restriction;
* ``NewB`` turns ``(νb:n)P`` into ``(νb)P`` and allocates an empty queue;
* replication offers up to two fresh copies of its body per step.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .canon import _split, canonicalize, check_validity
from .errors import InvalidStore, NoMatch
from .lts import Lts, explore
from .printer import show, show_config, show_store
from .syntax import (
    Agent, Buffer, BufferStore, Choice, Config, Entry, In, New, NewBuf, Out, Repl, Tau,
    all_names, config_free_names, fresh, news, par, subst,
)


@dataclass(frozen=True, order=True)
class Action:
    kind: str
    subject: str | None = None
    objects: tuple = ()
    bound: tuple = ()

    def names(self) -> set:
        return ({self.subject} if self.subject else set()) | set(self.objects)

    @property
    def object(self) -> str | None:
        return ",".join(self.objects) if self.kind != "tau" else None

    def __str__(self) -> str:
        if self.kind == "tau":
            return "tau"
        return f"{self.kind} {self.subject} {','.join(self.objects)}"

    def to_json(self) -> dict:
        return {"kind": self.kind, "subject": self.subject, "object": self.object}


TAU = Action("tau")


def free_in(c, *d) -> Action:
    return Action("in", c, tuple(d))


def free_out(c, *d) -> Action:
    return Action("out", c, tuple(d))


def bound_out(c, *d) -> Action:
    return Action("bout", c, tuple(d), tuple(d))


@dataclass(frozen=True)
class Transition:
    source: Config
    action: Action
    target: Config
    simulating: bool = False
    unfolds: int = 0

    def sort_key(self):
        return (self.action, show_config(self.target))


def _agent_choice(a: Agent) -> Choice:
    branches = []
    if len(a.contents) < a.capacity:
        avoid = {n for pair in a.contents for n in pair} | {a.b1, a.b2}
        x1 = fresh("x1", avoid)
        x2 = fresh("x2", avoid | {x1})
        branches.append((In(a.b2, (x1, x2)), Agent(a.capacity, a.contents + ((x1, x2),), a.b1, a.b2)))
    if a.contents:
        branches.append((Out(a.b1, a.contents[0]), Agent(a.capacity, a.contents[1:], a.b1, a.b2)))
    return Choice(tuple(branches))


def _marked(pre, received: tuple = ()) -> bool:
    if not pre.mark:
        return False
    if pre.mark == "*":
        return True
    return pre.mark in received


@dataclass
class _Unit:
    proc: object
    origin: tuple  # ("real", i) or ("copy", repl_index, copy_no, i)


def _global_only(store: BufferStore, restricted: set) -> bool:
    """The store mentions no restricted name (so it cannot influence the
    canonical form of the process)."""
    if store.local_names():
        return False
    names = store.domain() | store.global_names()
    return not (names & restricted) and not any(n.startswith("_") for n in names)


def input_pool(cfg: Config, env=(), proc_names=None) -> list[str]:
    """Objects used to instantiate early inputs: env, free names, one fresh name."""
    fn = config_free_names(cfg)
    known = set(env) | fn
    known -= set(_split(cfg.process)[0])
    rep = fresh("z", known | (all_names(cfg.process) if proc_names is None else proc_names))
    return sorted(known) + [rep]


def successors(cfg: Config, env=(), repl_budget: int | None = None) -> list[Transition]:
    """All transitions of ``cfg`` sorted by (action, target)."""
    if not check_validity(cfg):
        raise InvalidStore(show_store(cfg.store))
    cfg = canonicalize(cfg)
    return step(cfg, env, repl_budget)[0]


class _Enough(Exception):
    pass


def step(cfg: Config, env=(), repl_budget: int | None = None,
         tuples=None, keep=None, first: bool = False) -> tuple[list[Transition], bool]:
    """Successors of a canonical config plus a flag telling whether the
    replication budget withheld any transition.

    ``tuples`` optionally fixes the object tuples offered to early inputs
    instead of every combination drawn from the input pool.  ``keep(action,
    simulating)`` filters transitions before their targets are built, and
    ``first`` stops after the first kept one.
    """
    names, comps = _split(cfg.process)
    restricted = set(names)
    store = cfg.store
    proc_names = all_names(cfg.process)
    pool = input_pool(cfg, env, proc_names)
    everything = proc_names | set(pool) | store.domain() | store.global_names() | store.local_names()

    units: list[_Unit] = []
    copies: dict[tuple, tuple[list, list]] = {}
    taken = set(everything)
    for i, c in enumerate(comps):
        if isinstance(c, Repl):
            bnames, bcomps = _split(c.body)
            for k in (1, 2):
                ren = {}
                for b in bnames:
                    nb = fresh(b.lstrip("_") or "r", taken)
                    taken.add(nb)
                    ren[b] = nb
                ccomps = [subst(x, ren) for x in bcomps]
                copies[(i, k)] = ([ren[b] for b in bnames], ccomps)
                for j, x in enumerate(ccomps):
                    if not isinstance(x, Repl):
                        units.append(_Unit(x, ("copy", i, k, j)))
        else:
            units.append(_Unit(c, ("real", i)))

    results: list[Transition] = []
    cut = False
    proc_text = None
    if cfg.text is not None and _global_only(store, restricted):
        proc_text = cfg.text.rsplit(" ; ", 1)[0]

    def copies_used(origins) -> set:
        return {(o[1], o[2]) for o in origins if o[0] == "copy"}

    def admissible(*origins) -> bool:
        # a second copy of a replicated body is only used together with the first
        second = {(o[1]) for o in origins if o[0] == "copy" and o[2] == 2}
        first = {(o[1]) for o in origins if o[0] == "copy" and o[2] == 1}
        return second <= first

    def emit(action, repl: dict, new_store: BufferStore, sim: bool, extruded=()):
        nonlocal cut
        if keep is not None and not keep(action, sim):
            return
        used = copies_used(repl)
        if repl_budget is not None and len(used) > repl_budget:
            cut = True
            return
        new_comps = []
        for i, c in enumerate(comps):
            if isinstance(c, Repl):
                new_comps.append(c)
            elif ("real", i) in repl:
                new_comps.append(repl[("real", i)])
            else:
                new_comps.append(c)
        new_names = [n for n in names if n not in extruded]
        for (i, k) in sorted(used):
            cnames, ccomps = copies[(i, k)]
            new_names += cnames
            for j, x in enumerate(ccomps):
                new_comps.append(repl.get(("copy", i, k, j), x))
        proc = news(new_names, par(*new_comps))
        if extruded:
            ren = {}
            avoid = set(everything) | taken
            if len(extruded) == 2 and tuple(extruded) == tuple(action.objects):
                # a name pair of the polyadic encoding keeps its input/output shape
                k = 0
                while (nn := "n" if k == 0 else f"n_{k}") in avoid or nn + "!i" in avoid or nn + "!o" in avoid:
                    k += 1
                ren = {extruded[0]: nn + "!i", extruded[1]: nn + "!o"}
            for e in extruded:
                if e in ren:
                    continue
                nn = fresh("n", avoid)
                avoid.add(nn)
                ren[e] = nn
            proc = subst(proc, ren)
            items = []
            for k, b in new_store.entries:
                q = tuple(Entry(ren.get(x.name, x.name), x.local and x.name not in ren) for x in b.queue)
                items.append((ren.get(k, k), Buffer(b.capacity, q)))
            new_store = BufferStore(tuple(items))
            action = Action(action.kind, action.subject,
                            tuple(ren.get(o, o) for o in action.objects),
                            tuple(ren.get(o, o) for o in action.bound))
        if not repl and not extruded and proc_text is not None and _global_only(new_store, restricted):
            # the environment only touched a buffer: the process form is unchanged
            target = Config(cfg.process, new_store, f"{proc_text} ; {show_store(new_store)}")
        else:
            target = canonicalize(Config(proc, new_store))
        results.append(Transition(cfg, action, target, sim, len(used)))
        if first:
            raise _Enough

    def branches(p):
        if isinstance(p, Agent):
            p = _agent_choice(p)
        if isinstance(p, Choice):
            return p.branches
        return ()

    try:
        unit_branches = [(u, branches(u.proc)) for u in units]

        # single-component moves
        for u, brs in unit_branches:
            if not admissible(u.origin):
                continue
            if isinstance(u.proc, NewBuf):
                nb = u.proc
                if nb.name not in store:
                    emit(TAU, {u.origin: New(nb.name, nb.body)}, store.set(nb.name, Buffer(nb.capacity)),
                         bool(nb.mark))
                continue
            for pre, cont in brs:
                match pre:
                    case Tau():
                        emit(TAU, {u.origin: cont}, store, _marked(pre))
                    case In(s, bs):
                        if s in store:
                            buf = store[s]
                            if buf.queue and len(bs) == 1:
                                head = buf.queue[0]
                                emit(TAU, {u.origin: subst(cont, {bs[0]: head.name})},
                                     store.set(s, Buffer(buf.capacity, buf.queue[1:])),
                                     _marked(pre, (head.name,)))
                        elif s not in restricted:
                            offers = (itertools.product(pool, repeat=len(bs)) if tuples is None
                                      else (t for t in tuples if len(t) == len(bs)))
                            for objs in offers:
                                emit(Action("in", s, objs), {u.origin: subst(cont, dict(zip(bs, objs)))},
                                     store, _marked(pre, objs))
                    case Out(s, os):
                        if s in store:
                            buf = store[s]
                            if not buf.full() and len(os) == 1:
                                e = Entry(os[0], os[0] in restricted)
                                emit(TAU, {u.origin: cont}, store.set(s, Buffer(buf.capacity, buf.queue + (e,))),
                                     _marked(pre))
                        elif s not in restricted:
                            bound = tuple(dict.fromkeys(o for o in os if o in restricted))
                            kind = "bout" if bound else "out"
                            emit(Action(kind, s, os, bound), {u.origin: cont}, store, _marked(pre), bound)

        # communication between two components on an unbuffered name
        senders: dict[str, list] = {}
        for v, brs in unit_branches:
            for pre, cont in brs:
                if isinstance(pre, Out) and pre.subject not in store:
                    senders.setdefault(pre.subject, []).append((v, pre, cont))
        for u, brs in unit_branches:
            for pre_u, cont_u in brs:
                if not isinstance(pre_u, In) or pre_u.subject not in senders:
                    continue
                for v, pre_v, cont_v in senders[pre_u.subject]:
                    if v is u or len(pre_v.objects) != len(pre_u.binders) or not admissible(u.origin, v.origin):
                        continue
                    sim = _marked(pre_u, pre_v.objects) or _marked(pre_v)
                    emit(TAU, {u.origin: subst(cont_u, dict(zip(pre_u.binders, pre_v.objects))),
                               v.origin: cont_v}, store, sim)

        # the environment acting on global buffers
        for b, buf in store.entries:
            if b in restricted:
                continue
            if not buf.full():
                for d in pool:
                    emit(Action("in", b, (d,)), {}, store.set(b, Buffer(buf.capacity, buf.queue + (Entry(d),))),
                         False)
            if buf.queue:
                head = buf.queue[0]
                rest = store.set(b, Buffer(buf.capacity, buf.queue[1:]))
                if head.local:
                    emit(Action("bout", b, (head.name,), (head.name,)), {}, rest, False, (head.name,))
                else:
                    emit(Action("out", b, (head.name,)), {}, rest, False)

    except _Enough:
        pass

    uniq = {}
    for t in results:
        k = (t.action, show_config(t.target), t.simulating)
        if k not in uniq or t.unfolds < uniq[k].unfolds:
            uniq[k] = t
    return sorted(uniq.values(), key=lambda t: (t.sort_key(), t.simulating)), cut


# ------------------------------------------------------------------- traces


def parse_pattern(text: str) -> Action:
    parts = text.split()
    if parts == ["tau"]:
        return TAU
    kind, subj, *rest = parts
    objs = tuple(rest[0].split(",")) if rest else ("*",)
    return Action(kind, subj, objs, objs if kind == "bout" else ())


def matches(pattern: Action, action: Action) -> bool:
    if pattern.kind != action.kind:
        return False
    if pattern.kind == "tau":
        return True
    if pattern.subject not in ("*", action.subject):
        return False
    if pattern.objects in (("*",), ()):
        return True
    return len(pattern.objects) == len(action.objects) and all(
        p in ("*", a) for p, a in zip(pattern.objects, action.objects))


def run_trace(cfg: Config, script, env=()) -> list[Transition]:
    """Greedily follow ``script`` (actions or pattern strings; ``*`` is a wildcard)."""
    trace = []
    current = canonicalize(cfg)
    for i, pat in enumerate(script):
        pattern = parse_pattern(pat) if isinstance(pat, str) else pat
        for t in successors(current, env):
            if matches(pattern, t.action):
                trace.append(t)
                current = t.target
                break
        else:
            raise NoMatch(i, pat)
    return trace


def reachable_lts(cfg: Config, max_states: int = 10_000, max_depth: int | None = None,
                  repl_unfold: int | None = 3, env=()) -> Lts:
    """Breadth-first state space of ``cfg``; states are canonical configs."""
    if not check_validity(cfg):
        raise InvalidStore(show_store(cfg.store))
    start = canonicalize(cfg)
    env = set(env) | config_free_names(start)
    unfolds = {}

    def expand(state, depth):
        used = unfolds.get(show_config(state), 0)
        budget = None if repl_unfold is None else repl_unfold - used
        ts, cut = step(state, env, budget)
        edges = []
        for t in ts:
            k = show_config(t.target)
            unfolds.setdefault(k, used + t.unfolds)
            edges.append((t.action, t.target, t.simulating))
        return edges, cut

    return explore(start, expand, show_config, max_states, max_depth)


def trace_json(initial: Config, trace: list[Transition]) -> dict:
    from .printer import store_json

    return {
        "initial": show_config(initial),
        "steps": [
            {"action": t.action.to_json(), "target": show(t.target.process), "store": store_json(t.target.store)}
            for t in trace
        ],
    }


__all__ = [
    "Action", "TAU", "Transition", "successors", "step", "run_trace", "reachable_lts", "input_pool",
    "free_in", "free_out", "bound_out", "matches", "parse_pattern", "trace_json",
]
